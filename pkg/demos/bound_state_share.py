"""How much of C6 comes from the discrete p states alone."""
from h2vdw import run
from h2vdw.sos import c6_prime, s_n, tail_bound


def main() -> None:
    c6 = run(6, 11, "extended").value(6)
    print(f"full C6                     {c6:.10f}")
    for n_max in (2, 5, 10, 50, 300):
        value = c6_prime(n_max)
        print(f"bound states n <= {n_max:<4d}     {value:.10f}   share {value / c6:.4f}")
    print(f"tail estimate beyond 300    {tail_bound(300):.2e}")
    for n in (10, 100, 1000, 10000):
        print(f"n^1.5 S_n at n = {n:<6d}      {n ** 1.5 * s_n(n):.6f}")


if __name__ == "__main__":
    main()
