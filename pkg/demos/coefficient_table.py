"""Compute C6..C19 and compare with published reference values.

Run with ``python demos/coefficient_table.py [degree]`` (default degree 11).
"""
import sys
import time

from h2vdw import run

REFERENCE = {
    6: 6.49902670540, 8: 124.399083, 10: 3285.82841, 11: -3474.89803,
    12: 122727.608, 13: -326986.924, 14: 6361736.04, 15: -28395580.6,
    16: 441205192.0, 17: -2.73928165e9, 18: 3.93524773e10, 19: -3.07082459e11,
}


def main(degree: int = 11) -> None:
    start = time.perf_counter()
    table = run(19, degree, "extended")
    print(f"degree {degree}, {time.perf_counter() - start:.1f} s\n")
    print(f"{'n':>3}  {'C_n':>22}  {'method':>15}  {'rel. diff':>9}")
    for e in table:
        ref = REFERENCE.get(e.n)
        diff = "" if ref is None else f"{abs(e.value - ref) / abs(ref):9.1e}"
        print(f"{e.n:3d}  {e.value:22.12g}  {e.method:>15}  {diff}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 11)
