"""Coarse text picture of the order-4 (2,1) radial function on [0, 20]^2."""
import numpy as np

from h2vdw.cli import reduced_radial
from h2vdw.perturbation import build_history
from h2vdw.radial import sample_grid

SHADES = " .:-=+*#%@"


def main() -> None:
    ws = build_history(6, 11, "extended", depth=4)
    t = reduced_radial(ws, 4, 2, 1)
    r = np.linspace(0.0, 12.0, 25)
    vals = sample_grid(t, r, r)
    peak = np.unravel_index(np.argmax(np.abs(vals)), vals.shape)
    print(f"maximum {vals[peak]:.4f} at r1 = {r[peak[0]]:.1f}, r2 = {r[peak[1]]:.1f}")
    print("rows: r1 from 12 down to 0; columns: r2 from 0 to 12")
    scaled = np.abs(vals) / np.abs(vals).max()
    for row in scaled[::-1]:
        print("".join(SHADES[min(int(v * len(SHADES)), len(SHADES) - 1)] * 2 for v in row))


if __name__ == "__main__":
    main()
