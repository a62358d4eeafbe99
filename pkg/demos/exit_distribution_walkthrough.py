"""Exit probabilities of the Grover walk on the doubled gasket.

Level 1 comes out as the rationals 1/8 and 1/12; deeper levels
concentrate on returning to the origin.

Run:  python demos/exit_distribution_walkthrough.py
"""

from fractions import Fraction

import numpy as np

from gasketwalk import CircleGrid, exit_distribution, recurrence_scan


def show(n: int, grid: CircleGrid) -> None:
    d = exit_distribution(n, grid)
    print(f"level {n}: start-row totals {np.round(d.totals(), 12)}")
    for y, block in d.blocks.items():
        row = [str(Fraction(v).limit_denominator(1000)) if n == 1 else f"{v:.4f}" for v in block[0]]
        print(f"  P(0, {y:>2}) row e0: {row}")


def main() -> None:
    grid = CircleGrid(4096)
    for n in (1, 2):
        show(n, grid)
    scan = recurrence_scan(12, grid)
    print("\nreturn weight (u5, u6 integrals) as the level grows:")
    for n, s in zip(scan.levels, scan.sextet):
        print(f"  n={n:2d}  {s[4]:.6f}  {s[5]:.6f}  corner {s[0]:.2e}")


if __name__ == "__main__":
    main()
