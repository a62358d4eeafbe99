"""Brute-force evolution against the recursion.

The amplitude of first reaching a boundary state at time t equals the
t-th Taylor coefficient of the matching Green function entry.

Run:  python demos/oracle_cross_check.py
"""

from gasketwalk.oracle import evolve_absorbing, passage_series_match, series_match


def main() -> None:
    for n in (0, 1, 2):
        print(f"level {n}: max coefficient mismatch {series_match(n, 14):.2e}")
    print(f"passage, level 2: {passage_series_match(2, 14):.2e}")
    run = evolve_absorbing(3, 0, 120)
    print(f"mass balance over 120 steps at level 3: {run.mass_balance().max():.2e}")


if __name__ == "__main__":
    main()
