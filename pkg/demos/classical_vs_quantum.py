"""Uniform coin against Grover coin.

The classical walk relaxes at rate (ln 5 - ln 3)/ln 2 and its passage
times grow fivefold per level; the quantum walk keeps a quarter of its
weight on every return channel.

Run:  python demos/classical_vs_quantum.py
"""

import math

from gasketwalk import classical_exponents, exponent_beta_gamma, phi_orbit


def main() -> None:
    print("Phi orbit (exact):")
    for p in phi_orbit(4):
        print(f"  n={p.level}  phi0={p.phi0}  phi1={p.phi1}")
    ex = classical_exponents(4)
    print(f"\nE(T) per level {ex.passage_times.round(6)}  d_w = {ex.d_w:.6f}  (ln5/ln2 = {math.log(5, 2):.6f})")
    print(f"E(tau) per level {ex.return_times.round(6)}  r_w = {ex.r_w:.6f}")
    rep = exponent_beta_gamma((8, 25), coin="classical")
    print(f"\nclassical beta = {rep.beta.slopes[0, 0]:.10f}  target {(math.log(5) - math.log(3)) / math.log(2):.10f}")


if __name__ == "__main__":
    main()
