#!/usr/bin/env python3
"""Tabulate Stokes and Neumann pencil eigenvalues for a set of cone angles."""

import argparse
import math
from fractions import Fraction

from conestokes import CircularCone, lambda1_plus, mu2_plus, neumann_spectrum, stokes_spectrum


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--angles", default="1/6,1/4,1/2,2/3,5/6", help="half-angles as fractions of pi")
    ap.add_argument("--m-max", type=int, default=6)
    ap.add_argument("--workers", type=int, default=1)
    ns = ap.parse_args()
    fracs = [float(Fraction(f)) for f in ns.angles.split(",")]

    print(f"{'theta0/pi':>10} {'lambda1+':>14} {'mu2+':>14}  Stokes eigenvalues in [-2, 1.6]")
    for f in fracs:
        cone = CircularCone(f * math.pi)
        sp = stokes_spectrum(cone, m_max=ns.m_max, workers=ns.workers)
        lam = lambda1_plus(cone, workers=ns.workers)
        mu = mu2_plus(cone)
        vals = ", ".join(f"{round(v, 8) + 0.0:.8f}" for v in sp.values())
        print(f"{f:>10.4f} {lam:>14.10f} {mu:>14.10f}  {vals}")

    print()
    print(f"{'theta0/pi':>10}  Neumann eigenvalues in [-3, 2]")
    for f in fracs:
        sp = neumann_spectrum(CircularCone(f * math.pi), m_max=ns.m_max, window=(-3.0, 2.0))
        print(f"{f:>10.4f}  " + ", ".join(f"{round(v, 8) + 0.0:.8f}" for v in sp.values()))


if __name__ == "__main__":
    main()
