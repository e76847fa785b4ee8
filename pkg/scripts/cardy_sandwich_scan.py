"""Scan candidate beta values against F(rho) <= int_0^rho exp(-beta/x) dx <= F(log 16 + rho).

Reports, for each beta, where on the grid each side of the inequality holds.
Nothing here estimates beta; the scan only shows which candidates are
compatible with the inequality on the chosen window.
"""

import argparse
from fractions import Fraction

import mpmath

from welding_moments.diagonal_numerics import CARDY_EXPONENT, cardy_exponent, sandwich_check


def grid(spec):
    a, b, s = (Fraction(t) for t in spec.split(":"))
    out = []
    while a <= b:
        out.append(mpmath.mpf(a.numerator) / a.denominator)
        a += s
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", default="0.5,1,2,4,8,12,5pi2/4,20,100")
    ap.add_argument("--grid", default="0.5:10:0.5")
    args = ap.parse_args()
    g = grid(args.grid)
    print("small-rho exponent check:", mpmath.nstr(cardy_exponent(0.1).value, 12), "vs", mpmath.nstr(CARDY_EXPONENT, 12))
    for bt in args.betas.split(","):
        beta = CARDY_EXPONENT if bt == "5pi2/4" else mpmath.mpf(bt)
        rep = sandwich_check(beta, g)
        lower = [mpmath.nstr(r.rho, 4) for r in rep.rows if not r.lower_ok]
        upper = [mpmath.nstr(r.rho, 4) for r in rep.rows if not r.upper_ok]
        print(f"beta={mpmath.nstr(beta, 6):<9} feasible runs {[(mpmath.nstr(a, 4), mpmath.nstr(b, 4)) for a, b in rep.feasible_runs]}")
        print(f"    lower side fails at {lower or 'none'}")
        print(f"    upper side fails at {upper or 'none'}")


if __name__ == "__main__":
    main()
