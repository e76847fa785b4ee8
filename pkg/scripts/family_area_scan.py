"""Convergence of the truncated area-theorem value of a toward its closed form.

Compares the binomial exterior coefficients with the single-term b_N = conj(w)
variant, which matches only at N = 1.
"""

import argparse

import mpmath

from welding_moments.exact_series import GaussianRational
from welding_moments.welding_family import FamilyPoint, family_a_closed, family_area


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", default="10,20,50,100,200")
    ap.add_argument("--ws", default="1/4,1/2,1/2 i,3/4")
    ap.add_argument("--Ns", default="1,2,3")
    args = ap.parse_args()
    orders = [int(x) for x in args.orders.split(",")]
    print("N  w            order  |a - closed| (binomial b)  tail bound   |a - closed| (single-term b)")
    for N in (int(x) for x in args.Ns.split(",")):
        for wt in args.ws.split(","):
            pt = FamilyPoint(N, GaussianRational.parse(wt))
            target = family_a_closed(pt).value
            for n in orders:
                good = family_area(pt, n)
                lit = family_area(pt, n, literal_b=True)
                print(f"{N:<2} {str(pt.w):<12} {n:<6} {mpmath.nstr(abs(good.value - target), 3):<26} "
                      f"{mpmath.nstr(good.tail_bound, 3):<12} {mpmath.nstr(abs(lit.value - target), 3)}")


if __name__ == "__main__":
    main()
