"""Bracket relations of the interior and exterior rules, and the diagonal identities.

The interior rules satisfy [L_n, L_m] = (m-n) L_{n+m}; the exterior rules
(acting on l, lbar and rhoinf) satisfy the opposite sign.  This prints the
defect counts for both conventions and the exact residuals of the diagonal
identities.
"""

import argparse

from welding_moments.graded_algebra import enumerate_partitions, monomial, rho0, rhoinf
from welding_moments.virasoro_ops import commutator_check, dilation_diagnostic, exterior_bracket_check, verify_diagonal_lemma


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--range", type=int, default=3)
    args = ap.parse_args()
    N = args.range
    interior = [rho0(0, 1) * monomial("u", P) for k in range(3) for P in enumerate_partitions(k)]
    exterior = [rhoinf(0, 1) * monomial("l", P) for k in range(3) for P in enumerate_partitions(k)]
    pairs = [(n, m) for n in range(-N, N + 1) for m in range(-N, N + 1)]
    for name, elems in (("interior", interior), ("exterior", exterior)):
        spec_sign = sum(not commutator_check(n, m, x).is_zero() for n, m in pairs for x in elems)
        opposite = sum(not exterior_bracket_check(n, m, x).is_zero() for n, m in pairs for x in elems)
        total = len(pairs) * len(elems)
        print(f"{name}: (m-n) sign fails {spec_sign}/{total}, (n-m) sign fails {opposite}/{total}")
    for n in (1, 2, 3):
        for order in ("L_n L_-n", "L_-n L_n"):
            r = verify_diagonal_lemma(n, order=order)
            print(f"diagonal {r.label}: {'zero' if r.ok else r.difference}")
    for m, n in ((1, 0), (2, 0), (2, 1), (3, 1), (3, 2)):
        r = verify_diagonal_lemma(n, m)
        print(f"off-diagonal {r.label}: {'zero' if r.ok else r.difference}")
    for k, v in dilation_diagnostic().items():
        print(f"{k} = {v}")


if __name__ == "__main__":
    main()
