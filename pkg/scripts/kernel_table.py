"""Ranks of the level operators and integer kernel bases of the adjoint, level by level."""

import argparse

from welding_moments.graded_algebra import from_coordinates, kernel, partition_count, primitive_integer, rank
from welding_moments.virasoro_ops import build_level_operators


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-level", type=int, default=6)
    args = ap.parse_args()
    print("n  p(n)  rank R1  rank R2  rank [R1|R2]  dim ker R1t  route checks")
    for n in range(1, args.max_level + 1):
        ops = build_level_operators(n)
        r2 = rank(ops.R2) if ops.R2 is not None else 0
        rc = rank(ops.R1.hstack(ops.R2)) if ops.R2 is not None else rank(ops.R1)
        K = kernel(ops.R1t)
        checks = "ok" if all(ops.checks.values()) else ops.checks
        print(f"{n:<2} {partition_count(n):<5} {rank(ops.R1):<8} {r2:<8} {rc:<13} {len(K):<12} {checks}")
        for v in K:
            print("     ", from_coordinates(primitive_integer(v), n, "u"))


if __name__ == "__main__":
    main()
