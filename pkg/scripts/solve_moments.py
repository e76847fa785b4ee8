"""Solve the moment tables level by level and write them to disk with timings."""

import argparse
import json
import time
from pathlib import Path

from welding_moments.moment_engine import EngineConfig, MomentEngine, dual_route_agreement, table_to_csv, table_to_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-level", type=int, default=6)
    ap.add_argument("--allow-large", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("out/moments"))
    ap.add_argument("--check-routes", action="store_true", help="compare direct and factored assembly")
    args = ap.parse_args()

    eng = MomentEngine(EngineConfig(max_level=args.max_level, allow_large=args.allow_large))
    args.out.mkdir(parents=True, exist_ok=True)
    tables = []
    for n in range(1, args.max_level + 1):
        t0 = time.perf_counter()
        system = eng.assemble_level(n)
        t1 = time.perf_counter()
        table = eng.solve_level(n, system)
        t2 = time.perf_counter()
        tables.append(table)
        line = (f"level {n}: {len(system.unknowns)} unknowns, {len(system.equations)} equations, "
                f"assemble {t1 - t0:.2f}s, solve {t2 - t1:.2f}s, symmetric {table.is_symmetric()}")
        if args.check_routes:
            ok, bad = dual_route_agreement(eng, n)
            line += f", routes agree {ok}"
        print(line)
        (args.out / f"level{n}.json").write_text(json.dumps(table_to_json(table), indent=2, sort_keys=True) + "\n")
    (args.out / "moments.csv").write_text(table_to_csv(tables))
    print(f"written to {args.out}")


if __name__ == "__main__":
    main()
