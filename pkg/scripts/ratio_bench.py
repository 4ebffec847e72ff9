#!/usr/bin/env python3
"""Certificate bench: achieved energy vs total strength (and vs the exact
eigenvalue when small enough) for one of the three pipelines."""

import argparse

from fermiopt.experiments import StudyConfig, run_study, write_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pipeline", default="strictq", choices=["strictq", "mixed24", "ssyk"])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="ratio_bench.csv")
    args = ap.parse_args()

    cfg = StudyConfig(
        study="ratio_bench",
        trials=args.trials,
        base_seed=args.seed,
        pipeline=args.pipeline,
        n=args.n,
        q=args.q,
        k=args.k,
        out=args.out,
    )
    result = run_study(cfg)
    write_study(cfg, result, args.out)
    for key, value in result.summary.items():
        print(f"{key}: {value}")


if __name__ == "__main__":
    main()
