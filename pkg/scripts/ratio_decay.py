#!/usr/bin/env python3
"""Ratio-decay study for the dense quartic ensemble: best-found Gaussian
value over the exact maximum across a size grid, with log-log fits, plus
the rotated-state sweep statistics of the two-colored variant."""

import argparse

from fermiopt.experiments import StudyConfig, run_study, write_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--sizes", default="4,5,6,7,8", help="mode counts, comma separated")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--restarts", type=int, default=6)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="ratio_decay.csv")
    ap.add_argument("--sweep-n1", type=int, default=8)
    ap.add_argument("--sweep-n2", type=int, default=4)
    ap.add_argument("--sweep-trials", type=int, default=200)
    ap.add_argument("--skip-sweep", action="store_true")
    args = ap.parse_args()

    cfg = StudyConfig(
        study="syk_scaling",
        trials=args.trials,
        base_seed=args.seed,
        q=args.q,
        size_grid=tuple(int(s) for s in args.sizes.split(",")),
        restarts=args.restarts,
        out=args.out,
    )
    result = run_study(cfg)
    write_study(cfg, result, args.out)
    for key, value in result.summary.items():
        print(f"{key}: {value}")

    if not args.skip_sweep:
        sweep_cfg = StudyConfig(
            study="theta_sweep",
            trials=args.sweep_trials,
            base_seed=args.seed + 1,
            q=args.q,
            n1=args.sweep_n1,
            n2=args.sweep_n2,
            out=args.out + ".sweep.csv",
        )
        sweep = run_study(sweep_cfg)
        write_study(sweep_cfg, sweep, sweep_cfg.out)
        for key, value in sweep.summary.items():
            print(f"sweep {key}: {value}")


if __name__ == "__main__":
    main()
