#!/usr/bin/env python3
"""Tail statistics of diluted quartic draws: total strength and the
strength left behind by the bounded-degree truncation."""

import argparse

from fermiopt.experiments import StudyConfig, run_study, write_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--k-prime", type=int, default=None, help="default 8(k+1)")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="concentration.csv")
    args = ap.parse_args()

    cfg = StudyConfig(
        study="ssyk_concentration",
        trials=args.trials,
        base_seed=args.seed,
        n=args.n,
        k=args.k,
        k_prime=args.k_prime,
        out=args.out,
    )
    result = run_study(cfg)
    write_study(cfg, result, args.out)
    for key, value in result.summary.items():
        print(f"{key}: {value}")


if __name__ == "__main__":
    main()
