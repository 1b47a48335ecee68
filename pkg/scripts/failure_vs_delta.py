"""Failure rate of one construction as the corruption fraction grows.

Corruption levels are given as fractions of the construction's tolerated delta.

    python3 scripts/failure_vs_delta.py ham-sr --k 256 --trials 300
"""
import argparse

from randldc.harness_cli import CONSTRUCTIONS, ExperimentConfig, run_experiment, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("construction", choices=CONSTRUCTIONS)
    ap.add_argument("--k", type=int, default=64)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--fractions", default="0,0.25,0.5,1")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    eps = (args.epsilon,)
    if "flex" in args.construction:
        eps = (args.epsilon, args.epsilon / 4)
    print("delta,strategy,epsilon,failure_rate,ci_low,ci_high,mean_queries_bits")
    tolerated = ExperimentConfig(args.construction, args.k, eps).resolved_delta
    for frac in (float(f) for f in args.fractions.split(",")):
        delta = frac * tolerated
        cfg = ExperimentConfig(args.construction, args.k, eps, delta=delta, trials=args.trials,
                               base_seed=args.seed)
        for row in summarize(run_experiment(cfg)):
            print(f"{delta:.6g},{row.strategy},{row.epsilon},{row.failure_rate:.4f},"
                  f"{row.ci_low:.4f},{row.ci_high:.4f},{row.mean_queries_bits:.1f}")


if __name__ == "__main__":
    main()
