"""Train on a known monotone family and report held-out errors.

Two splits are reported: random whole (membrane, height) tests, and whole
membranes (k-fold by membrane), the harder extrapolation.
"""

import argparse

from spadesign.surrogate import SurrogateConfig, kfold_rmse, rmse, train
from spadesign.synthetic import random_family_dataset, split_tests


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--designs", type=int, default=12)
    ap.add_argument("--iterations", type=int, default=10000)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    s = random_family_dataset(args.designs, seed=args.seed)
    cfg = SurrogateConfig(iterations=args.iterations, seed=args.seed)
    span = float(s.force.max() - s.force.min())
    tr, te = split_tests(s, 0.2, seed=args.seed)
    r = rmse(train(tr, cfg), te)
    print(f"force range {span:.2f} N")
    print(f"held-out tests:     RMSE {r:.3f} N ({100 * r / span:.2f}% of range)")
    kf = kfold_rmse(s, args.k, cfg)
    print(f"held-out membranes: RMSE {kf.mean:.3f} N ({100 * kf.mean / span:.2f}% of range), "
          f"folds {[round(v, 2) for v in kf.fold_rmse]}")


if __name__ == "__main__":
    main()
