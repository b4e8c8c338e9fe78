"""Seeded one-round active-learning study on a 1-D design family."""

import argparse

from spadesign.synthetic import toy_active_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--members", type=int, default=4)
    args = ap.parse_args()

    hits = 0
    for seed in range(args.seeds):
        r = toy_active_study(seed, n_members=args.members)
        hits += r.reduced
        print(f"seed {seed}: contact {r.design.contact_radius:6.3f} mm  "
              f"std {r.std_before:8.4f} -> {r.std_after:8.4f} N  alpha {r.score:.3f}")
    print(f"reduced in {hits}/{args.seeds} runs")


if __name__ == "__main__":
    main()
