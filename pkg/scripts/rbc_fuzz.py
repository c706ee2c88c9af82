"""Agreement/totality/validity fuzzing of the RBC layer against Byzantine dealers."""

import argparse

from hbavss.simnet import RBC_DEALERS, rbc_trial


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    args = ap.parse_args()
    for n, f in ((4, 1), (7, 2), (10, 3)):
        for dealer in RBC_DEALERS:
            trials = [rbc_trial(n, f, seed, dealer) for seed in range(args.trials)]
            viol = sum(not (r.agreement and r.totality and r.validity) for r in trials)
            print(f"n={n:<3} f={f} dealer={dealer:<13} violations={viol}/{args.trials}")


if __name__ == "__main__":
    main()
