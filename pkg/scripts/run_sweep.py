"""Bytes per secret for honest and worst-case runs across n, written as CSV."""

import argparse
import csv
import sys

from hbavss.cli import sweep_rows


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", default="4,7,10,13,16")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--backend", default="pairing", choices=["pairing", "dlog"])
    args = ap.parse_args()
    rows = sweep_rows([int(x) for x in args.n.split(",")], args.seed, args.backend)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
