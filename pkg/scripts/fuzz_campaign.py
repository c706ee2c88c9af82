"""Schedule-fuzz every scenario file under scenarios/ and summarise failures."""

import argparse
import sys
from pathlib import Path

from hbavss.cli import load_scenario
from hbavss.simnet import schedule_fuzz

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--backend", choices=["pairing", "dlog"])
    ap.add_argument("paths", nargs="*")
    args = ap.parse_args()
    paths = args.paths or sorted(str(p) for p in (ROOT / "scenarios").glob("*.yaml"))
    bad = 0
    for path in paths:
        sc = load_scenario(path, {"backend": args.backend})
        rep = schedule_fuzz(sc, args.trials)
        print(f"{Path(path).name:<22} trials={args.trials:<5} failures={len(rep.failures)}")
        for seed, reason in rep.failures[:5]:
            print(f"    seed={seed}: {reason}")
        bad += len(rep.failures)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
