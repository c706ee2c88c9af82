"""Command line: run scenarios, fuzz schedules, sweep sizes, pretty-print traces.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import yaml

from .simnet import (PHASES, NonQuiescent, Scenario, ScenarioError, phase_of, run,
                     schedule_fuzz, TraceRecord)
from .wire import Kind

SCENARIO_KEYS = {"n", "t", "batch", "seed", "scheduler", "backend", "dealer_fault",
                 "party_faults", "trials"}


class ParseError(Exception):
    pass


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"not a valid document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a mapping")
    unknown = set(doc) - SCENARIO_KEYS
    if unknown:
        raise ParseError(f"unknown keys: {sorted(unknown)}")
    for key in ("n", "t"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    faults = doc.pop("party_faults", None) or {}
    if not isinstance(faults, dict):
        raise ParseError("party_faults must map party index to behavior")
    try:
        pf = tuple(sorted((int(k), str(v)) for k, v in faults.items()))
        ints = {k: int(doc[k]) for k in ("n", "t", "batch", "seed", "trials") if k in doc}
        strs = {k: str(doc[k]) for k in ("scheduler", "backend", "dealer_fault") if k in doc}
        return Scenario(party_faults=pf, **ints, **strs)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None


def load_scenario(path: str, overrides: dict | None = None) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from None
    return parse_scenario(text, overrides)


@dataclass
class ResultRecord:
    digest: str
    seed: int
    verdicts: dict[str, bool]
    metrics: dict
    bytes_per_secret: float
    trace_hash: str

    def to_text(self) -> str:
        return yaml.safe_dump({
            "scenario_digest": self.digest, "seed": self.seed, "verdicts": self.verdicts,
            "metrics": self.metrics, "bytes_per_secret": round(self.bytes_per_secret, 3),
            "trace_hash": self.trace_hash,
        }, sort_keys=False)


def record_of(res) -> ResultRecord:
    m = res.metrics
    metrics = {"total_bytes": m.total_bytes, "messages": m.messages, "phase_bytes": m.phase_bytes,
               "kind_counts": m.counts, "kind_bytes": m.kind_bytes, "waste": m.waste,
               "hash": m.hash_name}
    return ResultRecord(res.scenario.digest(), res.scenario.seed, res.verdicts, metrics,
                        m.bytes_per_secret, res.trace_hash)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _overrides(args) -> dict:
    return {"seed": args.seed, "scheduler": args.scheduler, "backend": args.backend}


def cmd_run(args) -> int:
    sc = load_scenario(args.path, _overrides(args))
    try:
        res = run(sc)
    except NonQuiescent as exc:
        print(f"FAIL seed={sc.seed}: {exc}", file=sys.stderr)
        return 1
    _emit(record_of(res).to_text(), args.out)
    if args.trace:
        Path(args.trace).write_text("".join(r.line() + "\n" for r in res.trace))
    if not res.passed:
        bad = [k for k, ok in res.verdicts.items() if not ok]
        print(f"FAIL seed={sc.seed}: {', '.join(bad)}", file=sys.stderr)
        return 1
    return 0


def cmd_fuzz(args) -> int:
    sc = load_scenario(args.path, _overrides(args))
    trials = args.trials if args.trials is not None else sc.trials
    if trials < 1:
        raise ParseError("trials must be >= 1")
    rep = schedule_fuzz(sc, trials)
    doc = {"scenario_digest": sc.digest(), "trials": trials, "failures": len(rep.failures),
           "verdict_failures": dict(rep.verdict_failures),
           "failing_seeds": [{"seed": s, "reason": r} for s, r in rep.failures]}
    _emit(yaml.safe_dump(doc, sort_keys=False), args.out)
    for seed, reason in rep.failures:
        print(f"FAIL seed={seed}: {reason}", file=sys.stderr)
    return 0 if rep.passed else 1


def sweep_scenario(n: int, mode: str, seed: int = 1, backend: str = "pairing") -> Scenario:
    """B = n; worst case: dealer garbles t parties and t others implicate spuriously."""
    t = (n - 1) // 3
    if mode == "honest":
        return Scenario(n, t, batch=n, seed=seed, backend=backend)
    garbled = ",".join(str(i) for i in range(1, t + 1))
    liars = tuple((i, "spurious-implicate") for i in range(t + 1, 2 * t + 1))
    return Scenario(n, t, batch=n, seed=seed, backend=backend,
                    dealer_fault=f"garble:{garbled}", party_faults=liars)


def sweep_rows(ns: list[int], seed: int = 1, backend: str = "pairing") -> list[dict]:
    rows = []
    for n in ns:
        row = {"n": n, "t": (n - 1) // 3, "batch": n}
        for mode in ("honest", "worst"):
            res = run(sweep_scenario(n, mode, seed, backend))
            row[f"{mode}_bytes_per_secret"] = round(res.metrics.bytes_per_secret, 3)
            row[f"{mode}_r"] = round(res.metrics.bytes_per_secret / n, 3)
            row[f"{mode}_pass"] = res.passed
        row["worst_over_honest"] = round(row["worst_bytes_per_secret"] / row["honest_bytes_per_secret"], 4)
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    try:
        ns = [int(x) for x in args.n.split(",")]
    except ValueError:
        raise ParseError(f"bad n list {args.n!r}") from None
    if any(n < 4 for n in ns):
        raise ParseError("every n must be >= 4")
    rows = sweep_rows(ns, args.seed if args.seed is not None else 1, args.backend or "pairing")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return 0 if all(r["honest_pass"] and r["worst_pass"] for r in rows) else 1


def parse_trace(text: str) -> list[TraceRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            step, kind, s, r, inst, nb = parts
            out.append(TraceRecord(int(step), Kind[kind], int(s), int(r), int(inst), int(nb)))
        except (ValueError, KeyError):
            raise ParseError(f"line {lineno}: bad trace record {line!r}") from None
    return out


def cmd_explain(args) -> int:
    try:
        trace = parse_trace(Path(args.path).read_text())
    except OSError as exc:
        raise ParseError(str(exc)) from None
    n = args.n or max((max(r.sender, r.receiver) for r in trace), default=1) - 1
    phases: Counter = Counter()
    kinds: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    lines = []
    for r in trace:
        ph = phase_of(r, n)
        if r.sender != r.receiver:
            phases[ph] += r.nbytes
            kinds[r.kind.name][0] += 1
            kinds[r.kind.name][1] += r.nbytes
        if args.verbose:
            src = "D" if r.sender == n + 1 else f"P{r.sender}"
            lines.append(f"{r.step:>8}  {src:>4} -> P{r.receiver:<3} {r.kind.name:<11} "
                         f"session={r.instance:<5} {r.nbytes:>6} B  [{ph}]")
    lines.append(f"deliveries: {len(trace)}")
    for name, (c, b) in sorted(kinds.items()):
        lines.append(f"  {name:<11} {c:>8} msgs {b:>10} B")
    for ph in PHASES:
        lines.append(f"  {ph:<11} {phases[ph]:>10} B")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hbavss", description="hbAVSS simulator")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--scheduler")
        p.add_argument("--backend", choices=["pairing", "dlog"])
        p.add_argument("--out")

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("path")
    p.add_argument("--trace", help="write the delivery trace here")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("fuzz", help="run a scenario under many schedules")
    p.add_argument("path")
    p.add_argument("--trials", type=int)
    common(p)
    p.set_defaults(fn=cmd_fuzz)

    p = sub.add_parser("sweep", help="bytes per secret across n (B = n)")
    p.add_argument("--n", default="4,7,10,13,16")
    common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("explain-trace", help="summarise a trace file")
    p.add_argument("path")
    p.add_argument("--n", type=int, help="number of parties (default: inferred)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_explain)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.fn(args)
    except (ParseError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
