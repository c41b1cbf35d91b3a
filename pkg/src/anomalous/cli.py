"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import secrets
import sys
from dataclasses import dataclass
from typing import Optional

from .anomaly import DEFAULT_AUDIT_RATE, InconsistencyError, PairError, get_builtin, load_pair
from .model import (
    CLASSES,
    CRATER_ORDER,
    ModelDistribution,
    conjecture_table,
    enumerate_model,
    group_order_oracle,
    height_class_sum,
    prob_valuation_class,
    regime_sum,
    sample_model,
    total_probability,
)
from .scan import (
    GROUPS,
    aggregate_tables,
    format_tables,
    prime_list,
    read_records,
    scan,
    stderr_progress,
    write_records,
    write_summary,
    atomic_write_text,
)

EXIT_OK, EXIT_USAGE, EXIT_INCONSISTENT = 0, 2, 3
DEFAULT_SEED = 0
WORKERS_ENV = "ANOMALOUS_WORKERS"


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


@dataclass
class RunConfig:
    """Resolved options for one scan."""

    pair_source: str
    max_prime: Optional[int]
    num_primes: Optional[int]
    seed: int
    workers: int
    audit_rate: float
    records: Optional[str]
    summary: Optional[str]
    predict: bool
    quiet: bool


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return os.cpu_count() or 1


def parse_seed(text: str) -> int:
    if text == "random":
        seed = secrets.randbits(63)
        print(f"seed {seed}", file=sys.stderr)
        return seed
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"seed must be an integer or 'random', got {text!r}")


def resolve_pair(source: str):
    try:
        if source.startswith("builtin:"):
            return get_builtin(source[len("builtin:"):])
        return load_pair(source)
    except (OSError, PairError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load pair {source!r}: {exc}")


def cmd_scan(cfg: RunConfig) -> int:
    pair = resolve_pair(cfg.pair_source)
    try:
        primes = prime_list(cfg.max_prime, cfg.num_primes)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not 0.0 <= cfg.audit_rate <= 1.0:
        raise UsageError("audit rate must lie in [0, 1]")
    progress = None if cfg.quiet else stderr_progress(max(1000, len(primes) // 20))
    records, summary = scan(
        pair, primes, cfg.seed, cfg.workers, cfg.audit_rate, progress,
        keep_records=cfg.records is not None,
    )
    if cfg.records:
        write_records(cfg.records, records)
    if cfg.summary:
        write_summary(cfg.summary, summary)
    sys.stdout.write(format_tables(summary, predict=cfg.predict))
    if any(not r.crosscheck_ok for r in records):
        print("crosscheck failed on at least one prime", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def tables_csv(summary, predict: bool, h_cols: int = 5) -> str:
    """Long-format CSV of the defect histogram and height matrices."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "defect", "crater_class", "h", "x", "count", "share", "predicted"])
    n = summary.primes_seen
    for key, c in sorted(summary.defect_counts.items()):
        w.writerow(["defect", key, "", "", "", c, f"{c / n:.8f}" if n else "0", ""])
    for key, by_class in sorted(summary.height_tables.items()):
        a, b = map(int, key.split(":"))
        total = summary.defect_counts[key]
        pred = conjecture_table(b, b + h_cols - 1) if predict and a > b else None
        for i in CRATER_ORDER:
            for h in range(b, b + h_cols):
                c = by_class.get(str(i), {}).get(str(h), 0)
                expected = f"{float(pred[i]['H'][h]):.8f}" if pred else ""
                w.writerow(["height", key, i, h, "", c, f"{c / total:.8f}", expected])
    for X, seen, anomalous in summary.running:
        w.writerow(["running", "", "", "", X, anomalous, f"{anomalous / seen:.8f}", ""])
    return buf.getvalue()


def cmd_tables(args) -> int:
    try:
        records = read_records(args.records)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read records {args.records!r}: {exc}")
    summary = aggregate_tables(records, label=args.label or os.path.basename(args.records))
    sys.stdout.write(format_tables(summary, predict=args.predict, h_cols=args.heights, group=args.group))
    if args.csv:
        atomic_write_text(args.csv, tables_csv(summary, args.predict, args.heights))
    return EXIT_OK


def _print_rows(dist, k_max, reference=True):
    print("k  class      mass                 closed form")
    for k in range(k_max + 1):
        for c in CLASSES:
            got = dist.get(k, c)
            ref = prob_valuation_class(k, c) if reference else ""
            print(f"{k:<2d} {c.value:<10s} {str(got):<20s} {ref}")
    print(f"undetermined valuation: {dist.deep}")


def distribution_csv(dist, k_max: int) -> str:
    """Rows (kind, K, n, seed, k, class, mass) with exact masses as fractions."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "K", "n", "seed", "k", "class", "mass"])
    for row in dist.rows(k_max):
        w.writerow(["" if v is None else v for v in row])
    w.writerow([dist.kind, dist.K or "", dist.n or "", "" if dist.seed is None else dist.seed,
                "deep", "", dist.deep])
    return buf.getvalue()


def _maybe_csv(args, dist, k_max):
    if args.csv:
        atomic_write_text(args.csv, distribution_csv(dist, k_max))


def cmd_model(args) -> int:
    action = args.action
    if action == "closed-form":
        if args.k_max < 0:
            raise UsageError("--k-max must be nonnegative")
        print("k  class      probability")
        for k in range(args.k_max + 1):
            for c in CLASSES:
                print(f"{k:<2d} {c.value:<10s} {prob_valuation_class(k, c)}")
        print(f"total over all k: {total_probability()}")
        mass = {(k, c): prob_valuation_class(k, c) for k in range(args.k_max + 1) for c in CLASSES}
        tail = total_probability() - sum(mass.values())
        _maybe_csv(args, ModelDistribution("closed-form", mass, tail), args.k_max)
        if args.verify:
            bad = [(k, c) for k in range(13) for c in CLASSES if regime_sum(k, c) != prob_valuation_class(k, c)]
            if bad or total_probability() != 1:
                print(f"mismatch: {bad}", file=sys.stderr)
                return EXIT_INCONSISTENT
            print("regime sums agree with the closed form for k <= 12")
        return EXIT_OK
    if action == "enumerate":
        try:
            dist = enumerate_model(args.bits, full=args.full)
        except ValueError as exc:
            raise UsageError(str(exc))
        k_max = args.bits - 5
        _print_rows(dist, k_max)
        _maybe_csv(args, dist, k_max)
        if args.verify:
            bad = [(k, c.value) for k in range(k_max + 1) for c in CLASSES
                   if dist.get(k, c) != prob_valuation_class(k, c)]
            if bad:
                print(f"enumeration differs from the closed form at {bad}", file=sys.stderr)
                return EXIT_INCONSISTENT
            print(f"enumeration mod 2^{args.bits} equals the closed form for k <= {k_max}")
        return EXIT_OK
    if action == "sample":
        try:
            dist = sample_model(args.n, seed=args.seed, K=args.bits)
        except ValueError as exc:
            raise UsageError(str(exc))
        k_max = min(args.bits - 5, 10)
        _maybe_csv(args, dist, args.bits - 5)
        print("k  class      sampled     closed form")
        for k in range(k_max + 1):
            for c in CLASSES:
                print(f"{k:<2d} {c.value:<10s} {dist.get(k, c):<11.6f} {float(prob_valuation_class(k, c)):.6f}")
        return EXIT_OK
    if action == "heights":
        if args.m < 2 or args.h_max < args.m:
            raise UsageError("need --h-max >= --m >= 2")
        table = conjecture_table(args.m, args.h_max)
        hs = range(args.m, args.h_max + 1)
        print(f"predicted share of defect ({args.m + 1},{args.m}) primes by crater class and height")
        print("class " + "".join(f"{h:>10d}" for h in hs) + f"{'tail':>10s}{'sum':>8s}")
        for i in CRATER_ORDER:
            row = table[i]
            print(f"{i:5d} " + "".join(f"{str(row['H'][h]):>10s}" for h in hs)
                  + f"{str(row['tail']):>10s}{str(height_class_sum(i, args.m)):>8s}")
        return EXIT_OK
    if action == "oracle":
        try:
            rep = group_order_oracle(args.m)
        except ValueError as exc:
            raise UsageError(str(exc))
        print(f"m = {rep.m}")
        print(f"|GL2(Z/{1 << rep.m})| = {rep.gl_order}")
        print(f"|G({1 << rep.m})| = {rep.subgroup_order}")
        print(f"elements equal to -I mod {1 << (rep.m - 1)}: {rep.minus_identity_mod_lower}")
        print(f"elements equal to -I: {rep.minus_identity}")
        print(f"per-defect proportion: {rep.defect_proportion}")
        print(f"note: {rep.note}")
        return EXIT_OK
    raise UsageError(f"unknown model action {action!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomalous",
        description="Count primes where a rational 2-isogeny pair is isomorphic over F_p but not over F_p^2.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scan", help="classify every prime up to a bound")
    s.add_argument("--pair", required=True, help="builtin:LABEL or a pair JSON file")
    lim = s.add_mutually_exclusive_group(required=True)
    lim.add_argument("--max-prime", type=int, help="scan primes p <= X")
    lim.add_argument("--num-primes", type=int, help="scan the first n primes")
    s.add_argument("--seed", default=str(DEFAULT_SEED), help=f"integer or 'random' (default {DEFAULT_SEED})")
    s.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${WORKERS_ENV} or CPU count)")
    s.add_argument("--audit-rate", type=float, default=DEFAULT_AUDIT_RATE,
                   help="share of skipped primes re-checked over F_p^2")
    s.add_argument("--records", help="write per-prime records CSV here")
    s.add_argument("--summary", help="write the summary JSON here")
    s.add_argument("--predict", action="store_true", help="show model predictions next to height tables")
    s.add_argument("--quiet", action="store_true", help="no progress on stderr")

    t = sub.add_parser("tables", help="tables from a records CSV")
    t.add_argument("records", help="records CSV written by scan")
    t.add_argument("--group", choices=GROUPS, default="all")
    t.add_argument("--predict", action="store_true")
    t.add_argument("--heights", type=int, default=5, help="height columns per table")
    t.add_argument("--csv", help="also write the tables as CSV here")
    t.add_argument("--label", help="pair label for the header")

    m = sub.add_parser("model", help="the random-matrix model")
    m.add_argument("action", choices=["closed-form", "enumerate", "sample", "heights", "oracle"])
    m.add_argument("--k-max", type=int, default=8)
    m.add_argument("--bits", type=int, default=None, help="work modulo 2^bits (enumerate: 10, sample: 16)")
    m.add_argument("--full", action="store_true", help="enumerate without collapsing the y loop")
    m.add_argument("--n", type=int, default=1_000_000, help="sample size")
    m.add_argument("--seed", type=int, default=DEFAULT_SEED)
    m.add_argument("--m", type=int, default=2)
    m.add_argument("--h-max", type=int, default=6)
    m.add_argument("--verify", action="store_true", help="check against the closed form; exit 3 on mismatch")
    m.add_argument("--csv", help="write the distribution as CSV here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "scan":
            workers = args.workers if args.workers is not None else default_workers()
            if workers < 1:
                raise UsageError("--workers must be at least 1")
            cfg = RunConfig(
                args.pair, args.max_prime, args.num_primes, parse_seed(args.seed), workers,
                args.audit_rate, args.records, args.summary, args.predict, args.quiet,
            )
            return cmd_scan(cfg)
        if args.command == "tables":
            return cmd_tables(args)
        if args.bits is None:
            args.bits = 16 if args.action == "sample" else 10
        return cmd_model(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
