"""Prime sweeps, the running summary, table formatting and record files."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

from .anomaly import DEFAULT_AUDIT_RATE, PrimeRecord, RationalPair, classify_prime
from .arith import first_primes, primes_up_to
from .curve import SylowShape
from .isogeny import VolcanoProfile
from .model import CRATER_ORDER, conjecture_table

__all__ = [
    "CSV_FIELDS",
    "ScanSummary",
    "prime_list",
    "iter_scan",
    "scan",
    "aggregate_tables",
    "format_tables",
    "record_to_row",
    "row_to_record",
    "write_records",
    "read_records",
    "write_summary",
    "atomic_write_text",
    "records_csv",
    "stderr_progress",
    "GROUPS",
]

CSV_FIELDS = [
    "p", "status", "t", "D", "dK", "f", "h", "crater_class", "level_E", "level_Ep",
    "sE_p", "sEp_p", "sE_p2", "sEp_p2", "defect_E", "defect_Ep", "m", "crosscheck",
]

CHUNK = 256


def prime_list(max_prime: Optional[int] = None, num_primes: Optional[int] = None) -> list[int]:
    """Primes up to max_prime, or the first num_primes primes (exactly one limit)."""
    if (max_prime is None) == (num_primes is None):
        raise ValueError("give exactly one of max_prime and num_primes")
    if max_prime is not None:
        if max_prime < 5:
            raise ValueError("max_prime must be at least 5")
        return primes_up_to(max_prime)
    if num_primes < 3:
        raise ValueError("num_primes must be at least 3")
    return first_primes(num_primes)


# worker-process state, set once per process by the pool initializer
_WORKER: dict = {}


def _init_worker(pair_json: dict, seed, audit_rate: float):
    _WORKER["pair"] = RationalPair.from_json(pair_json)
    _WORKER["seed"] = seed
    _WORKER["audit"] = audit_rate


def _classify_chunk(primes: list[int]) -> list[PrimeRecord]:
    pair, seed, rate = _WORKER["pair"], _WORKER["seed"], _WORKER["audit"]
    return [classify_prime(pair, p, seed, rate) for p in primes]


def iter_scan(
    pair: RationalPair,
    primes: list[int],
    seed=0,
    workers: int = 1,
    audit_rate: float = DEFAULT_AUDIT_RATE,
    progress: Optional[Callable[[int, int], None]] = None,
) -> Iterator[PrimeRecord]:
    """Classify every prime, yielding records in increasing p.

    Per-prime randomness depends only on (seed, p), so the output does not
    depend on the number of workers.
    """
    chunks = [primes[i : i + CHUNK] for i in range(0, len(primes), CHUNK)]
    done = 0
    if workers <= 1:
        for ch in chunks:
            for p in ch:
                yield classify_prime(pair, p, seed, audit_rate)
            done += len(ch)
            if progress:
                progress(done, len(primes))
        return
    import multiprocessing as mp

    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(workers, _init_worker, (pair.to_json(), seed, audit_rate)) as pool:
        for recs in pool.imap(_classify_chunk, chunks):
            yield from recs
            done += len(recs)
            if progress:
                progress(done, len(primes))


def _checkpoints(limit: int) -> set[int]:
    marks, base = set(), 1000
    while base <= limit:
        marks.update({base, 2 * base, 5 * base})
        base *= 10
    return marks


@dataclass
class ScanSummary:
    """Counts for one sweep.  P(X) divides by all primes seen, good or bad."""

    label: str = ""
    seed: object = 0
    primes_seen: int = 0
    max_prime: int = 0
    good: int = 0
    status_counts: dict = field(default_factory=dict)
    fp_isomorphic: int = 0
    fp_non_isomorphic: int = 0
    anomalous_total: int = 0
    defect_counts: dict = field(default_factory=dict)
    height_tables: dict = field(default_factory=dict)
    running: list = field(default_factory=list)

    @property
    def proportion(self) -> float:
        return self.anomalous_total / self.primes_seen if self.primes_seen else 0.0

    def add(self, rec: PrimeRecord, marks: Optional[set] = None):
        self.primes_seen += 1
        self.max_prime = max(self.max_prime, rec.p)
        self.status_counts[rec.status] = self.status_counts.get(rec.status, 0) + 1
        if rec.good:
            self.good += 1
            if rec.iso_over_p:
                self.fp_isomorphic += 1
            elif rec.iso_over_p is not None:
                self.fp_non_isomorphic += 1
        if rec.status == "anomalous":
            self.anomalous_total += 1
            key = f"{rec.defect[0]}:{rec.defect[1]}"
            self.defect_counts[key] = self.defect_counts.get(key, 0) + 1
            cls = str(rec.profile.crater_class)
            by_h = self.height_tables.setdefault(key, {}).setdefault(cls, {})
            by_h[str(rec.profile.h)] = by_h.get(str(rec.profile.h), 0) + 1
        if marks and self.primes_seen in marks:
            self.running.append([rec.p, self.primes_seen, self.anomalous_total])

    def finish(self):
        if self.primes_seen and (not self.running or self.running[-1][1] != self.primes_seen):
            self.running.append([self.max_prime, self.primes_seen, self.anomalous_total])
        return self

    def defect_count(self, a: int, b: int) -> int:
        return self.defect_counts.get(f"{a}:{b}", 0)

    def table_share(self, defect: str, crater_class: int, h: int) -> float:
        total = self.defect_counts.get(defect, 0)
        if not total:
            return 0.0
        return self.height_tables.get(defect, {}).get(str(crater_class), {}).get(str(h), 0) / total

    def to_json(self) -> dict:
        out = asdict(self)
        out["proportion"] = self.proportion
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ScanSummary":
        obj = dict(obj)
        obj.pop("proportion", None)
        return cls(**obj)


def aggregate_tables(records: Iterable[PrimeRecord], label: str = "", seed=0) -> ScanSummary:
    """Fold records (in increasing p) into a summary."""
    records = sorted(records, key=lambda r: r.p)
    summary = ScanSummary(label=label, seed=seed)
    marks = _checkpoints(len(records))
    for rec in records:
        summary.add(rec, marks)
    return summary.finish()


def scan(
    pair: RationalPair,
    primes: list[int],
    seed=0,
    workers: int = 1,
    audit_rate: float = DEFAULT_AUDIT_RATE,
    progress=None,
    keep_records: bool = True,
) -> tuple[list[PrimeRecord], ScanSummary]:
    """Run a sweep; returns the records (unless dropped) and the summary."""
    summary = ScanSummary(label=pair.label, seed=seed)
    marks = _checkpoints(len(primes))
    kept = []
    for rec in iter_scan(pair, primes, seed, workers, audit_rate, progress):
        summary.add(rec, marks)
        if keep_records:
            kept.append(rec)
    return kept, summary.finish()


def _sort_defects(keys):
    def order(k):
        a, b = map(int, k.split(":"))
        return (min(a, b), -a)

    return sorted(keys, key=order)


GROUPS = ("all", "defect", "height", "running")


def format_tables(summary: ScanSummary, predict: bool = False, h_cols: int = 5, group: str = "all") -> str:
    """Plain-text defect histogram, height tables and running proportion.

    ``group`` restricts the output to one of the three sections.
    """
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}")
    out = io.StringIO()
    w = out.write
    w(f"pair {summary.label}: {summary.primes_seen} primes up to {summary.max_prime}, "
      f"{summary.good} good\n")
    w(f"isomorphic over F_p: {summary.fp_isomorphic}   not isomorphic: {summary.fp_non_isomorphic}\n")
    w(f"anomalous: {summary.anomalous_total}   P(X) = {summary.proportion:.6f}\n")
    keys = _sort_defects(summary.defect_counts)
    if group in ("all", "defect"):
        _defect_section(w, summary, keys)
    if group in ("all", "height"):
        _height_section(w, summary, keys, predict, h_cols)
    if group in ("all", "running") and summary.running:
        w("\n       X   primes  anomalous      P(X)\n")
        for X, n, a in summary.running:
            w(f"{X:8d} {n:8d} {a:10d}  {a / n:.6f}\n")
    return out.getvalue()


def _defect_section(w, summary, keys):
    w("\ndefect      count   share of primes\n")
    for k in keys:
        c = summary.defect_counts[k]
        share = c / summary.primes_seen if summary.primes_seen else 0.0
        w(f"({k.replace(':', ',')})".ljust(10) + f"{c:7d}   {share:.6f}\n")
    w(f"total     {summary.anomalous_total:7d}\n")


def _height_section(w, summary, keys, predict, h_cols):
    for k in keys:
        a, b = map(int, k.split(":"))
        if a < b:
            continue
        m = b
        hs = list(range(m, m + h_cols))
        total = summary.defect_counts[k]
        w(f"\ndefect ({a},{b}) by crater class (rows) and height (columns), {total} primes\n")
        w("class " + "".join(f"{h:>8d}" for h in hs) + f"{'>=' + str(hs[-1] + 1):>8s}\n")
        table = summary.height_tables.get(k, {})
        pred = conjecture_table(m, hs[-1]) if predict else None
        for i in CRATER_ORDER:
            row = table.get(str(i), {})
            counts = [row.get(str(h), 0) for h in hs]
            tail = sum(v for h, v in row.items() if int(h) > hs[-1])
            w(f"{i:5d} " + "".join(f"{c:8d}" for c in counts) + f"{tail:8d}\n")
            if pred:
                obs = [c / total for c in counts] + [tail / total]
                exp = [float(pred[i]["H"][h]) for h in hs] + [float(pred[i]["tail"])]
                w("  obs " + "".join(f"{x:8.4f}" for x in obs) + "\n")
                w("  exp " + "".join(f"{x:8.4f}" for x in exp) + "\n")


# ---------------------------------------------------------------------------
# files


def _opt(v):
    return "" if v is None else str(v)


def record_to_row(rec: PrimeRecord) -> dict:
    prof = rec.profile
    return {
        "p": rec.p,
        "status": rec.status,
        "t": _opt(rec.t),
        "D": _opt(prof and prof.D),
        "dK": _opt(prof and prof.dK),
        "f": _opt(prof and prof.f),
        "h": _opt(prof and prof.h),
        "crater_class": _opt(prof and prof.crater_class),
        "level_E": _opt(rec.level_E),
        "level_Ep": _opt(rec.level_Ep),
        "sE_p": _opt(rec.sylow_E_p),
        "sEp_p": _opt(rec.sylow_Ep_p),
        "sE_p2": _opt(rec.sylow_E_p2),
        "sEp_p2": _opt(rec.sylow_Ep_p2),
        "defect_E": _opt(rec.defect and rec.defect[0]),
        "defect_Ep": _opt(rec.defect and rec.defect[1]),
        "m": _opt(rec.m),
        "crosscheck": "true" if rec.crosscheck_ok else "false",
    }


def row_to_record(row: dict) -> PrimeRecord:
    def num(key):
        v = row.get(key, "")
        return int(v) if v not in ("", None) else None

    def shape(key):
        v = row.get(key, "")
        return SylowShape.parse(v) if v else None

    p = int(row["p"])
    status = row["status"]
    if status not in ("bad", "supersingular", "skip_3mod4", "skip_2mod4",
                      "non_isomorphic", "isomorphic", "anomalous"):
        raise ValueError(f"unknown status {status!r}")
    prof = None
    if row.get("D"):
        prof = VolcanoProfile(num("t"), p, num("D"), num("dK"), num("f"), num("h"), num("crater_class"))
    defect = None
    if row.get("defect_E"):
        defect = (num("defect_E"), num("defect_Ep"))
    cc = row.get("crosscheck", "true")
    if cc not in ("true", "false"):
        raise ValueError(f"bad crosscheck flag {cc!r}")
    return PrimeRecord(
        p, status, num("t"), prof, num("level_E"), num("level_Ep"),
        shape("sE_p"), shape("sEp_p"), shape("sE_p2"), shape("sEp_p2"),
        defect, num("m"), cc == "true",
    )


def atomic_write_text(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_csv(records: Iterable[PrimeRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(record_to_row(rec))
    return buf.getvalue()


def write_records(path, records: Iterable[PrimeRecord]):
    atomic_write_text(path, records_csv(records))


def read_records(path) -> list[PrimeRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [row_to_record(row) for row in reader]


def write_summary(path, summary: ScanSummary):
    atomic_write_text(path, json.dumps(summary.to_json(), indent=2, sort_keys=True) + "\n")


def stderr_progress(every: int = 10000):
    """A progress callback printing to standard error."""
    state = {"next": every}

    def report(done: int, total: int):
        if done >= state["next"] or done == total:
            print(f"  {done}/{total} primes", file=sys.stderr, flush=True)
            state["next"] = done + every

    return report
