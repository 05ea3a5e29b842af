"""The three-party pipeline, simulated in one process.

Data owners (DO) encrypt their shares and split the merged ciphertext
database into one block per intermediate cloud server (ICS). Every ICS mines
its block independently and sends back a local report; the frequent-itemset
computing server (FCCS) waits for all reports, sums the capped counts of each
itemset and derives association rules. The DO finally decrypts the result.

Two aggregation modes exist. ``union`` keeps every itemset that any ICS
found locally frequent, which never misses a globally frequent itemset.
``sum`` keeps only itemsets whose summed capped count reaches the global
threshold, which never reports a false positive. Supports in both modes are
sums of capped counts, so they are lower bounds of the true supports.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from ppfim import crypto
from ppfim.crypto import DoubleEncryptionKey
from ppfim.dataset import Transaction, TransactionDatabase
from ppfim.errors import (
    EmptyDatabaseError,
    IncompleteAggregationError,
    InvalidParameterError,
    PhaseError,
)
from ppfim.miner import Itemset, LocalMiningReport, itemset_key, mine_local, sort_itemsets
from ppfim.splitter import PartitionAssignment, block_sizes, split

MODES = ("union", "sum")
EXECUTORS = ("serial", "thread", "process")
REPORT_VERSION = 1


def _fraction(value) -> Fraction:
    # str() first so 0.1 means one tenth, not the nearest binary double
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


@dataclass(frozen=True)
class PipelineConfig:
    """Run parameters. ``key=None`` runs the identical pipeline on plaintext."""

    n_ics: int = 2
    relative_min_sup: float = 0.1
    min_conf: float = 0.5
    aggregation_mode: str = "union"
    key: DoubleEncryptionKey | None = field(default_factory=DoubleEncryptionKey)
    seed: int = 0
    n_data_owners: int = 1
    max_level: int | None = None
    executor: str = "thread"

    def __post_init__(self):
        if self.n_ics < 1:
            raise InvalidParameterError(f"n_ics must be >= 1, got {self.n_ics}")
        if self.n_data_owners < 1:
            raise InvalidParameterError(f"n_data_owners must be >= 1, got {self.n_data_owners}")
        if not 0 < self.relative_min_sup <= 1:
            raise InvalidParameterError(f"sigma must be in (0, 1], got {self.relative_min_sup}")
        if not 0 < self.min_conf <= 1:
            raise InvalidParameterError(f"min_conf must be in (0, 1], got {self.min_conf}")
        if self.aggregation_mode not in MODES:
            raise InvalidParameterError(f"aggregation mode must be one of {MODES}, got {self.aggregation_mode!r}")
        if self.executor not in EXECUTORS:
            raise InvalidParameterError(f"executor must be one of {EXECUTORS}, got {self.executor!r}")
        if self.max_level is not None and self.max_level < 1:
            raise InvalidParameterError(f"max_level must be >= 1, got {self.max_level}")


# -- messages -------------------------------------------------------------


def _tokens_to_hex(items: Iterable[bytes]) -> list[str]:
    return [crypto.to_hex(t) for t in items]


def _tokens_from_hex(items: Iterable[str]) -> tuple[bytes, ...]:
    return tuple(crypto.from_hex(t) for t in items)


@dataclass(frozen=True)
class EncryptedBlockMsg:
    """DO -> ICS: one block of ciphertext transactions."""

    partition_index: int
    transactions: tuple[Transaction, ...]

    def to_dict(self) -> dict:
        return {
            "partition_index": self.partition_index,
            "transactions": [{"id": t.id, "items": _tokens_to_hex(t.items)} for t in self.transactions],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EncryptedBlockMsg":
        txs = tuple(Transaction(t["id"], _tokens_from_hex(t["items"])) for t in data["transactions"])
        return cls(data["partition_index"], txs)


@dataclass(frozen=True)
class LocalReportMsg:
    """ICS -> FCCS: the locally frequent ciphertext itemsets of one block."""

    report: LocalMiningReport

    @property
    def partition_index(self) -> int:
        return self.report.partition_index

    def to_dict(self) -> dict:
        r = self.report
        return {
            "partition_index": r.partition_index,
            "local_min_sup": r.local_min_sup,
            "visits": r.visits,
            "levels": r.levels,
            "frequent": [{"items": _tokens_to_hex(s), "count": n} for s, n in r.frequent.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LocalReportMsg":
        frequent = {_tokens_from_hex(f["items"]): f["count"] for f in data["frequent"]}
        return cls(LocalMiningReport(
            partition_index=data["partition_index"],
            local_min_sup=data["local_min_sup"],
            frequent=frequent,
            visits=data["visits"],
            levels=data["levels"],
        ))


# -- results --------------------------------------------------------------


@dataclass(frozen=True)
class AssociationRule:
    antecedent: Itemset
    consequent: Itemset
    support: int
    antecedent_support: int
    approximate: bool = True

    @property
    def confidence(self) -> float:
        return self.support / self.antecedent_support

    @property
    def itemset(self) -> Itemset:
        return tuple(sorted(self.antecedent + self.consequent))


@dataclass(frozen=True)
class GlobalMiningResult:
    frequent: Mapping[Itemset, int]
    mode: str
    rules: tuple[AssociationRule, ...] = ()
    supports_are_capped: bool = True
    skipped_rules: int = 0
    global_threshold: int = 1


@dataclass
class RunMetrics:
    phase_ms: dict[str, float] = field(default_factory=dict)
    visits_total: int = 0
    visits_per_block: list[int] = field(default_factory=list)
    block_sizes: list[int] = field(default_factory=list)
    owner_encrypt_ms: list[float] = field(default_factory=list)

    @property
    def do_ms(self) -> float:
        """Data-owner side: encryption, splitting and final decryption."""
        return sum(self.phase_ms.get(p, 0.0) for p in ("encrypt", "split", "decrypt"))

    @property
    def cloud_ms(self) -> float:
        return sum(self.phase_ms.get(p, 0.0) for p in ("mine", "aggregate"))


# -- operations -----------------------------------------------------------


def local_threshold(sigma: float, block_size: int) -> int:
    """Absolute threshold ``ceil(sigma * n)``, at least 1."""
    if not 0 < sigma <= 1:
        raise InvalidParameterError(f"sigma must be in (0, 1], got {sigma}")
    if block_size < 1:
        raise InvalidParameterError(f"block size must be >= 1, got {block_size}")
    return max(1, math.ceil(_fraction(sigma) * block_size))


def aggregate(
    reports: Sequence[LocalReportMsg], mode: str, global_threshold: int, n_ics: int | None = None
) -> GlobalMiningResult:
    if mode not in MODES:
        raise InvalidParameterError(f"aggregation mode must be one of {MODES}, got {mode!r}")
    seen = [r.partition_index for r in reports]
    expected = range(n_ics if n_ics is not None else (max(seen) + 1 if seen else 0))
    missing = set(expected) - set(seen)
    if missing:
        raise IncompleteAggregationError(missing)
    if len(set(seen)) != len(seen) or not set(seen) <= set(expected):
        raise InvalidParameterError(f"unexpected or duplicate partition indices {sorted(seen)}")
    totals: dict[Itemset, int] = {}
    for msg in reports:
        for itemset, count in msg.report.frequent.items():
            totals[itemset] = totals.get(itemset, 0) + count
    if mode == "sum":
        totals = {s: n for s, n in totals.items() if n >= global_threshold}
    return GlobalMiningResult(
        frequent={s: totals[s] for s in sort_itemsets(totals)},
        mode=mode,
        supports_are_capped=True,
        global_threshold=global_threshold,
    )


def _proper_subsets(itemset: Itemset):
    for k in range(1, len(itemset)):
        yield from combinations(itemset, k)


def generate_rules(result: GlobalMiningResult, min_conf: float) -> tuple[tuple[AssociationRule, ...], int]:
    """Rules ``A -> Z\\A`` with ``supp(Z) / supp(A) >= min_conf``.

    Returns the rules and the number of candidate rules skipped because the
    antecedent support was not in the result.
    """
    if not 0 < min_conf <= 1:
        raise InvalidParameterError(f"min_conf must be in (0, 1], got {min_conf}")
    threshold = _fraction(min_conf)
    num, den = threshold.numerator, threshold.denominator
    rules = []
    skipped = 0
    for itemset, support in result.frequent.items():
        if len(itemset) < 2:
            continue
        for antecedent in _proper_subsets(itemset):
            base = result.frequent.get(antecedent)
            if not base:
                skipped += 1
                continue
            if support * den >= num * base:  # support / base >= min_conf, exactly
                consequent = tuple(i for i in itemset if i not in antecedent)
                rules.append(AssociationRule(antecedent, consequent, support, base, result.supports_are_capped))
    # frequent is ordered by itemset_key and combinations() yields antecedents in
    # the same order, so rules come out sorted without a final sort
    return tuple(rules), skipped


def split_owners(db: TransactionDatabase, n_owners: int) -> list[TransactionDatabase]:
    """Cut a database into ``n_owners`` contiguous shares, keeping ids."""
    out, start = [], 0
    txs = db.transactions
    for size in block_sizes(len(txs), n_owners):
        out.append(TransactionDatabase(txs[start:start + size]))
        start += size
    return out


def merge_owners(shares: Sequence[TransactionDatabase]) -> TransactionDatabase:
    return TransactionDatabase(tuple(t for share in shares for t in share))


def ics_mine(msg: EncryptedBlockMsg, sigma: float, max_level: int | None = None) -> LocalReportMsg:
    """What one intermediate cloud server does with the block it receives."""
    block = msg.transactions
    min_sup = local_threshold(sigma, len(block)) if block else 1
    return LocalReportMsg(mine_local(block, min_sup, msg.partition_index, max_level))


def decrypt_result(result: GlobalMiningResult, key: DoubleEncryptionKey | None) -> GlobalMiningResult:
    if key is None:
        return result

    tokens: dict[bytes, bytes] = {}

    def plain(itemset):
        out = []
        for ct in itemset:
            pt = tokens.get(ct)
            if pt is None:
                pt = tokens[ct] = crypto.decrypt_item(ct, key)
            out.append(pt)
        return tuple(sorted(out))

    frequent = {plain(s): n for s, n in result.frequent.items()}
    keyed = []
    for r in result.rules:
        ante, cons = plain(r.antecedent), plain(r.consequent)
        whole = tuple(sorted(ante + cons))
        rule = AssociationRule(ante, cons, r.support, r.antecedent_support, r.approximate)
        keyed.append(((len(whole), whole, len(ante), ante), rule))
    keyed.sort(key=lambda kr: kr[0])
    return replace(
        result,
        frequent={s: frequent[s] for s in sort_itemsets(frequent)},
        rules=tuple(r for _, r in keyed),
    )


def _make_executor(kind: str, n: int) -> Executor | None:
    if kind == "serial" or n == 1:
        return None
    if kind == "process":
        return ProcessPoolExecutor(max_workers=n)
    return ThreadPoolExecutor(max_workers=n)


def dispatch_blocks(
    blocks: Sequence[EncryptedBlockMsg], sigma: float, max_level: int | None, executor: str
) -> list[LocalReportMsg]:
    """Run every ICS; reports come back in completion order."""
    pool = _make_executor(executor, len(blocks))
    if pool is None:
        return [ics_mine(b, sigma, max_level) for b in blocks]
    with pool:
        futures = [pool.submit(ics_mine, b, sigma, max_level) for b in blocks]
        return [f.result() for f in as_completed(futures)]


class _Phase:
    def __init__(self, name, metrics):
        self.name = name
        self.metrics = metrics

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.metrics.phase_ms[self.name] = (time.perf_counter() - self.start) * 1000.0
        if exc is not None and not isinstance(exc, PhaseError):
            raise PhaseError(self.name, exc) from exc
        return False


def outsource(db: TransactionDatabase, config: PipelineConfig, metrics: RunMetrics):
    """Data-owner side: encrypt each owner's share, merge, split into blocks."""
    with _Phase("encrypt", metrics):
        shares = split_owners(db, config.n_data_owners)
        encrypted = []
        for share in shares:
            start = time.perf_counter()
            encrypted.append(share if config.key is None else crypto.encrypt_database(share, config.key))
            metrics.owner_encrypt_ms.append((time.perf_counter() - start) * 1000.0)
        merged = merge_owners(encrypted)
    with _Phase("split", metrics):
        assignment = split(merged.ids, config.n_ics, config.seed)
        by_id = merged.by_id()
        blocks = [
            EncryptedBlockMsg(i, tuple(by_id[tid] for tid in ids))
            for i, ids in enumerate(assignment.blocks)
        ]
    return assignment, blocks


def run_pipeline(db: TransactionDatabase, config: PipelineConfig) -> tuple[GlobalMiningResult, RunMetrics]:
    if db.size == 0:
        raise EmptyDatabaseError("cannot mine an empty database")
    metrics = RunMetrics()
    assignment, blocks = outsource(db, config, metrics)
    metrics.block_sizes = assignment.block_sizes

    with _Phase("mine", metrics):
        reports = dispatch_blocks(blocks, config.relative_min_sup, config.max_level, config.executor)
    by_index = sorted(reports, key=lambda r: r.partition_index)
    metrics.visits_per_block = [r.report.visits for r in by_index]
    metrics.visits_total = sum(metrics.visits_per_block)

    with _Phase("aggregate", metrics):
        threshold = local_threshold(config.relative_min_sup, db.size)
        result = aggregate(reports, config.aggregation_mode, threshold, config.n_ics)
        rules, skipped = generate_rules(result, config.min_conf)
        result = replace(result, rules=rules, skipped_rules=skipped)

    with _Phase("decrypt", metrics):
        result = decrypt_result(result, config.key)
    return result, metrics


# -- report ---------------------------------------------------------------


def _text(itemset: Itemset) -> list[str]:
    return [t.decode("ascii") for t in itemset]


def result_body(result: GlobalMiningResult) -> dict:
    return {
        "mode": result.mode,
        "supports_are_capped": result.supports_are_capped,
        "global_threshold": result.global_threshold,
        "frequent_itemsets": [{"items": _text(s), "support": n} for s, n in result.frequent.items()],
        "rules": [
            {
                "antecedent": _text(r.antecedent),
                "consequent": _text(r.consequent),
                "support": r.support,
                "antecedent_support": r.antecedent_support,
                "confidence": r.confidence,
                "approximate": r.approximate,
            }
            for r in result.rules
        ],
        "skipped_rules": result.skipped_rules,
    }


TIMING_FIELDS = ("phase_ms", "owner_encrypt_ms", "do_ms", "cloud_ms")


def pipeline_report(result: GlobalMiningResult, metrics: RunMetrics, config: PipelineConfig) -> dict:
    """Structured report; the fields in ``TIMING_FIELDS`` are wall-clock and vary per run."""
    report = {
        "format_version": REPORT_VERSION,
        "sigma": config.relative_min_sup,
        "min_conf": config.min_conf,
        "n_ics": config.n_ics,
        "n_data_owners": config.n_data_owners,
        "seed": config.seed,
        "max_level": config.max_level,
    }
    report.update(result_body(result))
    report.update({
        "visits_total": metrics.visits_total,
        "visits_per_block": metrics.visits_per_block,
        "block_sizes": metrics.block_sizes,
        "phase_ms": {k: round(v, 3) for k, v in metrics.phase_ms.items()},
        "owner_encrypt_ms": [round(v, 3) for v in metrics.owner_encrypt_ms],
        "do_ms": round(metrics.do_ms, 3),
        "cloud_ms": round(metrics.cloud_ms, 3),
    })
    return report


def strip_timing(report: Mapping) -> dict:
    return {k: v for k, v in report.items() if k not in TIMING_FIELDS}
