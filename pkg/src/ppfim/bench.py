"""Benchmark grid and splitter frequency-dispersion measurements.

Wall-clock columns are recorded for plotting but are hardware bound; the
``visits`` columns are the portable work metric. Every bench row is checked
against the exact oracle mined from the unsplit database: union mode must
reach recall 1.0 and sum mode precision 1.0. ``visits_classic`` is classic
Apriori run on the very blocks and thresholds the cloud servers used, and the
capped miner must never spend more than that.
"""

from __future__ import annotations

import csv
import io
import itertools
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ppfim import crypto
from ppfim.crypto import DoubleEncryptionKey
from ppfim.dataset import TransactionDatabase, generate_synthetic
from ppfim.federation import PipelineConfig, local_threshold, run_pipeline
from ppfim.miner import classic_apriori
from ppfim.splitter import split


@dataclass
class BenchRow:
    t: int
    c: int
    sigma: float
    n_transactions: int
    mode: str
    visits_customized: int = 0
    visits_classic: int = 0
    visits_classic_unsplit: int = 0
    wall_ms_pipeline: float = 0.0
    wall_ms_mine: float = 0.0
    wall_ms_do: float = 0.0
    wall_ms_cloud: float = 0.0
    wall_ms_oracle: float = 0.0
    itemsets_found: int = 0
    itemsets_exact: int = 0
    recall_vs_exact: float = 0.0
    precision_vs_exact: float = 0.0
    error: str = ""


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(not r.error for r in self.rows)

    def to_csv(self, wall_clock: bool = True) -> str:
        names = [f for f in BenchRow.__dataclass_fields__ if wall_clock or not f.startswith("wall_ms")]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in self.rows:
            values = asdict(row)
            for name in values:
                if name.startswith("wall_ms"):
                    values[name] = round(values[name], 3)
            writer.writerow(values)
        return buf.getvalue()


def _ratio(num, den):
    return 1.0 if den == 0 else num / den


def check_row(row: BenchRow) -> list[str]:
    problems = []
    if row.visits_customized > row.visits_classic:
        problems.append(f"visits_customized {row.visits_customized} > visits_classic {row.visits_classic}")
    if row.mode == "union" and row.recall_vs_exact != 1.0:
        problems.append(f"union-mode recall {row.recall_vs_exact} != 1.0")
    if row.mode == "sum" and row.precision_vs_exact != 1.0:
        problems.append(f"sum-mode precision {row.precision_vs_exact} != 1.0")
    return problems


def classic_visits_on_blocks(db, c, sigma, seed, max_level=None) -> int:
    """Classic Apriori on the same blocks and thresholds the cloud servers used.

    Splitting only looks at ids, which encryption and owner merging preserve,
    so splitting the plaintext ids with the same seed gives the same blocks.
    """
    by_id = db.by_id()
    total = 0
    for ids in split(db.ids, c, seed).blocks:
        if ids:
            block = [by_id[i] for i in ids]
            total += classic_apriori(block, local_threshold(sigma, len(block)), max_level).visits
    return total


def run_cell(
    db: TransactionDatabase,
    t: int,
    c: int,
    sigma: float,
    mode: str = "union",
    seed: int = 0,
    key: DoubleEncryptionKey | None = None,
    max_level: int | None = None,
    executor: str = "thread",
    oracle=None,
) -> BenchRow:
    """One grid cell. ``oracle`` is an optional ``(ExactMiningResult, wall_ms)`` to reuse."""
    row = BenchRow(t=t, c=c, sigma=sigma, n_transactions=db.size, mode=mode)
    try:
        config = PipelineConfig(
            n_ics=c,
            relative_min_sup=sigma,
            aggregation_mode=mode,
            key=key if key is not None else DoubleEncryptionKey(),
            seed=seed,
            n_data_owners=t,
            max_level=max_level,
            executor=executor,
        )
        exact, row.wall_ms_oracle = oracle or timed_oracle(db, sigma, max_level)
        start = time.perf_counter()
        result, metrics = run_pipeline(db, config)
        row.wall_ms_pipeline = (time.perf_counter() - start) * 1000.0
        row.wall_ms_mine = metrics.phase_ms["mine"]
        row.wall_ms_do = metrics.do_ms
        row.wall_ms_cloud = metrics.cloud_ms
        row.visits_customized = metrics.visits_total
        row.visits_classic = classic_visits_on_blocks(db, c, sigma, seed, max_level)
        row.visits_classic_unsplit = exact.visits
        found, truth = set(result.frequent), set(exact.frequent)
        row.itemsets_found = len(found)
        row.itemsets_exact = len(truth)
        row.recall_vs_exact = _ratio(len(found & truth), len(truth))
        row.precision_vs_exact = _ratio(len(found & truth), len(found))
        row.error = "; ".join(check_row(row))
    except Exception as exc:  # a failing cell must not abort the grid
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_grid(
    owners: Sequence[int],
    ics: Sequence[int],
    sigmas: Sequence[float],
    n_transactions: Sequence[int],
    n_items: int = 20,
    max_len: int = 5,
    mode: str = "union",
    seed: int = 0,
    key: DoubleEncryptionKey | None = None,
    max_level: int | None = None,
    executor: str = "thread",
    databases: dict[int, TransactionDatabase] | None = None,
) -> BenchReport:
    """Rows ordered by (n_transactions, sigma, t, c); one synthetic db per size."""
    if not (owners and ics and sigmas and n_transactions):
        raise ValueError("bench grid must be non-empty in every dimension")
    report = BenchReport()
    for n_tx in n_transactions:
        db = (databases or {}).get(n_tx) or generate_synthetic(n_tx, n_items, max_len, seed)
        for sigma in sigmas:
            oracle = timed_oracle(db, sigma, max_level)
            for t, c in itertools.product(owners, ics):
                report.rows.append(run_cell(db, t, c, sigma, mode, seed, key, max_level, executor, oracle))
    return report


def timed_oracle(db, sigma, max_level=None):
    """Exact mining of the unsplit database, or None if the parameters are invalid."""
    try:
        threshold = local_threshold(sigma, db.size)
    except ValueError:
        return None  # each cell records the parameter error itself
    start = time.perf_counter()
    exact = classic_apriori(db.transactions, threshold, max_level)
    return exact, (time.perf_counter() - start) * 1000.0


# -- dispersion -----------------------------------------------------------


@dataclass
class DispersionReport:
    n_ics: int
    seeds: list[int]
    block_tables: list[dict[str, int]]  # first seed only, hex tokens
    deviations: list[float]  # per seed: max |block share - 1/N| over blocks and items
    mean_shares: list[dict[str, float]]  # per block, averaged over seeds
    max_deviation: float = 0.0
    max_mean_share_error: float = 0.0

    def to_dict(self) -> dict:
        return {"format_version": 1, **asdict(self)}


def dispersion(db: TransactionDatabase, key: DoubleEncryptionKey, n_ics: int, seeds: Sequence[int]) -> DispersionReport:
    if not seeds:
        raise ValueError("need at least one seed")
    enc = crypto.encrypt_database(db, key)
    by_id = enc.by_id()
    overall = Counter(i for t in enc for i in t.items)
    tokens = sorted(overall)
    share_sums = [dict.fromkeys(tokens, 0.0) for _ in range(n_ics)]
    deviations = []
    first_tables = None
    target = 1.0 / n_ics
    for seed in seeds:
        assignment = split(enc.ids, n_ics, seed)
        tables = [Counter(i for tid in block for i in by_id[tid].items) for block in assignment.blocks]
        if first_tables is None:
            first_tables = tables
        worst = 0.0
        for b, table in enumerate(tables):
            for tok in tokens:
                share = table[tok] / overall[tok]
                share_sums[b][tok] += share
                worst = max(worst, abs(share - target))
        deviations.append(worst)
    mean_shares = [{crypto.to_hex(tok): s[tok] / len(seeds) for tok in tokens} for s in share_sums]
    max_mean_err = max((abs(v - target) for m in mean_shares for v in m.values()), default=0.0)
    return DispersionReport(
        n_ics=n_ics,
        seeds=list(seeds),
        block_tables=[{crypto.to_hex(tok): table[tok] for tok in tokens} for table in first_tables],
        deviations=deviations,
        mean_shares=mean_shares,
        max_deviation=max(deviations),
        max_mean_share_error=max_mean_err,
    )
