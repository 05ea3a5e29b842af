"""Frequent-itemset mining for one block of transactions.

``mine_local`` is the capped-count Apriori run by each cloud server. A
candidate's counter stops at ``min_sup`` (it is then *saturated*), short
transactions are skipped at each level, and a level's scan ends as soon as
every candidate is saturated. The reported count of every frequent itemset
is therefore exactly ``min_sup``.

``classic_apriori`` is the textbook algorithm with exact counts. It serves
as the oracle and as the baseline for the ``visits`` work metric, where one
visit is one candidate-in-transaction membership test.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from ppfim.dataset import Item, Transaction
from ppfim.errors import InvalidParameterError

Itemset = tuple  # sorted, duplicate-free tuple of item tokens


def itemset_key(itemset: Itemset):
    """Ordering used everywhere: by size, then lexicographically by bytes."""
    return (len(itemset), itemset)


def sort_itemsets(itemsets: Iterable[Itemset]) -> list[Itemset]:
    return sorted(itemsets, key=itemset_key)


@dataclass
class CandidateCounter:
    itemset: Itemset
    count: int = 0
    min_sup: int = 1

    @property
    def saturated(self) -> bool:
        return self.count >= self.min_sup


@dataclass(frozen=True)
class LocalMiningReport:
    partition_index: int
    local_min_sup: int
    frequent: Mapping[Itemset, int]
    visits: int
    levels: int


@dataclass(frozen=True)
class ExactMiningResult:
    frequent: Mapping[Itemset, int]
    visits: int
    levels: int = 0


def _check_min_sup(min_sup):
    if min_sup < 1:
        raise InvalidParameterError(f"min_sup must be >= 1, got {min_sup}")


def locate_freq_1_itemsets(block: Sequence[Transaction], min_sup: int) -> tuple[list[CandidateCounter], int]:
    """Capped level-1 counting. Returns the saturated counters and visits spent.

    Only increments of unsaturated counters count as visits; an occurrence of
    an already saturated item is passed over.
    """
    _check_min_sup(min_sup)
    counters: dict[Item, CandidateCounter] = {}
    visits = 0
    for tr in block:
        for item in tr.items:
            c = counters.get(item)
            if c is None:
                c = counters[item] = CandidateCounter((item,), 0, min_sup)
            elif c.saturated:
                continue
            visits += 1
            c.count += 1
    hits = [c for c in counters.values() if c.saturated]
    hits.sort(key=lambda c: c.itemset)
    return hits, visits


def apri_gene(prev_level: Iterable[Itemset]) -> list[Itemset]:
    """Join itemsets sharing all but their last item, then prune by subsets."""
    prev = sorted(set(prev_level))
    if not prev:
        return []
    size = len(prev[0])
    if size < 1 or any(len(s) != size for s in prev):
        raise InvalidParameterError("apri_gene needs itemsets of one common size >= 1")
    known = set(prev)
    out = []
    for i, left in enumerate(prev):
        for right in prev[i + 1:]:
            if left[:-1] != right[:-1]:
                break  # sorted order groups equal prefixes together
            cand = left + (right[-1],)
            if all(sub in known for sub in combinations(cand, size)):
                out.append(cand)
    return out


def count_capped(
    block: Sequence[Transaction], candidates: Sequence[Itemset], min_sup: int, level: int
) -> tuple[list[CandidateCounter], int]:
    """Capped counting of one level. Returns every counter and visits spent."""
    counters = [CandidateCounter(c, 0, min_sup) for c in sorted(candidates)]
    if any(len(c.itemset) != level for c in counters):
        raise InvalidParameterError(f"all candidates must have size {level}")
    sets = [frozenset(c.itemset) for c in counters]
    active = list(range(len(counters)))
    visits = 0
    for tr in block:
        if not active:
            break
        if tr.length < level:
            continue
        items = tr.itemset
        visits += len(active)
        saturated_now = False
        for idx in active:
            if sets[idx] <= items:
                c = counters[idx]
                c.count += 1
                if c.count == min_sup:
                    saturated_now = True
        if saturated_now:
            active = [i for i in active if not counters[i].saturated]
    return counters, visits


def mine_local(
    block: Sequence[Transaction], local_min_sup: int, partition_index: int = 0, max_level: int | None = None
) -> LocalMiningReport:
    _check_min_sup(local_min_sup)
    level_one, visits = locate_freq_1_itemsets(block, local_min_sup)
    frequent = {c.itemset: c.count for c in level_one}
    current = [c.itemset for c in level_one]
    levels = 1 if current else 0
    level = 2
    while current and (max_level is None or level <= max_level):
        candidates = apri_gene(current)
        if not candidates:
            break
        counters, spent = count_capped(block, candidates, local_min_sup, level)
        visits += spent
        current = [c.itemset for c in counters if c.saturated]
        for c in counters:
            if c.saturated:
                frequent[c.itemset] = c.count
        if current:
            levels = level
        level += 1
    return LocalMiningReport(
        partition_index=partition_index,
        local_min_sup=local_min_sup,
        frequent={k: frequent[k] for k in sort_itemsets(frequent)},
        visits=visits,
        levels=levels,
    )


def classic_apriori(
    block: Sequence[Transaction], min_sup: int, max_level: int | None = None
) -> ExactMiningResult:
    """Uncapped Apriori: every transaction is tested against every candidate."""
    _check_min_sup(min_sup)
    block = list(block)
    counts: dict[Itemset, int] = {}
    visits = 0
    for tr in block:
        visits += tr.length
        for item in tr.items:
            counts[(item,)] = counts.get((item,), 0) + 1
    current = sorted(k for k, v in counts.items() if v >= min_sup)
    frequent = {k: counts[k] for k in current}
    levels = 1 if current else 0
    level = 2
    while current and (max_level is None or level <= max_level):
        candidates = apri_gene(current)
        if not candidates:
            break
        sets = [frozenset(c) for c in candidates]
        tally = [0] * len(candidates)
        for tr in block:
            items = tr.itemset
            visits += len(candidates)
            for idx, s in enumerate(sets):
                if s <= items:
                    tally[idx] += 1
        current = [c for c, n in zip(candidates, tally) if n >= min_sup]
        frequent.update((c, n) for c, n in zip(candidates, tally) if n >= min_sup)
        if current:
            levels = level
        level += 1
    return ExactMiningResult({k: frequent[k] for k in sort_itemsets(frequent)}, visits, levels)

