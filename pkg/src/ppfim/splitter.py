"""Random horizontal partitioning of transaction ids across cloud servers.

Each block is filled by repeatedly drawing a random id from a pool and
removing it with swap-with-last and pop. The next block then draws from the
difference between the remaining main list and the block just built. The
first ``T mod N`` blocks take one extra id so block sizes never differ by
more than one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from ppfim.errors import EmptyDatabaseError, EmptyPoolError, InvalidParameterError


class SplitterRng:
    """Seedable generator for splitter draws (Mersenne Twister underneath)."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return self._rng.randrange(n)


@dataclass(frozen=True)
class PartitionAssignment:
    blocks: tuple[tuple[int, ...], ...]
    seed: int

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def owner_of(self) -> dict[int, int]:
        """Map each transaction id to the index of the block holding it."""
        return {tid: i for i, block in enumerate(self.blocks) for tid in block}


def draw_random_id(pool: list[int], rng: SplitterRng) -> int:
    if not pool:
        raise EmptyPoolError("cannot draw from an empty pool")
    index = rng.below(len(pool))
    picked = pool[index]
    pool[index], pool[-1] = pool[-1], pool[index]
    pool.pop()
    return picked


def build_block(pool: list[int], block_size: int, rng: SplitterRng) -> tuple[list[int], list[int]]:
    """Draw ``block_size`` ids without replacement; returns (block, remaining pool)."""
    if block_size < 0 or block_size > len(pool):
        raise InvalidParameterError(f"block size {block_size} does not fit a pool of {len(pool)}")
    pool = list(pool)
    block = [draw_random_id(pool, rng) for _ in range(block_size)]
    return block, pool


def difference_list(main: Sequence[int], block: Sequence[int]) -> list[int]:
    """Ids of ``main`` absent from ``block``, in main's order, without repeats."""
    taken = set(block)
    seen = set()
    out = []
    for tid in main:
        if tid in taken or tid in seen:
            continue
        seen.add(tid)
        out.append(tid)
    return out


def block_sizes(total: int, n_blocks: int) -> list[int]:
    base, extra = divmod(total, n_blocks)
    return [base + 1 if i < extra else base for i in range(n_blocks)]


def split(ids: Sequence[int], n_ics: int, seed: int) -> PartitionAssignment:
    if n_ics < 1:
        raise InvalidParameterError(f"number of cloud servers must be >= 1, got {n_ics}")
    if not ids:
        raise EmptyDatabaseError("nothing to split: no transaction ids")
    rng = SplitterRng(seed)
    main = list(ids)
    blocks = []
    for size in block_sizes(len(main), n_ics):
        block, _ = build_block(main, size, rng)
        main = difference_list(main, block)
        blocks.append(tuple(block))
    return PartitionAssignment(tuple(blocks), seed)


def shuffle_chunk(ids: Sequence[int], n_ics: int, seed: int) -> PartitionAssignment:
    """Reference partitioner: one full shuffle, then contiguous chunks of the same sizes."""
    order = list(ids)
    random.Random(seed).shuffle(order)
    blocks, start = [], 0
    for size in block_sizes(len(order), n_ics):
        blocks.append(tuple(order[start:start + size]))
        start += size
    return PartitionAssignment(tuple(blocks), seed)


def format_id_ranges(ids: Sequence[int]) -> str:
    """Compress ids into ``1-3,7,9-10`` style runs."""
    runs = []
    ordered = sorted(ids)
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1] == ordered[j] + 1:
            j += 1
        runs.append(str(ordered[i]) if i == j else f"{ordered[i]}-{ordered[j]}")
        i = j + 1
    return ",".join(runs)


def split_report(assignment: PartitionAssignment) -> dict:
    return {
        "format_version": 1,
        "seed": assignment.seed,
        "n_blocks": assignment.n_blocks,
        "blocks": [
            {"index": i, "size": len(b), "ids": format_id_ranges(b)}
            for i, b in enumerate(assignment.blocks)
        ],
    }
