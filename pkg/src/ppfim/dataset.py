"""Transaction databases: basket-file parsing, synthetic generation and stats.

A basket file holds one transaction per line as whitespace-separated item
tokens. Blank lines and lines starting with ``#`` are ignored, and the k-th
remaining line becomes the transaction with id ``k``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from ppfim.errors import EmptyDatabaseError, InvalidParameterError, MalformedInputError

Item = bytes


def check_token(token: bytes) -> None:
    if not isinstance(token, bytes):
        raise TypeError(f"item tokens must be bytes, got {type(token).__name__}")
    if not token:
        raise ValueError("item token must be non-empty")
    if max(token) > 127:
        raise ValueError(f"item token {token!r} contains a non 7-bit byte")


@dataclass(frozen=True)
class Transaction:
    """One basket. ``items`` is stored sorted and duplicate free."""

    id: int
    items: tuple[Item, ...]
    itemset: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"transaction id must be >= 1, got {self.id}")
        items = tuple(sorted(set(self.items)))
        for token in items:
            check_token(token)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "itemset", frozenset(items))

    @property
    def length(self) -> int:
        return len(self.items)

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class TransactionDatabase:
    transactions: tuple[Transaction, ...] = ()

    def __post_init__(self):
        txs = tuple(self.transactions)
        ids = [t.id for t in txs]
        if len(set(ids)) != len(ids):
            raise ValueError("transaction ids must be distinct")
        object.__setattr__(self, "transactions", txs)

    @classmethod
    def from_baskets(cls, baskets: Iterable[Iterable[Item]]) -> "TransactionDatabase":
        """Build a database from plain baskets, numbering them from 1."""
        return cls(tuple(Transaction(i, tuple(b)) for i, b in enumerate(baskets, start=1)))

    @property
    def size(self) -> int:
        return len(self.transactions)

    @property
    def ids(self) -> list[int]:
        return [t.id for t in self.transactions]

    def by_id(self) -> dict[int, Transaction]:
        return {t.id: t for t in self.transactions}

    def __len__(self):
        return len(self.transactions)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)


@dataclass(frozen=True)
class DatasetStats:
    n_transactions: int
    n_distinct_items: int
    max_transaction_length: int
    item_frequencies: Mapping[Item, int]


def parse_basket_file(text: bytes | str) -> TransactionDatabase:
    if isinstance(text, str):
        try:
            text = text.encode("ascii")
        except UnicodeEncodeError as exc:
            line = text[: exc.start].count("\n") + 1
            raise MalformedInputError("non 7-bit character in input", line) from None
    baskets = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(b"#"):
            continue
        if max(line) > 127:
            raise MalformedInputError("non 7-bit byte in item token", lineno)
        baskets.append(line.split())
    if not baskets:
        raise EmptyDatabaseError("basket file contains no transactions")
    return TransactionDatabase.from_baskets(baskets)


def serialize_basket_file(db: TransactionDatabase) -> bytes:
    """Canonical form: items sorted bytewise, single spaces, trailing newline."""
    return b"".join(b" ".join(t.items) + b"\n" for t in db)


def generate_synthetic(n_tx: int, n_items: int, max_len: int, seed: int) -> TransactionDatabase:
    if n_tx < 1:
        raise InvalidParameterError(f"n_tx must be >= 1, got {n_tx}")
    if max_len < 1 or max_len > n_items:
        raise InvalidParameterError(f"need 1 <= max_len <= n_items, got max_len={max_len}, n_items={n_items}")
    rng = random.Random(seed)
    alphabet = [b"item_%d" % (i + 1) for i in range(n_items)]
    baskets = [rng.sample(alphabet, rng.randint(1, max_len)) for _ in range(n_tx)]
    return TransactionDatabase.from_baskets(baskets)


def db_stats(db: TransactionDatabase) -> DatasetStats:
    freq = Counter()
    longest = 0
    for t in db:
        freq.update(t.items)
        longest = max(longest, t.length)
    return DatasetStats(
        n_transactions=db.size,
        n_distinct_items=len(freq),
        max_transaction_length=longest,
        item_frequencies=dict(freq),
    )
