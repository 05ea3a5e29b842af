"""Deterministic double encryption of item tokens.

Each byte is first shifted Caesar-style modulo 128, then XORed with a 7-bit
stream key applied identically to every byte. Both stages are bijections on
``[0, 127]``, so equal plaintexts give equal ciphertexts and distinct tokens
of equal length stay distinct. That determinism is what lets the cloud
servers mine ciphertext; it also leaks item frequencies and token lengths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable

from ppfim.dataset import Item, Transaction, TransactionDatabase
from ppfim.errors import DomainError, InvalidParameterError

DEFAULT_CAESAR_SHIFT = 5
DEFAULT_STREAM_KEY = 0b1010101

ENV_CAESAR_SHIFT = "PPFIM_CAESAR_SHIFT"
ENV_STREAM_KEY = "PPFIM_STREAM_KEY"


@dataclass(frozen=True)
class DoubleEncryptionKey:
    caesar_shift: int = DEFAULT_CAESAR_SHIFT
    stream_key: int = DEFAULT_STREAM_KEY

    def __post_init__(self):
        if not 1 <= self.caesar_shift <= 127:
            raise InvalidParameterError(f"caesar_shift must be in [1, 127], got {self.caesar_shift}")
        if not 0 <= self.stream_key <= 127:
            raise InvalidParameterError(f"stream_key must be in [0, 127], got {self.stream_key}")

    @classmethod
    def resolve(cls, caesar_shift=None, stream_key=None, environ=None) -> "DoubleEncryptionKey":
        """Explicit values win over the environment, which wins over defaults."""
        env = os.environ if environ is None else environ

        def pick(value, name, default):
            if value is not None:
                return int(value)
            if env.get(name):
                try:
                    return int(env[name], 10)
                except ValueError:
                    raise InvalidParameterError(f"{name} must be a decimal integer") from None
            return default

        return cls(
            pick(caesar_shift, ENV_CAESAR_SHIFT, DEFAULT_CAESAR_SHIFT),
            pick(stream_key, ENV_STREAM_KEY, DEFAULT_STREAM_KEY),
        )


def _check_7bit(data: bytes) -> None:
    if data and max(data) > 127:
        raise DomainError(f"byte outside [0, 127] in {bytes(data)!r}")


def _check_shift(shift: int) -> None:
    if not 1 <= shift <= 127:
        raise InvalidParameterError(f"shift must be in [1, 127], got {shift}")


def caesar_encrypt(data: bytes, shift: int) -> bytes:
    _check_7bit(data)
    _check_shift(shift)
    return bytes((b + shift) % 128 for b in data)


def caesar_decrypt(data: bytes, shift: int) -> bytes:
    _check_7bit(data)
    _check_shift(shift)
    return bytes((b - shift) % 128 for b in data)


def stream_xor(data: bytes, stream_key: int) -> bytes:
    _check_7bit(data)
    if not 0 <= stream_key <= 127:
        raise InvalidParameterError(f"stream_key must be in [0, 127], got {stream_key}")
    return bytes(b ^ stream_key for b in data)


def encrypt_item(item: Item, key: DoubleEncryptionKey) -> bytes:
    return stream_xor(caesar_encrypt(item, key.caesar_shift), key.stream_key)


def decrypt_item(ct: bytes, key: DoubleEncryptionKey) -> Item:
    return caesar_decrypt(stream_xor(ct, key.stream_key), key.caesar_shift)


def encrypt_items(items: Iterable[Item], key: DoubleEncryptionKey) -> tuple[bytes, ...]:
    return tuple(encrypt_item(i, key) for i in items)


def decrypt_items(items: Iterable[bytes], key: DoubleEncryptionKey) -> tuple[Item, ...]:
    return tuple(decrypt_item(i, key) for i in items)


def _map_database(db: TransactionDatabase, fn) -> TransactionDatabase:
    # the per-database token table keeps the cost proportional to distinct items
    table: dict[bytes, bytes] = {}
    out = []
    for t in db:
        mapped = []
        for tok in t.items:
            ct = table.get(tok)
            if ct is None:
                ct = table[tok] = fn(tok)
            mapped.append(ct)
        out.append(Transaction(t.id, tuple(mapped)))
    return TransactionDatabase(tuple(out))


def encrypt_database(db: TransactionDatabase, key: DoubleEncryptionKey) -> TransactionDatabase:
    return _map_database(db, lambda tok: encrypt_item(tok, key))


def decrypt_database(db: TransactionDatabase, key: DoubleEncryptionKey) -> TransactionDatabase:
    return _map_database(db, lambda tok: decrypt_item(tok, key))


def to_hex(token: bytes) -> str:
    return token.hex()


def from_hex(text: str) -> bytes:
    token = bytes.fromhex(text)
    _check_7bit(token)
    return token
