import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from ppfim.crypto import (
    DoubleEncryptionKey,
    caesar_decrypt,
    caesar_encrypt,
    decrypt_database,
    decrypt_item,
    decrypt_items,
    encrypt_database,
    encrypt_item,
    from_hex,
    stream_xor,
    to_hex,
)
from ppfim.dataset import db_stats, parse_basket_file
from ppfim.errors import DomainError, InvalidParameterError

from conftest import SAMPLE, databases, tokens

keys = st.builds(DoubleEncryptionKey, st.integers(1, 127), st.integers(0, 127))


def test_caesar_examples():
    assert caesar_encrypt(b"A", 5) == b"F"
    assert caesar_encrypt(bytes([125]), 5) == bytes([2])
    assert caesar_decrypt(bytes([70]), 5) == bytes([65])
    assert caesar_decrypt(bytes([2]), 5) == bytes([125])


def test_caesar_is_a_permutation():
    out = caesar_encrypt(bytes(range(128)), 5)
    assert sorted(out) == list(range(128))


def test_caesar_round_trip_long():
    data = bytes(random.Random(3).randrange(128) for _ in range(1000))
    assert caesar_decrypt(caesar_encrypt(data, 5), 5) == data


def test_domain_errors():
    with pytest.raises(DomainError):
        caesar_encrypt(b"\x80", 5)
    with pytest.raises(DomainError):
        stream_xor(b"\xff", 1)
    with pytest.raises(InvalidParameterError):
        caesar_encrypt(b"a", 0)
    with pytest.raises(InvalidParameterError):
        DoubleEncryptionKey(5, 128)


def test_stream_xor_examples():
    assert stream_xor(bytes([0b1000110]), 0b1010101) == bytes([0b0010011])
    assert stream_xor(b"hello", 0) == b"hello"
    assert stream_xor(stream_xor(b"hello", 85), 85) == b"hello"


def test_encrypt_item_examples():
    key = DoubleEncryptionKey(5, 85)
    assert encrypt_item(b"A", key) == bytes([19])
    assert decrypt_item(bytes([19]), key) == b"A"
    ct = encrypt_item(b"AA", key)
    assert ct[0] == ct[1]
    # direct computation: ((0x61 + 5) ^ 85, ...) for "abc"
    assert encrypt_item(b"abc", key) == bytes([(0x61 + 5) ^ 85, (0x62 + 5) ^ 85, (0x63 + 5) ^ 85])
    assert encrypt_item(b"abc", key) != encrypt_item(b"abc", DoubleEncryptionKey(5, 86))


def test_empty_items():
    assert decrypt_items((), DoubleEncryptionKey()) == ()


def test_random_items_round_trip():
    r = random.Random(11)
    key = DoubleEncryptionKey(r.randint(1, 127), r.randint(0, 127))
    for _ in range(500):
        item = bytes(r.randrange(128) for _ in range(r.randint(1, 10)))
        assert decrypt_item(encrypt_item(item, key), key) == item


@given(tokens, keys)
def test_round_trip_property(item, key):
    ct = encrypt_item(item, key)
    assert len(ct) == len(item)
    assert decrypt_item(ct, key) == item


@given(tokens, tokens, keys)
def test_injective_on_equal_length(a, b, key):
    if len(a) == len(b) and a != b:
        assert encrypt_item(a, key) != encrypt_item(b, key)


def test_encrypt_database_preserves_shape(sample_db):
    key = DoubleEncryptionKey()
    enc = encrypt_database(sample_db, key)
    assert enc.ids == sample_db.ids
    assert [t.length for t in enc] == [t.length for t in sample_db]
    assert decrypt_database(enc, key) == sample_db


def test_shared_item_shares_cipher_token():
    db = parse_basket_file(b"a x\na y\n")
    enc = encrypt_database(db, DoubleEncryptionKey())
    ca = encrypt_item(b"a", DoubleEncryptionKey())
    assert all(ca in t.items for t in enc)


def test_encrypt_empty_database():
    from ppfim.dataset import TransactionDatabase

    assert encrypt_database(TransactionDatabase(), DoubleEncryptionKey()).size == 0


@given(databases(item_strategy=tokens), keys)
def test_frequency_histogram_is_relabelled(db, key):
    before = db_stats(db).item_frequencies
    after = db_stats(encrypt_database(db, key)).item_frequencies
    assert Counter(before.values()) == Counter(after.values())
    assert {encrypt_item(k, key): v for k, v in before.items()} == after


def test_hex_round_trip():
    ct = encrypt_item(b"milk", DoubleEncryptionKey())
    assert from_hex(to_hex(ct)) == ct


def test_key_resolution_precedence():
    env = {"PPFIM_CAESAR_SHIFT": "9", "PPFIM_STREAM_KEY": "3"}
    assert DoubleEncryptionKey.resolve(environ={}) == DoubleEncryptionKey(5, 85)
    assert DoubleEncryptionKey.resolve(environ=env) == DoubleEncryptionKey(9, 3)
    assert DoubleEncryptionKey.resolve(7, None, environ=env) == DoubleEncryptionKey(7, 3)
    with pytest.raises(InvalidParameterError):
        DoubleEncryptionKey.resolve(environ={"PPFIM_STREAM_KEY": "0x10"})
