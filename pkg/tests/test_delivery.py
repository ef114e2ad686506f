import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from nucache.combinatorics import binom, chain_count
from nucache.delivery import (
    DeliveryMessage,
    decode,
    delivery_rate,
    describe,
    encode_delivery,
    group_dims,
    known_columns,
)
from nucache.field import SingularSystemError
from nucache.placement import PlacementConfig, place, random_files

P = 65537


def test_group_dims_examples():
    assert group_dims(2, 0, 0, 1, (2, 1))[0] == 0
    assert group_dims(2, 1, 1, 1, (2, 1)) == (1, 1)
    assert group_dims(1, 1, 1, 3, (2, 1)) == (3, 2)


def test_rate_examples():
    assert delivery_rate(4, 2, 1, {1, 2}) == 1
    assert delivery_rate(4, 3, 2, {1, 2}) == Fraction(1, 2)
    assert delivery_rate(4, 2, 2, {1, 2}) == Fraction(2, 3)
    assert delivery_rate(4, 0, 0, {1, 2}) == 2
    for req in ({1}, {2}, {1, 2}):
        assert delivery_rate(4, 4, 4, req) == 0


def test_worked_example_layout():
    d = (1, 1, 1, 2)
    w1 = describe(1, d, 4, (2, 1), P)
    assert [(tuple(g.key), g.theta) for g in w1.groups] == [
        (((), ()), 2),
        (((4,), ()), 2),
        (((4,), (4,)), 2),
    ]
    assert w1.length == 6
    w2 = describe(2, d, 4, (2, 1), P)
    assert w2.length == 9
    # the single-member groups carry the subfile itself
    singles = [g for g in w2.groups if len(g.key.rho1) == 2 and len(g.key.rho2) == 1]
    assert len(singles) == 6 and all(g.kappa == g.theta == 1 for g in singles)


def _splits(K):
    if K <= 6:
        return [d for d in itertools.product((1, 2), repeat=K) if len(set(d)) == 2]
    # beyond six users the layout only depends on the split sizes
    return [tuple([1] * k + [2] * (K - k)) for k in range(1, K)]


@pytest.mark.parametrize("K", range(2, 9))
def test_length_identities(K):
    for r1 in range(K + 1):
        for r2 in range(r1 + 1):
            r = (r1, r2)
            S = chain_count(K, r)
            for d in _splits(K):
                for i in (1, 2):
                    lay = describe(i, d, K, r, P)
                    ri = r[i - 1]
                    assert Fraction(lay.length) == S * Fraction(binom(K - 1, ri), binom(K, ri))
                    outsiders = [u for u in range(1, K + 1) if d[u - 1] != i]
                    level = i - 1
                    for u in outsiders:
                        e = sum(g.theta for g in lay.groups if u not in g.key[level])
                        assert Fraction(e) == S * Fraction(binom(K - 2, ri), binom(K, ri))


def test_worked_example_end_to_end():
    cfg = PlacementConfig(4, (2, 1), L=4)
    files = random_files(cfg, 5)
    cm = place(cfg, files)
    msg = encode_delivery((1, 1, 1, 2), files, cfg)
    assert (msg.n_rows, msg.n_cols) == (12, 15)
    for u in range(1, 5):
        assert np.array_equal(decode(u, cm.user(u), msg), files[msg.demand[u - 1] - 1])
    # user 4 rebuilds the two groups of W1* keyed by its own index
    assert len(known_columns(4, msg)) == 4


def test_single_file_path():
    cfg = PlacementConfig(4, (2, 1), L=2)
    files = random_files(cfg, 1)
    cm = place(cfg, files)
    for d, rows in (((1, 1, 1, 1), 6), ((2, 2, 2, 2), 9)):
        msg = encode_delivery(d, files, cfg)
        assert msg.n_rows == rows and msg.n_cols == 12
        for u in range(1, 5):
            assert np.array_equal(decode(u, cm.user(u), msg), files[d[0] - 1])


def test_row_and_column_counts_mixed_demand():
    cfg = PlacementConfig(5, (3, 1), L=1)
    files = random_files(cfg, 2)
    msg = encode_delivery((1, 2, 1, 2, 2), files, cfg)
    S = cfg.S
    assert msg.n_rows == S * delivery_rate(5, 3, 1, {1, 2})
    cols = S * Fraction(binom(4, 3), binom(5, 3)) + S * Fraction(binom(4, 1), binom(5, 1))
    assert msg.n_cols == cols


def test_message_json_roundtrip():
    cfg = PlacementConfig(3, (2, 1), L=2)
    files = random_files(cfg, 4)
    cm = place(cfg, files)
    msg = encode_delivery((1, 2, 2), files, cfg)
    back = DeliveryMessage.from_json(json.loads(json.dumps(msg.to_json())))
    assert np.array_equal(back.rows, msg.rows) and back.columns == msg.columns
    assert np.array_equal(decode(2, cm.user(2), back), files[1])


def test_truncated_message_is_singular():
    cfg = PlacementConfig(4, (2, 1), L=2)
    files = random_files(cfg, 9)
    cm = place(cfg, files)
    msg = encode_delivery((1, 1, 1, 2), files, cfg)
    short = DeliveryMessage(msg.demand, msg.K, msg.r, msg.L, msg.p, msg.rows[:-1], msg.columns)
    with pytest.raises(SingularSystemError):
        decode(1, cm.user(1), short)


def test_errors():
    cfg = PlacementConfig(3, (1, 0), L=1)
    files = random_files(cfg, 0)
    with pytest.raises(ValueError):
        encode_delivery((1, 2), files, cfg)
    with pytest.raises(ValueError):
        encode_delivery((1, 3, 1), files, cfg)
    with pytest.raises(ValueError):
        describe(1, (1, 1, 1), 3, (1, 0), P)
    with pytest.raises(ValueError):
        encode_delivery((1, 1, 1), files, PlacementConfig(3, (1, 0, 0), L=1))
