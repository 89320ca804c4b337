import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import itemsets, ladder_catalog, weighted_catalogs
from pbtm.encoder import encode
from pbtm.exceptions import InputError, OracleMismatch, UniverseTooLarge
from pbtm.miner import (
    MiningConfig,
    RowIndex,
    bounded_support,
    brute_force_frequent,
    check_against_oracle,
    mine_frequent,
    mine_frequent_raw,
    occurrence,
)
from pbtm.temporal import Catalog, Interval, Item

CAT = ladder_catalog(8)
A, B, C, D, E = range(5)
IV = Interval(0, 9)


def enc(xs, catalog=CAT):
    return encode(xs, "D1", IV, catalog)


def test_occurrence_absent_is_zero():
    assert occurrence((C,), enc([(A, B)])) == 0


def test_occurrence_sums_superset_rows():
    e = enc([(A, B)] * 2 + [(A,)] * 3)
    assert occurrence((A,), e) == 5


def test_occurrence_single_row_count_four():
    assert occurrence((E,), enc([(E,)] * 5 + [(A,)] * 3)) == 5


def test_bounded_support_table1():
    # counts (3, 2, 1) over 3 rows: total_tx = 9; 9 * 0.2 / 0.2
    e = enc([(B,)] * 4 + [(A,)] * 3 + [(C,)] * 2)
    assert e.total_tx == 9
    assert bounded_support((B,), e, MiningConfig(wmnspt="0.2"), CAT) == 9


def test_bounded_support_zero_threshold():
    e = enc([(A, B)])
    assert bounded_support((A, B), e, MiningConfig(wmnspt=0), CAT) == 0


def test_bounded_support_twelve_transactions():
    # weight_sum 0.6 = B + D; 12 * 0.25 / 0.6 = 5
    e = enc([(A,)] * 12)
    assert bounded_support((B, D), e, MiningConfig(wmnspt="0.25"), CAT) == 5


def test_empty_interval_mines_nothing():
    assert mine_frequent(enc([]), MiningConfig(), CAT) == []


def test_small_example_all_three_frequent():
    # total_tx 4, need ws >= 0.4: {A} 0.4, {B} 0.8, {A,B} 1.2
    e = enc([(A, B)] * 4)
    got = mine_frequent(e, MiningConfig(wmnspt="0.1"), CAT)
    assert [(f.itemset, f.occ, f.ws) for f in got] == [
        ((A,), 4, Fraction(4, 10)), ((B,), 4, Fraction(8, 10)), ((A, B), 4, Fraction(12, 10))]
    assert got == brute_force_frequent(e, MiningConfig(wmnspt="0.1"), CAT)


def test_single_item_zero_threshold():
    cat = Catalog([Item(0, "A", 1000)])
    e = encode([(0,)], "D1", IV, cat)
    got = brute_force_frequent(e, MiningConfig(wmnspt=0), cat)
    assert [f.itemset for f in got] == [(0,)]


def test_heavier_superset_is_frequent_when_subset_is_not():
    # {A} ws = 0.1*2 = 0.2 < 0.25; {A,E} ws = 0.6*2 = 1.2 >= 0.25; total 5 * 0.05
    e = enc([(A, E)] * 2 + [(B,)] * 3)
    got = {f.itemset for f in mine_frequent(e, MiningConfig(wmnspt="0.05"), CAT)}
    assert (A,) not in got and (A, E) in got


def test_frequent_record_fields():
    e = enc([(A, B)] * 3 + [(B,)])
    for f in mine_frequent(e, MiningConfig(wmnspt="0.1"), CAT):
        assert f.ws == f.weight_sum * f.occ
        assert f.bs == e.total_tx * Fraction(1, 10) / f.weight_sum
        assert f.occ >= f.bs


def test_min_s_and_max_k_filters():
    e = enc([(A, B, C)] * 2 + [(A,)] * 8)
    got = mine_frequent(e, MiningConfig(wmnspt=0, min_s="0.5"), CAT)
    assert [f.itemset for f in got] == [(A,)]
    got = mine_frequent(e, MiningConfig(wmnspt=0, max_k=2), CAT)
    assert max(len(f.itemset) for f in got) == 2
    assert got == brute_force_frequent(e, MiningConfig(wmnspt=0, max_k=2), CAT)


def test_config_validation():
    with pytest.raises(InputError):
        MiningConfig(wmnspt="1.5")
    with pytest.raises(InputError):
        MiningConfig(min_c=-1)
    with pytest.raises(InputError):
        MiningConfig(max_k=0)
    assert MiningConfig(wmnspt=0.1).wmnspt == Fraction(1, 10)


def test_brute_force_guard():
    cat = Catalog(Item(i, f"I{i}", 100) for i in range(21))
    with pytest.raises(UniverseTooLarge):
        brute_force_frequent(encode([(0,)], "D1", IV, cat), MiningConfig(), cat)


def test_oracle_check_raises_on_mismatch():
    e = enc([(A, B)] * 4)
    cfg = MiningConfig(wmnspt="0.1")
    assert check_against_oracle(e, cfg, CAT)
    with pytest.raises(OracleMismatch):
        check_against_oracle(e, cfg, CAT, mined=[])


def test_row_index_beyond_64_items():
    cat = Catalog(Item(i, f"I{i}", 5000) for i in range(70))
    rows = [(0, 69), (69,), (3, 65, 69)]
    index = RowIndex.from_raw(rows, cat)
    assert index.occ((69,)) == 3 and index.occ((0, 69)) == 1 and index.occ((1,)) == 0
    e = encode(rows, "D1", IV, cat)
    got = mine_frequent(e, MiningConfig(wmnspt=0), cat)
    want = {tuple(sorted(s)) for r in rows for k in range(1, len(r) + 1)
            for s in itertools.combinations(r, k)}
    assert {f.itemset for f in got} == want


instances = st.tuples(
    st.integers(1, 8).flatmap(lambda n: st.tuples(
        st.just(n), weighted_catalogs(n), st.lists(itemsets(n, 5), max_size=50))),
    st.sampled_from([Fraction(k, 20) for k in range(11)]),
)


@settings(max_examples=150, deadline=None)
@given(instances)
def test_matches_brute_force(inst):
    (n, cat, xs), wmnspt = inst
    e = encode(xs, "D1", IV, cat)
    cfg = MiningConfig(wmnspt=wmnspt)
    assert mine_frequent(e, cfg, cat) == brute_force_frequent(e, cfg, cat)
    assert mine_frequent_raw(xs, cfg, cat, "D1") == mine_frequent(e, cfg, cat)


@settings(max_examples=100, deadline=None)
@given(instances)
def test_acceptance_forms_agree(inst):
    (n, cat, xs), wmnspt = inst
    e = encode(xs, "D1", IV, cat)
    cfg = MiningConfig(wmnspt=wmnspt)
    for k in range(1, n + 1):
        for x in itertools.combinations(range(n), k):
            occ = occurrence(x, e)
            by_bs = occ >= bounded_support(x, e, cfg, cat)
            by_ws = cat.weight_sum(x) * occ >= wmnspt * e.total_tx
            assert by_bs == by_ws


@given(st.lists(itemsets(6, 4), max_size=30), itemsets(6, 3), itemsets(6, 3))
def test_occurrence_anti_monotone(xs, x, extra):
    e = enc(xs)
    y = tuple(sorted(set(x) | set(extra)))
    assert occurrence(x, e) >= occurrence(y, e)


@given(st.lists(itemsets(6, 4), max_size=30))
def test_zero_threshold_yields_all_present_itemsets(xs):
    e = enc(xs)
    want = {s for r in set(xs) for k in range(1, len(r) + 1)
            for s in itertools.combinations(r, k)}
    assert {f.itemset for f in mine_frequent(e, MiningConfig(wmnspt=0), CAT)} == want


@given(st.lists(itemsets(6, 4), max_size=30),
       st.integers(0, 10), st.integers(0, 10))
def test_raising_threshold_never_adds(xs, a, b):
    lo, hi = sorted((Fraction(a, 20), Fraction(b, 20)))
    e = enc(xs)
    low = {f.itemset for f in mine_frequent(e, MiningConfig(wmnspt=lo), CAT)}
    high = {f.itemset for f in mine_frequent(e, MiningConfig(wmnspt=hi), CAT)}
    assert high <= low


def test_output_order():
    rng = random.Random(3)
    xs = [tuple(sorted(rng.sample(range(6), rng.randint(1, 4)))) for _ in range(40)]
    got = mine_frequent(enc(xs), MiningConfig(wmnspt="0.05"), CAT)
    assert [f.key for f in got] == sorted(f.key for f in got)
