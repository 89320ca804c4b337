import pytest
from sklearn.base import clone

from conftest import ladder_catalog, tx
from pbtm.estimators import TemporalRuleMiner
from pbtm.exceptions import InputError, UnknownItem
from pbtm.rules import RuleSource
from pbtm.temporal import Interval, Transaction

CAT = ladder_catalog(4)


def data():
    # A,B together in both intervals; C alone
    return (tx([{0, 1}] * 4 + [{2}], 0, 0) + tx([{0, 1}] * 3, 12, 12))


def test_get_params_and_clone():
    m = TemporalRuleMiner(wmnspt="0.2", partition=[[0, 9], [10, 19]])
    params = m.get_params()
    assert params["wmnspt"] == "0.2" and params["transitive"] is True
    c = clone(m)
    assert c.get_params() == params and not hasattr(c, "rules_")


def test_fit_sets_attributes():
    m = TemporalRuleMiner(wmnspt="0.1", min_c="0.9", partition=[[0, 9], [10, 19]])
    assert m.fit(data(), catalog=CAT) is m
    assert [e.total_tx for e in m.encoded_] == [5, 3]
    assert m.spill_ == []
    assert set(m.frequent_itemsets_) == {"D1", "D2"}
    labels = m.rules_as_labels()
    assert (("A",), ("B",), ("D1", "D2")) in labels
    assert all(r.source is RuleSource.EXPANDED for r in m.rules_ if r.interval_ids == ("D1", "D2"))


def test_default_partition_covers_everything():
    m = TemporalRuleMiner(wmnspt=0, min_c=0).fit(data(), catalog=CAT)
    assert len(m.partition_) == 1
    assert m.partition_.intervals[0] == Interval(0, 12)


def test_fit_requires_catalog_and_transactions():
    with pytest.raises(InputError):
        TemporalRuleMiner().fit(data())
    with pytest.raises(InputError):
        TemporalRuleMiner().fit([(0, 1)], catalog=CAT)
    with pytest.raises(UnknownItem):
        TemporalRuleMiner().fit([Transaction("x", (9,), Interval(0, 0))], catalog=CAT)


def test_set_params_changes_result():
    # A=>B holds 4 of 5 times, B=>A always
    xs = tx([{0, 1}] * 4 + [{0}])
    m = TemporalRuleMiner(wmnspt=0, min_c=1, partition=[[0, 19]])
    assert m.fit(xs, catalog=CAT).rules_as_labels() == [(("B",), ("A",), ("D1",))]
    assert len(m.set_params(min_c="0.8").fit(xs, catalog=CAT).rules_) == 2
