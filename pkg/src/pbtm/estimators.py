"""scikit-learn style front end for the mining pipeline.

:class:`TemporalRuleMiner` takes hyperparameters in ``__init__`` and learns
from a list of :class:`~pbtm.temporal.Transaction` in :meth:`fit`, so it
clones, pickles and reports ``get_params`` like any estimator. The
classifier counterpart is :class:`pbtm.classifier.NaiveBayesClassifier`.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError
from .miner import MiningConfig
from .pipeline import PipelineConfig, run
from .temporal import Catalog, Transaction


class TemporalRuleMiner(BaseEstimator):
    """Encode, mine and derive temporal rules from valid-time transactions.

    Parameters
    ----------
    wmnspt : float, str or Fraction, default=0.1
        Weighted minimum support as a fraction of an interval's transactions.
    min_c : float, str or Fraction, default=0.5
        Minimum confidence.
    min_s : optional
        Plain support floor, disabled when None.
    max_k : int, optional
        Largest itemset size mined.
    raw_confidence : bool, default=False
        Threshold ``min_c`` against the weighted confidence ratio instead of
        the occurrence ratio.
    partition : list of [start, end] pairs, dict spec or IntervalPartition
        Analysis intervals. A single covering interval when None.
    transitive : bool, default=True
        Append rules derived by chaining.

    Attributes
    ----------
    encoded_ : list of EncodedInterval
    spill_ : list of Transaction
        Transactions straddling partition boundaries, excluded from mining.
    frequent_itemsets_ : dict of interval id -> list of FrequentItemset
    rules_ : list of TemporalRule
    partition_ : IntervalPartition
    """

    def __init__(self, wmnspt=0.1, min_c=0.5, min_s=None, max_k=None, raw_confidence=False,
                 partition=None, transitive=True):
        self.wmnspt = wmnspt
        self.min_c = min_c
        self.min_s = min_s
        self.max_k = max_k
        self.raw_confidence = raw_confidence
        self.partition = partition
        self.transitive = transitive

    def fit(self, X, y=None, catalog: Catalog | None = None):
        if catalog is None:
            raise InputError("TemporalRuleMiner.fit needs the item catalog")
        X = list(X)
        for t in X:
            if not isinstance(t, Transaction):
                raise InputError(f"expected Transaction, got {type(t).__name__}")
            for i in t.itemset:
                catalog[i]
        cfg = PipelineConfig(
            partition=self.partition,
            mining=MiningConfig(self.wmnspt, self.min_c, self.min_s, self.max_k),
            raw_confidence=self.raw_confidence,
            transitive=self.transitive,
        )
        result = run(cfg, transactions=X, catalog=catalog)
        self.catalog_ = catalog
        self.partition_ = result.partition
        self.encoded_ = result.encoded
        self.spill_ = result.spill
        self.frequent_itemsets_ = result.frequents
        self.rules_ = result.rules
        return self

    def rules_as_labels(self):
        """Rules as ``(antecedent labels, consequent labels, interval ids)``."""
        check_is_fitted(self, "rules_")
        return [
            (tuple(self.catalog_.labels(r.antecedent)), tuple(self.catalog_.labels(r.consequent)),
             r.interval_ids)
            for r in self.rules_
        ]
