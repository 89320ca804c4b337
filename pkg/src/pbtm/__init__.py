"""Priority-based temporal mining: interval-encoded valid-time transactions
with weighted items, weighted frequent itemsets, temporal association rules
and naive Bayes classification of the mined rules."""

from .classifier import NaiveBayesClassifier, NBModel, Schema, featurize_rule, posterior, predict, train
from .encoder import EncodedInterval, EncodedRow, decode, encode, footprint
from .estimators import TemporalRuleMiner
from .exceptions import PBTMError
from .miner import FrequentItemset, MiningConfig, brute_force_frequent, mine_frequent, occurrence
from .rules import TemporalRule, expand_intervals, generate_rules, transitive_rules
from .synth import PlantedRule, SynthConfig, default_config, generate
from .temporal import (
    Catalog,
    Interval,
    IntervalPartition,
    IntervalRelation,
    Item,
    Transaction,
    assign_interval,
    interval_relations,
)

__version__ = "0.1.0"
