"""Categorical naive Bayes with Laplace smoothing, plus the bridge that turns
mined temporal rules into categorical instances."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import EmptyTraining, InputError, SchemaMismatch, UnknownLabel, ZeroEvidence
from .rules import TemporalRule
from .temporal import Catalog
from .validation import as_fraction

ITEM_VALUES = ("antecedent", "consequent", "absent")


@dataclass(frozen=True)
class Attribute:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(str(v) for v in self.domain))
        if not self.domain:
            raise SchemaMismatch(f"attribute {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise SchemaMismatch(f"attribute {self.name!r} has duplicate domain values")


@dataclass(frozen=True)
class Bins:
    """Half-open bins [e_i, e_{i+1}); the last bin is closed on the right."""

    edges: tuple[Fraction, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        edges = tuple(as_fraction(e, "bin edge") for e in self.edges)
        if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
            raise SchemaMismatch("bin edges must be strictly increasing, at least two")
        n = len(edges) - 1
        labels = tuple(self.labels) or (
            ("low", "medium", "high") if n == 3 else tuple(f"bin{k}" for k in range(n))
        )
        if len(labels) != n:
            raise SchemaMismatch(f"{n} bins need {n} labels, got {len(labels)}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)

    def __call__(self, value) -> str:
        v = as_fraction(value)
        if not self.edges[0] <= v <= self.edges[-1]:
            raise SchemaMismatch(f"value {value} outside bins [{self.edges[0]}, {self.edges[-1]}]")
        for k in range(len(self.labels) - 1):
            if v < self.edges[k + 1]:
                return self.labels[k]
        return self.labels[-1]


@dataclass(frozen=True)
class RuleFeatures:
    """How a rule becomes an instance: item presence over ``items`` (labels),
    the rule's first interval id, and binned confidence and support fraction."""

    items: tuple[str, ...] = ()
    intervals: tuple[str, ...] = ()
    confidence_bins: Bins = field(default_factory=lambda: Bins((0, Fraction(1, 2), Fraction(9, 10), 1)))
    support_bins: Bins = field(default_factory=lambda: Bins((0, Fraction(1, 10), Fraction(3, 10), 1)))

    def attributes(self) -> tuple[Attribute, ...]:
        attrs = [Attribute(f"item:{label}", ITEM_VALUES) for label in self.items]
        if self.intervals:
            attrs.append(Attribute("interval", self.intervals))
        attrs.append(Attribute("confidence", self.confidence_bins.labels))
        attrs.append(Attribute("support", self.support_bins.labels))
        return tuple(attrs)


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]
    classes: tuple[str, ...]
    rule_features: RuleFeatures | None = None

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "classes", tuple(str(c) for c in self.classes))
        if not self.classes:
            raise SchemaMismatch("schema declares no classes")
        if len(set(self.classes)) != len(self.classes):
            raise SchemaMismatch("duplicate class ids")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate attribute names")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def check(self, x: Sequence[str]) -> tuple[str, ...]:
        x = tuple(str(v) for v in x)
        if len(x) != len(self.attributes):
            raise SchemaMismatch(f"instance has {len(x)} values, schema has {len(self.attributes)}")
        for a, v in zip(self.attributes, x):
            if v not in a.domain:
                raise SchemaMismatch(f"value {v!r} not in domain of {a.name!r}")
        return x

    @classmethod
    def from_dict(cls, d: Mapping) -> "Schema":
        rf = None
        if "rule_features" in d:
            f = d["rule_features"]
            kwargs = {"items": tuple(f.get("items", ())), "intervals": tuple(f.get("intervals", ()))}
            for side in ("confidence", "support"):
                if f"{side}_bins" in f:
                    kwargs[f"{side}_bins"] = Bins(tuple(f[f"{side}_bins"]),
                                                  tuple(f.get(f"{side}_labels", ())))
            rf = RuleFeatures(**kwargs)
        if "attributes" in d:
            attrs = tuple(Attribute(a["name"], tuple(a["domain"])) for a in d["attributes"])
            if rf is not None and attrs != rf.attributes():
                raise SchemaMismatch("declared attributes disagree with rule_features")
        elif rf is not None:
            attrs = rf.attributes()
        else:
            raise SchemaMismatch("schema needs 'attributes' or 'rule_features'")
        return cls(attrs, tuple(d["classes"]), rf)

    @classmethod
    def load(cls, path) -> "Schema":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"{path}: bad schema: {exc}") from None


@dataclass(frozen=True)
class NBModel:
    """Priors and per-attribute, per-class conditional tables.

    ``conditionals[k][i]`` maps each value of attribute k to P(value | class i).
    """

    schema: Schema
    priors: tuple[Fraction, ...]
    conditionals: tuple[tuple[Mapping[str, Fraction], ...], ...]
    alpha: Fraction

    @property
    def classes(self) -> tuple[str, ...]:
        return self.schema.classes

    def to_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "classes": list(self.classes),
            "priors": {c: str(p) for c, p in zip(self.classes, self.priors)},
            "conditionals": {
                a.name: {
                    c: {v: str(table[v]) for v in a.domain}
                    for c, table in zip(self.classes, self.conditionals[k])
                }
                for k, a in enumerate(self.schema.attributes)
            },
        }


def train(instances: Sequence[tuple[Sequence[str], str]], schema: Schema, alpha=1) -> NBModel:
    """Fit priors and conditionals from ``(attributes, label)`` pairs.

    P(C) = (n_C + alpha) / (N + alpha m) and
    P(v | C) = (n_{v,C} + alpha) / (n_C + alpha |domain|).
    A declared class with no instances under alpha=0 gets prior 0 and uniform
    conditionals.
    """
    alpha = as_fraction(alpha, "alpha")
    if alpha < 0:
        raise InputError("alpha must be non-negative")
    if not instances:
        raise EmptyTraining("no training instances")
    class_pos = {c: i for i, c in enumerate(schema.classes)}
    m = len(schema.classes)
    n_class = [0] * m
    n_value = [[dict.fromkeys(a.domain, 0) for _ in range(m)] for a in schema.attributes]
    for x, label in instances:
        label = str(label)
        if label not in class_pos:
            raise UnknownLabel(f"label {label!r} not among classes {schema.classes}")
        i = class_pos[label]
        n_class[i] += 1
        for k, v in enumerate(schema.check(x)):
            n_value[k][i][v] += 1
    n = len(instances)
    priors = tuple(Fraction(n_class[i] + alpha) / (n + alpha * m) for i in range(m))
    conditionals = []
    for k, a in enumerate(schema.attributes):
        per_class = []
        for i in range(m):
            denom = n_class[i] + alpha * len(a.domain)
            if denom == 0:
                table = {v: Fraction(1, len(a.domain)) for v in a.domain}
            else:
                table = {v: (n_value[k][i][v] + alpha) / denom for v in a.domain}
            per_class.append(table)
        conditionals.append(tuple(per_class))
    return NBModel(schema, priors, tuple(conditionals), alpha)


def _log(q) -> float:
    return math.log(q) if q > 0 else -math.inf


def log_joint(model: NBModel, x: Sequence[str]) -> list[float]:
    """log P(C_i) + sum_k log P(x_k | C_i) for each class."""
    x = model.schema.check(x)
    out = []
    for i in range(len(model.classes)):
        s = _log(model.priors[i])
        for k, v in enumerate(x):
            if s == -math.inf:
                break
            s += _log(model.conditionals[k][i][v])
        out.append(s)
    return out


def posterior(model: NBModel, x: Sequence[str]) -> dict[str, float]:
    """Normalized P(C_i | x), accumulated in log space."""
    logs = log_joint(model, x)
    top = max(logs)
    if top == -math.inf:
        raise ZeroEvidence(f"every class has zero likelihood for {tuple(x)}")
    weights = [math.exp(v - top) for v in logs]
    total = math.fsum(weights)
    return {c: w / total for c, w in zip(model.classes, weights)}


def predict(model: NBModel, x: Sequence[str]) -> str:
    """Maximum a posteriori class; exact ties go to the earliest declared class.

    Joints are compared as exact rationals so that ties are not decided by
    floating point rounding.
    """
    x = model.schema.check(x)
    best, best_joint = None, None
    for i, c in enumerate(model.classes):
        joint = model.priors[i]
        for k, v in enumerate(x):
            if not joint:
                break
            joint *= model.conditionals[k][i][v]
        if best is None or joint > best_joint:
            best, best_joint = c, joint
    if not best_joint:
        raise ZeroEvidence(f"every class has zero likelihood for {tuple(x)}")
    return best


def featurize_rule(rule: TemporalRule, schema: Schema, catalog: Catalog) -> tuple[str, ...]:
    rf = schema.rule_features
    if rf is None:
        raise SchemaMismatch("schema has no rule_features section")
    values = []
    ante, cons = set(rule.antecedent), set(rule.consequent)
    for label in rf.items:
        item_id = catalog.by_label(label).id
        values.append("antecedent" if item_id in ante else "consequent" if item_id in cons
                      else "absent")
    if rf.intervals:
        values.append(rule.interval_ids[0])
    values.append(rf.confidence_bins(rule.confidence))
    values.append(rf.support_bins(rule.support_fraction))
    return schema.check(values)


def read_training_csv(path, schema: Schema, labeled: bool = True):
    """Rows of ``attr_1,...,attr_n[,label]`` checked against ``schema``."""
    expected = list(schema.names) + (["label"] if labeled else [])
    out = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                return out
            if labeled and header != expected or not labeled and header[: len(schema.names)] != expected:
                raise InputError(f"{path}: header {header} does not match schema {expected}")
            for row in reader:
                if not row:
                    continue
                x = schema.check(row[: len(schema.names)])
                out.append((x, row[len(schema.names)]) if labeled else x)
    except OSError as exc:
        raise InputError(str(exc)) from None
    return out


class NaiveBayesClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`train` / :func:`posterior`.

    Parameters
    ----------
    alpha : float or Fraction, default=1
        Laplace smoothing constant; 0 gives plain maximum-likelihood tables.
    domains : sequence of sequences, optional
        Value domain per column. Inferred from the training data when omitted.
    classes : sequence, optional
        Class ids in tie-break order. Sorted unique labels when omitted.
    """

    def __init__(self, alpha=1, domains=None, classes=None):
        self.alpha = alpha
        self.domains = domains
        self.classes = classes

    def fit(self, X, y):
        X = np.asarray(X, dtype=object)
        if X.ndim != 2:
            raise InputError("X must be 2-dimensional")
        y = [str(v) for v in np.asarray(y, dtype=object).ravel()]
        if len(y) != X.shape[0]:
            raise InputError("X and y have different lengths")
        if self.domains is None:
            domains = [sorted({str(v) for v in X[:, k]}) for k in range(X.shape[1])]
        else:
            domains = self.domains
        classes = self.classes if self.classes is not None else sorted(set(y))
        schema = Schema(
            tuple(Attribute(f"x{k}", tuple(d)) for k, d in enumerate(domains)), tuple(classes)
        )
        self.model_ = train([(tuple(str(v) for v in row), label) for row, label in zip(X, y)],
                            schema, self.alpha)
        self.classes_ = np.array(schema.classes, dtype=object)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=object)
        return np.array([[p for p in posterior(self.model_, row).values()] for row in X])

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=object)
        return np.array([predict(self.model_, row) for row in X], dtype=object)
