"""Temporal association rules: per-interval generation, expansion over runs
of adjacent intervals, and transitive chaining."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .encoder import EncodedInterval
from .exceptions import UndefinedConfidence
from .miner import FrequentItemset, MiningConfig, RowIndex
from .temporal import Catalog, Interval, IntervalPartition, covering


class RuleSource(enum.Enum):
    MINED = "mined"
    EXPANDED = "expanded"
    TRANSITIVE = "transitive"


@dataclass(frozen=True)
class TemporalRule:
    """``antecedent => consequent`` holding over ``span``.

    ``confidence`` is occ(X u Y) / occ(X); ``raw_confidence`` is the weighted
    ratio ws(X u Y) / ws(X), which exceeds 1 whenever the consequent carries
    weight. ``support`` is ws(X u Y) and ``support_fraction`` occ(X u Y) /
    total_tx. For expanded rules every measure is the minimum over the run.
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    support: Fraction
    support_fraction: Fraction
    confidence: Fraction
    raw_confidence: Fraction
    span: Interval
    interval_ids: tuple[str, ...]
    source: RuleSource = RuleSource.MINED

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise ValueError("rule sides must be non-empty")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("rule sides must be disjoint")

    @property
    def derived(self) -> bool:
        return self.source is RuleSource.TRANSITIVE

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.antecedent, self.consequent)


def _sides(z: tuple[int, ...]):
    """Every (X, Z - X) split with X a non-empty proper subset, by (|X|, X)."""
    for k in range(1, len(z)):
        for x in itertools.combinations(z, k):
            xs = set(x)
            yield x, tuple(i for i in z if i not in xs)


def confidence(antecedent: Sequence[int], consequent: Sequence[int], e: EncodedInterval,
               catalog: Catalog, index: RowIndex | None = None) -> Fraction:
    """Weighted confidence ws(X u Y) / ws(X)."""
    index = index or RowIndex.from_encoded(e, catalog)
    z = tuple(sorted(set(antecedent) | set(consequent)))
    ws_x = catalog.weight_sum(antecedent) * index.occ(antecedent)
    if ws_x == 0:
        raise UndefinedConfidence(f"antecedent {tuple(antecedent)} has zero weighted support")
    return catalog.weight_sum(z) * index.occ(z) / ws_x


def occ_ratio_confidence(antecedent: Sequence[int], consequent: Sequence[int],
                         e: EncodedInterval, catalog: Catalog,
                         index: RowIndex | None = None) -> Fraction:
    """Classical confidence occ(X u Y) / occ(X), i.e. the weighted ratio
    rescaled by weight_sum(X) / weight_sum(X u Y)."""
    index = index or RowIndex.from_encoded(e, catalog)
    z = tuple(sorted(set(antecedent) | set(consequent)))
    occ_x = index.occ(antecedent)
    if occ_x == 0:
        raise UndefinedConfidence(f"antecedent {tuple(antecedent)} never occurs")
    return Fraction(index.occ(z), occ_x)


def generate_rules(frequents: Iterable[FrequentItemset], e: EncodedInterval, cfg: MiningConfig,
                   catalog: Catalog, raw_confidence: bool = False,
                   index: RowIndex | None = None) -> list[TemporalRule]:
    """Rules X => Z - X for every frequent Z with |Z| >= 2.

    Thresholds ``cfg.min_c`` against the occurrence-ratio confidence, or
    against the weighted ratio when ``raw_confidence`` is set.
    """
    index = index or RowIndex.from_encoded(e, catalog)
    total = e.total_tx
    out = []
    for f in sorted(frequents, key=lambda f: f.key):
        if len(f.itemset) < 2:
            continue
        for x, y in _sides(f.itemset):
            occ_x = index.occ(x)
            ws_x = catalog.weight_sum(x) * occ_x
            if ws_x == 0:
                raise UndefinedConfidence(f"antecedent {x} has zero weighted support")
            conf = Fraction(f.occ, occ_x)
            raw = f.ws / ws_x
            if (raw if raw_confidence else conf) < cfg.min_c:
                continue
            out.append(
                TemporalRule(
                    antecedent=x,
                    consequent=y,
                    support=f.ws,
                    support_fraction=Fraction(f.occ, total),
                    confidence=conf,
                    raw_confidence=raw,
                    span=e.interval,
                    interval_ids=(e.interval_id,),
                )
            )
    return out


def expand_intervals(rules_by_interval: Mapping[str, Sequence[TemporalRule]],
                     partition: IntervalPartition) -> list[TemporalRule]:
    """Merge each rule's maximal runs of adjacent intervals into one rule.

    A run needs consecutive partition positions with gap-free adjacency
    (end + 1 == next start). Single-interval occurrences pass through as is.
    """
    by_key: dict[tuple, dict[int, TemporalRule]] = {}
    for interval_id, rules in rules_by_interval.items():
        pos = partition.index(interval_id)
        for r in rules:
            by_key.setdefault(r.key, {})[pos] = r
    out = []
    for key, at in by_key.items():
        positions = sorted(at)
        run = [positions[0]]
        for p in positions[1:]:
            if p == run[-1] + 1 and partition.adjacent(run[-1]):
                run.append(p)
            else:
                out.append(_merge_run([at[q] for q in run], partition, run))
                run = [p]
        out.append(_merge_run([at[q] for q in run], partition, run))
    out.sort(key=lambda r: (r.span.start, r.span.end, len(r.antecedent), r.antecedent,
                            len(r.consequent), r.consequent))
    return out


def _merge_run(rules: list[TemporalRule], partition: IntervalPartition,
               positions: list[int]) -> TemporalRule:
    if len(rules) == 1:
        return rules[0]
    first, last = partition.intervals[positions[0]], partition.intervals[positions[-1]]
    return replace(
        rules[0],
        support=min(r.support for r in rules),
        support_fraction=min(r.support_fraction for r in rules),
        confidence=min(r.confidence for r in rules),
        raw_confidence=min(r.raw_confidence for r in rules),
        span=Interval(first.start, last.end),
        interval_ids=tuple(partition.ids[p] for p in positions),
        source=RuleSource.EXPANDED,
    )


def transitive_rules(rules: Sequence[TemporalRule]) -> list[TemporalRule]:
    """Chain X => Y and Y => Z into a derived X => Z.

    The derived rule spans the cover of both source spans and carries the
    product of their confidences. It is dropped when X and Z intersect or
    when an input rule already states X => Z over the same span.
    """
    by_antecedent: dict[tuple, list[TemporalRule]] = {}
    for r in rules:
        by_antecedent.setdefault(r.antecedent, []).append(r)
    existing = {(r.antecedent, r.consequent, r.span) for r in rules}
    derived: dict[tuple, TemporalRule] = {}
    for r1 in rules:
        for r2 in by_antecedent.get(r1.consequent, ()):
            if set(r1.antecedent) & set(r2.consequent):
                continue
            span = covering([r1.span, r2.span])
            ident = (r1.antecedent, r2.consequent, span)
            if ident in existing:
                continue
            ids = tuple(dict.fromkeys(r1.interval_ids + r2.interval_ids))
            rule = TemporalRule(
                antecedent=r1.antecedent,
                consequent=r2.consequent,
                support=min(r1.support, r2.support),
                support_fraction=min(r1.support_fraction, r2.support_fraction),
                confidence=r1.confidence * r2.confidence,
                raw_confidence=r1.raw_confidence * r2.raw_confidence,
                span=span,
                interval_ids=ids,
                source=RuleSource.TRANSITIVE,
            )
            best = derived.get(ident)
            if best is None or rule.confidence > best.confidence:
                derived[ident] = rule
    return sorted(derived.values(), key=lambda r: (r.span.start, r.span.end, r.antecedent,
                                                   r.consequent))


def flatten(rules: Iterable[TemporalRule]) -> set[tuple]:
    """(antecedent, consequent, interval_id) incidences covered by ``rules``."""
    return {(r.antecedent, r.consequent, i) for r in rules for i in r.interval_ids}
