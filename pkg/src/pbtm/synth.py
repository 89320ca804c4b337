"""Seeded synthetic complaints-style temporal databases with planted rules.

Generation runs in three passes so planted confidences can be hit exactly
in spite of duplication:

1. lay out slots: each slot is either a new base transaction (with an
   interval and a role, planted rule or noise) or a copy of an earlier base;
2. per planted rule and interval, choose which base transactions carry the
   consequent so that their total multiplicity is as close as any subset can
   get to ``target_confidence`` times the antecedent's multiplicity;
3. materialize itemsets and valid times, then record the exact empirical
   statistics as ground truth.

Noise items are disjoint from every planted item, so noise never changes a
planted rule's confidence.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exceptions import InfeasibleConfig, InputError
from .temporal import (
    Catalog,
    Interval,
    IntervalPartition,
    Item,
    Transaction,
    format_rational,
    weight_to_units,
    write_transactions_csv,
    write_weights_csv,
)
from .validation import as_fraction, check_fraction

#: planted empirical confidence must land this close to the target
CONFIDENCE_TOLERANCE = Fraction(1, 20)


@dataclass(frozen=True)
class PlantedRule:
    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    target_confidence: Fraction
    intervals: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(self.antecedent))
        object.__setattr__(self, "consequent", tuple(self.consequent))
        object.__setattr__(self, "intervals", tuple(self.intervals))
        q = as_fraction(self.target_confidence, "target_confidence")
        if not 0 < q <= 1:
            raise InfeasibleConfig(f"target_confidence {q} outside (0, 1]")
        object.__setattr__(self, "target_confidence", q)

    @property
    def items(self) -> set[str]:
        return set(self.antecedent) | set(self.consequent)


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_items: int = 16
    n_transactions: int = 1000
    partition: IntervalPartition = field(
        default_factory=lambda: IntervalPartition.uniform(0, 100, 3)
    )
    planted_rules: tuple[PlantedRule, ...] = ()
    weight_assignment: str | tuple = "ladder"
    noise_rate: Fraction = Fraction(3, 10)
    duplicate_rate: Fraction = Fraction(0)
    max_noise_items: int = 3

    def __post_init__(self):
        object.__setattr__(self, "planted_rules", tuple(self.planted_rules))
        object.__setattr__(self, "noise_rate", check_fraction(self.noise_rate, "noise_rate"))
        object.__setattr__(self, "duplicate_rate",
                           check_fraction(self.duplicate_rate, "duplicate_rate"))
        if self.n_items < 1 or self.n_transactions < 0 or self.max_noise_items < 1:
            raise InfeasibleConfig("n_items and max_noise_items must be >= 1, n_transactions >= 0")
        if not 0 <= self.seed < 2**64:
            raise InfeasibleConfig("seed must be an unsigned 64-bit integer")

    @property
    def labels(self) -> list[str]:
        return [f"C{i + 1:02d}" for i in range(self.n_items)]

    @classmethod
    def from_dict(cls, d: Mapping, **overrides) -> "SynthConfig":
        d = {**d, **{k: v for k, v in overrides.items() if v is not None}}
        if "seed" not in d:
            raise InputError("synthetic config needs a seed")
        kwargs = {
            "seed": int(d["seed"]),
            "n_items": int(d.get("n_items", 16)),
            "n_transactions": int(d.get("n_transactions", 1000)),
            "noise_rate": d.get("noise_rate", Fraction(3, 10)),
            "duplicate_rate": d.get("duplicate_rate", 0),
            "max_noise_items": int(d.get("max_noise_items", 3)),
        }
        if "partition" in d:
            kwargs["partition"] = IntervalPartition.from_spec(d["partition"])
        w = d.get("weights", "ladder")
        kwargs["weight_assignment"] = (
            "ladder" if w == "ladder" else ("uniform", *map(str, w["uniform"]))
        )
        kwargs["planted_rules"] = tuple(
            PlantedRule(tuple(r["antecedent"]), tuple(r["consequent"]),
                        r["confidence"], tuple(r["intervals"]))
            for r in d.get("planted_rules", ())
        )
        return cls(**kwargs)


def default_config(seed: int, n_transactions: int = 10_000,
                   duplicate_rate=0, noise_rate=Fraction(3, 10)) -> SynthConfig:
    """Three 100-tick intervals, 16 items, five planted rules (conf 0.7 to 1.0).

    C01 => C02 is planted in D1 and D2 only, giving one expandable run.
    """
    rules = (
        PlantedRule(("C01",), ("C02",), 1, ("D1", "D2")),
        PlantedRule(("C03",), ("C04",), Fraction(9, 10), ("D2", "D3")),
        PlantedRule(("C05", "C06"), ("C07",), Fraction(4, 5), ("D1",)),
        PlantedRule(("C08",), ("C09",), Fraction(3, 4), ("D3",)),
        PlantedRule(("C10",), ("C11",), Fraction(7, 10), ("D1", "D2", "D3")),
    )
    return SynthConfig(
        seed=seed,
        n_items=16,
        n_transactions=n_transactions,
        partition=IntervalPartition.uniform(0, 100, 3),
        planted_rules=rules,
        noise_rate=noise_rate,
        duplicate_rate=duplicate_rate,
    )


@dataclass
class SynthResult:
    transactions: list[Transaction]
    catalog: Catalog
    partition: IntervalPartition
    ground_truth: dict

    def write(self, out_dir) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = [os.path.join(out_dir, n)
                 for n in ("transactions.csv", "weights.csv", "ground_truth.json")]
        write_transactions_csv(paths[0], self.transactions, self.catalog)
        write_weights_csv(paths[1], self.catalog)
        with open(paths[2], "w") as fh:
            json.dump(self.ground_truth, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return paths


def _catalog(cfg: SynthConfig, rng: np.random.Generator) -> Catalog:
    items = []
    for i, label in enumerate(cfg.labels):
        if cfg.weight_assignment == "ladder":
            units = weight_to_units(Fraction(i % 10 + 1, 10))
        else:
            _, lo, hi = cfg.weight_assignment
            lo, hi = float(lo), float(hi)
            if not 0 < lo <= hi <= 1:
                raise InfeasibleConfig(f"uniform weight range [{lo}, {hi}] outside (0, 1]")
            units = int(round(rng.uniform(lo, hi) * 10_000))
            units = min(max(units, 1), 10_000)
        items.append(Item(i, label, units))
    return Catalog(items)


def _validate(cfg: SynthConfig, catalog: Catalog) -> None:
    seen: set[str] = set()
    for r in cfg.planted_rules:
        if not r.antecedent or not r.consequent:
            raise InfeasibleConfig("planted rule sides must be non-empty")
        if set(r.antecedent) & set(r.consequent):
            raise InfeasibleConfig(f"planted rule {r.antecedent} => {r.consequent} overlaps itself")
        for label in r.items:
            if label not in {catalog[i].label for i in catalog}:
                raise InfeasibleConfig(f"planted item {label!r} not among {cfg.n_items} items")
        if r.items & seen:
            raise InfeasibleConfig(f"planted rules share items {sorted(r.items & seen)}")
        seen |= r.items
        for interval_id in r.intervals:
            if interval_id not in cfg.partition.ids:
                raise InfeasibleConfig(f"planted interval {interval_id!r} not in partition")


def _subset_near(members: list[int], sizes: list[int], quota: int) -> list[int]:
    """Members whose sizes sum as close to ``quota`` as any subset can
    (ties go to the smaller sum)."""
    reach = [1]  # bit s set when sum s is reachable from the first j members
    for m in sizes:
        reach.append(reach[-1] | (reach[-1] << m))
    final = reach[-1]
    s = min((t for t in range(final.bit_length()) if (final >> t) & 1),
            key=lambda t: (abs(t - quota), t))
    chosen = []
    for j in range(len(sizes), 0, -1):
        if not (reach[j - 1] >> s) & 1:
            chosen.append(members[j - 1])
            s -= sizes[j - 1]
    return chosen


def generate(cfg: SynthConfig) -> SynthResult:
    rng = np.random.default_rng(cfg.seed)
    catalog = _catalog(cfg, rng)
    _validate(cfg, catalog)
    planted_labels = set().union(*(r.items for r in cfg.planted_rules))
    noise_pool = [i for i in catalog if catalog[i].label not in planted_labels]
    partition = cfg.partition
    n_intervals = len(partition)
    active = {k: [j for j, r in enumerate(cfg.planted_rules) if interval_id in r.intervals]
              for k, interval_id in enumerate(partition.ids)}
    if cfg.n_transactions and n_intervals == 0:
        raise InfeasibleConfig("partition has no intervals")

    # pass 1: slot layout
    parent = np.empty(cfg.n_transactions, dtype=np.int64)
    base_interval: list[int] = []
    base_rule: list[int] = []  # -1 for noise
    base_slots: list[int] = []
    for slot in range(cfg.n_transactions):
        if base_slots and rng.random() < cfg.duplicate_rate:
            parent[slot] = base_slots[int(rng.integers(len(base_slots)))]
            continue
        parent[slot] = slot
        k = int(rng.integers(n_intervals))
        rules_here = active[k]
        if rules_here and rng.random() >= cfg.noise_rate:
            rule = rules_here[int(rng.integers(len(rules_here)))]
        else:
            if not noise_pool:
                raise InfeasibleConfig("noise transactions requested but every item is planted")
            rule = -1
        base_slots.append(slot)
        base_interval.append(k)
        base_rule.append(rule)
    base_pos = {slot: b for b, slot in enumerate(base_slots)}
    multiplicity = np.zeros(len(base_slots), dtype=np.int64)
    for slot in range(cfg.n_transactions):
        multiplicity[base_pos[int(parent[slot])]] += 1

    # pass 2: consequent quotas
    carries_y = np.zeros(len(base_slots), dtype=bool)
    for j, rule in enumerate(cfg.planted_rules):
        for k in range(n_intervals):
            members = [b for b in range(len(base_slots))
                       if base_rule[b] == j and base_interval[b] == k]
            if not members:
                continue
            total = int(multiplicity[members].sum())
            quota = int(rule.target_confidence * total + Fraction(1, 2))
            order = [members[p] for p in rng.permutation(len(members))]
            for b in _subset_near(order, [int(multiplicity[b]) for b in order], quota):
                carries_y[b] = True

    # pass 3: materialize
    rule_ids = [(catalog.ids(r.antecedent), catalog.ids(r.consequent)) for r in cfg.planted_rules]
    base_tx: list[tuple[tuple[int, ...], Interval]] = []
    for b in range(len(base_slots)):
        k = base_interval[b]
        if base_rule[b] >= 0:
            x, y = rule_ids[base_rule[b]]
            items = set(x)
            if carries_y[b]:
                items |= set(y)
            if noise_pool and rng.random() < cfg.noise_rate:
                items.add(noise_pool[int(rng.integers(len(noise_pool)))])
        else:
            size = int(rng.integers(1, min(cfg.max_noise_items, len(noise_pool)) + 1))
            items = {noise_pool[int(p)] for p in rng.choice(len(noise_pool), size, replace=False)}
        iv = partition.intervals[k]
        t0 = int(rng.integers(iv.start, iv.end + 1))
        t1 = min(iv.end, t0 + int(rng.integers(0, 3)))
        base_tx.append((tuple(sorted(items)), Interval(t0, t1)))
    transactions = []
    for slot in range(cfg.n_transactions):
        itemset, valid = base_tx[base_pos[int(parent[slot])]]
        transactions.append(Transaction(f"T{slot + 1:06d}", itemset, valid))

    truth = ground_truth(cfg, transactions, catalog)
    for r in truth["planted_rules"]:
        for stats in r["intervals"].values():
            if stats["occ_antecedent"] == 0:
                continue
            gap = abs(Fraction(stats["confidence_exact"]) - Fraction(r["target_confidence"]))
            if gap > CONFIDENCE_TOLERANCE:
                raise InfeasibleConfig(
                    f"planted rule {r['antecedent']} => {r['consequent']} reached confidence "
                    f"{float(Fraction(stats['confidence_exact'])):.3f}, target "
                    f"{r['target_confidence']}; increase n_transactions"
                )
    return SynthResult(transactions, catalog, partition, truth)


def ground_truth(cfg: SynthConfig, transactions: Sequence[Transaction], catalog: Catalog) -> dict:
    """Exact per-interval statistics of every planted rule."""
    per_interval: dict[str, list[frozenset]] = {i: [] for i in cfg.partition.ids}
    for t in transactions:
        for interval_id, iv in cfg.partition:
            if iv.contains(t.valid):
                per_interval[interval_id].append(frozenset(t.itemset))
                break
    rules = []
    for r in cfg.planted_rules:
        x = frozenset(catalog.ids(r.antecedent))
        z = x | frozenset(catalog.ids(r.consequent))
        weight = catalog.weight_sum(z)
        stats = {}
        for interval_id in r.intervals:
            rows = per_interval[interval_id]
            occ_x = sum(1 for s in rows if x <= s)
            occ_z = sum(1 for s in rows if z <= s)
            n = len(rows)
            stats[interval_id] = {
                "total_tx": n,
                "occ_antecedent": occ_x,
                "occ_rule": occ_z,
                "confidence_exact": str(Fraction(occ_z, occ_x)) if occ_x else "0",
                "confidence": float(Fraction(occ_z, occ_x)) if occ_x else 0.0,
                "support_fraction": str(Fraction(occ_z, n)) if n else "0",
                "weighted_support_fraction": str(weight * occ_z / n) if n else "0",
            }
        rules.append({
            "antecedent": list(r.antecedent),
            "consequent": list(r.consequent),
            "target_confidence": format_rational(r.target_confidence),
            "intervals": stats,
        })
    return {
        "seed": cfg.seed,
        "n_transactions": len(transactions),
        "partition": cfg.partition.to_spec(),
        "interval_sizes": {k: len(v) for k, v in per_interval.items()},
        "planted_rules": rules,
    }
