"""Weighted frequent itemset mining over encoded intervals.

An itemset X is frequent in an interval when it occurs at least once and

    occ(X) >= BS(X) = total_tx * wmnspt / weight_sum(X)

which is the same as ``weight_sum(X) * occ(X) >= wmnspt * total_tx``. All
comparisons are exact: weights are fixed-point integers and thresholds are
:class:`fractions.Fraction`.

Weighted support is not downward closed, so the level-wise search cannot use
plain Apriori pruning. A candidate X of size k is only dropped when even the
heaviest superset that could still occur,

    (weight_sum(X) + cap) * occ(X) < wmnspt * total_tx

where ``cap`` is the sum of the (L - k) largest weights of items present in
the interval but not in X and L is the longest encoded row, cannot pass.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .encoder import EncodedInterval
from .exceptions import OracleMismatch, UniverseTooLarge, ZeroWeight
from .temporal import WEIGHT_SCALE, Catalog
from .validation import check_fraction, check_optional_fraction, check_positive_int

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class MiningConfig:
    wmnspt: Fraction = Fraction(1, 10)
    min_c: Fraction = Fraction(1, 2)
    min_s: Fraction | None = None
    max_k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "wmnspt", check_fraction(self.wmnspt, "wmnspt"))
        object.__setattr__(self, "min_c", check_fraction(self.min_c, "min_c"))
        object.__setattr__(self, "min_s", check_optional_fraction(self.min_s, "min_s"))
        check_positive_int(self.max_k, "max_k", allow_none=True)


@dataclass(frozen=True)
class FrequentItemset:
    itemset: tuple[int, ...]
    interval_id: str
    occ: int
    weight_sum: Fraction
    ws: Fraction
    bs: Fraction

    @property
    def key(self):
        return (len(self.itemset), self.itemset)


def occurrence(itemset: Iterable[int], e: EncodedInterval) -> int:
    """Number of transactions in ``e`` containing ``itemset``."""
    x = set(itemset)
    return sum(r.count + 1 for r in e.rows if x.issubset(r.itemset))


def bounded_support(itemset: Sequence[int], e: EncodedInterval, cfg: MiningConfig,
                    catalog: Catalog) -> Fraction:
    """Minimum occurrence count ``itemset`` needs: total_tx * wmnspt / weight_sum."""
    weight = catalog.weight_sum(itemset)
    if weight == 0:
        raise ZeroWeight(f"itemset {tuple(itemset)} has zero total weight")
    return e.total_tx * cfg.wmnspt / weight


def _make_frequent(itemset, interval_id, occ, weight_units, total_tx, wmnspt) -> FrequentItemset:
    weight_sum = Fraction(weight_units, WEIGHT_SCALE)
    return FrequentItemset(
        itemset=tuple(itemset),
        interval_id=interval_id,
        occ=occ,
        weight_sum=weight_sum,
        ws=weight_sum * occ,
        bs=total_tx * wmnspt / weight_sum,
    )


class RowIndex:
    """Itemset rows as bitmasks with per-row occurrence counts.

    Serves both the encoded store (one row per distinct itemset, weight
    count+1) and the unencoded baseline (one row per transaction, weight 1).
    """

    def __init__(self, itemsets: Sequence[Sequence[int]], occurrences: Sequence[int],
                 catalog: Catalog):
        universe = sorted({i for s in itemsets for i in s})
        self.bit_of = {item: b for b, item in enumerate(universe)}
        self.item_of = universe
        self.units = [catalog[i].weight_units for i in universe]
        dtype = np.uint64 if len(universe) <= 64 else object
        masks = [sum(1 << self.bit_of[i] for i in s) for s in itemsets]
        self.masks = np.array(masks, dtype=dtype)
        self.counts = np.asarray(occurrences, dtype=np.int64)
        self.total_tx = int(self.counts.sum())
        self.max_len = max((len(s) for s in itemsets), default=0)
        self._dtype = dtype
        self._cache: dict[int, int] = {}

    @classmethod
    def from_encoded(cls, e: EncodedInterval, catalog: Catalog) -> "RowIndex":
        return cls([r.itemset for r in e.rows], [r.count + 1 for r in e.rows], catalog)

    @classmethod
    def from_raw(cls, itemsets: Sequence[Sequence[int]], catalog: Catalog) -> "RowIndex":
        return cls(itemsets, [1] * len(itemsets), catalog)

    def mask(self, itemset: Iterable[int]) -> int | None:
        m = 0
        for i in itemset:
            b = self.bit_of.get(i)
            if b is None:
                return None
            m |= 1 << b
        return m

    def occ_mask(self, m: int) -> int:
        hit = self._cache.get(m)
        if hit is None:
            key = self._dtype(m) if self._dtype is np.uint64 else m
            hit = int(self.counts[(self.masks & key) == key].sum())
            self._cache[m] = hit
        return hit

    def occ(self, itemset: Iterable[int]) -> int:
        m = self.mask(itemset)
        return 0 if m is None else self.occ_mask(m)


def _join(level: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Apriori join: merge k-tuples sharing a (k-1)-prefix, keep those whose
    every k-subset is in ``level``."""
    alive = set(level)
    out = []
    for _, group in itertools.groupby(level, key=lambda t: t[:-1]):
        group = list(group)
        for a, b in itertools.combinations(group, 2):
            cand = a + (b[-1],)
            if all(cand[:j] + cand[j + 1 :] in alive for j in range(len(cand) - 2)):
                out.append(cand)
    return out


def mine_index(index: RowIndex, cfg: MiningConfig, interval_id: str = "") -> list[FrequentItemset]:
    """Level-wise weighted mining over a :class:`RowIndex`."""
    total = index.total_tx
    if total == 0:
        return []
    num, den = cfg.wmnspt.numerator, cfg.wmnspt.denominator
    need = num * total * WEIGHT_SCALE  # compared against weight_units * occ * den
    min_s = cfg.min_s
    L = index.max_len
    units = index.units
    heavy = sorted(range(len(units)), key=lambda b: (-units[b], b))

    def cap(bits: tuple[int, ...]) -> int:
        room = L - len(bits)
        total_cap = 0
        for b in heavy:
            if room <= 0:
                break
            if b not in bits:
                total_cap += units[b]
                room -= 1
        return total_cap

    found = []
    level = [(b,) for b in range(len(units))]
    k = 1
    while level:
        survivors = []
        for bits in level:
            m = 0
            for b in bits:
                m |= 1 << b
            occ = index.occ_mask(m)
            if occ == 0:
                continue
            if min_s is not None and occ * min_s.denominator < min_s.numerator * total:
                continue
            wu = sum(units[b] for b in bits)
            if wu * occ * den >= need:
                items = tuple(sorted(index.item_of[b] for b in bits))
                found.append(_make_frequent(items, interval_id, occ, wu, total, cfg.wmnspt))
            if cfg.max_k is not None and k >= cfg.max_k:
                continue
            if (wu + cap(bits)) * occ * den < need:
                continue
            survivors.append(bits)
        level = _join(survivors)
        k += 1
    found.sort(key=lambda f: f.key)
    return found


def mine_frequent(e: EncodedInterval, cfg: MiningConfig, catalog: Catalog) -> list[FrequentItemset]:
    """Frequent itemsets of one encoded interval, sorted by (size, itemset)."""
    return mine_index(RowIndex.from_encoded(e, catalog), cfg, e.interval_id)


def mine_frequent_raw(itemsets: Sequence[Sequence[int]], cfg: MiningConfig, catalog: Catalog,
                      interval_id: str = "") -> list[FrequentItemset]:
    """Same search over unencoded transactions (one row each)."""
    return mine_index(RowIndex.from_raw(itemsets, catalog), cfg, interval_id)


def brute_force_frequent(e: EncodedInterval, cfg: MiningConfig,
                         catalog: Catalog) -> list[FrequentItemset]:
    """Exhaustive check of every non-empty subset of the catalog.

    Uses the bounded-support form of the acceptance test with Fraction
    arithmetic and plain set containment, independent of :func:`mine_index`.
    """
    universe = list(catalog)
    if len(universe) > BRUTE_FORCE_LIMIT:
        raise UniverseTooLarge(f"{len(universe)} items exceeds brute-force limit {BRUTE_FORCE_LIMIT}")
    total = e.total_tx
    rows = [(frozenset(r.itemset), r.count + 1) for r in e.rows]
    out = []
    max_k = cfg.max_k or len(universe)
    for k in range(1, min(max_k, len(universe)) + 1):
        for itemset in itertools.combinations(universe, k):
            x = frozenset(itemset)
            occ = sum(n for row, n in rows if x <= row)
            if occ == 0:
                continue
            if cfg.min_s is not None and Fraction(occ, total) < cfg.min_s:
                continue
            bs = bounded_support(itemset, e, cfg, catalog)
            if occ >= bs:
                weight = catalog.weight_sum(itemset)
                out.append(FrequentItemset(itemset, e.interval_id, occ, weight, weight * occ, bs))
    out.sort(key=lambda f: f.key)
    return out


def check_against_oracle(e: EncodedInterval, cfg: MiningConfig, catalog: Catalog,
                         mined: list[FrequentItemset] | None = None) -> list[FrequentItemset]:
    """Mine ``e`` and raise :class:`OracleMismatch` if brute force disagrees."""
    mined = mine_frequent(e, cfg, catalog) if mined is None else mined
    expected = brute_force_frequent(e, cfg, catalog)
    if mined != expected:
        got = {f.itemset for f in mined}
        want = {f.itemset for f in expected}
        raise OracleMismatch(
            f"{e.interval_id}: missing {sorted(want - got)}, extra {sorted(got - want)}"
        )
    return mined
