"""Discrete valid-time primitives: intervals, interval relations, weighted
items, transactions and interval partitions.

Time is integer ticks. Infinite endpoints are represented by the float
sentinels :data:`NEG_INF` and :data:`POS_INF`, which compare correctly
against plain ints.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .exceptions import InputError, UnknownItem

NEG_INF = -math.inf
POS_INF = math.inf

#: Weights are stored as integers over this scale (fixed point, 4 decimals).
WEIGHT_SCALE = 10_000


def parse_endpoint(text: str | int | float) -> int | float:
    """Parse an interval endpoint: an integer tick or ``-inf`` / ``+inf``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        if isinstance(text, float) and not math.isinf(text):
            if not text.is_integer():
                raise InputError(f"non-integer time point {text!r}")
            return int(text)
        return text
    s = str(text).strip().lower()
    if s in ("-inf", "-infinity"):
        return NEG_INF
    if s in ("+inf", "inf", "infinity", "+infinity"):
        return POS_INF
    try:
        return int(s)
    except ValueError:
        raise InputError(f"bad time point {text!r}") from None


def format_endpoint(value: int | float) -> str:
    if value == NEG_INF:
        return "-inf"
    if value == POS_INF:
        return "+inf"
    return str(int(value))


@dataclass(frozen=True, order=True)
class Interval:
    """Closed interval ``[start, end]`` over integer ticks.

    ``start`` may be ``NEG_INF`` and ``end`` may be ``POS_INF``; the reverse
    (an interval starting at +inf or ending at -inf) is rejected.
    """

    start: int | float
    end: int | float

    def __post_init__(self):
        for name in ("start", "end"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TypeError(f"interval {name} must be an int tick or +/-inf, got {v!r}")
            if isinstance(v, float) and not math.isinf(v):
                raise TypeError(f"interval {name} must be an int tick or +/-inf, got {v!r}")
        if self.start == POS_INF or self.end == NEG_INF:
            raise ValueError(f"invalid interval [{self.start}, {self.end}]")
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} exceeds end {self.end}")

    @property
    def is_finite(self) -> bool:
        return not (math.isinf(self.start) or math.isinf(self.end))

    def contains(self, other: "Interval") -> bool:
        return self.start <= other.start and other.end <= self.end

    def __str__(self) -> str:
        return f"[{format_endpoint(self.start)}, {format_endpoint(self.end)}]"


def covering(intervals: Iterable[Interval]) -> Interval:
    """Smallest interval covering every interval in ``intervals``."""
    intervals = list(intervals)
    if not intervals:
        raise ValueError("covering() of no intervals")
    return Interval(min(i.start for i in intervals), max(i.end for i in intervals))


class IntervalRelation(enum.Enum):
    START_BEFORE_START = "<--"
    END_BEFORE_START = "<+-"
    START_BEFORE_END = "<-+"
    END_BEFORE_END = "<++"


def interval_relations(x: Interval, y: Interval) -> frozenset[IntervalRelation]:
    """The subset of the four strict order relations that hold from x to y."""
    out = set()
    if x.start < y.start:
        out.add(IntervalRelation.START_BEFORE_START)
    if x.end < y.start:
        out.add(IntervalRelation.END_BEFORE_START)
    if x.start < y.end:
        out.add(IntervalRelation.START_BEFORE_END)
    if x.end < y.end:
        out.add(IntervalRelation.END_BEFORE_END)
    return frozenset(out)


def weight_to_units(weight) -> int:
    """Convert a weight in (0, 1] to fixed-point units, rejecting lossy input."""
    if isinstance(weight, float):
        weight = Fraction(repr(weight))
    q = Fraction(weight)
    units = q * WEIGHT_SCALE
    if units.denominator != 1:
        raise InputError(f"weight {weight} has more than 4 decimal places")
    units = int(units)
    if not 0 < units <= WEIGHT_SCALE:
        raise InputError(f"weight {weight} outside (0, 1]")
    return units


@dataclass(frozen=True)
class Item:
    id: int
    label: str
    weight_units: int

    @property
    def weight(self) -> Fraction:
        return Fraction(self.weight_units, WEIGHT_SCALE)


class Catalog(Mapping[int, Item]):
    """Item id -> :class:`Item`, with unique ids and unique labels."""

    def __init__(self, items: Iterable[Item] = ()):
        self._by_id: dict[int, Item] = {}
        self._by_label: dict[str, Item] = {}
        for item in items:
            if item.id in self._by_id:
                raise InputError(f"duplicate item id {item.id}")
            if item.label in self._by_label:
                raise InputError(f"duplicate item label {item.label!r}")
            if not 0 < item.weight_units <= WEIGHT_SCALE:
                raise InputError(f"weight of {item.label!r} outside (0, 1]")
            self._by_id[item.id] = item
            self._by_label[item.label] = item

    @classmethod
    def from_weights(cls, weights: Mapping[str, object]) -> "Catalog":
        """Build a catalog from ``{label: weight}``; ids follow insertion order."""
        return cls(
            Item(i, label, weight_to_units(w)) for i, (label, w) in enumerate(weights.items())
        )

    def __getitem__(self, item_id: int) -> Item:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise UnknownItem(f"unknown item id {item_id}") from None

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._by_id))

    def __len__(self) -> int:
        return len(self._by_id)

    def by_label(self, label: str) -> Item:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownItem(f"unknown item label {label!r}") from None

    def weight_units(self, itemset: Iterable[int]) -> int:
        return sum(self[i].weight_units for i in itemset)

    def weight_sum(self, itemset: Iterable[int]) -> Fraction:
        return Fraction(self.weight_units(itemset), WEIGHT_SCALE)

    def labels(self, itemset: Iterable[int]) -> list[str]:
        return [self[i].label for i in itemset]

    def ids(self, labels: Iterable[str]) -> tuple[int, ...]:
        return normalize_itemset(self.by_label(lab).id for lab in labels)


def normalize_itemset(items: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(items)))
    if not out:
        raise InputError("empty itemset")
    return out


@dataclass(frozen=True)
class Transaction:
    tid: str
    itemset: tuple[int, ...]
    valid: Interval

    def __post_init__(self):
        items = tuple(self.itemset)
        if not items:
            raise InputError(f"transaction {self.tid}: empty itemset")
        if any(a >= b for a, b in zip(items, items[1:])):
            raise InputError(f"transaction {self.tid}: itemset must be sorted and duplicate-free")
        object.__setattr__(self, "itemset", items)


@dataclass(frozen=True)
class IntervalPartition:
    """Ordered, pairwise-disjoint finite intervals with ids D1, D2, ..."""

    intervals: tuple[Interval, ...]
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        intervals = tuple(self.intervals)
        ids = tuple(self.ids) or tuple(f"D{k + 1}" for k in range(len(intervals)))
        if len(ids) != len(intervals):
            raise ValueError("one id per interval required")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate interval ids")
        for iv in intervals:
            if not iv.is_finite:
                raise ValueError(f"partition interval {iv} must be finite")
        for a, b in zip(intervals, intervals[1:]):
            if not a.end < b.start:
                raise ValueError(f"partition intervals {a} and {b} overlap or are unsorted")
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def uniform(cls, origin: int, width: int, count: int) -> "IntervalPartition":
        if width < 1 or count < 0:
            raise ValueError("uniform partition needs width >= 1 and count >= 0")
        return cls(
            tuple(Interval(origin + k * width, origin + (k + 1) * width - 1) for k in range(count))
        )

    @classmethod
    def from_spec(cls, spec) -> "IntervalPartition":
        """Parse ``[[s, e], ...]`` or ``{"uniform": {origin, width, count}}``."""
        if isinstance(spec, Mapping):
            if "uniform" in spec:
                u = spec["uniform"]
                return cls.uniform(int(u["origin"]), int(u["width"]), int(u["count"]))
            if "intervals" in spec:
                return cls(
                    tuple(Interval(int(s), int(e)) for s, e in spec["intervals"]),
                    tuple(spec.get("ids", ())),
                )
            raise InputError(f"unrecognized partition spec {spec!r}")
        try:
            return cls(tuple(Interval(int(s), int(e)) for s, e in spec))
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad partition spec: {exc}") from None

    def to_spec(self) -> dict:
        return {"intervals": [[iv.start, iv.end] for iv in self.intervals], "ids": list(self.ids)}

    def __iter__(self) -> Iterator[tuple[str, Interval]]:
        return iter(zip(self.ids, self.intervals))

    def __len__(self) -> int:
        return len(self.intervals)

    def __getitem__(self, interval_id: str) -> Interval:
        return self.intervals[self.ids.index(interval_id)]

    def index(self, interval_id: str) -> int:
        return self.ids.index(interval_id)

    def adjacent(self, k: int) -> bool:
        """True when interval k+1 starts exactly one tick after interval k ends."""
        return self.intervals[k].end + 1 == self.intervals[k + 1].start


def assign_interval(t: Transaction, partition: IntervalPartition) -> str | None:
    """Id of the partition interval fully containing ``t.valid``, else None."""
    # partition is sorted and disjoint: at most one candidate can contain t.valid
    for interval_id, iv in partition:
        if iv.start > t.valid.start:
            break
        if iv.contains(t.valid):
            return interval_id
    return None


def partition_transactions(
    transactions: Iterable[Transaction], partition: IntervalPartition
) -> tuple[dict[str, list[Transaction]], list[Transaction]]:
    """Split transactions per interval id; straddlers go to the spill list."""
    groups: dict[str, list[Transaction]] = {interval_id: [] for interval_id in partition.ids}
    spill = []
    for t in transactions:
        interval_id = assign_interval(t, partition)
        if interval_id is None:
            spill.append(t)
        else:
            groups[interval_id].append(t)
    return groups, spill


def covering_partition(transactions: Sequence[Transaction]) -> IntervalPartition:
    """A single interval spanning every finite transaction endpoint."""
    points = [p for t in transactions for p in (t.valid.start, t.valid.end) if not math.isinf(p)]
    if not points:
        return IntervalPartition((Interval(0, 0),))
    return IntervalPartition((Interval(min(points), max(points)),))


# --- CSV input -------------------------------------------------------------


def read_weights_csv(path) -> Catalog:
    """Read ``label,weight`` rows into a :class:`Catalog`."""
    weights: dict[str, str] = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"label", "weight"} <= set(reader.fieldnames):
                raise InputError(f"{path}: expected header 'label,weight'")
            for row in reader:
                label = (row["label"] or "").strip()
                if not label:
                    raise InputError(f"{path}: empty label")
                if label in weights:
                    raise InputError(f"{path}: duplicate label {label!r}")
                weights[label] = (row["weight"] or "").strip()
    except OSError as exc:
        raise InputError(str(exc)) from None
    try:
        return Catalog.from_weights({k: Fraction(v) for k, v in weights.items()})
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_weights_csv(path, catalog: Catalog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "weight"])
        for item_id in catalog:
            item = catalog[item_id]
            w.writerow([item.label, format_rational(item.weight)])


def read_transactions_csv(path, catalog: Catalog) -> list[Transaction]:
    """Read ``tid,items,start,end`` rows; items are ';'-separated labels."""
    out = []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return out
            if not {"tid", "items", "start", "end"} <= set(reader.fieldnames):
                raise InputError(f"{path}: expected header 'tid,items,start,end'")
            for line, row in enumerate(reader, start=2):
                labels = [s.strip() for s in (row["items"] or "").split(";") if s.strip()]
                try:
                    out.append(
                        Transaction(
                            row["tid"],
                            catalog.ids(labels),
                            Interval(parse_endpoint(row["start"]), parse_endpoint(row["end"])),
                        )
                    )
                except (ValueError, TypeError) as exc:
                    raise InputError(f"{path}:{line}: {exc}") from None
    except OSError as exc:
        raise InputError(str(exc)) from None
    return out


def write_transactions_csv(path, transactions: Iterable[Transaction], catalog: Catalog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tid", "items", "start", "end"])
        for t in transactions:
            w.writerow(
                [
                    t.tid,
                    ";".join(catalog.labels(t.itemset)),
                    format_endpoint(t.valid.start),
                    format_endpoint(t.valid.end),
                ]
            )


def format_rational(q: Fraction, digits: int = 10) -> str:
    """Exact decimal string when q has a terminating expansion, else rounded."""
    q = Fraction(q)
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        # terminating: scale until integral
        scale = 0
        while (q * 10**scale).denominator != 1:
            scale += 1
        n = int(q * 10**scale)
        if scale == 0:
            return str(n)
        sign = "-" if n < 0 else ""
        s = str(abs(n)).rjust(scale + 1, "0")
        return f"{sign}{s[:-scale]}.{s[-scale:]}"
    return f"{float(q):.{digits}g}"
