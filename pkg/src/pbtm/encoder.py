"""Per-interval encoding: identical itemsets merge into one row with a count
field holding the number of repetitions beyond the first.
"""

from __future__ import annotations

import json
import math
import struct
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exceptions import InputError
from .temporal import (
    WEIGHT_SCALE,
    Catalog,
    Interval,
    Transaction,
    format_endpoint,
    format_rational,
    parse_endpoint,
)

#: width in bytes of the per-row count field in the binary layout
COUNT_FIELD_BYTES = 4

_I64_MIN = -(2**63)
_I64_MAX = 2**63 - 1


@dataclass(frozen=True)
class EncodedRow:
    row_id: int
    itemset: tuple[int, ...]
    count: int
    weight_units: int

    @property
    def occurrences(self) -> int:
        return self.count + 1

    @property
    def weight_sum(self) -> Fraction:
        return Fraction(self.weight_units, WEIGHT_SCALE)

    @property
    def weighted_support(self) -> Fraction:
        return Fraction(self.weight_units * (self.count + 1), WEIGHT_SCALE)


@dataclass(frozen=True)
class EncodedInterval:
    interval_id: str
    interval: Interval
    rows: tuple[EncodedRow, ...]

    @property
    def T(self) -> int:
        return len(self.rows)

    @property
    def total_tx(self) -> int:
        return sum(r.count for r in self.rows) + len(self.rows)

    @property
    def item_ids(self) -> tuple[int, ...]:
        return tuple(sorted({i for r in self.rows for i in r.itemset}))

    @property
    def max_row_length(self) -> int:
        return max((len(r.itemset) for r in self.rows), default=0)


def encode(
    transactions: Iterable[Transaction | Sequence[int]],
    interval_id: str,
    interval: Interval,
    catalog: Catalog,
) -> EncodedInterval:
    """Merge identical itemsets of one interval into counted rows.

    ``transactions`` may hold :class:`Transaction` objects (their valid time
    must lie inside ``interval``) or bare itemsets. Rows are sorted by itemset.
    """
    counts: Counter[tuple[int, ...]] = Counter()
    for t in transactions:
        if isinstance(t, Transaction):
            if not interval.contains(t.valid):
                raise InputError(
                    f"transaction {t.tid} valid time {t.valid} outside {interval_id} {interval}"
                )
            counts[t.itemset] += 1
        else:
            counts[tuple(t)] += 1
    rows = tuple(
        EncodedRow(row_id, itemset, n - 1, catalog.weight_units(itemset))
        for row_id, (itemset, n) in enumerate(sorted(counts.items()))
    )
    return EncodedInterval(interval_id, interval, rows)


def decode(e: EncodedInterval) -> list[tuple[int, ...]]:
    """Expand each row count+1 times."""
    return [r.itemset for r in e.rows for _ in range(r.count + 1)]


# --- canonical binary layout ----------------------------------------------


def _endpoint_i64(value) -> int:
    if value == -math.inf:
        return _I64_MIN
    if value == math.inf:
        return _I64_MAX
    return int(value)


def _header(interval_id: str, interval: Interval, n_rows: int) -> bytes:
    ident = interval_id.encode("utf-8")
    return (
        struct.pack("<H", len(ident))
        + ident
        + struct.pack(
            "<qqI", _endpoint_i64(interval.start), _endpoint_i64(interval.end), n_rows
        )
    )


def _itemset_bytes(itemset: Sequence[int]) -> bytes:
    return struct.pack(f"<H{len(itemset)}I", len(itemset), *itemset)


def serialize(e: EncodedInterval) -> bytes:
    """Header, then per row: itemset length (u16), ids (u32 each), count (u32)."""
    parts = [_header(e.interval_id, e.interval, e.T)]
    for r in e.rows:
        parts.append(_itemset_bytes(r.itemset))
        parts.append(struct.pack("<I", r.count))
    return b"".join(parts)


def serialize_raw(
    itemsets: Sequence[Sequence[int]], interval_id: str = "", interval: Interval | None = None
) -> bytes:
    """Unencoded counterpart of :func:`serialize`: one record per transaction, no count."""
    interval = interval or Interval(0, 0)
    parts = [_header(interval_id, interval, len(itemsets))]
    parts.extend(_itemset_bytes(s) for s in itemsets)
    return b"".join(parts)


def deserialize(data: bytes, catalog: Catalog) -> EncodedInterval:
    (n,) = struct.unpack_from("<H", data, 0)
    off = 2
    interval_id = data[off : off + n].decode("utf-8")
    off += n
    start, end, n_rows = struct.unpack_from("<qqI", data, off)
    off += 20
    start = -math.inf if start == _I64_MIN else start
    end = math.inf if end == _I64_MAX else end
    rows = []
    for row_id in range(n_rows):
        (k,) = struct.unpack_from("<H", data, off)
        off += 2
        itemset = struct.unpack_from(f"<{k}I", data, off)
        off += 4 * k
        (count,) = struct.unpack_from("<I", data, off)
        off += 4
        rows.append(EncodedRow(row_id, tuple(itemset), count, catalog.weight_units(itemset)))
    return EncodedInterval(interval_id, Interval(start, end), tuple(rows))


def footprint(data, interval_id: str = "", interval: Interval | None = None) -> int:
    """Size in bytes of the canonical binary form.

    Accepts an :class:`EncodedInterval`, or raw data as a sequence of
    itemsets / transactions (serialized with :func:`serialize_raw` under the
    given header fields, so raw and encoded forms of one interval compare
    like for like).
    """
    if isinstance(data, EncodedInterval):
        return len(serialize(data))
    itemsets = [t.itemset if isinstance(t, Transaction) else tuple(t) for t in data]
    return len(serialize_raw(itemsets, interval_id, interval))


# --- JSON mirror ------------------------------------------------------------


def to_json_dict(e: EncodedInterval, catalog: Catalog | None = None) -> dict:
    rows = []
    for r in e.rows:
        row = {
            "row_id": r.row_id,
            "itemset": list(r.itemset),
            "count": r.count,
            "weighted_support": format_rational(r.weighted_support),
        }
        if catalog is not None:
            row["labels"] = catalog.labels(r.itemset)
        rows.append(row)
    return {
        "interval_id": e.interval_id,
        "interval": [format_endpoint(e.interval.start), format_endpoint(e.interval.end)],
        "T": e.T,
        "total_tx": e.total_tx,
        "rows": rows,
    }


def from_json_dict(d: dict, catalog: Catalog) -> EncodedInterval:
    start, end = (parse_endpoint(v) for v in d["interval"])
    rows = tuple(
        EncodedRow(int(r["row_id"]), tuple(r["itemset"]), int(r["count"]),
                   catalog.weight_units(r["itemset"]))
        for r in d["rows"]
    )
    return EncodedInterval(d["interval_id"], Interval(start, end), rows)


def dumps(encoded: Sequence[EncodedInterval], catalog: Catalog | None = None) -> str:
    return json.dumps([to_json_dict(e, catalog) for e in encoded], indent=2) + "\n"
