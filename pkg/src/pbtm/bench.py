"""Encoded vs. unencoded mining benchmark on synthetic data.

Reports direction of effect only: whether encoding shrinks the store when
duplicates exist and whether mining over it is no slower than scanning raw
transactions. Both variants run the same level-wise search and rule
generation; only the row store differs. Encoding time is reported
separately and is not part of the encoded wall time.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from .encoder import encode, footprint
from .exceptions import PBTMError
from .miner import MiningConfig, RowIndex, mine_index
from .rules import generate_rules
from .synth import SynthConfig, default_config, generate
from .temporal import partition_transactions

NOTE = ("Qualitative reproduction only: checks that encoding reduces footprint when "
        "duplicates exist and that encoded mining is not slower than the raw baseline.")


@dataclass
class BenchRecord:
    variant: str
    n_transactions: int
    wall_time: float
    per_tx_time: float
    peak_rows: int
    footprint_bytes_before: int
    footprint_bytes_after: int
    encode_time: float
    rules: int


@dataclass
class BenchReport:
    records: list[BenchRecord] = field(default_factory=list)
    note: str = NOTE

    def pairs(self):
        """(encoded, baseline) records per size."""
        by_size: dict[int, dict[str, BenchRecord]] = {}
        for r in self.records:
            by_size.setdefault(r.n_transactions, {})[r.variant] = r
        return [(v["encoded"], v["unencoded-baseline"]) for _, v in sorted(by_size.items())]

    def to_rows(self) -> list[dict]:
        return [asdict(r) for r in self.records]


def _mine_rules(store: str, groups, encoded, partition, catalog, cfg):
    out = {}
    rows = 0
    for interval_id, iv in partition:
        if store == "encoded":
            meta = encoded[interval_id]
            index = RowIndex.from_encoded(meta, catalog)
        else:
            index = RowIndex.from_raw([t.itemset for t in groups[interval_id]], catalog)
            meta = _Shim(interval_id, iv, index.total_tx)
        rows += len(index.counts)
        frequents = mine_index(index, cfg, interval_id)
        rules = generate_rules(frequents, meta, cfg, catalog, index=index)
        out[interval_id] = {(r.antecedent, r.consequent, r.confidence, r.raw_confidence,
                             r.support) for r in rules}
    return out, rows


@dataclass(frozen=True)
class _Shim:
    """Interval metadata stand-in for rule generation over a raw index."""

    interval_id: str
    interval: object
    total_tx: int


def bench(sizes, seed: int = 0, duplicate_rate=0.5, cfg: MiningConfig | None = None,
          repeats: int = 3, synth: SynthConfig | None = None) -> BenchReport:
    cfg = cfg or MiningConfig(wmnspt="0.02", min_c="0.5")
    report = BenchReport()
    for n in sizes:
        if synth is None:
            scfg = default_config(seed, n, duplicate_rate)
        else:
            scfg = SynthConfig(**{**synth.__dict__, "n_transactions": n})
        data = generate(scfg)
        groups, _ = partition_transactions(data.transactions, data.partition)
        t0 = time.perf_counter()
        encoded = {i: encode(groups[i], i, iv, data.catalog) for i, iv in data.partition}
        encode_time = time.perf_counter() - t0
        before = sum(footprint(groups[i], i, iv) for i, iv in data.partition)
        after = sum(footprint(e) for e in encoded.values())
        results = {}
        for variant, store in (("encoded", "encoded"), ("unencoded-baseline", "raw")):
            best = float("inf")
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                rules, rows = _mine_rules(store, groups, encoded, data.partition, data.catalog, cfg)
                best = min(best, time.perf_counter() - t0)
            results[variant] = rules
            report.records.append(BenchRecord(
                variant=variant,
                n_transactions=n,
                wall_time=best,
                per_tx_time=best / n if n else 0.0,
                peak_rows=rows,
                footprint_bytes_before=before,
                footprint_bytes_after=after if variant == "encoded" else before,
                encode_time=encode_time if variant == "encoded" else 0.0,
                rules=sum(len(v) for v in rules.values()),
            ))
        if results["encoded"] != results["unencoded-baseline"]:
            raise PBTMError(f"encoded and baseline rule sets differ at n={n}")
    return report
