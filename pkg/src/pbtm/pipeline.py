"""End-to-end pipeline: prepare -> encode -> mine -> rules -> classify, and
the report writers shared with the CLI."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .classifier import NBModel, Schema, featurize_rule, posterior, predict, read_training_csv, train
from .encoder import EncodedInterval, encode, footprint
from .exceptions import InputError
from .miner import FrequentItemset, MiningConfig, RowIndex, check_against_oracle, mine_index
from .rules import TemporalRule, expand_intervals, generate_rules, transitive_rules
from .temporal import (
    Catalog,
    IntervalPartition,
    Transaction,
    covering_partition,
    format_endpoint,
    format_rational,
    partition_transactions,
    read_transactions_csv,
    read_weights_csv,
)
from .validation import as_fraction

log = logging.getLogger(__name__)

FREQUENT_COLUMNS = ["interval_id", "itemset", "occ", "weight_sum", "ws", "bs"]
RULE_COLUMNS = ["antecedent", "consequent", "interval_ids", "span_start", "span_end",
                "occ_ratio_confidence", "raw_confidence", "support", "source"]


@dataclass
class PipelineConfig:
    transactions: str | None = None
    weights: str | None = None
    schema: str | None = None
    train: str | None = None
    out: str = "out"
    partition: object = None
    mining: MiningConfig = field(default_factory=MiningConfig)
    raw_confidence: bool = False
    transitive: bool = True
    oracle: bool = False
    alpha: object = 1
    format: str = "csv"
    jobs: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        m = d.get("mining", {})
        known = {k: d[k] for k in ("transactions", "weights", "schema", "train", "out",
                                   "partition", "raw_confidence", "transitive", "oracle",
                                   "alpha", "format", "jobs") if d.get(k) is not None}
        try:
            mining = MiningConfig(
                wmnspt=m.get("wmnspt", MiningConfig.wmnspt),
                min_c=m.get("min_c", MiningConfig.min_c),
                min_s=m.get("min_s"),
                max_k=m.get("max_k"),
            )
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad mining config: {exc}") from None
        if "raw_confidence" in m:
            known.setdefault("raw_confidence", m["raw_confidence"])
        cfg = cls(mining=mining, **known)
        if cfg.format not in ("csv", "json"):
            raise InputError(f"unknown format {cfg.format!r}")
        return cfg


@dataclass
class PipelineResult:
    catalog: Catalog
    partition: IntervalPartition
    encoded: list[EncodedInterval]
    spill: list[Transaction]
    frequents: dict[str, list[FrequentItemset]]
    rules_by_interval: dict[str, list[TemporalRule]]
    rules: list[TemporalRule]
    model: NBModel | None = None
    schema: Schema | None = None
    raw_footprint: int = 0

    @property
    def encoded_footprint(self) -> int:
        return sum(footprint(e) for e in self.encoded)


def load_inputs(transactions_path, weights_path) -> tuple[Catalog, list[Transaction]]:
    if not weights_path:
        raise InputError("a weights file is required")
    catalog = read_weights_csv(weights_path)
    transactions = read_transactions_csv(transactions_path, catalog) if transactions_path else []
    return catalog, transactions


def resolve_partition(spec, transactions: Sequence[Transaction]) -> IntervalPartition:
    if spec is None:
        return covering_partition(transactions)
    if isinstance(spec, IntervalPartition):
        return spec
    try:
        return IntervalPartition.from_spec(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad partition: {exc}") from None


def encode_all(transactions, partition, catalog):
    groups, spill = partition_transactions(transactions, partition)
    if spill:
        log.warning("%d transaction(s) straddle partition boundaries and are excluded",
                    len(spill))
    encoded = [encode(groups[i], i, iv, catalog) for i, iv in partition]
    raw = sum(footprint(groups[i], i, iv) for i, iv in partition)
    return encoded, spill, raw


def mine_all(encoded: Sequence[EncodedInterval], cfg: MiningConfig, catalog: Catalog,
             jobs: int = 1, oracle: bool = False):
    """Frequent itemsets per interval id, plus the row indexes built on the way."""

    def one(e):
        index = RowIndex.from_encoded(e, catalog)
        found = mine_index(index, cfg, e.interval_id)
        if oracle:
            check_against_oracle(e, cfg, catalog, found)
        return index, found

    if jobs > 1 and len(encoded) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, encoded))
    else:
        results = [one(e) for e in encoded]
    indexes = {e.interval_id: r[0] for e, r in zip(encoded, results)}
    frequents = {e.interval_id: r[1] for e, r in zip(encoded, results)}
    return frequents, indexes


def run(cfg: PipelineConfig, transactions=None, catalog=None) -> PipelineResult:
    """Run every stage in memory; nothing is written."""
    if catalog is None:
        catalog, transactions = load_inputs(cfg.transactions, cfg.weights)
    partition = resolve_partition(cfg.partition, transactions)
    encoded, spill, raw = encode_all(transactions, partition, catalog)
    frequents, indexes = mine_all(encoded, cfg.mining, catalog, cfg.jobs, cfg.oracle)
    rules_by_interval = {
        e.interval_id: generate_rules(frequents[e.interval_id], e, cfg.mining, catalog,
                                      cfg.raw_confidence, indexes[e.interval_id])
        for e in encoded
    }
    rules = expand_intervals(rules_by_interval, partition)
    if cfg.transitive:
        rules = rules + transitive_rules(rules)
    result = PipelineResult(catalog, partition, encoded, spill, frequents, rules_by_interval,
                            rules, raw_footprint=raw)
    if cfg.schema:
        result.schema = Schema.load(cfg.schema)
        if cfg.train:
            result.model = train(read_training_csv(cfg.train, result.schema), result.schema,
                                 as_fraction(cfg.alpha, "alpha"))
    return result


# --- report bodies ----------------------------------------------------------


def _labels(catalog: Catalog, itemset) -> str:
    return ";".join(catalog.labels(itemset))


def frequent_records(frequents: dict[str, list[FrequentItemset]], catalog: Catalog) -> list[dict]:
    return [
        {
            "interval_id": f.interval_id,
            "itemset": _labels(catalog, f.itemset),
            "occ": f.occ,
            "weight_sum": format_rational(f.weight_sum),
            "ws": format_rational(f.ws),
            "bs": format_rational(f.bs),
        }
        for fs in frequents.values()
        for f in fs
    ]


def rule_records(rules: Sequence[TemporalRule], catalog: Catalog) -> list[dict]:
    return [
        {
            "antecedent": _labels(catalog, r.antecedent),
            "consequent": _labels(catalog, r.consequent),
            "interval_ids": ";".join(r.interval_ids),
            "span_start": format_endpoint(r.span.start),
            "span_end": format_endpoint(r.span.end),
            "occ_ratio_confidence": format_rational(r.confidence),
            "raw_confidence": format_rational(r.raw_confidence),
            "support": format_rational(r.support),
            "source": r.source.value,
        }
        for r in rules
    ]


def classification_records(result: PipelineResult) -> list[dict]:
    if result.model is None or result.schema.rule_features is None:
        return []
    out = []
    for r in result.rules:
        x = featurize_rule(r, result.schema, result.catalog)
        post = posterior(result.model, x)
        rec = {
            "antecedent": _labels(result.catalog, r.antecedent),
            "consequent": _labels(result.catalog, r.consequent),
            "interval_ids": ";".join(r.interval_ids),
            "source": r.source.value,
            "predicted": predict(result.model, x),
        }
        rec.update({f"p_{c}": f"{p:.6f}" for c, p in post.items()})
        out.append(rec)
    return out


def summary(result: PipelineResult) -> dict:
    by_source: dict[str, int] = {}
    for r in result.rules:
        by_source[r.source.value] = by_source.get(r.source.value, 0) + 1
    after = result.encoded_footprint
    return {
        "intervals": [
            {"interval_id": e.interval_id, "span": [format_endpoint(e.interval.start),
                                                    format_endpoint(e.interval.end)],
             "rows": e.T, "total_tx": e.total_tx,
             "frequent_itemsets": len(result.frequents[e.interval_id]),
             "mined_rules": len(result.rules_by_interval[e.interval_id])}
            for e in result.encoded
        ],
        "spilled_transactions": [t.tid for t in result.spill],
        "footprint_bytes_before": result.raw_footprint,
        "footprint_bytes_after": after,
        "compression_ratio": round(after / result.raw_footprint, 6) if result.raw_footprint else 1.0,
        "rule_counts": dict(sorted(by_source.items())),
        "classified": result.model is not None,
    }


def render(records: list[dict], fmt: str, columns: Sequence[str] | None = None) -> str:
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    columns = list(columns or (records[0].keys() if records else []))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(records)
    return buf.getvalue()


def write_reports(out_dir: str, bodies: dict[str, str]) -> list[str]:
    """Write every report or none: partial files are removed on failure."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        for name, body in bodies.items():
            path = os.path.join(out_dir, name)
            with open(path, "w", newline="") as fh:
                fh.write(body)
            written.append(path)
    except OSError:
        for path in written:
            os.remove(path)
        raise
    return written


def pipeline_bodies(result: PipelineResult, fmt: str) -> dict[str, str]:
    ext = "json" if fmt == "json" else "csv"
    class_cols = ["antecedent", "consequent", "interval_ids", "source", "predicted"]
    if result.schema is not None:
        class_cols += [f"p_{c}" for c in result.schema.classes]
    spill = [{"tid": t.tid, "start": format_endpoint(t.valid.start),
              "end": format_endpoint(t.valid.end)} for t in result.spill]
    return {
        f"frequent_itemsets.{ext}": render(frequent_records(result.frequents, result.catalog),
                                           fmt, FREQUENT_COLUMNS),
        f"rules.{ext}": render(rule_records(result.rules, result.catalog), fmt, RULE_COLUMNS),
        f"classification.{ext}": render(classification_records(result), fmt, class_cols),
        f"spill.{ext}": render(spill, fmt, ["tid", "start", "end"]),
        "summary.json": json.dumps(summary(result), indent=2, sort_keys=True) + "\n",
    }


def run_pipeline(cfg: PipelineConfig) -> list[str]:
    """Run all stages, then write the reports into ``cfg.out``."""
    result = run(cfg)
    return write_reports(cfg.out, pipeline_bodies(result, cfg.format))
