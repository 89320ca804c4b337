"""``pbtm`` command line.

Every subcommand accepts ``--config <json>``; explicit flags override values
from the file. On failure a one-line JSON error record goes to stderr and
the exit status is nonzero (2 for input errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import encoder
from .bench import bench
from .classifier import Schema, posterior, predict, read_training_csv, train
from .exceptions import InputError, PBTMError
from .miner import MiningConfig
from .pipeline import (
    FREQUENT_COLUMNS,
    RULE_COLUMNS,
    PipelineConfig,
    encode_all,
    frequent_records,
    load_inputs,
    pipeline_bodies,
    render,
    resolve_partition,
    rule_records,
    run,
    write_reports,
)
from .synth import SynthConfig, generate
from .temporal import format_endpoint, format_rational
from .validation import as_fraction

log = logging.getLogger("pbtm")


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"config {path}: {exc}") from None


def _merged(args, conf: dict) -> dict:
    """Config file values overridden by any flag the user actually passed."""
    d = dict(conf)
    mining = dict(d.get("mining", {}))
    for key in ("wmnspt", "min_c", "min_s", "max_k"):
        v = getattr(args, key, None)
        if v is not None:
            mining[key] = v
    d["mining"] = mining
    for key in ("transactions", "weights", "schema", "train", "out", "format", "jobs", "alpha"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    for key in ("raw_confidence", "oracle"):
        if getattr(args, key, False):
            d[key] = True
    if getattr(args, "no_transitive", False):
        d["transitive"] = False
    if getattr(args, "partition", None):
        d["partition"] = json.loads(args.partition)
    d.setdefault("out", "out")
    d.setdefault("format", "csv")
    return d


def cmd_generate(args, conf):
    synth = conf.get("synth", conf)
    cfg = SynthConfig.from_dict(synth, seed=args.seed, n_transactions=args.n_transactions,
                                duplicate_rate=args.duplicate_rate)
    paths = generate(cfg).write(args.out or conf.get("out", "out"))
    return {"written": paths}


def cmd_encode(args, conf):
    d = _merged(args, conf)
    catalog, transactions = load_inputs(d.get("transactions"), d.get("weights"))
    partition = resolve_partition(d.get("partition"), transactions)
    encoded, spill, raw = encode_all(transactions, partition, catalog)
    bodies = {
        "encoded.json" if d["format"] == "json" else "encoded.csv": (
            encoder.dumps(encoded, catalog) if d["format"] == "json" else render(
                [{"interval_id": e.interval_id, "row_id": r.row_id,
                  "itemset": ";".join(catalog.labels(r.itemset)), "count": r.count,
                  "weighted_support": format_rational(r.weighted_support)}
                 for e in encoded for r in e.rows],
                "csv", ["interval_id", "row_id", "itemset", "count", "weighted_support"])
        ),
        "spill.csv": render([{"tid": t.tid, "start": format_endpoint(t.valid.start),
                              "end": format_endpoint(t.valid.end)} for t in spill],
                            "csv", ["tid", "start", "end"]),
    }
    paths = write_reports(d["out"], bodies)
    with open(os.path.join(d["out"], "encoded.bin"), "wb") as fh:
        for e in encoded:
            fh.write(encoder.serialize(e))
    after = sum(encoder.footprint(e) for e in encoded)
    return {"written": paths + [os.path.join(d["out"], "encoded.bin")],
            "footprint_bytes_before": raw, "footprint_bytes_after": after,
            "spilled": len(spill)}


def _mine_or_rules(args, conf, with_rules: bool):
    d = _merged(args, conf)
    d.pop("schema", None)
    cfg = PipelineConfig.from_dict(d)
    result = run(cfg)
    ext = "json" if cfg.format == "json" else "csv"
    bodies = {f"frequent_itemsets.{ext}": render(
        frequent_records(result.frequents, result.catalog), cfg.format, FREQUENT_COLUMNS)}
    if with_rules:
        bodies[f"rules.{ext}"] = render(rule_records(result.rules, result.catalog),
                                        cfg.format, RULE_COLUMNS)
    return {"written": write_reports(cfg.out, bodies), "spilled": len(result.spill)}


def cmd_mine(args, conf):
    return _mine_or_rules(args, conf, with_rules=False)


def cmd_rules(args, conf):
    return _mine_or_rules(args, conf, with_rules=True)


def cmd_classify(args, conf):
    d = _merged(args, conf)
    if not d.get("schema") or not d.get("train"):
        raise InputError("classify needs --schema and --train")
    schema = Schema.load(d["schema"])
    model = train(read_training_csv(d["train"], schema), schema,
                  as_fraction(d.get("alpha", 1), "alpha"))
    bodies = {"model.json": json.dumps(model.to_dict(), indent=2) + "\n"}
    predict_path = getattr(args, "predict", None) or d.get("predict")
    if predict_path:
        records = []
        for x in read_training_csv(predict_path, schema, labeled=False):
            rec = dict(zip(schema.names, x))
            rec["predicted"] = predict(model, x)
            rec.update({f"p_{c}": f"{p:.6f}" for c, p in posterior(model, x).items()})
            records.append(rec)
        cols = list(schema.names) + ["predicted"] + [f"p_{c}" for c in schema.classes]
        ext = "json" if d["format"] == "json" else "csv"
        bodies[f"predictions.{ext}"] = render(records, d["format"], cols)
    return {"written": write_reports(d["out"], bodies)}


def cmd_pipeline(args, conf):
    d = _merged(args, conf)
    cfg = PipelineConfig.from_dict(d)
    result = run(cfg)
    return {"written": write_reports(cfg.out, pipeline_bodies(result, cfg.format)),
            "spilled": len(result.spill)}


def cmd_bench(args, conf):
    b = dict(conf.get("bench", {}))
    sizes = args.sizes or b.get("sizes") or "1000,5000,25000"
    sizes = [int(n) for n in (sizes.split(",") if isinstance(sizes, str) else sizes)]
    seed = args.seed if args.seed is not None else int(b.get("seed", 0))
    dup = args.duplicate_rate if args.duplicate_rate is not None else b.get("duplicate_rate", "0.5")
    d = _merged(args, conf)
    m = d["mining"]
    cfg = MiningConfig(m.get("wmnspt", "0.02"), m.get("min_c", "0.5"), m.get("min_s"),
                       m.get("max_k"))
    report = bench(sizes, seed=seed, duplicate_rate=dup, cfg=cfg, repeats=args.repeats)
    rows = report.to_rows()
    ext = "json" if d["format"] == "json" else "csv"
    body = (json.dumps({"note": report.note, "records": rows}, indent=2) + "\n"
            if ext == "json" else render(rows, "csv"))
    paths = write_reports(d["out"], {f"bench.{ext}": body})
    for enc, base in report.pairs():
        log.info("n=%d encoded %.4fs baseline %.4fs footprint %d -> %d bytes",
                 enc.n_transactions, enc.wall_time, base.wall_time,
                 enc.footprint_bytes_before, enc.footprint_bytes_after)
    return {"written": paths, "note": report.note}


def _mining_flags(p):
    p.add_argument("--transactions", help="transactions CSV (tid,items,start,end)")
    p.add_argument("--weights", help="weights CSV (label,weight)")
    p.add_argument("--partition", help='JSON partition, e.g. "[[0,9],[10,19]]"')


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies must not reset values given before the subcommand
    default = argparse.SUPPRESS if suppress else None
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=default, help="JSON config file")
    common.add_argument("--format", default=default, choices=("csv", "json"))
    common.add_argument("--out", default=default, help="output directory")
    common.add_argument("--jobs", default=default, type=int,
                        help="worker threads for per-interval mining")
    common.add_argument("--seed", default=default, type=int)
    common.add_argument("-v", "--verbose", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="pbtm", parents=[_global_flags(suppress=False)],
                                     description="Priority-based temporal mining")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a synthetic dataset")
    p.add_argument("--n-transactions", type=int)
    p.add_argument("--duplicate-rate")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("encode", parents=[common], help="encode transactions per interval")
    _mining_flags(p)
    p.set_defaults(func=cmd_encode)

    for name, func in (("mine", cmd_mine), ("rules", cmd_rules), ("pipeline", cmd_pipeline)):
        p = sub.add_parser(name, parents=[common])
        _mining_flags(p)
        p.add_argument("--wmnspt")
        p.add_argument("--min-s", dest="min_s")
        p.add_argument("--max-k", dest="max_k", type=int)
        p.add_argument("--oracle", action="store_true",
                       help="cross-check against brute force, fail on mismatch")
        if name != "mine":
            p.add_argument("--min-c", dest="min_c")
            p.add_argument("--raw-confidence", action="store_true")
            p.add_argument("--no-transitive", action="store_true")
        if name == "pipeline":
            p.add_argument("--schema")
            p.add_argument("--train")
            p.add_argument("--alpha")
        p.set_defaults(func=func)

    p = sub.add_parser("classify", parents=[common], help="naive Bayes train/predict")
    p.add_argument("--schema")
    p.add_argument("--train")
    p.add_argument("--predict")
    p.add_argument("--alpha")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", parents=[common], help="encoded vs raw mining benchmark")
    p.add_argument("--sizes", help="comma-separated transaction counts")
    p.add_argument("--duplicate-rate")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--wmnspt")
    p.add_argument("--min-c", dest="min_c")
    p.set_defaults(func=cmd_bench)
    return parser


def _error_record(stage, exc, status):
    print(json.dumps({"status": status, "stage": stage, "error": type(exc).__name__,
                      "message": str(exc)}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "generate" and args.seed is None:
        parser.error("generate requires --seed")
    try:
        conf = _load_config(args.config)
        outcome = args.func(args, conf)
    except PBTMError as exc:
        _error_record(args.command, exc, exc.status)
        return 2 if exc.status == "input error" else 1
    except (ValueError, KeyError, OSError) as exc:
        _error_record(args.command, exc, "input error")
        return 2
    if args.verbose:
        print(json.dumps(outcome, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
