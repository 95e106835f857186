"""Experiment runner CLI: generate datasets, run experiments, summarize traces."""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .cash import AlgorithmGrid, ConfigSpace, cash_search
from .config import (
    ConfigError,
    auto_value,
    get_float,
    get_int,
    get_list,
    get_str,
    parse_config_file,
    section,
)
from .core import derive_seed
from .drift import DETECTOR_PARAMS, make_detector
from .evaluation import MetricTrace, evaluate_pretrained, run_holdout, run_prequential
from .generators import (
    GENERATOR_FAMILIES,
    GENERATOR_PARAMS,
    DriftStream,
    LimitedStream,
    make_generator,
)
from .learners import BATCH_ALGORITHMS, LEARNER_PARAMS, make_learner, train_batch
from .meta import MetaEnsemble
from .stream_io import (
    DatasetError,
    Topic,
    infer_schema,
    read_dataset,
    replay_csv,
    write_dataset,
    write_trace,
)

DEFAULT_ROSTER = ["hoeffding_tree", "knn_window", "perceptron", "linear_sgd"]
DEFAULT_N = 20000
DEFAULT_REPORT_EVERY = 100
EXPERIMENT_TYPES = ("batch_pretrained", "online", "cash_pretrained", "meta_online")
_CONCEPT_FAMILIES = ("agrawal", "stagger", "sea")


# ---------------------------------------------------------------------------
# sources

def _build_generator(flat: dict, seed: int):
    family = get_str(flat, "source.family", required=True,
                     choices=tuple(GENERATOR_FAMILIES))
    params = {}
    for key, default in GENERATOR_PARAMS[family].items():
        raw = flat.get(f"source.{key}")
        if raw is not None:
            params[key] = auto_value(raw)
    gen_seed = derive_seed(seed, "generator")
    base = make_generator(family, seed=gen_seed, **params)
    drift = section(flat, "source.drift")
    if drift:
        if family not in _CONCEPT_FAMILIES:
            raise ConfigError(f"source.drift.*: family {family!r} has no concept switch")
        post_params = dict(params)
        post_params["concept"] = get_int(flat, "source.drift.concept", required=True)
        position = get_int(flat, "source.drift.position", required=True)
        width = get_int(flat, "source.drift.width", default=1)
        post = make_generator(family, seed=derive_seed(seed, "generator.post"), **post_params)
        base = DriftStream(base, post, position=position, width=width,
                           seed=derive_seed(seed, "drift"))
    return base, f"generator:{family}"


def build_source(flat: dict, seed: int):
    kind = get_str(flat, "source.kind", required=True,
                   choices=("generator", "csv", "topic"))
    if kind == "generator":
        stream, label = _build_generator(flat, seed)
        n = get_int(flat, "source.n", default=DEFAULT_N)
        if n < 1:
            raise ConfigError("source.n must be >= 1")
        return LimitedStream(stream, n), label
    path = get_str(flat, "source.path", required=True)
    dataset = read_dataset(path, get_str(flat, "source.label"))
    schema = infer_schema(dataset)
    stream = replay_csv(dataset, schema)
    label = os.path.splitext(os.path.basename(path))[0]
    if kind == "topic":
        topic = Topic(name=label, schema=schema)
        topic.publish_all(stream)
        topic.close()
        return topic.subscribe(), f"topic:{label}"
    n = get_int(flat, "source.n")
    if n is not None:
        stream = LimitedStream(stream, n)
    return stream, f"csv:{label}"


def _learner_params(flat: dict, prefix: str) -> dict:
    return {k: auto_value(v) for k, v in section(flat, prefix).items()}


def _build_detectors(flat: dict):
    names = get_list(flat, "eval.detectors", default=[])
    detectors = {}
    for name in names:
        if name not in DETECTOR_PARAMS:
            raise ConfigError(f"eval.detectors: unknown detector {name!r}")
        detectors[name] = make_detector(name)
    return detectors


def _build_space(flat: dict) -> ConfigSpace:
    grids: dict[str, dict[str, list]] = {}
    order: list[str] = []
    for key, value in flat.items():
        if not key.startswith("cash.space."):
            continue
        rest = key[len("cash.space."):]
        algorithm, _, param = rest.partition(".")
        if algorithm not in grids:
            grids[algorithm] = {}
            order.append(algorithm)
        if param:
            grids[algorithm][param] = [auto_value(t.strip()) for t in value.split(",")]
    if not order:
        raise ConfigError("cash_pretrained requires at least one cash.space.<algorithm> entry")
    entries = tuple(AlgorithmGrid(a, grids[a]) for a in order)
    return ConfigSpace(entries)


# ---------------------------------------------------------------------------
# experiment dispatch

def _resolve_defaults(flat: dict) -> dict:
    resolved = dict(flat)
    resolved.setdefault("seed", "0")
    resolved.setdefault("eval.report_every", str(DEFAULT_REPORT_EVERY))
    resolved.setdefault("output.format", "csv")
    experiment = resolved.get("experiment")
    if experiment == "meta_online":
        resolved.setdefault("learner.roster", ",".join(DEFAULT_ROSTER))
        resolved.setdefault("learner.mode", "meta")
        resolved.setdefault("learner.window", "300")
    if resolved.get("source.kind") == "generator":
        resolved.setdefault("source.n", str(DEFAULT_N))
    return resolved


def _take_prefix(stream, prefix_size: int):
    prefix = []
    for _ in range(prefix_size):
        try:
            prefix.append(next(stream))
        except StopIteration:
            raise ValueError(
                f"stream exhausted while buffering the {prefix_size}-sample training prefix"
            ) from None
    return prefix


def run_experiment(flat: dict, out_dir: str = ".") -> dict:
    """Run one experiment config; returns the run summary (also written to disk)."""
    flat = _resolve_defaults(flat)
    experiment = get_str(flat, "experiment", required=True, choices=EXPERIMENT_TYPES)
    seed = get_int(flat, "seed", default=0)
    report_every = get_int(flat, "eval.report_every", default=DEFAULT_REPORT_EVERY)
    window = get_int(flat, "eval.window", default=200)
    fmt = get_str(flat, "output.format", default="csv", choices=("csv", "json"))
    out_path = get_str(flat, "output.path", required=True)
    if not os.path.isabs(out_path):
        out_path = os.path.join(out_dir, out_path)

    source, dataset_label = build_source(flat, seed)
    started = time.perf_counter()

    if experiment == "batch_pretrained":
        algorithm = get_str(flat, "learner.algorithm", required=True)
        if algorithm not in BATCH_ALGORITHMS:
            raise ConfigError(f"batch_pretrained requires a batch algorithm, got {algorithm!r}")
        prefix_size = get_int(flat, "prefix_size", required=True)
        if prefix_size < 1:
            raise ConfigError("prefix_size must be >= 1")
        learner = make_learner(algorithm, source.schema, seed=derive_seed(seed, "learner"),
                               **_learner_params(flat, "learner.params"))
        prefix = _take_prefix(source, prefix_size)
        train_batch(learner, prefix, epochs=get_int(flat, "learner.epochs", default=1))
        trace = evaluate_pretrained(source, learner, report_every=report_every, window=window)
        learner_label = algorithm

    elif experiment == "online":
        algorithm = get_str(flat, "learner.algorithm", required=True)
        if algorithm in BATCH_ALGORITHMS:
            raise ConfigError(f"online requires an incremental algorithm, got {algorithm!r}")
        learner = make_learner(algorithm, source.schema, seed=derive_seed(seed, "learner"),
                               **_learner_params(flat, "learner.params"))
        protocol = get_str(flat, "eval.protocol", default="prequential",
                           choices=("prequential", "holdout"))
        if protocol == "holdout":
            trace = run_holdout(
                source, learner,
                holdout_size=get_int(flat, "eval.holdout_size", required=True),
                period=get_int(flat, "eval.period", required=True),
            )
        else:
            trace = run_prequential(
                source, learner, report_every=report_every, window=window,
                pretrain=get_int(flat, "eval.pretrain", default=0),
                detectors=_build_detectors(flat),
            )
        learner_label = algorithm

    elif experiment == "cash_pretrained":
        prefix_size = get_int(flat, "prefix_size", required=True)
        if prefix_size < 1:
            raise ConfigError("prefix_size must be >= 1")
        space = _build_space(flat)
        prefix = _take_prefix(source, prefix_size)
        result = cash_search(
            prefix, source.schema, space,
            folds=get_int(flat, "cash.folds", default=3),
            budget=get_int(flat, "cash.budget"),
            seed=derive_seed(seed, "cash"),
            epochs=get_int(flat, "cash.epochs", default=1),
        )
        trace = evaluate_pretrained(source, result.model, report_every=report_every,
                                    window=window)
        learner_label = f"cash:{result.best_config.label()}"

    else:  # meta_online
        roster = get_list(flat, "learner.roster", default=DEFAULT_ROSTER)
        mode = get_str(flat, "learner.mode", default="meta",
                       choices=("meta", "last_best", "weighted_vote"))
        for name in roster:
            if name in BATCH_ALGORITHMS:
                raise ConfigError(f"meta_online roster must be incremental, got {name!r}")
        members = [
            make_learner(name, source.schema, seed=derive_seed(seed, f"member{i}"))
            for i, name in enumerate(roster)
        ]
        ensemble = MetaEnsemble(
            source.schema, members, mode=mode,
            window=get_int(flat, "learner.window", default=300),
            seed=derive_seed(seed, "meta"),
        )
        trace = run_prequential(source, ensemble, report_every=report_every, window=window)
        learner_label = f"{mode}:{'+'.join(roster)}"

    wall = time.perf_counter() - started
    trace.meta.update(dataset=dataset_label, learner=learner_label,
                      seed=seed, experiment=experiment)

    written: list[str] = []
    try:
        parent = os.path.dirname(out_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        write_trace(trace, out_path, fmt)
        written.append(out_path)
        summary = _summary_payload(flat, experiment, trace, wall)
        summary_path = os.path.splitext(out_path)[0] + ".summary.json"
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(summary_path)
        if experiment == "cash_pretrained":
            board_path = os.path.splitext(out_path)[0] + ".leaderboard.json"
            with open(board_path, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "best": result.best_config.label(),
                        "best_loss": result.best_loss,
                        "truncated": result.truncated,
                        "leaderboard": [
                            {"config": c.label(), "loss": loss}
                            for c, loss in result.leaderboard
                        ],
                    },
                    fh, indent=2, sort_keys=True,
                )
                fh.write("\n")
            written.append(board_path)
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    summary["trace_path"] = out_path
    return summary


def _summary_payload(flat: dict, experiment: str, trace: MetricTrace, wall: float) -> dict:
    final = trace.final
    return {
        "config": flat,
        "experiment": experiment,
        "final_cum_accuracy": final.cum_accuracy,
        "final_kappa": final.kappa,
        "mean_window_accuracy": statistics.fmean(r.window_accuracy for r in trace.records),
        "drift_count": trace.drift_count(),
        "n_records": len(trace.records),
        "wall_time_s": wall,
    }


# ---------------------------------------------------------------------------
# subcommands

def _apply_overrides(flat: dict, args) -> dict:
    flat = dict(flat)
    if args.seed is not None:
        flat["seed"] = str(args.seed)
    if args.format is not None:
        flat["output.format"] = args.format
        base = flat.get("output.path")
        if base:
            flat["output.path"] = os.path.splitext(base)[0] + "." + args.format
    return flat


def run_config_path(path: str, out_dir: str, seed, fmt) -> dict:
    flat = parse_config_file(path)
    if seed is not None:
        flat["seed"] = str(seed)
    if fmt is not None:
        flat["output.format"] = fmt
        base = flat.get("output.path")
        if base:
            flat["output.path"] = os.path.splitext(base)[0] + "." + fmt
    flat.setdefault("output.path", os.path.splitext(os.path.basename(path))[0]
                    + "." + flat.get("output.format", "csv"))
    return run_experiment(flat, out_dir=out_dir)


def cmd_run(args) -> int:
    if os.path.isdir(args.config):
        paths = sorted(
            os.path.join(args.config, name)
            for name in os.listdir(args.config)
            if name.endswith(".cfg")
        )
        if not paths:
            raise ConfigError(f"no .cfg files in {args.config}")
    else:
        paths = [args.config]
    if args.workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [
                pool.submit(run_config_path, p, args.out, args.seed, args.format)
                for p in paths
            ]
            summaries = [f.result() for f in futures]
    else:
        summaries = [run_config_path(p, args.out, args.seed, args.format) for p in paths]
    for summary in summaries:
        print(f"{summary['trace_path']}: "
              f"accuracy={summary['final_cum_accuracy']:.4f} "
              f"kappa={summary['final_kappa']:.4f} "
              f"drifts={summary['drift_count']}")
    return 0


def cmd_generate(args) -> int:
    if args.n < 1:
        raise ConfigError("n must be >= 1")
    params = {}
    for item in args.param:
        key, _, value = item.partition("=")
        if not _:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        params[key] = auto_value(value)
    if args.family in _CONCEPT_FAMILIES:
        params.setdefault("concept", args.concept)
    elif args.concept != 0:
        raise ConfigError(f"family {args.family!r} has no concept index")
    stream = make_generator(args.family, seed=derive_seed(args.seed, "generator"), **params)
    if args.drift_concept is not None:
        if args.family not in _CONCEPT_FAMILIES:
            raise ConfigError(f"family {args.family!r} has no concept switch")
        if args.drift_position is None:
            raise ConfigError("--drift-position is required with --drift-concept")
        post_params = dict(params, concept=args.drift_concept)
        post = make_generator(args.family, seed=derive_seed(args.seed, "generator.post"),
                              **post_params)
        stream = DriftStream(stream, post, position=args.drift_position,
                             width=args.drift_width, seed=derive_seed(args.seed, "drift"))
    schema = stream.schema
    write_dataset(stream.take(args.n), schema, args.out)
    print(f"wrote {args.n} rows to {args.out}")
    for feat in schema.features:
        kind = "numeric" if feat.is_numeric else f"categorical({feat.arity})"
        print(f"  {feat.name}: {kind}")
    print(f"  {schema.label_name}: label with classes {', '.join(schema.classes)}")
    return 0


def cmd_summarize(args) -> int:
    paths = []
    for target in args.paths:
        if os.path.isdir(target):
            paths.extend(sorted(
                os.path.join(target, name)
                for name in os.listdir(target)
                if name.endswith(".json") and not name.endswith(".summary.json")
                and not name.endswith(".leaderboard.json")
            ))
        else:
            paths.append(target)
    groups: dict[str, dict[str, float]] = {}
    version_seen = None
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        version = payload.get("trace_version")
        if version is None:
            continue
        if version_seen is None:
            version_seen = version
        elif version != version_seen:
            raise ValueError(f"mixed incompatible trace versions: {version_seen} vs {version}")
        meta = payload.get("meta", {})
        learner = meta.get("learner", "unknown")
        dataset = meta.get("dataset", os.path.basename(path))
        final = payload["records"][-1]["cum_accuracy"]
        groups.setdefault(learner, {})[dataset] = final
    if not groups:
        raise ValueError("no JSON traces found to summarize")

    header = ("learner", "datasets", "mean", "median", "min", "max")
    rows = []
    for learner in sorted(groups):
        values = list(groups[learner].values())
        rows.append((
            learner,
            str(len(values)),
            f"{statistics.fmean(values):.4f}",
            f"{statistics.median(values):.4f}",
            f"{min(values):.4f}",
            f"{max(values):.4f}",
        ))
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    return 0


def cmd_list(args) -> int:
    print("algorithms:")
    for name in sorted(LEARNER_PARAMS):
        tag = " [batch]" if name in BATCH_ALGORITHMS else ""
        params = ", ".join(f"{k}={v}" for k, v in LEARNER_PARAMS[name].items()) or "-"
        print(f"  {name}{tag}: {params}")
    print("generators:")
    for name in sorted(GENERATOR_PARAMS):
        params = ", ".join(f"{k}={v}" for k, v in GENERATOR_PARAMS[name].items()) or "-"
        print(f"  {name}: {params}")
    print("detectors:")
    for name in sorted(DETECTOR_PARAMS):
        params = ", ".join(f"{k}={v}" for k, v in DETECTOR_PARAMS[name].items())
        print(f"  {name}: {params}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftstream",
        description="Stream-mining experiments: drift streams, online learners, "
                    "model search and online model selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run experiment config file(s)")
    p_run.add_argument("--config", required=True, help="config file or directory of .cfg files")
    p_run.add_argument("--out", default=".", help="output directory for traces")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--format", choices=("csv", "json"), default=None)
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    p_gen.add_argument("--family", required=True, choices=sorted(GENERATOR_FAMILIES))
    p_gen.add_argument("--concept", type=int, default=0)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--drift-concept", type=int, default=None)
    p_gen.add_argument("--drift-position", type=int, default=None)
    p_gen.add_argument("--drift-width", type=int, default=1)
    p_gen.add_argument("--param", action="append", default=[],
                       help="extra family parameter as key=value (repeatable)")
    p_gen.set_defaults(func=cmd_generate)

    p_sum = sub.add_parser("summarize", help="aggregate JSON traces by learner")
    p_sum.add_argument("paths", nargs="+")
    p_sum.add_argument("--out", default=None, help="also write the table as CSV")
    p_sum.set_defaults(func=cmd_summarize)

    p_list = sub.add_parser("list", help="print registered algorithms, generators, detectors")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DatasetError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
