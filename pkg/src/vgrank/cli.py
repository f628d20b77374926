"""Command-line harness: extraction, Gram matrices, training, prediction,
cross-validation and the default-predictor baseline."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .competition import Dataset, ScoringSchema, assemble_dataset, read_outcomes
from .experiment import cross_validate, format_report
from .frontend import ParseError, extract
from .graph import GraphFormatError, graph_to_dict, read_graph, write_graph
from .kernel import (
    DEFAULT_DEPTH,
    DEFAULT_ITERATIONS,
    CombinedKernel,
    GramMatrix,
    WLKernel,
    compute_gram,
    config_dict,
    kernel_configs,
)
from .ranking import RPCRanker, default_ranking, load_ensemble, mean_spearman, save_ensemble
from .synthetic import make_corpus

log = logging.getLogger("vgrank")


class UsageError(Exception):
    pass


def _weights(text, n):
    if text is None:
        return [1.0 / n] * n
    weights = []
    for part in text.split(","):
        if "/" in part:
            num, den = part.split("/", 1)
            weights.append(float(num) / float(den))
        else:
            weights.append(float(part))
    if len(weights) != n:
        raise UsageError(f"{len(weights)} weights given for {n} kernels")
    if any(w <= 0 for w in weights):
        raise UsageError("weights must be positive")
    return weights


def _kernel_setup(args):
    specs = args.edges or ["CF"]
    if args.depth < 0 or args.iters < 0:
        raise UsageError("--depth and --iters must be non-negative")
    configs = kernel_configs(specs, args.depth, args.iters)
    return configs, _weights(args.weights, len(configs))


def _load_dataset(args) -> Dataset:
    if args.manifest:
        return Dataset.load(args.manifest)
    if not (args.graphs and args.outcomes):
        raise UsageError("give --manifest or both --graphs and --outcomes")
    schema = ScoringSchema.load(args.schema) if args.schema else ScoringSchema()
    return assemble_dataset(args.graphs, read_outcomes(args.outcomes), schema, args.filter_tools)


def _dataset_gram(args, dataset, configs, weights) -> GramMatrix:
    expected = config_dict(configs, weights)
    if getattr(args, "gram", None):
        gm = GramMatrix.load(args.gram)
        if gm.config.get("fingerprint") != expected["fingerprint"]:
            raise UsageError(f"{args.gram} was computed with a different kernel configuration")
        if gm.tasks != dataset.tasks:
            raise UsageError(f"{args.gram} covers different tasks than the data set")
        return gm
    graphs = [read_graph(p) for p in dataset.graphs]
    return compute_gram(dataset.tasks, graphs, configs, weights)


def _write_json(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_extract(args):
    source = Path(args.file).read_text()
    g = extract(source)
    if args.output in (None, "-"):
        sys.stdout.write(json.dumps(graph_to_dict(g)) + "\n")
    else:
        write_graph(g, args.output)
        print(f"{args.file}: {len(g.nodes)} nodes, {len(g.edges)} edges -> {args.output}")


def cmd_gram(args):
    configs, weights = _kernel_setup(args)
    if args.manifest:
        dataset = Dataset.load(args.manifest)
        tasks, paths = dataset.tasks, dataset.graphs
    elif args.graph_files:
        paths = list(args.graph_files)
        tasks = [Path(p).stem for p in paths]
    else:
        raise UsageError("give graph files or --manifest")
    graphs = [read_graph(p) for p in paths]
    gm = compute_gram(tasks, graphs, configs, weights)
    gm.save(args.output)
    print(f"{len(tasks)}x{len(tasks)} Gram matrix, fingerprint {gm.config['fingerprint']} "
          f"-> {args.output}")


def cmd_assemble(args):
    schema = ScoringSchema.load(args.schema) if args.schema else ScoringSchema()
    dataset = assemble_dataset(args.graphs, read_outcomes(args.outcomes), schema,
                               args.filter_tools)
    dataset.save(args.output)
    print(f"{len(dataset.tasks)} tasks, tools {dataset.tools} -> {args.output}")


def cmd_train(args):
    configs, weights = _kernel_setup(args)
    dataset = Dataset.load(args.manifest)
    gm = _dataset_gram(args, dataset, configs, weights)
    ranker = RPCRanker(C=args.C, n_jobs=args.jobs).fit(gm.matrix, dataset.rankings)
    metadata = {
        "kernel": gm.config,
        "train_graphs": [str(Path(p).resolve()) for p in dataset.graphs],
        "train_tasks": dataset.tasks,
    }
    save_ensemble(ranker, args.output, dataset.tools, metadata)
    if ranker.degenerate_pairs_:
        log.warning("single-class pairs (constant models): %s", ranker.degenerate_pairs_)
    print(f"trained {len(ranker.pairs_)} pair models on {len(dataset.tasks)} tasks -> "
          f"{args.output}")


def _input_graph(path):
    if str(path).endswith(".c"):
        return extract(Path(path).read_text())
    return read_graph(path)


def cmd_predict(args):
    ranker, manifest = load_ensemble(args.model)
    kernel = manifest["kernel"]
    estimators = [WLKernel(edges=k["edges"], depth=k["depth"], iterations=k["iterations"])
                  for k in kernel["kernels"]]
    train = [read_graph(p) for p in manifest["train_graphs"]]
    combined = CombinedKernel(estimators, kernel["weights"]).fit(train)
    rows = combined.transform([_input_graph(p) for p in args.inputs])
    tools = manifest["tools"]
    M = ranker.pairwise_proba(rows)
    results = []
    for path, probs, pi in zip(args.inputs, M, ranker.predict(rows)):
        scores = probs.sum(axis=1)
        results.append({
            "input": str(path),
            "ranking": {t: int(p) for t, p in zip(tools, pi)},
            "order": [tools[i] for i in np.argsort(pi)],
            "scores": {t: float(s) for t, s in zip(tools, scores)},
            "pairwise": probs.tolist(),
        })
    if args.json:
        _write_json({"tools": tools, "predictions": results}, "-")
        return
    width = max(len(t) for t in tools)
    for r, probs in zip(results, M):
        print(f"{r['input']}: {' > '.join(r['order'])}")
        for t in r["order"]:
            print(f"  {r['ranking'][t]}. {t:<{width}}  S={r['scores'][t]:.4f}")
        print("  P[row precedes column]:")
        col = max(width, 6)
        print("  " + " " * width + "".join(f" {t:>{col}}" for t in tools))
        for i, (t, row) in enumerate(zip(tools, probs)):
            cells = ["-" if i == j else f"{v:.3f}" for j, v in enumerate(row)]
            print(f"  {t:<{width}}" + "".join(f" {c:>{col}}" for c in cells))


def cmd_cv(args):
    configs, weights = _kernel_setup(args)
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    dataset = _load_dataset(args)
    if len(dataset.tasks) < args.folds:
        raise UsageError(f"{len(dataset.tasks)} tasks cannot fill {args.folds} folds")
    gm = _dataset_gram(args, dataset, configs, weights)
    report = cross_validate(gm.matrix, dataset.rankings, C=args.C, folds=args.folds,
                            seed=args.seed, repeats=args.repeats, n_jobs=args.jobs,
                            config=gm.config, timings=args.timings)
    report["tools"] = dataset.tools
    if args.output:
        _write_json(report, args.output)
    print(format_report(report))


def cmd_baseline(args):
    dataset = _load_dataset(args)
    pi = default_ranking(dataset.rankings)
    mean = mean_spearman(dataset.rankings, np.tile(pi, (len(dataset.rankings), 1)))
    order = [dataset.tools[i] for i in np.argsort(pi)]
    if args.json:
        _write_json({"tools": dataset.tools, "ranking": pi.tolist(), "order": order,
                     "mean_spearman": mean}, "-")
        return
    print(f"default ranking: {' > '.join(order)}")
    print(f"mean training Spearman: {mean:.4f}")


def cmd_synth(args):
    manifest = make_corpus(args.output, n_programs=args.n, seed=args.seed)
    print(f"{args.n} programs -> {manifest}")


def _add_kernel_flags(p):
    p.add_argument("--edges", action="append", metavar="KINDS",
                   help="edge kinds for one kernel, e.g. CF or CD,DD; repeat to combine "
                        "(default CF)")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--weights", help="comma-separated combination weights, e.g. 1/3,1/3,1/3 "
                                     "(default uniform)")


def _add_dataset_flags(p):
    p.add_argument("--manifest", help="data set manifest from `assemble` or `synth`")
    p.add_argument("--graphs", help="directory of <task>.json graph files")
    p.add_argument("--outcomes", help="outcomes CSV")
    p.add_argument("--schema", help="scoring schema JSON (default 2/1/-8/-4/0)")
    p.add_argument("--filter-tools", action=argparse.BooleanOptionalAction, default=True,
                   help="drop tools without any correct outcome")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vgrank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="mini-C program to verification graph")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("gram", help="Gram matrix over graph files")
    p.add_argument("graph_files", nargs="*")
    p.add_argument("--manifest")
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("assemble", help="data set manifest from graphs and outcomes")
    p.add_argument("--graphs", required=True)
    p.add_argument("--outcomes", required=True)
    p.add_argument("--schema")
    p.add_argument("--filter-tools", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("train", help="train an RPC ensemble")
    p.add_argument("--manifest", required=True)
    p.add_argument("--gram", help="precomputed Gram file (must match the kernel flags)")
    _add_kernel_flags(p)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--jobs", type=int, help="pair models trained in parallel")
    p.add_argument("-o", "--output", required=True, help="model directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="rank tools for new programs or graphs")
    p.add_argument("--model", required=True)
    p.add_argument("inputs", nargs="+", help=".c programs or graph .json files")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross-validation of RPC vs the default predictor")
    _add_dataset_flags(p)
    p.add_argument("--gram")
    _add_kernel_flags(p)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--timings", action="store_true",
                   help="record wall-clock times (makes the report non-deterministic)")
    p.add_argument("--jobs", type=int, help="folds evaluated in parallel")
    p.add_argument("-o", "--output", help="report JSON")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("baseline", help="default-predictor ranking and its training score")
    _add_dataset_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("synth", help="write the synthetic two-family corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"vgrank {args.command}: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"vgrank {args.command}: parse error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, KeyError, GraphFormatError, json.JSONDecodeError) as exc:
        print(f"vgrank {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
