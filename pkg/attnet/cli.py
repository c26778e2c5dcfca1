"""
Command line interface.

    attnet decompose IMAGE --method attn,fctn,tt --ranks 3 --epsilon 0.1
    attnet cluster DATASET --lambda 0.1 --trials 10 --sweep lambda=0.01,0.1,1
    attnet metrics TRUE_LABELS PRED_LABELS

Outputs go to `--out`, else to `$ATTNET_OUTPUT_DIR`, else to
`./attnet-output`. The exit code is 0 when every run converged (or
`--allow-nonconverged` was given), 1 when a run did not converge and 2 on
errors.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import pandas as pd
import yaml

from attnet.clustering import (
    evaluate,
    MscConfig,
    run_trial,
    summarize_trials,
    trials_frame,
)
from attnet.data import load_dataset, load_image_tensor, read_labels, write_labels
from attnet.decompositions import AttnConfig, BaselineSpec, comparison_table, decompose
from attnet.errors import AttnetError
from attnet.network import save_factor_set
from attnet.reports import dumps, RunManifest, write_report
from attnet.tensor import write_tensor

__all__ = ["build_parser", "cmd_cluster", "cmd_decompose", "cmd_metrics", "main"]

OUTPUT_DIR_ENV = "ATTNET_OUTPUT_DIR"
SWEEP_PARAMETERS = ("lambda", "epsilon")

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_ERROR = 2


def _int_tuple(value):
    return tuple(int(v) for v in value.replace("x", ",").split(",") if v.strip())


def _parse_ranks(value):
    if value is None or value == "full":
        return value
    ranks = [int(v) for v in value.split(",") if v.strip()]
    return ranks[0] if len(ranks) == 1 else ranks


def _parse_sweep(value):
    name, _, values = value.partition("=")
    name = name.strip()
    if name not in SWEEP_PARAMETERS or not values:
        raise ValueError(
            "Sweeps take the form 'PARAMETER=v1,v2,...' with PARAMETER one of {}.".format(
                ", ".join(SWEEP_PARAMETERS)
            )
        )
    return name, [float(v) for v in values.split(",") if v.strip()]


def _attn_overrides(path):
    """The adaptive decomposition options that a YAML file sets explicitly."""
    with open(os.path.expanduser(path)) as f:
        given = yaml.safe_load(f) or {}
    if not isinstance(given, dict):
        raise ValueError("The configuration file {} does not hold a mapping.".format(path))
    validated = AttnConfig.from_dict(given).to_dict()
    return {name: validated[name] for name in given if name in validated}


def _output_dir(args):
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "attnet-output"
    os.makedirs(out, exist_ok=True)
    return out


def _command_echo(args):
    return [args.command] + [
        "{}={}".format(k, v) for k, v in sorted(vars(args).items()) if k not in ("func", "command")
    ]


def _exit_code(converged, args):
    if converged or args.allow_nonconverged:
        return EXIT_OK
    logging.warning("At least one run did not converge.")
    return EXIT_NONCONVERGED


# Decomposition


def cmd_decompose(args):
    """Decompose a tensor with one or more methods and emit a comparison table."""
    out = _output_dir(args)
    options = _attn_overrides(args.config) if args.config else {}
    if args.epsilon is not None:
        options["epsilon"] = args.epsilon
    if args.r_init is not None:
        options["r_init"] = args.r_init
    options["rng_seed"] = args.seed
    ranks = _parse_ranks(args.ranks)
    methods = [m.strip() for m in args.method.split(",") if m.strip()]

    manifest = RunManifest(_command_echo(args), config=options, seeds=[args.seed])
    manifest.add_input(args.input)
    with manifest.timed("load"):
        x = load_image_tensor(args.input, reshape_to=args.reshape)

    results = []
    for method in methods:
        spec = BaselineSpec(
            method,
            ranks=ranks,
            iter_max=args.iter_max,
            tol=args.tol,
            seed=args.seed,
            options=options if method == "attn" else None,
        )
        with manifest.timed(method):
            result = decompose(x, spec)
        results.append(result)

        method_dir = os.path.join(out, method)
        os.makedirs(method_dir, exist_ok=True)
        path = os.path.join(method_dir, "reconstruction.attn")
        write_tensor(path, result.reconstruction)
        manifest.add_output(path)
        if result.factors is not None:
            manifest.add_output(save_factor_set(result.factors, os.path.join(method_dir, "factors")))
        else:
            for c, component in enumerate(result.components):
                path = os.path.join(method_dir, "component_{}.attn".format(c))
                write_tensor(path, component)
                manifest.add_output(path)
        report = {
            "method": method,
            "input": {"path": args.input, "shape": list(x.shape)},
            "spec": {"ranks": ranks, "iter_max": spec.iter_max, "tol": spec.tol, "seed": spec.seed, "options": spec.options},
            "rse": result.rse,
            "storage_cost": result.storage_cost,
            "compression_ratio": x.size / result.storage_cost,
            "iterations": result.iterations,
            "converged": result.converged,
            "details": result.details,
        }
        manifest.add_output(
            write_report(os.path.join(method_dir, "report.json"), report, timings={"elapsed": result.elapsed})
        )
        print(
            "{}: RSE={:.6f} time={:.3f}s storage={} iterations={}".format(
                method, result.rse, result.elapsed, result.storage_cost, result.iterations
            )
        )

    table_path = os.path.join(out, "comparison.csv")
    comparison_table(results, input_size=x.size).to_csv(table_path, index=False)
    manifest.add_output(table_path)
    manifest.write(out)
    return _exit_code(all(r.converged for r in results), args)


# Clustering


def _cluster_config(args):
    config = MscConfig.from_yaml(args.config) if args.config else MscConfig()
    overrides = {}
    if args.lambda_ is not None:
        overrides["lambda_"] = args.lambda_
    if args.reshape is not None:
        overrides["reshape_dims"] = args.reshape
    if args.iter_max is not None:
        overrides["iter_max"] = args.iter_max
    if args.s_solver is not None:
        overrides["s_solver"] = args.s_solver
    if args.refresh_interval is not None:
        overrides["topology_refresh_interval"] = args.refresh_interval
    if overrides:
        config = config.with_options(**overrides)
    if args.epsilon is not None:
        config = config.with_options(attn=config.attn.with_options(epsilon=args.epsilon))
    return config


def _with_parameter(config, name, value):
    if name == "lambda":
        return config.with_options(lambda_=value)
    return config.with_options(attn=config.attn.with_options(epsilon=value))


def _run_trials(problem, config, labels, seeds, jobs, restarts):
    def trial(seed):
        return run_trial(problem, config, true_labels=labels, seed=seed, restarts=restarts)

    if jobs > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(trial, seeds))
    return [trial(seed) for seed in seeds]


def _write_trials(directory, dataset, config, reports, manifest):
    os.makedirs(directory, exist_ok=True)
    for t, report in enumerate(reports):
        path = os.path.join(directory, "labels_trial_{}.txt".format(t))
        write_labels(path, report.labels)
        manifest.add_output(path)
        path = os.path.join(directory, "trace_trial_{}.csv".format(t))
        report.diagnostics["trace"].to_csv(path, index=False)
        manifest.add_output(path)
        path = os.path.join(directory, "affinity_trial_{}.attn".format(t))
        write_tensor(path, report.diagnostics["affinity"])
        manifest.add_output(path)

    summary = None
    if dataset.labels is not None:
        path = os.path.join(directory, "trials.csv")
        trials_frame(reports).to_csv(path)
        manifest.add_output(path)
        table = summarize_trials(reports)
        path = os.path.join(directory, "summary.csv")
        table.to_csv(path)
        manifest.add_output(path)
        summary = {
            metric: {"mean": row["mean"], "std": row["std"], "summary": row["summary"]}
            for metric, row in table.iterrows()
        }
        print(
            "{}: {}".format(
                dataset.name, " ".join("{}={}".format(m, s["summary"]) for m, s in summary.items())
            )
        )
    report = {
        "dataset": {"name": dataset.name, "I": dataset.n_samples, "V": dataset.n_views, "k": dataset.k},
        "config": config.to_dict(),
        "trials": [r.to_dict() for r in reports],
        "summary": summary,
    }
    manifest.add_output(
        write_report(
            os.path.join(directory, "report.json"),
            report,
            timings=[r.diagnostics["timings"] for r in reports],
        )
    )
    return summary


def cmd_cluster(args):
    """Cluster a dataset over several seeded trials, optionally sweeping a parameter."""
    out = _output_dir(args)
    config = _cluster_config(args)
    seeds = [args.seed + t for t in range(args.trials)]
    manifest = RunManifest(_command_echo(args), config=config.to_dict(), seeds=seeds)
    manifest.add_input(args.dataset)

    with manifest.timed("load"):
        dataset = load_dataset(args.dataset)
        problem = dataset.to_problem(config.reshape_dims)
    if dataset.labels is None:
        logging.warning("Dataset '{}' has no labels; metrics are omitted.".format(dataset.name))

    converged = True
    if args.sweep:
        name, values = _parse_sweep(args.sweep)
        rows = []
        for value in values:
            swept = _with_parameter(config, name, value)
            with manifest.timed("{}={}".format(name, value)):
                reports = _run_trials(problem, swept, dataset.labels, seeds, args.jobs, args.restarts)
            summary = _write_trials(
                os.path.join(out, "{}_{}".format(name, value)), dataset, swept, reports, manifest
            )
            row = {name: value, "converged": all(r.converged for r in reports)}
            row.update({metric: s["mean"] for metric, s in (summary or {}).items()})
            row.update({"{}_std".format(metric): s["std"] for metric, s in (summary or {}).items()})
            rows.append(row)
            converged = converged and row["converged"]
        path = os.path.join(out, "sweep_{}.csv".format(name))
        pd.DataFrame(rows).to_csv(path, index=False)
        manifest.add_output(path)
    else:
        with manifest.timed("trials"):
            reports = _run_trials(problem, config, dataset.labels, seeds, args.jobs, args.restarts)
        _write_trials(out, dataset, config, reports, manifest)
        converged = all(r.converged for r in reports)

    manifest.write(out)
    return _exit_code(converged, args)


# Metrics


def cmd_metrics(args):
    """Compare two label files and print the six metrics as JSON."""
    metrics = evaluate(read_labels(args.true_labels), read_labels(args.pred_labels))
    document = dumps(metrics)
    print(document)
    if args.out:
        with open(args.out, "w") as f:
            f.write(document + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="attnet",
        description="Adaptive-topology tensor network decomposition and multi-view subspace clustering.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Increase logging verbosity.")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    decompose_parser = subparsers.add_parser("decompose", help="Decompose an image or raw tensor.")
    decompose_parser.add_argument("input", help="A raw tensor file or a P6 PPM image.")
    decompose_parser.add_argument("--method", default="attn", help="Comma separated methods among attn, fctn, tt, tr, tucker.")
    decompose_parser.add_argument("--ranks", default=None, help="A rank, a comma separated rank vector, or 'full' (Tucker).")
    decompose_parser.add_argument("--reshape", type=_int_tuple, default=None, help="Reshape the input, e.g. 16,16,16,16,3.")
    decompose_parser.add_argument("--epsilon", type=float, default=None, help="Target RSE of the adaptive method.")
    decompose_parser.add_argument("--r-init", type=int, default=None, help="Initial uniform rank of the adaptive method.")
    decompose_parser.add_argument("--iter-max", type=int, default=300)
    decompose_parser.add_argument("--tol", type=float, default=1e-6)
    decompose_parser.add_argument("--seed", type=int, default=0)
    decompose_parser.add_argument("--config", default=None, help="YAML file of adaptive decomposition options.")
    decompose_parser.add_argument("--out", default=None)
    decompose_parser.add_argument("--allow-nonconverged", action="store_true")
    decompose_parser.set_defaults(func=cmd_decompose)

    cluster_parser = subparsers.add_parser("cluster", help="Cluster a multi-view dataset.")
    cluster_parser.add_argument("dataset", help="A dataset directory with manifest.json.")
    cluster_parser.add_argument("--lambda", dest="lambda_", type=float, default=None)
    cluster_parser.add_argument("--epsilon", type=float, default=None)
    cluster_parser.add_argument("--reshape", type=_int_tuple, default=None, help="I1,I2,I3,I4 with I1*I2 == I3*I4 == I.")
    cluster_parser.add_argument("--iter-max", type=int, default=None)
    cluster_parser.add_argument("--s-solver", choices=["attn", "identity"], default=None)
    cluster_parser.add_argument("--refresh-interval", type=int, default=None)
    cluster_parser.add_argument("--trials", type=int, default=1)
    cluster_parser.add_argument("--jobs", type=int, default=1)
    cluster_parser.add_argument("--restarts", type=int, default=20, help="k-means restarts.")
    cluster_parser.add_argument("--seed", type=int, default=0)
    cluster_parser.add_argument("--sweep", default=None, help="e.g. lambda=0.01,0.05,0.1,1,10,50,100")
    cluster_parser.add_argument("--config", default=None, help="YAML file of solver options.")
    cluster_parser.add_argument("--out", default=None)
    cluster_parser.add_argument("--allow-nonconverged", action="store_true")
    cluster_parser.set_defaults(func=cmd_cluster)

    metrics_parser = subparsers.add_parser("metrics", help="Score predicted labels against ground truth.")
    metrics_parser.add_argument("true_labels")
    metrics_parser.add_argument("pred_labels")
    metrics_parser.add_argument("--out", default=None)
    metrics_parser.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (AttnetError, ValueError, KeyError, OSError) as e:
        print("error ({}): {}".format(getattr(e, "code", "error"), e), file=sys.stderr)
        return EXIT_ERROR
