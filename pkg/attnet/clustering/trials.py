from collections import namedtuple

import pandas as pd
from uncertainties.unumpy import nominal_values, std_devs, uarray

from .admm import build_affinity, solve
from .metrics import evaluate, METRICS
from .spectral import spectral_cluster

__all__ = ["ClusterReport", "run_trial", "summarize_trials", "trials_frame"]


class ClusterReport(
    namedtuple("ClusterReport", ["labels", "metrics", "seed", "restarts", "diagnostics"])
):
    """
    The result of clustering one problem.

    Attributes:
        labels (numpy.ndarray): Predicted labels in `[0, k)`.
        metrics (dict): The six metrics keyed by `METRICS`, or None when no
            ground truth was available.
        seed (int): The seed used for the solver and k-means.
        restarts (int): Number of k-means restarts.
        diagnostics (dict): Solver diagnostics (convergence, iterations,
            residuals at termination, timings).
    """

    @property
    def converged(self):
        return bool(self.diagnostics.get("converged", True))

    def to_dict(self):
        return {
            "seed": self.seed,
            "restarts": self.restarts,
            "labels": [int(label) for label in self.labels],
            "metrics": dict(self.metrics) if self.metrics is not None else None,
            "diagnostics": {
                k: v for k, v in self.diagnostics.items() if k not in ("timings", "affinity", "trace")
            },
        }


def run_trial(problem, config, true_labels=None, seed=0, restarts=20):
    """
    Solve `problem`, build the affinity matrix and cluster it spectrally.

    Args:
        problem (MscProblem): The multi-view problem.
        config (MscConfig): Solver settings; the seed of the S-step
            decompositions is replaced by `seed`.
        true_labels (array): Optional ground truth for the metrics.
        seed (int): Seed for the solver and k-means.
        restarts (int): k-means restarts.

    Returns:
        ClusterReport: With the residual trace, timings and affinity matrix
            in `diagnostics`.
    """
    config = config.with_options(attn=config.attn.with_options(rng_seed=seed))
    solution = solve(problem, config)
    affinity = build_affinity(solution.Z)
    labels = spectral_cluster(affinity, problem.n_clusters, seed=seed, n_init=restarts)
    last = solution.trace.iloc[-1]
    diagnostics = {
        "converged": solution.converged,
        "iterations": solution.iterations,
        "reconstruction_error": float(last["reconstruction_error"]),
        "match_error": float(last["match_error"]),
        "attn_nonconverged": solution.state.attn_nonconverged,
        "attn_reports": solution.state.attn_reports,
        "timings": solution.timings,
        "trace": solution.trace,
        "affinity": affinity,
    }
    metrics = evaluate(true_labels, labels) if true_labels is not None else None
    return ClusterReport(labels, metrics, seed, restarts, diagnostics)


def trials_frame(reports):
    """Per-trial metrics as a DataFrame indexed by trial."""
    rows = []
    for trial, report in enumerate(reports):
        row = {"trial": trial, "seed": report.seed, "converged": report.converged}
        row["iterations"] = report.diagnostics.get("iterations")
        row.update(report.metrics or {})
        rows.append(row)
    return pd.DataFrame(rows).set_index("trial")


def summarize_trials(reports):
    """
    Mean and (population) standard deviation of every metric across trials.

    Returns:
        pandas.DataFrame: Indexed by metric, with columns `mean`, `std` and
            `summary` (formatted as `mean(std)`).
    """
    metrics = pd.DataFrame([r.metrics for r in reports if r.metrics is not None], columns=list(METRICS))
    if metrics.empty:
        return pd.DataFrame(columns=["mean", "std", "summary"])
    values = uarray(metrics.mean().values, metrics.std(ddof=0).fillna(0).values)
    return pd.DataFrame(
        {
            "mean": nominal_values(values),
            "std": std_devs(values),
            "summary": [
                "{:.3f}({:.3f})".format(v.nominal_value, v.std_dev) for v in values
            ],
        },
        index=pd.Index(METRICS, name="metric"),
    )
