"""
Adaptive-topology tensor network decomposition.

Starting from a fully connected network of uniform rank, the pipeline fits
the network, scores every edge by how much the fit degrades when the edge
is collapsed to rank 1, prunes the edges that sit clearly below the rest
(rescoring the survivors until no clear gap remains), and finally grows
the remaining edges one rank at a time until the target RSE is met.
"""
import logging
import time
from collections import namedtuple, OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from attnet.network import contract_network, storage_cost, TopologyGraph
from attnet.tensor import as_array, rse

from .als import als_fit, multistart_fit
from .config import AttnConfig

__all__ = [
    "AttnResult",
    "IncrementStep",
    "GreedyResult",
    "attn_decompose",
    "greedy_rank_increment",
    "prune_redundant",
    "score_edges",
]


IncrementStep = namedtuple(
    "IncrementStep",
    ["step", "edge", "rank", "probe_rse", "probe_change", "candidates", "rse"],
)
IncrementStep.__doc__ = """
One committed rank increment.

Attributes:
    step (int): Zero-based index of the increment.
    edge (tuple): The edge `(i, j)` that was grown.
    rank (int): Its rank after the increment.
    probe_rse (float): RSE of the probe against the input.
    probe_change (float): Relative change of the probe's reconstruction with
        respect to the reconstruction before the increment.
    candidates (dict): Probe RSE of every candidate edge.
    rse (float): RSE after the full refinement that followed the commit.
"""

GreedyResult = namedtuple("GreedyResult", ["factors", "increments", "rse_trace", "converged"])


class AttnResult(
    namedtuple(
        "AttnResult",
        [
            "factors",
            "rse_trace",
            "delta_table",
            "pruned_edges",
            "prune_rounds",
            "final_rse",
            "sweeps_used",
            "base_rse",
            "increments",
            "converged",
            "elapsed",
        ],
    )
):
    """
    The outcome of `attn_decompose`.

    Attributes:
        factors (FactorSet): The final network.
        rse_trace (list): RSE after every ALS sweep of the main fits (the
            initial fit, the refit after pruning and every refinement).
        delta_table (OrderedDict): RSE increase per scored edge, from the
            last round that scored it.
        pruned_edges (frozenset): Edges collapsed to rank 1.
        prune_rounds (list): The edges pruned in each round, in order.
        final_rse (float): RSE of the final network against the input.
        sweeps_used (int): Total ALS sweeps of the main fits.
        base_rse (float): RSE of the initial fully connected fit.
        increments (list): The committed `IncrementStep`s, in order.
        converged (bool): Whether `final_rse <= epsilon` (or increments were
            disabled).
        elapsed (float): Wall time in seconds.
    """

    @property
    def storage_cost(self):
        return storage_cost(self.factors)

    @property
    def n_pruned(self):
        return len(self.pruned_edges)

    def to_dict(self):
        return {
            "rse_trace": list(self.rse_trace),
            "delta_table": [
                {"edge": list(edge), "delta": delta}
                for edge, delta in self.delta_table.items()
            ],
            "pruned_edges": sorted(list(edge) for edge in self.pruned_edges),
            "prune_rounds": [[list(edge) for edge in edges] for edges in self.prune_rounds],
            "increments": [
                {
                    "step": inc.step,
                    "edge": list(inc.edge),
                    "rank": inc.rank,
                    "probe_rse": inc.probe_rse,
                    "probe_change": inc.probe_change,
                    "rse": inc.rse,
                }
                for inc in self.increments
            ],
            "ranks": self.factors.ranks.tolist(),
            "final_rse": self.final_rse,
            "base_rse": self.base_rse,
            "sweeps_used": self.sweeps_used,
            "storage_cost": self.storage_cost,
            "converged": self.converged,
        }


def _map(func, items, n_jobs):
    if n_jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            return list(executor.map(func, items))
    return [func(item) for item in items]


def score_edges(x, f, config=None):
    """
    Score every edge of rank greater than one by the RSE increase caused by
    collapsing it.

    Each probe replaces the edge's rank mode in both factors by its mean
    slice, re-settles the network with `probe_sweeps` ALS sweeps and records
    `delta = RSE(probe) - RSE(f)`. `f` itself is left untouched.

    Returns:
        OrderedDict: `{(i, j): delta}` in lexicographic edge order.
    """
    config = config or AttnConfig()
    base = rse(contract_network(f), x)

    def probe(edge):
        fit = als_fit(x, f.collapse_edge(*edge), config, iter_max=config.probe_sweeps)
        return fit.rse_trace[-1] - base

    edges = f.topology.active_edges
    deltas = OrderedDict(zip(edges, _map(probe, edges, config.n_jobs)))
    logging.info(
        "Scored {} edges: {}".format(
            len(deltas),
            ", ".join("{}: {:.3e}".format(edge, d) for edge, d in deltas.items()),
        )
    )
    return deltas


def prune_redundant(delta_table, config=None):
    """
    Select the redundant edges of a delta table.

    Deltas are sorted ascending (ties broken by edge) and clamped below at
    `delta_floor`. If the largest ratio between consecutive values reaches
    `prune_gap_ratio`, every edge below that gap is redundant. With fewer
    than two edges nothing is pruned, and the edge with the largest delta
    is never pruned.

    Returns:
        frozenset: The edges to collapse to rank 1.
    """
    config = config or AttnConfig()
    if len(delta_table) < 2:
        return frozenset()

    ordered = sorted(delta_table.items(), key=lambda item: (item[1], item[0]))
    values = np.maximum([delta for _, delta in ordered], config.delta_floor)
    ratios = values[1:] / values[:-1]
    gap = int(np.argmax(ratios))
    if ratios[gap] < config.prune_gap_ratio:
        return frozenset()
    return frozenset(edge for edge, _ in ordered[: gap + 1])


def greedy_rank_increment(x, f, config=None, pruned_edges=()):
    """
    Grow edge ranks one step at a time until the RSE reaches `epsilon`.

    At every step each retained edge (rank greater than one, not pruned and
    below `rank_max`) is probed by adding `step_a` slices and running
    `probe_sweeps` ALS sweeps. The edge whose probe has the smallest RSE
    against `x` is committed (ties go to the lexicographically smaller
    edge) and the whole network is refined with a full ALS fit.

    Returns:
        GreedyResult: The final factors, the committed `IncrementStep`s, the
            RSE trace of the refinements and whether `epsilon` was reached.
    """
    config = config or AttnConfig()
    x = as_array(x)
    pruned_edges = set(pruned_edges)
    current_rse = rse(contract_network(f), x)
    increments = []
    trace = []

    for step in range(config.max_increments):
        if current_rse <= config.epsilon:
            break
        candidates = [
            edge
            for edge in f.topology.active_edges
            if edge not in pruned_edges
            and (
                config.rank_max is None
                or f.topology.rank(*edge) + config.step_a <= config.rank_max
            )
        ]
        if not candidates:
            logging.warning("No edge can be grown further; stopping rank increments.")
            break

        reference = contract_network(f).data

        def probe(edge):
            seed = [config.rng_seed, step, f.topology.edge_index(*edge)]
            grown = f.grow_edge(*edge, step=config.step_a, rng=seed)
            fit = als_fit(x, grown, config, iter_max=config.probe_sweeps)
            return fit.factors, fit.rse_trace[-1], rse(contract_network(fit.factors), reference)

        probes = OrderedDict(zip(candidates, _map(probe, candidates, config.n_jobs)))
        edge = min(probes, key=lambda e: (probes[e][1], e))
        probe_factors, probe_rse, probe_change = probes[edge]

        refined = als_fit(x, probe_factors, config)
        f = refined.factors
        current_rse = refined.rse_trace[-1]
        trace.extend(refined.rse_trace)
        increments.append(
            IncrementStep(
                step=step,
                edge=edge,
                rank=f.topology.rank(*edge),
                probe_rse=probe_rse,
                probe_change=probe_change,
                candidates=OrderedDict((e, p[1]) for e, p in probes.items()),
                rse=current_rse,
            )
        )
        logging.info(
            "Increment {}: grew edge {} to rank {} (probe RSE {:.3e}, change {:.3e}); RSE now {:.3e}.".format(
                step, edge, f.topology.rank(*edge), probe_rse, probe_change, current_rse
            )
        )

    converged = current_rse <= config.epsilon
    if not converged:
        logging.warning(
            "Rank increments stopped at RSE {:.3e} above the target {:.3e}.".format(
                current_rse, config.epsilon
            )
        )
    return GreedyResult(f, increments, trace, converged)


def attn_decompose(x, config=None):
    """
    Decompose `x` into a tensor network whose topology is learned from data.

    The network starts fully connected at rank `r_init` and is fit from
    seeded random factors by `multistart_fit`. Unless disabled, edges are
    then scored and the redundant ones pruned, followed by a refit; this is
    repeated on the remaining edges for up to `prune_rounds` rounds or until
    a round prunes nothing. Finally the retained edges are grown greedily
    until the RSE reaches `epsilon`. With both `prune` and `increment`
    disabled this is plain fully connected ALS.

    Args:
        x (DenseTensor, array): A tensor of order at least 3.
        config (AttnConfig): Solver settings.

    Returns:
        AttnResult
    """
    config = config or AttnConfig()
    start = time.perf_counter()
    x = as_array(x)
    if x.ndim < 3:
        raise ValueError("Adaptive decomposition needs a tensor of order at least 3.")

    topology = TopologyGraph.uniform(x.shape, config.r_init)
    fit = multistart_fit(x, topology, config, rng=config.rng_seed)
    factors = fit.factors
    trace = list(fit.rse_trace)
    base_rse = rse(contract_network(factors), x)
    logging.info(
        "Fully connected fit at rank {}: RSE {:.3e} after {} sweeps.".format(
            config.r_init, base_rse, fit.sweeps
        )
    )

    delta_table = OrderedDict()
    pruned = frozenset()
    rounds = []
    if config.prune:
        for _ in range(config.prune_rounds):
            deltas = score_edges(x, factors, config)
            delta_table.update(deltas)
            selected = prune_redundant(deltas, config)
            if not selected:
                break
            for edge in sorted(selected):
                factors = factors.collapse_edge(*edge)
            refit = als_fit(x, factors, config)
            factors = refit.factors
            trace.extend(refit.rse_trace)
            pruned = pruned | selected
            rounds.append(sorted(selected))
            logging.info(
                "Round {}: pruned {} edges {}; RSE {:.3e}.".format(
                    len(rounds), len(selected), sorted(selected), refit.rse_trace[-1]
                )
            )
        if factors.disconnected:
            logging.warning("Pruning left a disconnected network.")

    increments = []
    converged = True
    if config.increment:
        greedy = greedy_rank_increment(x, factors, config, pruned_edges=pruned)
        factors = greedy.factors
        increments = greedy.increments
        trace.extend(greedy.rse_trace)
        converged = greedy.converged

    return AttnResult(
        factors=factors,
        rse_trace=trace,
        delta_table=delta_table,
        pruned_edges=pruned,
        prune_rounds=rounds,
        final_rse=rse(contract_network(factors), x),
        sweeps_used=len(trace),
        base_rse=base_rse,
        increments=increments,
        converged=converged,
        elapsed=time.perf_counter() - start,
    )
