from attnet.utils import at_least, boolean, Config, optional, positive

__all__ = ["AttnConfig"]


def _fraction(value):
    value = float(value)
    if not 0 <= value <= 1:
        raise ValueError("must lie in [0, 1], got {}".format(value))
    return value


class AttnConfig(Config):
    """
    Settings for adaptive-topology decomposition and the ALS fits it drives.

    Options:
        r_init: Initial uniform edge rank of the fully connected network.
        tol_als: Stop ALS once the sweep-to-sweep relative change of the
            reconstruction drops below this value.
        iter_max_als: Maximum number of ALS sweeps per fit.
        epsilon: Target RSE for greedy rank increments.
        step_a: Rank added to an edge per committed increment.
        probe_sweeps: ALS sweeps used to settle each edge probe.
        prune_gap_ratio: Minimum ratio between consecutive sorted RSE
            deltas for the edges below the gap to be pruned.
        delta_floor: Floor applied to deltas before ratios are taken.
        ridge: Relative ridge added to the ALS normal equations.
        ridge_start: Relative ridge of the first sweep of a fit from random
            factors.
        ridge_switch: Annealed ridge below which such a fit switches to
            `ridge`.
        anneal_fraction: Share of the sweeps over which the ridge is
            annealed.
        n_starts: Random starts screened for a fit from random factors.
        screen_sweeps: Sweeps each start runs before the best is kept.
        prune_rounds: Maximum number of score, prune and refit rounds.
        rng_seed: Seed of every random draw.
        max_increments: Cap on the number of committed increments.
        rank_max: Optional ceiling on any edge rank.
        prune: Whether to prune redundant edges.
        increment: Whether to run greedy rank increments.
        n_jobs: Number of threads used to evaluate edge probes.
    """

    def _init_options(self, options):
        options.add_option("r_init", "initial uniform rank", default=2, parser=at_least(2))
        options.add_option("tol_als", "ALS relative change tolerance", default=1e-6, parser=positive())
        options.add_option("iter_max_als", "maximum ALS sweeps", default=300, parser=at_least(1))
        options.add_option("epsilon", "target RSE", default=1e-2, parser=positive())
        options.add_option("step_a", "rank increment step", default=1, parser=at_least(1))
        options.add_option("probe_sweeps", "ALS sweeps per probe", default=3, parser=at_least(1))
        options.add_option("prune_gap_ratio", "pruning gap ratio", default=5.0, parser=positive())
        options.add_option("delta_floor", "floor on RSE deltas", default=1e-6, parser=positive())
        options.add_option("ridge", "relative normal-equation ridge", default=1e-12, parser=positive())
        options.add_option("ridge_start", "initial annealed ridge", default=1.0, parser=positive())
        options.add_option("ridge_switch", "end of ridge annealing", default=1e-3, parser=positive())
        options.add_option("anneal_fraction", "share of annealed sweeps", default=0.75, parser=_fraction)
        options.add_option("n_starts", "random starts", default=4, parser=at_least(1))
        options.add_option("screen_sweeps", "sweeps per screened start", default=75, parser=at_least(1))
        options.add_option("rng_seed", "random seed", default=0, parser=at_least(0))
        options.add_option("max_increments", "cap on rank increments", default=20, parser=at_least(0))
        options.add_option("rank_max", "maximum edge rank", default=None, parser=optional(at_least(2)))
        options.add_option("prune", "prune redundant edges", default=True, parser=boolean)
        options.add_option("prune_rounds", "score and prune rounds", default=3, parser=at_least(1))
        options.add_option("increment", "greedy rank increment", default=True, parser=boolean)
        options.add_option("n_jobs", "probe threads", default=1, parser=at_least(1))
