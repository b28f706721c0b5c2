"""Monte Carlo campaigns that pit the simulated REP behaviour against the bounds.

Trials are grouped in fixed-size blocks.  Block ``b`` of a campaign with seed
``s`` draws from ``make_rng(s, b)`` and blocks are combined in block order,
so a campaign's output depends on its seed and parameters only, never on the
number of worker processes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binom

from replab import bounds
from replab.errors import ContractError, ReplabError
from replab.generators import (
    ATTRIBUTE_UNIFORM,
    DIRECT,
    NoiseModel,
    class_alternations,
    gen_noise_pruning_set,
    gen_theorem6_sample,
    make_rng,
    minimal_consistent_threshold_tree,
    random_shape,
    realize,
    safe_node_shape,
)
from replab.oracle import optimal_pruning
from replab.pruning import iterative_prune, rep_prune, trace_assert_theorem2
from replab.structure import corollary3_holds, safe_nodes, theorem4_predicate
from replab.tree import Dataset, DecisionTree, classify_pass, dataset_to_csv, serialize

Z99 = NormalDist().inv_cdf(0.995)
MIN_PROPORTION_TRIALS = 1000


class CampaignRefused(ReplabError):
    pass


class OracleDisagreement(ReplabError):
    def __init__(self, message: str, counterexample: dict):
        super().__init__(message)
        self.counterexample = counterexample


# -- estimators ---------------------------------------------------------------------

@dataclass
class TrialCampaign:
    """Binomial-proportion estimate with a 99% normal-approximation interval."""

    name: str
    trials: int
    successes: int
    seed: int
    parameters: dict = field(default_factory=dict)
    bound: float | None = None

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def se(self) -> float:
        q = self.estimate
        return math.sqrt(q * (1 - q) / self.trials)

    @property
    def ci99(self) -> tuple[float, float]:
        half = Z99 * self.se
        return max(0.0, self.estimate - half), min(1.0, self.estimate + half)

    @property
    def dominated(self) -> bool | None:
        """True when the upper end of the 99% interval lies at or below the bound."""
        if self.bound is None:
            return None
        return self.ci99[1] <= self.bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(estimate=self.estimate, se=self.se, ci99=list(self.ci99), dominated=self.dominated)
        return d


@dataclass
class MeanEstimate:
    mean: float
    se: float
    n: int

    @classmethod
    def of(cls, values) -> MeanEstimate:
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
        return cls(float(v.mean()), se, len(v))

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_se * self.se


def _map(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# -- pruning probability ---------------------------------------------------------------

@dataclass
class PruningProbabilityReport:
    mode: str
    k: int
    n: int
    p: float
    attempts: int
    rejected: int
    positive: TrialCampaign   # every safe node has pos >= neg
    negative: TrialCampaign   # every safe node has neg >= pos
    collapse: TrialCampaign   # event-level: either of the above; full-rep: REP returned one leaf
    eq2_bound: float

    @property
    def rejection_rate(self) -> float:
        return self.rejected / self.attempts

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "k": self.k, "n": self.n, "p": self.p,
            "attempts": self.attempts, "rejected": self.rejected,
            "rejection_rate": self.rejection_rate, "eq2_bound": self.eq2_bound,
            "positive": self.positive.to_dict(), "negative": self.negative.to_dict(),
            "collapse": self.collapse.to_dict(),
        }


def _event_block(job) -> tuple[np.ndarray, np.ndarray]:
    seed, block, size, n, k, p = job
    rng = make_rng(seed, block)
    counts = rng.multinomial(n, np.full(k, 1.0 / k), size=size)
    ok = (counts > 0).all(axis=1)
    counts = counts[ok]
    pos = rng.binomial(counts, p)
    allpos = (2 * pos >= counts).all(axis=1)
    allneg = (2 * pos <= counts).all(axis=1)
    return ok, np.stack([allpos, allneg, allpos | allneg], axis=1)


def _full_rep_block(job) -> tuple[np.ndarray, np.ndarray]:
    seed, block, size, n, k, p, extra = job
    rng = make_rng(seed, block)
    rows = []
    ok = np.zeros(size, dtype=bool)
    model = NoiseModel(p, DIRECT)
    for i in range(size):
        tree = realize(safe_node_shape(k, extra, rng), rng)
        counted = classify_pass(tree, gen_noise_pruning_set(tree, model, n, rng))
        safe = safe_nodes(counted).safe
        if any(s.n_i == 0 for s in safe):
            continue
        ok[i] = True
        allpos = all(2 * s.pos_i >= s.n_i for s in safe)
        allneg = all(2 * s.pos_i <= s.n_i for s in safe)
        rows.append((allpos, allneg, rep_prune(counted).tree.root.is_leaf))
    return ok, np.array(rows, dtype=bool).reshape(-1, 3)


def pruning_probability_campaign(k: int, n: int, p: float, trials: int, seed: int,
                                 mode: str = "event-level", workers: int = 1,
                                 block_size: int | None = None, extra_internal: int | None = None,
                                 ) -> PruningProbabilityReport:
    """Estimate how often REP can collapse a tree with k safe nodes fed by n noise examples.

    Examples are sent to safe nodes uniformly at random; trials in which some
    safe node gets no example are rejected and redrawn.  ``event-level``
    mode only samples counts; ``full-rep`` builds a tree and runs REP on it.
    """
    if n < k:
        raise ContractError(f"need n >= k so that every safe node can be hit, got n={n}, k={k}")
    if not 0.5 < p <= 1:
        raise ContractError(f"need p > 0.5, got {p}")
    if trials < 1:
        raise ContractError("trials must be positive")
    if mode == "event-level":
        size = block_size or 10_000
        make_job = lambda b: (seed, b, size, n, k, p)
        fn = _event_block
    elif mode == "full-rep":
        size = block_size or 200
        extra = k if extra_internal is None else extra_internal
        make_job = lambda b: (seed, b, size, n, k, p, extra)
        fn = _full_rep_block
    else:
        raise ContractError(f"unknown mode {mode!r}")

    accepted: list[np.ndarray] = []
    attempts = got = 0
    block = 0
    while got < trials:
        rate = got / attempts if attempts else 1.0
        need = math.ceil((trials - got) / max(rate, 0.01) / size)
        results = _map(fn, [make_job(b) for b in range(block, block + need)], workers)
        block += need
        for ok, rows in results:
            if got >= trials:
                break
            take = min(len(rows), trials - got)
            # count attempts up to and including the accepted trial that is taken last
            attempts += len(ok) if take == len(rows) else int(np.flatnonzero(ok)[take - 1]) + 1
            got += take
            accepted.append(rows[:take])
        if got / attempts < 0.01:
            raise CampaignRefused(
                f"rejection rate {1 - got / attempts:.4f} exceeds 99%; n={n} is too small for k={k}")

    rows = np.concatenate(accepted)
    params = {"k": k, "n": n, "p": p, "mode": mode}
    eq2 = bounds.eq2_pruning_upper_bound(n, k, p)
    camp = lambda name, col, bound=None: TrialCampaign(name, trials, int(rows[:, col].sum()), seed, params, bound)
    return PruningProbabilityReport(
        mode, k, n, p, attempts, attempts - trials,
        positive=camp("all-safe-positive-majority", 0, eq2),
        negative=camp("all-safe-negative-majority", 1),
        collapse=camp("collapse" if mode == "event-level" else "rep-single-leaf", 2),
        eq2_bound=eq2,
    )


# -- tree size growth ---------------------------------------------------------------------

@dataclass
class SizeRow:
    t: int
    mean_leaves: float
    se: float
    predicted: float
    mean_alternations: float
    pruned_mean_leaves: float | None = None
    pruned_se: float | None = None
    pruned_mean_safe: float | None = None


@dataclass
class SizeGrowthReport:
    p: float
    reps: int
    seed: int
    rows: list[SizeRow]
    slope: float
    intercept: float
    r2: float
    alpha: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _size_job(job):
    seed, ti, t, p, reps, alpha = job
    leaves, alts, pruned_leaves, pruned_safe = [], [], [], []
    for r in range(reps):
        rng = make_rng(seed, ti, r)
        if alpha is None:
            sample = gen_theorem6_sample(t, p, rng)
            tree = minimal_consistent_threshold_tree(sample)
            leaves.append(tree.leaf_count)
            alts.append(class_alternations([e.label for e in sorted(sample, key=lambda e: e.attributes)]))
        else:
            grow_n = max(1, round(alpha * t))
            grow = gen_theorem6_sample(grow_n, p, rng)
            tree = minimal_consistent_threshold_tree(grow)
            leaves.append(tree.leaf_count)
            alts.append(class_alternations([e.label for e in sorted(grow, key=lambda e: e.attributes)]))
            if t - grow_n >= 1:
                prune_set = gen_theorem6_sample(t - grow_n, p, rng)
                counted = classify_pass(tree, prune_set)
                pruned_leaves.append(rep_prune(counted).tree.leaf_count)
                pruned_safe.append(safe_nodes(counted).k)
    return leaves, alts, pruned_leaves, pruned_safe


def size_growth_campaign(p: float, t_list: Sequence[int], reps: int, seed: int,
                         alpha: float | None = None, workers: int = 1) -> SizeGrowthReport:
    """Mean size of zero-training-error trees on noise data, against 2(t-1)p(1-p) + 1.

    With ``alpha`` set, a fraction alpha of each sample grows the tree and the
    rest prunes it with REP; pruned sizes and safe-node counts are reported
    alongside (measured only, no prediction is attached to them).
    """
    if not t_list:
        raise ContractError("t_list must not be empty")
    jobs = [(seed, i, int(t), p, reps, alpha) for i, t in enumerate(t_list)]
    rows = []
    for t, (leaves, alts, pl, ps) in zip(t_list, _map(_size_job, jobs, workers)):
        est = MeanEstimate.of(leaves)
        grow_t = t if alpha is None else max(1, round(alpha * t))
        row = SizeRow(int(t), est.mean, est.se, 2 * (grow_t - 1) * p * (1 - p) + 1, float(np.mean(alts)))
        if pl:
            pest = MeanEstimate.of(pl)
            row.pruned_mean_leaves, row.pruned_se = pest.mean, pest.se
            row.pruned_mean_safe = float(np.mean(ps))
        rows.append(row)
    x = np.array([r.t for r in rows], dtype=float)
    y = np.array([r.mean_leaves for r in rows])
    if len(rows) >= 2:
        slope, intercept = np.polyfit(x, y, 1)
        fit = slope * x + intercept
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - float(((y - fit) ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, intercept, r2 = math.nan, math.nan, math.nan
    return SizeGrowthReport(p, reps, seed, rows, float(slope), float(intercept), r2, alpha)


# -- occupancy -----------------------------------------------------------------------------------

DEFAULT_LAMBDAS = (0.5, 1, 2, 3, 5, 8, 10, 15, 20, 25, 30, 40, 50)


@dataclass
class DeviationRow:
    quantity: str
    lam: float
    campaign: TrialCampaign


@dataclass
class OccupancyReport:
    k: int
    n: int
    c: float
    trials: int
    seed: int
    empty: MeanEstimate
    empty_exact: float
    empty_approx: float
    small: MeanEstimate
    small_exact: float
    small_eq4: float
    p_count: MeanEstimate
    p_expected: float
    p_expected_normal_approx: float
    deviations: list[DeviationRow]

    @property
    def approx_gap(self) -> float:
        return self.empty_exact - self.empty_approx

    def all_dominated(self) -> bool:
        return all(row.campaign.dominated for row in self.deviations)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "deviations"}
        d["approx_gap"] = self.approx_gap
        d["deviations"] = [
            {"quantity": r.quantity, "lambda": r.lam, **r.campaign.to_dict()} for r in self.deviations
        ]
        return d


def _occupancy_block(job):
    seed, block, size, n, k, thr = job
    rng = make_rng(seed, block)
    counts = rng.multinomial(n, np.full(k, 1.0 / k), size=size)
    empty = (counts == 0).sum(axis=1)
    small = (counts <= thr).sum(axis=1)
    return empty, small


def occupancy_campaign(k: int, n: int, c: float, trials: int, seed: int,
                       lambdas: Sequence[float] = DEFAULT_LAMBDAS, workers: int = 1,
                       block_size: int = 10_000) -> OccupancyReport:
    """Throw n examples uniformly into k safe nodes, many times.

    Z (= R) counts empty nodes, Q counts nodes with at most c*n/k examples and
    P = Q - R.  Deviation frequencies are measured around the exact means.
    """
    if k < 2:
        raise ContractError("occupancy campaign needs k >= 2")
    thr = c * n / k
    jobs = [(seed, b, min(block_size, trials - b * block_size), n, k, thr)
            for b in range(math.ceil(trials / block_size))]
    parts = _map(_occupancy_block, jobs, workers)
    Z = np.concatenate([e for e, _ in parts])
    Q = np.concatenate([s for _, s in parts])
    P = Q - Z

    ez_exact, ez_approx = bounds.occupancy_expected_empty(n, k)
    eq_exact = k * float(binom.cdf(math.floor(thr + 1e-9), n, 1.0 / k))
    ep_exact = eq_exact - ez_exact
    params = {"k": k, "n": n, "c": c}

    rows = []
    for lam in lambdas:
        for name, values, mean, bound in (
            ("Q", Q, eq_exact, bounds.mcdiarmid_bound(n, lam)),
            ("Z", Z, ez_exact, bounds.occupancy_deviation_bound(k, ez_exact, lam)),
            ("P", P, ep_exact, bounds.p_deviation_bound(n, k, ez_exact, lam)),
        ):
            hits = int(np.count_nonzero(np.abs(values - mean) >= lam))
            rows.append(DeviationRow(name, float(lam),
                                     TrialCampaign(f"|{name}-E{name}|>=lambda", trials, hits, seed,
                                                   {**params, "lambda": lam}, bound)))
    return OccupancyReport(
        k, n, c, trials, seed,
        empty=MeanEstimate.of(Z), empty_exact=ez_exact, empty_approx=ez_approx,
        small=MeanEstimate.of(Q), small_exact=eq_exact, small_eq4=bounds.eq4_expected_small_nodes(n, k, c),
        p_count=MeanEstimate.of(P), p_expected=ep_exact,
        p_expected_normal_approx=bounds.eq4_expected_small_nodes(n, k, c) - k * math.exp(-n / k),
        deviations=rows,
    )


# -- the uniform-routing surface ------------------------------------------------------------------

@dataclass
class Surface:
    k: int
    n: int
    p_grid: np.ndarray
    c_grid: np.ndarray
    bound: np.ndarray      # shape (len(p_grid), len(c_grid))
    exponent: np.ndarray
    vacuous: np.ndarray
    contours: dict[float, list[np.ndarray]]

    def rows(self):
        for i, p in enumerate(self.p_grid):
            for j, c in enumerate(self.c_grid):
                yield float(p), float(c), float(self.bound[i, j]), float(self.exponent[i, j]), bool(self.vacuous[i, j])

    def to_csv(self) -> str:
        lines = ["# p,c,bound,exponent_P,vacuous_flag  (uniform-routing pruning bound, k=%d n=%d)" % (self.k, self.n),
                 "p,c,bound,exponent_P,vacuous_flag"]
        for p, c, b, e, v in self.rows():
            lines.append(f"{p!r},{c!r},{b!r},{e!r},{int(v)}")
        return "\n".join(lines) + "\n"

    def contours_csv(self) -> str:
        lines = ["# level,curve,p,c  (polylines of the bound surface)", "level,curve,p,c"]
        for level, curves in self.contours.items():
            for ci, curve in enumerate(curves):
                for p, c in curve:
                    lines.append(f"{level!r},{ci},{float(p)!r},{float(c)!r}")
        return "\n".join(lines) + "\n"

    def argmin_c(self) -> np.ndarray:
        return self.c_grid[np.argmin(self.bound, axis=1)]


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 12)


def figure3_surface(k: int = 100, n: int = 500, p_grid=None, c_grid=None,
                    levels: Sequence[float] = (0.25, 0.5)) -> Surface:
    """Evaluate the uniform-routing bound on a (p, c) grid and trace its level curves."""
    import contourpy

    p_grid = grid(0.51, 1.0, 0.01) if p_grid is None else np.asarray(p_grid, dtype=float)
    c_grid = grid(0.02, 2.0, 0.02) if c_grid is None else np.asarray(c_grid, dtype=float)
    if p_grid.min() <= 0.5 or p_grid.max() > 1 or c_grid.min() <= 0 or c_grid.max() > 2:
        raise ContractError("grids must lie within (0.5, 1] x (0, 2]")
    B = np.empty((len(p_grid), len(c_grid)))
    E = np.empty_like(B)
    V = np.zeros(B.shape, dtype=bool)
    for i, p in enumerate(p_grid):
        for j, c in enumerate(c_grid):
            B[i, j], E[i, j], V[i, j] = bounds.eq5_uniform_pruning_bound(n, k, float(p), float(c))
    gen = contourpy.contour_generator(x=c_grid, y=p_grid, z=B)
    contours = {}
    for level in levels:
        # contourpy returns (x, y) = (c, p) vertices; stored as (p, c)
        contours[float(level)] = [np.asarray(line)[:, ::-1] for line in gen.lines(level)]
    return Surface(k, n, p_grid, c_grid, B, E, V, contours)


@dataclass
class SurfaceClaims:
    plateau_max: float          # largest bound on the moderate region
    plateau: bool
    small_c_min: float          # smallest bound at the smallest c over all rows
    small_c_rise: bool
    p_rise_ratio: float         # bound at the row minimum, p=0.80 over p=0.70
    p_rise: bool
    band_argmins: dict[float, float]
    argmin_band: bool
    all_argmins: dict[float, float]

    @property
    def ok(self) -> bool:
        return self.plateau and self.small_c_rise and self.p_rise and self.argmin_band


PLATEAU_P = (0.5, 0.65)
PLATEAU_C = (0.8, 2.0)
PLATEAU_LEVEL = 1e-3
LOW_ROW_LEVEL = 0.25
TRANSITION_P = (0.70, 0.80)
ARGMIN_C = (1.0, 1.5)


def surface_claims(s: Surface) -> SurfaceClaims:
    """Check the qualitative shape of the surface.

    * plateau: the bound stays below 1e-3 for p <= 0.65 and c in [0.8, 2]
    * small c: every row whose minimum lies below the 0.25 level starts at
      1/2 or more at the smallest grid c and falls monotonically from there
      to its minimum (rows that never drop below 0.25 are saturated already)
    * steep in p: the row minimum grows by more than two decades between
      p = 0.70 and p = 0.80
    * the c minimizing the bound lies in [1.0, 1.5] for every row in the
      transition band p in [0.70, 0.80]
    """
    P, C, B = s.p_grid, s.c_grid, s.bound
    pm = (P > PLATEAU_P[0]) & (P <= PLATEAU_P[1] + 1e-12)
    cm = (C >= PLATEAU_C[0] - 1e-12) & (C <= PLATEAU_C[1] + 1e-12)
    plateau_max = float(B[np.ix_(pm, cm)].max())

    j_min = np.argmin(B, axis=1)
    low = B.min(axis=1) < LOW_ROW_LEVEL
    monotone = all(np.all(np.diff(B[i, : j_min[i] + 1]) <= 0) for i in np.flatnonzero(low))
    small_c_min = float(B[low, 0].min()) if low.any() else math.nan

    row_min = B.min(axis=1)
    lo = int(np.argmin(np.abs(P - TRANSITION_P[0])))
    hi = int(np.argmin(np.abs(P - TRANSITION_P[1])))
    ratio = float(row_min[hi] / row_min[lo])

    argmins = s.argmin_c()
    band = (P >= TRANSITION_P[0] - 1e-12) & (P <= TRANSITION_P[1] + 1e-12)
    band_argmins = {float(p): float(c) for p, c in zip(P[band], argmins[band])}
    in_band = all(ARGMIN_C[0] - 1e-12 <= c <= ARGMIN_C[1] + 1e-12 for c in band_argmins.values())
    return SurfaceClaims(
        plateau_max, plateau_max < PLATEAU_LEVEL,
        small_c_min, bool(low.any()) and small_c_min >= 0.5 and monotone,
        ratio, ratio > 100.0,
        band_argmins, bool(band.any()) and in_band,
        {float(p): float(c) for p, c in zip(P, argmins)},
    )


# -- theorem campaigns ---------------------------------------------------------------------------

def random_instance(rng: np.random.Generator, max_leaves: int = 10, max_examples: int = 50,
                    n_attributes: int = 2) -> tuple[DecisionTree, Dataset]:
    """Random tree with 1..max_leaves leaves and a random-size pruning set of varied class balance."""
    leaves = int(rng.integers(1, max_leaves + 1))
    tree = realize(random_shape(leaves - 1, rng), rng, n_attributes)
    size = int(rng.integers(0, max_examples + 1))
    p = float(rng.random())
    if size == 0:
        return tree, Dataset(n_attributes, [])
    return tree, gen_noise_pruning_set(tree, NoiseModel(p, ATTRIBUTE_UNIFORM), size, rng, n_attributes)


@dataclass
class OracleCheckReport:
    instances: int
    seed: int
    disagreements: int
    iterative_suboptimal: int
    first_witness: dict | None
    counterexample: dict | None

    def to_dict(self) -> dict:
        return asdict(self)


def _instance_doc(tree: DecisionTree, data: Dataset, **info) -> dict:
    return {"tree": json.loads(serialize(tree)), "data_csv": dataset_to_csv(data), **info}


def oracle_agreement_campaign(instances: int, size_cap: int = 10, seed: int = 0,
                              pruner: Callable = rep_prune, fail_fast: bool = True) -> OracleCheckReport:
    """Compare the pruner against exhaustive search on random small instances.

    Any mismatch in (error, node count) raises ``OracleDisagreement`` carrying
    the serialized instance.  Instances where the greedy iterative variant
    ends above the optimal error are counted and the first one is kept.
    """
    disagreements = suboptimal = 0
    witness = counterexample = None
    for i in range(instances):
        rng = make_rng(seed, i)
        tree, data = random_instance(rng, max_leaves=size_cap)
        counted = classify_pass(tree, data)
        best = optimal_pruning(counted)
        res = pruner(counted)
        if (res.error, res.tree.size) != (best.best_error, best.best_size):
            disagreements += 1
            if counterexample is None:
                counterexample = _instance_doc(
                    tree, data, instance=i, rep=[res.error, res.tree.size],
                    oracle=[best.best_error, best.best_size])
            if fail_fast:
                raise OracleDisagreement(
                    f"instance {i}: pruner gives (error, size) = ({res.error}, {res.tree.size}), "
                    f"oracle gives ({best.best_error}, {best.best_size})", counterexample)
        _, _, it_err = iterative_prune(counted)
        if it_err > best.best_error:
            suboptimal += 1
            if witness is None:
                witness = _instance_doc(tree, data, instance=i, iterative_error=it_err,
                                        optimal_error=best.best_error)
    return OracleCheckReport(instances, seed, disagreements, suboptimal, witness, counterexample)


@dataclass
class StructureCheckReport:
    instances: int
    theorem2_failures: int
    corollary3_failures: int
    first_failure: int | None = None


def structure_campaign(instances: int, seed: int, max_leaves: int = 16) -> StructureCheckReport:
    """Sweep-order trace check and the first-leaf-depth retention check over random instances."""
    t2 = c3 = 0
    first = None
    for i in range(instances):
        rng = make_rng(seed, i)
        tree, data = random_instance(rng, max_leaves=max_leaves, max_examples=60)
        counted = classify_pass(tree, data)
        res = rep_prune(counted)
        ok2 = trace_assert_theorem2(res.trace, counted)
        ok3 = corollary3_holds(counted, res.tree)
        t2 += not ok2
        c3 += not ok3
        if first is None and not (ok2 and ok3):
            first = i
    return StructureCheckReport(instances, t2, c3, first)


@dataclass
class Theorem4Report:
    instances: int
    mismatches: int
    collapses: int
    by_reason: dict[str, int]
    first_mismatch: int | None = None


def theorem4_campaign(instances: int, seed: int, ks: Sequence[int] = tuple(range(1, 9)),
                      ps: Sequence[float] = (0.55, 0.6, 0.75)) -> Theorem4Report:
    """REP collapses the tree to one leaf exactly when the safe-node predicate says so."""
    mismatches = collapses = 0
    reasons: dict[str, int] = {}
    first = None
    for i in range(instances):
        rng = make_rng(seed, i)
        k = int(rng.choice(ks))
        p = float(rng.choice(ps))
        n = int(rng.integers(1, 8 * k + 1))
        tree = realize(safe_node_shape(k, int(rng.integers(0, 2 * k + 1)), rng), rng)
        counted = classify_pass(tree, gen_noise_pruning_set(tree, NoiseModel(p, DIRECT), n, rng))
        res = rep_prune(counted)
        pred = theorem4_predicate(counted, res.tree, safe_nodes(counted))
        single = res.tree.root.is_leaf
        collapses += single
        reasons[pred.reason.value] = reasons.get(pred.reason.value, 0) + 1
        if pred.collapses != single:
            mismatches += 1
            if first is None:
                first = i
    return Theorem4Report(instances, mismatches, collapses, reasons, first)
