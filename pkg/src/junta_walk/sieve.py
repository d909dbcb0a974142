"""Bounded-level search for heavy Fourier sets from walk access alone.

Contract: given level ell, threshold theta and confidence delta, return a
family of sets of size <= ell such that, with probability >= 1 - delta,

  * every S with |S| <= ell and fhat(S)^2 >= theta is returned,
  * no S with fhat(S)^2 < theta/2 is returned, and
  * at most ceil(2/theta) sets are returned.

The implementation is a two-phase design.  Phase one screens single
coordinates: refresh pairs harvested at density p give, for each i, the
contrast J_i = E[l_x l_y | i kept] - E[l_x l_y | i refreshed], whose exact
value is sum_{T owns i} fhat(T)^2 (1-p)^(|T|-1) because the harvester
refreshes coordinates independently.  Any member i of a qualifying
set S therefore has J_i >= theta (1-p)^(ell-1), so pooling the coordinates
whose estimated contrast clears half that signal keeps every relevant
coordinate while Parseval caps the pool size near 2/(p tau).  Phase two
enumerates all subsets of the pool up to size ell and keeps those whose
estimated squared coefficient clears (3/4) theta.

Cost: the enumeration visits sum_{j<=ell} C(|pool|, j) candidates, and the
pool can hold up to ~4 (1-p)^(1-ell) / (p theta) coordinates, so the phase-two
work scales like (2 ell / theta)^ell in the worst case -- fine for the small
ell this package targets, but exponential in the level by design.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .fourier import (
    BULK_WHT_MAX_N,
    EstimatorParams,
    Spectrum,
    blocks_for,
    default_lag,
    estimate_bounded_influence,
    estimate_sq_coeff,
    estimate_sq_coeff_bulk,
)
from .hypercube import IndexSet, popcount_u64
from .walk import RandomWalkOracle, effective_refresh_density, gap_for_density

logger = logging.getLogger(__name__)

KEEP_FRACTION = 0.75  # accept candidates whose estimate clears (3/4) theta
DEFAULT_BUDGET_CEILING = 100_000_000  # certified mode refuses beyond this many steps

_warned_budgets: set[tuple] = set()


class SieveError(Exception):
    """Base class for sieve failures."""


class PoolOverflow(SieveError):
    """The screened coordinate pool exceeded its certified size cap."""


class BudgetInfeasible(SieveError):
    """Certified budgets would exceed the configured step ceiling."""


@dataclass(frozen=True)
class SieveBudgets:
    """Concrete sample sizes for the two phases."""

    screen_pairs: int
    estimate_blocks: int
    lag: int
    gap_steps: int
    mode: str  # "certified" | "practical"

    def __post_init__(self) -> None:
        if min(self.screen_pairs, self.estimate_blocks, self.lag, self.gap_steps) < 1:
            raise ValueError("all budget fields must be >= 1")


@dataclass(frozen=True)
class SieveParams:
    """Search level, squared-coefficient threshold, and failure probability.

    ``strategy`` selects coordinate screening ("pooled") or a direct scan of
    all sets up to the level ("exhaustive", a desk-scale cross-check).
    ``budgets`` may carry pre-built phase budgets; when absent, certified ones
    are derived at run time.
    """

    level: int
    theta: float
    delta: float
    refresh_density: float | None = None
    strategy: str = "pooled"
    budgets: SieveBudgets | None = None

    def __post_init__(self) -> None:
        if self.level < 1:
            raise ValueError(f"level={self.level} must be >= 1")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta={self.theta} outside (0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta={self.delta} outside (0, 1)")
        if self.refresh_density is not None and not 0.0 < self.refresh_density < 1.0:
            raise ValueError(f"refresh_density={self.refresh_density} outside (0, 1)")
        if self.strategy not in ("pooled", "exhaustive"):
            raise ValueError(f"strategy={self.strategy!r} not pooled/exhaustive")

    @property
    def density(self) -> float:
        """Refresh density for screening; 1/level clamped into (0, 1/2]."""
        if self.refresh_density is not None:
            return self.refresh_density
        return min(1.0 / self.level, 0.5)

    @property
    def result_cap(self) -> int:
        return math.ceil(2.0 / self.theta)


def _screen_signal(params: SieveParams, p_eff: float) -> float:
    """Guaranteed contrast of a member coordinate of a qualifying set."""
    return params.theta * (1.0 - p_eff) ** (params.level - 1)


def _candidate_bound(pool_size: int, level: int) -> int:
    return sum(math.comb(pool_size, j) for j in range(min(level, pool_size) + 1))


def certified_budgets(
    params: SieveParams, n: int, budget_ceiling: int = DEFAULT_BUDGET_CEILING
) -> SieveBudgets:
    """Budgets under which the contract holds by Hoeffding + union bounds.

    The failure probability splits three ways: coordinate screening, pool-size
    control, and candidate estimation.  Screening needs each contrast within
    tau/2 where tau = theta (1-p)^(ell-1) / 2, which costs on the order of
    (1 / (q tau^2)) ln(n/delta) pairs with q = min(p, 1-p).  These sizes grow
    like (2/theta)^(2 ell), so certified mode is only feasible for tiny levels;
    anything larger should supply practical budgets explicitly.
    """
    gap = gap_for_density(n, params.density)
    p_eff = effective_refresh_density(n, gap)
    tau = _screen_signal(params, p_eff) / 2.0
    q = min(p_eff, 1.0 - p_eff)
    if q <= 0.0:
        screen_pairs = 1  # screening is skipped entirely for such n
    else:
        screen_pairs = math.ceil(
            (64.0 / (q * tau * tau)) * max(math.log(12.0 * n / params.delta), 1.0)
        )
    pool_cap = _pool_cap(params, p_eff)
    cand_bound = _candidate_bound(min(n, pool_cap), params.level)
    delta_set = params.delta / (3.0 * cand_bound)
    lag = default_lag(n, params.theta)
    est = EstimatorParams(lag=lag, pair_count=blocks_for(params.theta / 8.0, delta_set))
    total = screen_pairs * gap + est.required_walk_length
    if total > budget_ceiling:
        raise BudgetInfeasible(
            f"certified budgets need ~{total:.3g} walk steps "
            f"(screen {screen_pairs} pairs x gap {gap}, estimate walk "
            f"{est.required_walk_length}); ceiling is {budget_ceiling}"
        )
    return SieveBudgets(
        screen_pairs=screen_pairs,
        estimate_blocks=est.pair_count,
        lag=lag,
        gap_steps=gap,
        mode="certified",
    )


def practical_budgets(
    params: SieveParams,
    n: int,
    screen_pairs: int,
    estimate_blocks: int,
    lag: int | None = None,
) -> SieveBudgets:
    """User-chosen budgets; the contract becomes heuristic and a warning is logged."""
    gap = gap_for_density(n, params.density)
    key = (screen_pairs, estimate_blocks, params.theta, params.delta)
    if key not in _warned_budgets:
        _warned_budgets.add(key)
        logger.warning(
            "practical sieve budgets (screen_pairs=%d, estimate_blocks=%d); the "
            "(theta=%g, delta=%g) contract is not certified at these sizes",
            screen_pairs,
            estimate_blocks,
            params.theta,
            params.delta,
        )
    return SieveBudgets(
        screen_pairs=screen_pairs,
        estimate_blocks=estimate_blocks,
        lag=lag if lag is not None else default_lag(n, params.theta),
        gap_steps=gap,
        mode="practical",
    )


def _pool_cap(params: SieveParams, p_eff: float) -> int:
    """Pool size implied by Parseval when every pooled contrast is genuine.

    Sum_i J_i <= max_t t (1-p)^(t-1) <= 1/(e p), and each pooled coordinate
    certifies contrast >= theta (1-p)^(ell-1) / 2 >= theta / (2e) at the
    default density, bounding the pool by 2/(p theta); the cap doubles that
    for estimation slack.
    """
    del p_eff
    return math.ceil(4.0 / (params.density * params.theta))


@dataclass(frozen=True)
class SieveResult:
    """Returned sets with their estimates, plus phase diagnostics."""

    n: int
    sets: tuple[IndexSet, ...]
    estimates: tuple[float, ...]
    pool: IndexSet
    influences: tuple[float, ...]
    candidates: int
    truncated: bool
    walk_steps: int
    budgets: SieveBudgets

    def masks(self) -> list[int]:
        return [s.mask for s in self.sets]

    @property
    def diagnostics(self) -> dict:
        """Per-phase sample counts and thresholds, for logs and reports."""
        return {
            "pool_size": len(self.pool),
            "candidates": self.candidates,
            "kept": len(self.sets),
            "truncated": self.truncated,
            "walk_steps": self.walk_steps,
            "screen_pairs": self.budgets.screen_pairs,
            "estimate_blocks": self.budgets.estimate_blocks,
            "lag": self.budgets.lag,
            "gap_steps": self.budgets.gap_steps,
            "mode": self.budgets.mode,
        }

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "sets": [sorted(s.coords()) for s in self.sets],
                "estimates": list(self.estimates),
                "pool": sorted(self.pool.coords()),
                "influences": list(self.influences),
                "candidates": self.candidates,
                "truncated": self.truncated,
                "walk_steps": self.walk_steps,
                "mode": self.budgets.mode,
            }
        )


def bounded_sieve(
    oracle: RandomWalkOracle,
    params: SieveParams,
    budgets: SieveBudgets | None = None,
) -> SieveResult:
    """Run the two-phase search against a walk oracle.

    Budgets resolve from the explicit argument, then ``params.budgets``, then
    the certified formulas (which may raise :class:`BudgetInfeasible`).
    Raises :class:`PoolOverflow` when the screened pool exceeds its certified
    cap, which signals that the screening estimates missed their tolerance.
    """
    n = oracle.n
    if budgets is None:
        budgets = params.budgets
    if budgets is None:
        budgets = certified_budgets(params, n)
    p_eff = effective_refresh_density(n, budgets.gap_steps)
    tau = _screen_signal(params, p_eff) / 2.0

    influences: list[float] = []
    if params.strategy == "exhaustive" or n <= max(params.level, 2):
        pool_coords = list(range(1, n + 1))
        influences = [math.inf] * n
    else:
        pairs = oracle.refresh_pairs(budgets.screen_pairs, budgets.gap_steps)
        for i in range(1, n + 1):
            try:
                influences.append(estimate_bounded_influence(pairs, i))
            except ValueError:
                # no contrast sample for i; keep it rather than risk dropping
                influences.append(math.inf)
        pool_coords = [i for i in range(1, n + 1) if influences[i - 1] >= tau]
        cap = _pool_cap(params, p_eff)
        if len(pool_coords) > cap:
            raise PoolOverflow(
                f"screened pool has {len(pool_coords)} coordinates, cap {cap}; "
                "screening estimates out of tolerance"
            )
    pool = IndexSet.of(n, pool_coords)

    candidates: list[int] = []
    for size in range(0, min(params.level, len(pool_coords)) + 1):
        for combo in itertools.combinations(pool_coords, size):
            candidates.append(IndexSet.of(n, combo).mask)

    est_params = EstimatorParams(lag=budgets.lag, pair_count=budgets.estimate_blocks)
    walk = oracle.walk(est_params.required_walk_length)
    if n <= BULK_WHT_MAX_N:
        bulk = estimate_sq_coeff_bulk(walk, est_params)
        scored = [(mask, float(bulk[mask])) for mask in candidates]
    else:
        scored = [
            (mask, estimate_sq_coeff(walk, IndexSet(n, mask), est_params))
            for mask in candidates
        ]

    keep = [(m, e) for m, e in scored if e >= KEEP_FRACTION * params.theta]
    keep.sort(key=lambda me: (-me[1], me[0]))
    truncated = len(keep) > params.result_cap
    if truncated:
        logger.warning(
            "sieve kept %d sets, cap is %d; dropping the lowest estimates",
            len(keep),
            params.result_cap,
        )
        keep = keep[: params.result_cap]

    return SieveResult(
        n=n,
        sets=tuple(IndexSet(n, m) for m, _ in keep),
        estimates=tuple(e for _, e in keep),
        pool=pool,
        influences=tuple(influences),
        candidates=len(candidates),
        truncated=truncated,
        walk_steps=oracle.steps_served,
        budgets=budgets,
    )


@dataclass(frozen=True)
class CertifyReport:
    """Outcome of auditing a sieve run against the exact spectrum."""

    passed: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.passed


def certify_result(
    result: SieveResult, truth: Spectrum, theta: float, level: int
) -> CertifyReport:
    """Audit soundness, completeness, and the output cap against exact truth.

    Soundness: every returned set has true coeff^2 >= theta/2 and size <=
    level.  Completeness: every set with size <= level and coeff^2 >= theta is
    returned.  Cardinality: at most ceil(2/theta) sets.
    """
    failures: list[str] = []
    returned = set(result.masks())
    masks = np.arange(1 << truth.n, dtype=np.uint64)
    sizes = popcount_u64(masks)
    sq = np.asarray(truth.coeffs) ** 2
    for mask in np.nonzero((sizes <= level) & (sq >= theta))[0]:
        if int(mask) not in returned:
            failures.append(
                f"missing set mask={int(mask)} with coeff^2={sq[mask]:.6f} >= theta"
            )
    for mask in returned:
        if sq[mask] < theta / 2.0:
            failures.append(
                f"spurious set mask={mask} with coeff^2={sq[mask]:.6f} < theta/2"
            )
        if int(sizes[mask]) > level:
            failures.append(f"oversized set mask={mask} (|S|={int(sizes[mask])})")
    cap = math.ceil(2.0 / theta)
    if len(result.sets) > cap:
        failures.append(f"returned {len(result.sets)} sets, cap {cap}")
    return CertifyReport(passed=not failures, violations=tuple(failures))
