"""Fourier analysis over the hypercube: exact transforms and walk-based estimators.

Coefficients use the character convention chi_S(x) = prod_{i in S} x_i with
packed points, so chi_S(x) = (-1)^popcount(mask_S & bits_x) and the dense
transform is the standard Walsh-Hadamard butterfly.

The squared-coefficient estimator works from a plain labeled walk.  One lag-t
sample is f(x) f(x') chi_S(x (+) x') for walk positions t apart; averaging the
lag-t and lag-(t+1) samples cancels the alternating-sign contribution of the
full set [n] and leaves expectation

    sum_U fhat(U)^2 * (1/2) [ (1-2d/n)^t + (1-2d/n)^(t+1) ],   d = |U xor S|,

which is within exp(-2t/n) of fhat(S)^2 once t >= (n/2) ln(1/bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .hypercube import (
    IndexSet,
    TruthTable,
    parity_sign_u64,
    popcount_u64,
    restriction_indices,
)
from .walk import LabeledWalk, RefreshPairs

BULK_WHT_MAX_N = 20  # above this the dense 2^n binning path is off the table


def _check_power_of_two(size: int) -> int:
    n = size.bit_length() - 1
    if size <= 0 or (1 << n) != size:
        raise ValueError(f"array length {size} is not a power of two")
    return n


def wht(values: "np.ndarray | TruthTable") -> "np.ndarray | Spectrum":
    """Walsh-Hadamard transform.

    On a TruthTable, returns its Spectrum (coefficients fhat(S) = <f, chi_S>).
    On a raw array, returns the unnormalized transform
    out[S] = sum_x v[x] chi_S(x).
    """
    if isinstance(values, TruthTable):
        return Spectrum.from_table(values)
    v = np.array(values, dtype=np.float64)
    size = v.size
    _check_power_of_two(size)
    h = 1
    while h < size:
        v = v.reshape(-1, 2 * h)
        left = v[:, :h] + v[:, h:]
        right = v[:, :h] - v[:, h:]
        v = np.concatenate([left, right], axis=1)
        h *= 2
    return v.reshape(size)


def wht_int(values: np.ndarray) -> np.ndarray:
    """Integer-exact Walsh-Hadamard transform for +-1 tables and count vectors."""
    v = np.array(values, dtype=np.int64)
    size = v.size
    _check_power_of_two(size)
    h = 1
    while h < size:
        v = v.reshape(-1, 2 * h)
        left = v[:, :h] + v[:, h:]
        right = v[:, :h] - v[:, h:]
        v = np.concatenate([left, right], axis=1)
        h *= 2
    return v.reshape(size)


@dataclass(frozen=True)
class Spectrum:
    """Dense Fourier coefficients of an n-variable function, indexed by set mask."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=np.float64)
        if arr.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_table(cls, f: TruthTable) -> "Spectrum":
        return cls(f.n, wht(f.values) / (1 << f.n))

    def coeff(self, S: IndexSet | int) -> float:
        mask = S.mask if isinstance(S, IndexSet) else int(S)
        return float(self.coeffs[mask])

    def sq_weight(self) -> float:
        """Total squared mass; equals 1 for +-1 valued functions (Parseval)."""
        return float(np.dot(self.coeffs, self.coeffs))

    def to_table(self) -> TruthTable:
        values = wht(self.coeffs)
        rounded = np.rint(values)
        if not np.allclose(values, rounded, atol=1e-9) or not np.all(
            np.abs(rounded) == 1
        ):
            raise ValueError("spectrum does not invert to a +-1 valued table")
        return TruthTable(self.n, rounded.astype(np.int8))

    def largest(self, count: int) -> list[tuple[IndexSet, float]]:
        order = np.lexsort((np.arange(self.coeffs.size), -np.abs(self.coeffs)))
        return [
            (IndexSet(self.n, int(m)), float(self.coeffs[m])) for m in order[:count]
        ]


def inverse_wht(coeffs: np.ndarray) -> np.ndarray:
    """Point values out[x] = sum_S c_S chi_S(x); the same butterfly, no scaling."""
    return wht(coeffs)


def project_spectrum(spec: Spectrum, J: IndexSet) -> Spectrum:
    """Zero every coefficient whose set is not contained in J."""
    if J.n != spec.n:
        raise ValueError(f"index set over n={J.n}, spectrum over n={spec.n}")
    masks = np.arange(1 << spec.n, dtype=np.uint64)
    inside = (masks & np.uint64(~J.mask & ((1 << spec.n) - 1))) == 0
    return Spectrum(spec.n, np.where(inside, spec.coeffs, 0.0))


def fourier_weight(spec: Spectrum, J: IndexSet) -> float:
    """Squared coefficient mass carried by subsets of J."""
    return project_spectrum(spec, J).sq_weight()


def inner_product(f: "Spectrum | TruthTable", g: "Spectrum | TruthTable") -> float:
    """<f, g>: uniform-measure correlation, equal to the coefficient dot product.

    Both arguments must be the same kind (two tables or two spectra) over the
    same dimension; the two computations agree to float precision.
    """
    if isinstance(f, TruthTable) and isinstance(g, TruthTable):
        if f.n != g.n:
            raise ValueError(f"dimension mismatch: {f.n} != {g.n}")
        return float(
            np.dot(f.values.astype(np.float64), g.values.astype(np.float64))
            / (1 << f.n)
        )
    if isinstance(f, Spectrum) and isinstance(g, Spectrum):
        if f.n != g.n:
            raise ValueError(f"dimension mismatch: {f.n} != {g.n}")
        return float(np.dot(f.coeffs, g.coeffs))
    raise TypeError("inner_product wants two TruthTables or two Spectrums")


def subcube_projection_exact(s: Spectrum, R: IndexSet) -> float:
    """Squared mass of coefficients disjoint from R: sum over T with T & R = 0.

    This is the stationary value of E[f(x) f(y)] when y resamples exactly the
    coordinates in R, making it the exact oracle for refresh-pair statistics.
    """
    if R.n != s.n:
        raise ValueError(f"index set over n={R.n}, spectrum over n={s.n}")
    return fourier_weight(s, R.complement())


def subcube_averages(f: TruthTable, J: IndexSet) -> np.ndarray:
    """Conditional means of f over each assignment to the J coordinates.

    Indexed by restriction index (bit j of the index is the sign of the j-th
    smallest coordinate of J); equals the J-projection evaluated on the subcube.
    """
    if J.n != f.n:
        raise ValueError(f"index set over n={J.n}, table over n={f.n}")
    k = len(J)
    ridx = restriction_indices(J, np.arange(1 << f.n, dtype=np.uint64))
    sums = np.bincount(ridx, weights=f.values.astype(np.float64), minlength=1 << k)
    return sums / (1 << (f.n - k))


def spectrum_to_csv(spec: Spectrum, fh: TextIO) -> None:
    """Write ``mask,coords,coefficient`` rows, ordered by mask."""
    fh.write("mask,coords,coefficient\n")
    for mask in range(1 << spec.n):
        coords = "|".join(str(c) for c in IndexSet(spec.n, mask))
        fh.write(f"{mask},{coords},{float(spec.coeffs[mask])!r}\n")


# ---------------------------------------------------------------------------
# Walk-based estimation
# ---------------------------------------------------------------------------


def default_lag(n: int, theta: float) -> int:
    """Lag putting the estimator's systematic error below theta/8."""
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta={theta} outside (0, 1]")
    return max(1, math.ceil((n / 2) * math.log(8.0 / theta)))


def blocks_for(accuracy: float, delta: float) -> int:
    """Sample blocks keeping a mean of [-1, 1] terms within ``accuracy`` w.p. 1-delta."""
    if not 0.0 < accuracy <= 2.0:
        raise ValueError(f"accuracy={accuracy} outside (0, 2]")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")
    return math.ceil((2.0 / accuracy**2) * math.log(2.0 / delta))


@dataclass(frozen=True)
class EstimatorParams:
    """Lag, pair count, and spacing for the squared-coefficient estimator.

    ``tolerance`` and ``confidence`` are advisory metadata recording what the
    certified constructor aimed for; they do not change the computation.
    """

    lag: int
    pair_count: int
    block_spacing: int = 0
    tolerance: float | None = None
    confidence: float | None = None

    def __post_init__(self) -> None:
        if self.lag < 1:
            raise ValueError(f"lag={self.lag} must be >= 1")
        if self.pair_count < 1:
            raise ValueError(f"pair_count={self.pair_count} must be >= 1")
        if self.block_spacing < 0:
            raise ValueError(f"block_spacing={self.block_spacing} must be >= 0")

    @property
    def stride(self) -> int:
        return self.lag + 1 + self.block_spacing

    @property
    def required_walk_length(self) -> int:
        """Points consumed: block b reads positions b*stride, +lag, +lag+1."""
        return (self.pair_count - 1) * self.stride + self.lag + 2

    @classmethod
    def certified(cls, n: int, theta: float, delta: float) -> "EstimatorParams":
        """Lag for bias theta/8 and pair count for sampling error theta/8."""
        return cls(
            lag=default_lag(n, theta),
            pair_count=blocks_for(theta / 8.0, delta),
            tolerance=theta / 4.0,
            confidence=1.0 - delta,
        )


def _lag_samples(
    walk: LabeledWalk, params: EstimatorParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if len(walk.points) < params.required_walk_length:
        raise ValueError(
            f"walk has {len(walk.points)} points, estimator needs "
            f"{params.required_walk_length}"
        )
    base = np.arange(params.pair_count) * params.stride
    xb = walk.points[base]
    diff_t = xb ^ walk.points[base + params.lag]
    diff_t1 = xb ^ walk.points[base + params.lag + 1]
    lb = walk.labels[base].astype(np.float64)
    prod_t = lb * walk.labels[base + params.lag]
    prod_t1 = lb * walk.labels[base + params.lag + 1]
    return diff_t, diff_t1, prod_t, prod_t1


def estimate_sq_coeff(walk: LabeledWalk, S: IndexSet, params: EstimatorParams) -> float:
    """Estimate fhat(S)^2 from a plain labeled walk."""
    if S.n != walk.n:
        raise ValueError(f"index set over n={S.n}, walk over n={walk.n}")
    diff_t, diff_t1, prod_t, prod_t1 = _lag_samples(walk, params)
    mask = np.uint64(S.mask)
    chi_t = parity_sign_u64(diff_t, mask)
    chi_t1 = parity_sign_u64(diff_t1, mask)
    return float(np.mean(0.5 * (prod_t * chi_t + prod_t1 * chi_t1)))


def estimate_sq_coeff_bulk(walk: LabeledWalk, params: EstimatorParams) -> np.ndarray:
    """Estimates of fhat(S)^2 for every S at once.

    Bins the weighted label products by endpoint xor word and applies one
    transform, so the cost is one pass over the walk plus an n 2^n butterfly
    rather than 4^n character evaluations.  Requires n <= 20.
    """
    if walk.n > BULK_WHT_MAX_N:
        raise ValueError(f"bulk estimation needs n <= {BULK_WHT_MAX_N}, got {walk.n}")
    diff_t, diff_t1, prod_t, prod_t1 = _lag_samples(walk, params)
    size = 1 << walk.n
    bins_t = np.bincount(diff_t.astype(np.int64), weights=prod_t, minlength=size)
    bins_t1 = np.bincount(diff_t1.astype(np.int64), weights=prod_t1, minlength=size)
    return 0.5 * (wht(bins_t) + wht(bins_t1)) / params.pair_count


def expected_sq_estimate(
    spec: Spectrum, S: IndexSet, lag: int, lazy: bool = False
) -> float:
    """Closed-form expectation of the estimator under a known spectrum.

    A plain walk damps the set-U contribution by (1-2d/n)^t with d = |U xor S|;
    an updating walk damps by (1-d/n)^t.  The estimator averages lags t, t+1.
    """
    if S.n != spec.n:
        raise ValueError(f"index set over n={S.n}, spectrum over n={spec.n}")
    n = spec.n
    masks = np.arange(1 << n, dtype=np.uint64)
    d = popcount_u64(masks ^ np.uint64(S.mask)).astype(np.float64)
    base = 1.0 - (1.0 if lazy else 2.0) * d / n
    weight = 0.5 * base**lag * (1.0 + base)
    return float(np.dot(spec.coeffs**2, weight))


def estimator_bias_bound(n: int, lag: int) -> float:
    """Upper bound exp(-2 lag / n) on |E[estimate] - fhat(S)^2|."""
    return math.exp(-2.0 * lag / n)


# ---------------------------------------------------------------------------
# Bounded-influence screening from refresh pairs
# ---------------------------------------------------------------------------


def estimate_bounded_influence(
    pairs: RefreshPairs, i: int, p: float | None = None
) -> float:
    """Contrast the label product over pairs that did/did not refresh coordinate i.

    Writing l(R) = E[f(x) f(y) | refreshed set R] = sum_{T cap R empty} fhat(T)^2,
    and with coordinates refreshed independently at density p, the contrast has
    expectation exactly sum_{T owns i} fhat(T)^2 (1-p)^(|T|-1): a screened
    influence that is large for every member of a heavy low-degree set.  ``p``
    is the density used by callers for thresholds; it does not enter the
    estimate itself.
    """
    del p
    if not 1 <= i <= pairs.n:
        raise ValueError(f"coordinate {i} outside 1..{pairs.n}")
    products = pairs.label_x.astype(np.float64) * pairs.label_y
    hit = (pairs.refreshed_masks >> np.uint64(i - 1)) & np.uint64(1) == 1
    if not hit.any() or hit.all():
        raise ValueError(
            f"coordinate {i} refreshed in {int(np.count_nonzero(hit))} of "
            f"{len(pairs)} pairs; contrast undefined"
        )
    return float(np.mean(products[~hit]) - np.mean(products[hit]))


def expected_bounded_influence(spec: Spectrum, i: int, p: float) -> float:
    """Exact contrast sum_{T owns i} fhat(T)^2 (1-p)^(|T|-1) under
    independent per-coordinate refreshing at density p."""
    if not 1 <= i <= spec.n:
        raise ValueError(f"coordinate {i} outside 1..{spec.n}")
    masks = np.arange(1 << spec.n, dtype=np.uint64)
    owns = (masks >> np.uint64(i - 1)) & np.uint64(1) == 1
    sizes = popcount_u64(masks).astype(np.float64)
    weights = np.where(owns, (1.0 - p) ** np.maximum(sizes - 1.0, 0.0), 0.0)
    return float(np.dot(spec.coeffs**2, weights))
