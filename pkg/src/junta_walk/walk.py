"""Labeled random walks on the hypercube and independence-harvesting machinery.

Two walk flavours are supported.  The plain walk flips one uniformly random
coordinate per step.  The updating (lazy) walk picks a uniform coordinate and
resamples it, i.e. flips it with probability 1/2.

A plain walk of length ell can be embedded into an updating walk by an
auxiliary experiment: draw fair bits F_1, F_2, ... until ell ones appear (give
up after a cutoff L); the j-th one receives the walk's j-th flipped coordinate,
every zero receives a fresh uniform coordinate.  ``simulate_updating`` runs
that experiment on one walk and reports whether the schedule covered [n].

``harvest_refresh_pairs`` mass-produces endpoint pairs annotated with refreshed
coordinate sets.  It cuts a single updating walk into Poisson-length blocks:
the coordinates selected inside a block are resampled uniformly and
independently between its endpoints, all others are frozen, which is the exact
statistical model the refresh annotation promises, and the Poisson lengths
decouple the per-coordinate refresh events from one another.  (The embedded
plain-walk experiment cannot deliver that exactness: a plain walk always
changes parity each step, so its endpoints carry a deterministic parity
constraint however the schedule is conditioned.)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, TextIO, Union

import numpy as np

from .hypercube import IndexSet, JuntaHypothesis, Point, TruthTable

logger = logging.getLogger(__name__)

LabelSource = Union[TruthTable, JuntaHypothesis, Callable[[np.ndarray], np.ndarray]]

DEFAULT_CUTOFF_FACTOR = 4  # L = 4*ell; shortfall probability decays like exp(-ell/16)


def labels_for(f: LabelSource, bits: np.ndarray) -> np.ndarray:
    """Evaluate a label source over an array of packed points."""
    if hasattr(f, "label_bits"):
        out = f.label_bits(bits)
    else:
        out = np.asarray(f(bits))
    out = out.astype(np.int8)
    if out.shape != bits.shape or not np.all(np.abs(out) == 1):
        raise ValueError("label source must map packed points to +1/-1 labels")
    return out


@dataclass(frozen=True)
class WalkConfig:
    """Walk parameters: ``length`` counts labeled examples, so length-1 steps."""

    n: int
    length: int
    seed: int
    lazy: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n={self.n} must be >= 1")
        if self.length < 1:
            raise ValueError(f"length={self.length} must be >= 1")


@dataclass(frozen=True)
class LabeledWalk:
    """A labeled walk: packed points, labels, and the per-step changed coordinate.

    ``flipped[t]`` is the coordinate flipped (plain) or updated (lazy) between
    points t-1 and t; ``flipped[0] = 0`` marks the initial uniform draw.
    """

    n: int
    points: np.ndarray
    labels: np.ndarray
    flipped: np.ndarray
    seed: int | None = None
    lazy: bool = False

    def __len__(self) -> int:
        return len(self.points)

    @property
    def steps(self) -> int:
        return len(self.points) - 1

    def point(self, t: int) -> Point:
        return Point(self.n, int(self.points[t]))


def _walk_arrays(
    rng: np.random.Generator, n: int, count: int, lazy: bool
) -> tuple[np.ndarray, np.ndarray]:
    """``count`` packed points of a walk plus the changed-coordinate record."""
    start = int(rng.integers(0, 1 << n, dtype=np.uint64))
    steps = count - 1
    points = np.empty(count, dtype=np.uint64)
    points[0] = start
    flipped = np.zeros(count, dtype=np.int16)
    if steps > 0:
        coords = rng.integers(1, n + 1, size=steps, dtype=np.int16)
        masks = np.uint64(1) << (coords.astype(np.uint64) - np.uint64(1))
        if lazy:
            act = rng.integers(0, 2, size=steps, dtype=np.uint8).astype(bool)
            masks = np.where(act, masks, np.uint64(0))
        points[1:] = np.uint64(start) ^ np.bitwise_xor.accumulate(masks)
        flipped[1:] = coords
    return points, flipped


def generate_walk(f: LabelSource, config: WalkConfig) -> LabeledWalk:
    """Run the labeled-walk oracle: uniform start, one coordinate changed per step."""
    rng = np.random.default_rng(config.seed)
    points, flipped = _walk_arrays(rng, config.n, config.length, config.lazy)
    return LabeledWalk(
        n=config.n,
        points=points,
        labels=labels_for(f, points),
        flipped=flipped,
        seed=config.seed,
        lazy=config.lazy,
    )


# ---------------------------------------------------------------------------
# Updating-walk embedding experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdatingSimulation:
    """Outcome of embedding a plain walk into an updating walk.

    ``schedule`` lists (coordinate, taken-from-walk) slots in update order.
    ``completed`` means the fair-bit stream produced enough ones before the
    cutoff; ``covered`` means the scheduled coordinates exhaust [n];
    ``accepted`` requires both.
    """

    accepted: bool
    completed: bool
    covered: bool
    schedule: tuple[tuple[int, bool], ...]

    @property
    def refreshed_mask(self) -> int:
        mask = 0
        for coord, _ in self.schedule:
            mask |= 1 << (coord - 1)
        return mask


def simulate_updating(
    walk: LabeledWalk, target_ones: int, cutoff: int, seed: int
) -> UpdatingSimulation:
    """Run the embedding experiment against the first ``target_ones`` walk flips."""
    if walk.steps < target_ones:
        raise ValueError(f"walk has {walk.steps} steps, need >= {target_ones}")
    if cutoff < target_ones:
        raise ValueError(f"cutoff {cutoff} below target ones {target_ones}")
    rng = np.random.default_rng(seed)
    fair = rng.integers(0, 2, size=cutoff, dtype=np.uint8)
    fresh = rng.integers(1, walk.n + 1, size=cutoff, dtype=np.int16)
    ones = np.cumsum(fair)
    completed = bool(ones[-1] >= target_ones)
    used = cutoff if not completed else int(np.argmax(ones >= target_ones)) + 1
    walk_flips = walk.flipped[1 : target_ones + 1]
    schedule: list[tuple[int, bool]] = []
    taken = 0
    for j in range(used):
        if fair[j]:
            schedule.append((int(walk_flips[taken]), True))
            taken += 1
        else:
            schedule.append((int(fresh[j]), False))
    mask = 0
    for coord, _ in schedule:
        mask |= 1 << (coord - 1)
    covered = mask == (1 << walk.n) - 1
    return UpdatingSimulation(
        accepted=completed and covered,
        completed=completed,
        covered=covered,
        schedule=tuple(schedule),
    )


def refresh_steps(n: int, delta: float) -> int:
    """Walk length making the embedding experiment accept w.p. >= 1-delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")
    return math.ceil(n * math.log(2 * n / delta))


def _batch_experiment(
    rng: np.random.Generator, n: int, ell: int, cutoff: int, trials: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized experiment over independent trials.

    Returns (completed, covered, x0_bits, xl_bits); each trial draws its own
    fresh walk of ell steps.
    """
    starts = rng.integers(0, 1 << n, size=trials, dtype=np.uint64)
    coords = rng.integers(1, n + 1, size=(trials, ell), dtype=np.int16)
    masks = np.uint64(1) << (coords.astype(np.uint64) - np.uint64(1))
    ends = starts ^ np.bitwise_xor.reduce(masks, axis=1)
    walk_cover = np.bitwise_or.reduce(masks, axis=1)

    fair = rng.integers(0, 2, size=(trials, cutoff), dtype=np.uint8)
    fresh = rng.integers(1, n + 1, size=(trials, cutoff), dtype=np.int16)
    ones = np.cumsum(fair, axis=1)
    completed = ones[:, -1] >= ell
    # used-slot count: position of the ell-th one (1-based); irrelevant when not completed
    used = np.argmax(ones >= ell, axis=1) + 1
    col = np.arange(cutoff)
    fresh_active = (col[None, :] < used[:, None]) & (fair == 0)
    fresh_masks = np.where(
        fresh_active, np.uint64(1) << (fresh.astype(np.uint64) - np.uint64(1)), np.uint64(0)
    )
    cover = walk_cover | np.bitwise_or.reduce(fresh_masks, axis=1)
    covered = cover == np.uint64((1 << n) - 1)
    return completed, covered, starts, ends


def updating_walk_endpoints(
    n: int, ell: int, trials: int, seed: int, chunk: int = 20_000
) -> tuple[int, np.ndarray]:
    """Endpoint pairs of genuine updating walks, conditioned on full coverage.

    Each trial draws an updating walk of ``ell`` steps (uniform coordinate,
    resampled by a fair bit).  Trials whose chosen coordinates cover [n] are
    kept; returns (covered_count, cell indices x0 * 2^n + xl of kept trials).
    Unlike plain-walk endpoints, these carry no step-parity constraint, so
    conditional on coverage the pair is uniform over all 4^n cells.
    """
    rng = np.random.default_rng(seed)
    covered_total = 0
    cells: list[np.ndarray] = []
    full = np.uint64((1 << n) - 1)
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        starts = rng.integers(0, 1 << n, size=t, dtype=np.uint64)
        coords = rng.integers(1, n + 1, size=(t, ell), dtype=np.int16)
        act = rng.integers(0, 2, size=(t, ell), dtype=np.uint8).astype(bool)
        bit = np.uint64(1) << (coords.astype(np.uint64) - np.uint64(1))
        ends = starts ^ np.bitwise_xor.reduce(np.where(act, bit, np.uint64(0)), axis=1)
        covered = np.bitwise_or.reduce(bit, axis=1) == full
        covered_total += int(np.count_nonzero(covered))
        cells.append(
            (starts[covered].astype(np.int64) << n) | ends[covered].astype(np.int64)
        )
        done += t
    return covered_total, np.concatenate(cells)


def updating_acceptance_trials(
    n: int,
    ell: int,
    cutoff: int,
    trials: int,
    seed: int,
    collect_pairs: bool = False,
    chunk: int = 20_000,
) -> tuple[int, np.ndarray | None]:
    """Repeat the embedding experiment on fresh walks; count acceptances.

    With ``collect_pairs`` the accepted trials' endpoint pairs are returned as
    an array of cell indices x0 * 2^n + xl, for endpoint-distribution tests.
    """
    rng = np.random.default_rng(seed)
    accepted_total = 0
    cells: list[np.ndarray] = []
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        completed, covered, x0, xl = _batch_experiment(rng, n, ell, cutoff, t)
        acc = completed & covered
        accepted_total += int(np.count_nonzero(acc))
        if collect_pairs:
            cells.append((x0[acc].astype(np.int64) << n) | xl[acc].astype(np.int64))
        done += t
    pairs = np.concatenate(cells) if collect_pairs else None
    return accepted_total, pairs


# ---------------------------------------------------------------------------
# Refresh-pair harvesting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefreshPair:
    """Endpoints of one accepted block with its refreshed coordinate set."""

    x: Point
    y: Point
    label_x: int
    label_y: int
    refreshed: IndexSet


class RefreshPairs(Sequence):
    """Array-backed sequence of RefreshPair records."""

    def __init__(
        self,
        n: int,
        x_bits: np.ndarray,
        y_bits: np.ndarray,
        label_x: np.ndarray,
        label_y: np.ndarray,
        refreshed_masks: np.ndarray,
        walk_steps: int = 0,
    ) -> None:
        self.n = n
        self.x_bits = np.asarray(x_bits, dtype=np.uint64)
        self.y_bits = np.asarray(y_bits, dtype=np.uint64)
        self.label_x = np.asarray(label_x, dtype=np.int8)
        self.label_y = np.asarray(label_y, dtype=np.int8)
        self.refreshed_masks = np.asarray(refreshed_masks, dtype=np.uint64)
        self.walk_steps = walk_steps

    def __len__(self) -> int:
        return len(self.x_bits)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return RefreshPairs(
                self.n,
                self.x_bits[idx],
                self.y_bits[idx],
                self.label_x[idx],
                self.label_y[idx],
                self.refreshed_masks[idx],
                self.walk_steps,
            )
        return RefreshPair(
            x=Point(self.n, int(self.x_bits[idx])),
            y=Point(self.n, int(self.y_bits[idx])),
            label_x=int(self.label_x[idx]),
            label_y=int(self.label_y[idx]),
            refreshed=IndexSet(self.n, int(self.refreshed_masks[idx])),
        )

    def __iter__(self) -> Iterator[RefreshPair]:
        for i in range(len(self)):
            yield self[i]


def harvest_refresh_pairs(
    f: LabelSource, n: int, pair_count: int, gap_steps: int, seed: int, chunk: int = 200_000
) -> RefreshPairs:
    """Cut one fresh updating walk into consecutive blocks of Poisson
    (``gap_steps``) mean length and emit each block's endpoint pair with its
    refreshed coordinate set.

    An updating step selects a uniform coordinate and rewrites it with a fair
    bit, so every selected coordinate of a block ends uniform and independent
    of where it started, while unselected coordinates carry through unchanged.
    The emitted pairs are exact samples of the refresh model

        E[f(x) f(y) | refreshed = R] = sum over T disjoint from R of fhat(T)^2.

    Poissonized block lengths make the per-coordinate selection counts
    independent Poisson(gap_steps/n) variables, so membership in R is an
    independent Bernoulli event of probability 1 - exp(-gap_steps/n) for every
    coordinate; conditional statistics over R then factorize exactly, which is
    what calibrates the screening contrasts downstream.  A zero-length block
    (probability e^-gap_steps) legitimately emits refreshed = empty and y = x.
    """
    if gap_steps < 1:
        raise ValueError(f"gap_steps={gap_steps} must be >= 1")
    if pair_count < 1:
        raise ValueError(f"pair_count={pair_count} must be >= 1")
    rng = np.random.default_rng(seed)

    out_x: list[np.ndarray] = []
    out_y: list[np.ndarray] = []
    out_r: list[np.ndarray] = []
    state = np.uint64(rng.integers(0, 1 << n, dtype=np.uint64))
    done = 0
    steps_used = 0
    while done < pair_count:
        blocks = min(max(1, chunk // gap_steps), pair_count - done)
        lengths = rng.poisson(gap_steps, size=blocks)
        total = int(lengths.sum())
        steps_used += total
        coords = rng.integers(1, n + 1, size=total, dtype=np.int16)
        bit = np.uint64(1) << (coords.astype(np.uint64) - np.uint64(1))
        act = rng.integers(0, 2, size=total, dtype=np.uint8).astype(bool)
        act_bit = np.where(act, bit, np.uint64(0))
        # reduceat over ragged segments; pad one identity element so empty
        # tail segments stay in range, then zero out empty blocks explicitly
        starts = np.zeros(blocks, dtype=np.int64)
        np.cumsum(lengths[:-1], out=starts[1:])
        pad_act = np.append(act_bit, np.uint64(0))
        pad_sel = np.append(bit, np.uint64(0))
        block_xor = np.bitwise_xor.reduceat(pad_act, starts)
        block_sel = np.bitwise_or.reduceat(pad_sel, starts)
        empty = lengths == 0
        block_xor[empty] = 0
        block_sel[empty] = 0
        bounds = np.empty(blocks + 1, dtype=np.uint64)
        bounds[0] = state
        bounds[1:] = state ^ np.bitwise_xor.accumulate(block_xor)
        state = bounds[-1]
        out_x.append(bounds[:-1])
        out_y.append(bounds[1:])
        out_r.append(block_sel)
        done += blocks

    x_bits = np.concatenate(out_x)
    y_bits = np.concatenate(out_y)
    refreshed_masks = np.concatenate(out_r)
    return RefreshPairs(
        n=n,
        x_bits=x_bits,
        y_bits=y_bits,
        label_x=labels_for(f, x_bits),
        label_y=labels_for(f, y_bits),
        refreshed_masks=refreshed_masks,
        walk_steps=steps_used,
    )


def effective_refresh_density(n: int, gap_steps: int) -> float:
    """Per-coordinate refresh probability of a harvested block.

    Poissonized blocks select coordinate i a Poisson(gap_steps/n) number of
    times, so P[i refreshed] = 1 - exp(-gap_steps/n), independently across i.
    """
    return 1.0 - math.exp(-gap_steps / n)


def gap_for_density(n: int, p: float) -> int:
    """Smallest mean block length whose refresh density reaches p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"refresh density {p} outside (0, 1)")
    return max(1, math.ceil(-n * math.log(1.0 - p)))


# ---------------------------------------------------------------------------
# Sample-size plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSizePlan:
    """Walk length m and block length N backing a concentration claim."""

    n: int
    epsilon: float
    delta: float
    log_class_size: float
    N: int
    m: int
    mode: str  # "certified" | "practical"


def _check_eps_delta(epsilon: float, delta: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} outside (0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta} outside (0, 1)")


def sample_size_concentration(epsilon: float, delta: float, n: int) -> SampleSizePlan:
    """Walk length holding an empirical mean within epsilon w.p. >= 1-delta.

    N = ceil(n ln(n/delta)) and m = ceil((2N/eps^2) ln(2N/delta)).
    """
    _check_eps_delta(epsilon, delta)
    N = math.ceil(n * math.log(n / delta))
    m = math.ceil((2 * N / epsilon**2) * math.log(2 * N / delta))
    return SampleSizePlan(n, epsilon, delta, 0.0, N, m, "certified")


def sample_size_erm(
    epsilon: float, delta: float, n: int, log_class_size: float
) -> SampleSizePlan:
    """Walk length making disagreement minimization over a finite class sound.

    With lnC = log_class_size: N = ceil(n (ln(2n/delta) + lnC)) and
    m = ceil((8N/eps^2)(ln(2N/delta) + lnC)); all |C| factors stay in log space.
    """
    _check_eps_delta(epsilon, delta)
    if log_class_size < 0.0:
        raise ValueError(f"log_class_size={log_class_size} must be >= 0")
    N = math.ceil(n * (math.log(2 * n / delta) + log_class_size))
    m = math.ceil((8 * N / epsilon**2) * (math.log(2 * N / delta) + log_class_size))
    return SampleSizePlan(n, epsilon, delta, log_class_size, N, m, "certified")


_warned_plans: set[tuple] = set()


def practical_plan(
    m: int, epsilon: float, delta: float, n: int, log_class_size: float = 0.0
) -> SampleSizePlan:
    """Wrap a user-supplied walk length; certified guarantees do not apply."""
    _check_eps_delta(epsilon, delta)
    if m < 1:
        raise ValueError(f"m={m} must be >= 1")
    certified = (
        sample_size_erm(epsilon, delta, n, log_class_size)
        if log_class_size > 0
        else sample_size_concentration(epsilon, delta, n)
    )
    key = (m, certified.m, epsilon, delta, n)
    if m < certified.m and key not in _warned_plans:
        _warned_plans.add(key)
        logger.warning(
            "practical sample size m=%d is below the certified m=%d for "
            "(eps=%g, delta=%g, n=%d); guarantees are heuristic",
            m,
            certified.m,
            epsilon,
            delta,
            n,
        )
    return SampleSizePlan(n, epsilon, delta, log_class_size, certified.N, m, "practical")


# ---------------------------------------------------------------------------
# Walk oracle with seed discipline
# ---------------------------------------------------------------------------


class RandomWalkOracle:
    """Seeded access to labeled walks over a fixed unknown function.

    Every request derives an independent child seed from (seed, counter), so a
    fixed request sequence reproduces exactly.
    """

    def __init__(self, f: LabelSource, n: int, seed: int) -> None:
        self.f = f
        self.n = n
        self.seed = seed
        self._requests = 0
        self.steps_served = 0

    def _child_seed(self) -> np.random.SeedSequence:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self._requests,))
        self._requests += 1
        return ss

    def walk(self, length: int, lazy: bool = False) -> LabeledWalk:
        rng = np.random.default_rng(self._child_seed())
        points, flipped = _walk_arrays(rng, self.n, length, lazy)
        self.steps_served += length - 1
        return LabeledWalk(
            n=self.n,
            points=points,
            labels=labels_for(self.f, points),
            flipped=flipped,
            seed=None,
            lazy=lazy,
        )

    def refresh_pairs(self, pair_count: int, gap_steps: int) -> RefreshPairs:
        seed = int(self._child_seed().generate_state(1, np.uint64)[0])
        pairs = harvest_refresh_pairs(self.f, self.n, pair_count, gap_steps, seed)
        self.steps_served += pairs.walk_steps
        return pairs


# ---------------------------------------------------------------------------
# Dump formats
# ---------------------------------------------------------------------------


def dump_walk(walk: LabeledWalk, fh: TextIO) -> None:
    """Text dump: header ``n m seed lazy``, one ``hex label flip`` line per point."""
    seed = walk.seed if walk.seed is not None else 0
    fh.write(f"{walk.n} {walk.steps} {seed} {int(walk.lazy)}\n")
    for bits, label, flip in zip(walk.points, walk.labels, walk.flipped):
        fh.write(f"{int(bits):x} {int(label):+d} {int(flip)}\n")


def load_walk(fh: TextIO) -> LabeledWalk:
    header = fh.readline().split()
    n, steps, seed, lazy = int(header[0]), int(header[1]), int(header[2]), bool(int(header[3]))
    points = np.empty(steps + 1, dtype=np.uint64)
    labels = np.empty(steps + 1, dtype=np.int8)
    flipped = np.empty(steps + 1, dtype=np.int16)
    for t in range(steps + 1):
        parts = fh.readline().split()
        points[t] = int(parts[0], 16)
        labels[t] = int(parts[1])
        flipped[t] = int(parts[2])
    return LabeledWalk(n=n, points=points, labels=labels, flipped=flipped, seed=seed, lazy=lazy)


def dump_pairs(pairs: RefreshPairs, fh: TextIO) -> None:
    """JSON-lines dump of refresh pairs with hex-packed masks."""
    import json

    for i in range(len(pairs)):
        fh.write(
            json.dumps(
                {
                    "x": format(int(pairs.x_bits[i]), "x"),
                    "y": format(int(pairs.y_bits[i]), "x"),
                    "lx": int(pairs.label_x[i]),
                    "ly": int(pairs.label_y[i]),
                    "refreshed": format(int(pairs.refreshed_masks[i]), "x"),
                }
            )
            + "\n"
        )


def load_pairs(fh: TextIO, n: int) -> RefreshPairs:
    import json

    xs, ys, lxs, lys, rs = [], [], [], [], []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        xs.append(int(obj["x"], 16))
        ys.append(int(obj["y"], 16))
        lxs.append(int(obj["lx"]))
        lys.append(int(obj["ly"]))
        rs.append(int(obj["refreshed"], 16))
    return RefreshPairs(
        n=n,
        x_bits=np.array(xs, dtype=np.uint64),
        y_bits=np.array(ys, dtype=np.uint64),
        label_x=np.array(lxs, dtype=np.int8),
        label_y=np.array(lys, dtype=np.int8),
        refreshed_masks=np.array(rs, dtype=np.uint64),
    )
