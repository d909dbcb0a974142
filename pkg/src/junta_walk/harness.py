"""Seeded experiment engine: corrupted junta instances, single trials, suites.

An instance starts from a uniformly random k-junta and corrupts its truth
table globally (iid label flips, or flips planted on the -1 region of a second
adversarial junta); every subsequent walk is labeled by the corrupted table,
and the optimum junta distance is always recomputed exactly rather than
assumed equal to the corruption rate.

Seeds derive from (master_seed, cell index, repetition index) only, so any
subset of trials can be replayed bit-for-bit.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .functions import flip_labels_iid, flip_labels_region, random_junta
from .hypercube import JuntaHypothesis, TruthTable, distance_exact
from .learner import LearnOutcome, LearnParams, learn_outcome, theta_for
from .oracle_bruteforce import OptResult, exact_opt
from .sieve import SieveParams, practical_budgets
from .walk import RandomWalkOracle

logger = logging.getLogger(__name__)

MAX_INSTANCE_N = 16  # exact opt is part of every trial

CSV_COLUMNS = [
    "trial_id",
    "n",
    "k",
    "eps",
    "delta",
    "gamma",
    "opt",
    "delta_hf",
    "excess",
    "passed",
    "seed",
    "wall_ms",
    "walk_steps",
]


def thread_count() -> int:
    """Worker cap from JUNTA_WALK_THREADS; defaults to 1."""
    raw = os.environ.get("JUNTA_WALK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer JUNTA_WALK_THREADS=%r", raw)
        return 1


@dataclass(frozen=True)
class Corruption:
    """Label corruption model: none, iid(rate), or planted(fraction, seed).

    Planted corruption flips exactly round(fraction * |region|) labels chosen
    uniformly inside the region where an adversarial junta outputs -1.
    """

    kind: str = "none"
    rate: float = 0.0
    fraction: float = 0.0
    adversary_seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "iid", "planted"):
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.kind == "iid" and not 0.0 <= self.rate <= 0.5:
            raise ValueError(f"iid rate {self.rate} outside [0, 1/2]")
        if self.kind == "planted" and not 0.0 <= self.fraction <= 0.5:
            raise ValueError(f"planted fraction {self.fraction} outside [0, 1/2]")

    @property
    def gamma(self) -> float:
        """Nominal corruption intensity, whatever the model."""
        if self.kind == "iid":
            return self.rate
        if self.kind == "planted":
            return self.fraction
        return 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rate": self.rate,
            "fraction": self.fraction,
            "adversary_seed": self.adversary_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Corruption":
        return cls(
            kind=d.get("kind", "none"),
            rate=float(d.get("rate", 0.0)),
            fraction=float(d.get("fraction", 0.0)),
            adversary_seed=d.get("adversary_seed"),
        )


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one target function; None seeds are derived per trial."""

    n: int
    k: int
    corruption: Corruption = Corruption()
    junta_seed: int | None = None
    instance_seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < self.k or self.k < 1:
            raise ValueError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        if self.n > MAX_INSTANCE_N:
            raise ValueError(f"n={self.n} exceeds the instance cap {MAX_INSTANCE_N}")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "corruption": self.corruption.to_dict(),
            "junta_seed": self.junta_seed,
            "instance_seed": self.instance_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceSpec":
        return cls(
            n=int(d["n"]),
            k=int(d["k"]),
            corruption=Corruption.from_dict(d.get("corruption", {})),
            junta_seed=d.get("junta_seed"),
            instance_seed=d.get("instance_seed"),
        )


def _derived_seed(entropy: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def resolve_instance(spec: InstanceSpec, trial_seed: int) -> InstanceSpec:
    """Fill in any None seeds deterministically from the trial seed."""
    junta = spec.junta_seed
    instance = spec.instance_seed
    corruption = spec.corruption
    if junta is None:
        junta = _derived_seed(trial_seed, 1)
    if instance is None:
        instance = _derived_seed(trial_seed, 2)
    if corruption.kind == "planted" and corruption.adversary_seed is None:
        corruption = replace(corruption, adversary_seed=_derived_seed(trial_seed, 3))
    return replace(spec, junta_seed=junta, instance_seed=instance, corruption=corruption)


def make_instance(
    spec: InstanceSpec,
) -> tuple[TruthTable, JuntaHypothesis, OptResult]:
    """Materialize the corrupted target with its planted junta and exact optimum."""
    if spec.junta_seed is None or spec.instance_seed is None:
        raise ValueError("instance seeds not resolved; call resolve_instance first")
    planted = random_junta(spec.n, spec.k, np.random.default_rng(spec.junta_seed))
    f = planted.to_truth_table()
    c = spec.corruption
    if c.kind == "iid" and c.rate > 0.0:
        f = flip_labels_iid(f, c.rate, np.random.default_rng(spec.instance_seed))
    elif c.kind == "planted":
        if c.adversary_seed is None:
            raise ValueError("planted corruption needs an adversary seed")
        adversary = random_junta(spec.n, spec.k, np.random.default_rng(c.adversary_seed))
        region = adversary.label_bits(np.arange(1 << spec.n, dtype=np.uint64)) == -1
        f = flip_labels_region(f, region, c.fraction, np.random.default_rng(spec.instance_seed))
    return f, planted, exact_opt(f, spec.k)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialReport:
    """Everything a single learning trial produced, exact quantities included."""

    trial_id: int
    spec: InstanceSpec
    k: int
    eps: float
    delta: float
    seed: int
    opt: Fraction | None
    delta_hf: Fraction | None
    excess: Fraction | None
    passed: bool
    wall_ms: float
    walk_steps: int
    hypothesis: JuntaHypothesis | None = None
    pool: tuple[int, ...] = ()
    erm_sample: int = 0
    disagreements: int = 0
    error: str | None = None

    def to_row(self) -> "TrialRow":
        return TrialRow(
            trial_id=self.trial_id,
            n=self.spec.n,
            k=self.k,
            eps=self.eps,
            delta=self.delta,
            gamma=self.spec.corruption.gamma,
            opt=self.opt,
            delta_hf=self.delta_hf,
            excess=self.excess,
            passed=self.passed,
            seed=self.seed,
            wall_ms=self.wall_ms,
            walk_steps=self.walk_steps,
        )

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "spec": self.spec.to_dict(),
            "k": self.k,
            "eps": self.eps,
            "delta": self.delta,
            "gamma": self.spec.corruption.gamma,
            "seed": self.seed,
            "opt": None if self.opt is None else str(self.opt),
            "delta_hf": None if self.delta_hf is None else str(self.delta_hf),
            "excess": None if self.excess is None else str(self.excess),
            "passed": self.passed,
            "wall_ms": self.wall_ms,
            "walk_steps": self.walk_steps,
            "hypothesis": None if self.hypothesis is None else json.loads(self.hypothesis.to_json()),
            "pool": list(self.pool),
            "erm_sample": self.erm_sample,
            "disagreements": self.disagreements,
            "error": self.error,
        }


@dataclass(frozen=True)
class TrialRow:
    """The CSV-visible view of a trial; round-trips losslessly through text."""

    trial_id: int
    n: int
    k: int
    eps: float
    delta: float
    gamma: float
    opt: Fraction | None
    delta_hf: Fraction | None
    excess: Fraction | None
    passed: bool
    seed: int
    wall_ms: float
    walk_steps: int

    def to_csv(self) -> list[str]:
        def frac(x: Fraction | None) -> str:
            return "nan" if x is None else str(x)

        return [
            str(self.trial_id),
            str(self.n),
            str(self.k),
            repr(self.eps),
            repr(self.delta),
            repr(self.gamma),
            frac(self.opt),
            frac(self.delta_hf),
            frac(self.excess),
            "1" if self.passed else "0",
            str(self.seed),
            repr(self.wall_ms),
            str(self.walk_steps),
        ]

    @classmethod
    def from_csv(cls, row: list[str]) -> "TrialRow":
        def frac(s: str) -> Fraction | None:
            return None if s == "nan" else Fraction(s)

        return cls(
            trial_id=int(row[0]),
            n=int(row[1]),
            k=int(row[2]),
            eps=float(row[3]),
            delta=float(row[4]),
            gamma=float(row[5]),
            opt=frac(row[6]),
            delta_hf=frac(row[7]),
            excess=frac(row[8]),
            passed=row[9] == "1",
            seed=int(row[10]),
            wall_ms=float(row[11]),
            walk_steps=int(row[12]),
        )


def run_trial(
    spec: InstanceSpec, params: LearnParams, trial_seed: int, trial_id: int = 0
) -> TrialReport:
    """One fully seeded trial: build instance, learn, score exactly.

    ``passed`` compares the exact excess against the exact binary value of the
    float epsilon, so the verdict is reproducible arithmetic, not a tolerance.
    Wall time covers the learner only (instance construction and the exact
    optimum are oracle overhead, not part of the algorithm under test).
    """
    resolved = resolve_instance(spec, trial_seed)
    f, _, opt_result = make_instance(resolved)
    oracle = RandomWalkOracle(f, resolved.n, seed=_derived_seed(trial_seed, 0))
    start = time.perf_counter()
    outcome: LearnOutcome = learn_outcome(oracle, params)
    wall_ms = (time.perf_counter() - start) * 1e3
    delta_hf = distance_exact(f, outcome.hypothesis)
    excess = delta_hf - opt_result.opt
    return TrialReport(
        trial_id=trial_id,
        spec=resolved,
        k=params.k,
        eps=params.epsilon,
        delta=params.delta,
        seed=trial_seed,
        opt=opt_result.opt,
        delta_hf=delta_hf,
        excess=excess,
        passed=excess <= Fraction(params.epsilon),
        wall_ms=wall_ms,
        walk_steps=outcome.walk_steps,
        hypothesis=outcome.hypothesis,
        pool=tuple(sorted(outcome.pool.coords())),
        erm_sample=outcome.sample_size,
        disagreements=outcome.disagreements,
    )


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """One experiment configuration: an instance recipe plus learner settings."""

    instance: InstanceSpec
    learn: LearnParams


@dataclass(frozen=True)
class ExperimentConfig:
    cells: tuple[Cell, ...]
    repetitions: int = 1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError(f"repetitions={self.repetitions} must be >= 1")

    def trial_seed(self, cell_index: int, rep: int) -> int:
        return _derived_seed(self.master_seed, cell_index, rep)

    def to_json(self) -> str:
        def cell_dict(c: Cell) -> dict:
            learn: dict = {
                "k": c.learn.k,
                "epsilon": c.learn.epsilon,
                "delta": c.learn.delta,
            }
            if c.learn.sieve_budgets is None:
                learn["mode"] = "certified"
            else:
                b = c.learn.sieve_budgets
                learn.update(
                    mode="practical",
                    screen_pairs=b.screen_pairs,
                    estimate_blocks=b.estimate_blocks,
                    lag=b.lag,
                    gap_steps=b.gap_steps,
                )
            if c.learn.erm_sample is not None:
                learn["erm_sample"] = c.learn.erm_sample
            return {"instance": c.instance.to_dict(), "learn": learn}

        return json.dumps(
            {
                "master_seed": self.master_seed,
                "repetitions": self.repetitions,
                "cells": [cell_dict(c) for c in self.cells],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        cells = []
        for cd in obj.get("cells", []):
            instance = InstanceSpec.from_dict(cd["instance"])
            ld = cd.get("learn", {})
            k = int(ld.get("k", instance.k))
            eps = float(ld.get("epsilon", 0.25))
            delta = float(ld.get("delta", 0.2))
            if ld.get("mode") == "certified":
                params = LearnParams(k, eps, delta)
            elif "screen_pairs" in ld:
                budgets = practical_budgets(
                    SieveParams(level=k, theta=theta_for(k, eps), delta=delta / 2.0),
                    instance.n,
                    screen_pairs=int(ld["screen_pairs"]),
                    estimate_blocks=int(ld["estimate_blocks"]),
                    lag=int(ld["lag"]) if "lag" in ld else None,
                )
                params = LearnParams(
                    k, eps, delta, sieve_budgets=budgets, erm_sample=ld.get("erm_sample")
                )
            else:
                params = default_learn_params(instance.n, k, eps, delta)
                if "erm_sample" in ld:
                    params = replace(params, erm_sample=int(ld["erm_sample"]))
            cells.append(Cell(instance=instance, learn=params))
        return cls(
            cells=tuple(cells),
            repetitions=int(obj.get("repetitions", 1)),
            master_seed=int(obj.get("master_seed", 0)),
        )


def default_learn_params(
    n: int,
    k: int,
    epsilon: float,
    delta: float,
    screen_pairs: int = 300_000,
    estimate_blocks: int = 20_000,
    erm_sample: int = 40_000,
) -> LearnParams:
    """Practical budgets sized by pilot variance runs at n <= 16, k <= 3."""
    budgets = practical_budgets(
        SieveParams(level=k, theta=theta_for(k, epsilon), delta=delta / 2.0),
        n,
        screen_pairs=screen_pairs,
        estimate_blocks=estimate_blocks,
    )
    return LearnParams(
        k, epsilon, delta, sieve_budgets=budgets, erm_sample=erm_sample
    )


def default_battery(master_seed: int = 20240817, repetitions: int = 3) -> ExperimentConfig:
    """The standing battery: k in {1,2,3} x n in {8,12,16} x eps in {0.2, 0.3}."""
    cells = []
    for n in (8, 12, 16):
        for k in (1, 2, 3):
            for eps in (0.2, 0.3):
                spec = InstanceSpec(
                    n=n, k=k, corruption=Corruption(kind="iid", rate=0.1)
                )
                cells.append(
                    Cell(instance=spec, learn=default_learn_params(n, k, eps, 0.2))
                )
    return ExperimentConfig(
        cells=tuple(cells), repetitions=repetitions, master_seed=master_seed
    )


@dataclass(frozen=True)
class SuiteResult:
    reports: tuple[TrialReport, ...]
    summary: dict
    csv_path: Path
    json_path: Path
    summary_path: Path


def _run_trial_safe(
    cell: Cell, trial_seed: int, trial_id: int
) -> TrialReport:
    try:
        return run_trial(cell.instance, cell.learn, trial_seed, trial_id)
    except Exception as exc:  # noqa: BLE001 - a failing trial must not sink the suite
        logger.error("trial %d failed: %s", trial_id, exc)
        return TrialReport(
            trial_id=trial_id,
            spec=cell.instance,
            k=cell.learn.k,
            eps=cell.learn.epsilon,
            delta=cell.learn.delta,
            seed=trial_seed,
            opt=None,
            delta_hf=None,
            excess=None,
            passed=False,
            wall_ms=0.0,
            walk_steps=0,
            error=f"{type(exc).__name__}: {exc}",
        )


def _summarize(config: ExperimentConfig, reports: list[TrialReport]) -> dict:
    cells_out = []
    by_gamma: dict[float, list[float]] = {}
    by_eps: dict[float, list[bool]] = {}
    for ci, cell in enumerate(config.cells):
        mine = [r for r in reports if r.trial_id // config.repetitions == ci]
        passes = sum(r.passed for r in mine)
        excesses = [float(r.excess) for r in mine if r.excess is not None]
        walls = sorted(r.wall_ms for r in mine)
        cells_out.append(
            {
                "cell": ci,
                "n": cell.instance.n,
                "k": cell.learn.k,
                "eps": cell.learn.epsilon,
                "delta": cell.learn.delta,
                "gamma": cell.instance.corruption.gamma,
                "kind": cell.instance.corruption.kind,
                "repetitions": len(mine),
                "passes": passes,
                "pass_rate": passes / len(mine) if mine else 0.0,
                "mean_excess": sum(excesses) / len(excesses) if excesses else None,
                "median_wall_ms": walls[len(walls) // 2] if walls else 0.0,
                "errors": sum(r.error is not None for r in mine),
            }
        )
        g = cell.instance.corruption.gamma
        by_gamma.setdefault(g, []).extend(excesses)
        by_eps.setdefault(cell.learn.epsilon, []).extend(r.passed for r in mine)
    series = {
        "excess_vs_gamma": [
            [g, sum(v) / len(v)] for g, v in sorted(by_gamma.items()) if v
        ],
        "pass_rate_vs_eps": [
            [e, sum(v) / len(v)] for e, v in sorted(by_eps.items()) if v
        ],
    }
    return {
        "master_seed": config.master_seed,
        "trials": len(reports),
        "passes": sum(r.passed for r in reports),
        "cells": cells_out,
        "series": series,
    }


def run_suite(config: ExperimentConfig, out_dir: str | Path) -> SuiteResult:
    """Execute every (cell, repetition) trial and write CSV/JSON artifacts.

    Trials run independently (thread pool capped by JUNTA_WALK_THREADS); the
    collector writes all files from this thread, in trial order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        (cell, config.trial_seed(ci, rep), ci * config.repetitions + rep)
        for ci, cell in enumerate(config.cells)
        for rep in range(config.repetitions)
    ]
    workers = thread_count()
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda t: _run_trial_safe(*t), tasks))
    else:
        reports = [_run_trial_safe(*t) for t in tasks]

    csv_path = out / "trials.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(r.to_row().to_csv())
    json_path = out / "trials.json"
    with open(json_path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
    summary = _summarize(config, reports)
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    return SuiteResult(
        reports=tuple(reports),
        summary=summary,
        csv_path=csv_path,
        json_path=json_path,
        summary_path=summary_path,
    )
