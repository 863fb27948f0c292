"""End-to-end simulated Bell test with random local settings.

Each observer draws ``R`` in {0, 1, 2} independently per trial: 0 measures X
by homodyne detection, 1 measures Y, 2 counts photons.  Detector efficiency
enters as a loss channel on every mode before any measurement.  Counting
events go undetected with probability ``1 - p_d`` and are then recorded as 0.

For the second family the report carries two bounds: the naive one built from
the zero-assigned counts, and the full local-hidden-variable bound
``prod_j [p_jD <N_j>_D + (1 - p_jD) <X_j^2 + Y_j^2>]``.  No such bound is
available for the first family, whose corrected bound equals the naive one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InsufficientSamplesError
from .fock import FockTensor, apply_loss_all
from .inequalities import FAMILIES, FIRST, SECOND, InequalityReport
from .sampling import (
    COUNT,
    DEFAULT_POINTS,
    REQUIRED,
    SampleBatch,
    cell_ingredients,
    estimate_ingredients,
    quadrature_pdf,
    rng_stream,
    sample_counts,
    sample_quadrature,
    sampled_report,
)
from .states import StateSpec, build

# R -> homodyne phase (None = photon counting)
SETTING_PHASES = (0.0, math.pi / 2, None)
SETTING_LABELS = ("X", "Y", COUNT)
UNIFORM = (1 / 3, 1 / 3, 1 / 3)
ASSIGN_ZERO = "assign-zero"


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one simulated run.

    ``setting_probs`` gives the distribution of ``R`` for each observer.
    ``shards`` splits the trials into independently seeded pieces that are
    merged in shard order.
    """

    state: StateSpec
    family: str = SECOND
    eta: float = 1.0
    p_d: float = 1.0
    setting_probs: tuple = (UNIFORM, UNIFORM)
    trials: int = 100_000
    seed: int = 0
    shards: int = 1
    min_cell: int = 100
    sigma: float = 3.0
    points: int = DEFAULT_POINTS
    half_width: float | None = None
    undetected_policy: str = ASSIGN_ZERO

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for name in ("eta", "p_d"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        probs = tuple(tuple(float(p) for p in row) for row in self.setting_probs)
        if len(probs) != 2 or any(len(row) != 3 for row in probs):
            raise ValueError("setting_probs needs three probabilities for each of two observers")
        for row in probs:
            if min(row) < 0 or not math.isclose(sum(row), 1.0, abs_tol=1e-12):
                raise ValueError(f"setting probabilities {row} do not form a distribution")
        object.__setattr__(self, "setting_probs", probs)
        if self.trials < 1 or self.shards < 1:
            raise ValueError("trials and shards must be positive")
        if self.undetected_policy != ASSIGN_ZERO:
            raise ValueError("only the assign-zero policy for undetected events is supported")

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "family": self.family,
            "eta": self.eta,
            "p_d": self.p_d,
            "setting_probs": [list(r) for r in self.setting_probs],
            "trials": self.trials,
            "seed": self.seed,
            "shards": self.shards,
            "min_cell": self.min_cell,
            "sigma": self.sigma,
            "points": self.points,
            "half_width": self.half_width,
            "undetected_policy": self.undetected_policy,
        }


@dataclass(frozen=True)
class LoopholeReport:
    """Sampled Bell test with naive and detection-corrected bounds."""

    family: str
    trials: int
    lhs: float
    lhs_se: float
    naive_rhs: float
    naive_rhs_se: float
    corrected_rhs: float
    corrected_rhs_se: float
    sigma_naive: float
    sigma_corrected: float
    sigma_threshold: float
    p_d_observed: tuple[float, float]
    detected_mean: tuple[float, float]
    histogram: tuple[tuple[int, ...], ...]
    note: str = ""
    trial_log: "TrialLog | None" = field(default=None, repr=False, compare=False)

    @property
    def violated_naive(self) -> bool:
        return self.sigma_naive > self.sigma_threshold

    @property
    def violated_corrected(self) -> bool:
        return self.sigma_corrected > self.sigma_threshold

    @property
    def ratio(self) -> float:
        return self.lhs / self.corrected_rhs if self.corrected_rhs > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "trials": self.trials,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "naive_rhs": self.naive_rhs,
            "naive_rhs_se": self.naive_rhs_se,
            "corrected_rhs": self.corrected_rhs,
            "corrected_rhs_se": self.corrected_rhs_se,
            "violated_naive": self.violated_naive,
            "sigma_naive": self.sigma_naive,
            "violated_corrected": self.violated_corrected,
            "sigma_corrected": self.sigma_corrected,
            "sigma_threshold": self.sigma_threshold,
            "p_d_observed": list(self.p_d_observed),
            "detected_mean": list(self.detected_mean),
            "histogram": [list(row) for row in self.histogram],
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class TrialLog:
    """All trials of a run with the observers' setting choices ``R``."""

    batch: SampleBatch
    settings: np.ndarray

    def to_csv(self, fh) -> None:
        self.batch.to_csv(fh, {"R_1": self.settings[:, 0], "R_2": self.settings[:, 1]})


def mismatched_trial_policy(batch: SampleBatch) -> dict:
    """How each setting pair in ``batch`` is used.

    Matched pairs (homodyne/homodyne, count/count) feed correlators; a pair
    where one side homodynes and the other counts feeds only single-mode
    marginals.  Every trial lands in exactly one cell.
    """
    usage = {}
    pairs, counts = np.unique(batch.settings, axis=0, return_counts=True)
    for (s1, s2), n in zip(pairs.tolist(), counts.tolist()):
        fed = cell_ingredients(s1, s2)
        usage[(s1, s2)] = {
            "trials": int(n),
            "correlators": [k for k in fed if k in ("xx", "yy", "xy", "yx", "n1n2")],
            "marginals": [k for k in fed if k not in ("xx", "yy", "xy", "yx", "n1n2")],
        }
    return usage


class _Measurements:
    """Outcome distributions of one state, computed once per setting pair."""

    def __init__(self, state: FockTensor, points: int, half_width: float | None):
        self.state = state
        self.points = points
        self.half_width = half_width
        self.joint_pdf = lru_cache(maxsize=None)(self._joint_pdf)
        self.conditional = lru_cache(maxsize=None)(self._conditional)

    def _joint_pdf(self, theta1: float, theta2: float):
        return quadrature_pdf(self.state, (theta1, theta2), points=self.points, half_width=self.half_width)

    def _conditional(self, hom_mode: int, theta: float):
        """Count distribution on the other mode and the homodyne pdf given each count."""
        t = self.state.to_mixed().tensor()
        count_mode = 3 - hom_mode
        d = self.state.dims[count_mode - 1]
        probs, pdfs = np.zeros(d), []
        for n in range(d):
            block = t[:, n, :, n] if hom_mode == 1 else t[n, :, n, :]
            p = float(np.trace(block).real)
            probs[n] = max(p, 0.0)
            if p > 1e-15:
                cond = FockTensor((self.state.cutoffs[hom_mode - 1],), block / p, "mixed")
                pdfs.append(quadrature_pdf(cond, (theta,), points=self.points, half_width=self.half_width))
            else:
                pdfs.append(None)
        return probs / probs.sum(), pdfs


def _shard_sizes(trials: int, shards: int) -> list[int]:
    base, extra = divmod(trials, shards)
    return [base + (s < extra) for s in range(shards)]


def _run_shard(meas: _Measurements, config: ExperimentConfig, shard: int, n: int):
    seed = config.seed
    rng = rng_stream(seed, (shard, 0))
    R = np.stack([rng.choice(3, size=n, p=config.setting_probs[j]) for j in range(2)], axis=1)
    labels = np.array(SETTING_LABELS, dtype="<U24")[R]
    outcomes = np.zeros((n, 2))
    for r1 in range(3):
        for r2 in range(3):
            idx = np.flatnonzero((R[:, 0] == r1) & (R[:, 1] == r2))
            if idx.size == 0:
                continue
            stream = (shard, 1 + 3 * r1 + r2)
            th1, th2 = SETTING_PHASES[r1], SETTING_PHASES[r2]
            if th1 is not None and th2 is not None:
                outcomes[idx] = sample_quadrature(meas.joint_pdf(th1, th2), idx.size, seed, stream).outcomes
            elif th1 is None and th2 is None:
                outcomes[idx] = sample_counts(meas.state, 1.0, idx.size, seed, stream).outcomes
            else:
                hom, theta = (1, th1) if th1 is not None else (2, th2)
                probs, pdfs = meas.conditional(hom, theta)
                counts = rng_stream(seed, stream).choice(probs.size, size=idx.size, p=probs)
                outcomes[idx, 2 - hom] = counts
                for value in np.unique(counts):
                    sel = idx[counts == value]
                    draw = sample_quadrature(pdfs[value], sel.size, seed, stream + (1 + int(value),))
                    outcomes[sel, hom - 1] = draw.outcomes[:, 0]
    counting = R == 2
    detected = np.ones((n, 2), bool)
    miss = rng_stream(seed, (shard, 10)).random((n, 2)) >= config.p_d
    detected[counting & miss] = False
    outcomes[~detected] = 0.0
    return SampleBatch(labels, outcomes, detected, seed, (shard,)), R


def simulate_trials(config: ExperimentConfig, workers: int = 1) -> TrialLog:
    """Generate every trial of the run (shards merged in shard order)."""
    state = build(config.state)
    if state.num_modes != 2:
        raise ValueError("simulated Bell tests use two-mode states")
    if config.eta < 1.0:
        state = apply_loss_all(state, config.eta)
    meas = _Measurements(state, config.points, config.half_width)
    sizes = _shard_sizes(config.trials, config.shards)
    jobs = [(s, n) for s, n in enumerate(sizes) if n > 0]
    if workers > 1 and len(jobs) > 1:
        # Warm the shared caches so worker threads only read them.
        for th1 in (0.0, math.pi / 2):
            for th2 in (0.0, math.pi / 2):
                meas.joint_pdf(th1, th2)
        for hom in (1, 2):
            for theta in (0.0, math.pi / 2):
                meas.conditional(hom, theta)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _run_shard(meas, config, *job), jobs))
    else:
        parts = [_run_shard(meas, config, *job) for job in jobs]
    batch = SampleBatch.concat(p[0] for p in parts)
    return TrialLog(batch, np.concatenate([p[1] for p in parts]))


def run_experiment(config: ExperimentConfig, workers: int = 1, keep_trials: bool = False) -> LoopholeReport:
    """Simulate the randomized-setting Bell test and assemble both bounds."""
    log = simulate_trials(config, workers)
    R = log.settings
    hist = np.zeros((3, 3), int)
    np.add.at(hist, (R[:, 0], R[:, 1]), 1)
    p1, p2 = config.setting_probs
    thin = [
        f"(R1={a}, R2={b}): {hist[a, b]}"
        for a in range(3)
        for b in range(3)
        if p1[a] * p2[b] > 0 and hist[a, b] < config.min_cell
    ]
    if thin:
        raise InsufficientSamplesError(f"setting cells below {config.min_cell} trials: " + ", ".join(thin))

    required = REQUIRED + (("d1", "d2", "x1sq", "y1sq", "x2sq", "y2sq") if config.family == SECOND else ())
    ing = estimate_ingredients(log.batch, required)
    naive = sampled_report(ing, config.family, config.sigma, corrected=False)
    corrected = sampled_report(ing, config.family, config.sigma, corrected=config.family == SECOND)
    note = "" if config.family == SECOND else "no detection-corrected bound for the first family; corrected = naive"

    def detected_mean(j):
        d = ing.value(f"d{j}") if f"d{j}" in ing else 1.0
        return ing.value(f"n{j}") / d if d > 0 else math.nan

    return LoopholeReport(
        family=config.family,
        trials=config.trials,
        lhs=naive.lhs,
        lhs_se=naive.lhs_se,
        naive_rhs=naive.rhs,
        naive_rhs_se=naive.rhs_se,
        corrected_rhs=corrected.rhs,
        corrected_rhs_se=corrected.rhs_se,
        sigma_naive=_sigma(naive),
        sigma_corrected=_sigma(corrected),
        sigma_threshold=config.sigma,
        p_d_observed=tuple(ing.value(f"d{j}") if f"d{j}" in ing else 1.0 for j in (1, 2)),
        detected_mean=(detected_mean(1), detected_mean(2)),
        histogram=tuple(tuple(int(v) for v in row) for row in hist),
        note=note,
        trial_log=log if keep_trials else None,
    )


def _sigma(report: InequalityReport) -> float:
    if report.gap_se and report.gap_se > 0:
        return (report.lhs - report.rhs) / report.gap_se
    return math.inf if report.lhs > report.rhs else -math.inf
