"""Simulated homodyne and photon-counting measurements.

Homodyne outcomes are drawn from the quadrature distribution evaluated on a
uniform grid (inverse-CDF over grid cells plus uniform jitter inside the
chosen cell).  Photon counts are drawn from the Fock diagonal and thinned
binomially with the detector efficiency.

Random numbers come from numpy's Philox4x32 counter-based generator keyed by
``SeedSequence(seed, spawn_key=stream)``: every ``(seed, stream)`` pair gives
an independent stream that reproduces bit for bit across platforms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GridOverflowError, InsufficientSamplesError
from .fock import FockTensor, apply_local, partial_trace
from .inequalities import FIRST, SECOND, InequalityReport, lhs_first_from_quadratures, lhs_second_from_quadratures

DEFAULT_POINTS = 2048
DEFAULT_HALF_WIDTH = 8.0
TAIL_MASS_TOL = 1e-9
EIG_DROP = 1e-12

COUNT = "count"


def rng_stream(seed: int, stream=0) -> np.random.Generator:
    """Independent Philox stream for ``(seed, stream)``; ``stream`` may be a tuple of ints."""
    key = tuple(int(s) for s in np.atleast_1d(stream))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def setting_label(theta: float | None) -> str:
    """``"X"``, ``"Y"``, ``"H(theta)"`` for homodyne, ``"count"`` for ``None``."""
    if theta is None:
        return COUNT
    if theta == 0:
        return "X"
    if math.isclose(theta, math.pi / 2, rel_tol=0, abs_tol=1e-15):
        return "Y"
    return f"H({theta:.12g})"


def oscillator_functions(x: np.ndarray, cutoff: int) -> np.ndarray:
    """Eigenfunctions ``<x|n>`` of the quadrature ``X = (a + a^dag)/2``, shape ``(cutoff+1, len(x))``.

    Uses the stable three-term recurrence for normalised Hermite functions in
    ``q = sqrt(2) x`` and the Jacobian factor ``2^{1/4}``.
    """
    q = np.sqrt(2.0) * np.asarray(x, dtype=float)
    out = np.empty((cutoff + 1, q.size))
    out[0] = np.pi ** -0.25 * np.exp(-(q**2) / 2)
    if cutoff >= 1:
        out[1] = np.sqrt(2.0) * q * out[0]
    for n in range(1, cutoff):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * q * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out * 2**0.25


@dataclass(frozen=True, eq=False)
class GridPdf:
    """Quadrature distribution of one or two modes on a uniform grid ``[-L, L]``.

    ``probabilities`` holds cell masses (summing to one) with one axis per mode.
    """

    grid: np.ndarray
    probabilities: np.ndarray
    thetas: tuple[float, ...]
    modes: tuple[int, ...] = (1,)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def ndim(self) -> int:
        return self.probabilities.ndim

    @cached_property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probabilities.ravel())

    def moment(self, *powers: int) -> float:
        """``E[x_1^p_1 x_2^p_2 ...]`` under the grid distribution."""
        if len(powers) != self.ndim:
            raise ValueError(f"need {self.ndim} powers")
        p = self.probabilities
        for axis, power in enumerate(powers):
            shape = [1] * self.ndim
            shape[axis] = -1
            p = p * (self.grid**power).reshape(shape)
        return float(p.sum())


def _grid(points: int, half_width: float) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


def _density(state: FockTensor, x: np.ndarray) -> np.ndarray:
    phis = [oscillator_functions(x, c) for c in state.cutoffs]
    if state.is_pure:
        c = state.tensor()
        if state.num_modes == 1:
            return np.abs(phis[0].T @ c) ** 2
        return np.abs(phis[0].T @ c @ phis[1]) ** 2
    rho = state.data
    if state.num_modes == 1:
        return np.einsum("mx,mn,nx->x", phis[0], rho, phis[0]).real
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > EIG_DROP
    d1, d2 = state.dims
    if 4 * keep.sum() <= d2 * d2:
        dens = np.zeros((x.size, x.size))
        for weight, vec in zip(w[keep], v[:, keep].T):
            dens += weight * np.abs(phis[0].T @ vec.reshape(d1, d2) @ phis[1]) ** 2
        return dens
    # Dense contraction: p(x1,x2) = sum rho[m,n,m',n'] phi_m phi_m' (x1) phi_n phi_n' (x2)
    r = state.tensor().transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    a1 = np.einsum("mx,kx->xmk", phis[0], phis[0]).reshape(x.size, d1 * d1)
    a2 = np.einsum("nx,kx->xnk", phis[1], phis[1]).reshape(x.size, d2 * d2)
    # a1, a2 are real and rho Hermitian, so only the real part survives.
    return (a1 @ r.real) @ a2.T


def quadrature_pdf(
    state: FockTensor,
    thetas: Sequence[float],
    modes: Sequence[int] | None = None,
    points: int = DEFAULT_POINTS,
    half_width: float | None = None,
) -> GridPdf:
    """Joint distribution of the quadratures ``X_theta_j`` of at most two modes.

    Other modes are traced out.  Each mode is rotated by ``exp(-i theta N)``
    and the position-representation density is evaluated on the grid.
    """
    modes = tuple(range(1, state.num_modes + 1)) if modes is None else tuple(modes)
    thetas = tuple(float(t) for t in np.atleast_1d(thetas))
    if not 1 <= len(modes) <= 2:
        raise ValueError("joint quadrature sampling is limited to two modes")
    if len(thetas) != len(modes):
        raise ValueError("need one phase per sampled mode")
    if len(modes) < state.num_modes:
        state = partial_trace(state, modes)
    support = 1.2 * math.sqrt(max(state.cutoffs) + 1)
    if half_width is None:
        half_width = max(DEFAULT_HALF_WIDTH, support)
    elif half_width < support:
        raise ValueError(f"grid half-width {half_width} below support bound {support:.3g}")
    rot = {
        m: np.diag(np.exp(-1j * theta * np.arange(c + 1)))
        for m, (theta, c) in enumerate(zip(thetas, state.cutoffs), start=1)
        if theta != 0
    }
    state = apply_local(state, rot)
    x = _grid(points, half_width)
    dx = x[1] - x[0]
    density = np.clip(_density(state, x), 0.0, None)
    mass = density.sum() * dx ** len(modes)
    if 1 - mass > TAIL_MASS_TOL:
        raise GridOverflowError(f"{1 - mass:.3g} of the probability lies outside [-{half_width}, {half_width}]")
    return GridPdf(x, density / density.sum(), thetas, modes)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Per-trial measurement record.

    ``settings`` holds labels (``"X"``, ``"Y"``, ``"H(theta)"`` or ``"count"``),
    ``outcomes`` quadrature values or photon counts, ``detected`` the counting
    detector flags (always true for homodyne).  Rows are trials, columns modes.
    """

    settings: np.ndarray
    outcomes: np.ndarray
    detected: np.ndarray
    seed: int | None = None
    stream: tuple = field(default=())

    def __post_init__(self):
        if not (self.settings.shape == self.outcomes.shape == self.detected.shape):
            raise ValueError("settings, outcomes and detected must share one shape")

    def __len__(self):
        return self.outcomes.shape[0]

    @property
    def num_modes(self) -> int:
        return self.outcomes.shape[1]

    @classmethod
    def concat(cls, batches: Iterable["SampleBatch"]) -> "SampleBatch":
        batches = list(batches)
        if not batches:
            raise ValueError("nothing to concatenate")
        first = batches[0]
        return cls(
            np.concatenate([b.settings for b in batches]),
            np.concatenate([b.outcomes for b in batches]),
            np.concatenate([b.detected for b in batches]),
            first.seed,
            first.stream,
        )

    def take(self, index) -> "SampleBatch":
        return SampleBatch(self.settings[index], self.outcomes[index], self.detected[index], self.seed, self.stream)

    def csv_rows(self):
        """Rows ``trial, setting_j..., outcome_j..., detected_j...`` as strings."""
        count = self.settings == COUNT
        for t in range(len(self)):
            outs = [
                str(int(o)) if c else repr(float(o)) for o, c in zip(self.outcomes[t], count[t])
            ]
            yield [str(t), *self.settings[t].tolist(), *outs, *[str(int(d)) for d in self.detected[t]]]

    def csv_header(self) -> list[str]:
        m = range(1, self.num_modes + 1)
        return ["trial", *[f"setting_{j}" for j in m], *[f"outcome_{j}" for j in m], *[f"detected_{j}" for j in m]]

    def to_csv(self, fh, extra: dict[str, np.ndarray] | None = None) -> None:
        extra = extra or {}
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.csv_header() + list(extra))
        cols = [np.asarray(v) for v in extra.values()]
        for t, row in enumerate(self.csv_rows()):
            writer.writerow(row + [str(c[t]) for c in cols])


def _labels(n: int, labels: Sequence[str]) -> np.ndarray:
    return np.tile(np.array(labels, dtype="<U24"), (n, 1))


def sample_quadrature(pdf: GridPdf, n: int, seed: int, stream=0) -> SampleBatch:
    """Draw ``n`` i.i.d. quadrature tuples from a grid distribution."""
    if n < 1:
        raise ValueError("need at least one trial")
    rng = rng_stream(seed, stream)
    cdf = pdf.cdf
    idx = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    idx = np.minimum(idx, cdf.size - 1)
    cells = np.unravel_index(idx, pdf.probabilities.shape)
    jitter = (rng.random((n, pdf.ndim)) - 0.5) * pdf.spacing
    outcomes = np.stack([pdf.grid[c] for c in cells], axis=1) + jitter
    labels = [setting_label(t) for t in pdf.thetas]
    return SampleBatch(_labels(n, labels), outcomes, np.ones((n, pdf.ndim), bool), seed, tuple(np.atleast_1d(stream)))


def sample_counts(state: FockTensor, eta: float, n: int, seed: int, stream=0) -> SampleBatch:
    """Photon counts from the Fock diagonal, each photon kept with probability ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    if n < 1:
        raise ValueError("need at least one trial")
    rng = rng_stream(seed, stream)
    p = np.clip(state.probabilities().ravel(), 0.0, None)
    idx = rng.choice(p.size, size=n, p=p / p.sum())
    counts = np.stack(np.unravel_index(idx, state.dims), axis=1)
    if eta < 1.0:
        counts = rng.binomial(counts, eta)
    m = state.num_modes
    return SampleBatch(_labels(n, [COUNT] * m), counts.astype(float), np.ones((n, m), bool), seed, tuple(np.atleast_1d(stream)))


# Ingredient name -> (setting of mode 1, setting of mode 2, value).  ``None`` is "any".
_PRODUCT = "product"
INGREDIENT_TABLE = {
    "xx": ("X", "X", _PRODUCT),
    "yy": ("Y", "Y", _PRODUCT),
    "xy": ("X", "Y", _PRODUCT),
    "yx": ("Y", "X", _PRODUCT),
    "n1n2": (COUNT, COUNT, _PRODUCT),
    "n1": (COUNT, None, "o1"),
    "n2": (None, COUNT, "o2"),
    "d1": (COUNT, None, "d1"),
    "d2": (None, COUNT, "d2"),
    "x1sq": ("X", None, "o1sq"),
    "y1sq": ("Y", None, "o1sq"),
    "x2sq": (None, "X", "o2sq"),
    "y2sq": (None, "Y", "o2sq"),
}
REQUIRED = ("xx", "yy", "xy", "yx", "n1n2", "n1", "n2")
CORRELATORS = ("xx", "yy", "xy", "yx", "n1n2")


def cell_ingredients(setting_1: str, setting_2: str) -> tuple[str, ...]:
    """Ingredients a trial with the given setting pair contributes to."""
    return tuple(
        name
        for name, (s1, s2, _) in INGREDIENT_TABLE.items()
        if (s1 is None or s1 == setting_1) and (s2 is None or s2 == setting_2)
    )


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int


@dataclass(frozen=True, eq=False)
class Ingredients:
    """Sample means of the ingredients with their joint covariance matrix."""

    names: tuple[str, ...]
    mean: np.ndarray
    cov: np.ndarray
    counts: dict

    def __contains__(self, name):
        return name in self.names

    def __getitem__(self, name) -> Estimate:
        i = self.names.index(name)
        return Estimate(float(self.mean[i]), float(np.sqrt(max(self.cov[i, i], 0.0))), self.counts[name])

    def value(self, name) -> float:
        return float(self.mean[self.names.index(name)])

    def variance(self, grad: dict) -> float:
        g = np.zeros(len(self.names))
        for name, coeff in grad.items():
            g[self.names.index(name)] += coeff
        return float(max(g @ self.cov @ g, 0.0))


def _trial_values(batch: SampleBatch, how: str) -> np.ndarray:
    o = batch.outcomes
    return {
        _PRODUCT: lambda: o[:, 0] * o[:, 1],
        "o1": lambda: o[:, 0],
        "o2": lambda: o[:, 1],
        "o1sq": lambda: o[:, 0] ** 2,
        "o2sq": lambda: o[:, 1] ** 2,
        "d1": lambda: batch.detected[:, 0].astype(float),
        "d2": lambda: batch.detected[:, 1].astype(float),
    }[how]()


def estimate_ingredients(batches, required: Sequence[str] = REQUIRED) -> Ingredients:
    """Means and covariance of every ingredient present in two-mode batches.

    Each ingredient is the mean over all trials whose setting pair feeds it
    (see :func:`cell_ingredients`); covariances between ingredients sharing
    trials are kept so that derived quantities get correct standard errors.
    """
    batch = SampleBatch.concat([batches] if isinstance(batches, SampleBatch) else batches)
    if batch.num_modes != 2:
        raise ValueError("ingredient estimation needs two-mode batches")
    s1, s2 = batch.settings[:, 0], batch.settings[:, 1]
    names, centred, counts, means = [], [], {}, []
    missing = []
    for name, (a, b, how) in INGREDIENT_TABLE.items():
        mask = np.ones(len(batch), bool)
        if a is not None:
            mask &= s1 == a
        if b is not None:
            mask &= s2 == b
        n = int(mask.sum())
        if n < 2:
            if name in required:
                missing.append(f"{name} (settings {a or 'any'}, {b or 'any'}; {n} trials)")
            continue
        vals = _trial_values(batch, how)
        mu = vals[mask].mean()
        names.append(name)
        means.append(mu)
        counts[name] = n
        centred.append(np.where(mask, vals - mu, 0.0))
    if missing:
        raise InsufficientSamplesError("missing setting combinations: " + "; ".join(missing))
    V = np.array(centred)
    n = np.array([counts[k] for k in names], float)
    cov = (V @ V.T) / np.outer(n, n)
    cov[np.diag_indices_from(cov)] *= n / (n - 1)
    return Ingredients(tuple(names), np.array(means), cov, counts)


def _lhs_terms(ing: Ingredients, family: str):
    xx, yy, xy, yx = (ing.value(k) for k in ("xx", "yy", "xy", "yx"))
    if family == FIRST:
        gu, gv = {"xx": 1, "yy": 1}, {"xy": 1, "yx": -1}
        lhs = lhs_first_from_quadratures(xx, yy, xy, yx)
    else:
        gu, gv = {"xx": 1, "yy": -1}, {"xy": 1, "yx": 1}
        lhs = lhs_second_from_quadratures(xx, yy, xy, yx)
    u = sum(c * ing.value(k) for k, c in gu.items())
    v = sum(c * ing.value(k) for k, c in gv.items())
    grad = {}
    for g, amp in ((gu, u), (gv, v)):
        for k, c in g.items():
            grad[k] = grad.get(k, 0.0) + 2 * amp * c
    # Second-order term: the square of a noisy mean is biased by its variance.
    extra = 2 * ing.variance(gu) ** 2 + 2 * ing.variance(gv) ** 2
    return float(lhs), grad, extra


def _mode_intensity(ing: Ingredients, j: int):
    """``p_D <N_j>_D + (1 - p_D) <X_j^2 + Y_j^2>`` with undetected counts recorded as 0."""
    n, d, x, y = (f"n{j}", f"d{j}", f"x{j}sq", f"y{j}sq")
    for name in (d, x, y):
        if name not in ing:
            raise InsufficientSamplesError(f"corrected bound needs ingredient {name}")
    hom = ing.value(x) + ing.value(y)
    pd = ing.value(d)
    value = ing.value(n) + (1 - pd) * hom
    grad = {n: 1.0, d: -hom, x: 1 - pd, y: 1 - pd}
    return value, grad


def _rhs_terms(ing: Ingredients, family: str, corrected: bool):
    if family == FIRST:
        return ing.value("n1n2"), {"n1n2": 1.0}, 0.0
    if corrected:
        (c1, g1), (c2, g2) = _mode_intensity(ing, 1), _mode_intensity(ing, 2)
    else:
        c1, g1 = ing.value("n1"), {"n1": 1.0}
        c2, g2 = ing.value("n2"), {"n2": 1.0}
    grad = {}
    for g, other in ((g1, c2), (g2, c1)):
        for k, c in g.items():
            grad[k] = grad.get(k, 0.0) + c * other
    extra = ing.variance(g1) * ing.variance(g2)
    return c1 * c2, grad, extra


def sampled_report(ing: Ingredients, family: str, sigma: float = 3.0, corrected: bool = False) -> InequalityReport:
    """Inequality report from sampled ingredients.

    The verdict requires ``lhs - rhs > sigma * SE(lhs - rhs)``.  With
    ``corrected`` the second-family bound is the full local-hidden-variable
    expression that accounts for undetected counting events.
    """
    if family not in (FIRST, SECOND):
        raise ValueError(f"unknown family {family!r}")
    lhs, gl, el = _lhs_terms(ing, family)
    rhs, gr, er = _rhs_terms(ing, family, corrected)
    gap = dict(gl)
    for k, c in gr.items():
        gap[k] = gap.get(k, 0.0) - c
    gap_se = math.sqrt(ing.variance(gap) + el + er)
    return InequalityReport(
        family,
        2,
        1,
        float(lhs),
        float(rhs),
        tol=sigma * gap_se,
        source="sampled",
        lhs_se=math.sqrt(ing.variance(gl) + el),
        rhs_se=math.sqrt(ing.variance(gr) + er),
        gap_se=gap_se,
    )
