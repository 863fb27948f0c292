"""Wave/particle Bell inequalities with ``C_j = a_j``.

first family, bipartition k::

    |< a_1..a_k a_{k+1}^dag..a_N^dag >|^2  <=  < N_1 N_2 ... N_N >

second family, bipartition k::

    |< a_1 a_2 ... a_N >|^2  <=  < N_1..N_k > < N_{k+1}..N_N >

For two modes the left-hand sides can be assembled from local homodyne
correlators, see :func:`lhs_first_from_quadratures` and
:func:`lhs_second_from_quadratures`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockTensor, annihilate, create, expect, number, quadrature

FIRST = "first"
SECOND = "second"
FAMILIES = (FIRST, SECOND)

ANALYTIC_TOL = 1e-10
ZERO_RHS = 1e-14


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one inequality evaluation.

    For sampled reports ``tol`` is the sigma multiplier times ``gap_se``, the
    standard error of ``lhs - rhs``.
    """

    family: str
    num_modes: int
    k: int
    lhs: float
    rhs: float
    tol: float = ANALYTIC_TOL
    source: str = "analytic"
    lhs_se: float | None = None
    rhs_se: float | None = None
    gap_se: float | None = None

    @property
    def violated(self) -> bool:
        return self.lhs - self.rhs > self.tol

    @property
    def ratio(self) -> float:
        if abs(self.rhs) < ZERO_RHS:
            return math.inf if self.lhs > self.tol else math.nan
        return self.lhs / self.rhs

    @property
    def sigma(self) -> float | None:
        """Violation significance ``(lhs - rhs) / gap_se`` for sampled reports."""
        if not self.gap_se:
            return None
        return (self.lhs - self.rhs) / self.gap_se

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "N": self.num_modes,
            "k": self.k,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": format_float(self.ratio),
            "violated": self.violated,
            "sigma": self.sigma,
            "source": self.source,
        }


def format_float(x: float):
    """Floats for JSON/CSV: infinities and NaN become strings."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _check_partition(state: FockTensor, k: int) -> None:
    if state.num_modes < 2:
        raise ValueError("inequalities need at least two modes")
    if not 1 <= k <= state.num_modes - 1:
        raise ValueError(f"partition k={k} must lie in 1..{state.num_modes - 1}")


def _numbers(state: FockTensor, modes) -> float:
    return expect(state, [number(m, state.cutoffs[m - 1]) for m in modes]).real


def first_family_ops(state: FockTensor, k: int):
    n = state.num_modes
    c = state.cutoffs
    return [annihilate(i, c[i - 1]) for i in range(1, k + 1)] + [create(j, c[j - 1]) for j in range(k + 1, n + 1)]


def eval_first(state: FockTensor, k: int = 1, tol: float = ANALYTIC_TOL) -> InequalityReport:
    """``|<prod_{i<=k} a_i prod_{j>k} a_j^dag>|^2`` against ``<prod_i N_i>``."""
    _check_partition(state, k)
    lhs = abs(expect(state, first_family_ops(state, k)).value) ** 2
    rhs = _numbers(state, range(1, state.num_modes + 1))
    return InequalityReport(FIRST, state.num_modes, k, float(lhs), float(rhs), tol)


def eval_second(state: FockTensor, k: int = 1, tol: float = ANALYTIC_TOL) -> InequalityReport:
    """``|<prod_i a_i>|^2`` against ``<prod_{i<=k} N_i> <prod_{j>k} N_j>``."""
    _check_partition(state, k)
    n = state.num_modes
    ops = [annihilate(i, state.cutoffs[i - 1]) for i in range(1, n + 1)]
    lhs = abs(expect(state, ops).value) ** 2
    rhs = _numbers(state, range(1, k + 1)) * _numbers(state, range(k + 1, n + 1))
    return InequalityReport(SECOND, n, k, float(lhs), float(rhs), tol)


def evaluate(state: FockTensor, family: str, k: int = 1, tol: float = ANALYTIC_TOL) -> InequalityReport:
    if family == FIRST:
        return eval_first(state, k, tol)
    if family == SECOND:
        return eval_second(state, k, tol)
    raise ValueError(f"unknown family {family!r}")


def evaluate_all(state: FockTensor, families=FAMILIES, tol: float = ANALYTIC_TOL) -> list[InequalityReport]:
    """Every requested family at every bipartition ``k = 1..N-1``."""
    return [evaluate(state, f, k, tol) for f in families for k in range(1, state.num_modes)]


def lhs_first_from_quadratures(xx, yy, xy, yx):
    """``|<a_1 a_2^dag>|^2 = (<X1X2> + <Y1Y2>)^2 + (<X1Y2> - <Y1X2>)^2``."""
    return (xx + yy) ** 2 + (xy - yx) ** 2


def lhs_second_from_quadratures(xx, yy, xy, yx):
    """``|<a_1 a_2>|^2 = (<X1X2> - <Y1Y2>)^2 + (<X1Y2> + <Y1X2>)^2``."""
    return (xx - yy) ** 2 + (xy + yx) ** 2


def quadrature_correlators(state: FockTensor) -> dict[str, float]:
    """The four local homodyne correlators ``<X1X2>, <Y1Y2>, <X1Y2>, <Y1X2>``."""
    if state.num_modes != 2:
        raise ValueError("quadrature decomposition is defined for two modes")
    c1, c2 = state.cutoffs
    half = np.pi / 2
    q = {
        (1, "X"): quadrature(1, c1, 0.0),
        (1, "Y"): quadrature(1, c1, half),
        (2, "X"): quadrature(2, c2, 0.0),
        (2, "Y"): quadrature(2, c2, half),
    }
    return {
        f"{s1}{s2}".lower(): expect(state, [q[1, s1], q[2, s2]]).real
        for s1, s2 in (("X", "X"), ("Y", "Y"), ("X", "Y"), ("Y", "X"))
    }


def quadrature_decomposition_first(state: FockTensor) -> float:
    return float(lhs_first_from_quadratures(**quadrature_correlators(state)))


def quadrature_decomposition_second(state: FockTensor) -> float:
    return float(lhs_second_from_quadratures(**quadrature_correlators(state)))
