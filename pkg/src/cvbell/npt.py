"""Partial-transpose spectra and the PT positivity conditions behind both families.

Expectations on a partially transposed state are computed without forming it,
through ``<O_A O_B>_{rho^T_B} = <O_A O_B^T>_rho`` where the transpose (equal to
``O_B^{dag *}``) is taken in the Fock basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .fock import FockTensor, expect_local, hermitian_spectrum, partial_transpose, _lowering
from .inequalities import FIRST, SECOND, _check_partition, evaluate

NPT_TOL = 1e-10


@dataclass(frozen=True)
class PTReport:
    """Spectrum summary of a partially transposed state.

    ``negativity`` (sum of the moduli of negative eigenvalues) is a graded
    extension; the inequalities only ever use the sign of ``min_eig``.
    """

    min_eig: float
    negativity: float
    partition: tuple[int, ...]
    tol: float = NPT_TOL

    @property
    def is_npt(self) -> bool:
        return self.min_eig < -self.tol

    def to_dict(self) -> dict:
        return {
            "partition": list(self.partition),
            "min_eig": self.min_eig,
            "negativity": self.negativity,
            "is_npt": self.is_npt,
        }


def pt_report(state: FockTensor, modes=None, tol: float = NPT_TOL) -> PTReport:
    """Diagonalise the partial transpose on ``modes`` (default: every mode but the first)."""
    if modes is None:
        modes = range(2, state.num_modes + 1)
    pt = partial_transpose(state, modes)
    eigs = hermitian_spectrum(pt.data)
    neg = eigs[eigs < -tol]
    return PTReport(
        min_eig=float(eigs[0]),
        negativity=float(-neg.sum()) if neg.size else 0.0,
        partition=tuple(sorted(set(int(m) for m in modes))),
        tol=tol,
    )


def pt_expect(state: FockTensor, mats_a: dict, mats_b: dict) -> complex:
    """``<O_A O_B>`` on the state partially transposed over the modes of ``mats_b``."""
    return expect_local(state, {**mats_a, **{m: mat.T for m, mat in mats_b.items()}})


def pt_moment_check(state: FockTensor, family: str, k: int = 1, atol: float = 1e-9) -> float:
    """``rhs - lhs`` of a family, rebuilt from ``<f^dag f>_PT >= 0`` ingredients.

    The second group (modes ``k+1..N``) is transposed.  With ``C = a`` and
    ``C* `` its Fock-basis conjugate, the first family uses
    ``f = A + B prod_{i<=k} C_i prod_{j>k} C_j*`` and the second
    ``f = A prod_{i<=k} C_i + B prod_{j>k} C_j*``.  The PT expectations are
    evaluated through the transpose rule and compared with the direct
    :func:`~cvbell.inequalities.evaluate` gap; a mismatch beyond ``atol``
    raises :class:`ConsistencyError`.
    """
    _check_partition(state, k)
    n = state.num_modes
    group_a = range(1, k + 1)
    group_b = range(k + 1, n + 1)
    c = {m: _lowering(state.cutoffs[m - 1]) for m in range(1, n + 1)}
    c_star = {m: c[m].conj() for m in group_b}

    if family == FIRST:
        amp = pt_expect(state, {i: c[i] for i in group_a}, c_star)
        norm = pt_expect(
            state,
            {i: c[i].conj().T @ c[i] for i in group_a},
            {j: c_star[j].conj().T @ c_star[j] for j in group_b},
        )
        gap = norm.real - abs(amp) ** 2
    elif family == SECOND:
        cross = pt_expect(state, {i: c[i].conj().T for i in group_a}, c_star)
        norm_a = pt_expect(state, {i: c[i].conj().T @ c[i] for i in group_a}, {})
        norm_b = pt_expect(state, {}, {j: c_star[j].conj().T @ c_star[j] for j in group_b})
        gap = norm_a.real * norm_b.real - abs(cross) ** 2
    else:
        raise ValueError(f"unknown family {family!r}")

    report = evaluate(state, family, k)
    direct = report.rhs - report.lhs
    if not np.isclose(gap, direct, rtol=0, atol=atol):
        raise ConsistencyError(f"PT-rule gap {gap!r} differs from direct gap {direct!r}")
    return float(gap)
