"""Truncated multimode Fock space.

States, single-mode ladder/number/quadrature operators, expectation values,
the photon-loss channel, partial traces and partial transposition.

Index layout
------------
Modes are numbered from 1.  A state on modes 1..N with per-mode cutoffs
``(c_1, ..., c_N)`` lives on the basis ``{0..c_j}`` of each mode and is stored
row-major over modes with mode 1 slowest, i.e. the flat index of the
occupation tuple ``n`` is ``np.ravel_multi_index(n, dims)`` with
``dims = (c_1 + 1, ..., c_N + 1)``.  Pure states hold a length-``D`` amplitude
vector and mixed states a ``D x D`` density matrix, ``D = prod(dims)``.

Quadratures follow ``X = (a + a^dag) / 2`` and ``Y = (a - a^dag) / (2i)`` so
that ``a = X + iY`` and the vacuum variance is 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import comb

from .errors import DimensionError, NumericalError

PURE = "pure"
MIXED = "mixed"

# Mixed states store D^2 entries; pure ones only D.
MAX_DIM_MIXED = 4096
MAX_DIM_PURE = 1 << 17

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = 1e-10
EIG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FockTensor:
    """Immutable state on a truncated multimode Fock space.

    Parameters
    ----------
    cutoffs : sequence of int
        Maximum photon number kept in each mode.
    data : array_like
        Amplitude vector (``kind="pure"``) or density matrix
        (``kind="mixed"``).  Tensor-shaped input is flattened.
    kind : {"pure", "mixed"}
    """

    cutoffs: tuple[int, ...]
    data: np.ndarray
    kind: str = PURE

    def __post_init__(self):
        cutoffs = tuple(int(c) for c in np.atleast_1d(self.cutoffs))
        if not cutoffs or min(cutoffs) < 0:
            raise ValueError(f"cutoffs must be non-negative, got {cutoffs}")
        if self.kind not in (PURE, MIXED):
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        dim = math.prod(c + 1 for c in cutoffs)
        cap = MAX_DIM_PURE if self.kind == PURE else MAX_DIM_MIXED
        if dim > cap:
            raise DimensionError(
                f"{self.kind} state dimension {dim} exceeds cap {cap} (cutoffs={cutoffs})"
            )
        data = np.array(self.data, dtype=np.complex128)
        shape = (dim,) if self.kind == PURE else (dim, dim)
        if data.size != math.prod(shape):
            raise ValueError(f"data of size {data.size} does not fit a {self.kind} state of dimension {dim}")
        data = data.reshape(shape)
        data.setflags(write=False)
        object.__setattr__(self, "cutoffs", cutoffs)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_amplitudes(cls, amplitudes, cutoffs, normalize=True) -> "FockTensor":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize a zero vector")
            amps = amps / norm
        return cls(cutoffs, amps, PURE)

    @classmethod
    def from_density(cls, rho, cutoffs, normalize=False) -> "FockTensor":
        rho = np.asarray(rho, dtype=np.complex128)
        if normalize:
            rho = rho / np.trace(rho).real
        return cls(cutoffs, rho, MIXED)

    @classmethod
    def basis(cls, occupations, cutoffs=None) -> "FockTensor":
        """Fock basis state ``|n_1, ..., n_N>``."""
        occ = tuple(int(n) for n in occupations)
        cutoffs = occ if cutoffs is None else tuple(cutoffs)
        if len(cutoffs) != len(occ) or any(n > c for n, c in zip(occ, cutoffs)):
            raise ValueError(f"occupations {occ} do not fit cutoffs {cutoffs}")
        dims = tuple(c + 1 for c in cutoffs)
        amps = np.zeros(math.prod(dims), dtype=np.complex128)
        amps[np.ravel_multi_index(occ, dims)] = 1.0
        return cls(cutoffs, amps, PURE)

    @property
    def num_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def is_pure(self) -> bool:
        return self.kind == PURE

    def tensor(self) -> np.ndarray:
        """Data reshaped to ``dims`` (pure) or ``dims + dims`` (mixed)."""
        if self.is_pure:
            return self.data.reshape(self.dims)
        return self.data.reshape(self.dims + self.dims)

    def density(self) -> np.ndarray:
        """Density matrix, formed on demand for pure states."""
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_mixed(self) -> "FockTensor":
        if not self.is_pure:
            return self
        if self.dim > MAX_DIM_MIXED:
            raise DimensionError(
                f"density matrix of dimension {self.dim} exceeds cap {MAX_DIM_MIXED} (cutoffs={self.cutoffs})"
            )
        return FockTensor(self.cutoffs, self.density(), MIXED)

    def trace(self) -> float:
        if self.is_pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def probabilities(self) -> np.ndarray:
        """Joint photon-number distribution, shaped ``dims``."""
        if self.is_pure:
            p = np.abs(self.data) ** 2
        else:
            p = np.diagonal(self.data).real.copy()
        return p.reshape(self.dims)

    def check_physical(self) -> "FockTensor":
        """Raise :class:`NumericalError` unless the state is a valid quantum state."""
        if self.is_pure:
            norm = self.trace()
            if abs(norm - 1) > NORM_TOL:
                raise NumericalError(f"pure state norm {norm!r} differs from 1")
            return self
        rho = self.data
        asym = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if asym > HERMITIAN_TOL:
            raise NumericalError(f"density matrix not Hermitian (max asymmetry {asym:.3g})")
        tr = self.trace()
        if abs(tr - 1) > NORM_TOL:
            raise NumericalError(f"density matrix trace {tr!r} differs from 1")
        lam = min_eigenvalue(rho)
        if lam < -POSITIVITY_TOL:
            raise NumericalError(f"density matrix has negative eigenvalue {lam:.3g}")
        return self

    def __repr__(self):
        return f"FockTensor(kind={self.kind!r}, cutoffs={self.cutoffs})"


@dataclass(frozen=True)
class Expectation:
    """An expectation value, optionally with a variance proxy from sampling."""

    value: complex
    variance_proxy: float | None = None

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    @property
    def imag(self) -> float:
        return float(np.imag(self.value))

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(self.value)


ANNIHILATE = "annihilate"
CREATE = "create"
NUMBER = "number"
QUADRATURE = "quadrature"
_KINDS = (ANNIHILATE, CREATE, NUMBER, QUADRATURE)


@lru_cache(maxsize=None)
def _lowering(cutoff: int) -> np.ndarray:
    m = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(np.complex128)
    m.setflags(write=False)
    return m


def _phase(theta: float) -> complex:
    """``exp(-i theta)``, exact on quarter turns."""
    quarter = theta / (np.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return (1, -1j, -1, 1j)[k % 4]
    return complex(np.exp(-1j * theta))


@dataclass(frozen=True)
class ModeOp:
    """Single-mode operator acting on mode ``mode`` (1-based).

    ``quadrature`` at phase ``theta`` is ``(a e^{-i theta} + a^dag e^{i theta}) / 2``,
    so ``theta=0`` gives X and ``theta=pi/2`` gives Y.
    """

    mode: int
    kind: str
    cutoff: int
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.mode < 1:
            raise ValueError("mode indices are 1-based")
        if self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")

    @property
    def matrix(self) -> np.ndarray:
        a = _lowering(self.cutoff)
        if self.kind == ANNIHILATE:
            return a
        if self.kind == CREATE:
            return a.T.copy()
        if self.kind == NUMBER:
            return np.diag(np.arange(self.cutoff + 1, dtype=np.complex128))
        ph = _phase(self.theta)
        return (a * ph + a.T * np.conj(ph)) / 2

    def dagger(self) -> "ModeOp":
        swap = {ANNIHILATE: CREATE, CREATE: ANNIHILATE}
        return ModeOp(self.mode, swap.get(self.kind, self.kind), self.cutoff, self.theta)

    def transpose(self) -> "ModeOp":
        """Transpose in the Fock basis, which equals ``O^{dag *}``."""
        if self.kind == QUADRATURE:
            return ModeOp(self.mode, QUADRATURE, self.cutoff, -self.theta)
        return self.dagger()


def annihilate(mode: int, cutoff: int) -> ModeOp:
    return ModeOp(mode, ANNIHILATE, cutoff)


def create(mode: int, cutoff: int) -> ModeOp:
    return ModeOp(mode, CREATE, cutoff)


def number(mode: int, cutoff: int) -> ModeOp:
    return ModeOp(mode, NUMBER, cutoff)


def quadrature(mode: int, cutoff: int, theta: float = 0.0) -> ModeOp:
    return ModeOp(mode, QUADRATURE, cutoff, float(theta))


def _apply_axis(t: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(m, t, axes=(1, axis)), 0, axis)


def _check_modes(state: FockTensor, modes: Iterable[int]) -> None:
    for mode in modes:
        if not 1 <= mode <= state.num_modes:
            raise IndexError(f"mode {mode} out of range for a {state.num_modes}-mode state")


def local_products(state: FockTensor, ops: Sequence[ModeOp]) -> dict[int, np.ndarray]:
    """Multiply the listed operators mode by mode, preserving their order.

    Operators on different modes commute, so the ordered product ``O_1 O_2 ...``
    factorises into one matrix per mode.
    """
    mats: dict[int, np.ndarray] = {}
    for op in ops:
        _check_modes(state, [op.mode])
        if op.cutoff != state.cutoffs[op.mode - 1]:
            raise ValueError(
                f"operator cutoff {op.cutoff} does not match mode {op.mode} cutoff "
                f"{state.cutoffs[op.mode - 1]}"
            )
        m = op.matrix
        mats[op.mode] = mats[op.mode] @ m if op.mode in mats else m
    return mats


def expect_local(state: FockTensor, mats: Mapping[int, np.ndarray]) -> complex:
    """Expectation of a tensor product of per-mode matrices (identity elsewhere)."""
    _check_modes(state, mats)
    t = state.tensor()
    out = t
    for mode, m in mats.items():
        if m.shape != (state.dims[mode - 1],) * 2:
            raise ValueError(f"matrix shape {m.shape} does not match mode {mode}")
        out = _apply_axis(out, m, mode - 1)
    if state.is_pure:
        return complex(np.vdot(t.ravel(), out.ravel()))
    return complex(np.trace(out.reshape(state.dim, state.dim)))


def expect(state: FockTensor, ops: Sequence[ModeOp]) -> Expectation:
    """``<O_1 O_2 ... O_k>`` for the ordered operator product (leftmost first)."""
    return Expectation(expect_local(state, local_products(state, ops)))


def apply_local(state: FockTensor, mats: Mapping[int, np.ndarray]) -> FockTensor:
    """Conjugate the state by a product of single-mode matrices, ``U psi`` or ``U rho U^dag``."""
    _check_modes(state, mats)
    t = state.tensor()
    n = state.num_modes
    for mode, m in mats.items():
        t = _apply_axis(t, m, mode - 1)
        if not state.is_pure:
            t = _apply_axis(t, m.conj(), n + mode - 1)
    return FockTensor(state.cutoffs, t, state.kind)


def apply_unitary(state: FockTensor, unitary: np.ndarray, modes: Sequence[int]) -> FockTensor:
    """Apply a matrix acting jointly on ``modes`` (in that index order)."""
    _check_modes(state, modes)
    axes = [m - 1 for m in modes]
    sub = math.prod(state.dims[a] for a in axes)
    if unitary.shape != (sub, sub):
        raise ValueError(f"unitary of shape {unitary.shape} does not act on modes {tuple(modes)}")

    def act(t, offset, mat):
        ax = [offset + a for a in axes]
        moved = np.moveaxis(t, ax, range(len(ax)))
        shape = moved.shape
        out = (mat @ moved.reshape(sub, -1)).reshape(shape)
        return np.moveaxis(out, range(len(ax)), ax)

    t = act(state.tensor(), 0, unitary)
    if not state.is_pure:
        t = act(t, state.num_modes, unitary.conj())
    return FockTensor(state.cutoffs, t, state.kind)


def loss_kraus(cutoff: int, eta: float) -> list[np.ndarray]:
    """Kraus operators of a beam splitter of transmissivity ``eta`` into vacuum.

    ``K_k |n> = sqrt(C(n, k)) eta^{(n-k)/2} (1-eta)^{k/2} |n-k>``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    ops = []
    for k in range(cutoff + 1):
        K = np.zeros((cutoff + 1, cutoff + 1))
        for n in range(k, cutoff + 1):
            K[n - k, n] = math.sqrt(comb(n, k, exact=True)) * eta ** ((n - k) / 2) * (1 - eta) ** (k / 2)
        ops.append(K)
    return ops


def apply_loss(state: FockTensor, mode: int, eta: float) -> FockTensor:
    """Photon loss on one mode: ``a -> sqrt(eta) a + sqrt(1-eta) v``, ancilla traced out."""
    _check_modes(state, [mode])
    kraus = loss_kraus(state.cutoffs[mode - 1], eta)
    t = state.to_mixed().tensor()
    n = state.num_modes
    out = np.zeros_like(t)
    for K in kraus:
        if not K.any():
            continue
        out += _apply_axis(_apply_axis(t, K, mode - 1), K, n + mode - 1)
    return FockTensor(state.cutoffs, out, MIXED)


def apply_loss_all(state: FockTensor, eta: float) -> FockTensor:
    """Identical loss ``eta`` on every mode."""
    for mode in range(1, state.num_modes + 1):
        state = apply_loss(state, mode, eta)
    return state


def _proper_subset(state: FockTensor, modes: Iterable[int]) -> tuple[int, ...]:
    modes = tuple(sorted(set(int(m) for m in modes)))
    _check_modes(state, modes)
    if not modes:
        raise ValueError("mode subset must be non-empty")
    if len(modes) == state.num_modes:
        raise ValueError("transposing every mode is a full transpose, not a partial one")
    return modes


def partial_transpose(state: FockTensor, modes: Iterable[int]) -> FockTensor:
    """Transpose the density matrix on the listed modes.

    The result is Hermitian with unit trace but may have negative eigenvalues.
    """
    modes = _proper_subset(state, modes)
    n = state.num_modes
    t = state.to_mixed().tensor()
    perm = list(range(2 * n))
    for m in modes:
        perm[m - 1], perm[n + m - 1] = n + m - 1, m - 1
    return FockTensor(state.cutoffs, np.transpose(t, perm), MIXED)


def partial_trace(state: FockTensor, keep: Sequence[int]) -> FockTensor:
    """Reduced density operator on ``keep`` (listed in increasing order)."""
    keep = tuple(sorted(set(int(m) for m in keep)))
    _check_modes(state, keep)
    if not keep:
        raise ValueError("must keep at least one mode")
    cutoffs = tuple(state.cutoffs[m - 1] for m in keep)
    drop = [a for a in range(state.num_modes) if a + 1 not in keep]
    t = state.tensor()
    if state.is_pure:
        rho = np.tensordot(t, t.conj(), axes=(drop, drop))
    else:
        rho = t
        n = state.num_modes
        for a in sorted(drop, reverse=True):
            rho = np.trace(rho, axis1=a, axis2=n + a)
            n -= 1
    return FockTensor(cutoffs, rho, MIXED)


def hermitian_spectrum(matrix, tol: float = EIG_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix after symmetrisation.

    Raises ``ValueError`` when the input departs from Hermiticity by more than
    ``tol`` relative to its largest entry.
    """
    m = matrix.data if isinstance(matrix, FockTensor) else np.asarray(matrix)
    if isinstance(matrix, FockTensor) and matrix.is_pure:
        m = matrix.density()
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh((m + m.conj().T) / 2)


def min_eigenvalue(matrix, tol: float = EIG_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix or a state's density operator."""
    return float(hermitian_spectrum(matrix, tol)[0])
