"""Constructors for the named optical states.

Every constructor returns a validated :class:`~cvbell.fock.FockTensor`.
States with unbounded photon-number support (two-mode squeezed vacuum,
squeezer/beam-splitter networks) pick the smallest cutoff whose neglected
probability is below ``tail`` and raise :class:`~cvbell.errors.CutoffError`
when an explicit cutoff is too small.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import CutoffError, DimensionError
from .fock import MAX_DIM_PURE, MIXED, FockTensor, apply_unitary

TAIL_TOL = 1e-12


def vacuum(n_modes: int = 2, cutoff: int = 0) -> FockTensor:
    return FockTensor.basis((0,) * n_modes, (cutoff,) * n_modes)


def fock(occupations, cutoff=None) -> FockTensor:
    occ = tuple(int(n) for n in occupations)
    if cutoff is None:
        cutoffs = occ
    else:
        cutoffs = (cutoff,) * len(occ) if np.isscalar(cutoff) else tuple(cutoff)
    return FockTensor.basis(occ, cutoffs)


def single_photon(theta: float, phi: float = 0.0, cutoff: int = 1) -> FockTensor:
    """``cos(theta)|1,0> + sin(theta) e^{-i phi}|0,1>``."""
    dims = (cutoff + 1, cutoff + 1)
    amps = np.zeros(dims, dtype=np.complex128)
    amps[1, 0] = np.cos(theta)
    amps[0, 1] = np.sin(theta) * np.exp(-1j * phi)
    return FockTensor.from_amplitudes(amps, (cutoff, cutoff))


def tmss_tail(r: float, cutoff: int) -> float:
    """Probability that a two-mode squeezed vacuum holds more than ``cutoff`` pairs."""
    return float(np.tanh(r) ** (2 * (cutoff + 1)))


def tmss_cutoff(r: float, tail: float = TAIL_TOL) -> int:
    lam = np.tanh(r) ** 2
    if lam == 0:
        return 0
    return max(0, math.ceil(math.log(tail) / math.log(lam)) - 1)


def tmss(r: float, cutoff: int | None = None, tail: float = TAIL_TOL) -> FockTensor:
    """Two-mode squeezed vacuum, amplitudes ``tanh(r)^n / cosh(r)`` on ``|n,n>``."""
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    if cutoff is None:
        cutoff = tmss_cutoff(r, tail)
    elif tmss_tail(r, cutoff) >= tail:
        raise CutoffError(
            f"cutoff {cutoff} leaves tail {tmss_tail(r, cutoff):.3g} >= {tail:g} for r={r}"
        )
    n = np.arange(cutoff + 1)
    amps = np.zeros((cutoff + 1, cutoff + 1))
    amps[n, n] = np.tanh(r) ** n / np.cosh(r)
    return FockTensor.from_amplitudes(amps, (cutoff, cutoff))


def ghz_vacuum(n_modes: int, k: int, c1: complex, c2: complex, p_s: float, cutoff: int = 1) -> FockTensor:
    """``p_s |GHZ><GHZ| + (1 - p_s)|0...0><0...0|``.

    ``|GHZ> = c1 |1..1 0..0> + c2 |0..0 1..1>`` with the first ``k`` modes
    forming the first group.
    """
    if not 1 <= k <= n_modes - 1:
        raise ValueError(f"partition size k={k} must lie in 1..{n_modes - 1}")
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1) > 1e-10:
        raise ValueError("GHZ coefficients must satisfy |c1|^2 + |c2|^2 = 1")
    if not 0 <= p_s <= 1:
        raise ValueError("mixing weight p_s must lie in [0, 1]")
    if cutoff < 1:
        raise ValueError("GHZ state needs cutoff >= 1")
    dims = (cutoff + 1,) * n_modes
    ones = (1,) * k + (0,) * (n_modes - k)
    psi = np.zeros(dims, dtype=np.complex128)
    psi[ones] = c1
    psi[tuple(1 - o for o in ones)] = c2
    psi = psi.ravel()
    vac = np.zeros_like(psi)
    vac[0] = 1
    rho = p_s * np.outer(psi, psi.conj()) + (1 - p_s) * np.outer(vac, vac)
    return FockTensor((cutoff,) * n_modes, rho, MIXED)


def _lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def squeezed_vacuum(r: float, cutoff: int, working_cutoff: int | None = None) -> np.ndarray:
    """Amplitudes of ``exp(r (a^dag^2 - a^2) / 2)|0>`` up to ``cutoff``.

    The exponential is taken of the generator truncated at ``working_cutoff``
    (default ``2 * cutoff + 40``), well beyond the returned range.
    """
    w = working_cutoff if working_cutoff is not None else 2 * cutoff + 40
    a = _lowering(w)
    gen = r * (a.T @ a.T - a @ a) / 2
    return expm(gen)[: cutoff + 1, 0].astype(np.complex128)


def _squeezed_number_distribution(r: float, size: int) -> np.ndarray:
    p = np.zeros(size)
    m = np.arange((size + 1) // 2)
    t = np.tanh(abs(r))
    if t == 0:
        p[0] = 1
        return p
    logp = gammaln(2 * m + 1) - 2 * gammaln(m + 1) - m * math.log(4) + 2 * m * math.log(t) - math.log(np.cosh(r))
    p[2 * m] = np.exp(logp)
    return p


def network_tail(n_modes: int, r: float, cutoff: int) -> float:
    """Probability that ``n_modes`` squeezed vacua hold more than ``cutoff`` photons in total.

    Passive networks conserve total photon number, so this bounds the mass
    lost to per-mode truncation at ``cutoff``.
    """
    size = max(4 * cutoff + 200, 400)
    single = _squeezed_number_distribution(r, size)
    total = np.zeros(size)
    total[0] = 1
    for _ in range(n_modes):
        total = np.convolve(total, single)[:size]
    return float(total[cutoff + 1 :].sum())


def network_cutoff(n_modes: int, r: float, tail: float = TAIL_TOL) -> int:
    c = 0
    while network_tail(n_modes, r, c) >= tail:
        c += 1
    return c


@lru_cache(maxsize=32)
def beam_splitter(theta: float, cutoff: int) -> np.ndarray:
    """Two-mode unitary ``exp(theta (b^dag a - a^dag b))`` on modes (a, b).

    In the Schroedinger picture it maps ``a^dag -> a^dag cos(theta) + b^dag sin(theta)``
    and ``b^dag -> b^dag cos(theta) - a^dag sin(theta)``.  The generator conserves
    ``n_a + n_b``, so it is exponentiated block by block.
    """
    d = cutoff + 1
    a = _lowering(cutoff)
    gen = theta * (np.kron(a, a.T) - np.kron(a.T, a))
    U = np.zeros((d * d, d * d), dtype=np.complex128)
    for total in range(2 * cutoff + 1):
        idx = [n * d + (total - n) for n in range(max(0, total - cutoff), min(total, cutoff) + 1)]
        block = np.ix_(idx, idx)
        U[block] = expm(gen[block])
    U.setflags(write=False)
    return U


def splitter_angles(n_modes: int) -> list[float]:
    """Angles of the cascaded N-splitter, ``cos(theta_k) = 1/sqrt(N - k + 1)``."""
    return [float(np.arccos(1 / np.sqrt(n_modes - k + 1))) for k in range(1, n_modes)]


def build_epr_network(n_modes: int, r: float, cutoff: int | None = None, tail: float = TAIL_TOL) -> FockTensor:
    """Multimode EPR state from squeezed vacua fed into a beam-splitter cascade.

    Mode 1 receives ``exp(r (a^dag^2 - a^2)/2)|0>`` (squeezed in Y), modes 2..N the
    opposite sign (squeezed in X).  Splitter ``k`` mixes modes ``k`` and ``k+1``
    at the angle from :func:`splitter_angles`.  For ``N = 2`` the output equals
    the two-mode squeezed vacuum ``tmss(r)``.
    """
    if n_modes < 2:
        raise ValueError("the network needs at least two modes")
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    if cutoff is None:
        cutoff = network_cutoff(n_modes, r, tail)
    else:
        left = network_tail(n_modes, r, cutoff)
        if left >= tail:
            raise CutoffError(f"cutoff {cutoff} leaves tail {left:.3g} >= {tail:g}")
    cutoffs = (cutoff,) * n_modes
    if (cutoff + 1) ** n_modes > MAX_DIM_PURE:
        raise DimensionError(f"{n_modes} modes at cutoff {cutoff} exceed the pure-state cap {MAX_DIM_PURE}")
    vecs = [squeezed_vacuum(r, cutoff)] + [squeezed_vacuum(-r, cutoff)] * (n_modes - 1)
    psi = vecs[0]
    for v in vecs[1:]:
        psi = np.multiply.outer(psi, v)
    state = FockTensor.from_amplitudes(psi, cutoffs)
    for k, theta in enumerate(splitter_angles(n_modes), start=1):
        state = apply_unitary(state, beam_splitter(theta, cutoff), (k, k + 1))
    return FockTensor.from_amplitudes(state.data, cutoffs)


def multimode_epr(n_modes: int, r: float, cutoff: int | None = None, tail: float = TAIL_TOL) -> FockTensor:
    return build_epr_network(n_modes, r, cutoff, tail)


def random_pure(seed: int, n_modes: int = 2, cutoff: int = 2) -> FockTensor:
    rng = np.random.default_rng(seed)
    d = (cutoff + 1) ** n_modes
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return FockTensor.from_amplitudes(v, (cutoff,) * n_modes)


def _ginibre(rng, d: int, rank: int) -> np.ndarray:
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_mixed(seed: int, rank: int | None = None, n_modes: int = 2, cutoff: int = 2) -> FockTensor:
    """Ginibre-ensemble density matrix ``G G^dag / Tr`` of the given rank."""
    rng = np.random.default_rng(seed)
    d = (cutoff + 1) ** n_modes
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in 1..{d}")
    return FockTensor((cutoff,) * n_modes, _ginibre(rng, d, rank), MIXED)


def random_separable(seed: int, terms: int | None = None, n_modes: int = 2, cutoff: int = 2) -> FockTensor:
    """Convex mixture of products of random single-mode states."""
    rng = np.random.default_rng(seed)
    d = cutoff + 1
    terms = int(rng.integers(1, 6)) if terms is None else terms
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d**n_modes, d**n_modes), dtype=np.complex128)
    for w in weights:
        term = np.ones((1, 1))
        for _ in range(n_modes):
            term = np.kron(term, _ginibre(rng, d, int(rng.integers(1, d + 1))))
        rho += w * term
    return FockTensor((cutoff,) * n_modes, rho, MIXED)


VARIANTS = {
    "single_photon": single_photon,
    "tmss": tmss,
    "ghz_vacuum": ghz_vacuum,
    "multimode_epr": multimode_epr,
    "vacuum": vacuum,
    "fock": fock,
    "random_pure": random_pure,
    "random_mixed": random_mixed,
    "random_separable": random_separable,
}


@dataclass(frozen=True)
class StateSpec:
    """Named state plus its parameters, as written in configuration files.

    ``params`` are the keyword arguments of the matching constructor in
    :data:`VARIANTS` (``cutoff`` included when given).
    """

    variant: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown state variant {self.variant!r}; expected one of {sorted(VARIANTS)}")
        try:
            inspect.signature(VARIANTS[self.variant]).bind(**self.params)
        except TypeError as exc:
            raise ValueError(f"bad parameters for {self.variant}: {exc}") from None
        object.__setattr__(self, "params", dict(self.params))

    def with_params(self, **changes) -> "StateSpec":
        return StateSpec(self.variant, {**self.params, **changes})

    def to_dict(self) -> dict:
        params = {k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in self.params.items()}
        return {"variant": self.variant, **params}


def build(spec: StateSpec) -> FockTensor:
    """Construct and validate the state named by ``spec``."""
    return VARIANTS[spec.variant](**spec.params).check_physical()
