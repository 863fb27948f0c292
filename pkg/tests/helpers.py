"""Shared state suites and closed-form oracles for the tests.

The oracles here are written from textbook formulas and deliberately avoid the
package's operator machinery so that they can act as independent references.
"""

import math

import numpy as np

from cvbell import (
    annihilate,
    create,
    expect,
    ghz_vacuum,
    number,
    random_mixed,
    random_pure,
    random_separable,
    single_photon,
    tmss,
)
from cvbell.fock import apply_loss_all

N_RANDOM_MIXED = 1000
N_RANDOM_SEPARABLE = 500


def random_mixed_suite(n=N_RANDOM_MIXED):
    """Seeded two-mode mixed states at cutoff 2; ranks cycle through 1..9."""
    return [random_mixed(seed, rank=1 + seed % 9) for seed in range(n)]


def random_separable_suite(n=N_RANDOM_SEPARABLE):
    return [random_separable(10_000 + seed) for seed in range(n)]


def named_states():
    """Every named two-mode state used by the acceptance checks."""
    out = {}
    for theta in (np.pi / 8, np.pi / 4, 3 * np.pi / 8):
        for phi in (0.0, 0.7):
            out[f"single_photon({theta:.3f},{phi})"] = single_photon(theta, phi)
    for r in (0.1, 0.3, 0.5, 1.0):
        out[f"tmss({r})"] = tmss(r)
    for eta in (0.3, 0.6, 0.9):
        out[f"lossy tmss(0.5, eta={eta})"] = apply_loss_all(tmss(0.5), eta)
    for p in (0.0, 0.5, 1.0):
        out[f"ghz_vacuum(2,1,p_s={p})"] = ghz_vacuum(2, 1, 1 / math.sqrt(2), 1 / math.sqrt(2), p)
    out["random_pure(7)"] = random_pure(7)
    return out


def counterpart_gaps(state):
    """rhs - lhs of the two swapped-partner inequalities that no state violates.

    ``|<a1 a2>|^2 <= <N1 N2>`` and ``|<a1 a2^dag>|^2 <= <N1><N2>``.
    """
    c1, c2 = state.cutoffs
    a1, a2 = annihilate(1, c1), annihilate(2, c2)
    n1n2 = expect(state, [number(1, c1), number(2, c2)]).real
    n1 = expect(state, [number(1, c1)]).real
    n2 = expect(state, [number(2, c2)]).real
    g1 = n1n2 - abs(expect(state, [a1, a2]).value) ** 2
    g2 = n1 * n2 - abs(expect(state, [a1, create(2, c2)]).value) ** 2
    return g1, g2


# ---------------------------------------------------------------- oracles

def tmss_amplitude(r, n):
    return math.tanh(r) ** n / math.cosh(r)


def squeezed_vacuum_amplitude(r, m):
    """Amplitude on |2m> of exp(r (a^dag^2 - a^2)/2)|0> (up to the overall sign convention)."""
    return math.sqrt(math.factorial(2 * m)) / (2**m * math.factorial(m)) * math.tanh(r) ** m / math.sqrt(math.cosh(r))


def network_moments(n_modes, r):
    """Second moments of the symmetric N-splitter output, from Gaussian mode algebra.

    Every output mode holds sinh^2 r photons.  Pair correlations follow from
    the first column of the orthogonal mode transform, which is uniform
    (1/sqrt N) for the symmetric splitter: <a_i a_j> = +-2 cosh r sinh r / N.
    """
    s2 = math.sinh(r) ** 2
    pair = 2 * math.cosh(r) * math.sinh(r) / n_modes
    return {"n": s2, "pair": pair}
