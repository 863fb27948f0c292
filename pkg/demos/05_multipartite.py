"""Three modes: a single photon spread over a partition, and a Gaussian EPR state.

The photon superposition violates the first family for the chosen partition.
The three-mode EPR state built from squeezers and beam splitters has zero
odd moments, so the amplitude product <a1 a2 a3> vanishes and the second
family with C = a is not violated at all.
"""
import numpy as np

from cvbell import build_epr_network, eval_first, eval_second, ghz_vacuum, multimode_epr, tmss
from cvbell.fock import annihilate, expect

c = 1 / np.sqrt(2)
for k in (1, 2):
    rep = eval_first(ghz_vacuum(3, 1, c, c, 1.0), k=k)
    print(f"photon over modes 1|23, partition k={k}: lhs = {rep.lhs:.4f}, rhs = {rep.rhs:.4f}, violated = {rep.violated}")

epr = multimode_epr(3, 0.5)
print(f"EPR N=3 cutoff per mode: {epr.cutoffs[0]}")
ops = [annihilate(m, epr.cutoffs[0]) for m in (1, 2, 3)]
print(f"<a1 a2 a3> = {expect(epr, ops).value:.2e}")
for k in (1, 2):
    rep = eval_second(epr, k)
    print(f"second family k={k}: lhs = {rep.lhs:.3e}, rhs = {rep.rhs:.6f}, ratio = {rep.ratio:.3e}")

# %% With two modes the network reduces to the usual squeezed pair
net = build_epr_network(2, 0.5)
print(f"N=2 network ratio = {eval_second(net).ratio:.8f}, tmss ratio = {eval_second(tmss(0.5)).ratio:.8f}")
