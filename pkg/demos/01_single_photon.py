"""A single photon shared between two modes violates the first family.

The state cos(theta)|1,0> + e^{i phi} sin(theta)|0,1> has no coincidences,
so the right-hand side vanishes while the interference term does not.
"""
import numpy as np

from cvbell import eval_first, single_photon

# %% The symmetric split: ratio is infinite
rep = eval_first(single_photon(np.pi / 4))
print(f"lhs = {rep.lhs:.6f}, rhs = {rep.rhs:.6f}, ratio = {rep.ratio}")

# %% The left-hand side follows sin^2(2 theta) / 4
for theta in np.linspace(0, np.pi / 2, 9):
    lhs = eval_first(single_photon(theta)).lhs
    print(f"theta = {theta:5.3f}   lhs = {lhs:.6f}   sin^2(2t)/4 = {np.sin(2 * theta) ** 2 / 4:.6f}")
