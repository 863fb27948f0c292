"""Every violation we can find comes from a state with a negative partial transpose.

Random two-mode mixed states with two levels per mode are scanned; each
violated inequality is cross-checked with the smallest eigenvalue of the
partially transposed density matrix.  Generic random states are almost all
NPT yet rarely violate anything; the violations come from structured states
such as the squeezed pair.  Separable mixtures never violate.
"""
import numpy as np

from cvbell import apply_loss_all, evaluate_all, pt_report, random_mixed, random_separable, single_photon, tmss

violations, npt_states, counterexamples = 0, 0, 0
for seed in range(1000):
    s = random_mixed(seed, rank=1 + seed % 9)
    pt = pt_report(s)
    npt_states += pt.is_npt
    for rep in evaluate_all(s):
        if rep.violated:
            violations += 1
            counterexamples += not pt.is_npt

print(f"random states: 1000, NPT: {npt_states}, violations: {violations}, violations without NPT: {counterexamples}")

worst = max(max(r.lhs - r.rhs for r in evaluate_all(random_separable(seed))) for seed in range(500))
print(f"largest lhs - rhs over 500 separable mixtures: {worst:.2e}")

for name, s in [("single photon", single_photon(np.pi / 4)), ("tmss 0.5", tmss(0.5)), ("lossy tmss", apply_loss_all(tmss(0.5), 0.3))]:
    hits = [f"{r.family}" for r in evaluate_all(s) if r.violated]
    print(f"{name:14s} violated: {hits}  PT min eigenvalue: {pt_report(s).min_eig:.4f}")
