"""Detector inefficiency scales both sides of the inequality by eta^2.

Loss is modelled as a beam splitter into vacuum on every mode.  The verdict
therefore does not depend on eta, only the signal size does.
"""
from cvbell import apply_loss_all, eval_second, tmss

s = tmss(0.5)
base = eval_second(s)
for eta in (1.0, 0.9, 0.6, 0.3, 0.1):
    rep = eval_second(apply_loss_all(s, eta))
    print(
        f"eta = {eta:.1f}  lhs/lhs0 = {rep.lhs / base.lhs:.6f}  rhs/rhs0 = {rep.rhs / base.rhs:.6f}"
        f"  eta^2 = {eta**2:.6f}  ratio = {rep.ratio:.8f}"
    )
