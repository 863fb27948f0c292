"""Two-mode squeezed vacuum: the second-family ratio grows as squeezing drops.

Weak squeezing gives fewer photons but stronger pair correlations relative to
the product of intensities, so the ratio tanh(r)^-2 diverges as r -> 0.
"""
import numpy as np

from cvbell import eval_second, tmss
from cvbell.states import tmss_tail

print(f"{'r':>5} {'cutoff':>6} {'tail':>9} {'lhs':>10} {'rhs':>10} {'ratio':>10} {'tanh^-2':>10}")
for r in np.round(np.arange(0.1, 1.01, 0.1), 2):
    s = tmss(r)
    rep = eval_second(s)
    tail = tmss_tail(r, s.cutoffs[0])
    print(f"{r:5.2f} {s.cutoffs[0]:6d} {tail:9.1e} {rep.lhs:10.6f} {rep.rhs:10.6f} {rep.ratio:10.4f} {np.tanh(r) ** -2:10.4f}")
