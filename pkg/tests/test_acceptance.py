"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also collected into the
pytest terminal summary by ``conftest.py``).  Run directly with
``python tests/test_acceptance.py`` to get just those lines.
"""

import math
import tempfile
import time
from pathlib import Path

import numpy as np

from helpers import (
    counterpart_gaps,
    named_states,
    random_mixed_suite,
    random_separable_suite,
)
from cvbell import (
    ExperimentConfig,
    StateSpec,
    build_epr_network,
    eval_first,
    eval_second,
    evaluate_all,
    ghz_vacuum,
    multimode_epr,
    pt_report,
    run_experiment,
    single_photon,
    tmss,
)
from cvbell.cli import main as cli_main
from cvbell.fock import annihilate, apply_loss_all, expect, number
from cvbell.states import tmss_tail

RESULTS = []

# tanh(r)^-2 from an independent evaluation of the closed form
TANH_INV_SQ = {
    0.1: 100.66733227661183,
    0.3: 11.783693131007775,
    0.5: 4.6826943768311695,
    1.0: 1.7240616609663106,
}
COSH2SINH2_05 = 0.34527446138545387
SINH4_05 = 0.07373414397783205

# Truncated brute-force values for multimode_epr(3, 0.5), cutoff 36 per mode
# (total-photon tail < 1e-12).  The second-family left-hand side is exactly
# zero: <a1 a2 a3> is an odd moment of a zero-mean Gaussian state.
EPR3_GOLDEN = {
    ("second", 1): {"lhs": 0.0, "rhs": 0.06169109811634246, "ratio": 0.0},
    ("second", 2): {"lhs": 0.0, "rhs": 0.06169109811764081, "ratio": 0.0},
}


def _record(number_, title, ok, detail, elapsed, limit):
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    line = f"[{status}] criterion {number_}: {title} ({detail}; {elapsed:.2f}s < {limit:g}s: {within})"
    print(line)
    RESULTS.append(line)
    return ok and within


def criterion_1():
    t0 = time.perf_counter()
    rep = eval_first(single_photon(np.pi / 4, 0.0))
    ok = abs(rep.lhs - 0.25) < 1e-12 and abs(rep.rhs) < 1e-12
    worst = 0.0
    for theta in (np.pi / 8, np.pi / 4, 3 * np.pi / 8):
        lhs = eval_first(single_photon(theta, 0.0)).lhs
        worst = max(worst, abs(lhs - 0.25 * math.sin(2 * theta) ** 2))
    ok = ok and worst < 1e-10
    detail = f"lhs={rep.lhs!r}, rhs={rep.rhs!r}, max sin^2 deviation={worst:.1e}"
    return _record(1, "single-photon first-family violation", ok, detail, time.perf_counter() - t0, 1)


def criterion_2():
    t0 = time.perf_counter()
    ratios, worst, tails = [], 0.0, []
    for r in (0.1, 0.3, 0.5, 1.0):
        s = tmss(r)
        tails.append(tmss_tail(r, s.cutoffs[0]))
        ratio = eval_second(s).ratio
        ratios.append(ratio)
        worst = max(worst, abs(ratio - TANH_INV_SQ[r]))
    monotone = all(a > b for a, b in zip(ratios, ratios[1:]))
    ok = worst < 1e-8 and monotone and max(tails) < 1e-12
    detail = f"max |ratio - tanh^-2 r|={worst:.1e}, decreasing={monotone}, max tail={max(tails):.1e}"
    return _record(2, "TMSS second-family ratio", ok, detail, time.perf_counter() - t0, 5)


def criterion_3():
    t0 = time.perf_counter()
    s = tmss(0.5)
    base = eval_second(s)
    worst_scale, worst_ratio = 0.0, 0.0
    for eta in (0.3, 0.6, 0.9):
        rep = eval_second(apply_loss_all(s, eta))
        worst_scale = max(worst_scale, abs(rep.lhs / base.lhs - eta**2), abs(rep.rhs / base.rhs - eta**2))
        worst_ratio = max(worst_ratio, abs(rep.ratio - base.ratio))
    ok = worst_scale < 1e-8 and worst_ratio < 1e-8
    detail = f"max scale deviation={worst_scale:.1e}, max ratio change={worst_ratio:.1e}"
    return _record(3, "efficiency insensitivity", ok, detail, time.perf_counter() - t0, 10)


def _violation_counterexamples(states):
    """(violations seen, violations without NPT) over every family and partition."""
    seen, bad = 0, []
    for name, s in states:
        for rep in evaluate_all(s):
            if rep.violated:
                seen += 1
                pt = pt_report(s, range(rep.k + 1, s.num_modes + 1))
                if not pt.min_eig < -1e-10:
                    bad.append((name, rep.family, rep.k))
    return seen, bad


def criterion_4():
    t0 = time.perf_counter()
    randoms = [(f"random_mixed({i})", s) for i, s in enumerate(random_mixed_suite())]
    named = list(named_states().items())
    named.append(("ghz_vacuum(3,1)", ghz_vacuum(3, 1, 1 / math.sqrt(2), 1 / math.sqrt(2), 1.0)))
    seen, bad = _violation_counterexamples(randoms + named)
    sep_viol = sum(
        any(r.lhs - r.rhs > 1e-9 for r in evaluate_all(s)) for s in random_separable_suite()
    )
    ok = not bad and sep_viol == 0 and len(randoms) >= 1000
    detail = (
        f"{len(randoms)} random + {len(named)} named states, {seen} violations, "
        f"{len(bad)} without NPT; separable violations={sep_viol}/500"
    )
    return _record(4, "violation implies NPT", ok, detail, time.perf_counter() - t0, 60)


def criterion_5():
    t0 = time.perf_counter()
    states = random_mixed_suite() + random_separable_suite() + list(named_states().values())
    worst = min(min(counterpart_gaps(s)) for s in states)
    ok = worst > -1e-9
    detail = f"{len(states)} states, min(rhs - lhs)={worst:.2e}"
    return _record(5, "never-violated counterparts hold", ok, detail, time.perf_counter() - t0, 60)


def criterion_6():
    t0 = time.perf_counter()
    parts = {}
    g = eval_first(ghz_vacuum(3, 1, 1 / math.sqrt(2), 1 / math.sqrt(2), 1.0), k=1)
    parts["ghz lhs=0.25 rhs=0"] = abs(g.lhs - 0.25) < 1e-12 and abs(g.rhs) < 1e-12

    epr = multimode_epr(3, 0.5)
    epr_ok = True
    ratios = []
    for k in (1, 2):
        rep = eval_second(epr, k)
        gold = EPR3_GOLDEN["second", k]
        ratios.append(rep.ratio)
        # the recorded golden values must be reproduced; the violation itself is required too
        epr_ok &= abs(rep.lhs - gold["lhs"]) < 1e-12 and abs(rep.rhs - gold["rhs"]) < 1e-9
        epr_ok &= rep.violated
    parts[f"epr N=3 second violated k=1,2 (ratios {ratios[0]:.3g}, {ratios[1]:.3g})"] = epr_ok

    net = build_epr_network(2, 0.5)
    ref = tmss(0.5, cutoff=net.cutoffs[0])
    c = net.cutoffs[0]
    worst = 0.0
    for ops in (
        [annihilate(1, c), annihilate(2, c)],
        [number(1, c)],
        [number(2, c)],
        [number(1, c), number(2, c)],
    ):
        a, b = expect(net, ops).value, expect(ref, ops).value
        if len(ops) == 2 and ops[0].kind == "annihilate":
            a, b = abs(a) ** 2, abs(b) ** 2
        worst = max(worst, abs(a - b))
    parts[f"network N=2 = tmss (max dev {worst:.1e})"] = worst < 1e-8

    ok = all(parts.values())
    detail = "; ".join(f"{k}: {'ok' if v else 'NOT MET'}" for k, v in parts.items())
    return _record(6, "multipartite states", ok, detail, time.perf_counter() - t0, 60)


def criterion_7():
    t0 = time.perf_counter()
    spec = StateSpec("tmss", {"r": 0.5})
    rep = run_experiment(ExperimentConfig(state=spec, trials=1_000_000, seed=2024))
    lhs_ok = abs(rep.lhs - COSH2SINH2_05) < 5 * rep.lhs_se
    rhs_ok = abs(rep.naive_rhs - SINH4_05) < 5 * rep.naive_rhs_se
    sig_ok = rep.sigma_corrected >= 5 and rep.violated_corrected

    sizes = np.array([1_000, 10_000, 100_000])
    rms = []
    for n in sizes:
        errs = [
            run_experiment(ExperimentConfig(state=spec, trials=int(n), seed=seed, min_cell=10)).lhs - COSH2SINH2_05
            for seed in range(100, 130)
        ]
        rms.append(math.sqrt(np.mean(np.square(errs))))
    slope = float(np.polyfit(np.log(sizes), np.log(rms), 1)[0])
    slope_ok = abs(slope + 0.5) <= 0.1
    ok = lhs_ok and rhs_ok and sig_ok and slope_ok
    detail = (
        f"lhs={rep.lhs:.5f}+-{rep.lhs_se:.5f}, rhs={rep.naive_rhs:.5f}+-{rep.naive_rhs_se:.5f}, "
        f"sigma={rep.sigma_corrected:.1f}, slope={slope:.3f}"
    )
    return _record(7, "Monte Carlo consistency", ok, detail, time.perf_counter() - t0, 300)


def criterion_8():
    t0 = time.perf_counter()
    spec = StateSpec("tmss", {"r": 0.5})
    half = run_experiment(ExperimentConfig(state=spec, trials=1_000_000, seed=7, p_d=0.5))
    full = run_experiment(ExperimentConfig(state=spec, trials=1_000_000, seed=7, p_d=1.0))
    weaker = half.corrected_rhs > half.naive_rhs
    agree = abs(full.corrected_rhs - full.naive_rhs) <= full.naive_rhs_se
    ok = weaker and half.violated_corrected and agree
    detail = (
        f"p_D=0.5: naive={half.naive_rhs:.5f}, corrected={half.corrected_rhs:.5f}, "
        f"sigma={half.sigma_corrected:.1f}; p_D=1: |corrected-naive|={abs(full.corrected_rhs - full.naive_rhs):.1e}"
    )
    return _record(8, "detection-loophole bound", ok, detail, time.perf_counter() - t0, 300)


def criterion_9():
    t0 = time.perf_counter()
    text = (
        '[state]\nvariant = "tmss"\nr = 0.5\n'
        "[experiment]\ntrials = 50000\nseed = 11\n"
        '[sample]\ntrials = 5000\nthetas = [0, "pi/2"]\n'
        '[sweep]\naxis = "p_D"\nvalues = [0.5, 1.0]\n'
    )
    same = {}
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "run.toml"
        cfg.write_text(text)
        for command in ("sample", "experiment", "sweep"):
            outs = []
            for run in ("a", "b"):
                out = Path(tmp) / run
                extra = ["--save-trials"] if command == "experiment" else []
                code = cli_main([command, "--config", str(cfg), "--out", str(out), *extra])
                files = sorted(out.glob(f"{command}*.csv"))
                outs.append((code, {f.name: f.read_bytes() for f in files}))
            same[command] = outs[0][0] == 0 and outs[0] == outs[1]
    ok = all(same.values())
    detail = ", ".join(f"{k} identical={v}" for k, v in same.items())
    return _record(9, "deterministic sampled outputs", ok, detail, time.perf_counter() - t0, 300)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


def test_criterion_1_single_photon():
    assert criterion_1()


def test_criterion_2_tmss_ratio():
    assert criterion_2()


def test_criterion_3_efficiency_insensitivity():
    assert criterion_3()


def test_criterion_4_violation_implies_npt():
    assert criterion_4()


def test_criterion_5_counterparts():
    assert criterion_5()


def test_criterion_6_multipartite():
    assert criterion_6()


def test_criterion_7_monte_carlo():
    assert criterion_7()


def test_criterion_8_detection_loophole():
    assert criterion_8()


def test_criterion_9_determinism():
    assert criterion_9()


if __name__ == "__main__":
    import contextlib
    import io

    for fn in CRITERIA:
        with contextlib.redirect_stdout(io.StringIO()):
            fn()
        print(RESULTS[-1])
