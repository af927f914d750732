"""Acceptance criteria, one test each, printing a PASS/FAIL line.

Tolerances are pinned here rather than read from the suite defaults, so a
loosened default cannot turn a criterion green.
"""

import math
import time

import pytest

from cornerstone.bcalc import ModelGrid
from cornerstone.cli import main
from cornerstone.schwartz import schwartz_test
from cornerstone.suites import (
    RUNNERS,
    Settings,
    cauchy_test_kernel,
    convergent_sequences,
    convolution_checks,
    gaussian_test_kernel,
    homomorphism_pairs,
    quantize_oracle_error,
)

SEED = 7


@pytest.fixture(scope="module")
def suites():
    out = {}
    for name, runner in RUNNERS.items():
        t0 = time.perf_counter()
        res = runner(Settings(seed=SEED))
        out[name] = (res, time.perf_counter() - t0)
    return out


@pytest.fixture
def report(capsys):
    def _report(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {title} ({detail})")
        assert ok, detail
    return _report


def measured(suites, suite, prefix):
    res, _ = suites[suite]
    vals = {c.name: c.measured for c in res.checks if c.name.startswith(prefix)}
    assert vals, f"no checks named {prefix}*"
    return vals


def test_criterion_01_groupoid_axioms(suites, report):
    res, elapsed = suites["axioms"]
    worst = max(v for k, v in measured(suites, "axioms", "axioms.").items() if "closure" not in k)
    closure = sum(measured(suites, "axioms", "axioms.closure").values())
    models = {c.name.split("[")[1].split(",")[0] for c in res.checks}
    ok = worst <= 1e-12 and closure == 0 and {"interval", "corner2"} <= models and elapsed < 2.0
    report(1, "groupoid axioms on 10^4 triples", ok,
           f"worst defect {worst:.3g} <= 1e-12, {closure:g} products outside, {elapsed:.2f} s < 2 s")


def test_criterion_02_phi_homomorphism(suites, report):
    add = max(measured(suites, "phi", "phi.additivity").values())
    lim = measured(suites, "phi", "phi.continuity[limit]")["phi.continuity[limit]"]
    fails = measured(suites, "phi", "phi.continuity[failures]")["phi.continuity[failures]"]
    n_seq = len(convergent_sequences(Settings(seed=SEED).rng(210)))
    ok = add <= 1e-12 and lim <= 1e-6 and fails == 0 and n_seq == 100
    report(2, "phi additivity and continuity", ok,
           f"additivity {add:.3g} <= 1e-12, limit error {lim:.3g} <= 1e-6 on {n_seq} sequences, {fails:g} failures")


def test_criterion_03_tau_dictionary(suites, report):
    err = max(measured(suites, "phi", "phi.tau_dictionary").values())
    side = measured(suites, "stretch", "stretch.side_faces")["stretch.side_faces"]
    ok = err <= 1e-12 and side == 0
    report(3, "tau dictionary and side faces", ok, f"tau error {err:.3g} <= 1e-12, {side:g} elements on lb/rb")


def test_criterion_04_transversality(suites, report):
    verdicts = measured(suites, "transversality", "transversality.verdict")
    margins = measured(suites, "transversality", "transversality.margin")
    ok = len(verdicts) == 2 and all(v == 0 for v in verdicts.values()) and min(margins.values()) >= 10.0
    report(4, "transversality examples", ok, f"{len(verdicts)} verdicts correct, min margin {min(margins.values()):.3g} >= 10")


def test_criterion_05_quantization_oracle(report):
    err = quantize_oracle_error(4096, 20.0)
    report(5, "quantization oracle on 2^12 grid", err <= 1e-8, f"sup error {err:.3g} <= 1e-8")


def test_criterion_06_convolution_oracle(report):
    t0 = time.perf_counter()
    res = convolution_checks(ModelGrid(20.0, 1024))
    elapsed = time.perf_counter() - t0
    ok = (res["convolution_oracle"] <= 1e-8 and res["associativity"] <= 1e-8 and res["adjoint"] <= 1e-10
          and elapsed < 10.0)
    report(6, "convolution oracle, associativity, adjoint on 2^10 grid", ok,
           f"oracle {res['convolution_oracle']:.3g}, assoc {res['associativity']:.3g}, "
           f"adjoint {res['adjoint']:.3g}, {elapsed:.2f} s < 10 s")


def test_criterion_07_indicial_mellin(suites, report):
    mellin_err = measured(suites, "indicial", "indicial.mellin_oracle")["indicial.mellin_oracle[gaussian]"]
    hom = measured(suites, "indicial", "indicial.homomorphism")
    pairs = {k.split("[")[1].split(",")[0] for k in hom}
    n_pairs = len(homomorphism_pairs(ModelGrid(20.0, 256)))
    ok = mellin_err <= 1e-8 and max(hom.values()) <= 1e-6 and len(pairs) == 5 == n_pairs
    report(7, "Mellin oracle and indicial homomorphism", ok,
           f"Mellin {mellin_err:.3g} <= 1e-8, worst relative defect {max(hom.values()):.3g} <= 1e-6 on {len(pairs)} pairs")


def test_criterion_08_schwartz_machinery(suites, report):
    sup = measured(suites, "schwartz", "schwartz.sup_gaussian")["schwartz.sup_gaussian"]
    rates = measured(suites, "schwartz", "schwartz.decay_rate")
    grid = ModelGrid(20.0, 512)
    gauss = schwartz_test(gaussian_test_kernel(grid)).passed
    cauchy = schwartz_test(cauchy_test_kernel(grid)).passed
    ok = abs(sup - math.exp(-1)) <= 1e-6 and gauss and not cauchy and all(abs(r - 1) <= 0.02 for r in rates.values())
    report(8, "Schwartz seminorms, battery verdicts and decay rates", ok,
           f"sup {sup:.9f} vs e^-1, gaussian {'accepted' if gauss else 'rejected'}, "
           f"cauchy {'accepted' if cauchy else 'rejected'}, worst rate ratio error {max(abs(r - 1) for r in rates.values()):.3g}")


def test_criterion_09_defining_function_independence(suites, report):
    change = measured(suites, "phi", "phi.bounded_change")["phi.bounded_change"]
    flips = measured(suites, "schwartz", "schwartz.metric_independence")
    ok = abs(change - math.log(1.5)) <= 1e-6 and all(v == 0 for v in flips.values())
    report(9, "bounded change under rho' = (2 + x) rho", ok,
           f"sup |phi' - phi| = {change:.9f} vs log 1.5, {sum(flips.values()):g} verdict changes")


def test_criterion_10_taylor_decay(suites, report):
    ratios = measured(suites, "stretch", "stretch.taylor_rate")
    ok = len(ratios) == 3 and all(abs(r - 1) <= 0.10 for r in ratios.values())
    report(10, "Taylor vanishing to decay rate, N = 1, 2, 3", ok,
           ", ".join(f"{k.split('[')[1][:-1]}: rate/N {v:.4f}" for k, v in sorted(ratios.items())))


def test_criterion_11_permutations(suites, report):
    dis = measured(suites, "phi", "phi.puff_permutations")
    ok = set(dis) == {"phi.puff_permutations[R+^2]", "phi.puff_permutations[R+^3]"} and all(v == 0 for v in dis.values())
    report(11, "iterated puff verdicts independent of ordering", ok, f"{sum(dis.values()):g} disagreements, 100 samples each")


def test_criterion_12_all_under_budget(tmp_path, monkeypatch, report):
    monkeypatch.delenv("CORNERSTONE_OUT", raising=False)
    t0 = time.perf_counter()
    code = main(["all", "--seed", str(SEED), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    report(12, "full suite run", code == 0 and elapsed < 60.0, f"exit {code}, {elapsed:.1f} s < 60 s")
