"""Verification batteries run by the command line tool.

Each suite returns :class:`Check` rows (a measured number against a
tolerance) and table rows for the CSV output. Everything is a deterministic
function of the settings and the seed; wall-clock time is never recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import groupoid as gp
from .bcalc import (
    BKernel,
    IndicialFunction,
    ModelGrid,
    Symbol,
    convolve,
    gaussian_symbol,
    indicial_homomorphism_check,
    mellin,
    quantize,
    translation_kernel,
)
from .bcalc.symbols import plateau_cutoff
from .decoupage import DecoupageSpec, check_transverse, corner_model, enumerate_faces, interval_model
from .expr import Expression
from .groupoid import ConvergenceCase, GroupoidElement, is_convergent
from .model import IntervalModel
from .puff import corrupt, permutation_reports
from .schwartz import (
    WeightPolynomial,
    decay_exponent,
    fit_decay_rate,
    gamma_grid,
    is_s0,
    kernel_samples,
    phi_function,
    radius_family,
    s0_seminorm,
    schwartz_test,
)
from .stretch import LB, RB, StretchedPoint, beta_b, classify, embed, taylor_decay_check, tau_of_pair

MAX = "max"  # measured <= tolerance
MIN = "min"  # measured >= tolerance
NEAR = "near"  # |measured - target| <= tolerance

TOLERANCES = {
    "axioms.associativity": 1e-12,
    "axioms.unit": 1e-12,
    "axioms.inverse": 1e-12,
    "axioms.closure": 0.0,
    "transversality.margin": 10.0,
    "transversality.verdict": 0.0,
    "phi.additivity": 1e-12,
    "phi.continuity": 1e-6,
    "phi.divergent_rejected": 0.0,
    "phi.tau_dictionary": 1e-12,
    "phi.bounded_change": 1e-6,
    "phi.puff_permutations": 0.0,
    "schwartz.sup_gaussian": 1e-6,
    "schwartz.divergence_flag": 0.0,
    "schwartz.verdict": 0.0,
    "schwartz.decay_rate": 0.02,
    "schwartz.rate_shift_invariance": 0.02,
    "schwartz.closure_rate": 0.95,
    "schwartz.metric_independence": 0.0,
    "indicial.quantize_oracle": 1e-8,
    "indicial.convolution_oracle": 1e-8,
    "indicial.associativity": 1e-8,
    "indicial.adjoint": 1e-10,
    "indicial.mellin_oracle": 1e-8,
    "indicial.homomorphism": 1e-6,
    "stretch.taylor_rate": 0.10,
    "stretch.side_faces": 0.0,
    "stretch.inverse_chart": 1e-12,
    "stretch.fiber_product": 1e-12,
    "stretch.tau_agreement": 1e-12,
}

SUITES = ("axioms", "transversality", "phi", "schwartz", "indicial", "stretch")


@dataclass
class Settings:
    seed: int
    grid: int = 1024
    spec: DecoupageSpec | None = None
    tolerances: dict = field(default_factory=dict)
    samples: int = 10_000
    quantize_grid: int = 4096
    convolution_grid: int = 1024
    schwartz_grid: int = 512

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, TOLERANCES[key]))

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    mode: str = MAX
    target: float | None = None

    @property
    def passed(self) -> bool:
        m = self.measured
        if m is None or (isinstance(m, float) and math.isnan(m)):
            return False
        if self.mode == MAX:
            return bool(m <= self.tolerance)
        if self.mode == MIN:
            return bool(m >= self.tolerance)
        return bool(abs(m - self.target) <= self.tolerance)

    def to_dict(self) -> dict:
        out = {"name": self.name, "measured": _finite(self.measured), "tolerance": self.tolerance,
               "pass": self.passed}
        if self.target is not None:
            out["target"] = self.target
        return out


def _finite(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


@dataclass
class SuiteResult:
    suite: str
    checks: list
    tables: list  # dicts with table/op/P/radius/value/verdict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _row(table, op="", P="", radius="", value="", verdict=""):
    return {"table": table, "op": op, "P": P, "radius": radius, "value": value, "verdict": verdict}


# -- groupoid structure --------------------------------------------------------

def axiom_defects(spec: DecoupageSpec, a: gp.ElementBatch, b: gp.ElementBatch, c: gp.ElementBatch) -> dict:
    """Worst associativity, unit and inverse defects, and the count of products leaving the groupoid."""
    ab = gp.batch_compose(a, b)
    assoc = gp.batch_defect(gp.batch_compose(ab, c), gp.batch_compose(a, gp.batch_compose(b, c)))
    ux, uy = gp.batch_unit(spec, a.x, a.variant), gp.batch_unit(spec, a.y, a.variant)
    unit = np.maximum(gp.batch_defect(gp.batch_compose(ux, a), a), gp.batch_defect(gp.batch_compose(a, uy), a))
    ia = gp.batch_inverse(a)
    inv = np.maximum(gp.batch_defect(gp.batch_compose(a, ia), ux), gp.batch_defect(gp.batch_compose(ia, a), uy))
    closure = np.count_nonzero(~gp.batch_is_member(spec, ab))
    return {"associativity": float(assoc.max()), "unit": float(unit.max()), "inverse": float(inv.max()),
            "closure": float(closure)}


def _models(s: Settings) -> list:
    models = [("interval", interval_model()), ("corner2", corner_model(2))]
    if s.spec is not None and s.spec.first_class:
        models.append(("spec", s.spec))
    return models


def run_axioms(s: Settings) -> SuiteResult:
    checks, rows = [], []
    for m, (name, spec) in enumerate(_models(s)):
        variants = [gp.POSITIVE] + ([gp.FULL] if spec.first_class else [])
        for k, variant in enumerate(variants):
            batches = gp.random_composable_batches(spec, s.rng(100 + 10 * m + k), s.samples, variant)
            for key, val in axiom_defects(spec, *batches).items():
                checks.append(Check(f"axioms.{key}[{name},{variant}]", val, s.tol(f"axioms.{key}")))
            rows.append(_row("axioms", f"{name},{variant}", value=s.samples))
    return SuiteResult("axioms", checks, rows)


def transversality_examples() -> list:
    """The tangent-parabola pair (rank 1 at the origin) and a transverse pair of lines."""
    tangent = DecoupageSpec.from_dict({"ambient_dim": 2, "hypersurfaces": [
        {"kind": "coordinate", "axis": 1}, {"kind": "general", "expr": "x1 - x2*x2"}]})
    lines = DecoupageSpec.from_dict({"ambient_dim": 2, "hypersurfaces": [
        {"kind": "coordinate", "axis": 1}, {"kind": "general", "expr": "x1 + x2 - 1"}]})
    return [("tangent", tangent, (0.0, 0.0), False), ("lines", lines, (0.0, 1.0), True)]


def run_transversality(s: Settings) -> SuiteResult:
    checks, rows = [], []
    cases = transversality_examples()
    if s.spec is not None and s.spec.first_class:
        pts = []
        for face in enumerate_faces(s.spec):
            if face.active:
                pts.append(tuple(gp.sample_face_points(s.spec, face.active, s.rng(7), 1)[0]))
        for p in pts:
            cases.append((f"spec@{p}", s.spec, p, None))
    for name, spec, point, expected in cases:
        rep = check_transverse(spec, [point])
        smin = rep.samples[0].sigma_min
        rows.append(_row("transversality", name, value=smin, verdict="transverse" if rep.transverse else "degenerate"))
        if expected is not None:
            checks.append(Check(f"transversality.verdict[{name}]", float(rep.transverse != expected),
                                s.tol("transversality.verdict")))
        checks.append(Check(f"transversality.margin[{name}]", min(rep.margin, 1e300),
                            s.tol("transversality.margin"), MIN))
    return SuiteResult("transversality", checks, rows)


# -- phi and tau ---------------------------------------------------------------

def convergent_sequences(rng: np.random.Generator, count: int = 100, terms: int = 16) -> list:
    """Interior sequences tending to fiber elements, on ``[0, 1]`` and ``R_+^2``.

    Each has endpoints ``mu t (1 + a t)`` and ``t (1 + b t)`` in the normal
    direction with ``t`` proportional to ``1 / n``, so the ratio tends to
    ``mu``. The nodes are scaled so ``mu t`` stays well inside ``[0, 1)``.
    """
    interval, square = interval_model(), corner_model(2)
    out = []
    for k in range(count):
        mu = math.exp(rng.uniform(-2, 2))
        a, b = rng.uniform(-0.5, 0.5, 2)
        ts = [1.0 / (8.0 * (n + 4) * max(mu, 1.0)) for n in range(terms)]
        if k % 2 == 0:
            seq = [GroupoidElement((mu * t * (1 + a * t),), (t * (1 + b * t),), {}) for t in ts]
            cand = GroupoidElement((0.0,), (0.0,), {1: mu})
            spec = interval
        else:
            p, q = rng.uniform(0.2, 2.0, 2)
            seq = [GroupoidElement((mu * t * (1 + a * t), p), (t * (1 + b * t), q), {}) for t in ts]
            cand = GroupoidElement((0.0, p), (0.0, q), {1: mu})
            spec = square
        out.append(ConvergenceCase(spec, seq, cand, params=ts))
    return out


def bounded_change(grid: ModelGrid, factor: str = "2 + x") -> float:
    """``sup |phi' - phi|`` over interior grid pairs and both fibers for ``rho_1' = f rho_1``."""
    base = kernel_samples(grid, IntervalModel())
    alt = kernel_samples(grid, IntervalModel(factor0=Expression(factor, 1)))
    return float(np.max(np.abs(alt.phi - base.phi)))


def run_phi(s: Settings) -> SuiteResult:
    checks, rows = [], []
    for m, (name, spec) in enumerate(_models(s)[:2]):
        x, y, _ = gp.random_composable_batches(spec, s.rng(200 + m), s.samples)
        phi_x, phi_y = gp.batch_phi(spec, x), gp.batch_phi(spec, y)
        worst = float(np.max(np.abs(gp.batch_phi(spec, gp.batch_compose(x, y)) - phi_x - phi_y)))
        checks.append(Check(f"phi.additivity[{name}]", worst, s.tol("phi.additivity")))
        tau_err = float(np.max(np.abs(gp.batch_tau(spec, x) - np.tanh(phi_x / 2.0))))
        checks.append(Check(f"phi.tau_dictionary[{name}]", tau_err, s.tol("phi.tau_dictionary")))

    cases = convergent_sequences(s.rng(210))
    phi_err, failed = 0.0, 0
    for case in cases:
        v = is_convergent(case)
        failed += not (v.converges and v.phi_continuous)
        if v.phi_limit is None:
            phi_err = math.inf
        else:
            phi_err = max(phi_err, float(np.max(np.abs(v.phi_limit - v.phi_candidate))))
    checks.append(Check("phi.continuity[limit]", phi_err, s.tol("phi.continuity")))
    checks.append(Check("phi.continuity[failures]", float(failed), 0.0))
    ts = [1.0 / n for n in range(4, 20)]
    bad = ConvergenceCase(interval_model(), [GroupoidElement((t,), (t * t,), {}) for t in ts],
                          GroupoidElement((0.0,), (0.0,), {1: 1.0}), params=ts)
    checks.append(Check("phi.divergent_rejected", float(bool(is_convergent(bad))), s.tol("phi.divergent_rejected")))

    change = bounded_change(ModelGrid(20.0, s.grid))
    checks.append(Check("phi.bounded_change", change, s.tol("phi.bounded_change"), NEAR, math.log(1.5)))
    rows.append(_row("phi", "bounded_change", value=change))

    for m, spec in enumerate((corner_model(2), corner_model(3))):
        rng = s.rng(220 + m)
        triples = gp.random_composable_triples(spec, rng, 100)
        samples = [t[0] for t in triples[:50]] + [corrupt(t[0], rng, spec) for t in triples[50:]]
        reports = permutation_reports(spec, samples, [(a, b) for a, b, _ in triples])
        verdicts = {tuple(r.membership) for r in reports}
        disagree = float(len(verdicts) != 1 or not all(r.agrees for r in reports))
        checks.append(Check(f"phi.puff_permutations[R+^{spec.ambient_dim}]", disagree,
                            s.tol("phi.puff_permutations")))
    return SuiteResult("phi", checks, rows)


# -- rapid decay ---------------------------------------------------------------

def gaussian_test_kernel(grid: ModelGrid) -> BKernel:
    return BKernel.from_function(grid, lambda u, v: np.exp(-0.5 * (u - v) ** 2 - u ** 2 / 8.0))


def cauchy_test_kernel(grid: ModelGrid) -> BKernel:
    return BKernel.from_function(grid, lambda u, v: 1.0 / (1.0 + (u - v) ** 2))


def sech_kernel(grid: ModelGrid, rate: float) -> BKernel:
    return translation_kernel(grid, lambda s: 1.0 / np.cosh(rate * s))


def row_decay_rate(k: BKernel) -> float:
    """Decay rate of ``|k(0, -t)|`` in ``t = |u - v|`` along the middle row."""
    grid = k.grid
    i = grid.n_points // 2
    t = grid.u[i] - grid.u[: i + 1][::-1]
    return fit_decay_rate(t, k.values[i, : i + 1][::-1]).rate


def run_schwartz(s: Settings) -> SuiteResult:
    checks, rows = [], []
    g10 = gamma_grid(radius=10.0)
    rep = s0_seminorm(phi_function(lambda p: np.exp(-p[:, 0] ** 2)), WeightPolynomial.monomial(2, 0), g10)
    checks.append(Check("schwartz.sup_gaussian", rep.sup_estimate, s.tol("schwartz.sup_gaussian"), NEAR, math.exp(-1)))

    fams = radius_family()
    ones = phi_function(lambda p: np.ones(len(p)))
    sups = [s0_seminorm(ones, WeightPolynomial.monomial(1, 0), g).sup_estimate for g in fams]
    checks.append(Check("schwartz.divergence_flag", float(sups[-1] / sups[-2] < 2.0 * (1 - 1e-9)),
                        s.tol("schwartz.divergence_flag")))

    for name, f, expected in (
        ("gaussian_phi", lambda p: np.exp(-(p ** 2).sum(axis=1)), True),
        ("cauchy_phi", lambda p: 1.0 / (1.0 + p[:, 0] ** 2), False),
        ("compact_phi", lambda p: plateau_cutoff(p[:, 0], 4.0) * plateau_cutoff(p[:, 1], 4.0), True),
    ):
        v = is_s0(phi_function(f), 4, fams)
        for w, r, sup in v.rows:
            rows.append(_row("is_s0", name, w, r, sup, "pass" if v.passed else "fail"))
        checks.append(Check(f"schwartz.verdict[is_s0,{name}]", float(v.passed != expected), s.tol("schwartz.verdict")))

    for rate in (1.0, 2.0, 3.0):
        fit = decay_exponent(lambda p: np.exp(-rate * np.abs(p[:, 0])), [1.0])
        checks.append(Check(f"schwartz.decay_rate[{rate:g}]", fit.rate / rate, s.tol("schwartz.decay_rate"), NEAR, 1.0))
        shifted = decay_exponent(lambda p: np.exp(-rate * np.abs(p[:, 0] + math.log(2.0))), [1.0])
        checks.append(Check(f"schwartz.rate_shift_invariance[{rate:g}]", shifted.rate / fit.rate,
                            s.tol("schwartz.rate_shift_invariance"), NEAR, 1.0))
    gauss_fit = decay_exponent(lambda p: np.exp(-p[:, 0] ** 2), [1.0])
    checks.append(Check("schwartz.verdict[superexponential]", float(not gauss_fit.superexponential),
                        s.tol("schwartz.verdict")))

    grid = ModelGrid(20.0, s.schwartz_grid)
    k1, k2 = sech_kernel(grid, 1.0), sech_kernel(grid, 2.0)
    r1, r2, r12 = row_decay_rate(k1), row_decay_rate(k2), row_decay_rate(convolve(k1, k2))
    checks.append(Check("schwartz.closure_rate[sech]", r12 / min(r1, r2), s.tol("schwartz.closure_rate"), MIN))
    rows.append(_row("closure", "sech1*sech2", value=r12))

    alt = IntervalModel(factor0=Expression("2 + x", 1))
    for name, f, expected in (("gaussian_kernel", gaussian_test_kernel(grid), True),
                              ("cauchy_kernel", cauchy_test_kernel(grid), False)):
        verdicts = []
        for label, model in (("phi", IntervalModel()), ("phi_prime", alt)):
            v = schwartz_test(f, model=model)
            verdicts.append(v.passed)
            for op, side, ev in [("f", "", v.f_in_s0)] + list(v.evidence):
                rows.append(_row(f"schwartz_test[{label}]", f"{name}:{op}{':' + side if side else ''}",
                                 value=float(max((r[2] for r in ev.rows), default=0.0)),
                                 verdict="pass" if ev.passed else "fail"))
        checks.append(Check(f"schwartz.verdict[schwartz_test,{name}]", float(verdicts[0] != expected),
                            s.tol("schwartz.verdict")))
        checks.append(Check(f"schwartz.metric_independence[{name}]", float(verdicts[0] != verdicts[1]),
                            s.tol("schwartz.metric_independence")))
    return SuiteResult("schwartz", checks, rows)


# -- kernels, restriction and Mellin -------------------------------------------

def gaussian_kernel(grid: ModelGrid, width: float = 1.0) -> BKernel:
    return translation_kernel(grid, lambda s: np.exp(-0.5 * (s / width) ** 2))


def quantize_oracle_error(n: int, u_max: float = 20.0) -> float:
    grid = ModelGrid(u_max, n)
    k = quantize(gaussian_symbol(), None, grid)
    exact = BKernel.from_function(grid, lambda u, v: np.exp(-0.5 * (u - v) ** 2) / math.sqrt(2 * math.pi))
    return k.sup_distance(exact)


def convolution_checks(grid: ModelGrid) -> dict:
    g = gaussian_kernel(grid)
    gg = convolve(g, g)
    exact = BKernel.from_function(grid, lambda u, w: math.sqrt(math.pi) * np.exp(-0.25 * (u - w) ** 2))
    oracle = gg.sup_distance(exact, grid.interior_mask())
    a = translation_kernel(grid, lambda s: np.exp(-0.5 * s ** 2), lambda u: 1.0 + 0.5 * np.tanh(u))
    b = translation_kernel(grid, lambda s: np.exp(-0.5 * (s / 0.7) ** 2 - 0.3j * s))
    c = translation_kernel(grid, lambda s: np.exp(-0.5 * (s / 1.3) ** 2), lambda u: np.exp(-u ** 2 / 200))
    assoc = convolve(convolve(a, b), c).sup_distance(convolve(a, convolve(b, c)))
    adj = convolve(a, b).adjoint().sup_distance(convolve(b.adjoint(), a.adjoint()))
    return {"convolution_oracle": oracle, "associativity": assoc, "adjoint": adj}


def homomorphism_pairs(grid: ModelGrid, cutoff: float = 4.5) -> list:
    """Five pairs of quantized kernels with edge-stabilizing amplitudes.

    The cutoff keeps each kernel within ``|u - v| <= cutoff``, so composites
    fit inside the default restriction window of half-width 10.
    """

    def q(**kw):
        return quantize(gaussian_symbol(**kw), cutoff, grid)

    bump = Symbol.smooth(lambda u, xi: (1.0 + 0.25 * np.tanh(u)) * xi ** 2 * np.exp(-0.5 * (0.8 * xi) ** 2))
    return [
        ("plain", q(width=0.8), q(width=0.7)),
        ("amplitudes", q(width=0.8, amplitude=lambda u: 2.0 + np.tanh(u)),
         q(width=0.7, amplitude=lambda u: 1.0 + 0.5 * np.tanh(u))),
        ("shifted", q(width=0.7, shift=0.5), q(width=0.6, amplitude=lambda u: 1.5 - 0.5 * np.tanh(u))),
        ("complex", q(width=0.8, shift=-0.5, amplitude=lambda u: 1.0 + 0.5j * np.tanh(u)), q(width=0.6, shift=0.5)),
        ("second_moment", quantize(bump, cutoff, grid), q(width=0.7, amplitude=lambda u: 2.0 + np.tanh(u))),
    ]


def gaussian_mellin_error() -> float:
    I = IndicialFunction.from_function(0, lambda s: np.exp(-0.5 * s ** 2), half_width=12.0, n_half=1024)
    sp = mellin(I)
    return float(np.max(np.abs(sp.values - math.sqrt(2 * math.pi) * np.exp(-0.5 * sp.xi ** 2))))


def run_indicial(s: Settings) -> SuiteResult:
    checks, rows = [], []
    qerr = quantize_oracle_error(s.quantize_grid)
    checks.append(Check(f"indicial.quantize_oracle[{s.quantize_grid}]", qerr, s.tol("indicial.quantize_oracle")))
    for key, val in convolution_checks(ModelGrid(20.0, s.convolution_grid)).items():
        checks.append(Check(f"indicial.{key}[{s.convolution_grid}]", val, s.tol(f"indicial.{key}")))
    grid = ModelGrid(20.0, s.grid)
    checks.append(Check("indicial.mellin_oracle[gaussian]", gaussian_mellin_error(), s.tol("indicial.mellin_oracle")))
    for name, k1, k2 in homomorphism_pairs(grid):
        rep = indicial_homomorphism_check(k1, k2)
        for face, d in sorted(rep.defects.items()):
            checks.append(Check(f"indicial.homomorphism[{name},face{face}]", d, s.tol("indicial.homomorphism")))
            rows.append(_row("homomorphism", name, radius=face, value=d))
    return SuiteResult("indicial", checks, rows)


# -- stretched product ---------------------------------------------------------

def run_stretch(s: Settings) -> SuiteResult:
    checks, rows = [], []
    for N in (1, 2, 3):
        fit = taylor_decay_check(None, N)
        checks.append(Check(f"stretch.taylor_rate[N={N}]", fit.rate / N, s.tol("stretch.taylor_rate"), NEAR, 1.0))
        rows.append(_row("taylor_decay", f"N={N}", value=fit.rate))

    spec = interval_model()
    rng = s.rng(400)
    elements = gp.random_elements(spec, rng, s.samples)
    side = 0
    for g in elements:
        face = 2 if 2 in g.lam else 1
        rho = (lambda x: x) if face == 1 else (lambda x: 1.0 - x)
        side += bool(classify(embed(g, face, rho)).labels & {LB, RB})
    checks.append(Check("stretch.side_faces", float(side), s.tol("stretch.side_faces")))

    taus = rng.uniform(-0.999, 0.999, 1000)
    sigmas = rng.uniform(1e-3, 1.0, 1000)
    worst = max(abs(tau_of_pair(*beta_b(StretchedPoint(t, sg))) - t) for t, sg in zip(taus, sigmas))
    checks.append(Check("stretch.inverse_chart", worst, s.tol("stretch.inverse_chart")))

    triples = gp.random_composable_triples(spec, rng, 2000)
    worst = 0.0
    for a, b, _ in triples:
        if 1 not in a.lam:
            continue
        la = classify(embed(a)).lam
        lb = classify(embed(b)).lam
        lab = classify(embed(gp.compose(a, b))).lam
        worst = max(worst, abs(lab - la * lb) / abs(la * lb))
    checks.append(Check("stretch.fiber_product", worst, s.tol("stretch.fiber_product")))

    g = GroupoidElement((0.3,), (0.1,), {})
    agree = abs(tau_of_pair(0.3, 0.1) - gp.tau(spec, g, 1))
    checks.append(Check("stretch.tau_agreement", agree, s.tol("stretch.tau_agreement")))
    return SuiteResult("stretch", checks, rows)


RUNNERS = {
    "axioms": run_axioms,
    "transversality": run_transversality,
    "phi": run_phi,
    "schwartz": run_schwartz,
    "indicial": run_indicial,
    "stretch": run_stretch,
}
