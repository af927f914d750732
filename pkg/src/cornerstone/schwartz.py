"""Weighted sup-norms and decay diagnostics for functions on the interval groupoid.

Functions live on the groupoid of ``[0, 1]``: the interior pairs, in
coordinates ``(u, v)``, and the two boundary fibers, in the log coordinate
``s``. Polynomial weights are evaluated at ``phi``, so membership in the
rapidly decreasing class is judged by whether ``sup |P(phi) f|`` stops
growing as the ``phi``-radius doubles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .bcalc.grid import ModelGrid
from .bcalc.kernel import BKernel
from .bcalc.ops import (
    BDifferentialOperator,
    b_derivative,
    compose_diff_kernel,
    compose_kernel_diff,
    convolve,
    translation_kernel,
)
from .bcalc.symbols import plateau_cutoff
from .errors import GridMismatch, InsufficientDecay
from .model import IntervalModel

RADII = (10.0, 20.0, 40.0)
MAX_DEGREE = 12
STABILITY_THRESHOLD = 1e-2
FIT_RESIDUAL = 0.05
VALUE_FLOOR = 1e-300


# -- samples of the groupoid ---------------------------------------------------

@dataclass
class GammaSamples:
    """Points of the groupoid with their ``phi`` values.

    ``face`` is -1 for interior pairs and 0 or 1 on a boundary fiber; ``s``
    is ``u - v`` on the interior and the fiber log coordinate otherwise.
    """

    u: np.ndarray
    v: np.ndarray
    face: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    radius: float = np.inf

    def __len__(self):
        return len(self.s)

    def subset(self, mask) -> "GammaSamples":
        return GammaSamples(self.u[mask], self.v[mask], self.face[mask], self.s[mask], self.phi[mask], self.radius)

    def within(self, radius: float) -> "GammaSamples":
        mask = np.max(np.abs(self.phi), axis=1) <= radius + 1e-12
        out = self.subset(mask)
        out.radius = radius
        return out


def gamma_grid(model: IntervalModel | None = None, radius: float = 10.0,
               interior_step: float = 0.125, fiber_step: float = 1.0 / 1024) -> GammaSamples:
    """Samples with ``|phi|_inf <= radius``.

    Nodes are integer multiples of the steps, so grids for growing radii or
    halved steps are nested and suprema are monotone under refinement.
    """
    model = model or IntervalModel()
    m = int(np.floor(radius / interior_step + 1e-9))
    axis = np.arange(-m, m + 1) * interior_step
    U, V = np.meshgrid(axis, axis, indexing="ij")
    U, V = U.ravel(), V.ravel()
    k = int(np.floor(radius / fiber_step + 1e-9))
    sf = np.arange(-k, k + 1) * fiber_step
    nan = np.full(sf.shape, np.nan)
    parts = [
        (U, V, np.full(U.shape, -1), U - V, model.phi_interior(U, V)),
        (nan, nan, np.zeros(sf.shape, int), sf, model.phi_fiber(0, sf)),
        (nan, nan, np.ones(sf.shape, int), sf, model.phi_fiber(1, sf)),
    ]
    samples = GammaSamples(*(np.concatenate([p[c] for p in parts]) for c in range(5)))
    return samples.within(radius)


def kernel_samples(grid: ModelGrid, model: IntervalModel | None = None) -> GammaSamples:
    """Every grid pair ``(u_i, u_j)`` as an interior sample, row-major."""
    model = model or IntervalModel()
    U, V = np.meshgrid(grid.u, grid.u, indexing="ij")
    U, V = U.ravel(), V.ravel()
    return GammaSamples(U, V, np.full(U.shape, -1), U - V, model.phi_interior(U, V))


def phi_function(g: Callable) -> Callable:
    """Lift ``g(phi)`` (``phi`` of shape ``(N, 2)``) to a function on samples."""
    return lambda samples: g(samples.phi)


# -- weights -------------------------------------------------------------------

@dataclass(frozen=True)
class WeightPolynomial:
    """``sum c_alpha phi^alpha``; ``terms`` maps exponent tuples to coefficients."""

    terms: tuple

    def __post_init__(self):
        if self.degree > MAX_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds {MAX_DEGREE}")

    @classmethod
    def monomial(cls, *exponents, coefficient=1.0):
        return cls(((tuple(exponents), coefficient),))

    @classmethod
    def constant(cls, c=1.0, nvars=2):
        return cls((((0,) * nvars, c),))

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def __add__(self, other):
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0.0) + c
        return WeightPolynomial(tuple(sorted(acc.items())))

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        total = np.zeros(phi.shape[0], dtype=complex)
        for e, c in self.terms:
            term = np.full(phi.shape[0], c, dtype=complex)
            for k, p in enumerate(e):
                if p:
                    term = term * phi[:, k] ** p
            total += term
        return total

    def __str__(self):
        return " + ".join(
            f"{c:g}*" + "*".join(f"X{k + 1}^{p}" for k, p in enumerate(e) if p) if any(e) else f"{c:g}"
            for e, c in self.terms
        )


def monomials(degree_budget: int, nvars: int = 2) -> list:
    out = []
    for d in range(degree_budget + 1):
        for e in itertools.product(range(d + 1), repeat=nvars):
            if sum(e) == d:
                out.append(WeightPolynomial.monomial(*e))
    return out


# -- seminorms -----------------------------------------------------------------

@dataclass
class SeminormReport:
    sup_estimate: float
    attained_at: dict
    radius: float
    n_samples: int
    weight: str = ""


def _values(f, samples: GammaSamples) -> np.ndarray:
    return np.asarray(f(samples) if callable(f) else f, dtype=complex)


def s0_seminorm(f, P: WeightPolynomial, grid: GammaSamples) -> SeminormReport:
    """``sup |P(phi) f|`` over the samples; ``f`` is a callable or aligned values."""
    vals = np.abs(P(grid.phi) * _values(f, grid))
    if len(vals) == 0:
        return SeminormReport(0.0, {}, grid.radius, 0, str(P))
    k = int(np.argmax(vals))
    where = {"face": int(grid.face[k]), "s": float(grid.s[k]), "phi": grid.phi[k].tolist()}
    if grid.face[k] < 0:
        where.update(u=float(grid.u[k]), v=float(grid.v[k]))
    return SeminormReport(float(vals[k]), where, grid.radius, len(vals), str(P))


@dataclass
class SeminormProfile:
    reports: list

    @property
    def ratios(self) -> list:
        out = []
        for a, b in zip(self.reports, self.reports[1:]):
            if a.sup_estimate == 0.0:
                out.append(1.0 if b.sup_estimate == 0.0 else np.inf)
            else:
                out.append(b.sup_estimate / a.sup_estimate)
        return out

    @property
    def diverging(self) -> bool:
        """Estimate at least doubles when the radius doubles."""
        return bool(self.ratios) and self.ratios[-1] >= 2.0 * (1.0 - 1e-9)


def seminorm_profile(f, P: WeightPolynomial, grids: Sequence[GammaSamples], values=None) -> SeminormProfile:
    if values is None:
        return SeminormProfile([s0_seminorm(f, P, g) for g in grids])
    return SeminormProfile([s0_seminorm(v, P, g) for v, g in zip(values, grids)])


@dataclass
class S0Verdict:
    passed: bool
    rows: list  # (weight, radius, sup)
    failures: list

    def __bool__(self):
        return self.passed


def radius_family(model: IntervalModel | None = None, radii=RADII, **kw) -> list:
    return [gamma_grid(model, r, **kw) for r in radii]


def is_s0(f, degree_budget: int = 4, grids: Sequence[GammaSamples] | None = None,
          threshold: float = STABILITY_THRESHOLD, model: IntervalModel | None = None,
          values: Sequence | None = None) -> S0Verdict:
    """Stabilization of every monomial seminorm of degree ``<= degree_budget``.

    Passes when each ratio between consecutive radii is at most
    ``1 + threshold``. ``values`` may hold precomputed samples of ``f`` per
    grid (then ``f`` is ignored).
    """
    if grids is None:
        grids = radius_family(model)
    if values is None:
        values = [_values(f, g) for g in grids]
    absf = [np.abs(np.asarray(v)) for v in values]
    absphi = [np.abs(g.phi) for g in grids]
    rows, failures = [], []
    for P in monomials(degree_budget):
        (e, _), = P.terms
        sups = []
        for g, a, ph in zip(grids, absf, absphi):
            w = a * ph[:, 0] ** e[0] * ph[:, 1] ** e[1]
            sups.append(float(w.max()) if len(w) else 0.0)
            rows.append((str(P), g.radius, sups[-1]))
        prof = SeminormProfile([SeminormReport(s, {}, g.radius, 0) for s, g in zip(sups, grids)])
        bad = [q for q in prof.ratios if q > 1.0 + threshold]
        if bad:
            failures.append((str(P), max(bad)))
    return S0Verdict(not failures, rows, failures)


@lru_cache(maxsize=8)
def _sorted_kernel_samples(grid: ModelGrid, model: IntervalModel, radii: tuple):
    base = kernel_samples(grid, model)
    r = np.max(np.abs(base.phi), axis=1)
    order = np.argsort(r, kind="stable")
    cuts = np.searchsorted(r[order], np.asarray(radii) + 1e-12, side="right")
    absphi = np.abs(base.phi[order])
    return order, cuts, absphi[:, 0].copy(), absphi[:, 1].copy()


def is_s0_kernel(k: BKernel, degree_budget: int = 4, radii=RADII, threshold: float = STABILITY_THRESHOLD,
                 model: IntervalModel | None = None) -> S0Verdict:
    """:func:`is_s0` for a gridded kernel, sampled at its grid pairs.

    Samples are sorted by ``|phi|_inf`` once per grid so each weight needs
    a single pass; the result equals :func:`is_s0` on the nested grids.
    """
    radii = tuple(float(r) for r in radii)
    order, cuts, p0, p1 = _sorted_kernel_samples(k.grid, model or IntervalModel(), radii)
    a = np.abs(k.values.ravel())[order]
    pow0 = [np.ones_like(p0)]
    pow1 = [np.ones_like(p1)]
    for _ in range(degree_budget):
        pow0.append(pow0[-1] * p0)
        pow1.append(pow1[-1] * p1)
    rows, failures = [], []
    for P in monomials(degree_budget):
        (e, _), = P.terms
        w = a * pow0[e[0]] * pow1[e[1]]
        sups = [float(w[:c].max()) if c else 0.0 for c in cuts]
        for r, sup in zip(radii, sups):
            rows.append((str(P), r, sup))
        prof = SeminormProfile([SeminormReport(sup, {}, r, 0) for sup, r in zip(sups, radii)])
        bad = [q for q in prof.ratios if q > 1.0 + threshold]
        if bad:
            failures.append((str(P), max(bad)))
    return S0Verdict(not failures, rows, failures)


# -- the Schwartz class ----------------------------------------------------------

def default_battery(grid: ModelGrid) -> list:
    """Identity, ``d_u``, ``d_u^2`` and compactly supported Gaussians of widths 0.5, 1, 2."""
    battery = [
        ("identity", BDifferentialOperator([1.0])),
        ("d_u", b_derivative(1)),
        ("d_u^2", b_derivative(2)),
    ]
    for w in (0.5, 1.0, 2.0):
        profile = (lambda s, w=w: np.exp(-0.5 * (s / w) ** 2) * plateau_cutoff(s, 6.0 * w))
        battery.append((f"gaussian_{w:g}", translation_kernel(grid, profile)))
    return battery


@dataclass
class SchwartzVerdict:
    passed: bool
    f_in_s0: S0Verdict
    evidence: list = field(default_factory=list)  # (name, side, S0Verdict)

    def __bool__(self):
        return self.passed


def _left(op, f: BKernel) -> BKernel:
    return compose_diff_kernel(op, f) if isinstance(op, BDifferentialOperator) else convolve(op, f)


def _right(f: BKernel, op) -> BKernel:
    return compose_kernel_diff(f, op) if isinstance(op, BDifferentialOperator) else convolve(f, op)


def schwartz_test(f: BKernel, kernels=None, model: IntervalModel | None = None,
                  degree_budget: int = 4, threshold: float = STABILITY_THRESHOLD) -> SchwartzVerdict:
    """``f`` and both products ``kappa * f``, ``f * kappa`` over a test battery belong to S0.

    ``kernels`` holds :class:`BKernel` or :class:`BDifferentialOperator`
    items, optionally as ``(name, item)`` pairs; the default is
    :func:`default_battery`.
    """
    if kernels is None:
        kernels = default_battery(f.grid)
    named = [kv if isinstance(kv, tuple) else (f"kernel_{n}", kv) for n, kv in enumerate(kernels)]
    for _, op in named:
        if isinstance(op, BKernel) and op.grid != f.grid:
            raise GridMismatch(f"test kernel grid {op.grid} differs from {f.grid}")
    base = is_s0_kernel(f, degree_budget, threshold=threshold, model=model)
    evidence = []
    ok = base.passed
    for name, op in named:
        for side, prod in (("left", _left(op, f)), ("right", _right(f, op))):
            verdict = is_s0_kernel(prod, degree_budget, threshold=threshold, model=model)
            evidence.append((name, side, verdict))
            ok &= verdict.passed
    return SchwartzVerdict(bool(ok), base, evidence)


# -- decay rates -----------------------------------------------------------------

@dataclass
class DecayFit:
    rate: float
    window: tuple
    residual: float
    superexponential: bool
    shell_slopes: tuple


def _linfit(t, y):
    A = np.stack([t, np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    return float(coef[0]), resid


def fit_decay_rate(t, values, min_samples: int = 8, residual_tol: float = FIT_RESIDUAL) -> DecayFit:
    """Slope of ``-log|f|`` against ``t`` over the widest passing dyadic window.

    Windows are ``[T / 2^j, T]`` with ``T`` the largest ``t`` where ``|f|``
    is above the underflow floor; the widest one with max fit residual
    below ``residual_tol`` is used.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(np.asarray(values))
    ok = np.isfinite(a) & (a >= VALUE_FLOOR) & (t > 0)
    if ok.sum() < min_samples:
        raise InsufficientDecay("too few samples above the underflow floor")
    t, y = t[ok], np.log(a[ok])
    T = float(t.max())
    best = None
    j = 1
    while True:
        lo = T / 2 ** j
        sel = t >= lo
        if sel.sum() < min_samples:
            j += 1
            if lo < t.min():
                break
            continue
        slope, resid = _linfit(t[sel], y[sel])
        if resid < residual_tol:
            best = (slope, (lo, T), resid)
        elif best is not None:
            break
        if lo <= t.min():
            break
        j += 1
    if best is None:
        sel = t >= T / 2
        if sel.sum() < 2:
            raise InsufficientDecay("window too small for a fit")
        slope, resid = _linfit(t[sel], y[sel])
        best = (slope, (T / 2, T), resid)
    shells = []
    for k in range(2):
        sel = (t >= T / 2 ** (k + 1)) & (t <= T / 2 ** k)
        shells.append(_linfit(t[sel], y[sel])[0] if sel.sum() >= 2 else np.nan)
    outer, inner = shells
    superexp = bool(np.isfinite(outer) and np.isfinite(inner) and outer < -1e-3
                    and abs(outer) > 1.2 * abs(inner))
    slope, window, resid = best
    return DecayFit(0.0 - slope, window, resid, superexp, tuple(shells))


def decay_exponent(f: Callable, direction, radius: float = 40.0, num: int = 4097) -> DecayFit:
    """Exponential decay rate of ``f(phi)`` along the ray ``phi = t d``, ``|d|_inf = 1``."""
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    d = d / np.max(np.abs(d))
    t = np.linspace(0.0, radius, num)
    phi = t[:, None] * d[None, :]
    return fit_decay_rate(t, f(phi))
