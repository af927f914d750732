"""Elements and algebra of the puffed groupoid in trivialized coordinates.

An element is a triple ``(x, y, lam)``: range ``x``, source ``y`` and one
nonzero scale ``lam[j]`` for every hypersurface ``V_j`` containing both
points. Interior pairs carry an empty ``lam``. The ``positive`` variant
(all scales positive, both points in the positive part) is the groupoid
of the manifold with corners; ``full`` allows any nonzero scales and
points anywhere in ``M``.

Fiber scales follow the convention ``lam = lim rho(range) / rho(source)``,
which is the one making the log-ratio homomorphism continuous.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .decoupage import (
    EPS_FACE,
    DecoupageSpec,
    FaceSignature,
    active_faces,
    enumerate_faces,
    is_positive_part,
)
from .errors import NotComposable, OnFaceWithoutFiber, SignatureMismatch

POSITIVE = "positive"
FULL = "full"

EPS_PT = 1e-6
EPS_RATIO = 1e-6


@dataclass(frozen=True)
class GroupoidElement:
    x: tuple
    y: tuple
    lam: Mapping = field(default_factory=dict)
    variant: str = POSITIVE

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(c) for c in self.x))
        object.__setattr__(self, "y", tuple(float(c) for c in self.y))
        object.__setattr__(self, "lam", {int(k): float(v) for k, v in sorted(self.lam.items())})
        if self.variant not in (POSITIVE, FULL):
            raise ValueError(f"unknown variant {self.variant!r}")
        if any(v == 0.0 for v in self.lam.values()):
            raise ValueError("fiber scales must be nonzero")
        if self.variant == POSITIVE and any(v < 0.0 for v in self.lam.values()):
            raise ValueError("positive variant needs positive fiber scales")

    @property
    def range(self):
        return self.x

    @property
    def source(self):
        return self.y

    @property
    def signature(self) -> FaceSignature:
        return FaceSignature(frozenset(self.lam))

    def to_dict(self):
        return {
            "x": list(self.x),
            "y": list(self.y),
            "lambda": {str(k): v for k, v in self.lam.items()},
            "variant": self.variant,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["x"], doc["y"], {int(k): v for k, v in doc.get("lambda", {}).items()},
                   doc.get("variant", POSITIVE))


def source(g: GroupoidElement):
    return g.y


def range_of(g: GroupoidElement):
    return g.x


def unit(spec: DecoupageSpec, x, variant=POSITIVE) -> GroupoidElement:
    J = active_faces(spec, x)
    return GroupoidElement(tuple(x), tuple(x), {j: 1.0 for j in J}, variant)


def inverse(g: GroupoidElement) -> GroupoidElement:
    return GroupoidElement(g.y, g.x, {k: 1.0 / v for k, v in g.lam.items()}, g.variant)


def compose(g1: GroupoidElement, g2: GroupoidElement) -> GroupoidElement:
    """``g1 o g2``; defined when the source of ``g1`` is the range of ``g2``."""
    if g1.variant != g2.variant:
        raise NotComposable(f"variants differ: {g1.variant} vs {g2.variant}")
    if len(g1.y) != len(g2.x) or any(abs(a - b) > EPS_FACE for a, b in zip(g1.y, g2.x)):
        raise NotComposable(f"source {g1.y} does not match range {g2.x}")
    if g1.lam.keys() != g2.lam.keys():
        raise NotComposable(f"signatures differ: {sorted(g1.lam)} vs {sorted(g2.lam)}")
    lam = {k: g1.lam[k] * g2.lam[k] for k in g1.lam}
    return GroupoidElement(g1.x, g2.y, lam, g1.variant)


def violations(spec: DecoupageSpec, g: GroupoidElement) -> list:
    """Reasons ``g`` fails to be an element; empty when it is one."""
    out = []
    Jx, Jy = active_faces(spec, g.x), active_faces(spec, g.y)
    if Jx != Jy:
        out.append(f"range faces {Jx} differ from source faces {Jy}")
    if g.signature != Jx:
        out.append(f"fiber keys {g.signature} differ from active faces {Jx}")
    if g.variant == POSITIVE:
        if not spec.fully_oriented:
            out.append("positive variant needs every hypersurface oriented")
        if not (is_positive_part(spec, g.x) and is_positive_part(spec, g.y)):
            out.append("endpoints leave the positive part")
    return out


def is_member(spec: DecoupageSpec, g: GroupoidElement) -> bool:
    return not violations(spec, g)


def allclose(g1: GroupoidElement, g2: GroupoidElement, atol=1e-12) -> bool:
    if g1.variant != g2.variant or g1.lam.keys() != g2.lam.keys():
        return False
    return (
        np.allclose(g1.x, g2.x, rtol=0, atol=atol)
        and np.allclose(g1.y, g2.y, rtol=0, atol=atol)
        and all(abs(g1.lam[k] - g2.lam[k]) <= atol * max(1.0, abs(g2.lam[k])) for k in g1.lam)
    )


def phi_hom(spec: DecoupageSpec, g: GroupoidElement) -> np.ndarray:
    """Log-ratio homomorphism to ``R^{|I|}``.

    Inactive components are ``log rho_i(x) - log rho_i(y)``, active ones
    ``log lam_i``.
    """
    if g.variant != POSITIVE:
        raise ValueError("phi is defined on the positive variant only")
    rx, ry = spec.rho(g.x), spec.rho(g.y)
    out = np.empty(len(spec.indices))
    for k, i in enumerate(spec.indices):
        if i in g.lam:
            out[k] = math.log(g.lam[i])
            continue
        if rx[k] <= EPS_FACE or ry[k] <= EPS_FACE:
            raise OnFaceWithoutFiber(f"rho_{i} vanishes at an endpoint but {i} carries no fiber scale")
        out[k] = math.log(rx[k]) - math.log(ry[k])
    return out


def tau(spec: DecoupageSpec, g: GroupoidElement, i: int) -> float:
    """Per-face coordinate of the b-stretched product, equal to tanh(phi_i / 2).

    Inactive faces use the ratio ``(rho(x) - rho(y)) / (rho(x) + rho(y))``
    directly; fiber scales use ``(lam - 1) / (lam + 1)``.
    """
    if g.variant != POSITIVE:
        raise ValueError("tau is defined on the positive variant only")
    if i in g.lam:
        lam = g.lam[i]
        return (lam - 1.0) / (lam + 1.0)
    a, b = float(spec[i](g.x)), float(spec[i](g.y))
    if a <= EPS_FACE or b <= EPS_FACE:
        raise OnFaceWithoutFiber(f"rho_{i} vanishes at an endpoint but {i} carries no fiber scale")
    return (a - b) / (a + b)


# -- convergence in the glued topology ---------------------------------------

@dataclass
class ConvergenceCase:
    spec: DecoupageSpec
    sequence: Sequence
    candidate: GroupoidElement
    tolerances: tuple = (EPS_PT, EPS_RATIO)
    params: Sequence | None = None  # extrapolation nodes t_n -> 0; defaults to 1/n


@dataclass
class ConvergenceVerdict:
    converges: bool
    point_error: float
    lambda_error: float
    ratio_error: float
    ratio_limits: dict
    reverse_ratio_limits: dict
    phi_limit: np.ndarray | None
    phi_candidate: np.ndarray | None
    phi_continuous: bool | None
    reasons: list

    def __bool__(self):
        return self.converges


def richardson_limit(values, nodes, window=5):
    """Polynomial extrapolation to ``t = 0`` through the last ``window`` terms.

    Returns the estimates from the last window and from the window one term
    earlier, so the caller can judge stability.
    """
    values = np.asarray(values, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    if len(values) < window + 1:
        raise ValueError(f"need at least {window + 1} terms, got {len(values)}")

    def at_zero(v, t):
        total = 0.0
        for k in range(len(t)):
            w = 1.0
            for m in range(len(t)):
                if m != k:
                    w *= t[m] / (t[m] - t[k])
            total += w * v[k]
        return total

    last = at_zero(values[-window:], nodes[-window:])
    prev = at_zero(values[-window - 1:-1], nodes[-window - 1:-1])
    return last, prev


def _limit_error(values, nodes, target):
    with np.errstate(all="ignore"):
        last, prev = richardson_limit(values, nodes)
    if not (np.isfinite(last) and np.isfinite(prev)):
        return math.inf, last
    return max(abs(last - target), abs(last - prev)), last


def is_convergent(case: ConvergenceCase) -> ConvergenceVerdict:
    """Numerical proxy for convergence of a sequence to a glued element.

    Point coordinates, existing fiber scales and the ratios
    ``rho_j(x_n) / rho_j(y_n)`` for newly active faces are extrapolated with
    :func:`richardson_limit` and compared with the candidate.
    """
    spec, seq, cand = case.spec, list(case.sequence), case.candidate
    eps_pt, eps_ratio = case.tolerances
    J = seq[0].signature.active
    if any(g.signature.active != J for g in seq):
        raise SignatureMismatch("sequence elements have different signatures")
    Jp = cand.signature.active
    if not J <= Jp:
        raise SignatureMismatch(f"sequence signature {sorted(J)} is not contained in {sorted(Jp)}")
    nodes = case.params if case.params is not None else [1.0 / (k + 1) for k in range(len(seq))]
    reasons = []

    xs = np.array([g.x for g in seq])
    ys = np.array([g.y for g in seq])
    point_error = 0.0
    for arr, target in ((xs, cand.x), (ys, cand.y)):
        for c in range(arr.shape[1]):
            err, _ = _limit_error(arr[:, c], nodes, target[c])
            point_error = max(point_error, err)
    if point_error > eps_pt:
        reasons.append(f"endpoints do not converge (error {point_error:.3e})")

    lambda_error = 0.0
    for j in J:
        err, _ = _limit_error([g.lam[j] for g in seq], nodes, cand.lam[j])
        lambda_error = max(lambda_error, err)
    if lambda_error > eps_ratio:
        reasons.append(f"fiber scales do not converge (error {lambda_error:.3e})")

    ratio_error = 0.0
    ratio_limits, reverse_limits = {}, {}
    for j in sorted(Jp - J):
        with np.errstate(all="ignore"):
            rx = np.array([float(spec[j](g.x)) for g in seq])
            ry = np.array([float(spec[j](g.y)) for g in seq])
            err, lim = _limit_error(rx / ry, nodes, cand.lam[j])
            _, rlim = _limit_error(ry / rx, nodes, 1.0 / cand.lam[j])
        ratio_limits[j] = lim
        reverse_limits[j] = rlim
        ratio_error = max(ratio_error, err)
    if ratio_error > eps_ratio:
        reasons.append(f"defining-function ratios do not converge to the fiber scale (error {ratio_error:.3e})")

    phi_limit = phi_cand = None
    phi_ok = None
    if cand.variant == POSITIVE and all(g.variant == POSITIVE for g in seq):
        try:
            phis = np.array([phi_hom(spec, g) for g in seq])
            phi_cand = phi_hom(spec, cand)
        except (OnFaceWithoutFiber, ValueError):
            phis = None
        if phis is not None:
            phi_limit = np.empty(phis.shape[1])
            worst = 0.0
            for c in range(phis.shape[1]):
                err, lim = _limit_error(phis[:, c], nodes, phi_cand[c])
                phi_limit[c] = lim
                worst = max(worst, err)
            phi_ok = bool(worst <= eps_ratio)

    return ConvergenceVerdict(
        converges=not reasons,
        point_error=point_error,
        lambda_error=lambda_error,
        ratio_error=ratio_error,
        ratio_limits=ratio_limits,
        reverse_ratio_limits=reverse_limits,
        phi_limit=phi_limit,
        phi_candidate=phi_cand,
        phi_continuous=phi_ok,
        reasons=reasons,
    )


# -- single-hypersurface charts ------------------------------------------------

@dataclass(frozen=True)
class ChartImage:
    pair: tuple | None  # (point at (y, t), point at (x, lam t)) when t != 0
    element: GroupoidElement


def chart_psi(spec: DecoupageSpec, x, y, t: float, lam: float, index: int = 1) -> ChartImage:
    """Chart of the puff along one coordinate hypersurface ``V_index``.

    For ``t != 0`` the image is the interior pair whose source sits at
    normal coordinate ``t`` over ``y`` and whose range sits at ``lam * t``
    over ``x``; at ``t = 0`` it is the fiber element ``(x, y, lam)``.
    """
    h = spec[index]
    if h.kind != "coordinate":
        raise ValueError("charts are built for coordinate hypersurfaces")
    if lam == 0:
        raise ValueError("lam must be nonzero")
    others = [i for i in spec.indices if i != index]
    for base in (x, y):
        if abs(float(h(base))) > EPS_FACE:
            raise ValueError(f"base point {tuple(base)} is not on V_{index}")
        if any(abs(float(spec[i](base))) <= EPS_FACE for i in others):
            raise ValueError("base points must avoid the other hypersurfaces")

    def lift(base, normal):
        p = list(map(float, base))
        p[h.axis - 1] = h.offset + h.sign * normal
        return tuple(p)

    if t == 0:
        variant = POSITIVE if lam > 0 and is_positive_part(spec, x) and is_positive_part(spec, y) else FULL
        return ChartImage(None, GroupoidElement(tuple(x), tuple(y), {index: lam}, variant))
    first, second = lift(y, t), lift(x, lam * t)
    positive = is_positive_part(spec, first) and is_positive_part(spec, second)
    return ChartImage((first, second), GroupoidElement(second, first, {}, POSITIVE if positive else FULL))


# -- fibers and random sampling ------------------------------------------------

def _axis_bounds(spec: DecoupageSpec, positive: bool, box: float):
    bounds = []
    for axis in range(1, spec.ambient_dim + 1):
        lo, hi = -box, box
        if positive:
            for h in spec.hypersurfaces:
                if h.axis == axis:
                    if h.sign > 0:
                        lo = max(lo, h.offset)
                    else:
                        hi = min(hi, h.offset)
        bounds.append((lo, hi))
    return bounds


def sample_face_points(spec: DecoupageSpec, J, rng: np.random.Generator, size: int,
                       positive: bool = True, margin: float = 1e-2, box: float = 2.0) -> np.ndarray:
    """Uniform-ish samples of the open face ``F_J`` (rejection on a box)."""
    if not spec.first_class:
        raise ValueError("sampling needs coordinate or reparameterized defining functions")
    J = frozenset(J)
    bounds = _axis_bounds(spec, positive, box)
    fixed = {spec[j].axis: spec[j].offset for j in J}
    out = np.empty((0, spec.ambient_dim))
    others = [i for i in spec.indices if i not in J]
    for _ in range(200):
        need = size - len(out)
        if need <= 0:
            break
        batch = max(2 * need, 16)
        pts = np.empty((batch, spec.ambient_dim))
        for a, (lo, hi) in enumerate(bounds, start=1):
            pts[:, a - 1] = fixed[a] if a in fixed else rng.uniform(lo, hi, batch)
        ok = np.ones(batch, dtype=bool)
        for j in J:
            ok &= np.abs(spec[j](pts)) <= EPS_FACE
        for i in others:
            r = spec[i](pts)
            ok &= (r >= margin) if positive else (np.abs(r) >= margin)
        out = np.vstack([out, pts[ok]])
    if len(out) < size:
        raise ValueError(f"face {sorted(J)} could not be sampled")
    return out[:size]


def _random_scales(rng, J, variant, spread):
    lam = {}
    for j in sorted(J):
        v = math.exp(rng.uniform(-spread, spread))
        if variant == FULL and rng.random() < 0.5:
            v = -v
        lam[j] = v
    return lam


def _face_choices(spec: DecoupageSpec, variant):
    if variant == POSITIVE:
        return [f.active for f in enumerate_faces(spec)]
    faces = []
    for size in range(len(spec.indices) + 1):
        for J in itertools.combinations(spec.indices, size):
            axes = {}
            ok = True
            for j in J:
                h = spec[j]
                if h.axis in axes and abs(axes[h.axis] - h.offset) > EPS_FACE:
                    ok = False
                axes[h.axis] = h.offset
            if ok:
                faces.append(frozenset(J))
    return faces


def random_composable_batches(spec: DecoupageSpec, rng: np.random.Generator, count: int,
                              variant=POSITIVE, spread: float = 2.0):
    """Batches ``(a, b, c)`` of ``count`` elements each with ``a o b`` and ``b o c`` defined.

    Faces are drawn uniformly among the admissible ones and scales are
    ``exp(U(-spread, spread))``, with random signs in the full variant.
    """
    faces = _face_choices(spec, variant)
    which = rng.integers(len(faces), size=count)
    n, k = spec.ambient_dim, len(spec.indices)
    pts = np.empty((count, 4, n))
    lam = np.full((3, count, k), np.nan)
    for f_idx, J in enumerate(faces):
        slots = np.flatnonzero(which == f_idx)
        if len(slots) == 0:
            continue
        pts[slots] = sample_face_points(spec, J, rng, 4 * len(slots), positive=variant == POSITIVE).reshape(-1, 4, n)
        cols = [j - 1 for j in sorted(J)]
        if cols:
            scales = np.exp(rng.uniform(-spread, spread, (3, len(slots), len(cols))))
            if variant == FULL:
                scales *= np.where(rng.random(scales.shape) < 0.5, -1.0, 1.0)
            lam[np.ix_(range(3), slots, cols)] = scales
    return tuple(ElementBatch(pts[:, m], pts[:, m + 1], lam[m], variant) for m in range(3))


def random_composable_triples(spec: DecoupageSpec, rng: np.random.Generator, count: int,
                              variant=POSITIVE, spread: float = 2.0) -> list:
    """``count`` triples ``(a, b, c)`` with ``a o b`` and ``b o c`` defined."""
    a, b, c = random_composable_batches(spec, rng, count, variant, spread)
    return [(a[i], b[i], c[i]) for i in range(count)]


def random_elements(spec: DecoupageSpec, rng: np.random.Generator, count: int,
                    variant=POSITIVE, spread: float = 2.0) -> list:
    return [t[0] for t in random_composable_triples(spec, rng, count, variant, spread)]


# -- batches -------------------------------------------------------------------

@dataclass(frozen=True)
class ElementBatch:
    """``N`` elements as arrays; ``lam[:, k]`` is NaN where face ``k + 1`` carries no scale.

    The batch operations below implement the same algebra as the scalar
    functions, vectorized over the first axis.
    """

    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    variant: str = POSITIVE

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i) -> GroupoidElement:
        row = self.lam[i]
        return GroupoidElement(self.x[i], self.y[i],
                               {k + 1: v for k, v in enumerate(row) if not np.isnan(v)}, self.variant)

    @property
    def active(self) -> np.ndarray:
        return ~np.isnan(self.lam)

    @classmethod
    def from_elements(cls, spec: DecoupageSpec, elements: Sequence[GroupoidElement]) -> "ElementBatch":
        variants = {g.variant for g in elements}
        if len(variants) != 1:
            raise ValueError("a batch holds one variant")
        lam = np.full((len(elements), len(spec.indices)), np.nan)
        for r, g in enumerate(elements):
            for j, v in g.lam.items():
                lam[r, j - 1] = v
        return cls(np.array([g.x for g in elements], dtype=float), np.array([g.y for g in elements], dtype=float),
                   lam, variants.pop())


def batch_compose(a: ElementBatch, b: ElementBatch) -> ElementBatch:
    if a.variant != b.variant:
        raise NotComposable(f"variants differ: {a.variant} vs {b.variant}")
    bad = np.any(np.abs(a.y - b.x) > EPS_FACE, axis=1) | np.any(a.active != b.active, axis=1)
    if np.any(bad):
        raise NotComposable(f"{int(bad.sum())} pairs are not composable (first at {int(np.argmax(bad))})")
    return ElementBatch(a.x, b.y, a.lam * b.lam, a.variant)


def batch_inverse(a: ElementBatch) -> ElementBatch:
    return ElementBatch(a.y, a.x, 1.0 / a.lam, a.variant)


def batch_unit(spec: DecoupageSpec, x, variant=POSITIVE) -> ElementBatch:
    x = np.asarray(x, dtype=float)
    lam = np.where(np.abs(spec.rho(x)) <= EPS_FACE, 1.0, np.nan)
    return ElementBatch(x, x, lam, variant)


def batch_is_member(spec: DecoupageSpec, g: ElementBatch) -> np.ndarray:
    rx, ry = spec.rho(g.x), spec.rho(g.y)
    fx, fy = np.abs(rx) <= EPS_FACE, np.abs(ry) <= EPS_FACE
    ok = np.all((fx == fy) & (fx == g.active), axis=1)
    if g.variant == POSITIVE:
        ok &= spec.fully_oriented
        ok &= np.all(rx >= -EPS_FACE, axis=1) & np.all(ry >= -EPS_FACE, axis=1)
        ok &= np.all(np.where(g.active, g.lam > 0, True), axis=1)
    return ok


def batch_phi(spec: DecoupageSpec, g: ElementBatch) -> np.ndarray:
    """Vectorized :func:`phi_hom`, shape ``(N, |I|)``."""
    if g.variant != POSITIVE:
        raise ValueError("phi is defined on the positive variant only")
    rx, ry = spec.rho(g.x), spec.rho(g.y)
    if np.any(~g.active & ((rx <= EPS_FACE) | (ry <= EPS_FACE))):
        raise OnFaceWithoutFiber("a defining function vanishes at an endpoint without a fiber scale")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(g.active, np.log(g.lam), np.log(rx) - np.log(ry))


def batch_tau(spec: DecoupageSpec, g: ElementBatch) -> np.ndarray:
    """Vectorized :func:`tau` for all faces, from ratios (never through ``phi``)."""
    if g.variant != POSITIVE:
        raise ValueError("tau is defined on the positive variant only")
    rx, ry = spec.rho(g.x), spec.rho(g.y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(g.active, (g.lam - 1.0) / (g.lam + 1.0), (rx - ry) / (rx + ry))


def batch_defect(g1: ElementBatch, g2: ElementBatch) -> np.ndarray:
    """Per element: max endpoint difference and relative scale difference, ``inf`` across signatures."""
    d = np.maximum(np.max(np.abs(g1.x - g2.x), axis=1), np.max(np.abs(g1.y - g2.y), axis=1))
    with np.errstate(invalid="ignore"):
        rel = np.where(g1.active & g2.active, np.abs(g1.lam - g2.lam) / np.abs(g2.lam), 0.0)
    if rel.shape[1]:
        d = np.maximum(d, np.max(rel, axis=1))
    return np.where(np.all(g1.active == g2.active, axis=1), d, np.inf)


@dataclass(frozen=True)
class FiberDescriptor:
    """Source fiber ``{g : s(g) = x}``, a copy of ``F_J x (R_+^*)^{|J|}``."""

    spec: DecoupageSpec
    point: tuple
    signature: FaceSignature

    @property
    def codimension(self) -> int:
        return self.signature.codimension

    def sample(self, rng: np.random.Generator, size: int, spread: float = 2.0) -> list:
        pts = sample_face_points(self.spec, self.signature.active, rng, size)
        return [
            GroupoidElement(tuple(p), self.point, _random_scales(rng, self.signature.active, POSITIVE, spread))
            for p in pts
        ]


def gamma_fiber(spec: DecoupageSpec, x) -> FiberDescriptor:
    if not is_positive_part(spec, x):
        raise ValueError(f"{tuple(x)} is not in the positive part")
    return FiberDescriptor(spec, tuple(float(c) for c in x), active_faces(spec, x))
