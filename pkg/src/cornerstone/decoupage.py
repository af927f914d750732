"""Decoupages in coordinate models.

A decoupage is a manifold ``M`` (here ``R^n``) with a finite family of
codimension-one submanifolds ``V_i``, each cut out by a defining function
``rho_i``. Faces are indexed by subsets ``J`` of the (1-based) index set
``I``; the positive part ``{rho_i >= 0 for all i}`` is the manifold with
corners the groupoid lives over.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AmbientTooLarge, SampleNotOnAnyFace, SpecError
from .expr import Expression

EPS_FACE = 1e-12
SIGMA_TOL = 1e-8
MAX_ENUMERABLE = 16


@dataclass(frozen=True, eq=False)
class DefiningFunction:
    """Defining function of one hypersurface.

    ``coordinate``: ``rho(x) = sign * (x[axis] - offset)``.
    ``reparameterized``: the coordinate function times a positive factor.
    ``general``: arbitrary callables; only :func:`check_transverse` accepts it.
    """

    kind: str
    axis: int | None = None
    offset: float = 0.0
    sign: float = 1.0
    factor: Expression | None = None
    func: Callable | None = None
    grad_func: Callable | None = None

    @classmethod
    def coordinate(cls, axis, offset=0.0, sign=1.0):
        return cls("coordinate", axis=axis, offset=float(offset), sign=float(sign))

    @classmethod
    def reparameterized(cls, axis, factor, offset=0.0, sign=1.0):
        return cls("reparameterized", axis=axis, offset=float(offset), sign=float(sign), factor=factor)

    @classmethod
    def general(cls, func, grad_func):
        return cls("general", func=func, grad_func=grad_func)

    @property
    def first_class(self) -> bool:
        return self.kind != "general"

    def base(self, x):
        """The coordinate part ``sign * (x[axis] - offset)``; same zero set as rho."""
        x = np.asarray(x, dtype=float)
        return self.sign * (x[..., self.axis - 1] - self.offset)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "coordinate":
            return self.base(x)
        if self.kind == "reparameterized":
            return self.factor(x) * self.base(x)
        return np.asarray(self.func(x), dtype=float)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "general":
            return np.asarray(self.grad_func(x), dtype=float)
        e = np.zeros(x.shape, dtype=float)
        e[..., self.axis - 1] = self.sign
        if self.kind == "coordinate":
            return e
        f = self.factor(x)[..., None]
        return f * e + self.base(x)[..., None] * self.factor.gradient(x)

    def to_dict(self):
        if self.kind == "general":
            text = getattr(self.func, "text", None)
            if text is None:
                raise ValueError("general defining functions built from callables do not serialize")
            return {"kind": "general", "expr": text}
        out = {"kind": self.kind, "axis": self.axis}
        if self.offset != 0.0:
            out["offset"] = self.offset
        if self.sign != 1.0:
            out["sign"] = self.sign
        if self.kind == "reparameterized":
            out["f"] = self.factor.text
        return out


@dataclass(frozen=True)
class FaceSignature:
    active: frozenset

    @property
    def codimension(self) -> int:
        return len(self.active)

    def __contains__(self, i):
        return i in self.active

    def __iter__(self):
        return iter(sorted(self.active))

    def __len__(self):
        return len(self.active)

    def __repr__(self):
        return "J{" + ",".join(str(i) for i in sorted(self.active)) + "}"


def signature(*indices) -> FaceSignature:
    return FaceSignature(frozenset(indices))


@dataclass(frozen=True, eq=False)
class DecoupageSpec:
    ambient_dim: int
    hypersurfaces: tuple
    oriented: tuple = field(default=())

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise SpecError("ambient_dim", "must be a positive integer")
        if len(self.hypersurfaces) < 1:
            raise SpecError("hypersurfaces", "at least one hypersurface is required")
        if not self.oriented:
            object.__setattr__(self, "oriented", (True,) * len(self.hypersurfaces))
        if len(self.oriented) != len(self.hypersurfaces):
            raise SpecError("oriented", "needs one flag per hypersurface")
        for k, h in enumerate(self.hypersurfaces):
            if h.first_class and not 1 <= h.axis <= self.ambient_dim:
                raise SpecError(f"hypersurfaces[{k}].axis", f"must lie in 1..{self.ambient_dim}")

    @property
    def indices(self) -> tuple:
        return tuple(range(1, len(self.hypersurfaces) + 1))

    def __getitem__(self, i) -> DefiningFunction:
        return self.hypersurfaces[i - 1]

    def rho(self, x):
        """All defining functions at ``x``; shape ``(..., |I|)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([h(x) for h in self.hypersurfaces], axis=-1)

    @property
    def fully_oriented(self) -> bool:
        return all(self.oriented)

    @property
    def first_class(self) -> bool:
        return all(h.first_class for h in self.hypersurfaces)

    def to_dict(self):
        return {
            "ambient_dim": self.ambient_dim,
            "hypersurfaces": [h.to_dict() for h in self.hypersurfaces],
            "oriented": list(self.oriented),
        }

    @classmethod
    def from_dict(cls, doc) -> "DecoupageSpec":
        if not isinstance(doc, dict):
            raise SpecError("<root>", "expected a JSON object")
        unknown = set(doc) - {"ambient_dim", "hypersurfaces", "oriented"}
        if unknown:
            raise SpecError(sorted(unknown)[0], "unknown key")
        n = doc.get("ambient_dim")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise SpecError("ambient_dim", "must be a positive integer")
        raw = doc.get("hypersurfaces")
        if not isinstance(raw, list) or not raw:
            raise SpecError("hypersurfaces", "must be a non-empty list")
        hyps = tuple(_parse_hypersurface(h, n, f"hypersurfaces[{k}]") for k, h in enumerate(raw))
        oriented = doc.get("oriented", [True] * len(hyps))
        if not isinstance(oriented, list) or not all(isinstance(o, bool) for o in oriented):
            raise SpecError("oriented", "must be a list of booleans")
        if len(oriented) != len(hyps):
            raise SpecError("oriented", "needs one flag per hypersurface")
        return cls(n, hyps, tuple(oriented))

    @classmethod
    def from_json(cls, text: str) -> "DecoupageSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError("<root>", f"invalid JSON: {exc.msg}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "DecoupageSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _parse_hypersurface(h, n, where):
    if not isinstance(h, dict):
        raise SpecError(where, "expected an object")
    kind = h.get("kind")
    allowed = {
        "coordinate": {"kind", "axis", "offset", "sign"},
        "reparameterized": {"kind", "axis", "offset", "sign", "f"},
        "general": {"kind", "expr"},
    }
    if kind not in allowed:
        raise SpecError(f"{where}.kind", f"unknown kind {kind!r}")
    unknown = set(h) - allowed[kind]
    if unknown:
        raise SpecError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    if kind == "general":
        text = h.get("expr")
        if not isinstance(text, str):
            raise SpecError(f"{where}.expr", "must be a string")
        try:
            e = Expression(text, n)
        except ValueError as exc:
            raise SpecError(f"{where}.expr", str(exc)) from None
        return DefiningFunction.general(e, e.gradient)
    axis = h.get("axis")
    if isinstance(axis, bool) or not isinstance(axis, int) or not 1 <= axis <= n:
        raise SpecError(f"{where}.axis", f"must be an integer in 1..{n}")
    offset = h.get("offset", 0.0)
    if isinstance(offset, bool) or not isinstance(offset, (int, float)):
        raise SpecError(f"{where}.offset", "must be a number")
    sign = h.get("sign", 1)
    if sign not in (1, -1) or isinstance(sign, bool):
        raise SpecError(f"{where}.sign", "must be 1 or -1")
    if kind == "coordinate":
        return DefiningFunction.coordinate(axis, offset, sign)
    text = h.get("f")
    if not isinstance(text, str):
        raise SpecError(f"{where}.f", "must be a string")
    try:
        factor = Expression(text, n)
    except ValueError as exc:
        raise SpecError(f"{where}.f", str(exc)) from None
    return DefiningFunction.reparameterized(axis, factor, offset, sign)


def corner_model(n: int) -> DecoupageSpec:
    """``R_+^n`` as the positive part of the coordinate hyperplanes."""
    return DecoupageSpec(n, tuple(DefiningFunction.coordinate(k) for k in range(1, n + 1)))


def interval_model(factor0: str | None = None, factor1: str | None = None) -> DecoupageSpec:
    """``[0, 1]`` with ``rho_1 = x`` and ``rho_2 = 1 - x`` (optionally reparameterized)."""
    hyps = []
    for text, offset, sign in ((factor0, 0.0, 1.0), (factor1, 1.0, -1.0)):
        if text is None:
            hyps.append(DefiningFunction.coordinate(1, offset, sign))
        else:
            hyps.append(DefiningFunction.reparameterized(1, Expression(text, 1), offset, sign))
    return DecoupageSpec(1, tuple(hyps))


def active_faces(spec: DecoupageSpec, x) -> FaceSignature:
    values = spec.rho(np.asarray(x, dtype=float))
    return FaceSignature(frozenset(i for i, r in zip(spec.indices, values) if abs(r) <= EPS_FACE))


def is_positive_part(spec: DecoupageSpec, x) -> bool:
    return bool(np.all(spec.rho(np.asarray(x, dtype=float)) >= -EPS_FACE))


@dataclass(frozen=True)
class SampleTransversality:
    point: tuple
    signature: FaceSignature
    sigma_min: float
    independent: bool


@dataclass(frozen=True)
class TransversalityReport:
    samples: tuple
    sigma_tol: float
    certificate: str = "verified at samples"

    @property
    def transverse(self) -> bool:
        return all(s.independent for s in self.samples)

    @property
    def margin(self) -> float:
        """Worst-case distance of a decision from ``sigma_tol``, as a factor."""
        factors = []
        for s in self.samples:
            if s.independent:
                factors.append(s.sigma_min / self.sigma_tol)
            else:
                factors.append(self.sigma_tol / max(s.sigma_min, 1e-300))
        return min(factors)


def check_transverse(spec: DecoupageSpec, samples: Iterable, sigma_tol: float = SIGMA_TOL) -> TransversalityReport:
    """Linear independence of the defining-function gradients at each sample.

    The verdict is a sampled check, not a proof: the report's certificate
    says so.
    """
    rows = []
    for x in samples:
        x = np.asarray(x, dtype=float)
        J = active_faces(spec, x)
        if not J.active:
            raise SampleNotOnAnyFace(f"sample {tuple(x)} lies on no hypersurface")
        G = np.array([spec[j].grad(x) for j in J])
        if len(J) > spec.ambient_dim:
            smin = 0.0
        else:
            smin = float(np.linalg.svd(G, compute_uv=False)[-1])
        rows.append(SampleTransversality(tuple(x.tolist()), J, smin, smin >= sigma_tol))
    return TransversalityReport(tuple(rows), sigma_tol)


@dataclass(frozen=True)
class OrbitDescriptor:
    """Open face ``F_J`` of the positive part containing a point."""

    spec: DecoupageSpec
    signature: FaceSignature

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if not is_positive_part(self.spec, x):
            return False
        return active_faces(self.spec, x) == self.signature

    __call__ = contains


def orbit_signature(spec: DecoupageSpec, x) -> OrbitDescriptor:
    return OrbitDescriptor(spec, active_faces(spec, x))


def enumerate_faces(spec: DecoupageSpec) -> list:
    """All ``J`` whose intersection ``V_J`` meets the positive part.

    Exact for coordinate and reparameterized models: every constraint
    involves a single axis, so feasibility splits axis by axis.
    """
    k = len(spec.hypersurfaces)
    if k > MAX_ENUMERABLE:
        raise AmbientTooLarge(f"{k} hypersurfaces exceeds the limit of {MAX_ENUMERABLE}")
    if not spec.first_class:
        raise ValueError("face enumeration needs coordinate or reparameterized defining functions")
    faces = []
    for size in range(k + 1):
        for J in itertools.combinations(spec.indices, size):
            if _face_feasible(spec, J):
                faces.append(FaceSignature(frozenset(J)))
    return faces


def _face_feasible(spec: DecoupageSpec, J: Sequence) -> bool:
    fixed = {}
    for j in J:
        h = spec[j]
        if h.axis in fixed and abs(fixed[h.axis] - h.offset) > EPS_FACE:
            return False
        fixed[h.axis] = h.offset
    for axis in range(1, spec.ambient_dim + 1):
        lo, hi = -np.inf, np.inf
        for h in spec.hypersurfaces:
            if h.axis != axis:
                continue
            if h.sign > 0:
                lo = max(lo, h.offset)
            else:
                hi = min(hi, h.offset)
        if axis in fixed:
            if not lo - EPS_FACE <= fixed[axis] <= hi + EPS_FACE:
                return False
        elif lo > hi:
            return False
    return True
