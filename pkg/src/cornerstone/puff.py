"""Iterated puff of the pair groupoid, one hypersurface at a time.

Each stage ``<G : V>`` of the tower keeps an element ``g`` of the previous
stage when ``r(g), s(g)`` both avoid ``V`` and replaces it by ``(g, lam)``
with a normal scale ``lam`` when both lie on ``V``; pairs straddling ``V``
are not elements. The tower is built independently of the flat
trivialized description in :mod:`cornerstone.groupoid` so the two can be
compared for every ordering of the hypersurfaces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .decoupage import EPS_FACE, DecoupageSpec, is_positive_part
from .groupoid import POSITIVE, GroupoidElement, compose, is_member, phi_hom


@dataclass(frozen=True)
class Stage:
    """Element of ``<...<M x M : V_a>...: V_b>``; ``base`` is the previous stage."""

    base: object  # Stage or (x, y) tuple at the bottom
    index: int
    lam: float | None

    @property
    def endpoints(self):
        b = self.base
        while isinstance(b, Stage):
            b = b.base
        return b


class IteratedPuff:
    def __init__(self, spec: DecoupageSpec, order, variant=POSITIVE):
        if sorted(order) != list(spec.indices):
            raise ValueError(f"{order} is not a permutation of {spec.indices}")
        self.spec = spec
        self.order = tuple(order)
        self.variant = variant

    def _stage_ok(self, i, x, y, lam):
        h = self.spec[i]
        rx, ry = float(h(x)), float(h(y))
        on_x, on_y = abs(rx) <= EPS_FACE, abs(ry) <= EPS_FACE
        if on_x != on_y:
            return False
        if on_x:
            if lam is None or lam == 0:
                return False
            return lam > 0 if self.variant == POSITIVE else True
        if lam is not None:
            return False
        if self.variant == POSITIVE:
            return (rx > 0) == (ry > 0)
        return True

    def lift(self, x, y, lam: dict):
        """Build the tower element for ``(x, y, lam)``; ``None`` if some stage rejects it."""
        x, y = tuple(map(float, x)), tuple(map(float, y))
        if self.variant == POSITIVE and not (is_positive_part(self.spec, x) and is_positive_part(self.spec, y)):
            return None
        extra = set(lam) - set(self.spec.indices)
        if extra:
            return None
        node = (x, y)
        for i in self.order:
            li = lam.get(i)
            if not self._stage_ok(i, x, y, li):
                return None
            node = Stage(node, i, li)
        return node

    def compose(self, a: Stage, b: Stage) -> Stage:
        if isinstance(a, tuple):
            (x, y1), (y2, z) = a, b
            if any(abs(p - q) > EPS_FACE for p, q in zip(y1, y2)):
                raise ValueError("not composable at the base")
            return (x, z)
        lam = None if a.lam is None else a.lam * b.lam
        return Stage(self.compose(a.base, b.base), a.index, lam)

    def phi(self, a: Stage) -> np.ndarray:
        x, y = a.endpoints
        out = {}
        node = a
        while isinstance(node, Stage):
            h = self.spec[node.index]
            if node.lam is not None:
                out[node.index] = math.log(node.lam)
            else:
                out[node.index] = math.log(float(h(x))) - math.log(float(h(y)))
            node = node.base
        return np.array([out[i] for i in self.spec.indices])

    def flatten(self, a: Stage) -> GroupoidElement:
        x, y = a.endpoints
        lam = {}
        node = a
        while isinstance(node, Stage):
            if node.lam is not None:
                lam[node.index] = node.lam
            node = node.base
        return GroupoidElement(x, y, lam, self.variant)


@dataclass
class PuffReport:
    order: tuple
    membership: list
    membership_agrees: bool
    composition_agrees: bool
    phi_agrees: bool

    @property
    def agrees(self) -> bool:
        return self.membership_agrees and self.composition_agrees and self.phi_agrees


def puff_iterated(spec: DecoupageSpec, order, samples, pairs=(), atol=1e-12) -> PuffReport:
    """Compare the tower built in ``order`` with the flat description.

    ``samples`` are candidate elements (valid or not); ``pairs`` are
    composable element pairs used to compare products and ``phi``.
    """
    tower = IteratedPuff(spec, order)
    membership, agree = [], True
    for g in samples:
        lifted = tower.lift(g.x, g.y, g.lam)
        direct = is_member(spec, g)
        membership.append(lifted is not None)
        agree &= (lifted is not None) == direct
        if lifted is not None and tower.flatten(lifted) != g:
            agree = False
    comp_ok = phi_ok = True
    for a, b in pairs:
        la, lb = tower.lift(a.x, a.y, a.lam), tower.lift(b.x, b.y, b.lam)
        if la is None or lb is None:
            comp_ok = False
            continue
        prod = tower.compose(la, lb)
        flat = compose(a, b)
        got = tower.flatten(prod)
        comp_ok &= got.x == flat.x and got.y == flat.y and got.lam.keys() == flat.lam.keys() and all(
            abs(got.lam[k] - flat.lam[k]) <= atol * abs(flat.lam[k]) for k in flat.lam
        )
        if spec.fully_oriented:
            phi_ok &= bool(np.max(np.abs(tower.phi(prod) - phi_hom(spec, flat)), initial=0.0) <= atol)
    return PuffReport(tuple(order), membership, bool(agree), bool(comp_ok), bool(phi_ok))


def permutation_reports(spec: DecoupageSpec, samples, pairs=()) -> list:
    """One report per ordering of ``I``."""
    return [puff_iterated(spec, p, samples, pairs) for p in itertools.permutations(spec.indices)]


def corrupt(g: GroupoidElement, rng: np.random.Generator, spec: DecoupageSpec) -> GroupoidElement:
    """A nearby non-element: drop, add or mismatch one piece of fiber data."""
    choice = rng.integers(3)
    lam = dict(g.lam)
    if choice == 0 and lam:
        lam.pop(next(iter(lam)))
        return GroupoidElement(g.x, g.y, lam, g.variant)
    if choice == 1:
        missing = [i for i in spec.indices if i not in lam]
        if missing:
            lam[missing[0]] = 2.0
            return GroupoidElement(g.x, g.y, lam, g.variant)
    # move the source off one of its faces, or onto a face for interior elements
    y = list(g.y)
    if lam:
        h = spec[next(iter(lam))]
        y[h.axis - 1] += 0.25 * h.sign
    else:
        h = spec[spec.indices[0]]
        y[h.axis - 1] = h.offset
    return GroupoidElement(g.x, tuple(y), lam, g.variant)
