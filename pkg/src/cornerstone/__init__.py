"""Groupoids of manifolds with corners and a small numerical b-calculus on the interval."""

from . import decoupage, groupoid, puff, schwartz, stretch
from .decoupage import DecoupageSpec, DefiningFunction, FaceSignature, corner_model, interval_model
from .errors import CornerstoneError, SpecError
from .groupoid import GroupoidElement, compose, inverse, is_member, phi_hom, tau, unit
from .model import IntervalModel

__all__ = [
    "CornerstoneError",
    "DecoupageSpec",
    "DefiningFunction",
    "FaceSignature",
    "GroupoidElement",
    "IntervalModel",
    "SpecError",
    "compose",
    "corner_model",
    "decoupage",
    "groupoid",
    "interval_model",
    "inverse",
    "is_member",
    "phi_hom",
    "puff",
    "schwartz",
    "stretch",
    "tau",
    "unit",
]
