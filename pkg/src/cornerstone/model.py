"""The interval ``[0, 1]`` in the logarithmic coordinate ``u = log(x / (1 - x))``.

``x = expit(u)`` and ``1 - x = expit(-u)``, so ``log rho_1 = log_expit(u)`` and
``log rho_2 = log_expit(-u)`` are evaluated without cancellation even where
``x`` rounds to 0 or 1. Optional positive factors reparameterize the two
defining functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit

from .decoupage import DecoupageSpec, interval_model


@dataclass(frozen=True)
class IntervalModel:
    factor0: Callable | None = None
    factor1: Callable | None = None

    @classmethod
    def from_spec(cls, spec: DecoupageSpec) -> "IntervalModel":
        if spec.ambient_dim != 1 or len(spec.hypersurfaces) != 2:
            raise ValueError("interval model needs two hypersurfaces in R^1")
        h0, h1 = spec.hypersurfaces
        if (h0.kind == "general" or h1.kind == "general"
                or (h0.offset, h0.sign) != (0.0, 1.0) or (h1.offset, h1.sign) != (1.0, -1.0)):
            raise ValueError("expected rho_1 vanishing at 0 and rho_2 vanishing at 1")
        return cls(h0.factor, h1.factor)

    def to_spec(self) -> DecoupageSpec:
        t0 = getattr(self.factor0, "text", None) if self.factor0 else None
        t1 = getattr(self.factor1, "text", None) if self.factor1 else None
        return interval_model(t0, t1)

    def log_rho(self, u) -> np.ndarray:
        """``log rho_i`` at ``x = expit(u)``; shape ``(..., 2)``."""
        u = np.asarray(u, dtype=float)
        out = np.stack([log_expit(u), log_expit(-u)], axis=-1)
        x = expit(u)[..., None]
        for k, f in enumerate((self.factor0, self.factor1)):
            if f is not None:
                out[..., k] += np.log(f(x))
        return out

    def phi_interior(self, u, v) -> np.ndarray:
        return self.log_rho(u) - self.log_rho(v)

    @staticmethod
    def phi_fiber(face: int, s) -> np.ndarray:
        """``phi`` on the boundary fiber over ``face`` at log-coordinate ``s = u - v``.

        Over face 0 the fiber scale is ``e^s``; over face 1 it is ``e^{-s}``
        because the second defining function decreases in ``u``.
        """
        s = np.asarray(s, dtype=float)
        z = np.zeros_like(s)
        return np.stack([s, z] if face == 0 else [z, -s], axis=-1)
