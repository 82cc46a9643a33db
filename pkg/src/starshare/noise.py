"""Noise models acting on the initial branch states.

Each model is reduced to three multiplicative factors on the per-branch
correlators that enter the Bell value:

    c_x : <sigma_x sigma_x> coherence
    c_z : <sigma_z sigma_z> correlation
    c_m : Bob's <sigma_z> marginal

so every closed form in :mod:`starshare.model` has a single noise-agnostic
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NONE = "none"
DEPOLARIZING = "depolarizing"
AMPLITUDE_DAMPING = "amplitude_damping"

KINDS = (NONE, DEPOLARIZING, AMPLITUDE_DAMPING)

_ALIASES = {
    "none": NONE,
    "noiseless": NONE,
    "depolarizing": DEPOLARIZING,
    "depol": DEPOLARIZING,
    "amplitude_damping": AMPLITUDE_DAMPING,
    "amplitude-damping": AMPLITUDE_DAMPING,
    "damping": AMPLITUDE_DAMPING,
}


@dataclass(frozen=True)
class NoiseModel:
    kind: str = NONE
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise strength must lie in [0, 1], got {self.p}")
        if self.kind == NONE and self.p != 0.0:
            raise ValueError("noiseless model takes no strength")

    @classmethod
    def none(cls) -> NoiseModel:
        return cls(NONE, 0.0)

    @classmethod
    def depolarizing(cls, p: float) -> NoiseModel:
        return cls(DEPOLARIZING, float(p))

    @classmethod
    def amplitude_damping(cls, p: float) -> NoiseModel:
        return cls(AMPLITUDE_DAMPING, float(p))

    @classmethod
    def parse(cls, kind: str, p: float = 0.0) -> NoiseModel:
        try:
            canonical = _ALIASES[kind.lower()]
        except KeyError:
            raise ValueError(f"unknown noise kind {kind!r}") from None
        return cls(canonical, 0.0 if canonical == NONE else float(p))

    def with_strength(self, p: float) -> NoiseModel:
        return NoiseModel(self.kind, 0.0 if self.kind == NONE else float(p))

    def factors(self, theta: float) -> tuple[float, float, float]:
        """Return ``(c_x, c_z, c_m)`` for the state angle ``theta``."""
        if self.kind == DEPOLARIZING:
            keep = 1.0 - self.p
            return keep, keep, keep
        if self.kind == AMPLITUDE_DAMPING:
            return (
                math.sqrt(1.0 - self.p),
                1.0 - 2.0 * self.p * math.sin(theta) ** 2,
                1.0,
            )
        return 1.0, 1.0, 1.0

    def log_coherence(self) -> float:
        """``log(c_x)``; ``-inf`` when coherence is destroyed completely."""
        if self.kind == NONE or self.p == 0.0:
            return 0.0
        if self.p == 1.0:
            return -math.inf
        scale = 1.0 if self.kind == DEPOLARIZING else 0.5
        return scale * math.log1p(-self.p)

    def marginal_loss(self) -> float:
        """``1 - c_m`` evaluated exactly."""
        return self.p if self.kind == DEPOLARIZING else 0.0

    def describe(self) -> dict:
        return {"kind": self.kind, "p": self.p}
