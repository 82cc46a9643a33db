"""Unsharp-measurement sharing protocol used as the comparison baseline.

Alices measure sigma_z sharply or ``gamma_j sigma_x`` unsharply; Bob uses
angle ``omega``.  The Bell value is expressed through the two largest
singular values of the state's correlation matrix (``1`` and
``sin 2theta`` for the pure family).  The formulas are taken as given;
no density-matrix cross-check exists for them in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import HALF_PI, BellValue, DomainError, check_theta, state_trig


@dataclass(frozen=True)
class UnsharpConfig:
    omega: float
    epsilon: float
    theta: float
    lambda1: float
    lambda2: float
    gammas: tuple[float, ...]
    feasible_through: int

    def __post_init__(self):
        if not self.lambda1 >= self.lambda2 >= 0.0:
            raise DomainError("singular values must satisfy lambda1 >= lambda2 >= 0")
        for g in self.gammas:
            if not 0.0 < g <= 1.0:
                raise DomainError(f"sharpness outside (0, 1]: {g}")


def _singular_values(theta, lambda1, lambda2):
    if lambda1 is None:
        lambda1 = 1.0
    if lambda2 is None:
        lambda2 = state_trig(theta)[0]
    return lambda1, lambda2


def _log_disturbance(gammas) -> float:
    # log prod (1 + sqrt(1 - g^2)) / 2, with 1 - sqrt(1 - g^2) written cancellation-free
    total = 0.0
    for g in gammas:
        root = math.sqrt(1.0 - g * g)
        total += math.log1p(-0.5 * g * g / (1.0 + root))
    return total


def _bound_gap(j, omega, gammas, lambda1) -> float:
    """``2^{j-1} - sqrt(l1) cos(w) prod_{l<j} (1 + sqrt(1 - g_l^2))`` without cancellation."""
    log_cos = math.log1p(-2.0 * math.sin(0.5 * omega) ** 2)
    log_keep = 0.5 * math.log(lambda1) + log_cos + _log_disturbance(gammas[: j - 1])
    return 2.0 ** (j - 1) * -math.expm1(log_keep)


def unsharp_gamma_sequence(theta, omega, epsilon, k, lambda1=None, lambda2=None) -> UnsharpConfig:
    """Sharpness parameters ``gamma_j = (1 + eps) * gap_j / (sqrt(l2) sin w)``.

    Stops at the first round whose required sharpness exceeds 1.
    """
    check_theta(theta)
    if not 0.0 < omega < HALF_PI:
        raise DomainError(f"omega must lie in (0, pi/2), got {omega}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    lambda1, lambda2 = _singular_values(theta, lambda1, lambda2)
    denom = math.sqrt(lambda2) * math.sin(omega)
    gammas: list[float] = []
    for j in range(1, k + 1):
        gamma = (1.0 + epsilon) * _bound_gap(j, omega, gammas, lambda1) / denom
        if not 0.0 < gamma <= 1.0:
            break
        gammas.append(gamma)
    return UnsharpConfig(omega, epsilon, theta, lambda1, lambda2, tuple(gammas), len(gammas))


def unsharp_closed_form_S(j, theta, omega, gammas, lambda1=None, lambda2=None) -> float:
    if not 1 <= j <= len(gammas):
        raise DomainError(f"round {j} outside the sequence of length {len(gammas)}")
    lambda1, lambda2 = _singular_values(theta, lambda1, lambda2)
    prod = 1.0
    for g in gammas[: j - 1]:
        prod *= 1.0 + math.sqrt(1.0 - g * g)
    return 2.0 ** (2 - j) * (
        gammas[j - 1] * math.sqrt(lambda2) * math.sin(omega)
        + math.sqrt(lambda1) * math.cos(omega) * prod
    )


def unsharp_bell_value(j, theta, omega, gammas, lambda1=None, lambda2=None) -> BellValue:
    lambda1, lambda2 = _singular_values(theta, lambda1, lambda2)
    s = unsharp_closed_form_S(j, theta, omega, gammas, lambda1, lambda2)
    signal = gammas[j - 1] * math.sqrt(lambda2) * math.sin(omega)
    gap = _bound_gap(j, omega, gammas, lambda1)
    weight = 2.0 ** (2 - j)
    return BellValue(s, weight * (signal - gap), weight * (abs(signal) + abs(gap)))
