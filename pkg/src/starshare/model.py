"""Closed-form model of sequential nonlocality sharing in an n-star network.

Bob sits at the centre and shares ``cos t|00> + sin t|11>`` with each of
``n`` Alices.  On ``m`` of the branches a chain of Alices measure one
after another with the probabilistic projective measurement (PPM):
input 0 measures sigma_x, input 1 flips a coin with bias ``alpha_j`` and
either measures sigma_z or idles with outcome +1.  The remaining ``n - m``
branches are measured once, in the final round, with plain sigma_x /
sigma_z.  Bob measures ``(+-sin d sigma_z + cos d sigma_x)^{(x) n}``.

Everything here is a pure function of floats.  Violation margins
``S - 2`` are evaluated in a cancellation-free form because the
recursive probability construction places the round-j Bell value only
``eps * alpha_j`` above the bound, far below double-precision resolution
of ``S`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .noise import NoiseModel

HALF_PI = 0.5 * math.pi
QUARTER_PI = 0.25 * math.pi

# Relative tolerance on S - 2 (measured against the float-noise scale of
# the terms that produce it).
VIOLATION_TOL = 1e-12
# |theta - pi/4| below this selects the maximally entangled branch.
MAXENT_SNAP = 1e-12

DEFAULT_EPSILON = 1e-10
DEFAULT_ALPHA1 = 1e-10

UNBOUNDED = math.inf

_NOISELESS = NoiseModel()


class DomainError(ValueError):
    """A parameter lies outside the domain of the formula."""


class OutOfRegimeError(ArithmeticError):
    """A branch factor is negative, so the real-root closed form does not apply."""


# ---------------------------------------------------------------------------
# angles and thresholds


def _is_maxent(theta: float) -> bool:
    return abs(theta - QUARTER_PI) < MAXENT_SNAP


def _two_theta(theta: float) -> float:
    return HALF_PI if _is_maxent(theta) else 2.0 * theta


def state_trig(theta: float) -> tuple[float, float]:
    """``(sin 2theta, cos 2theta)``, exact at the maximally entangled point."""
    if _is_maxent(theta):
        return 1.0, 0.0
    return math.sin(2.0 * theta), math.cos(2.0 * theta)


def check_theta(theta: float, *, allow_zero: bool = False) -> None:
    lo_ok = theta >= 0.0 if allow_zero else theta > 0.0
    if not (lo_ok and theta <= QUARTER_PI + MAXENT_SNAP):
        raise DomainError(f"theta must lie in {'[' if allow_zero else '('}0, pi/4], got {theta}")


def check_delta(delta: float) -> None:
    if not 0.0 < delta < HALF_PI:
        raise DomainError(f"delta must lie in (0, pi/2), got {delta}")


def concurrence_pure(theta: float) -> float:
    """Concurrence ``sin 2theta`` of ``cos t|00> + sin t|11>``."""
    check_theta(theta, allow_zero=True)
    return state_trig(theta)[0]


def theta_for_concurrence(c: float) -> float:
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"concurrence must lie in [0, 1], got {c}")
    return 0.5 * math.asin(c)


def threshold_concurrence(k: int) -> float:
    """Minimum concurrence ``C(k)`` above which k rounds share on every branch."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    k = int(k)
    return 2.0 ** (1 - k) * math.sqrt(4.0 ** (k - 1) - 1.0)


def max_supported_rounds(c: float) -> float:
    """Largest integer k with ``c > C(k)``; :data:`UNBOUNDED` for ``c == 1``."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"concurrence must lie in [0, 1], got {c}")
    if c == 1.0:
        return UNBOUNDED
    k = 0
    while c > threshold_concurrence(k + 1):
        k += 1
    return k


def canonical_delta(theta: float, convention: str = "pi2") -> float:
    """Bob's angle on the line ``2theta + delta = pi/2`` (or ``pi/4``)."""
    if convention == "pi2":
        target = HALF_PI
    elif convention == "pi4":
        target = QUARTER_PI
    else:
        raise DomainError(f"unknown convention {convention!r}")
    delta = target - 2.0 * theta
    if not 0.0 < delta < HALF_PI:
        raise DomainError(f"theta={theta} has no canonical delta under {convention}")
    return delta


# ---------------------------------------------------------------------------
# configuration and sequences


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    m: int
    k: int
    theta: float
    delta: float | None = None
    epsilon: float = DEFAULT_EPSILON
    alpha1: float = DEFAULT_ALPHA1
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.m <= self.n:
            raise DomainError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        check_theta(self.theta)
        if self.delta is None:
            object.__setattr__(self, "delta", canonical_delta(self.theta))
        check_delta(self.delta)
        if not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.alpha1 < 1.0:
            raise DomainError(f"alpha1 must lie in (0, 1), got {self.alpha1}")


@dataclass(frozen=True)
class AlphaSequence:
    """Coin biases ``alpha_1..alpha_k``.

    Rounds after ``feasible_through`` could not be constructed; they are
    padded with the initial bias so that later-round Bell values remain
    defined (they are then not expected to violate).
    """

    alphas: tuple[float, ...]
    feasible_through: int

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for a in self.alphas:
            if not 0.0 <= a <= 1.0:
                raise DomainError(f"coin bias outside [0, 1]: {a}")
        if not 0 <= self.feasible_through <= len(self.alphas):
            raise DomainError("feasible_through exceeds sequence length")

    @classmethod
    def from_alphas(cls, alphas: Sequence[float]) -> AlphaSequence:
        return cls(tuple(alphas), len(alphas))

    def __len__(self) -> int:
        return len(self.alphas)

    def alpha(self, j: int) -> float:
        return self.alphas[j - 1]

    @property
    def cumprods(self) -> tuple[float, ...]:
        out = [1.0]
        for a in self.alphas[:-1]:
            out.append(out[-1] * (2.0 - a) / 2.0)
        return tuple(out[: len(self.alphas)])

    def survival(self, j: int) -> float:
        """``P_j``: the sigma_x sigma_x shrinkage after ``j - 1`` generations."""
        prod = 1.0
        for a in self.alphas[: j - 1]:
            prod *= (2.0 - a) / 2.0
        return prod

    def log_survival(self, j: int) -> float:
        return math.fsum(math.log1p(-0.5 * a) for a in self.alphas[: j - 1])


class AlphaBound(NamedTuple):
    value: float
    feasible: bool


# ---------------------------------------------------------------------------
# branch factors


def _deficit_terms(j, theta, delta, log_p, noise):
    """Split ``T(alpha) - 1`` into ``sum(terms) + slope * alpha``.

    Each term is computed without subtracting nearly equal numbers.
    """
    s2, c2 = state_trig(theta)
    sd, cd = math.sin(delta), math.cos(delta)
    _, cz, cm = noise.factors(theta)
    misalign = -2.0 * math.sin(0.5 * (HALF_PI - delta - _two_theta(theta))) ** 2
    log_coh = noise.log_coherence() + log_p
    coherence_loss = 1.0 if log_coh == -math.inf else -math.expm1(log_coh)
    terms = (misalign, -cd * s2 * coherence_loss, -sd * c2 * noise.marginal_loss())
    slope = sd * (cz * 2.0 ** (1 - j) - cm * c2)
    return terms, slope


def closed_form_branch_factor(j, theta, delta, alpha_j, p_j, noise=_NOISELESS) -> float:
    """Per-branch factor ``T`` of a shared branch in round ``j``; ``S^{n,j} = 2T``."""
    s2, c2 = state_trig(theta)
    sd, cd = math.sin(delta), math.cos(delta)
    cx, cz, cm = noise.factors(theta)
    return (
        cx * cd * s2 * p_j
        + cz * sd * alpha_j / 2.0 ** (j - 1)
        + cm * sd * c2 * (1.0 - alpha_j)
    )


def untouched_branch_factor(theta, delta, noise=_NOISELESS) -> float:
    """Factor ``U`` of a branch measured only once with plain sigma_x / sigma_z."""
    s2, _ = state_trig(theta)
    cx, cz, _ = noise.factors(theta)
    return cx * math.cos(delta) * s2 + cz * math.sin(delta)


def alpha_lower_bound(j, theta, delta, p_j, noise=_NOISELESS, *, log_p=None) -> AlphaBound:
    """Smallest coin bias for which round ``j`` violates the n-locality bound.

    ``T`` is affine in the bias, so when the slope is not positive the
    answer is decided at the endpoint ``alpha -> 0+`` and the bound is
    reported as 0 (feasible) or ``inf`` (infeasible).  Pass ``log_p``
    (the log of ``p_j``) whenever ``1 - p_j`` is tiny.
    """
    if j < 1:
        raise DomainError(f"round index must be >= 1, got {j}")
    if not 0.0 < p_j <= 1.0:
        raise DomainError(f"P_j must lie in (0, 1], got {p_j}")
    if log_p is None:
        log_p = math.log(p_j)
    terms, slope = _deficit_terms(j, theta, delta, log_p, noise)
    deficit = math.fsum(terms)
    if slope > 0.0:
        bound = -deficit / slope
        return AlphaBound(bound, bound < 1.0)
    if deficit > 0.0:
        return AlphaBound(0.0, True)
    return AlphaBound(math.inf, False)


def build_alpha_sequence(theta, delta, epsilon, alpha1, k, noise=_NOISELESS) -> AlphaSequence:
    """Recursive coin biases ``alpha_j = (1 + eps) * bound_j``.

    A non-positive bound keeps the initial bias.  In round 1 the given
    ``alpha1`` is raised to ``(1 + eps) * bound_1`` only when it fails to
    violate (which happens off the canonical line or under noise).
    """
    check_theta(theta)
    check_delta(delta)
    if not epsilon >= 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    if not 0.0 < alpha1 < 1.0:
        raise DomainError(f"alpha1 must lie in (0, 1), got {alpha1}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")

    alphas: list[float] = []
    log_p = 0.0
    feasible_through = 0
    for j in range(1, k + 1):
        alpha = None
        if feasible_through == j - 1:
            bound = alpha_lower_bound(j, theta, delta, math.exp(log_p), noise, log_p=log_p)
            if bound.feasible:
                if bound.value <= 0.0:
                    alpha = alpha1
                elif j == 1 and alpha1 > bound.value:
                    alpha = alpha1
                else:
                    alpha = (1.0 + epsilon) * bound.value
                if bound.value == 0.0 and not _violates_at(j, theta, delta, alpha, log_p, noise):
                    alpha = None
            if alpha is not None and alpha < 1.0:
                feasible_through = j
            else:
                alpha = None
        alphas.append(alpha1 if alpha is None else alpha)
        log_p += math.log1p(-0.5 * alphas[-1])
    return AlphaSequence(tuple(alphas), feasible_through)


def _violates_at(j, theta, delta, alpha, log_p, noise) -> bool:
    # only needed for the non-positive-slope branch, where the bias has an upper limit
    terms, slope = _deficit_terms(j, theta, delta, log_p, noise)
    return math.fsum(terms) + slope * alpha > 0.0


# ---------------------------------------------------------------------------
# Bell values


@dataclass(frozen=True)
class BellValue:
    """One evaluation of ``S = |I|^{1/n} + |J|^{1/n}``.

    ``excess`` is ``S - 2`` computed without cancellation and ``scale`` is
    the magnitude of the terms it was assembled from, so ``excess`` is
    resolved to roughly ``1e-16 * scale``.
    """

    s: float
    excess: float
    scale: float
    i_n: float | None = None
    j_n: float | None = None

    def violates(self, tol: float = VIOLATION_TOL) -> bool:
        return self.excess > tol * self.scale


def _branch_excess(j, theta, delta, alpha_j, log_p, noise):
    terms, slope = _deficit_terms(j, theta, delta, log_p, noise)
    tail = slope * alpha_j
    return math.fsum(terms) + tail, math.fsum(abs(t) for t in terms) + abs(tail)


def closed_form_S(n, m, j, theta, delta, alphas: AlphaSequence, noise=_NOISELESS) -> BellValue:
    """``S_n^{m,j} = 2 T^{m/n} U^{(n-m)/n}`` with ``I_n = J_n = T^m U^{n-m}``."""
    if n < 1 or not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    if not 1 <= j <= len(alphas):
        raise DomainError(f"round {j} outside the sequence of length {len(alphas)}")
    check_theta(theta)
    check_delta(delta)

    alpha_j = alphas.alpha(j)
    log_p = alphas.log_survival(j)
    t = closed_form_branch_factor(j, theta, delta, alpha_j, alphas.survival(j), noise)
    u = untouched_branch_factor(theta, delta, noise)
    if t < 0.0 or (m < n and u < 0.0):
        raise OutOfRegimeError(f"negative branch factor (T={t}, U={u})")

    dt, scale_t = _branch_excess(j, theta, delta, alpha_j, log_p, noise)
    corr = t**m * u ** (n - m)
    if m == n:
        return BellValue(2.0 * t, 2.0 * dt, 2.0 * scale_t, corr, corr)
    if t == 0.0 or u == 0.0:
        return BellValue(0.0, -2.0, 2.0, corr, corr)

    s2, _ = state_trig(theta)
    cx, cz, _ = noise.factors(theta)
    u_terms = (cx * math.cos(delta) * s2, cz * math.sin(delta), -1.0)
    du = math.fsum(u_terms)
    scale_u = math.fsum(abs(x) for x in u_terms)

    log_ratio = (m * math.log1p(dt) + (n - m) * math.log1p(du)) / n
    s = 2.0 * math.exp((m * math.log(t) + (n - m) * math.log(u)) / n)
    scale = 2.0 * math.exp(log_ratio) * (m * scale_t / t + (n - m) * scale_u / u) / n
    return BellValue(s, 2.0 * math.expm1(log_ratio), scale, corr, corr)


def round_values(theta, delta, epsilon, alpha1, noise=_NOISELESS, cap=5, *, n=1, m=None):
    """Build the sequence up to ``cap`` and evaluate every round."""
    seq = build_alpha_sequence(theta, delta, epsilon, alpha1, cap, noise)
    m = n if m is None else m
    return seq, [closed_form_S(n, m, j, theta, delta, seq, noise) for j in range(1, cap + 1)]


def leading_violations(values: Sequence[BellValue], tol: float = VIOLATION_TOL) -> int:
    count = 0
    for v in values:
        if not v.violates(tol):
            break
        count += 1
    return count


def max_rounds(theta, delta=None, epsilon=DEFAULT_EPSILON, alpha1=DEFAULT_ALPHA1,
               noise=_NOISELESS, j_cap=10, tol=VIOLATION_TOL) -> int:
    """Largest ``j <= j_cap`` such that rounds ``1..j`` all violate on every branch."""
    if j_cap < 1:
        raise DomainError(f"j_cap must be >= 1, got {j_cap}")
    if delta is None:
        delta = canonical_delta(theta)
    _, values = round_values(theta, delta, epsilon, alpha1, noise, j_cap)
    return leading_violations(values, tol)


# ---------------------------------------------------------------------------
# depth-breadth trade-off


class FrontierPoint(NamedTuple):
    m: int
    j: int
    achievable: bool
    s: float
    excess: float


def tradeoff_frontier(n, k, epsilon=DEFAULT_EPSILON, alpha1=1e-8, tol=VIOLATION_TOL):
    """Achievability of ``(m, j)`` at the critical concurrence ``C(k)``.

    A pair is achievable when every round up to ``j`` violates with ``m``
    shared branches, using the full-network probability sequence.
    """
    if n < 2 or k < 2:
        raise DomainError(f"trade-off needs n >= 2 and k >= 2, got n={n}, k={k}")
    theta = theta_for_concurrence(threshold_concurrence(k))
    delta = canonical_delta(theta)
    seq = build_alpha_sequence(theta, delta, epsilon, alpha1, k)
    points = []
    for m in range(1, n + 1):
        values = [closed_form_S(n, m, j, theta, delta, seq) for j in range(1, k + 1)]
        reach = leading_violations(values, tol)
        for j in range(1, k + 1):
            v = values[j - 1]
            points.append(FrontierPoint(m, j, j <= reach, v.s, v.excess))
    return points


def frontier_boundary(points: Sequence[FrontierPoint]) -> list[tuple[int, int]]:
    """Pareto-maximal achievable ``(m, j)`` pairs."""
    good = [(p.m, p.j) for p in points if p.achievable]
    return sorted(
        (m, j) for m, j in good
        if not any((m2 >= m and j2 >= j) and (m2, j2) != (m, j) for m2, j2 in good)
    )


def limit_value(n: int, delta: float) -> float:
    """``2 (cos^2 d + sin d)^{1/n}``, the small-bias limit of ``S_n^{n-1,k}``."""
    return 2.0 * (math.cos(delta) ** 2 + math.sin(delta)) ** (1.0 / n)
