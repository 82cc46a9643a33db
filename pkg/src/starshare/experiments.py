"""Parameter sweeps, protocol comparison, trade-off tables and the
closed-form-versus-oracle verification report."""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import model
from .model import (
    DEFAULT_ALPHA1,
    DEFAULT_EPSILON,
    VIOLATION_TOL,
    AlphaSequence,
    DomainError,
    ProtocolConfig,
)
from .noise import AMPLITUDE_DAMPING, DEPOLARIZING, NONE, NoiseModel
from .oracle import MAX_TENSOR_BRANCHES, full_tensor_S, oracle_S
from .unsharp import unsharp_bell_value, unsharp_gamma_sequence

AXIS_NAMES = ("theta", "concurrence", "delta", "p", "epsilon", "alpha1")
CONVENTIONS = ("pi2", "pi4", "explicit")

DEFAULT_ANGLE_POINTS = 181
DEFAULT_NOISE_POINTS = 51
DEFAULT_ROUND_CAP = 6

_PI_EXPR = re.compile(
    r"^\s*(?:(?P<coef>[-+]?\d*\.?\d+(?:e[-+]?\d+)?)\s*\*\s*)?"
    r"(?P<sign>-)?pi(?:\s*\*\s*(?P<mul>\d*\.?\d+(?:e[-+]?\d+)?))?"
    r"(?:\s*/\s*(?P<div>\d*\.?\d+(?:e[-+]?\d+)?))?\s*$",
    re.IGNORECASE,
)


def parse_angle(text: str | float) -> float:
    """Parse ``0.3``, ``pi``, ``pi/6``, ``2*pi/3`` or ``pi*0.25``."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _PI_EXPR.match(text)
    if not match:
        return float(text)
    value = math.pi
    if match["coef"]:
        value *= float(match["coef"])
    if match["sign"]:
        value = -value
    if match["mul"]:
        value *= float(match["mul"])
    if match["div"]:
        value /= float(match["div"])
    return value


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise DomainError(f"unknown sweep axis {self.name!r}; choose from {AXIS_NAMES}")
        if self.count < 1:
            raise DomainError(f"axis {self.name} needs at least one point")
        if self.count > 1 and not self.stop > self.start:
            raise DomainError(f"axis {self.name} range is empty")

    @classmethod
    def parse(cls, text: str) -> Axis:
        """``name:start:stop:count``; angles accept ``pi`` notation."""
        parts = text.split(":")
        if len(parts) != 4:
            raise DomainError(f"axis must look like name:start:stop:count, got {text!r}")
        name, start, stop, count = parts
        return cls(name.strip(), parse_angle(start), parse_angle(stop), int(count))

    def values(self) -> list[float]:
        if self.count == 1:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]

    def describe(self) -> str:
        return f"{self.name}:{self.start!r}:{self.stop!r}:{self.count}"


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None = None
    noise: str = NONE
    theta: float | None = None
    delta: float | None = None
    p: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    alpha1: float = DEFAULT_ALPHA1
    convention: str = "pi2"
    cap: int = DEFAULT_ROUND_CAP
    tol: float = VIOLATION_TOL

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise DomainError("sweep axes must name distinct parameters")
        names = self.axis_names
        if "theta" in names and "concurrence" in names:
            raise DomainError("theta and concurrence cannot both be swept")
        if self.convention not in CONVENTIONS:
            raise DomainError(f"unknown convention {self.convention!r}")
        if self.cap < 1:
            raise DomainError("round cap must be >= 1")
        NoiseModel.parse(self.noise, 0.0)

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def describe(self) -> dict:
        return {
            "axis1": self.axis1.describe(),
            "axis2": None if self.axis2 is None else self.axis2.describe(),
            "noise": self.noise,
            "theta": self.theta,
            "delta": self.delta,
            "p": self.p,
            "epsilon": self.epsilon,
            "alpha1": self.alpha1,
            "convention": self.convention,
            "cap": self.cap,
            "tolerance": self.tol,
        }


@dataclass(frozen=True)
class SweepRecord:
    coords: tuple[float, ...]
    max_rounds: int
    s_per_round: tuple[float, ...]
    excess_per_round: tuple[float, ...]
    note: str = ""


def grid_cells(spec: SweepSpec) -> list[tuple[float, ...]]:
    if spec.axis2 is None:
        return [(v,) for v in spec.axis1.values()]
    return [(a, b) for a in spec.axis1.values() for b in spec.axis2.values()]


def _cell_parameters(spec: SweepSpec, coords):
    values = dict(zip(spec.axis_names, coords))
    if "concurrence" in values:
        theta = model.theta_for_concurrence(values["concurrence"])
    else:
        theta = values.get("theta", spec.theta)
    if theta is None:
        raise DomainError("theta is neither swept nor fixed")
    if "delta" in values:
        delta = values["delta"]
    elif spec.convention == "explicit" or spec.delta is not None:
        if spec.delta is None:
            raise DomainError("explicit convention needs a fixed delta")
        delta = spec.delta
    else:
        delta = model.canonical_delta(theta, spec.convention)
    noise = NoiseModel.parse(spec.noise, values.get("p", spec.p))
    epsilon = values.get("epsilon", spec.epsilon)
    alpha1 = values.get("alpha1", spec.alpha1)
    return theta, delta, epsilon, alpha1, noise


def evaluate_cell(spec: SweepSpec, coords: tuple[float, ...]) -> SweepRecord:
    """Round-by-round Bell values of one grid cell (full network, m = n)."""
    try:
        theta, delta, epsilon, alpha1, noise = _cell_parameters(spec, coords)
        _, values = model.round_values(theta, delta, epsilon, alpha1, noise, spec.cap)
    except DomainError as exc:
        nan = (math.nan,) * spec.cap
        return SweepRecord(tuple(coords), 0, nan, nan, str(exc))
    rounds = model.leading_violations(values, spec.tol)
    return SweepRecord(
        tuple(coords),
        rounds,
        tuple(v.s for v in values),
        tuple(v.excess for v in values),
    )


def _evaluate_chunk(args):
    spec, cells = args
    return [evaluate_cell(spec, c) for c in cells]


def sweep_max_rounds(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """One record per grid cell, in axis1-major order."""
    cells = grid_cells(spec)
    if workers <= 1 or len(cells) < 2 * workers:
        return [evaluate_cell(spec, c) for c in cells]
    size = math.ceil(len(cells) / (4 * workers))
    chunks = [(spec, cells[i:i + size]) for i in range(0, len(cells), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_evaluate_chunk, chunks))
    return [rec for part in parts for rec in part]


# ---------------------------------------------------------------------------
# PPM versus unsharp measurements


@dataclass(frozen=True)
class ComparisonRecord:
    j: int
    s_ppm: float
    s_unsharp: float
    excess_ppm: float
    excess_unsharp: float
    ppm_violates: bool
    unsharp_violates: bool


@dataclass(frozen=True)
class ComparisonResult:
    records: tuple[ComparisonRecord, ...]
    requested: int
    note: str = ""


def compare_protocols(theta, epsilon, alpha1, omega, k, tol=VIOLATION_TOL) -> ComparisonResult:
    """Per-round Bell values of PPM (canonical setting) and the unsharp protocol."""
    delta = model.canonical_delta(theta)
    seq = model.build_alpha_sequence(theta, delta, epsilon, alpha1, k)
    unsharp = unsharp_gamma_sequence(theta, omega, epsilon, k)
    depth = min(seq.feasible_through, unsharp.feasible_through)
    records = []
    for j in range(1, depth + 1):
        ppm = model.closed_form_S(1, 1, j, theta, delta, seq)
        weak = unsharp_bell_value(j, theta, omega, unsharp.gammas)
        records.append(ComparisonRecord(
            j, ppm.s, weak.s, ppm.excess, weak.excess, ppm.violates(tol), weak.violates(tol)
        ))
    note = ""
    if depth < k:
        note = (f"truncated at round {depth}: PPM feasible through {seq.feasible_through}, "
                f"unsharp through {unsharp.feasible_through}")
    return ComparisonResult(tuple(records), k, note)


# ---------------------------------------------------------------------------
# verification


VERIFY_NOISE = (NONE, DEPOLARIZING, AMPLITUDE_DAMPING)
CLOSED_TOL = 1e-9
TENSOR_TOL = 1e-11


@dataclass(frozen=True)
class VerificationRow:
    noise: str
    samples: int
    max_closed_vs_oracle: float
    tensor_samples: int
    max_oracle_vs_tensor: float


@dataclass(frozen=True)
class VerificationReport:
    seed: int
    samples: int
    rows: tuple[VerificationRow, ...]
    closed_tol: float = CLOSED_TOL
    tensor_tol: float = TENSOR_TOL

    @property
    def max_closed_vs_oracle(self) -> float:
        return max(r.max_closed_vs_oracle for r in self.rows)

    @property
    def max_oracle_vs_tensor(self) -> float:
        return max(r.max_oracle_vs_tensor for r in self.rows)

    @property
    def passed(self) -> bool:
        return (self.max_closed_vs_oracle < self.closed_tol
                and self.max_oracle_vs_tensor < self.tensor_tol)


def draw_case(rng: np.random.Generator, noise_kind: str):
    """One random parameter tuple from the documented verification ranges."""
    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, n + 1))
    j = int(rng.integers(1, 6))
    # theta in (0.05, pi/4]: flip the half-open draw
    theta = math.pi / 4 - rng.uniform(0.0, math.pi / 4 - 0.05)
    delta = rng.uniform(0.05, math.pi / 2 - 0.05)
    alphas = AlphaSequence.from_alphas(rng.uniform(0.0, 1.0, size=j))
    p = 0.0 if noise_kind == NONE else float(rng.uniform(0.0, 0.3))
    noise = NoiseModel.parse(noise_kind, p)
    return ProtocolConfig(n, m, j, theta, delta, noise=noise), alphas


def verify_closed_forms(seed: int = 42, samples: int = 200) -> VerificationReport:
    if samples < 1:
        raise DomainError("verification needs at least one sample")
    rng = np.random.default_rng(seed)
    rows = []
    for kind in VERIFY_NOISE:
        worst = 0.0
        worst_tensor = 0.0
        tensor_count = 0
        for _ in range(samples):
            cfg, alphas = draw_case(rng, kind)
            j = cfg.k
            closed = model.closed_form_S(cfg.n, cfg.m, j, cfg.theta, cfg.delta, alphas, cfg.noise)
            oracle = oracle_S(cfg, alphas, j)
            worst = max(worst, abs(closed.s - oracle.s))
            if cfg.n <= MAX_TENSOR_BRANCHES:
                tensor = full_tensor_S(cfg, alphas, j)
                worst_tensor = max(worst_tensor, abs(oracle.s - tensor.s))
                tensor_count += 1
        rows.append(VerificationRow(kind, samples, worst, tensor_count, worst_tensor))
    return VerificationReport(seed, samples, tuple(rows))


# ---------------------------------------------------------------------------
# depth-breadth trade-off


@dataclass(frozen=True)
class TradeoffBlock:
    n: int
    k: int
    points: tuple[model.FrontierPoint, ...]
    boundary: tuple[tuple[int, int], ...]

    @property
    def shape_ok(self) -> bool:
        return bool(self.boundary) and all(m + j == self.n + self.k - 1 for m, j in self.boundary)


@dataclass(frozen=True)
class TradeoffReport:
    blocks: tuple[TradeoffBlock, ...] = field(default_factory=tuple)
    epsilon: float = DEFAULT_EPSILON
    alpha1: float = 1e-8

    @property
    def shape_ok(self) -> bool:
        return all(b.shape_ok for b in self.blocks)


def tradeoff_report(n_range: Sequence[int], k_range: Sequence[int],
                    epsilon=DEFAULT_EPSILON, alpha1=1e-8) -> TradeoffReport:
    blocks = []
    for n in n_range:
        for k in k_range:
            if not (2 <= n <= 6 and 2 <= k <= 5):
                raise DomainError(f"trade-off table limited to 2<=n<=6, 2<=k<=5, got ({n}, {k})")
            points = model.tradeoff_frontier(n, k, epsilon, alpha1)
            blocks.append(TradeoffBlock(n, k, tuple(points), tuple(model.frontier_boundary(points))))
    return TradeoffReport(tuple(blocks), epsilon, alpha1)

