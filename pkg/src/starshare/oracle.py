"""Brute-force density-matrix oracle for the closed forms in :mod:`starshare.model`.

Each branch is a two-qubit state ordered (Bob, Alice).  Alice-side
operations act on the second slot.  Two independent routes are provided:

* per-branch: evolve one branch through the averaged PPM channel and
  assemble ``I_n``, ``J_n`` from branch factors (the branches are
  independent, so the network correlators factorise);
* full tensor: build the ``4^n`` dimensional network state and apply the
  generations as non-selective instruments, then evaluate every
  correlator ``<A_x1 ... A_xn B_y>`` directly.  No factorisation is used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .model import AlphaSequence, DomainError, ProtocolConfig, check_theta
from .noise import AMPLITUDE_DAMPING, DEPOLARIZING, NoiseModel

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": I2, "x": SX, "y": SY, "z": SZ}

ALICE_OBS = (SX, SZ)

MAX_TENSOR_BRANCHES = 3
MAX_EXPAND_BRANCHES = 3


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def bob_observable(delta: float, y: int) -> np.ndarray:
    sign = 1.0 if y == 0 else -1.0
    return sign * math.sin(delta) * SZ + math.cos(delta) * SX


def on_alice(op: np.ndarray) -> np.ndarray:
    return np.kron(I2, op)


def on_bob(op: np.ndarray) -> np.ndarray:
    return np.kron(op, I2)


def expect(op: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.einsum("ij,ji->", op, rho)))


@dataclass(frozen=True)
class BranchDensity:
    """A 4x4 branch state in the (Bob, Alice) basis ``|b a>``."""

    mat: np.ndarray

    def check(self, tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
        check_density(self.mat, tol, psd_tol)


def check_density(rho: np.ndarray, tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"not Hermitian (deviation {herm:.3g})")
    tr = abs(np.trace(rho) - 1.0)
    if tr > tol:
        raise ValueError(f"trace differs from 1 by {tr:.3g}")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if low < -psd_tol:
        raise ValueError(f"negative eigenvalue {low:.3g}")


def damping_kraus(p: float) -> list[np.ndarray]:
    return [
        np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex),
        np.array([[1, 0], [0, math.sqrt(1.0 - p)]], dtype=complex),
    ]


def initial_branch_state(theta: float, noise: NoiseModel = NoiseModel()) -> np.ndarray:
    check_theta(theta, allow_zero=True)
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.cos(theta)
    psi[3] = math.sin(theta)
    rho = np.outer(psi, psi.conj())
    if noise.kind == DEPOLARIZING:
        rho = (1.0 - noise.p) * rho + noise.p * np.eye(4) / 4.0
    elif noise.kind == AMPLITUDE_DAMPING:
        ops = [on_alice(k) for k in damping_kraus(noise.p)]
        rho = sum(k @ rho @ k.conj().T for k in ops)
    return rho


# ---------------------------------------------------------------------------
# one generation of PPM, averaged over inputs and outcomes


def ppm_channel(rho: np.ndarray, alpha: float) -> np.ndarray:
    """Averaged post-measurement branch state after one PPM generation."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    x = on_alice(SX)
    z = on_alice(SZ)
    return (3.0 - alpha) / 4.0 * rho + 0.25 * (x @ rho @ x) + alpha / 4.0 * (z @ rho @ z)


def _embed(op: np.ndarray, slot: int, n_slots: int) -> np.ndarray:
    ops = [I2] * n_slots
    ops[slot] = op
    return kron(*ops)


def _alice_slot(branch: int) -> int:
    return 2 * branch + 1


def subset_expansion(m: int, rho_list, alpha: float) -> np.ndarray:
    """Averaged m-branch state written as the explicit sum over measured subsets.

    The outer sums run over the set of branches that measured sigma_x and a
    disjoint set that measured sigma_z, weighted by
    ``alpha^q (3 - alpha)^(m - p - q) / 4^m``.
    """
    if m > MAX_EXPAND_BRANCHES:
        raise DomainError(f"explicit expansion limited to m <= {MAX_EXPAND_BRANCHES}")
    if len(rho_list) != m:
        raise DomainError("need one branch state per shared branch")
    rho = kron(*rho_list)
    slots = 2 * m
    out = np.zeros_like(rho)
    branches = range(m)
    for p in range(m + 1):
        for xs in itertools.combinations(branches, p):
            rest = [b for b in branches if b not in xs]
            for q in range(len(rest) + 1):
                for zs in itertools.combinations(rest, q):
                    weight = alpha**q * (3.0 - alpha) ** (m - p - q) / 4.0**m
                    op = np.eye(4**m, dtype=complex)
                    for b in xs:
                        op = op @ _embed(SX, _alice_slot(b), slots)
                    for b in zs:
                        op = op @ _embed(SZ, _alice_slot(b), slots)
                    out += weight * (op @ rho @ op.conj().T)
    return out


def subset_weight_total(m: int, alpha: float) -> float:
    total = 0.0
    for p in range(m + 1):
        for q in range(m - p + 1):
            count = math.comb(m, p) * math.comb(m - p, q)
            total += count * alpha**q * (3.0 - alpha) ** (m - p - q) / 4.0**m
    return total


# ---------------------------------------------------------------------------
# per-branch factors


def _final_alice_effective(alpha: float):
    # input 1: with prob alpha sigma_z, otherwise idle with outcome +1
    return SX, alpha * SZ + (1.0 - alpha) * I2


def branch_factor_sim(rho: np.ndarray, delta: float, alpha: float, which: str = "I") -> float:
    """Final-round contribution of a shared branch to ``I`` or ``J``."""
    a0, a1 = _final_alice_effective(alpha)
    if which == "I":
        b = bob_observable(delta, 0)
        return expect(np.kron(b, a0), rho) + expect(np.kron(b, a1), rho)
    if which == "J":
        b = bob_observable(delta, 1)
        return expect(np.kron(b, a0), rho) - expect(np.kron(b, a1), rho)
    raise ValueError(f"which must be 'I' or 'J', got {which!r}")


def untouched_factor_sim(rho: np.ndarray, delta: float, which: str = "I") -> float:
    """Contribution of a branch measured once with plain sigma_x / sigma_z."""
    if which == "I":
        b = bob_observable(delta, 0)
        return expect(np.kron(b, SX), rho) + expect(np.kron(b, SZ), rho)
    if which == "J":
        b = bob_observable(delta, 1)
        return expect(np.kron(b, SX), rho) - expect(np.kron(b, SZ), rho)
    raise ValueError(f"which must be 'I' or 'J', got {which!r}")


class OracleValue(NamedTuple):
    s: float
    i_n: float
    j_n: float


def _s_from(i_n: float, j_n: float, n: int) -> float:
    return abs(i_n) ** (1.0 / n) + abs(j_n) ** (1.0 / n)


def evolved_branch_state(theta, noise, alphas, j) -> np.ndarray:
    rho = initial_branch_state(theta, noise)
    for a in alphas.alphas[: j - 1]:
        rho = ppm_channel(rho, a)
    return rho


def oracle_S(config: ProtocolConfig, alphas: AlphaSequence, j: int) -> OracleValue:
    """``S`` from one representative evolved branch and the untouched branch."""
    if not 1 <= j <= len(alphas):
        raise DomainError(f"round {j} outside the sequence of length {len(alphas)}")
    n, m = config.n, config.m
    start = initial_branch_state(config.theta, config.noise)
    evolved = evolved_branch_state(config.theta, config.noise, alphas, j)
    alpha_j = alphas.alpha(j)
    i_n = (branch_factor_sim(evolved, config.delta, alpha_j, "I") ** m
           * untouched_factor_sim(start, config.delta, "I") ** (n - m))
    j_n = (branch_factor_sim(evolved, config.delta, alpha_j, "J") ** m
           * untouched_factor_sim(start, config.delta, "J") ** (n - m))
    return OracleValue(_s_from(i_n, j_n, n), i_n, j_n)


# ---------------------------------------------------------------------------
# full network tensor


def _projectors(op: np.ndarray):
    return [(I2 + op) / 2.0, (I2 - op) / 2.0]


def _ppm_kraus(alpha: float) -> list[np.ndarray]:
    """Kraus operators of one PPM generation with uniform inputs (Luders updates)."""
    half = math.sqrt(0.5)
    ops = [half * P for P in _projectors(SX)]
    ops += [half * math.sqrt(alpha) * P for P in _projectors(SZ)]
    ops.append(half * math.sqrt(1.0 - alpha) * I2)
    return ops


def _instrument(rho: np.ndarray, kraus, slot: int, n_slots: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in kraus:
        big = _embed(k, slot, n_slots)
        out += big @ rho @ big.conj().T
    return out


def _povm(kind: str, x: int, alpha: float) -> dict[int, np.ndarray]:
    """Outcome -> POVM element for one Alice in the final round."""
    if x == 0:
        plus, minus = _projectors(SX)
        return {1: plus, -1: minus}
    plus, minus = _projectors(SZ)
    if kind == "plain":
        return {1: plus, -1: minus}
    return {1: alpha * plus + (1.0 - alpha) * I2, -1: alpha * minus}


def network_state(config: ProtocolConfig, alphas: AlphaSequence, j: int) -> np.ndarray:
    """Full averaged network state seen by the round-``j`` observers."""
    n, m = config.n, config.m
    slots = 2 * n
    rho = kron(*[initial_branch_state(config.theta, config.noise)] * n)
    for a in alphas.alphas[: j - 1]:
        kraus = _ppm_kraus(a)
        for b in range(m):
            rho = _instrument(rho, kraus, _alice_slot(b), slots)
    return rho


def full_tensor_S(config: ProtocolConfig, alphas: AlphaSequence, j: int) -> OracleValue:
    """Literal network evaluation of ``S`` for ``n <= 3``."""
    n, m = config.n, config.m
    if n > MAX_TENSOR_BRANCHES:
        raise DomainError(f"full tensor evaluation limited to n <= {MAX_TENSOR_BRANCHES}")
    if not 1 <= j <= len(alphas):
        raise DomainError(f"round {j} outside the sequence of length {len(alphas)}")
    rho = network_state(config, alphas, j)
    alpha_j = alphas.alpha(j)
    slots = 2 * n
    dim = 4**n

    bob_ops = []
    for y in (0, 1):
        b = bob_observable(config.delta, y)
        bob_ops.append(kron(*[op for _ in range(n) for op in (b, I2)]))

    totals = [0.0, 0.0]
    for xs in itertools.product((0, 1), repeat=n):
        povms = [_povm("ppm" if i < m else "plain", x, alpha_j) for i, x in enumerate(xs)]
        for y in (0, 1):
            corr = 0.0
            for outcomes in itertools.product((1, -1), repeat=n):
                alice = kron(*[el for i, a in enumerate(outcomes) for el in (I2, povms[i][a])])
                for b in (1, -1):
                    bob = (np.eye(dim) + b * bob_ops[y]) / 2.0
                    prob = expect(alice @ bob, rho)
                    corr += math.prod(outcomes) * b * prob
            sign = (-1) ** sum(xs) if y == 1 else 1
            totals[y] += sign * corr
    return OracleValue(_s_from(totals[0], totals[1], n), totals[0], totals[1])


__all__ = [
    "BranchDensity", "OracleValue", "PAULI", "branch_factor_sim", "check_density",
    "full_tensor_S", "initial_branch_state", "subset_expansion", "network_state",
    "oracle_S", "ppm_channel", "untouched_factor_sim",
]
