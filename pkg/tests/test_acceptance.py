"""Acceptance criteria, each checked at its stated tolerance and time budget.

A summary line per criterion is printed at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from starshare import cli, io, model, oracle
from starshare import experiments as ex
from starshare.model import AlphaSequence, canonical_delta, closed_form_S

from conftest import record, theta_at


def test_criterion_1_oracle_equivalence():
    start = time.perf_counter()
    report = ex.verify_closed_forms(seed=42, samples=200)
    elapsed = time.perf_counter() - start
    ok = (report.passed and report.max_closed_vs_oracle < 1e-9
          and report.max_oracle_vs_tensor < 1e-11 and len(report.rows) == 3 and elapsed < 30)
    record(1, "oracle equivalence", ok,
           f"closed-vs-oracle {report.max_closed_vs_oracle:.2e}, oracle-vs-tensor "
           f"{report.max_oracle_vs_tensor:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_thresholds():
    c = [model.threshold_concurrence(k) for k in (1, 2, 3)]
    ok = c[0] == 0 and abs(c[1] - math.sqrt(3) / 2) < 1e-12 and abs(c[2] - math.sqrt(15) / 4) < 1e-12
    record(2, "threshold values", ok, f"C(1..3) = {c[0]}, {c[1]:.10f}, {c[2]:.10f}")
    assert ok


def test_criterion_3_max_rounds(capsys):
    # expected ranks come from C(2) < 0.87 < C(3) < 0.97, 0.99 < C(4)
    bounds = [math.sqrt(1 - 4.0 ** (1 - k)) for k in (2, 3, 4)]
    assert bounds[0] < 0.87 < bounds[1] < 0.97 < 0.99 < bounds[2]
    start = time.perf_counter()
    code = cli.main(["max-rounds", "--concurrence", "0.87", "0.97", "0.99",
                     "--epsilon", "1e-10", "--alpha1", "1e-10"])
    elapsed = time.perf_counter() - start
    rounds = io.from_csv(capsys.readouterr().out).column("max_rounds")
    ok = code == 0 and rounds == [2, 3, 3] and elapsed < 1
    record(3, "max rounds at C = 0.87/0.97/0.99", ok, f"{rounds} in {elapsed:.3f}s")
    assert ok


def test_criterion_4_failure_at_threshold():
    values = {}
    for k in (2, 3, 4):
        theta = theta_at(math.sqrt(1 - 4.0 ** (1 - k)))
        d = canonical_delta(theta)
        seq = model.build_alpha_sequence(theta, d, 1e-10, 1e-8, k)
        values[k] = closed_form_S(4, 4, k, theta, d, seq).s
    ok = all(s < 2 for s in values.values())
    record(4, "failure at C = C(k)", ok, ", ".join(f"k={k}: S={s:.10f}" for k, s in values.items()))
    assert ok


def test_criterion_5_tradeoff():
    details, ok = [], True
    for n, k in ((3, 2), (4, 3), (5, 3)):
        points = {(p.m, p.j): p.achievable for p in model.tradeoff_frontier(n, k, 1e-10, 1e-8)}
        boundary = model.frontier_boundary(model.tradeoff_frontier(n, k, 1e-10, 1e-8))
        cell_ok = (points[(n, k - 1)] and points[(n - 1, k)] and not points[(n, k)]
                   and all(m + j == n + k - 1 for m, j in boundary))
        ok &= cell_ok
        details.append(f"({n},{k}) boundary {boundary}")
    theta = theta_at(math.sqrt(3) / 2)
    d = canonical_delta(theta)
    seq = model.build_alpha_sequence(theta, d, 1e-10, 1e-12, 2)
    s = closed_form_S(3, 2, 2, theta, d, seq).s
    limit = 2 * (math.cos(d) ** 2 + math.sin(d)) ** (1 / 3)
    ok &= abs(s - limit) < 1e-6 and abs(limit - 2 * 1.25 ** (1 / 3)) < 1e-12
    details.append(f"S(3,2,2)={s:.6f}")
    record(5, "depth-breadth trade-off", ok, "; ".join(details))
    assert ok


def test_criterion_6_protocol_comparison(depth5):
    start = time.perf_counter()
    res = ex.compare_protocols(depth5["theta"], depth5["epsilon"], depth5["alpha1"], depth5["omega"], 5)
    elapsed = time.perf_counter() - start
    ok = (len(res.records) == 5 and elapsed < 1
          and all(r.ppm_violates and r.unsharp_violates and r.s_ppm >= r.s_unsharp for r in res.records))
    record(6, "PPM vs unsharp, rounds 1-5", ok, f"{elapsed:.3f}s")
    assert ok


def _rows(records):
    by_theta = {}
    for r in records:
        by_theta.setdefault(r.coords[0], []).append((r.coords[1], r.max_rounds))
    return {t: [k for _, k in sorted(v)] for t, v in by_theta.items()}


def test_criterion_7_sweeps():
    start = time.perf_counter()
    theta_axis = ex.Axis.parse(f"theta:0.3:0.785:{ex.DEFAULT_ANGLE_POINTS}")
    angle_grid = ex.sweep_max_rounds(ex.SweepSpec(theta_axis, ex.Axis.parse("delta:0:pi/4:181")))
    grids = {}
    for noise, top in (("none", 0.1), ("depolarizing", 0.1), ("damping", 0.3)):
        p_axis = ex.Axis.parse(f"p:0:{top}:{ex.DEFAULT_NOISE_POINTS}")
        grids[noise] = ex.sweep_max_rounds(ex.SweepSpec(theta_axis, p_axis, noise=noise))
    elapsed = time.perf_counter() - start

    base = {r.coords[0]: r for r in grids["none"] if r.coords[1] == 0.0}
    slices_equal = all(
        r.max_rounds == base[r.coords[0]].max_rounds and r.s_per_round == base[r.coords[0]].s_per_round
        for noise in ("depolarizing", "damping") for r in grids[noise] if r.coords[1] == 0.0
    )
    monotone = all(
        row == sorted(row, reverse=True)
        for noise in ("depolarizing", "damping") for row in _rows(grids[noise]).values()
    )
    ranges = (max(r.coords[1] for r in grids["depolarizing"]) == pytest.approx(0.1)
              and max(r.coords[1] for r in grids["damping"]) == pytest.approx(0.3))
    ok = len(angle_grid) == 181 * 181 and slices_equal and monotone and ranges and elapsed < 120
    record(7, "sweep properties", ok,
           f"p=0 slices equal {slices_equal}, non-increasing in p {monotone}, {elapsed:.1f}s")
    assert ok


def test_criterion_8_invariant_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures = []

    for _ in range(1000):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        out = oracle.ppm_channel(rho, rng.uniform())
        if (abs(np.trace(out) - 1) > 1e-14 or np.abs(out - out.conj().T).max() > 1e-14
                or np.linalg.eigvalsh(out).min() < -1e-10):
            failures.append("channel")
            break

    xx, zz = np.kron(oracle.SX, oracle.SX), np.kron(oracle.SZ, oracle.SZ)
    for _ in range(50):
        theta = rng.uniform(0.05, math.pi / 4)
        alphas = rng.uniform(0, 1, size=rng.integers(1, 6))
        rho0 = oracle.initial_branch_state(theta)
        rho = rho0
        for a in alphas:
            rho = oracle.ppm_channel(rho, a)
        p_j = math.prod((2 - a) / 2 for a in alphas)
        if (abs(oracle.expect(xx, rho) - p_j * oracle.expect(xx, rho0)) > 1e-12
                or abs(oracle.expect(zz, rho) - 2.0 ** -len(alphas) * oracle.expect(zz, rho0)) > 1e-12):
            failures.append("heisenberg")
            break

    for m in (1, 2, 3):
        rhos = [oracle.initial_branch_state(rng.uniform(0.05, 0.78)) for _ in range(m)]
        alpha = rng.uniform()
        expected = oracle.kron(*[oracle.ppm_channel(r, alpha) for r in rhos])
        if np.abs(oracle.subset_expansion(m, rhos, alpha) - expected).max() > 1e-13:
            failures.append(f"expansion m={m}")

    for _ in range(100):
        theta = rng.uniform(0.3, math.pi / 4 - 1e-3)
        seq = model.build_alpha_sequence(theta, canonical_delta(theta), 10 ** rng.uniform(-10, -2),
                                         10 ** rng.uniform(-10, -6), 8)
        live = seq.alphas[: seq.feasible_through]
        if not (all(0 < a < 1 for a in live) and all(a < b for a, b in zip(live, live[1:]))):
            failures.append("monotonicity")
            break

    checked = 0
    for _ in range(400):
        j, theta, delta = int(rng.integers(1, 6)), rng.uniform(0.1, math.pi / 4), rng.uniform(0.05, 1.5)
        earlier = list(rng.uniform(0, 1, size=j - 1))
        p_j = math.prod((2 - a) / 2 for a in earlier)
        if math.sin(delta) * (2.0 ** (1 - j) - math.cos(2 * theta)) <= 1e-3:
            continue
        b = model.alpha_lower_bound(j, theta, delta, p_j)
        if not 0 < b.value < 1:
            continue
        checked += 1
        s = oracle.oracle_S(model.ProtocolConfig(1, 1, j, theta, delta),
                            AlphaSequence.from_alphas(earlier + [b.value]), j).s
        if abs(s - 2) > 1e-10:
            failures.append("saturation")
            break
    if checked < 20:
        failures.append("saturation undersampled")

    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10
    record(8, "invariant suite", ok, f"{elapsed:.1f}s" + (f", failed: {failures}" if failures else ""))
    assert ok
