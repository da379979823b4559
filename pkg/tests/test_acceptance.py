"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints a [PASS]/[FAIL] line naming the criterion (visible with
pytest -s or in the captured output of a failing run).
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from perronbounds import (
    MatrixKernel,
    ModulatedSource,
    SampledFunction,
    WeightedMeasure,
    builtin_kernel,
    decay_rate_bounds,
    discretize,
    effective_decay_rate,
    kernel_product,
    make_uniform_grid,
    matrix_power_rescaled,
    mediant_bounds,
    perron_bounds,
    power_iteration,
    product_row_sum,
    refine_bounds,
    row_sum,
    tilt_kernel,
)
from perronbounds.cli import main

RHO_2X2 = (5 + math.sqrt(33)) / 2          # dominant root of x^2 - 5x - 2
RANK_ONE_RHO = 7.0 / 3.0                    # integral of (1 + y)^2 over [0, 1]
THETA_STAR = math.log((0.1 + math.sqrt(3.25)) / 1.8)
TWO_STATE = {"P": [[0.9, 0.1], [0.1, 0.9]], "s": [1, -2]}


def report(name: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    assert ok, name


def test_criterion_1_counterexample_reproduction(tmp_path, capsys):
    out = tmp_path / "cex.json"
    started = time.monotonic()
    code = main(["counterexample", "--sizes", "100,1000,10000", "--out", str(out)])
    elapsed = time.monotonic() - started
    obj = json.loads(out.read_text())
    values = [v for _, v in obj["abs_mass_trend"]]
    ok = (
        code == 0
        and obj["grid_size"] == 10000
        and abs(obj["lower"] + 1.0) <= 5e-2
        and abs(obj["upper"] + 1.0) <= 5e-2
        and abs(obj["rho_base"] - 1.0) <= 1e-10
        and all(b > a for a, b in zip(values, values[1:]))
        and elapsed < 30.0
    )
    with capsys.disabled():
        report(f"criterion 1: counterexample collapse at n=10000 ({elapsed:.1f}s)", ok)


def test_criterion_2_sandwich_property(capsys):
    rng = np.random.default_rng(2024)
    started = time.monotonic()
    trials = 0
    ok = True
    while trials < 500:
        n = int(rng.integers(1, 9))
        K = MatrixKernel(rng.uniform(0.0, 1.0, (n, n)))
        if np.any(K.entries.sum(axis=1) == 0):
            continue
        rho = power_iteration(K, tol=1e-12, max_iter=50000).rho
        slack = 1e-8 * max(1.0, rho)
        for L in (
            MatrixKernel.identity(n),
            K,
            matrix_power_rescaled(K, 2),
            MatrixKernel(rng.uniform(0.05, 1.0, (n, n))),
        ):
            r = perron_bounds(K, L)
            ok = ok and (r.lower <= rho + slack) and (rho <= r.upper + slack)
        trials += 1
    elapsed = time.monotonic() - started
    ok = ok and elapsed < 10.0
    with capsys.disabled():
        report(f"criterion 2: sandwich on {trials} random kernels ({elapsed:.1f}s)", ok)


def test_criterion_3_product_row_sum_identity(capsys):
    rng = np.random.default_rng(3033)
    ok = True
    for _ in range(500):
        n = int(rng.integers(1, 17))
        F = MatrixKernel(rng.uniform(0.0, 10.0, (n, n)))
        G = MatrixKernel(rng.uniform(0.0, 10.0, (n, n)))
        fast = product_row_sum(F, G).values
        brute = row_sum(kernel_product(F, G)).values
        ok = ok and np.allclose(fast, brute, rtol=1e-10, atol=0.0)
    with capsys.disabled():
        report("criterion 3: row-sum-of-product identity on 500 pairs", ok)


def test_criterion_4_refinement_convergence(capsys):
    reports = refine_bounds(MatrixKernel([[1, 2], [3, 4]]), m_max=20, tol=1e-9)
    first, final = reports[0], reports[-1]
    second = reports[1]
    ok = (
        first.lower == pytest.approx(3.0, abs=1e-12)
        and first.upper == pytest.approx(7.0, abs=1e-12)
        and second.lower == pytest.approx(37 / 7, abs=1e-12)
        and second.upper == pytest.approx(17 / 3, abs=1e-12)
        and final.width <= 1e-6
        and final.lower <= RHO_2X2 <= final.upper
    )
    with capsys.disabled():
        report("criterion 4: power-ladder refinement to width 1e-6", ok)


def test_criterion_5_nystrom_accuracy(capsys):
    kernel = builtin_kernel(
        "rank_one", {"a": {"kind": "affine", "beta": 1.0}, "b": {"kind": "affine", "beta": 1.0}}
    )
    grid = make_uniform_grid(kernel.domain, 200, "midpoint")
    rho_200 = power_iteration(discretize(kernel, grid), tol=1e-12).rho
    errors = []
    for n in (25, 50, 100, 200, 400):
        g = make_uniform_grid(kernel.domain, n, "midpoint")
        errors.append(abs(power_iteration(discretize(kernel, g), tol=1e-12).rho - RANK_ONE_RHO))
    ok = abs(rho_200 - RANK_ONE_RHO) <= 1e-3 and all(
        fine <= 0.5 * coarse for coarse, fine in zip(errors, errors[1:])
    )
    with capsys.disabled():
        report("criterion 5: rank-one discretization accuracy and order", ok)


def test_criterion_6_decay_rate(capsys):
    src = ModulatedSource.from_json_obj(TWO_STATE)
    result = effective_decay_rate(src, tol=1e-8)
    ok = abs(result.theta_star - THETA_STAR) <= 1e-6

    rng = np.random.default_rng(6066)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        P = rng.multinomial(64, np.full(n, 1.0 / n), size=n) / 64.0
        source = ModulatedSource(MatrixKernel(P), SampledFunction(rng.uniform(-1, 1, n)))
        r = decay_rate_bounds(source, 0.0, m=0)
        rho0 = power_iteration(tilt_kernel(source, 0.0), tol=1e-12).rho
        ok = ok and r.lower == 1.0 and r.upper == 1.0 and rho0 == 1.0
    with capsys.disabled():
        report("criterion 6: benchmark decay rate and exact unit radius at zero tilt", ok)


def test_criterion_7_mediant_property(capsys):
    rng = np.random.default_rng(7077)
    ok = True
    for _ in range(500):
        n = int(rng.integers(1, 65))
        f = rng.uniform(1e-6, 1e3, n)
        g = rng.uniform(1e-6, 1e3, n)
        masses = rng.uniform(1e-6, 1e3, n)
        res = mediant_bounds(f, g, WeightedMeasure.on_all(masses))
        slack = 1e-12 * max(1.0, abs(res.integral_ratio))
        ok = ok and res.inf_ratio <= res.integral_ratio + slack
        ok = ok and res.integral_ratio <= res.sup_ratio + slack
    with capsys.disabled():
        report("criterion 7: mediant sandwich over 500 random triples", ok)


def test_criterion_8_scaling_laws(capsys):
    rng = np.random.default_rng(8088)
    ok = True
    for _ in range(100):
        n = int(rng.integers(1, 9))
        K = MatrixKernel(rng.uniform(0.01, 1.0, (n, n)))
        L = MatrixKernel(rng.uniform(0.1, 1.0, (n, n)))
        alpha = float(rng.uniform(1e-3, 1e3))
        base = perron_bounds(K, L)
        scaled = perron_bounds(MatrixKernel(alpha * K.entries), L)
        ok = ok and abs(scaled.lower - alpha * base.lower) <= 1e-12 * abs(alpha * base.lower)
        ok = ok and abs(scaled.upper - alpha * base.upper) <= 1e-12 * abs(alpha * base.upper)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        K = MatrixKernel(rng.uniform(0.01, 1.0, (n, n)))
        L = MatrixKernel(rng.uniform(0.1, 1.0, (n, n)))
        beta = float(rng.uniform(1e-3, 1e3))
        base = perron_bounds(K, L)
        scaled = perron_bounds(K, MatrixKernel(beta * L.entries))
        ok = ok and abs(scaled.lower - base.lower) <= 1e-12 * abs(base.lower)
        ok = ok and abs(scaled.upper - base.upper) <= 1e-12 * abs(base.upper)
    with capsys.disabled():
        report("criterion 8: homogeneity and test-kernel scaling invariance", ok)


def test_criterion_9_cli_determinism(tmp_path, capsys):
    cli = [sys.executable, "-m", "perronbounds.cli"]
    src = tmp_path / "src.json"
    src.write_text(json.dumps(TWO_STATE))

    outputs = []
    for tag in ("a", "b"):
        path = tmp_path / f"cex_{tag}.json"
        res = subprocess.run(
            cli + ["counterexample", "--sizes", "100,1000,10000", "--out", str(path)],
            capture_output=True,
        )
        assert res.returncode == 0, res.stderr.decode()
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1]

    outputs = []
    for tag in ("a", "b"):
        path = tmp_path / f"decay_{tag}.json"
        res = subprocess.run(
            cli + ["decay-rate", "--source", str(src), "--out", str(path)],
            capture_output=True,
        )
        assert res.returncode == 0, res.stderr.decode()
        outputs.append(path.read_bytes())
    ok = ok and outputs[0] == outputs[1]
    with capsys.disabled():
        report("criterion 9: byte-identical repeated CLI runs", ok)
