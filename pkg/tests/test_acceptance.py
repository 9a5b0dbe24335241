"""End-to-end acceptance checks, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line that is printed in
the terminal summary (and by ``python3 tests/test_acceptance.py``).
"""

import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from gameform import (  # noqa: E402
    Bilinear,
    BlockDims,
    Composite,
    PerturbedBilinear,
    QuadraticSaddle,
    RpsSoftmax,
    StepSizes,
    classify_point,
    determinant,
    flow_rk4,
    full_hessian,
    game_jacobian,
    genericity_sample,
    gradient_play_discrete,
    multistart,
    newton_find,
    omega,
    p_matrix,
    random_polynomial,
    rps_policy,
    structural_stability_check,
    time_average_observable,
)
from gameform.cli import dumps  # noqa: E402
from gameform.perturb import continuation  # noqa: E402
from gameform.games import Polynomial, PolyTerm  # noqa: E402
from gameform.spectra import sym_eigenvalues  # noqa: E402

RPS_X0 = np.array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
GENERICITY_SEED = 0
_cache = {}


def record(n, ok, detail, seconds):
    ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({seconds:.2f} s)  {detail}"
    print(ACCEPTANCE_LINES[n])


def _spd(rng, k):
    B = rng.standard_normal((k, k))
    A = B.T @ B + 0.1 * np.eye(k)
    return 0.5 * (A + A.T)


def test_criterion_01_bilinear_algebra():
    t0 = time.perf_counter()
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    g = Bilinear(A)
    rng = np.random.default_rng(0)
    w_err = j_err = 0.0
    max_re = 0.0
    J_want = np.block([[np.zeros((2, 2)), A], [-A.T, np.zeros((2, 2))]])
    for _ in range(50):
        z = rng.uniform(-3, 3, 4)
        w_err = max(w_err, np.abs(omega(g, z) - np.concatenate([A @ z[2:], -A.T @ z[:2]])).max())
        J = game_jacobian(g, z)
        j_err = max(j_err, np.abs(J - J_want).max())
        max_re = max(max_re, np.abs(classify_point(g, z).spectrum.eigenvalues.real).max())
    dt = time.perf_counter() - t0
    ok = w_err <= 1e-14 and j_err == 0.0 and max_re < 1e-9 and dt < 1.0
    record(1, ok, f"omega err {w_err:.1e}, Jacobian err {j_err:.1e}, max |Re lambda| {max_re:.1e}", dt)
    assert ok


def test_criterion_02_bilinear_perturbation():
    t0 = time.perf_counter()
    r = classify_point(PerturbedBilinear([[1.0]], 0.01), [0.0, 0.0])
    base = Bilinear([[1.0]])
    pert = Polynomial(BlockDims(1, 1), (PolyTerm(-0.5, (2,), (0,)),))
    path = continuation(base, pert, [0.0, 0.0], 0.1, 20)
    first_pos = path.entries[1].t
    dt = time.perf_counter() - t0
    ok = r.is_critical and not r.lne_necessary and path.status == "LostNash" and path.status_t == first_pos and dt < 1.0
    record(2, ok, f"eps=0.01 critical={r.is_critical} lne={r.lne_necessary}; path {path.status} at t={path.status_t}", dt)
    assert ok


def test_criterion_03_hessian_jacobian_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_det = worst_p = 0.0
    for _ in range(200):
        dims = BlockDims(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        g = random_polynomial(dims, int(rng.integers(1, 4)), rng)
        P = p_matrix(dims)
        for _ in range(10):
            x = rng.uniform(-1.5, 1.5, dims.m)
            H, J = full_hessian(g, x), game_jacobian(g, x)
            worst_p = max(worst_p, np.abs(J - P @ H).max() / (1 + np.abs(H).max()))
            dH, dJ = determinant(H), determinant(J)
            ref = max(abs(dH), 1e-300)
            worst_det = max(worst_det, abs(dH - (-1) ** dims.m2 * dJ) / ref)
    dt = time.perf_counter() - t0
    ok = worst_det <= 1e-8 and worst_p <= 1e-12 and dt < 10.0
    record(3, ok, f"worst det rel err {worst_det:.1e}, worst |J - P H| {worst_p:.1e}", dt)
    assert ok


def _quadratic_games():
    rng = np.random.default_rng(4)
    out = []
    for _ in range(200):
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        out.append(QuadraticSaddle(_spd(rng, m1), rng.standard_normal((m1, m2)), _spd(rng, m2)))
    return out


def criterion_4_multistart_json():
    return dumps([multistart(g, -2, 2, 16, i).to_dict() for i, g in enumerate(_quadratic_games())])


def test_criterion_04_dne_hyperbolic():
    t0 = time.perf_counter()
    violations = 0
    for i, g in enumerate(_quadratic_games()):
        m = g.dims.m
        r = classify_point(g, np.zeros(m))
        J = game_jacobian(g, np.zeros(m))
        bound = sym_eigenvalues(0.5 * (J + J.T))[0] - 1e-8 * np.abs(J).sum(axis=1).max()
        if not (r.is_dne and r.spectrum.min_re > 0 and r.spectrum.min_re >= bound):
            violations += 1
    text = criterion_4_multistart_json()
    found = json.loads(text)
    one_each = all(len(f["reports"]) == 1 and f["reports"][0]["is_dne"] for f in found)
    _cache[4] = text
    dt = time.perf_counter() - t0
    ok = violations == 0 and one_each and dt < 10.0
    record(4, ok, f"{violations} violations over 200 games; multistart one DNE per game: {one_each}", dt)
    assert ok


def test_criterion_05_structural_stability():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    base = QuadraticSaddle([[1.0]], [[1.0]], [[1.0]])
    n_ok = 0
    worst = 0.0
    for _ in range(20):
        pert = random_polynomial(BlockDims(1, 1), 3, rng, min_degree=2)
        ok, path = structural_stability_check(base, pert, [0.0, 0.0], 0.05, 20)
        res = max(
            float(np.abs(omega(Composite(base, pert, e.t), e.point)).max()) for e in path.entries
        )
        worst = max(worst, res)
        n_ok += ok and res < 1e-10
    dt = time.perf_counter() - t0
    ok = n_ok == 20 and dt < 10.0
    record(5, ok, f"{n_ok}/20 perturbations persist, worst corrector residual {worst:.1e}", dt)
    assert ok


def _genericity_json():
    return dumps(genericity_sample({"family": "random_polynomial", "degree": 3}, 500, GENERICITY_SEED).to_dict())


def test_criterion_06_genericity():
    t0 = time.perf_counter()
    text = _genericity_json()
    dt = time.perf_counter() - t0
    _cache[6] = (text, os.environ.get("GAMEFORM_THREADS", "1"))
    s = json.loads(text)
    all_hyp = s["n_dne_hyperbolic"] == s["n_dne"]
    ok = s["n_degenerate"] == 0 and all_hyp and dt < 60.0
    record(
        6, ok,
        f"{s['n_critical_points']} critical points, {s['n_degenerate']} degenerate, "
        f"{s['n_dne_hyperbolic']}/{s['n_dne']} DNE hyperbolic",
        dt,
    )
    assert ok


def test_criterion_07_rps_cycling():
    # Explicit steps spiral outward around the uniform point: near it each step
    # multiplies the squared distance by about 1 + gamma^2 |lambda|^2 with
    # |lambda| = sqrt(3) / 9, roughly e^18 over the whole run.  The time average
    # stays uniform while the final policy drifts toward a vertex.
    t0 = time.perf_counter()
    tr = gradient_play_discrete(RpsSoftmax(1.0, 1.0, 0.0), RPS_X0, StepSizes.uniform(0.05), 200_000)
    avg = time_average_observable(tr, "policy1")
    final = rps_policy(tr.final[:3], 1.0)
    dt = time.perf_counter() - t0
    avg_ok = np.abs(avg - 1 / 3).max() < 0.02
    bounded = final.max() < 0.9
    ok = avg_ok and bounded and dt < 30.0
    record(
        7, ok,
        f"time-average max dev {np.abs(avg - 1 / 3).max():.4f} (< 0.02: {avg_ok}); "
        f"final max component {final.max():.4f} (< 0.9: {bounded})",
        dt,
    )
    assert ok


def test_criterion_08_rps_perturbed_collapse():
    t0 = time.perf_counter()
    g = RpsSoftmax(1.0, 1.0, 1e-3)
    x = RPS_X0.copy()
    done, top = 0, 0.0
    while done < 1_000_000:
        tr = gradient_play_discrete(g, x, StepSizes.uniform(0.05), 50_000, record_every=50_000)
        x, done = tr.final, done + 50_000
        top = float(rps_policy(x[:3], 1.0).max())
        if top >= 0.99:
            break
    dt = time.perf_counter() - t0
    ok = top >= 0.99 and dt < 60.0
    record(8, ok, f"max policy component {top:.6f} after {done} iterations", dt)
    assert ok


def test_criterion_09_dynamics_exactness():
    t0 = time.perf_counter()
    g = Bilinear([[1.0]])
    tr = gradient_play_discrete(g, [1.0, 0.0], StepSizes.uniform(0.1), 100)
    growth = np.abs(np.sum(tr.states**2, axis=1) / 1.01 ** tr.steps - 1).max()
    rk = flow_rk4(g, [1.0, 0.0], 1e-3, 10.0, record_every=10_000)
    drift = abs(np.linalg.norm(rk.final) - 1.0)
    rng = np.random.default_rng(9)
    iters = set()
    for _ in range(50):
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        q = QuadraticSaddle(_spd(rng, m1), rng.standard_normal((m1, m2)), _spd(rng, m2))
        res = newton_find(q, rng.uniform(-5, 5, m1 + m2))
        iters.add(res.iters if res.converged else -1)
    dt = time.perf_counter() - t0
    ok = growth <= 1e-10 and drift < 1e-7 and iters == {1} and dt < 5.0
    record(9, ok, f"growth law rel err {growth:.1e}, RK4 drift {drift:.1e}, Newton iterations {sorted(iters)}", dt)
    assert ok


def test_criterion_10_determinism(monkeypatch):
    t0 = time.perf_counter()
    runs6 = [_cache[6][0]] if 6 in _cache else []
    runs4 = [_cache[4]] if 4 in _cache else []
    for threads in ("1", "4"):
        monkeypatch.setenv("GAMEFORM_THREADS", threads)
        runs6.append(_genericity_json())
        runs4.append(criterion_4_multistart_json())
    same6 = len(set(runs6)) == 1
    same4 = len(set(runs4)) == 1
    dt = time.perf_counter() - t0
    ok = same6 and same4
    record(10, ok, f"genericity identical over {len(runs6)} runs, multistart identical over {len(runs4)} runs", dt)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
