import numpy as np
import pytest
import sympy as sp

from gameform import (
    Bilinear,
    BlockDims,
    Definiteness,
    JointPoint,
    NewtonOptions,
    PerturbedBilinear,
    Polynomial,
    PolyTerm,
    PreconditionError,
    QuadraticSaddle,
    RpsSoftmax,
    Tolerances,
    classify_point,
    determinant,
    full_hessian,
    multistart,
    newton_find,
    omega,
    random_polynomial,
    rps_policy,
)
from gameform.classify import scaled_determinant
from gameform.spectra import sym_eigenvalues


def _spd(rng, k):
    B = rng.standard_normal((k, k))
    A = B.T @ B + 0.1 * np.eye(k)
    return 0.5 * (A + A.T)


def test_quadratic_origin_is_hyperbolic_dne(unit_quadratic):
    r = classify_point(unit_quadratic, [0.0, 0.0])
    assert r.is_critical and r.lne_necessary and r.is_dne and r.nondegenerate and r.hyperbolic
    assert r.label == "DifferentialNash"
    np.testing.assert_allclose(r.spectrum.eigenvalues, [1 - 1j, 1 + 1j], atol=1e-14)
    assert r.det_domega == pytest.approx(2.0)


def test_bilinear_origin_is_nash_candidate_but_not_hyperbolic(unit_bilinear):
    r = classify_point(unit_bilinear, [0.0, 0.0])
    assert r.is_critical and r.lne_necessary and not r.is_dne
    assert r.block1_verdict.kind is Definiteness.ZERO and r.block2_verdict.kind is Definiteness.ZERO
    assert r.nondegenerate and r.det_domega == 1.0
    assert not r.hyperbolic
    assert r.label == "NashCandidateDegeneratePlayerBlocks"


def test_perturbed_bilinear_loses_nash():
    r = classify_point(PerturbedBilinear([[1.0]], 0.01), [0.0, 0.0])
    assert r.is_critical and not r.lne_necessary and not r.is_dne
    assert r.label == "CriticalNonNash"
    assert r.block1_verdict.min_eig == pytest.approx(-0.01)


def test_non_critical_point(unit_quadratic):
    r = classify_point(unit_quadratic, [1.0, 0.0])
    assert not r.is_critical and r.label == "NotCritical"
    assert not r.lne_necessary and not r.is_dne


def test_report_serializes(unit_quadratic):
    d = classify_point(unit_quadratic, JointPoint([0.0], [0.0])).to_dict()
    assert d["is_dne"] is True
    assert d["block1_verdict"]["kind"] == "PositiveDefinite"
    assert d["spectrum"] == [[1.0, -1.0], [1.0, 1.0]]


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerances(tol_pd=0.0)
    with pytest.raises(ValueError):
        NewtonOptions(max_iter=0)
    assert Tolerances().omega_threshold(np.array([2.0])) == pytest.approx(3e-9)
    assert Tolerances(tol_omega=1e-3).omega_threshold(np.array([1e9])) == 1e-3


def test_dne_hyperbolic_on_random_quadratics():
    rng = np.random.default_rng(0)
    for _ in range(200):
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        g = QuadraticSaddle(_spd(rng, m1), rng.standard_normal((m1, m2)), _spd(rng, m2))
        r = classify_point(g, np.zeros(m1 + m2))
        assert r.is_dne and r.hyperbolic
        J = np.block([[g.Q, g.S], [-g.S.T, g.R]])
        assert r.spectrum.min_re > 0
        sym_min = sym_eigenvalues(0.5 * (J + J.T))[0]
        assert r.spectrum.min_re >= sym_min - 1e-8 * np.abs(J).sum(axis=1).max()


def test_hessian_and_jacobian_determinants_agree():
    rng = np.random.default_rng(1)
    for _ in range(100):
        dims = BlockDims(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        g = random_polynomial(dims, 3, rng)
        x = rng.uniform(-1, 1, dims.m)
        r = classify_point(g, x)
        dH = determinant(full_hessian(g, x))
        assert abs(dH - (-1) ** dims.m2 * r.det_domega) <= 1e-8 * max(abs(dH), 1e-12)


def test_scaled_determinant_bounds():
    assert scaled_determinant(np.zeros((2, 2))) == 0.0
    assert scaled_determinant(np.diag([1e-6, 1e6])) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    for _ in range(50):
        assert abs(scaled_determinant(rng.standard_normal((4, 4)))) <= 1.0 + 1e-12


# -- Newton -----------------------------------------------------------------------


def test_newton_one_step_on_linear_games(unit_quadratic, unit_bilinear):
    res = newton_find(unit_quadratic, [5.0, -3.0])
    assert res.converged and res.iters == 1
    np.testing.assert_allclose(res.point.flat, 0.0, atol=1e-15)
    res = newton_find(unit_bilinear, [1.0, 1.0])
    assert res.converged and res.iters == 1


def test_newton_one_step_on_random_quadratics():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        g = QuadraticSaddle(_spd(rng, m1), rng.standard_normal((m1, m2)), _spd(rng, m2))
        res = newton_find(g, rng.uniform(-5, 5, m1 + m2))
        assert res.converged and res.iters == 1


def test_newton_handles_singular_rps_continuum(rps):
    seed = np.array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
    res = newton_find(rps, seed)
    assert res.converged
    x = res.point.flat
    assert np.abs(omega(rps, x)).max() < 1e-11
    np.testing.assert_allclose(rps_policy(x[:3], 1.0), [1 / 3] * 3, atol=1e-9)
    np.testing.assert_allclose(rps_policy(x[3:], 1.0), [1 / 3] * 3, atol=1e-9)


def test_newton_reports_failure_without_root():
    # omega = (1 + x^2, -y): no real zero in x
    g = Polynomial(BlockDims(1, 1), (PolyTerm(1.0, (1,), (0,)), PolyTerm(1 / 3, (3,), (0,)), PolyTerm(0.5, (0,), (2,))))
    res = newton_find(g, [0.3, 0.2])
    assert not res.converged
    assert res.iters < NewtonOptions().max_iter


# -- multistart -------------------------------------------------------------------


def test_multistart_linear_games(unit_quadratic, unit_bilinear):
    for g in (unit_quadratic, unit_bilinear):
        res = multistart(g, -2, 2, 16, 0)
        assert len(res) == 1 and res.n_unconverged == 0
        np.testing.assert_allclose(res[0].point.flat, 0.0, atol=1e-12)
    assert multistart(unit_quadratic, -2, 2, 16, 0)[0].is_dne


def test_multistart_rps_finds_uniform_degenerate_points(rps):
    res = multistart(rps, -1, 1, 32, 0)
    assert len(res) >= 1
    for r in res:
        np.testing.assert_allclose(rps_policy(r.point.x1, 1.0), [1 / 3] * 3, atol=1e-6)
        np.testing.assert_allclose(rps_policy(r.point.x2, 1.0), [1 / 3] * 3, atol=1e-6)
        assert not r.nondegenerate


def test_multistart_output_sorted_and_deduplicated():
    g = random_polynomial(BlockDims(1, 1), 3, np.random.default_rng(8))
    res = multistart(g, -2, 2, 32, 1)
    pts = [tuple(r.point.flat) for r in res]
    assert pts == sorted(pts)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert np.abs(np.subtract(pts[i], pts[j])).max() > 1e-6
    d = res.to_dict()
    assert d["footer"] == {"n_seeds": 32, "n_unconverged": res.n_unconverged, "n_found": len(res)}


def test_multistart_preconditions(unit_quadratic):
    with pytest.raises(PreconditionError):
        multistart(unit_quadratic, -2, 2, 0, 0)
    with pytest.raises(PreconditionError):
        multistart(unit_quadratic, 2, -2, 4, 0)


def test_multistart_independent_of_workers(monkeypatch):
    g = random_polynomial(BlockDims(1, 2), 3, np.random.default_rng(12))
    monkeypatch.setenv("GAMEFORM_THREADS", "1")
    a = multistart(g, -2, 2, 24, 5).to_dict()
    monkeypatch.setenv("GAMEFORM_THREADS", "4")
    b = multistart(g, -2, 2, 24, 5).to_dict()
    assert a == b


# -- coordinate invariance ----------------------------------------------------------


def _orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def _transformed_polynomial(game, T):
    """The polynomial ``y -> f(T y)`` expanded exactly by sympy."""
    m = game.dims.m
    ys = sp.symbols(f"y0:{m}")
    xs = [sum(sp.Float(T[i, j], 30) * ys[j] for j in range(m)) for i in range(m)]
    f = 0
    for t in game.terms:
        mono = sp.Float(t.coeff, 30)
        for xi, e in zip(xs, t.e1 + t.e2):
            mono *= xi**e
        f += mono
    poly = sp.Poly(sp.expand(f), *ys)
    terms = []
    for exps, c in poly.terms():
        terms.append(PolyTerm(float(c), exps[: game.dims.m1], exps[game.dims.m1:]))
    return Polynomial(game.dims, tuple(terms), max_degree=game.max_degree)


def test_classification_flags_invariant_under_block_rotations():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(12):
        dims = BlockDims(int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        g = random_polynomial(dims, 3, rng)
        T = np.zeros((dims.m, dims.m))
        T[: dims.m1, : dims.m1] = _orthogonal(rng, dims.m1)
        T[dims.m1:, dims.m1:] = _orthogonal(rng, dims.m2)
        h = _transformed_polynomial(g, T)
        for r in multistart(g, -2, 2, 8, 0, parallel=False):
            y = T.T @ r.point.flat
            r2 = classify_point(h, y)
            assert r2.flags == r.flags
            checked += 1
        # non-critical points too
        x = rng.uniform(-1, 1, dims.m)
        assert classify_point(h, T.T @ x).flags == classify_point(g, x).flags
    assert checked > 5
