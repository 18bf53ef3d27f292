import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from pfzeros import maps as M, spectra as sp
from pfzeros.errors import ConfigError, DegenerateDirection, DomainError, NotFixedPoint
from pfzeros.polymap import MapSpec


def test_logistic_domain():
    with pytest.raises(DomainError):
        M.make_logistic(0.5)
    f = M.make_logistic(5, override=True)
    assert f.lam1 == 5


@settings(max_examples=30, deadline=None)
@given(st.fractions(-3, 3, max_denominator=8), st.integers(2, 5))
def test_mapspec_json_round_trip(lam, r):
    f = M.make_hermite_r(lam, r)
    g = MapSpec.from_json(f.to_json())
    assert g.poly == f.poly and g.coeffs() == f.coeffs()


def test_mapspec_rejects_offset_and_bad_lambda():
    with pytest.raises(ConfigError):
        MapSpec.from_json_dict({"components": [[1, 2]]})
    with pytest.raises(ConfigError):
        MapSpec.from_json_dict({"components": [[0, 2, -1]], "lambda": [3.0]})


def test_julia_linear_part():
    alpha = 0.3 + 0.2j
    f = M.make_julia(alpha)
    assert np.allclose(np.sort_complex(f.lam), np.sort_complex([1 + 2 * alpha, np.conj(1 + 2 * alpha)]))
    # the translated map agrees with z² + 1/4 − α² around the fixed point 1/2 + α
    z0 = M.julia_fixed_points(alpha)[0]
    u = 0.1 - 0.05j
    w = f(np.array([u.real, u.imag]))
    assert abs(complex(*w) - ((z0 + u) ** 2 + 0.25 - alpha ** 2 - z0)) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 2), st.floats(0.1, 0.9), st.floats(-1, 1))
def test_henon_fixed_points(al, be, ga):
    for p in M.henon_fixed_points(al, be, ga):
        p = np.array(p)
        assert np.allclose(M.henon_step(al, be, ga, p), p, atol=1e-12)
    pts = np.random.default_rng(1).normal(size=(5, 2))
    assert np.allclose(M.henon_inverse(al, be, ga, M.henon_step(al, be, ga, pts)), pts, atol=1e-9)


def test_henon_classic_translation():
    a, b = 1.4, 0.3
    x, y = M.henon_classic_fixed_point(a, b)
    f = M.henon_classic(a, b)
    u = np.array([0.05, -0.02])
    X, Y = x + u[0], y + u[1]
    assert np.allclose(f(u) + [x, y], [1 - a * X * X + Y, b * X], atol=1e-14)


def test_lorenz_fixed_points_and_linearization():
    F = M.lorenz_field()
    pts = M.ode_fixed_points(F)
    assert np.allclose(pts[1], [math.sqrt(72), math.sqrt(72), 27])
    ev = M.linearize(F, pts[0])
    assert np.allclose(np.sort(ev), np.sort(np.roots(M.lorenz_characteristic(10, 28, 8 / 3, "theta"))), atol=1e-9)
    ev_a = M.linearize(F, pts[1])
    corr = np.roots(M.lorenz_characteristic(10, 28, 8 / 3, "alpha", "corrected"))
    printed = np.roots(M.lorenz_characteristic(10, 28, 8 / 3, "alpha", "printed"))
    assert np.allclose(np.sort_complex(ev_a), np.sort_complex(corr), atol=1e-9)
    assert not np.allclose(np.sort_complex(ev_a), np.sort_complex(printed), atol=1e-3)
    with pytest.raises(NotFixedPoint):
        M.linearize(F, [1.0, 1.0, 1.0])


def test_linearize_map_vs_field():
    f = M.make_logistic(4)
    assert np.allclose(M.linearize(f, [0.75]), [-2.0])
    assert np.allclose(M.linearize(M.logistic_ode(), [1.0]), [-1.0])


def test_convergence_classify():
    assert M.convergence_classify([0.5, 0.3]) == "to-fixed-point"
    assert M.convergence_classify([2.0, 0.6]) == "candidate-distribution"
    assert M.convergence_classify([-1.0]) == "null-direction"
    assert M.convergence_classify([-1.0, 1.0], [1, 1], mode="ode") == "null-direction"
    assert M.convergence_classify([-2.0, 1.0], mode="ode") == "to-fixed-point"


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 100), st.floats(-1, 1))
def test_null_test_scale_free(c, x):
    lam = [-1.0, 1.0 + x]
    assert M.convergence_classify(lam, [1, 1], "ode") == M.convergence_classify(lam, [c, c], "ode")


def test_differential_iteration():
    D = M.DifferentialIteration.from_time(M.logistic_ode(), [1.0], 10.0, 1000)
    orb = D.orbit([0.1], 1000)
    assert abs(orb[-1, 0] - 1) < 1e-3
    f = D.mapspec
    assert np.allclose(f.lam, [1 + D.delta[0]])
    with pytest.raises(ConfigError):
        M.DifferentialIteration.from_time(M.logistic_ode(), [0.5], 1.0, 10)


dual = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)).filter(lambda v: math.hypot(v[1], v[2]) > 1e-3)


@settings(max_examples=30, deadline=None)
@given(dual)
def test_lorenz_frame(s):
    g = M.lorenz_geometry(10, 28, 8 / 3, s)
    assert np.max(np.abs(g.T.T @ g.T - np.eye(3))) < 1e-12
    assert np.allclose(g.T.T @ g.Q @ g.T, np.diag([0, -g.mu, g.mu]), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(dual, st.integers(0, 2 ** 16))
def test_lorenz_split_identity(s, seed):
    g = M.lorenz_geometry(10, 28, 8 / 3, s)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(10, 3)) + 1j * rng.normal(size=(10, 3))
    full, split = g.prf_u(u), g.split(u)
    assert np.allclose(full, split, atol=1e-9 * (1 + np.abs(full).max()))


def test_lorenz_printed_split_differs():
    g = M.lorenz_geometry(10, 28, 8 / 3, (1.0, 1.0, 1.0))
    u = np.array([[0.3 + 0.1j, -0.4 + 0.2j, 0.5 - 0.3j]])
    assert abs(g.prf_u(u)[0] - g.split_printed(u)[0]) > 1e-3


def test_lorenz_geometry_errors():
    with pytest.raises(DegenerateDirection):
        M.lorenz_geometry(10, 28, 8 / 3, (1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        M.lorenz_geometry(10, 0.5, 8 / 3)


def test_lorenz_ovals():
    pc = M.lorenz_ovals(n_samples=20000, seed=3)
    assert pc.residual.max() < 1e-9
    assert stats.kstest(pc.latent, sp.semicircle_cdf).statistic < 0.02
    assert 0 < pc.rejection_rate < 1
    r, s, t = pc.points[:, 0], pc.points[:, 1], pc.points[:, 2]
    varpi = r + 28 * s
    assert np.all(np.abs(varpi) > np.abs(r))
    assert set(pc.labels) <= {"alpha+", "alpha-"}


def test_henon_branches():
    pc = M.henon_branches(n_samples=20000, seed=5)
    assert pc.residual.max() < 1e-9
    b0 = pc.branch == 0
    t = pc.latent[b0]
    assert stats.kstest(t, sp.semicircle_cdf).statistic < 0.02
    assert [int((pc.branch == k).sum()) for k in range(5)] == [20000, 10000, 6666, 5000, 4000]
    assert pc.rejection_rate > 0


def test_henon_rejection_zero_when_not_binding():
    pc = M.henon_branches(n_samples=5000, seed=5, x_max=1e-6)
    assert pc.rejection_rate == 0 and pc.fallback_count == 0


def test_samplers_deterministic():
    a = M.henon_branches(n_samples=500, seed=9)
    b = M.henon_branches(n_samples=500, seed=9)
    assert np.array_equal(a.points, b.points)
    c = M.lorenz_ovals(n_samples=500, seed=9)
    d = M.lorenz_ovals(n_samples=500, seed=9)
    assert np.array_equal(c.points, d.points)
