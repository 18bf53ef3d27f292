import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfzeros import descent as de, maps as M, spectra as sp
from pfzeros.errors import ConfigError, NoBracket, RealZeroOfH
from pfzeros.polymap import map1d


def logistic_q(s):
    """Raw q for λ = 4: a_c = (1 + i√(2/s − 1))/4, so Im f(a_c) = √(2/s − 1)/2."""
    s = np.asarray(s, dtype=float)
    return np.where(s < 2, np.sqrt(np.clip(2 / s - 1, 0, None)) / (2 * np.pi), 0.0)


def hermite_q(s, lam=1.0):
    s = np.asarray(s, dtype=float)
    return np.where(lam ** 2 * s < 4, lam / (2 * np.pi) * np.sqrt(np.clip((1 - lam ** 2 * s / 4) / s, 0, None)), 0.0)


def test_logistic_critical_points_s1():
    pts = de.critical_points(M.make_logistic(4), [1.0])
    a = sorted((complex(c.a[0]) for c in pts), key=lambda z: z.imag)
    assert np.allclose(a, [0.25 - 0.25j, 0.25 + 0.25j], atol=1e-14)
    assert all(c.tag == "indefinite" and c.residual < 1e-12 for c in pts)
    assert de.dominant(pts).a[0].imag > 0


def test_logistic_real_points_past_edge():
    pts = de.critical_points(M.make_logistic(4), [4.0])
    assert all(abs(c.a[0].imag) < 1e-12 for c in pts)
    assert de.dominant(pts) is None


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=2, max_size=4).filter(lambda c: c[-1] != 0),
       st.floats(0.1, 10))
def test_gradient_vanishes_at_critical_points(coeffs, s):
    f = map1d([0, *coeffs])
    prf = de.PRF(f, [s])
    for c in de.critical_points(f, [s]):
        g = prf.gradient(c.a)
        assert abs(g[0]) * abs(c.a[0]) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 1.9))
def test_logistic_q_closed_form(s):
    q = de.zero_density_1d(M.make_logistic(4), np.array([s]), normalize=False).values
    assert abs(q[0] - logistic_q(s)) < 1e-12


def test_hermite_q_closed_form_and_mass():
    s = np.geomspace(1e-8, 4, 20001)
    q = de.zero_density_1d(M.make_hermite(1), s, normalize=False)
    assert np.allclose(q.values, hermite_q(s), atol=1e-10)
    assert abs(q.meta["raw_integral"] - 0.5) < 2e-3


def test_kappa_code_derivative_is_q():
    # d κ/ds = q: the phase term contributes nothing at a critical point
    s = np.linspace(0.2, 1.8, 41)
    h = 1e-6
    k1, _ = de.kappa_code_1d(M.make_logistic(4), s + h)
    k0, _ = de.kappa_code_1d(M.make_logistic(4), s - h)
    assert np.allclose(np.abs(k1 - k0) / (2 * h), logistic_q(s), atol=1e-6)


def test_kappa_solve_residual_and_distribution():
    rng = np.random.default_rng(0)
    ks = de.kappa_solve(M.make_logistic(4), rng.uniform(0.01, 0.49, 2000), np.geomspace(1e-6, 2 - 1e-9, 1000))
    assert ks.n_no_bracket == 0
    assert np.nanmax(ks.residual) < 1e-10
    ref = sp.DensityCurve(*(lambda g: (g, logistic_q(g)))(np.geomspace(1e-8, 2, 4001))).normalized()
    assert sp.density_distance(sp.empirical_density(ks.s, 20, (0, 2)), ref).L1 < 0.1


def test_kappa_out_of_range():
    grid = np.geomspace(1e-4, 1.999, 400)
    with pytest.raises(NoBracket):
        de.kappa_solve(M.make_logistic(4), 0.9, grid)
    ks = de.kappa_solve(M.make_logistic(4), np.array([0.2, 0.9]), grid)
    assert ks.n_no_bracket == 1 and np.isnan(ks.s[1])
    with pytest.raises(ConfigError):
        de.kappa_solve(M.make_logistic(4), 1.5, grid)


def test_partly_linear_reduces_to_scalar_code():
    grid = np.geomspace(1e-4, 4, 500)
    pl = de.partly_linear_code([[0, 1, -0.5]], [[2.0]], [1.0], 0.3, grid)
    one = de.kappa_solve(M.make_hermite(1), 0.3, grid)
    assert np.allclose(pl.s, one.s, rtol=1e-9)


def test_partly_linear_real_zero_of_h():
    with pytest.raises(RealZeroOfH):
        de.partly_linear_code([[0, 1]], [[-1.0, 1.0]], [1.0], 0.3, np.geomspace(0.1, 1, 10))


def test_henon_map_hessian_degenerate():
    H = M.make_henon(1.4, 0.3, 0.5)
    pts = de.critical_points(H, [1.0, 0.5])
    assert pts and all(c.residual < 1e-10 for c in pts)
    tag, eig = de.hessian_classify(H, [1.0, 0.5], pts[0], part="map")
    assert tag == "degenerate"


def test_julia_points_come_in_conjugate_pairs():
    pts = de.critical_points(M.make_julia(0.3 + 0.2j), [1.0, 0.5])
    assert len(pts) == 4
    A = np.array([c.a for c in pts])
    for a in A:
        assert np.min(np.linalg.norm(A - np.conj(a), axis=1)) < 1e-8


sym = st.lists(st.floats(-5, 5), min_size=6, max_size=6)


@settings(max_examples=40, deadline=None)
@given(sym)
def test_quadratic_diagonalize(v):
    Q = np.array([[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]])
    D = de.quadratic_diagonalize(Q)
    assert D.orthogonality_error < 1e-12
    assert np.allclose(D.T @ np.diag(D.mu) @ D.T.T, Q, atol=1e-10)
    assert D.charpoly_error < 1e-10


def test_quadratic_form_matrix():
    H = M.make_henon(1.4, 0.3, 0.0)
    Mq = de.quadratic_form_matrix(H, [2.0, 1.0])
    assert np.allclose(Mq, [[-2.8, 0], [0, 0]])


def test_domination_offset_wins():
    grid = np.linspace(0.2, 2.0, 7)
    f = M.make_hermite(1)
    d = de.domination(lambda s: de.PRF(f, s), lambda s: de.PRF(f, s, offset=-1.0), grid)
    assert np.all(d.winner == 1) and np.allclose(d.diff, 1.0)
    same = de.domination(lambda s: de.PRF(f, s), lambda s: de.PRF(f, s), grid)
    assert np.all(same.winner == 0) and np.all(same.crossover)


def test_resonance_cases():
    r = de.resonance_check(-1)
    assert r.resonant and r.k == (2,) and r.roots == ((1.0,),)
    assert not de.resonance_check(2).resonant
    r1 = de.resonance_check(1)
    assert r1.k == (1,) and r1.roots == (None,)
    w = np.exp(2j * math.pi / 3)
    r3 = de.resonance_check([w, 0.5])
    assert r3.k == (3, 0)


def test_prf_validation():
    with pytest.raises(ConfigError):
        de.PRF(M.make_henon(), [1.0])
    with pytest.raises(ConfigError):
        de.critical_points(M.make_logistic(4), [1.0], method="magic")


def test_partly_linear_matches_henon_branches():
    from scipy import stats
    al, be, ga = 1.4, 0.3, 0.5
    u = np.array([1.0, 0.5])
    smax = 8 * al * u[0] / (u[0] * ga + u[1] * be) ** 2
    g, h = M.henon_partly_linear(al, be, ga)
    k = np.random.default_rng(3).uniform(0.001, 0.999, 6000)
    ks = de.partly_linear_code(g, h, u, k, np.geomspace(1e-6 * smax, smax * 1.001, 1500))
    assert np.nanmax(ks.residual) < 1e-10
    s = ks.extra["s"][ks.solved]
    t_code = (s[:, 0] * ga + s[:, 1] * be) / np.sqrt(8 * al * s[:, 0])
    # the coded t is the positive half of the semicircle, as are the sampler's |t|
    half = lambda v: 2 * sp.semicircle_cdf(v) - 1
    assert stats.kstest(t_code, half).statistic < 0.03
    hb = M.henon_branches(al, be, ga, n_samples=6000, seed=2)
    t_samp = np.abs(hb.latent[hb.branch == 0])
    assert stats.ks_2samp(t_code, t_samp).statistic < 0.04


def test_lorenz_domination_follows_shift_sign():
    grid = np.random.default_rng(1).uniform(0.2, 2, (6, 3))
    G = M.lorenz_asymptotic_map()
    for center, sign in (("alpha+", 1), ("alpha-", -1)):
        Gc = M.lorenz_asymptotic_map(center=center)
        d = de.domination(lambda s: de.PRF(G, s), lambda s: de.PRF(Gc, s), grid)
        for sv, w in zip(grid, d.winner):
            pts = de.critical_points(G, sv)
            c = de.dominant(pts) or max(pts, key=lambda q: q.gamma.real)
            shift = sign * M.lorenz_geometry(10, 28, 8 / 3, sv).shift(c.a).real
            assert w == -np.sign(shift)


def test_kappa_code_alias():
    assert de.KappaCode is de.KappaSample
