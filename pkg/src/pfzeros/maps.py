"""Catalog of concrete systems: logistic, Hermite families, Julia, Henon, Lorenz and friends."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rng
from .errors import ConfigError, DegenerateDirection, DomainError, NotFixedPoint
from .polymap import MapSpec, PolyMap, to_fraction
from .spectra import semicircle_ppf

FIXED_TOL = 1e-10
MAX_REJECTION_ROUNDS = 64


# map constructors ------------------------------------------------------------------
def make_logistic(lam=4, *, override: bool = False) -> MapSpec:
    """f(a) = λ(a − a²) on [0, 1]; compact self-map only for 1 ≤ λ ≤ 4."""
    lam = to_fraction(lam)
    if not (1 <= lam <= 4) and not override:
        raise DomainError(f"logistic needs 1 <= lambda <= 4, got {float(lam)}")
    return MapSpec(PolyMap.univariate([0, lam, -lam]), D=1.0, domain=((0.0, 1.0),),
                   name="logistic", params={"lambda": float(lam)})


def make_hermite_r(lam=1, r: int = 2) -> MapSpec:
    """f(a) = λa − a^r/r."""
    if int(r) != r or r < 2:
        raise ConfigError("r must be an integer >= 2")
    r = int(r)
    c = [Fraction(0)] * (r + 1)
    c[1] = to_fraction(lam)
    c[r] = Fraction(-1, r)
    return MapSpec(PolyMap.univariate(c), name="hermite_r" if r != 2 else "hermite",
                   params={"lambda": float(c[1]), "r": r})


def make_hermite(lam=1) -> MapSpec:
    return make_hermite_r(lam, 2)


def julia_fixed_points(alpha) -> tuple[complex, complex]:
    """Fixed points 1/2 ± α of z ↦ z² + 1/4 − α²."""
    alpha = complex(alpha)
    return 0.5 + alpha, 0.5 - alpha


def make_julia(alpha) -> MapSpec:
    """z ↦ z² + 1/4 − α² translated by its fixed point 1/2 + α: u ↦ u² + (1 + 2α)u.

    Stored as a real map of (Re u, Im u); the linear part [[p, −q], [q, p]]
    with p + iq = 1 + 2α carries the complex multiplier as an eigenvalue pair.
    """
    alpha = complex(alpha)
    c = 1 + 2 * alpha
    p, q = to_fraction(c.real), to_fraction(c.imag)
    re = {(2, 0): 1, (0, 2): -1, (1, 0): p, (0, 1): -q}
    im = {(1, 1): 2, (1, 0): q, (0, 1): p}
    return MapSpec(PolyMap([re, im], 2), name="julia",
                   params={"alpha": alpha if alpha.imag else alpha.real})


def make_henon(alpha=1.4, beta=0.3, gamma=0) -> MapSpec:
    """f(a, b) = (b + γa − αa², βa): linear in b with h(a) = (1, 0), g(a) = (γa − αa², βa)."""
    al, be, ga = map(to_fraction, (alpha, beta, gamma))
    comp1 = {(0, 1): 1, (1, 0): ga, (2, 0): -al}
    comp2 = {(1, 0): be}
    return MapSpec(PolyMap([comp1, comp2], 2), name="henon",
                   params={"alpha": float(al), "beta": float(be), "gamma": float(ga)})


def henon_partly_linear(alpha=1.4, beta=0.3, gamma=0.0):
    """(g, h) coefficient lists in a for f(a, b) = h(a)·b + g(a)."""
    return [[0.0, float(gamma), -float(alpha)], [0.0, float(beta)]], [[1.0], [0.0]]


def henon_classic_fixed_point(a=1.4, b=0.3) -> tuple[float, float]:
    """Fixed point of (x, y) ↦ (1 − a x² + y, b x) with positive x."""
    x = (-(1 - b) + math.sqrt((1 - b) ** 2 + 4 * a)) / (2 * a)
    return x, b * x


def henon_classic(a=1.4, b=0.3) -> MapSpec:
    """The classic map translated to its fixed point: γ = −2a·x* in the catalog form."""
    x, _ = henon_classic_fixed_point(a, b)
    spec = make_henon(a, b, -2 * a * x)
    return MapSpec(spec.poly, name="henon_classic", params={**spec.params, "fixed_point": [x, b * x]})


def henon_fixed_points(alpha=1.4, beta=0.3, gamma=0.0) -> list[tuple[float, float]]:
    """Fixed points (0, 0) and ((γ + β − 1)/α, β·that) of the catalog form."""
    x = (gamma + beta - 1) / alpha
    return [(0.0, 0.0), (x, beta * x)]


# vector fields and differential iterations -----------------------------------------------
@dataclass(frozen=True, eq=False)
class VectorField:
    poly: PolyMap
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.poly.d

    def __call__(self, x):
        return self.poly(x)


def logistic_ode(alpha=1) -> VectorField:
    al = to_fraction(alpha)
    return VectorField(PolyMap.univariate([0, al, -al]), "logistic_ode", {"alpha": float(al)})


def lorenz_field(sigma=10, rho=28, beta=Fraction(8, 3)) -> VectorField:
    """(σ(b − a), ρa − b − ac, −βc + ab)."""
    sg, rh, be = map(to_fraction, (sigma, rho, beta))
    F = PolyMap([
        {(0, 1, 0): sg, (1, 0, 0): -sg},
        {(1, 0, 0): rh, (0, 1, 0): -1, (1, 0, 1): -1},
        {(0, 0, 1): -be, (1, 1, 0): 1},
    ], 3)
    return VectorField(F, "lorenz", {"sigma": float(sg), "rho": float(rh), "beta": float(be)})


def harmonic_oscillator(omega=1) -> VectorField:
    """(ωb, −ωa); exact orbits are circles of period 2π/ω."""
    w = to_fraction(omega)
    return VectorField(PolyMap([{(0, 1): w}, {(1, 0): -w}], 2), "harmonic", {"omega": float(w)})


def linear_field(matrix) -> VectorField:
    M = np.asarray(matrix, dtype=object)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    d = M.shape[0]
    terms = [{tuple(1 if q == j else 0 for q in range(d)): M[i, j] for j in range(d)} for i in range(d)]
    return VectorField(PolyMap(terms, d), "linear")


@dataclass(frozen=True, eq=False)
class DifferentialIteration:
    """f(a, δ) = a + δ·F(a) with δ given directly or as τ|t|/n."""

    F: VectorField
    delta: np.ndarray
    tau: np.ndarray | None = None
    t_abs: float | None = None
    n: int | None = None

    @classmethod
    def from_time(cls, F: VectorField, tau, t_abs: float, n: int) -> "DifferentialIteration":
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0) or not math.isclose(tau.sum(), 1.0, rel_tol=1e-12):
            raise ConfigError("τ must be nonnegative and sum to 1")
        if n < 1 or t_abs <= 0:
            raise ConfigError("need n >= 1 and |t| > 0")
        return cls(F, tau * t_abs / n, tau, float(t_abs), int(n))

    def __post_init__(self):
        delta = np.broadcast_to(np.asarray(self.delta, dtype=float), (self.F.d,)).copy()
        if np.any(delta <= 0) or not np.all(np.isfinite(delta)):
            raise ConfigError("δ must be positive componentwise")
        object.__setattr__(self, "delta", delta)

    @property
    def mapspec(self) -> MapSpec:
        return MapSpec(self.F.poly.euler_step([Fraction(float(v)) for v in self.delta]),
                       name=f"{self.F.name}_euler", params={**self.F.params, "delta": self.delta.tolist()})

    def orbit(self, a0, steps: int) -> np.ndarray:
        x = np.asarray(a0, dtype=float).reshape(self.F.d)
        out = np.empty((steps + 1, self.F.d))
        out[0] = x
        for k in range(steps):
            x = x + self.delta * self.F(x)
            out[k + 1] = x
        return out


def differential_iteration(F, delta) -> MapSpec:
    if isinstance(F, PolyMap):
        F = VectorField(F)
    return DifferentialIteration(F, delta).mapspec


def ode_fixed_points(F) -> list[np.ndarray]:
    """Zeros of F: closed form for Lorenz, harmonic and linear fields; polynomial roots for d = 1."""
    if isinstance(F, PolyMap):
        F = VectorField(F)
    if F.name == "lorenz":
        be, rh = F.params["beta"], F.params["rho"]
        pts = [np.zeros(3)]
        if rh > 1:
            al = math.sqrt(be * (rh - 1))
            pts += [np.array([al, al, rh - 1]), np.array([-al, -al, rh - 1])]
    elif F.d == 1:
        c = [float(v) for v in F.poly.coeffs1d()]
        c = np.trim_zeros(np.array(c), "b")
        if len(c) == 0:
            raise ConfigError("F vanishes identically; every point is fixed")
        r = np.polynomial.polynomial.polyroots(c) if len(c) > 1 else np.array([])
        r = np.sort(r[np.abs(r.imag) <= 1e-12 * (1 + np.abs(r))].real)
        pts = [np.array([v]) for v in r]
    elif F.name in ("harmonic", "linear"):
        J = F.poly.jacobian(np.zeros(F.d)).real
        if abs(np.linalg.det(J)) > 0:
            pts = [np.zeros(F.d)]
        else:
            raise ConfigError("singular linear field has a subspace of zeros")
    else:
        raise ConfigError(f"no closed-form zeros for field {F.name!r} with d = {F.d}")
    for p in pts:
        if np.max(np.abs(F(p))) > FIXED_TOL * (1 + np.max(np.abs(p))):
            raise NotFixedPoint(f"residual {np.max(np.abs(F(p)))} at {p}")
    return pts


def _sorted_eigs(J):
    ev = np.linalg.eigvals(J)
    if np.all(np.abs(ev.imag) <= 1e-12 * (1 + np.abs(ev))):
        return np.sort(ev.real)
    return np.sort_complex(ev)


def linearize(obj, point, tol: float = FIXED_TOL) -> np.ndarray:
    """Jacobian eigenvalues at a fixed point.

    A VectorField (or bare PolyMap) is an ODE field, checked by F(p) = 0; a
    MapSpec is a map, checked by f(p) = p.
    """
    p = np.atleast_1d(np.asarray(point, dtype=float))
    if isinstance(obj, MapSpec):
        res = np.max(np.abs(obj.poly(p) - p))
        poly = obj.poly
    else:
        poly = obj.poly if isinstance(obj, VectorField) else obj
        res = np.max(np.abs(poly(p)))
    if res > tol * (1 + np.max(np.abs(p))):
        raise NotFixedPoint(f"residual {res} at {p.tolist()}")
    return _sorted_eigs(poly.jacobian(p).real)


def lorenz_characteristic(sigma, rho, beta, point: str = "theta", form: str = "corrected") -> np.ndarray:
    """Characteristic polynomial (descending powers of λ) at θ or α±.

    At α± the printed form λ(β+λ)(1+σ+λ) − α²(λ+2σ) differs from the Jacobian's
    characteristic polynomial by the sign of the α² term; `form` selects which.
    """
    P = np.polynomial.polynomial
    if point == "theta":
        c = P.polymul([beta, 1], P.polysub(P.polymul([sigma, 1], [1, 1]), [sigma * rho]))
    elif point == "alpha":
        a2 = beta * (rho - 1)
        base = P.polymul(P.polymul([0, 1], [beta, 1]), [1 + sigma, 1])
        tail = P.polymul([a2], [2 * sigma, 1])
        if form == "printed":
            c = P.polysub(base, tail)
        elif form == "corrected":
            c = P.polyadd(base, tail)
        else:
            raise ConfigError(f"unknown form {form!r}")
    else:
        raise ConfigError(f"unknown Lorenz point {point!r}")
    return np.asarray(c, dtype=float)[::-1]


def convergence_classify(lam, tau=None, mode: str = "map", tol: float = 1e-12) -> str:
    """to-fixed-point | candidate-distribution | null-direction.

    map: |Δ| = |Πλ| against 1. ode: sign of Σ Re λ_ℓ τ_ℓ (τ = 1 when absent);
    the null test is relative, so positive rescaling of τ never changes the answer.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if mode == "map":
        det = abs(np.prod(lam))
        if abs(det - 1) <= tol:
            return "null-direction"
        return "to-fixed-point" if det < 1 else "candidate-distribution"
    if mode != "ode":
        raise ConfigError(f"unknown mode {mode!r}")
    tau = np.ones(len(lam)) if tau is None else np.broadcast_to(np.asarray(tau, dtype=float), lam.shape)
    terms = lam.real * tau
    v = terms.sum()
    if abs(v) <= tol * max(np.abs(terms).sum(), np.finfo(float).tiny):
        return "null-direction"
    return "to-fixed-point" if v < 0 else "candidate-distribution"


# Lorenz dual geometry --------------------------------------------------------------------
def _clog(z):
    return np.log(np.asarray(z, dtype=complex))


@dataclass(frozen=True, eq=False)
class LorenzGeometry:
    sigma: float
    rho: float
    beta: float
    r: float
    s: float
    t: float
    alpha: float
    theta: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    mu: float
    varpi: float
    varpi_plus: float
    varpi_minus: float
    dominant: bool

    def G(self, a) -> np.ndarray:
        """Asymptotic iteration (a, b + ρa − ac, c + ab), vectorized over (..., 3)."""
        a = np.asarray(a)
        x, y, z = a[..., 0], a[..., 1], a[..., 2]
        return np.stack([x, y + self.rho * x - x * z, z + x * y], axis=-1)

    def prf_u(self, u) -> np.ndarray:
        """s·G(Tu) − log u − log v − log w (orthogonal T keeps the volume uvw = abc)."""
        u = np.asarray(u, dtype=complex)
        a = u @ self.T.T
        sv = np.array([self.r, self.s, self.t])
        return self.G(a) @ sv - _clog(u).sum(axis=-1)

    def split(self, u) -> np.ndarray:
        """The three 1-d factors γ_u + γ_v + γ_w, derived from T as constructed here."""
        u = np.asarray(u, dtype=complex)
        x, y, z = u[..., 0], u[..., 1], u[..., 2]
        k = self.varpi / math.sqrt(2)
        g1 = self.mu * x - _clog(x)
        g2 = k * y - 0.5 * self.mu * y ** 2 - _clog(y)
        g3 = k * z + 0.5 * self.mu * z ** 2 - _clog(z)
        return g1 + g2 + g3

    def split_printed(self, u) -> np.ndarray:
        """The factors exactly as printed: ϖu/√2 − μu² − log u, μv − log v, ϖw/√2 + μw² − log w."""
        u = np.asarray(u, dtype=complex)
        x, y, z = u[..., 0], u[..., 1], u[..., 2]
        k = self.varpi / math.sqrt(2)
        return (k * x - self.mu * x ** 2 - _clog(x)) + (self.mu * y - _clog(y)) + (k * z + self.mu * z ** 2 - _clog(z))

    def shift(self, a) -> np.ndarray:
        """−α(s(ρ − c) + tb): s·G₊ − s·G at a (the α₋ shift is its negative)."""
        a = np.asarray(a)
        return -self.alpha * (self.s * (self.rho - a[..., 2]) + self.t * a[..., 1])

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma, "rho": self.rho, "beta": self.beta,
            "s": [self.r, self.s, self.t], "alpha": self.alpha,
            "theta": self.theta, "alpha_plus": self.alpha_plus, "alpha_minus": self.alpha_minus,
            "Q": self.Q, "T": self.T, "mu": self.mu,
            "varpi": self.varpi, "varpi_plus": self.varpi_plus, "varpi_minus": self.varpi_minus,
            "dominant": self.dominant,
        }


def lorenz_geometry(sigma=10.0, rho=28.0, beta=8 / 3, s=(1.0, 1.0, 1.0)) -> LorenzGeometry:
    r, s2, t = map(float, s)
    if rho <= 1:
        raise DomainError("α± need ρ > 1")
    mu = math.hypot(s2, t)
    if mu == 0:
        raise DegenerateDirection("(s, t) = (0, 0) leaves T undefined")
    al = math.sqrt(beta * (rho - 1))
    Q = np.array([[0.0, t, -s2], [t, 0.0, 0.0], [-s2, 0.0, 0.0]])
    # columns: kernel of Q, the −μ eigenvector, the +μ eigenvector
    T = np.column_stack([
        np.array([0.0, s2, t]) / mu,
        np.array([mu, -t, s2]) / (math.sqrt(2) * mu),
        np.array([mu, t, -s2]) / (math.sqrt(2) * mu),
    ])
    varpi = r + s2 * rho
    vp = varpi + s2 * al ** 2 / beta + t * al
    vm = varpi + s2 * al ** 2 / beta - t * al
    return LorenzGeometry(
        float(sigma), float(rho), float(beta), r, s2, t, al,
        np.zeros(3), np.array([al, al, rho - 1]), np.array([-al, -al, rho - 1]),
        Q, T, mu, varpi, vp, vm, abs(varpi) > abs(r),
    )


def lorenz_asymptotic_map(rho=28.0, beta=8 / 3, center: str = "theta") -> PolyMap:
    """G(a) = (a, b + ρa − ac, c + ab) with the α± shift folded into its components.

    For center α± the pairing with s picks up −α(s(ρ − c) + tb), α = ±√(β(ρ − 1)),
    which is the LorenzGeometry.shift term; the result is a PolyMap for PRF use.
    """
    R = to_fraction(rho)
    terms = [{(1, 0, 0): 1}, {(0, 1, 0): 1, (1, 0, 0): R, (1, 0, 1): -1}, {(0, 0, 1): 1, (1, 1, 0): 1}]
    if center != "theta":
        if center not in ("alpha+", "alpha-"):
            raise ConfigError(f"unknown Lorenz center {center!r}")
        if rho <= 1:
            raise DomainError("α± need ρ > 1")
        A = to_fraction(math.sqrt(beta * (rho - 1))) * (1 if center == "alpha+" else -1)
        terms[1].update({(0, 0, 0): -A * R, (0, 0, 1): A})
        terms[2][(0, 1, 0)] = -A
    return PolyMap(terms, 3)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Labeled samples; `columns` names the coordinate axes of `points`."""

    points: np.ndarray
    columns: tuple
    labels: np.ndarray
    branch: np.ndarray
    on_route: np.ndarray
    latent: np.ndarray
    residual: np.ndarray
    rejection_rate: float
    fallback_count: int
    extra: dict = field(default_factory=dict)

    def csv_rows(self):
        header = list(self.columns) + ["center_label", "branch_index", "on_route"]
        rows = [tuple(map(float, p)) + (str(l), int(b), bool(o))
                for p, l, b, o in zip(self.points, self.labels, self.branch, self.on_route)]
        return header, rows


def lorenz_ovals(sigma=10.0, rho=28.0, beta=8 / 3, n_samples: int = 1000, seed: int = 0, *,
                 scale: float = 1.0, route_tol: float = 0.05) -> PointCloud:
    """Random ovals in the normalized dual frame μ = √(s² + t²) = 1.

    χ ~ semicircle on (−1, 1), (s, t) = (cos ψ, sin ψ). The plane c = r + sρ
    meets the cylinder (c/2χ)⁴ = s² + t² at c = 2χ, so r = 2χ − ρ cos ψ. Draws
    violating |ϖ| > |r| resample ψ given χ (the χ law is untouched); after
    MAX_REJECTION_ROUNDS the exact conditional arc is sampled instead.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    geo = lorenz_geometry(sigma, rho, beta, (1.0, 1.0, 0.0))
    idx = np.arange(n_samples, dtype=np.uint64)
    chi = semicircle_ppf(rng.uniform(seed, idx, 0))
    psi = np.empty(n_samples)
    pending = np.ones(n_samples, bool)
    draws = 0
    for rnd in range(MAX_REJECTION_ROUNDS):
        cand = 2 * math.pi * rng.uniform(seed, idx[pending], 1 + rnd)
        draws += cand.size
        r = 2 * chi[pending] - rho * np.cos(cand)
        ok = np.abs(2 * chi[pending]) > np.abs(r)
        where = np.nonzero(pending)[0]
        psi[where[ok]] = cand[ok]
        pending[where[ok]] = False
        if not pending.any():
            break
    fallback = int(pending.sum())
    if fallback:
        # allowed set: cos ψ strictly between 0 and 4χ/ρ
        where = np.nonzero(pending)[0]
        lim = np.clip(4 * chi[where] / rho, -1, 1)
        lo, hi = np.minimum(lim, 0), np.maximum(lim, 0)
        u = rng.uniform(seed, idx[where], 1 + MAX_REJECTION_ROUNDS)
        v = rng.uniform(seed, idx[where], 2 + MAX_REJECTION_ROUNDS)
        ang = np.arccos(hi) + u * (np.arccos(lo) - np.arccos(hi))
        psi[where] = np.where(v < 0.5, ang, -ang)
    s_ = np.cos(psi)
    t_ = np.sin(psi)
    c = 2 * chi
    r = c - rho * s_
    al = geo.alpha
    vp = c + s_ * al ** 2 / beta + t_ * al
    vm = c + s_ * al ** 2 / beta - t_ * al
    plus = np.abs(vp) >= np.abs(vm)
    labels = np.where(plus, "alpha+", "alpha-")
    center = np.where(plus[:, None], geo.alpha_plus, geo.alpha_minus)
    state = center + scale * np.column_stack([s_, t_, chi])
    b_off = state[:, 1] - center[:, 1]
    c_off = state[:, 2] - center[:, 2]
    route = np.abs(s_ * (rho - c_off) + t_ * b_off)
    on_route = route <= route_tol * rho
    plane = np.abs(c - (r + s_ * rho))
    with np.errstate(divide="ignore", invalid="ignore"):
        cyl = np.abs((c / (2 * chi)) ** 4 - (s_ ** 2 + t_ ** 2))
    residual = np.maximum(plane, np.nan_to_num(cyl))
    dual = np.column_stack([r, s_, t_])
    pts = np.column_stack([dual, state])
    rate = (draws - (n_samples - fallback)) / draws if draws else 0.0
    return PointCloud(pts, ("r", "s", "t", "x", "y", "z"), labels, np.zeros(n_samples, int), on_route,
                      chi, residual, float(rate), fallback, {"centers": {"alpha+": geo.alpha_plus, "alpha-": geo.alpha_minus}})


# Henon random parabolas -------------------------------------------------------------------------
def henon_step(alpha, beta, gamma, p: np.ndarray) -> np.ndarray:
    a, b = p[..., 0], p[..., 1]
    return np.stack([b + gamma * a - alpha * a * a, beta * a], axis=-1)


def henon_inverse(alpha, beta, gamma, p: np.ndarray) -> np.ndarray:
    a2, b2 = p[..., 0], p[..., 1]
    a = b2 / beta
    return np.stack([a, a2 - gamma * a + alpha * a * a], axis=-1)


def henon_branch_residual(alpha, beta, gamma, p, t, scale: float = 2.0) -> np.ndarray:
    """|(xγ + yβ)/√(2αx) − t·scale| for branch-0 dual points (x, y)."""
    x, y = p[..., 0], p[..., 1]
    return np.abs((x * gamma + y * beta) / np.sqrt(2 * alpha * x) - t * scale)


def henon_branches(alpha=1.4, beta=0.3, gamma=0.0, n_samples: int = 1000, seed: int = 0, *,
                   depth: int = 4, scale: float = 2.0, x_max: float | None = None) -> PointCloud:
    """Samples of the random parabolas (xγ + yβ)/√(2αx) = t·scale, t ~ semicircle.

    x is uniform on (0, x_max]; y follows from the branch equation, and points
    violating |t·scale| > |y| resample x given t. Branch k ≤ depth is the k-th
    image of branch 0 under the map, keeping the first ⌊n/(k+1)⌋ samples.
    """
    if alpha <= 0 or beta == 0:
        raise DomainError("henon_branches needs α > 0 and β ≠ 0")
    if n_samples < 1 or depth < 0:
        raise ConfigError("need n_samples >= 1 and depth >= 0")
    if x_max is None:
        x_max = beta ** 2 / alpha
    k2a = math.sqrt(2 * alpha)
    idx = np.arange(n_samples, dtype=np.uint64)
    t = semicircle_ppf(rng.uniform(seed, idx, 0))
    ts = t * scale
    x = np.empty(n_samples)
    pending = np.ones(n_samples, bool)
    draws = 0
    for rnd in range(MAX_REJECTION_ROUNDS):
        where = np.nonzero(pending)[0]
        cand = x_max * rng.uniform(seed, idx[where], 1 + rnd)
        draws += cand.size
        y = (ts[where] * k2a * np.sqrt(cand) - gamma * cand) / beta
        ok = np.abs(ts[where]) > np.abs(y)
        x[where[ok]] = cand[ok]
        pending[where[ok]] = False
        if not pending.any():
            break
    fallback = int(pending.sum())
    if fallback:
        # first valid interval (0, ρ1²) in ρ = √x, from |tsk ρ − γρ²| = β|ts|
        where = np.nonzero(pending)[0]
        lim = np.full(where.size, math.sqrt(x_max))
        for sign in (1.0, -1.0):
            for j, i in enumerate(where):
                roots = np.roots([-gamma, ts[i] * k2a, -sign * beta * ts[i]])
                roots = roots[(np.abs(roots.imag) < 1e-14) & (roots.real > 0)].real
                if roots.size:
                    lim[j] = min(lim[j], roots.min())
        u = rng.uniform(seed, idx[where], 1 + MAX_REJECTION_ROUNDS)
        x[where] = np.minimum(x_max, lim ** 2) * u * (1 - 1e-12)
    y = (ts * k2a * np.sqrt(x) - gamma * x) / beta
    base = np.column_stack([x, y])
    pts, branch, res, latent = [base], [np.zeros(n_samples, int)], [henon_branch_residual(alpha, beta, gamma, base, t, scale)], [t]
    cur = base
    inverse_res = []
    for k in range(1, depth + 1):
        m = n_samples // (k + 1)
        if m == 0:
            break
        cur = henon_step(alpha, beta, gamma, cur[:m])
        # definitional check: the point is the k-th image of its branch-0 parent,
        # recomputed in extended precision; the parent solves the branch equation
        ref = base[:m].astype(np.longdouble)
        for _ in range(k):
            ref = henon_step(alpha, beta, gamma, ref)
        fwd = np.max(np.abs(ref - cur), axis=1) / (1 + np.max(np.abs(cur), axis=1))
        res.append(np.maximum(fwd.astype(float), res[0][:m]))
        back = cur
        for _ in range(k):
            back = henon_inverse(alpha, beta, gamma, back)
        inverse_res.append(float(henon_branch_residual(alpha, beta, gamma, back, t[:m], scale).max()))
        pts.append(cur)
        branch.append(np.full(m, k))
        latent.append(t[:m])
    P = np.vstack(pts)
    rate = (draws - (n_samples - fallback)) / draws if draws else 0.0
    B = np.concatenate(branch)
    return PointCloud(P, ("x", "y"), np.array(["theta"] * len(P)), B, np.zeros(len(P), bool),
                      np.concatenate(latent), np.concatenate(res), float(rate), fallback,
                      {"x_max": x_max, "scale": scale, "depth": depth, "inverse_residual": inverse_res})
