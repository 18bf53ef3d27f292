"""Real zeros, zero normalization, empirical densities, p = −s·q′ and density distances."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy.stats import beta as _beta_dist
from scipy.optimize import brentq

from .bell import RealPoly
from .errors import (ConfigError, DegreeZeroError, EdgeHypothesisWarning, EmptySampleError,
                     IllConditionedWarning, NonDecreasingWarning)

COMPANION_MAX_DEGREE = 150
REALITY_TOL = 1e-8
MERGE_TOL = 1e-7
RESIDUAL_TOL = 1e-8
UNRESOLVED_MAX = 0.02
_DPS = 40


@dataclass(frozen=True, eq=False)
class ZeroSet:
    zeros: np.ndarray
    multiplicity: np.ndarray
    residuals: np.ndarray
    reality_tol: float = REALITY_TOL
    degree: int = 0
    n_complex: int = 0
    method: str = "companion"

    def __len__(self):
        return len(self.zeros)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0

    def csv_rows(self):
        return ["index", "zero", "residual"], [(i, float(z), float(r)) for i, (z, r) in enumerate(zip(self.zeros, self.residuals))]


def _empty_zeroset(degree, method, n_complex=0):
    e = np.zeros(0)
    return ZeroSet(e, np.zeros(0, dtype=int), e, REALITY_TOL, degree, n_complex, method)


def _relative_residual(mp_c, z, dps=_DPS) -> float:
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        num = abs(mpmath.polyval(mp_c[::-1], z))
        den = mpmath.polyval([abs(c) for c in mp_c[::-1]], abs(z))
        return float(num / den) if den != 0 else 0.0


def _scaled(mp_r, log2_r, dps=_DPS):
    """Balance y = σ x so that the end coefficients match; returns (float coeffs, mp coeffs, log2 σ)."""
    D = len(mp_r) - 1
    ls = int(round((log2_r[0] - log2_r[-1]) / D)) if D > 0 else 0
    with mpmath.workdps(dps):
        b = [mpmath.ldexp(c, k * ls) for k, c in enumerate(mp_r)]
        top = max(abs(c) for c in b)
        b = [c / top for c in b]
    return np.array([float(c) for c in b]), b, ls


def _newton_polish(b_mp, x0, real: bool, iters: int = 60, dps: int = _DPS):
    with mpmath.workdps(dps):
        x = mpmath.mpf(x0.real) if real else mpmath.mpc(x0)
        rev = b_mp[::-1]
        for _ in range(iters):
            v, dv = mpmath.polyval(rev, x, derivative=True)
            if dv == 0:
                break
            step = v / dv
            x -= step
            if abs(step) <= mpmath.mpf(10) ** (-_DPS + 8) * (1 + abs(x)):
                break
        return x


def _aberth(b_mp, z0, dps: int, max_sweeps: int = 200) -> list:
    """Simultaneous refinement of all roots (Aberth–Ehrlich), Gauss–Seidel sweeps.

    A root is frozen once its correction drops below the working precision;
    the sweep loop stops when every root is frozen or corrections stagnate.
    """
    with mpmath.workdps(dps):
        rev = b_mp[::-1]
        n = len(z0)
        z = [mpmath.mpc(c) for c in z0]
        for i in range(n):
            for j in range(i):
                if abs(z[i] - z[j]) <= 1e-12 * (1 + abs(z[i])):
                    z[i] += mpmath.mpc(0, 1e-6 * (1 + abs(z[i])) * (i + 1) / n)
        tol = mpmath.mpf(10) ** (-(dps - 12))
        active = [True] * n
        best = None
        stall = 0
        for _ in range(max_sweeps):
            worst = mpmath.mpf(0)
            for i in range(n):
                if not active[i]:
                    continue
                v, dv = mpmath.polyval(rev, z[i], derivative=True)
                if v == 0:
                    active[i] = False
                    continue
                zi = z[i]
                s = mpmath.fsum(1 / (zi - z[j]) for j in range(n) if j != i)
                ratio = v / dv if dv != 0 else mpmath.mpf(1)
                w = ratio / (1 - ratio * s)
                z[i] = zi - w
                rel = abs(w) / (1 + abs(z[i]))
                if rel <= tol:
                    active[i] = False
                worst = max(worst, rel)
            if not any(active):
                break
            if best is None or worst < best * 0.5:
                best, stall = worst, 0
            else:
                stall += 1
                if stall >= 4 and worst < mpmath.mpf(10) ** (-(dps // 2)):
                    break
        return z


def _root_bound(b: np.ndarray) -> float:
    D = len(b) - 1
    nz = np.nonzero(b[:-1])[0]
    return 2.0 * max((abs(b[k] / b[-1]) ** (1.0 / (D - k)) for k in nz), default=1.0)


def _unresolved_fraction(b_mp, B: float, dps: int, probes: int = 256) -> float:
    """Share of probe points ±B·10^(−9..0) where a relative coefficient error of one
    double ulp could flip the sign of p (cancellation Σ|c_k x^k| / |p(x)| > 1/ε)."""
    eps = np.finfo(float).eps
    rev = b_mp[::-1]
    absrev = [abs(c) for c in rev]
    bad = 0
    with mpmath.workdps(dps):
        g = np.geomspace(B * 1e-9, B, probes // 2)
        for x in np.concatenate([-g, g]):
            v = abs(mpmath.polyval(rev, mpmath.mpf(float(x))))
            if v == 0 or mpmath.polyval(absrev, abs(mpmath.mpf(float(x)))) * eps > v:
                bad += 1
    return bad / probes


def _bisection_roots(b: np.ndarray, b_mp, dps: int) -> list[float]:
    """Sign changes of the scaled polynomial on a mixed linear/geometric grid, then bisection."""
    D = len(b) - 1
    B = _root_bound(b)
    lin = np.linspace(-B, B, 16 * D + 1)
    lg = np.geomspace(B * 1e-9, B, 16 * D)
    grid = np.unique(np.concatenate([lin, lg, -lg]))
    with mpmath.workdps(dps):
        rev = b_mp[::-1]
        sgn = np.array([int(mpmath.sign(mpmath.polyval(rev, mpmath.mpf(float(x))))) for x in grid])
        roots = [float(grid[i]) for i in np.nonzero(sgn == 0)[0]]
        for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            lo, hi = mpmath.mpf(float(grid[i])), mpmath.mpf(float(grid[i + 1]))
            slo = sgn[i]
            for _ in range(60):
                mid = (lo + hi) / 2
                sm = mpmath.sign(mpmath.polyval(rev, mid))
                if sm == 0:
                    lo = hi = mid
                    break
                if sm == slo:
                    lo = mid
                else:
                    hi = mid
            roots.append(float((lo + hi) / 2))
    return roots


def _merge(z: np.ndarray, mult: np.ndarray, tol: float):
    if len(z) < 2:
        return z, mult
    span = z[-1] - z[0]
    thr = tol * (span if span > 0 else 1.0)
    zs, ms = [z[0]], [mult[0]]
    for v, m in zip(z[1:], mult[1:]):
        if v - zs[-1] <= thr:
            zs[-1] = (zs[-1] * ms[-1] + v * m) / (ms[-1] + m)
            ms[-1] += m
        else:
            zs.append(v)
            ms.append(m)
    return np.array(zs), np.array(ms)


def real_zeros(p: RealPoly, method: str = "auto", *, reality_tol: float = REALITY_TOL,
               merge_tol: float = MERGE_TOL, interval: tuple | None = None) -> ZeroSet:
    """Real zeros of p, each polished in extended precision and re-evaluated."""
    if p.is_zero:
        raise ConfigError("real_zeros: polynomial is identically zero")
    if p.degree == 0:
        raise DegreeZeroError("real_zeros: constant polynomial")
    lg = p.log2_abs()
    m0 = int(np.argmax(np.isfinite(lg)))
    fin = lg[np.isfinite(lg)]
    dps = _DPS + int(float(np.ptp(fin)) * 0.30103) // 2
    mp_c = p.mp_coeffs(dps)
    mp_r, lg_r = mp_c[m0:], lg[m0:]
    D = len(mp_r) - 1
    if method == "auto":
        method = "companion" if p.degree <= COMPANION_MAX_DEGREE else "bisection"
    found: list[float] = []
    n_real = 0
    if D > 0:
        b, b_mp, ls = _scaled(mp_r, lg_r, dps)
        sigma = 2.0 ** ls
        if method == "companion":
            ev = np.roots(b[::-1])
            for x in _aberth(b_mp, [complex(v) for v in ev], dps):
                y = complex(x) * sigma
                if abs(y.imag) <= reality_tol * (1 + abs(y)):
                    xr = _newton_polish(b_mp, complex(float(mpmath.re(x)), 0.0), real=True, dps=dps)
                    found.append(float(xr) * sigma)
        elif method == "bisection":
            for x0 in _bisection_roots(b, b_mp, dps):
                xr = _newton_polish(b_mp, complex(x0, 0.0), real=True, dps=dps)
                found.append(float(xr) * sigma)
        else:
            raise ConfigError(f"unknown real_zeros method {method!r}")
        n_real = len(found)
        if p.mode == "float":
            frac = _unresolved_fraction(b_mp, _root_bound(b), dps)
            if frac > UNRESOLVED_MAX:
                warnings.warn(f"real_zeros: float-mode coefficients cannot fix the sign of p on {frac:.0%} "
                              f"of the root region; zeros may be lost, use exact mode", IllConditionedWarning)
    z = np.array(sorted(found), dtype=float)
    mult = np.ones(len(z), dtype=int)
    if m0 > 0:
        z = np.concatenate([z, [0.0]])
        mult = np.concatenate([mult, [m0]])
        order = np.argsort(z, kind="stable")
        z, mult = z[order], mult[order]
    z, mult = _merge(z, mult, merge_tol)
    if interval is not None:
        keep = (z >= interval[0]) & (z <= interval[1])
        z, mult = z[keep], mult[keep]
    res = np.array([_relative_residual(mp_c, v, dps) for v in z])
    if len(res) and res.max() > RESIDUAL_TOL:
        warnings.warn(f"real_zeros: max relative residual {res.max():.3g} exceeds {RESIDUAL_TOL}", IllConditionedWarning)
    return ZeroSet(z, mult, res, reality_tol, p.degree, D - n_real, method)


def common_zeros(p1, p2, tol: float) -> ZeroSet:
    """Zeros of p1 lying within tol of some zero of p2."""
    z1 = p1 if isinstance(p1, ZeroSet) else real_zeros(p1)
    z2 = p2 if isinstance(p2, ZeroSet) else real_zeros(p2)
    if len(z1) == 0 or len(z2) == 0:
        return _empty_zeroset(z1.degree, z1.method)
    d = np.min(np.abs(z1.zeros[:, None] - z2.zeros[None, :]), axis=1)
    keep = d <= tol
    return ZeroSet(z1.zeros[keep], z1.multiplicity[keep], z1.residuals[keep], z1.reality_tol,
                   z1.degree, z1.n_complex, z1.method)


SCHEMES = {"n": lambda n: n, "2n+1": lambda n: 2 * n + 1}


@dataclass(frozen=True, eq=False)
class ZeroSamples:
    values: np.ndarray
    scheme: str
    scale: float
    n: int

    def __len__(self):
        return len(self.values)


def normalize_zeros(z, n: int, scheme: str = "n", exclude_origin: bool = True) -> ZeroSamples:
    """Divide zeros by the scheme's scale (n or 2n+1); the trivial zero at the origin is dropped."""
    if n < 1:
        raise ConfigError("normalize_zeros needs n >= 1")
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
    vals = np.asarray(z.zeros if isinstance(z, ZeroSet) else z, dtype=float)
    if exclude_origin:
        vals = vals[vals != 0.0]
    scale = float(SCHEMES[scheme](n))
    return ZeroSamples(vals / scale, scheme, scale, n)


# densities ------------------------------------------------------------------
def semicircle_pdf(x, lo=-1.0, hi=1.0):
    c, r = (lo + hi) / 2, (hi - lo) / 2
    u = (np.asarray(x, dtype=float) - c) / r
    return np.where(np.abs(u) < 1, 2 / np.pi * np.sqrt(np.clip(1 - u * u, 0, None)), 0.0) / r


def semicircle_cdf(x, lo=-1.0, hi=1.0):
    c, r = (lo + hi) / 2, (hi - lo) / 2
    u = np.clip((np.asarray(x, dtype=float) - c) / r, -1, 1)
    return 0.5 + (u * np.sqrt(1 - u * u) + np.arcsin(u)) / np.pi


def semicircle_ppf(p, lo=-1.0, hi=1.0):
    """Inverse CDF; the semicircle is the affine image of Beta(3/2, 3/2)."""
    u = _beta_dist.ppf(np.asarray(p, dtype=float), 1.5, 1.5)
    return lo + (hi - lo) * u


def arcsine_pdf(x, lo=0.0, hi=1.0):
    u = (np.asarray(x, dtype=float) - lo) / (hi - lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 1 / (np.pi * np.sqrt(u * (1 - u)))
    return np.where((u > 0) & (u < 1), v, 0.0) / (hi - lo)


def arcsine_cdf(x, lo=0.0, hi=1.0):
    u = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0, 1)
    return 2 / np.pi * np.arcsin(np.sqrt(u))


_CLOSED = {"semicircle": (semicircle_pdf, semicircle_cdf), "arcsine": (arcsine_pdf, arcsine_cdf)}


@dataclass(frozen=True, eq=False)
class EmpiricalDensity:
    edges: np.ndarray
    masses: np.ndarray
    count: int
    normalized: bool = True

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def density(self):
        w = self.widths
        return np.divide(self.masses, w, out=np.zeros_like(self.masses), where=w > 0)

    @property
    def support(self):
        return float(self.edges[0]), float(self.edges[-1])

    def cdf(self, x):
        F = np.concatenate([[0.0], np.cumsum(self.masses)])
        return np.interp(x, self.edges, F, left=0.0, right=F[-1])

    def mass_on(self, edges):
        return np.diff(self.cdf(np.asarray(edges, dtype=float)))

    def affine(self, a: float, b: float) -> "EmpiricalDensity":
        """Pushforward under x -> a·x + b (a > 0)."""
        return EmpiricalDensity(a * self.edges + b, self.masses, self.count, self.normalized)

    def to_curve(self) -> "DensityCurve":
        return DensityCurve(self.centers, self.density, "custom", self.support)

    def csv_rows(self):
        return ["left", "right", "mass"], [(float(l), float(r), float(m)) for l, r, m in zip(self.edges[:-1], self.edges[1:], self.masses)]


def cell_edges(values, lower: float | None = None, upper: float | None = None) -> np.ndarray:
    """One cell per sample: breakpoints at midpoints, outer cells mirrored, clipped to [lower, upper]."""
    s = np.sort(np.asarray(values, dtype=float))
    if len(s) < 2:
        raise EmptySampleError("cell edges need at least two samples")
    mid = 0.5 * (s[1:] + s[:-1])
    lo = s[0] - (mid[0] - s[0])
    hi = s[-1] + (s[-1] - mid[-1])
    if lower is not None:
        lo = max(lo, lower)
    if upper is not None:
        hi = min(hi, upper)
    return np.concatenate([[lo], mid, [hi]])


def empirical_density(samples, bins=10, range: tuple | None = None) -> EmpiricalDensity:
    """Normalized histogram. `bins` may be an int, an edge array, or 'cells' (one cell per sample)."""
    x = np.asarray(samples.values if isinstance(samples, ZeroSamples) else samples, dtype=float)
    if x.size == 0:
        raise EmptySampleError("empirical_density: no samples")
    if isinstance(bins, str):
        if bins != "cells":
            raise ConfigError(f"unknown bins spec {bins!r}")
        lo, hi = range if range is not None else (None, None)
        edges = cell_edges(x, lo, hi)
        counts = np.ones(len(x))
    else:
        if np.ndim(bins) == 0 and int(bins) < 1:
            raise ConfigError("bins must be >= 1")
        counts, edges = np.histogram(x, bins=bins, range=range)
    masses = counts / counts.sum() if counts.sum() > 0 else counts.astype(float)
    return EmpiricalDensity(np.asarray(edges, dtype=float), masses.astype(float), int(x.size), True)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    kind: str = "custom"
    support: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ConfigError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(g) <= 0):
            raise ConfigError("grid must be strictly ascending")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if self.support is None:
            object.__setattr__(self, "support", (float(g[0]), float(g[-1])))

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def normalized(self) -> "DensityCurve":
        if self.kind != "custom":
            return self
        I = self.integral()
        if I <= 0:
            raise EmptySampleError("density has no mass")
        return DensityCurve(self.grid, self.values / I, self.kind, self.support, {**self.meta, "normalization": 1 / I})

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind in _CLOSED:
            return _CLOSED[self.kind][0](x, *self.support)
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind in _CLOSED:
            return _CLOSED[self.kind][1](x, *self.support)
        c = np.concatenate([[0.0], np.cumsum(np.diff(self.grid) * 0.5 * (self.values[1:] + self.values[:-1]))])
        tot = c[-1] if c[-1] > 0 else 1.0
        return np.interp(x, self.grid, c / tot, left=0.0, right=1.0)

    def mass_on(self, edges):
        return np.diff(self.cdf(np.asarray(edges, dtype=float)))

    def affine(self, a: float, b: float) -> "DensityCurve":
        lo, hi = self.support
        return DensityCurve(a * self.grid + b, self.values / a, self.kind, (a * lo + b, a * hi + b), dict(self.meta))

    def csv_rows(self):
        return ["grid", "value"], [(float(g), float(v)) for g, v in zip(self.grid, self.values)]


def closed_form_curve(kind: str, support=(0.0, 1.0), n: int = 4001) -> DensityCurve:
    """Closed-form law on a grid clustered at the support ends (ends themselves excluded)."""
    if kind not in _CLOSED:
        raise ConfigError(f"unknown closed form {kind!r}")
    lo, hi = support
    th = np.linspace(0, np.pi / 2, n + 2)[1:-1]
    g = lo + (hi - lo) * np.sin(th) ** 2
    return DensityCurve(g, _CLOSED[kind][0](g, lo, hi), kind, (lo, hi))


# density transform ------------------------------------------------------------
def invariant_from_q(q, d: int = 1, *, edge_tol: float = 0.1) -> DensityCurve:
    """p(s) = −s·q′(s) by central differences, clipped at 0 and renormalized (constant in meta)."""
    if d != 1:
        raise ConfigError("use invariant_from_q_2d for d = 2")
    if isinstance(q, EmpiricalDensity):
        q = q.to_curve()
    g, v = q.grid, q.values
    if len(g) < 3:
        raise ConfigError("invariant_from_q needs at least 3 grid points")
    qmax = float(np.max(np.abs(v))) or 1.0
    if abs(v[-1]) > edge_tol * qmax:
        warnings.warn(f"q does not vanish at the upper edge (q = {v[-1]:.3g}, max {qmax:.3g})", EdgeHypothesisWarning)
    dq = np.gradient(v, g)
    w = np.gradient(g)
    qmass = np.abs(v) * w
    if qmass.sum() > 0 and qmass[dq > 0].sum() > 0.1 * qmass.sum():
        warnings.warn("q′ > 0 over more than 10% of the q-mass; p is substantially negative",
                      NonDecreasingWarning)
    raw = -g * dq
    p = np.clip(raw, 0.0, None)
    I = float(np.trapezoid(p, g))
    meta = {"raw_integral": I, "negative_mass": float(np.trapezoid(np.clip(-raw, 0, None), g))}
    if I > 0:
        p = p / I
        meta["normalization"] = 1.0 / I
    else:
        meta["normalization"] = None
    return DensityCurve(g, p, "custom", q.support, meta)


@dataclass(frozen=True, eq=False)
class DensitySurface:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


def invariant_from_q_2d(x, y, q) -> DensitySurface:
    """p(a, b) = (−a)(−b)·∂²q/∂a∂b on a tensor grid, clipped and renormalized."""
    x, y, q = np.asarray(x, float), np.asarray(y, float), np.asarray(q, float)
    if q.shape != (len(x), len(y)):
        raise ConfigError("q must have shape (len(x), len(y))")
    mixed = np.gradient(np.gradient(q, x, axis=0), y, axis=1)
    raw = x[:, None] * y[None, :] * mixed
    p = np.clip(raw, 0, None)
    I = float(np.trapezoid(np.trapezoid(p, y, axis=1), x))
    meta = {"raw_integral": I, "normalization": (1.0 / I) if I > 0 else None}
    return DensitySurface(x, y, p / I if I > 0 else p, meta)


def edge_density_estimate(samples, *, lower: float | None = 0.0, k_fit: int = 3, edge_points: int = 40) -> DensityCurve:
    """Local density of sorted samples from neighbour spacings, closed by fitted edge laws.

    Interior values use 2/(N·(s_{i+1} − s_{i−1})). At the upper end
    (1 − F)^{2/3} is fitted linearly in s over the last `k_fit` samples (a
    square-root vanishing edge at b), and q = c·√(b − s) replaces the spacing
    estimate there on a grid refined towards b. At a known lower support end
    F ≈ A·(s − lower)^γ is fitted over the first `k_fit` samples with γ free,
    giving q = Aγ·(s − lower)^{γ−1} below the first interior sample. Sorted
    deterministic samples carry little sampling noise, so the smallest
    over-determined fit (k_fit = 3) keeps the model bias lowest.
    """
    s = np.sort(np.asarray(samples.values if isinstance(samples, ZeroSamples) else samples, dtype=float))
    N = len(s)
    if k_fit < 2:
        raise ConfigError("k_fit must be >= 2")
    if N < max(4, 2 * k_fit):
        raise EmptySampleError(f"edge_density_estimate needs at least {max(4, 2 * k_fit)} samples, got {N}")
    q = np.empty(N)
    q[1:-1] = 2.0 / (N * (s[2:] - s[:-2]))
    q[0] = 1.0 / (N * (s[1] - s[0]))
    q[-1] = 2.0 / (N * (s[-1] - s[-3]))
    F = (np.arange(1, N + 1) - 0.5) / N
    meta = {"k_fit": k_fit}

    A = np.vstack([s[-k_fit:], np.ones(k_fit)]).T
    slope, icept = np.linalg.lstsq(A, (1 - F[-k_fit:]) ** (2.0 / 3.0), rcond=None)[0]
    j = N - k_fit
    if slope < 0 and -icept / slope > s[-1]:
        b = -icept / slope
        c = 1.5 * (-slope) ** 1.5
        tail = b - (b - s[j]) * np.geomspace(1, 1e-8, edge_points)
        g_hi, v_hi = np.append(tail, b), np.append(c * np.sqrt(b - tail), 0.0)
    else:
        b = s[-1] + (s[-1] - s[-2])
        g_hi, v_hi = np.append(s[j:], b), np.append(q[j:], 0.0)
    meta["edge_fit"] = float(b)

    i0 = 0
    g_lo, v_lo = np.zeros(0), np.zeros(0)
    if lower is not None and s[0] > lower:
        x = s[:k_fit] - lower
        gam, logA = np.polyfit(np.log(x), np.log(F[:k_fit]), 1)
        if gam > 0:
            head = lower + x[-1] * np.geomspace(1e-8, 1, edge_points)[:-1]
            g_lo, v_lo = head, np.exp(logA) * gam * (head - lower) ** (gam - 1)
            i0 = k_fit - 1
            meta["lower_exponent"] = float(gam)
    g = np.concatenate([g_lo, s[i0:j], g_hi])
    v = np.concatenate([v_lo, q[i0:j], v_hi])
    lo = lower if lower is not None else float(s[0])
    return DensityCurve(g, v, "custom", (lo, float(b)), meta).normalized()


# distances ---------------------------------------------------------------------
@dataclass(frozen=True)
class DistanceReport:
    L1: float
    KS: float
    scheme: str | None = None
    scale_fit: dict | None = None

    def to_dict(self):
        return {"L1": self.L1, "KS": self.KS, "scheme": self.scheme, "scale_fit": self.scale_fit}


def _support(p):
    return p.support


def _quantile(p, u: float) -> float:
    lo, hi = p.support
    return float(brentq(lambda x: float(p.cdf(x)) - u, lo, hi, xtol=1e-14 * max(1.0, abs(hi - lo))))


def _rescale(p1, p2, how: str):
    if how == "none":
        return p1, p2, {"mode": "none"}
    if how == "support":
        fits = {"mode": "support"}
        out = []
        for name, p in (("a", p1), ("b", p2)):
            lo, hi = p.support
            a = 1.0 / (hi - lo)
            out.append(p.affine(a, -lo * a))
            fits[name] = {"scale": a, "shift": -lo * a}
        return out[0], out[1], fits
    if how == "quantile":
        fits = {"mode": "quantile"}
        out = []
        for name, p in (("a", p1), ("b", p2)):
            q_lo, q_hi = _quantile(p, 0.005), _quantile(p, 0.995)
            a = 0.99 / (q_hi - q_lo)
            b = 0.005 - a * q_lo
            out.append(p.affine(a, b))
            fits[name] = {"scale": a, "shift": b}
        return out[0], out[1], fits
    raise ConfigError(f"unknown rescale mode {how!r}")


def _pointwise_grid(p):
    if isinstance(p, EmpiricalDensity):
        return p.edges
    # one ulp outside each end, so the jump to zero is not smeared over a grid step
    return np.concatenate([[np.nextafter(p.grid[0], -np.inf)], p.grid, [np.nextafter(p.grid[-1], np.inf)]])


def density_distance(p1, p2, *, rescale: str = "none", scheme: str | None = None, refine: int = 3) -> DistanceReport:
    """L1 = ∫|p1 − p2| and KS = sup|F1 − F2|.

    Curves are compared pointwise on the union of their grids (refined by
    midpoint insertion) with the trapezoid rule. When either side is a
    histogram, the other side is projected onto the histogram bins and L1 is
    the total variation of bin masses (plus any mass outside the bins); two
    histograms are compared on the coarser binning.
    """
    p1, p2, fits = _rescale(p1, p2, rescale)
    g = np.union1d(_pointwise_grid(p1), _pointwise_grid(p2))
    for _ in range(refine):
        g = np.union1d(g, 0.5 * (g[1:] + g[:-1]))
    ks = float(np.max(np.abs(p1.cdf(g) - p2.cdf(g))))
    h1, h2 = isinstance(p1, EmpiricalDensity), isinstance(p2, EmpiricalDensity)
    if h1 and h2:
        # resolve at the coarser binning; the key makes the choice order-independent
        key = lambda h: (len(h.edges), tuple(h.edges))
        hist, other = (p1, p2) if key(p1) <= key(p2) else (p2, p1)
    elif h1 or h2:
        hist, other = (p1, p2) if h1 else (p2, p1)
    if h1 or h2:
        m_other = other.mass_on(hist.edges)
        m_hist = hist.mass_on(hist.edges)
        outside = 1.0 - float(m_other.sum())
        outside = outside if outside > 1e-12 else 0.0
        L1 = float(np.abs(m_hist - m_other).sum() + outside)
    else:
        v = np.abs(p1.pdf(g) - p2.pdf(g))
        L1 = float(np.trapezoid(v, g))
    return DistanceReport(L1, ks, scheme, fits)
