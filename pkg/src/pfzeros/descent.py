"""Saddle points of γ(a) = s·f(a) − Σ log a_ℓ, the 1-d zero density and the κ-code."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, NoBracket, RealZeroOfH
from .polymap import MapSpec, PolyMap
from .spectra import DensityCurve

RESIDUAL_TOL = 1e-10
DEGENERATE_TOL = 1e-9
IMAG_TOL = 1e-12
CUT_SHIFT = 1e-12
NEWTON_MODULI = (0.1, 0.3, 1.0, 3.0)
NEWTON_PHASES = 8
NEWTON_MAX_IT = 100


def _as_poly(f) -> PolyMap:
    return f.poly if isinstance(f, MapSpec) else f


@dataclass(frozen=True, eq=False)
class PRF:
    """γ(a) = Σ_ℓ s_ℓ f_ℓ(a) − Σ_ℓ log a_ℓ + offset (principal log)."""

    f: MapSpec | PolyMap
    s: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.s, dtype=float))
        if s.shape != (_as_poly(self.f).d,):
            raise ConfigError(f"scale vector must have length {_as_poly(self.f).d}")
        if not np.all(np.isfinite(s)):
            raise ConfigError("scale vector must be finite")
        object.__setattr__(self, "s", s)

    def __call__(self, a) -> complex:
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        if np.any(a == 0):
            raise ValueError("γ is undefined where a coordinate vanishes")
        fa = _as_poly(self.f)(a)
        return complex(np.dot(self.s, fa) - np.sum(np.log(a)) + self.offset)

    def gradient(self, a) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        return _as_poly(self.f).jacobian(a).T @ self.s - 1 / a

    def hessian(self, a, part: str = "prf") -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        H = np.tensordot(self.s, _as_poly(self.f).second_derivatives(a), axes=(0, 0))
        if part == "prf":
            H = H + np.diag(1 / a ** 2)
        elif part != "map":
            raise ConfigError(f"unknown Hessian part {part!r}")
        return H


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    a: np.ndarray
    p: int
    theta: np.ndarray
    tag: str
    eigenvalues: np.ndarray
    residual: float
    gamma: complex
    on_cut: bool = False

    def to_dict(self):
        out = {"re": [float(v.real) for v in self.a], "im": [float(v.imag) for v in self.a],
               "hessian_tag": self.tag, "residual": self.residual}
        if len(self.a) == 1:
            out["re"], out["im"] = out["re"][0], out["im"][0]
        return out


def _classify(eig: np.ndarray) -> str:
    mags = np.abs(eig)
    if mags.min() <= DEGENERATE_TOL * max(1.0, mags.max()):
        return "degenerate"
    if np.all(np.abs(eig.imag) <= IMAG_TOL * (1 + mags)) and np.all(eig.real < 0):
        return "negative-definite"
    return "indefinite"


def hessian_classify(f, s, a, part: str = "prf") -> tuple[str, np.ndarray]:
    """Tag and eigenvalues of the complex Hessian at a critical point.

    part = 'prf' uses the full Hessian of γ; part = 'map' uses only the
    Hessian of s·f, which exposes the structural degeneracy of maps that are
    linear in a block of coordinates.
    """
    pt = a.a if isinstance(a, CriticalPoint) else np.atleast_1d(np.asarray(a, dtype=complex))
    H = PRF(f, s).hessian(pt, part)
    eig = np.linalg.eigvals(H)
    return _classify(eig), eig


def _critical_system(poly: PolyMap, s: np.ndarray, a: np.ndarray):
    """F_ℓ = a_ℓ (Jᵀs)_ℓ − 1 and its Jacobian."""
    J = poly.jacobian(a)
    g = J.T @ s
    S2 = np.tensordot(s, poly.second_derivatives(a), axes=(0, 0))
    F = a * g - 1
    DF = np.diag(g) + a[:, None] * S2
    return F, DF


def _residual(poly, s, a) -> float:
    return float(np.linalg.norm(_critical_system(poly, s, a)[0]))


def _newton_starts(d: int):
    golden = (math.sqrt(5) - 1) * math.pi
    for r in NEWTON_MODULI:
        for k in range(NEWTON_PHASES):
            ph = 2 * math.pi * (k + 0.5) / NEWTON_PHASES
            yield np.array([r * cmath.exp(1j * (ph + golden * j)) for j in range(d)])


def _damped_newton(poly, s, a0):
    a = a0.astype(complex)
    F, DF = _critical_system(poly, s, a)
    r = np.linalg.norm(F)
    for _ in range(NEWTON_MAX_IT):
        if r <= 1e-14 * (1 + np.linalg.norm(a)):
            return a, r, True
        try:
            step = np.linalg.solve(DF, -F)
        except np.linalg.LinAlgError:
            return a, r, False
        t = 1.0
        while t > 1e-10:
            cand = a + t * step
            if np.all(cand != 0):
                Fn, DFn = _critical_system(poly, s, cand)
                rn = np.linalg.norm(Fn)
                if np.isfinite(rn) and rn < r:
                    a, F, DF, r = cand, Fn, DFn, rn
                    break
            t *= 0.5
        else:
            return a, r, r <= RESIDUAL_TOL * (1 + np.linalg.norm(a))
    return a, r, r <= RESIDUAL_TOL * (1 + np.linalg.norm(a))


def _critical_coeffs_1d(coeffs: Sequence[float]) -> np.ndarray:
    """A(a) = a f′(a) = Σ k c_k a^k (ascending, float)."""
    return np.array([k * float(c) for k, c in enumerate(coeffs)])


def _batch_roots(P: np.ndarray) -> np.ndarray:
    """Roots of each row of P (ascending coefficients); rows with a zero leading term give nan."""
    m, w = P.shape
    deg = w - 1
    while deg > 0 and np.all(P[:, deg] == 0):
        deg -= 1
    if deg == 0:
        return np.zeros((m, 0), dtype=complex)
    lead = P[:, deg]
    out = np.full((m, deg), np.nan + 0j)
    ok = lead != 0
    if not np.any(ok):
        return out
    mon = P[ok, :deg] / lead[ok, None]
    C = np.zeros((ok.sum(), deg, deg))
    if deg > 1:
        idx = np.arange(deg - 1)
        C[:, idx + 1, idx] = 1.0
    C[:, :, -1] = -mon
    out[ok] = np.linalg.eigvals(C)
    return out


def _roots_batch(A: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Roots of s·A(a) − 1 for each s; shape (len(s), deg A)."""
    s = np.asarray(s, dtype=float)
    P = np.asarray(A, dtype=float)[None, :] * s[:, None]
    P[:, 0] -= 1.0
    return _batch_roots(P)


def _make_point(poly, s, a, part="prf") -> CriticalPoint:
    a = np.asarray(a, dtype=complex)
    on_cut = bool(np.any((np.abs(a.imag) <= IMAG_TOL * (1 + np.abs(a))) & (a.real < 0)))
    if on_cut:
        a = a * (1 + CUT_SHIFT)
    prf = PRF(poly, s)
    tag, eig = hessian_classify(poly, s, a, part)
    p = int(np.sum(np.abs(a.imag) > IMAG_TOL * (1 + np.abs(a))))
    return CriticalPoint(a, p, np.angle(a), tag, eig, _residual(poly, s, a), prf(a), on_cut)


def _polish_1d(A, s, r):
    # two Newton steps on s·A(a) − 1 tighten the companion roots
    dA = np.array([k * A[k] for k in range(1, len(A))])
    for _ in range(2):
        v = s * np.polynomial.polynomial.polyval(r, A) - 1
        dv = s * np.polynomial.polynomial.polyval(r, dA)
        r = np.where(dv != 0, r - v / np.where(dv != 0, dv, 1), r)
    return r


def critical_points(f, s, *, method: str = "auto") -> list[CriticalPoint]:
    """Solutions of a_ℓ·(s·∂f/∂a_ℓ)(a) = 1, sorted by (Re a, Im a)."""
    poly = _as_poly(f)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (poly.d,) or not np.all(np.isfinite(s)):
        raise ConfigError(f"scale vector must be finite with length {poly.d}")
    if method == "auto":
        method = "companion" if poly.d == 1 else "newton"
    pts = []
    if method == "companion":
        if poly.d != 1:
            raise ConfigError("companion method needs d = 1")
        A = _critical_coeffs_1d(poly.coeffs1d())
        roots = _roots_batch(A, s[:1])[0]
        roots = roots[np.isfinite(roots)]
        roots = _polish_1d(A, s[0], roots)
        # enforce exact conjugate symmetry for near-conjugate pairs
        for r in roots:
            if r != 0:
                pts.append(_make_point(poly, s, [r]))
    elif method == "newton":
        found = []
        for a0 in _newton_starts(poly.d):
            a, r, ok = _damped_newton(poly, s, a0)
            if not ok or np.any(a == 0) or r > RESIDUAL_TOL * (1 + np.linalg.norm(a)):
                continue
            if any(np.linalg.norm(a - b) <= 1e-8 * (1 + np.linalg.norm(a)) for b in found):
                continue
            found.append(a)
        pts = [_make_point(poly, s, a) for a in found]
    else:
        raise ConfigError(f"unknown critical-point method {method!r}")
    pts.sort(key=lambda c: tuple(np.round(np.concatenate([c.a.real, c.a.imag]), 12)))
    return pts


def dominant(points: Sequence[CriticalPoint]) -> CriticalPoint | None:
    """Complex point with positive imaginary part, ties broken by largest Re γ."""
    upper = []
    for c in points:
        im = c.a.imag[np.abs(c.a.imag) > IMAG_TOL * (1 + np.abs(c.a))]
        if len(im) and im[0] > 0:
            upper.append(c)
    if not upper:
        return None
    return max(upper, key=lambda c: (float(np.max(c.a.imag)), c.gamma.real))


# 1-d density and κ-code ----------------------------------------------------------
def _upper_critical_1d(coeffs, s_arr):
    """Upper-half-plane critical point per s (nan where all points are real)."""
    A = _critical_coeffs_1d(coeffs)
    R = _roots_batch(A, s_arr)
    if R.shape[1] == 0:
        return np.full(len(s_arr), np.nan + 0j)
    tol = IMAG_TOL * (1 + np.abs(R))
    im = np.where(np.isfinite(R) & (R.imag > tol), R.imag, -np.inf)
    k = np.argmax(im, axis=1)
    a = R[np.arange(len(s_arr)), k]
    has = np.isfinite(im[np.arange(len(s_arr)), k])
    return np.where(has, a, np.nan + 0j)


def zero_density_1d(f, s_grid, normalize: bool = True) -> DensityCurve:
    """q(s) = Im f(a_c(s))/π with a_c the upper critical point, 0 where all are real."""
    poly = _as_poly(f)
    if poly.d != 1:
        raise ConfigError("zero_density_1d needs d = 1")
    s = np.asarray(s_grid, dtype=float)
    if np.any(s <= 0) or np.any(np.diff(s) <= 0):
        raise ConfigError("s grid must be positive and ascending")
    a = _upper_critical_1d(poly.coeffs1d(), s)
    fa = np.where(np.isfinite(a), poly(np.where(np.isfinite(a), a, 0)[:, None])[:, 0], 0)
    q = np.where(np.isfinite(a), np.abs(fa.imag) / np.pi, 0.0)
    curve = DensityCurve(s, q, "custom", None, {"raw_integral": float(np.trapezoid(q, s))})
    return curve.normalized() if normalize and curve.integral() > 0 else curve


def kappa_code_1d(f, s) -> tuple[np.ndarray, np.ndarray]:
    """κ(s) = |s·Im f(a_c) − arg a_c|/π for the upper critical point a_c.

    The conjugate point gives the negated value; the absolute value places
    the code in (0, 1) for both. nan where all critical points are real.
    """
    poly = _as_poly(f)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a = _upper_critical_1d(poly.coeffs1d(), s)
    ok = np.isfinite(a)
    fa = poly(np.where(ok, a, 1)[:, None])[:, 0]
    code = np.where(ok, np.abs(s * fa.imag - np.angle(np.where(ok, a, 1))) / np.pi, np.nan)
    return code, a


@dataclass(frozen=True, eq=False)
class KappaSample:
    kappa: np.ndarray
    s: np.ndarray
    a: np.ndarray
    residual: np.ndarray
    attained: tuple
    n_no_bracket: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def solved(self) -> np.ndarray:
        return np.isfinite(self.s)


# κ values together with the manifold points they code
KappaCode = KappaSample


def _monotone_segments(code: np.ndarray):
    """(start, stop, orientation) runs of finite, strictly monotone grid values."""
    segs = []
    n = len(code)
    i = 0
    while i < n - 1:
        if not (np.isfinite(code[i]) and np.isfinite(code[i + 1])) or code[i + 1] == code[i]:
            i += 1
            continue
        o = 1 if code[i + 1] > code[i] else -1
        j = i + 1
        while j < n - 1 and np.isfinite(code[j + 1]) and (code[j + 1] - code[j]) * o > 0:
            j += 1
        segs.append((i, j, o))
        i = j
    return segs


def _solve_code(code_fn: Callable, kappa: np.ndarray, grid: np.ndarray, iters: int = 64):
    code = code_fn(grid)
    fin = code[np.isfinite(code)]
    attained = (float(fin.min()), float(fin.max())) if fin.size else (math.nan, math.nan)
    lo = np.full(len(kappa), np.nan)
    hi = np.full(len(kappa), np.nan)
    orient = np.zeros(len(kappa))
    for i0, i1, o in _monotone_segments(code):
        seg = code[i0: i1 + 1]
        inc = seg if o > 0 else -seg
        tgt = kappa if o > 0 else -kappa
        need = np.isnan(lo) & (tgt >= inc[0]) & (tgt <= inc[-1])
        if not np.any(need):
            continue
        k = np.clip(np.searchsorted(inc, tgt[need], side="left"), 1, len(inc) - 1)
        lo[need] = grid[i0 + k - 1]
        hi[need] = grid[i0 + k]
        orient[need] = o
    ok = np.isfinite(lo)
    x_lo, x_hi = lo[ok], hi[ok]
    t, o = kappa[ok], orient[ok]
    for _ in range(iters):
        mid = 0.5 * (x_lo + x_hi)
        c = code_fn(mid)
        below = np.where(np.isfinite(c), (c - t) * o < 0, False)
        x_lo = np.where(below, mid, x_lo)
        x_hi = np.where(below, x_hi, mid)
    sol = np.full(len(kappa), np.nan)
    sol[ok] = 0.5 * (x_lo + x_hi)
    return sol, attained


def kappa_solve(f, kappa, s_grid) -> KappaSample:
    """Solve |s·Im f(a_c(s)) − ϑ(s)| = πκ for s on monotone stretches of the grid.

    A scalar κ outside the attained range raises NoBracket; for an array of κ
    the unsolvable entries come back as nan and are counted.
    """
    poly = _as_poly(f)
    if poly.d != 1:
        raise ConfigError("kappa_solve needs d = 1; use partly_linear_code for partly-linear maps")
    scalar = np.ndim(kappa) == 0
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    if np.any((k <= 0) | (k >= 1)):
        raise ConfigError("κ must lie strictly in (0, 1)")
    grid = np.asarray(s_grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ConfigError("s grid must be positive and ascending")
    fn = lambda x: kappa_code_1d(poly, x)[0]
    s, attained = _solve_code(fn, k, grid)
    if scalar and not np.isfinite(s[0]):
        raise NoBracket(float(k[0]), attained)
    ok = np.isfinite(s)
    code = np.full(len(k), np.nan)
    a = np.full(len(k), np.nan + 0j)
    if np.any(ok):
        code[ok], a[ok] = kappa_code_1d(poly, s[ok])
    res = np.abs(code - k) * np.pi
    return KappaSample(k, s, a, res, attained, int((~ok).sum()))


# partly-linear maps ------------------------------------------------------------------
def _pl_code(gc: np.ndarray, hc: np.ndarray, u: np.ndarray, sig: np.ndarray):
    """Upper critical point and code value of γ = log(s·h(a)) + s·g(a) − log a along s = σu.

    gc, hc: coefficient tables (components × degree) of g and h in the scalar a.
    With g̃ = u·g and h̃ = u·h the critical condition a(σh̃′ + σ²h̃g̃′) = σh̃
    is σ·C1(a) + σ²·C2(a) = 0.
    """
    P = np.polynomial.polynomial
    sig = np.atleast_1d(np.asarray(sig, dtype=float))
    gt, ht = u @ gc, u @ hc
    x = np.array([0.0, 1.0])
    C1 = P.polysub(P.polymul(x, P.polyder(ht)), ht)
    C2 = P.polymul(P.polymul(x, ht), P.polyder(gt))
    w = max(len(C1), len(C2))
    C1, C2 = np.pad(C1, (0, w - len(C1))), np.pad(C2, (0, w - len(C2)))
    R = _batch_roots(sig[:, None] * C1[None, :] + (sig ** 2)[:, None] * C2[None, :])
    a = np.full(len(sig), np.nan + 0j)
    if R.shape[1]:
        up = np.where(np.isfinite(R) & (R.imag > IMAG_TOL * (1 + np.abs(R))), R.imag, -np.inf)
        k = np.argmax(up, axis=1)
        rows = np.arange(len(sig))
        has = np.isfinite(up[rows, k])
        a[has] = R[rows, k][has]
    ok = np.isfinite(a)
    aa = np.where(ok, a, 1.0)
    val = sig * P.polyval(aa, gt).imag + np.angle(sig * P.polyval(aa, ht)) - np.angle(aa)
    return a, np.where(ok, np.abs(val) / math.pi, np.nan)


def partly_linear_code(g, h, direction, kappa, sigma_grid, region: tuple | None = None) -> KappaSample:
    """Solve πκ = |Im s·g(a) + Arg(s·h(a)) − ϑ| along the ray s = σ·direction.

    g and h are sequences of coefficient lists (one per output component) of
    a map f(a, b) = h(a)·b + g(a) with scalar a and b. `region` bounds the real
    a-interval on which s·h must not vanish.
    """
    gc = np.array(_pad([list(map(float, c)) for c in g]))
    hc = np.array(_pad([list(map(float, c)) for c in h]))
    width = max(gc.shape[1], hc.shape[1])
    gc = np.pad(gc, ((0, 0), (0, width - gc.shape[1])))
    hc = np.pad(hc, ((0, 0), (0, width - hc.shape[1])))
    u = np.asarray(direction, dtype=float)
    if u.shape != (gc.shape[0],):
        raise ConfigError("direction must have one entry per component")
    grid = np.asarray(sigma_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("σ grid must be ascending")
    lo_r, hi_r = region if region is not None else (-np.inf, np.inf)
    for sg in (grid[0], grid[-1]):
        Sh = (sg * u) @ hc
        Sh = np.trim_zeros(Sh, "b")
        if len(Sh) == 0:
            raise RealZeroOfH("s·h vanishes identically")
        if len(Sh) > 1:
            r = np.polynomial.polynomial.polyroots(Sh)
            rr = r[np.abs(r.imag) <= 1e-12 * (1 + np.abs(r))].real
            if np.any((rr >= lo_r) & (rr <= hi_r)):
                raise RealZeroOfH(f"s·h has a real zero in the search region at σ = {sg}")

    def fn(sig):
        return _pl_code(gc, hc, u, sig)[1]

    scalar = np.ndim(kappa) == 0
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    if np.any((k <= 0) | (k >= 1)):
        raise ConfigError("κ must lie strictly in (0, 1)")
    sig, attained = _solve_code(fn, k, grid, iters=56)
    if scalar and not np.isfinite(sig[0]):
        raise NoBracket(float(k[0]), attained)
    a = np.full(len(k), np.nan + 0j)
    code = np.full(len(k), np.nan)
    ok = np.isfinite(sig)
    if np.any(ok):
        a[ok], code[ok] = _pl_code(gc, hc, u, sig[ok])
    res = np.abs(code - k) * np.pi
    return KappaSample(k, sig, a, res, attained, int((~np.isfinite(sig)).sum()),
                       {"direction": u.tolist(), "s": np.outer(sig, u)})


def _pad(rows):
    w = max(len(r) for r in rows)
    return [r + [0.0] * (w - len(r)) for r in rows]


# quadratic forms --------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class QuadraticDiag:
    mu: np.ndarray
    T: np.ndarray
    negative: np.ndarray
    orthogonality_error: float
    charpoly_error: float


def quadratic_diagonalize(Q) -> QuadraticDiag:
    """Q = T diag(μ) Tᵀ with T orthogonal; `negative` marks the semicircle-generating axes."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ConfigError("Q must be square")
    if not np.allclose(Q, Q.T, atol=1e-14 * max(1.0, np.abs(Q).max())):
        raise ConfigError("Q must be symmetric")
    mu, T = np.linalg.eigh(Q)
    orth = float(np.abs(T.T @ T - np.eye(len(mu))).max())
    cp = np.poly(Q)
    scale = np.polyval(np.abs(cp), np.abs(mu)) + 1.0
    cerr = float(np.max(np.abs(np.polyval(cp, mu)) / scale))
    return QuadraticDiag(mu, T, mu < 0, orth, cerr)


def quadratic_form_matrix(f, s) -> np.ndarray:
    """Symmetric M with aᵀMa equal to the degree-2 part of s·f."""
    poly = _as_poly(f)
    H = np.tensordot(np.asarray(s, dtype=float), poly.second_derivatives(np.zeros(poly.d)), axes=(0, 0))
    return 0.5 * np.real(H)


# domination ----------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Domination:
    grid: np.ndarray
    diff: np.ndarray
    winner: np.ndarray
    crossover: np.ndarray


def _dominant_value(prf: PRF) -> float:
    pts = critical_points(prf.f, prf.s)
    if not pts:
        return math.nan
    c = dominant(pts)
    if c is None:
        c = max(pts, key=lambda q: q.gamma.real)
    return prf(c.a).real


def domination(prf1: Callable, prf2: Callable, grid, *, tol: float = 1e-12) -> Domination:
    """Sign of Re γ_1(a_c1) − Re γ_2(a_c2) per grid point.

    prf1/prf2 map a grid point (scale vector) to a PRF. Ties and sign changes
    between neighbours form the communication locus.
    """
    grid = np.asarray(grid, dtype=float)
    pts = grid if grid.ndim > 1 else grid[:, None]
    v1 = np.array([_dominant_value(prf1(s)) for s in pts])
    v2 = np.array([_dominant_value(prf2(s)) for s in pts])
    diff = v1 - v2
    tie = np.abs(diff) <= tol * (1 + np.abs(v1) + np.abs(v2))
    winner = np.where(tie, 0, np.sign(diff)).astype(int)
    cross = tie.copy()
    ch = winner[:-1] * winner[1:] < 0
    cross[:-1] |= ch
    return Domination(grid, diff, winner, cross)


# resonance --------------------------------------------------------------------------------
@dataclass(frozen=True)
class ResonanceInfo:
    k: tuple | None
    roots: tuple
    complex_roots: tuple
    resonant: bool

    def to_dict(self):
        return {"k": list(self.k) if self.k else None, "roots": [None if r is None else list(r) for r in self.roots],
                "resonant": self.resonant}


def resonance_check(lam, k_max: int = 64, tol: float = 1e-12) -> ResonanceInfo:
    """Per-component minimal k_ℓ ≤ k_max with λ_ℓ^{k_ℓ} = 1 (0 when none) and the roots of a^{k−1} = 1.

    ±1 components are tested exactly; other values with |λ^k − 1| ≤ tol.
    Roots are None for k = 1, where the condition a^0 = 1 is vacuous.
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    lam = np.atleast_1d(np.asarray(lam))
    ks = []
    for l in lam:
        l = complex(l)
        if l == 1:
            ks.append(1)
            continue
        if l == -1:
            ks.append(2 if k_max >= 2 else 0)
            continue
        found = 0
        if abs(abs(l) - 1) <= tol and l.imag != 0:
            for k in range(1, k_max + 1):
                if abs(l ** k - 1) <= tol:
                    found = k
                    break
        ks.append(found)
    if not any(ks):
        return ResonanceInfo(None, (), (), False)
    roots, croots = [], []
    for k in ks:
        if k == 0:
            roots.append(())
            croots.append(())
        elif k == 1:
            roots.append(None)
            croots.append(None)
        else:
            m = k - 1
            roots.append((1.0, -1.0) if m % 2 == 0 else (1.0,))
            croots.append(tuple(cmath.exp(2j * math.pi * j / m) for j in range(m)))
    return ResonanceInfo(tuple(ks), tuple(roots), tuple(croots), True)
