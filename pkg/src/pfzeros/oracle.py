"""Independent ground truth: series H_n, Hermite zeros, orbit histograms, Ulam matrices, cycles."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import rng
from .bell import RealPoly
from .errors import ConfigError, CostGuard, EscapeError, NoCycleDetected
from .polymap import MapSpec
from .spectra import EmpiricalDensity, ZeroSet

SYMBOLIC_MAX_N = 14
CYCLE_TOL = 1e-9
ESCAPE_SLACK = 1e-12


# series oracle for H_n ------------------------------------------------------------------
def _series_mul(p, q, n):
    out = [Fraction(0)] * (n + 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j in range(min(len(q), n + 1 - i)):
            if q[j]:
                out[i + j] += a * q[j]
    return out


def symbolic_hn(f: MapSpec, n: int) -> RealPoly:
    """n!·[a^n] exp(y·f(a)) = n! Σ_m y^m [a^n] f(a)^m / m!, by truncated series powers."""
    if f.d != 1:
        raise ConfigError("symbolic_hn needs d = 1")
    if n < 0:
        raise ConfigError("n must be >= 0")
    if n > SYMBOLIC_MAX_N:
        raise CostGuard(f"symbolic_hn is capped at n = {SYMBOLIC_MAX_N}")
    c = f.coeffs()[: n + 1]
    c = c + [Fraction(0)] * (n + 1 - len(c))
    power = [Fraction(1)] + [Fraction(0)] * n
    out = []
    for m in range(n + 1):
        out.append(math.factorial(n) * power[n] / math.factorial(m))
        power = _series_mul(power, c, n)
    return RealPoly(tuple(out), "exact", None, n)


def _he_residual(n: int, x: float) -> float:
    """|He_n(x)| / Σ|c_k||x|^k evaluated in 30-digit arithmetic."""
    with mpmath.workdps(30):
        xm = mpmath.mpf(x)
        val = mpmath.hermite(n, xm / mpmath.sqrt(2)) / mpmath.power(2, mpmath.mpf(n) / 2)
        # Σ|c_k||x|^k for He_n is i^{-n}·He_n(i|x|) in absolute value
        scale = abs(mpmath.hermite(n, 1j * abs(xm) / mpmath.sqrt(2))) / mpmath.power(2, mpmath.mpf(n) / 2)
        return float(abs(val) / scale) if scale else float(abs(val))


def hermite_zeros(n: int, residuals: bool = True) -> ZeroSet:
    """Zeros of the probabilists' He_n: eigenvalues of the Jacobi matrix with off-diagonal √k."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    z = eigh_tridiagonal(np.zeros(n), np.sqrt(np.arange(1, n, dtype=float)), eigvals_only=True)
    z = np.sort(0.5 * (z - z[::-1]))  # exact symmetry about 0
    res = np.array([_he_residual(n, x) for x in z]) if residuals else np.zeros(n)
    return ZeroSet(z, np.ones(n, int), res, 0.0, n, 0, "jacobi")


# orbits and cycles -----------------------------------------------------------------------
def _domain(f: MapSpec) -> tuple[float, float]:
    if f.domain is not None:
        return tuple(map(float, f.domain[0]))
    D = f.D if f.D is not None else 1.0
    return 0.0, float(D)


def _horner(coeffs: np.ndarray):
    c = coeffs[::-1]

    def step(x):
        acc = np.full_like(x, c[0])
        for v in c[1:]:
            acc = acc * x + v
        return acc
    return step


def _map_1d(f: MapSpec):
    if f.d != 1:
        raise ConfigError("orbit oracles need d = 1")
    return _horner(np.array([float(v) for v in f.coeffs()]))


@dataclass(frozen=True)
class Cycle:
    period: int
    points: np.ndarray
    residual: float


def _iterate(step, v, k):
    for _ in range(k):
        v = step(v)
    return v


def detect_cycle(f: MapSpec, x0: float, *, tol: float = CYCLE_TOL, max_steps: int = 20000,
                 max_period: int = 1024) -> Cycle | None:
    """Floyd tortoise/hare with |x − y| ≤ tol as the meeting test, then the minimal period.

    The cycle is accepted only if every point satisfies |f^p(x) − x| ≤ tol.
    """
    g = _map_1d(f)
    step = lambda v: float(g(np.array([v]))[0])
    tort, hare = step(x0), step(step(x0))
    k = 0
    while abs(tort - hare) > tol:
        tort, hare = step(tort), step(step(hare))
        k += 1
        if k > max_steps or not (math.isfinite(tort) and math.isfinite(hare)):
            return None
    x = tort
    y, p = step(x), 1
    while abs(y - x) > tol:
        y, p = step(y), p + 1
        if p > max_period:
            return None
    # the meeting point is only tol-close; converge along the cycle before judging it
    fp = lambda v: _iterate(step, v, p)
    r = abs(fp(x) - x)
    for _ in range(max_steps // p):
        x2 = fp(x)
        r2 = abs(fp(x2) - x2)
        if not r2 < r:
            break
        x, r = x2, r2
    for d in range(1, p):
        if p % d == 0 and abs(_iterate(step, x, d) - x) <= tol:
            p = d
            break
    pts = [x]
    for _ in range(p - 1):
        pts.append(step(pts[-1]))
    res = 0.0
    for v in pts:
        w = v
        for _ in range(p):
            w = step(w)
        res = max(res, abs(w - v))
    if res > tol:
        return None
    return Cycle(p, np.sort(np.array(pts)), res)


@dataclass(frozen=True, eq=False)
class OrbitStats:
    n_samples: int
    burn_in: int
    n_chains: int
    seed: int
    histogram: EmpiricalDensity
    counts: np.ndarray
    cycle: Cycle | None
    meta: dict = field(default_factory=dict)

    @property
    def regime(self) -> str:
        return "cycle" if self.cycle is not None else "density"


def _run_chains(g, x, lo, hi, chains, burn_in, n_iter, edges):
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    block = 4096
    lo_s, hi_s = lo - ESCAPE_SLACK, hi + ESCAPE_SLACK
    done = 0
    total = burn_in + n_iter
    while done < total:
        m = min(block, total - done)
        buf = np.empty((m, len(x)))
        # escaped chains overflow harmlessly; they are reported just below
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(m):
                x = g(x)
                buf[i] = x
        bad = ~np.isfinite(buf) | (buf < lo_s) | (buf > hi_s)
        if bad.any():
            i, c = np.argwhere(bad)[0]
            raise EscapeError(int(chains[c]), done + int(i) + 1, float(buf[i, c]))
        keep = buf[max(0, burn_in - done):]
        if keep.size:
            counts += np.histogram(np.clip(keep, lo, hi), bins=edges)[0]
        done += m
    return counts, x


def default_threads() -> int:
    v = os.environ.get("PFZEROS_THREADS")
    try:
        return max(1, int(v)) if v else 1
    except ValueError as exc:
        raise ConfigError(f"PFZEROS_THREADS must be an integer, got {v!r}") from exc


def mc_invariant(f: MapSpec, n_samples: int = 10 ** 6, burn_in: int = 10 ** 4, n_chains: int = 64,
                 seed: int = 0, bins=100, *, threads: int | None = None, detect: bool = True) -> OrbitStats:
    """Pooled post-burn-in orbit histogram over independent chains.

    Chain c starts from a counter-based uniform draw keyed by (seed, c), so the
    pooled integer counts do not depend on how chains are split across threads.
    """
    if n_samples < 1 or n_chains < 1 or burn_in < 0:
        raise ConfigError("need n_samples >= 1, n_chains >= 1, burn_in >= 0")
    g = _map_1d(f)
    lo, hi = _domain(f)
    edges = np.linspace(lo, hi, int(bins) + 1) if np.ndim(bins) == 0 else np.asarray(bins, dtype=float)
    n_iter = -(-n_samples // n_chains)
    chains = np.arange(n_chains)
    x0 = lo + (hi - lo) * rng.uniform(seed, chains.astype(np.uint64), 0)
    threads = threads or default_threads()
    groups = np.array_split(chains, min(threads, n_chains))
    work = lambda grp: _run_chains(g, x0[grp], lo, hi, grp, burn_in, n_iter, edges)
    if len(groups) == 1:
        results = [work(groups[0])]
    else:
        with ThreadPoolExecutor(len(groups)) as ex:
            results = list(ex.map(work, groups))
    counts = sum(r[0] for r in results)
    final = np.concatenate([r[1] for r in results])
    hist = EmpiricalDensity(edges, counts / counts.sum(), int(counts.sum()), True)
    cyc = detect_cycle(f, float(final[0])) if detect else None
    return OrbitStats(int(counts.sum()), burn_in, n_chains, seed, hist, counts, cyc,
                      {"seed": seed, "chains": n_chains, "iters": n_iter, "burn_in": burn_in})


# Ulam discretization -----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class UlamModel:
    m: int
    edges: np.ndarray
    P: np.ndarray
    density: EmpiricalDensity
    subsamples: int
    iterations: int
    residual: float
    degenerate: bool
    grid: str = "clustered"

    def csv_rows(self):
        header = ["row"] + [f"c{j}" for j in range(self.m)]
        return header, [(i,) + tuple(map(float, r)) for i, r in enumerate(self.P)]


ULAM_GRIDS = ("uniform", "clustered")


def ulam_edges(lo: float, hi: float, m: int, grid: str = "clustered") -> np.ndarray:
    """Bin edges; 'clustered' places them at lo + (hi − lo)·sin²(πk/2m)."""
    if grid == "uniform":
        return np.linspace(lo, hi, m + 1)
    if grid == "clustered":
        e = lo + (hi - lo) * np.sin(np.pi * np.arange(m + 1) / (2 * m)) ** 2
        e[0], e[-1] = lo, hi
        return e
    raise ConfigError(f"unknown Ulam grid {grid!r}; expected one of {ULAM_GRIDS}")


def ulam_matrix(f: MapSpec, m: int, subsamples: int = 64, grid: str = "clustered") -> tuple[np.ndarray, np.ndarray]:
    g = _map_1d(f)
    lo, hi = _domain(f)
    edges = ulam_edges(lo, hi, m, grid)
    w = np.diff(edges)
    pts = edges[:-1, None] + (np.arange(subsamples) + 0.5)[None, :] / subsamples * w[:, None]
    img = g(pts.ravel()).reshape(m, subsamples)
    j = np.clip(np.searchsorted(edges, img, side="right") - 1, 0, m - 1)
    P = np.zeros((m, m))
    np.add.at(P, (np.repeat(np.arange(m), subsamples), j.ravel()), 1.0 / subsamples)
    return edges, P


def ulam_invariant(f: MapSpec, m: int = 400, subsamples: int = 64, *, grid: str = "clustered",
                   tol: float = 1e-12, max_iter: int = 200000) -> UlamModel:
    """Leading left eigenvector of the midpoint-subsampled transition matrix by power iteration.

    The default grid clusters edges toward both ends of the domain, where
    invariant densities of full-branch unimodal maps have 1/√ singularities
    that uniform bins smear out.
    """
    if m < 2 or subsamples < 1:
        raise ConfigError("need m >= 2 and subsamples >= 1")
    edges, P = ulam_matrix(f, m, subsamples, grid)
    v = np.diff(edges) / (edges[-1] - edges[0])
    res = math.inf
    it = 0
    while it < max_iter:
        w = v @ P
        w /= w.sum()
        res = float(np.abs(w - v).sum())
        v = w
        it += 1
        if res <= tol:
            break
    ev = np.linalg.eigvals(P)
    degenerate = int(np.sum(np.abs(ev - 1) <= 1e-9)) > 1
    v = np.clip(v, 0, None)
    v /= v.sum()
    return UlamModel(m, edges, P, EmpiricalDensity(edges, v, m, True), subsamples, it, res, degenerate, grid)


# differential-iteration cycles ------------------------------------------------------------
def detect_return(orbit, *, tol: float = 1e-2, min_steps: int = 10) -> int:
    """First return time k of a sampled orbit: |x_k − x_0| is a local minimum below
    tol·diameter and the next lap repeats it, |x_{2k} − x_k| ≤ tol·diameter."""
    X = np.asarray(orbit, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    diam = float(np.max(X.max(axis=0) - X.min(axis=0)))
    if diam == 0:
        return 1
    dist = np.linalg.norm(X - X[0], axis=1)
    thr = tol * diam
    n = len(X)
    for k in range(min_steps, (n - 1) // 2 + 1):
        if dist[k] <= thr and dist[k] <= dist[k - 1] and dist[k] <= dist[k + 1]:
            if np.linalg.norm(X[2 * k] - X[k]) <= thr:
                return k
    raise NoCycleDetected(f"no return within {tol}·diameter over {n} samples")


def cycle_integral_check(F, orbit, period: int | None = None, *, tol: float = 1e-2) -> float:
    """‖(1/T)∫₀ᵀ F(a(t)) dt‖ by the trapezoid rule over one detected period."""
    X = np.asarray(orbit, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    k = period if period is not None else detect_return(X, tol=tol)
    seg = X[: k + 1]
    vals = np.asarray(F(seg), dtype=float)
    if k == 0 or len(seg) < 2:
        return float(np.linalg.norm(vals[0]))
    mean = np.trapezoid(vals, axis=0) / k
    return float(np.linalg.norm(mean))
