"""Bell recurrence H_{n+1} = ∂_a H_n + y f′(a) H_n, resolving deviations and the e^k basis.

Two coefficient modes:

* ``exact``: Python integers over a common denominator, ``c[i][j] = num[i][j] / q**i``
  where ``q`` clears the denominators of f.
* ``float``: mantissa/exponent pairs per coefficient, ``c = m * 2**e``, so
  magnitudes far outside the double range are carried without overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import ConfigError, ResonanceError
from .polymap import MapSpec, to_fraction

EXACT_MAX_N = 40
# "auto" stays exact up to here: exact integers are cheap and float-mode
# coefficients lose ill-conditioned real zeros beyond n ≈ 60.
AUTO_EXACT_N = 400
_ZERO_EXP = -(1 << 28)
RESONANCE_TOL = 1e-12


# extended-range float helpers -------------------------------------------
def _ldexp(m, k):
    return np.ldexp(m, np.clip(k, -4000, 4000).astype(np.int32))


def _ext_norm(m, e):
    fm, fe = np.frexp(m)
    e = np.where(fm == 0, _ZERO_EXP, e + fe)
    return fm, e.astype(np.int64)


def _ext_add(m1, e1, m2, e2):
    E = np.maximum(e1, e2)
    m = _ldexp(m1, e1 - E) + _ldexp(m2, e2 - E)
    return _ext_norm(m, E)


def frac_to_ext(x: Fraction) -> tuple[float, int]:
    if x == 0:
        return 0.0, 0
    e = x.numerator.bit_length() - x.denominator.bit_length()
    m, k = math.frexp(float(x / (Fraction(2) ** e)))
    return m, e + k


def ext_to_frac(m: float, e: int) -> Fraction:
    if m == 0:
        return Fraction(0)
    return Fraction(m) * Fraction(2) ** int(e)


def _resolve_mode(mode: str, n: int) -> str:
    if mode == "auto":
        return "exact" if n <= AUTO_EXACT_N else "float"
    if mode not in ("exact", "float"):
        raise ConfigError(f"unknown coefficient mode {mode!r}")
    return mode


# RealPoly ---------------------------------------------------------------
@dataclass(frozen=True)
class RealPoly:
    """Dense univariate polynomial, ascending degree.

    Exact mode: ``coeffs`` are Fractions, ``scale_exp`` is None.
    Float mode: coefficient k is ``coeffs[k] * 2**scale_exp[k]``.
    ``nominal_degree`` is the degree the construction aimed for; a smaller
    actual degree flags a vanished leading term (resonance).
    """

    coeffs: tuple
    mode: str = "exact"
    scale_exp: tuple | None = None
    nominal_degree: int | None = None

    def __post_init__(self):
        c = list(self.coeffs)
        s = list(self.scale_exp) if self.scale_exp is not None else None
        while len(c) > 1 and c[-1] == 0:
            c.pop()
            if s is not None:
                s.pop()
        if not c:
            c = [Fraction(0)] if self.mode == "exact" else [0.0]
            s = None if self.mode == "exact" else [0]
        object.__setattr__(self, "coeffs", tuple(c))
        if self.mode == "float":
            object.__setattr__(self, "scale_exp", tuple(int(v) for v in s))
        if self.nominal_degree is None:
            object.__setattr__(self, "nominal_degree", len(c) - 1)

    @classmethod
    def exact(cls, coeffs: Sequence, nominal_degree=None) -> "RealPoly":
        return cls(tuple(to_fraction(v) for v in coeffs), "exact", None, nominal_degree)

    @classmethod
    def from_fractions_float(cls, coeffs: Sequence[Fraction], nominal_degree=None) -> "RealPoly":
        pairs = [frac_to_ext(to_fraction(v)) for v in coeffs]
        return cls(tuple(p[0] for p in pairs), "float", tuple(p[1] for p in pairs), nominal_degree)

    @classmethod
    def from_floats(cls, values: Sequence[float]) -> "RealPoly":
        m, e = np.frexp(np.asarray(values, dtype=float))
        return cls(tuple(float(v) for v in m), "float", tuple(int(v) for v in e))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    @property
    def degenerate(self) -> bool:
        return self.degree < self.nominal_degree

    def fractions(self) -> list[Fraction]:
        if self.mode == "exact":
            return list(self.coeffs)
        return [ext_to_frac(m, e) for m, e in zip(self.coeffs, self.scale_exp)]

    def coefficient(self, k: int) -> Fraction:
        if k > self.degree:
            return Fraction(0)
        if self.mode == "exact":
            return self.coeffs[k]
        return ext_to_frac(self.coeffs[k], self.scale_exp[k])

    @property
    def leading(self) -> Fraction:
        return self.coefficient(self.degree)

    def log2_abs(self) -> np.ndarray:
        """log2 |c_k| per coefficient (-inf for zeros), overflow-free."""
        out = np.full(self.degree + 1, -np.inf)
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if self.mode == "exact":
                c = abs(c)
                e = c.numerator.bit_length() - c.denominator.bit_length()
                out[k] = e + math.log2(float(c / Fraction(2) ** e))
            else:
                out[k] = math.log2(abs(c)) + self.scale_exp[k]
        return out

    def mp_coeffs(self, dps: int | None = None) -> list:
        """Coefficients as mpf, converted at `dps` digits (current context if None)."""
        with mpmath.workdps(dps or mpmath.mp.dps):
            if self.mode == "exact":
                return [mpmath.mpf(c.numerator) / c.denominator for c in self.coeffs]
            return [mpmath.ldexp(mpmath.mpf(m), e) for m, e in zip(self.coeffs, self.scale_exp)]

    def to_mode(self, mode: str) -> "RealPoly":
        if mode == self.mode:
            return self
        if mode == "exact":
            return RealPoly(tuple(self.fractions()), "exact", None, self.nominal_degree)
        return RealPoly.from_fractions_float(self.fractions(), self.nominal_degree)

    def __call__(self, x):
        """Evaluate at x with mpmath (exact coefficients are converted once)."""
        return mpmath.polyval(self.mp_coeffs(mpmath.mp.dps)[::-1], x)

    def __sub__(self, other: "RealPoly") -> "RealPoly":
        n = max(self.degree, other.degree) + 1
        a = self.fractions() + [Fraction(0)] * (n - self.degree - 1)
        b = other.fractions() + [Fraction(0)] * (n - other.degree - 1)
        diff = [x - y for x, y in zip(a, b)]
        nom = max(self.nominal_degree, other.nominal_degree)
        if self.mode == "exact" and other.mode == "exact":
            return RealPoly(tuple(diff), "exact", None, nom)
        return RealPoly.from_fractions_float(diff, nom)

    def __eq__(self, other):
        if not isinstance(other, RealPoly):
            return NotImplemented
        return self.fractions() == other.fractions()

    def __hash__(self):
        return hash(tuple(self.fractions()))

    def csv_rows(self) -> tuple[list[str], list[tuple]]:
        if self.mode == "exact":
            return ["degree", "numerator", "denominator"], [
                (k, c.numerator, c.denominator) for k, c in enumerate(self.coeffs)]
        return ["degree", "coefficient", "scale_exp"], [
            (k, float(m), int(e)) for k, (m, e) in enumerate(zip(self.coeffs, self.scale_exp))]


# BiPoly -----------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BiPoly:
    """H(y, a) = Σ c[i][j] y^i a^j.

    Exact: ``num`` holds Python ints and ``c[i][j] = num[i][j] / q**i``.
    Float: ``num`` holds mantissas and ``ex`` the binary exponents.
    """

    mode: str
    num: np.ndarray
    q: int = 1
    ex: np.ndarray | None = None

    @property
    def deg_y(self) -> int:
        return self.num.shape[0] - 1

    @property
    def deg_a(self) -> int:
        return self.num.shape[1] - 1

    def coeff(self, i: int, j: int) -> Fraction:
        if i > self.deg_y or j > self.deg_a:
            return Fraction(0)
        if self.mode == "exact":
            return Fraction(int(self.num[i, j]), self.q ** i)
        return ext_to_frac(float(self.num[i, j]), int(self.ex[i, j]))

    def fraction_table(self) -> list[list[Fraction]]:
        return [[self.coeff(i, j) for j in range(self.deg_a + 1)] for i in range(self.deg_y + 1)]


def bell_identity(mode: str = "exact") -> BiPoly:
    """H_0 = 1."""
    if mode == "exact":
        num = np.empty((1, 1), dtype=object)
        num[0, 0] = 1
        return BiPoly("exact", num, 1)
    if mode == "float":
        return BiPoly("float", np.array([[0.5]]), 1, np.array([[1]], dtype=np.int64))
    raise ConfigError(f"unknown coefficient mode {mode!r}")


def _require_1d(f: MapSpec):
    if f.d != 1:
        raise ConfigError("the Bell recurrence is implemented for d = 1 maps only")


def _trim_a(num, ex=None):
    J = num.shape[1]
    while J > 1 and not np.any(num[:, J - 1] != 0):
        J -= 1
    return num[:, :J], (None if ex is None else ex[:, :J])


def bell_step(H: BiPoly, f: MapSpec) -> BiPoly:
    """One application of H_{n+1} = ∂H_n/∂a + H_n·y·f′(a)."""
    _require_1d(f)
    c = f.coeffs()
    fp = [c[k] * k for k in range(1, len(c))] or [Fraction(0)]
    I, J = H.num.shape
    L = len(fp)
    cols = max(J - 1, J + L - 1, 1)
    if H.mode == "exact":
        qf = math.lcm(*[v.denominator for v in fp])
        Q = math.lcm(H.q, qf)
        num = H.num
        if Q != H.q:
            r = Q // H.q
            num = num * np.array([r ** i for i in range(I)], dtype=object)[:, None]
        gp = [int(v * Q) for v in fp]
        new = np.zeros((I + 1, cols), dtype=object)
        new[...] = 0
        if J > 1:
            new[:I, : J - 1] += num[:, 1:] * np.arange(1, J, dtype=object)
        for m, g in enumerate(gp):
            if g:
                new[1:, m: m + J] += g * num
        new, _ = _trim_a(new)
        return BiPoly("exact", new, Q)
    # float mode
    fpm = np.array([float(v) for v in fp])
    mA = np.zeros((I + 1, cols))
    eA = np.full((I + 1, cols), _ZERO_EXP, dtype=np.int64)
    if J > 1:
        m, e = _ext_norm(H.num[:, 1:] * np.arange(1, J), H.ex[:, 1:])
        mA[:I, : J - 1], eA[:I, : J - 1] = m, e
    for mm, g in enumerate(fpm):
        if g == 0.0:
            continue
        mB = np.zeros((I + 1, cols))
        eB = np.full((I + 1, cols), _ZERO_EXP, dtype=np.int64)
        m, e = _ext_norm(g * H.num, H.ex)
        mB[1:, mm: mm + J], eB[1:, mm: mm + J] = m, e
        mA, eA = _ext_add(mA, eA, mB, eB)
    mA, eA = _trim_a(mA, eA)
    return BiPoly("float", mA, 1, eA)


def bell_at_origin(H: BiPoly, nominal_degree: int | None = None) -> RealPoly:
    """H(y, 0): the a^0 column."""
    if H.mode == "exact":
        return RealPoly(tuple(Fraction(int(H.num[i, 0]), H.q ** i) for i in range(H.deg_y + 1)),
                        "exact", None, nominal_degree if nominal_degree is not None else H.deg_y)
    m = H.num[:, 0]
    e = np.where(m == 0, 0, H.ex[:, 0])
    return RealPoly(tuple(float(v) for v in m), "float", tuple(int(v) for v in e),
                    nominal_degree if nominal_degree is not None else H.deg_y)


def bell_sequence(f: MapSpec, n: int, mode: str = "auto") -> list[RealPoly]:
    """[H_0(y), ..., H_n(y)]."""
    if n < 0:
        raise ConfigError("n must be >= 0")
    mode = _resolve_mode(mode, n)
    H = bell_identity(mode)
    out = [bell_at_origin(H, 0)]
    for k in range(1, n + 1):
        H = bell_step(H, f)
        out.append(bell_at_origin(H, k))
    return out


def bell_hn(f: MapSpec, n: int, mode: str = "auto") -> RealPoly:
    return bell_sequence(f, n, mode)[-1]


def _monomial(n: int, mode: str) -> RealPoly:
    c = [Fraction(0)] * n + [Fraction(1)]
    return RealPoly(tuple(c), "exact") if mode == "exact" else RealPoly.from_fractions_float(c)


def deviation_from_hn(Hn: RealPoly, n: int) -> RealPoly:
    """e^n = y^n − H_n."""
    e = _monomial(n, Hn.mode) - Hn
    return RealPoly(e.coeffs, e.mode, e.scale_exp, n)


def resolving_deviation(n: int, f: MapSpec, mode: str = "auto") -> RealPoly:
    """e^n(y) = y^n − H_n(y); a degree below n flags resonance (λ^n = 1)."""
    _require_1d(f)
    return deviation_from_hn(bell_hn(f, n, mode), n)


def deviation_sequence(f: MapSpec, n: int, mode: str = "auto") -> list[RealPoly]:
    H = bell_sequence(f, n, mode)
    return [deviation_from_hn(h, k) for k, h in enumerate(H)]


def hermite_closed_form(lam, n: int, mode: str = "exact") -> RealPoly:
    """H_n of the logistic map λa(1 − a): (2λy)^{n/2} He_n(√(λy/2)) expanded in y.

    Coefficient of y^{n−m} is (−1)^m n!/(m!(n−2m)!) λ^{n−m}.
    """
    lam = to_fraction(lam)
    if lam <= 0:
        raise ConfigError("hermite_closed_form needs lambda > 0")
    if n < 0:
        raise ConfigError("n must be >= 0")
    c = [Fraction(0)] * (n + 1)
    for m in range(n // 2 + 1):
        c[n - m] = (-1) ** m * Fraction(math.factorial(n), math.factorial(m) * math.factorial(n - 2 * m)) * lam ** (n - m)
    if mode == "exact":
        return RealPoly(tuple(c), "exact", None, n)
    if mode == "float":
        return RealPoly.from_fractions_float(c, n)
    raise ConfigError(f"unknown coefficient mode {mode!r}")


# e^k basis ----------------------------------------------------------------
@dataclass(frozen=True)
class PhiExpansion:
    """g(y) = c_0 + Σ_{k≥1} c_k e^k(y).

    The constant function 1 stands in for the k = 0 slot because e^0 ≡ 0 and
    every e^k vanishes at y = 0; so c_0 = g(0) and the expansion is
    normalized exactly when g(0) = 1.
    """

    coeffs: tuple
    mode: str = "exact"

    @property
    def normalization(self):
        return self.coeffs[-1]

    @property
    def normalized(self) -> bool:
        return self.coeffs[0] == 1

    def reexpand(self, f: MapSpec) -> RealPoly:
        n = len(self.coeffs) - 1
        es = deviation_sequence(f, n, self.mode)
        acc = [Fraction(0)] * (n + 1)
        acc[0] = to_fraction(self.coeffs[0])
        for k in range(1, n + 1):
            ck = to_fraction(self.coeffs[k])
            if ck == 0:
                continue
            for j, v in enumerate(es[k].fractions()):
                acc[j] += ck * v
        if self.mode == "exact":
            return RealPoly(tuple(acc), "exact")
        return RealPoly.from_fractions_float(acc)


def _resonant(lead: Fraction, mode: str) -> bool:
    return lead == 0 if mode == "exact" else abs(float(lead)) <= RESONANCE_TOL


def phi_basis_expand(g: RealPoly, f: MapSpec, mode: str | None = None) -> PhiExpansion:
    """Triangular solve g = c_0 + Σ c_k e^k from the top degree down."""
    _require_1d(f)
    mode = mode or g.mode
    n = g.degree
    es = deviation_sequence(f, n, mode)
    r = g.fractions()
    c = [Fraction(0)] * (n + 1)
    for k in range(n, 0, -1):
        lead = es[k].coefficient(k)
        if _resonant(lead, mode):
            raise ResonanceError(k, float(f.lam1))
        ck = r[k] / lead
        c[k] = ck
        for j, v in enumerate(es[k].fractions()):
            r[j] -= ck * v
        if mode == "float":
            r[k] = Fraction(0)
    c[0] = r[0]
    if mode == "float":
        return PhiExpansion(tuple(float(v) for v in c), "float")
    return PhiExpansion(tuple(c), "exact")
