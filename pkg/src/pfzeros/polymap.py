"""Sparse multivariate polynomial maps and the MapSpec type."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError

Terms = dict  # {exponent tuple: Fraction}


def to_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, finite float or a 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ConfigError(f"non-finite coefficient {x!r}")
        return Fraction(float(x))
    raise ConfigError(f"unsupported coefficient {x!r}")


def fraction_to_json(x: Fraction):
    if x.denominator == 1:
        return x.numerator
    f = float(x)
    if Fraction(f) == x:
        return f
    return f"{x.numerator}/{x.denominator}"


def _clean(terms: Mapping) -> Terms:
    return {tuple(int(e) for e in k): to_fraction(v) for k, v in terms.items() if to_fraction(v) != 0}


class PolyMap:
    """Polynomial map R^d -> R^d stored as one sparse term dict per component."""

    def __init__(self, terms: Sequence[Mapping], d: int | None = None):
        terms = [_clean(t) for t in terms]
        if d is None:
            d = len(terms)
        if len(terms) != d:
            raise ConfigError(f"expected {d} components, got {len(terms)}")
        for t in terms:
            for k in t:
                if len(k) != d:
                    raise ConfigError(f"exponent {k} does not match dimension {d}")
        self.d = d
        self.terms = tuple(terms)

    # construction -------------------------------------------------------
    @classmethod
    def from_dense(cls, components) -> "PolyMap":
        """Component ℓ is a nested array c[i,j,...] of coefficients of a^i b^j ..."""
        comps = list(components)
        d = len(comps)
        out = []
        for c in comps:
            arr = np.asarray(c, dtype=object)
            if arr.ndim != d:
                raise ConfigError(f"component table has {arr.ndim} axes, expected {d}")
            t = {}
            for idx in np.ndindex(arr.shape):
                v = to_fraction(arr[idx])
                if v != 0:
                    t[tuple(int(i) for i in idx)] = v
            out.append(t)
        return cls(out, d)

    @classmethod
    def univariate(cls, coeffs: Sequence) -> "PolyMap":
        return cls([{(k,): c for k, c in enumerate(coeffs)}], 1)

    # views --------------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(k) for t in self.terms for k in t), default=0)

    def to_dense(self) -> list:
        deg = [max([k[i] for t in self.terms for k in t] + [0]) for i in range(self.d)]
        shape = tuple(g + 1 for g in deg)
        out = []
        for t in self.terms:
            arr = np.zeros(shape, dtype=object)
            arr[...] = 0
            for k, v in t.items():
                arr[k] = fraction_to_json(v)
            out.append(arr.tolist())
        return out

    def coeffs1d(self) -> list[Fraction]:
        if self.d != 1:
            raise ConfigError("univariate coefficients need d = 1")
        t = self.terms[0]
        deg = max((k[0] for k in t), default=0)
        return [t.get((k,), Fraction(0)) for k in range(deg + 1)]

    def constant(self) -> tuple[Fraction, ...]:
        z = (0,) * self.d
        return tuple(t.get(z, Fraction(0)) for t in self.terms)

    def linear_part(self) -> np.ndarray:
        """Exact Jacobian at the origin as an object array of Fractions."""
        J = np.empty((self.d, self.d), dtype=object)
        for i, t in enumerate(self.terms):
            for j in range(self.d):
                e = tuple(1 if q == j else 0 for q in range(self.d))
                J[i, j] = t.get(e, Fraction(0))
        return J

    @cached_property
    def _packed(self):
        packs = []
        for t in self.terms:
            if t:
                exps = np.array(list(t.keys()), dtype=np.int64)
                coef = np.array([float(v) for v in t.values()])
            else:
                exps = np.zeros((0, self.d), dtype=np.int64)
                coef = np.zeros(0)
            packs.append((exps, coef))
        return packs

    # evaluation ---------------------------------------------------------
    def __call__(self, x):
        """Vectorized evaluation; x has shape (..., d), float or complex."""
        x = np.asarray(x)
        out = []
        for exps, coef in self._packed:
            if coef.size == 0:
                out.append(np.zeros(x.shape[:-1], dtype=np.result_type(x, float)))
                continue
            mono = np.prod(x[..., None, :] ** exps, axis=-1)
            out.append(mono @ coef)
        return np.stack(out, axis=-1)

    def evaluate_exact(self, x: Sequence) -> tuple:
        x = [to_fraction(v) for v in x]
        res = []
        for t in self.terms:
            acc = Fraction(0)
            for k, v in t.items():
                m = v
                for xi, e in zip(x, k):
                    m *= xi ** e
                acc += m
            res.append(acc)
        return tuple(res)

    def partial(self, j: int) -> "PolyMap":
        out = []
        for t in self.terms:
            nt = {}
            for k, v in t.items():
                if k[j] > 0:
                    nk = k[:j] + (k[j] - 1,) + k[j + 1:]
                    nt[nk] = nt.get(nk, Fraction(0)) + v * k[j]
            out.append(nt)
        return PolyMap(out, self.d)

    @cached_property
    def _partials(self) -> tuple["PolyMap", ...]:
        return tuple(self.partial(j) for j in range(self.d))

    def jacobian(self, x) -> np.ndarray:
        """J[..., i, j] = ∂f_i/∂a_j at x."""
        x = np.asarray(x)
        cols = [p(x) for p in self._partials]
        return np.stack(cols, axis=-1)

    def second_derivatives(self, x) -> np.ndarray:
        """H[..., i, j, k] = ∂²f_i/∂a_j∂a_k at x."""
        x = np.asarray(x)
        rows = [np.stack([pj._partials[k](x) for k in range(self.d)], axis=-1) for pj in self._partials]
        return np.stack(rows, axis=-1)

    # algebra ------------------------------------------------------------
    def dot(self, s: Sequence) -> dict:
        """Scalar polynomial Σ_ℓ s_ℓ f_ℓ as a float term dict."""
        acc: dict = {}
        for sl, t in zip(s, self.terms):
            for k, v in t.items():
                acc[k] = acc.get(k, 0.0) + sl * float(v)
        return acc

    def translate(self, a: Sequence) -> "PolyMap":
        """f_a(u) = f(u + a) − a, exact when `a` is rational."""
        a = [to_fraction(v) for v in a]
        out = []
        for ell, t in enumerate(self.terms):
            nt: dict = {}
            for k, v in t.items():
                # expand Π (u_i + a_i)^{k_i}
                parts = [{(): v}]
                for i, e in enumerate(k):
                    nxt = {}
                    for base, c in parts[-1].items():
                        for m in range(e + 1):
                            cc = c * math.comb(e, m) * a[i] ** (e - m)
                            if cc != 0:
                                nk = base + (m,)
                                nxt[nk] = nxt.get(nk, Fraction(0)) + cc
                    parts.append(nxt)
                for nk, c in parts[-1].items():
                    nt[nk] = nt.get(nk, Fraction(0)) + c
            z = (0,) * self.d
            nt[z] = nt.get(z, Fraction(0)) - a[ell]
            out.append(nt)
        return PolyMap(out, self.d)

    def euler_step(self, delta: Sequence) -> "PolyMap":
        """The map a + δ·F(a) for this field F."""
        delta = [to_fraction(v) for v in delta]
        out = []
        for ell, t in enumerate(self.terms):
            nt = {k: v * delta[ell] for k, v in t.items()}
            e = tuple(1 if q == ell else 0 for q in range(self.d))
            nt[e] = nt.get(e, Fraction(0)) + 1
            out.append(nt)
        return PolyMap(out, self.d)

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, tuple(tuple(sorted(t.items())) for t in self.terms)))

    def __repr__(self):
        return f"PolyMap(d={self.d}, degree={self.degree})"


def _eig_of_exact(J: np.ndarray) -> np.ndarray:
    M = np.array([[float(v) for v in row] for row in J])
    ev = np.linalg.eigvals(M)
    if np.all(np.abs(ev.imag) <= 1e-14 * (1 + np.abs(ev.real))):
        ev = ev.real
    return np.sort_complex(ev) if np.iscomplexobj(ev) else np.sort(ev)


@dataclass(frozen=True, eq=False)
class MapSpec:
    """A polynomial self-map with its fixed point at the origin.

    `lam` is recomputed from the Jacobian at 0; a caller-supplied value is
    checked against it. `lam` is complex only for maps whose linear part has
    complex spectrum (the translated Julia map with complex α).
    """

    poly: PolyMap
    D: float | None = None
    domain: tuple | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)
    lam_given: Sequence | None = None

    def __post_init__(self):
        if any(c != 0 for c in self.poly.constant()):
            raise ConfigError(f"f(0) != 0: constant terms {self.poly.constant()}")
        lam = _eig_of_exact(self.poly.linear_part())
        if self.lam_given is not None:
            given = np.sort_complex(np.atleast_1d(np.asarray(self.lam_given, dtype=complex)))
            if given.shape != lam.shape or not np.allclose(given, np.sort_complex(lam.astype(complex)), atol=1e-9):
                raise ConfigError(f"lambda {list(given)} disagrees with Jacobian spectrum {list(lam)}")
        if self.D is not None and not (math.isfinite(self.D) and self.D > 0):
            raise ConfigError("D must be positive and finite")
        object.__setattr__(self, "_lam", lam)

    @property
    def lam(self) -> np.ndarray:
        return self._lam

    @property
    def d(self) -> int:
        return self.poly.d

    @property
    def verified(self) -> bool:
        return True

    def __call__(self, x):
        return self.poly(x)

    @property
    def lam1(self) -> Fraction:
        """f′(0) exactly, for d = 1."""
        if self.d != 1:
            raise ConfigError("lam1 needs d = 1")
        return self.poly.linear_part()[0, 0]

    def coeffs(self) -> list[Fraction]:
        return self.poly.coeffs1d()

    # serialization ------------------------------------------------------
    def to_json_dict(self) -> dict:
        lam = self.lam
        if np.iscomplexobj(lam):
            lam_out = [[float(v.real), float(v.imag)] for v in lam]
        else:
            lam_out = [float(v) for v in lam]
        out = {"d": self.d, "components": self.poly.to_dense(), "lambda": lam_out, "D": self.D, "name": self.name}
        if self.domain is not None:
            out["domain"] = [list(map(float, b)) for b in self.domain]
        if self.params:
            out["params"] = {k: (v if not isinstance(v, complex) else [v.real, v.imag]) for k, v in self.params.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "MapSpec":
        try:
            comps = obj["components"]
        except KeyError as exc:
            raise ConfigError("MapSpec JSON needs 'components'") from exc
        poly = PolyMap.from_dense(comps)
        if "d" in obj and int(obj["d"]) != poly.d:
            raise ConfigError("'d' disagrees with the component tables")
        lam = obj.get("lambda")
        if lam is not None:
            lam = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in lam]
        dom = obj.get("domain")
        return cls(poly, D=obj.get("D"), domain=tuple(tuple(b) for b in dom) if dom else None,
                   name=obj.get("name", "custom"), params=dict(obj.get("params", {})), lam_given=lam)

    @classmethod
    def from_json(cls, text: str) -> "MapSpec":
        return cls.from_json_dict(json.loads(text))


def map1d(coeffs: Iterable, **kw) -> MapSpec:
    return MapSpec(PolyMap.univariate(list(coeffs)), **kw)
