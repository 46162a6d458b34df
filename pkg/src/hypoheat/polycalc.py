"""Exact polynomial calculus on the Heisenberg group.

Coordinates (x, y, z) with the symmetric-gauge frame

    X = d/dx - (y/2) d/dz,   Y = d/dy + (x/2) d/dz,   Z = d/dz,

so that [X, Y] = Z and Z is central. Polynomials carry exact rational coefficients,
which makes the heat semigroup exp(t L / 2) a terminating series: L lowers the
weighted degree i + j + 2k of every monomial by two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Sequence

import gmpy2
import numpy as np

from ._rational import as_fraction, fmt_number
from .geometry import TensorSet, build_model, tensor_set


def _q(v):
    """Coefficient field element (gmpy2 rational; compares and hashes like Fraction)."""
    if isinstance(v, gmpy2.mpq(0).__class__):
        return v
    if isinstance(v, (int, Fraction)):
        return gmpy2.mpq(v)
    return gmpy2.mpq(as_fraction(v))


class SparsePoly:
    """Multivariate polynomial as {exponent tuple: rational}."""

    __slots__ = ("names", "terms")

    def __init__(self, terms: dict | None = None, names: Sequence[str] = ("x", "y", "z")):
        self.names = tuple(names)
        self.terms = {}
        for m, v in (terms or {}).items():
            v = _q(v)
            if v:
                self.terms[tuple(m)] = v

    @property
    def nvars(self) -> int:
        return len(self.names)

    def _new(self, terms: dict) -> "SparsePoly":
        return SparsePoly(terms, self.names)

    @classmethod
    def variable(cls, i: int, names=("x", "y", "z")):
        e = [0] * len(names)
        e[i] = 1
        return cls({tuple(e): 1}, names)

    @classmethod
    def constant(cls, c, names=("x", "y", "z")):
        return cls({(0,) * len(names): c}, names)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, SparsePoly):
            return other
        return self._new({(0,) * self.nvars: other})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, v in other.terms.items():
            out[m] = out.get(m, 0) + v
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            s = _q(other)
            return self._new({m: s * v for m, v in self.terms.items()})
        out: dict = {}
        for m1, v1 in self.terms.items():
            for m2, v2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + v1 * v2
        return self._new(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / _q(other))

    def __pow__(self, n: int):
        out = self._coerce(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.terms == other.terms
        try:
            return self.terms == self._coerce(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    # -- calculus -----------------------------------------------------
    def diff(self, i: int):
        out = {}
        for m, v in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = v * m[i]
        return self._new(out)

    def compose(self, subs: Sequence["SparsePoly"]) -> SparsePoly:
        """Substitute variable i by subs[i] (all subs share one variable set)."""
        names = subs[0].names
        powers = [[SparsePoly.constant(1, names)] for _ in subs]
        out = SparsePoly({}, names)
        for m, v in self.terms.items():
            term = SparsePoly.constant(v, names)
            for i, e in enumerate(m):
                while len(powers[i]) <= e:
                    powers[i].append(powers[i][-1] * subs[i])
                term = term * powers[i][e]
            out = out + term
        return out

    def evaluate(self, points) -> np.ndarray:
        """Float evaluation at an (n, nvars) array of points."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for m, v in sorted(self.terms.items()):
            term = np.full(pts.shape[0], float(v))
            for i, e in enumerate(m):
                if e:
                    term = term * pts[:, i] ** e
            out = out + term
        return out[0] if single else out

    def exact_eval(self, point) -> Fraction:
        point = [_q(p) for p in point]
        total = _q(0)
        for m, v in self.terms.items():
            term = v
            for p, e in zip(point, m):
                term *= p ** e
            total += term
        return Fraction(int(total.numerator), int(total.denominator))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, v in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), [-e for e in kv[0]])):
            factors = [f"{n}^{e}" if e > 1 else n for n, e in zip(self.names, m) if e]
            body = "*".join(factors)
            mag = abs(v)
            text = str(mag) if not body else (body if mag == 1 else f"{mag}*{body}")
            parts.append(("- " if v < 0 else "+ ") + text)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    __repr__ = __str__

    def to_terms(self) -> list:
        return [[*m, fmt_number(v)] for m, v in sorted(self.terms.items())]


class HeisPoly(SparsePoly):
    """Polynomial in Heisenberg coordinates (x, y, z)."""

    __slots__ = ()

    def __init__(self, terms: dict | None = None, names=("x", "y", "z")):
        super().__init__(terms, ("x", "y", "z"))

    def _new(self, terms):
        return HeisPoly(terms)

    def weighted_degree(self) -> int:
        return max((i + j + 2 * k for i, j, k in self.terms), default=-1)


def heis(terms: dict | None = None) -> HeisPoly:
    return HeisPoly(terms)


x = HeisPoly({(1, 0, 0): 1})
y = HeisPoly({(0, 1, 0): 1})
z = HeisPoly({(0, 0, 1): 1})
HALF = _q(Fraction(1, 2))


def apply_field(which, p: HeisPoly) -> HeisPoly:
    """Apply X, Y or Z (name or index 0/1/2) exactly."""
    idx = "XYZ".index(which) if isinstance(which, str) else int(which)
    if idx not in (0, 1, 2):
        raise ValueError(f"unknown field {which!r}")
    out: dict = {}
    for (i, j, k), v in p.terms.items():
        if idx == 2:
            if k:
                _add(out, (i, j, k - 1), v * k)
            continue
        own = i if idx == 0 else j
        if own:
            _add(out, (i - 1, j, k) if idx == 0 else (i, j - 1, k), v * own)
        if k:
            # the z-derivative picks up -y/2 (for X) or +x/2 (for Y)
            if idx == 0:
                _add(out, (i, j + 1, k - 1), -v * k * HALF)
            else:
                _add(out, (i + 1, j, k - 1), v * k * HALF)
    return HeisPoly(out)


def _add(terms: dict, m: tuple, v) -> None:
    terms[m] = terms.get(m, 0) + v


def sublaplacian(p: HeisPoly) -> HeisPoly:
    return apply_field(0, apply_field(0, p)) + apply_field(1, apply_field(1, p))


def heat_apply(t, f: HeisPoly) -> HeisPoly:
    """exp(t L / 2) f as the terminating series sum_k (t/2)^k L^k f / k!."""
    t = as_fraction(t)
    out = HeisPoly()
    term = f
    k = 0
    while not term.is_zero():
        out = out + term * ((t / 2) ** k / factorial(k))
        term = sublaplacian(term)
        k += 1
    return out


def heat_series_length(f: HeisPoly) -> int:
    """Number of nonzero terms of the exponential series for f."""
    n, term = 0, f
    while not term.is_zero():
        n += 1
        term = sublaplacian(term)
    return n


def apply_operator(op, p: HeisPoly) -> HeisPoly:
    """Realize an ordered U(g) element X^a Y^b Z^c on a polynomial (rho = 0 only)."""
    if op.alg.model.rho != 0:
        raise ValueError("polynomial realization exists only for the Heisenberg algebra")
    out = HeisPoly()
    for (a, b, c), v in op.terms.items():
        q = p
        for idx, e in ((2, c), (1, b), (0, a)):
            for _ in range(e):
                q = apply_field(idx, q)
        out = out + q * v
    return out


@dataclass(frozen=True)
class OneFormPoly:
    """f1 theta_1 + f2 theta_2 + g nu with polynomial coefficients."""

    f1: HeisPoly
    f2: HeisPoly
    g: HeisPoly

    @property
    def components(self) -> tuple:
        return (self.f1, self.f2, self.g)

    @classmethod
    def from_components(cls, comps) -> "OneFormPoly":
        return cls(*[c if isinstance(c, HeisPoly) else HeisPoly({(0, 0, 0): c}) for c in comps])

    def __add__(self, other):
        return OneFormPoly(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return OneFormPoly(*(a - b for a, b in zip(self.components, other.components)))

    def __eq__(self, other):
        return isinstance(other, OneFormPoly) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def transform(self, mat) -> "OneFormPoly":
        """Constant 3x3 matrix acting on the coefficient column."""
        comps = self.components
        return OneFormPoly(*(
            sum((comps[j] * mat[i][j] for j in range(3)), HeisPoly())
            for i in range(3)
        ))

    def covariant(self, which) -> "OneFormPoly":
        """nabla along X_i: the left-invariant coframe is parallel."""
        return OneFormPoly(*(apply_field(which, c) for c in self.components))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __str__(self):
        return f"({self.f1}, {self.f2}, {self.g})"


def pairing(a: OneFormPoly, b: OneFormPoly, eps2) -> HeisPoly:
    """<a, b> for the coefficient metric diag(1, 1, eps2)."""
    return a.f1 * b.f1 + a.f2 * b.f2 + a.g * b.g * eps2


def norm2(a: OneFormPoly, eps2) -> HeisPoly:
    return pairing(a, a, eps2)


def exterior_d(f: HeisPoly) -> OneFormPoly:
    return OneFormPoly(apply_field(0, f), apply_field(1, f), apply_field(2, f))


@lru_cache(maxsize=64)
def _box_for(eps: Fraction):
    from .pbw import box_matrix

    return box_matrix(0, eps)


def box_apply(eps, eta: OneFormPoly, box=None) -> OneFormPoly:
    """Apply the Heisenberg one-form sub-Laplacian matrix entrywise."""
    eps = as_fraction(eps)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if box is None:
        box = _box_for(eps)
    comps = eta.components
    return OneFormPoly(*(
        sum((apply_operator(box[i, j], comps[j]) for j in range(3)), HeisPoly())
        for i in range(3)
    ))


def verify_bw(eps, eta: OneFormPoly, tensors: TensorSet | None = None) -> HeisPoly:
    """Residual of the second-order Bochner-Weitzenboeck identity in G_{2 eps}.

    1/2 L |eta|^2 - <box eta, eta> - sum_i |nabla_i eta - T_i eta|^2
        - <(Ric - J*J/(2 eps)) eta, eta>

    should vanish identically. ``tensors`` lets a caller inject modified
    matrices (fault injection); by default the Heisenberg tensors are used.
    """
    eps = as_fraction(eps)
    ts = tensors if tensors is not None else tensor_set(build_model(0), eps)
    e2 = 2 * eps
    lhs = sublaplacian(norm2(eta, e2)) * HALF - pairing(box_apply(eps, eta), eta, e2)
    squares = HeisPoly()
    for i, t in enumerate(ts.twists):
        squares = squares + norm2(eta.covariant(i) - eta.transform(t), e2)
    curv = tuple(
        tuple(as_fraction(ts.ric[a][b]) - as_fraction(ts.jj[a][b]) / (2 * eps) for b in range(3))
        for a in range(3)
    )
    return lhs - squares - pairing(eta.transform(curv), eta, e2)


def random_poly(rng: np.random.Generator, max_degree: int, density: float = 0.6,
                coeff_range: int = 5) -> HeisPoly:
    """Random polynomial of total degree <= max_degree with small rational coefficients."""
    terms = {}
    for m in product(range(max_degree + 1), repeat=3):
        if sum(m) <= max_degree and rng.random() < density:
            num = int(rng.integers(-coeff_range, coeff_range + 1))
            den = int(rng.integers(1, 4))
            terms[m] = Fraction(num, den)
    return HeisPoly(terms)


def random_oneform(rng: np.random.Generator, max_degree: int) -> OneFormPoly:
    return OneFormPoly(*(random_poly(rng, max_degree) for _ in range(3)))
