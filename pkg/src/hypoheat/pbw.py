"""Exact normal ordering in the enveloping algebra of the 3D model Lie algebras.

Elements are finite sums of ordered monomials X^a Y^b Z^c with Fraction
coefficients. Products are reduced with the three rewrites

    Y X -> X Y + [Y, X],   Z X -> X Z + [Z, X],   Z Y -> Y Z + [Z, Y]

which for g(rho) read YX -> XY - Z, ZX -> XZ + rho Y, ZY -> YZ - rho X.
Every rewrite either sorts an adjacent pair or lowers the word length, so
reduction terminates; the Jacobi identity gives the diamond condition on the
overlap ZYX, hence the normal form is unique.

The operator matrices built here have entries that are affine in rho and in
1/eps. A commutation residual is therefore a polynomial of degree at most one
in each of rho and 1/eps with PBW-monomial coefficients, and checking it on a
2 x 2 grid of parameter values already forces it to vanish identically. The
acceptance grid (4 values of rho, 3 of eps) over-determines this.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ._rational import as_fraction, fmt_number
from .geometry import DIM, ModelSpace, build_model, tensor_set

GENERATORS = "XYZ"


class PBWAlgebra:
    """U(g) for a constant-structure frame, with a memoized word reducer.

    ``strategy`` picks which descent of a word is rewritten first
    ("leftmost" or "rightmost"); both must give the same normal form.
    """

    def __init__(self, model, strategy: str = "leftmost"):
        if not isinstance(model, ModelSpace):
            model = build_model(as_fraction(model))
        if strategy not in ("leftmost", "rightmost"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.model = model
        self.strategy = strategy
        c = model.structure_constants()
        self._brackets = {
            (a, b): tuple((k, as_fraction(c[a][b][k])) for k in range(DIM) if c[a][b][k] != 0)
            for a in range(DIM) for b in range(DIM)
        }
        self._cache: dict = {}

    # -- construction -------------------------------------------------
    def poly(self, terms=None) -> "PBWPoly":
        return PBWPoly(self, terms or {})

    def scalar(self, value) -> "PBWPoly":
        value = as_fraction(value)
        return PBWPoly(self, {(0, 0, 0): value} if value else {})

    def gen(self, which) -> "PBWPoly":
        idx = GENERATORS.index(which) if isinstance(which, str) else int(which)
        exps = [0, 0, 0]
        exps[idx] = 1
        return PBWPoly(self, {tuple(exps): Fraction(1)})

    @property
    def X(self):
        return self.gen(0)

    @property
    def Y(self):
        return self.gen(1)

    @property
    def Z(self):
        return self.gen(2)

    @property
    def L(self):
        """Sub-Laplacian X^2 + Y^2."""
        return self.X * self.X + self.Y * self.Y

    # -- reduction ----------------------------------------------------
    def reduce_word(self, word: Sequence[int]) -> dict:
        word = tuple(word)
        hit = self._cache.get(word)
        if hit is not None:
            return hit
        descents = [p for p in range(len(word) - 1) if word[p] > word[p + 1]]
        if not descents:
            result = {(word.count(0), word.count(1), word.count(2)): Fraction(1)}
        else:
            p = descents[0] if self.strategy == "leftmost" else descents[-1]
            i, j = word[p], word[p + 1]
            result = dict(self.reduce_word(word[:p] + (j, i) + word[p + 2:]))
            for k, coeff in self._brackets[(i, j)]:
                for mono, v in self.reduce_word(word[:p] + (k,) + word[p + 2:]).items():
                    _accumulate(result, mono, coeff * v)
        self._cache[word] = result
        return result

    def monomial_product(self, m1: tuple, m2: tuple) -> dict:
        return self.reduce_word(_word(m1) + _word(m2))

    def normal_form(self, expr) -> "PBWPoly":
        """Normal form of a word ("ZYX" or (2, 1, 0)), a list of (coeff, word), or a PBWPoly."""
        if isinstance(expr, PBWPoly):
            return expr
        if isinstance(expr, str):
            return PBWPoly(self, self.reduce_word(_parse_word(expr)))
        expr = list(expr)
        if expr and all(isinstance(x, int) for x in expr):
            return PBWPoly(self, self.reduce_word(expr))
        out: dict = {}
        for coeff, word in expr:
            w = _parse_word(word) if isinstance(word, str) else tuple(word)
            for mono, v in self.reduce_word(w).items():
                _accumulate(out, mono, as_fraction(coeff) * v)
        return PBWPoly(self, out)

    def commutator(self, a: "PBWPoly", b: "PBWPoly") -> "PBWPoly":
        return a * b - b * a


def _word(mono: tuple) -> tuple:
    a, b, c = mono
    return (0,) * a + (1,) * b + (2,) * c


def _parse_word(s: str) -> tuple:
    return tuple(GENERATORS.index(ch) for ch in s.replace("*", "").replace(" ", ""))


def _accumulate(terms: dict, mono: tuple, value: Fraction) -> None:
    v = terms.get(mono, 0) + value
    if v:
        terms[mono] = v
    else:
        terms.pop(mono, None)


class PBWPoly:
    """Normal-ordered element of U(g); zero coefficients are never stored."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: PBWAlgebra, terms: dict):
        self.alg = alg
        self.terms = {m: as_fraction(v) for m, v in terms.items() if v}

    def _coerce(self, other) -> "PBWPoly":
        if isinstance(other, PBWPoly):
            return other
        return self.alg.scalar(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, v in other.terms.items():
            _accumulate(out, m, v)
        return PBWPoly(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return PBWPoly(self.alg, {m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PBWPoly):
            s = as_fraction(other)
            return PBWPoly(self.alg, {m: s * v for m, v in self.terms.items()})
        out: dict = {}
        for m1, v1 in self.terms.items():
            for m2, v2 in other.terms.items():
                for m, v in self.alg.monomial_product(m1, m2).items():
                    _accumulate(out, m, v1 * v2 * v)
        return PBWPoly(self.alg, out)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self * (1 / as_fraction(other))

    def __pow__(self, n: int):
        out = self.alg.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PBWPoly):
            return self.terms == other.terms
        try:
            return self.terms == self.alg.scalar(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def to_terms(self) -> list:
        """Sorted [[a, b, c, "p/q"], ...] rendering used in JSON output."""
        return [[*m, fmt_number(v)] for m, v in sorted(self.terms.items())]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, v in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), [-e for e in kv[0]])):
            factors = [f"{g}^{e}" if e > 1 else g for g, e in zip(GENERATORS, mono) if e]
            body = "*".join(factors)
            mag = abs(v)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            parts.append(("- " if v < 0 else "+ ") + text)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    __repr__ = __str__


@dataclass(frozen=True)
class OpMatrix:
    """3x3 matrix of U(g) elements acting on coefficient columns (f1, f2, g)."""

    entries: tuple

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def apply(self, column: Sequence[PBWPoly]) -> tuple:
        return tuple(
            sum((self.entries[i][j] * column[j] for j in range(DIM)), column[0].alg.scalar(0))
            for i in range(DIM)
        )

    def to_terms(self) -> list:
        return [[e.to_terms() for e in row] for row in self.entries]


def _alg_for(model_or_rho) -> PBWAlgebra:
    if isinstance(model_or_rho, PBWAlgebra):
        return model_or_rho
    return PBWAlgebra(model_or_rho)


def box_matrix(rho, eps, infinity: bool = False) -> OpMatrix:
    """Operator matrix of the one-form sub-Laplacian.

    Built from the tensors rather than typed in: with a parallel coframe,

        box_eps = L Id - 2 sum_i T_i X_i + sum_i T_i^2 + (1/(2 eps)) J*J - Ric

    and box_inf = L Id + 2 Jfrak - Ric, where Jfrak places
    sum_j gamma[i][j] X_j in row i of the vertical column.
    """
    alg = _alg_for(rho)
    eps = as_fraction(eps)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ts = tensor_set(alg.model, eps)
    gens = (alg.X, alg.Y)
    L = alg.L
    rows = [[alg.scalar(0) for _ in range(DIM)] for _ in range(DIM)]
    for i in range(DIM):
        rows[i][i] = rows[i][i] + L
    if infinity:
        model = alg.model
        for i in range(2):
            for j in range(2):
                rows[i][2] = rows[i][2] + gens[j] * (2 * as_fraction(model.gamma[i][j][0]))
        for a in range(DIM):
            for b in range(DIM):
                rows[a][b] = rows[a][b] - as_fraction(ts.ric[a][b])
    else:
        for a in range(DIM):
            for b in range(DIM):
                const = as_fraction(ts.c[a][b])
                for gen, t in zip(gens, ts.twists):
                    const += sum(as_fraction(t[a][r]) * as_fraction(t[r][b]) for r in range(DIM))
                    rows[a][b] = rows[a][b] - gen * (2 * as_fraction(t[a][b]))
                rows[a][b] = rows[a][b] + const
    return OpMatrix(tuple(tuple(r) for r in rows))


def box_infinity(rho) -> OpMatrix:
    return box_matrix(rho, 1, infinity=True)


@dataclass(frozen=True)
class CommutationReport:
    rho: Fraction
    eps: Fraction
    residuals: tuple

    @property
    def passed(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def to_dict(self) -> dict:
        return {
            "rho": fmt_number(self.rho),
            "eps": fmt_number(self.eps),
            "residuals": [r.to_terms() for r in self.residuals],
            "pass": self.passed,
        }


def verify_commutation(rho, eps, box: OpMatrix | None = None, infinity: bool = False) -> CommutationReport:
    """Residuals D_i L - sum_j box_ij D_j for D = (X, Y, Z); all zero when d L = box d."""
    alg = _alg_for(rho)
    if box is None:
        box = box_matrix(alg, eps, infinity=infinity)
    column = (alg.X, alg.Y, alg.Z)
    L = alg.L
    images = box.apply(column)
    residuals = tuple(column[i] * L - images[i] for i in range(DIM))
    return CommutationReport(rho=as_fraction(alg.model.rho), eps=as_fraction(eps), residuals=residuals)


def jacobi_residuals(alg: PBWAlgebra, elements: Iterable[PBWPoly]) -> list:
    els = list(elements)
    out = []
    for a in els:
        for b in els:
            for c in els:
                br = alg.commutator
                out.append(br(br(a, b), c) + br(br(b, c), a) + br(br(c, a), b))
    return out
