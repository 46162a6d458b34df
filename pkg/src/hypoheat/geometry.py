"""Adapted-frame structure constants and the tensors derived from them.

Frame order is (X, Y, Z) with dual coframe (theta_1, theta_2, nu); a one-form
f1*theta_1 + f2*theta_2 + g*nu is the column vector (f1, f2, g). All index
arithmetic below is 0-based: horizontal indices 0, 1 and the single vertical
index 0 (slot 2 of a coefficient vector).

Structure constants follow

    [X_i, X_j] = sum_l omega[i][j][l] X_l + sum_m gamma[i][j][m] Z_m
    [X_i, Z_m] = sum_l delta[i][m][l] X_l

and every derived matrix is exact (Fraction entries) whenever the inputs are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ._rational import Number, as_number, fmt_number

Matrix = tuple  # 3x3 tuple of tuples

D, H = 2, 1
DIM = D + H


def _zeros(*shape):
    if len(shape) == 1:
        return [Fraction(0)] * shape[0]
    return [_zeros(*shape[1:]) for _ in range(shape[0])]


def _freeze(nested):
    if isinstance(nested, (list, tuple)):
        return tuple(_freeze(x) for x in nested)
    return nested


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][r] * b[r][j] for r in range(k)), Fraction(0)) for j in range(m))
        for i in range(n)
    )


def mat_add(a: Matrix, b: Matrix, scale=1) -> Matrix:
    return tuple(tuple(x + scale * y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Matrix, s) -> Matrix:
    return tuple(tuple(s * x for x in row) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def diag(*values) -> Matrix:
    n = len(values)
    return tuple(tuple(values[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))


def metric(eps) -> Matrix:
    """Coefficient metric diag(1, 1, eps) on one-forms; pass 2*eps for G_{2eps}."""
    return diag(Fraction(1), Fraction(1), as_number(eps))


def to_array(a: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a], dtype=float)


@dataclass(frozen=True)
class ModelSpace:
    rho: Number
    gamma: tuple
    delta: tuple
    omega: tuple
    name: str = "custom"
    d: int = D
    h: int = H

    def __post_init__(self):
        problems = _structure_problems(self.gamma, self.delta, self.omega)
        if problems:
            raise ValueError("invalid structure constants: " + "; ".join(problems))

    @classmethod
    def from_structure(cls, gamma, delta, omega=None, rho=None, name="custom") -> "ModelSpace":
        """Wrap user-supplied constant structure constants (d=2, h=1)."""
        conv = lambda nested: _freeze(
            [conv(x) for x in nested] if isinstance(nested, (list, tuple)) else as_number(nested)
        )
        gamma = conv(gamma)
        delta = conv(delta)
        omega = conv(omega) if omega is not None else _freeze(_zeros(D, D, D))
        return cls(rho=as_number(rho) if rho is not None else float("nan"),
                   gamma=gamma, delta=delta, omega=omega, name=name)

    def structure_constants(self) -> tuple:
        """c[a][b][k] with [E_a, E_b] = sum_k c[a][b][k] E_k over the full frame."""
        c = _zeros(DIM, DIM, DIM)
        for i, j in product(range(D), repeat=2):
            for l in range(D):
                c[i][j][l] = self.omega[i][j][l]
            for m in range(H):
                c[i][j][D + m] = self.gamma[i][j][m]
        for i in range(D):
            for m in range(H):
                for l in range(D):
                    c[i][D + m][l] = self.delta[i][m][l]
                    c[D + m][i][l] = -self.delta[i][m][l]
        return _freeze(c)

    def bracket(self, a: int, b: int) -> tuple:
        """Coefficients of [E_a, E_b] in the frame (X, Y, Z)."""
        return self.structure_constants()[a][b]

    def jacobi_residual(self) -> list:
        """All coefficients of [[A,B],C] + [[B,C],A] + [[C,A],B] over basis triples."""
        c = self.structure_constants()
        out = []
        for a, b, e in product(range(DIM), repeat=3):
            for l in range(DIM):
                s = 0
                for k in range(DIM):
                    s += c[a][b][k] * c[k][e][l] + c[b][e][k] * c[k][a][l] + c[e][a][k] * c[k][b][l]
                out.append(s)
        return out

    @property
    def is_heisenberg(self) -> bool:
        return self.name == "heisenberg"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rho": fmt_number(self.rho),
            "gamma": _fmt_nested(self.gamma),
            "delta": _fmt_nested(self.delta),
            "omega": _fmt_nested(self.omega),
        }


def _fmt_nested(x):
    if isinstance(x, tuple):
        return [_fmt_nested(y) for y in x]
    return fmt_number(x)


def _structure_problems(gamma, delta, omega) -> list:
    problems = []
    for i, j in product(range(D), repeat=2):
        for m in range(H):
            if gamma[i][j][m] != -gamma[j][i][m]:
                problems.append(f"gamma not antisymmetric at ({i},{j},{m})")
        for l in range(D):
            if omega[i][j][l] != -omega[j][i][l]:
                problems.append(f"omega not antisymmetric at ({i},{j},{l})")
    for i, l in product(range(D), repeat=2):
        for m in range(H):
            if delta[i][m][l] != -delta[l][m][i]:
                problems.append(f"delta^{l}_{i}{m} != -delta^{i}_{l}{m}")
    return problems


def _model_name(rho) -> str:
    if rho == 0:
        return "heisenberg"
    if rho == 1:
        return "su2"
    if rho == -1:
        return "sl2"
    return f"grho:{fmt_number(rho)}"


def build_model(rho) -> ModelSpace:
    """The 3D model space with [X,Y]=Z, [X,Z]=-rho*Y, [Y,Z]=rho*X."""
    rho = as_number(rho)
    gamma = _zeros(D, D, H)
    gamma[0][1][0] = Fraction(1)
    gamma[1][0][0] = Fraction(-1)
    delta = _zeros(D, H, D)
    delta[0][0][1] = -rho
    delta[1][0][0] = rho
    return ModelSpace(rho=rho, gamma=_freeze(gamma), delta=_freeze(delta),
                      omega=_freeze(_zeros(D, D, D)), name=_model_name(rho))


def parse_model(text: str) -> ModelSpace:
    """Parse the CLI form heisenberg|su2|sl2|grho:<rho>."""
    s = text.strip().lower()
    named = {"heisenberg": 0, "su2": 1, "sl2": -1}
    if s in named:
        return build_model(named[s])
    if s.startswith("grho:"):
        return build_model(s[len("grho:"):])
    raise ValueError(f"unknown model {text!r}; expected heisenberg|su2|sl2|grho:<rho>")


def ric_from_frame(model: ModelSpace) -> Matrix:
    """Symmetrized horizontal Ricci matrix on coefficient vectors.

    For constant structure constants only the gamma*delta term survives:
    rho_kl = sum_{j,m} gamma[k][j][m] * delta[j][m][l].
    """
    r = _zeros(D, D)
    for k, l in product(range(D), repeat=2):
        for j in range(D):
            for m in range(H):
                r[k][l] += model.gamma[k][j][m] * model.delta[j][m][l]
    out = _zeros(DIM, DIM)
    for k, l in product(range(D), repeat=2):
        # acting on f_k theta_k gives coefficient on theta_l: row l, column k
        out[l][k] = (r[k][l] + r[l][k]) / 2
    return _freeze(out)


def j_matrices(model: ModelSpace) -> list:
    """J_{Z_m} on coefficient vectors: theta_i -> -sum_j gamma[i][j][m] theta_j."""
    mats = []
    for m in range(H):
        jm = _zeros(DIM, DIM)
        for i, j in product(range(D), repeat=2):
            jm[j][i] = -model.gamma[i][j][m]
        mats.append(_freeze(jm))
    return mats


def torsion_twist(model: ModelSpace, i: int, eps) -> Matrix:
    """Matrix of the twist map along X_i on coefficient vectors (f, g)."""
    eps = as_number(eps)
    t = _zeros(DIM, DIM)
    for j in range(D):
        for m in range(H):
            t[j][D + m] += model.gamma[i][j][m]
            t[D + m][j] -= model.gamma[i][j][m] / (2 * eps)
    return _freeze(t)


@dataclass(frozen=True)
class TensorSet:
    epsilon: Number
    ric: Matrix
    jj: Matrix
    t_x: Matrix
    t_y: Matrix
    c: Matrix = field(init=False)

    def __post_init__(self):
        c = mat_add(mat_scale(self.jj, 1 / (2 * self.epsilon)), self.ric, scale=-1)
        object.__setattr__(self, "c", c)

    @property
    def twists(self) -> tuple:
        return (self.t_x, self.t_y)

    def arrays(self) -> dict:
        return {k: to_array(getattr(self, k)) for k in ("ric", "jj", "t_x", "t_y", "c")}

    def to_dict(self) -> dict:
        out = {"epsilon": fmt_number(self.epsilon)}
        for k in ("ric", "jj", "t_x", "t_y", "c"):
            out[k] = _fmt_nested(getattr(self, k))
        return out


def tensor_set(model: ModelSpace, epsilon) -> TensorSet:
    eps = as_number(epsilon)
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    jj = _freeze(_zeros(DIM, DIM))
    for jm in j_matrices(model):
        jj = mat_add(jj, mat_mul(transpose(jm), jm))
    return TensorSet(
        epsilon=eps,
        ric=ric_from_frame(model),
        jj=jj,
        t_x=torsion_twist(model, 0, eps),
        t_y=torsion_twist(model, 1, eps),
    )


def is_skew(a: Matrix, g: Matrix) -> bool:
    """True when a^T g + g a vanishes exactly (or to 1e-12 for float entries)."""
    r = mat_add(mat_mul(transpose(a), g), mat_mul(g, a))
    return all(abs(x) <= (0 if isinstance(x, Fraction) else 1e-12) for row in r for x in row)


def _sym2_eigs(a, b, c):
    """Eigenvalues (lo, hi) of [[a, b], [b, c]]; exact when the root is rational."""
    mean = (a + c) / 2
    disc = ((a - c) / 2) ** 2 + b * b
    if isinstance(disc, Fraction):
        num, den = disc.numerator, disc.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            root = Fraction(rn, rd)
            return mean - root, mean + root
    root = math.sqrt(float(disc))
    return float(mean) - root, float(mean) + root


@dataclass(frozen=True)
class CurvatureBounds:
    k: Number
    kappa: Number
    rho1: Number
    rho2: Number

    def rate(self, eps) -> Number:
        """K + kappa/(2 eps), the exponent constant of the pathwise transport bound."""
        return self.k + self.kappa / (2 * as_number(eps))

    def optimal_epsilon(self) -> Number:
        if not self.rho1 > 0:
            raise ValueError("optimal epsilon needs a positive Ricci lower bound")
        return (self.kappa + self.rho2) / self.rho1

    def decay_rate(self) -> Number:
        return self.rho1 * self.rho2 / (self.kappa + self.rho2)

    def to_dict(self) -> dict:
        return {k: fmt_number(getattr(self, k)) for k in ("k", "kappa", "rho1", "rho2")}


def torsion_form(model: ModelSpace, eta) -> Number:
    """1/4 sum_{l,j} <T(theta_l, theta_j), eta>^2 for a vertical covector eta."""
    total = 0
    for l, j in product(range(D), repeat=2):
        pairing = sum(-model.gamma[l][j][m] * eta[m] for m in range(H))
        total += pairing * pairing
    return total / 4


def curvature_bounds(model: ModelSpace) -> CurvatureBounds:
    ric = ric_from_frame(model)
    lo, _ = _sym2_eigs(ric[0][0], ric[0][1], ric[1][1])
    jj = tensor_set(model, 1).jj
    _, kappa = _sym2_eigs(jj[0][0], jj[0][1], jj[1][1])
    # unit sphere of a rank-one vertical space is {+nu, -nu}
    rho2 = min(torsion_form(model, (s,)) for s in (Fraction(1), Fraction(-1)))
    zero = Fraction(0)
    k = max(zero, -lo) if isinstance(lo, Fraction) else max(0.0, -lo)
    return CurvatureBounds(k=k, kappa=kappa, rho1=lo, rho2=rho2)


def yang_mills_check(model: ModelSpace) -> bool:
    """Horizontal divergence sum_i X_i gamma[i][j][m] of the torsion.

    ModelSpace only stores constant structure constants, so every derivative
    vanishes; frames with varying constants are not representable.
    """
    if not isinstance(model, ModelSpace):
        raise NotImplementedError("only constant-structure frames are supported")
    divergence = [[0 for _ in range(H)] for _ in range(D)]
    return all(v == 0 for row in divergence for v in row)
