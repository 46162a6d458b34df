"""Concrete realizations of the model groups used by the path simulator.

Each realization stores points as float arrays of shape (n, ncoords), moves
them by right multiplication with exp(dB1 X + dB2 Y), and reports the
coordinate velocity of the left-invariant fields so that X_i f can be taken
exactly for polynomial f in the coordinates.

rho = 0 uses Heisenberg coordinates; rho > 0 is realized inside SU(2) (unit
quaternions) and rho < 0 inside SL(2, R), with the generators rescaled by
sqrt(|rho|) so that [X,Y]=Z, [X,Z]=-rho Y, [Y,Z]=rho X hold exactly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .geometry import ModelSpace
from .polycalc import SparsePoly


def quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of (..., 4) arrays ordered (w, i, j, k)."""
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def expm_traceless_2x2(a: np.ndarray) -> np.ndarray:
    """exp(A) for traceless (..., 2, 2) real A, using A^2 = -det(A) I."""
    s = a[..., 0, 0] ** 2 + a[..., 0, 1] * a[..., 1, 0]
    r = np.sqrt(np.abs(s))
    small = r < 1e-8
    safe = np.where(small, 1.0, r)
    c = np.where(s >= 0, np.cosh(r), np.cos(r))
    sinc = np.where(s >= 0, np.sinh(r) / safe, np.sin(r) / safe)
    c = np.where(small, 1.0 + s / 2, c)
    sinc = np.where(small, 1.0 + s / 6, sinc)
    eye = np.broadcast_to(np.eye(2), a.shape)
    return c[..., None, None] * eye + sinc[..., None, None] * a


class Realization:
    name = "abstract"
    coord_names: tuple = ()

    @property
    def ncoords(self) -> int:
        return len(self.coord_names)

    def identity(self) -> np.ndarray:
        raise NotImplementedError

    def step(self, points: np.ndarray, db: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def walk(self, points: np.ndarray, db: np.ndarray, snap_index: np.ndarray) -> tuple:
        """Run all steps of db (n, steps, 2); returns (final points, snapshots).

        snap_index[k] >= 0 stores the point after step k + 1 in that snapshot slot.
        Subclasses replace this reference loop with a compiled one.
        """
        n_snap = int(np.sum(snap_index >= 0))
        snaps = np.empty((max(n_snap, 1), len(points), self.ncoords))
        for k in range(db.shape[1]):
            points = self.step(points, db[:, k, :])
            if snap_index[k] >= 0:
                snaps[snap_index[k]] = points
        return points, snaps

    def frame_velocity(self, points: np.ndarray) -> np.ndarray:
        """(n, 3, ncoords): coordinate velocity of X, Y, Z at each point."""
        raise NotImplementedError

    def chart(self) -> tuple:
        """(x, y, z) as polynomials in the stored coordinates, first-order exact at the identity."""
        raise NotImplementedError

    def constraint_error(self, points: np.ndarray) -> np.ndarray:
        return np.zeros(len(points))

    def renormalize(self, points: np.ndarray) -> np.ndarray:
        return points

    def generator_brackets(self) -> np.ndarray:
        """Structure constants of the represented generators (for self-checks)."""
        raise NotImplementedError

    def coordinate_polys(self) -> tuple:
        return tuple(SparsePoly.variable(i, self.coord_names) for i in range(self.ncoords))


class HeisenbergRealization(Realization):
    name = "heisenberg"
    coord_names = ("x", "y", "z")

    def identity(self):
        return np.zeros(3)

    def step(self, points, db):
        # group law (x,y,z)(a,b,0) = (x+a, y+b, z + (x b - y a)/2); equals the midpoint rule
        xs, ys, zs = points[:, 0], points[:, 1], points[:, 2]
        a, b = db[:, 0], db[:, 1]
        x_mid = xs + a / 2
        y_mid = ys + b / 2
        return np.stack([xs + a, ys + b, zs + 0.5 * (x_mid * b - y_mid * a)], axis=1)

    def walk(self, points, db, snap_index):
        return _heis_walk(np.ascontiguousarray(points, dtype=np.float64), db, snap_index)

    def frame_velocity(self, points):
        n = len(points)
        v = np.zeros((n, 3, 3))
        v[:, 0, 0] = 1.0
        v[:, 0, 2] = -points[:, 1] / 2
        v[:, 1, 1] = 1.0
        v[:, 1, 2] = points[:, 0] / 2
        v[:, 2, 2] = 1.0
        return v

    def chart(self):
        return self.coordinate_polys()

    def generator_brackets(self):
        c = np.zeros((3, 3, 3))
        c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
        return c


class SU2Realization(Realization):
    """Unit quaternions; X, Y, Z = a e1, a e2, a^2 e3 with [e1,e2]=e3 cyclic."""

    name = "su2"
    coord_names = ("q0", "q1", "q2", "q3")

    def __init__(self, rho: float = 1.0):
        if not rho > 0:
            raise ValueError("SU(2) realizes only rho > 0")
        self.rho = float(rho)
        self.a = math.sqrt(self.rho)
        a = self.a
        # e1 = -k/2, e2 = -j/2, e3 = -i/2 as (w, i, j, k)
        self.gens = np.array([
            [0.0, 0.0, 0.0, -a / 2],
            [0.0, 0.0, -a / 2, 0.0],
            [0.0, -a * a / 2, 0.0, 0.0],
        ])

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def step(self, points, db):
        v = db[:, 0:1] * self.gens[0] + db[:, 1:2] * self.gens[1]
        theta = np.sqrt(np.sum(v * v, axis=1))
        safe = np.where(theta < 1e-12, 1.0, theta)
        sinc = np.where(theta < 1e-12, 1.0, np.sin(theta) / safe)
        e = v * sinc[:, None]
        e[:, 0] = np.cos(theta)
        return self.renormalize(quat_mul(points, e))

    def walk(self, points, db, snap_index):
        return _su2_walk(np.ascontiguousarray(points, dtype=np.float64), db, snap_index,
                         self.gens[0].copy(), self.gens[1].copy())

    def renormalize(self, points):
        return points / np.sqrt(np.sum(points * points, axis=1))[:, None]

    def constraint_error(self, points):
        return np.abs(np.sqrt(np.sum(points * points, axis=1)) - 1.0)

    def frame_velocity(self, points):
        return np.stack([quat_mul(points, np.broadcast_to(g, points.shape)) for g in self.gens], axis=1)

    def chart(self):
        q0, q1, q2, q3 = self.coordinate_polys()
        a, r = self.a, self.rho
        return (q3 * _rat(-2 / a), q2 * _rat(-2 / a), q1 * _rat(-2 / r))

    def generator_brackets(self):
        return _brackets_from(self.gens, lambda p, q: quat_mul(p, q) - quat_mul(q, p))


class SL2Realization(Realization):
    """SL(2, R), points stored as (g00, g01, g10, g11)."""

    name = "sl2"
    coord_names = ("g00", "g01", "g10", "g11")

    def __init__(self, rho: float = -1.0):
        if not rho < 0:
            raise ValueError("SL(2) realizes only rho < 0")
        self.rho = float(rho)
        self.a = math.sqrt(-self.rho)
        a = self.a
        self.gens = np.array([
            a / 2 * np.array([[0.0, 1.0], [1.0, 0.0]]),
            a / 2 * np.array([[1.0, 0.0], [0.0, -1.0]]),
            a * a / 2 * np.array([[0.0, -1.0], [1.0, 0.0]]),
        ])

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 1.0])

    def step(self, points, db):
        g = points.reshape(-1, 2, 2)
        a = db[:, 0, None, None] * self.gens[0] + db[:, 1, None, None] * self.gens[1]
        out = np.matmul(g, expm_traceless_2x2(a)).reshape(-1, 4)
        return self.renormalize(out)

    def walk(self, points, db, snap_index):
        return _sl2_walk(np.ascontiguousarray(points, dtype=np.float64), db, snap_index,
                         self.gens[0].reshape(4).copy(), self.gens[1].reshape(4).copy())

    def renormalize(self, points):
        det = points[:, 0] * points[:, 3] - points[:, 1] * points[:, 2]
        return points / np.sqrt(det)[:, None]

    def constraint_error(self, points):
        return np.abs(points[:, 0] * points[:, 3] - points[:, 1] * points[:, 2] - 1.0)

    def frame_velocity(self, points):
        g = points.reshape(-1, 2, 2)
        return np.stack([np.matmul(g, e).reshape(-1, 4) for e in self.gens], axis=1)

    def chart(self):
        g00, g01, g10, g11 = self.coordinate_polys()
        a, r = self.a, -self.rho
        return ((g01 + g10) * _rat(1 / a), (g00 - g11) * _rat(1 / a), (g10 - g01) * _rat(1 / r))

    def generator_brackets(self):
        flat = self.gens.reshape(3, 4)
        return _brackets_from(flat, lambda p, q: (p.reshape(2, 2) @ q.reshape(2, 2)
                                                  - q.reshape(2, 2) @ p.reshape(2, 2)).reshape(4))


# -- compiled walks; each mirrors the numpy step of its class ---------------

@njit(cache=True, nogil=True)
def _count_snaps(snap_index):
    n = 0
    for k in range(snap_index.shape[0]):
        if snap_index[k] >= 0:
            n += 1
    return max(n, 1)


@njit(cache=True, nogil=True)
def _heis_walk(points, db, snap_index):
    n, steps, _ = db.shape
    out = points.copy()
    snaps = np.empty((_count_snaps(snap_index), n, 3))
    for p in range(n):
        x, y, z = out[p, 0], out[p, 1], out[p, 2]
        for k in range(steps):
            a = db[p, k, 0]
            b = db[p, k, 1]
            z += 0.5 * ((x + a / 2) * b - (y + b / 2) * a)
            x += a
            y += b
            if snap_index[k] >= 0:
                snaps[snap_index[k], p, 0] = x
                snaps[snap_index[k], p, 1] = y
                snaps[snap_index[k], p, 2] = z
        out[p, 0], out[p, 1], out[p, 2] = x, y, z
    return out, snaps


@njit(cache=True, nogil=True)
def _su2_walk(points, db, snap_index, g0, g1):
    n, steps, _ = db.shape
    out = points.copy()
    snaps = np.empty((_count_snaps(snap_index), n, 4))
    v = np.empty(4)
    for p in range(n):
        pw, px, py, pz = out[p, 0], out[p, 1], out[p, 2], out[p, 3]
        for k in range(steps):
            for i in range(4):
                v[i] = db[p, k, 0] * g0[i] + db[p, k, 1] * g1[i]
            theta = np.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2 + v[3] ** 2)
            sinc = 1.0 if theta < 1e-12 else np.sin(theta) / theta
            qw, qx, qy, qz = np.cos(theta), v[1] * sinc, v[2] * sinc, v[3] * sinc
            nw = pw * qw - px * qx - py * qy - pz * qz
            nx = pw * qx + px * qw + py * qz - pz * qy
            ny = pw * qy - px * qz + py * qw + pz * qx
            nz = pw * qz + px * qy - py * qx + pz * qw
            r = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
            pw, px, py, pz = nw / r, nx / r, ny / r, nz / r
            if snap_index[k] >= 0:
                j = snap_index[k]
                snaps[j, p, 0], snaps[j, p, 1], snaps[j, p, 2], snaps[j, p, 3] = pw, px, py, pz
        out[p, 0], out[p, 1], out[p, 2], out[p, 3] = pw, px, py, pz
    return out, snaps


@njit(cache=True, nogil=True)
def _sl2_walk(points, db, snap_index, g0, g1):
    n, steps, _ = db.shape
    out = points.copy()
    snaps = np.empty((_count_snaps(snap_index), n, 4))
    for p in range(n):
        m00, m01, m10, m11 = out[p, 0], out[p, 1], out[p, 2], out[p, 3]
        for k in range(steps):
            a00 = db[p, k, 0] * g0[0] + db[p, k, 1] * g1[0]
            a01 = db[p, k, 0] * g0[1] + db[p, k, 1] * g1[1]
            a10 = db[p, k, 0] * g0[2] + db[p, k, 1] * g1[2]
            a11 = db[p, k, 0] * g0[3] + db[p, k, 1] * g1[3]
            s = a00 * a00 + a01 * a10
            r = np.sqrt(abs(s))
            if r < 1e-8:
                c = 1.0 + s / 2
                sinc = 1.0 + s / 6
            elif s >= 0:
                c = np.cosh(r)
                sinc = np.sinh(r) / r
            else:
                c = np.cos(r)
                sinc = np.sin(r) / r
            e00, e01, e10, e11 = c + sinc * a00, sinc * a01, sinc * a10, c + sinc * a11
            n00 = m00 * e00 + m01 * e10
            n01 = m00 * e01 + m01 * e11
            n10 = m10 * e00 + m11 * e10
            n11 = m10 * e01 + m11 * e11
            d = np.sqrt(n00 * n11 - n01 * n10)
            m00, m01, m10, m11 = n00 / d, n01 / d, n10 / d, n11 / d
            if snap_index[k] >= 0:
                j = snap_index[k]
                snaps[j, p, 0], snaps[j, p, 1], snaps[j, p, 2], snaps[j, p, 3] = m00, m01, m10, m11
        out[p, 0], out[p, 1], out[p, 2], out[p, 3] = m00, m01, m10, m11
    return out, snaps


def _rat(value: float):
    """Exact rational for the common integer-root scalings, float otherwise."""
    from fractions import Fraction

    f = Fraction(value).limit_denominator(10 ** 6)
    return f if abs(float(f) - value) < 1e-15 else value


def _brackets_from(gens: np.ndarray, bracket) -> np.ndarray:
    basis = gens.reshape(3, -1).T
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            coeffs, *_ = np.linalg.lstsq(basis, bracket(gens[i], gens[j]).reshape(-1), rcond=None)
            c[i, j] = coeffs
    return c


def realization_for(model: ModelSpace) -> Realization:
    rho = float(model.rho)
    if rho == 0:
        return HeisenbergRealization()
    if rho > 0:
        return SU2Realization(rho)
    return SL2Realization(rho)
