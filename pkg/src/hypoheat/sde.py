"""Horizontal Brownian paths and the damped transport matrix along them.

With the left-invariant coframe parallel along horizontal paths, the damped
transport of a one-form becomes a linear matrix SDE on its coefficient column:

    dM = M (-T_x o dB^1 - T_y o dB^2 + c/2 dt),   M_0 = Id,
    c  = J*J / (2 eps) - Ric,

and E[M_t a(X_t)] represents the semigroup on one-forms applied to a.
M maps coefficients at X_t to coefficients at the starting point. Since
T_x, T_y are skew for diag(1, 1, 2 eps), exp(-T_x dB^1 - T_y dB^2) is an
isometry of that metric, which the default integrator exploits.

Randomness is counter based: step k of path p under master seed s reads
block k of the Philox4x64 stream keyed by (s, p), so every increment is a
fixed function of (seed, path, step) no matter how paths are chunked or
scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit
from scipy.linalg import expm

from .geometry import ModelSpace, curvature_bounds, tensor_set
from .groups import Realization, realization_for

SCHEMES = ("exp_splitting", "stratonovich_heun", "ito_euler")
MASK64 = (1 << 64) - 1
DEFAULT_CHUNK = 4096


class SingularTransportError(RuntimeError):
    """The transport matrix lost invertibility on some path."""


@dataclass(frozen=True)
class PathConfig:
    t_final: float = 1.0
    n_steps: int = 500
    scheme: str = "exp_splitting"
    seed: int = 0
    path_index: int = 0

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")

    @property
    def h(self) -> float:
        return self.t_final / self.n_steps


@dataclass
class PathState:
    group_point: np.ndarray
    transport: np.ndarray
    ibp_integral: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class CurvatureDrift:
    t_x: np.ndarray
    t_y: np.ndarray
    c: np.ndarray
    epsilon: float
    q: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "q", 0.5 * (self.t_x @ self.t_x + self.t_y @ self.t_y))

    @classmethod
    def from_model(cls, model: ModelSpace, eps) -> "CurvatureDrift":
        arr = tensor_set(model, eps).arrays()
        return cls(arr["t_x"], arr["t_y"], arr["c"], float(eps))

    @property
    def metric2(self) -> np.ndarray:
        return np.diag([1.0, 1.0, 2 * self.epsilon])

    def ito_drift(self) -> np.ndarray:
        """Drift of the Ito form of the transport SDE; E[M_t] = expm(t * this)."""
        return 0.5 * self.c + self.q


def second_moment(drift: CurvatureDrift, t: float) -> np.ndarray:
    """Exact E[M_t (x) M_t] as a 9x9 matrix, entry (3i+k, 3j+l) = E[M_ij M_kl].

    Ito's rule on M (x) M gives a closed linear ODE whose generator is
    D (x) I + I (x) D + sum_a A_a (x) A_a, with A_a the noise matrices and D
    the Ito drift.
    """
    d = drift.ito_drift()
    eye = np.eye(3)
    gen = np.kron(d, eye) + np.kron(eye, d)
    for a in (-drift.t_x, -drift.t_y):
        gen = gen + np.kron(a, a)
    return expm(t * gen)


def mean_norm2(drift: CurvatureDrift, t: float, alpha, weights) -> float:
    """Exact E sum_i w_i (M_t alpha)_i^2 from the second moment."""
    alpha = np.asarray(alpha, dtype=float)
    vv = (second_moment(drift, t) @ np.kron(alpha, alpha)).reshape(3, 3)
    return float(np.dot(np.asarray(weights, dtype=float), np.diag(vv)))


# -- random increments ----------------------------------------------

def _philox(seed: int, path_index: int) -> np.random.Philox:
    key = np.array([int(seed) & MASK64, int(path_index) & MASK64], dtype=np.uint64)
    return np.random.Philox(key=key)


def _normals_from_raw(raw: np.ndarray) -> np.ndarray:
    """Box-Muller on the first two 64-bit words of each block."""
    u1 = ((raw[..., 0] >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    u2 = (raw[..., 1] >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)


def path_increments(seed: int, path_index: int, n_steps: int, h: float, first_step: int = 0) -> np.ndarray:
    """(n_steps, 2) Gaussian increments of variance h for one path."""
    bg = _philox(seed, path_index)
    if first_step:
        bg.advance(first_step)
    raw = bg.random_raw(4 * n_steps).reshape(n_steps, 4)
    return _normals_from_raw(raw) * math.sqrt(h)


def sample_increments(config: PathConfig) -> np.ndarray:
    return path_increments(config.seed, config.path_index, config.n_steps, config.h)


def increment_block(seed: int, path_indices: Sequence[int], n_steps: int, h: float) -> np.ndarray:
    """(n, n_steps, 2) increments; row i is exactly path_increments(seed, path_indices[i], ...)."""
    raw = np.stack([_philox(seed, p).random_raw(4 * n_steps) for p in path_indices])
    return _normals_from_raw(raw.reshape(len(path_indices), n_steps, 4)) * math.sqrt(h)


def coarsen(db: np.ndarray, factor: int) -> np.ndarray:
    """Sum consecutive groups of fine increments: (n, steps, 2) -> (n, steps/factor, 2)."""
    n, steps, k = db.shape
    if steps % factor:
        raise ValueError("step count must be divisible by the coarsening factor")
    return db.reshape(n, steps // factor, factor, k).sum(axis=2)


# -- single-step updates ----------------------------------------------

def evolve_group(group: Realization, points: np.ndarray, db: np.ndarray) -> np.ndarray:
    return group.step(points, db)


def _noise_matrix(drift: CurvatureDrift, db: np.ndarray) -> np.ndarray:
    return -(db[:, 0, None, None] * drift.t_x + db[:, 1, None, None] * drift.t_y)


def skew_exp(w: np.ndarray) -> np.ndarray:
    """exp(W) for stacked W similar to a real 3x3 skew matrix (Rodrigues form)."""
    w2 = np.matmul(w, w)
    theta2 = np.maximum(-0.5 * np.trace(w2, axis1=1, axis2=2), 0.0)
    theta = np.sqrt(theta2)
    small = theta < 1e-6
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / safe)
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / (safe * safe))
    return np.eye(3) + a[:, None, None] * w + b[:, None, None] * w2


def evolve_transport(drift: CurvatureDrift, m: np.ndarray, db: np.ndarray, h: float,
                     scheme: str = "exp_splitting", split: Optional[np.ndarray] = None) -> np.ndarray:
    """One step of the transport SDE for stacked matrices m of shape (n, 3, 3)."""
    w = _noise_matrix(drift, db)
    if scheme == "exp_splitting":
        if split is None:
            split = expm(0.5 * drift.c * h)
        return np.matmul(np.matmul(m, skew_exp(w)), split)
    eye = np.eye(3)
    if scheme == "stratonovich_heun":
        f = w + 0.5 * drift.c * h
        # predictor M + M f, corrector average: M (I + f + f^2 / 2)
        return np.matmul(m, eye + f + 0.5 * np.matmul(f, f))
    if scheme == "ito_euler":
        return np.matmul(m, eye + w + drift.ito_drift() * h)
    raise ValueError(f"unknown scheme {scheme!r}")


def inverse_transpose_apply(m: np.ndarray, v: np.ndarray) -> tuple:
    """Solve M^T u = v for stacked 3x3 M via cofactors; returns (u, det)."""
    r0, r1, r2 = m[:, 0, :], m[:, 1, :], m[:, 2, :]
    cof = np.stack([np.cross(r1, r2), np.cross(r2, r0), np.cross(r0, r1)], axis=1)
    det = np.einsum("ij,ij->i", r0, cof[:, 0, :])
    u = np.einsum("nij,nj->ni", cof, v) / det[:, None]
    return u, det


# -- controls ------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseConstantControl:
    """Deterministic horizontal control gamma'(s): value[k] on [breaks[k], breaks[k+1])."""

    values: tuple
    breaks: tuple = (0.0,)

    @classmethod
    def constant(cls, v1: float, v2: float) -> "PiecewiseConstantControl":
        return cls(values=((float(v1), float(v2)),))

    def __call__(self, s: float) -> np.ndarray:
        k = int(np.searchsorted(np.asarray(self.breaks), s, side="right")) - 1
        return np.asarray(self.values[max(k, 0)], dtype=float)

    def is_zero(self) -> bool:
        return all(v == 0 for pair in self.values for v in pair)

    def on_grid(self, n_steps: int, h: float) -> np.ndarray:
        return np.stack([self(k * h) for k in range(n_steps)])


# -- ensembles -----------------------------------------------------------

@dataclass
class Ensemble:
    """Per-path outputs, ordered by path index."""

    points: np.ndarray
    transport: np.ndarray
    ibp_integral: np.ndarray
    control_integral: np.ndarray
    snapshots: dict
    bound_violations: int
    max_bound_ratio: float
    max_constraint_error: float
    min_abs_det: float

    @property
    def n_paths(self) -> int:
        return len(self.points)


@dataclass
class PathResult:
    endpoint: np.ndarray
    transport: np.ndarray
    ibp_integral: np.ndarray
    control_integral: float


@njit(cache=True, nogil=True)
def _mul3(a, b, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]


@njit(cache=True, nogil=True)
def _transport_kernel(db, tx, ty, split, half_c_h, ito_h, scheme, h, gam, has_control,
                      g2, rate, snap_index, check_bound):
    """Per-path transport loop; mirrors evolve_transport and inverse_transpose_apply."""
    n, steps, _ = db.shape
    n_snap = 0
    for k in range(steps):
        if snap_index[k] >= 0:
            n_snap += 1
    out = np.empty((n, 3, 3))
    snaps = np.empty((max(n_snap, 1), n, 3, 3))
    ibp = np.zeros((n, 3))
    violations = 0
    max_ratio = 0.0
    min_det = np.inf
    m = np.empty((3, 3))
    w = np.empty((3, 3))
    w2 = np.empty((3, 3))
    e = np.empty((3, 3))
    tmp = np.empty((3, 3))
    for p in range(n):
        for i in range(3):
            for j in range(3):
                m[i, j] = 1.0 if i == j else 0.0
        for k in range(steps):
            if has_control:
                v0, v1 = gam[k, 0], gam[k, 1]
                # cofactor rows r1 x r2, r2 x r0, r0 x r1 give (M^T)^{-1} = cof / det
                c00 = m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
                c01 = m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2]
                c02 = m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]
                c10 = m[2, 1] * m[0, 2] - m[2, 2] * m[0, 1]
                c11 = m[2, 2] * m[0, 0] - m[2, 0] * m[0, 2]
                c12 = m[2, 0] * m[0, 1] - m[2, 1] * m[0, 0]
                c20 = m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]
                c21 = m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]
                c22 = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
                det = m[0, 0] * c00 + m[0, 1] * c01 + m[0, 2] * c02
                if abs(det) < min_det:
                    min_det = abs(det)
                if not abs(det) > 1e-300:
                    return out, snaps, ibp, violations, max_ratio, min_det, p
                ibp[p, 0] += (c00 * v0 + c01 * v1) / det * h
                ibp[p, 1] += (c10 * v0 + c11 * v1) / det * h
                ibp[p, 2] += (c20 * v0 + c21 * v1) / det * h
            a = db[p, k, 0]
            b = db[p, k, 1]
            for i in range(3):
                for j in range(3):
                    w[i, j] = -(a * tx[i, j] + b * ty[i, j])
            if scheme == 0:
                _mul3(w, w, w2)
                theta2 = -0.5 * (w2[0, 0] + w2[1, 1] + w2[2, 2])
                if theta2 < 0.0:
                    theta2 = 0.0
                theta = np.sqrt(theta2)
                if theta < 1e-6:
                    sa = 1.0 - theta2 / 6.0
                    sb = 0.5 - theta2 / 24.0
                else:
                    sa = np.sin(theta) / theta
                    sb = (1.0 - np.cos(theta)) / (theta * theta)
                for i in range(3):
                    for j in range(3):
                        e[i, j] = (1.0 if i == j else 0.0) + sa * w[i, j] + sb * w2[i, j]
                _mul3(m, e, tmp)
                _mul3(tmp, split, m)
            elif scheme == 1:
                for i in range(3):
                    for j in range(3):
                        w[i, j] += half_c_h[i, j]
                _mul3(w, w, w2)
                for i in range(3):
                    for j in range(3):
                        e[i, j] = (1.0 if i == j else 0.0) + w[i, j] + 0.5 * w2[i, j]
                _mul3(m, e, tmp)
                m[:, :] = tmp
            else:
                for i in range(3):
                    for j in range(3):
                        e[i, j] = (1.0 if i == j else 0.0) + w[i, j] + ito_h[i, j]
                _mul3(m, e, tmp)
                m[:, :] = tmp
            if check_bound:
                limit = np.exp(0.5 * rate * (k + 1) * h)
                for j in range(3):
                    col = np.sqrt(g2[0] * m[0, j] ** 2 + g2[1] * m[1, j] ** 2 + g2[2] * m[2, j] ** 2)
                    ratio = col / (limit * np.sqrt(g2[j]))
                    if ratio > max_ratio:
                        max_ratio = ratio
                    if ratio > 1.0 + 1e-12:
                        violations += 1
            if snap_index[k] >= 0:
                snaps[snap_index[k], p] = m
        out[p] = m
    return out, snaps, ibp, violations, max_ratio, min_det, -1


def _simulate_chunk(model, group, drift, config, indices, x0, control_grid, snapshot_steps,
                    check_bound, bound_rate, transport):
    n = len(indices)
    h = config.h
    db_all = increment_block(config.seed, indices, config.n_steps, h)
    points = np.broadcast_to(x0, (n, group.ncoords)).copy()
    snap_list = sorted(snapshot_steps)
    snap_index = np.full(config.n_steps, -1, dtype=np.int64)
    for i, k in enumerate(snap_list):
        snap_index[k - 1] = i
    points, snap_pts = group.walk(points, db_all, snap_index)
    snap_points = {k: snap_pts[i] for i, k in enumerate(snap_list)}
    max_constraint = float(np.max(group.constraint_error(points)))
    ctrl = np.zeros(n) if control_grid is None else np.einsum("nkj,kj->n", db_all, control_grid)
    if not transport:
        snaps = {k: (snap_points[k], None) for k in snap_list}
        return points, None, np.zeros((n, 3)), ctrl, snaps, 0, 0.0, max_constraint, np.inf
    gam = control_grid if control_grid is not None else np.zeros((config.n_steps, 2))
    m, snap_m, ibp, violations, max_ratio, min_det, bad = _transport_kernel(
        db_all, drift.t_x, drift.t_y, expm(0.5 * drift.c * h), 0.5 * drift.c * h,
        drift.ito_drift() * h, SCHEMES.index(config.scheme), h, gam, control_grid is not None,
        np.diag(drift.metric2).copy(), bound_rate, snap_index, check_bound)
    if bad >= 0:
        raise SingularTransportError(f"transport singular on path {int(indices[bad])}")
    snaps = {k: (snap_points[k], snap_m[i]) for i, k in enumerate(snap_list)}
    return points, m, ibp, ctrl, snaps, violations, max_ratio, max_constraint, min_det


def simulate(model: ModelSpace, eps, config: PathConfig, n_paths: int,
             control: Optional[PiecewiseConstantControl] = None, x0=None,
             snapshot_times: Sequence[float] = (), check_bound: bool = False,
             workers: int = 1, chunk_size: int = DEFAULT_CHUNK, transport: bool = True) -> Ensemble:
    """Simulate paths config.path_index ... config.path_index + n_paths - 1.

    Chunks are fixed by path index, so results do not depend on ``workers``.
    """
    group = realization_for(model)
    drift = CurvatureDrift.from_model(model, eps)
    x0 = group.identity() if x0 is None else np.asarray(x0, dtype=float)
    control_grid = None
    if control is not None:
        control_grid = control.on_grid(config.n_steps, config.h)
    snapshot_steps = set()
    for t in snapshot_times:
        k = round(t / config.h)
        if abs(k * config.h - t) > 1e-9 * max(1.0, t) or not 1 <= k <= config.n_steps:
            raise ValueError(f"snapshot time {t} is not on the step grid")
        snapshot_steps.add(k)
    bound_rate = float(curvature_bounds(model).rate(eps))
    starts = range(config.path_index, config.path_index + n_paths, chunk_size)
    jobs = [np.arange(s, min(s + chunk_size, config.path_index + n_paths)) for s in starts]

    def run(idx):
        return _simulate_chunk(model, group, drift, config, idx, x0, control_grid,
                               snapshot_steps, check_bound, bound_rate, transport)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    snaps = {}
    for k in sorted(snapshot_steps):
        t = k * config.h
        snaps[t] = (np.concatenate([p[4][k][0] for p in parts]),
                    np.concatenate([p[4][k][1] for p in parts]) if transport else None)
    return Ensemble(
        points=np.concatenate([p[0] for p in parts]),
        transport=np.concatenate([p[1] for p in parts]) if transport else None,
        ibp_integral=np.concatenate([p[2] for p in parts]),
        control_integral=np.concatenate([p[3] for p in parts]),
        snapshots=snaps,
        bound_violations=sum(p[5] for p in parts),
        max_bound_ratio=max(p[6] for p in parts),
        max_constraint_error=max(p[7] for p in parts),
        min_abs_det=min(p[8] for p in parts),
    )


def run_path(model: ModelSpace, eps, config: PathConfig,
             control: Optional[PiecewiseConstantControl] = None, x0=None) -> PathResult:
    """Simulate the single path config.path_index."""
    ens = simulate(model, eps, config, 1, control=control, x0=x0)
    return PathResult(ens.points[0], ens.transport[0], ens.ibp_integral[0],
                      float(ens.control_integral[0]))


def trace_rows(model: ModelSpace, eps, config: PathConfig, x0=None) -> list:
    """Per-step (time, coords..., M entries...) rows of one path, for CSV dumps."""
    group = realization_for(model)
    drift = CurvatureDrift.from_model(model, eps)
    point = (group.identity() if x0 is None else np.asarray(x0, float))[None, :]
    m = np.eye(3)[None]
    db_all = sample_increments(config)
    split = expm(0.5 * drift.c * config.h)
    rows = [[0.0, *point[0], *m[0].ravel()]]
    for k in range(config.n_steps):
        db = db_all[k:k + 1]
        point = group.step(point, db)
        m = evolve_transport(drift, m, db, config.h, config.scheme, split=split)
        rows.append([(k + 1) * config.h, *point[0], *m[0].ravel()])
    return rows


def trace_header(model: ModelSpace) -> list:
    group = realization_for(model)
    return ["time", *group.coord_names, *[f"M{i}{j}" for i in range(3) for j in range(3)]]


def with_steps(config: PathConfig, n_steps: int) -> PathConfig:
    return replace(config, n_steps=n_steps)
