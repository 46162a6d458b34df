"""Monte Carlo estimators for P_t f, dP_t f and the functional inequalities.

Error bars come from batch means over a fixed, index-ordered partition of the
paths, with compensated summation inside each batch, so every number is a
deterministic function of (seed, n_paths, batches) and not of scheduling.

Two-sided checks share one path ensemble (common random numbers). Equalities
use the batch SE of the per-path difference; inequalities combine the two
sides' SEs in quadrature.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._rational import as_fraction, fmt_number
from .functions import TestFunction, get_function
from .geometry import ModelSpace, curvature_bounds
from .groups import HeisenbergRealization, realization_for
from .polycalc import exterior_d, heat_apply
from .sde import (
    Ensemble,
    PathConfig,
    PiecewiseConstantControl,
    coarsen,
    increment_block,
    simulate,
)

SE_MULTIPLIER = 4.0
RATE_DEGENERATE = 1e-12
GUARD_FLOOR = 1e-30
GUARD_MAX_FRACTION = 1e-3


@dataclass(frozen=True)
class MCConfig:
    n_paths: int = 100_000
    seed: int = 0
    batches: int = 40
    path: PathConfig = PathConfig()
    workers: int = 1

    def __post_init__(self):
        if not self.n_paths >= self.batches >= 2:
            raise ValueError("need n_paths >= batches >= 2")

    def path_for(self, t: float, n_steps: Optional[int] = None) -> PathConfig:
        return replace(self.path, t_final=float(t), seed=self.seed,
                       n_steps=self.path.n_steps if n_steps is None else int(n_steps))


# -- batch statistics --------------------------------------------------------

def batch_slices(n: int, batches: int) -> list:
    edges = np.linspace(0, n, batches + 1).round().astype(int)
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def _fsum_mean(a: np.ndarray) -> np.ndarray:
    flat = a.reshape(len(a), -1)
    return np.array([math.fsum(flat[:, j]) / len(a) for j in range(flat.shape[1])]).reshape(a.shape[1:])


def batch_mean(samples: np.ndarray, batches: int) -> tuple:
    """(mean, se) of per-path samples of shape (n,) or (n, k)."""
    samples = np.asarray(samples, dtype=float)
    means = np.stack([_fsum_mean(samples[s]) for s in batch_slices(len(samples), batches)])
    return _fsum_mean(samples), _spread(means)


def batch_statistic(samples: np.ndarray, batches: int, fn) -> tuple:
    """fn on the full sample, SE from the spread of fn over the batches."""
    full = fn(samples)
    per = np.array([fn(samples[s]) for s in batch_slices(len(samples), batches)])
    return full, _spread(per)


def _spread(per_batch: np.ndarray) -> np.ndarray:
    b = len(per_batch)
    centre = _fsum_mean(per_batch)
    dev = per_batch - centre
    return np.sqrt(_fsum_mean(dev * dev) * b / (b - 1) / b)


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    value: np.ndarray
    std_error: np.ndarray
    n_paths: int
    runtime: float = field(default=0.0, compare=False)
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "value": np.atleast_1d(self.value).tolist(),
            "std_error": np.atleast_1d(self.std_error).tolist(),
            "n_paths": self.n_paths,
        }

    def agrees_with(self, target, k: float = SE_MULTIPLIER) -> bool:
        diff = np.abs(np.atleast_1d(self.value) - np.asarray(target, dtype=float))
        return bool(np.all(diff <= k * np.atleast_1d(self.std_error)))


@dataclass(frozen=True)
class InequalityReport:
    """lhs <= rhs (kind "inequality") or lhs == rhs (kind "equality").

    ``se`` is the combined standard error entering the pass rule; ``valid``
    turns false when a run-level guard trips. An optional analytic
    ``anchor`` for the lhs is tested against ``lhs_se``.
    """

    name: str
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    se: float
    kind: str = "inequality"
    constants: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    valid: bool = True
    anchor: Optional[float] = None
    runtime: float = field(default=0.0, compare=False)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def anchor_ok(self) -> bool:
        if self.anchor is None:
            return True
        return abs(self.lhs - self.anchor) <= SE_MULTIPLIER * self.lhs_se

    @property
    def passed(self) -> bool:
        if not self.valid or not self.anchor_ok:
            return False
        if self.kind == "equality":
            return abs(self.margin) <= SE_MULTIPLIER * self.se
        return self.margin + SE_MULTIPLIER * self.se >= 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "rhs_se": self.rhs_se,
            "se": self.se,
            "margin": self.margin,
            "anchor": self.anchor,
            "valid": self.valid,
            "pass": self.passed,
            "constants": {k: _plain(v) for k, v in self.constants.items()},
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(v):
    if isinstance(v, (Fraction,)) or (hasattr(v, "numerator") and not isinstance(v, (bool, int, float))):
        return fmt_number(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_plain(u) for u in v]
    if isinstance(v, dict):
        return {k: _plain(u) for k, u in v.items()}
    return v


# -- helpers ---------------------------------------------------------------

def _fn(f) -> TestFunction:
    return f if isinstance(f, TestFunction) else get_function(f)


def _start(group, x0):
    return group.identity() if x0 is None else np.asarray(x0, dtype=float)


def run_ensemble(model: ModelSpace, eps, t: float, mc: MCConfig, x0=None, **kw) -> Ensemble:
    return simulate(model, float(eps), mc.path_for(t), mc.n_paths, x0=x0, workers=mc.workers, **kw)


def _check_ensemble(ens: Ensemble, mc: MCConfig, need_transport: bool = False) -> Ensemble:
    if len(ens.points) != mc.n_paths:
        raise ValueError("precomputed ensemble does not match n_paths")
    if need_transport and ens.transport is None:
        raise ValueError("this estimator needs the transport matrices")
    return ens


def rate_factor(rate: float, t: float) -> float:
    """(e^{rate t} - 1) / rate, with the limit t for a vanishing rate."""
    if abs(rate) < RATE_DEGENERATE:
        return float(t)
    return math.expm1(rate * t) / rate


def _is_heisenberg_poly(model: ModelSpace, f: TestFunction) -> bool:
    return model.rho == 0 and f.chart_poly is not None


def _origin_exact(group, x0):
    return [Fraction(0)] * 3 if x0 is None else [as_fraction(v) for v in np.asarray(x0, float)]


def _metric_norm(v: np.ndarray, eps2: float) -> np.ndarray:
    return np.sqrt(v[..., 0] ** 2 + v[..., 1] ** 2 + eps2 * v[..., 2] ** 2)


def endpoint_grads(model: ModelSpace, f, ens: Ensemble) -> np.ndarray:
    group = realization_for(model)
    return _fn(f).frame_grad(group, ens.points)


# -- estimators --------------------------------------------------------------

def estimate_ptf(model: ModelSpace, f, x0=None, t: float = 1.0, mc: MCConfig = MCConfig(),
                 ensemble: Optional[Ensemble] = None) -> EstimateReport:
    start = time.perf_counter()
    f = _fn(f)
    ens = _check_ensemble(ensemble, mc) if ensemble is not None else \
        run_ensemble(model, 1, t, mc, x0=x0, transport=False)
    vals = f.value(realization_for(model), ens.points)
    mean, se = batch_mean(vals, mc.batches)
    return EstimateReport(float(mean), float(se), mc.n_paths, time.perf_counter() - start, f"P_t {f.name}")


def dptf_samples(model: ModelSpace, f, ens: Ensemble) -> np.ndarray:
    """Per-path M_t df(X_t), frame coefficients at the start point."""
    grads = endpoint_grads(model, f, ens)
    return np.einsum("nij,nj->ni", ens.transport, grads)


def estimate_dptf(model: ModelSpace, eps, f, x0=None, t: float = 1.0, mc: MCConfig = MCConfig(),
                  ensemble: Optional[Ensemble] = None) -> EstimateReport:
    start = time.perf_counter()
    ens = _check_ensemble(ensemble, mc, True) if ensemble is not None else \
        run_ensemble(model, eps, t, mc, x0=x0)
    mean, se = batch_mean(dptf_samples(model, f, ens), mc.batches)
    return EstimateReport(mean, se, mc.n_paths, time.perf_counter() - start, f"dP_t {_fn(f).name}")


def dptf_oracle(f, x0=None, t=1) -> tuple:
    """Exact frame coefficients of d(P_t f) on the Heisenberg group."""
    form = exterior_d(heat_apply(t, _fn(f).heis_poly()))
    point = _origin_exact(None, x0)
    return tuple(c.exact_eval(point) for c in form.components)


@dataclass(frozen=True)
class EpsSweepReport:
    eps_values: tuple
    estimates: tuple
    diffs: tuple
    diff_se: tuple
    reference_index: int = 0

    @property
    def passed(self) -> bool:
        return all(np.all(np.abs(d) <= SE_MULTIPLIER * s) for d, s in zip(self.diffs, self.diff_se))

    def to_dict(self) -> dict:
        return {
            "eps_values": [_plain(e) for e in self.eps_values],
            "estimates": [e.to_dict() for e in self.estimates],
            "diffs": [np.asarray(d).tolist() for d in self.diffs],
            "diff_se": [np.asarray(s).tolist() for s in self.diff_se],
            "pass": self.passed,
        }


def dptf_eps_sweep(model: ModelSpace, f, eps_values: Sequence, x0=None, t: float = 1.0,
                   mc: MCConfig = MCConfig(), reference_index: int = 0) -> EpsSweepReport:
    """dP_t f at several eps on common random numbers; paired differences to the reference."""
    samples, estimates = [], []
    for eps in eps_values:
        start = time.perf_counter()
        ens = run_ensemble(model, eps, t, mc, x0=x0)
        s = dptf_samples(model, f, ens)
        mean, se = batch_mean(s, mc.batches)
        samples.append(s)
        estimates.append(EstimateReport(mean, se, mc.n_paths, time.perf_counter() - start,
                                        f"dP_t {_fn(f).name} eps={eps}"))
    ref = samples[reference_index]
    diffs, ses = [], []
    for i, s in enumerate(samples):
        if i == reference_index:
            continue
        d, se = batch_mean(s - ref, mc.batches)
        diffs.append(d)
        ses.append(se)
    return EpsSweepReport(tuple(eps_values), tuple(estimates), tuple(diffs), tuple(ses), reference_index)


# -- inequality checkers ------------------------------------------------------

def _constants(model: ModelSpace, eps, t) -> dict:
    b = curvature_bounds(model)
    rate = float(b.rate(eps))
    return {"K": b.k, "kappa": b.kappa, "eps": as_fraction(eps) if not isinstance(eps, float) else eps,
            "t": t, "rate": rate}


def check_gradient_bound(model: ModelSpace, eps, f, x0=None, t: float = 1.0, mc: MCConfig = MCConfig(),
                         ensemble: Optional[Ensemble] = None) -> InequalityReport:
    start = time.perf_counter()
    f = _fn(f)
    consts = _constants(model, eps, t)
    eps2 = 2 * float(eps)
    ens = _check_ensemble(ensemble, mc) if ensemble is not None else \
        run_ensemble(model, eps, t, mc, x0=x0, transport=not _is_heisenberg_poly(model, f))
    diag = {}
    if _is_heisenberg_poly(model, f):
        v = np.array([float(c) for c in dptf_oracle(f, x0, t)])
        lhs, lhs_se = float(_metric_norm(v, eps2)), 0.0
        diag["lhs_source"] = "oracle"
    else:
        if ens.transport is None:
            raise ValueError("gradient bound needs the transport off the Heisenberg oracle")
        s = dptf_samples(model, f, ens)
        v, _ = batch_mean(s, mc.batches)
        lhs, lhs_se = batch_statistic(s, mc.batches, lambda a: float(_metric_norm(_fsum_mean(a), eps2)))
        lhs, lhs_se = float(lhs), float(lhs_se)
        diag["lhs_source"] = "monte_carlo"
    diag["dptf"] = v
    grads = endpoint_grads(model, f, ens)
    factor = math.exp(consts["rate"] * t / 2)
    r, r_se = batch_mean(_metric_norm(grads, eps2), mc.batches)
    consts["factor"] = factor
    rhs, rhs_se = factor * float(r), factor * float(r_se)
    return InequalityReport(f"gradient_bound[{f.name}]", lhs, lhs_se, rhs, rhs_se,
                            math.hypot(lhs_se, rhs_se), "inequality", consts, diag,
                            runtime=time.perf_counter() - start)


def _grad_bracket(model, f, ens, eps, mc) -> tuple:
    grads = endpoint_grads(model, f, ens)
    vals = grads[:, 0] ** 2 + grads[:, 1] ** 2 + 2 * float(eps) * grads[:, 2] ** 2
    m, se = batch_mean(vals, mc.batches)
    return float(m), float(se)


def _variance(a: np.ndarray) -> float:
    m = _fsum_mean(a)
    return float(_fsum_mean(a * a) - m * m)


def check_poincare(model: ModelSpace, eps, f, x0=None, t: float = 1.0, mc: MCConfig = MCConfig(),
                   ensemble: Optional[Ensemble] = None) -> InequalityReport:
    start = time.perf_counter()
    f = _fn(f)
    consts = _constants(model, eps, t)
    ens = _check_ensemble(ensemble, mc) if ensemble is not None else \
        run_ensemble(model, eps, t, mc, x0=x0, transport=False)
    diag = {}
    if _is_heisenberg_poly(model, f):
        p = f.heis_poly()
        point = _origin_exact(None, x0)
        var = heat_apply(t, p * p).exact_eval(point) - heat_apply(t, p).exact_eval(point) ** 2
        lhs, lhs_se = float(var), 0.0
        diag["lhs_exact"] = var
        diag["lhs_source"] = "oracle"
    else:
        vals = f.value(realization_for(model), ens.points)
        lhs, lhs_se = batch_statistic(vals, mc.batches, _variance)
        lhs, lhs_se = float(lhs), float(lhs_se)
        diag["lhs_source"] = "monte_carlo"
    factor = rate_factor(consts["rate"], t)
    consts["factor"] = factor
    b, b_se = _grad_bracket(model, f, ens, eps, mc)
    return InequalityReport(f"poincare[{f.name}]", lhs, lhs_se, factor * b, factor * b_se,
                            math.hypot(lhs_se, factor * b_se), "inequality", consts, diag,
                            runtime=time.perf_counter() - start)


def _entropy(a: np.ndarray) -> float:
    sq = a * a
    mean_sq = float(_fsum_mean(sq))
    return float(_fsum_mean(sq * np.log(sq))) - mean_sq * math.log(mean_sq)


def check_logsobolev(model: ModelSpace, eps, f, x0=None, t: float = 1.0, mc: MCConfig = MCConfig(),
                     ensemble: Optional[Ensemble] = None) -> InequalityReport:
    start = time.perf_counter()
    f = _fn(f)
    consts = _constants(model, eps, t)
    ens = _check_ensemble(ensemble, mc) if ensemble is not None else \
        run_ensemble(model, eps, t, mc, x0=x0, transport=False)
    vals = f.value(realization_for(model), ens.points)
    keep = vals * vals >= GUARD_FLOOR
    rejected = int(np.count_nonzero(~keep))
    valid = rejected <= GUARD_MAX_FRACTION * len(vals)
    diag = {"guard_rejections": rejected}
    if not valid:
        diag["error"] = f"{rejected} of {len(vals)} paths have f^2 below {GUARD_FLOOR}"
    kept = vals[keep]
    lhs, lhs_se = batch_statistic(kept, mc.batches, _entropy) if len(kept) >= mc.batches else (0.0, 0.0)
    factor = 2 * rate_factor(consts["rate"], t)
    consts["factor"] = factor
    b, b_se = _grad_bracket(model, f, ens, eps, mc)
    return InequalityReport(f"logsobolev[{f.name}]", float(lhs), float(lhs_se), factor * b, factor * b_se,
                            math.hypot(float(lhs_se), factor * b_se), "inequality", consts, diag,
                            valid=valid, runtime=time.perf_counter() - start)


def check_ibp(model: ModelSpace, eps, f, x0=None, t: float = 1.0, gamma=(1.0, 0.0),
              mc: MCConfig = MCConfig(), anchor: Optional[float] = None,
              ensemble: Optional[Ensemble] = None) -> InequalityReport:
    """E[f(X_t) int <gamma', dB>] against E[<M_t df(X_t), int (M_s^T)^{-1} gamma' ds>].

    The right side pairs the start-point coefficient columns with the plain
    dot product: with M^T inverted, the metric factors of the adjoint cancel.
    """
    start = time.perf_counter()
    f = _fn(f)
    control = gamma if isinstance(gamma, PiecewiseConstantControl) else \
        PiecewiseConstantControl.constant(*gamma)
    ens = _check_ensemble(ensemble, mc, True) if ensemble is not None else \
        run_ensemble(model, eps, t, mc, x0=x0, control=control)
    vals = f.value(realization_for(model), ens.points)
    lhs_s = vals * ens.control_integral
    rhs_s = np.einsum("ni,ni->n", dptf_samples(model, f, ens), ens.ibp_integral)
    lhs, lhs_se = batch_mean(lhs_s, mc.batches)
    rhs, rhs_se = batch_mean(rhs_s, mc.batches)
    _, d_se = batch_mean(lhs_s - rhs_s, mc.batches)
    consts = _constants(model, eps, t)
    consts["gamma"] = list(control.values)
    diag = {"min_abs_det": ens.min_abs_det}
    return InequalityReport(f"ibp[{f.name}]", float(lhs), float(lhs_se), float(rhs), float(rhs_se),
                            float(d_se), "equality", consts, diag, anchor=anchor,
                            runtime=time.perf_counter() - start)


def decay_norm2(m: np.ndarray, alpha: np.ndarray, eps: float) -> np.ndarray:
    v = m @ alpha
    return v[:, 0] ** 2 + v[:, 1] ** 2 + eps * v[:, 2] ** 2


def _slope(ts: np.ndarray, values: np.ndarray) -> float:
    if np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(ts, np.log(values), 1)[0])


def check_decay(model: ModelSpace, alpha=(1.0, 0.0, 0.0), times: Sequence[float] = (1.0, 2.0, 4.0),
                mc: MCConfig = MCConfig(), tolerance: float = 0.05, steps_per_unit: Optional[int] = None
                ) -> InequalityReport:
    """Log-slope of E||M_t alpha||_eps^2 over ``times`` against -rate + tolerance, at eps_opt."""
    start = time.perf_counter()
    if not model.rho > 0:
        raise ValueError("the decay check needs a model with rho > 0")
    bounds = curvature_bounds(model)
    eps = bounds.optimal_epsilon()
    rate = float(bounds.decay_rate())
    ef = float(eps)
    alpha = np.asarray(alpha, dtype=float)
    a2 = float(alpha[0] ** 2 + alpha[1] ** 2 + ef * alpha[2] ** 2)
    ts = np.asarray(sorted(times), dtype=float)
    consts = {"kappa": bounds.kappa, "rho1": bounds.rho1, "rho2": bounds.rho2, "eps_opt": eps,
              "rate": rate, "tolerance": tolerance, "times": ts.tolist(), "alpha": alpha.tolist()}
    if a2 == 0:
        return InequalityReport("decay", 0.0, 0.0, 0.0, 0.0, 0.0, "inequality", consts,
                                {"note": "alpha = 0"}, runtime=time.perf_counter() - start)
    per_unit = steps_per_unit or int(round(mc.path.n_steps / mc.path.t_final))
    t_max = float(ts[-1])
    cfg = mc.path_for(t_max, int(round(per_unit * t_max)))
    ens = simulate(model, ef, cfg, mc.n_paths, snapshot_times=tuple(ts), workers=mc.workers)
    norms = np.stack([decay_norm2(ens.snapshots[min(ens.snapshots, key=lambda s: abs(s - t))][1], alpha, ef)
                      for t in ts], axis=1)
    means, ses = batch_mean(norms, mc.batches)
    slope, slope_se = batch_statistic(norms, mc.batches, lambda a: _slope(ts, _fsum_mean(a)))
    bound = a2 * np.exp(-rate * ts)
    diag = {"mean_norm2": means, "mean_norm2_se": ses, "pointwise_bound": bound,
            "pointwise_ok": bool(np.all(means <= bound + SE_MULTIPLIER * ses)),
            "norm0": a2}
    return InequalityReport("decay", float(slope), float(slope_se), -rate + tolerance, 0.0, float(slope_se),
                            "inequality", consts, diag, runtime=time.perf_counter() - start)


# -- Levy area -----------------------------------------------------------------

@dataclass(frozen=True)
class LevyReport:
    steps: tuple
    reference_steps: int
    t: float
    mean_z: float
    mean_z_se: float
    mean_z2: float
    mean_z2_se: float
    bias: tuple
    bias_se: tuple
    discrete_mean_z2: tuple
    runtime: float = field(default=0.0, compare=False)

    @property
    def target_z2(self) -> float:
        return self.t ** 2 / 4

    @property
    def moments_ok(self) -> bool:
        return (abs(self.mean_z) <= SE_MULTIPLIER * self.mean_z_se
                and abs(self.mean_z2 - self.target_z2) <= SE_MULTIPLIER * self.mean_z2_se)

    @property
    def monotone(self) -> bool:
        mags = [abs(b) for b in self.bias]
        return all(a > b for a, b in zip(mags, mags[1:]))

    @property
    def passed(self) -> bool:
        return self.moments_ok and self.monotone

    def to_dict(self) -> dict:
        return {
            "steps": list(self.steps), "reference_steps": self.reference_steps, "t": self.t,
            "mean_z": self.mean_z, "mean_z_se": self.mean_z_se,
            "mean_z2": self.mean_z2, "mean_z2_se": self.mean_z2_se, "target_z2": self.target_z2,
            "bias": list(self.bias), "bias_se": list(self.bias_se),
            "discrete_mean_z2": list(self.discrete_mean_z2),
            "moments_ok": self.moments_ok, "monotone": self.monotone, "pass": self.passed,
        }


def levy_area_samples(seed: int, indices: np.ndarray, t: float, steps: Sequence[int], reference_steps: int
                      ) -> np.ndarray:
    """(n, len(steps) + 1) areas z_t from the same fine increments, coarsened per level."""
    group = HeisenbergRealization()
    fine = increment_block(seed, indices, reference_steps, t / reference_steps)
    out = np.empty((len(indices), len(steps) + 1))
    for j, n_steps in enumerate(list(steps) + [reference_steps]):
        db = fine if n_steps == reference_steps else coarsen(fine, reference_steps // n_steps)
        pts, _ = group.walk(np.zeros((len(indices), 3)), db, np.full(n_steps, -1, dtype=np.int64))
        out[:, j] = pts[:, 2]
    return out


def levy_study(mc: MCConfig, t: float = 1.0, steps: Sequence[int] = (50, 200, 800),
               reference_steps: int = 1600, chunk: int = 1024) -> LevyReport:
    """Lévy-area moments at the finest level and the step-refinement bias study.

    All levels are built from one set of fine increments, so the bias of each
    level relative to the reference is a paired, low-variance quantity.
    """
    start = time.perf_counter()
    steps = tuple(sorted(steps))
    if any(reference_steps % s for s in steps):
        raise ValueError("reference_steps must be a multiple of every level")
    first = mc.path.path_index
    parts = [levy_area_samples(mc.seed, np.arange(s, min(s + chunk, first + mc.n_paths)), t, steps,
                               reference_steps)
             for s in range(first, first + mc.n_paths, chunk)]
    z = np.concatenate(parts)
    finest = z[:, len(steps) - 1]
    mz, mz_se = batch_mean(finest, mc.batches)
    mz2, mz2_se = batch_mean(finest ** 2, mc.batches)
    sq = z ** 2
    bias, bias_se = batch_mean(sq[:, :-1] - sq[:, -1:], mc.batches)
    # exact mean of the discrete area: t^2 / 4 (1 - 1/N)
    discrete = tuple(t * t / 4 * (1 - 1 / n) for n in steps)
    return LevyReport(steps, reference_steps, t, float(mz), float(mz_se), float(mz2), float(mz2_se),
                      tuple(float(b) for b in bias), tuple(float(s) for s in bias_se), discrete,
                      time.perf_counter() - start)
