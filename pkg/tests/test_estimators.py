import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypoheat.estimators import (
    InequalityReport,
    MCConfig,
    batch_mean,
    check_decay,
    check_gradient_bound,
    check_ibp,
    check_logsobolev,
    check_poincare,
    dptf_eps_sweep,
    dptf_oracle,
    dptf_samples,
    estimate_dptf,
    estimate_ptf,
    levy_study,
    rate_factor,
    run_ensemble,
)
from hypoheat.functions import TestFunction, get_function
from hypoheat.geometry import build_model
from hypoheat.polycalc import exterior_d, heat_apply, x, y, z
from hypoheat.sde import CurvatureDrift, Ensemble, PathConfig, PiecewiseConstantControl, mean_norm2

HEIS = build_model(0)
SU2 = build_model(1)
SL2 = build_model(-1)


def mc(n=20_000, seed=1, steps=200, batches=40):
    return MCConfig(n_paths=n, seed=seed, batches=batches, path=PathConfig(n_steps=steps))


BATTERY = {
    "x": x, "y": y, "z": z, "xz": x * z, "x2+y2": x * x + y * y, "xy": x * y,
    "yz": y * z, "z2": z * z, "x2z": x * x * z, "x3-3xy2": x ** 3 - x * y * y * 3,
}


@pytest.fixture(scope="module")
def heis_ensemble():
    cfg = mc()
    return cfg, run_ensemble(HEIS, 1.0, 1.0, cfg)


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_oracle_battery(heis_ensemble, name):
    cfg, ens = heis_ensemble
    f = TestFunction(name, BATTERY[name])
    p_oracle = float(heat_apply(1, BATTERY[name]).exact_eval([0, 0, 0]))
    est = estimate_ptf(HEIS, f, mc=cfg, ensemble=ens)
    assert abs(est.value - p_oracle) <= 4 * est.std_error + 1e-12
    d = estimate_dptf(HEIS, 1.0, f, mc=cfg, ensemble=ens)
    assert d.agrees_with([float(v) for v in dptf_oracle(f)])


def test_named_examples(heis_ensemble):
    cfg, ens = heis_ensemble
    assert dptf_oracle("xz") == (0, F(-1, 2), 0)
    assert estimate_dptf(HEIS, 1.0, "x", mc=cfg, ensemble=ens).agrees_with([1, 0, 0])
    assert estimate_dptf(HEIS, 1.0, "z", mc=cfg, ensemble=ens).agrees_with([0, 0, 1])
    const = estimate_ptf(HEIS, "one", mc=cfg, ensemble=ens)
    assert const.value == 1.0 and const.std_error == 0.0


def test_dptf_from_an_offset_start():
    x0 = np.array([0.5, -1.0, 0.25])
    cfg = mc(10_000)
    d = estimate_dptf(HEIS, 1.0, "xz", x0=x0, mc=cfg)
    assert d.agrees_with([float(v) for v in dptf_oracle("xz", x0)])


@pytest.mark.parametrize("model,sign", [(SU2, -1), (SL2, 1), (build_model(F(5, 2)), -1)])
def test_matrix_entries_are_eigenfunctions(model, sign):
    # L acts on matrix entries by (sign) |rho| / 2, so P_t multiplies them by exp(sign |rho| t / 4)
    rho = abs(float(model.rho))
    cfg = mc(20_000)
    ens = run_ensemble(model, 1.0, 1.0, cfg)
    factor = math.exp(sign * rho / 4)
    entry = "q0" if model.rho > 0 else "g00"
    est = estimate_ptf(model, entry, mc=cfg, ensemble=ens)
    assert abs(est.value - factor) <= 4 * est.std_error
    # x is linear in the entries with dx = theta_1 at the identity
    assert estimate_dptf(model, 1.0, "x", mc=cfg, ensemble=ens).agrees_with([factor, 0, 0])


@pytest.mark.parametrize("model", [HEIS, SU2])
def test_eps_independence(model):
    rep = dptf_eps_sweep(model, "xz", (1.0, 0.5, 2.0), mc=mc(10_000))
    assert rep.passed, rep.to_dict()


def test_step_refinement_weak_order():
    rep = levy_study(mc(20_000, seed=5), steps=(25, 100), reference_steps=1600)
    ratio = abs(rep.bias[0]) / abs(rep.bias[1])
    assert math.log(ratio, 4) >= 0.8
    assert np.allclose(rep.discrete_mean_z2, (0.25 * (1 - 1 / 25), 0.25 * (1 - 1 / 100)))


def test_levy_moments_and_monotone_bias():
    rep = levy_study(mc(20_000, seed=2))
    assert rep.moments_ok and rep.monotone


def test_gradient_bound_examples():
    cfg = mc(20_000)
    r = check_gradient_bound(HEIS, 1.0, "z", mc=cfg)
    assert r.lhs == pytest.approx(math.sqrt(2))
    assert r.constants["factor"] == pytest.approx(math.exp(0.25))
    assert r.passed and r.rhs > math.sqrt(2)
    r = check_gradient_bound(HEIS, 1.0, "x", mc=cfg)
    assert r.lhs == 1.0 and r.rhs == pytest.approx(math.exp(0.25)) and r.passed
    r = check_gradient_bound(HEIS, 1.0, "one", mc=cfg)
    assert r.lhs == r.rhs == 0.0 and r.margin == 0.0 and r.passed


def test_poincare_examples():
    cfg = mc(10_000)
    r = check_poincare(HEIS, 1.0, "x", mc=cfg)
    assert r.lhs == 1.0
    assert r.rhs == pytest.approx(2 * (math.exp(0.5) - 1))
    assert r.passed
    r = check_poincare(HEIS, 1.0, "one", mc=cfg)
    assert r.lhs == 0.0 and r.rhs == 0.0 and r.passed
    assert check_poincare(SU2, 1.0, "q1", mc=cfg).passed
    assert check_poincare(SU2, 1.0, "xz", mc=cfg).passed


def test_rate_factor_limit():
    assert rate_factor(0.0, 2.0) == 2.0
    assert rate_factor(1e-13, 2.0) == 2.0
    assert rate_factor(0.5, 1.0) == pytest.approx(2 * (math.exp(0.5) - 1))
    assert rate_factor(1e-6, 1.0) == pytest.approx(1.0, rel=1e-5)


def test_logsobolev_examples():
    cfg = mc(20_000)
    r1 = check_logsobolev(HEIS, 1.0, "1+x2/10", mc=cfg)
    assert r1.passed and r1.diagnostics["guard_rejections"] == 0
    r_big = check_logsobolev(HEIS, 1000.0, "1+x2/10", mc=cfg)
    assert r_big.passed and r_big.rhs < r1.rhs
    assert r_big.constants["factor"] == pytest.approx(2 * rate_factor(1 / 2000, 1.0))
    r = check_logsobolev(HEIS, 1.0, "one", mc=cfg)
    assert abs(r.lhs) < 1e-15 and r.rhs == 0.0 and r.passed
    assert check_logsobolev(SU2, 1.0, "1+x2/10", mc=cfg).passed


def test_logsobolev_guard_fails_run():
    cfg = mc(100, batches=4)
    ens = Ensemble(points=np.zeros((100, 3)), transport=None, ibp_integral=np.zeros((100, 3)),
                   control_integral=np.zeros(100), snapshots={}, bound_violations=0, max_bound_ratio=0.0,
                   max_constraint_error=0.0, min_abs_det=1.0)
    r = check_logsobolev(HEIS, 1.0, "x", mc=cfg, ensemble=ens)
    assert not r.valid and not r.passed
    assert r.diagnostics["guard_rejections"] == 100


IBP_CASES = [
    (HEIS, "x", (1.0, 0.0)),
    (HEIS, "xz", (0.0, 1.0)),
    (HEIS, "z", (1.0, -1.0)),
    (SU2, "x", (1.0, 0.0)),
    (SL2, "xz", (0.0, 1.0)),
]


@pytest.mark.parametrize("model,f,gamma", IBP_CASES)
def test_ibp_pairs(model, f, gamma):
    r = check_ibp(model, 1.0, f, gamma=gamma, mc=mc(20_000, seed=3))
    assert r.passed, r.to_dict()


def test_ibp_anchor_and_time_varying_control():
    r = check_ibp(HEIS, 1.0, "x", gamma=(1.0, 0.0), mc=mc(20_000), anchor=1.0)
    assert r.passed and r.anchor_ok
    ctrl = PiecewiseConstantControl(((1.0, 0.0), (0.0, 2.0), (-1.0, 1.0)), (0.0, 0.3, 0.7))
    assert check_ibp(SU2, 0.5, "xz", gamma=ctrl, mc=mc(20_000)).passed


def test_ibp_zero_control():
    r = check_ibp(HEIS, 1.0, "xz", gamma=(0.0, 0.0), mc=mc(2_000))
    assert r.lhs == 0.0 and r.rhs == 0.0 and r.passed


def test_decay_su2():
    r = check_decay(SU2, mc=mc(4_000, steps=500))
    assert r.constants["eps_opt"] == F(3, 2) and r.constants["rate"] == pytest.approx(1 / 3)
    assert r.passed and r.diagnostics["pointwise_ok"]
    drift = CurvatureDrift.from_model(SU2, 1.5)
    exact = [mean_norm2(drift, t, (1, 0, 0), (1, 1, 1.5)) for t in (1, 2, 4)]
    assert np.allclose(exact, [0.4901, 0.2915, 0.1342], atol=5e-4)
    means, ses = np.array(r.diagnostics["mean_norm2"]), np.array(r.diagnostics["mean_norm2_se"])
    assert np.all(np.abs(means - exact) <= 4 * ses + 2e-3)


def test_decay_trivial_and_rejections():
    r = check_decay(SU2, alpha=(0.0, 0.0, 0.0), mc=mc(100, batches=4))
    assert r.lhs == r.rhs == 0.0 and r.passed
    with pytest.raises(ValueError):
        check_decay(HEIS, mc=mc(100, batches=4))
    with pytest.raises(ValueError):
        check_decay(SL2, mc=mc(100, batches=4))


def test_margin_guard_more_paths_keeps_pass():
    small = check_poincare(SU2, 1.0, "x", mc=mc(5_000, seed=9))
    assert small.margin > 8 * small.se
    assert check_poincare(SU2, 1.0, "x", mc=mc(20_000, seed=9)).passed


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5), st.sampled_from(["inequality", "equality"]))
def test_pass_rule_is_function_of_fields(lhs, rhs, se, kind):
    r = InequalityReport("t", lhs, 0.0, rhs, 0.0, se, kind)
    if kind == "equality":
        assert r.passed == (abs(rhs - lhs) <= 4 * se)
    else:
        assert r.passed == (rhs - lhs + 4 * se >= 0)
    assert r.to_dict()["pass"] == r.passed


def test_batch_mean_deterministic_and_exact():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(1000, 3))
    m1, se1 = batch_mean(s, 10)
    m2, se2 = batch_mean(s.copy(), 10)
    assert np.array_equal(m1, m2) and np.array_equal(se1, se2)
    assert np.allclose(m1, s.mean(axis=0))
    assert np.all(se1 > 0)


def test_mc_config_invariants():
    with pytest.raises(ValueError):
        MCConfig(n_paths=5, batches=10)
    with pytest.raises(ValueError):
        MCConfig(n_paths=5, batches=1)
