"""The acceptance suite: every criterion as a named check with a pinned seed.

Each criterion draws its own seed from the master seed, so criteria do not
share random streams and adding one does not perturb the others. The
``quick`` profile scales the path counts down for smoke runs; the pass
rules are unchanged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .estimators import (
    MCConfig,
    check_decay,
    check_gradient_bound,
    check_ibp,
    check_logsobolev,
    check_poincare,
    dptf_eps_sweep,
    dptf_oracle,
    levy_study,
    run_ensemble,
)
from .geometry import build_model, tensor_set
from .pbw import verify_commutation
from .polycalc import heat_apply, random_oneform, random_poly, verify_bw, x, y, z
from .report import CheckResult, SuiteReport, check_from_inequality, emit_report
from .sde import MASK64, PathConfig, simulate

DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class SuiteProfile:
    name: str = "full"
    dptf_paths: int = 100_000
    levy_paths: int = 100_000
    bound_paths: int = 10_000
    inequality_paths: int = 100_000
    ibp_paths: int = 100_000
    decay_paths: int = 20_000
    n_steps: int = 500
    bw_forms: int = 100
    semigroup_polys: int = 50
    batches: int = 40


PROFILES = {
    "full": SuiteProfile(),
    "quick": SuiteProfile("quick", 10_000, 10_000, 2_000, 10_000, 10_000, 4_000, 200, 20, 10, 20),
}


def sub_seed(master: int, criterion: int) -> int:
    state = np.random.SeedSequence([int(master) & MASK64, criterion]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _mc(profile: SuiteProfile, n_paths: int, seed: int, workers: int) -> MCConfig:
    return MCConfig(n_paths=n_paths, seed=seed, batches=profile.batches,
                    path=PathConfig(n_steps=profile.n_steps), workers=workers)


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# -- criteria ------------------------------------------------------------------

def criterion_commutation() -> CheckResult:
    rhos = (0, 1, -1, Fraction(5, 2))
    epss = (Fraction(1, 10), 1, 10)
    reports, runtime = _timed(lambda: [verify_commutation(r, e) for r in rhos for e in epss])
    bad = [r.to_dict() for r in reports if not r.passed]
    return CheckResult("1:commutation", not bad,
                       {"cases": len(reports), "failures": bad, "rho": rhos, "eps": epss}, runtime)


def corrupted_tensors(eps):
    """Tensor set with one torsion-twist entry perturbed (fault injection)."""
    ts = tensor_set(build_model(0), eps)
    t_x = [list(row) for row in ts.t_x]
    t_x[0][2] = t_x[0][2] + Fraction(1, 7)
    return replace(ts, t_x=tuple(tuple(r) for r in t_x))


def criterion_bw(seed: int, profile: SuiteProfile, fault: Optional[str] = None) -> CheckResult:
    rng = np.random.default_rng(seed)
    forms = [random_oneform(rng, 3) for _ in range(profile.bw_forms)]
    epss = (Fraction(1, 4), Fraction(1), Fraction(4))

    def run():
        nonzero = 0
        for eps in epss:
            ts = corrupted_tensors(eps) if fault == "torsion" else None
            for eta in forms:
                if not verify_bw(eps, eta, tensors=ts).is_zero():
                    nonzero += 1
        return nonzero

    nonzero, runtime = _timed(run)
    return CheckResult("2:bochner_weitzenboeck", nonzero == 0,
                       {"forms": len(forms), "eps": epss, "nonzero_residuals": nonzero, "fault": fault},
                       runtime)


def criterion_heat(seed: int, profile: SuiteProfile) -> CheckResult:
    def run():
        t = Fraction(3, 7)
        ok1 = heat_apply(t, x * x + y * y) == x * x + y * y + 2 * t
        ok2 = heat_apply(t, x * z) == x * z - y * t / 2
        rng = np.random.default_rng(seed)
        bad = 0
        for _ in range(profile.semigroup_polys):
            f = random_poly(rng, 4)
            s, u = Fraction(int(rng.integers(1, 9)), 5), Fraction(int(rng.integers(1, 9)), 3)
            if heat_apply(s, heat_apply(u, f)) != heat_apply(s + u, f):
                bad += 1
        return ok1, ok2, bad

    (ok1, ok2, bad), runtime = _timed(run)
    return CheckResult("3:heat_oracle", ok1 and ok2 and bad == 0,
                       {"x2+y2": ok1, "xz": ok2, "semigroup_failures": bad,
                        "semigroup_polys": profile.semigroup_polys}, runtime)


def criterion_bismut(seed: int, profile: SuiteProfile, workers: int) -> list:
    mc = _mc(profile, profile.dptf_paths, seed, workers)
    model = build_model(0)
    sweep, runtime = _timed(lambda: dptf_eps_sweep(model, "xz", (1.0, 0.5, 2.0), mc=mc))
    oracle = [float(v) for v in dptf_oracle("xz")]
    est = sweep.estimates[0]
    diff = np.abs(est.value - oracle)
    oracle_ok = bool(np.all(diff <= 4 * est.std_error))
    return [
        CheckResult("4a:dptf_oracle[xz]", oracle_ok,
                    {"value": est.value, "se": est.std_error, "oracle": oracle, "abs_diff": diff,
                     "n_paths": mc.n_paths, "n_steps": mc.path.n_steps}, est.runtime),
        CheckResult("4b:eps_independence[xz]", sweep.passed, sweep.to_dict(), runtime - est.runtime),
    ]


def criterion_levy(seed: int, profile: SuiteProfile) -> CheckResult:
    mc = MCConfig(n_paths=profile.levy_paths, seed=seed, batches=profile.batches)
    rep = levy_study(mc)
    return CheckResult("5:levy_area", rep.passed, rep.to_dict(), rep.runtime)


def criterion_pathwise_bound(seed: int, profile: SuiteProfile, workers: int) -> CheckResult:
    def run():
        rows = []
        for rho in (0, 1, -1):
            for eps in (0.5, 1.0, 2.0):
                cfg = PathConfig(1.0, profile.n_steps, "exp_splitting", seed)
                ens = simulate(build_model(rho), eps, cfg, profile.bound_paths, check_bound=True,
                               workers=workers, transport=True)
                rows.append({"rho": rho, "eps": eps, "violations": ens.bound_violations,
                             "max_ratio": ens.max_bound_ratio})
        return rows

    rows, runtime = _timed(run)
    total = sum(r["violations"] for r in rows)
    return CheckResult("6:pathwise_bound", total == 0,
                       {"cases": rows, "paths_per_case": profile.bound_paths, "violations": total}, runtime)


def criterion_inequalities(seed: int, profile: SuiteProfile, workers: int) -> list:
    mc = _mc(profile, profile.inequality_paths, seed, workers)
    out = []
    for model in (build_model(0), build_model(1)):
        ens, _ = _timed(lambda: run_ensemble(model, 1.0, 1.0, mc))
        for f in ("x", "z", "xz"):
            out.append(check_from_inequality(check_gradient_bound(model, 1.0, f, mc=mc, ensemble=ens),
                                             f"7:{model.name}"))
        out.append(check_from_inequality(check_poincare(model, 1.0, "x", mc=mc, ensemble=ens),
                                         f"7:{model.name}"))
        out.append(check_from_inequality(check_logsobolev(model, 1.0, "1+x2/10", mc=mc, ensemble=ens),
                                         f"7:{model.name}"))
    return out


def criterion_ibp(seed: int, profile: SuiteProfile, workers: int) -> list:
    mc = _mc(profile, profile.ibp_paths, seed, workers)
    model = build_model(0)
    return [
        check_from_inequality(check_ibp(model, 1.0, "x", gamma=(1.0, 0.0), mc=mc, anchor=1.0), "8"),
        check_from_inequality(check_ibp(model, 1.0, "xz", gamma=(0.0, 1.0), mc=mc), "8"),
    ]


def criterion_decay(seed: int, profile: SuiteProfile, workers: int) -> CheckResult:
    mc = _mc(profile, profile.decay_paths, seed, workers)
    return check_from_inequality(check_decay(build_model(1), (1.0, 0.0, 0.0), mc=mc), "9")


# -- entry points ----------------------------------------------------------------

def run_suite(seed: int = DEFAULT_SEED, workers: int = 1, profile: str = "full",
              fault: Optional[str] = None) -> SuiteReport:
    """Criteria 1-9."""
    prof = PROFILES[profile]
    checks = [criterion_commutation(), criterion_bw(sub_seed(seed, 2), prof, fault),
              criterion_heat(sub_seed(seed, 3), prof)]
    checks += criterion_bismut(sub_seed(seed, 4), prof, workers)
    checks.append(criterion_levy(sub_seed(seed, 5), prof))
    checks.append(criterion_pathwise_bound(sub_seed(seed, 6), prof, workers))
    checks += criterion_inequalities(sub_seed(seed, 7), prof, workers)
    checks += criterion_ibp(sub_seed(seed, 8), prof, workers)
    checks.append(criterion_decay(sub_seed(seed, 9), prof, workers))
    return SuiteReport("acceptance", checks, {"seed": seed, "profile": profile, "fault": fault})


def selftest(seed: int = DEFAULT_SEED, workers: int = 1, profile: str = "full",
             fault: Optional[str] = None, determinism: bool = True) -> SuiteReport:
    """Criteria 1-9, plus 10: a second run at a different worker count must be byte-identical."""
    first = run_suite(seed, workers, profile, fault)
    checks = list(first.checks)
    if determinism:
        other_workers = 1 if workers > 1 else 4
        start = time.perf_counter()
        second = run_suite(seed, other_workers, profile, fault)
        a, b = emit_report(first), emit_report(second)
        checks.append(CheckResult("10:determinism", a == b,
                                  {"workers": [workers, other_workers], "bytes": len(a)},
                                  time.perf_counter() - start))
    return SuiteReport("selftest", checks, {"seed": seed, "profile": profile, "fault": fault})


def criterion_of(check: CheckResult) -> int:
    head = check.name.split(":", 1)[0]
    return int("".join(ch for ch in head if ch.isdigit()))
