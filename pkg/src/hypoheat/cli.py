"""Command line front end.

    hypoheat verify commutation|bw   [--model M] [--eps E]
    hypoheat estimate ptf|dptf       --model M --eps E --t T --paths N --steps S --f NAME
    hypoheat check gradient|poincare|logsobolev|ibp|decay  (same flags, --gamma for ibp)
    hypoheat tensors --model M --eps E
    hypoheat trace --model M --eps E --t T --steps S [--path-index P]
    hypoheat run CONFIG              (flat key=value lines or a JSON object)
    hypoheat selftest [--quick] [--fault torsion]

Exit codes: 0 all checks pass, 1 a check failed or the numerics broke down,
2 usage or configuration error. HYPOHEAT_SEED overrides the seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from ._rational import as_number
from .estimators import (
    MCConfig,
    check_decay,
    check_gradient_bound,
    check_ibp,
    check_logsobolev,
    check_poincare,
    estimate_dptf,
    estimate_ptf,
)
from .functions import function_names, get_function
from .geometry import parse_model, tensor_set
from .pbw import verify_commutation
from .polycalc import random_oneform, verify_bw
from .report import CheckResult, SuiteReport, check_from_inequality, emit_report
from .sde import SCHEMES, PathConfig, SingularTransportError, trace_header, trace_rows
from .suite import DEFAULT_SEED, selftest

COMMANDS = (
    "verify commutation", "verify bw",
    "estimate ptf", "estimate dptf",
    "check gradient", "check poincare", "check logsobolev", "check ibp", "check decay",
    "tensors", "trace", "selftest",
)
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = "heisenberg"
    eps: str = "1"
    t: float = 1.0
    paths: int = 10_000
    steps: int = 500
    scheme: str = "exp_splitting"
    seed: int = DEFAULT_SEED
    f: str = "x"
    gamma: tuple = (1.0, 0.0)
    batches: int = 40
    workers: int = 1
    path_index: int = 0
    count: int = 20
    profile: str = "full"
    fault: Optional[str] = None
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.scheme not in SCHEMES:
            raise UsageError(f"unknown scheme {self.scheme!r}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.paths < 2 or self.steps < 1 or not self.t > 0:
            raise UsageError("need paths >= 2, steps >= 1, t > 0")
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if len(self.gamma) != 2:
            raise UsageError("gamma takes two components")

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        if not data:
            raise UsageError("empty configuration")
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise UsageError(f"unknown configuration keys {sorted(unknown)}")
        kwargs = {}
        for key, raw in data.items():
            kwargs[key] = _coerce(key, raw)
        if "command" not in kwargs:
            raise UsageError("configuration needs a command")
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from exc

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        text = text.strip()
        if not text:
            raise UsageError("empty configuration")
        if text.startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"malformed JSON config: {exc}") from exc
            if not isinstance(data, dict):
                raise UsageError("JSON config must be an object")
            return cls.from_mapping(data)
        data = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"line {n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            data[key] = value
        return cls.from_mapping(data)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        if seed is None:
            return self
        return RunConfig(**{**asdict(self), "seed": seed})


_INT_KEYS = {"paths", "steps", "seed", "batches", "workers", "path_index", "count"}


def _coerce(key: str, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key == "t":
            return float(raw)
        if key == "gamma":
            if isinstance(raw, str):
                raw = [p for p in raw.replace(",", " ").split()]
            return tuple(float(v) for v in raw)
        if key == "eps":
            return str(raw)
        return raw if raw is None else str(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc


def env_seed() -> Optional[int]:
    raw = os.environ.get("HYPOHEAT_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw, 0)
    except ValueError as exc:
        raise UsageError(f"HYPOHEAT_SEED must be an integer, got {raw!r}") from exc


# -- execution -------------------------------------------------------------------

def _mc(cfg: RunConfig) -> MCConfig:
    if cfg.paths < cfg.batches:
        raise UsageError("paths must be at least batches")
    return MCConfig(cfg.paths, cfg.seed, cfg.batches, PathConfig(cfg.t, cfg.steps, cfg.scheme), cfg.workers)


def _eps(cfg: RunConfig):
    try:
        eps = as_number(cfg.eps)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad eps {cfg.eps!r}") from exc
    if not eps > 0:
        raise UsageError("eps must be positive")
    return eps


def _model(cfg: RunConfig):
    try:
        return parse_model(cfg.model)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc


def _function(cfg: RunConfig):
    try:
        return get_function(cfg.f)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc


def run_config(cfg: RunConfig) -> SuiteReport:
    """Execute one configured command and wrap the outcome as a SuiteReport."""
    config = asdict(cfg)
    config.pop("out")
    config.pop("format")
    cmd = cfg.command
    if cmd == "selftest":
        rep = selftest(cfg.seed, cfg.workers, cfg.profile, cfg.fault)
        return SuiteReport("selftest", rep.checks, {**rep.config, "command": cmd})
    model = _model(cfg)
    _eps(cfg)
    if cmd == "verify commutation":
        r = verify_commutation(model.rho, _eps(cfg))
        checks = [CheckResult("commutation", r.passed, r.to_dict())]
    elif cmd == "verify bw":
        if model.rho != 0:
            raise UsageError("verify bw runs on the Heisenberg model")
        rng = np.random.default_rng(cfg.seed)
        eps = _eps(cfg)
        nonzero = sum(not verify_bw(eps, random_oneform(rng, 3)).is_zero() for _ in range(cfg.count))
        checks = [CheckResult("bochner_weitzenboeck", nonzero == 0,
                              {"forms": cfg.count, "eps": eps, "nonzero_residuals": nonzero})]
    elif cmd == "tensors":
        ts = tensor_set(model, _eps(cfg))
        checks = [CheckResult("tensors", True, {"model": model.to_dict(), "tensors": ts.to_dict()})]
    elif cmd == "trace":
        raise UsageError("trace writes CSV rows; use the trace subcommand directly")
    elif cmd.startswith("estimate"):
        f = _function(cfg)
        mc = _mc(cfg)
        if cmd == "estimate ptf":
            r = estimate_ptf(model, f, t=cfg.t, mc=mc)
        else:
            r = estimate_dptf(model, float(_eps(cfg)), f, t=cfg.t, mc=mc)
        checks = [CheckResult(r.label, True, {"value": r.to_dict()["value"], "se": r.to_dict()["std_error"],
                                               "n_paths": r.n_paths}, r.runtime)]
    else:
        mc = _mc(cfg)
        kind = cmd.split()[1]
        if kind == "decay":
            if not model.rho > 0:
                raise UsageError("check decay needs rho > 0")
            r = check_decay(model, mc=mc)
        else:
            f = _function(cfg)
            eps = float(_eps(cfg))
            if kind == "gradient":
                r = check_gradient_bound(model, eps, f, t=cfg.t, mc=mc)
            elif kind == "poincare":
                r = check_poincare(model, eps, f, t=cfg.t, mc=mc)
            elif kind == "logsobolev":
                r = check_logsobolev(model, eps, f, t=cfg.t, mc=mc)
            else:
                r = check_ibp(model, eps, f, t=cfg.t, gamma=cfg.gamma, mc=mc)
        checks = [check_from_inequality(r)]
    return SuiteReport(cmd, checks, config)


def write_trace(cfg: RunConfig) -> bytes:
    model = _model(cfg)
    pcfg = PathConfig(cfg.t, cfg.steps, cfg.scheme, cfg.seed, cfg.path_index)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(model))
    for row in trace_rows(model, float(_eps(cfg)), pcfg):
        w.writerow([format(v, ".17g") for v in row])
    return buf.getvalue().encode("utf-8")


# -- argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--model", default="heisenberg")
    p.add_argument("--eps", default="1")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if mc:
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--steps", type=int, default=500)
        p.add_argument("--paths", type=int, default=10_000)
        p.add_argument("--scheme", choices=SCHEMES, default="exp_splitting")
        p.add_argument("--f", default="x", help=f"test function: {', '.join(function_names())}")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--batches", type=int, default=40)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypoheat", description="Sub-Riemannian heat semigroup verification toolkit.")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)
    v = sub.add_parser("verify")
    v.add_argument("what", choices=("commutation", "bw"))
    _common(v, mc=False)
    v.add_argument("--count", type=int, default=20)
    e = sub.add_parser("estimate")
    e.add_argument("what", choices=("ptf", "dptf"))
    _common(e)
    c = sub.add_parser("check")
    c.add_argument("what", choices=("gradient", "poincare", "logsobolev", "ibp", "decay"))
    _common(c)
    c.add_argument("--gamma", type=float, nargs=2, default=(1.0, 0.0))
    t = sub.add_parser("tensors")
    _common(t, mc=False)
    tr = sub.add_parser("trace")
    _common(tr)
    tr.add_argument("--path-index", type=int, default=0)
    r = sub.add_parser("run")
    r.add_argument("config")
    r.add_argument("--out")
    r.add_argument("--format", choices=("json", "csv"))
    s = sub.add_parser("selftest")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--quick", action="store_true")
    s.add_argument("--fault", choices=("torsion",))
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.group == "run":
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        overrides = {k: getattr(ns, k) for k in ("out", "format") if getattr(ns, k)}
        return RunConfig(**{**asdict(cfg), **overrides}) if overrides else cfg
    if ns.group == "selftest":
        return RunConfig("selftest", seed=ns.seed, workers=ns.workers,
                         profile="quick" if ns.quick else "full", fault=ns.fault,
                         out=ns.out, format=ns.format)
    command = ns.group if ns.group in ("tensors", "trace") else f"{ns.group} {ns.what}"
    data = {k: v for k, v in vars(ns).items() if k not in ("group", "what") and v is not None}
    data["command"] = command
    return RunConfig.from_mapping(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns).with_seed(env_seed())
        if cfg.command == "trace":
            payload = write_trace(cfg)
            _deliver(payload, cfg.out, echo=True)
            return EXIT_PASS
        report = run_config(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularTransportError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = emit_report(report, cfg.format)
    print(report.table())
    _deliver(payload, cfg.out, echo=True)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _deliver(payload: bytes, out: Optional[str], echo: bool) -> None:
    if echo:
        sys.stdout.write(payload.decode("utf-8"))
        sys.stdout.flush()
    if out:
        with open(out, "wb") as fh:
            fh.write(payload)


if __name__ == "__main__":
    sys.exit(main())
