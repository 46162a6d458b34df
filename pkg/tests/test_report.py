import json
import math
from fractions import Fraction as F

import numpy as np
from hypothesis import given, strategies as st

from hypoheat.estimators import InequalityReport
from hypoheat.report import CheckResult, SuiteReport, check_from_inequality, emit_report


def sample_report():
    ineq = InequalityReport("poincare[x]", 1.0, 0.0, 1.2974425414002564, 0.0, 0.0,
                            constants={"eps": F(1, 2), "t": 1.0}, diagnostics={"v": np.array([0.1, 2.0])})
    return SuiteReport("demo", [
        check_from_inequality(ineq, "7"),
        CheckResult("other", False, {"value": [1 / 3, -0.0], "n": 5, "ratio": F(5, 2)}, runtime=3.2),
    ], {"seed": 7})


def test_emit_is_byte_identical():
    assert emit_report(sample_report()) == emit_report(sample_report())
    assert emit_report(sample_report(), "csv") == emit_report(sample_report(), "csv")


def test_runtime_not_serialized():
    a = sample_report()
    b = SuiteReport(a.name, [CheckResult(c.name, c.passed, c.details, runtime=99.0) for c in a.checks], a.config)
    assert emit_report(a) == emit_report(b)


def test_json_round_trip():
    rep = sample_report()
    again = SuiteReport.from_json(emit_report(rep))
    assert again == rep
    assert emit_report(again) == emit_report(rep)


def test_rationals_and_digits():
    text = emit_report(sample_report()).decode()
    data = json.loads(text)
    assert data["checks"][0]["details"]["constants"]["eps"] == "1/2"
    assert data["checks"][1]["details"]["ratio"] == "5/2"
    assert "0.33333333333333331" in text and "-0.0" in text and '"n": 5' in text
    assert data["pass"] is False


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(v):
    rep = SuiteReport("f", [CheckResult("c", True, {"v": v})])
    back = json.loads(emit_report(rep))["checks"][0]["details"]["v"]
    assert float(back) == v


def test_nonfinite_values_survive():
    rep = SuiteReport("f", [CheckResult("c", True, {"a": math.nan, "b": math.inf})])
    back = SuiteReport.from_json(emit_report(rep))
    assert math.isnan(back.checks[0].details["a"]) and back.checks[0].details["b"] == math.inf


def test_csv_rows():
    rep = sample_report()
    lines = emit_report(rep, "csv").decode().strip().splitlines()
    assert len(lines) == len(rep.checks) + 1
    assert lines[0] == "name,pass,lhs,rhs,se,margin"
    assert lines[1].startswith("7:poincare[x],PASS,1.0,")


def test_overall_status():
    rep = sample_report()
    assert not rep.passed
    assert SuiteReport("ok", [c for c in rep.checks if c.passed]).passed
    assert "overall: FAIL" in rep.table()
