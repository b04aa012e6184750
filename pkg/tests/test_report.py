import json
from fractions import Fraction as F

from couplecheck.lang import parse_program
from couplecheck.properties import PropertyQuery, check
from couplecheck.report import HEADER, CheckResult, fmt_q, format_report, jsonable, report_dict


def test_empty_report_is_just_the_header():
    assert format_report([], "text") == HEADER + "\n"
    assert report_dict([])["summary"] == {"checks": 0, "passed": 0, "failed": 0}


def test_uniform_line():
    p = parse_program("program c var x: bool = false begin x <$ flip(1/2); end")
    r = check(PropertyQuery(p, ("x",)))
    text = format_report([r], "text")
    assert "UNIFORM x: CERTIFIED (slack 0)" in text.splitlines()
    assert text.rstrip().endswith("1 check(s): 1 passed, 0 failed")


def test_json_round_trip():
    res = CheckResult("demo", True, F(1, 3), F(1, 3), "hand calculation", route="oracle")
    data = json.loads(format_report([res], "json"))
    assert data == report_dict([res])
    assert data["results"][0]["observed"] == "1/3"
    assert data["summary"]["passed"] == 1


def test_fmt_q():
    assert fmt_q(F(1, 2)) == "1/2"
    assert fmt_q(F(1, 2), True) == "1/2"
    assert fmt_q(F(1, 2 ** 30), True) == "1/1073741824 (~9.313e-10)"


def test_jsonable():
    assert jsonable({"a": (F(1, 2), [True]), "s": {3, 1}}) == {"a": ["1/2", [True]], "s": [1, 3]}


def test_failed_check_lines():
    res = CheckResult("demo", False, F(1, 2), F(1, 3), "formula: 1/3")
    lines = res.lines()
    assert lines[0].startswith("FAIL demo")
    assert any(line.strip().startswith("expected: 1/3") for line in lines)
