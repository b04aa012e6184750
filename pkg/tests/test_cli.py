import json

import httpx
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from conftest import CORPUS
from couplecheck import service as S
from couplecheck.api import app
from couplecheck.cli import cli

COIN = """program c
var x: bool = false
var y: bool = false
begin
  x <$ flip(1/2);
  y := x;
end
"""


@pytest.fixture
def coin(tmp_path):
    p = tmp_path / "coin.pw"
    p.write_text(COIN)
    return str(p)


def invoke(*args):
    return CliRunner().invoke(cli, list(args))


def test_run(coin):
    r = invoke("run", coin)
    assert r.exit_code == 0
    assert r.output.splitlines() == ["x=false, y=false\t1/2", "x=true, y=true\t1/2", "residual 0"]


def test_run_json(coin):
    r = invoke("--json", "run", coin)
    data = json.loads(r.output)
    assert data["residual"] == "0" and data["weight"] == "1"
    assert {"state": {"x": True, "y": True}, "prob": "1/2"} in data["outcomes"]


def test_lossless_and_abort(tmp_path, coin):
    assert invoke("lossless", coin).exit_code == 0
    bad = tmp_path / "abort.pw"
    bad.write_text("program a var x: bool = false begin abort; end")
    r = invoke("lossless", str(bad))
    assert r.exit_code == 1 and "NOT-LOSSLESS" in r.output


def test_lossless_within_tolerance():
    u = str(CORPUS / "uniformizer.pw")
    assert invoke("--fuel", "60", "lossless", u).exit_code == 0
    assert invoke("lossless", u, "--fuel", "3").exit_code == 1


def test_property_commands(coin):
    assert invoke("uniform", coin, "--vars", "x").exit_code == 0
    r = invoke("indep", coin, "--vars", "x, y")
    assert r.exit_code == 1 and "INDEPENDENT x, y: FAILS" in r.output
    assert invoke("indep", coin, "--vars", "x,y", "--route", "semantic").exit_code == 1
    assert invoke("cond-indep", coin, "--vars", "x,y", "--event", "x").exit_code == 0


def test_event_outside_cond_indep(coin):
    assert invoke("uniform", coin, "--vars", "x", "--event", "x").exit_code == 2


def test_proof_route_with_bindings():
    r = invoke("cond-indep", str(CORPUS / "condindep.pw"), "--vars", "w,w'", "--event", "y = true",
               "--route", "proof", "--proof", str(CORPUS / "condindep.prf"), "--bind", "c=true")
    assert r.exit_code == 0, r.output


def test_prove():
    r = invoke("prove", str(CORPUS / "rejection.pw"), str(CORPUS / "rejection.prf"), "--fuel", "40")
    assert r.exit_code == 0 and "ACCEPTED (9 instance(s), 0 rejected)" in r.output


def test_selfcompose(coin, tmp_path):
    out = tmp_path / "c2.pw"
    r = invoke("selfcompose", coin, "-n", "3", "-o", str(out))
    assert r.exit_code == 0
    assert "var x@3" in out.read_text()
    assert invoke("run", str(out)).exit_code == 0


def test_coupling(coin, tmp_path):
    left = tmp_path / "l.json"
    left.write_text(invoke("--json", "run", coin).output)
    r = invoke("coupling", "--left", str(left), "--right", str(left), "--psi", "x{1} != x{2}")
    assert r.exit_code == 0 and "FOUND" in r.output
    r = invoke("coupling", "--left", str(left), "--right", str(left), "--psi", "x{1} && !x{2}")
    assert r.exit_code == 1 and "INFEASIBLE" in r.output


def test_corpus_filter():
    r = invoke("corpus", "rejection", "--routes", "oracle")
    assert r.exit_code == 0 and "0 failed" in r.output
    r = invoke("corpus", "nothing-like-this")
    assert r.exit_code == 2


@pytest.mark.parametrize("args", [
    ["run", "/no/such/file.pw"],
    ["uniform", "PROGRAM", "--vars", "q"],
    ["--tol", "banana", "lossless", "PROGRAM"],
    ["--fuel", "0", "run", "PROGRAM"],
])
def test_usage_errors(args, coin):
    args = [coin if a == "PROGRAM" else a for a in args]
    assert invoke(*args).exit_code == 2


def test_syntax_error_reports_position(tmp_path):
    p = tmp_path / "bad.pw"
    p.write_text("program b\nvar x: bool = false\nbegin\n  x := ;\nend\n")
    r = invoke("run", str(p))
    assert r.exit_code == 2
    assert "line 4, col 8" in r.output


def test_api_matches_in_process_dispatch():
    client = TestClient(app)
    assert client.get("/health").json() == {"status": "ok"}
    body = {"program": COIN}
    resp = client.post("/run", json=body)
    assert resp.status_code == 200
    assert resp.json() == S.dispatch("run", body).model_dump(mode="json")
    resp = client.post("/lossless", json={"program": "program a var x: bool = false begin abort; end"})
    assert resp.json()["exit_code"] == 1


def test_cli_through_the_server(coin, monkeypatch):
    client = TestClient(app)
    seen = []

    def post(url, json=None, timeout=None):
        seen.append(url)
        return client.post(url.replace("http://svc", ""), json=json)

    monkeypatch.setattr(httpx, "post", post)
    r = invoke("--server", "http://svc", "uniform", coin, "--vars", "x")
    assert r.exit_code == 0 and "UNIFORM x: CERTIFIED" in r.output
    assert seen == ["http://svc/property"]
