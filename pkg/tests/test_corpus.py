import json
from fractions import Fraction as F

import pytest

from couplecheck.corpus import MANIFEST, CorpusError, formula, load_manifest, parse_value, run_corpus, select

IDS = [e.id for e in load_manifest()]


def test_manifest_lists_every_example():
    assert IDS == ["uniformizer", "ballot", "walk", "pairwise", "kwise", "condindep", "rejection"]
    for e in load_manifest():
        assert e.source().name == e.id


@pytest.mark.parametrize("name", IDS)
def test_entry_matches_its_expected_values(name):
    results = run_corpus(name)
    assert results
    failed = [r for r in results if not r.ok]
    assert not failed, "\n".join(line for r in failed for line in r.lines())


def test_parallel_run_keeps_manifest_order():
    one = run_corpus("condindep", routes=("oracle",))
    two = run_corpus("condindep", routes=("oracle",), jobs=2)
    assert [(r.name, r.ok) for r in one] == [(r.name, r.ok) for r in two]


def test_route_filter():
    results = run_corpus("rejection", routes=("proof",))
    assert results and all(r.route == "proof" for r in results)
    with pytest.raises(CorpusError):
        run_corpus("rejection", routes=("guess",))


def test_filter_without_match_lists_known_ids():
    with pytest.raises(CorpusError, match="uniformizer"):
        select(load_manifest(), "nothing*")


def test_wrong_expectation_is_reported(tmp_path):
    data = json.loads(MANIFEST.read_text())
    entry = next(e for e in data["entries"] if e["id"] == "rejection")
    entry["checks"] = [{"op": "residual", "expect": "(1/2)**(fuel - 1)", "provenance": "deliberately wrong"}]
    (tmp_path / "rejection.pw").write_text((MANIFEST.parent / "rejection.pw").read_text())
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"entries": [entry]}))
    (r,) = run_corpus(manifest=path)
    assert not r.ok and r.observed.startswith(f"residual {F(1, 2) ** 40}")


def test_formula():
    env = {"p": F(1, 3), "n": 4}
    assert formula("(p**2 + (1 - p)**2)**2", env) == F(25, 81)
    assert formula("2 * n / (n + 4)", env) == 1
    assert formula("p != 1/2 and n == 4", env) is True
    for bad in ("__import__('os')", "p.real", "q + 1", "[1, 2]", "1 +"):
        with pytest.raises(CorpusError):
            formula(bad, env)


@pytest.mark.parametrize("text, value", [("true", True), ("3", 3), ("1/3", F(1, 3)), ("A", "A"), (5, 5)])
def test_parse_value(text, value):
    assert parse_value(text) == value
