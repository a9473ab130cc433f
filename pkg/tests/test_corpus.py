"""Tests for check corpora."""

from pathlib import Path

import pytest

from src.bodies.serialization import body_from_spec
from src.checks.corpus import generate_corpus, load_corpus, save_corpus
from src.core.errors import SchemaError

SMOKE_CORPUS = Path(__file__).resolve().parents[1] / "data" / "corpus_smoke.json"


def test_generation_is_deterministic():
    assert generate_corpus(7, count=30) == generate_corpus(7, count=30)
    assert generate_corpus(7, count=30) != generate_corpus(8, count=30)


def test_corpus_composition():
    cases = generate_corpus(2024, count=40, dims=(2, 3), lambdas=(0.25, 0.5))
    assert len(cases) == 40
    assert len({case.name for case in cases}) == 40
    assert {case.dim for case in cases} == {2, 3}
    assert {case.lam for case in cases} == {0.25, 0.5}

    halfspace_cases = [case for case in cases if case.name.endswith("halfspaces")]
    assert len(halfspace_cases) == 4
    assert all(case.checks == ["ehrhard", "log-concavity"] for case in halfspace_cases)

    same = [case for case in cases if case.name.endswith("-same")]
    assert same and all(case.first == case.second for case in same)

    for case in cases:
        if case in halfspace_cases:
            continue
        first = body_from_spec(case.first)
        assert first.is_origin_symmetric and first.is_convex


def test_save_and_load(tmp_path):
    cases = generate_corpus(3, count=12)
    path = tmp_path / "corpus.json"
    save_corpus(cases, path)
    assert load_corpus(path) == cases


def test_duplicate_names_are_rejected(tmp_path):
    cases = generate_corpus(3, count=2)
    path = tmp_path / "corpus.json"
    save_corpus([cases[0], cases[0]], path)
    with pytest.raises(SchemaError, match="duplicate"):
        load_corpus(path)


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        '{"name": "single"}',
        '[{"name": "x", "first": {"kind": "ball", "dim": 2, "params": {"radius": 1.0}}, '
        '"lam": 1.5}]',
    ],
)
def test_malformed_corpora(tmp_path, text):
    path = tmp_path / "corpus.json"
    path.write_text(text)
    with pytest.raises(SchemaError):
        load_corpus(path)


def test_missing_corpus_is_an_os_error(tmp_path):
    with pytest.raises(OSError):
        load_corpus(tmp_path / "absent.json")


def test_shipped_smoke_corpus_runs_clean():
    from src.checks import CheckRunner, exit_code
    from src.checks.interfaces import CheckContext

    cases = load_corpus(SMOKE_CORPUS)
    assert len(cases) == 5
    exact = [case for case in cases if case.samples is None]
    results = CheckRunner(CheckContext(sigma_nodes=1000)).run(exact)
    assert exit_code(results) == 0
    expected = [r for r in results if r.case == "smoke-exponent-two"]
    assert [r.verdict for r in expected] == ["violated"]
