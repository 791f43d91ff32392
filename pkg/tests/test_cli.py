from __future__ import annotations

import json
from pathlib import Path

import pytest

from quiltquant.cli import EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, CACHE_ENV, main

INPUTS = Path(__file__).resolve().parents[1] / "inputs"
NON_COCYCLE = 'basis = ["a", "b", "c"]\n[bracket]\n"a b" = { c = 1 }\n[cobracket]\na = { "a b" = 1 }\n'


@pytest.fixture(autouse=True)
def cache(tmp_path_factory, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path_factory.getbasetemp() / "phi-cache"))


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def group_artifact(tmp_path_factory):
    path = tmp_path_factory.mktemp("art") / "group.json"
    assert main(["quantize-group", str(INPUTS / "axb.toml"), "-o", str(path)]) == EXIT_OK
    return path


# ---------------------------------------------------------------- forge-associator


def test_forge_degree_zero_is_one(capsys, tmp_path):
    out = tmp_path / "phi.json"
    code, text, _ = run(capsys, "forge-associator", "-d", 0, "-o", out)
    assert code == EXIT_OK
    art = json.loads(out.read_text())
    assert art["log"] == []
    assert art["series"]["terms"] == [{"coeff": "1", "word": []}]


def test_forge_degree_two_has_commutator(capsys, tmp_path):
    out = tmp_path / "phi.json"
    code, text, _ = run(capsys, "forge-associator", "-d", 2, "-o", out)
    assert code == EXIT_OK
    art = json.loads(out.read_text())
    assert {t["word"]: t["coeff"] for t in art["log"]} == {"AB": "1/24", "BA": "-1/24"}
    assert set(art["verification"].values()) == {"0"}
    assert "ok   pentagon" in text and "overall: ok" in text


def test_forge_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "forge-associator", "-d", 3, "-o", a)
    run(capsys, "forge-associator", "-d", 3, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_forge_without_output_prints_artifact(capsys):
    code, text, err = run(capsys, "forge-associator", "-d", 1)
    assert code == EXIT_OK
    assert json.loads(text)["kind"] == "associator"
    assert "overall: ok" in err


def test_forge_bad_degree(capsys):
    assert run(capsys, "forge-associator", "-d", -1)[0] == EXIT_IO


def test_forge_solver_limit(capsys):
    code, _, err = run(capsys, "forge-associator", "-d", 9)
    assert code == EXIT_SOLVER
    assert "solver" in err


def test_forge_unwritable_output(capsys, tmp_path):
    assert run(capsys, "forge-associator", "-d", 1, "-o", tmp_path / "missing" / "phi.json")[0] == EXIT_IO


def test_verify_associator(capsys, tmp_path):
    out = tmp_path / "phi.json"
    run(capsys, "forge-associator", "-d", 2, "-o", out)
    code, text, _ = run(capsys, "verify", out)
    assert code == EXIT_OK and "series matches log" in text
    art = json.loads(out.read_text())
    art["log"][0]["coeff"] = "1/12"
    out.write_text(json.dumps(art))
    assert run(capsys, "verify", out)[0] == EXIT_VERIFY


# ---------------------------------------------------------------- quantize


def test_group_run_is_all_green(capsys, group_artifact):
    art = json.loads(group_artifact.read_text())
    assert art["kind"] == "quantum_group"
    assert {v["status"] for v in art["verification"]} == {"zero"}
    assert art["truncation"] == {"hbar_degree": 2, "jet_order": 3, "weight": 7}
    assert art["flags"]["cocommutative_at_hbar0"] is False
    assert "float" not in group_artifact.read_text()


def test_abelian_is_cocommutative(capsys, tmp_path):
    out = tmp_path / "ab.json"
    code, text, _ = run(capsys, "quantize-group", INPUTS / "abelian.toml", "-D", 1, "-N", 2, "-o", out)
    assert code == EXIT_OK
    assert json.loads(out.read_text())["flags"]["cocommutative_at_hbar0"] is True


def test_module_run(capsys, tmp_path):
    out = tmp_path / "mod.json"
    code, text, _ = run(capsys, "quantize-module", INPUTS / "axb.toml", "-m", INPUTS / "module_group.toml", "-D", 1, "-N", 2, "-o", out)
    assert code == EXIT_OK
    assert "ok   coaction coassociativity" in text and "ok   classical coaction" in text
    art = json.loads(out.read_text())
    assert art["kind"] == "quantum_module" and "coaction" in art


def test_point_module_run(capsys):
    code, text, _ = run(capsys, "quantize-module", INPUTS / "axb.toml", "-m", INPUTS / "module_point.toml", "-D", 1, "-N", 2)
    assert code == EXIT_OK and "overall: ok" in text


def test_optional_sections(capsys, tmp_path):
    out = tmp_path / "ops.json"
    code, _, _ = run(capsys, "quantize-group", INPUTS / "axb.toml", "-D", 1, "-N", 2, "--dump-operators", "--render", "-o", out)
    assert code == EXIT_OK
    art = json.loads(out.read_text())
    assert set(art["operators"]) == {"P(2)", "P(3)", "delta1"}
    assert art["render"] == "(v)+ cilia: 0 < 1"


def test_workers_do_not_change_artifact(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "quantize-group", INPUTS / "axb.toml", "-D", 1, "-N", 2, "-j", 1, "-o", a)
    run(capsys, "quantize-group", INPUTS / "axb.toml", "-D", 1, "-N", 2, "-j", 2, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_malformed_toml_exit_and_position(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('basis = ["e1", "e2"]\n[bracket\n')
    code, _, err = run(capsys, "quantize-group", bad)
    assert code == EXIT_IO
    assert f"{bad}:2:" in err


def test_non_cocycle_is_a_verification_failure(capsys, tmp_path):
    bad = tmp_path / "nc.toml"
    bad.write_text(NON_COCYCLE)
    code, _, err = run(capsys, "quantize-group", bad, "-D", 1, "-N", 2)
    assert code == EXIT_VERIFY
    assert "not a Lie bialgebra" in err


@pytest.mark.parametrize("args", [("-D", 2, "-N", 3, "--phi-degree", 1), ("-D", 2, "-N", 2), ("-D", -1, "-N", 2)])
def test_truncation_preconditions(capsys, args):
    assert run(capsys, "quantize-group", INPUTS / "axb.toml", *args)[0] == EXIT_IO


def test_unforgeable_associator_degree(capsys):
    assert run(capsys, "quantize-group", INPUTS / "axb.toml", "-D", 5, "-N", 6)[0] == EXIT_SOLVER


def test_missing_input_file(capsys, tmp_path):
    code, _, err = run(capsys, "quantize-group", tmp_path / "nope.toml")
    assert code == EXIT_IO


def test_unknown_option(capsys):
    assert run(capsys, "quantize-group", "--bogus")[0] == EXIT_IO


def test_explicit_associator_file(capsys, tmp_path):
    phi = tmp_path / "phi.json"
    run(capsys, "forge-associator", "-d", 1, "-o", phi)
    code, text, _ = run(capsys, "quantize-group", INPUTS / "axb.toml", "-D", 1, "-N", 2, "--phi", phi)
    assert code == EXIT_OK
    phi.write_text("{}")
    assert run(capsys, "quantize-group", INPUTS / "axb.toml", "--phi", phi)[0] == EXIT_IO


# ---------------------------------------------------------------- verify


def test_verify_reproduces(capsys, group_artifact):
    code, text, _ = run(capsys, "verify", group_artifact, "-j", 2)
    assert code == EXIT_OK and "ok   artifact reproduces" in text


def test_verify_detects_tampering(capsys, group_artifact, tmp_path):
    art = json.loads(group_artifact.read_text())
    art["counit"]["per_hbar_degree"][0]["0"]["0"] = "2"
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(art, sort_keys=True, indent=1) + "\n")
    code, text, _ = run(capsys, "verify", bad)
    assert code == EXIT_VERIFY and "FAIL artifact reproduces" in text


@pytest.mark.parametrize("content", ["not json", '{"kind": "poem"}'])
def test_verify_rejects_garbage(capsys, tmp_path, content):
    p = tmp_path / "x.json"
    p.write_text(content)
    assert run(capsys, "verify", p)[0] == EXIT_IO


# ---------------------------------------------------------------- render


def test_render_ordered_morphism(capsys):
    code, text, _ = run(capsys, "render", INPUTS / "morphism_p.toml")
    assert code == EXIT_OK
    top, _, bottom = text.splitlines()
    assert top.split() == ["1a", "2a", "1b", "2b", "3b", "1c"]
    assert [s.strip("\\_/") for s in bottom.split()] == ["a", "b", "c"]


def test_render_empty_graph(capsys, tmp_path):
    p = tmp_path / "empty.toml"
    p.write_text('kind = "graph"\n')
    code, text, _ = run(capsys, "render", p)
    assert code == EXIT_OK and text == ""


def test_render_gamma_H2(capsys):
    code, text, _ = run(capsys, "render", INPUTS / "gamma_H2.toml")
    assert code == EXIT_OK and text == "(v)+ cilia: 0 < 1 < 2\n"


def test_render_graph_with_edge(capsys):
    code, text, _ = run(capsys, "render", INPUTS / "graph_edge.toml")
    assert text.splitlines() == ["(u)+ cilia: a < c", "(w)- cilia: b", "e: a ==== b"]


@pytest.mark.parametrize(
    "content",
    ['kind = "sculpture"\n', 'kind = "gamma_H"\nn = -1\n', "[[vertex]]\nname = 'v'\n"],
)
def test_render_errors(capsys, tmp_path, content):
    p = tmp_path / "r.toml"
    p.write_text(content)
    assert run(capsys, "render", p)[0] == EXIT_IO
