import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from stonedual.cli import (
    DEGREE_CAP_ENV,
    InputError,
    Options,
    default_degree_cap,
    load_schema,
    main,
    parse_document,
    parse_instance,
    render_structured,
    run_command,
)

CORPUS = Path(str(resources.files("stonedual").joinpath("corpus")))
DOCS = Path(__file__).resolve().parents[1] / "docs"
MANIFEST = json.loads((CORPUS / "manifest.json").read_text())["runs"]
REPORT_VALIDATOR = jsonschema.Draft202012Validator(load_schema("report.schema.json"))


def run(command, name, *extra, capsys=None):
    code = main([command, str(CORPUS / name), "--format", "structured", *extra])
    out = capsys.readouterr().out
    report = json.loads(out)
    REPORT_VALIDATOR.validate(report)
    return code, report


# parsing


def test_minimal_group_parses():
    doc = parse_instance(CORPUS / "group-minimal.json")
    assert doc.kind == "group"
    assert doc.obj.factors


def test_bad_invariant_factors_rejected():
    with pytest.raises(InputError) as e:
        parse_instance(CORPUS / "group-bad-factors.json")
    assert e.value.path == "body.factors"


def test_undeclared_chain_is_dangling():
    with pytest.raises(InputError) as e:
        parse_instance(CORPUS / "etale-undeclared-chain.json")
    assert e.value.path == "body.chain"


def test_schema_errors_have_paths():
    with pytest.raises(InputError) as e:
        parse_document({"kind": "group", "body": {"factors": "two"}})
    assert e.value.path.startswith("body")
    with pytest.raises(InputError):
        parse_document({"kind": "no-such-kind", "body": {}})
    with pytest.raises(InputError):
        parse_instance(CORPUS / "missing.json")


def test_bad_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert main(["validate", str(p)]) == 2
    assert "INPUT ERROR" in capsys.readouterr().out


# commands


def test_sections_lists_order_six(capsys):
    code, report = run("sections", "etale-z2-z3.json", capsys=capsys)
    assert code == 0 and report["status"] == "pass"
    orders = [lvl["module"]["order"] for c in report["checks"] if c["name"] == "sections.global" for lvl in c["data"]["levels"]]
    assert 6 in orders


def test_mv_check_c2_star(capsys):
    code, report = run("mv-check", "mv-c2-star.json", capsys=capsys)
    assert code == 0
    names = [c["name"] for c in report["checks"]]
    assert names == sorted(names)
    assert {"mv.tree_sequence", "mv.les_exact", "mv.terms_agree"} <= set(names)


def test_validate_counterexample_has_witness(capsys):
    code, report = run("validate", "sheaf-counterexample.json", capsys=capsys)
    assert code == 1 and report["status"] == "fail"
    failed = [c for c in report["checks"] if not c["ok"]]
    assert failed and all(c.get("witness") is not None for c in failed)


def test_three_cycle_fails_and_inversion_is_input_error(capsys):
    code, report = run("mv-check", "mv-three-cycle.json", capsys=capsys)
    assert code == 1
    assert [c["name"] for c in report["checks"]] == ["mv.tree_sequence"]
    code, report = run("mv-check", "mv-edge-inversion.json", capsys=capsys)
    assert code == 2 and report["status"] == "input-error"


def test_text_output(capsys):
    assert main(["validate", str(CORPUS / "group-minimal.json")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "PASS"
    assert "time" not in out


def test_timing_only_on_request(capsys):
    code, report = run("validate", "group-minimal.json", "--timing", capsys=capsys)
    assert "timing_seconds" in report
    code, report = run("validate", "group-minimal.json", capsys=capsys)
    assert "timing_seconds" not in report


def test_degree_cap_from_environment(monkeypatch, capsys):
    monkeypatch.setenv(DEGREE_CAP_ENV, "1")
    assert default_degree_cap() == 1
    code, report = run("cohomology", "cohomology-c2-z2.json", capsys=capsys)
    assert report["degree_cap"] == 1
    # the flag wins over the environment
    code, report = run("cohomology", "cohomology-c2-z2.json", "--degree-cap", "0", capsys=capsys)
    assert report["degree_cap"] == 0
    monkeypatch.setenv(DEGREE_CAP_ENV, "many")
    with pytest.raises(InputError):
        default_degree_cap()
    monkeypatch.delenv(DEGREE_CAP_ENV)
    assert default_degree_cap() == 2


def test_run_command_is_deterministic():
    doc = parse_instance(CORPUS / "etale-z2-z3.json")
    a = render_structured(run_command("duality-square", doc, Options(seed=3)))
    b = render_structured(run_command("duality-square", parse_instance(CORPUS / "etale-z2-z3.json"), Options(seed=3)))
    assert a == b


def test_unknown_subcommand():
    with pytest.raises(InputError):
        run_command("frobnicate", parse_instance(CORPUS / "group-minimal.json"))


@pytest.mark.parametrize("entry", MANIFEST, ids=lambda e: f"{e['command']}:{e['instance']}")
def test_manifest_exit_codes(entry, capsys):
    code, report = run(entry["command"], entry["instance"], capsys=capsys)
    assert code == entry["exit_code"] == report["exit_code"]
    if code == 1:
        assert any(c.get("witness") is not None for c in report["checks"] if not c["ok"])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "stonedual", "validate", str(CORPUS / "group-minimal.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout.strip().endswith("PASS")


@pytest.mark.parametrize("name", ["instance.schema.json", "report.schema.json"])
def test_docs_schemas_match_package(name):
    assert json.loads((DOCS / name).read_text()) == load_schema(name)


def test_corpus_documents_validate_against_schema():
    validator = jsonschema.Draft202012Validator(load_schema("instance.schema.json"))
    for p in sorted(CORPUS.glob("*.json")):
        if p.name == "manifest.json":
            continue
        validator.validate(json.loads(p.read_text()))
