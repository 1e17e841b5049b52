from __future__ import annotations

from pathlib import Path

import pandas as pd
import pytest

import run_workbench
from calculus import pca
from procedures import checks
from procedures.checks import RunCfg, run_all
from procedures.common import exit_status
from procedures.specfile import SpecFileError, load, load_text
from procedures.tables_demos import SUITES, command_suite

SPECS = Path(__file__).resolve().parent.parent / "specs"

TOPOS = "toposes:\n  sets: {arity: 1}\n"


def _write(tmp_path: Path, name: str, text: str) -> str:
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def _verdicts(results) -> dict[str, str]:
    return {r.id: r.verdict for r in results}


# --- spec files ---

def test_unknown_top_key_has_position() -> None:
    with pytest.raises(SpecFileError) as err:
        load_text("budget: 3\nbugdet: 4\n", "x.eps")
    assert (err.value.line, err.value.column) == (2, 1)
    assert str(err.value).startswith("x.eps:2:1:")


def test_unknown_assertion_key_has_position() -> None:
    text = TOPOS + "assertions:\n  - kind: ac\n    topos: sets\n    colour: red\n"
    with pytest.raises(SpecFileError) as err:
        load_text(text)
    assert (err.value.line, err.value.column) == (6, 5)
    assert "colour" in str(err.value)


def test_bad_reference_is_reported() -> None:
    with pytest.raises(SpecFileError) as err:
        load_text("assertions:\n  - kind: ac\n    topos: nope\n")
    assert err.value.line == 3
    assert "unknown topos 'nope'" in str(err.value)


def test_unknown_kind() -> None:
    with pytest.raises(SpecFileError):
        load_text(TOPOS + "assertions:\n  - kind: magic\n    topos: sets\n")


def test_bad_formula_is_a_spec_error() -> None:
    text = (TOPOS + "objects:\n  A: {topos: sets, components: [[a0]]}\n"
            "languages:\n  L: {topos: sets, types: {A: A}}\n"
            "assertions:\n  - {kind: eps_rule, language: L, formula: \"P(x\", context: \"x:A\"}\n")
    with pytest.raises(SpecFileError) as err:
        load_text(text)
    assert err.value.line == 8


def test_bad_term_is_a_spec_error() -> None:
    with pytest.raises(SpecFileError):
        load_text("assertions:\n  - {kind: reduce, term: \"S (K\"}\n")


def test_negative_setting_is_rejected() -> None:
    with pytest.raises(SpecFileError):
        load_text("budget: -1\n")


def test_yaml_syntax_error_has_position() -> None:
    with pytest.raises(SpecFileError) as err:
        load_text("assertions: [\n  {kind: ac\n")
    assert err.value.line is not None


def test_missing_file() -> None:
    with pytest.raises(SpecFileError):
        load("no/such/file.eps")


def test_empty_file_has_no_assertions() -> None:
    spec = load_text("")
    assert spec.assertions == []
    assert exit_status(run_all(spec, RunCfg())) == 0


def test_assertion_ids_default_to_kind_and_position() -> None:
    spec = load_text(TOPOS + "assertions:\n  - {kind: ac, topos: sets, bound: 1}\n"
                             "  - {id: named, kind: ac, topos: sets, bound: 1}\n")
    assert [a.id for a in spec.assertions] == ["ac-1", "named"]
    assert spec.assertions[0].line == 4


@pytest.mark.parametrize("path", sorted(SPECS.glob("*.eps")), ids=lambda p: p.name)
def test_shipped_specs_load(path: Path) -> None:
    spec = load(path)
    assert spec.assertions


def test_epsilon_rules_spec_holds() -> None:
    results = run_all(load(SPECS / "epsilon_rules.eps"), RunCfg())
    assert all(r.verdict == "holds" for r in results), [(r.id, r.reason) for r in results]
    by_id = {r.id: r for r in results}
    assert by_id["empty-type"].witness == "EmptyTypeRejected"
    assert by_id["eps-f-open-partial"].witness == "ModeViolation"


def test_assertion_bound_wins_over_run_bound() -> None:
    spec = load_text(TOPOS + "assertions:\n  - {kind: epsilon_rules, topos: sets, bound: 1}\n")
    (row,) = run_all(spec, RunCfg(bound=3))
    # one element: two closed and two open instances
    assert row.witness == "4"


def test_crash_inside_a_check_is_a_failure(monkeypatch: pytest.MonkeyPatch) -> None:
    def broken(spec, params, cfg):
        raise KeyError("missing")

    monkeypatch.setitem(checks.CHECKS, "reduce", broken)
    spec = load_text("assertions:\n  - {id: boom, kind: reduce, term: \"K\"}\n")
    (row,) = run_all(spec, RunCfg())
    assert row.verdict == "fails"
    assert row.reason.startswith("internal error:")
    assert exit_status([row]) == 1


# --- demo suites ---

def test_unknown_suite() -> None:
    with pytest.raises(ValueError):
        command_suite("demo-nothing")


def test_all_suites_parse() -> None:
    for name in SUITES:
        assert command_suite(name).assertions


def test_demo_sets2() -> None:
    results = run_all(command_suite("demo-sets2"), RunCfg())
    assert _verdicts(results) == {"sets2-validates-ac": "holds", "sets2-is-epsilon-topos": "fails"}
    assert exit_status(results) == 1


def test_demo_eff() -> None:
    results = run_all(command_suite("demo-eff"), RunCfg())
    assert all(r.verdict == "holds" for r in results), [(r.id, r.reason) for r in results]
    by_id = {r.id: r for r in results}
    assert by_id["epsilon-at-a1"].witness == "Γ(a1)"
    assert by_id["epsilon-at-a1"].certificate


def test_parallel_run_keeps_file_order() -> None:
    spec = command_suite("demo-eff")
    serial = run_all(spec, RunCfg(jobs=1))
    parallel = run_all(spec, RunCfg(jobs=4))
    assert [r.id for r in parallel] == [r.id for r in serial]
    assert [r.verdict for r in parallel] == [r.verdict for r in serial]


# --- command line ---

def test_main_suite_writes_json_lines(tmp_path: Path) -> None:
    emit = tmp_path / "report.jsonl"
    code = run_workbench.main(["--suite", "demo-sets", "--config", str(tmp_path / "none.yaml"),
                               "--emit", str(emit)])
    assert code == 0
    df = pd.read_json(emit, lines=True)
    assert list(df["id"]) == ["sets-is-epsilon-topos"]
    assert list(df["verdict"]) == ["holds"]


def test_main_exit_codes(tmp_path: Path) -> None:
    cfg = ["--config", str(tmp_path / "none.yaml")]
    empty = _write(tmp_path, "empty.eps", "")
    assert run_workbench.main([empty, *cfg]) == 0
    assert run_workbench.main(["--suite", "demo-sets2", *cfg]) == 1
    omega = _write(tmp_path, "omega.eps", "assertions:\n  - {kind: reduce, term: \"S I I (S I I)\"}\n")
    assert run_workbench.main([omega, "--budget", "100", *cfg]) == 2
    broken = _write(tmp_path, "broken.eps", "assertions:\n  - {kind: nope}\n")
    assert run_workbench.main([broken, *cfg]) == 3


def test_main_writes_csv(tmp_path: Path) -> None:
    spec = _write(tmp_path, "k.eps", "assertions:\n  - {id: k, kind: reduce, term: \"K n0 n1\", expect: n0}\n")
    out = tmp_path / "report.csv"
    assert run_workbench.main([spec, "--config", str(tmp_path / "none.yaml"), "--csv", str(out)]) == 0
    df = pd.read_csv(out)
    assert list(df.columns) == ["id", "kind", "verdict", "witness", "certificate", "millis", "reason"]
    assert df.loc[0, "witness"] == pca.format_term(pca.numeral(0))


def test_spec_and_suite_are_exclusive() -> None:
    with pytest.raises(SystemExit):
        run_workbench.parse_args(["a.eps", "--suite", "demo-sets"])
    with pytest.raises(SystemExit):
        run_workbench.parse_args([])


def test_settings_precedence() -> None:
    args = run_workbench.parse_args(["a.eps", "--bound", "5"])
    config = {"budget": 1, "depth": 2, "bound": 1, "jobs": 1, "log_level": "ERROR"}
    spec = load_text("budget: 9\ndepth: 7\n")
    env = {"EPSWB_BUDGET": "11", "EPSWB_LOG_LEVEL": "info"}
    cfg, level = run_workbench.resolve(args, config, spec, env)
    assert cfg == RunCfg(budget=11, depth=7, bound=5, jobs=1)
    assert level == "INFO"


def test_settings_defaults_without_config() -> None:
    args = run_workbench.parse_args(["--suite", "demo-sets"])
    cfg, level = run_workbench.resolve(args, {}, None, {})
    assert cfg == RunCfg()
    assert level == "WARNING"
