from __future__ import annotations

"""procedures.checks

Исполнение утверждений spec-файла: одна функция на вид проверки.

Содержит:
- RunCfg: итоговые параметры запуска (бюджет, глубина поиска, граница перебора)
- check_*(): функции, соответствующие видам утверждений (kind)
- run_assertion(): одна строка отчёта, исключения превращаются в вердикт
- run_all(): все утверждения по порядку файла (при jobs > 1 — пул потоков)

Каждая check_* возвращает (Verdict, сертификат-текст или None).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple
import logging

from calculus import eff
from calculus import finite_topos as ft
from calculus import language as lang
from calculus import pca
from calculus.pca import BudgetExceeded
from calculus.realizability import NotFound, poset_equal, search_track
from calculus.verdict import Verdict

from .common import CheckResult, Stopwatch, make_result, render_certificate
from .specfile import AssertionDef, SpecFile
from .suites import epsilon_rule_check

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunCfg:
    budget: int = 10_000
    depth: int = 4
    bound: int = 3
    jobs: int = 1


Outcome = Tuple[Verdict, Optional[str]]


def _per(spec: SpecFile, name: str, cfg: RunCfg) -> eff.Per:
    d = spec.pers[name]
    return eff.make_per(d.carrier, d.rho, cfg.depth, cfg.budget)


def _prop(spec: SpecFile, name: str, cfg: RunCfg) -> eff.StrictRelationalProp:
    d = spec.props[name]
    return eff.make_prop(_per(spec, d.per, cfg), d.values, cfg.depth, cfg.budget)


def _bound(params: dict, cfg: RunCfg) -> int:
    return int(params.get("bound", cfg.bound))


def _equality_rows(eq) -> list[dict]:
    return [{"obligation": f"equality.{k}", "track": str(t), "budget": t.budget.max_steps}
            for k, t in (("lr", eq.track_lr), ("rl", eq.track_rl))]


# --- realizability ---

def check_reduce(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    out = pca.reduce(pca.parse_term(str(params["term"])), cfg.budget)
    if isinstance(out, BudgetExceeded):
        return Verdict.undetermined(f"no normal form within {out.max_steps} steps"), None
    if "expect" in params:
        expected = pca.reduce(pca.parse_term(str(params["expect"])), cfg.budget)
        if isinstance(expected, BudgetExceeded):
            return Verdict.undetermined("expected term has no normal form within budget"), None
        if expected.term != out.term:
            return Verdict.fails(out.term, f"normal form differs from {pca.format_term(expected.term)}"), None
    return Verdict.holds(out.term), f"steps: {out.steps}"


def check_leq(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    got = search_track(spec.predicates[params["left"]], spec.predicates[params["right"]],
                       cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(got.witness), f"track: {got} @{got.budget.max_steps}"


def check_poset_equal(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    got = poset_equal(spec.predicates[params["left"]], spec.predicates[params["right"]],
                      cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(), render_certificate(_equality_rows(got))


# --- eff ---

def check_per(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    per = _per(spec, params["per"], cfg)
    return per.recheck(), render_certificate(eff.certificate_rows(per, params["per"]))


def check_prop(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    p = _prop(spec, params["prop"], cfg)
    return p.recheck(), render_certificate(eff.certificate_rows(p, params["prop"]))


def check_epi_bang(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    got = eff.is_epi(eff.bang(_per(spec, params["per"], cfg), cfg.depth, cfg.budget), cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(), f"epi: {got.track} @{got.track.budget.max_steps}"


def check_epsilon(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    cert = eff.synthesize_epsilon(_prop(spec, params["prop"], cfg), cfg.depth, cfg.budget)
    rows = render_certificate(eff.certificate_rows(cert))
    again = cert.recheck()
    if not again.ok:
        return again, rows
    witness = f"Γ({cert.point})"
    if "expect_point" in params and cert.point != params["expect_point"]:
        return Verdict.fails(witness, f"expected Γ({params['expect_point']})"), rows
    return Verdict.holds(witness), rows


def check_hilbertian_square(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    p = _prop(spec, params["prop"], cfg)
    cert = eff.synthesize_epsilon(p, cfg.depth, cfg.budget)
    got = eff.hilbertian_square(cert, p, cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(f"Γ({cert.point})"), render_certificate(_equality_rows(got))


def check_lemma(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    fmap = {k: _hashable(v) for k, v in params["map"].items()}
    got = eff.lemma_check(_prop(spec, params["prop"], cfg), fmap, _per(spec, params["source"], cfg),
                          cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(), render_certificate(_equality_rows(got))


def check_corollary(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    got = eff.corollary_check(_prop(spec, params["prop"], cfg), _hashable(params["point"]),
                              cfg.depth, cfg.budget)
    if isinstance(got, NotFound):
        return got.verdict(), None
    return Verdict.holds(), render_certificate(_equality_rows(got))


def _hashable(v: Any) -> Any:
    return tuple(_hashable(x) for x in v) if isinstance(v, list) else v


# --- finite toposes ---

def check_ac(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    return ft.check_ac(spec.toposes[params["topos"]], _bound(params, cfg)), None


def check_partial_epsilon(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    return ft.check_partial_epsilon(spec.toposes[params["topos"]], _bound(params, cfg)), None


def check_epsilon_topos(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    return ft.check_epsilon_topos(spec.toposes[params["topos"]], _bound(params, cfg)), None


def check_full_epsilon(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    return ft.check_full_epsilon(spec.toposes[params["topos"]], _bound(params, cfg)), None


def check_hilbertian_instance(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    got = ft.check_hilbertian_instance(spec.subobjects[params["subobject"]])
    if isinstance(got, ft.HilbertianFailure):
        return Verdict.fails(got.subobject, got.reason), None
    return Verdict.holds(got.eps), None


def check_epsilon_full(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    res = ft.synthesize_epsilon_full(params["phi"], spec.objects[params["gamma"]], spec.objects[params["a"]])
    if not res.square_is_pullback:
        return Verdict.fails(res.eps_phi, "square with <id, eps> is not a pullback"), None
    return Verdict.holds(res.eps_phi), None


# --- internal language ---

def check_derivable(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    session = spec.languages[params["language"]].session()
    d = session.derivable(str(params["sequent"]))
    if d.holds:
        return Verdict.holds(d.witness), None
    outside = d.antecedent.meet(ft.complement(d.consequent))
    return Verdict.fails(outside, "antecedent does not factor through the consequent"), None


def check_eps_rule(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    session = spec.languages[params["language"]].session()
    try:
        res = session.eps_rule(str(params["formula"]), str(params["context"]), params.get("mode", "full"))
    except (lang.EmptyTypeRejected, lang.ModeViolation) as e:
        if params.get("expect_rejected"):
            return Verdict.holds(type(e).__name__), None
        raise
    if params.get("expect_rejected"):
        return Verdict.fails(res.arrow, "expected the epsilon rule to be rejected"), None
    seq = lang.format_sequent(res.epsI_sequent)
    if not res.epsI_valid:
        return Verdict.fails(seq, "epsilon-I sequent is not derivable"), None
    return Verdict.holds(res.arrow), f"{res.symbol}: {seq}"


def check_ac_witness(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    session = spec.languages[params["language"]].session()
    got = session.ac_witness(str(params["formula"]), str(params["context"]))
    seq = lang.format_sequent(got.sequent)
    if not got.valid:
        return Verdict.fails(seq, "choice sequent is not derivable"), None
    return Verdict.holds(got.eps.arrow), f"{got.eps.symbol}: {seq}"


def check_epsilon_rules(spec: SpecFile, params: dict, cfg: RunCfg) -> Outcome:
    return epsilon_rule_check(spec.toposes[params["topos"]], _bound(params, cfg)), None


CHECKS: Dict[str, Callable[[SpecFile, dict, RunCfg], Outcome]] = {
    "reduce": check_reduce,
    "leq": check_leq,
    "poset_equal": check_poset_equal,
    "per": check_per,
    "prop": check_prop,
    "epi_bang": check_epi_bang,
    "epsilon": check_epsilon,
    "hilbertian_square": check_hilbertian_square,
    "lemma": check_lemma,
    "corollary": check_corollary,
    "ac": check_ac,
    "partial_epsilon": check_partial_epsilon,
    "epsilon_topos": check_epsilon_topos,
    "full_epsilon": check_full_epsilon,
    "hilbertian_instance": check_hilbertian_instance,
    "epsilon_full": check_epsilon_full,
    "derivable": check_derivable,
    "eps_rule": check_eps_rule,
    "ac_witness": check_ac_witness,
    "epsilon_rules": check_epsilon_rules,
}


def run_assertion(spec: SpecFile, a: AssertionDef, cfg: RunCfg) -> CheckResult:
    """Одна строка отчёта; ошибка внутри проверки не прерывает запуск."""
    cert = None
    with Stopwatch() as sw:
        try:
            verdict, cert = CHECKS[a.kind](spec, a.params, cfg)
        except eff.CertificationError as e:
            verdict = Verdict(e.result.verdict().status, e.result.witness, str(e))
        except (ft.PreconditionError, lang.EmptyTypeRejected, lang.ModeViolation) as e:
            verdict = Verdict.fails(getattr(e, "offender", None), str(e))
        except Exception as e:
            log.exception("assertion %s crashed", a.id)
            verdict = Verdict.fails(None, f"internal error: {e!r}")
    log.info("%s: %s", a.id, verdict.status.value)
    return make_result(a.id, a.kind, verdict, sw.millis, cert)


def run_all(spec: SpecFile, cfg: RunCfg, results: List[CheckResult] | None = None) -> List[CheckResult]:
    """Все утверждения в порядке файла; результаты дописываются в results по мере готовности."""
    out = results if results is not None else []
    if cfg.jobs <= 1:
        for a in spec.assertions:
            out.append(run_assertion(spec, a, cfg))
        return out
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        for row in pool.map(lambda a: run_assertion(spec, a, cfg), spec.assertions):
            out.append(row)
    return out
