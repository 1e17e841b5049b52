from __future__ import annotations

"""calculus.eff

Настольная версия эффективного топоса: PER, функциональные отношения,
строгие реляционные пропозиции, свойства 1)–6), лемма, следствие и синтез
ε-терма ("Eff гильбертов").

Зачем:
- Каждый объект/морфизм хранит сертификаты (треки) своих условий; они
  сохраняются, экспортируются и перепроверяются (recheck), а не принимаются
  на веру.
- Треки сначала строятся так, как их строит доказательство (из треков
  симметрии/транзитивности и т.п.), и только если подсказка не подошла —
  ищутся перебором (realizability.search_track).

Соглашения:
- Моно задаются только в нормальной форме ρ_P (StrictRelationalProp).
- Композиция (G∘F)(a,c) = ⋃_b F(a,b) ∧ G(b,c).
- Выбор точки ("есть ā", "есть q") — первый элемент носителя.
"""

from dataclasses import dataclass
from functools import reduce as _fold
from typing import Callable, Hashable, Iterable, Mapping, Sequence
import logging

from . import pca
from .pca import App, Budget, Term, Var, as_budget
from .realizability import (
    ALL,
    EMPTY,
    Carrier,
    NotFound,
    Obligation,
    PosetEquality,
    Predicate,
    RealizerSet,
    Track,
    meet,
    meet_sets,
    poset_equal,
    precompose,
    product,
    union_over,
)
from .verdict import Status, Verdict

log = logging.getLogger(__name__)

Element = Hashable
STAR = "*"


class CertificationError(ValueError):
    """Не найден сертификат одного из условий.

    inconclusive=True, если это не опровержение, а лишь неудача поиска
    в пределах depth/budget.
    """

    def __init__(self, obligation: str, text: str, result: NotFound):
        kind = "refuted" if result.refuted else "not certified"
        super().__init__(f"{obligation} {kind}: {text} ({result.reason})")
        self.obligation = obligation
        self.text = text
        self.result = result
        self.inconclusive = not result.refuted


# --- term builders for proof tracks ---

_x = Var("x")


def _fst(t: Term) -> Term:
    return App(pca.FST, t)


def _snd(t: Term) -> Term:
    return App(pca.SND, t)


def _pair(a: Term, b: Term) -> Term:
    return pca.app(pca.PAIR, a, b)


def _fn(body: Term) -> Term:
    return pca.lam("x", body)


def _certify(obligations: Mapping[str, Obligation], hints: Mapping[str, Sequence[Term]],
             depth: int, budget: Budget) -> dict[str, Track]:
    tracks: dict[str, Track] = {}
    for name, ob in obligations.items():
        found = ob.search(depth, budget, hints.get(name, ()))
        if isinstance(found, NotFound):
            log.info("certification failed: %s", ob.text)
            raise CertificationError(name, ob.text, found)
        tracks[name] = found
    return tracks


def _recheck(obligations: Mapping[str, Obligation], tracks: Mapping[str, Track]) -> Verdict:
    for name, ob in obligations.items():
        track = tracks[name]
        v = ob.verify(track.witness, track.budget)
        if not v.ok:
            return Verdict(v.status, (name, v.witness), v.reason)
    return Verdict.holds()


def _rows(prefix: str, tracks: Mapping[str, Track]) -> list[dict]:
    return [{"obligation": f"{prefix}.{name}", "track": str(t), "budget": t.budget.max_steps}
            for name, t in tracks.items()]


# --- PER ---

def per_obligations(carrier: Carrier, rho: Predicate) -> dict[str, Obligation]:
    a2, a3 = product(carrier, carrier), product(carrier, carrier, carrier)
    if rho.carrier != a2:
        raise ValueError("rho must live on A x A")
    return {
        "sym": Obligation(
            "sym", "⋂x⋂y ρ(x,y) → ρ(y,x)",
            rho, Predicate.build(a2, lambda xy: rho((xy[1], xy[0])))),
        "trans": Obligation(
            "trans", "⋂x⋂y⋂z ρ(x,y) ∧ ρ(y,z) → ρ(x,z)",
            Predicate.build(a3, lambda t: meet_sets(rho((t[0], t[1])), rho((t[1], t[2])))),
            Predicate.build(a3, lambda t: rho((t[0], t[2])))),
    }


@dataclass(frozen=True)
class Per:
    carrier: Carrier
    rho: Predicate
    cert_sym: Track
    cert_trans: Track

    def __call__(self, x: Element, y: Element) -> RealizerSet:
        return self.rho((x, y))

    def diag(self) -> Predicate:
        return Predicate.build(self.carrier, lambda x: self.rho((x, x)))

    @property
    def is_top(self) -> bool:
        return all(v.is_all for v in self.rho.values)

    def obligations(self) -> dict[str, Obligation]:
        return per_obligations(self.carrier, self.rho)

    def certificates(self) -> dict[str, Track]:
        return {"sym": self.cert_sym, "trans": self.cert_trans}

    def recheck(self) -> Verdict:
        return _recheck(self.obligations(), self.certificates())


def make_per(carrier: Carrier, rho: Predicate, depth: int = 4, budget: Budget | int | None = None,
             hints: Mapping[str, Sequence[Term]] | None = None) -> Per:
    """Сертифицировать ρ как PER: ищутся треки симметрии и транзитивности."""
    b = as_budget(budget)
    base = {"sym": [pca.I], "trans": [pca.FST, pca.SND, pca.I]}
    for k, v in (hints or {}).items():
        base[k] = list(v) + base.get(k, [])
    tracks = _certify(per_obligations(carrier, rho), base, depth, b)
    return Per(carrier, rho, tracks["sym"], tracks["trans"])


def terminal(budget: Budget | int | None = None) -> Per:
    """(1, ⊤_{1×1})."""
    one = Carrier.singleton()
    return make_per(one, Predicate.constant(product(one, one), ALL), 0, budget)


# --- strict relational propositions ---

def prop_obligations(base: Per, p: Predicate) -> dict[str, Obligation]:
    if p.carrier != base.carrier:
        raise ValueError("proposition must live on the carrier of its Per")
    a2 = product(base.carrier, base.carrier)
    return {
        "strict": Obligation("strict", "⋂x P(x) → ρ(x,x)", p, base.diag()),
        "relational": Obligation(
            "relational", "⋂x⋂y ρ(x,y) ∧ P(x) → P(y)",
            Predicate.build(a2, lambda xy: meet_sets(base(*xy), p(xy[0]))),
            Predicate.build(a2, lambda xy: p(xy[1]))),
    }


@dataclass(frozen=True)
class StrictRelationalProp:
    base: Per
    P: Predicate
    cert_strict: Track
    cert_rel: Track

    def obligations(self) -> dict[str, Obligation]:
        return prop_obligations(self.base, self.P)

    def certificates(self) -> dict[str, Track]:
        return {"strict": self.cert_strict, "relational": self.cert_rel}

    def recheck(self) -> Verdict:
        return _recheck(self.obligations(), self.certificates())


def make_prop(base: Per, p: Predicate, depth: int = 4, budget: Budget | int | None = None,
              hints: Mapping[str, Sequence[Term]] | None = None) -> StrictRelationalProp:
    b = as_budget(budget)
    merged = {"strict": [pca.I], "relational": [pca.SND, pca.I]}
    for k, v in (hints or {}).items():
        merged[k] = list(v) + merged.get(k, [])
    tracks = _certify(prop_obligations(base, p), merged, depth, b)
    return StrictRelationalProp(base, p, tracks["strict"], tracks["relational"])


# --- functional relations ---

def functional_obligations(source: Per, target: Per, f: Predicate) -> dict[str, Obligation]:
    a, bb = source.carrier, target.carrier
    if f.carrier != product(a, bb):
        raise ValueError("functional relation must live on A x B")
    ab, aabb, abb = product(a, bb), product(a, a, bb, bb), product(a, bb, bb)
    return {
        "strict": Obligation(
            "strict", "⋂a⋂b F(a,b) → ρ(a,a) ∧ σ(b,b)",
            f, Predicate.build(ab, lambda t: meet_sets(source(t[0], t[0]), target(t[1], t[1])))),
        "relational": Obligation(
            "relational", "⋂a⋂a'⋂b⋂b' F(a,b) ∧ ρ(a,a') ∧ σ(b,b') → F(a',b')",
            Predicate.build(aabb, lambda t: meet_sets(meet_sets(f((t[0], t[2])), source(t[0], t[1])),
                                                      target(t[2], t[3]))),
            Predicate.build(aabb, lambda t: f((t[1], t[3])))),
        "single_valued": Obligation(
            "single_valued", "⋂a⋂b⋂b' F(a,b) ∧ F(a,b') → σ(b,b')",
            Predicate.build(abb, lambda t: meet_sets(f((t[0], t[1])), f((t[0], t[2])))),
            Predicate.build(abb, lambda t: target(t[1], t[2]))),
        "total": Obligation(
            "total", "⋂a [ρ(a,a) → ⋃b F(a,b)]",
            source.diag(),
            union_over(bb, lambda y: Predicate.build(a, lambda x: f((x, y))), a)),
    }


@dataclass(frozen=True)
class FunctionalRelation:
    source: Per
    target: Per
    F: Predicate
    cert_strict: Track
    cert_relational: Track
    cert_single_valued: Track
    cert_total: Track

    def obligations(self) -> dict[str, Obligation]:
        return functional_obligations(self.source, self.target, self.F)

    def certificates(self) -> dict[str, Track]:
        return {"strict": self.cert_strict, "relational": self.cert_relational,
                "single_valued": self.cert_single_valued, "total": self.cert_total}

    def recheck(self) -> Verdict:
        return _recheck(self.obligations(), self.certificates())


def make_functional(source: Per, target: Per, f: Predicate, depth: int = 4,
                    budget: Budget | int | None = None,
                    hints: Mapping[str, Sequence[Term]] | None = None) -> FunctionalRelation:
    b = as_budget(budget)
    tracks = _certify(functional_obligations(source, target, f), dict(hints or {}), depth, b)
    return FunctionalRelation(source, target, f, tracks["strict"], tracks["relational"],
                              tracks["single_valued"], tracks["total"])


def bang(p: Per, depth: int = 4, budget: Budget | int | None = None) -> FunctionalRelation:
    """1_ρ: (A,ρ) → (1,⊤), F(x,⋆) = ρ(x,x)."""
    b = as_budget(budget)
    one = terminal(b)
    f = Predicate.build(product(p.carrier, one.carrier), lambda t: p(t[0], t[0]))
    s, t = p.cert_sym.witness, p.cert_trans.witness
    r = _snd(_fst(_x))
    hints = {
        "strict": [_fn(_pair(_x, pca.K))],
        "relational": [_fn(App(t, _pair(App(s, r), r)))],
        "single_valued": [pca.I],
        "total": [pca.I],
    }
    return make_functional(p, one, f, depth, b, hints)


def identity(p: Per, depth: int = 4, budget: Budget | int | None = None) -> FunctionalRelation:
    """Тождественный морфизм: F = ρ."""
    s, t = p.cert_sym.witness, p.cert_trans.witness
    r1, r2, r3 = _fst(_fst(_x)), _snd(_fst(_x)), _snd(_x)
    hints = {
        "strict": [_fn(_pair(App(t, _pair(_x, App(s, _x))), App(t, _pair(App(s, _x), _x))))],
        "relational": [_fn(App(t, _pair(App(t, _pair(App(s, r2), r1)), r3)))],
        "single_valued": [_fn(App(t, _pair(App(s, _fst(_x)), _snd(_x))))],
        "total": [pca.I],
    }
    return make_functional(p, p, p.rho, depth, budget, hints)


def compose(f: FunctionalRelation, g: FunctionalRelation, depth: int = 4,
            budget: Budget | int | None = None) -> FunctionalRelation:
    """G∘F: (G∘F)(a,c) = ⋃_b F(a,b) ∧ G(b,c)."""
    if f.target.carrier != g.source.carrier or f.target.rho != g.source.rho:
        raise ValueError("morphisms do not compose")
    a, bb, c = f.source.carrier, f.target.carrier, g.target.carrier
    gf = Predicate.build(product(a, c), lambda t: _fold(
        RealizerSet.union, (meet_sets(f.F((t[0], y)), g.F((y, t[1]))) for y in bb), EMPTY))
    sf, rf, vf, tf = (f.cert_strict.witness, f.cert_relational.witness,
                      f.cert_single_valued.witness, f.cert_total.witness)
    sg, rg, vg, tg = (g.cert_strict.witness, g.cert_relational.witness,
                      g.cert_single_valued.witness, g.cert_total.witness)
    fx, gx = _fst(_fst(_fst(_x))), _snd(_fst(_fst(_x)))
    r, tau = _snd(_fst(_x)), _snd(_x)
    f1, g1, f2, g2 = _fst(_fst(_x)), _snd(_fst(_x)), _fst(_snd(_x)), _snd(_snd(_x))
    sigma12 = App(vf, _pair(f1, f2))
    g_moved = App(rg, _pair(_pair(g1, sigma12), _snd(App(sg, g1))))
    hints = {
        "strict": [_fn(_pair(_fst(App(sf, _fst(_x))), _snd(App(sg, _snd(_x)))))],
        "relational": [_fn(_pair(
            App(rf, _pair(_pair(fx, r), _snd(App(sf, fx)))),
            App(rg, _pair(_pair(gx, _fst(App(sg, gx))), tau))))],
        "single_valued": [_fn(App(vg, _pair(g_moved, g2)))],
        "total": [_fn(_pair(App(tf, _x), App(tg, _snd(App(sf, App(tf, _x))))))],
    }
    return make_functional(f.source, g.target, gf, depth, budget, hints)


# --- properties 1) .. 6) ---

def restrict_mono(p: StrictRelationalProp, depth: int = 4,
                  budget: Budget | int | None = None) -> tuple[Per, FunctionalRelation]:
    """(A, ρ_P) с ρ_P(x,y) = ρ(x,y) ∧ P(x) и включение в (A, ρ)."""
    b = as_budget(budget)
    base = p.base
    a2 = product(base.carrier, base.carrier)
    rho_p = Predicate.build(a2, lambda xy: meet_sets(base(*xy), p.P(xy[0])))
    s, t, rel = base.cert_sym.witness, base.cert_trans.witness, p.cert_rel.witness
    per_hints = {
        "sym": [_fn(_pair(App(s, _fst(_x)), App(rel, _x)))],
        "trans": [_fn(_pair(App(t, _pair(_fst(_fst(_x)), _fst(_snd(_x)))), _snd(_fst(_x))))],
    }
    restricted = make_per(base.carrier, rho_p, depth, b, per_hints)
    r, pp = _fst(_x), _snd(_x)
    rr, rp = _fst(_fst(_fst(_x))), _snd(_fst(_fst(_x)))
    r2, r3 = _fst(_snd(_fst(_x))), _snd(_x)
    inc_hints = {
        "strict": [_fn(_pair(_pair(App(t, _pair(r, App(s, r))), pp), App(t, _pair(App(s, r), r))))],
        "relational": [_fn(_pair(App(t, _pair(App(t, _pair(App(s, r2), rr)), r3)),
                                 App(rel, _pair(r2, rp))))],
        "single_valued": [_fn(App(t, _pair(App(s, _fst(_fst(_x))), _fst(_snd(_x)))))],
        "total": [pca.I],
    }
    inclusion = make_functional(restricted, base, rho_p, depth, b, inc_hints)
    return restricted, inclusion


def image_point(p: Per, depth: int = 4, budget: Budget | int | None = None) -> StrictRelationalProp:
    """Моно (U,ξ) ↣ 1 из эпи-моно разложения (A,ρ) → 1: ⋆ ↦ ⋃_x ρ(x,x)."""
    b = as_budget(budget)
    one = terminal(b)
    union = union_over(p.carrier, lambda x: Predicate.constant(one.carrier, p(x, x)), one.carrier)
    return make_prop(one, union, depth, b)


def graph(f: Callable[[Element], Element] | Mapping[Element, Element], src: Per, tgt: Per,
          depth: int = 4, budget: Budget | int | None = None,
          compat_hints: Iterable[Term] = ()) -> FunctionalRelation:
    """Γ(f): (x,b) ↦ σ(f(x),b) ∧ ρ(x,x); требует трек ⋂⋂ ρ(x,y) → σ(f(x),f(y))."""
    b = as_budget(budget)
    fn = f if callable(f) else f.__getitem__
    a2 = product(src.carrier, src.carrier)
    compat = Obligation(
        "compat", "⋂x⋂y ρ(x,y) → σ(f(x),f(y))",
        src.rho, Predicate.build(a2, lambda xy: tgt(fn(xy[0]), fn(xy[1]))))
    consts = [pca.const(r) for r in compat.consequent.realizers()[:3]]
    found = compat.search(depth, b, list(compat_hints) + [pca.I] + consts)
    if isinstance(found, NotFound):
        raise CertificationError("compat", compat.text, found)
    c = found.witness
    rel_f = Predicate.build(product(src.carrier, tgt.carrier),
                            lambda t: meet_sets(tgt(fn(t[0]), t[1]), src(t[0], t[0])))
    s_r, t_r = src.cert_sym.witness, src.cert_trans.witness
    s_s, t_s = tgt.cert_sym.witness, tgt.cert_trans.witness
    sv, r2, s2 = _fst(_fst(_fst(_x))), _snd(_fst(_x)), _snd(_x)
    # a top source keeps the canonical witness K in the rho slot
    rho_out = pca.K if src.is_top else App(t_r, _pair(App(s_r, r2), r2))
    hints = {
        "strict": [_fn(_pair(_snd(_x), App(t_s, _pair(App(s_s, _fst(_x)), _fst(_x)))))],
        "relational": [_fn(_pair(
            App(t_s, _pair(App(c, App(s_r, r2)), App(t_s, _pair(sv, s2)))), rho_out))],
        "single_valued": [_fn(App(t_s, _pair(App(s_s, _fst(_fst(_x))), _fst(_snd(_x)))))],
        "total": [_fn(_pair(App(c, _x), _x))],
    }
    if src.is_top:
        hints["total"] = [pca.const(r) for r in rel_f.realizers()[:1]] + hints["total"]
    return make_functional(src, tgt, rel_f, depth, b, hints)


def pullback_mono(p: StrictRelationalProp, f: FunctionalRelation, depth: int = 4,
                  budget: Budget | int | None = None) -> StrictRelationalProp:
    """Пулбэк σ_P вдоль F: Q(a) = ⋃_b F(a,b) ∧ P(b)."""
    if f.target.carrier != p.base.carrier or f.target.rho != p.base.rho:
        raise ValueError("proposition does not live on the target of F")
    src = f.source
    q = union_over(p.base.carrier,
                   lambda y: Predicate.build(src.carrier, lambda x: meet_sets(f.F((x, y)), p.P(y))),
                   src.carrier)
    sf, rf = f.cert_strict.witness, f.cert_relational.witness
    fv, pv, r = _fst(_snd(_x)), _snd(_snd(_x)), _fst(_x)
    hints = {
        "strict": [_fn(_fst(App(sf, _fst(_x))))],
        "relational": [_fn(_pair(App(rf, _pair(_pair(fv, r), _snd(App(sf, fv)))), pv))],
    }
    return make_prop(src, q, depth, budget, hints)


@dataclass(frozen=True)
class EpiCertificate:
    obligation: Obligation
    track: Track


def epi_obligation(f: FunctionalRelation) -> Obligation:
    a, bb = f.source.carrier, f.target.carrier
    return Obligation(
        "epi", "⋂b [σ(b,b) → ⋃a E(a,b)]",
        f.target.diag(),
        union_over(a, lambda x: Predicate.build(bb, lambda y: f.F((x, y))), bb))


def is_epi(f: FunctionalRelation, depth: int = 4, budget: Budget | int | None = None) -> EpiCertificate | NotFound:
    """Свойство 6): E эпиморфизм ⇔ валидно ⋂_b [σ(b,b) → ⋃_a E(a,b)]."""
    ob = epi_obligation(f)
    found = ob.search(depth, as_budget(budget), [pca.I])
    if isinstance(found, NotFound):
        return found
    return EpiCertificate(ob, found)


def check_epi_certificate(epi: EpiCertificate, base: Per, depth: int = 4,
                          budget: Budget | int | None = None) -> None:
    """Переданный сертификат должен относиться к !_ρ и проходить перепроверку."""
    expected = epi_obligation(bang(base, depth, budget))
    got = epi.obligation
    if (got.antecedent, got.consequent) != (expected.antecedent, expected.consequent):
        raise CertificationError("epi", expected.text,
                                 NotFound("certificate is for another arrow", witness=got.text))
    v = got.verify(epi.track.witness, epi.track.budget)
    if not v.ok:
        raise CertificationError("epi", expected.text,
                                 NotFound(v.reason or "stored track fails recheck",
                                          refuted=v.status is Status.FAILS,
                                          undetermined=v.status is Status.UNDETERMINED,
                                          witness=v.witness))


# --- the epsilon term ---

@dataclass(frozen=True)
class EpsilonCertificate:
    epsilon: FunctionalRelation
    point: Element
    pullback: StrictRelationalProp
    union: Predicate
    equality: PosetEquality

    def recheck(self) -> Verdict:
        for part in (self.epsilon, self.pullback):
            v = part.recheck()
            if not v.ok:
                return v
        for phi, psi, tr in ((self.pullback.P, self.union, self.equality.track_lr),
                             (self.union, self.pullback.P, self.equality.track_rl)):
            ob = Obligation("equality", "P(ε) = ⋃a P(a)", phi, psi)
            v = ob.verify(tr.witness, tr.budget)
            if not v.ok:
                return v
        return Verdict.holds()


def point_graph(p: Per, a: Element, depth: int = 4, budget: Budget | int | None = None) -> FunctionalRelation:
    """Γ(ā): (1,⊤) → (A,ρ); совместимость отслеживается константой из ρ(ā,ā)."""
    b = as_budget(budget)
    diag = p(a, a)
    if diag.is_empty:
        raise ValueError(f"rho({a},{a}) is empty; no global element at {a}")
    witness = pca.K if diag.is_all else diag.sorted()[0]
    return graph(lambda _: a, terminal(b), p, depth, b, [pca.const(witness)])


def synthesize_epsilon(p: StrictRelationalProp, depth: int = 4, budget: Budget | int | None = None,
                       epi: EpiCertificate | None = None) -> EpsilonCertificate:
    """ε: 1 → (A,ρ) с P(ε) = ⋃_a P(a) в рефлексии порядка.

    Если объединение непусто — первая q с P(q) ≠ ∅ (строгость даёт
    ρ(q,q) ≠ ∅); иначе первая ā с ρ(ā,ā) ≠ ∅, существующая потому, что
    !_ρ эпиморфизм.
    """
    b = as_budget(budget)
    base = p.base
    if epi is None:
        got = is_epi(bang(base, depth, b), depth, b)
        if isinstance(got, NotFound):
            raise CertificationError("epi", "⋂b [σ(b,b) → ⋃a E(a,b)] for the bang of the base", got)
    else:
        check_epi_certificate(epi, base, depth, b)
    one = Carrier.singleton()
    union = union_over(base.carrier, lambda x: Predicate.constant(one, p.P(x)), one)
    if not union(STAR).is_empty:
        chosen = next(x for x in base.carrier if not p.P(x).is_empty)
        if base(chosen, chosen).is_empty:
            raise AssertionError("strictness violated: P(q) nonempty but rho(q,q) empty")
    else:
        chosen = next((x for x in base.carrier if not base(x, x).is_empty), None)
        if chosen is None:
            raise AssertionError("epic bang with every rho(a,a) empty")
    log.debug("epsilon point chosen: %s", chosen)
    eps = point_graph(base, chosen, depth, b)
    pb = pullback_mono(p, eps, depth, b)
    equality = poset_equal(pb.P, union, depth, b, hints_lr=[pca.SND], hints_rl=[pca.I])
    if isinstance(equality, NotFound):
        raise CertificationError("equality", "P(ε) = ⋃a P(a)", equality)
    return EpsilonCertificate(eps, chosen, pb, union, equality)


def hilbertian_square(cert: EpsilonCertificate, p: StrictRelationalProp, depth: int = 4,
                      budget: Budget | int | None = None) -> PosetEquality | NotFound:
    """Пулбэк ρ_P вдоль ε против моно-части разложения (A,ρ_P) → 1."""
    restricted, _ = restrict_mono(p, depth, budget)
    image = image_point(restricted, depth, budget)
    strict_p = p.cert_strict.witness
    lr = _fn(_pair(App(strict_p, _snd(_x)), _snd(_x)))
    return poset_equal(cert.pullback.P, image.P, depth, budget, hints_lr=[lr])


def lemma_check(p: StrictRelationalProp, f: Callable[[Element], Element] | Mapping[Element, Element],
                src: Per, depth: int = 4, budget: Budget | int | None = None) -> PosetEquality | NotFound:
    """Лемма: пулбэк вдоль Γ(f) равен P∘f ∧ ρ в рефлексии порядка."""
    fn = f if callable(f) else f.__getitem__
    tgt = p.base
    q = pullback_mono(p, graph(fn, src, tgt, depth, budget), depth, budget).P
    target = meet(precompose(p.P, src.carrier, fn), src.diag())
    s_s, rel_p, strict_p = tgt.cert_sym.witness, p.cert_rel.witness, p.cert_strict.witness
    lr = _fn(_pair(App(rel_p, _pair(App(s_s, _fst(_fst(_x))), _snd(_x))), _snd(_fst(_x))))
    rl = _fn(_pair(_pair(App(strict_p, _fst(_x)), _snd(_x)), _fst(_x)))
    return poset_equal(q, target, depth, budget, hints_lr=[lr], hints_rl=[rl])


def corollary_check(p: StrictRelationalProp, b0: Element, depth: int = 4,
                    budget: Budget | int | None = None) -> PosetEquality | NotFound:
    """Следствие: для f: 1 → B пулбэк вдоль Γ(f) равен P∘f."""
    tgt = p.base
    q = pullback_mono(p, point_graph(tgt, b0, depth, budget), depth, budget).P
    target = Predicate.constant(Carrier.singleton(), p.P(b0))
    s_s, rel_p, strict_p = tgt.cert_sym.witness, p.cert_rel.witness, p.cert_strict.witness
    lr = _fn(App(rel_p, _pair(App(s_s, _fst(_fst(_x))), _snd(_x))))
    rl = _fn(_pair(_pair(App(strict_p, _x), pca.K), _x))
    return poset_equal(q, target, depth, budget, hints_lr=[lr], hints_rl=[rl])


def certificate_rows(obj: Per | StrictRelationalProp | FunctionalRelation | EpsilonCertificate,
                     prefix: str = "") -> list[dict]:
    """Экспорт сертификатов: (obligation-id, track, budget)."""
    if isinstance(obj, EpsilonCertificate):
        rows = certificate_rows(obj.epsilon, f"{prefix}epsilon")
        rows += certificate_rows(obj.pullback, f"{prefix}pullback")
        rows += _rows(f"{prefix}equality", {"lr": obj.equality.track_lr, "rl": obj.equality.track_rl})
        return rows
    name = prefix or type(obj).__name__
    return _rows(name, obj.certificates())
