from __future__ import annotations

import random
from itertools import product as cartesian

import pytest

from calculus import finite_topos as ft
from calculus import language as lang
from calculus.finite_topos import FinObj, Subobject, ToposCtx
from calculus.language import (
    And,
    Bot,
    Exists,
    Forall,
    Imp,
    Or,
    Rel,
    Sequent,
    Session,
    Signature,
    TName,
    Top,
    Var,
)

SETS = ToposCtx(1)
A_TYPE, B_TYPE = TName("A"), TName("B")


def _set(*names) -> FinObj:
    return FinObj((tuple(names),))


def _sub(obj: FinObj, *elements) -> Subobject:
    return Subobject(obj, (frozenset(elements),))


def _signature(a: FinObj, b: FinObj | None = None) -> Signature:
    sig = Signature(SETS)
    sig.declare_type("A", a)
    if b is not None:
        sig.declare_type("B", b)
    return sig


@pytest.fixture
def session() -> Session:
    a, b = _set("a0", "a1", "a2"), _set("b0", "b1")
    sig = _signature(a, b)
    sig.declare_type("E", _set())
    sig.declare_relation("P", ["A"], _sub(a, "a1"))
    sig.declare_relation("Q", ["A"], _sub(a, "a0", "a1"))
    ab = sig.product_of([A_TYPE, B_TYPE])
    sig.declare_relation("R", ["A", "B"], _sub(ab, ("a0", "b1"), ("a1", "b0"), ("a1", "b1")))
    sig.declare_function("f", ["A"], "A", ft.make_arrow(a, a, lambda i, x: {"a0": "a1", "a1": "a2", "a2": "a2"}[x]))
    return Session(sig)


# --- syntax ---

def test_parse_sequent_parts() -> None:
    s = lang.parse_sequent("x:A, y:B | R(x, y), P(x) |- exists z:B. R(x, z)")
    assert s.context == (("x", A_TYPE), ("y", B_TYPE))
    assert s.antecedents == (Rel("R", (Var("x"), Var("y"))), Rel("P", (Var("x"),)))
    assert isinstance(s.consequent, Exists)


def test_parse_short_sequent_and_empty_context() -> None:
    assert lang.parse_sequent("x:A |- P(x)") == Sequent((("x", A_TYPE),), (), Rel("P", (Var("x"),)))
    assert lang.parse_sequent("| true |- true") == Sequent((), (Top(),), Top())


def test_operator_associativity() -> None:
    p, q, r = (Rel(n, (Var("x"),)) for n in "PQR")
    assert lang.parse_formula("P(x) -> Q(x) -> R(x)") == Imp(p, Imp(q, r))
    assert lang.parse_formula("P(x) & Q(x) & R(x)") == And(And(p, q), r)
    assert lang.parse_formula("P(x) | Q(x) & R(x)") == Or(p, And(q, r))


def test_parse_terms_and_types() -> None:
    t = lang.parse_term("f((x, y).1)")
    assert t == lang.Fn("f", (lang.Proj(lang.Tup(Var("x"), Var("y")), 1),))
    assert lang.parse_type("A*B*1") == lang.TProd(lang.TProd(A_TYPE, B_TYPE), lang.TUnit())
    assert lang.format_type(lang.parse_type("A*(B*A)")) == "A*(B*A)"


def test_keywords_are_not_names() -> None:
    with pytest.raises(lang.LanguageSyntaxError):
        lang.parse_formula("exists(x)")


def test_syntax_error_position() -> None:
    with pytest.raises(lang.LanguageSyntaxError) as err:
        lang.parse_sequent("x:A | P(x) |-")
    assert err.value.line is not None


def test_context_rejects_repeated_variable() -> None:
    with pytest.raises(lang.LanguageTypeError):
        lang.parse_context("x:A, x:B")


def test_parse_dispatch() -> None:
    assert isinstance(lang.parse("x:A |- true"), Sequent)
    assert lang.parse("P(x)") == Rel("P", (Var("x"),))
    assert lang.parse("(x, y)") == lang.Tup(Var("x"), Var("y"))


def _random_formula(rng: random.Random, depth: int) -> lang.Formula:
    if depth == 0:
        return rng.choice([Top(), Bot(), Rel("P", (Var("x"),)), Rel("Q", (Var("x"),)),
                           lang.Eq(Var("x"), lang.Fn("f", (Var("x"),)))])
    kind = rng.randrange(6)
    if kind == 0:
        return Exists("z", A_TYPE, _random_formula(rng, depth - 1))
    if kind == 1:
        return Forall("z", B_TYPE, _random_formula(rng, depth - 1))
    cls = (And, Or, Imp, And)[kind - 2]
    return cls(_random_formula(rng, depth - 1), _random_formula(rng, depth - 1))


def test_print_parse_round_trip_on_random_formulas() -> None:
    rng = random.Random(1)
    for _ in range(200):
        f = _random_formula(rng, rng.randrange(4))
        text = lang.format_formula(f)
        assert lang.parse_formula(text) == f, text


def test_sequent_round_trip() -> None:
    text = "x:A, y:B | R(x, y) |- (exists z:A. P(z)) & Q(x)"
    assert lang.format_sequent(lang.parse_sequent(text)) == text


# --- substitution and typing ---

def test_substitution_avoids_capture() -> None:
    f = lang.parse_formula("exists y:B. R(x, y)")
    out = lang.substitute(f, "x", Var("y"))
    assert isinstance(out, Exists)
    assert out.var == "y'"
    assert out.body == Rel("R", (Var("y"), Var("y'")))


def test_substitution_stops_at_binder() -> None:
    f = lang.parse_formula("forall x:A. P(x)")
    assert lang.substitute(f, "x", Var("w")) == f


def test_free_vars() -> None:
    assert lang.free_vars(lang.parse_formula("exists y:B. R(x, y) & P(w)")) == {"x", "w"}


def test_type_errors(session: Session) -> None:
    sig = session.signature
    ctx = lang.parse_context("x:A, y:B")
    with pytest.raises(lang.LanguageTypeError):
        lang.check_formula(lang.parse_formula("P(y)"), ctx, sig)
    with pytest.raises(lang.LanguageTypeError):
        lang.check_formula(lang.parse_formula("x = y"), ctx, sig)
    with pytest.raises(lang.LanguageTypeError):
        lang.check_formula(lang.parse_formula("S(x)"), ctx, sig)
    with pytest.raises(lang.LanguageTypeError):
        lang.type_of(lang.parse_term("x.1"), ctx, sig)
    assert lang.type_of(lang.parse_term("(x, y).2"), ctx, sig) == B_TYPE


# --- semantics ---

def test_derivable_subset_examples() -> None:
    a = _set("a0", "a1")
    sig = _signature(a)
    sig.declare_relation("S", ["A"], _sub(a, "a0"))
    sig.declare_relation("T", ["A"], _sub(a, "a0", "a1"))
    s = Session(sig)
    d = s.derivable("x:A | S(x) |- T(x)")
    assert d.holds
    assert ft.classify(d.witness).mono
    assert not s.derivable("x:A | T(x) |- S(x)").holds


def _truth(f: lang.Formula, e: str, p: set, q: set, fmap: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Rel):
        return e in (p if f.name == "P" else q)
    if isinstance(f, lang.Eq):
        return e == fmap[e]
    if isinstance(f, And):
        return _truth(f.left, e, p, q, fmap) and _truth(f.right, e, p, q, fmap)
    if isinstance(f, Or):
        return _truth(f.left, e, p, q, fmap) or _truth(f.right, e, p, q, fmap)
    return not _truth(f.left, e, p, q, fmap) or _truth(f.right, e, p, q, fmap)


def _propositional(rng: random.Random, depth: int) -> lang.Formula:
    if depth == 0:
        return rng.choice([Top(), Bot(), Rel("P", (Var("x"),)), Rel("Q", (Var("x"),)),
                           lang.Eq(Var("x"), lang.Fn("f", (Var("x"),)))])
    cls = rng.choice((And, Or, Imp))
    return cls(_propositional(rng, depth - 1), _propositional(rng, depth - 1))


def test_derivable_agrees_with_subset_oracle() -> None:
    rng = random.Random(2)
    for n in range(1, 4):
        elems = [f"a{i}" for i in range(n)]
        a = _set(*elems)
        for p_bits, q_bits in cartesian(cartesian((0, 1), repeat=n), repeat=2):
            p = {e for e, bit in zip(elems, p_bits) if bit}
            q = {e for e, bit in zip(elems, q_bits) if bit}
            fmap = {e: elems[(i + 1) % n] if i % 2 else e for i, e in enumerate(elems)}
            sig = _signature(a)
            sig.declare_relation("P", ["A"], _sub(a, *p))
            sig.declare_relation("Q", ["A"], _sub(a, *q))
            sig.declare_function("f", ["A"], "A", ft.make_arrow(a, a, lambda i, x: fmap[x]))
            for _ in range(4):
                ant, cons = _propositional(rng, 2), _propositional(rng, 2)
                seq = Sequent((("x", A_TYPE),), (ant,), cons)
                expected = all(_truth(cons, e, p, q, fmap) for e in elems if _truth(ant, e, p, q, fmap))
                assert lang.derivable(seq, sig).holds == expected, lang.format_sequent(seq)


def _truth2(f: lang.Formula, x: str, y: str, p: set, q: set, r: set) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Rel):
        return {"P": x in p, "Q": y in q, "R": (x, y) in r}[f.name]
    if isinstance(f, And):
        return _truth2(f.left, x, y, p, q, r) and _truth2(f.right, x, y, p, q, r)
    if isinstance(f, Or):
        return _truth2(f.left, x, y, p, q, r) or _truth2(f.right, x, y, p, q, r)
    return not _truth2(f.left, x, y, p, q, r) or _truth2(f.right, x, y, p, q, r)


def _propositional2(rng: random.Random, depth: int) -> lang.Formula:
    if depth == 0:
        return rng.choice([Top(), Bot(), Rel("P", (Var("x"),)), Rel("Q", (Var("y"),)),
                           Rel("R", (Var("x"), Var("y")))])
    cls = rng.choice((And, Or, Imp))
    return cls(_propositional2(rng, depth - 1), _propositional2(rng, depth - 1))


def _subset(rng: random.Random, items: list) -> set:
    return {e for e in items if rng.random() < 0.5}


def test_derivable_agrees_with_subset_oracle_in_two_variables() -> None:
    rng = random.Random(4)
    for n, m in cartesian(range(1, 4), repeat=2):
        xs, ys = [f"a{i}" for i in range(n)], [f"b{j}" for j in range(m)]
        a, b = _set(*xs), _set(*ys)
        for _ in range(6):
            p, q = _subset(rng, xs), _subset(rng, ys)
            r = _subset(rng, list(cartesian(xs, ys)))
            sig = _signature(a, b)
            sig.declare_relation("P", ["A"], _sub(a, *p))
            sig.declare_relation("Q", ["B"], _sub(b, *q))
            sig.declare_relation("R", ["A", "B"], _sub(sig.product_of([A_TYPE, B_TYPE]), *r))
            for _ in range(4):
                ant, cons = _propositional2(rng, 2), _propositional2(rng, 2)
                seq = Sequent((("x", A_TYPE), ("y", B_TYPE)), (ant,), cons)
                expected = all(_truth2(cons, x, y, p, q, r)
                               for x, y in cartesian(xs, ys) if _truth2(ant, x, y, p, q, r))
                assert lang.derivable(seq, sig).holds == expected, lang.format_sequent(seq)


def test_derivable_two_variable_context(session: Session) -> None:
    assert session.derivable("x:A, y:B | R(x, y) |- exists z:B. R(x, z)").holds
    assert session.derivable("x:A, y:B | R(x, y), P(x) |- Q(x)").holds
    assert not session.derivable("x:A, y:B | R(x, y) |- P(x)").holds


def test_exists_is_image_along_projection(session: Session) -> None:
    sig = session.signature
    prod, pa, _ = ft.product(sig.types["A"], sig.types["B"])
    r = sig.relations["R"].subobject
    assert session.interpret("exists y:B. R(x, y)", "x:A") == ft.image(r, pa)
    assert session.interpret("forall y:B. R(x, y)", "x:A") == ft.dual_image(r, pa)


def test_bound_variable_clashing_with_context(session: Session) -> None:
    left = session.interpret("exists x:B. R(y, x)", "y:A, x:A")
    right = session.interpret("exists z:B. R(y, z)", "y:A, x:A")
    assert left == right


def test_substitution_is_pullback(session: Session) -> None:
    sig = session.signature
    f_arrow = sig.functions["f"].arrow
    rng = random.Random(4)
    for _ in range(50):
        phi = _random_formula(rng, 2)
        ctx = (("x", A_TYPE),)
        lhs = lang.interpret(lang.substitute(phi, "x", lang.Fn("f", (Var("x"),))), ctx, sig)
        rhs = ft.pullback_subobject(lang.interpret(phi, ctx, sig), f_arrow)
        assert lhs == rhs, lang.format_formula(phi)


def test_closed_formula_lives_on_terminal(session: Session) -> None:
    sub = session.interpret("exists x:A. P(x)")
    assert sub == Subobject.full(ft.terminal(1))
    assert session.interpret("forall x:A. P(x)") == Subobject.empty(ft.terminal(1))


# --- epsilon rules ---

def test_partial_epsilon_term(session: Session) -> None:
    res = session.eps_rule("P(x)", "x:A", "partial")
    assert res.arrow(0, ft.STAR) == "a1"
    assert res.epsI_valid
    assert res.symbol in session.signature.functions
    assert lang.format_sequent(res.epsI_sequent) == f"| exists x:A. P(x) |- P({res.symbol}())"


def test_full_epsilon_term(session: Session) -> None:
    res = session.eps_rule("R(x, y)", "x:A, y:B")
    assert res.epsI_valid and res.square_is_pullback
    assert res.arrow(0, "a0") == "b1"
    assert res.arrow(0, "a1") == "b0"
    # new symbol is usable in later formulas
    assert session.derivable(f"x:A | exists y:B. R(x, y) |- R(x, {res.symbol}(x))").holds


def test_fresh_symbols_are_distinct(session: Session) -> None:
    first = session.eps_rule("P(x)", "x:A", "partial")
    second = session.eps_rule("Q(x)", "x:A", "partial")
    assert first.symbol != second.symbol
    assert set(session.epsilons) == {first.symbol, second.symbol}


def test_empty_type_is_rejected(session: Session) -> None:
    with pytest.raises(lang.EmptyTypeRejected):
        session.eps_rule("true", "e:E")
    with pytest.raises(lang.EmptyTypeRejected):
        session.eps_rule("true", "e:E, x:A")
    assert not any(f.result == TName("E") for f in session.signature.functions.values())


def test_partial_mode_rejects_open_terms(session: Session) -> None:
    with pytest.raises(lang.ModeViolation):
        session.eps_rule("R(x, y)", "x:A, y:B", "partial")


def test_unknown_mode(session: Session) -> None:
    with pytest.raises(ValueError):
        session.eps_rule("P(x)", "x:A", "sideways")


def test_ac_witness_example(session: Session) -> None:
    got = session.ac_witness("R(x, y)", "x:A, y:B")
    assert got.valid
    assert isinstance(got.sequent.consequent, Forall)


def test_ac_witness_exhaustive() -> None:
    for n, m in cartesian((1, 2), repeat=2):
        a = _set(*(f"a{i}" for i in range(n)))
        b = _set(*(f"b{j}" for j in range(m)))
        prod = _signature(a, b).product_of([A_TYPE, B_TYPE])
        for sub in ft.subobjects(prod):
            sig = _signature(a, b)
            sig.declare_relation("F", ["A", "B"], sub)
            got = Session(sig).ac_witness("F(x, y)", "x:A, y:B")
            assert got.valid, (n, m, sorted(sub.parts[0]))
