from __future__ import annotations

"""calculus.language

Внутренний язык конечного топоса FinSet^n: разбор, типизация,
интерпретация в решётке подобъектов, выводимость секвенций и правила ε.

Зачем:
- Секвенция Γ | φ1, ..., φn ⊢ φ выводима тогда и только тогда, когда
  мономорфизм ⟦φ1 ∧ ... ∧ φn⟧ ↣ ⟦Γ⟧ пропускается через ⟦φ⟧. Здесь это
  проверка включения покомпонентных подмножеств (без поиска доказательств).
- ε-термы регистрируются в сигнатуре как свежие функциональные символы
  eps1, eps2, ... со значением — синтезированной стрелкой ⟦Γ⟧ → A.

Соглашения:
- ⟦Γ⟧ — произведение типов контекста: пустой контекст — терминальный
  объект, одна переменная — сам тип, иначе плоские кортежи.
- ∃ — образ вдоль проекции контекста, ∀ — двойственный образ.
- Равенство — покомпонентное диагональное подмножество.
"""

from dataclasses import dataclass, field
from functools import reduce as _fold
from pathlib import Path
from typing import Sequence, Union
import logging

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from . import finite_topos as ft
from .finite_topos import FinArrow, FinObj, PreconditionError, Subobject, ToposCtx

log = logging.getLogger(__name__)


class LanguageSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at {line}:{column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class LanguageTypeError(ValueError):
    pass


class EmptyTypeRejected(ValueError):
    """A или тип из Γ начальный: ε-терм в него означал бы вырожденный топос."""


class ModeViolation(ValueError):
    """Частичный режим получил непустой контекст (ε-термы там замкнуты)."""


# --- abstract syntax ---

@dataclass(frozen=True)
class TName:
    name: str


@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class TProd:
    left: "Type"
    right: "Type"


Type = Union[TName, TUnit, TProd]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Fn:
    name: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Tup:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Proj:
    term: "Term"
    index: int


Term = Union[Var, Fn, Tup, Proj]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    type: Type
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    type: Type
    body: "Formula"


Formula = Union[Top, Bot, Rel, Eq, And, Or, Imp, Exists, Forall]
Context = tuple[tuple[str, Type], ...]


@dataclass(frozen=True)
class Sequent:
    context: Context
    antecedents: tuple[Formula, ...]
    consequent: Formula


# --- parsing ---

class _ToAst(Transformer):
    def sequent(self, c):
        ctx, ants, cons = c
        return Sequent(ctx or (), ants or (), cons)

    def sequent_short(self, c):
        ctx, cons = c
        return Sequent(ctx or (), (), cons)

    def context(self, c):
        names = [n for n, _ in c]
        if len(set(names)) != len(names):
            raise LanguageTypeError(f"context repeats a variable: {', '.join(names)}")
        return tuple(c)

    def binding(self, c):
        return str(c[0]), c[1]

    def antecedents(self, c):
        return tuple(c)

    def terms(self, c):
        return tuple(c)

    def imp(self, c):
        return Imp(c[0], c[1])

    def or_(self, c):
        return Or(c[0], c[1])

    def and_(self, c):
        return And(c[0], c[1])

    def exists(self, c):
        return Exists(str(c[0]), c[1], c[2])

    def forall(self, c):
        return Forall(str(c[0]), c[1], c[2])

    def top(self, _):
        return Top()

    def bot(self, _):
        return Bot()

    def rel(self, c):
        return Rel(str(c[0]), c[1] or ())

    def eq(self, c):
        return Eq(c[0], c[1])

    def proj(self, c):
        return Proj(c[0], int(c[1]))

    def fn(self, c):
        return Fn(str(c[0]), c[1] or ())

    def var(self, c):
        return Var(str(c[0]))

    def tup(self, c):
        return Tup(c[0], c[1])

    def tprod(self, c):
        return TProd(c[0], c[1])

    def tname(self, c):
        return TName(str(c[0]))

    def tunit(self, _):
        return TUnit()


_parser = Lark.open(str(Path(__file__).with_name("language.lark")), parser="earley",
                    start=["sequent", "formula", "term", "type", "context"])


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
    except UnexpectedInput as e:
        raise LanguageSyntaxError(f"cannot parse {start} {text!r}", e.line, e.column) from None
    try:
        return _ToAst().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ValueError):
            raise e.orig_exc from None
        raise


def parse_sequent(text: str) -> Sequent:
    return _parse(text, "sequent")


def parse_formula(text: str) -> Formula:
    return _parse(text, "formula")


def parse_term(text: str) -> Term:
    return _parse(text, "term")


def parse_type(text: str) -> Type:
    return _parse(text, "type")


def parse_context(text: str) -> Context:
    return () if not text.strip() else _parse(text, "context")


def parse(text: str) -> Sequent | Formula | Term:
    """Секвенция, если в тексте есть |-, иначе формула, иначе терм."""
    if "|-" in text:
        return parse_sequent(text)
    try:
        return parse_formula(text)
    except LanguageSyntaxError:
        return parse_term(text)


# --- printing ---

def format_type(t: Type) -> str:
    if isinstance(t, TName):
        return t.name
    if isinstance(t, TUnit):
        return "1"
    right = format_type(t.right)
    if isinstance(t.right, TProd):
        right = f"({right})"
    return f"{format_type(t.left)}*{right}"


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Fn):
        return f"{t.name}({', '.join(format_term(a) for a in t.args)})"
    if isinstance(t, Tup):
        return f"({format_term(t.left)}, {format_term(t.right)})"
    return f"{format_term(t.term)}.{t.index}"


_PREC = {Imp: 1, Or: 2, And: 3, Exists: 0, Forall: 0}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 4)


def _wrap(f: Formula, ok: bool) -> str:
    s = format_formula(f)
    return s if ok else f"({s})"


def format_formula(f: Formula) -> str:
    """Печать с минимальными скобками; кванторы в операндах всегда в скобках."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        return f"{kw} {f.var}:{format_type(f.type)}. {format_formula(f.body)}"
    if isinstance(f, And):
        return f"{_wrap(f.left, _prec(f.left) >= 3)} & {_wrap(f.right, _prec(f.right) > 3)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, _prec(f.left) >= 2)} | {_wrap(f.right, _prec(f.right) > 2)}"
    return f"{_wrap(f.left, _prec(f.left) > 1)} -> {_wrap(f.right, _prec(f.right) >= 1)}"


def format_context(ctx: Context) -> str:
    return ", ".join(f"{n}:{format_type(t)}" for n, t in ctx)


def format_sequent(s: Sequent) -> str:
    cons = format_formula(s.consequent)
    if not s.antecedents:
        return f"{format_context(s.context)} |- {cons}".lstrip()
    ants = ", ".join(format_formula(a) for a in s.antecedents)
    return f"{format_context(s.context)} | {ants} |- {cons}".lstrip()


# --- substitution ---

def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Fn):
        return set().union(*(term_vars(a) for a in t.args))
    if isinstance(t, Tup):
        return term_vars(t.left) | term_vars(t.right)
    return term_vars(t.term)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, (Top, Bot)):
        return set()
    if isinstance(f, Rel):
        return set().union(*(term_vars(a) for a in f.args))
    if isinstance(f, Eq):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


def _fresh(base: str, taken: set[str]) -> str:
    name = base + "'"
    while name in taken:
        name += "'"
    return name


def substitute_term(t: Term, x: str, u: Term) -> Term:
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, Fn):
        return Fn(t.name, tuple(substitute_term(a, x, u) for a in t.args))
    if isinstance(t, Tup):
        return Tup(substitute_term(t.left, x, u), substitute_term(t.right, x, u))
    return Proj(substitute_term(t.term, x, u), t.index)


def substitute(f: Formula, x: str, u: Term) -> Formula:
    """φ[u/x] без захвата переменных."""
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Rel):
        return Rel(f.name, tuple(substitute_term(a, x, u) for a in f.args))
    if isinstance(f, Eq):
        return Eq(substitute_term(f.left, x, u), substitute_term(f.right, x, u))
    if isinstance(f, (Exists, Forall)):
        if f.var == x:
            return f
        var, body = f.var, f.body
        if var in term_vars(u):
            var = _fresh(var, term_vars(u) | free_vars(body) | {x})
            body = substitute(body, f.var, Var(var))
        return type(f)(var, f.type, substitute(body, x, u))
    return type(f)(substitute(f.left, x, u), substitute(f.right, x, u))


# --- signature and typing ---

@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[Type, ...]
    result: Type
    arrow: FinArrow


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    args: tuple[Type, ...]
    subobject: Subobject


def _pack(values: Sequence) -> object:
    if not values:
        return ft.STAR
    if len(values) == 1:
        return values[0]
    return tuple(values)


def _unpack(e: object, n: int) -> tuple:
    if n == 0:
        return ()
    if n == 1:
        return (e,)
    return tuple(e)


def _as_type(t: Type | str) -> Type:
    return parse_type(t) if isinstance(t, str) else t


@dataclass
class Signature:
    """Σ_E: типы — объекты, функциональные символы — стрелки, отношения — подобъекты."""

    ctx: ToposCtx
    types: dict[str, FinObj] = field(default_factory=dict)
    functions: dict[str, FunctionSymbol] = field(default_factory=dict)
    relations: dict[str, RelationSymbol] = field(default_factory=dict)

    def declare_type(self, name: str, obj: FinObj) -> None:
        if obj.arity != self.ctx.arity:
            raise LanguageTypeError(f"type {name} has arity {obj.arity}, topos has {self.ctx.arity}")
        self.types[name] = obj

    def denote(self, t: Type) -> FinObj:
        if isinstance(t, TName):
            try:
                return self.types[t.name]
            except KeyError:
                raise LanguageTypeError(f"unknown type {t.name}") from None
        if isinstance(t, TUnit):
            return ft.terminal(self.ctx.arity)
        return ft.product(self.denote(t.left), self.denote(t.right))[0]

    def product_of(self, types: Sequence[Type]) -> FinObj:
        return ft.product_all([self.denote(t) for t in types], self.ctx.arity)[0]

    def declare_function(self, name: str, args: Sequence[Type | str], result: Type | str,
                         arrow: FinArrow) -> FunctionSymbol:
        arg_types = tuple(_as_type(a) for a in args)
        res = _as_type(result)
        if arrow.dom != self.product_of(arg_types) or arrow.cod != self.denote(res):
            raise LanguageTypeError(f"arrow does not match the arity of {name}")
        sym = FunctionSymbol(name, arg_types, res, arrow)
        self.functions[name] = sym
        return sym

    def declare_relation(self, name: str, args: Sequence[Type | str], subobject: Subobject) -> RelationSymbol:
        arg_types = tuple(_as_type(a) for a in args)
        if subobject.cod != self.product_of(arg_types):
            raise LanguageTypeError(f"subobject does not match the arity of {name}")
        sym = RelationSymbol(name, arg_types, subobject)
        self.relations[name] = sym
        return sym


def type_of(t: Term, ctx: Context, sig: Signature) -> Type:
    env = dict(ctx)
    if isinstance(t, Var):
        if t.name in env:
            return env[t.name]
        sym = sig.functions.get(t.name)
        if sym is not None and not sym.args:
            return sym.result
        raise LanguageTypeError(f"unbound variable {t.name}")
    if isinstance(t, Fn):
        sym = sig.functions.get(t.name)
        if sym is None:
            raise LanguageTypeError(f"unknown function symbol {t.name}")
        got = tuple(type_of(a, ctx, sig) for a in t.args)
        if got != sym.args:
            raise LanguageTypeError(
                f"{t.name} expects ({', '.join(map(format_type, sym.args))}), "
                f"got ({', '.join(map(format_type, got))})")
        return sym.result
    if isinstance(t, Tup):
        return TProd(type_of(t.left, ctx, sig), type_of(t.right, ctx, sig))
    inner = type_of(t.term, ctx, sig)
    if not isinstance(inner, TProd):
        raise LanguageTypeError(f"projection of a non-product {format_term(t.term)}")
    return inner.left if t.index == 1 else inner.right


def _extend(ctx: Context, var: str, ty: Type, body: Formula) -> tuple[Context, str, Formula]:
    names = {n for n, _ in ctx}
    if var not in names:
        return ctx + ((var, ty),), var, body
    fresh = _fresh(var, names | free_vars(body))
    return ctx + ((fresh, ty),), fresh, substitute(body, var, Var(fresh))


def check_formula(f: Formula, ctx: Context, sig: Signature) -> None:
    """LanguageTypeError, если формула плохо типизирована в контексте."""
    if isinstance(f, (Top, Bot)):
        return
    if isinstance(f, Rel):
        sym = sig.relations.get(f.name)
        if sym is None:
            raise LanguageTypeError(f"unknown relation symbol {f.name}")
        got = tuple(type_of(a, ctx, sig) for a in f.args)
        if got != sym.args:
            raise LanguageTypeError(f"{f.name} applied to arguments of the wrong types")
        return
    if isinstance(f, Eq):
        if type_of(f.left, ctx, sig) != type_of(f.right, ctx, sig):
            raise LanguageTypeError(f"equality between different types: {format_formula(f)}")
        return
    if isinstance(f, (Exists, Forall)):
        sig.denote(f.type)
        inner, _, body = _extend(ctx, f.var, f.type, f.body)
        check_formula(body, inner, sig)
        return
    check_formula(f.left, ctx, sig)
    check_formula(f.right, ctx, sig)


# --- interpretation ---

def context_object(ctx: Context, sig: Signature) -> FinObj:
    return sig.product_of([t for _, t in ctx])


def _value(t: Term, env: dict, i: int, sig: Signature) -> object:
    if isinstance(t, Var):
        if t.name in env:
            return env[t.name]
        return sig.functions[t.name].arrow(i, ft.STAR)
    if isinstance(t, Fn):
        return sig.functions[t.name].arrow(i, _pack([_value(a, env, i, sig) for a in t.args]))
    if isinstance(t, Tup):
        return _value(t.left, env, i, sig), _value(t.right, env, i, sig)
    return _value(t.term, env, i, sig)[t.index - 1]


def _env(ctx: Context, e: object) -> dict:
    return dict(zip((n for n, _ in ctx), _unpack(e, len(ctx))))


def interpret_term(t: Term, ctx: Context, sig: Signature) -> FinArrow:
    """⟦t⟧: ⟦Γ⟧ → ⟦A⟧."""
    ty = type_of(t, ctx, sig)
    return ft.make_arrow(context_object(ctx, sig), sig.denote(ty),
                         lambda i, e: _value(t, _env(ctx, e), i, sig))


def _projection(ctx: Context, inner: Context, sig: Signature) -> FinArrow:
    n = len(ctx)
    return ft.make_arrow(context_object(inner, sig), context_object(ctx, sig),
                         lambda i, e: _pack(_unpack(e, n + 1)[:n]))


def interpret(f: Formula, ctx: Context, sig: Signature) -> Subobject:
    """⟦φ⟧ как подобъект ⟦Γ⟧ (канонические покомпонентные подмножества)."""
    check_formula(f, ctx, sig)
    return _interpret(f, ctx, sig)


def _interpret(f: Formula, ctx: Context, sig: Signature) -> Subobject:
    obj = context_object(ctx, sig)
    if isinstance(f, Top):
        return Subobject.full(obj)
    if isinstance(f, Bot):
        return Subobject.empty(obj)
    if isinstance(f, Rel):
        sym = sig.relations[f.name]
        args = ft.make_arrow(obj, sym.subobject.cod,
                             lambda i, e: _pack([_value(a, _env(ctx, e), i, sig) for a in f.args]))
        return ft.pullback_subobject(sym.subobject, args)
    if isinstance(f, Eq):
        return Subobject(obj, tuple(
            frozenset(e for e in comp
                      if _value(f.left, _env(ctx, e), i, sig) == _value(f.right, _env(ctx, e), i, sig))
            for i, comp in enumerate(obj.components)))
    if isinstance(f, (Exists, Forall)):
        inner, _, body = _extend(ctx, f.var, f.type, f.body)
        sub = _interpret(body, inner, sig)
        along = _projection(ctx, inner, sig)
        return ft.image(sub, along) if isinstance(f, Exists) else ft.dual_image(sub, along)
    left, right = _interpret(f.left, ctx, sig), _interpret(f.right, ctx, sig)
    if isinstance(f, And):
        return left.meet(right)
    if isinstance(f, Or):
        return left.join(right)
    return left.implies(right)


@dataclass(frozen=True)
class Derivation:
    holds: bool
    witness: FinArrow | None
    antecedent: Subobject
    consequent: Subobject


def derivable(s: Sequent, sig: Signature) -> Derivation:
    """Выводимость как пропускание ⟦φ1 ∧ ... ∧ φn⟧ через ⟦φ⟧.

    Для выводимой секвенции witness — факторизующая стрелка между
    объектами-подмножествами.
    """
    full = Subobject.full(context_object(s.context, sig))
    ants = _fold(Subobject.meet, (interpret(a, s.context, sig) for a in s.antecedents), full)
    cons = interpret(s.consequent, s.context, sig)
    if not ants.le(cons):
        return Derivation(False, None, ants, cons)
    witness = ft.make_arrow(ants.object, cons.object, lambda i, e: e)
    return Derivation(True, witness, ants, cons)


# --- epsilon rules ---

@dataclass(frozen=True)
class EpsTermResult:
    symbol: str
    term: Term
    arrow: FinArrow
    epsI_sequent: Sequent
    epsI_valid: bool
    square_is_pullback: bool | None = None


@dataclass(frozen=True)
class AcWitness:
    eps: EpsTermResult
    sequent: Sequent
    derivation: Derivation

    @property
    def valid(self) -> bool:
        return self.derivation.holds


class Session:
    """Сигнатура плюс реестр ε-символов одного сеанса вычислений."""

    def __init__(self, signature: Signature):
        self.signature = signature
        self._counter = 0
        self.epsilons: dict[str, EpsTermResult] = {}

    def _fresh_symbol(self) -> str:
        while True:
            self._counter += 1
            name = f"eps{self._counter}"
            if name not in self.signature.functions:
                return name

    def interpret(self, f: Formula | str, ctx: Context | str = ()) -> Subobject:
        return interpret(_as_formula(f), _as_context(ctx), self.signature)

    def derivable(self, s: Sequent | str) -> Derivation:
        return derivable(parse_sequent(s) if isinstance(s, str) else s, self.signature)

    def eps_rule(self, psi: Formula | str, ctx: Context | str, mode: str = "full") -> EpsTermResult:
        """ε-форма и ε-I для ψ в контексте (Γ, x:A); x — последняя переменная.

        full: ε^x_ψ: ⟦Γ⟧ → A строится synthesize_epsilon_full.
        partial: Γ обязан быть пуст, ε берётся из check_hilbertian_instance.
        """
        psi, ctx = _as_formula(psi), _as_context(ctx)
        if not ctx:
            raise LanguageTypeError("epsilon needs a context ending in x:A")
        if mode not in ("full", "partial"):
            raise ValueError(f"unknown epsilon mode {mode!r}")
        sig = self.signature
        gamma, (x, a_type) = ctx[:-1], ctx[-1]
        if mode == "partial" and gamma:
            raise ModeViolation(f"partial epsilon terms are closed, got context {format_context(gamma)}")
        a_obj = sig.denote(a_type)
        if a_obj.is_initial:
            raise EmptyTypeRejected(f"{format_type(a_type)} is the initial object")
        for n, t in gamma:
            if sig.denote(t).is_initial:
                raise EmptyTypeRejected(f"context type {n}:{format_type(t)} is the initial object")
        sub = interpret(psi, ctx, sig)
        gamma_obj = context_object(gamma, sig)
        square = None
        if mode == "full":
            prod, _, _ = ft.product(gamma_obj, a_obj)
            n = len(gamma)
            parts = tuple(frozenset((_pack(_unpack(e, n + 1)[:n]), _unpack(e, n + 1)[n]) for e in part)
                          for part in sub.parts)
            res = ft.synthesize_epsilon_full(Subobject(prod, parts), gamma_obj, a_obj)
            arrow, square = res.eps_phi, res.square_is_pullback
        else:
            got = ft.check_hilbertian_instance(sub)
            if isinstance(got, ft.HilbertianFailure):
                raise PreconditionError(got.reason, sub)
            arrow = got.eps
        name = self._fresh_symbol()
        sig.declare_function(name, [t for _, t in gamma], a_type, arrow)
        term = Fn(name, tuple(Var(n) for n, _ in gamma))
        seq = Sequent(gamma, (Exists(x, a_type, psi),), substitute(psi, x, term))
        valid = derivable(seq, sig).holds
        log.debug("%s registered for %s (epsI %s)", name, format_formula(psi), valid)
        result = EpsTermResult(name, term, arrow, seq, valid, square)
        self.epsilons[name] = result
        return result

    def ac_witness(self, f: Formula | str, ctx: Context | str) -> AcWitness:
        """⊤ ⊢ ∀a:A. ((∃b:B. F) → F[ε^b_F(a)/b]) для F в контексте (a:A, b:B)."""
        f, ctx = _as_formula(f), _as_context(ctx)
        if len(ctx) != 2:
            raise LanguageTypeError("the choice formula lives in a context a:A, b:B")
        (a, a_type), (b, b_type) = ctx
        eps = self.eps_rule(f, ctx, "full")
        body = Imp(Exists(b, b_type, f), substitute(f, b, eps.term))
        seq = Sequent((), (Top(),), Forall(a, a_type, body))
        return AcWitness(eps, seq, derivable(seq, self.signature))


def _as_formula(f: Formula | str) -> Formula:
    return parse_formula(f) if isinstance(f, str) else f


def _as_context(ctx: Context | str) -> Context:
    return parse_context(ctx) if isinstance(ctx, str) else tuple(ctx)


def format_any(node: Sequent | Formula | Term | Type) -> str:
    if isinstance(node, Sequent):
        return format_sequent(node)
    if isinstance(node, (TName, TUnit, TProd)):
        return format_type(node)
    if isinstance(node, (Var, Fn, Tup, Proj)):
        return format_term(node)
    return format_formula(node)

