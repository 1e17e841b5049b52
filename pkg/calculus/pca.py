from __future__ import annotations

"""calculus.pca

Частичная комбинаторная алгебра на K/S-термах с бюджетом редукции.

Зачем этот файл:
- Реализуемость (calculus.realizability) работает с "кодами" и "аппликацией"
  n.p. Вместо кодов частично рекурсивных функций здесь замкнутые K/S-термы,
  а аппликация — это редукция f·a в нормальном порядке.
- Частичность n.p становится разрешимой на каждом запуске: редукция либо
  доходит до нормальной формы за max_steps шагов, либо возвращает
  BudgetExceeded. BudgetExceeded — это значение, а не ошибка.

Основные вещи:
- Atom / App — дерево терма (атомы только K и S).
- Var — временный плейсхолдер для lam(): в замкнутых термах не встречается.
- reduce() / apply() — редукция (leftmost-outermost) с бюджетом.
- combinator() — производные комбинаторы (I, pair, fst, snd, ...).
- parse_term() / format_term() — текстовый синтаксис `(S K K)`.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _cartesian
from typing import Iterator, Union
import logging

from lark import Lark, Transformer, Token
from lark.exceptions import UnexpectedInput, VisitError

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Var:
    """Плейсхолдер переменной для lam(). После абстракции исчезает."""

    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Atom, App, Var]
PcaTerm = Term

K = Atom("K")
S = Atom("S")


@dataclass(frozen=True)
class Budget:
    """Бюджет редукции: максимальное число шагов (>= 1)."""

    max_steps: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if int(self.max_steps) < 1:
            raise ValueError(f"budget must be >= 1, got {self.max_steps}")


@dataclass(frozen=True)
class NormalForm:
    term: Term
    steps: int = 0


@dataclass(frozen=True)
class BudgetExceeded:
    max_steps: int


EvalOutcome = Union[NormalForm, BudgetExceeded]


def as_budget(b: Budget | int | None) -> Budget:
    if b is None:
        return Budget()
    if isinstance(b, Budget):
        return b
    return Budget(int(b))


# --- term utilities ---

def app(*terms: Term) -> Term:
    """Левоассоциативная аппликация: app(f, a, b) = (f·a)·b."""
    if not terms:
        raise ValueError("app() needs at least one term")
    t = terms[0]
    for a in terms[1:]:
        t = App(t, a)
    return t


def size(t: Term) -> int:
    """Число узлов аппликации."""
    n = 0
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, App):
            n += 1
            stack.append(cur.fun)
            stack.append(cur.arg)
    return n


def sort_key(t: Term) -> tuple[int, str]:
    """Канонический порядок: сначала размер, потом текст."""
    return size(t), format_term(t)


def is_closed(t: Term) -> bool:
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var):
            return False
        if isinstance(cur, App):
            stack.append(cur.fun)
            stack.append(cur.arg)
    return True


def _spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def _rebuild(head: Term, args: list[Term]) -> Term:
    for a in args:
        head = App(head, a)
    return head


def _contract(head: Term, args: list[Term]) -> Term | None:
    if head == K and len(args) >= 2:
        return _rebuild(args[0], args[2:])
    if head == S and len(args) >= 3:
        x, y, z = args[:3]
        return _rebuild(App(App(x, z), App(y, z)), args[3:])
    return None


def _step(t: Term) -> Term | None:
    """One leftmost-outermost step, or None when t is in normal form."""
    # frames: (head, args, index of the next argument to visit)
    stack: list[tuple[Term, list[Term], int]] = []
    cur = t
    while True:
        head, args = _spine(cur)
        contracted = _contract(head, args)
        if contracted is not None:
            new = contracted
            while stack:
                h, a, nxt = stack.pop()
                a = list(a)
                a[nxt - 1] = new
                new = _rebuild(h, a)
            return new
        stack.append((head, args, 0))
        while stack:
            h, a, i = stack[-1]
            if i < len(a):
                stack[-1] = (h, a, i + 1)
                cur = a[i]
                break
            stack.pop()
        else:
            return None


def reduce(t: Term, budget: Budget | int | None = None) -> EvalOutcome:
    """Редукция в нормальном порядке в пределах бюджета.

    Parameters
    ----------
    t:
        Терм.
    budget:
        Budget или число шагов. По умолчанию 10^4.

    Returns
    -------
    NormalForm(term) если нормальная форма достигнута не более чем за
    max_steps шагов, иначе BudgetExceeded. Детерминировано.
    """
    b = as_budget(budget)
    steps = 0
    while True:
        nxt = _step(t)
        if nxt is None:
            return NormalForm(t, steps)
        if steps >= b.max_steps:
            return BudgetExceeded(b.max_steps)
        t = nxt
        steps += 1


def apply(f: Term, a: Term, budget: Budget | int | None = None) -> EvalOutcome:
    """Аппликация Клини f.a := reduce(f·a)."""
    return reduce(App(f, a), budget)


def normal_form(t: Term, budget: Budget | int | None = None) -> Term:
    """Нормальная форма или ValueError, если бюджета не хватило."""
    out = reduce(t, budget)
    if isinstance(out, BudgetExceeded):
        raise ValueError(f"no normal form within {out.max_steps} steps: {format_term(t)}")
    return out.term


def is_normal(t: Term) -> bool:
    return _step(t) is None


# --- bracket abstraction ---

def _occurs(v: Var, t: Term) -> bool:
    stack = [t]
    while stack:
        cur = stack.pop()
        if cur == v:
            return True
        if isinstance(cur, App):
            stack.append(cur.fun)
            stack.append(cur.arg)
    return False


def _abstract(v: Var, t: Term) -> Term:
    if t == v:
        return I
    if not _occurs(v, t):
        return App(K, t)
    assert isinstance(t, App)
    if t.arg == v and not _occurs(v, t.fun):
        return t.fun
    return app(S, _abstract(v, t.fun), _abstract(v, t.arg))


def lam(*names_and_body) -> Term:
    """lam("x", "y", body): K/S-терм для λx.λy.body (bracket abstraction).

    В body переменные записываются как Var("x").
    """
    *names, body = names_and_body
    for name in reversed(names):
        body = _abstract(Var(name), body)
    return body


# --- library ---

I = app(S, K, K)

_a, _b, _f, _g, _n, _p, _x = (Var(c) for c in "abfgnpx")

PAIR = lam("a", "b", "f", app(_f, _a, _b))
FST = lam("p", app(_p, K))
SND = lam("p", app(_p, App(K, I)))
SWAP = lam("p", app(PAIR, App(SND, _p), App(FST, _p)))
DUP = lam("x", app(PAIR, _x, _x))
COMPOSE = lam("g", "f", "x", App(_g, App(_f, _x)))
ZERO = App(K, I)
SUCC = lam("n", "f", "x", App(_f, app(_n, _f, _x)))


def const(t: Term) -> Term:
    """Код константной функции: const(t)·a ⇒ t."""
    return App(K, t)


@lru_cache(maxsize=None)
def numeral(k: int) -> Term:
    """Чёрчевская цифра k как нормальная форма succ^k·zero."""
    if k < 0:
        raise ValueError(f"numeral needs k >= 0, got {k}")
    if k == 0:
        return normal_form(ZERO)
    return normal_form(App(SUCC, numeral(k - 1)))


def decode_numeral(t: Term, limit: int = 64, budget: Budget | int | None = None) -> int | None:
    out = reduce(t, budget)
    if isinstance(out, BudgetExceeded):
        return None
    for k in range(limit):
        if numeral(k) == out.term:
            return k
    return None


_NAMED = {
    "K": K,
    "S": S,
    "I": I,
    "pair": PAIR,
    "fst": FST,
    "snd": SND,
    "swap": SWAP,
    "dup": DUP,
    "compose": COMPOSE,
    "zero": ZERO,
    "succ": SUCC,
}


def combinator(name: str, arg: Term | int | None = None) -> Term:
    """Производный комбинатор по имени.

    Примеры: combinator("I"), combinator("numeral", 2), combinator("const", t).
    """
    if name == "numeral":
        return numeral(int(arg))
    if name == "const":
        if arg is None or isinstance(arg, int):
            raise ValueError("const needs a term argument")
        return const(arg)
    try:
        return _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown combinator {name!r}") from None


# --- enumeration ---

@lru_cache(maxsize=None)
def terms_of_size(n: int) -> tuple[Term, ...]:
    """Все замкнутые K/S-термы ровно с n аппликациями, в каноническом порядке."""
    if n == 0:
        return (K, S)
    out: list[Term] = []
    for left in range(n):
        for f, a in _cartesian(terms_of_size(left), terms_of_size(n - 1 - left)):
            out.append(App(f, a))
    return tuple(sorted(out, key=format_term))


def enumerate_terms(depth: int) -> Iterator[Term]:
    for n in range(depth + 1):
        yield from terms_of_size(n)


# --- text syntax ---

class TermSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at {line}:{column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


_GRAMMAR = r"""
start: app
app: operand+
operand: NAME          -> name
       | "(" app ")"   -> group
NAME: /[A-Za-z][A-Za-z0-9_]*/
%import common.WS
%ignore WS
"""


class _ToTerm(Transformer):
    def start(self, children):
        return children[0]

    def app(self, children):
        return app(*children)

    def group(self, children):
        return children[0]

    def name(self, children):
        tok: Token = children[0]
        value = str(tok)
        if value in _NAMED:
            return _NAMED[value]
        if value[0] == "n" and value[1:].isdigit():
            return numeral(int(value[1:]))
        raise TermSyntaxError(f"unknown term name {value!r}", tok.line, tok.column)


_parser = Lark(_GRAMMAR, parser="lalr")


def parse_term(text: str) -> Term:
    """Разобрать терм: `S K K`, `(K S) K`, а также имена I, pair, succ, n2 ..."""
    try:
        return _ToTerm().transform(_parser.parse(text))
    except UnexpectedInput as e:
        raise TermSyntaxError(f"cannot parse term {text!r}", e.line, e.column) from None
    except VisitError as e:
        if isinstance(e.orig_exc, TermSyntaxError):
            raise e.orig_exc from None
        raise


def format_term(t: Term) -> str:
    """Печать с минимальными скобками (аппликация левоассоциативна)."""
    if not isinstance(t, App):
        return str(t)
    head, args = _spine(t)
    parts = [str(head)]
    for a in args:
        s = format_term(a)
        parts.append(f"({s})" if isinstance(a, App) else s)
    return " ".join(parts)
