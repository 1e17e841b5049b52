from __future__ import annotations

"""calculus.realizability

Предикаты со значениями во множествах реализаторов над конечными носителями
(настольная версия P(N)^X), порядок реализуемости Клини с явными треками,
операции Гейтинга и валидность предложений.

Зачем:
- φ ≤ ψ означает: есть терм n (трек), такой что для каждого x и каждого
  a ∈ φ(x) аппликация n.a определена и лежит в ψ(x).
- Всё, что eff доказывает, сводится к поиску/проверке таких треков.

Соглашения:
- RealizerSet: конечное множество нормальных форм или символ All (= N, верх).
  All слева от ≤ перечислить нельзя; такие строки решаются только для треков
  синтаксической формы K·b (константа) и S·K·x (тождество), иначе undetermined.
- ⋂ и ⋃ — буквальные пересечение/объединение множеств.
- → никогда не материализуется как множество: импликация проверяется
  только через треки.
- Порядок носителя канонический: контрпримеры и выбор — первые по порядку.
"""

from dataclasses import dataclass, field
from functools import lru_cache, reduce as _fold
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence, Union
import logging

from . import pca
from .pca import App, Budget, BudgetExceeded, Term, as_budget
from .verdict import Status, Verdict

log = logging.getLogger(__name__)

Element = Hashable


# --- carriers ---

@dataclass(frozen=True)
class Carrier:
    """Упорядоченный конечный список различных элементов."""

    elements: tuple[Element, ...]
    _pos: Mapping[Element, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        elems = tuple(self.elements)
        object.__setattr__(self, "elements", elems)
        pos = {e: i for i, e in enumerate(elems)}
        if len(pos) != len(elems):
            raise ValueError(f"carrier has duplicate elements: {elems}")
        object.__setattr__(self, "_pos", pos)

    @classmethod
    def of(cls, *elements: Element) -> "Carrier":
        return cls(tuple(elements))

    @classmethod
    def singleton(cls) -> "Carrier":
        return cls(("*",))

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self._pos

    def index(self, x: Element) -> int:
        try:
            return self._pos[x]
        except KeyError:
            raise KeyError(f"{x!r} is not in carrier {self.elements}") from None


def product(*carriers: Carrier) -> Carrier:
    """A×B×…: кортежи в лексикографическом порядке."""
    tuples: list[tuple] = [()]
    for c in carriers:
        tuples = [t + (x,) for t in tuples for x in c]
    return Carrier(tuple(tuples))


# --- realizer sets ---

@dataclass(frozen=True)
class RealizerSet:
    """Finite(нормальные формы) или All (terms is None)."""

    terms: frozenset[Term] | None

    @classmethod
    def all(cls) -> "RealizerSet":
        return cls(None)

    @classmethod
    def empty(cls) -> "RealizerSet":
        return cls(frozenset())

    @classmethod
    def of(cls, *terms: Term, budget: Budget | int | None = None) -> "RealizerSet":
        return cls(frozenset(pca.normal_form(t, budget) for t in terms))

    @property
    def is_all(self) -> bool:
        return self.terms is None

    @property
    def is_empty(self) -> bool:
        return self.terms is not None and not self.terms

    def contains(self, u: Term) -> bool:
        return self.terms is None or u in self.terms

    def union(self, other: "RealizerSet") -> "RealizerSet":
        if self.is_all or other.is_all:
            return ALL
        return RealizerSet(self.terms | other.terms)

    def intersect(self, other: "RealizerSet") -> "RealizerSet":
        if self.is_all:
            return other
        if other.is_all:
            return self
        return RealizerSet(self.terms & other.terms)

    def sorted(self) -> list[Term]:
        if self.terms is None:
            raise ValueError("All cannot be enumerated")
        return sorted(self.terms, key=pca.sort_key)

    def __str__(self) -> str:
        if self.terms is None:
            return "all"
        return "{" + ", ".join(pca.format_term(t) for t in self.sorted()) + "}"


ALL = RealizerSet.all()
EMPTY = RealizerSet.empty()


def meet_sets(s: RealizerSet, t: RealizerSet) -> RealizerSet:
    """s ∧ t = {pair·a·b}. Компонента All представлена каноническим свидетелем K."""
    if s.is_all and t.is_all:
        return ALL
    left = [pca.K] if s.is_all else s.sorted()
    right = [pca.K] if t.is_all else t.sorted()
    return RealizerSet(frozenset(pca.normal_form(pca.app(pca.PAIR, a, b)) for a in left for b in right))


# --- predicates ---

@dataclass(frozen=True)
class Predicate:
    """φ: X → P(N), значения выровнены по порядку носителя."""

    carrier: Carrier
    values: tuple[RealizerSet, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.carrier):
            raise ValueError("predicate must be defined exactly on its carrier")

    @classmethod
    def build(cls, carrier: Carrier,
              source: Callable[[Element], RealizerSet] | Mapping[Element, RealizerSet],
              default: RealizerSet = EMPTY) -> "Predicate":
        if callable(source):
            return cls(carrier, tuple(source(x) for x in carrier))
        unknown = [x for x in source if x not in carrier]
        if unknown:
            raise ValueError(f"values given outside the carrier: {unknown}")
        return cls(carrier, tuple(source.get(x, default) for x in carrier))

    @classmethod
    def constant(cls, carrier: Carrier, value: RealizerSet) -> "Predicate":
        return cls(carrier, tuple(value for _ in carrier))

    def __call__(self, x: Element) -> RealizerSet:
        return self.values[self.carrier.index(x)]

    def items(self) -> Iterator[tuple[Element, RealizerSet]]:
        return zip(self.carrier, self.values)

    @property
    def is_finite(self) -> bool:
        return not any(v.is_all for v in self.values)

    def realizers(self) -> list[Term]:
        """Все реализаторы из конечных значений, в каноническом порядке."""
        found = {t for v in self.values if not v.is_all for t in v.terms}
        return sorted(found, key=pca.sort_key)

    def __str__(self) -> str:
        return "; ".join(f"{x} -> {v}" for x, v in self.items())


def top(carrier: Carrier) -> Predicate:
    return Predicate.constant(carrier, ALL)


def bottom(carrier: Carrier) -> Predicate:
    return Predicate.constant(carrier, EMPTY)


def _same_carrier(phi: Predicate, psi: Predicate) -> None:
    if phi.carrier != psi.carrier:
        raise ValueError("predicates live on different carriers")


def meet(phi: Predicate, psi: Predicate) -> Predicate:
    _same_carrier(phi, psi)
    return Predicate(phi.carrier, tuple(meet_sets(a, b) for a, b in zip(phi.values, psi.values)))


def union_over(index: Carrier, family: Callable[[Element], Predicate], target: Carrier) -> Predicate:
    """⋃_{j∈J} family(j) — поточечное объединение; пустое J даёт ∅ всюду."""
    members = [family(j) for j in index]
    for m in members:
        if m.carrier != target:
            raise ValueError("family member on a different carrier")
    return Predicate(target, tuple(
        _fold(RealizerSet.union, (m.values[i] for m in members), EMPTY) for i in range(len(target))))


def intersect_over(index: Carrier, family: Callable[[Element], Predicate], target: Carrier) -> Predicate:
    """⋂_{j∈J} family(j) — поточечное пересечение; пустое J даёт All всюду."""
    members = [family(j) for j in index]
    for m in members:
        if m.carrier != target:
            raise ValueError("family member on a different carrier")
    return Predicate(target, tuple(
        _fold(RealizerSet.intersect, (m.values[i] for m in members), ALL) for i in range(len(target))))


def precompose(phi: Predicate, carrier: Carrier, f: Callable[[Element], Element]) -> Predicate:
    """φ∘f как предикат над carrier."""
    return Predicate.build(carrier, lambda x: phi(f(x)))


# --- tracks ---

@dataclass(frozen=True)
class Track:
    witness: Term
    budget: Budget = field(default_factory=Budget)

    def __str__(self) -> str:
        return pca.format_term(self.witness)

    def recheck(self, phi: Predicate, psi: Predicate) -> Verdict:
        """Повторная проверка сохранённого трека с его собственным бюджетом."""
        return verify_track(phi, psi, self.witness, self.budget)


@dataclass(frozen=True)
class NotFound:
    """Поиск ничего не нашёл.

    refuted=True — неравенство доказуемо ложно конечным перебором
    (witness — строка и вход, для которых нет допустимого выхода).
    undetermined=True — какой-то кандидат упёрся в бюджет.
    Иначе — просто "не найдено" (не доказательство ≰).
    """

    reason: str = "no track found"
    refuted: bool = False
    undetermined: bool = False
    witness: Any = None

    def verdict(self) -> Verdict:
        if self.refuted:
            return Verdict.fails(self.witness, self.reason)
        return Verdict.undetermined(self.reason, self.witness)


def _constant_shape(e: Term) -> Term | None:
    if isinstance(e, App) and e.fun == pca.K:
        return e.arg
    return None


def _identity_shape(e: Term) -> bool:
    return isinstance(e, App) and isinstance(e.fun, App) and e.fun.fun == pca.S and e.fun.arg == pca.K


def _first_outside(s: RealizerSet) -> Term:
    for t in pca.enumerate_terms(8):
        if pca.is_normal(t) and not s.contains(t):
            return t
    raise AssertionError("finite realizer set covers every small normal term")


@dataclass(frozen=True)
class _Row:
    key: Element
    left: RealizerSet
    member: Callable[[Term], bool | None]
    right: RealizerSet | None  # materialized consequent, if any


def _check_rows(e: Term, rows: Iterable[_Row], budget: Budget) -> Verdict:
    pending: Verdict | None = None
    const_body = _constant_shape(e)
    for row in rows:
        if row.left.is_all:
            if const_body is not None:
                out = pca.reduce(const_body, budget)
                if isinstance(out, BudgetExceeded):
                    pending = pending or Verdict.undetermined("budget exceeded", (row.key, pca.K))
                    continue
                ok = row.member(out.term)
                if ok is False:
                    return Verdict.fails((row.key, pca.K))
                if ok is None:
                    pending = pending or Verdict.undetermined("membership undetermined", (row.key, pca.K))
                continue
            if _identity_shape(e) and row.right is not None:
                if row.right.is_all:
                    continue
                return Verdict.fails((row.key, _first_outside(row.right)))
            pending = pending or Verdict.undetermined("All on the left cannot be enumerated", row.key)
            continue
        for a in row.left.sorted():
            out = pca.apply(e, a, budget)
            if isinstance(out, BudgetExceeded):
                pending = pending or Verdict.undetermined("budget exceeded", (row.key, a))
                continue
            ok = row.member(out.term)
            if ok is False:
                return Verdict.fails((row.key, a))
            if ok is None:
                pending = pending or Verdict.undetermined("membership undetermined", (row.key, a))
    return pending or Verdict.holds()


def verify_track(phi: Predicate, psi: Predicate, e: Term, budget: Budget | int | None = None) -> Verdict:
    """Проверить, что e — трек φ ≤ ψ.

    holds — для всех x и a ∈ φ(x): e.a определено и лежит в ψ(x);
    fails(witness=(x, a)) — первое нарушение в каноническом порядке;
    undetermined — бюджет исчерпан или φ(x)=All для трека, не являющегося
    константой/тождеством.
    """
    _same_carrier(phi, psi)
    b = as_budget(budget)
    rows = (_Row(x, phi(x), psi(x).contains, psi(x)) for x in phi.carrier)
    return _check_rows(e, rows, b)


def refute(phi: Predicate, psi: Predicate) -> Any:
    """Конечное опровержение φ ≤ ψ: (x, a), для которых нет допустимого выхода.

    Любой трек n обязан отправить вход a в пересечение всех ψ(x), где a ∈ φ(x);
    строки с φ(x)=All ограничивают выход для любого входа (в т.ч. K).
    """
    _same_carrier(phi, psi)
    all_rows = [x for x in phi.carrier if phi(x).is_all]
    forced = _fold(RealizerSet.intersect, (psi(x) for x in all_rows), ALL)
    if all_rows and forced.is_empty:
        return (all_rows[0], pca.K)
    allowed: dict[Term, RealizerSet] = {}
    first_row: dict[Term, Element] = {}
    for x in phi.carrier:
        left = phi(x)
        if left.is_all:
            continue
        for a in left.sorted():
            allowed[a] = allowed.get(a, forced).intersect(psi(x))
            first_row.setdefault(a, x)
    for a in sorted(allowed, key=pca.sort_key):
        if allowed[a].is_empty:
            return (first_row[a], a)
    return None


_BASE_POOL: tuple[Term, ...] = (pca.I, pca.FST, pca.SND, pca.SWAP, pca.DUP, pca.SUCC, pca.K)


@lru_cache(maxsize=None)
def _base_compositions() -> tuple[Term, ...]:
    return tuple(pca.normal_form(pca.app(pca.COMPOSE, g, f)) for g in _BASE_POOL for f in _BASE_POOL)


def _pairings(constants: Sequence[Term]) -> Iterator[Term]:
    parts = list(_BASE_POOL[:5]) + [pca.const(r) for r in constants]
    for g in parts:
        for h in parts:
            yield pairing_track(g, h)


def library_pool(constants: Sequence[Term] = ()) -> Iterator[Term]:
    """Библиотечный пул: базовые комбинаторы, const(r), композиции и спаривания."""
    yield from _BASE_POOL
    yield from (pca.const(r) for r in constants)
    yield from _base_compositions()
    yield from _pairings(constants)


def _candidates(hints: Iterable[Term], constants: Sequence[Term], depth: int) -> Iterator[Term]:
    seen: set[Term] = set()
    for source in (hints, _BASE_POOL, (pca.const(r) for r in constants),
                   pca.enumerate_terms(depth), library_pool(constants)):
        for t in source:
            if t not in seen:
                seen.add(t)
                yield t


def search_track(phi: Predicate, psi: Predicate, depth: int = 4,
                 budget: Budget | int | None = None,
                 hints: Iterable[Term] = ()) -> Track | NotFound:
    """Найти трек φ ≤ ψ.

    Порядок кандидатов: подсказки (hints), библиотечный пул (I, fst, snd, ...,
    const(r) для r из ψ), все K/S-термы до depth аппликаций в порядке
    размер-затем-текст, композиции и спаривания пула. Возвращает первый
    проверенный трек. NotFound не доказывает ≰, если только refuted не выставлен.
    """
    _same_carrier(phi, psi)
    b = as_budget(budget)
    witness = refute(phi, psi)
    if witness is not None:
        return NotFound("no admissible output for some input", refuted=True, witness=witness)
    undetermined = False
    tried = 0
    for cand in _candidates(hints, psi.realizers(), depth):
        tried += 1
        v = verify_track(phi, psi, cand, b)
        if v.ok:
            log.debug("track found after %d candidates: %s", tried, pca.format_term(cand))
            return Track(cand, b)
        undetermined = undetermined or v.status is Status.UNDETERMINED
    log.debug("no track among %d candidates (depth %d)", tried, depth)
    return NotFound(f"no track among {tried} candidates at depth {depth}", undetermined=undetermined)


@dataclass(frozen=True)
class PosetEquality:
    track_lr: Track
    track_rl: Track


def poset_equal(phi: Predicate, psi: Predicate, depth: int = 4,
                budget: Budget | int | None = None,
                hints_lr: Iterable[Term] = (), hints_rl: Iterable[Term] = ()) -> PosetEquality | NotFound:
    """Равенство в рефлексии порядка: треки в обе стороны."""
    lr = search_track(phi, psi, depth, budget, hints_lr)
    if isinstance(lr, NotFound):
        return lr
    rl = search_track(psi, phi, depth, budget, hints_rl)
    if isinstance(rl, NotFound):
        return rl
    return PosetEquality(lr, rl)


def compose_tracks(n: Term, m: Term) -> Term:
    """Трек φ ≤ χ из треков m: φ ≤ ψ и n: ψ ≤ χ."""
    return pca.app(pca.COMPOSE, n, m)


def pairing_track(m: Term, n: Term) -> Term:
    """Трек χ ≤ φ∧ψ из треков m: χ ≤ φ и n: χ ≤ ψ."""
    x = pca.Var("x")
    return pca.lam("x", pca.app(pca.PAIR, App(m, x), App(n, x)))


# --- obligations ---

@dataclass(frozen=True)
class Obligation:
    """Предложение вида ⋂_{j∈J} A(j) → B(j), заданное парой предикатов над J."""

    name: str
    text: str
    antecedent: Predicate
    consequent: Predicate

    def verify(self, e: Term, budget: Budget | int | None = None) -> Verdict:
        return verify_track(self.antecedent, self.consequent, e, budget)

    def search(self, depth: int, budget: Budget | int | None = None,
               hints: Iterable[Term] = ()) -> Track | NotFound:
        return search_track(self.antecedent, self.consequent, depth, budget, hints)

    def sentence(self) -> "Sentence":
        return InterOver(self.antecedent.carrier,
                         lambda j: Implies(Atom(self.antecedent(j)), Atom(self.consequent(j))))


# --- sentences ---

@dataclass(frozen=True)
class Atom:
    value: RealizerSet


@dataclass(frozen=True)
class And:
    left: "Sentence"
    right: "Sentence"


@dataclass(frozen=True)
class Implies:
    antecedent: "Sentence"
    consequent: "Sentence"


@dataclass(frozen=True, eq=False)
class InterOver:
    index: Carrier
    body: Callable[[Element], "Sentence"]


@dataclass(frozen=True, eq=False)
class UnionOver:
    index: Carrier
    body: Callable[[Element], "Sentence"]


Sentence = Union[Atom, And, Implies, InterOver, UnionOver]


@dataclass(frozen=True)
class Validity:
    """Сертификат ⊤₁ ≤ s: track — трек, realizer — элемент s."""

    track: Track
    realizer: Term


def materialize(s: Sentence) -> RealizerSet | None:
    """Множество реализаторов предложения без импликаций; None, если есть →."""
    if isinstance(s, Atom):
        return s.value
    if isinstance(s, And):
        left, right = materialize(s.left), materialize(s.right)
        if left is None or right is None:
            return None
        return meet_sets(left, right)
    if isinstance(s, Implies):
        return None
    parts = [materialize(s.body(j)) for j in s.index]
    if any(p is None for p in parts):
        return None
    if isinstance(s, InterOver):
        return _fold(RealizerSet.intersect, parts, ALL)
    return _fold(RealizerSet.union, parts, EMPTY)


def _kleene_all(values: Iterable[bool | None]) -> bool | None:
    unknown = False
    for v in values:
        if v is False:
            return False
        unknown = unknown or v is None
    return None if unknown else True


def _kleene_any(values: Iterable[bool | None]) -> bool | None:
    unknown = False
    for v in values:
        if v is True:
            return True
        unknown = unknown or v is None
    return None if unknown else False


def member(u: Term, s: Sentence, budget: Budget | int | None = None) -> bool | None:
    """u ∈ ⟦s⟧ (трёхзначно: None — не удалось решить)."""
    b = as_budget(budget)
    mat = materialize(s)
    if mat is not None:
        return mat.contains(u)
    if isinstance(s, And):
        parts = [pca.reduce(App(sel, u), b) for sel in (pca.FST, pca.SND)]
        if any(isinstance(p, BudgetExceeded) for p in parts):
            return None
        left, right = (p.term for p in parts)
        rebuilt = pca.reduce(pca.app(pca.PAIR, left, right), b)
        if isinstance(rebuilt, BudgetExceeded):
            return None
        if rebuilt.term != u:
            return False
        return _kleene_all((member(left, s.left, b), member(right, s.right, b)))
    if isinstance(s, Implies):
        ante = materialize(s.antecedent)
        if ante is None:
            return None
        row = _Row("*", ante, lambda v: member(v, s.consequent, b), materialize(s.consequent))
        v = _check_rows(u, [row], b)
        return {Status.HOLDS: True, Status.FAILS: False}.get(v.status)
    if isinstance(s, InterOver):
        return _kleene_all(member(u, s.body(j), b) for j in s.index)
    return _kleene_any(member(u, s.body(j), b) for j in s.index)


def _sentence_constants(s: Sentence) -> list[Term]:
    found: set[Term] = set()

    def walk(t: Sentence) -> None:
        if isinstance(t, Atom):
            if not t.value.is_all:
                found.update(t.value.terms)
        elif isinstance(t, And):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, Implies):
            walk(t.consequent)
        else:
            for j in t.index:
                walk(t.body(j))

    walk(s)
    return sorted(found, key=pca.sort_key)


def _instances_as_predicates(s: Sentence) -> tuple[Predicate, Predicate] | None:
    """⋂_j A_j → B_j с материализуемыми A_j, B_j как пара предикатов над J."""
    if not isinstance(s, InterOver):
        return None
    ants, cons = [], []
    for j in s.index:
        inst = s.body(j)
        if not isinstance(inst, Implies):
            return None
        a, c = materialize(inst.antecedent), materialize(inst.consequent)
        if a is None or c is None:
            return None
        ants.append(a)
        cons.append(c)
    return Predicate(s.index, tuple(ants)), Predicate(s.index, tuple(cons))


def _realize(s: Sentence, depth: int, b: Budget, hints: Sequence[Term]) -> Term | NotFound:
    mat = materialize(s)
    if mat is not None:
        if mat.is_all:
            return pca.K
        if mat.is_empty:
            return NotFound("sentence denotes the empty set", refuted=True, witness=str(mat))
        return mat.sorted()[0]
    if isinstance(s, And):
        left = _realize(s.left, depth, b, hints)
        if isinstance(left, NotFound):
            return left
        right = _realize(s.right, depth, b, hints)
        if isinstance(right, NotFound):
            return right
        return pca.normal_form(pca.app(pca.PAIR, left, right), b)
    if isinstance(s, UnionOver):
        misses = []
        for j in s.index:
            got = _realize(s.body(j), depth, b, hints)
            if not isinstance(got, NotFound):
                return got
            misses.append(got)
        if all(m.refuted for m in misses):
            return NotFound("every instance of the union is refuted", refuted=True)
        return NotFound("no instance of the union certified",
                        undetermined=any(m.undetermined for m in misses))
    preds = _instances_as_predicates(s)
    if preds is not None:
        witness = refute(*preds)
        if witness is not None:
            return NotFound("no admissible output for some input", refuted=True, witness=witness)
    undetermined = False
    for cand in _candidates(hints, _sentence_constants(s), depth):
        ok = member(cand, s, b)
        if ok is True:
            return cand
        undetermined = undetermined or ok is None
    return NotFound(f"no uniform track at depth {depth}", undetermined=undetermined)


def valid(s: Sentence, depth: int = 4, budget: Budget | int | None = None,
          hints: Sequence[Term] = ()) -> Validity | NotFound:
    """Валидность предложения: ⊤₁ ≤ s.

    Atom(S) валиден тогда и только тогда, когда S непусто (трек — const(r));
    Atom(All) сертифицируется треком K. Для ⋂ импликаций ищется один
    равномерный трек; для ⋃ — первый сертифицируемый экземпляр.
    """
    b = as_budget(budget)
    got = _realize(s, depth, b, tuple(hints))
    if isinstance(got, NotFound):
        return got
    if isinstance(s, Atom) and s.value.is_all:
        return Validity(Track(pca.K, b), got)
    return Validity(Track(pca.const(got), b), got)
