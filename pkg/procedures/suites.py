from __future__ import annotations

"""procedures.suites

Сгенерированные наборы малых экземпляров.

Зачем:
- "Eff гильбертов", лемма и следствие проверяются не на одном примере,
  а на наборе сертифицируемых экземпляров (|A| ≤ 3, реализаторы — цифры 0..2).
- Правила ε-формы/ε-I проверяются перебором всех ψ ↣ Γ×A до заданной границы.

PER строятся по разбиениям: ρ(x,y) = S_c, если x и y в одном классе c,
иначе ∅. Пропозиция P на классе c — любое подмножество T_c ⊆ S_c (тогда
треки строгости/реляционности — I и snd).

Соглашения:
- Набор для "Eff гильбертов" — случайная выборка (random.Random(seed)) из
  всех таких (ρ, P).
- Набор для леммы полный: живые классы A несут {n0}, живые классы B — {n1},
  f пробегает все совместимые отображения. Мёртвые элементы A отправляются
  в первый элемент B. Экземпляры, отличающиеся лишь перенумерацией
  элементов A и B, считаются одним.
"""

from dataclasses import dataclass
from itertools import chain, combinations, permutations
from itertools import product as _cartesian
import logging
import random

from calculus import eff
from calculus import finite_topos as ft
from calculus import language as lang
from calculus import pca
from calculus.realizability import EMPTY, Carrier, Predicate, RealizerSet, product
from calculus.verdict import Verdict

log = logging.getLogger(__name__)

ALPHABET = tuple(pca.numeral(k) for k in range(3))
SOURCE_SET = RealizerSet.of(ALPHABET[0])
TARGET_SET = RealizerSet.of(ALPHABET[1])


def _subsets(terms: tuple) -> list[RealizerSet]:
    return [RealizerSet.of(*c) for c in chain.from_iterable(combinations(terms, r) for r in range(len(terms) + 1))]


# (S_c, T_c) with T_c ⊆ S_c
CLASS_CHOICES = tuple((s, t) for s in _subsets(ALPHABET) for t in _subsets(tuple(s.sorted())))


def partitions(n: int) -> list[tuple[int, ...]]:
    """Разбиения {0..n-1} как строки ограниченного роста."""
    out: list[tuple[int, ...]] = []

    def grow(prefix: tuple[int, ...], top: int) -> None:
        if len(prefix) == n:
            out.append(prefix)
            return
        for k in range(top + 2):
            grow(prefix + (k,), max(top, k))

    if n:
        grow((0,), 0)
    return out


def carrier_of(n: int, prefix: str = "a") -> Carrier:
    return Carrier(tuple(f"{prefix}{i}" for i in range(n)))


def partition_rho(carrier: Carrier, labels: tuple[int, ...], sets: tuple[RealizerSet, ...]) -> Predicate:
    cls = dict(zip(carrier, labels))
    return Predicate.build(product(carrier, carrier),
                           lambda xy: sets[cls[xy[0]]] if cls[xy[0]] == cls[xy[1]] else EMPTY)


def class_prop(carrier: Carrier, labels: tuple[int, ...], props: tuple[RealizerSet, ...]) -> Predicate:
    cls = dict(zip(carrier, labels))
    return Predicate.build(carrier, lambda x: props[cls[x]])


@dataclass(frozen=True)
class EffInstance:
    name: str
    carrier: Carrier
    rho: Predicate
    p: Predicate

    def certify(self, depth: int = 4, budget: int | None = None) -> eff.StrictRelationalProp:
        per = eff.make_per(self.carrier, self.rho, depth, budget)
        return eff.make_prop(per, self.p, depth, budget)


def _describe(labels: tuple[int, ...], sets: tuple[RealizerSet, ...], props: tuple[RealizerSet, ...]) -> str:
    return f"classes={''.join(map(str, labels))} sets={'/'.join(map(str, sets))} P={'/'.join(map(str, props))}"


def eff_instances(limit: int = 60, seed: int = 0, max_size: int = 3) -> list[EffInstance]:
    """Экземпляры (A,ρ), P с эпиморфной стрелкой (A,ρ) → 1 (есть ρ(a,a) ≠ ∅).

    Все кандидаты перечисляются, затем выбирается limit штук случайно
    (random.Random(seed)); порядок результата детерминирован.
    """
    candidates = []
    for n in range(1, max_size + 1):
        for labels in partitions(n):
            k = max(labels) + 1
            for choice in _cartesian(CLASS_CHOICES, repeat=k):
                if all(s.is_empty for s, _ in choice):
                    continue
                candidates.append((n, labels, choice))
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(candidates)), min(limit, len(candidates))))
    out = []
    for idx in picked:
        n, labels, choice = candidates[idx]
        sets = tuple(s for s, _ in choice)
        props = tuple(t for _, t in choice)
        carrier = carrier_of(n)
        out.append(EffInstance(_describe(labels, sets, props), carrier,
                               partition_rho(carrier, labels, sets),
                               class_prop(carrier, labels, props)))
    return out


@dataclass(frozen=True)
class LemmaInstance:
    name: str
    source: Carrier
    rho: Predicate
    target: Carrier
    sigma: Predicate
    p: Predicate
    fmap: dict

    def certify(self, depth: int = 4, budget: int | None = None) -> tuple[eff.Per, eff.StrictRelationalProp]:
        src = eff.make_per(self.source, self.rho, depth, budget)
        tgt = eff.make_per(self.target, self.sigma, depth, budget)
        return src, eff.make_prop(tgt, self.p, depth, budget)


def _rgs(labels: tuple[int, ...]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(c, len(seen)) for c in labels)


def _canonical(la: tuple, live_a: tuple, lb: tuple, live_b: tuple, keep: tuple, fmap: tuple) -> tuple:
    """Наименьшее представление экземпляра среди перенумераций A и B (fmap[i] = -1 для мёртвых i)."""
    best = None
    for pa in permutations(range(len(la))):
        for pb in permutations(range(len(lb))):
            new_b = {old: new for new, old in enumerate(pb)}
            key = (_rgs(tuple(la[i] for i in pa)), tuple(live_a[i] for i in pa),
                   _rgs(tuple(lb[j] for j in pb)), tuple(live_b[j] for j in pb), tuple(keep[j] for j in pb),
                   tuple(-1 if fmap[i] < 0 else new_b[fmap[i]] for i in pa))
            if best is None or key < best:
                best = key
    return best


def _compatible_maps(la: tuple, live_a: tuple, lb: tuple, live_b: tuple) -> list[tuple[int, ...]]:
    """Образы живых элементов A: каждый живой класс целиком в одном живом классе B."""
    a_classes = sorted({c for c, live in zip(la, live_a) if live})
    b_classes = sorted({d for d, live in zip(lb, live_b) if live})
    out = []
    for target in _cartesian(b_classes, repeat=len(a_classes)):
        to_class = dict(zip(a_classes, target))
        options = [[j for j, d in enumerate(lb) if d == to_class[c]] if live else [-1]
                   for c, live in zip(la, live_a)]
        out.extend(_cartesian(*options))
    return out


def lemma_instances(max_size: int = 3) -> list[LemmaInstance]:
    """Все экземпляры леммы с |A|,|B| ≤ max_size с точностью до перенумерации."""
    seen: set[tuple] = set()
    out: list[LemmaInstance] = []
    for n, m in _cartesian(range(1, max_size + 1), repeat=2):
        a, b = carrier_of(n, "a"), carrier_of(m, "b")
        for la, lb in _cartesian(partitions(n), partitions(m)):
            ka, kb = max(la) + 1, max(lb) + 1
            for class_live_a in _cartesian((False, True), repeat=ka):
                live_a = tuple(class_live_a[c] for c in la)
                for class_live_b in _cartesian((False, True), repeat=kb):
                    if not any(class_live_b):
                        continue
                    live_b = tuple(class_live_b[d] for d in lb)
                    live_classes = [d for d in range(kb) if class_live_b[d]]
                    for kept in _cartesian((False, True), repeat=len(live_classes)):
                        class_keep = dict(zip(live_classes, kept))
                        keep = tuple(class_keep.get(d, False) for d in lb)
                        for fmap in _compatible_maps(la, live_a, lb, live_b):
                            key = _canonical(la, live_a, lb, live_b, keep, fmap)
                            if key in seen:
                                continue
                            seen.add(key)
                            out.append(_lemma_instance(a, b, la, class_live_a, lb, class_live_b, kept,
                                                       live_classes, fmap))
    log.debug("lemma suite: %d instance(s) up to size %d", len(out), max_size)
    return out


def _lemma_instance(a: Carrier, b: Carrier, la: tuple, class_live_a: tuple, lb: tuple, class_live_b: tuple,
                    kept: tuple, live_classes: list[int], fmap: tuple) -> LemmaInstance:
    sets_a = tuple(SOURCE_SET if live else EMPTY for live in class_live_a)
    sets_b = tuple(TARGET_SET if live else EMPTY for live in class_live_b)
    class_keep = dict(zip(live_classes, kept))
    props_b = tuple(TARGET_SET if class_keep.get(d, False) else EMPTY for d in range(len(class_live_b)))
    f = {x: b.elements[max(j, 0)] for x, j in zip(a, fmap)}
    name = f"A=classes={''.join(map(str, la))} sets={'/'.join(map(str, sets_a))} B={_describe(lb, sets_b, props_b)} f={f}"
    return LemmaInstance(name, a, partition_rho(a, la, sets_a), b, partition_rho(b, lb, sets_b),
                         class_prop(b, lb, props_b), f)


def _psi_session(ctx: ft.ToposCtx, gamma: ft.FinObj | None, a: ft.FinObj,
                 psi: ft.Subobject) -> lang.Session:
    sig = lang.Signature(ctx)
    sig.declare_type("A", a)
    args = ["A"]
    if gamma is not None:
        sig.declare_type("G", gamma)
        args = ["G", "A"]
    sig.declare_relation("Psi", args, psi)
    return lang.Session(sig)


def epsilon_rule_check(ctx: ft.ToposCtx, bound: int) -> Verdict:
    """ε-I для всех ψ ↣ Γ×A (полный режим) и всех замкнутых ψ ↣ A (частичный).

    Γ и A пробегают неначальные объекты с компонентами ≤ bound.
    """
    objs = [o for o in ft.objects_up_to(ctx, bound) if not o.is_initial]
    count = 0
    for a in objs:
        for psi in ft.subobjects(a):
            res = _psi_session(ctx, None, a, psi).eps_rule("Psi(x)", "x:A", "partial")
            count += 1
            if not res.epsI_valid:
                return Verdict.fails(psi, f"partial epsilon-I fails for {lang.format_sequent(res.epsI_sequent)}")
        for gamma in objs:
            prod, _, _ = ft.product(gamma, a)
            for psi in ft.subobjects(prod):
                res = _psi_session(ctx, gamma, a, psi).eps_rule("Psi(g, x)", "g:G, x:A", "full")
                count += 1
                if not (res.epsI_valid and res.square_is_pullback):
                    return Verdict.fails(psi, f"epsilon-I fails for {lang.format_sequent(res.epsI_sequent)}")
    log.debug("epsilon rules: %d instance(s) valid (bound %d)", count, bound)
    return Verdict.holds(count)

