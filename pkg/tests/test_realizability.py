from __future__ import annotations

import random

import pytest

from calculus import pca
from calculus.realizability import (
    ALL,
    EMPTY,
    Atom,
    Carrier,
    Implies,
    InterOver,
    NotFound,
    Obligation,
    Predicate,
    RealizerSet,
    Track,
    UnionOver,
    compose_tracks,
    intersect_over,
    meet,
    pairing_track,
    poset_equal,
    product,
    refute,
    search_track,
    union_over,
    valid,
    verify_track,
)
from calculus.verdict import Status

N = [pca.numeral(k) for k in range(4)]
A = Carrier.of("a0", "a1", "a2")


def _random_predicate(rng: random.Random, carrier: Carrier) -> Predicate:
    return Predicate.build(carrier, lambda x: RealizerSet.of(*rng.sample(N[:3], rng.randrange(3))))


def _image(phi: Predicate, f: pca.Term) -> Predicate:
    return Predicate.build(phi.carrier, lambda x: RealizerSet.of(*(pca.App(f, a) for a in phi(x).sorted())))


def test_carrier_rejects_duplicates() -> None:
    with pytest.raises(ValueError):
        Carrier.of("a", "a")


def test_product_is_lexicographic() -> None:
    c = product(Carrier.of(0, 1), Carrier.of("x", "y"))
    assert c.elements == ((0, "x"), (0, "y"), (1, "x"), (1, "y"))


def test_realizer_set_algebra() -> None:
    s, t = RealizerSet.of(N[0], N[1]), RealizerSet.of(N[1])
    assert s.intersect(t) == t
    assert s.union(t) == s
    assert s.union(ALL).is_all
    assert ALL.intersect(t) == t
    assert EMPTY.is_empty and not ALL.is_empty


def test_meet_pairs_realizers() -> None:
    phi = Predicate.constant(A, RealizerSet.of(N[0]))
    psi = Predicate.constant(A, RealizerSet.of(N[1]))
    m = meet(phi, psi)
    assert m("a0") == RealizerSet.of(pca.app(pca.PAIR, N[0], N[1]))


def test_union_and_intersection_over_empty_index() -> None:
    empty = Carrier(())
    assert union_over(empty, lambda j: None, A).values == (EMPTY,) * 3
    assert intersect_over(empty, lambda j: None, A).values == (ALL,) * 3


def test_reflexivity_via_identity() -> None:
    rng = random.Random(3)
    for _ in range(200):
        phi = _random_predicate(rng, A)
        assert verify_track(phi, phi, pca.I).ok


def test_transitivity_via_compose() -> None:
    rng = random.Random(5)
    for _ in range(200):
        phi = _random_predicate(rng, A)
        psi = _image(phi, pca.SUCC)
        chi = _image(psi, pca.DUP)
        m, n = pca.SUCC, pca.DUP
        assert verify_track(phi, psi, m).ok
        assert verify_track(psi, chi, n).ok
        assert verify_track(phi, chi, compose_tracks(n, m)).ok


def test_pairing_track_into_meet() -> None:
    phi = Predicate.build(A, {"a0": RealizerSet.of(N[0]), "a1": RealizerSet.of(N[1])})
    target = meet(phi, phi)
    assert verify_track(phi, target, pairing_track(pca.I, pca.I)).ok


def test_search_finds_identity_first() -> None:
    phi = Predicate.build(A, {"a0": RealizerSet.of(N[0])})
    got = search_track(phi, phi)
    assert isinstance(got, Track)
    assert got.witness == pca.I


def test_search_uses_hints() -> None:
    phi = Predicate.build(A, {"a1": RealizerSet.of(N[1])})
    psi = _image(phi, pca.SUCC)
    got = search_track(phi, psi, depth=0, hints=[pca.SUCC])
    assert isinstance(got, Track)
    assert verify_track(phi, psi, got.witness).ok


def test_constant_track() -> None:
    phi = Predicate.constant(A, RealizerSet.of(N[0], N[1]))
    psi = Predicate.constant(A, RealizerSet.of(N[2]))
    got = search_track(phi, psi)
    assert isinstance(got, Track)
    assert verify_track(phi, psi, got.witness).ok


def test_refutation_by_conflicting_rows() -> None:
    phi = Predicate.build(A, {"a0": RealizerSet.of(N[0]), "a1": RealizerSet.of(N[0])})
    psi = Predicate.build(A, {"a0": RealizerSet.of(N[1]), "a1": RealizerSet.of(N[2])})
    assert refute(phi, psi) == ("a1", N[0])
    got = search_track(phi, psi)
    assert isinstance(got, NotFound)
    assert got.refuted
    assert got.verdict().status is Status.FAILS


def test_nonempty_into_empty_is_refuted() -> None:
    phi = Predicate.build(A, {"a2": RealizerSet.of(N[0])})
    got = search_track(phi, Predicate.constant(A, EMPTY))
    assert isinstance(got, NotFound) and got.refuted


def test_verify_reports_first_violation() -> None:
    phi = Predicate.build(A, {"a1": RealizerSet.of(N[0]), "a2": RealizerSet.of(N[1])})
    psi = Predicate.build(A, {"a1": RealizerSet.of(N[0])})
    v = verify_track(phi, psi, pca.I)
    assert v.status is Status.FAILS
    assert v.witness == ("a2", N[1])


def test_all_rows_with_constant_and_identity() -> None:
    top = Predicate.constant(A, ALL)
    fin = Predicate.constant(A, RealizerSet.of(N[1]))
    assert verify_track(top, top, pca.I).ok
    assert verify_track(top, fin, pca.const(N[1])).ok
    v = verify_track(top, fin, pca.I)
    assert v.status is Status.FAILS


def test_all_rows_with_other_tracks_are_undetermined() -> None:
    top = Predicate.constant(A, ALL)
    fin = Predicate.constant(A, RealizerSet.of(N[1]))
    v = verify_track(top, fin, pca.SUCC)
    assert v.status is Status.UNDETERMINED


def test_all_rows_with_disjoint_demands_are_refuted() -> None:
    top = Predicate.constant(A, ALL)
    psi = Predicate.build(A, {"a0": RealizerSet.of(N[0]), "a1": RealizerSet.of(N[1]), "a2": ALL})
    assert refute(top, psi) == ("a0", pca.K)


def test_budget_exhaustion_is_undetermined() -> None:
    sii = pca.app(pca.S, pca.I, pca.I)
    phi = Predicate.constant(A, RealizerSet.of(sii))
    v = verify_track(phi, phi, sii, budget=100)
    assert v.status is Status.UNDETERMINED


def test_poset_equal_both_directions() -> None:
    phi = Predicate.build(A, {"a0": RealizerSet.of(N[0])})
    psi = _image(phi, pca.SUCC)
    got = poset_equal(phi, psi, hints_lr=[pca.SUCC])
    assert not isinstance(got, NotFound)
    assert got.track_lr.recheck(phi, psi).ok
    assert got.track_rl.recheck(psi, phi).ok


def test_obligation_sentence_is_valid_with_track() -> None:
    phi = Predicate.build(A, {"a0": RealizerSet.of(N[0])})
    ob = Obligation("refl", "phi -> phi", phi, phi)
    assert ob.verify(pca.I).ok
    got = valid(ob.sentence())
    assert not isinstance(got, NotFound)


def test_valid_atoms() -> None:
    assert isinstance(valid(Atom(EMPTY)), NotFound)
    got = valid(Atom(RealizerSet.of(N[2])))
    assert not isinstance(got, NotFound)
    assert got.realizer == N[2]
    assert valid(Atom(ALL)).track.witness == pca.K


def test_valid_union_picks_first_certified_instance() -> None:
    s = UnionOver(A, lambda x: Atom(RealizerSet.of(N[1]) if x == "a1" else EMPTY))
    got = valid(s)
    assert not isinstance(got, NotFound)
    assert got.realizer == N[1]


def test_valid_uniform_implication() -> None:
    s = InterOver(A, lambda x: Implies(Atom(RealizerSet.of(N[0])), Atom(RealizerSet.of(N[0], N[1]))))
    got = valid(s)
    assert not isinstance(got, NotFound)
