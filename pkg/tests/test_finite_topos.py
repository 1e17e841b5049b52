from __future__ import annotations

import time

import pytest

from calculus import finite_topos as ft
from calculus.finite_topos import FinObj, Subobject, ToposCtx
from calculus.verdict import Status

SETS = ToposCtx(1)
SETS2 = ToposCtx(2)


def _obj(*comps) -> FinObj:
    return FinObj(tuple(tuple(c) for c in comps))


def test_arity_must_be_positive() -> None:
    with pytest.raises(ValueError):
        ToposCtx(0)


def test_arrow_must_be_total_and_land_in_codomain() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0"])
    with pytest.raises(ValueError):
        ft.FinArrow(a, b, (("b0",),))
    with pytest.raises(ValueError):
        ft.FinArrow(a, b, (("b0", "zz"),))


def test_compose_and_identity() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0", "b1"])
    f = ft.arrow_from_graph(a, b, [[("a0", "b1"), ("a1", "b1")]])
    assert ft.compose(f, ft.identity(a)) == f
    assert ft.compose(ft.identity(b), f) == f
    assert ft.compose(ft.bang(b), f) == ft.bang(a)


def test_classify() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0"])
    c = ft.classify(ft.bang(a))
    assert c.epi and not c.mono
    assert ft.classify(ft.identity(a)).iso
    assert not ft.classify(ft.bang(_obj([]))).epi
    assert ft.classify(ft.bang(b)).iso


def test_product_and_pairing() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0"])
    prod, pa, pb = ft.product(a, b)
    assert prod.shape == (2,)
    assert ft.pairing(pa, pb) == ft.identity(prod)


def test_product_all_edge_cases() -> None:
    one, proj = ft.product_all([], 2)
    assert one == ft.terminal(2) and proj == []
    a = _obj(["a0"], ["b0", "b1"])
    same, (p,) = ft.product_all([a])
    assert same == a and p == ft.identity(a)
    triple, projs = ft.product_all([a, a, a])
    assert triple.shape == (1, 8)
    assert len(projs) == 3
    with pytest.raises(ValueError):
        ft.product_all([])


def test_coproduct_and_copair() -> None:
    a, b = _obj(["a0"]), _obj(["b0", "b1"])
    c, i1, i2 = ft.coproduct(a, b)
    assert c.shape == (3,)
    assert ft.copair(ft.bang(a), ft.bang(b)) == ft.bang(c)
    assert ft.compose(ft.copair(ft.bang(a), ft.bang(b)), i1) == ft.bang(a)
    assert ft.compose(ft.copair(i1, i2), i2) == i2


def test_epi_mono_factorization() -> None:
    a, b = _obj(["a0", "a1", "a2"]), _obj(["b0", "b1", "b2"])
    f = ft.arrow_from_graph(a, b, [[("a0", "b2"), ("a1", "b0"), ("a2", "b2")]])
    e, m = ft.epi_mono_factorize(f)
    assert ft.classify(e).epi
    assert ft.classify(m).mono
    assert ft.compose(m, e) == f
    # image keeps codomain order
    assert m.dom.components == (("b0", "b2"),)


def test_inverse_requires_iso() -> None:
    a = _obj(["a0", "a1"])
    swap = ft.arrow_from_graph(a, a, [[("a0", "a1"), ("a1", "a0")]])
    assert ft.compose(ft.inverse(swap), swap) == ft.identity(a)
    with pytest.raises(ValueError):
        ft.inverse(ft.bang(a))


def test_pullback_square() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0", "b1"])
    f = ft.arrow_from_graph(a, b, [[("a0", "b0"), ("a1", "b1")]])
    g = ft.arrow_from_graph(b, b, [[("b0", "b0"), ("b1", "b0")]])
    p, p1, p2 = ft.pullback(f, g)
    assert p.components == ((("a0", "b0"), ("a0", "b1")),)
    assert ft.is_pullback(p1, p2, f, g)


def test_subobject_lattice() -> None:
    a = _obj(["a0", "a1", "a2"])
    x = Subobject(a, (frozenset({"a0", "a1"}),))
    y = Subobject(a, (frozenset({"a1", "a2"}),))
    assert x.meet(y).parts == (frozenset({"a1"}),)
    assert x.join(y) == Subobject.full(a)
    assert x.implies(y).parts == (frozenset({"a1", "a2"}),)
    assert Subobject.empty(a).le(x)
    assert ft.complement(x).parts == (frozenset({"a2"}),)
    assert Subobject.from_mono(x.arrow) == x


def test_image_and_dual_image() -> None:
    a, b = _obj(["a0", "a1", "a2"]), _obj(["b0", "b1"])
    f = ft.arrow_from_graph(a, b, [[("a0", "b0"), ("a1", "b0"), ("a2", "b1")]])
    m = Subobject(a, (frozenset({"a0", "a2"}),))
    assert ft.image(m, f).parts == (frozenset({"b0", "b1"}),)
    assert ft.dual_image(m, f).parts == (frozenset({"b1"}),)
    assert ft.pullback_subobject(ft.image(m, f), f) == Subobject.full(a)


def test_find_section_is_least_preimage() -> None:
    a, b = _obj(["a0", "a1", "a2"]), _obj(["b0", "b1"])
    f = ft.arrow_from_graph(a, b, [[("a0", "b1"), ("a1", "b0"), ("a2", "b1")]])
    s = ft.find_section(f)
    assert s(0, "b0") == "a1" and s(0, "b1") == "a0"
    assert isinstance(ft.find_section(ft.bang(_obj([]))), ft.NoSection)


def test_enumeration_counts() -> None:
    a, b = _obj(["a0", "a1"]), _obj(["b0", "b1", "b2"])
    assert len(list(ft.arrows_between(a, b))) == 9
    assert len(list(ft.points(b))) == 3
    assert len(list(ft.subobjects(b))) == 8
    assert len(ft.objects_up_to(SETS2, 2)) == 9


def test_hilbertian_instance_sets() -> None:
    a = _obj(["a0", "a1"])
    got = ft.check_hilbertian_instance(Subobject(a, (frozenset({"a1"}),)))
    assert isinstance(got, ft.HilbertianWitness)
    assert got.eps(0, "*") == "a1"


def test_hilbertian_instance_arity_two() -> None:
    a = _obj(["a0"], ["b0", "b1"])
    got = ft.check_hilbertian_instance(Subobject(a, (frozenset({"a0"}), frozenset({"b1"}))))
    assert isinstance(got, ft.HilbertianWitness)
    assert got.eps.images == (("a0",), ("b1",))


def test_hilbertian_instance_needs_epic_bang() -> None:
    a = _obj(["a0"], [])
    with pytest.raises(ft.PreconditionError) as err:
        ft.check_hilbertian_instance(Subobject.empty(a))
    assert err.value.offender == a


def test_sets_is_epsilon_topos() -> None:
    t0 = time.perf_counter()
    v = ft.check_epsilon_topos(SETS, 3)
    assert v.status is Status.HOLDS
    assert time.perf_counter() - t0 < 10


def test_sets2_validates_ac_but_is_not_epsilon_topos() -> None:
    assert ft.check_ac(SETS2, 2).ok
    v = ft.check_epsilon_topos(SETS2, 2)
    assert v.status is Status.FAILS
    witness = v.witness
    assert witness.dom.shape == (1, 0)
    assert witness.cod.shape == (1, 1)
    assert not ft.classify(witness).epi


def test_epsilon_topos_needs_positive_bound() -> None:
    with pytest.raises(ValueError):
        ft.check_epsilon_topos(SETS, 0)


def test_epsilon_full_example() -> None:
    gamma, a = _obj(["g0", "g1"]), _obj(["a0", "a1"])
    prod, _, _ = ft.product(gamma, a)
    phi = Subobject(prod, (frozenset({("g0", "a1")}),))
    res = ft.synthesize_epsilon_full(phi, gamma, a)
    assert res.eps_phi(0, "g0") == "a1"
    # g1 falls in the complement of the image and gets the canonical point
    assert res.eps_phi(0, "g1") == res.point(0, "*")[1]
    assert res.triangle_commutes and res.square_is_pullback


def test_epsilon_full_rejects_empty_a() -> None:
    gamma, a = _obj(["g0"]), _obj([])
    prod, _, _ = ft.product(gamma, a)
    with pytest.raises(ft.PreconditionError):
        ft.synthesize_epsilon_full(Subobject.empty(prod), gamma, a)


def test_section_from_epsilon() -> None:
    a = _obj(["a0", "a1"])
    eps = ft.section_from_epsilon(a)
    assert ft.compose(ft.bang(a), eps) == ft.identity(ft.terminal(1))


def test_full_epsilon_small() -> None:
    assert ft.check_full_epsilon(SETS, 2).ok


@pytest.mark.slow
def test_characterization_exhaustive_arity_one() -> None:
    t0 = time.perf_counter()
    failures = 0
    objs = [o for o in ft.objects_up_to(SETS, 3) if not o.is_initial]
    for gamma in objs:
        for a in objs:
            prod, _, _ = ft.product(gamma, a)
            for phi in ft.subobjects(prod):
                res = ft.synthesize_epsilon_full(phi, gamma, a)
                failures += not res.square_is_pullback
    assert failures == 0
    assert time.perf_counter() - t0 < 60
