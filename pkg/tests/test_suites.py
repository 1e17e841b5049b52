from __future__ import annotations

import pytest

from calculus import finite_topos as ft
from calculus.verdict import Status
from procedures.suites import carrier_of, eff_instances, epsilon_rule_check, lemma_instances, partitions


def test_partitions_are_bell_numbers() -> None:
    assert [len(partitions(n)) for n in range(4)] == [0, 1, 2, 5]
    assert partitions(2) == [(0, 0), (0, 1)]


def test_carrier_names() -> None:
    assert carrier_of(3, "b").elements == ("b0", "b1", "b2")


def test_eff_instances_are_deterministic() -> None:
    first = [i.name for i in eff_instances(limit=10, seed=3)]
    again = [i.name for i in eff_instances(limit=10, seed=3)]
    assert first == again
    assert len(first) == 10


def test_eff_instances_reach_wide_diagonals() -> None:
    wide = [i for i in eff_instances(limit=60) if any(len(v.sorted()) > 1 for v in i.rho.values if not v.is_all)]
    assert wide
    assert any(i.p(x) != i.rho((x, x)) and not i.p(x).is_empty for i in wide for x in i.carrier)


def test_lemma_suite_is_exhaustive_up_to_renaming() -> None:
    # A dead or live, P kept or not on the single live class of B
    assert len(lemma_instances(1)) == 4
    two = lemma_instances(2)
    names = [i.name for i in two]
    assert len(set(names)) == len(names)
    assert all(i.fmap[x] in i.target for i in two for x in i.source)


def test_epsilon_rules_hold_in_sets() -> None:
    v = epsilon_rule_check(ft.ToposCtx(1), 2)
    assert v.status is Status.HOLDS


def test_epsilon_rules_in_sets2_meet_a_non_epic_bang() -> None:
    # (1, 0) is not initial, but (1, 0) -> 1 has no section
    with pytest.raises(ft.PreconditionError) as err:
        epsilon_rule_check(ft.ToposCtx(2), 1)
    assert err.value.offender.shape == (1, 0)
