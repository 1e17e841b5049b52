from __future__ import annotations

"""procedures.tables_demos

Встроенные демо-сценарии записаны как данные (те же словари, что дал бы
YAML spec-файла).

Зачем:
- `run_workbench.py --suite NAME` не требует файла на диске.
- Сценарии проходят тот же разбор (specfile.from_data), что и *.eps,
  поэтому ошибки в них ловятся тем же кодом.

Сценарии:
- demo-sets: Sets — ε-топос (перебор до 3 элементов).
- demo-sets2: Sets×Sets выполняет AC, но (1,∅) → (1,1) не эпиморфизм.
- demo-eff: PER на {a0,a1}, P сосредоточена в a1, ε = Γ(a1).
- demo-epsilon-rules: ε-I для всех ψ над арностью 1, граница 2.
"""

from typing import Any, Dict

from .specfile import SpecFile, from_data

DEMO_SETS: Dict[str, Any] = {
    "toposes": {"sets": {"arity": 1}},
    "assertions": [
        {"id": "sets-is-epsilon-topos", "kind": "epsilon_topos", "topos": "sets", "bound": 3},
    ],
}

DEMO_SETS2: Dict[str, Any] = {
    "toposes": {"sets2": {"arity": 2}},
    "assertions": [
        {"id": "sets2-validates-ac", "kind": "ac", "topos": "sets2", "bound": 2},
        {"id": "sets2-is-epsilon-topos", "kind": "epsilon_topos", "topos": "sets2", "bound": 2},
    ],
}

DEMO_EFF: Dict[str, Any] = {
    "pers": {
        "two": {
            "carrier": ["a0", "a1"],
            "relation": [["a0", "a0", ["n0"]], ["a1", "a1", ["n1"]]],
        },
        "one": {"carrier": ["a0"], "relation": [["a0", "a0", ["n0"]]]},
    },
    "props": {
        "at_a1": {"per": "two", "values": {"a1": ["n1"]}},
    },
    "assertions": [
        {"id": "bang-is-epi", "kind": "epi_bang", "per": "two"},
        {"id": "epsilon-at-a1", "kind": "epsilon", "prop": "at_a1", "expect_point": "a1"},
        {"id": "hilbertian-square", "kind": "hilbertian_square", "prop": "at_a1"},
        {"id": "lemma-constant-map", "kind": "lemma", "prop": "at_a1", "source": "one", "map": {"a0": "a1"}},
        {"id": "corollary-at-a1", "kind": "corollary", "prop": "at_a1", "point": "a1"},
    ],
}

DEMO_EPSILON_RULES: Dict[str, Any] = {
    "toposes": {"sets": {"arity": 1}},
    "assertions": [
        {"id": "epsilon-i-sequents", "kind": "epsilon_rules", "topos": "sets", "bound": 2},
    ],
}

SUITES: Dict[str, Dict[str, Any]] = {
    "demo-sets": DEMO_SETS,
    "demo-sets2": DEMO_SETS2,
    "demo-eff": DEMO_EFF,
    "demo-epsilon-rules": DEMO_EPSILON_RULES,
}


def command_suite(name: str) -> SpecFile:
    """Разобрать встроенный сценарий по имени."""
    try:
        doc = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; known: {', '.join(SUITES)}") from None
    return from_data(doc, f"<suite {name}>")
