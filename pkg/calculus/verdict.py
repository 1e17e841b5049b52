from __future__ import annotations

"""calculus.verdict

Общий словарь вердиктов для всех ядер (pca / realizability / eff / finite_topos).

Зачем:
- Проверки здесь полу-разрешимы: "да", "нет" и "не знаю" (бюджет исчерпан,
  поиск трека ничего не дал) — три разных ответа.
- Отчёт (procedures.common) переводит Verdict в строку отчёта как есть,
  не смешивая "undetermined" с "fails".
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Verdict:
    """Результат одной проверки.

    Attributes
    ----------
    status:
        holds / fails / undetermined.
    witness:
        Для fails — первый контрпример в каноническом порядке.
    reason:
        Для undetermined — почему ответа нет (бюджет, All слева, ...).
    """

    status: Status
    witness: Any = None
    reason: str = ""

    @classmethod
    def holds(cls, witness: Any = None) -> "Verdict":
        return cls(Status.HOLDS, witness)

    @classmethod
    def fails(cls, witness: Any, reason: str = "") -> "Verdict":
        return cls(Status.FAILS, witness, reason)

    @classmethod
    def undetermined(cls, reason: str, witness: Any = None) -> "Verdict":
        return cls(Status.UNDETERMINED, witness, reason)

    @property
    def ok(self) -> bool:
        return self.status is Status.HOLDS
