from __future__ import annotations

"""procedures.common

Общие структуры отчёта для всех проверок верстака.

Этот файл делает три вещи:
1) Описывает строку отчёта `CheckResult` (одна проверка = одна строка).
2) Переводит Verdict/свидетелей/сертификаты в стабильный текст.
3) Собирает строки в pandas.DataFrame (JSON lines / CSV) и считает код выхода.

Почему строка отчёта важна:
- Каждое утверждение из spec-файла (или демо-сценария) — ровно одна строка.
- Порядок строк — порядок файла, даже если проверки шли параллельно.
- undetermined — отдельный класс: это не fails (см. exit_status()).
"""

from dataclasses import dataclass
from typing import Any, Iterable, List
import time

import pandas as pd

from calculus import pca
from calculus.verdict import Status, Verdict


@dataclass
class CheckResult:
    """Результат одной проверки (одна строка отчёта).

    id:
        Идентификатор утверждения (из файла или kind-N).
    kind:
        Вид проверки: epsilon_topos, leq, epsilon, derivable, ...
    verdict:
        "holds" / "fails" / "undetermined".
    witness:
        Для fails — первый контрпример; для holds — то, что построено
        (ε-терм, факторизующая стрелка) или None.
    certificate:
        Сертификаты в виде текста: "obligation: track @budget; ...".
    millis:
        Время проверки.
    reason:
        Для undetermined — почему ответа нет.
    """

    id: str
    kind: str
    verdict: str
    witness: str | None
    certificate: str | None
    millis: float
    reason: str = ""


def render(value: Any) -> str | None:
    """Стабильная текстовая форма свидетеля."""
    if value is None:
        return None
    if isinstance(value, (pca.Atom, pca.App)):
        return pca.format_term(value)
    if isinstance(value, tuple):
        return "(" + ", ".join(render(v) or "None" for v in value) + ")"
    return str(value)


def render_certificate(rows: Iterable[dict]) -> str | None:
    parts = [f"{r['obligation']}: {r['track']} @{r['budget']}" for r in rows]
    return "; ".join(parts) if parts else None


def make_result(ident: str, kind: str, verdict: Verdict, millis: float,
                certificate: str | None = None) -> CheckResult:
    return CheckResult(
        id=ident,
        kind=kind,
        verdict=verdict.status.value,
        witness=render(verdict.witness),
        certificate=certificate,
        millis=round(millis, 3),
        reason=verdict.reason,
    )


class Stopwatch:
    def __enter__(self) -> "Stopwatch":
        self._t0 = time.perf_counter()
        self.millis = 0.0
        return self

    def __exit__(self, *exc) -> None:
        self.millis = (time.perf_counter() - self._t0) * 1000.0


def exit_status(results: List[CheckResult]) -> int:
    """0 — нет fails и undetermined; 1 — есть fails; 2 — только undetermined."""
    verdicts = {r.verdict for r in results}
    if Status.FAILS.value in verdicts:
        return 1
    if Status.UNDETERMINED.value in verdicts:
        return 2
    return 0


def format_report(results: List[CheckResult]) -> str:
    """Текст для оператора: одна строка на проверку плюс итог."""
    lines = []
    for r in results:
        lines.append(f"[{r.verdict:^12}] {r.id} ({r.kind}) {r.millis:.1f} ms")
        if r.witness is not None:
            lines.append(f"    witness: {r.witness}")
        if r.reason:
            lines.append(f"    reason: {r.reason}")
    counts = {s.value: sum(1 for r in results if r.verdict == s.value) for s in Status}
    lines.append(", ".join(f"{k}: {v}" for k, v in counts.items()))
    return "\n".join(lines)


def to_dataframe(results: List[CheckResult]) -> pd.DataFrame:
    """Преобразовать строки отчёта в pandas.DataFrame.

    Столбцы фиксированы полями CheckResult, поэтому пустой отчёт тоже
    даёт таблицу с правильными заголовками.
    """
    columns = list(CheckResult.__dataclass_fields__)
    return pd.DataFrame([r.__dict__ for r in results], columns=columns)
