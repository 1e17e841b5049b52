from __future__ import annotations
"""
run_workbench.py

Главный исполняемый сценарий: проверяет утверждения ε-исчисления из
spec-файла (*.eps) или из встроенного демо-сценария.

Что делает скрипт по шагам:
1) Читает YAML конфиг (budget / depth / bound / jobs / log_level).
2) Накладывает поверх него ключи spec-файла, переменные EPSWB_* и флаги.
3) Разбирает spec-файл целиком (ошибка → file:line:column, код выхода 3).
4) Выполняет утверждения по порядку (procedures/checks.py).
5) Печатает отчёт; при --emit пишет JSON lines, при --csv — CSV.
6) При Ctrl+C всё равно сохраняет то, что успело выполниться.

Коды выхода:
0 — нет fails и undetermined; 1 — есть fails; 2 — только undetermined;
3 — ошибка spec-файла.
"""
import argparse
import logging
import os
import pathlib
import sys

import yaml

from procedures.checks import RunCfg, run_all
from procedures.common import exit_status, format_report, to_dataframe
from procedures.specfile import SETTING_KEYS, SpecFile, SpecFileError, load
from procedures.tables_demos import SUITES, command_suite

log = logging.getLogger("run_workbench")

ENV_PREFIX = "EPSWB_"


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    ap = argparse.ArgumentParser(description="ε-calculus verification workbench")
    ap.add_argument("spec", nargs="?", help="spec file (*.eps)")
    ap.add_argument("--config", default="config/workbench.yaml")
    ap.add_argument("--suite", choices=sorted(SUITES), help="run a built-in demo scenario")
    ap.add_argument("--budget", type=int, help="PCA reduction steps per application")
    ap.add_argument("--depth", type=int, help="track search depth")
    ap.add_argument("--bound", type=int, help="finite topos exhaustion bound")
    ap.add_argument("--jobs", type=int, help="assertions checked in parallel")
    ap.add_argument("--emit", help="write line-delimited JSON report here")
    ap.add_argument("--csv", help="also write the report as CSV")
    ap.add_argument("--log-level", help="DEBUG / INFO / WARNING / ...")
    args = ap.parse_args(argv)
    if (args.spec is None) == (args.suite is None):
        ap.error("give exactly one of: spec file, --suite NAME")
    return args


def read_config(path: str) -> dict:
    p = pathlib.Path(path)
    if not p.exists():
        return {}
    return yaml.safe_load(p.read_text(encoding="utf-8")) or {}


def resolve(args: argparse.Namespace, config: dict, spec: SpecFile | None,
            env: dict[str, str] | None = None) -> tuple[RunCfg, str]:
    """Итоговые настройки: флаги > EPSWB_* > spec-файл > конфиг."""
    env = os.environ if env is None else env
    merged: dict = {k: config[k] for k in (*SETTING_KEYS, "log_level") if k in config}
    if spec is not None:
        merged.update(spec.settings)
    for key in (*SETTING_KEYS, "log_level"):
        raw = env.get(ENV_PREFIX + key.upper())
        if raw:
            merged[key] = raw
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    defaults = RunCfg()
    cfg = RunCfg(
        budget=int(merged.get("budget", defaults.budget)),
        depth=int(merged.get("depth", defaults.depth)),
        bound=int(merged.get("bound", defaults.bound)),
        jobs=max(1, int(merged.get("jobs", defaults.jobs))),
    )
    return cfg, str(merged.get("log_level", "WARNING")).upper()


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    config = read_config(args.config)

    try:
        spec = load(args.spec) if args.spec else command_suite(args.suite)
    except SpecFileError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 3

    cfg, level = resolve(args, config, spec)
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    log.info("settings: %s", cfg)

    # filled progressively so an interrupt still leaves the finished rows
    results = []
    try:
        run_all(spec, cfg, results)
    except KeyboardInterrupt:
        print("\n❗ Остановлено пользователем (Ctrl+C).")
    finally:
        print(format_report(results))
        df = to_dataframe(results)
        if args.emit:
            df.to_json(args.emit, orient="records", lines=True, force_ascii=False)
            print("Report:", args.emit)
        if args.csv:
            df.to_csv(args.csv, index=False)
            print("CSV:", args.csv)

    return exit_status(results)


if __name__ == "__main__":
    sys.exit(main())
