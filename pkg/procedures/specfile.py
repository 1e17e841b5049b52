from __future__ import annotations

"""procedures.specfile

Загрузка spec-файлов (*.eps) — YAML-документов с объектами и утверждениями.

Зачем:
- Файл разбирается полностью до запуска первой проверки: неизвестные ключи,
  плохие ссылки и синтаксис термов/формул — это SpecFileError с file:line:column.
- Позиции берутся из PyYAML: SafeLoader-наследник запоминает метку каждого
  словаря и каждого ключа.

Верхние ключи: budget, depth, bound, jobs, predicates, pers, props, toposes,
objects, subobjects, languages, assertions.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping
import logging

import yaml

from calculus import finite_topos as ft
from calculus import language as lang
from calculus import pca
from calculus.realizability import ALL, Carrier, Predicate, RealizerSet, product

log = logging.getLogger(__name__)


class SpecFileError(ValueError):
    def __init__(self, message: str, source: str = "<spec>", line: int | None = None,
                 column: int | None = None):
        where = source if line is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Mark:
    line: int
    column: int


class MarkedDict(dict):
    """dict с меткой начала и метками ключей (1-based)."""

    mark: Mark | None = None
    key_marks: dict = {}


class _MarkedLoader(yaml.SafeLoader):
    pass


def _construct_marked(loader: _MarkedLoader, node: yaml.MappingNode) -> MarkedDict:
    data = MarkedDict(loader.construct_mapping(node, deep=True))
    data.mark = Mark(node.start_mark.line + 1, node.start_mark.column + 1)
    data.key_marks = {k.value: Mark(k.start_mark.line + 1, k.start_mark.column + 1)
                      for k, _ in node.value if isinstance(k, yaml.ScalarNode)}
    return data


_MarkedLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_marked)


TOP_KEYS = {"budget", "depth", "bound", "jobs", "predicates", "pers", "props", "toposes",
            "objects", "subobjects", "languages", "assertions"}
SETTING_KEYS = ("budget", "depth", "bound", "jobs")

# kind -> (required keys, optional keys)
ASSERTION_KEYS: dict[str, tuple[set[str], set[str]]] = {
    "reduce": ({"term"}, {"expect"}),
    "leq": ({"left", "right"}, set()),
    "poset_equal": ({"left", "right"}, set()),
    "per": ({"per"}, set()),
    "prop": ({"prop"}, set()),
    "epi_bang": ({"per"}, set()),
    "epsilon": ({"prop"}, {"expect_point"}),
    "hilbertian_square": ({"prop"}, set()),
    "lemma": ({"prop", "source", "map"}, set()),
    "corollary": ({"prop", "point"}, set()),
    "ac": ({"topos"}, {"bound"}),
    "partial_epsilon": ({"topos"}, {"bound"}),
    "epsilon_topos": ({"topos"}, {"bound"}),
    "full_epsilon": ({"topos"}, {"bound"}),
    "hilbertian_instance": ({"subobject"}, set()),
    "epsilon_full": ({"gamma", "a", "phi"}, set()),
    "derivable": ({"language", "sequent"}, set()),
    "eps_rule": ({"language", "formula", "context"}, {"mode", "expect_rejected"}),
    "ac_witness": ({"language", "formula", "context"}, set()),
    "epsilon_rules": ({"topos"}, {"bound"}),
}


@dataclass(frozen=True)
class PerDef:
    carrier: Carrier
    rho: Predicate


@dataclass(frozen=True)
class PropDef:
    per: str
    values: Predicate


@dataclass(frozen=True)
class LanguageDef:
    topos: ft.ToposCtx
    types: dict[str, ft.FinObj]
    relations: dict[str, tuple[tuple[lang.Type, ...], ft.Subobject]]

    def session(self) -> lang.Session:
        """Свежий сеанс: ε-символы одного утверждения не видны другому."""
        sig = lang.Signature(self.topos)
        for name, obj in self.types.items():
            sig.declare_type(name, obj)
        for name, (args, sub) in self.relations.items():
            sig.declare_relation(name, args, sub)
        return lang.Session(sig)


@dataclass(frozen=True)
class AssertionDef:
    id: str
    kind: str
    params: dict[str, Any]
    line: int | None = None


@dataclass
class SpecFile:
    source: str
    settings: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, Predicate] = field(default_factory=dict)
    pers: dict[str, PerDef] = field(default_factory=dict)
    props: dict[str, PropDef] = field(default_factory=dict)
    toposes: dict[str, ft.ToposCtx] = field(default_factory=dict)
    objects: dict[str, ft.FinObj] = field(default_factory=dict)
    subobjects: dict[str, ft.Subobject] = field(default_factory=dict)
    languages: dict[str, LanguageDef] = field(default_factory=dict)
    assertions: list[AssertionDef] = field(default_factory=list)


class _Builder:
    def __init__(self, source: str):
        self.source = source
        self.spec = SpecFile(source)

    # --- error helpers ---

    def error(self, message: str, where: Any = None, key: Any = None) -> SpecFileError:
        mark = None
        if isinstance(where, MarkedDict):
            mark = where.key_marks.get(key) if key is not None else None
            mark = mark or where.mark
        if mark is None:
            return SpecFileError(message, self.source)
        return SpecFileError(message, self.source, mark.line, mark.column)

    def mapping(self, value: Any, what: str, parent: Any = None, key: Any = None) -> dict:
        if value is None:
            return MarkedDict()
        if not isinstance(value, dict):
            raise self.error(f"{what} must be a mapping", parent, key)
        return value

    def keys(self, data: dict, required: set[str], optional: set[str], what: str) -> None:
        for k in data:
            if k not in required | optional:
                raise self.error(f"unknown key {k!r} in {what}", data, k)
        for k in sorted(required):
            if k not in data:
                raise self.error(f"{what} is missing {k!r}", data)

    def ref(self, table: Mapping[str, Any], name: Any, what: str, data: dict, key: str) -> Any:
        try:
            return table[name]
        except (KeyError, TypeError):
            raise self.error(f"unknown {what} {name!r}", data, key) from None

    # --- values ---

    def realizers(self, value: Any, data: dict, key: Any) -> RealizerSet:
        if value == "all":
            return ALL
        if value is None:
            return RealizerSet.empty()
        if not isinstance(value, list):
            raise self.error("realizer set must be a list of terms or 'all'", data, key)
        try:
            return RealizerSet.of(*(pca.parse_term(str(t)) for t in value))
        except ValueError as e:
            raise self.error(str(e), data, key) from None

    def carrier(self, value: Any, data: dict, key: str) -> Carrier:
        if not isinstance(value, list) or not value:
            raise self.error("carrier must be a nonempty list", data, key)
        try:
            return Carrier(tuple(_hashable(v) for v in value))
        except ValueError as e:
            raise self.error(str(e), data, key) from None

    def predicate(self, carrier: Carrier, values: Any, data: dict, key: str) -> Predicate:
        table = self.mapping(values, "values", data, key)
        out = {}
        for x, v in table.items():
            if _hashable(x) not in carrier:
                raise self.error(f"{x!r} is not in the carrier", table, x)
            out[_hashable(x)] = self.realizers(v, table, x)
        return Predicate.build(carrier, out)

    def finobj(self, comps: Any, data: dict, key: str) -> ft.FinObj:
        if not isinstance(comps, list) or not all(isinstance(c, list) for c in comps):
            raise self.error("components must be a list of lists", data, key)
        try:
            return ft.FinObj(tuple(tuple(_hashable(e) for e in c) for c in comps))
        except ValueError as e:
            raise self.error(str(e), data, key) from None

    def parts(self, obj: ft.FinObj, value: Any, data: dict, key: str) -> ft.Subobject:
        if not isinstance(value, list) or len(value) != obj.arity:
            raise self.error(f"parts must list {obj.arity} component subset(s)", data, key)
        try:
            return ft.Subobject(obj, tuple(frozenset(_hashable(e) for e in p or []) for p in value))
        except ValueError as e:
            raise self.error(str(e), data, key) from None

    # --- sections ---

    def build(self, doc: Any) -> SpecFile:
        doc = self.mapping(doc, "spec file")
        for k in doc:
            if k not in TOP_KEYS:
                raise self.error(f"unknown key {k!r}", doc, k)
        for k in SETTING_KEYS:
            if k in doc:
                v = doc[k]
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise self.error(f"{k} must be a non-negative integer", doc, k)
                self.spec.settings[k] = v
        self.predicates(self.mapping(doc.get("predicates"), "predicates", doc, "predicates"))
        self.pers(self.mapping(doc.get("pers"), "pers", doc, "pers"))
        self.props(self.mapping(doc.get("props"), "props", doc, "props"))
        self.toposes(self.mapping(doc.get("toposes"), "toposes", doc, "toposes"))
        self.objects(self.mapping(doc.get("objects"), "objects", doc, "objects"))
        self.subobjects(self.mapping(doc.get("subobjects"), "subobjects", doc, "subobjects"))
        self.languages(self.mapping(doc.get("languages"), "languages", doc, "languages"))
        items = doc.get("assertions") or []
        if not isinstance(items, list):
            raise self.error("assertions must be a list", doc, "assertions")
        for n, item in enumerate(items, 1):
            self.assertion(n, item, doc)
        return self.spec

    def predicates(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"predicate {name}", section, name)
            self.keys(data, {"carrier", "values"}, set(), f"predicate {name}")
            carrier = self.carrier(data["carrier"], data, "carrier")
            self.spec.predicates[name] = self.predicate(carrier, data["values"], data, "values")

    def pers(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"per {name}", section, name)
            self.keys(data, {"carrier"}, {"relation"}, f"per {name}")
            carrier = self.carrier(data["carrier"], data, "carrier")
            rows = data.get("relation") or []
            if not isinstance(rows, list):
                raise self.error("relation must be a list of [x, y, realizers]", data, "relation")
            table = {}
            for row in rows:
                if not isinstance(row, list) or len(row) != 3:
                    raise self.error("relation rows are [x, y, realizers]", data, "relation")
                x, y = _hashable(row[0]), _hashable(row[1])
                if x not in carrier or y not in carrier:
                    raise self.error(f"({x}, {y}) leaves the carrier", data, "relation")
                table[(x, y)] = self.realizers(row[2], data, "relation")
            self.spec.pers[name] = PerDef(carrier, Predicate.build(product(carrier, carrier), table))

    def props(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"prop {name}", section, name)
            self.keys(data, {"per"}, {"values"}, f"prop {name}")
            per = self.ref(self.spec.pers, data["per"], "per", data, "per")
            values = self.predicate(per.carrier, data.get("values"), data, "values")
            self.spec.props[name] = PropDef(data["per"], values)

    def toposes(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"topos {name}", section, name)
            self.keys(data, {"arity"}, set(), f"topos {name}")
            try:
                self.spec.toposes[name] = ft.ToposCtx(int(data["arity"]))
            except (TypeError, ValueError) as e:
                raise self.error(str(e), data, "arity") from None

    def objects(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"object {name}", section, name)
            self.keys(data, {"topos", "components"}, set(), f"object {name}")
            ctx = self.ref(self.spec.toposes, data["topos"], "topos", data, "topos")
            obj = self.finobj(data["components"], data, "components")
            if obj.arity != ctx.arity:
                raise self.error(f"object has {obj.arity} components, topos arity is {ctx.arity}",
                                 data, "components")
            self.spec.objects[name] = obj

    def subobjects(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"subobject {name}", section, name)
            self.keys(data, {"object", "parts"}, set(), f"subobject {name}")
            obj = self.ref(self.spec.objects, data["object"], "object", data, "object")
            self.spec.subobjects[name] = self.parts(obj, data["parts"], data, "parts")

    def languages(self, section: dict) -> None:
        for name, data in section.items():
            data = self.mapping(data, f"language {name}", section, name)
            self.keys(data, {"topos", "types"}, {"relations"}, f"language {name}")
            ctx = self.ref(self.spec.toposes, data["topos"], "topos", data, "topos")
            types_in = self.mapping(data["types"], "types", data, "types")
            types = {t: self.ref(self.spec.objects, o, "object", types_in, t) for t, o in types_in.items()}
            sig = lang.Signature(ctx)
            try:
                for t, obj in types.items():
                    sig.declare_type(t, obj)
            except ValueError as e:
                raise self.error(str(e), data, "types") from None
            relations = {}
            rels_in = self.mapping(data.get("relations"), "relations", data, "relations")
            for rname, rdata in rels_in.items():
                rdata = self.mapping(rdata, f"relation {rname}", rels_in, rname)
                self.keys(rdata, {"args", "parts"}, set(), f"relation {rname}")
                try:
                    args = tuple(lang.parse_type(str(a)) for a in rdata["args"])
                    obj = sig.product_of(args)
                except ValueError as e:
                    raise self.error(str(e), rdata, "args") from None
                relations[rname] = (args, self.parts(obj, rdata["parts"], rdata, "parts"))
            self.spec.languages[name] = LanguageDef(ctx, types, relations)

    def assertion(self, n: int, item: Any, doc: dict) -> None:
        data = self.mapping(item, "assertion", doc, "assertions")
        kind = data.get("kind")
        if kind not in ASSERTION_KEYS:
            raise self.error(f"unknown assertion kind {kind!r}", data, "kind")
        required, optional = ASSERTION_KEYS[kind]
        self.keys(data, required | {"kind"}, optional | {"id"}, f"assertion {kind}")
        params = {k: v for k, v in data.items() if k not in ("id", "kind")}
        self.check_refs(kind, params, data)
        ident = str(data.get("id") or f"{kind}-{n}")
        line = data.mark.line if isinstance(data, MarkedDict) and data.mark else None
        self.spec.assertions.append(AssertionDef(ident, kind, params, line))

    def check_refs(self, kind: str, params: dict, data: dict) -> None:
        tables = {
            "per": (self.spec.pers, "per"), "source": (self.spec.pers, "per"),
            "prop": (self.spec.props, "prop"), "topos": (self.spec.toposes, "topos"),
            "subobject": (self.spec.subobjects, "subobject"), "language": (self.spec.languages, "language"),
            "gamma": (self.spec.objects, "object"), "a": (self.spec.objects, "object"),
        }
        if kind in ("leq", "poset_equal"):
            tables["left"] = tables["right"] = (self.spec.predicates, "predicate")
        for key, (table, what) in tables.items():
            if key in params:
                self.ref(table, params[key], what, data, key)
        if "bound" in params and (not isinstance(params["bound"], int) or params["bound"] < 0):
            raise self.error("bound must be a non-negative integer", data, "bound")
        if kind in ("lemma", "corollary"):
            target = self.spec.pers[self.spec.props[params["prop"]].per].carrier
            if kind == "corollary" and _hashable(params["point"]) not in target:
                raise self.error(f"{params['point']!r} is not in the carrier", data, "point")
            if kind == "lemma":
                source = self.spec.pers[params["source"]].carrier
                fmap = self.mapping(params["map"], "map", data, "map")
                for x in source:
                    if x not in fmap or _hashable(fmap[x]) not in target:
                        raise self.error(f"map must send {x!r} into the carrier of the prop", data, "map")
        if kind == "epsilon_full":
            prod, _, _ = ft.product(self.spec.objects[params["gamma"]], self.spec.objects[params["a"]])
            params["phi"] = self.parts(prod, params["phi"], data, "phi")
        try:
            if kind == "reduce":
                pca.parse_term(str(params["term"]))
                if "expect" in params:
                    pca.parse_term(str(params["expect"]))
            elif kind == "derivable":
                lang.parse_sequent(str(params["sequent"]))
            elif kind in ("eps_rule", "ac_witness"):
                lang.parse_formula(str(params["formula"]))
                lang.parse_context(str(params["context"]))
                if params.get("mode", "full") not in ("full", "partial"):
                    raise ValueError(f"unknown epsilon mode {params['mode']!r}")
        except ValueError as e:
            key = {"reduce": "term", "derivable": "sequent"}.get(kind, "formula")
            raise self.error(str(e), data, key) from None


def _hashable(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(_hashable(x) for x in v)
    return v


def load_text(text: str, source: str = "<spec>") -> SpecFile:
    try:
        doc = yaml.load(text, Loader=_MarkedLoader)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        raise SpecFileError(str(e.problem), source,
                            mark.line + 1 if mark else None, mark.column + 1 if mark else None) from None
    return _Builder(source).build(doc)


def load(path: str | Path) -> SpecFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFileError(f"cannot read spec file: {e.strerror}", str(p)) from None
    spec = load_text(text, str(p))
    log.info("loaded %s: %d assertion(s)", p, len(spec.assertions))
    return spec


def from_data(doc: Mapping[str, Any], source: str) -> SpecFile:
    """Встроенные сценарии (tables_demos) проходят тот же разбор, что и файлы."""
    return _Builder(source).build(dict(doc))
