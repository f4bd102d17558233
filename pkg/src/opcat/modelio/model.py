"""Model documents: loading, resolution, eager validation and serialization.

A model file is one JSON object with the top-level keys ``schema_version``,
``resources``, ``boxes``, ``diagrams``, ``capability_algebra``,
``structure_algebra``, ``behavior_algebra``, ``requirements``,
``recovery_catalog`` and ``scenarios``.  Every key but ``schema_version`` is
optional.  Wire endpoints are written ``occurrence.port``; the reserved
occurrence name ``outer`` addresses the diagram's own interface.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from ..algebra import Algebra, CombineRules, Filler, saturate, validate_algebra
from ..colimit import Cocone, Span, span_from_mappings
from ..design import DesignProblem, Realization, RequirementMap, enumerate_designs, select_realization
from ..errors import MalformedPlan, ParseError, SchemaVersionMismatch, UnresolvedReference
from ..fincat import FinFunction, FinSet, validate_category
from ..recovery import Contingency, RecoveryAction, RecoveryPlan
from ..report import Finding, ValidationReport
from ..wiring import (
    PROVIDED,
    REQUIRED,
    Box,
    Endpoint,
    Occurrence,
    Port,
    ResourceType,
    WiringDiagram,
    Wire,
    resource_flow_category,
    validate_diagram,
)
from .source import Node, line_of, parse_json

__all__ = [
    "SCHEMA_VERSION",
    "SECTIONS",
    "SpanSpec",
    "DesignSpec",
    "Scenario",
    "Model",
    "load_model",
    "loads_model",
    "dump_model",
    "dumps_model",
    "bundled_model_path",
]

SCHEMA_VERSION = "1"
SECTIONS = (
    "schema_version",
    "resources",
    "boxes",
    "diagrams",
    "capability_algebra",
    "structure_algebra",
    "behavior_algebra",
    "requirements",
    "recovery_catalog",
    "scenarios",
)
ALGEBRA_KINDS = ("capability", "structure", "behavior")
OUTER = "outer"


@dataclass(frozen=True)
class SpanSpec:
    name: str
    span: Span
    aliases: Mapping[str, str] = field(default_factory=dict)
    cocones: Mapping[str, Cocone] = field(default_factory=dict)


@dataclass(frozen=True)
class DesignSpec:
    name: str
    diagram: str
    capabilities: tuple[str, ...]
    sr: RequirementMap
    br: RequirementMap
    delta: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    contingency: Contingency
    expected: Mapping[str, Any] = field(default_factory=dict)
    plans: tuple[RecoveryPlan, ...] = ()
    description: str = ""


@dataclass(frozen=True)
class Model:
    schema_version: str
    resources: Mapping[str, ResourceType]
    boxes: Mapping[str, Box]
    diagrams: Mapping[str, WiringDiagram]
    composite_names: Mapping[str, Mapping[str, str]]
    algebras: Mapping[str, Algebra]
    spans: Mapping[str, SpanSpec]
    designs: Mapping[str, DesignSpec]
    catalog: tuple[RecoveryPlan, ...]
    scenarios: Mapping[str, Scenario]
    source: str = field(default="<string>", compare=False)
    lines: Mapping[str, int] = field(default_factory=dict, compare=False, repr=False)

    # -- derived views -----------------------------------------------------

    def decompositions(self, kind: str) -> list[tuple[WiringDiagram, str]]:
        return [(self.diagrams[d], names[kind]) for d, names in self.composite_names.items() if kind in names]

    @cached_property
    def _saturated(self) -> dict:
        return {k: saturate(self.algebras[k], self.decompositions(k)) for k in ALGEBRA_KINDS}

    def saturated(self, kind: str) -> Algebra:
        """The algebra with every declared decomposition's composites registered."""
        return self._saturated[kind]

    def design_problem(self, name: Optional[str] = None) -> DesignProblem:
        spec = self._design_spec(name)
        names = self.composite_names.get(spec.diagram, {})
        return DesignProblem(
            spec.name,
            self.diagrams[spec.diagram],
            spec.capabilities,
            self.saturated("structure"),
            self.saturated("behavior"),
            spec.sr,
            spec.br,
            names.get("structure"),
            names.get("behavior"),
            dict(spec.delta),
        )

    def _design_spec(self, name: Optional[str]) -> DesignSpec:
        if name is None:
            if not self.designs:
                raise UnresolvedReference("model declares no design requirement", self.source)
            return next(iter(self.designs.values()))
        if name not in self.designs:
            raise UnresolvedReference(f"no design requirement {name!r}", self.source)
        return self.designs[name]

    def realize(self, name: Optional[str] = None) -> Realization:
        return select_realization(enumerate_designs(self.design_problem(name)))

    def contingencies(self) -> dict[str, Contingency]:
        return {s.contingency.name: s.contingency for s in self.scenarios.values()}

    def plan(self, name: str) -> RecoveryPlan:
        for p in self.catalog:
            if p.name == name:
                return p
        for s in self.scenarios.values():
            for p in s.plans:
                if p.name == name:
                    return p
        raise UnresolvedReference(f"no recovery plan {name!r}", self.source)

    def where(self, key: str) -> str:
        return f"{self.source}:{self.lines[key]}" if key in self.lines else self.source

    # -- validation --------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Wiring, algebra and category-law checks over every part of the model."""
        findings: list[Finding] = []

        def tag(report: ValidationReport, key: str) -> None:
            for f in report:
                findings.append(Finding(f.code, f"{key.split(':', 1)[1]}/{f.subject}", f"{self.where(key)}: {f.message}"))

        for name, wd in self.diagrams.items():
            tag(validate_diagram(wd, self.resources), f"diagram:{name}")
            tag(validate_category(resource_flow_category(wd)), f"diagram:{name}")
        for kind in ALGEBRA_KINDS:
            tag(validate_algebra(self.algebras[kind]), f"algebra:{kind}")
        for name, spec in self.designs.items():
            space = enumerate_designs(self.design_problem(name))
            tag(space.report, f"design:{name}")
        return ValidationReport(tuple(findings))


# ---------------------------------------------------------------------------
# loading


def bundled_model_path(name: str = "marathon2") -> Path:
    return Path(__file__).resolve().parent.parent / "data" / f"{name}.model"


def load_model(path: Union[str, Path]) -> Model:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e}", None, None, str(p)) from None
    return loads_model(text, str(p))


def loads_model(text: str, source: str = "<string>") -> Model:
    doc = parse_json(text, source)
    return _Builder(doc, source).build()


def _section(doc: Node, key: str) -> Node:
    value = doc.get(key, Node())
    if not isinstance(value, dict):
        raise ParseError(f"section {key!r} must be an object", line_of(doc), None, None)
    return value


class _Builder:
    def __init__(self, doc: Node, source: str):
        self.doc = doc
        self.source = source
        self.lines: dict[str, int] = {}

    def fail(self, message: str, node=None) -> ParseError:
        return ParseError(message, line_of(node, line_of(self.doc)) or None, None, self.source)

    def unresolved(self, message: str, node=None) -> UnresolvedReference:
        line = line_of(node, 0)
        return UnresolvedReference(message, f"{self.source}:{line}" if line else self.source)

    def build(self) -> Model:
        doc = self.doc
        unknown = [k for k in doc if k not in SECTIONS]
        if unknown:
            raise self.fail(f"unknown top-level keys {unknown}; allowed: {list(SECTIONS)}", doc)
        if "schema_version" not in doc:
            raise self.fail("missing schema_version", doc)
        if str(doc["schema_version"]) != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"{self.source}: schema_version {doc['schema_version']!r} is not supported (expected {SCHEMA_VERSION!r})"
            )
        for key in SECTIONS[1:]:
            _section(doc, key)

        resources = self.resources(_section(doc, "resources"))
        boxes = self.boxes(_section(doc, "boxes"), resources)
        diagrams, composite_names = self.diagrams(_section(doc, "diagrams"), boxes)
        algebras = {k: self.algebra(k, _section(doc, f"{k}_algebra"), boxes) for k in ALGEBRA_KINDS}
        spans, designs = self.requirements(_section(doc, "requirements"), diagrams)
        catalog = tuple(self.plan(n, v) for n, v in _section(doc, "recovery_catalog").items())
        scenarios = {n: self.scenario(n, v) for n, v in _section(doc, "scenarios").items()}
        model = Model(
            SCHEMA_VERSION, resources, boxes, diagrams, composite_names, algebras, spans, designs, catalog,
            scenarios, self.source, self.lines,
        )
        self.check_designs(model)
        return model

    def resources(self, sec: Node) -> dict[str, ResourceType]:
        out = {}
        for name, spec in sec.items():
            spec = spec or {}
            self.lines[f"resource:{name}"] = line_of(spec)
            out[name] = ResourceType(name, spec.get("description", ""), spec.get("topic"))
        return out

    def boxes(self, sec: Node, resources) -> dict[str, Box]:
        out = {}
        for name, spec in sec.items():
            self.lines[f"box:{name}"] = line_of(spec)
            extra = set(spec) - {"requires", "provides"}
            if extra:
                raise self.fail(f"box {name!r} has unknown keys {sorted(extra)}", spec)
            ports = []
            for key, direction in (("requires", REQUIRED), ("provides", PROVIDED)):
                for port, res in spec.get(key, {}).items():
                    if res not in resources:
                        raise self.unresolved(f"box {name!r} port {port!r} uses undeclared resource {res!r}", spec)
                    if any(p.name == port for p in ports):
                        raise self.fail(f"box {name!r} declares port {port!r} twice", spec)
                    ports.append(Port(port, direction, res))
            out[name] = Box(name, tuple(ports))
        return out

    def diagrams(self, sec: Node, boxes) -> tuple[dict, dict]:
        out, names = {}, {}
        for name, spec in sec.items():
            self.lines[f"diagram:{name}"] = line_of(spec)
            outer = spec.get("outer")
            if outer not in boxes:
                raise self.unresolved(f"diagram {name!r}: outer box {outer!r} is not declared", spec)
            inner = []
            for occ, box in spec.get("inner", {}).items():
                if occ == OUTER:
                    raise self.fail(f"diagram {name!r}: occurrence name {OUTER!r} is reserved", spec)
                if box not in boxes:
                    raise self.unresolved(f"diagram {name!r}: occurrence {occ!r} uses undeclared box {box!r}", spec)
                inner.append(Occurrence(occ, boxes[box]))
            wd = WiringDiagram(name, boxes[outer], tuple(inner), ())
            wires = []
            for item in spec.get("wires", []):
                if not isinstance(item, list) or len(item) not in (2, 3):
                    raise self.fail(f"diagram {name!r}: wire {item!r} must be [source, target] or [source, target, label]", spec)
                w = Wire(self.endpoint(item[0], name, spec), self.endpoint(item[1], name, spec), item[2] if len(item) == 3 else None)
                for ep in (w.source, w.target):
                    try:
                        wd.port_of(ep)
                    except UnresolvedReference:
                        raise self.unresolved(f"diagram {name!r}: wire {item[0]} -> {item[1]} names missing port {ep}", spec) from None
                wires.append(w)
            out[name] = WiringDiagram(name, boxes[outer], tuple(inner), tuple(wires))
            comps = dict(spec.get("composites", {}))
            bad = set(comps) - set(ALGEBRA_KINDS)
            if bad:
                raise self.fail(f"diagram {name!r}: unknown composite kinds {sorted(bad)}", spec)
            if comps:
                names[name] = comps
        return out, names

    def endpoint(self, text: str, diagram: str, node) -> Endpoint:
        if not isinstance(text, str) or "." not in text:
            raise self.fail(f"diagram {diagram!r}: endpoint {text!r} must be occurrence.port", node)
        occ, port = text.rsplit(".", 1)
        return Endpoint(None if occ == OUTER else occ, port)

    def algebra(self, kind: str, sec: Node, boxes) -> Algebra:
        self.lines[f"algebra:{kind}"] = line_of(sec)
        combine = sec.get("combine", {})
        try:
            rules = CombineRules(**combine)
        except (TypeError, ValueError) as e:
            raise self.fail(f"{kind}_algebra combine: {e}", sec) from None
        alg = Algebra(kind, kind, boxes, {}, rules)
        fillers = []
        for name, spec in sec.get("fillers", {}).items():
            box = spec.get("box")
            if box not in boxes:
                raise self.unresolved(f"{kind} filler {name!r} names undeclared box {box!r}", spec)
            attrs = {k: v for k, v in spec.items() if k != "box"}
            fillers.append(Filler(name, box, alg.filler_kind, attrs))
        return alg.with_fillers(*fillers)

    def requirements(self, sec: Node, diagrams) -> tuple[dict, dict]:
        spans, designs = {}, {}
        for name, spec in sec.items():
            self.lines[f"requirement:{name}"] = line_of(spec)
            kind = spec.get("kind")
            if kind == "span":
                spans[name] = self.span(name, spec)
            elif kind == "design":
                if spec.get("diagram") not in diagrams:
                    raise self.unresolved(f"design {name!r} names undeclared diagram {spec.get('diagram')!r}", spec)
                designs[name] = DesignSpec(
                    name,
                    spec["diagram"],
                    tuple(spec.get("capabilities", ())),
                    RequirementMap("SR", spec.get("SR", {})),
                    RequirementMap("BR", spec.get("BR", {})),
                    dict(spec.get("delta", {})),
                )
            else:
                raise self.fail(f"requirement {name!r} has kind {kind!r}; expected 'span' or 'design'", spec)
        return spans, designs

    def span(self, name: str, spec: Node) -> SpanSpec:
        apex = FinSet(spec.get("apex_name", "A"), spec.get("apex", []))
        legs = {}
        for side in ("left", "right"):
            leg = spec.get(side, {})
            cod = FinSet(leg.get("set", side), leg.get("elements", []))
            for a, x in leg.get("map", {}).items():
                if a not in apex or x not in cod:
                    raise self.unresolved(f"span {name!r}: {side} leg maps {a!r} to {x!r} outside its sets", leg)
            legs[side] = (cod, leg.get("map", {}))
        span = span_from_mappings(apex, *legs["left"], *legs["right"], name=name)
        cocones = {}
        for cname, cspec in spec.get("cocones", {}).items():
            T = FinSet(cspec.get("target_name", "T"), cspec.get("target", []))
            try:
                cocones[cname] = Cocone(
                    T,
                    FinFunction(legs["left"][0], T, cspec.get("left", {})),
                    FinFunction(legs["right"][0], T, cspec.get("right", {})),
                    cname,
                )
            except Exception as e:
                raise self.fail(f"span {name!r} cocone {cname!r}: {e}", cspec) from None
        return SpanSpec(name, span, dict(spec.get("aliases", {})), cocones)

    def plan(self, name: str, spec: Node) -> RecoveryPlan:
        self.lines[f"plan:{name}"] = line_of(spec)
        try:
            actions = tuple(RecoveryAction(a["kind"], {k: v for k, v in a.items() if k != "kind"}) for a in spec.get("actions", []))
        except (KeyError, MalformedPlan) as e:
            raise self.fail(f"plan {name!r}: bad action ({e})", spec) from None
        inv = spec.get("inverse")
        return RecoveryPlan(
            name,
            actions,
            tuple(spec.get("handles", ())),
            dict(spec["alpha_str"]) if "alpha_str" in spec else None,
            dict(spec["alpha_beh"]) if "alpha_beh" in spec else None,
            inverse=self.plan(f"{name}^-1", inv) if inv is not None else None,
        )

    def scenario(self, name: str, spec: Node) -> Scenario:
        self.lines[f"scenario:{name}"] = line_of(spec)
        c = spec.get("contingency")
        if not isinstance(c, dict) or "name" not in c or "target" not in c:
            raise self.fail(f"scenario {name!r} needs a contingency with name and target", spec)
        try:
            cont = Contingency(c["name"], c["target"], c.get("mode", "filler_failed"), c.get("description", ""))
        except ValueError as e:
            raise self.fail(f"scenario {name!r}: {e}", c) from None
        plans = tuple(self.plan(n, v) for n, v in spec.get("plans", {}).items())
        return Scenario(name, cont, _plain(spec.get("expected", {})), plans, spec.get("description", ""))

    def check_designs(self, model: Model) -> None:
        cap_names = {f.name for f in model.algebras["capability"].fillers()}
        for name, spec in model.designs.items():
            node = self.lines.get(f"requirement:{name}", 0)
            where = f"{self.source}:{node}"
            for cap in spec.capabilities:
                if cap not in cap_names:
                    raise UnresolvedReference(f"design {name!r}: {cap!r} is not a capability filler", where)
            for rmap, kind in ((spec.sr, "structure"), (spec.br, "behavior")):
                known = {f.name for f in model.saturated(kind).fillers()}
                for cap, image in rmap.mapping.items():
                    if cap not in spec.capabilities:
                        raise UnresolvedReference(f"design {name!r}: {rmap.name} traces unknown capability {cap!r}", where)
                    for target in image:
                        if target not in known:
                            raise UnresolvedReference(f"design {name!r}: {rmap.name} target {target!r} is not a {kind} filler", where)


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_plain(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# serialization


def _ep(ep: Endpoint) -> str:
    return f"{OUTER if ep.occurrence is None else ep.occurrence}.{ep.port}"


def _plan_doc(p: RecoveryPlan) -> dict:
    out: dict = {}
    if p.handles:
        out["handles"] = list(p.handles)
    out["actions"] = [{"kind": a.kind, **_plain(a.params)} for a in p.actions]
    if p.alpha_str is not None:
        out["alpha_str"] = dict(p.alpha_str)
    if p.alpha_beh is not None:
        out["alpha_beh"] = dict(p.alpha_beh)
    if p.inverse is not None:
        out["inverse"] = _plan_doc(p.inverse)
    return out


def _number(x):
    return int(x) if isinstance(x, float) and x.is_integer() else x


def to_document(m: Model) -> dict:
    doc: dict = {"schema_version": m.schema_version}
    doc["resources"] = {
        r.name: {"description": r.description, **({"topic": r.topic} if r.topic else {})} for r in m.resources.values()
    }
    boxes = {}
    for b in m.boxes.values():
        spec = {}
        req = {p.name: p.resource for p in b.required()}
        prov = {p.name: p.resource for p in b.provided()}
        if req:
            spec["requires"] = req
        if prov:
            spec["provides"] = prov
        boxes[b.name] = spec
    doc["boxes"] = boxes
    diagrams = {}
    for name, wd in m.diagrams.items():
        spec = {
            "outer": wd.outer.name,
            "inner": {o.name: o.box.name for o in wd.inner},
            "wires": [[_ep(w.source), _ep(w.target)] + ([w.label] if w.label else []) for w in wd.wires],
        }
        if name in m.composite_names:
            spec["composites"] = dict(m.composite_names[name])
        diagrams[name] = spec
    doc["diagrams"] = diagrams
    for kind in ALGEBRA_KINDS:
        alg = m.algebras[kind]
        doc[f"{kind}_algebra"] = {
            "combine": {"cost": alg.combine.cost, "performance": alg.combine.performance},
            "fillers": {f.name: {"box": f.box, **{k: _number(v) for k, v in f.attributes.items()}} for f in alg.fillers()},
        }
    reqs = {}
    for name, s in m.spans.items():
        span = s.span

        def leg(f):
            return {"set": f.codomain.name, "elements": list(f.codomain), "map": {a: f(a) for a in span.apex if f.defined(a)}}

        spec = {"kind": "span", "apex_name": span.apex.name, "apex": list(span.apex), "left": leg(span.left), "right": leg(span.right)}
        if s.aliases:
            spec["aliases"] = dict(s.aliases)
        if s.cocones:
            spec["cocones"] = {
                c.name: {
                    "target_name": c.target.name,
                    "target": list(c.target),
                    "left": dict(c.leg_left.mapping),
                    "right": dict(c.leg_right.mapping),
                }
                for c in s.cocones.values()
            }
        reqs[name] = spec
    for name, d in m.designs.items():

        def trace(rmap):
            return {c: (v[0] if len(v) == 1 else list(v)) for c, v in rmap.mapping.items()}

        spec = {"kind": "design", "diagram": d.diagram, "capabilities": list(d.capabilities), "SR": trace(d.sr), "BR": trace(d.br)}
        if d.delta:
            spec["delta"] = dict(d.delta)
        reqs[name] = spec
    doc["requirements"] = reqs
    doc["recovery_catalog"] = {p.name: _plan_doc(p) for p in m.catalog}
    scenarios = {}
    for s in m.scenarios.values():
        c = s.contingency
        spec = {}
        if s.description:
            spec["description"] = s.description
        spec["contingency"] = {"name": c.name, "target": c.target, "mode": c.mode}
        if c.description:
            spec["contingency"]["description"] = c.description
        if s.plans:
            spec["plans"] = {p.name: _plan_doc(p) for p in s.plans}
        spec["expected"] = _plain(s.expected)
        scenarios[s.name] = spec
    doc["scenarios"] = scenarios
    return doc


def dumps_model(m: Model) -> str:
    return json.dumps(to_document(m), indent=2, ensure_ascii=False) + "\n"


def dump_model(m: Model, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_model(m), encoding="utf-8")
