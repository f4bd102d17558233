"""Typed wiring diagrams with required/provided ports and operadic substitution.

A diagram has an outer box (its composite interface), named inner box
occurrences, and wires between endpoints.  Seen from the inside, an outer
*required* port supplies a resource and an outer *provided* port consumes one,
so every wire runs from a provider-role endpoint to a consumer-role endpoint.

Provided ports may fan out to any number of consumers; a consumer must be fed
by exactly one wire.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import InterfaceMismatch, UnresolvedReference
from .fincat import FinCategory, preorder_category
from .report import Finding, ValidationReport

__all__ = [
    "REQUIRED",
    "PROVIDED",
    "ResourceType",
    "Port",
    "Box",
    "Endpoint",
    "Wire",
    "Occurrence",
    "WiringDiagram",
    "validate_diagram",
    "substitute",
    "canonical_form",
    "identity_diagram",
    "rename_occurrences",
    "resource_flow_category",
]

REQUIRED = "required"
PROVIDED = "provided"


@dataclass(frozen=True)
class ResourceType:
    name: str
    description: str = ""
    topic: Optional[str] = None


@dataclass(frozen=True, order=True)
class Port:
    name: str
    direction: str
    resource: str


@dataclass(frozen=True)
class Box:
    name: str
    ports: tuple[Port, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def required(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == REQUIRED)

    def provided(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == PROVIDED)

    def interface(self) -> tuple[Port, ...]:
        return tuple(sorted(self.ports))


class Endpoint(NamedTuple):
    """``occurrence`` is ``None`` for a port of the outer box."""

    occurrence: Optional[str]
    port: str

    def __str__(self) -> str:
        return f"{self.occurrence if self.occurrence is not None else '<outer>'}.{self.port}"

    def sort_key(self) -> tuple:
        return (self.occurrence is not None, self.occurrence or "", self.port)


@dataclass(frozen=True)
class Wire:
    source: Endpoint
    target: Endpoint
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "source", Endpoint(*self.source))
        object.__setattr__(self, "target", Endpoint(*self.target))

    def sort_key(self) -> tuple:
        return (self.source.sort_key(), self.target.sort_key(), self.label or "")

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


@dataclass(frozen=True)
class Occurrence:
    name: str
    box: Box


@dataclass(frozen=True)
class WiringDiagram:
    name: str = field(compare=False)
    outer: Box
    inner: tuple[Occurrence, ...] = ()
    wires: tuple[Wire, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inner", tuple(self.inner))
        object.__setattr__(self, "wires", tuple(self.wires))

    def occurrence(self, name: str) -> Occurrence:
        for o in self.inner:
            if o.name == name:
                return o
        raise UnresolvedReference(f"diagram {self.name!r} has no occurrence {name!r}")

    def occurrence_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.inner)

    def port_of(self, ep: Endpoint) -> Port:
        box = self.outer if ep.occurrence is None else self.occurrence(ep.occurrence).box
        p = box.port(ep.port)
        if p is None:
            raise UnresolvedReference(f"diagram {self.name!r}: {ep} names a missing port")
        return p

    def is_provider(self, ep: Endpoint) -> bool:
        """True when ``ep`` supplies a resource to the inside of the diagram."""
        p = self.port_of(ep)
        return (p.direction == PROVIDED) == (ep.occurrence is not None)

    def feeds(self) -> dict[Endpoint, list[Wire]]:
        out: dict[Endpoint, list[Wire]] = {}
        for w in self.wires:
            out.setdefault(w.target, []).append(w)
        return out

    def consumers(self) -> list[Endpoint]:
        """All consumer-role endpoints in declaration order."""
        eps = [Endpoint(o.name, p.name) for o in self.inner for p in o.box.required()]
        eps += [Endpoint(None, p.name) for p in self.outer.provided()]
        return eps


def validate_diagram(wd: WiringDiagram, resources: Optional[Mapping[str, ResourceType]] = None) -> ValidationReport:
    """Report polarity errors, type mismatches, and unfed or double-fed consumers.

    Raises :class:`UnresolvedReference` when a wire names a missing occurrence or
    port, or (with ``resources``) a port uses an undeclared resource type.
    """
    out: list[Finding] = []
    seen = set()
    for o in wd.inner:
        if o.name in seen:
            out.append(Finding("duplicate_occurrence", o.name, f"occurrence {o.name} is declared twice"))
        seen.add(o.name)
    for box in [wd.outer] + [o.box for o in wd.inner]:
        names = [p.name for p in box.ports]
        if len(set(names)) != len(names):
            out.append(Finding("duplicate_port", box.name, f"box {box.name} repeats a port name"))
        if resources is not None:
            for p in box.ports:
                if p.resource not in resources:
                    raise UnresolvedReference(f"box {box.name!r} port {p.name!r} uses undeclared resource {p.resource!r}")

    for w in wd.wires:
        src, tgt = wd.port_of(w.source), wd.port_of(w.target)
        if not wd.is_provider(w.source):
            out.append(Finding("bad_polarity", str(w), f"{w.source} cannot supply a resource"))
        if wd.is_provider(w.target):
            out.append(Finding("bad_polarity", str(w), f"{w.target} cannot consume a resource"))
        if src.resource != tgt.resource:
            out.append(
                Finding("type_mismatch", str(w), f"{w.source} provides {src.resource} but {w.target} needs {tgt.resource}")
            )

    feeds = wd.feeds()
    for ep in wd.consumers():
        n = len(feeds.get(ep, ()))
        code = "unfed_required_port" if ep.occurrence is not None else "unfed_outer_port"
        if n == 0:
            out.append(Finding(code, str(ep), f"{ep} ({wd.port_of(ep).resource}) is not fed by any wire"))
        elif n > 1:
            out.append(Finding("double_fed", str(ep), f"{ep} is fed by {n} wires"))
    return ValidationReport(tuple(out))


def _chain_label(a: Optional[str], b: Optional[str]) -> Optional[str]:
    # provider-side label wins; associative along a chain of wires
    return a if a else b


def substitute(
    outer_wd: WiringDiagram, occurrence: str, inner_wd: WiringDiagram, name: Optional[str] = None
) -> WiringDiagram:
    """Replace ``occurrence`` of ``outer_wd`` by the contents of ``inner_wd``.

    Inner occurrence names are prefixed with ``occurrence + "."``.  Wires that
    crossed the old box boundary are spliced through ``inner_wd``'s outer-port
    wiring: each path from a real provider to a real consumer through boundary
    ports becomes one wire.  Paths that loop only through boundary ports carry
    nothing and vanish.
    """
    occ = outer_wd.occurrence(occurrence)
    if occ.box.interface() != inner_wd.outer.interface():
        raise InterfaceMismatch(
            f"occurrence {occurrence!r} has interface {occ.box.interface()} "
            f"but {inner_wd.name!r} exposes {inner_wd.outer.interface()}"
        )
    prefix = occurrence + "."

    def outer_node(ep: Endpoint):
        return ("J", ep.port) if ep.occurrence == occurrence else ("E", ep)

    def inner_node(ep: Endpoint):
        return ("J", ep.port) if ep.occurrence is None else ("E", Endpoint(prefix + ep.occurrence, ep.port))

    edges = [(outer_node(w.source), outer_node(w.target), w.label) for w in outer_wd.wires]
    edges += [(inner_node(w.source), inner_node(w.target), w.label) for w in inner_wd.wires]
    leaving: dict = {}
    for e in edges:
        leaving.setdefault(e[0], []).append(e)

    wires: list[Wire] = []

    def follow(src, node, label, visited):
        if node[0] == "E":
            wires.append(Wire(src, node[1], label))
            return
        if node in visited:
            return
        for _, nxt, lab in leaving.get(node, ()):
            follow(src, nxt, _chain_label(label, lab), visited | {node})

    for s, t, label in edges:
        if s[0] == "E":
            follow(s[1], t, label, frozenset())

    inner: list[Occurrence] = []
    for o in outer_wd.inner:
        if o.name == occurrence:
            inner.extend(Occurrence(prefix + i.name, i.box) for i in inner_wd.inner)
        else:
            inner.append(o)
    return WiringDiagram(
        name or f"{outer_wd.name}[{occurrence}:={inner_wd.name}]", outer_wd.outer, tuple(inner), tuple(wires)
    )


def canonical_form(wd: WiringDiagram) -> WiringDiagram:
    """Sort occurrences, ports and wires so equal structures compare equal."""

    def box(b: Box) -> Box:
        return Box(b.name, tuple(sorted(b.ports, key=lambda p: (p.direction, p.name, p.resource))))

    return WiringDiagram(
        wd.name,
        box(wd.outer),
        tuple(sorted((Occurrence(o.name, box(o.box)) for o in wd.inner), key=lambda o: o.name)),
        tuple(sorted(wd.wires, key=Wire.sort_key)),
    )


def identity_diagram(box: Box, occurrence: Optional[str] = None) -> WiringDiagram:
    """One occurrence of ``box`` with every port wired straight through."""
    occ = occurrence or box.name
    wires = [Wire(Endpoint(None, p.name), Endpoint(occ, p.name)) for p in box.required()]
    wires += [Wire(Endpoint(occ, p.name), Endpoint(None, p.name)) for p in box.provided()]
    return WiringDiagram(f"id_{box.name}", box, (Occurrence(occ, box),), tuple(wires))


def rename_occurrences(wd: WiringDiagram, mapping: Mapping[str, str]) -> WiringDiagram:
    def ep(e: Endpoint) -> Endpoint:
        return e if e.occurrence is None else Endpoint(mapping.get(e.occurrence, e.occurrence), e.port)

    return replace(
        wd,
        inner=tuple(Occurrence(mapping.get(o.name, o.name), o.box) for o in wd.inner),
        wires=tuple(Wire(ep(w.source), ep(w.target), w.label) for w in wd.wires),
    )


def resource_flow_category(wd: WiringDiagram) -> FinCategory:
    """Thin category on the occurrences: ``x -> y`` when resources flow from ``x`` to ``y``."""
    relations = [
        (w.source.occurrence, w.target.occurrence)
        for w in wd.wires
        if w.source.occurrence is not None and w.target.occurrence is not None
    ]
    return preorder_category(f"flow({wd.name})", wd.occurrence_names(), relations)


def wire_multiset(wd: WiringDiagram, resources: Optional[Mapping[str, ResourceType]] = None) -> list[str]:
    """Sorted one-line rendering of every wire, tagged with its resource (and topic when known)."""
    out = []
    for w in wd.wires:
        res = wd.port_of(w.source).resource
        topic = w.label or (resources[res].topic if resources and res in resources else None)
        out.append(f"{w.source} -> {w.target} [{res}{' ' + topic if topic else ''}]")
    return sorted(out)


def iter_ports(wd: WiringDiagram) -> Iterable[tuple[Endpoint, Port]]:
    for p in wd.outer.ports:
        yield Endpoint(None, p.name), p
    for o in wd.inner:
        for p in o.box.ports:
            yield Endpoint(o.name, p.name), p
