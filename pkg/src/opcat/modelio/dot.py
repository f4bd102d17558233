"""Deterministic Graphviz DOT rendering of wiring diagrams and pushouts."""
from __future__ import annotations

import json
from typing import Mapping, Optional, Union

from ..colimit import PushoutResult
from ..wiring import Endpoint, ResourceType, WiringDiagram

__all__ = ["export_dot"]


def _q(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _diagram(wd: WiringDiagram, resources: Optional[Mapping[str, ResourceType]]) -> str:
    lines = [f"digraph {_q(wd.name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for p in wd.outer.ports:
        lines.append(f"  {_q('outer.' + p.name)} [shape=point, xlabel={_q(p.name)}];")
    for o in wd.inner:
        lines.append(f"  {_q(o.name)} [label={_q(o.name + chr(10) + o.box.name)}];")

    def node(ep: Endpoint) -> str:
        return _q("outer." + ep.port) if ep.occurrence is None else _q(ep.occurrence)

    for w in wd.wires:
        res = wd.port_of(w.source).resource
        topic = w.label or (resources[res].topic if resources and res in resources and resources[res].topic else res)
        attrs = f"label={_q(topic)}, taillabel={_q(w.source.port)}, headlabel={_q(w.target.port)}"
        lines.append(f"  {node(w.source)} -> {node(w.target)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _pushout(p: PushoutResult, aliases: Optional[Mapping[str, str]]) -> str:
    X, Y = p.span.left.codomain, p.span.right.codomain
    lines = [f"digraph {_q(p.object.name)} {{", "  rankdir=LR;"]
    for side, s in (("X", X), ("Y", Y)):
        for e in s:
            lines.append(f"  {_q(side + ':' + e)} [shape=ellipse, label={_q(e)}];")
    for cls in p.object:
        shown = (aliases or {}).get(cls, cls)
        label = shown + "\n{" + ", ".join(p.members(cls)) + "}"
        lines.append(f"  {_q('class:' + cls)} [shape=box, label={_q(label)}];")
    for x in X:
        lines.append(f"  {_q('X:' + x)} -> {_q('class:' + p.inj_left(x))} [label=\"inj_left\"];")
    for y in Y:
        lines.append(f"  {_q('Y:' + y)} -> {_q('class:' + p.inj_right(y))} [label=\"inj_right\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(
    target: Union[WiringDiagram, PushoutResult],
    resources: Optional[Mapping[str, ResourceType]] = None,
    aliases: Optional[Mapping[str, str]] = None,
) -> str:
    """DOT text for a diagram (boxes as nodes, wires as edges) or a pushout (classes as merged nodes)."""
    if isinstance(target, PushoutResult):
        return _pushout(target, aliases)
    return _diagram(target, resources)
