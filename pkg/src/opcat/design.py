"""Design space as the pushout Structure <- Capability -> Behavior, and realization selection.

Each capability is traced to the structure and behaviour fillers that realize
it (the requirement maps SR and BR).  The pushout of that span groups, per
capability, the structure and behaviour elements linked through it.  A design
pairs one structure composite with one behaviour composite of the same wiring
diagram; it is valid when every capability's class meets both composites.
Selection then uses an explicit total order: performance descending, cost
ascending, name ascending.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .algebra import Algebra, CompositeFiller, enumerate_composites
from .colimit import LEFT, RIGHT, PushoutResult, Span, pushout_partial
from .errors import EmptyDesignSpace
from .fincat import FinSet, PartialFinFunction
from .report import Finding, ValidationReport
from .wiring import WiringDiagram, canonical_form

__all__ = [
    "RequirementMap",
    "DesignProblem",
    "Design",
    "DesignSpace",
    "Realization",
    "design_pushout",
    "trace_span",
    "enumerate_designs",
    "select_realization",
    "pareto_front",
    "derive_delta",
    "check_linkage",
    "covered",
    "same_shape",
    "compatible",
    "paired",
]


@dataclass(frozen=True)
class RequirementMap:
    """Trace from capabilities to the solution fillers (by name) that realize them."""

    name: str
    mapping: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        norm = {}
        for cap, image in dict(self.mapping).items():
            norm[cap] = (image,) if isinstance(image, str) else tuple(image)
        object.__setattr__(self, "mapping", norm)

    def image(self, capability: str) -> tuple[str, ...]:
        return self.mapping.get(capability, ())

    def unsatisfied(self, capabilities: Iterable[str]) -> list[str]:
        return [c for c in capabilities if not self.image(c)]


def design_pushout(
    capability_set: FinSet,
    structure_set: FinSet,
    behavior_set: FinSet,
    SR: PartialFinFunction,
    BR: PartialFinFunction,
) -> PushoutResult:
    """Pushout of ``structure_set <-SR- capability_set -BR-> behavior_set``; legs may be partial."""
    return pushout_partial(Span(capability_set, SR, BR, name="design"))


def trace_span(
    capabilities: Sequence[str], structure_set: FinSet, behavior_set: FinSet, sr: RequirementMap, br: RequirementMap
) -> Span:
    """Span over capability traces.

    A capability with one structure and one behaviour image is a single apex
    element.  Multi-valued traces expand to one apex element per image pair,
    named ``cap[k]``, so a filler relation still yields a span of functions.
    """
    elements, left, right = [], {}, {}
    for cap in capabilities:
        s_img, b_img = sr.image(cap), br.image(cap)
        pairs = [(s, b) for s in (s_img or (None,)) for b in (b_img or (None,))]
        for k, (s, b) in enumerate(pairs):
            a = cap if len(pairs) == 1 else f"{cap}[{k}]"
            elements.append(a)
            if s is not None:
                left[a] = s
            if b is not None:
                right[a] = b
    apex = FinSet("Capability", elements)
    return Span(
        apex,
        PartialFinFunction(apex, structure_set, left),
        PartialFinFunction(apex, behavior_set, right),
        name="design",
    )


def _capability_of(apex_element: str) -> str:
    return apex_element.split("[", 1)[0] if apex_element.endswith("]") else apex_element


@dataclass(frozen=True)
class DesignProblem:
    """Everything needed to enumerate designs over one top-level diagram."""

    name: str
    diagram: WiringDiagram
    capabilities: tuple[str, ...]
    structure: Algebra
    behavior: Algebra
    sr: RequirementMap
    br: RequirementMap
    structure_name: Optional[str] = None
    behavior_name: Optional[str] = None
    delta_override: Mapping[str, str] = field(default_factory=dict)

    def linkage(self) -> PushoutResult:
        s_names = _unique(f.name for f in self.structure.fillers())
        b_names = _unique(f.name for f in self.behavior.fillers())
        span = trace_span(
            self.capabilities, FinSet("Structure", s_names), FinSet("Behavior", b_names), self.sr, self.br
        )
        return pushout_partial(span)


def _unique(names: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(names))


@dataclass(frozen=True)
class Design:
    structure: CompositeFiller
    behavior: CompositeFiller
    satisfied: frozenset[str]
    cost: float
    performance: float

    @property
    def name(self) -> str:
        return f"{self.structure.label} | {self.behavior.label}"

    @property
    def structure_choice(self) -> dict[str, str]:
        return self.structure.choices()

    @property
    def behavior_choice(self) -> dict[str, str]:
        return self.behavior.choices()

    def leaves(self, kind: str = "behavior") -> tuple[str, ...]:
        comp = self.behavior if kind == "behavior" else self.structure
        return tuple(f.name for _, f in comp.leaves())

    def key(self) -> tuple:
        """Structural identity: filler labels plus the canonical flattened diagram."""
        return (self.structure.label, self.behavior.label, canonical_form(self.structure.flatten()))


@dataclass(frozen=True)
class DesignSpace:
    designs: tuple[Design, ...]
    report: ValidationReport
    linkage: PushoutResult
    problem: Optional[DesignProblem] = None

    def __iter__(self) -> Iterator[Design]:
        return iter(self.designs)

    def __len__(self) -> int:
        return len(self.designs)


def covered(linkage: PushoutResult, structure: CompositeFiller, behavior: CompositeFiller) -> frozenset[str]:
    """Capabilities whose class contains a filler used by each composite."""
    s_used, b_used = structure.used_names(), behavior.used_names()
    out = set()
    for cls, apex in linkage.apex_table.items():
        members = linkage.class_table[cls]
        has_s = any(side == LEFT and label in s_used for side, label in members)
        has_b = any(side == RIGHT and label in b_used for side, label in members)
        if has_s and has_b:
            out.update(_capability_of(a) for a in apex)
    return frozenset(out)


def same_shape(a, b) -> bool:
    """True when two composites are built from the same diagrams at every level."""
    if isinstance(a, CompositeFiller) != isinstance(b, CompositeFiller):
        return False
    if not isinstance(a, CompositeFiller):
        return a.box == b.box
    if canonical_form(a.diagram) != canonical_form(b.diagram):
        return False
    bp = dict(b.parts)
    return all(o in bp and same_shape(p, bp[o]) for o, p in a.parts)


def compatible(problem: DesignProblem, box: str, s: str, b: str) -> bool:
    """Whether structure filler ``s`` may run behaviour ``b`` in an occurrence of ``box``.

    A behaviour with a ``realizes`` attribute names its structures explicitly.
    Otherwise a filler whose name exists on both sides pairs only with its
    namesake, and the remaining fillers pair freely.
    """
    bf = problem.behavior.find(box, b)
    if bf is not None and "realizes" in bf.attributes:
        allowed = bf.attributes["realizes"]
        return s in ((allowed,) if isinstance(allowed, str) else tuple(allowed))
    if s == b:
        return True
    s_names = {f.name for f in problem.structure.assignment.get(box, ())}
    b_names = {f.name for f in problem.behavior.assignment.get(box, ())}
    return s not in b_names and b not in s_names


def paired(problem: DesignProblem, structure: CompositeFiller, behavior: CompositeFiller) -> bool:
    """Every occurrence, at every level, pairs compatible fillers."""
    bp = dict(behavior.parts)
    for o, p in structure.parts:
        q = bp[o]
        if not compatible(problem, p.box, p.name, q.name):
            return False
        if isinstance(p, CompositeFiller) and not paired(problem, p, q):
            return False
    return True


def enumerate_designs(problem: DesignProblem) -> DesignSpace:
    """All (structure, behaviour) composite pairs over the diagram that cover every capability."""
    linkage = problem.linkage()
    findings = []
    for rmap, kind in ((problem.sr, "structure"), (problem.br, "behavior")):
        for cap in rmap.unsatisfied(problem.capabilities):
            findings.append(Finding("uncovered_capability", cap, f"{rmap.name} gives {cap} no {kind} filler"))
    if findings:
        return DesignSpace((), ValidationReport(tuple(findings)), linkage, problem)

    needed = frozenset(problem.capabilities)
    designs = []
    for s in enumerate_composites(problem.structure, problem.diagram, problem.structure_name):
        for b in enumerate_composites(problem.behavior, problem.diagram, problem.behavior_name):
            if not same_shape(s, b) or not paired(problem, s, b):
                continue
            sat = covered(linkage, s, b)
            if needed <= sat:
                designs.append(Design(s, b, sat, s.cost, b.performance))
    if not designs:
        findings.append(Finding("empty_design_space", problem.name, "no composite pair covers every capability"))
    return DesignSpace(tuple(designs), ValidationReport(tuple(findings)), linkage, problem)


def _order_key(d: Design) -> tuple:
    return (-d.performance, d.cost, d.name)


def pareto_front(designs: Iterable[Design]) -> tuple[Design, ...]:
    """Designs not dominated in (performance up, cost down), in selection order."""
    ds = list(designs)

    def dominated(d: Design) -> bool:
        return any(
            e.performance >= d.performance and e.cost <= d.cost and (e.performance > d.performance or e.cost < d.cost)
            for e in ds
        )

    return tuple(sorted((d for d in ds if not dominated(d)), key=_order_key))


@dataclass(frozen=True)
class Realization:
    """A selected design with its structure-to-behaviour map.

    ``annotations`` records resource states (``(provider endpoint, state)``
    pairs); ``provenance`` links a recovered realization to its origin and
    does not take part in equality.
    """

    design: Design
    delta: Mapping[str, str]
    annotations: tuple[tuple[str, str], ...] = ()
    provenance: tuple = field(default=(), compare=False)
    problem: Optional[DesignProblem] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", dict(self.delta))
        object.__setattr__(self, "annotations", tuple(sorted(self.annotations)))

    @property
    def linkage(self) -> Optional[PushoutResult]:
        return self.problem.linkage() if self.problem is not None else None

    @property
    def structure(self) -> CompositeFiller:
        return self.design.structure

    @property
    def behavior(self) -> CompositeFiller:
        return self.design.behavior

    def flat(self) -> WiringDiagram:
        return self.design.structure.flatten()

    def key(self) -> tuple:
        return (self.design.key(), tuple(sorted(self.delta.items())), self.annotations)


def derive_delta(
    structure: CompositeFiller, behavior: CompositeFiller, override: Optional[Mapping[str, str]] = None
) -> tuple[dict[str, str], ValidationReport]:
    """δ by occurrence pairing: the structure filler at each path maps to the behaviour filler there.

    Both composites share their diagrams, so paths agree.  A structure name
    paired with two different behaviours is reported as ``delta_ambiguous``.
    """
    pairs = [(structure.name, behavior.name)]
    s_choice, b_choice = structure.choices(), behavior.choices()
    for path, s in s_choice.items():
        pairs.append((s, b_choice.get(path, "")))
    delta: dict[str, str] = {}
    findings = []
    for s, b in pairs:
        if s in delta and delta[s] != b:
            findings.append(Finding("delta_ambiguous", s, f"{s} pairs with both {delta[s]} and {b}"))
            continue
        delta[s] = b
    delta.update(override or {})
    return delta, ValidationReport(tuple(findings))


def select_realization(
    designs: Union[DesignSpace, Iterable[Design]], override: Optional[Mapping[str, str]] = None
) -> Realization:
    """The design first in the selection order, with δ read off its occurrence pairing."""
    problem = designs.problem if isinstance(designs, DesignSpace) else None
    ds = list(designs)
    if not ds:
        raise EmptyDesignSpace("no valid designs to select from")
    best = min(ds, key=_order_key)
    if override is None and problem is not None:
        override = problem.delta_override
    delta, _ = derive_delta(best.structure, best.behavior, override)
    return Realization(best, delta, problem=problem)


def check_linkage(r: Realization) -> ValidationReport:
    """Every δ pair that touches a capability class must stay inside that class."""
    p = r.linkage
    if p is None:
        return ValidationReport(())
    findings = []
    for s, b in sorted(r.delta.items()):
        cls_s = {c for c in p.apex_table if (LEFT, s) in p.class_table[c]}
        cls_b = {c for c in p.apex_table if (RIGHT, b) in p.class_table[c]}
        if (cls_s or cls_b) and not (cls_s & cls_b):
            findings.append(Finding("delta_unlinked", s, f"{s} -> {b} crosses capability classes"))
    return ValidationReport(tuple(findings))
