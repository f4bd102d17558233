"""Algebras over the wiring-diagram operad.

An algebra assigns to every box a finite set of *fillers* (capabilities,
subsystems or behaviours) and to every diagram a way of building a composite
filler of the outer box from one filler per occurrence.  Composite attributes
follow per-algebra combination rules; the defaults are ``cost = sum`` and
``performance = min`` (bottleneck), both of which make nested application agree
with application on the substituted diagram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, Union

from .errors import MissingChoice, UnknownBox, WrongBoxFiller
from .fincat import FinSet
from .report import Finding, ValidationReport
from .wiring import Box, WiringDiagram, substitute

__all__ = [
    "FILLER_KIND",
    "Filler",
    "CompositeFiller",
    "CombineRules",
    "Algebra",
    "list_fillers",
    "filler_set",
    "apply_algebra",
    "enumerate_composites",
    "saturate",
    "validate_algebra",
]

FILLER_KIND = {"capability": "capability", "structure": "subsystem", "behavior": "behavior"}

COST_RULES: dict[str, Callable] = {
    "sum": lambda xs: math.fsum(xs),
    "max": lambda xs: max(xs, default=0.0),
}
PERFORMANCE_RULES: dict[str, Callable] = {
    "min": lambda xs: min(xs, default=math.inf),
    "max": lambda xs: max(xs, default=0.0),
    "product": lambda xs: math.prod(xs),
}


@dataclass(frozen=True)
class Filler:
    name: str
    box: str
    kind: str
    attributes: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "attributes", dict(self.attributes))

    @property
    def cost(self) -> float:
        return float(self.attributes.get("cost", 0.0))

    @property
    def performance(self) -> float:
        return float(self.attributes.get("performance", 0.0))

    @property
    def label(self) -> str:
        return self.name

    def used_names(self) -> frozenset[str]:
        return frozenset((self.name,))

    def choices(self, prefix: str = "") -> dict[str, str]:
        return {}

    def leaves(self, path: str = "") -> Iterator[tuple[str, "Filler"]]:
        yield path, self


@dataclass(frozen=True)
class CompositeFiller:
    """``F(φ)(f_1, ..., f_n)``: a filler of ``diagram.outer`` built from one part per occurrence."""

    name: str
    box: str
    kind: str
    diagram: WiringDiagram
    parts: tuple[tuple[str, Union[Filler, "CompositeFiller"]], ...]
    cost: float
    performance: float

    @property
    def attributes(self) -> dict[str, float]:
        return {"cost": self.cost, "performance": self.performance}

    @property
    def label(self) -> str:
        return f"{self.name}({','.join(f'{o}={p.label}' for o, p in self.parts)})"

    def part(self, occurrence: str):
        for o, p in self.parts:
            if o == occurrence:
                return p
        raise KeyError(occurrence)

    def used_names(self) -> frozenset[str]:
        out = {self.name}
        for _, p in self.parts:
            out |= p.used_names()
        return frozenset(out)

    def choices(self, prefix: str = "") -> dict[str, str]:
        """Filler name at every occurrence path below this composite, composites included."""
        out: dict[str, str] = {}
        for o, p in self.parts:
            path = prefix + o
            out[path] = p.name
            out.update(p.choices(path + "."))
        return out

    def leaves(self, path: str = "") -> Iterator[tuple[str, Filler]]:
        for o, p in self.parts:
            yield from p.leaves(f"{path}.{o}" if path else o)

    def flatten(self) -> WiringDiagram:
        """The diagram with every composite part replaced by its own flattened diagram."""
        wd = self.diagram
        for o, p in self.parts:
            if isinstance(p, CompositeFiller):
                wd = substitute(wd, o, p.flatten())
        return wd


AnyFiller = Union[Filler, CompositeFiller]


@dataclass(frozen=True)
class CombineRules:
    cost: str = "sum"
    performance: str = "min"

    def __post_init__(self):
        if self.cost not in COST_RULES:
            raise ValueError(f"unknown cost rule {self.cost!r}; choose from {sorted(COST_RULES)}")
        if self.performance not in PERFORMANCE_RULES:
            raise ValueError(f"unknown performance rule {self.performance!r}; choose from {sorted(PERFORMANCE_RULES)}")


@dataclass(frozen=True)
class Algebra:
    name: str
    kind: str
    boxes: Mapping[str, Box]
    assignment: Mapping[str, tuple[AnyFiller, ...]]
    combine: CombineRules = CombineRules()

    def __post_init__(self):
        object.__setattr__(self, "boxes", dict(self.boxes))
        object.__setattr__(self, "assignment", {b: tuple(fs) for b, fs in dict(self.assignment).items()})

    @property
    def filler_kind(self) -> str:
        return FILLER_KIND[self.kind]

    def fillers(self) -> Iterator[AnyFiller]:
        for fs in self.assignment.values():
            yield from fs

    def find(self, box: str, name: str) -> Optional[AnyFiller]:
        for f in self.assignment.get(box, ()):
            if f.name == name or f.label == name:
                return f
        return None

    def with_fillers(self, *fillers: AnyFiller) -> "Algebra":
        assignment = dict(self.assignment)
        for f in fillers:
            if f.box not in self.boxes:
                raise UnknownBox(f"{self.name}: box {f.box!r} is not registered")
            if any(g.label == f.label for g in assignment.get(f.box, ())):
                continue
            assignment[f.box] = assignment.get(f.box, ()) + (f,)
        return Algebra(self.name, self.kind, self.boxes, assignment, self.combine)

    def without(self, name: str) -> "Algebra":
        """Drop every filler called ``name`` and every composite that uses it."""
        assignment = {b: tuple(f for f in fs if name not in f.used_names()) for b, fs in self.assignment.items()}
        return Algebra(self.name, self.kind, self.boxes, assignment, self.combine)


def _box_name(box: Union[Box, str]) -> str:
    return box.name if isinstance(box, Box) else box


def list_fillers(alg: Algebra, box: Union[Box, str]) -> tuple[AnyFiller, ...]:
    b = _box_name(box)
    if b not in alg.boxes:
        raise UnknownBox(f"{alg.name}: box {b!r} is not registered")
    return alg.assignment.get(b, ())


def filler_set(alg: Algebra, box: Union[Box, str]) -> FinSet:
    return FinSet(f"{alg.name}({_box_name(box)})", [f.label for f in list_fillers(alg, box)])


def apply_algebra(
    alg: Algebra, wd: WiringDiagram, choice: Mapping[str, Union[AnyFiller, str]], name: Optional[str] = None
) -> CompositeFiller:
    """Build the composite filler of ``wd.outer`` from one filler per occurrence.

    ``choice`` maps occurrence names to fillers (or filler names/labels) of
    ``alg``.  The result is not added to ``alg``; use :meth:`Algebra.with_fillers`
    to nest it.
    """
    parts = []
    for occ in wd.inner:
        if occ.name not in choice:
            raise MissingChoice(f"no filler chosen for occurrence {occ.name!r} of {wd.name!r}")
        f = choice[occ.name]
        if isinstance(f, str):
            found = alg.find(occ.box.name, f)
            if found is None:
                raise WrongBoxFiller(f"{alg.name} has no filler {f!r} for box {occ.box.name!r}")
            f = found
        if f.box != occ.box.name:
            raise WrongBoxFiller(f"{f.name!r} fills box {f.box!r}, not {occ.box.name!r} at {occ.name!r}")
        if not any(g.label == f.label for g in alg.assignment.get(occ.box.name, ())):
            raise WrongBoxFiller(f"{f.label!r} is not a filler of {occ.box.name!r} in {alg.name}")
        parts.append((occ.name, f))
    return _compose(alg, wd, tuple(parts), name)


def _compose(alg: Algebra, wd: WiringDiagram, parts, name) -> CompositeFiller:
    cost = COST_RULES[alg.combine.cost]([p.cost for _, p in parts])
    perf = PERFORMANCE_RULES[alg.combine.performance]([p.performance for _, p in parts])
    return CompositeFiller(name or wd.name, wd.outer.name, alg.filler_kind, wd, parts, cost, perf)


def enumerate_composites(alg: Algebra, wd: WiringDiagram, name: Optional[str] = None) -> tuple[CompositeFiller, ...]:
    """One composite per element of the product of the occurrences' filler sets."""
    pools = [list_fillers(alg, o.box) for o in wd.inner]
    names = wd.occurrence_names()
    return tuple(_compose(alg, wd, tuple(zip(names, combo)), name) for combo in product(*pools))


def saturate(alg: Algebra, decompositions: Sequence[tuple[WiringDiagram, Optional[str]]]) -> Algebra:
    """Register the composites of every decomposition diagram, innermost first.

    ``decompositions`` pairs each diagram with the composite name to use.  A
    diagram is processed after every diagram whose outer box it uses.
    """
    providers: dict[str, list[int]] = {}
    for i, (wd, _) in enumerate(decompositions):
        providers.setdefault(wd.outer.name, []).append(i)

    order: list[int] = []
    state: dict[int, int] = {}

    def visit(i: int, stack: tuple):
        if state.get(i) == 2:
            return
        if state.get(i) == 1:
            cycle = " -> ".join(decompositions[j][0].name for j in stack + (i,))
            raise ValueError(f"decompositions are cyclic: {cycle}")
        state[i] = 1
        for o in decompositions[i][0].inner:
            for j in providers.get(o.box.name, ()):
                visit(j, stack + (i,))
        state[i] = 2
        order.append(i)

    for i in range(len(decompositions)):
        visit(i, ())
    for i in order:
        wd, name = decompositions[i]
        alg = alg.with_fillers(*enumerate_composites(alg, wd, name))
    return alg


def validate_algebra(alg: Algebra) -> ValidationReport:
    out: list[Finding] = []
    for box, fillers in alg.assignment.items():
        if box not in alg.boxes:
            out.append(Finding("unknown_box", box, f"{alg.name} assigns fillers to unregistered box {box}"))
        labels = [f.label for f in fillers]
        if len(set(labels)) != len(labels):
            out.append(Finding("duplicate_filler", box, f"{alg.name} repeats a filler of {box}"))
        for f in fillers:
            subject = f"{box}/{f.label}"
            if f.box != box:
                out.append(Finding("wrong_box", subject, f"{f.name} is declared for {f.box}"))
            if f.kind != alg.filler_kind:
                out.append(Finding("wrong_kind", subject, f"{f.name} is a {f.kind}, expected {alg.filler_kind}"))
            if f.cost < 0:
                out.append(Finding("negative_cost", subject, f"cost {f.cost} < 0"))
            if f.performance < 0:
                out.append(Finding("negative_performance", subject, f"performance {f.performance} < 0"))
    return ValidationReport(tuple(out))
