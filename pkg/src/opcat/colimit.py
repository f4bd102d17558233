"""Pushouts of spans of finite sets.

Given ``X <-f- A -g-> Y`` the pushout object is ``X ⊔ Y`` quotiented by the
equivalence generated by ``f(a) ~ g(a)``.  Classes are computed with a
union-find and named mechanically: the sorted, de-duplicated labels of the
class members (elements of ``X``, ``Y`` and of the apex elements landing in the
class) joined with ``+``.

Partial legs are completed freely: each apex element a leg leaves unmapped
gets a private fresh element in that leg's codomain.  Fresh elements never
show up in names or in the class table; only the apex element they stand for
does.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Union

from .errors import InconsistentCocone, MalformedSpan, NotACocone
from .fincat import FinFunction, FinSet, PartialFinFunction

__all__ = [
    "UnionFind",
    "Span",
    "Cocone",
    "PushoutResult",
    "pushout",
    "pushout_partial",
    "universal_morphism",
    "span_from_mappings",
    "class_by_members",
]

LEFT, RIGHT = "left", "right"
_FRESH_LEFT, _FRESH_RIGHT = "left*", "right*"

Leg = Union[FinFunction, PartialFinFunction]


class UnionFind:
    """Disjoint sets with path compression and union by size.

    When two roots have the same size the smaller key (in Python ordering)
    becomes the root, so the structure is deterministic.
    """

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: dict = {}
        self.size: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if (self.size[rx], ry) < (self.size[ry], rx):
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size.pop(ry)
        return rx

    def groups(self) -> dict:
        out = defaultdict(list)
        for x in self.parent:
            out[self.find(x)].append(x)
        return dict(out)


@dataclass(frozen=True)
class Span:
    """``X <-left- apex -right-> Y``."""

    apex: FinSet
    left: Leg
    right: Leg
    name: str = ""

    def __post_init__(self):
        for side, leg in ((LEFT, self.left), (RIGHT, self.right)):
            if not isinstance(leg, PartialFinFunction):
                raise MalformedSpan(f"{side} leg is not a finite function")
            if leg.domain != self.apex:
                raise MalformedSpan(
                    f"{side} leg has domain {leg.domain.name!r}, expected the apex {self.apex.name!r}"
                )

    @property
    def is_total(self) -> bool:
        return self.left.is_total and self.right.is_total


@dataclass(frozen=True)
class Cocone:
    target: FinSet
    leg_left: FinFunction
    leg_right: FinFunction
    name: str = ""


@dataclass(frozen=True)
class PushoutResult:
    """Pushout object, its two injections, and the provenance of each class.

    ``class_table`` partitions ``X ⊔ Y``: each entry is a ``(side, label)``
    pair with ``side`` in ``{"left", "right"}``.  ``apex_table`` lists the
    apex elements whose images land in each class.
    """

    span: Span
    object: FinSet
    inj_left: FinFunction
    inj_right: FinFunction
    class_table: Mapping[str, tuple[tuple[str, str], ...]]
    apex_table: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def members(self, cls: str) -> tuple[str, ...]:
        """Labels of everything glued into ``cls``: X and Y elements plus apex elements."""
        labels = {label for _, label in self.class_table[cls]} | set(self.apex_table.get(cls, ()))
        return tuple(sorted(labels))

    def class_of(self, side: str, label: str) -> str:
        return (self.inj_left if side == LEFT else self.inj_right)(label)

    def classes(self) -> dict[str, tuple[str, ...]]:
        return {c: self.members(c) for c in self.object}

    def as_cocone(self) -> Cocone:
        return Cocone(self.object, self.inj_left, self.inj_right, name="pushout")

    def commutes(self) -> bool:
        left, right = self.span.left, self.span.right
        return all(
            self.inj_left(left(a)) == self.inj_right(right(a))
            for a in self.span.apex
            if left.defined(a) and right.defined(a)
        )


def _class_name(labels: Iterable[str]) -> str:
    return "+".join(sorted(set(labels)))


def _glue(span: Span) -> PushoutResult:
    X, Y, A = span.left.codomain, span.right.codomain, span.apex
    nodes = [(LEFT, x) for x in X] + [(RIGHT, y) for y in Y]
    uf = UnionFind(nodes)
    apex_node: dict[str, tuple] = {}
    for a in A:
        fa = (LEFT, span.left(a)) if span.left.defined(a) else (_FRESH_LEFT, a)
        ga = (RIGHT, span.right(a)) if span.right.defined(a) else (_FRESH_RIGHT, a)
        uf.add(fa)
        uf.add(ga)
        uf.union(fa, ga)
        apex_node[a] = fa

    # class order: first member in X-then-Y order, then fully-fresh classes in apex order
    order: list = []
    seen = set()
    for n in nodes + [apex_node[a] for a in A]:
        r = uf.find(n)
        if r not in seen:
            seen.add(r)
            order.append(r)
    groups = uf.groups()
    apex_by_root: dict = defaultdict(list)
    for a in A:
        apex_by_root[uf.find(apex_node[a])].append(a)

    raw = []
    for r in order:
        real = tuple(n for n in groups[r] if n[0] in (LEFT, RIGHT))
        real = tuple(sorted(real, key=lambda n: (n[0] != LEFT, n[1])))
        labels = [n[1] for n in real] + apex_by_root[r]
        raw.append((r, real, tuple(apex_by_root[r]), _class_name(labels)))

    names = _disambiguate(raw)
    name_of_root = {r: n for (r, *_), n in zip(raw, names)}
    obj = FinSet(f"{X.name}+_{A.name}{Y.name}", names)
    inj_left = FinFunction(X, obj, {x: name_of_root[uf.find((LEFT, x))] for x in X})
    inj_right = FinFunction(Y, obj, {y: name_of_root[uf.find((RIGHT, y))] for y in Y})
    class_table = {n: real for (_, real, _, _), n in zip(raw, names)}
    apex_table = {n: apex for (_, _, apex, _), n in zip(raw, names) if apex}
    return PushoutResult(span, obj, inj_left, inj_right, class_table, apex_table)


def _disambiguate(raw) -> list[str]:
    """Suffix colliding class names with the sides that contribute to them, then with a counter."""
    names = [n for *_, n in raw]
    counts = defaultdict(int)
    for n in names:
        counts[n] += 1
    out = []
    for (_, real, apex, n) in raw:
        if counts[n] > 1:
            sides = sorted({side for side, _ in real} | ({"apex"} if apex else set()))
            n = f"{n}@{','.join(sides)}"
        out.append(n)
    counts = defaultdict(int)
    for n in out:
        counts[n] += 1
    seen = defaultdict(int)
    final = []
    for n in out:
        if counts[n] > 1:
            seen[n] += 1
            n = f"{n}#{seen[n]}"
        final.append(n)
    return final


def pushout(span: Span) -> PushoutResult:
    """Pushout of a span whose legs are both total."""
    if not span.is_total:
        missing = span.left.unmapped() + span.right.unmapped()
        raise MalformedSpan(f"pushout needs total legs; undefined on {sorted(set(missing))}")
    return _glue(span)


def pushout_partial(span: Span) -> PushoutResult:
    """Pushout after free completion of both legs.  On total spans this is :func:`pushout`."""
    return _glue(span)


def universal_morphism(p: PushoutResult, c: Cocone) -> FinFunction:
    """The unique ``u: object -> T`` with ``u ∘ inj_left = l_x`` and ``u ∘ inj_right = l_y``."""
    span = p.span
    X, Y = span.left.codomain, span.right.codomain
    if list(c.leg_left.domain) != list(X) or list(c.leg_right.domain) != list(Y):
        raise NotACocone("cocone legs do not start at the span's feet")
    if list(c.leg_left.codomain) != list(c.target) or list(c.leg_right.codomain) != list(c.target):
        raise NotACocone("cocone legs do not land in the cocone target")
    for a in span.apex:
        if span.left.defined(a) and span.right.defined(a):
            lx, ly = c.leg_left(span.left(a)), c.leg_right(span.right(a))
            if lx != ly:
                raise NotACocone(f"square fails at apex element {a!r}: l_x gives {lx!r}, l_y gives {ly!r}")
    u = {}
    for cls in p.object:
        images = {(c.leg_left if side == LEFT else c.leg_right)(label) for side, label in p.class_table[cls]}
        if len(images) > 1:
            raise InconsistentCocone(f"class {cls!r} would map to {sorted(images)}")
        if not images:
            raise NotACocone(f"class {cls!r} has no element of X or Y, so the legs do not determine u there")
        u[cls] = images.pop()
    return FinFunction(p.object, c.target, u)


def span_from_mappings(
    apex: FinSet, left_codomain: FinSet, left: Mapping[str, str], right_codomain: FinSet, right: Mapping[str, str],
    name: str = "",
) -> Span:
    """Convenience constructor; a leg is total exactly when its mapping covers the apex."""

    def leg(cod, m):
        f = PartialFinFunction(apex, cod, m)
        return f.to_total() if f.is_total else f

    return Span(apex, leg(left_codomain, left), leg(right_codomain, right), name)


def class_by_members(p: PushoutResult) -> dict[frozenset, str]:
    """Inverse lookup from member-label sets to class names."""
    return {frozenset(p.members(c)): c for c in p.object}


def alias_for(p: PushoutResult, aliases: Optional[Mapping[str, str]], cls: str) -> str:
    return (aliases or {}).get(cls, cls)
