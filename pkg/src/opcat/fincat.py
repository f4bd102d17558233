"""Finite sets, finite categories, functors and natural transformations.

Categories are given extensionally: every morphism is listed and the
composition table holds one entry per composable pair.  Nothing is assumed
about the laws; constructors accept any data and the ``validate_*`` functions
check identity, unitality, associativity, functoriality and naturality by
exhaustive enumeration.

Composition tables are keyed in diagrammatic order: ``composition[(f, g)]`` is
the morphism ``g ∘ f`` (first ``f``, then ``g``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import MalformedTable, MissingEntry, NotComposable
from .report import Finding, ValidationReport

__all__ = [
    "FinSet",
    "PartialFinFunction",
    "FinFunction",
    "Morphism",
    "FinCategory",
    "CatFunctor",
    "NatTransformation",
    "validate_category",
    "compose",
    "validate_functor",
    "validate_natural_transformation",
    "discrete_category",
    "free_category",
    "preorder_category",
    "identity_functor",
    "constant_functor",
    "compose_functors",
    "identity_transformation",
    "vertical_compose",
]


# --------------------------------------------------------------------------
# FinSet


@dataclass(frozen=True)
class FinSet:
    """A named finite set of string labels, ordered by declaration."""

    name: str
    elements: tuple[str, ...] = ()

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if len(set(elements)) != len(elements):
            seen, dupes = set(), []
            for e in elements:
                if e in seen:
                    dupes.append(e)
                seen.add(e)
            raise MalformedTable(f"FinSet {self.name!r} has duplicate elements {dupes}")

    def __contains__(self, item) -> bool:
        return item in self._members

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.elements)


@dataclass(frozen=True)
class PartialFinFunction:
    """A map between finite sets that may leave domain elements unmapped."""

    domain: FinSet
    codomain: FinSet
    mapping: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        mapping = dict(self.mapping)
        object.__setattr__(self, "mapping", mapping)
        for x, y in mapping.items():
            if x not in self.domain:
                raise MalformedTable(f"{x!r} is not in the domain {self.domain.name!r}")
            if y not in self.codomain:
                raise MalformedTable(f"image {y!r} of {x!r} is not in the codomain {self.codomain.name!r}")

    def __call__(self, x: str) -> str:
        return self.mapping[x]

    def get(self, x: str) -> Optional[str]:
        return self.mapping.get(x)

    def defined(self, x: str) -> bool:
        return x in self.mapping

    @property
    def is_total(self) -> bool:
        return all(x in self.mapping for x in self.domain)

    def unmapped(self) -> list[str]:
        return [x for x in self.domain if x not in self.mapping]

    def to_total(self) -> "FinFunction":
        return FinFunction(self.domain, self.codomain, self.mapping)


@dataclass(frozen=True)
class FinFunction(PartialFinFunction):
    """A total function between finite sets."""

    def __post_init__(self):
        super().__post_init__()
        missing = self.unmapped()
        if missing:
            raise MalformedTable(f"function {self.domain.name!r} -> {self.codomain.name!r} is undefined on {missing}")

    def then(self, other: "FinFunction") -> "FinFunction":
        """``other ∘ self``."""
        if list(other.domain) != list(self.codomain):
            raise NotComposable(f"codomain {self.codomain.name!r} does not match domain {other.domain.name!r}")
        return FinFunction(self.domain, other.codomain, {x: other(self(x)) for x in self.domain})

    @classmethod
    def identity(cls, s: FinSet) -> "FinFunction":
        return cls(s, s, {x: x for x in s})


# --------------------------------------------------------------------------
# Categories


@dataclass(frozen=True)
class Morphism:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class FinCategory:
    name: str
    objects: tuple[str, ...]
    morphisms: tuple[Morphism, ...]
    identities: Mapping[str, str]
    composition: Mapping[tuple[str, str], str]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(
            self, "morphisms", tuple(m if isinstance(m, Morphism) else Morphism(*m) for m in self.morphisms)
        )
        object.__setattr__(self, "identities", dict(self.identities))
        object.__setattr__(self, "composition", {tuple(k): v for k, v in dict(self.composition).items()})

    @cached_property
    def _by_name(self) -> dict[str, Morphism]:
        return {m.name: m for m in self.morphisms}

    def morphism(self, name: str) -> Morphism:
        try:
            return self._by_name[name]
        except KeyError:
            raise MalformedTable(f"{self.name}: undeclared morphism {name!r}") from None

    def has_morphism(self, name: str) -> bool:
        return name in self._by_name

    def source(self, name: str) -> str:
        return self.morphism(name).source

    def target(self, name: str) -> str:
        return self.morphism(name).target

    def hom(self, x: str, y: str) -> list[str]:
        return [m.name for m in self.morphisms if m.source == x and m.target == y]

    def composable_pairs(self) -> Iterator[tuple[str, str]]:
        for f, g in product(self.morphisms, repeat=2):
            if f.target == g.source:
                yield f.name, g.name

    def lookup(self, f: str, g: str) -> Optional[str]:
        return self.composition.get((f, g))


def _check_category_tables(cat: FinCategory) -> None:
    if len(set(cat.objects)) != len(cat.objects):
        raise MalformedTable(f"{cat.name}: duplicate object ids")
    names = [m.name for m in cat.morphisms]
    if len(set(names)) != len(names):
        raise MalformedTable(f"{cat.name}: duplicate morphism ids")
    objects = set(cat.objects)
    for m in cat.morphisms:
        if m.source not in objects or m.target not in objects:
            raise MalformedTable(f"{cat.name}: morphism {m.name!r} references an undeclared object")
    declared = set(names)
    for x, i in cat.identities.items():
        if x not in objects:
            raise MalformedTable(f"{cat.name}: identity declared for undeclared object {x!r}")
        if i not in declared:
            raise MalformedTable(f"{cat.name}: identity of {x!r} is the undeclared morphism {i!r}")
    for (f, g), h in cat.composition.items():
        for m in (f, g, h):
            if m not in declared:
                raise MalformedTable(f"{cat.name}: composition entry ({f}, {g}) -> {h} references undeclared {m!r}")


def validate_category(cat: FinCategory) -> ValidationReport:
    """Check identity, unitality and associativity exhaustively.

    Raises :class:`MalformedTable` when the tables mention undeclared ids.
    A law instance whose composite is undefined counts as violated.
    """
    _check_category_tables(cat)
    out: list[Finding] = []
    ids = cat.identities

    for x in cat.objects:
        i = ids.get(x)
        if i is None:
            out.append(Finding("missing_identity", x, f"object {x} has no identity"))
        elif (cat.source(i), cat.target(i)) != (x, x):
            out.append(Finding("bad_identity", x, f"{i} is not an endomorphism of {x}"))

    for f, g in cat.composable_pairs():
        h = cat.lookup(f, g)
        if h is None:
            out.append(Finding("missing_composite", f"({f},{g})", f"{g}∘{f} is not in the table"))
        elif (cat.source(h), cat.target(h)) != (cat.source(f), cat.target(g)):
            out.append(
                Finding(
                    "ill_typed_composite",
                    f"({f},{g})",
                    f"{g}∘{f} = {h} has type {cat.source(h)}->{cat.target(h)}, "
                    f"expected {cat.source(f)}->{cat.target(g)}",
                )
            )
    for f, g in cat.composition:
        if cat.target(f) != cat.source(g):
            out.append(Finding("extraneous_composite", f"({f},{g})", f"{f} and {g} are not composable"))

    for m in cat.morphisms:
        left = cat.lookup(ids[m.source], m.name) if m.source in ids else None
        if left != m.name:
            out.append(Finding("unitality", f"{m.name}∘id_{m.source}", f"got {left}, expected {m.name}"))
        right = cat.lookup(m.name, ids[m.target]) if m.target in ids else None
        if right != m.name:
            out.append(Finding("unitality", f"id_{m.target}∘{m.name}", f"got {right}, expected {m.name}"))

    for f, g, h in product(cat.morphisms, repeat=3):
        if f.target != g.source or g.target != h.source:
            continue
        gf = cat.lookup(f.name, g.name)
        hg = cat.lookup(g.name, h.name)
        lhs = cat.lookup(gf, h.name) if gf is not None else None
        rhs = cat.lookup(f.name, hg) if hg is not None else None
        if lhs is None or lhs != rhs:
            out.append(
                Finding(
                    "associativity",
                    f"({f.name},{g.name},{h.name})",
                    f"(h∘g)∘f = {rhs} but h∘(g∘f) = {lhs}",
                )
            )
    return ValidationReport(tuple(out))


def compose(cat: FinCategory, f: str, g: str) -> str:
    """Return ``g ∘ f`` from the table."""
    mf, mg = cat.morphism(f), cat.morphism(g)
    if mf.target != mg.source:
        raise NotComposable(f"{f}: {mf.source}->{mf.target} and {g}: {mg.source}->{mg.target} do not compose")
    h = cat.lookup(f, g)
    if h is None:
        raise MissingEntry(f"{cat.name}: no composition entry for {g}∘{f}")
    return h


# --------------------------------------------------------------------------
# Builders


def discrete_category(name: str, objects: Iterable[str]) -> FinCategory:
    objects = tuple(objects)
    ids = {x: f"id_{x}" for x in objects}
    return FinCategory(
        name,
        objects,
        tuple(Morphism(ids[x], x, x) for x in objects),
        ids,
        {(ids[x], ids[x]): ids[x] for x in objects},
    )


def free_category(name: str, objects: Sequence[str], generators: Sequence[tuple[str, str, str]]) -> FinCategory:
    """Path category of an acyclic graph.

    Generators are ``(name, source, target)``.  Non-trivial paths are named by
    joining generator names with ``;`` in traversal order.
    """
    objects = tuple(objects)
    out_edges: dict[str, list[tuple[str, str]]] = {x: [] for x in objects}
    for g, s, t in generators:
        out_edges[s].append((g, t))

    paths: list[tuple[tuple[str, ...], str, str]] = []

    def walk(start, node, trail, seen):
        for g, t in out_edges[node]:
            if t in seen:
                raise ValueError(f"{name}: generators contain a cycle through {t}; the path category is infinite")
            p = trail + (g,)
            paths.append((p, start, t))
            walk(start, t, p, seen | {t})

    for x in objects:
        walk(x, x, (), {x})

    ids = {x: f"id_{x}" for x in objects}
    morphisms = [Morphism(ids[x], x, x) for x in objects]
    morphisms += [Morphism(";".join(p), s, t) for p, s, t in paths]
    path_of = {ids[x]: () for x in objects}
    path_of.update({";".join(p): p for p, _, _ in paths})
    by_path = {p: n for n, p in path_of.items() if p}

    table = {}
    for f, g in product(morphisms, repeat=2):
        if f.target != g.source:
            continue
        p = path_of[f.name] + path_of[g.name]
        table[(f.name, g.name)] = by_path[p] if p else ids[f.source]
    return FinCategory(name, objects, tuple(morphisms), ids, table)


def preorder_category(name: str, objects: Sequence[str], relations: Iterable[tuple[str, str]]) -> FinCategory:
    """Thin category of the reflexive-transitive closure of ``relations``."""
    objects = tuple(objects)
    reach = {x: {x} for x in objects}
    for a, b in relations:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for x in objects:
            new = set().union(*(reach[y] for y in reach[x]))
            if new - reach[x]:
                reach[x] |= new
                changed = True

    def arrow(x, y):
        return f"id_{x}" if x == y else f"{x}<={y}"

    morphisms = tuple(Morphism(arrow(x, y), x, y) for x in objects for y in objects if y in reach[x])
    ids = {x: arrow(x, x) for x in objects}
    table = {(f.name, g.name): arrow(f.source, g.target) for f, g in product(morphisms, repeat=2) if f.target == g.source}
    return FinCategory(name, objects, morphisms, ids, table)


# --------------------------------------------------------------------------
# Functors


@dataclass(frozen=True)
class CatFunctor:
    name: str
    source: FinCategory
    target: FinCategory
    object_map: Mapping[str, str]
    morphism_map: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "object_map", dict(self.object_map))
        object.__setattr__(self, "morphism_map", dict(self.morphism_map))

    def __call__(self, x: str) -> str:
        if x in self.morphism_map:
            return self.morphism_map[x]
        return self.object_map[x]


def _check_functor_tables(F: CatFunctor) -> None:
    src, tgt = F.source, F.target
    tgt_morphisms = {m.name for m in tgt.morphisms}
    for x in src.objects:
        if x not in F.object_map:
            raise MalformedTable(f"{F.name}: object map is undefined on {x!r}")
    for x, y in F.object_map.items():
        if x not in src.objects or y not in tgt.objects:
            raise MalformedTable(f"{F.name}: object map entry {x!r} -> {y!r} references an undeclared object")
    for m in src.morphisms:
        if m.name not in F.morphism_map:
            raise MalformedTable(f"{F.name}: morphism map is undefined on {m.name!r}")
    for f, g in F.morphism_map.items():
        if not src.has_morphism(f) or g not in tgt_morphisms:
            raise MalformedTable(f"{F.name}: morphism map entry {f!r} -> {g!r} references an undeclared morphism")


def validate_functor(F: CatFunctor) -> ValidationReport:
    """List every failure of typing, identity preservation and composition preservation."""
    _check_functor_tables(F)
    src, tgt = F.source, F.target
    out: list[Finding] = []
    for m in src.morphisms:
        img = tgt.morphism(F.morphism_map[m.name])
        want = (F.object_map[m.source], F.object_map[m.target])
        if (img.source, img.target) != want:
            out.append(
                Finding(
                    "ill_typed_image",
                    m.name,
                    f"F({m.name}) = {img.name}: {img.source}->{img.target}, expected {want[0]}->{want[1]}",
                )
            )
    for x in src.objects:
        i = src.identities.get(x)
        if i is None:
            continue
        got, want = F.morphism_map[i], tgt.identities.get(F.object_map[x])
        if got != want:
            out.append(Finding("identity", x, f"F(id_{x}) = {got}, expected {want}"))
    for f, g in src.composable_pairs():
        gf = src.lookup(f, g)
        if gf is None:
            continue
        lhs = F.morphism_map[gf]
        rhs = tgt.lookup(F.morphism_map[f], F.morphism_map[g])
        if lhs != rhs:
            out.append(Finding("composition", f"({f},{g})", f"F({g}∘{f}) = {lhs} but F({g})∘F({f}) = {rhs}"))
    return ValidationReport(tuple(out))


def identity_functor(cat: FinCategory) -> CatFunctor:
    return CatFunctor(
        f"id_{cat.name}", cat, cat, {x: x for x in cat.objects}, {m.name: m.name for m in cat.morphisms}
    )


def constant_functor(source: FinCategory, target: FinCategory, obj: str) -> CatFunctor:
    i = target.identities[obj]
    return CatFunctor(
        f"const_{obj}", source, target, {x: obj for x in source.objects}, {m.name: i for m in source.morphisms}
    )


def compose_functors(F: CatFunctor, G: CatFunctor) -> CatFunctor:
    """``G ∘ F``, composed tablewise."""
    if F.target != G.source:
        raise NotComposable(f"{F.name} lands in {F.target.name} but {G.name} starts at {G.source.name}")
    return CatFunctor(
        f"{G.name}∘{F.name}",
        F.source,
        G.target,
        {x: G.object_map[y] for x, y in F.object_map.items()},
        {f: G.morphism_map[g] for f, g in F.morphism_map.items()},
    )


# --------------------------------------------------------------------------
# Natural transformations


@dataclass(frozen=True)
class NatTransformation:
    name: str
    source_functor: CatFunctor
    target_functor: CatFunctor
    components: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "components", dict(self.components))


def _check_transformation_tables(alpha: NatTransformation) -> None:
    F, G = alpha.source_functor, alpha.target_functor
    if F.source != G.source or F.target != G.target:
        raise MalformedTable(f"{alpha.name}: {F.name} and {G.name} are not parallel functors")
    _check_functor_tables(F)
    _check_functor_tables(G)
    for c in F.source.objects:
        if c not in alpha.components:
            raise MalformedTable(f"{alpha.name}: no component at {c!r}")
    for c, m in alpha.components.items():
        if c not in F.source.objects or not F.target.has_morphism(m):
            raise MalformedTable(f"{alpha.name}: component {c!r} -> {m!r} references an undeclared id")


def validate_natural_transformation(alpha: NatTransformation) -> ValidationReport:
    """Check component typing and the naturality square of every source morphism."""
    _check_transformation_tables(alpha)
    F, G = alpha.source_functor, alpha.target_functor
    D = F.target
    out: list[Finding] = []
    for c in F.source.objects:
        a = D.morphism(alpha.components[c])
        want = (F.object_map[c], G.object_map[c])
        if (a.source, a.target) != want:
            out.append(
                Finding(
                    "ill_typed_component",
                    c,
                    f"α_{c} = {a.name}: {a.source}->{a.target}, expected {want[0]}->{want[1]}",
                )
            )
    for f in F.source.morphisms:
        a_c, a_d = alpha.components[f.source], alpha.components[f.target]
        lhs = D.lookup(F.morphism_map[f.name], a_d)
        rhs = D.lookup(a_c, G.morphism_map[f.name])
        if lhs is None or lhs != rhs:
            out.append(
                Finding(
                    "naturality",
                    f.name,
                    f"α_{f.target}∘F({f.name}) = {lhs} but G({f.name})∘α_{f.source} = {rhs}",
                )
            )
    return ValidationReport(tuple(out))


def identity_transformation(F: CatFunctor) -> NatTransformation:
    D = F.target
    return NatTransformation(f"id_{F.name}", F, F, {c: D.identities[F.object_map[c]] for c in F.source.objects})


def vertical_compose(alpha: NatTransformation, beta: NatTransformation) -> NatTransformation:
    """``β · α``: componentwise ``β_c ∘ α_c``."""
    if alpha.target_functor != beta.source_functor:
        raise NotComposable(f"{alpha.name} ends at {alpha.target_functor.name}, {beta.name} starts elsewhere")
    D = alpha.source_functor.target
    return NatTransformation(
        f"{beta.name}·{alpha.name}",
        alpha.source_functor,
        beta.target_functor,
        {c: compose(D, alpha.components[c], beta.components[c]) for c in alpha.source_functor.source.objects},
    )
