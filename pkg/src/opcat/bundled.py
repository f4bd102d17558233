"""Small categories, functors and transformations shipped for demos and law checks."""
from __future__ import annotations

from typing import Optional

from .fincat import (
    CatFunctor,
    FinCategory,
    NatTransformation,
    discrete_category,
    free_category,
    preorder_category,
)
from .wiring import WiringDiagram, resource_flow_category

__all__ = [
    "terminal",
    "walking_arrow",
    "span_shape",
    "commuting_square",
    "chain3",
    "bundled_categories",
    "arrow_into_chain",
    "arrow_onto_composite",
    "chain_transformation",
]


def terminal() -> FinCategory:
    return discrete_category("1", ["*"])


def walking_arrow() -> FinCategory:
    return free_category("2", ["X", "Y"], [("f", "X", "Y")])


def span_shape() -> FinCategory:
    """The indexing shape ``X <- A -> Y`` of a pushout."""
    return free_category("span", ["A", "X", "Y"], [("f", "A", "X"), ("g", "A", "Y")])


def commuting_square() -> FinCategory:
    """A thin square ``A -> X -> P``, ``A -> Y -> P``; both routes agree by thinness."""
    return preorder_category("square", ["A", "X", "Y", "P"], [("A", "X"), ("A", "Y"), ("X", "P"), ("Y", "P")])


def chain3() -> FinCategory:
    return free_category("chain3", ["X", "Y", "Z"], [("f", "X", "Y"), ("g", "Y", "Z")])


def bundled_categories(flow: Optional[WiringDiagram] = None) -> list[FinCategory]:
    """Every shipped category; pass a diagram to include its resource-flow preorder."""
    cats = [terminal(), walking_arrow(), span_shape(), commuting_square(), chain3()]
    if flow is not None:
        cats.append(resource_flow_category(flow))
    return cats


def arrow_into_chain() -> CatFunctor:
    """``F: 2 -> chain3`` picking out ``f``."""
    return CatFunctor("F", walking_arrow(), chain3(), {"X": "X", "Y": "Y"}, {"id_X": "id_X", "id_Y": "id_Y", "f": "f"})


def arrow_onto_composite() -> CatFunctor:
    """``G: 2 -> chain3`` picking out ``g ∘ f``."""
    return CatFunctor("G", walking_arrow(), chain3(), {"X": "X", "Y": "Z"}, {"id_X": "id_X", "id_Y": "id_Z", "f": "f;g"})


def chain_transformation() -> NatTransformation:
    """``α: F => G`` with ``α_X = id_X`` and ``α_Y = g``; its only square is ``g ∘ f = (g ∘ f) ∘ id``."""
    return NatTransformation("alpha", arrow_into_chain(), arrow_onto_composite(), {"X": "id_X", "Y": "g"})
