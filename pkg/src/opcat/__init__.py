"""Finite categories, FinSet pushouts and wiring-diagram operads for modelling robot systems.

The bundled Marathon 2 model (a TIAGo robot running the Nav2 stack) exercises
every layer: composition by substitution, design selection over operad
algebras, and recovery plans checked by a naturality square.
"""
from .algebra import Algebra, CompositeFiller, Filler, apply_algebra, enumerate_composites, list_fillers, saturate
from .colimit import Cocone, PushoutResult, Span, pushout, pushout_partial, universal_morphism
from .design import Design, Realization, RequirementMap, design_pushout, enumerate_designs, select_realization
from .fincat import (
    CatFunctor,
    FinCategory,
    FinFunction,
    FinSet,
    NatTransformation,
    PartialFinFunction,
    compose,
    validate_category,
    validate_functor,
    validate_natural_transformation,
)
from .recovery import (
    Contingency,
    RecoveryAction,
    RecoveryPlan,
    apply_recovery,
    detect_impact,
    propose_recoveries,
    validate_recovery,
)
from .report import Finding, ValidationReport
from .wiring import Box, Port, ResourceType, WiringDiagram, canonical_form, substitute, validate_diagram

__all__ = [
    "Algebra",
    "CompositeFiller",
    "Filler",
    "apply_algebra",
    "enumerate_composites",
    "list_fillers",
    "saturate",
    "Cocone",
    "PushoutResult",
    "Span",
    "pushout",
    "pushout_partial",
    "universal_morphism",
    "Design",
    "Realization",
    "RequirementMap",
    "design_pushout",
    "enumerate_designs",
    "select_realization",
    "CatFunctor",
    "FinCategory",
    "FinFunction",
    "FinSet",
    "NatTransformation",
    "PartialFinFunction",
    "compose",
    "validate_category",
    "validate_functor",
    "validate_natural_transformation",
    "Contingency",
    "RecoveryAction",
    "RecoveryPlan",
    "apply_recovery",
    "detect_impact",
    "propose_recoveries",
    "validate_recovery",
    "Finding",
    "ValidationReport",
    "Box",
    "Port",
    "ResourceType",
    "WiringDiagram",
    "canonical_form",
    "substitute",
    "validate_diagram",
    "__version__",
]

__version__ = "0.1.0"
