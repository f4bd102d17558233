"""Model files, the bundled corpus, DOT export and scenario runs."""
from .dot import export_dot
from .model import (
    SCHEMA_VERSION,
    DesignSpec,
    Model,
    Scenario,
    SpanSpec,
    bundled_model_path,
    dump_model,
    dumps_model,
    load_model,
    loads_model,
    to_document,
)
from .scenarios import ScenarioResult, run_scenario, run_scenarios

__all__ = [
    "SCHEMA_VERSION",
    "DesignSpec",
    "Model",
    "Scenario",
    "SpanSpec",
    "bundled_model_path",
    "dump_model",
    "dumps_model",
    "load_model",
    "loads_model",
    "to_document",
    "export_dot",
    "ScenarioResult",
    "run_scenario",
    "run_scenarios",
]
