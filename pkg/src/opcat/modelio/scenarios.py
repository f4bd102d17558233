"""Running scenarios: propose recoveries for a contingency and compare with the expectations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..design import Realization
from ..recovery import RecoveryPlan, bind, propose_recoveries
from .model import Model, Scenario

__all__ = ["ScenarioResult", "run_scenario", "run_scenarios"]


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    passed: bool
    checks: tuple[tuple[str, bool, str], ...]
    proposals: tuple[RecoveryPlan, ...]
    extra: tuple[RecoveryPlan, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.name,
            "passed": self.passed,
            "checks": [{"check": c, "passed": ok, "detail": d} for c, ok, d in self.checks],
            "ranking": [p.name for p in self.proposals],
        }


def run_scenario(model: Model, scenario: Scenario, realization: Optional[Realization] = None) -> ScenarioResult:
    r = realization if realization is not None else model.realize()
    proposals = tuple(propose_recoveries(r, scenario.contingency, model.catalog))
    extra = tuple(bind(r, p, scenario.contingency) for p in scenario.plans)
    by_name = {p.name: p for p in proposals + extra}

    def lookup(name: str) -> Optional[RecoveryPlan]:
        if name in by_name:
            return by_name[name]
        for p in model.catalog:
            if p.name == name:
                by_name[name] = bind(r, p, scenario.contingency)
                return by_name[name]
        return None

    exp = scenario.expected
    checks: list[tuple[str, bool, str]] = []
    if "first_valid" in exp:
        first = next((p.name for p in proposals if p.verdict.ok), None)
        checks.append(("first_valid", first == exp["first_valid"], f"got {first}, expected {exp['first_valid']}"))
    if "ranking" in exp:
        got = [p.name for p in proposals[: len(exp["ranking"])]]
        checks.append(("ranking", got == list(exp["ranking"]), f"got {got}"))
    for name, items in exp.get("side_effects_include", {}).items():
        p = lookup(name)
        missing = sorted(set(items) - set(p.side_effects)) if p else list(items)
        checks.append((f"side_effects:{name}", p is not None and not missing, f"missing {missing}" if missing else "ok"))
    for name, keys in exp.get("invalid", {}).items():
        p = lookup(name)
        got = p.verdict.keys() if p else None
        checks.append((f"invalid:{name}", got == list(keys), f"got {got}"))
    for name in exp.get("valid", []):
        p = lookup(name)
        ok = p is not None and p.verdict.ok
        checks.append((f"valid:{name}", ok, "ok" if ok else f"got {p.verdict.keys() if p else 'no such plan'}"))
    passed = all(ok for _, ok, _ in checks)
    return ScenarioResult(scenario.name, passed, tuple(checks), proposals, extra)


def run_scenarios(model: Model, names=None) -> list[ScenarioResult]:
    r = model.realize()
    chosen = list(model.scenarios) if names is None else list(names)
    return [run_scenario(model, model.scenarios[n], r) for n in chosen]
