"""Command-line interface: ``opcat <validate|pushout|compose|design|recover|scenario|export>``.

Exit codes: 0 on success, 1 when validation findings (or a failed scenario,
invalid plan, non-commuting cocone) are reported, 2 on usage, IO or lookup
errors.  Reports go to stdout and diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .colimit import pushout_partial, universal_morphism
from .design import enumerate_designs, pareto_front, select_realization
from .errors import InconsistentCocone, NotACocone, OpcatError, UnknownTarget
from .modelio import bundled_model_path, export_dot, load_model, run_scenarios
from .recovery import bind, propose_recoveries, simulate
from .wiring import canonical_form, substitute, validate_diagram, wire_multiset

ENV_MODEL = "OPCAT_MODEL_PATH"


class UsageError(Exception):
    pass


def _emit(args, human: list[str], machine) -> None:
    if args.json:
        print(json.dumps(machine, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for line in human:
            print(line)


def _resolve_model(path: Optional[str]) -> Path:
    if not path:
        path = os.environ.get(ENV_MODEL)
    if not path:
        raise UsageError(f"no model given and {ENV_MODEL} is not set")
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_model_path(Path(path).stem)
    if bundled.exists():
        return bundled
    raise UsageError(f"model file {path!r} not found")


def _split_positionals(args, n_after: int) -> tuple[Path, list[str]]:
    names = list(args.names)
    if len(names) == n_after:
        return _resolve_model(None), names
    if len(names) == n_after + 1:
        return _resolve_model(names[0]), names[1:]
    raise UsageError(f"expected [model] followed by {n_after} name(s), got {names}")


def _substitutions(items: Sequence[str]) -> list[tuple[str, str]]:
    out = []
    for item in items or ():
        occ, sep, inner = item.partition("=")
        if not sep or not occ or not inner:
            raise UsageError(f"--substitute expects occurrence=diagram, got {item!r}")
        out.append((occ, inner))
    return out


def _composed(model, name: str, subs):
    if name not in model.diagrams:
        raise UnknownTarget(f"no diagram {name!r}")
    wd = model.diagrams[name]
    for occ, inner in subs:
        if inner not in model.diagrams:
            raise UnknownTarget(f"no diagram {inner!r}")
        wd = substitute(wd, occ, model.diagrams[inner])
    return wd


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    model = load_model(_resolve_model(args.model))
    report = model.validate()
    human = [str(f) for f in report] + [f"{model.source}: {len(report)} finding(s)"]
    _emit(args, human, {"model": str(model.source), **report.to_dict()})
    return 0 if report.ok else 1


def cmd_pushout(args) -> int:
    path, (span_name,) = _split_positionals(args, 1)
    model = load_model(path)
    if span_name not in model.spans:
        raise UnknownTarget(f"no span {span_name!r}")
    spec = model.spans[span_name]
    p = pushout_partial(spec.span)
    classes = [
        {"class": c, "alias": spec.aliases.get(c, c), "members": list(p.members(c))} for c in p.object
    ]
    human = [f"{c['alias']}  {{{', '.join(c['members'])}}}" for c in classes]
    machine: dict = {"span": span_name, "classes": classes}
    code = 0
    if args.cocone:
        if args.cocone not in spec.cocones:
            raise UnknownTarget(f"span {span_name!r} has no cocone {args.cocone!r}")
        try:
            u = universal_morphism(p, spec.cocones[args.cocone])
            human.append(f"u: {spec.span.name or span_name} -> {spec.cocones[args.cocone].target.name}")
            human += [f"  {spec.aliases.get(c, c)} -> {u(c)}" for c in p.object]
            machine["u"] = {c: u(c) for c in p.object}
        except (NotACocone, InconsistentCocone) as e:
            human.append(f"not a cocone: {e}")
            machine["error"] = str(e)
            code = 1
    _emit(args, human, machine)
    return code


def cmd_compose(args) -> int:
    path, (name,) = _split_positionals(args, 1)
    model = load_model(path)
    wd = canonical_form(_composed(model, name, _substitutions(args.substitute)))
    report = validate_diagram(wd, model.resources)
    wires = wire_multiset(wd, model.resources)
    human = [f"diagram {wd.name}: {len(wd.inner)} box(es), {len(wires)} wire(s)"]
    human += [f"  box {o.name}: {o.box.name}" for o in wd.inner]
    human += [f"  wire {w}" for w in wires]
    human += [str(f) for f in report]
    _emit(args, human, {"diagram": wd.name, "boxes": [o.name for o in wd.inner], "wires": wires, **report.to_dict()})
    return 0 if report.ok else 1


def _design_dict(d) -> dict:
    return {
        "structure": d.structure.label,
        "behavior": d.behavior.label,
        "cost": d.cost,
        "performance": d.performance,
        "leaves": list(d.leaves("behavior")),
    }


def _design_lines(d) -> list[str]:
    return [
        f"design cost={d.cost:g} performance={d.performance:g}",
        f"  structure: {d.structure.label}",
        f"  behavior:  {d.behavior.label}",
    ]


def cmd_design(args) -> int:
    model = load_model(_resolve_model(args.model))
    space = enumerate_designs(model.design_problem(args.requirement))
    human = [str(f) for f in space.report]
    if args.all or args.pareto:
        chosen = pareto_front(space) if args.pareto else tuple(sorted(space, key=lambda d: (-d.performance, d.cost, d.name)))
        label = "pareto" if args.pareto else "designs"
        human.append(f"{len(chosen)} {label}")
        for d in chosen:
            human += _design_lines(d)
        _emit(args, human, {label: [_design_dict(d) for d in chosen], **space.report.to_dict()})
        return 0 if chosen else 1
    if not len(space):
        _emit(args, human + ["no valid design"], {"realization": None, **space.report.to_dict()})
        return 1
    r = select_realization(space)
    human.append("realization")
    human += _design_lines(r.design)
    human.append("  delta:")
    human += [f"    {s} -> {b}" for s, b in r.delta.items()]
    _emit(args, human, {"realization": {**_design_dict(r.design), "delta": r.delta}, **space.report.to_dict()})
    return 0


def cmd_recover(args) -> int:
    model = load_model(_resolve_model(args.model))
    conts = model.contingencies()
    if args.contingency not in conts:
        raise UnknownTarget(f"no contingency {args.contingency!r}; known: {sorted(conts)}")
    c = conts[args.contingency]
    r = model.realize()
    if args.plan is None:
        plans = propose_recoveries(r, c, model.catalog)
        human = [f"contingency {c.name} ({c.mode}) on {c.target}: {len(plans)} plan(s)"]
        for i, p in enumerate(plans, 1):
            verdict = "valid" if p.verdict.ok else "invalid: " + ", ".join(p.verdict.keys())
            human.append(f"{i}. {p.name} [{verdict}]")
            human += [f"     side effect {s}" for s in sorted(p.side_effects)]
        machine = {
            "contingency": c.name,
            "plans": [
                {"name": p.name, "valid": p.verdict.ok, "findings": p.verdict.keys(), "side_effects": sorted(p.side_effects)}
                for p in plans
            ],
        }
        _emit(args, human, machine)
        return 0

    plan = bind(r, model.plan(args.plan), c)
    out = simulate(r, plan)
    human = [f"plan {plan.name} for {c.name}"]
    squares = []
    for s in sorted(r.structure.used_names()):
        lhs = out.recovered.delta.get(out.alpha_str.get(s, s))
        rhs = out.alpha_beh.get(r.delta.get(s, ""), r.delta.get(s))
        ok = lhs is not None and lhs == rhs
        squares.append({"structure": s, "lhs": lhs, "rhs": rhs, "commutes": ok})
        human.append(f"  {'ok  ' if ok else 'FAIL'} {s}: δ′(α_str) = {lhs}, α_beh(δ) = {rhs}")
    human += [f"  side effect {s}" for s in sorted(plan.side_effects)]
    human += [f"  {f}" for f in plan.verdict]
    human.append("valid" if plan.verdict.ok else "invalid")
    _emit(
        args,
        human,
        {"plan": plan.name, "squares": squares, "side_effects": sorted(plan.side_effects), **plan.verdict.to_dict()},
    )
    return 0 if plan.verdict.ok else 1


def cmd_scenario(args) -> int:
    model = load_model(_resolve_model(args.model))
    if args.run and args.run not in model.scenarios:
        raise UnknownTarget(f"no scenario {args.run!r}")
    names = None if args.all else [args.run]
    results = run_scenarios(model, names)
    human = []
    for res in results:
        human.append(f"{'PASS' if res.passed else 'FAIL'}  {res.name}")
        human += [f"      {'ok  ' if ok else 'FAIL'} {check}: {detail}" for check, ok, detail in res.checks]
    _emit(args, human, {"scenarios": [r.to_dict() for r in results]})
    return 0 if all(r.passed for r in results) else 1


def cmd_export(args) -> int:
    path, (target,) = _split_positionals(args, 1)
    model = load_model(path)
    if target.startswith("pushout:"):
        name = target.split(":", 1)[1]
        if name not in model.spans:
            raise UnknownTarget(f"no span {name!r}")
        text = export_dot(pushout_partial(model.spans[name].span), aliases=model.spans[name].aliases)
    else:
        text = export_dot(_composed(model, target, _substitutions(args.substitute)), model.resources)
    if args.output:
        Path(args.output).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opcat", description="Categorical system models: validate, compose, design, recover.")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run every validation over a model")
    p.add_argument("model", nargs="?")

    p = sub.add_parser("pushout", help="print the classes of a span's pushout")
    p.add_argument("names", nargs="+", metavar="[model] span")
    p.add_argument("--cocone", help="also compute the universal morphism into this cocone")

    p = sub.add_parser("compose", help="substitute diagrams into occurrences and validate the result")
    p.add_argument("names", nargs="+", metavar="[model] diagram")
    p.add_argument("--substitute", action="append", default=[], metavar="OCC=DIAGRAM")

    p = sub.add_parser("design", help="select the realization or list designs")
    p.add_argument("model", nargs="?")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--pareto", action="store_true")
    p.add_argument("--requirement", help="design requirement to use (default: the first)")

    p = sub.add_parser("recover", help="rank recovery plans or check one plan's naturality squares")
    p.add_argument("model", nargs="?")
    p.add_argument("--contingency", required=True)
    p.add_argument("--plan")

    p = sub.add_parser("scenario", help="run scenarios and compare with expectations")
    p.add_argument("model", nargs="?")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--run", metavar="NAME")
    g.add_argument("--all", action="store_true")

    p = sub.add_parser("export", help="write DOT for a diagram or pushout:<span>")
    p.add_argument("names", nargs="+", metavar="[model] target")
    p.add_argument("--substitute", action="append", default=[], metavar="OCC=DIAGRAM")
    p.add_argument("--format", choices=["dot"], default="dot")
    p.add_argument("-o", "--output")
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "pushout": cmd_pushout,
    "compose": cmd_compose,
    "design": cmd_design,
    "recover": cmd_recover,
    "scenario": cmd_scenario,
    "export": cmd_export,
}


def _dispatch(args: argparse.Namespace) -> int:
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"opcat: {e}", file=sys.stderr)
        return 2
    except (OSError, OpcatError) as e:
        print(f"opcat: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return _dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
