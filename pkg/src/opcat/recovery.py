"""Contingencies, recovery plans, and their validation by a naturality square.

A plan edits the realization's structure and behaviour composites in
lock-step (both share one diagram tree) and may annotate resources.  It comes
with filler maps ``alpha_str`` and ``alpha_beh``, identity wherever nothing
changed.  The plan is valid when, for every structure filler ``s`` of the
original realization, ``δ′(α_str(s)) = α_beh(δ(s))``, and the recovered
flattened diagram still passes wiring validation and covers every capability.

Occurrences are addressed by dotted paths through the composite tree, e.g.
``nav2.planner``; a port is addressed as ``<path>.<port>``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .algebra import COST_RULES, PERFORMANCE_RULES, Algebra, CompositeFiller
from .design import Design, Realization, check_linkage, covered, derive_delta
from .errors import InvalidPlan, MalformedPlan, UnknownTarget, UnresolvedReference
from .report import Finding, ValidationReport
from .wiring import Endpoint, Occurrence, WiringDiagram, Wire, canonical_form, validate_diagram

__all__ = [
    "ACTION_KINDS",
    "Contingency",
    "RecoveryAction",
    "RecoveryPlan",
    "ImpactReport",
    "target_paths",
    "detect_impact",
    "simulate",
    "validate_recovery",
    "apply_recovery",
    "propose_recoveries",
    "inverse",
    "identity_plan",
    "delta_inverse",
]

ACTION_KINDS = ("substitute_filler", "insert_adapter", "remove_adapter", "clear_resource", "spin", "wait")
LADDER_KINDS = ("clear_resource", "spin", "wait")
MODES = ("filler_failed", "resource_degraded")


@dataclass(frozen=True)
class Contingency:
    """A failure event.  ``target`` is ``filler:<name>``, ``resource:<name>`` or ``occurrence:<path>``."""

    name: str
    target: str
    mode: str = "filler_failed"
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"contingency mode must be one of {MODES}, got {self.mode!r}")
        if ":" not in self.target:
            raise ValueError(f"contingency target {self.target!r} needs a kind prefix")

    @property
    def kind(self) -> str:
        return self.target.split(":", 1)[0]

    @property
    def ref(self) -> str:
        return self.target.split(":", 1)[1]


@dataclass(frozen=True)
class RecoveryAction:
    kind: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise MalformedPlan(f"unknown action kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))

    def __hash__(self):
        return hash((self.kind, repr(sorted(self.params.items()))))

    def param(self, key: str, default=...):
        if key in self.params:
            return self.params[key]
        if default is ...:
            raise MalformedPlan(f"{self.kind} action needs parameter {key!r}")
        return default


@dataclass(frozen=True)
class RecoveryPlan:
    """An ordered list of actions plus (once bound to a realization) its α maps and side effects.

    ``handles`` lists the occurrence paths whose trouble the plan addresses;
    ``rank`` holds catalog positions and drives the final tie-break.
    """

    name: str
    actions: tuple[RecoveryAction, ...] = ()
    handles: tuple[str, ...] = ()
    alpha_str: Optional[Mapping[str, str]] = None
    alpha_beh: Optional[Mapping[str, str]] = None
    side_effects: frozenset = frozenset()
    contingency: Optional[Contingency] = None
    inverse: Optional["RecoveryPlan"] = field(default=None, compare=False)
    rank: tuple[int, ...] = ()
    verdict: Optional[ValidationReport] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "handles", tuple(self.handles))
        object.__setattr__(self, "side_effects", frozenset(self.side_effects))

    @property
    def valid(self) -> Optional[bool]:
        return None if self.verdict is None else self.verdict.ok


def identity_plan(name: str = "identity") -> RecoveryPlan:
    return RecoveryPlan(name)


def inverse(plan: RecoveryPlan) -> RecoveryPlan:
    if plan.inverse is None:
        raise MalformedPlan(f"plan {plan.name!r} declares no inverse")
    return plan.inverse


# --------------------------------------------------------------------------
# addressing


def _split(path: str) -> tuple[str, str]:
    if "." not in path:
        return "", path
    head, tail = path.rsplit(".", 1)
    return head, tail


def _parts(path: str) -> list[str]:
    return path.split(".") if path else []


def _all_paths(comp: CompositeFiller) -> dict[str, str]:
    return comp.choices()


def target_paths(r: Realization, c: Contingency) -> list[str]:
    """Occurrence paths the contingency points at; raises :class:`UnknownTarget`."""
    s_paths, b_paths = r.structure.choices(), r.behavior.choices()
    if c.kind == "filler":
        hits = sorted({p for p, n in s_paths.items() if n == c.ref} | {p for p, n in b_paths.items() if n == c.ref})
    elif c.kind == "occurrence":
        hits = [c.ref] if c.ref in s_paths else []
    elif c.kind == "resource":
        flat = r.flat()
        hits = sorted({o.name for o in flat.inner if any(p.resource == c.ref for p in o.box.provided())})
    else:
        raise UnknownTarget(f"{c.name}: unknown target kind {c.kind!r}")
    if not hits:
        raise UnknownTarget(f"{c.name}: {c.target} is not part of the realization")
    return hits


def _under(path: str, roots: Iterable[str]) -> bool:
    return any(path == r or path.startswith(r + ".") for r in roots)


# --------------------------------------------------------------------------
# impact


@dataclass(frozen=True)
class ImpactReport:
    contingency: Contingency
    occurrences: tuple[str, ...]
    wires: tuple[str, ...]
    structure_fillers: tuple[str, ...]
    behavior_fillers: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "contingency": self.contingency.name,
            "occurrences": list(self.occurrences),
            "wires": list(self.wires),
            "structure_fillers": list(self.structure_fillers),
            "behavior_fillers": list(self.behavior_fillers),
        }


def detect_impact(r: Realization, c: Contingency) -> ImpactReport:
    """Everything reachable from the failed element along resource flow in the flat behaviour diagram."""
    roots = target_paths(r, c)
    flat = r.behavior.flatten()
    out_wires: dict[Optional[str], list[Wire]] = {}
    for w in flat.wires:
        out_wires.setdefault(w.source.occurrence, []).append(w)

    start = [o.name for o in flat.inner if _under(o.name, roots)]
    seen = set(start)
    used: set[Wire] = set()
    queue = deque()
    for occ in start:
        for w in out_wires.get(occ, ()):
            if c.kind == "resource" and flat.port_of(w.source).resource != c.ref:
                continue
            used.add(w)
            queue.append(w.target.occurrence)
    while queue:
        occ = queue.popleft()
        if occ is None or occ in seen:
            continue
        seen.add(occ)
        for w in out_wires.get(occ, ()):
            used.add(w)
            queue.append(w.target.occurrence)

    occs = tuple(o.name for o in flat.inner if o.name in seen)
    s_leaf = dict(r.structure.leaves())
    b_leaf = dict(r.behavior.leaves())
    behaviors = sorted({b_leaf[o].name for o in occs if o in b_leaf})
    structures = {s_leaf[o].name for o in occs if o in s_leaf}
    structures |= {s for s, b in r.delta.items() if b in behaviors and s in {f.name for f in s_leaf.values()}}
    return ImpactReport(c, occs, tuple(sorted(str(w) for w in used)), tuple(sorted(structures)), tuple(behaviors))


# --------------------------------------------------------------------------
# editing composites


def _recombine(comp: CompositeFiller, diagram: WiringDiagram, parts, alg: Algebra) -> CompositeFiller:
    cost = COST_RULES[alg.combine.cost]([p.cost for _, p in parts])
    perf = PERFORMANCE_RULES[alg.combine.performance]([p.performance for _, p in parts])
    return CompositeFiller(comp.name, comp.box, comp.kind, diagram, tuple(parts), cost, perf)


def _edit(comp: CompositeFiller, path: list[str], fn, alg: Algebra) -> CompositeFiller:
    if not path:
        diagram, parts = fn(comp)
        return _recombine(comp, diagram, parts, alg)
    head, rest = path[0], path[1:]
    try:
        child = comp.part(head)
    except KeyError:
        raise MalformedPlan(f"{comp.name} has no occurrence {head!r}") from None
    if not isinstance(child, CompositeFiller):
        raise MalformedPlan(f"{head!r} in {comp.name} is atomic and has no inner occurrences")
    new_child = _edit(child, rest, fn, alg)
    return _recombine(comp, comp.diagram, [(o, new_child if o == head else p) for o, p in comp.parts], alg)


def _local_endpoint(text: str) -> Endpoint:
    occ, _, port = text.rpartition(".")
    if not occ or not port:
        raise MalformedPlan(f"endpoint {text!r} must look like occurrence.port or outer.port")
    return Endpoint(None if occ == "outer" else occ, port)


def _connect(wires: list[Wire], connect: Sequence) -> list[Wire]:
    for item in connect:
        src, tgt = _local_endpoint(item[0]), _local_endpoint(item[1])
        label = item[2] if len(item) > 2 else None
        wires = [w for w in wires if w.target != tgt]
        wires.append(Wire(src, tgt, label))
    return wires


def _filler(alg: Algebra, box: str, name: str):
    f = alg.find(box, name)
    if f is None:
        raise MalformedPlan(f"{alg.name} has no filler {name!r} for box {box!r}")
    return f


@dataclass
class _State:
    structure: CompositeFiller
    behavior: CompositeFiller
    annotations: dict
    alpha_str: dict
    alpha_beh: dict
    touched: set
    absorbed: list


def _apply_action(st: _State, a: RecoveryAction, s_alg: Algebra, b_alg: Algebra) -> None:
    if a.kind in ("spin", "wait"):
        st.annotations[a.kind] = f"timeout={a.param('timeout', 0)}"
        return
    if a.kind == "clear_resource":
        occ, port = _split(a.param("consumer"))
        ep = Endpoint(occ, port)
        feeds = [w for w in st.behavior.flatten().wires if w.target == ep]
        if not feeds:
            raise MalformedPlan(f"nothing feeds {a.param('consumer')!r}")
        for w in feeds:
            st.annotations[str(w.source)] = a.param("state", "cleared")
        st.touched.add(occ)
        return

    if a.kind == "substitute_filler":
        path = a.param("occurrence")
        container, local = _split(path)
        new_local = a.param("new_occurrence", local)
        connect = a.param("connect", ())
        box_name = a.param("box", None)
        try:
            old_occ = _container(st.structure, container).diagram.occurrence(local)
        except UnresolvedReference as e:
            raise MalformedPlan(str(e)) from None
        box = s_alg.boxes[box_name] if box_name else old_occ.box
        if box_name and box_name not in s_alg.boxes:
            raise MalformedPlan(f"unknown box {box_name!r}")
        new_s = _filler(s_alg, box.name, a.param("structure"))
        new_b = _filler(b_alg, box.name, a.param("behavior"))

        def edit_for(new_part):
            def fn(comp: CompositeFiller):
                wd = comp.diagram
                old = wd.occurrence(local)
                inner = tuple(Occurrence(new_local, box) if o.name == local else o for o in wd.inner)

                def move(ep: Endpoint) -> Optional[Endpoint]:
                    if ep.occurrence != local:
                        return ep
                    p, q = box.port(ep.port), old.box.port(ep.port)
                    return Endpoint(new_local, ep.port) if p and q and p.direction == q.direction else None

                wires = []
                for w in wd.wires:
                    s, t = move(w.source), move(w.target)
                    if s is not None and t is not None:
                        wires.append(Wire(s, t, w.label))
                wires = _connect(wires, connect)
                parts = [(new_local, new_part) if o == local else (o, p) for o, p in comp.parts]
                return WiringDiagram(wd.name, wd.outer, inner, tuple(wires)), parts

            return fn

        old_s, old_b = st.structure.choices()[path], st.behavior.choices()[path]
        st.structure = _edit(st.structure, _parts(container), edit_for(new_s), s_alg)
        st.behavior = _edit(st.behavior, _parts(container), edit_for(new_b), b_alg)
        st.alpha_str[old_s] = new_s.name
        st.alpha_beh[old_b] = new_b.name
        new_path = f"{container}.{new_local}" if container else new_local
        st.touched |= {path, new_path}
        return

    if a.kind == "insert_adapter":
        container = a.param("container", "")
        local = a.param("occurrence")
        box_name = a.param("box")
        if box_name not in s_alg.boxes:
            raise MalformedPlan(f"unknown box {box_name!r}")
        box = s_alg.boxes[box_name]
        new_s = _filler(s_alg, box_name, a.param("structure"))
        new_b = _filler(b_alg, box_name, a.param("behavior"))
        connect = a.param("connect", ())

        def edit_for(new_part):
            def fn(comp: CompositeFiller):
                wd = comp.diagram
                if local in wd.occurrence_names():
                    raise MalformedPlan(f"occurrence {local!r} already exists in {comp.name}")
                inner = wd.inner + (Occurrence(local, box),)
                wires = _connect(list(wd.wires), connect)
                return WiringDiagram(wd.name, wd.outer, inner, tuple(wires)), list(comp.parts) + [(local, new_part)]

            return fn

        st.structure = _edit(st.structure, _parts(container), edit_for(new_s), s_alg)
        st.behavior = _edit(st.behavior, _parts(container), edit_for(new_b), b_alg)
        st.touched.add(f"{container}.{local}" if container else local)
        return

    if a.kind == "remove_adapter":
        path = a.param("occurrence")
        container, local = _split(path)
        connect = a.param("connect", ())
        old_s, old_b = st.structure.choices().get(path), st.behavior.choices().get(path)
        if old_s is None:
            raise MalformedPlan(f"no occurrence at {path!r}")

        def fn(comp: CompositeFiller):
            wd = comp.diagram
            inner = tuple(o for o in wd.inner if o.name != local)
            wires = [w for w in wd.wires if local not in (w.source.occurrence, w.target.occurrence)]
            wires = _connect(wires, connect)
            return WiringDiagram(wd.name, wd.outer, inner, tuple(wires)), [(o, p) for o, p in comp.parts if o != local]

        st.structure = _edit(st.structure, _parts(container), fn, s_alg)
        st.behavior = _edit(st.behavior, _parts(container), fn, b_alg)
        st.absorbed.append((old_s, old_b, a.param("absorbed_into")))
        st.touched.add(path)
        return


def _container(comp: CompositeFiller, path: str) -> CompositeFiller:
    for head in _parts(path):
        try:
            comp = comp.part(head)
        except KeyError:
            raise MalformedPlan(f"no occurrence {head!r} on path {path!r}") from None
        if not isinstance(comp, CompositeFiller):
            raise MalformedPlan(f"{path!r} does not name a composite")
    return comp


# --------------------------------------------------------------------------
# simulation and validation


@dataclass(frozen=True)
class Outcome:
    recovered: Realization
    alpha_str: dict
    alpha_beh: dict
    side_effects: frozenset


def _feeders(wd: WiringDiagram, annotations: Mapping[str, str]) -> dict[Endpoint, frozenset]:
    out: dict[Endpoint, set] = {}
    for w in wd.wires:
        out.setdefault(w.target, set()).add((str(w.source), annotations.get(str(w.source), "")))
    return {k: frozenset(v) for k, v in out.items()}


def simulate(r: Realization, plan: RecoveryPlan) -> Outcome:
    """Apply ``plan`` to ``r`` without validating; returns r′, the α maps and side effects."""
    if r.problem is None:
        raise MalformedPlan("realization carries no design problem, so fillers cannot be resolved")
    s_alg, b_alg = r.problem.structure, r.problem.behavior
    st = _State(r.structure, r.behavior, dict(r.annotations), {}, {}, set(), [])
    for a in plan.actions:
        _apply_action(st, a, s_alg, b_alg)

    s_final, b_final = st.structure.choices(), st.behavior.choices()
    for old_s, old_b, into in st.absorbed:
        if into is None:
            raise MalformedPlan("remove_adapter needs absorbed_into to keep α total")
        if into not in s_final:
            raise MalformedPlan(f"absorbed_into {into!r} is not an occurrence of the recovered realization")
        st.alpha_str[old_s] = s_final[into]
        st.alpha_beh[old_b] = b_final[into]

    alpha_str = {s: s for s in sorted(r.structure.used_names())}
    alpha_str.update({k: v for k, v in st.alpha_str.items() if k in alpha_str})
    alpha_beh = {b: b for b in sorted(r.behavior.used_names())}
    alpha_beh.update({k: v for k, v in st.alpha_beh.items() if k in alpha_beh})
    if plan.alpha_str:
        alpha_str.update(plan.alpha_str)
    if plan.alpha_beh:
        alpha_beh.update(plan.alpha_beh)

    override = r.problem.delta_override if r.problem is not None else None
    delta, _ = derive_delta(st.structure, st.behavior, override)
    design = Design(st.structure, st.behavior, r.design.satisfied, st.structure.cost, st.behavior.performance)
    if r.problem is not None:
        design = replace(design, satisfied=covered(r.problem.linkage(), st.structure, st.behavior))
    recovered = Realization(
        design, delta, tuple(st.annotations.items()), provenance=(r, plan.name), problem=r.problem
    )

    own = set(st.touched)
    if plan.contingency is not None:
        try:
            own |= set(target_paths(r, plan.contingency))
        except UnknownTarget:
            pass
    before = _feeders(r.behavior.flatten(), dict(r.annotations))
    after_wd = st.behavior.flatten()
    after = _feeders(after_wd, st.annotations)
    b_leaf = dict(st.behavior.leaves())
    effects = set()
    for ep in sorted(set(before) | set(after), key=Endpoint.sort_key):
        if before.get(ep) == after.get(ep) or ep.occurrence is None or _under(ep.occurrence, own):
            continue
        effects.add(f"port:{ep}")
        if ep.occurrence in b_leaf:
            effects.add(f"filler:{b_leaf[ep.occurrence].name}")
    return Outcome(recovered, alpha_str, alpha_beh, frozenset(effects))


def validate_recovery(r: Realization, plan: RecoveryPlan) -> ValidationReport:
    """Naturality squares, wiring of the recovered flat diagram, capability coverage, failed-filler use."""
    out = simulate(r, plan)
    return _check(r, plan, out)


def _check(r: Realization, plan: RecoveryPlan, out: Outcome) -> ValidationReport:
    findings: list[Finding] = []
    r2 = out.recovered
    for s in sorted(r.structure.used_names()):
        lhs = r2.delta.get(out.alpha_str.get(s, s))
        rhs = out.alpha_beh.get(r.delta.get(s, ""), r.delta.get(s))
        if lhs is None or lhs != rhs:
            findings.append(
                Finding("naturality", s, f"δ′(α_str({s})) = {lhs} but α_beh(δ({s})) = {rhs}")
            )
    flat_s, flat_b = r2.structure.flatten(), r2.behavior.flatten()
    findings.extend(validate_diagram(flat_s).findings)
    if canonical_form(flat_s) != canonical_form(flat_b):
        findings.append(Finding("shape_mismatch", plan.name, "structure and behaviour diagrams diverged"))
    if r.problem is not None:
        for cap in r.problem.capabilities:
            if cap not in r2.design.satisfied:
                findings.append(Finding("uncovered_capability", cap, f"{cap} is no longer realized"))
    findings.extend(check_linkage(r2).findings)
    c = plan.contingency
    if c is not None and c.mode == "filler_failed" and c.kind == "filler":
        if c.ref in r2.structure.used_names() | r2.behavior.used_names():
            findings.append(Finding("failed_filler_in_use", c.ref, f"{c.ref} failed but is still part of the recovery"))
    return ValidationReport(tuple(findings))


def bind(r: Realization, plan: RecoveryPlan, contingency: Optional[Contingency] = None) -> RecoveryPlan:
    """Fill in α maps, side effects and the validation verdict for ``plan`` against ``r``."""
    if contingency is not None:
        plan = replace(plan, contingency=contingency)
    out = simulate(r, plan)
    verdict = _check(r, plan, out)
    return replace(plan, alpha_str=out.alpha_str, alpha_beh=out.alpha_beh, side_effects=out.side_effects, verdict=verdict)


def apply_recovery(r: Realization, plan: RecoveryPlan) -> Realization:
    out = simulate(r, plan)
    report = _check(r, plan, out)
    if not report.ok:
        raise InvalidPlan(f"plan {plan.name!r} is invalid: {', '.join(report.keys())}", report)
    return out.recovered


def _ancestors(path: str) -> list[str]:
    out = [path]
    while path:
        path, _ = _split(path)
        out.append(path)
    return out


def propose_recoveries(r: Realization, c: Contingency, catalog: Sequence[RecoveryPlan]) -> list[RecoveryPlan]:
    """Candidate plans, best first.

    Single plans come from the innermost level (the failed occurrence, then
    its ancestors) with any handler.  The escalation ladder chains every
    clear/spin/wait handler from that level outward.  Ordering: valid first,
    then fewest side effects, then catalog position.
    """
    roots = target_paths(r, c)
    indexed = list(enumerate(catalog))
    levels = _ancestors(roots[0])
    singles: list[tuple[int, RecoveryPlan]] = []
    ladder: list[tuple[int, RecoveryPlan]] = []
    started = False
    for level in levels:
        here = [(i, p) for i, p in indexed if level in p.handles]
        if here and not started:
            singles = here
            started = True
        if started:
            ladder += [(i, p) for i, p in here if p.actions and all(a.kind in LADDER_KINDS for a in p.actions)]
    seen, chain = set(), []
    for i, p in ladder:
        if i not in seen:
            seen.add(i)
            chain.append((i, p))

    candidates = [replace(p, rank=(i,)) for i, p in singles]
    if len(chain) > 1:
        candidates.append(
            RecoveryPlan(
                ">".join(p.name for _, p in chain),
                tuple(a for _, p in chain for a in p.actions),
                rank=tuple(i for i, _ in chain),
            )
        )
    bound = [bind(r, p, c) for p in candidates]
    return sorted(bound, key=lambda p: (not p.verdict.ok, len(p.side_effects), p.rank))


def delta_inverse(r: Realization) -> tuple[dict[str, str], ValidationReport]:
    """Behaviour-to-structure map obtained by inverting δ on its image."""
    inv: dict[str, str] = {}
    findings = []
    for s, b in sorted(r.delta.items()):
        if b in inv and inv[b] != s:
            findings.append(Finding("delta_not_invertible", b, f"{b} is the image of both {inv[b]} and {s}"))
            continue
        inv[b] = s
    return inv, ValidationReport(tuple(findings))
