import random
from dataclasses import replace
from itertools import permutations, product

import pytest
from hypothesis import given, settings, strategies as st

from generators import rescaled_problem
from opcat.algebra import CompositeFiller, enumerate_composites
from opcat.design import (
    Design,
    RequirementMap,
    check_linkage,
    design_pushout,
    derive_delta,
    enumerate_designs,
    pareto_front,
    select_realization,
    trace_span,
)
from opcat.errors import EmptyDesignSpace
from opcat.fincat import FinSet, PartialFinFunction
from opcat.modelio import bundled_model_path, load_model
from opcat.wiring import Box, WiringDiagram
from oracles import merge_closure_classes


@pytest.fixture(scope="module")
def model():
    return load_model(bundled_model_path())


@pytest.fixture(scope="module")
def two():
    return load_model(bundled_model_path("marathon2_two_controllers"))


def nav2_leaves(r):
    return {path.split(".")[-1]: f.name for path, f in r.behavior.leaves() if path.startswith("nav2.")}


def test_compute_motion_class(model):
    p = model.design_problem().linkage()
    cls = p.class_of("left", "nav2")
    assert p.class_of("right", "nav2_gnc") == cls
    assert p.apex_table[cls] == ("compute_motion",)
    assert set(p.members(cls)) == {"compute_motion", "nav2", "nav2_gnc"}
    assert p.commutes()


def test_empty_capabilities_give_disjoint_union():
    S, B = FinSet("S", ["s1", "s2"]), FinSet("B", ["b1"])
    C = FinSet("C", [])
    p = design_pushout(C, S, B, PartialFinFunction(C, S, {}), PartialFinFunction(C, B, {}))
    assert len(p.object) == 3 and not p.apex_table


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_requirement_maps_match_oracle(seed):
    rng = random.Random(seed)
    caps = [f"c{i}" for i in range(rng.randint(0, 4))]
    S = FinSet("S", [f"s{i}" for i in range(rng.randint(1, 4))])
    B = FinSet("B", [f"b{i}" for i in range(rng.randint(1, 4))])
    sr = {c: rng.choice(S.elements) for c in caps if rng.random() < 0.8}
    br = {c: rng.choice(B.elements) for c in caps if rng.random() < 0.8}
    C = FinSet("C", caps)
    p = design_pushout(C, S, B, PartialFinFunction(C, S, sr), PartialFinFunction(C, B, br))
    got = {frozenset(p.members(c)) for c in p.object}
    assert got == merge_closure_classes(caps, list(S), list(B), sr, br)


def test_multi_valued_trace_expands_the_apex():
    S, B = FinSet("S", ["s1", "s2"]), FinSet("B", ["b1"])
    span = trace_span(["cap"], S, B, RequirementMap("SR", {"cap": ("s1", "s2")}), RequirementMap("BR", {"cap": "b1"}))
    assert span.apex.elements == ("cap[0]", "cap[1]")


def test_one_design_on_the_corpus(model):
    space = enumerate_designs(model.design_problem())
    assert len(space) == 1 and space.report.ok
    r = select_realization(space)
    assert nav2_leaves(r) == {"planner": "a_star_planner", "estimator": "amcl_estimator", "controller": "teb_controller"}
    assert r.design.satisfied == frozenset(model.designs["marathon2_design"].capabilities)
    assert set(r.delta) == {f.name for _, f in r.structure.leaves()} | set(r.structure.choices().values()) | {r.structure.name}
    assert check_linkage(r).ok


def test_two_controllers_give_two_designs(two):
    space = enumerate_designs(two.design_problem())
    assert len(space) == 2
    r = select_realization(space)
    assert nav2_leaves(r)["controller"] == "teb_controller"
    perfs = sorted(d.performance for d in space)
    assert r.design.performance == perfs[-1] > perfs[0]


@pytest.mark.parametrize("k", [0.5, 2.0, 3.7, 1000.0])
def test_rescaling_performance_keeps_the_winner(two, k):
    base = select_realization(enumerate_designs(two.design_problem()))
    scaled = select_realization(enumerate_designs(rescaled_problem(two, k)))
    assert scaled.design.leaves() == base.design.leaves()
    assert scaled.design.leaves("structure") == base.design.leaves("structure")


def test_uncovered_capability_is_reported(model):
    spec = model.designs["marathon2_design"]
    sr = RequirementMap("SR", {c: v for c, v in spec.sr.mapping.items() if c != "compute_motion"})
    space = enumerate_designs(replace(model.design_problem(), sr=sr))
    assert len(space) == 0
    assert [(f.code, f.subject) for f in space.report] == [("uncovered_capability", "compute_motion")]
    with pytest.raises(EmptyDesignSpace):
        select_realization(space)


def _oracle_valid(problem, s, b):
    """Independent check: same leaf paths, namesakes pair, every capability traced on both sides."""
    sl, bl = dict(s.leaves()), dict(b.leaves())
    if set(sl) != set(bl):
        return False
    for path in sl:
        sn, bn = sl[path].name, bl[path].name
        box = sl[path].box
        s_side = {f.name for f in problem.structure.assignment[box]}
        b_side = {f.name for f in problem.behavior.assignment[box]}
        if sn != bn and (sn in b_side or bn in s_side):
            return False
    return all(
        set(problem.sr.image(c)) & s.used_names() and set(problem.br.image(c)) & b.used_names()
        for c in problem.capabilities
    )


@pytest.mark.parametrize("name", ["marathon2", "marathon2_two_controllers"])
def test_designs_match_independent_filter(name):
    m = load_model(bundled_model_path(name))
    problem = m.design_problem()
    space = enumerate_designs(problem)
    got = {(d.structure.label, d.behavior.label) for d in space}
    expected = {
        (s.label, b.label)
        for s, b in product(
            enumerate_composites(problem.structure, problem.diagram, problem.structure_name),
            enumerate_composites(problem.behavior, problem.diagram, problem.behavior_name),
        )
        if _oracle_valid(problem, s, b)
    }
    assert got == expected


# -- ordering on synthetic designs ------------------------------------------

def _design(name, cost, perf):
    wd = WiringDiagram(name, Box("sys"))
    s = CompositeFiller(f"s_{name}", "sys", "subsystem", wd, (), cost, perf)
    b = CompositeFiller(f"b_{name}", "sys", "behavior", wd, (), cost, perf)
    return Design(s, b, frozenset(), cost, perf)


def test_single_design_is_selected():
    d = _design("only", 1, 1)
    assert select_realization([d]).design == d


def test_performance_beats_cost():
    assert select_realization([_design("a", 100, 5), _design("b", 1, 3)]).design.name.startswith("s_a")


def test_equal_performance_prefers_cheaper():
    assert select_realization([_design("a", 10, 4), _design("b", 7, 4)]).design.name.startswith("s_b")


def test_full_tie_falls_back_to_name():
    assert select_realization([_design("z", 1, 1), _design("m", 1, 1)]).design.name.startswith("s_m")


def _beats(a, b):
    if a.performance != b.performance:
        return a.performance > b.performance
    if a.cost != b.cost:
        return a.cost < b.cost
    return a.name < b.name


triples = st.lists(st.tuples(st.integers(0, 5), st.integers(1, 5)), min_size=1, max_size=6)


@settings(max_examples=100, deadline=None)
@given(triples, st.randoms(use_true_random=False))
def test_selection_is_order_and_scale_invariant(vals, rnd):
    designs = [_design(f"d{i}", c, p) for i, (c, p) in enumerate(vals)]
    best = select_realization(designs).design
    assert all(d is best or _beats(best, d) for d in designs)
    shuffled = designs[:]
    rnd.shuffle(shuffled)
    assert select_realization(shuffled).design == best
    k = rnd.choice([0.25, 3, 17.5])
    scaled = [replace(d, performance=d.performance * k) for d in designs]
    assert select_realization(scaled).design.name == best.name


def test_pareto_front():
    ds = [_design("a", 1, 1), _design("b", 2, 2), _design("c", 3, 1), _design("d", 2, 2)]
    assert [d.structure.name for d in pareto_front(ds)] == ["s_b", "s_d", "s_a"]


@settings(max_examples=60, deadline=None)
@given(triples)
def test_pareto_front_contains_the_realization(vals):
    designs = [_design(f"d{i}", c, p) for i, (c, p) in enumerate(vals)]
    front = pareto_front(designs)
    assert select_realization(designs).design in front
    for d in designs:
        if d not in front:
            assert any(e.performance >= d.performance and e.cost <= d.cost for e in front)


def test_delta_override_and_ambiguity(model):
    r = model.realize()
    delta, report = derive_delta(r.structure, r.behavior, {"laser": "depth_cloud_driver"})
    assert report.ok and delta["laser"] == "depth_cloud_driver"
    s, b = r.structure, r.behavior
    # two occurrences filled by the same structure but different behaviours
    clash_s = replace(s, parts=s.parts + (("extra", s.part("nav2")),))
    clash_b = replace(b, parts=b.parts + (("extra", b.part("robot")),))
    _, report = derive_delta(clash_s, clash_b)
    assert "delta_ambiguous" in report.codes()


def test_unlinked_delta_is_flagged(model):
    r = model.realize()
    bad = replace(r, delta={**r.delta, "nav2": "tiago_drive"})
    assert [f.subject for f in check_linkage(bad)] == ["nav2"]


def test_permuting_requirement_entries_changes_nothing(model):
    spec = model.designs["marathon2_design"]
    base = select_realization(enumerate_designs(model.design_problem())).key()
    for perm in list(permutations(spec.capabilities))[:6]:
        problem = replace(model.design_problem(), capabilities=perm)
        assert select_realization(enumerate_designs(problem)).key() == base
