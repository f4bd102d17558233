import random
from dataclasses import replace

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from generators import random_box, random_diagram
from opcat.algebra import Algebra, Filler, apply_algebra, saturate
from opcat.design import Design, Realization, derive_delta, enumerate_designs, select_realization
from opcat.errors import InvalidPlan, MalformedPlan, UnknownTarget
from opcat.modelio import bundled_model_path, load_model, run_scenarios
from opcat.recovery import (
    Contingency,
    RecoveryAction,
    RecoveryPlan,
    apply_recovery,
    bind,
    delta_inverse,
    detect_impact,
    identity_plan,
    inverse,
    propose_recoveries,
    validate_recovery,
)
from opcat.wiring import Box, Endpoint, Occurrence, Wire


@pytest.fixture(scope="module")
def model():
    return load_model(bundled_model_path())


@pytest.fixture(scope="module")
def r(model):
    return model.realize()


def contingency(model, scenario):
    return model.scenarios[scenario].contingency


# -- impact -----------------------------------------------------------------

def test_laser_failure_reaches_estimator_and_controller(model, r):
    imp = detect_impact(r, contingency(model, "sensor_failure"))
    assert {"robot.laser", "nav2.estimator", "nav2.controller"} <= set(imp.occurrences)
    assert "robot.laser.scan -> nav2.estimator.scan" in imp.wires
    assert "laser" in imp.structure_fillers and "laser_scan_driver" in imp.behavior_fillers


def test_unused_resource_only_hits_its_provider(r):
    imp = detect_impact(r, Contingency("cloud", "resource:particle_cloud", "resource_degraded"))
    assert imp.occurrences == ("nav2.estimator",)
    assert imp.wires == ()


def test_unknown_target(r):
    with pytest.raises(UnknownTarget):
        detect_impact(r, Contingency("ghost", "filler:flux_capacitor"))
    with pytest.raises(UnknownTarget):
        detect_impact(r, Contingency("ghost", "occurrence:nav2.ghost"))


def _oracle_impact(wd, start):
    g = nx.DiGraph()
    g.add_nodes_from(wd.occurrence_names())
    g.add_edges_from(
        (w.source.occurrence, w.target.occurrence)
        for w in wd.wires
        if w.source.occurrence is not None and w.target.occurrence is not None
    )
    return {start} | nx.descendants(g, start)


def test_every_corpus_occurrence_matches_bfs_oracle(r):
    flat = r.behavior.flatten()
    for occ in flat.occurrence_names():
        imp = detect_impact(r, Contingency("c", f"occurrence:{occ}"))
        assert set(imp.occurrences) == _oracle_impact(flat, occ), occ


def _realization_over(wd):
    boxes = {o.box.name: o.box for o in wd.inner}
    boxes[wd.outer.name] = wd.outer
    s_alg = Algebra("S", "structure", boxes, {b: (Filler(f"s_{b}", b, "subsystem", {"cost": 1}),) for b in boxes})
    b_alg = Algebra("B", "behavior", boxes, {b: (Filler(f"b_{b}", b, "behavior", {"performance": 1}),) for b in boxes})
    s = apply_algebra(s_alg, wd, {o.name: f"s_{o.box.name}" for o in wd.inner})
    b = apply_algebra(b_alg, wd, {o.name: f"b_{o.box.name}" for o in wd.inner})
    delta, _ = derive_delta(s, b)
    return Realization(Design(s, b, frozenset(), s.cost, b.performance), delta)


def _random_flat(rng):
    inner = [Occurrence(f"o{i}", random_box(rng, f"X{i}", min_ports=1)) for i in range(rng.randint(1, 6))]
    return random_diagram(rng, "rand", Box("sys"), inner, labels=False)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_impacts_match_bfs_oracle(seed):
    rng = random.Random(seed)
    wd = _random_flat(rng)
    r = _realization_over(wd)
    start = rng.choice(wd.occurrence_names())
    imp = detect_impact(r, Contingency("c", f"occurrence:{start}"))
    assert set(imp.occurrences) == _oracle_impact(wd, start)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adding_a_wire_never_shrinks_impact(seed):
    rng = random.Random(seed)
    wd = _random_flat(rng)
    providers = [Endpoint(o.name, p.name) for o in wd.inner for p in o.box.provided()]
    consumers = [Endpoint(o.name, p.name) for o in wd.inner for p in o.box.required()]
    if not providers or not consumers:
        return
    bigger = replace(wd, wires=wd.wires + (Wire(rng.choice(providers), rng.choice(consumers)),))
    start = rng.choice(wd.occurrence_names())
    c = Contingency("c", f"occurrence:{start}")
    before = detect_impact(_realization_over(wd), c)
    after = detect_impact(_realization_over(bigger), c)
    assert set(before.occurrences) <= set(after.occurrences)
    assert set(before.wires) <= set(after.wires)


# -- validation ---------------------------------------------------------------

def _squares_commute(r, plan):
    r2 = apply_recovery(r, plan)
    return all(r2.delta[plan.alpha_str[s]] == plan.alpha_beh[r.delta[s]] for s in r.delta)


def test_identity_plan(r):
    assert validate_recovery(r, identity_plan()).ok
    r2 = apply_recovery(r, identity_plan())
    assert r2 == r
    assert r2.provenance[1] == "identity"


def test_adapter_plan_is_valid(model, r):
    plan = bind(r, model.plan("substitute_sensor_with_adapter"), contingency(model, "sensor_failure"))
    assert plan.verdict.ok
    assert plan.alpha_str["laser"] == "depth_camera"
    assert plan.alpha_beh["laser_scan_driver"] == "depth_cloud_driver"
    assert _squares_commute(r, plan)
    r2 = apply_recovery(r, plan)
    flat = r2.flat()
    assert flat.occurrence("robot.adapter").box.name == "pc_to_scan"
    assert dict(r2.structure.leaves())["robot.adapter"].name == "pointcloud_to_laserscan_node"


def test_adapterless_plan_has_one_unfed_port(model, r):
    plan = model.plan("substitute_sensor_without_adapter")
    report = validate_recovery(r, replace(plan, contingency=contingency(model, "sensor_failure")))
    assert report.keys() == ["unfed_required_port:nav2.estimator.scan"]
    with pytest.raises(InvalidPlan) as err:
        apply_recovery(r, plan)
    assert err.value.report.keys() == report.keys()


def test_keeping_a_failed_filler_is_rejected(model, r):
    plan = replace(identity_plan(), contingency=contingency(model, "sensor_failure"))
    assert validate_recovery(r, plan).codes() == ["failed_filler_in_use"]


def test_clear_global_map_only_annotates(model, r):
    plan = bind(r, model.plan("clear_global_map"), contingency(model, "crowded_space"))
    assert plan.verdict.ok
    assert {"port:nav2.controller.local_map", "filler:teb_controller"} <= plan.side_effects
    r2 = apply_recovery(r, plan)
    assert r2.delta == r.delta
    assert r2.design == r.design
    assert r2.annotations == (("map_server.map", "cleared"),)


def test_spin_and_wait_are_identity_squares(model, r):
    for name in ("spin", "wait"):
        plan = bind(r, model.plan(name), contingency(model, "low_localization"))
        assert plan.verdict.ok
        assert all(k == v for k, v in plan.alpha_str.items())
        assert all(k == v for k, v in plan.alpha_beh.items())
        assert apply_recovery(r, plan).design == r.design


def test_catalog_plans_that_validate_commute(model, r):
    for plan in model.catalog:
        bound = bind(r, plan)
        if bound.verdict.ok:
            assert _squares_commute(r, bound), plan.name


def test_broken_alpha_is_a_naturality_failure(model, r):
    plan = replace(model.plan("spin"), alpha_beh={"teb_controller": "amcl_estimator"})
    assert [f.subject for f in validate_recovery(r, plan).of("naturality")] == ["teb_controller"]


def test_inverse_restores_the_realization(model, r):
    plan = model.plan("substitute_sensor_with_adapter")
    r2 = apply_recovery(r, plan)
    back = apply_recovery(r2, inverse(plan))
    assert back.key() == r.key()
    with pytest.raises(MalformedPlan):
        inverse(model.plan("spin"))


def test_degraded_model_selects_the_recovered_design(model, r):
    r2 = apply_recovery(r, model.plan("substitute_sensor_with_adapter"))
    robot = r2.structure.part("robot").diagram
    decs = {
        k: [(robot if wd.name == "robot_internal" else wd, n) for wd, n in model.decompositions(k)]
        for k in ("structure", "behavior")
    }
    s = saturate(model.algebras["structure"].without("laser"), decs["structure"])
    b = saturate(model.algebras["behavior"].without("laser_scan_driver"), decs["behavior"])
    space = enumerate_designs(replace(model.design_problem(), structure=s, behavior=b))
    assert len(space) == 1
    assert select_realization(space).design.key() == r2.design.key()


def test_malformed_plans(r):
    with pytest.raises(MalformedPlan):
        RecoveryAction("teleport")
    with pytest.raises(MalformedPlan):
        validate_recovery(r, RecoveryPlan("p", (RecoveryAction("clear_resource"),)))
    with pytest.raises(MalformedPlan):
        validate_recovery(r, RecoveryPlan("p", (RecoveryAction("substitute_filler", {"occurrence": "nav2.ghost"}),)))


def test_contingency_needs_known_mode():
    with pytest.raises(ValueError):
        Contingency("c", "filler:laser", "melted")


# -- proposals ---------------------------------------------------------------

def test_crowded_space_proposals(model, r):
    plans = propose_recoveries(r, contingency(model, "crowded_space"), model.catalog)
    assert plans[0].name == "clear_global_map" and plans[0].valid
    assert "filler:teb_controller" in plans[0].side_effects


def test_low_localization_ladder(model, r):
    plans = propose_recoveries(r, contingency(model, "low_localization"), model.catalog)
    assert [p.name for p in plans[:2]] == ["spin", "spin>wait"]
    assert [a.kind for a in plans[1].actions] == ["spin", "wait"]


def test_sensor_failure_proposal(model, r):
    plans = propose_recoveries(r, contingency(model, "sensor_failure"), model.catalog)
    assert plans[0].name == "substitute_sensor_with_adapter" and plans[0].valid


def test_ranking_puts_valid_first(model, r):
    for sc in model.scenarios.values():
        plans = propose_recoveries(r, sc.contingency, model.catalog)
        keys = [(not p.valid, len(p.side_effects), p.rank) for p in plans]
        assert keys == sorted(keys)


def test_empty_catalog_gives_no_plans(model, r):
    assert propose_recoveries(r, contingency(model, "crowded_space"), ()) == []


def test_bundled_scenarios_pass(model):
    results = run_scenarios(model)
    assert [x.name for x in results] == ["crowded_space", "low_localization", "sensor_failure"]
    assert all(x.passed for x in results), [x.to_dict() for x in results if not x.passed]


def test_delta_inverse(r):
    inv, report = delta_inverse(r)
    assert report.ok
    assert all(r.delta[s] == b for b, s in inv.items())
    squashed = replace(r, delta={**r.delta, "laser": "teb_controller"})
    _, report = delta_inverse(squashed)
    assert report.codes() == ["delta_not_invertible"]
