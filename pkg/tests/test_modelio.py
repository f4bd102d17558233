import json
import re

import pytest

from opcat.colimit import pushout_partial
from opcat.errors import ParseError, SchemaVersionMismatch, UnresolvedReference
from opcat.modelio import (
    SCHEMA_VERSION,
    bundled_model_path,
    dump_model,
    dumps_model,
    export_dot,
    load_model,
    loads_model,
    to_document,
)
from opcat.wiring import canonical_form, identity_diagram, substitute

TOP_KEYS = [
    "schema_version", "resources", "boxes", "diagrams", "capability_algebra",
    "structure_algebra", "behavior_algebra", "requirements", "recovery_catalog", "scenarios",
]


@pytest.fixture(scope="module")
def text():
    return bundled_model_path().read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def model():
    return load_model(bundled_model_path())


def mutate(text, fn):
    doc = json.loads(text)
    fn(doc)
    return json.dumps(doc, indent=2)


def test_corpus_loads_clean(model):
    assert model.validate().ok
    assert model.schema_version == SCHEMA_VERSION


def test_corpus_top_level_keys(text):
    assert list(json.loads(text)) == TOP_KEYS


def test_corpus_contents(model):
    top = model.diagrams["marathon2"]
    assert sorted(o.box.name for o in top.inner) == ["map_server", "mission_server", "nav2", "robot"]
    nav = model.diagrams["nav2_internal"]
    assert sorted(o.box.name for o in nav.inner) == ["controller", "path_planner", "state_estimator"]
    assert sorted(p.name for p in model.catalog) == [
        "clear_global_map", "clear_local_map", "spin", "substitute_sensor_with_adapter", "wait",
    ]
    assert model.algebras["structure"].find("diff_drive_base", "tiago_base").attributes["speed_limit_mps"] == 0.45
    assert model.algebras["behavior"].find("mission_server", "waypoint_mission").attributes["waypoints"] == 16


def test_empty_model():
    m = loads_model('{"schema_version": "1"}')
    assert m.validate().ok
    assert not m.diagrams and not m.catalog and not m.scenarios


def test_missing_port_cites_the_wire(text):
    bad = mutate(text, lambda d: d["diagrams"]["marathon2"]["wires"].append(["robot.lidar", "nav2.scan"]))
    with pytest.raises(UnresolvedReference) as err:
        loads_model(bad, "bad.model")
    assert "robot.lidar" in str(err.value)
    assert re.search(r"bad\.model:\d+", str(err.value))


def test_undeclared_box(text):
    bad = mutate(text, lambda d: d["diagrams"]["marathon2"]["inner"].update(ghost="phantom"))
    with pytest.raises(UnresolvedReference):
        loads_model(bad)


def test_schema_mismatch():
    with pytest.raises(SchemaVersionMismatch):
        loads_model('{"schema_version": "2"}')


@pytest.mark.parametrize("doc", [
    '{"schema_version": "1",',
    '{"schema_version": "1", "schema_version": "1"}',
    '{"schema_version": "1", "gadgets": {}}',
    '{"resources": {}}',
    '[1, 2]',
])
def test_parse_errors(doc):
    with pytest.raises(ParseError):
        loads_model(doc)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        loads_model('{\n  "schema_version": "1",\n  "resources": {,}\n}')
    assert err.value.line == 3


def test_duplicate_ports_rejected(text):
    # JSON objects cannot repeat a key, so the duplicate comes through requires + provides
    bad = mutate(text, lambda d: d["boxes"]["robot"]["requires"].update(scan="laser_scan"))
    with pytest.raises(ParseError):
        loads_model(bad)


def test_round_trip(model):
    once = dumps_model(model)
    again = loads_model(once)
    assert again == model
    assert dumps_model(again) == once
    assert to_document(again) == to_document(model)


def test_round_trip_two_controllers():
    m = load_model(bundled_model_path("marathon2_two_controllers"))
    assert loads_model(dumps_model(m)) == m


def test_dump_to_file(model, tmp_path):
    path = tmp_path / "copy.model"
    dump_model(model, path)
    assert load_model(path) == model


def test_dot_identity(model):
    dot = export_dot(identity_diagram(model.boxes["controller"]))
    assert dot.startswith('digraph "id_controller" {')
    box_nodes = [line for line in dot.splitlines() if "label=" in line and "->" not in line and "shape=point" not in line]
    assert len(box_nodes) == 1
    assert dot.count("->") == 4


def test_dot_flat_marathon2(model):
    wd = canonical_form(substitute(model.diagrams["marathon2"], "nav2", model.diagrams["nav2_internal"]))
    dot = export_dot(wd, model.resources)
    for occ in wd.occurrence_names():
        assert f'"{occ}" [label=' in dot
    for topic in ("/map", "/scan", "/cmd_vel", "/goal_pose", "/amcl_pose"):
        assert topic in dot
    assert export_dot(wd, model.resources) == dot


def test_dot_equal_canonical_inputs_give_equal_bytes(model):
    wd = model.diagrams["nav2_internal"]
    shuffled = type(wd)(wd.name, wd.outer, tuple(reversed(wd.inner)), tuple(reversed(wd.wires)))
    assert export_dot(canonical_form(shuffled)) == export_dot(canonical_form(wd))


def test_dot_pushout(model):
    spec = model.spans["robots"]
    dot = export_dot(pushout_partial(spec.span), aliases=spec.aliases)
    assert "robot_2_speed_3_and_finger_gripper" in dot
    assert dot.count('shape=box') == 3


def test_where_reports_lines(model):
    assert re.match(r".*marathon2\.model:\d+$", model.where("diagram:marathon2"))
