import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from netsecopt import pipeline
from netsecopt.benchmark_gen import GenSpec, generate
from netsecopt.cli import main
from netsecopt.milp import Limits
from netsecopt.toy import toy_instance

SCHEMAS = Path(__file__).parent.parent / "docs" / "schemas"


def validator(name):
    registry = Registry().with_resources(
        (p.name, Resource.from_contents(json.loads(p.read_text())))
        for p in SCHEMAS.glob("*.json"))
    schema = json.loads((SCHEMAS / name).read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema, registry=registry)


@pytest.mark.parametrize("inst", [toy_instance(), generate(GenSpec(seed=1))],
                         ids=["toy", "pod4"])
def test_instance_schema(inst):
    validator("instance.schema.json").validate(json.loads(inst.to_json()))


def test_attack_graph_schema(toy_graph):
    validator("attack_graph.schema.json").validate(toy_graph.to_dict())


def test_configuration_and_report_schema(tmp_path):
    path = tmp_path / "toy.json"
    path.write_text(toy_instance().to_json())
    out = tmp_path / "c.json"
    assert main(["solve", str(path), "--alpha", "0.9", "--out", str(out)]) == 0
    validator("configuration.schema.json").validate(json.loads(out.read_text()))
    rep = tmp_path / "r.json"
    assert main(["evaluate", str(path), "--config", str(out), "--out", str(rep)]) == 0
    validator("report.schema.json").validate(json.loads(rep.read_text()))


def test_sweep_schema():
    res = pipeline.sweep(toy_instance(), [0.5, 1.0], [0.0, 1.0], Limits(gap=1e-9), timing=True)
    validator("sweep.schema.json").validate(json.loads(pipeline.report(res, "json")))


def test_weights_and_names_schema(tmp_path):
    validator("weights.schema.json").validate({"alpha": 0.5, "alpha3": 0.05})
    path = tmp_path / "toy.json"
    path.write_text(toy_instance().to_json())
    assert main(["export", str(path), "--out", str(tmp_path / "m.mps")]) == 0
    names = json.loads((tmp_path / "m.mps.names.json").read_text())
    validator("names.schema.json").validate(names)


def test_schema_rejects_bad_instance():
    bad = json.loads(toy_instance().to_json())
    bad["network"]["flows"][0]["quantity"] = -1
    assert not validator("instance.schema.json").is_valid(bad)
