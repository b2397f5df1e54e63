import json

import pytest

from gatx import jsonio
from gatx.bench import generate_mock_small, toy_instance
from gatx.model import StructuralError


@pytest.mark.parametrize("make", [toy_instance, lambda: generate_mock_small(4)])
def test_instance_round_trip(tmp_path, make):
    inst = make()
    path = tmp_path / "i.json"
    jsonio.save_instance(inst, path)
    back = jsonio.load_instance(path)
    assert back.matrix == inst.matrix
    assert (back.orders, back.vehicles, back.lsps, back.locations, back.name) == (
        inst.orders, inst.vehicles, inst.lsps, inst.locations, inst.name)
    assert json.loads(path.read_text())["schema_version"] == jsonio.SCHEMA_VERSION


def test_wrong_version_rejected():
    doc = jsonio.instance_to_dict(toy_instance())
    doc["schema_version"] = 99
    with pytest.raises(StructuralError):
        jsonio.instance_from_dict(doc)


def test_malformed_documents_rejected(tmp_path):
    doc = jsonio.instance_to_dict(toy_instance())
    del doc["orders"][0]["pickup"]
    with pytest.raises(StructuralError):
        jsonio.instance_from_dict(doc)
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(StructuralError):
        jsonio.load_instance(bad)


def test_strip_timing_is_recursive():
    doc = {"a": 1, "timing": {"seconds": 3}, "history": [{"seconds": 2, "b": 0}]}
    assert jsonio.strip_timing(doc) == {"a": 1, "history": [{"b": 0}]}
