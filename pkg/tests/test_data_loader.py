"""
Instance file parsing and canonical serialization.
"""

import json
import sys
import os
from fractions import Fraction

import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.data_loader import (
    FIXTURES_DIR,
    angle_to_json,
    instance_digest,
    load_instance,
    load_nodes,
    parse_angle,
    parse_instance,
    save_instance,
    serialize_instance,
)
from src.exceptions import DegenerateConfiguration, InstanceParseError
from src.arithmetic import GaussianRational
from src.geometry import Angle, CircleConfig, CollinearConfig


def test_load_fixtures():
    square = load_instance(FIXTURES_DIR / "square.json")
    assert square.kind == "circle"
    assert square.count == 4
    assert isinstance(square.to_config(), CircleConfig)

    line = load_instance(FIXTURES_DIR / "collinear_rational.json")
    assert line.positions == [0, Fraction(1, 2), 3, Fraction(7, 3), -2]
    config = line.to_config()
    assert isinstance(config, CollinearConfig)
    assert config.positions[0] == -2

    rational = load_instance(FIXTURES_DIR / "pythagorean_exact.json")
    assert rational.to_config().m_parameters == (0, 1, 2, 3)


def test_duplicate_fixture_parses_but_is_degenerate():
    instance = load_instance(FIXTURES_DIR / "duplicate_angle.json")
    assert instance.half_angles[1] == Angle(offset=Fraction(1, 2))
    with pytest.raises(DegenerateConfiguration):
        instance.to_config()


@pytest.mark.parametrize("obj, expected", [
    ({"pi_num": 1, "pi_den": 4}, Angle.pi(1, 4)),
    ({"pi_num": -3}, Angle.pi(-3)),
    ("0.25", Angle(offset=Fraction(1, 4))),
    ({"num": "1", "den": "3"}, Angle(offset=Fraction(1, 3))),
    ({"pi_num": 1, "pi_den": 2, "num": "1", "den": "1000000"}, Angle(Fraction(1, 2), Fraction(1, 10 ** 6))),
])
def test_parse_angle_forms(obj, expected):
    angle = parse_angle(obj, "half_angles[0]")
    assert angle == expected
    assert parse_angle(angle_to_json(angle), "x") == angle


@pytest.mark.parametrize("raw, location", [
    ([], "$"),
    ({"kind": "sphere"}, "kind"),
    ({"kind": "circle"}, "$"),
    ({"kind": "circle", "half_angles": ["0"], "m_parameters": ["1"]}, "$"),
    ({"kind": "circle", "half_angles": []}, "half_angles"),
    ({"kind": "circle", "half_angles": ["0.5"]}, "half_angles"),
    ({"kind": "circle", "m_parameters": ["1"]}, "m_parameters"),
    ({"kind": "line", "positions": ["1"]}, "positions"),
    ({"kind": "circle", "half_angles": "0, 1"}, "half_angles"),
    ({"kind": "circle", "half_angles": ["0", 1.5]}, "half_angles[1]"),
    ({"kind": "circle", "half_angles": ["0", {"pi_num": 1, "pi_den": 0}]}, "half_angles[1]"),
    ({"kind": "circle", "half_angles": ["0", {"pi_num": 1, "extra": 2}]}, "half_angles[1]"),
    ({"kind": "circle", "radius": "0", "half_angles": ["0"]}, "radius"),
    ({"kind": "circle", "m_parameters": ["1", "x"]}, "m_parameters[1]"),
    ({"kind": "circle", "positions": ["1"], "half_angles": ["0"]}, "positions"),
    ({"kind": "line", "positions": ["1", {"num": "1", "den": "-2"}]}, "positions[1]"),
    ({"kind": "line", "half_angles": ["0"], "positions": ["1"]}, "$"),
    ({"kind": "line"}, "positions"),
    ({"kind": "line", "positions": ["1"], "generator": []}, "generator"),
])
def test_parse_errors_carry_location(raw, location):
    with pytest.raises(InstanceParseError) as info:
        parse_instance(raw)
    assert info.value.location == location
    assert str(info.value).startswith(f"{location}: ")


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(InstanceParseError):
        load_instance(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text('{"kind": "line",\n "positions": [1, 2,]}', encoding="utf-8")
    with pytest.raises(InstanceParseError) as info:
        load_instance(broken)
    assert info.value.location.startswith("broken.json:2:")


def test_serialization_is_canonical(tmp_path):
    raw = {
        "generator": {"seed": 1},
        "half_angles": [{"pi_num": 2, "pi_den": 4}, "0.5"],
        "kind": "circle",
        "radius": "3/2",
    }
    instance = parse_instance(raw)
    text = serialize_instance(instance)
    assert text.endswith("}\n")
    assert list(json.loads(text)) == ["kind", "radius", "half_angles", "generator"]
    assert json.loads(text)["radius"] == {"num": "3", "den": "2"}
    assert json.loads(text)["half_angles"] == [{"pi_num": 1, "pi_den": 2}, {"num": "1", "den": "2"}]

    path = tmp_path / "instance.json"
    digest = save_instance(instance, path)
    assert digest == instance_digest(instance)
    assert path.read_text(encoding="utf-8") == text
    assert serialize_instance(load_instance(path)) == text


def test_load_nodes(tmp_path):
    path = tmp_path / "nodes.json"
    path.write_text(json.dumps({"nodes": ["1/2", 3, {"re": "0", "im": "-1"}]}), encoding="utf-8")
    assert load_nodes(path) == [Fraction(1, 2), 3, GaussianRational(0, -1)]

    path.write_text(json.dumps({"nodes": []}), encoding="utf-8")
    with pytest.raises(InstanceParseError) as info:
        load_nodes(path)
    assert info.value.location == "nodes"

    path.write_text(json.dumps({"nodes": [1, {"re": "x", "im": "0"}]}), encoding="utf-8")
    with pytest.raises(InstanceParseError) as info:
        load_nodes(path)
    assert info.value.location == "nodes[1].re"
