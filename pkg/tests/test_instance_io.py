"""Test instance files and CSV number formatting"""
import json

import pytest

from app.classes.election import Election, LocationProfile
from app.classes.exceptions import ConfigError
from app.helpers.format_number import format_float
from app.helpers.instance_io import dump_instance, load_instance


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(path)


def test_dump_then_load(tmp_path, multi4):
    election = Election(multi4, (1, 2, 4))
    positions = LocationProfile((multi4[1], multi4[2], multi4[4]))
    path = str(tmp_path / "multi.json")
    dump_instance(path, multi4, election, positions)

    candidates, loaded, loaded_positions = load_instance(path)
    assert candidates == multi4
    assert candidates.name == "multi"
    assert loaded.actions == (1, 2, 4)
    assert loaded_positions == positions


def test_load_without_profile(tmp_path):
    path = _write(tmp_path, "plain.json", {"dimension": 2, "candidates": [[0, 0], [1, 0], [0, 1]]})
    candidates, election, positions = load_instance(path)
    assert candidates.m == 3
    assert election is None
    assert positions is None


def test_actions_follow_sorted_candidates(tmp_path):
    path = _write(tmp_path, "shuffled.json", {"dimension": 1, "candidates": [[2], [-2], [0]], "actions": [1, 2, 3]})
    candidates, election, _ = load_instance(path)
    assert [p.coords[0] for p in candidates] == [-2.0, 0.0, 2.0]
    assert election.actions == (3, 1, 2)


def test_given_actions_follow_file_order(tmp_path):
    path = _write(tmp_path, "shuffled.json", {"dimension": 1, "candidates": [[2], [-2], [0]], "actions": [1, 1, 1]})
    _, election, _ = load_instance(path, actions=[1, 2, 3])
    assert election.actions == (3, 1, 2)


@pytest.mark.parametrize("name, payload", [
    ("broken.json", "{not json"),
    ("empty.json", ""),
    ("flat.json", {"dimension": 2, "candidates": [[0, 0], [1]]}),
    ("zero.json", {"dimension": 0, "candidates": [[], []]}),
    ("positions.json", {"dimension": 1, "candidates": [[0], [1]], "positions": [[0, 1]]}),
    ("actions.json", {"dimension": 1, "candidates": [[0], [1]], "actions": [3]}),
    ("instance.txt", {"dimension": 1, "candidates": [[0], [1]]}),
])
def test_invalid_files(tmp_path, name, payload):
    path = _write(tmp_path, name, payload)
    with pytest.raises(ConfigError):
        load_instance(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_instance(str(tmp_path / "missing.json"))


@pytest.mark.parametrize("value, expected", [
    (7 / 3, "2.33333333333"),
    (3.0, "3"),
    (0.0, "0"),
    (float("inf"), "inf"),
    (None, ""),
])
def test_format_float(value, expected):
    assert format_float(value) == expected
