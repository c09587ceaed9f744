import numpy as np
import pytest

from qharmony import artifacts
from qharmony.errors import ConfigError
from qharmony.generator import run_chain
from qharmony.rng import make_rng


def test_p_hhl_round_trip(pipeline, tmp_path):
    p = pipeline.hhl().p_hhl
    path = tmp_path / "p.csv"
    artifacts.write_p_hhl(path, p, pipeline.pairs)
    back, keys = artifacts.read_p_hhl(path)
    np.testing.assert_array_equal(back, p)
    assert keys[1] == (1, 59, 60) and len(keys) == 49
    assert abs(back.sum() - 1) < 1e-12


def test_joint_round_trip(joint, tmp_path):
    path = tmp_path / "j.csv"
    artifacts.write_joint(path, joint)
    back = artifacts.read_joint(path)
    assert len(back) == 784
    for (i, c1, c2), prob in back.items():
        assert joint.prob(i, c1, c2) == prob


def test_events_round_trip(pipeline, tmp_path):
    chain = run_chain(pipeline, 4, make_rng(9))
    ev = artifacts.chain_events(chain)
    assert len(ev) == 8 and ev[0].junction_valid is None and ev[2].junction_valid is True
    path = tmp_path / "e.csv"
    artifacts.write_events(path, ev)
    assert artifacts.read_events(path) == ev
    assert path.read_text().splitlines()[0] == "block,position,midi,chord_degree,junction_valid"


def test_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        artifacts.read_events(path)


def test_json_round_trip(tmp_path):
    data = {"a": np.float64(0.1), "b": np.arange(3), "c": [1.5, float("nan")], "d": {"x": np.int64(2)}}
    path = tmp_path / "r.json"
    artifacts.write_json(path, data)
    assert artifacts.read_json(path) == {"a": 0.1, "b": [0, 1, 2], "c": [1.5, None], "d": {"x": 2}}


def test_unwritable():
    with pytest.raises(ConfigError):
        artifacts.write_json("/proc/nope/x.json", {})


def test_format_table():
    text = artifacts.format_table(["a", "bb"], [[1, 0.5], ["x", None]])
    lines = text.splitlines()
    assert len(lines) == 4 and len({len(l) for l in lines}) == 1
