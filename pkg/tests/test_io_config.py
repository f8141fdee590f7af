import json
import math

import numpy as np
import pytest

from kldro.config import RunConfig, load_config
from kldro.errors import InputError
from kldro.io import (
    fmt, parse_vector, read_centers, read_cost_matrix, read_csv, read_observations, write_csv,
    write_json,
)


def test_observations_with_header(tmp_path):
    p = tmp_path / "obs.txt"
    p.write_text("scenario\n1\n2\n\n2\n")
    assert read_observations(p) == [1, 2, 2]


@pytest.mark.parametrize("text, line", [("1\nx\n", 2), ("1\n0\n", 2), ("scenario\n1\n2\n1.5\n", 4)])
def test_observation_errors_carry_line(tmp_path, text, line):
    p = tmp_path / "obs.txt"
    p.write_text(text)
    with pytest.raises(InputError, match=f":{line}:"):
        read_observations(p)


def test_empty_observations(tmp_path):
    p = tmp_path / "obs.txt"
    p.write_text("")
    with pytest.raises(InputError):
        read_observations(p)


def test_cost_matrix(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("decision,s1,s2\nbuy,0,1\nhold,0.5,0.25\n")
    C = read_cost_matrix(p)
    assert C.decision_labels == ("buy", "hold")
    np.testing.assert_array_equal(C.entries, [[0, 1], [0.5, 0.25]])


@pytest.mark.parametrize("text", ["decision,s1\n", "d,s1,s2\na,1\n", "d,s1,s2\na,1,x\n", "d,s1,s2\na,1,inf\n"])
def test_cost_matrix_errors(tmp_path, text):
    p = tmp_path / "c.csv"
    p.write_text(text)
    with pytest.raises(InputError):
        read_cost_matrix(p)


def test_centers_accept_fractions(tmp_path):
    p = tmp_path / "centers.csv"
    p.write_text("p1,p2,p3\n1/3,1/3,1/3\n14/18,3/18,1/18\n")
    cs = read_centers(p)
    assert len(cs) == 2 and cs[1][0] == pytest.approx(14 / 18)


def test_parse_vector():
    assert parse_vector("1/2, 0.5") == [0.5, 0.5]
    with pytest.raises(InputError):
        parse_vector("a,b")


def test_csv_round_trip_is_lossless(tmp_path, rng):
    vals = rng.normal(size=50) * 10.0 ** rng.integers(-300, 300, size=50)
    path = write_csv(tmp_path / "x.csv", ["i", "v"], enumerate(vals))
    _, rows = read_csv(path)
    assert [float(v) for _, v in rows] == vals.tolist()
    assert fmt(np.float64(0.1)) == "0.1" and fmt(np.int64(3)) == "3"


def test_json_handles_infinities(tmp_path):
    p = write_json(tmp_path / "r.json", {"b": -math.inf, "a": np.float64(1.5), "c": np.array([1, 2])})
    assert json.loads(p.read_text()) == {"a": 1.5, "b": "-inf", "c": [1, 2]}
    assert p.read_text().index('"a"') < p.read_text().index('"b"')


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"rate": 0.2, "tmax": 50, "kinds": ["dro"]}))
        cfg = load_config(p, {"rate": 0.05, "tmax": None})
        assert cfg.rate == 0.05 and cfg.tmax == 50 and cfg.kinds == ["dro"]

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text('{"rte": 0.1}')
        with pytest.raises(InputError, match="rte"):
            load_config(p, {})

    @pytest.mark.parametrize(
        "kw", [{"rate": -1.0}, {"tmin": 5, "tmax": 4}, {"grid": 0}, {"beta": 1.5}, {"kinds": ["bogus"]}, {"kinds": []}]
    )
    def test_validation(self, kw):
        with pytest.raises(InputError):
            RunConfig(**kw).validate()

    def test_range(self):
        assert list(RunConfig(tmin=3, tmax=9, tstep=3).Ts) == [3, 6, 9]
