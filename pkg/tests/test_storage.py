import json

import numpy as np
import pytest

from thinfilm import profiles, storage
from thinfilm.grid import Grid
from thinfilm.params import DiscParams, ModelParams, default_config
from thinfilm.solver import run

HASH = "ab" * 32


@pytest.fixture(scope="module")
def traj():
    cfg = default_config(model=ModelParams(n=1.0, alpha=0.2),
                         disc=DiscParams(N=16, t_end=0.01, dt0=1e-3))
    return run(cfg, profiles.cosine(Grid.from_config(cfg), 1.0, 0.3))


def test_trajectory_csv_round_trip(traj, tmp_path):
    p = tmp_path / "t.csv"
    storage.write_trajectory_csv(p, traj.states, HASH)
    assert p.read_text().startswith(f"# config_hash={HASH}\nt,h0,h1,")
    h, t, H = storage.read_trajectory_csv(p)
    assert h == HASH
    assert np.array_equal(t, [s.t for s in traj.states])
    assert np.array_equal(H, np.array([s.h for s in traj.states]))


def test_trajectory_binary_round_trip(traj, tmp_path):
    p = tmp_path / "t.bin"
    storage.write_trajectory_binary(p, traj.states, HASH)
    h, t, H = storage.read_trajectory_binary(p)
    assert h == HASH and H.shape == (len(traj.states), 16)
    assert np.array_equal(H[-1], traj.final.h) and t[-1] == traj.final.t
    raw = p.read_bytes()
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        storage.read_trajectory_binary(tmp_path / "bad.bin")
    (tmp_path / "cut.bin").write_bytes(raw[:-3])
    with pytest.raises(ValueError):
        storage.read_trajectory_binary(tmp_path / "cut.bin")
    with pytest.raises(ValueError):
        storage.write_trajectory_binary(p, traj.states, "short")


def test_records_round_trip(traj, tmp_path):
    p = tmp_path / "f.csv"
    storage.write_records_csv(p, traj.records, HASH)
    h, cols = storage.read_records_csv(p)
    assert h == HASH
    assert list(cols) == list(type(traj.records[0]).columns())
    assert np.array_equal(cols["E0_alpha"], traj.series("E0_alpha"))
    with pytest.raises(ValueError):
        storage.write_records_csv(p, [], HASH)
    q = tmp_path / "f.jsonl"
    storage.write_records_jsonl(q, traj.records, HASH)
    lines = [json.loads(s) for s in q.read_text().splitlines()]
    assert len(lines) == len(traj.records) and all(d["config_hash"] == HASH for d in lines)


def test_missing_hash_line(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("t,h0\n0.0,1.0\n")
    with pytest.raises(ValueError):
        storage.read_trajectory_csv(p)


def test_write_json_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    storage.write_json(a, {"z": 1, "a": [1.5, float("inf")]})
    storage.write_json(b, {"a": [1.5, float("inf")], "z": 1})
    assert a.read_bytes() == b.read_bytes() and a.read_text().endswith("\n")
