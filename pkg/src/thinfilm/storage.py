"""On-disk formats for trajectories and functional records.

Every file carries the config hash: CSV files start with a
``# config_hash=<hex>`` comment line, the binary trajectory stores it in
its header. Floats are written with ``repr`` so they round-trip exactly.

Binary layout (little-endian): magic ``b"TFL1"``, ``uint32`` cell count
``N``, the 64-character ASCII hash, then one record of ``N + 1`` doubles
``(t, h_0 .. h_{N-1})`` per snapshot.
"""

from __future__ import annotations

import csv
import json
import struct

import numpy as np

MAGIC = b"TFL1"
_HEADER = struct.Struct("<4sI64s")


def _hash_line(config_hash: str) -> str:
    return f"# config_hash={config_hash}\n"


def _read_hash(line: str) -> str:
    if not line.startswith("# config_hash="):
        raise ValueError("missing config_hash comment line")
    return line.strip().split("=", 1)[1]


def write_trajectory_csv(path, states, config_hash: str) -> None:
    N = states[0].h.size
    with open(path, "w", newline="") as fh:
        fh.write(_hash_line(config_hash))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"h{i}" for i in range(N)])
        for s in states:
            w.writerow([repr(float(s.t))] + [repr(float(v)) for v in s.h])


def read_trajectory_csv(path):
    """Return ``(config_hash, t, H)`` with ``H[k]`` the heights at ``t[k]``."""
    with open(path, newline="") as fh:
        chash = _read_hash(fh.readline())
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, -1)
    return chash, data[:, 0], data[:, 1:]


def write_trajectory_binary(path, states, config_hash: str) -> None:
    N = states[0].h.size
    if len(config_hash) != 64:
        raise ValueError("config hash must be 64 hex characters")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, N, config_hash.encode("ascii")))
        for s in states:
            rec = np.empty(N + 1, dtype="<f8")
            rec[0] = s.t
            rec[1:] = s.h
            fh.write(rec.tobytes())


def read_trajectory_binary(path):
    """Return ``(config_hash, t, H)`` from a binary trajectory file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, N, chash = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size % (N + 1):
        raise ValueError("truncated trajectory file")
    data = body.reshape(-1, N + 1)
    return chash.decode("ascii"), data[:, 0].copy(), data[:, 1:].copy()


def write_records_csv(path, records, config_hash: str) -> None:
    if not records:
        raise ValueError("no records")
    cols = records[0].columns()
    with open(path, "w", newline="") as fh:
        fh.write(_hash_line(config_hash))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([repr(float(getattr(r, c))) for c in cols])


def read_records_csv(path):
    """Return ``(config_hash, {column: array})``."""
    with open(path, newline="") as fh:
        chash = _read_hash(fh.readline())
        rows = list(csv.reader(fh))
    cols = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, len(cols))
    return chash, {c: data[:, k] for k, c in enumerate(cols)}


def write_records_jsonl(path, records, config_hash: str) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({"config_hash": config_hash, **r.as_dict()}, sort_keys=True) + "\n")


def write_json(path, obj) -> None:
    """Deterministic JSON (sorted keys, fixed indentation, trailing newline)."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
