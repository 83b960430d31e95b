"""On-disk formats: trajectory CSV/JSONL, plot data, and run manifests.

Floats in data files are written with 17 significant digits, which round-trips
every float64 exactly.
"""
import csv
import hashlib
import json
import os
from datetime import datetime, timezone

import numpy as np

__all__ = [
    "MANIFEST_VERSION",
    "fmt",
    "trajectory_header",
    "trajectory_rows_csv",
    "trajectory_rows_jsonl",
    "read_trajectories",
    "sha256_file",
    "utc_now",
    "write_manifest",
    "read_manifest",
    "manifest_path_for",
]

MANIFEST_VERSION = 1


def fmt(v):
    return format(float(v), ".17g")


def trajectory_header(dim):
    return "walk_id,step," + ",".join(f"x{k + 1}" for k in range(dim)) + "\n"


def trajectory_rows_csv(walk_id, steps, positions):
    prefix = f"{walk_id},"
    return "".join(
        prefix + str(int(s)) + "," + ",".join(fmt(v) for v in row) + "\n" for s, row in zip(steps, positions)
    )


def trajectory_rows_jsonl(walk_id, steps, positions):
    return "".join(
        f'{{"walk_id":{walk_id},"step":{int(s)},"x":[' + ",".join(fmt(v) for v in row) + "]}\n"
        for s, row in zip(steps, positions)
    )


def read_trajectories(path):
    """Read a trajectory file into ``{walk_id: (steps, positions)}``."""
    walks = {}
    if str(path).endswith(".jsonl"):
        with open(path) as fh:
            for line in fh:
                rec = json.loads(line)
                walks.setdefault(rec["walk_id"], []).append((rec["step"], rec["x"]))
    else:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:2] != ["walk_id", "step"] or not all(h == f"x{k + 1}" for k, h in enumerate(header[2:])):
                raise ValueError(f"unexpected trajectory header {header!r}")
            for row in reader:
                walks.setdefault(int(row[0]), []).append((int(row[1]), [float(v) for v in row[2:]]))
    return {
        w: (np.array([s for s, _ in rows], dtype=np.int64), np.array([x for _, x in rows], dtype=float))
        for w, rows in walks.items()
    }


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def utc_now():
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def manifest_path_for(out):
    return f"{out}.manifest.json"


def write_manifest(path, *, tool_version, spec, seed, command, started, outputs, extra=None):
    doc = {
        "manifest_version": MANIFEST_VERSION,
        "tool_version": tool_version,
        "spec": spec,
        "seed": seed,
        "command": list(command),
        "started": started,
        "finished": utc_now(),
        "outputs": [{"path": os.path.abspath(p), "sha256": sha256_file(p)} for p in outputs],
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc


def read_manifest(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("manifest_version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {doc.get('manifest_version')!r}")
    return doc
