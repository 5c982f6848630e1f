"""Plain-text persistence: edge lists, dense CSV, Matrix Market, JSON.

Every on-disk format is text so implementations in other languages can
interoperate.  Matrix files are chosen by extension: ``.csv`` for dense
comma-separated values, ``.mtx`` for Matrix Market.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy.io

from .graphs import GraphModel

__all__ = [
    "write_edge_list",
    "read_edge_list",
    "write_matrix",
    "read_matrix",
    "write_json",
    "read_json",
    "RunManifest",
]


def write_edge_list(g: GraphModel, path) -> None:
    """Header line ``n=<count>`` then one ``u v`` line per edge, 0-based."""
    lines = [f"n={g.n}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, tag: str = "imported") -> GraphModel:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()
             if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError(f"{path}: expected header line 'n=<count>'")
    n = int(lines[0][2:])
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    return GraphModel.from_edges(n, edges, tag=tag)


def write_matrix(mat: np.ndarray, path) -> None:
    path = Path(path)
    mat = np.asarray(mat, dtype=float)
    if path.suffix == ".csv":
        np.savetxt(path, mat, delimiter=",", fmt="%.17g")
    elif path.suffix == ".mtx":
        scipy.io.mmwrite(str(path), mat)
    else:
        raise ValueError(f"unsupported matrix format {path.suffix!r}")


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".csv":
        return np.atleast_2d(np.loadtxt(path, delimiter=","))
    if path.suffix == ".mtx":
        mat = scipy.io.mmread(str(path))
        return np.asarray(mat.todense() if hasattr(mat, "todense") else mat,
                          dtype=float)
    raise ValueError(f"unsupported matrix format {path.suffix!r}")


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True,
                                     allow_nan=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


@dataclass
class RunManifest:
    """Replay record written before any computation starts.

    The config snapshot plus the master seed determine every output file
    except wall-clock timings.
    """

    command: str
    config: dict
    master_seed: int
    out_dir: str
    artifact_version: str
    created_utc: str

    def write(self, path) -> None:
        write_json(asdict(self), path)

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls(**read_json(path))
