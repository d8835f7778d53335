"""Persistence: Matrix Market pencils, eigenvalue CSVs, JSON manifests.

An out-prefix P maps to P.A.mtx, P.B.mtx, P.S.mtx, P.M.mtx and P.stats.json
(P ending in a path separator drops the extra dot: PA.mtx etc. inside the
directory). A and B are stored with Matrix Market symmetric structure, the
raw one-sided S and M as general matrices.
"""

import json
import os

import numpy as np
from scipy import io as spio
from scipy import sparse

from .assembly import AssemblyStats, OperatorPencil

_PENCIL_PARTS = ("A", "B", "S", "M")


def pencil_paths(prefix: str) -> dict:
    """Filenames for every artifact of a pencil prefix."""
    if prefix.endswith(os.sep) or prefix.endswith("/"):
        os.makedirs(prefix, exist_ok=True)
        stem = prefix
    else:
        parent = os.path.dirname(prefix)
        if parent:
            os.makedirs(parent, exist_ok=True)
        stem = prefix + "."
    paths = {part: f"{stem}{part}.mtx" for part in _PENCIL_PARTS}
    paths["stats"] = f"{stem}stats.json"
    return paths


def write_pencil(prefix: str, pencil: OperatorPencil) -> dict:
    paths = pencil_paths(prefix)
    spio.mmwrite(paths["A"], pencil.stiffness, symmetry="symmetric", precision=17)
    spio.mmwrite(paths["B"], pencil.mass, symmetry="symmetric", precision=17)
    spio.mmwrite(paths["S"], pencil.stiffness_raw, symmetry="general", precision=17)
    spio.mmwrite(paths["M"], pencil.mass_raw, symmetry="general", precision=17)
    payload = {"operator": pencil.operator, "dim": pencil.dim}
    if pencil.stats is not None:
        payload.update(pencil.stats.as_dict())
    write_json(paths["stats"], payload)
    return paths


def read_pencil(prefix: str) -> OperatorPencil:
    paths = pencil_paths(prefix)
    mats = {}
    for part in _PENCIL_PARTS:
        if not os.path.exists(paths[part]):
            raise FileNotFoundError(f"missing pencil file {paths[part]}")
        mats[part] = sparse.csr_matrix(spio.mmread(paths[part]))
    payload = read_json(paths["stats"])
    stats_fields = {f for f in AssemblyStats.__dataclass_fields__}
    stats = None
    if stats_fields <= set(payload):
        stats = AssemblyStats(**{f: payload[f] for f in stats_fields})
    return OperatorPencil(
        operator=payload["operator"],
        dim=int(payload["dim"]),
        stiffness_raw=mats["S"],
        mass_raw=mats["M"],
        stiffness=mats["A"],
        mass=mats["B"],
        stats=stats,
    )


def write_json(path: str, payload: dict):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_eigenvalues_csv(path: str, eigenvalues: np.ndarray,
                          residuals: np.ndarray | None = None,
                          meta: dict | None = None):
    """index,eigenvalue[,residual] rows; metadata as leading '#' comments."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        if residuals is None:
            fh.write("index,eigenvalue\n")
            for i, lam in enumerate(eigenvalues):
                fh.write(f"{i},{float(lam)!r}\n")
        else:
            fh.write("index,eigenvalue,residual\n")
            for i, (lam, res) in enumerate(zip(eigenvalues, residuals)):
                fh.write(f"{i},{float(lam)!r},{float(res)!r}\n")


def read_eigenvalues_csv(path: str) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("index"):
                continue
            values.append(float(line.split(",")[1]))
    return np.array(values)


def write_table_csv(path: str, header: list, rows: list):
    """Plain comma-joined table; floats rendered by repr for full precision."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)

    def render(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(render(v) for v in row) + "\n")
