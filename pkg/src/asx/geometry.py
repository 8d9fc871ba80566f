"""Maps raw data onto the unit sphere and back."""
import numpy as np

from .errors import DegenerateInputError
from .model import DataSet

ZERO_NORM = 1e-12
POLE_CUTOFF = 1.0 - 1e-12


def _as_matrix(points):
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"expected an N x d matrix, got shape {a.shape}")
    return a


def _unit_rows(a, what):
    norms = np.linalg.norm(a, axis=1)
    bad = np.flatnonzero(norms <= ZERO_NORM)
    if bad.size:
        raise DegenerateInputError(f"row {int(bad[0])} {what}", index=int(bad[0]))
    out = a / norms[:, None]
    # a second pass brings the norm to within one ulp of 1
    return out / np.linalg.norm(out, axis=1)[:, None], norms


def normalize(points, labels=None) -> DataSet:
    """Scale every row to unit l2 norm.

    Raises
    ------
    DegenerateInputError
        If a row has (near) zero norm; ``index`` names the row.
    """
    a = _as_matrix(points)
    out, _ = _unit_rows(a, "has zero norm and cannot be normalized")
    return DataSet(out, labels, {"norm": "unit"})


def center_normalize(points, labels=None):
    """Subtract the data mean, then scale rows to unit norm.

    Returns the normalized data set and the mean, so that results can be
    mapped back with ``mean + scale * row``.  The mean distance to the mean
    is recorded in ``meta["scale"]``.
    """
    a = _as_matrix(points)
    mean = a.mean(axis=0)
    out, norms = _unit_rows(a - mean, "coincides with the data mean")
    meta = {"norm": "center-unit", "mean": [float(v) for v in mean],
            "scale": float(norms.mean())}
    return DataSet(out, labels, meta), mean


def stereographic_lift(points, labels=None) -> DataSet:
    """Inverse-of-map-making projection of R^d onto the unit d-sphere in R^(d+1).

    The north pole is ``(0, ..., 0, 1)``; the origin maps to the south pole
    and the unit sphere of R^d is fixed on the equator.
    """
    P = _as_matrix(points)
    sq = np.einsum("ij,ij->i", P, P)
    Q = np.empty((P.shape[0], P.shape[1] + 1))
    Q[:, :-1] = 2.0 * P / (1.0 + sq)[:, None]
    Q[:, -1] = (sq - 1.0) / (sq + 1.0)
    return DataSet(Q, labels, {"norm": "stereographic"})


def stereographic_drop(points) -> np.ndarray:
    """Inverse of :func:`stereographic_lift`; accepts a DataSet or a matrix."""
    Q = points.points if isinstance(points, DataSet) else _as_matrix(points)
    last = Q[:, -1]
    bad = np.flatnonzero(last >= POLE_CUTOFF)
    if bad.size:
        raise DegenerateInputError(
            f"row {int(bad[0])} lies at the north pole; stereographic inverse is singular",
            index=int(bad[0]))
    return Q[:, :-1] / (1.0 - last)[:, None]


def to_sphere(points, mode="center-unit", labels=None) -> DataSet:
    """Apply one of the normalization modes offered on the command line."""
    if mode == "unit":
        return normalize(points, labels)
    if mode == "center-unit":
        return center_normalize(points, labels)[0]
    if mode == "stereographic":
        return stereographic_lift(points, labels)
    raise ValueError(f"unknown normalization mode {mode!r}")


def apply_like(points, meta, labels=None) -> DataSet:
    """Normalize new data exactly as the data described by ``meta`` was."""
    mode = meta.get("norm", "unit")
    if mode == "center-unit":
        a = _as_matrix(points)
        mean = np.asarray(meta["mean"], dtype=float)
        out, _ = _unit_rows(a - mean, "coincides with the training mean")
        return DataSet(out, labels, dict(meta))
    return to_sphere(points, mode, labels)


def from_sphere(rows, meta) -> np.ndarray:
    """Map unit-sphere (or hull) points back to the raw frame described by ``meta``."""
    rows = _as_matrix(rows)
    mode = meta.get("norm", "unit")
    if mode == "center-unit":
        return np.asarray(meta["mean"]) + meta.get("scale", 1.0) * rows
    if mode == "stereographic":
        return stereographic_drop(rows)
    return rows
