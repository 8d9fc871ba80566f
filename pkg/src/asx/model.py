"""Shared domain types and the on-disk model format.

All types are frozen dataclasses holding read-only numpy arrays; "mutation"
means building a new value with :func:`dataclasses.replace`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError, PersistenceError, ValidationError

FORMAT_VERSION = 1
NORM_TOL = 1e-9
# support membership, relative to the radius
ACTIVATION_THRESHOLD = 1e-6


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataSet:
    """``N`` unit-norm points of dimension ``d`` (one per row)."""

    points: np.ndarray
    labels: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"points must be a non-empty N x d matrix, got shape {pts.shape}")
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            raise ValidationError(
                f"DataSet rows must have unit norm; row {int(bad[0])} has norm {norms[bad[0]]!r}")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[0]:
                raise ValidationError(
                    f"label list has length {len(labels)}, expected {pts.shape[0]}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class BasisSet:
    """``p`` basis vectors stored as the columns of a ``d x p`` matrix, plus the hull radius."""

    bases: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        X = _frozen(self.bases)
        if X.ndim != 2:
            raise ValidationError(f"bases must be a d x p matrix, got shape {X.shape}")
        if X.shape[1] < 2:
            raise ValidationError(f"BasisSet needs p >= 2 columns, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("bases contain non-finite entries")
        norms = np.linalg.norm(X, axis=0)
        bad = np.flatnonzero(norms > 1.0 + NORM_TOL)
        if bad.size:
            raise ValidationError(
                f"basis column norm must be <= 1; column {int(bad[0])} has norm {norms[bad[0]]!r}")
        r = float(self.radius)
        if not (0.0 < r <= 1.0):
            raise ValidationError(f"radius must lie in (0, 1], got {r!r}")
        object.__setattr__(self, "bases", X)
        object.__setattr__(self, "radius", r)

    @property
    def d(self):
        return self.bases.shape[0]

    @property
    def p(self):
        return self.bases.shape[1]


@dataclass(frozen=True)
class CoefficientVector:
    """Nonnegative coefficients with l1 mass equal to ``radius``."""

    values: np.ndarray
    radius: float = 1.0
    threshold: float = ACTIVATION_THRESHOLD

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("coefficient vector must be a non-empty 1-d array")
        if np.any(v < 0):
            raise ValidationError("coefficients must be nonnegative")
        if abs(v.sum() - self.radius) > 1e-8:
            raise ValidationError(
                f"coefficients must sum to the radius {self.radius!r}, got {v.sum()!r}")
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.values > self.threshold * self.radius))


@dataclass(frozen=True)
class DirichletParams:
    alpha: np.ndarray

    def __post_init__(self):
        a = _frozen(self.alpha)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("alpha must be a non-empty 1-d array")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValidationError("Dirichlet alpha entries must be finite and > 0")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    count: int = 0
    dirichlet: Optional[DirichletParams] = None

    def __post_init__(self):
        verts = tuple(int(v) for v in self.vertices)
        if not verts:
            raise ValidationError("simplex vertex set must be nonempty")
        if any(b <= a for a, b in zip(verts, verts[1:])):
            raise ValidationError(f"simplex vertices must be strictly sorted, got {verts}")
        if verts[0] < 0:
            raise ValidationError(f"negative vertex index in {verts}")
        if int(self.count) < 0:
            raise ValidationError("activation count must be nonnegative")
        if self.dirichlet is not None and self.dirichlet.alpha.size != len(verts):
            raise ValidationError(
                f"Dirichlet alpha has length {self.dirichlet.alpha.size}, "
                f"simplex has {len(verts)} vertices")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "count", int(self.count))

    @property
    def dim(self):
        return len(self.vertices) - 1


@dataclass(frozen=True)
class SimplicialModel:
    basis: BasisSet
    simplices: tuple = ()
    pruned: bool = False
    trace: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        simplices = tuple(self.simplices)
        p, d = self.basis.p, self.basis.d
        seen = set()
        for k, s in enumerate(simplices):
            if s.vertices[-1] >= p:
                raise ValidationError(
                    f"simplex {k} has vertex index {s.vertices[-1]} >= p = {p}")
            if s.dim > min(p - 1, d):
                raise ValidationError(
                    f"simplex {k} has dimension {s.dim} > min(p - 1, d) = {min(p - 1, d)}")
            if s.vertices in seen:
                raise ValidationError(f"duplicate simplex {s.vertices}")
            seen.add(s.vertices)
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "trace", tuple(float(t) for t in self.trace))
        object.__setattr__(self, "pruned", bool(self.pruned))

    @property
    def radius(self):
        return self.basis.radius

    def vertex_matrix(self, k) -> np.ndarray:
        """Columns of the basis belonging to simplex ``k``."""
        return self.basis.bases[:, list(self.simplices[k].vertices)]


# -- persistence -------------------------------------------------------------

def _dumps(obj):
    return json.dumps(obj, allow_nan=False, separators=(", ", ": "))


def to_text(model: SimplicialModel) -> str:
    X = model.basis.bases
    lines = ["{",
             f'  "version": {FORMAT_VERSION},',
             f'  "d": {X.shape[0]},',
             f'  "p": {X.shape[1]},',
             f'  "radius": {_dumps(model.radius)},']
    cols = [_dumps([float(v) for v in X[:, j]]) for j in range(X.shape[1])]
    lines.append('  "bases": [')
    lines.append(",\n".join("    " + c for c in cols))
    lines.append("  ],")
    recs = []
    for s in model.simplices:
        rec = {"vertices": list(s.vertices), "count": s.count}
        if s.dirichlet is not None:
            rec["alpha"] = [float(a) for a in s.dirichlet.alpha]
        recs.append("    " + _dumps(rec))
    if recs:
        lines.append('  "simplices": [')
        lines.append(",\n".join(recs))
        lines.append("  ],")
    else:
        lines.append('  "simplices": [],')
    lines.append(f'  "pruned": {_dumps(model.pruned)},')
    lines.append(f'  "training_stats": {_dumps({"objective": list(model.trace)})},')
    lines.append(f'  "meta": {json.dumps(model.meta, sort_keys=True, allow_nan=False)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> SimplicialModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model file: {exc.msg}", row=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("model file must contain a JSON object")

    def need(key):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
        return doc[key]

    version = need("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported model format version {version!r}")
    d, p = int(need("d")), int(need("p"))
    try:
        bases = np.array(need("bases"), dtype=float)
    except (TypeError, ValueError):
        raise ParseError("field 'bases' must be a p x d array of numbers") from None
    if bases.shape != (p, d):
        raise ValidationError(f"field 'bases' has shape {bases.shape}, expected ({p}, {d})")
    basis = BasisSet(bases.T, float(need("radius")))
    simplices = []
    for k, rec in enumerate(need("simplices")):
        try:
            alpha = rec.get("alpha")
            simplices.append(Simplex(
                tuple(rec["vertices"]), int(rec["count"]),
                DirichletParams(alpha) if alpha is not None else None))
        except (KeyError, TypeError, AttributeError):
            raise ParseError(f"field 'simplices[{k}]' must have 'vertices' and 'count'") from None
    stats = doc.get("training_stats") or {}
    return SimplicialModel(basis, tuple(simplices), bool(need("pruned")),
                           tuple(stats.get("objective", ())), dict(doc.get("meta") or {}))


def save_model(model: SimplicialModel, path) -> None:
    """Write ``model`` as a self-describing JSON document."""
    text = to_text(model)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise PersistenceError(f"cannot write model file ({exc.strerror})", path) from exc


def load_model(path) -> SimplicialModel:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PersistenceError(f"cannot read model file ({exc.strerror})", path) from exc
    return from_text(text)


def models_equal(a: SimplicialModel, b: SimplicialModel, tol: float = 1e-12) -> bool:
    """Field-by-field comparison: exact on integers, ``tol`` on scalars."""
    if a.basis.bases.shape != b.basis.bases.shape or a.pruned != b.pruned:
        return False
    if abs(a.radius - b.radius) > tol or np.max(np.abs(a.basis.bases - b.basis.bases)) > tol:
        return False
    if len(a.simplices) != len(b.simplices) or len(a.trace) != len(b.trace):
        return False
    if any(abs(x - y) > tol for x, y in zip(a.trace, b.trace)):
        return False
    for s, t in zip(a.simplices, b.simplices):
        if s.vertices != t.vertices or s.count != t.count:
            return False
        if (s.dirichlet is None) != (t.dirichlet is None):
            return False
        if s.dirichlet is not None and np.max(np.abs(s.dirichlet.alpha - t.dirichlet.alpha)) > tol:
            return False
    return True


def simplex_dims(simplices: Sequence[Simplex]) -> np.ndarray:
    return np.array([s.dim for s in simplices], dtype=int)
