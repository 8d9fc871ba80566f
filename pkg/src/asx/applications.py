"""Uses of a trained model: nearest-reconstruction classification,
Dirichlet-based synthesis and 2D-to-3D pose lifting."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import digamma, polygamma

from .errors import (ConfigurationError, EstimationError, SolverError, SynthesisError,
                     ValidationError)
from .model import DataSet, DirichletParams, SimplicialModel
from .solver import DEFAULT, SolverConfig, active_set, project_onto_model

DIRICHLET_EPS = 1e-6
DIRICHLET_MAX_ITER = 1000
DIRICHLET_TOL = 1e-10


# -- classification ------------------------------------------------------------

@dataclass(frozen=True)
class ClassModel:
    classes: dict

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ConfigurationError("a class model needs at least two classes")
        dims = {m.basis.d for m in self.classes.values()}
        if len(dims) != 1:
            raise ConfigurationError(f"class models disagree on data dimension: {sorted(dims)}")
        for label, m in self.classes.items():
            if not m.simplices:
                raise ConfigurationError(f"class {label!r} has an empty model")


def classify(class_model: ClassModel, point, cfg: SolverConfig = DEFAULT):
    """Label of the class whose model reconstructs ``point`` best.

    Returns ``(label, errors)`` with the error of every class; ties go to the
    smallest label.
    """
    errors = {label: project_onto_model(m, point, cfg)[2]
              for label, m in class_model.classes.items()}
    label = min(sorted(errors, key=str), key=lambda k: errors[k])
    return label, errors


def top_k(errors: dict, k: int) -> list:
    """The ``k`` labels with the smallest reconstruction errors."""
    return sorted(errors, key=lambda lab: (errors[lab], str(lab)))[:k]


def stack_snippets(points, window=10):
    """Concatenate each row with the ``window - 1`` rows that follow it.

    A sequence of ``N`` frames yields ``N - window + 1`` snippets, and none
    when it is shorter than the window.
    """
    P = np.asarray(points, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    n = P.shape[0] - window + 1
    if n < 1:
        return np.zeros((0, P.shape[1] * window))
    return np.hstack([P[i:i + n] for i in range(window)])


# -- Dirichlet ---------------------------------------------------------------

def _inv_digamma(y, iters=5):
    # Newton on digamma(x) = y from the usual piecewise starting point
    x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y - digamma(1.0)))
    for _ in range(iters):
        x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def fit_dirichlet(samples, min_samples=5) -> DirichletParams:
    """Maximum-likelihood Dirichlet parameters by the fixed-point iteration
    ``digamma(a_i) = digamma(sum a) + mean log x_i``.

    Samples are smoothed by ``1e-6`` and renormalized before taking logs.
    With fewer than ``min_samples`` samples the flat ``alpha = 1`` is returned.
    """
    rows = [np.asarray(s, dtype=float).ravel() for s in samples]
    if not rows:
        raise ValidationError("no samples to fit")
    k = rows[0].size
    if any(r.size != k for r in rows):
        raise ValidationError("samples have different lengths")
    X = np.vstack(rows)
    if np.any(X < 0) or np.any(np.abs(X.sum(axis=1) - 1.0) > 1e-8):
        raise ValidationError("samples must be nonnegative and sum to 1")
    if X.shape[0] < min_samples:
        return DirichletParams(np.ones(k))
    X = (X + DIRICHLET_EPS) / (1.0 + k * DIRICHLET_EPS)
    logbar = np.log(X).mean(axis=0)

    # moment matching start
    m1 = X.mean(axis=0)
    m2 = (X * X).mean(axis=0)
    var = m2 - m1 * m1
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.median((m1 - m2)[var > 0] / var[var > 0]) if np.any(var > 0) else np.nan
    if not np.isfinite(s) or s <= 0:
        s = float(k)
    alpha = s * m1
    for _ in range(DIRICHLET_MAX_ITER):
        new = _inv_digamma(digamma(alpha.sum()) + logbar)
        done = np.max(np.abs(new - alpha)) < DIRICHLET_TOL
        alpha = new
        if done:
            break
    return DirichletParams(alpha)


def assign(model: SimplicialModel, data: DataSet, cfg: SolverConfig = DEFAULT):
    """Nearest simplex and its barycentric coefficients for every point."""
    out = []
    for y in data.points:
        k, beta, err = project_onto_model(model, y, cfg)
        out.append((k, beta, err))
    return out


def fit_model_dirichlet(model: SimplicialModel, data: DataSet, cfg: SolverConfig = DEFAULT,
                        min_samples=5) -> SimplicialModel:
    """Fit a Dirichlet to the coefficients of the points projected onto each simplex."""
    groups = [[] for _ in model.simplices]
    for k, beta, _ in assign(model, data, cfg):
        groups[k].append(beta / model.radius)
    simplices = []
    for s, g in zip(model.simplices, groups):
        alpha = fit_dirichlet(g, min_samples).alpha if g else np.ones(len(s.vertices))
        simplices.append(replace(s, dirichlet=DirichletParams(alpha)))
    return replace(model, simplices=tuple(simplices))


def synthesize(model: SimplicialModel, count: int, seed=0, return_index=False):
    """Sample ``count`` points: a simplex by activation count, then Dirichlet coefficients."""
    if not model.simplices:
        raise SynthesisError("model has no simplices")
    if any(s.dirichlet is None for s in model.simplices):
        raise SynthesisError("every simplex needs Dirichlet parameters; fit them first")
    w = np.array([s.count for s in model.simplices], dtype=float)
    if w.sum() <= 0:
        raise SynthesisError("all activation counts are zero")
    rng = np.random.default_rng(seed)
    which = rng.choice(len(w), size=count, p=w / w.sum())
    out = np.empty((count, model.basis.d))
    for i, k in enumerate(which):
        beta = model.radius * rng.dirichlet(model.simplices[k].dirichlet.alpha)
        out[i] = model.vertex_matrix(k) @ beta
    return (out, which) if return_index else out


# -- pose lifting ------------------------------------------------------------

@dataclass(frozen=True)
class CameraMatrix:
    """Weak-perspective 2 x 3 projector."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (2, 3) or not np.all(np.isfinite(m)):
            raise ValidationError(f"camera must be a finite 2 x 3 matrix, got shape {m.shape}")
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[0] == 0 or sv[1] / sv[0] < 1e-6:
            warnings.warn("camera matrix is (nearly) rank deficient", stacklevel=3)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)


def random_camera(seed=0, scale=1.0) -> CameraMatrix:
    """Two orthonormal rows of a random rotation, times ``scale``."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    return CameraMatrix(scale * q[:2])


# A pose of n joints is a 3 x n matrix flattened column by column, i.e.
# (x1, y1, z1, x2, y2, z2, ...); 2D observations use the same layout.
def pose_matrix(flat, rows=3):
    flat = np.asarray(flat, dtype=float)
    return flat.reshape(-1, rows).T


def pose_flat(mat):
    return np.asarray(mat, dtype=float).T.ravel()


def project_pose(camera: CameraMatrix, flat3d):
    """Flattened 2D observation of a flattened 3D pose (or of each column of a matrix)."""
    P = np.asarray(flat3d, dtype=float)
    if P.ndim == 1:
        return pose_flat(camera.m @ pose_matrix(P))
    n = P.shape[0] // 3
    blocks = P.reshape(n, 3, -1)
    return np.einsum("ij,njk->nik", camera.m, blocks).reshape(2 * n, -1)


def center_joints(flat, rows=3):
    """Subtract the mean joint from every joint of a flattened pose (or rows of poses)."""
    P = np.atleast_2d(np.asarray(flat, dtype=float))
    n = P.shape[1] // rows
    J = P.reshape(P.shape[0], n, rows)
    out = (J - J.mean(axis=1, keepdims=True)).reshape(P.shape)
    return out[0] if np.ndim(flat) == 1 else out


class PoseEstimate(NamedTuple):
    pose: np.ndarray
    simplex: int
    coeffs: np.ndarray
    residual: float


def estimate_pose(model: SimplicialModel, camera: CameraMatrix, observed2d,
                  cfg: SolverConfig = DEFAULT) -> PoseEstimate:
    """Best simplex and coefficients explaining a 2D observation; every simplex is tried.

    ``observed2d`` is a 2 x n matrix or its flattening.  The residual is the
    squared 2D error; ties go to the lowest simplex index.
    """
    if not model.simplices:
        raise EstimationError("model has no simplices")
    O = np.asarray(observed2d, dtype=float)
    o = pose_flat(O) if O.ndim == 2 else O
    if model.basis.d != 3 * (o.size // 2) or o.size % 2:
        raise ValidationError(
            f"observation of length {o.size} does not match poses of dimension {model.basis.d}")
    best = None
    for k, s in enumerate(model.simplices):
        V = model.vertex_matrix(k)
        D = project_pose(camera, V)
        try:
            beta, _ = active_set(D, o, model.radius, cfg)
        except SolverError:
            continue
        res = float(np.sum((D @ beta - o) ** 2))
        if best is None or res < best.residual:
            best = PoseEstimate(V @ beta, k, beta, res)
    if best is None:
        raise EstimationError("the solver failed on every simplex")
    return best


def mean_joint_error(pose, estimate):
    """Average Euclidean distance between corresponding joints of two flattened poses."""
    d = pose_matrix(pose) - pose_matrix(estimate)
    return float(np.linalg.norm(d, axis=0).mean())
