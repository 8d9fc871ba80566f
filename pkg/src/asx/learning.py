"""Online alternating minimization of the simplex-coded reconstruction loss.

Coefficients are found with the active-set solver; the bases are updated by
one sweep of block coordinate descent on the accumulated sufficient
statistics, followed by projection onto the unit ball.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SolverError, TrainingError
from .model import BasisSet, CoefficientVector, DataSet
from .solver import DEFAULT, SolverConfig, active_set

log = logging.getLogger(__name__)

# columns whose accumulated activation energy is below this are left alone
_UNUSED = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    p: int
    radius: float = 1.0
    epochs: int = 50
    batch_size: int = 1
    seed: int = 0
    tol: float = 1e-6
    forget: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)
    threads: int = 1

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"need at least 2 bases, got p={self.p}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0.0 < self.radius <= 1.0:
            raise ValueError(f"radius must lie in (0, 1], got {self.radius}")


@dataclass(frozen=True)
class SufficientStats:
    """Running sums ``A = sum b b'`` (p x p), ``B = sum y b'`` (d x p)."""

    A: np.ndarray
    B: np.ndarray
    count: int = 0

    @classmethod
    def zeros(cls, d, p):
        return cls(np.zeros((p, p)), np.zeros((d, p)), 0)

    @classmethod
    def from_codes(cls, Y, codes):
        Y = np.atleast_2d(Y)
        codes = np.atleast_2d(codes)
        return cls(codes.T @ codes, Y.T @ codes, Y.shape[0])

    def add(self, Y, codes, weight=1.0):
        """New statistics with a batch added; old sums are scaled by ``weight``."""
        inc = SufficientStats.from_codes(Y, codes)
        return SufficientStats(weight * self.A + inc.A, weight * self.B + inc.B,
                               self.count + inc.count)

    def replace(self, Y, old, new):
        """Swap the contribution of ``Y`` coded as ``old`` for its ``new`` codes."""
        Y, old, new = np.atleast_2d(Y), np.atleast_2d(old), np.atleast_2d(new)
        seen = int(np.count_nonzero(old.any(axis=1)))
        return SufficientStats(self.A + new.T @ new - old.T @ old,
                               self.B + Y.T @ (new - old),
                               self.count + Y.shape[0] - seen)


class TrainResult(NamedTuple):
    basis: BasisSet
    activations: list
    codes: np.ndarray
    trace: list


def surrogate(stats: SufficientStats, X) -> float:
    """``sum ||y - X b||^2`` over the accumulated batch, up to the constant ``sum ||y||^2``."""
    return float(np.sum((X.T @ X) * stats.A) - 2.0 * np.sum(X * stats.B))


def _update_columns(A, B, X):
    X = np.array(X, dtype=float, copy=True)
    for j in range(X.shape[1]):
        ajj = A[j, j]
        if ajj <= _UNUSED:
            continue
        u = X[:, j] + (B[:, j] - X @ A[:, j]) / ajj
        X[:, j] = u / max(1.0, float(np.linalg.norm(u)))
    return X


def update_bases(stats: SufficientStats, basis: BasisSet) -> BasisSet:
    """One block-coordinate sweep over the columns, each projected onto the unit ball."""
    if stats.count < 1:
        raise ValueError("statistics are empty")
    return BasisSet(_update_columns(stats.A, stats.B, basis.bases), basis.radius)


def encode(X, Y, radius=1.0, cfg: SolverConfig = DEFAULT, threads=1, epoch=None) -> np.ndarray:
    """Simplex-constrained codes for every row of ``Y``; returns an ``N x p`` matrix."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))

    def one(i):
        try:
            return active_set(X, Y[i], radius, cfg)[0]
        except SolverError as exc:
            raise TrainingError(f"coefficient solve failed on point {i}: {exc}",
                                epoch=epoch, point=i) from exc

    idx = range(Y.shape[0])
    if threads > 1 and Y.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, idx))
    else:
        rows = [one(i) for i in idx]
    return np.vstack(rows) if rows else np.zeros((0, X.shape[1]))


def objective(X, Y, codes) -> np.ndarray:
    """Per-point squared reconstruction error."""
    R = np.atleast_2d(Y) - codes @ X.T
    return np.einsum("ij,ij->i", R, R)


def _initial_bases(Y, p, rng):
    n = Y.shape[0]
    if n >= p:
        return Y[rng.choice(n, size=p, replace=False)].T.copy()
    warnings.warn(f"only {n} points for {p} bases; duplicating jittered points", stacklevel=3)
    idx = np.concatenate([np.arange(n), rng.choice(n, size=p - n, replace=True)])
    X = Y[idx].T.copy()
    X[:, n:] += 1e-3 * rng.standard_normal((Y.shape[1], p - n))
    return X / np.maximum(1.0, np.linalg.norm(X, axis=0))


def _reseed_dead(X, Y, codes, radius, cfg, threads, epoch):
    """Move never-activated bases onto the worst-reconstructed points.

    Returns ``(X, codes, err, moved)``; the change is kept only if it does
    not increase the objective.
    """
    dead = np.flatnonzero(codes.max(axis=0) <= cfg.threshold * radius)
    err = objective(X, Y, codes)
    none = np.zeros(0, dtype=int)
    if not dead.size:
        return X, codes, err, none
    worst = np.argsort(-err, kind="stable")[:dead.size]
    X_new = X.copy()
    moved = dead[:worst.size]
    X_new[:, moved] = Y[worst].T
    codes_new = encode(X_new, Y, radius, cfg, threads, epoch)
    err_new = objective(X_new, Y, codes_new)
    if err_new.mean() <= err.mean():
        log.debug("epoch %d: reseeded %d unused bases", epoch, worst.size)
        return X_new, codes_new, err_new, moved
    return X, codes, err, none


def train(data: DataSet, cfg: TrainConfig) -> TrainResult:
    """Learn ``p`` bases whose scaled convex hull has facets close to ``data``.

    With ``batch_size >= N`` every epoch is one exact alternation (codes for
    all points, then a basis sweep on statistics of that epoch alone), which
    makes the per-epoch objective non-increasing.  Smaller batches follow the
    online scheme for a finite data set: when a point is drawn again, the
    statistics drop its previous code before adding the new one.  With
    ``cfg.forget`` the classic variant is used instead, in which statistics
    only accumulate and are down-weighted by ``1 - 1/t`` at step ``t``.

    Returns the bases, the final codes for every training point, and the
    mean squared reconstruction error after each epoch.
    """
    Y = data.points
    n, d = Y.shape
    r = cfg.radius
    rng = np.random.default_rng(cfg.seed)
    X = _initial_bases(Y, cfg.p, rng)
    full = cfg.batch_size >= n
    stats = SufficientStats.zeros(d, cfg.p)
    memory = np.zeros((n, cfg.p))  # last code of each point seen by the online pass
    codes = encode(X, Y, r, cfg.solver, cfg.threads, 0)
    trace = []
    step = 0
    for epoch in range(cfg.epochs):
        if full:
            stats = SufficientStats.from_codes(Y, codes)
            X = _update_columns(stats.A, stats.B, X)
        else:
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                step += 1
                bc = encode(X, Y[batch], r, cfg.solver, 1, epoch)
                if cfg.forget:
                    weight = 1.0 - 1.0 / step if step > 1 else 1.0
                    stats = stats.add(Y[batch], bc, weight)
                else:
                    stats = stats.replace(Y[batch], memory[batch], bc)
                    memory[batch] = bc
                X = _update_columns(stats.A, stats.B, X)
        codes = encode(X, Y, r, cfg.solver, cfg.threads, epoch)
        X, codes, err, moved = _reseed_dead(X, Y, codes, r, cfg.solver, cfg.threads, epoch)
        if moved.size and not full:
            # forget what the old atoms accumulated
            A, B = stats.A.copy(), stats.B.copy()
            A[moved, :] = 0.0
            A[:, moved] = 0.0
            B[:, moved] = 0.0
            stats = SufficientStats(A, B, stats.count)
            memory[:, moved] = 0.0
        trace.append(float(err.mean()))
        log.debug("epoch %d objective %.6g", epoch, trace[-1])
        if len(trace) > 1:
            prev = trace[-2]
            if abs(prev - trace[-1]) <= cfg.tol * max(abs(prev), 1e-300):
                break
    basis = BasisSet(X, r)
    acts = [CoefficientVector(c, r, cfg.solver.threshold) for c in codes]
    return TrainResult(basis, acts, codes, trace)
