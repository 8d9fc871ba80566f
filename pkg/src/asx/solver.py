"""Least squares over a scaled probability simplex.

Solves ``min ||y - X b||^2  s.t.  b >= 0, sum(b) = r`` with a primal
active-set method.  The working set is kept affinely independent, so every
equality-constrained subproblem has a unique solution and the objective is
non-increasing from one working set to the next.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyModelError, SolverError
from .model import ACTIVATION_THRESHOLD, BasisSet, CoefficientVector, Simplex, SimplicialModel

# relative singular-value cutoff for affine dependence of the working set
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    kkt_tol: float = 1e-9
    max_iter: Optional[int] = None  # None means 10 * k
    threshold: float = ACTIVATION_THRESHOLD

    def __post_init__(self):
        if self.kkt_tol <= 0 or self.threshold <= 0:
            raise ValueError("solver tolerances must be > 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT = SolverConfig()


def _eqp(G, c, S, r):
    """Minimizer of b'Gb - 2c'b over {b_S : sum(b_S) = r}."""
    m = len(S)
    K = np.ones((m + 1, m + 1))
    K[:m, :m] = G[S][:, S]
    K[m, m] = 0.0
    rhs = np.empty(m + 1)
    rhs[:m] = c[S]
    rhs[m] = r
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:m]


def _null_direction(X, S, j):
    """Direction v on S + [j] with X v = 0, sum(v) = 0 and v_j = 1, or None.

    Returns None when the columns ``S + [j]`` are affinely independent.
    """
    idx = S + [j]
    M = np.vstack([X[:, idx], np.ones(len(idx))])
    _, sv, vt = np.linalg.svd(M, full_matrices=True)
    if len(idx) <= M.shape[0] and sv[-1] > _RANK_TOL * max(sv[0], 1.0):
        return None
    v = vt[-1]
    if abs(v[-1]) < _RANK_TOL:
        return None
    return v / v[-1]


def _kkt_residual(g, S, off):
    gs = g[S]
    mu = gs.sum() / len(S)
    res = float(np.abs(gs - mu).max()) if len(S) > 1 else 0.0
    if off.size:
        res = max(res, mu - float(g[off].min()))
    return max(res, 0.0), mu


def active_set(X, y, radius=1.0, cfg: SolverConfig = DEFAULT, history=None):
    """Raw solver; returns ``(beta, n_iter)``.

    If ``history`` is a list, the objective after every outer iteration is
    appended to it.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    d, k = X.shape
    if k < 1:
        raise ValueError("design matrix needs at least one column")
    r = float(radius)
    max_iter = cfg.max_iter if cfg.max_iter is not None else 10 * k
    G = X.T @ X
    c = X.T @ y
    yy = float(y @ y)

    def objective(b):
        return yy - 2.0 * c @ b + b @ G @ b

    b = np.zeros(k)
    i0 = int(np.argmax(c))
    b[i0] = r
    S = [i0]
    if history is not None:
        history.append(objective(b))
    it = 0
    while True:
        g = 2.0 * (G @ b - c)
        inS = np.zeros(k, dtype=bool)
        inS[S] = True
        off = np.flatnonzero(~inS)
        res, mu = _kkt_residual(g, S, off)
        if res <= cfg.kkt_tol:
            break
        if it >= max_iter:
            raise SolverError(
                f"active set did not converge in {max_iter} iterations (KKT residual {res:.3g})",
                best=_finish(b, r), kkt_residual=res)
        viol = g[off] - mu
        if viol.min() >= -cfg.kkt_tol:
            # dual feasible but the working-set optimum is not yet reached
            j = None
        else:
            j = int(off[np.argmin(viol)])
        if j is not None:
            v = _null_direction(X, S, j)
            if v is not None:
                # slide along the null direction of X; the objective is unchanged
                vs = v[:-1]
                neg = vs < 0
                steps = np.where(neg, b[S] / np.where(neg, -vs, 1.0), np.inf)
                q = int(np.argmin(steps))
                t = float(steps[q])
                b[S] = b[S] + t * vs
                b[j] = t
                b[S[q]] = 0.0
                S = [i for n, i in enumerate(S) if n != q] + [j]
            else:
                S = S + [j]
            S.sort()
        # inner loop: reach the working-set optimum, dropping blocking indices
        while True:
            it += 1
            z = _eqp(G, c, S, r)
            if np.all(z > 0):
                b[:] = 0.0
                b[S] = z
                break
            bs = b[S]
            block = z <= 0
            denom = bs - z
            ratios = np.full(len(S), np.inf)
            ok = block & (denom > 0)
            ratios[ok] = bs[ok] / denom[ok]
            ratios[block & ~ok] = 0.0
            q = int(np.argmin(ratios))
            a = min(max(float(ratios[q]), 0.0), 1.0)
            bs = bs + a * (z - bs)
            bs[q] = 0.0
            keep = bs > 0
            b[:] = 0.0
            b[S] = np.maximum(bs, 0.0)
            S = [i for i, kp in zip(S, keep) if kp]
            if not S:
                raise SolverError("working set emptied", best=None, kkt_residual=np.inf)
            if it >= max_iter:
                break
        if history is not None:
            history.append(objective(b))
    return _finish(b, r), it


def _finish(b, r):
    b = np.maximum(b, 0.0)
    s = b.sum()
    return b * (r / s) if s > 0 else b


def solve_simplex_ls(X, y, radius=1.0, cfg: SolverConfig = DEFAULT) -> CoefficientVector:
    """Nonnegative coefficients of mass ``radius`` minimizing ``||y - X b||^2``.

    Parameters
    ----------
    X : ndarray, shape (d, k)
        Design matrix, one candidate vertex per column.
    y : ndarray, shape (d,)
        Target point.
    radius : float
        Required l1 mass of the coefficients, in (0, 1].

    Raises
    ------
    SolverError
        If the KKT conditions are not met within ``cfg.max_iter`` working-set
        changes.  The error carries the best iterate.
    """
    beta, _ = active_set(X, y, radius, cfg)
    return CoefficientVector(beta, float(radius), cfg.threshold)


def project_onto_simplex(simplex: Simplex, basis: BasisSet, point, cfg: SolverConfig = DEFAULT):
    """Barycentric coefficients (mass ``r``) and the unsquared distance to the simplex."""
    V = basis.bases[:, list(simplex.vertices)]
    y = np.asarray(point, dtype=float)
    r = basis.radius
    if V.shape[1] == 1:
        beta = np.array([r])
    else:
        beta, _ = active_set(V, y, r, cfg)
    return beta, float(np.linalg.norm(y - V @ beta))


def project_onto_model(model: SimplicialModel, point, cfg: SolverConfig = DEFAULT):
    """Nearest simplex of ``model``; returns ``(index, coeffs, error)``.

    Ties go to the lowest simplex index.
    """
    if not model.simplices:
        raise EmptyModelError("model has no simplices")
    best = (None, None, np.inf)
    for k, s in enumerate(model.simplices):
        beta, err = project_onto_simplex(s, model.basis, point, cfg)
        if err < best[2]:
            best = (k, beta, err)
    return best


def error_table(simplices, basis: BasisSet, points, cfg: SolverConfig = DEFAULT) -> np.ndarray:
    """Distance of every point (rows) to every simplex (columns)."""
    P = np.asarray(points, dtype=float)
    out = np.empty((P.shape[0], len(simplices)))
    for k, s in enumerate(simplices):
        for i, y in enumerate(P):
            out[i, k] = project_onto_simplex(s, basis, y, cfg)[1]
    return out


def reconstruction_errors(model: SimplicialModel, points, cfg: SolverConfig = DEFAULT):
    """Per-point distance to the nearest simplex (the reported error metric)."""
    return error_table(model.simplices, model.basis, points, cfg).min(axis=1)
