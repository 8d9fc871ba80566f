"""Activated simplices: extraction from codes, greedy pruning, boundary detection."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Optional

import numpy as np

from .errors import EmptyModelError, ExtractionError
from .model import BasisSet, CoefficientVector, DataSet, Simplex, SimplicialModel
from .solver import DEFAULT, SolverConfig, error_table


@dataclass(frozen=True)
class PruneConfig:
    """Penalties per selected simplex and per unit of dimension.

    ``None`` means the default ``0.001 / T`` and ``0.01 / T``, with ``T`` the
    number of candidates.
    """

    lambda1: Optional[float] = None
    lambda2: Optional[float] = None

    def resolve(self, T):
        l1 = 0.001 / T if self.lambda1 is None else float(self.lambda1)
        l2 = 0.01 / T if self.lambda2 is None else float(self.lambda2)
        if l1 < 0 or l2 < 0:
            raise ValueError("pruning penalties must be >= 0")
        return l1, l2


class GreedyStep(NamedTuple):
    candidate: int
    loss: float
    objective: float


def extract_simplices(activations) -> list:
    """One simplex per distinct support, counted and sorted by popularity.

    ``activations`` holds :class:`CoefficientVector` values or rows of a code
    matrix (the default activation threshold then applies).
    """
    supports = []
    for j, a in enumerate(activations):
        if not isinstance(a, CoefficientVector):
            a = np.asarray(a, dtype=float)
            a = CoefficientVector(a, float(a.sum()))
        sup = a.support
        if not sup:
            raise ExtractionError(f"point {j} has an empty support", point=j)
        supports.append(sup)
    if not supports:
        raise ExtractionError("no activations given")
    counts = Counter(supports)
    order = sorted(counts, key=lambda v: (-counts[v], v))
    return [Simplex(v, counts[v]) for v in order]


def greedy_path(errors, dims, lambda1, lambda2, base_loss, stop=True):
    """Forward selection on a point-by-candidate error table.

    ``base_loss`` holds each point's error before anything is selected.
    Each step adds the candidate giving the smallest penalized objective
    (lowest index on ties).  With ``stop`` the search ends as soon as no
    candidate lowers the objective; otherwise it runs until every candidate
    is taken.
    """
    E = np.asarray(errors, dtype=float)
    dims = np.asarray(dims, dtype=float)
    cur = np.asarray(base_loss, dtype=float).copy()
    chosen = np.zeros(E.shape[1], dtype=bool)
    obj = cur.mean()
    n_sel, dim_sum = 0, 0.0
    steps = []
    for _ in range(E.shape[1]):
        losses = np.minimum(cur[:, None], E).mean(axis=0)
        objs = losses + lambda1 * (n_sel + 1) + lambda2 * (dim_sum + dims)
        objs[chosen] = np.inf
        k = int(np.argmin(objs))
        if stop and not objs[k] < obj:
            break
        chosen[k] = True
        cur = np.minimum(cur, E[:, k])
        n_sel += 1
        dim_sum += dims[k]
        obj = float(objs[k])
        steps.append(GreedyStep(k, float(losses[k]), obj))
    return steps


def prune(candidates, data: DataSet, basis: BasisSet, cfg: PruneConfig = PruneConfig(),
          solver: SolverConfig = DEFAULT, errors=None) -> SimplicialModel:
    """Greedy subset of ``candidates`` trading reconstruction for size and dimension.

    The loss is the mean unsquared distance of each point to its nearest
    selected simplex; the empty selection scores each point by its norm.
    A precomputed point-by-candidate ``errors`` table may be passed in.
    """
    candidates = list(candidates)
    if not candidates:
        raise EmptyModelError("no candidate simplices to prune")
    l1, l2 = cfg.resolve(len(candidates))
    E = error_table(candidates, basis, data.points, solver) if errors is None else errors
    dims = [s.dim for s in candidates]
    steps = greedy_path(E, dims, l1, l2, np.linalg.norm(data.points, axis=1))
    picked = sorted(s.candidate for s in steps)
    meta = {"prune": {"lambda1": l1, "lambda2": l2, "candidates": len(candidates),
                      "loss": [s.loss for s in steps], "objective": [s.objective for s in steps]}}
    return SimplicialModel(basis, tuple(candidates[k] for k in picked), True, (), meta)


def maximal_simplices(model: SimplicialModel) -> list:
    """Indices of simplices whose vertex set is not strictly inside another's."""
    if not model.simplices:
        raise EmptyModelError("model has no simplices")
    sets = [frozenset(s.vertices) for s in model.simplices]
    return [i for i, a in enumerate(sets) if not any(a < b for b in sets)]


def boundary_simplices(model: SimplicialModel) -> list:
    """Codimension-1 faces of maximal simplices that belong to exactly one of them.

    Returned as sorted vertex tuples.  Maximal 0-simplices have no faces.
    """
    counts = Counter()
    for i in maximal_simplices(model):
        verts = model.simplices[i].vertices
        if len(verts) < 2:
            continue
        for face in combinations(verts, len(verts) - 1):
            counts[face] += 1
    return sorted(f for f, c in counts.items() if c == 1)


def model_from_training(basis: BasisSet, activations, trace=(), meta=None) -> SimplicialModel:
    return SimplicialModel(basis, tuple(extract_simplices(activations)), False,
                           tuple(trace), dict(meta or {}))
