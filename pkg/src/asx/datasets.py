"""Desk-scale synthetic data sets.

All generators use ``numpy.random.default_rng(seed)`` (PCG64), so a seed
gives the same sample on every platform.
"""
import numpy as np

from .errors import UsageError

TORUS_RADII = (2.0, 0.5)
RIBBON_HALF_WIDTH = 0.2
GENERATOR = "numpy.random.default_rng/PCG64"


def _circle(rng, n):
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([np.cos(t), np.sin(t)])


def _torus(rng, n):
    R, rho = TORUS_RADII
    u = rng.uniform(0.0, 2.0 * np.pi, n)
    v = rng.uniform(0.0, 2.0 * np.pi, n)
    w = R + rho * np.cos(v)
    return np.column_stack([w * np.cos(u), w * np.sin(u), rho * np.sin(v)])


def _hemisphere(rng, n):
    # z uniform gives uniform area on the sphere
    z = rng.uniform(0.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def _swissroll_plane(rng, n):
    """Half the points on a rolled sheet, half on a flat square cutting through it."""
    m = n // 2
    t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, m)
    h = rng.uniform(-1.0, 1.0, m)
    roll = np.column_stack([t * np.cos(t), 10.0 * h, t * np.sin(t)]) / 10.0
    a = rng.uniform(-1.0, 1.0, n - m)
    b = rng.uniform(-1.0, 1.0, n - m)
    plane = np.column_stack([a, b, np.zeros(n - m)])
    return np.vstack([roll, plane])


def _ribbon_circle(rng, n):
    """A great circle in the xy-plane and a band around the great circle in the xz-plane.

    Both pieces lie on the unit sphere; the band crosses the circle twice.
    """
    m = n // 2
    t = rng.uniform(0.0, 2.0 * np.pi, m)
    circle = np.column_stack([np.cos(t), np.sin(t), np.zeros(m)])
    s = rng.uniform(0.0, 2.0 * np.pi, n - m)
    w = rng.uniform(-RIBBON_HALF_WIDTH, RIBBON_HALF_WIDTH, n - m)
    c = np.sqrt(1.0 - w * w)
    ribbon = np.column_stack([c * np.cos(s), w, c * np.sin(s)])
    return np.vstack([circle, ribbon])


SHAPES = {
    "circle": _circle,
    "torus": _torus,
    "hemisphere": _hemisphere,
    "swissroll_plane": _swissroll_plane,
    "ribbon_circle": _ribbon_circle,
}


def generate(shape: str, n: int, noise: float = 0.0, seed=0, dim=None) -> np.ndarray:
    """Sample ``n`` points from a named manifold, plus isotropic Gaussian noise.

    Shapes: ``circle`` (unit circle in R^2), ``torus`` (radii 2 and 0.5 in
    R^3), ``hemisphere`` (upper unit hemisphere), ``swissroll_plane`` and
    ``ribbon_circle`` (both in R^3).  ``dim`` embeds the manifold in a larger
    space by appending zero coordinates before the noise is added.
    """
    if shape not in SHAPES:
        raise UsageError(f"unknown shape {shape!r}; choose from {', '.join(sorted(SHAPES))}")
    if n < 1:
        raise UsageError("n must be >= 1")
    if noise < 0:
        raise UsageError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    pts = SHAPES[shape](rng, n)
    if dim is not None:
        if dim < pts.shape[1]:
            raise UsageError(f"{shape} needs at least {pts.shape[1]} dimensions, got {dim}")
        pts = np.hstack([pts, np.zeros((n, dim - pts.shape[1]))])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return pts


def arcs(n_per_class: int, seed=0, noise: float = 0.0):
    """Two disjoint arcs of the unit circle labelled ``"A"`` and ``"B"``.

    Returns ``(points, labels)`` with the classes interleaved.
    """
    rng = np.random.default_rng(seed)
    ta = rng.uniform(0.1 * np.pi, 0.7 * np.pi, n_per_class)
    tb = rng.uniform(1.1 * np.pi, 1.7 * np.pi, n_per_class)
    t = np.column_stack([ta, tb]).ravel()
    labels = ["A", "B"] * n_per_class
    pts = np.column_stack([np.cos(t), np.sin(t)])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return pts, labels


ARM_LENGTHS = (1.0, 0.8)


def arm_poses(n: int, seed=0, swing: bool = False, max_bend=np.pi):
    """Shoulder-elbow-hand poses as the elbow bends through ``[0, max_bend]``.

    Shoulder and elbow are fixed; the hand sweeps a planar curve.  With
    ``swing`` the forearm also rotates about the upper-arm axis by up to 90
    degrees, turning the curve into a surface.  Returns ``n x 9`` raw poses,
    each a 3 x 3 joint matrix flattened column by column (joint after joint).
    """
    rng = np.random.default_rng(seed)
    upper, fore = ARM_LENGTHS
    bend = rng.uniform(0.0, max_bend, n)
    psi = rng.uniform(0.0, 0.5 * np.pi, n) if swing else np.zeros(n)
    shoulder = np.zeros((n, 3))
    elbow = np.tile([upper, 0.0, 0.0], (n, 1))
    hand = elbow + fore * np.column_stack(
        [np.cos(bend), np.sin(bend) * np.cos(psi), np.sin(bend) * np.sin(psi)])
    return np.hstack([shoulder, elbow, hand])
