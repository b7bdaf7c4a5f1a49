"""Oriented-rectangle geometry: SAT overlap tests and clearance distances.

All rectangles are described by center (x, y), heading (radians), and
footprint (length along heading, width across). Batched variants accept
arbitrary leading shapes so the planner can score many predicted poses in
one call.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "rect_corners",
    "rects_overlap",
    "overlap_poses",
    "rect_distance",
    "signed_clearance",
    "rect_corners_batch",
    "overlap_batch",
    "distance_batch",
]

# Corner order: front-left, front-right, rear-right, rear-left (CCW in the
# rectangle frame does not matter for SAT, only consistency does).
_CORNER_SIGNS = np.array(
    [[0.5, 0.5], [0.5, -0.5], [-0.5, -0.5], [-0.5, 0.5]], dtype=float
)


def rect_corners(cx: float, cy: float, heading: float, length: float, width: float) -> np.ndarray:
    """Corners of one oriented rectangle, shape (4, 2)."""
    c, s = np.cos(heading), np.sin(heading)
    local = _CORNER_SIGNS * (length, width)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + (cx, cy)


def rect_corners_batch(centers: np.ndarray, headings: np.ndarray, length: float, width: float) -> np.ndarray:
    """Corners for a batch of poses: centers (..., 2), headings (...) -> (..., 4, 2)."""
    centers = np.asarray(centers, dtype=float)
    headings = np.asarray(headings, dtype=float)
    c, s = np.cos(headings), np.sin(headings)
    local = _CORNER_SIGNS * (length, width)  # (4, 2)
    x = local[:, 0] * c[..., None] - local[:, 1] * s[..., None]
    y = local[:, 0] * s[..., None] + local[:, 1] * c[..., None]
    return np.stack([x, y], axis=-1) + centers[..., None, :]


def _edge_axes(corners: np.ndarray) -> np.ndarray:
    """Two unit edge axes per rectangle: (..., 4, 2) -> (..., 2, 2)."""
    e0 = corners[..., 1, :] - corners[..., 0, :]
    e1 = corners[..., 3, :] - corners[..., 0, :]
    axes = np.stack([e0, e1], axis=-2)
    norm = np.linalg.norm(axes, axis=-1, keepdims=True)
    return axes / np.maximum(norm, 1e-12)


def _axis_gaps(ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    """Signed projection gaps along the 4 SAT axes, shape (..., 4).

    A positive gap on any axis means the rectangles are disjoint; when all
    gaps are negative the least-negative one is minus the penetration depth.
    """
    axes = np.concatenate([_edge_axes(ca), _edge_axes(cb)], axis=-2)  # (..., 4, 2)
    pa = np.einsum("...ki,...ji->...kj", axes, ca)  # (..., 4 axes, 4 corners)
    pb = np.einsum("...ki,...ji->...kj", axes, cb)
    gap_ab = pb.min(axis=-1) - pa.max(axis=-1)
    gap_ba = pa.min(axis=-1) - pb.max(axis=-1)
    return np.maximum(gap_ab, gap_ba)


def overlap_batch(ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    """Separating-axis overlap test for paired corner arrays (..., 4, 2)."""
    return _axis_gaps(ca, cb).max(axis=-1) <= 0.0


def rects_overlap(ca: np.ndarray, cb: np.ndarray) -> bool:
    """Scalar SAT overlap test; touching counts as overlapping."""
    return bool(overlap_batch(ca, cb))


def overlap_poses(
    ax: float, ay: float, ha: float, la: float, wa: float,
    bx: float, by: float, hb: float, lb: float, wb: float,
) -> bool:
    """SAT overlap test straight from two poses, no array allocation.

    Equivalent to rects_overlap on the corner sets; kept scalar because the
    world step calls it for every NPC on every physics substep.
    """
    ca_, sa_ = math.cos(ha), math.sin(ha)
    cb_, sb_ = math.cos(hb), math.sin(hb)
    dx, dy = bx - ax, by - ay
    hla, hwa, hlb, hwb = la / 2.0, wa / 2.0, lb / 2.0, wb / 2.0
    for ux, uy in ((ca_, sa_), (-sa_, ca_), (cb_, sb_), (-sb_, cb_)):
        ra = hla * abs(ca_ * ux + sa_ * uy) + hwa * abs(-sa_ * ux + ca_ * uy)
        rb = hlb * abs(cb_ * ux + sb_ * uy) + hwb * abs(-sb_ * ux + cb_ * uy)
        if abs(dx * ux + dy * uy) > ra + rb:
            return False
    return True


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from points p (..., 2) to segments (a, b) of matching shape."""
    ab = b - a
    denom = np.einsum("...i,...i->...", ab, ab)
    t = np.einsum("...i,...i->...", p - a, ab) / np.maximum(denom, 1e-18)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(p - closest, axis=-1)


def distance_batch(ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    """Euclidean clearance between rectangle pairs; 0 where they overlap.

    Disjoint rectangles cannot have crossing edges, so the minimum distance
    is attained at a vertex of one against an edge of the other.
    """
    ca = np.asarray(ca, dtype=float)
    cb = np.asarray(cb, dtype=float)
    edges_a = np.stack([ca, np.roll(ca, -1, axis=-2)], axis=-2)  # (..., 4, 2 pts, 2)
    edges_b = np.stack([cb, np.roll(cb, -1, axis=-2)], axis=-2)

    # Vertices of A vs edges of B: (..., 4 verts, 4 edges).
    d_ab = _point_segment_dist(
        ca[..., :, None, :],
        edges_b[..., None, :, 0, :],
        edges_b[..., None, :, 1, :],
    )
    d_ba = _point_segment_dist(
        cb[..., :, None, :],
        edges_a[..., None, :, 0, :],
        edges_a[..., None, :, 1, :],
    )
    dist = np.minimum(d_ab.min(axis=(-1, -2)), d_ba.min(axis=(-1, -2)))
    return np.where(overlap_batch(ca, cb), 0.0, dist)


def rect_distance(ca: np.ndarray, cb: np.ndarray) -> float:
    """Scalar clearance between two rectangles; 0 if they overlap."""
    return float(distance_batch(ca, cb))


def signed_clearance(ca: np.ndarray, cb: np.ndarray) -> float:
    """Clearance when disjoint, minus the SAT penetration depth when not."""
    gaps = _axis_gaps(ca, cb)
    if gaps.max() <= 0.0:
        return float(gaps.max())
    return rect_distance(ca, cb)
