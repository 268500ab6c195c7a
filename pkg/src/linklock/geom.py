"""Low-level planar predicates: segment-pair classification, angles, sectors.

Everything here is pure geometry on raw points; no linkage structure. Contacts
within TOL_GEOM are classified as touching rather than crossing, so a
"properly-crossing" report is always trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import TOL_ANG, TOL_GEOM

Point = tuple[float, float]

DISJOINT = "disjoint"
SHARED_ENDPOINT = "shared-endpoint-only"
TOUCHING = "touching-noncrossing"
CROSSING = "properly-crossing"
OVERLAPPING = "overlapping-collinear"


class UndefinedAngleError(ValueError):
    """An angle query involved a zero-length ray."""


@dataclass(frozen=True)
class SegmentPairClass:
    """Classification of the contact between two segments.

    ``witness`` is the contact point for point contacts, the shared
    sub-segment for collinear overlaps, and None when disjoint.
    """

    kind: str
    witness: tuple | None = None


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _cross(u: Point, v: Point) -> float:
    return u[0] * v[1] - u[1] * v[0]


def _dot(u: Point, v: Point) -> float:
    return u[0] * v[0] + u[1] * v[1]


def _norm(u: Point) -> float:
    return math.hypot(u[0], u[1])


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    """Euclidean distance from p to segment ab (handles degenerate ab)."""
    ab = _sub(b, a)
    L2 = _dot(ab, ab)
    if L2 == 0.0:
        return _dist(p, a)
    t = _dot(_sub(p, a), ab) / L2
    t = min(1.0, max(0.0, t))
    return _dist(p, (a[0] + t * ab[0], a[1] + t * ab[1]))


def segment_segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> float:
    if _segments_properly_cross(p1, p2, q1, q2, 0.0):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )


def _signed_line_dist(p: Point, a: Point, b: Point) -> float:
    """Signed distance from p to the line ab; positive on the left of a->b."""
    ab = _sub(b, a)
    L = _norm(ab)
    if L == 0.0:
        return _dist(p, a)
    return _cross(ab, _sub(p, a)) / L


def _segments_properly_cross(p1, p2, q1, q2, tol) -> bool:
    """Transversal interior intersection, with contacts within tol excluded."""
    d1 = _signed_line_dist(p1, q1, q2)
    d2 = _signed_line_dist(p2, q1, q2)
    d3 = _signed_line_dist(q1, p1, p2)
    d4 = _signed_line_dist(q2, p1, p2)
    return (
        ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol))
        and ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol))
    )


def _line_intersection(p1, p2, q1, q2) -> Point:
    r = _sub(p2, p1)
    s = _sub(q2, q1)
    denom = _cross(r, s)
    t = _cross(_sub(q1, p1), s) / denom
    return (p1[0] + t * r[0], p1[1] + t * r[1])


def _near_endpoint(p: Point, seg_ends, tol) -> bool:
    return any(_dist(p, e) <= tol for e in seg_ends)


def classify_pair(p1: Point, p2: Point, q1: Point, q2: Point,
                  tol: float = TOL_GEOM) -> SegmentPairClass:
    """Classify the contact between segments p1p2 and q1q2.

    Degenerate (zero-length) segments are allowed and classify through
    point-on-segment tests. Contacts within tol never count as crossing.
    """
    p_deg = _dist(p1, p2) <= tol
    q_deg = _dist(q1, q2) <= tol

    if p_deg and q_deg:
        if _dist(p1, q1) <= tol:
            return SegmentPairClass(SHARED_ENDPOINT, p1)
        return SegmentPairClass(DISJOINT)

    if p_deg or q_deg:
        pt, (a, b) = (p1, (q1, q2)) if p_deg else (q1, (p1, p2))
        if point_segment_distance(pt, a, b) > tol:
            return SegmentPairClass(DISJOINT)
        if _near_endpoint(pt, (a, b), tol):
            return SegmentPairClass(SHARED_ENDPOINT, pt)
        return SegmentPairClass(TOUCHING, pt)

    d1 = _signed_line_dist(p1, q1, q2)
    d2 = _signed_line_dist(p2, q1, q2)
    d3 = _signed_line_dist(q1, p1, p2)
    d4 = _signed_line_dist(q2, p1, p2)

    collinear = max(abs(d1), abs(d2), abs(d3), abs(d4)) <= tol
    if collinear:
        # Project everything on the direction of the longer segment.
        base, bdir = (p1, _sub(p2, p1))
        if _norm(_sub(q2, q1)) > _norm(bdir):
            base, bdir = q1, _sub(q2, q1)
        L = _norm(bdir)
        u = (bdir[0] / L, bdir[1] / L)
        tp = sorted((_dot(_sub(p1, base), u), _dot(_sub(p2, base), u)))
        tq = sorted((_dot(_sub(q1, base), u), _dot(_sub(q2, base), u)))
        lo, hi = max(tp[0], tq[0]), min(tp[1], tq[1])
        if hi - lo > tol:
            w0 = (base[0] + lo * u[0], base[1] + lo * u[1])
            w1 = (base[0] + hi * u[0], base[1] + hi * u[1])
            return SegmentPairClass(OVERLAPPING, (w0, w1))
        if hi < lo - tol:
            return SegmentPairClass(DISJOINT)
        t = 0.5 * (lo + hi)
        w = (base[0] + t * u[0], base[1] + t * u[1])
        if _near_endpoint(w, (p1, p2), 2 * tol) and _near_endpoint(w, (q1, q2), 2 * tol):
            return SegmentPairClass(SHARED_ENDPOINT, w)
        return SegmentPairClass(TOUCHING, w)

    if _segments_properly_cross(p1, p2, q1, q2, tol):
        return SegmentPairClass(CROSSING, _line_intersection(p1, p2, q1, q2))

    dmin = min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )
    if dmin > tol:
        return SegmentPairClass(DISJOINT)

    # Point contact: locate it as the nearest endpoint-to-segment pair.
    candidates = [
        (point_segment_distance(p1, q1, q2), p1),
        (point_segment_distance(p2, q1, q2), p2),
        (point_segment_distance(q1, p1, p2), q1),
        (point_segment_distance(q2, p1, p2), q2),
    ]
    w = min(candidates, key=lambda c: c[0])[1]
    if _near_endpoint(w, (p1, p2), tol) and _near_endpoint(w, (q1, q2), tol):
        return SegmentPairClass(SHARED_ENDPOINT, w)
    return SegmentPairClass(TOUCHING, w)


def angle_at(a: Point, apex: Point, b: Point) -> float:
    """Unsigned angle in [0, pi] between rays apex->a and apex->b."""
    u = _sub(a, apex)
    v = _sub(b, apex)
    nu, nv = _norm(u), _norm(v)
    if nu <= TOL_GEOM or nv <= TOL_GEOM:
        raise UndefinedAngleError("angle undefined: zero-length ray at apex")
    c = _dot(u, v) / (nu * nv)
    c = min(1.0, max(-1.0, c))
    return math.acos(c)


def _direction_angle(seg, apex: Point) -> float:
    """Angle of the ray from the segment endpoint at/near apex to the other end."""
    a, b = seg
    if _dist(a, apex) <= _dist(b, apex):
        near, far = a, b
    else:
        near, far = b, a
    d = _sub(far, near)
    if _norm(d) <= TOL_GEOM:
        raise UndefinedAngleError("degenerate segment in sector test")
    return math.atan2(d[1], d[0])


def _sweep(from_ang: float, to_ang: float, side: int) -> float:
    """Rotation amount in [0, 2pi) from from_ang to to_ang, CCW if side=+1."""
    d = (to_ang - from_ang) * side
    d %= 2.0 * math.pi
    return d


def convex_angle_surrounds(b_edge, b_prime, b_double_prime, side: int,
                           tol: float = TOL_ANG) -> bool:
    """Whether the sector spanned by b_prime and b_double_prime contains b_edge.

    b_prime and b_double_prime must share an endpoint (the apex, matched
    within TOL_GEOM-scale slack); b_edge must have an endpoint there too. The
    sector opens from b_prime's direction toward ``side`` (+1 left/CCW,
    -1 right/CW) and must be convex (at most pi). Membership is boundary
    inclusive; the caller certifies via ``side`` which way b_edge's strand
    lies when it is parallel to b_prime.
    """
    if side not in (-1, 1):
        raise ValueError("side must be +1 (left) or -1 (right)")
    # Find the shared apex among endpoint pairs.
    best = None
    for pp in b_prime:
        for qq in b_double_prime:
            d = _dist(pp, qq)
            if best is None or d < best[0]:
                best = (d, pp)
    apex = best[1]
    r1 = _direction_angle(b_prime, apex)
    r2 = _direction_angle(b_double_prime, apex)
    q = _direction_angle(b_edge, apex)
    theta = _sweep(r1, r2, side)
    if theta > math.pi + tol:
        return False
    psi = _sweep(r1, q, side)
    return psi <= theta + tol or psi >= 2.0 * math.pi - tol
