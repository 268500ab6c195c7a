"""Numerical search for flattening motions of nontouching tree configurations.

The solver runs projected gradient descent on the flatness measure: after
each gradient step the exact edge lengths are restored by a root-down
retraction, and steps are rejected (and the step size halved) whenever the
per-step displacement bound or the noncrossing certificate fails. Random
restarts jitter the initial joint angles. Soundness over completeness: a
"flattened" result is certified by re-validation, a failure certifies
nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel, model
from .constants import FLAT_TOL, TOL_LEN
from .model import Configuration, Linkage, Motion, ValidationError

STATUS_FLATTENED = "flattened"
STATUS_STALLED = "stalled"
STATUS_BUDGET = "budget-exhausted"

# Solver schedule constants (unit-scale figures).
INITIAL_STEP = 1e-2
MAX_STEP_DISPLACEMENT = 0.01
DEFAULT_RESTARTS = 20
SAMPLE_CAP = 400


@dataclass(frozen=True)
class FlattenResult:
    motion: Motion
    final_flatness: float
    max_displacement: float
    status: str

    @property
    def flattened(self) -> bool:
        return self.status == STATUS_FLATTENED


def flatness(config: Configuration, root: str) -> float:
    """Sum of y^2 + max(0, -x)^2 over vertices, with the root at the origin
    and +x as the reference direction. Zero exactly on the closed +x ray."""
    if root not in config.coords:
        raise KeyError(f"unknown root vertex {root!r}")
    rx, ry = config.coords[root]
    total = 0.0
    for v in config.linkage.vertices:
        x, y = config.coords[v]
        x -= rx
        y -= ry
        total += y * y + min(x, 0.0) ** 2
    return total


def _tree_arrays(linkage: Linkage, root: str):
    """BFS order, parent array and parent-edge lengths for a tree."""
    if not linkage.is_tree:
        raise ValidationError("flatten requires a tree linkage")
    verts = list(linkage.vertices)
    index = {v: i for i, v in enumerate(verts)}
    adj: dict[str, list[tuple[str, float]]] = {v: [] for v in verts}
    for e in linkage.edges:
        adj[e.a].append((e.b, e.length))
        adj[e.b].append((e.a, e.length))
    for v in adj:
        adj[v].sort()
    order = [root]
    parent = {root: None}
    plen = {root: 0.0}
    k = 0
    while k < len(order):
        v = order[k]
        k += 1
        for w, L in adj[v]:
            if w not in parent:
                parent[w] = v
                plen[w] = L
                order.append(w)
    order_arr = np.array([index[v] for v in order], dtype=np.int64)
    parent_arr = np.full(len(verts), -1, dtype=np.int64)
    plen_arr = np.zeros(len(verts))
    for v in verts:
        if parent[v] is not None:
            parent_arr[index[v]] = index[parent[v]]
            plen_arr[index[v]] = plen[v]
    return verts, index, order_arr, parent_arr, plen_arr


def _noncrossing_pairs(linkage: Linkage, index) -> np.ndarray:
    """Vertex-index quadruples for every non-adjacent positive-length pair."""
    edges = [e for e in linkage.edges if e.length > 0.0]
    quads = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            e, f = edges[i], edges[j]
            if e.a in (f.a, f.b) or e.b in (f.a, f.b):
                continue
            quads.append((index[e.a], index[e.b], index[f.a], index[f.b]))
    if not quads:
        return np.zeros((0, 4), dtype=np.int64)
    return np.array(quads, dtype=np.int64)


def _coords_array(config: Configuration, verts, root: str) -> np.ndarray:
    rx, ry = config.coords[root]
    return np.array([[config.coords[v][0] - rx, config.coords[v][1] - ry]
                     for v in verts])


def _jitter_start(coords, order, parent, plen, pairs, rng, scale):
    """Kink every joint by a random angle, shrinking until noncrossing."""
    n = coords.shape[0]
    angles = rng.normal(0.0, 1.0, size=n)
    for _ in range(40):
        cand = coords.copy()
        for k in range(1, order.shape[0]):
            v = order[k]
            p = parent[v]
            L = plen[v]
            dx = coords[v, 0] - coords[p, 0]
            dy = coords[v, 1] - coords[p, 1]
            a = angles[v] * scale
            ca, sa = math.cos(a), math.sin(a)
            cand[v, 0] = cand[p, 0] + ca * dx - sa * dy
            cand[v, 1] = cand[p, 1] + sa * dx + ca * dy
            if L == 0.0:
                cand[v] = cand[p]
        if not _accel.any_crossing(cand, pairs):
            return cand
        scale *= 0.5
    return coords.copy()


def flatten(config: Configuration, root: str, budget: int = 100_000,
            seed: int = 0, restarts: int = DEFAULT_RESTARTS) -> FlattenResult:
    """Search for a flattening motion; deterministic in (config, args).

    The step budget is shared across restarts. The returned motion is always
    valid (lengths exact, noncrossing at the checked resolution) even when
    the status is not "flattened".
    """
    if not model.is_nontouching(config):
        raise ValidationError("flatten requires a nontouching configuration")
    verts, index, order, parent, plen = _tree_arrays(config.linkage, root)
    pairs = _noncrossing_pairs(config.linkage, index)
    start = _coords_array(config, verts, root)

    restarts = max(1, restarts)
    share = max(1, budget // restarts)
    rng = np.random.RandomState(seed & 0x7FFFFFFF)

    best = None  # (flatness, restart_idx, samples_list, status)
    used = 0
    for r in range(restarts):
        if used >= budget:
            break
        if r == 0:
            coords = start.copy()
        else:
            coords = _jitter_start(start, order, parent, plen, pairs,
                                   rng, 0.4)
        this_budget = min(share, budget - used)
        samples = np.zeros((SAMPLE_CAP, coords.shape[0], 2))
        record_every = max(1, this_budget // SAMPLE_CAP)
        start_r = coords.copy()
        f, status_code, nrec, accepted = _accel.descend(
            coords, order, parent, plen, pairs, this_budget, INITIAL_STEP,
            MAX_STEP_DISPLACEMENT, FLAT_TOL, record_every, samples)
        used += this_budget
        trail = [samples[i].copy() for i in range(nrec)]
        entry = (f, r, start_r, coords.copy(), trail, status_code)
        if best is None or (f, r) < (best[0], best[1]):
            best = entry
        if f <= FLAT_TOL:
            break

    f, r_idx, start_r, final, trail, status_code = best
    if f <= FLAT_TOL:
        status = STATUS_FLATTENED
    elif status_code == _accel.STATUS_STALLED:
        status = STATUS_STALLED
    else:
        status = STATUS_BUDGET

    frames = [start]
    if r_idx > 0:
        frames.append(start_r)
    frames.extend(trail)
    frames.append(final)
    # Drop consecutive duplicates, keep at least two samples.
    kept = [frames[0]]
    for fr in frames[1:]:
        if not np.array_equal(fr, kept[-1]):
            kept.append(fr)
    if len(kept) == 1:
        kept.append(kept[0] + 0.0)

    ts = np.linspace(0.0, 1.0, len(kept))
    samples_out = tuple(
        (float(t), {v: (float(fr[i, 0]), float(fr[i, 1]))
                    for i, v in enumerate(verts)})
        for t, fr in zip(ts, kept)
    )
    motion = Motion(config.linkage, samples_out)
    motion.validate()

    pin = _default_pin_edge(config.linkage)
    disp = max_displacement(motion, pin) if pin is not None else 0.0
    return FlattenResult(motion, float(f), float(disp), status)


def _default_pin_edge(linkage: Linkage) -> str | None:
    positive = [e for e in linkage.edges if e.length > 0.0]
    if not positive:
        return None
    return max(positive, key=lambda e: (e.length, e.name)).name


def max_displacement(motion: Motion, pin_edge: str) -> float:
    """Largest vertex travel from the start, after rigidly aligning every
    sample so the pin edge's source and direction match sample 0."""
    e = motion.linkage.edge(pin_edge)
    if e.length <= 0.0:
        raise ValidationError("pin edge must have positive length")
    t0, c0 = motion.samples[0]
    a0 = np.array(c0[e.a])
    d0 = np.array(c0[e.b]) - a0
    n0 = np.linalg.norm(d0)
    ref = {v: np.array(c0[v]) for v in motion.linkage.vertices}
    worst = 0.0
    for t, c in motion.samples:
        a = np.array(c[e.a])
        d = np.array(c[e.b]) - a
        n = np.linalg.norm(d)
        cos = float(np.dot(d, d0) / (n * n0))
        sin = float((d[0] * d0[1] - d[1] * d0[0]) / (n * n0))
        R = np.array([[cos, sin], [-sin, cos]]).T
        for v in motion.linkage.vertices:
            p = np.array(c[v])
            q = R @ (p - a) + a0
            worst = max(worst, float(np.linalg.norm(q - ref[v])))
    return worst
