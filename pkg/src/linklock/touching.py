"""Self-touching configurations as limits of pulled-apart drawings.

A TouchingConfig is a base configuration (possibly with coincident vertices
and edges) plus one offset vector per vertex. Scaling the offsets by any
eps in (0, eps0] yields a nontouching drawing; the combinatorial side data
the research formalism attaches to coincident geometry is carried concretely
by those drawings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import geom, model
from .constants import TOL_GEOM, TOL_LEN
from .model import Configuration, Edge, Linkage, ValidationError


class AmbiguousAnnotationError(ValueError):
    """Offsets do not induce a stable side order."""


class PerturbationTooLarge(ValueError):
    """Requested delta exceeds the safe noncrossing headroom."""

    def __init__(self, delta: float, safe: float):
        super().__init__(
            f"delta {delta:g} exceeds the largest safe value {safe:g}"
        )
        self.safe_delta = safe


@dataclass(frozen=True)
class TouchingConfig:
    base: Configuration
    offsets: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        missing = [v for v in self.base.linkage.vertices if v not in self.offsets]
        if missing:
            raise ValidationError(f"offsets missing for vertices {missing}")
        object.__setattr__(
            self, "offsets",
            {v: (float(self.offsets[v][0]), float(self.offsets[v][1]))
             for v in self.base.linkage.vertices},
        )

    @property
    def linkage(self) -> Linkage:
        return self.base.linkage

    def pulled_apart(self, eps: float) -> Configuration:
        coords = {
            v: (p[0] + eps * self.offsets[v][0], p[1] + eps * self.offsets[v][1])
            for v, p in self.base.coords.items()
        }
        return Configuration(self.base.linkage, coords)

    @cached_property
    def epsilon0(self) -> float:
        """Largest eps in (0, 1] whose pulled-apart drawing is nontouching,
        located by bisection (20 steps)."""
        if model.is_nontouching(self.pulled_apart(1.0)):
            return 1.0
        lo, hi = 0.0, 1.0
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            if model.is_nontouching(self.pulled_apart(mid)):
                lo = mid
            else:
                hi = mid
        if lo == 0.0:
            raise ValidationError("offsets never pull the configuration apart")
        return lo

    @property
    def max_offset_norm(self) -> float:
        return max(math.hypot(dx, dy) for dx, dy in self.offsets.values())


@dataclass(frozen=True)
class CollocationGroup:
    """Bars occupying one geometric segment, with their pulled-apart side order."""

    members: tuple[str, ...]          # edge names, sorted
    order: tuple[str, ...]            # edge names in side order
    core: tuple[tuple[float, float], tuple[float, float]]  # shared sub-segment

    def side(self, a: str, b: str) -> int:
        """+1 if a is on the higher-index side of b in the order."""
        ia, ib = self.order.index(a), self.order.index(b)
        if ia == ib:
            raise ValueError("same bar")
        return 1 if ia > ib else -1

    def between(self, a: str, b: str) -> tuple[str, ...]:
        ia, ib = sorted((self.order.index(a), self.order.index(b)))
        return self.order[ia + 1:ib]


def _overlap_graph(tc: TouchingConfig):
    edges = [e for e in tc.linkage.edges if e.length > TOL_LEN]
    segs = {e.name: tc.base.segment(e) for e in edges}
    names = [e.name for e in edges]
    adj = {n: set() for n in names}
    overlaps = {}
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            si, sj = segs[names[i]], segs[names[j]]
            cls = geom.classify_pair(si[0], si[1], sj[0], sj[1])
            if cls.kind == geom.OVERLAPPING:
                adj[names[i]].add(names[j])
                adj[names[j]].add(names[i])
                overlaps[(names[i], names[j])] = cls.witness
    return names, segs, adj, overlaps


def _max_cliques(names, adj):
    """Bron-Kerbosch with pivoting; graphs here have at most a few dozen nodes."""
    cliques = []

    def bk(r, p, x):
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda n: len(adj[n] & p))
        for v in sorted(p - adj[pivot]):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), set(names), set())
    return sorted(cliques, key=sorted)


def collocation_groups(tc: TouchingConfig, eps: float | None = None
                       ) -> list[CollocationGroup]:
    """Maximal sets of mutually overlapping-collinear bars with side order.

    A bar overlapping two geometrically distinct runs (the long spine of the
    locked tree) belongs to the group of each run. Nontouching bars come back
    as singleton groups.
    """
    names, segs, adj, _ = _overlap_graph(tc)
    if eps is None:
        eps = tc.epsilon0 / 2.0
    pulled = tc.pulled_apart(eps)
    linkage = tc.linkage

    groups = []
    for clique in _max_cliques(names, adj):
        members = sorted(clique)
        if len(members) == 1:
            e = linkage.edge(members[0])
            groups.append(CollocationGroup((members[0],), (members[0],),
                                           tc.base.segment(e)))
            continue
        # Common core: intersect the 1D intervals on the shared line.
        ref = max(members, key=lambda n: linkage.edge(n).length)
        a, b = segs[ref]
        d = (b[0] - a[0], b[1] - a[1])
        L = math.hypot(*d)
        u = (d[0] / L, d[1] / L)
        if (u[1], u[0]) < (0.0, 0.0):  # canonical direction sign
            u = (-u[0], -u[1])
        nrm = (-u[1], u[0])

        def param(p):
            return (p[0] - a[0]) * u[0] + (p[1] - a[1]) * u[1]

        lo = max(min(param(segs[m][0]), param(segs[m][1])) for m in members)
        hi = min(max(param(segs[m][0]), param(segs[m][1])) for m in members)
        if hi - lo <= TOL_GEOM:
            raise ValidationError("clique without positive-length core")
        tmid = 0.5 * (lo + hi)
        core = ((a[0] + lo * u[0], a[1] + lo * u[1]),
                (a[0] + hi * u[0], a[1] + hi * u[1]))
        mid_pt = (a[0] + tmid * u[0], a[1] + tmid * u[1])

        keyed = []
        for m in members:
            e = linkage.edge(m)
            pa, pb = tc.base.coords[e.a], tc.base.coords[e.b]
            ta, tb = param(pa), param(pb)
            if abs(tb - ta) <= TOL_GEOM:
                raise ValidationError(f"bar {m} degenerate along group line")
            frac = (tmid - ta) / (tb - ta)
            qa, qb = pulled.coords[e.a], pulled.coords[e.b]
            q = (qa[0] + frac * (qb[0] - qa[0]), qa[1] + frac * (qb[1] - qa[1]))
            s = (q[0] - mid_pt[0]) * nrm[0] + (q[1] - mid_pt[1]) * nrm[1]
            keyed.append((s, m))
        keyed.sort()
        for (s1, m1), (s2, m2) in zip(keyed, keyed[1:]):
            if abs(s2 - s1) <= TOL_GEOM:
                raise AmbiguousAnnotationError(
                    f"bars {m1} and {m2} have no stable side order"
                )
        groups.append(CollocationGroup(tuple(members),
                                       tuple(m for _, m in keyed), core))
    return groups


def strand_side_order_stable(tc: TouchingConfig,
                             eps_values: Sequence[float]) -> bool:
    """True if the group side orders agree at every listed eps."""
    ref = [g.order for g in collocation_groups(tc, eps_values[0])]
    for eps in eps_values[1:]:
        if [g.order for g in collocation_groups(tc, eps)] != ref:
            return False
    return True


def perturb(tc: TouchingConfig, delta: float, seed: int) -> Configuration:
    """Nontouching delta-perturbation preserving the side ordering.

    Vertices move along their stored offsets scaled so no vertex travels more
    than delta, plus a seeded tangential jitter of at most delta/10. The
    returned configuration belongs to a delta-related linkage whose lengths
    are recomputed from the new coordinates.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return tc.base
    maxnorm = tc.max_offset_norm
    if maxnorm == 0:
        raise ValidationError("perturb needs nonzero offsets")
    eps = delta / maxnorm
    safe = tc.epsilon0 * maxnorm
    if eps > tc.epsilon0:
        raise PerturbationTooLarge(delta, safe)

    rng = np.random.RandomState(seed & 0x7FFFFFFF)
    jit_scale = delta / 10.0
    names = list(tc.linkage.vertices)
    raw = rng.uniform(-1.0, 1.0, size=len(names))

    for attempt in range(40):
        coords = {}
        for i, v in enumerate(names):
            ox, oy = tc.offsets[v]
            onorm = math.hypot(ox, oy)
            dx, dy = eps * ox, eps * oy
            if onorm > 0 and jit_scale > 0:
                tx, ty = -oy / onorm, ox / onorm
                dx += raw[i] * jit_scale * tx
                dy += raw[i] * jit_scale * ty
            dnorm = math.hypot(dx, dy)
            cap = delta * (1.0 - 1e-12)
            if dnorm > cap:
                dx *= cap / dnorm
                dy *= cap / dnorm
            px, py = tc.base.coords[v]
            coords[v] = (px + dx, py + dy)
        linkage = _relength(tc.linkage, coords)
        cfg = Configuration(linkage, coords)
        if model.is_nontouching(cfg):
            return cfg
        jit_scale *= 0.5
    raise ValidationError("could not realize a noncrossing perturbation")


def _relength(linkage: Linkage, coords) -> Linkage:
    edges = tuple(
        Edge(e.a, e.b, math.hypot(coords[e.a][0] - coords[e.b][0],
                                  coords[e.a][1] - coords[e.b][1]))
        for e in linkage.edges
    )
    return Linkage(linkage.vertices, edges, linkage.rotation, linkage.outer_face)


def add_zero_length_edges(tc: TouchingConfig,
                          sites: Sequence[tuple[str, int]]) -> TouchingConfig:
    """Attach degree-1 vertices by zero-length edges at the given hosts.

    ``sites`` lists (host vertex, rotation position); the new edge is inserted
    into the host's cyclic order at that index. Offsets for the new vertices
    are nudged copies of the host's so the pulled-apart drawing stays
    nontouching.
    """
    linkage = tc.linkage
    vertices = list(linkage.vertices)
    edges = list(linkage.edges)
    rotation = {v: list(ns) for v, ns in linkage.rotation.items()}
    offsets = dict(tc.offsets)
    coords = dict(tc.base.coords)

    counters: dict[str, int] = {}
    for host, pos in sites:
        if host not in coords:
            raise ValidationError(f"unknown host vertex {host!r}")
        deg = len(rotation.get(host, linkage.adjacency()[host]))
        if not (0 <= pos <= deg):
            raise ValidationError(
                f"rotation position {pos} invalid at {host!r} (degree {deg})"
            )
        counters[host] = counters.get(host, 0) + 1
        new = f"{host}_{counters[host]}"
        while new in coords:
            counters[host] += 1
            new = f"{host}_{counters[host]}"
        vertices.append(new)
        edges.append(Edge(host, new, 0.0))
        if host in rotation:
            rotation[host] = rotation[host][:pos] + [new] + rotation[host][pos:]
        rotation[new] = [host]
        coords[new] = coords[host]
        # Lateral nudge, direction varied per site so siblings separate.
        k = counters[host]
        ang = 0.9 * k
        hx, hy = tc.offsets[host]
        offsets[new] = (hx + 0.05 * k * math.cos(ang), hy + 0.05 * k * math.sin(ang))

    scale = 1.0
    for attempt in range(30):
        off = {
            v: offsets[v] if v in tc.offsets else (
                tc.offsets[v.split("_")[0]][0]
                + scale * (offsets[v][0] - tc.offsets[v.split("_")[0]][0]),
                tc.offsets[v.split("_")[0]][1]
                + scale * (offsets[v][1] - tc.offsets[v.split("_")[0]][1]),
            )
            for v in vertices
        }
        new_linkage = Linkage(tuple(vertices), tuple(edges),
                              {v: tuple(ns) for v, ns in rotation.items()},
                              linkage.outer_face)
        cand = TouchingConfig(Configuration(new_linkage, coords), off)
        try:
            if cand.epsilon0 > 0:
                return cand
        except ValidationError:
            pass
        scale *= 0.5
    raise ValidationError("could not place zero-length edges without crossing")


# ---------------------------------------------------------------------------
# Serialization: the core-model configuration JSON plus an "offsets" key.
# ---------------------------------------------------------------------------

def touching_to_json(tc: TouchingConfig) -> str:
    payload = json.loads(model.configuration_to_json(tc.base))
    payload["offsets"] = {v: [o[0], o[1]] for v, o in tc.offsets.items()}
    return json.dumps(payload, indent=1)


def touching_from_json(text: str) -> TouchingConfig:
    data = model._parse_payload(text)
    model._reject_unknown(data, model._LINKAGE_KEYS | {"coords", "offsets"},
                          "touching configuration")
    if "offsets" not in data:
        raise model.FormatError("missing field 'offsets'")
    offsets_raw = data.pop("offsets")
    cfg = model.configuration_from_json(json.dumps(data))
    offsets = {}
    for v, xy in offsets_raw.items():
        if (not isinstance(xy, list) or len(xy) != 2
                or not all(isinstance(c, (int, float)) for c in xy)):
            raise model.FormatError(f"offsets[{v!r}] must be [dx, dy]")
        offsets[str(v)] = (float(xy[0]), float(xy[1]))
    return TouchingConfig(cfg, offsets)
