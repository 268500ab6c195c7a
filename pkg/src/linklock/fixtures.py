"""Parametric generators for the locked-tree fixtures and experiment controls.

The flagship fixture is an 11-edge self-touching tree whose base geometry is
a vertical segment with three distinct points (top, center, bottom). Ten unit
bars and one double-length spine collapse onto it; the per-vertex offsets
encode the pulled-apart drawing whose strand order drives the rule-based
rigidity replay. Vertex labels A-H follow the reduction narrative (bars CA,
CF, EF, DG, DB, BH); the mirror half uses lowercase counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .model import Configuration, Edge, Linkage, ValidationError
from .touching import TouchingConfig, add_zero_length_edges, perturb


@dataclass(frozen=True)
class FixtureParams:
    scale: float = 1.0
    h: float = 0.01
    g: float = 0.01
    delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValidationError("scale must be positive")
        for name in ("h", "g", "delta"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")


def rotation_from_coords(linkage: Linkage, coords) -> dict[str, tuple[str, ...]]:
    """Counterclockwise neighbor order read off a nontouching drawing."""
    rot = {}
    for v in linkage.vertices:
        neigh = linkage.adjacency()[v]
        px, py = coords[v]

        def ang(w):
            qx, qy = coords[w]
            return math.atan2(qy - py, qx - px)

        rot[v] = tuple(sorted(neigh, key=ang))
    return rot


# Pulled-apart x-offsets (y-offsets are zero): chosen so the drawing is
# nontouching at every epsilon in (0, 1] and the strand orders come out as
#   top band:    EF CF CA DG DB BH
#   bottom band: Nh dN dF CA AG eG
_FIG2_LAYOUT = {
    # top cluster
    "C": ("T", 2.0), "E": ("T", 0.0), "D": ("T", 3.0), "H": ("T", 8.0),
    # center cluster
    "F": ("M", 1.0), "G": ("M", 4.0), "B": ("M", 5.0), "N": ("M", 0.3),
    # bottom cluster (mirror labels in lowercase)
    "A": ("O", 4.0), "e": ("O", 5.0), "d": ("O", 0.6), "h": ("O", 0.1),
}

_FIG2_EDGES = [
    ("C", "A", 2.0),  # the long spine
    ("C", "F", 1.0), ("E", "F", 1.0),
    ("D", "G", 1.0), ("D", "B", 1.0), ("B", "H", 1.0),
    ("A", "G", 1.0), ("e", "G", 1.0),
    ("d", "F", 1.0), ("d", "N", 1.0), ("N", "h", 1.0),
]

# The mirror tree-automorphism: swaps the two halves, fixes the spine.
FIG2_MIRROR = {
    "C": "A", "A": "C", "E": "e", "e": "E", "D": "d", "d": "D",
    "H": "h", "h": "H", "F": "G", "G": "F", "B": "N", "N": "B",
}

# Branch vertices and how many pendant (zero-length) edges the orthogonal
# drawing attaches there; 10 sites in total.
_FIG2_SPLIT_SITES = [
    ("C", 1), ("F", 2), ("D", 1), ("B", 1),
    ("G", 2), ("N", 1), ("A", 1), ("d", 1),
]


def fig2_tree(params: FixtureParams = FixtureParams()) -> TouchingConfig:
    """The 11-edge locked self-touching tree (three distinct base points)."""
    s = params.scale
    level = {"T": s, "M": 0.0, "O": -s}
    vertices = tuple(_FIG2_LAYOUT)
    coords = {v: (0.0, level[lv]) for v, (lv, _) in _FIG2_LAYOUT.items()}
    offsets = {v: (x * s, 0.0) for v, (_, x) in _FIG2_LAYOUT.items()}
    edges = tuple(Edge(a, b, L * s) for a, b, L in _FIG2_EDGES)
    linkage = Linkage(vertices, edges)
    tc = TouchingConfig(Configuration(linkage, coords), offsets)
    rot = rotation_from_coords(linkage, tc.pulled_apart(tc.epsilon0 / 2.0).coords)
    linkage = Linkage(vertices, edges, rot)
    return TouchingConfig(Configuration(linkage, coords), offsets)


def fig2_zero_augmented(params: FixtureParams = FixtureParams()) -> TouchingConfig:
    """fig2 plus ten pendant zero-length edges at the branch sites, one per
    horizontal edge of the orthogonal drawing (21 edges total)."""
    tc = fig2_tree(params)
    sites = []
    for host, count in _FIG2_SPLIT_SITES:
        for _ in range(count):
            sites.append((host, 0))
    return add_zero_length_edges(tc, sites)


def fig2_cut(params: FixtureParams = FixtureParams()
             ) -> list[tuple[str, Configuration]]:
    """Delta-perturbed fig2 with bar DG removed, split into its two trees."""
    tc = fig2_tree(params)
    cfg = perturb(tc, params.delta * params.scale, params.seed)
    cut = cfg.linkage.without_edge("DG")
    comps = cut.components()
    comps.sort(key=lambda c: -len(c))
    out = []
    for label, comp in zip(("a", "b"), comps):
        verts = tuple(sorted(comp))
        edges = tuple(e for e in cut.edges if e.a in comp and e.b in comp)
        rot = {v: tuple(w for w in cut.rotation.get(v, ())) for v in verts}
        sub = Linkage(verts, edges, rot if any(rot.values()) else {})
        coords = {v: cfg.coords[v] for v in verts}
        out.append((f"fig2-cut-{label}", Configuration(sub, coords)))
    return out


def fig2b_tree(params: FixtureParams = FixtureParams()) -> TouchingConfig:
    """The simplified merged linkage: two unit bars and the double-length
    spine between three collapsed points (one cycle; trivially rigid as the
    degenerate triangle)."""
    s = params.scale
    coords = {"T": (0.0, s), "M": (0.0, 0.0), "B": (0.0, -s)}
    offsets = {"T": (0.0, 0.0), "M": (1.0 * s, 0.0), "B": (0.0, 0.0)}
    edges = (Edge("T", "M", s), Edge("M", "B", s), Edge("T", "B", 2 * s))
    linkage = Linkage(("T", "M", "B"), edges)
    tc = TouchingConfig(Configuration(linkage, coords), offsets)
    rot = rotation_from_coords(linkage, tc.pulled_apart(tc.epsilon0 / 2.0).coords)
    linkage = Linkage(("T", "M", "B"), edges, rot)
    return TouchingConfig(Configuration(linkage, coords), offsets)


# Global lane of every fig2 bar in the orthogonal drawing; 0.5 lane units
# equal one horizontal length h.
_FIG3_LANES = {
    "EF": 1.0, "CF": 2.0, "CA": 3.0, "DG": 4.0, "DB": 5.0, "BH": 6.0,
    "Nh": 0.5, "dN": 1.5, "dF": 2.5, "AG": 4.5, "eG": 5.5,
}

# Height stagger (per vertex, in units of g) within each cluster.
_FIG3_STAGGER = {
    "C": 1.0, "D": -1.0, "E": 0.0, "H": 0.0,
    "B": 2.0, "F": 1.0, "G": -1.0, "N": -2.0,
    "A": -1.0, "d": 1.0, "e": 0.0, "h": 0.0,
}

FIG3_CONVERGENCE_CONSTANT = 13.0


def fig3_orthogonal_tree(params: FixtureParams = FixtureParams()) -> Configuration:
    """The 21-edge orthogonal tree: every fig2 bar drawn vertical in its own
    lane, with short horizontal edges splitting each branch vertex.

    Converges to the zero-length-augmented fig2 base as h, g -> 0; every
    vertex copy stays within FIG3_CONVERGENCE_CONSTANT * max(h, g) of its
    host's collapsed position.
    """
    if params.h <= 0 or params.g <= 0:
        raise ValidationError(
            "fig3 needs h > 0 and g > 0; use the self-touching pathway "
            "(fig2_zero_augmented) for the degenerate case"
        )
    s, h, g = params.scale, params.h, params.g
    if g >= s / 4:
        raise ValidationError("g must be well below scale/4")
    base = fig2_tree(params)
    linkage = base.linkage
    level = {v: base.base.coords[v][1] for v in linkage.vertices}

    # lanes per vertex: one copy per incident bar, sorted by lane
    lanes_at: dict[str, list[tuple[float, str]]] = {}
    for e in linkage.edges:
        lane = _FIG3_LANES[e.name]
        lanes_at.setdefault(e.a, []).append((lane, e.name))
        lanes_at.setdefault(e.b, []).append((lane, e.name))
    copy_name: dict[tuple[str, float], str] = {}
    coords: dict[str, tuple[float, float]] = {}
    vertices: list[str] = []
    edges: list[Edge] = []
    for v in linkage.vertices:
        items = sorted(lanes_at[v])
        y = level[v] + _FIG3_STAGGER[v] * g
        for k, (lane, _) in enumerate(items):
            name = v if k == 0 else f"{v}_{k}"
            copy_name[(v, lane)] = name
            vertices.append(name)
            coords[name] = (lane * 2.0 * h, y)
        for k in range(len(items) - 1):
            a = copy_name[(v, items[k][0])]
            b = copy_name[(v, items[k + 1][0])]
            edges.append(Edge(a, b, (items[k + 1][0] - items[k][0]) * 2.0 * h))
    for e in linkage.edges:
        lane = _FIG3_LANES[e.name]
        a = copy_name[(e.a, lane)]
        b = copy_name[(e.b, lane)]
        length = abs(coords[a][1] - coords[b][1])
        edges.append(Edge(a, b, length))

    out = Linkage(tuple(vertices), tuple(edges))
    rot = rotation_from_coords(out, coords)
    out = Linkage(tuple(vertices), tuple(edges), rot)
    cfg = Configuration(out, coords)
    cfg.check_lengths()
    return cfg


def _random_chain(n: int, seed: int) -> Configuration:
    rng = np.random.RandomState(seed & 0x7FFFFFFF)
    for _ in range(200):
        angles = rng.uniform(-2.2, 2.2, size=n - 1)
        pts = [(0.0, 0.0), (1.0, 0.0)]
        heading = 0.0
        ok = True
        for a in angles:
            heading += a
            x, y = pts[-1]
            pts.append((x + math.cos(heading), y + math.sin(heading)))
        verts = tuple(f"v{i}" for i in range(n + 1))
        edges = tuple(Edge(f"v{i}", f"v{i+1}", 1.0) for i in range(n))
        linkage = Linkage(verts, edges)
        cfg = Configuration(linkage, dict(zip(verts, pts)))
        if model.is_nontouching(cfg):
            rot = rotation_from_coords(linkage, cfg.coords)
            return Configuration(Linkage(verts, edges, rot), cfg.coords)
    raise ValidationError(f"could not sample a nontouching {n}-edge chain")


def comb_tree() -> Configuration:
    """Orthogonal caterpillar: 5 spine edges plus 6 unit teeth (11 edges)."""
    verts = []
    edges = []
    coords = {}
    for i in range(6):
        verts.append(f"s{i}")
        coords[f"s{i}"] = (float(i), 0.0)
        verts.append(f"t{i}")
        coords[f"t{i}"] = (float(i), 1.0)
        edges.append(Edge(f"s{i}", f"t{i}", 1.0))
    for i in range(5):
        edges.append(Edge(f"s{i}", f"s{i+1}", 1.0))
    linkage = Linkage(tuple(verts), tuple(edges))
    rot = rotation_from_coords(linkage, coords)
    return Configuration(Linkage(tuple(verts), tuple(edges), rot), coords)


def control_instances(seed: int = 0,
                      params: FixtureParams = FixtureParams()
                      ) -> list[tuple[str, Configuration]]:
    out = [(f"chain-{n}", _random_chain(n, seed + n)) for n in (4, 8, 16)]
    out.append(("comb", comb_tree()))
    out.extend(fig2_cut(params))
    return out
