"""Core data model: linkages, configurations, motions, and their JSON forms.

Vertex ids are stable strings. Edge ids are derived from the endpoint pair:
the concatenation ``a + b`` when both ids are single characters (so the
locked-tree fixtures read "CA", "DG", ...), else ``a-b``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import geom
from .constants import TOL_GEOM, TOL_LEN


class ValidationError(ValueError):
    """A structural invariant is violated."""


class FormatError(ValueError):
    """A file could not be parsed; the message names the offending field."""


def edge_name(a: str, b: str) -> str:
    if len(a) == 1 and len(b) == 1:
        return a + b
    return f"{a}-{b}"


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    length: float

    @property
    def name(self) -> str:
        return edge_name(self.a, self.b)

    def other(self, v: str) -> str:
        if v == self.a:
            return self.b
        if v == self.b:
            return self.a
        raise KeyError(f"{v} is not an endpoint of {self.name}")

    def touches(self, v: str) -> bool:
        return v == self.a or v == self.b


@dataclass(frozen=True)
class Linkage:
    """Graph + nonnegative lengths + rotation system (neighbor cyclic orders).

    Simple and connected is always required. The artifact's own fixtures are
    trees except for the merged tree of the rigidity reduction, whose quotient
    carries one cycle, so tree-ness is checked by ``is_tree`` rather than at
    construction.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    rotation: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    outer_face: str = "outer"

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise ValidationError(f"duplicate vertex id {v!r}")
            seen.add(v)
        vset = set(self.vertices)
        eseen = set()
        for e in self.edges:
            if e.a not in vset or e.b not in vset:
                raise ValidationError(f"edge {e.name} references unknown vertex")
            if e.a == e.b:
                raise ValidationError(f"edge {e.name} is a self-loop")
            key = frozenset((e.a, e.b))
            if key in eseen:
                raise ValidationError(f"parallel edge {e.name}")
            eseen.add(key)
            if not (e.length >= 0.0) or not math.isfinite(e.length):
                raise ValidationError(f"edge {e.name} has negative or invalid length")
        if self.vertices and not self.is_connected():
            raise ValidationError("linkage graph is not connected")
        rot = dict(self.rotation)
        if rot:
            adj = self.adjacency()
            for v in self.vertices:
                listed = tuple(rot.get(v, ()))
                if sorted(listed) != sorted(adj[v]):
                    raise ValidationError(
                        f"rotation at {v!r} does not list its incident edges exactly once"
                    )
        object.__setattr__(self, "rotation", {v: tuple(ns) for v, ns in rot.items()})

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
        return adj

    def edges_at(self, v: str) -> list[Edge]:
        return [e for e in self.edges if e.touches(v)]

    def edge(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(f"no edge named {name!r}")

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    @property
    def is_tree(self) -> bool:
        return len(self.edges) == len(self.vertices) - 1 and self.is_connected()

    def components(self) -> list[set[str]]:
        adj = self.adjacency()
        left = set(self.vertices)
        comps = []
        while left:
            start = min(left)
            comp = {start}
            stack = [start]
            while stack:
                for w in adj[stack.pop()]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            comps.append(comp)
            left -= comp
        return comps

    def without_edge(self, name: str) -> "Linkage":
        """Same vertex set minus one edge; the result may be disconnected, so
        it is returned as a plain structure via component splitting helpers."""
        kept = tuple(e for e in self.edges if e.name != name)
        if len(kept) == len(self.edges):
            raise KeyError(f"no edge named {name!r}")
        rot = {
            v: tuple(w for w in ns if frozenset((v, w)) != frozenset(name_pair(name, self)))
            for v, ns in self.rotation.items()
        } if self.rotation else {}
        # bypass the connectivity check via component extraction by callers
        obj = object.__new__(Linkage)
        object.__setattr__(obj, "vertices", self.vertices)
        object.__setattr__(obj, "edges", kept)
        object.__setattr__(obj, "rotation", rot)
        object.__setattr__(obj, "outer_face", self.outer_face)
        return obj


def name_pair(name: str, linkage: Linkage) -> tuple[str, str]:
    e = linkage.edge(name)
    return (e.a, e.b)


@dataclass(frozen=True)
class Configuration:
    """Vertex coordinates for a linkage. Length agreement is checked by
    ``check_lengths``; derived drawings (pulled-apart forms) intentionally
    carry O(eps) residuals."""

    linkage: Linkage
    coords: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        missing = [v for v in self.linkage.vertices if v not in self.coords]
        if missing:
            raise ValidationError(f"coords missing for vertices {missing}")
        object.__setattr__(
            self, "coords",
            {v: (float(self.coords[v][0]), float(self.coords[v][1]))
             for v in self.linkage.vertices},
        )

    def pos(self, v: str) -> tuple[float, float]:
        return self.coords[v]

    def segment(self, e: Edge):
        return (self.coords[e.a], self.coords[e.b])

    def check_lengths(self, tol: float = TOL_LEN) -> None:
        r = edge_length_residual(self)
        if r > tol:
            raise ValidationError(f"edge length residual {r:.3e} exceeds {tol:.1e}")


def edge_length_residual(config: Configuration) -> float:
    """Max over edges of | |pu - pv| - length |."""
    worst = 0.0
    for e in config.linkage.edges:
        pa, pb = config.coords[e.a], config.coords[e.b]
        worst = max(worst, abs(math.hypot(pa[0] - pb[0], pa[1] - pb[1]) - e.length))
    return worst


def _adjacent(e: Edge, f: Edge) -> bool:
    return e.a in (f.a, f.b) or e.b in (f.a, f.b)


def is_nontouching(config: Configuration, tol: float = TOL_GEOM) -> bool:
    """True iff edges meet only at shared vertices.

    Non-adjacent pairs must be disjoint; adjacent pairs must meet only at the
    shared endpoint.
    """
    edges = config.linkage.edges
    for i in range(len(edges)):
        si = config.segment(edges[i])
        for j in range(i + 1, len(edges)):
            sj = config.segment(edges[j])
            cls = geom.classify_pair(si[0], si[1], sj[0], sj[1], tol)
            if _adjacent(edges[i], edges[j]):
                if cls.kind != geom.SHARED_ENDPOINT:
                    return False
            elif cls.kind != geom.DISJOINT:
                return False
    return True


@dataclass(frozen=True)
class Motion:
    """Time-sampled piecewise-linear path through configuration space."""

    linkage: Linkage
    samples: tuple[tuple[float, Mapping[str, tuple[float, float]]], ...]

    def __post_init__(self):
        if not self.samples:
            raise ValidationError("motion needs at least one sample")
        ts = [t for t, _ in self.samples]
        if abs(ts[0]) > 1e-15 or abs(ts[-1] - 1.0) > 1e-15:
            raise ValidationError("motion samples must start at t=0 and end at t=1")
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ValidationError("motion sample times must be strictly increasing")
        norm = tuple(
            (float(t), {v: (float(c[v][0]), float(c[v][1])) for v in self.linkage.vertices})
            for t, c in self.samples
        )
        object.__setattr__(self, "samples", norm)

    def configuration(self, index: int) -> Configuration:
        return Configuration(self.linkage, self.samples[index][1])

    def validate(self, tol_len: float = TOL_LEN) -> None:
        """Re-check lengths at every sample and noncrossing at samples and
        interval midpoints (the checked resolution of the certificate)."""
        for k, (_, coords) in enumerate(self.samples):
            cfg = Configuration(self.linkage, coords)
            cfg.check_lengths(tol_len)
            if _has_proper_crossing(cfg):
                raise ValidationError(f"crossing at sample {k}")
        for k in range(len(self.samples) - 1):
            a = self.samples[k][1]
            b = self.samples[k + 1][1]
            midc = {v: ((a[v][0] + b[v][0]) / 2.0, (a[v][1] + b[v][1]) / 2.0)
                    for v in self.linkage.vertices}
            if _has_proper_crossing(Configuration(self.linkage, midc)):
                raise ValidationError(f"crossing inside interval {k}")


def _has_proper_crossing(config: Configuration) -> bool:
    edges = config.linkage.edges
    for i in range(len(edges)):
        if edges[i].length <= 0.0:
            continue
        si = config.segment(edges[i])
        for j in range(i + 1, len(edges)):
            if edges[j].length <= 0.0 or _adjacent(edges[i], edges[j]):
                continue
            sj = config.segment(edges[j])
            cls = geom.classify_pair(si[0], si[1], sj[0], sj[1])
            if cls.kind == geom.CROSSING:
                return True
    return False


# ---------------------------------------------------------------------------
# Serialization. Top-level keys are fixed; unknown keys are rejected.
# ---------------------------------------------------------------------------

_LINKAGE_KEYS = {"vertices", "edges", "rotation", "outerFace"}


def _linkage_payload(linkage: Linkage) -> dict:
    return {
        "vertices": list(linkage.vertices),
        "edges": [{"a": e.a, "b": e.b, "length": e.length} for e in linkage.edges],
        "rotation": {v: list(ns) for v, ns in linkage.rotation.items()},
        "outerFace": linkage.outer_face,
    }


def _coords_payload(coords: Mapping[str, tuple[float, float]]) -> dict:
    return {v: [c[0], c[1]] for v, c in coords.items()}


def linkage_to_json(linkage: Linkage) -> str:
    return json.dumps(_linkage_payload(linkage), indent=1)


def configuration_to_json(config: Configuration) -> str:
    payload = _linkage_payload(config.linkage)
    payload["coords"] = _coords_payload(config.coords)
    return json.dumps(payload, indent=1)


def motion_to_json(motion: Motion) -> str:
    payload = _linkage_payload(motion.linkage)
    payload["samples"] = [
        {"t": t, "coords": _coords_payload(c)} for t, c in motion.samples
    ]
    return json.dumps(payload, indent=1)


def _reject_unknown(data: dict, allowed: set, what: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise FormatError(f"unknown keys {sorted(unknown)} in {what}")


def _parse_payload(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("top level must be an object")
    return data


def _linkage_from(data: dict) -> Linkage:
    for key in ("vertices", "edges"):
        if key not in data:
            raise FormatError(f"missing field {key!r}")
    if not isinstance(data["vertices"], list) or not all(
        isinstance(v, str) for v in data["vertices"]
    ):
        raise FormatError("field 'vertices' must be a list of strings")
    edges = []
    for i, rec in enumerate(data["edges"]):
        if not isinstance(rec, dict):
            raise FormatError(f"edge record {i} must be an object")
        _reject_unknown(rec, {"a", "b", "length"}, f"edge record {i}")
        try:
            a, b, length = rec["a"], rec["b"], rec["length"]
        except KeyError as exc:
            raise FormatError(f"edge record {i} missing field {exc.args[0]!r}") from exc
        if not isinstance(length, (int, float)) or isinstance(length, bool):
            raise FormatError(f"edge record {i}: 'length' must be a number")
        if length < 0:
            raise ValidationError(f"edge record {i}: negative length")
        edges.append(Edge(str(a), str(b), float(length)))
    rotation = data.get("rotation", {})
    if not isinstance(rotation, dict):
        raise FormatError("field 'rotation' must be an object")
    rot = {str(v): tuple(str(w) for w in ns) for v, ns in rotation.items()}
    outer = data.get("outerFace", "outer")
    try:
        return Linkage(tuple(data["vertices"]), tuple(edges), rot, str(outer))
    except ValidationError:
        raise


def linkage_from_json(text: str) -> Linkage:
    data = _parse_payload(text)
    _reject_unknown(data, _LINKAGE_KEYS, "linkage")
    return _linkage_from(data)


def _coords_from(data: dict, linkage: Linkage) -> dict:
    raw = data["coords"]
    if not isinstance(raw, dict):
        raise FormatError("field 'coords' must be an object")
    out = {}
    for v, xy in raw.items():
        if (not isinstance(xy, list) or len(xy) != 2
                or not all(isinstance(c, (int, float)) for c in xy)):
            raise FormatError(f"coords[{v!r}] must be [x, y]")
        out[str(v)] = (float(xy[0]), float(xy[1]))
    return out


def configuration_from_json(text: str) -> Configuration:
    data = _parse_payload(text)
    _reject_unknown(data, _LINKAGE_KEYS | {"coords"}, "configuration")
    if "coords" not in data:
        raise FormatError("missing field 'coords'")
    linkage = _linkage_from(data)
    return Configuration(linkage, _coords_from(data, linkage))


def motion_from_json(text: str) -> Motion:
    data = _parse_payload(text)
    _reject_unknown(data, _LINKAGE_KEYS | {"samples"}, "motion")
    if "samples" not in data:
        raise FormatError("missing field 'samples'")
    linkage = _linkage_from(data)
    samples = []
    for i, rec in enumerate(data["samples"]):
        if not isinstance(rec, dict):
            raise FormatError(f"sample {i} must be an object")
        _reject_unknown(rec, {"t", "coords"}, f"sample {i}")
        if "t" not in rec or "coords" not in rec:
            raise FormatError(f"sample {i} missing 't' or 'coords'")
        samples.append((float(rec["t"]), _coords_from(rec, linkage)))
    return Motion(linkage, tuple(samples))
