"""Rule-based rigidity analysis of self-touching configurations.

Rule 1: a bar collocated with an equal-length bar whose incident bars fold
back over it (angles under 90 degrees) on the appropriate sides must stay
collocated for positive time. Rule 2: the same conclusion for a bar and an
equal-length incident bar when a third bar forms a convex angle surrounding
it.

The detectors evaluate lengths, collocation and fold angles on the collapsed
base geometry and read side data from the pulled-apart strand order. Firing
is cascaded to a fixed point: each conclusion pins the two bars together, and
later passes treat pinned bars (and bars touching them) as part of the
enclosure. Conclusions then become vertex pins, and a rank test on a
pulled-apart representative of the merged system decides the verdict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geom
from .constants import TOL_ANG, TOL_GEOM, TOL_LEN, TOL_RANK
from .model import Configuration, Edge, Linkage
from .touching import CollocationGroup, TouchingConfig, collocation_groups

RULE1 = "Rule1"
RULE2 = "Rule2"
CONCLUSION = "collocated for positive time"


@dataclass(frozen=True)
class RuleApplication:
    rule: str
    bar: str
    collocated_with: str
    witnesses: tuple[str, ...]

    @property
    def conclusion(self) -> str:
        return CONCLUSION

    def key(self):
        return (self.rule, self.bar, self.collocated_with, self.witnesses)

    def to_payload(self) -> dict:
        return {
            "rule": self.rule,
            "bar": self.bar,
            "collocatedWith": self.collocated_with,
            "witnesses": list(self.witnesses),
            "conclusion": self.conclusion,
        }


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[RuleApplication, ...]
    pins: tuple[tuple[str, str], ...]
    verdict: str
    dof: int
    dof_collapsed: int = field(compare=False, default=-1)

    def to_json(self) -> str:
        return json.dumps({
            "steps": [s.to_payload() for s in self.steps],
            "pins": [list(p) for p in self.pins],
            "verdict": self.verdict,
            "dof": self.dof,
        }, indent=1)

    def proof_log(self) -> str:
        lines = []
        for s in self.steps:
            if s.rule == RULE1:
                lines.append(
                    f"Rule 1: {s.bar} stays collocated with {s.collocated_with} "
                    f"(enclosing bars {', '.join(s.witnesses)})."
                )
            else:
                lines.append(
                    f"Rule 2: {s.bar} stays collocated with the incident bar "
                    f"{s.collocated_with} (enclosing bar {', '.join(s.witnesses)})."
                )
        merged = len({frozenset(p) for p in self.pins})
        lines.append(f"Merged system: {merged} vertex identifications.")
        if self.dof_collapsed >= 0 and self.dof_collapsed != self.dof:
            lines.append(
                f"Note: first-order count at the fully collapsed coordinates is "
                f"{self.dof_collapsed}; the pulled-apart representative gives "
                f"{self.dof}."
            )
        lines.append(f"Infinitesimal degrees of freedom: {self.dof}.")
        lines.append(f"Verdict: {self.verdict}.")
        return "\n".join(lines)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def clusters(self) -> dict:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return {r: sorted(ms) for r, ms in out.items()}


class _Context:
    """Shared geometric facts for one detection run."""

    def __init__(self, tc: TouchingConfig):
        self.tc = tc
        self.linkage = tc.linkage
        self.base = tc.base
        self.pulled = tc.pulled_apart(tc.epsilon0 / 2.0)
        self.groups = collocation_groups(tc)
        self.group_of: dict[tuple[str, str], CollocationGroup] = {}
        for g in self.groups:
            for i, a in enumerate(g.order):
                for b in g.order[i + 1:]:
                    self.group_of[(a, b)] = g
                    self.group_of[(b, a)] = g
        comp = _UnionFind(self.linkage.vertices)
        for e in self.linkage.edges:
            comp.union(e.a, e.b)
        self.component = {v: comp.find(v) for v in self.linkage.vertices}
        self.edges_at = {v: self.linkage.edges_at(v) for v in self.linkage.vertices}

    def same_component(self, e: Edge, f: Edge) -> bool:
        return self.component[e.a] == self.component[f.a]

    def collocated(self, e: Edge, f: Edge):
        """Endpoint matching when both bars occupy one base segment, else None."""
        pe = (self.base.coords[e.a], self.base.coords[e.b])
        pf = (self.base.coords[f.a], self.base.coords[f.b])

        def close(p, q):
            return math.hypot(p[0] - q[0], p[1] - q[1]) <= TOL_GEOM

        if close(pe[0], pf[0]) and close(pe[1], pf[1]):
            return {e.a: f.a, e.b: f.b}
        if close(pe[0], pf[1]) and close(pe[1], pf[0]):
            return {e.a: f.b, e.b: f.a}
        return None

    def fold_witnesses(self, bprime: Edge, v: str, exclude: set[str]):
        """Edges at v folding back along bprime (base angle < 90 degrees)."""
        out = []
        apex = self.base.coords[v]
        far_b = self.base.coords[bprime.other(v)]
        for w in self.edges_at[v]:
            if w.name in exclude or w.name == bprime.name:
                continue
            if w.length <= TOL_LEN:
                continue
            try:
                ang = geom.angle_at(self.base.coords[w.other(v)], apex, far_b)
            except geom.UndefinedAngleError:
                continue
            if ang < math.pi / 2.0 - TOL_ANG:
                out.append(w)
        return sorted(out, key=lambda w: w.name)

    def witness_side(self, w: Edge, v: str, bprime: Edge) -> float:
        """Side of w's strand near its attachment, relative to bprime's
        pulled line (sign of the cross product; orientation is bprime.a->b)."""
        a = self.pulled.coords[bprime.a]
        b = self.pulled.coords[bprime.b]
        pv = self.pulled.coords[v]
        pf = self.pulled.coords[w.other(v)]
        sample = (pv[0] + 0.1 * (pf[0] - pv[0]), pv[1] + 0.1 * (pf[1] - pv[1]))
        return (b[0] - a[0]) * (sample[1] - a[1]) - (b[1] - a[1]) * (sample[0] - a[0])

    def strand_side_sign(self, b: Edge, bprime: Edge, r1_dir) -> int:
        """+1 if b's strand lies on the CCW (left) side of direction r1_dir
        relative to bprime's strand, -1 otherwise."""
        g = self.group_of.get((b.name, bprime.name))
        if g is None:
            raise ValueError("bars not in a common group")
        core_mid = (0.5 * (g.core[0][0] + g.core[1][0]),
                    0.5 * (g.core[0][1] + g.core[1][1]))

        def strand_point(e: Edge):
            pa = self.base.coords[e.a]
            pb = self.base.coords[e.b]
            dx, dy = pb[0] - pa[0], pb[1] - pa[1]
            L2 = dx * dx + dy * dy
            t = ((core_mid[0] - pa[0]) * dx + (core_mid[1] - pa[1]) * dy) / L2
            t = min(1.0, max(0.0, t))
            qa = self.pulled.coords[e.a]
            qb = self.pulled.coords[e.b]
            return (qa[0] + t * (qb[0] - qa[0]), qa[1] + t * (qb[1] - qa[1]))

        sb = strand_point(b)
        sp = strand_point(bprime)
        cr = r1_dir[0] * (sb[1] - sp[1]) - r1_dir[1] * (sb[0] - sp[0])
        return 1 if cr > 0 else -1


def _allowed_between(ctx: _Context, member: str, b: Edge, bprime: Edge,
                     witness_names: set[str], eq: _UnionFind) -> bool:
    if member in witness_names:
        return True
    cluster = {
        e.name for e in ctx.linkage.edges
        if eq.find(e.name) in (eq.find(b.name), eq.find(bprime.name))
    }
    if member in cluster:
        return True
    m = ctx.linkage.edge(member)
    for name in cluster:
        ce = ctx.linkage.edge(name)
        if m.a in (ce.a, ce.b) or m.b in (ce.a, ce.b):
            return True
    return False


def _rule1_pass(ctx: _Context, eq: _UnionFind) -> list[RuleApplication]:
    apps = []
    edges = [e for e in ctx.linkage.edges if e.length > TOL_LEN]
    for b in edges:
        for bp in edges:
            if b.name == bp.name:
                continue
            if b.a in (bp.a, bp.b) or b.b in (bp.a, bp.b):
                continue  # incident pairs belong to Rule 2
            if abs(b.length - bp.length) > TOL_LEN:
                continue
            if not ctx.same_component(b, bp):
                continue
            if ctx.collocated(b, bp) is None:
                continue
            w1 = ctx.fold_witnesses(bp, bp.a, {b.name})
            w2 = ctx.fold_witnesses(bp, bp.b, {b.name})
            if not w1 or not w2:
                continue
            # The two folds must grip the bar from opposite sides.
            pick = None
            for wa in w1:
                for wb in w2:
                    sa = ctx.witness_side(wa, bp.a, bp)
                    sb = ctx.witness_side(wb, bp.b, bp)
                    if sa * sb < 0:
                        pick = (wa, wb)
                        break
                if pick:
                    break
            if pick is None:
                continue
            g = ctx.group_of.get((b.name, bp.name))
            if g is None:
                continue
            witness_names = {w.name for w in w1} | {w.name for w in w2}
            blocked = False
            for member in g.between(b.name, bp.name):
                if not _allowed_between(ctx, member, b, bp, witness_names, eq):
                    blocked = True
                    break
            if blocked:
                continue
            apps.append(RuleApplication(
                RULE1, b.name, bp.name,
                tuple(sorted({pick[0].name, pick[1].name})),
            ))
    return apps


def _rule2_pass(ctx: _Context, eq: _UnionFind) -> list[RuleApplication]:
    apps = []
    edges = [e for e in ctx.linkage.edges if e.length > TOL_LEN]
    for b in edges:
        for bp in edges:
            if b.name == bp.name:
                continue
            shared = {b.a, b.b} & {bp.a, bp.b}
            if len(shared) != 1:
                continue
            if abs(b.length - bp.length) > TOL_LEN:
                continue
            if not ctx.same_component(b, bp):
                continue
            if ctx.collocated(b, bp) is None:
                continue
            v = next(iter(shared))
            w = b.other(v)
            u = bp.other(v)
            v_pos = ctx.base.coords[v]
            w_pos = ctx.base.coords[w]
            u_pos = ctx.base.coords[u]
            for bpp in sorted(ctx.edges_at[w], key=lambda e: e.name):
                if bpp.name in (b.name, bp.name) or bpp.length <= TOL_LEN:
                    continue
                z = bpp.other(w)
                z_pos = ctx.base.coords[z]
                bpp_w = ctx.base.coords[w]
                through = (
                    geom.point_segment_distance(v_pos, bpp_w, z_pos) <= TOL_GEOM
                    and math.hypot(v_pos[0] - bpp_w[0], v_pos[1] - bpp_w[1]) > TOL_GEOM
                    and math.hypot(v_pos[0] - z_pos[0], v_pos[1] - z_pos[1]) > TOL_GEOM
                )
                if through:
                    apex = v_pos
                    b_prime_seg = (v_pos, u_pos)
                    b_double_seg = (v_pos, z_pos)
                    b_seg = (v_pos, w_pos)
                else:
                    apex = w_pos
                    b_prime_seg = (u_pos, v_pos)
                    b_double_seg = (w_pos, z_pos)
                    b_seg = (w_pos, v_pos)
                try:
                    r1a = geom._direction_angle(b_prime_seg, apex)
                    r2a = geom._direction_angle(b_double_seg, apex)
                except geom.UndefinedAngleError:
                    continue
                dang = abs((r2a - r1a + math.pi) % (2 * math.pi) - math.pi)
                if dang <= TOL_ANG:
                    # Degenerate parallel sector: the annotation decides.
                    g = ctx.group_of.get((b.name, bp.name))
                    if g is None or bpp.name not in g.order:
                        continue
                    ib = g.order.index(b.name)
                    ip = g.order.index(bp.name)
                    ipp = g.order.index(bpp.name)
                    if min(ip, ipp) < ib < max(ip, ipp):
                        apps.append(RuleApplication(
                            RULE2, b.name, bp.name, (bpp.name,)))
                    continue
                r1_dir = (math.cos(r1a), math.sin(r1a))
                try:
                    side = ctx.strand_side_sign(b, bp, r1_dir)
                except ValueError:
                    continue
                if geom.convex_angle_surrounds(b_seg, b_prime_seg,
                                               b_double_seg, side):
                    apps.append(RuleApplication(
                        RULE2, b.name, bp.name, (bpp.name,)))
    return apps


def _detect_fixed_point(tc: TouchingConfig):
    ctx = _Context(tc)
    eq = _UnionFind([e.name for e in ctx.linkage.edges])
    seen = set()
    steps: list[RuleApplication] = []
    for _ in range(len(ctx.linkage.edges) + 2):
        addition = False
        apps = _rule1_pass(ctx, eq) + _rule2_pass(ctx, eq)
        apps.sort(key=lambda a: a.key())
        for a in apps:
            if a.key() in seen:
                continue
            seen.add(a.key())
            steps.append(a)
            eq.union(a.bar, a.collocated_with)
            addition = True
        if not addition:
            break
    return ctx, steps


def detect_rule1(tc: TouchingConfig) -> list[RuleApplication]:
    """All Rule-1 firings reachable by the cascading detection."""
    _, steps = _detect_fixed_point(tc)
    return [s for s in steps if s.rule == RULE1]


def detect_rule2(tc: TouchingConfig) -> list[RuleApplication]:
    _, steps = _detect_fixed_point(tc)
    return [s for s in steps if s.rule == RULE2]


def _application_pins(ctx: _Context, app: RuleApplication):
    b = ctx.linkage.edge(app.bar)
    bp = ctx.linkage.edge(app.collocated_with)
    match = ctx.collocated(b, bp)
    pins = []
    for u, v in match.items():
        if u != v:
            pins.append(tuple(sorted((u, v))))
    return pins


def infinitesimal_dof(config: Configuration,
                      pins: list[tuple[str, str]] | tuple = ()) -> int:
    """Dimension of the first-order motion space.

    One length constraint per positive-length edge; zero-length edges and
    explicit pins contribute coordinate-equality rows instead. Rank comes
    from an SVD with relative cutoff TOL_RANK.
    """
    verts = list(config.linkage.vertices)
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    rows = []
    for e in config.linkage.edges:
        pa = config.coords[e.a]
        pb = config.coords[e.b]
        dx, dy = pa[0] - pb[0], pa[1] - pb[1]
        ia, ib = index[e.a], index[e.b]
        if e.length <= TOL_LEN or math.hypot(dx, dy) <= TOL_LEN:
            for k in range(2):
                row = np.zeros(2 * n)
                row[2 * ia + k] = 1.0
                row[2 * ib + k] = -1.0
                rows.append(row)
            continue
        row = np.zeros(2 * n)
        row[2 * ia] = dx
        row[2 * ia + 1] = dy
        row[2 * ib] = -dx
        row[2 * ib + 1] = -dy
        rows.append(row)
    for u, v in pins:
        iu, iv = index[u], index[v]
        for k in range(2):
            row = np.zeros(2 * n)
            row[2 * iu + k] = 1.0
            row[2 * iv + k] = -1.0
            rows.append(row)
    if not rows:
        return 2 * n
    J = np.array(rows)
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > TOL_RANK * s[0])) if s.size else 0
    return 2 * n - rank


def _quotient_dof(ctx: _Context, vertex_uf: _UnionFind, eps: float) -> int:
    """Rank test on the pin-quotient realized at cluster-mean offsets.

    Built directly as a Jacobian (the quotient of a cut tree may be
    disconnected, which the Linkage constructor rejects by design).
    """
    clusters = vertex_uf.clusters()
    rep_name = {root: members[0] for root, members in clusters.items()}
    positions = {}
    for root, members in clusters.items():
        bx = float(np.mean([ctx.base.coords[m][0] for m in members]))
        by = float(np.mean([ctx.base.coords[m][1] for m in members]))
        ox = float(np.mean([ctx.tc.offsets[m][0] for m in members]))
        oy = float(np.mean([ctx.tc.offsets[m][1] for m in members]))
        positions[rep_name[root]] = (bx + eps * ox, by + eps * oy)
    qedges = {}
    for e in ctx.linkage.edges:
        ra = rep_name[vertex_uf.find(e.a)]
        rb = rep_name[vertex_uf.find(e.b)]
        if ra == rb:
            continue
        qedges.setdefault(frozenset((ra, rb)), (ra, rb))
    names = sorted(positions)
    index = {v: i for i, v in enumerate(names)}
    n = len(names)
    rows = []
    for key in sorted(qedges, key=sorted):
        a, b = qedges[key]
        pa, pb = positions[a], positions[b]
        dx, dy = pa[0] - pb[0], pa[1] - pb[1]
        ia, ib = index[a], index[b]
        if math.hypot(dx, dy) <= TOL_LEN:
            for k in range(2):
                row = np.zeros(2 * n)
                row[2 * ia + k] = 1.0
                row[2 * ib + k] = -1.0
                rows.append(row)
            continue
        row = np.zeros(2 * n)
        row[2 * ia] = dx
        row[2 * ia + 1] = dy
        row[2 * ib] = -dx
        row[2 * ib + 1] = -dy
        rows.append(row)
    if not rows:
        return 2 * n
    J = np.array(rows)
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > TOL_RANK * s[0])) if s.size else 0
    return 2 * n - rank


def reduce(tc: TouchingConfig) -> ReductionTrace:
    """Fire rules to a fixed point, pin collocated bars, and rank-test the
    merged system.

    The verdict is "rigid" exactly when the merged system, realized at a
    pulled-apart representative (cluster positions nudged by the mean member
    offsets at eps0/2), has three degrees of freedom. The count at the fully
    collapsed coordinates is also recorded: collapsed collinear geometry
    always shows extra first-order flexes, so the representative realization
    is the operative test and any disagreement is reported in the proof log
    rather than silently dropped.
    """
    ctx, steps = _detect_fixed_point(tc)
    vuf = _UnionFind(ctx.linkage.vertices)
    pin_pairs = []
    for app in steps:
        for u, v in _application_pins(ctx, app):
            if vuf.union(u, v):
                pin_pairs.append((u, v))
    dof = _quotient_dof(ctx, vuf, tc.epsilon0 / 2.0)
    dof_collapsed = _quotient_dof(ctx, vuf, 0.0)
    verdict = "rigid" if dof == 3 else "inconclusive"
    return ReductionTrace(tuple(steps), tuple(sorted(pin_pairs)), verdict,
                          dof, dof_collapsed)
