"""SVG output for configurations, pulled-apart drawings, and motions.

The y axis is flipped so the top of a figure is drawn at the top. Output is
deterministic for fixed inputs; a metadata block records the world-to-SVG
transform so coordinates can be recovered exactly by tests and tools.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import Configuration, Motion, ValidationError
from .touching import TouchingConfig


@dataclass(frozen=True)
class RenderStyle:
    stroke_width: float = 0.02
    vertex_radius: float = 0.035
    pull_apart_epsilon: float = 0.05
    canvas: tuple[float, float] = (640.0, 640.0)
    labels: bool = True

    def __post_init__(self):
        for name in ("stroke_width", "vertex_radius", "pull_apart_epsilon"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.canvas[0] <= 0 or self.canvas[1] <= 0:
            raise ValidationError("canvas dimensions must be positive")


def _fmt(x: float) -> str:
    return format(x, ".9g")


class _Transform:
    def __init__(self, points, canvas, margin=0.08):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        wx = max(xs) - min(xs) or 1.0
        wy = max(ys) - min(ys) or 1.0
        sx = canvas[0] * (1 - 2 * margin) / wx
        sy = canvas[1] * (1 - 2 * margin) / wy
        self.scale = min(sx, sy)
        self.x0 = min(xs) - (canvas[0] / self.scale - wx) / 2.0
        self.y1 = max(ys) + (canvas[1] / self.scale - wy) / 2.0

    def map(self, p):
        return ((p[0] - self.x0) * self.scale,
                (self.y1 - p[1]) * self.scale)

    def payload(self):
        return {"scale": self.scale, "x0": self.x0, "y1": self.y1}


def _svg_config(config: Configuration, style: RenderStyle, tf: _Transform,
                animate_to=None, duration=None) -> list[str]:
    parts = []
    sw = _fmt(style.stroke_width * tf.scale)
    for e in config.linkage.edges:
        (x1, y1) = tf.map(config.coords[e.a])
        (x2, y2) = tf.map(config.coords[e.b])
        parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="black" stroke-width="{sw}" '
            f'stroke-linecap="round"/>'
        )
    r = _fmt(style.vertex_radius * tf.scale)
    for v in config.linkage.vertices:
        (cx, cy) = tf.map(config.coords[v])
        parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{r}" '
                     f'fill="crimson"/>')
        if style.labels:
            parts.append(
                f'<text x="{_fmt(cx + 0.6 * style.vertex_radius * tf.scale)}" '
                f'y="{_fmt(cy - 0.6 * style.vertex_radius * tf.scale)}" '
                f'font-size="{_fmt(0.35 * tf.scale * 0.1)}">{v}</text>'
            )
    return parts


def _document(body: list[str], style: RenderStyle, meta: dict) -> bytes:
    w, h = style.canvas
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" '
        f'height="{_fmt(h)}" viewBox="0 0 {_fmt(w)} {_fmt(h)}">'
    )
    metadata = f"<metadata>{json.dumps(meta, sort_keys=True)}</metadata>"
    return "\n".join([head, metadata] + body + ["</svg>"]).encode()


def render_svg(obj, style: RenderStyle = RenderStyle()) -> bytes:
    """One SVG for a Configuration or a pulled-apart TouchingConfig."""
    if isinstance(obj, TouchingConfig):
        if style.pull_apart_epsilon > obj.epsilon0:
            raise ValidationError(
                f"pull-apart epsilon {style.pull_apart_epsilon} exceeds "
                f"epsilon0 {obj.epsilon0:.6g}"
            )
        config = obj.pulled_apart(style.pull_apart_epsilon)
    elif isinstance(obj, Configuration):
        config = obj
    else:
        raise TypeError("render_svg expects a Configuration or TouchingConfig")
    tf = _Transform(list(config.coords.values()), style.canvas)
    body = _svg_config(config, style, tf)
    return _document(body, style, {"transform": tf.payload()})


def render_motion(motion: Motion, style: RenderStyle = RenderStyle()
                  ) -> tuple[list[bytes], bytes]:
    """Numbered frame SVGs plus a single SMIL-animated SVG."""
    pts = [p for _, c in motion.samples for p in c.values()]
    tf = _Transform(pts, style.canvas)
    frames = []
    for _, coords in motion.samples:
        cfg = Configuration(motion.linkage, coords)
        frames.append(_document(_svg_config(cfg, style, tf), style,
                                {"transform": tf.payload()}))
    # Animated: one line per edge with x/y attribute timelines.
    body = []
    sw = _fmt(style.stroke_width * tf.scale)
    times = [t for t, _ in motion.samples]
    keytimes = ";".join(_fmt(t) for t in times)
    dur = "8s"
    for e in motion.linkage.edges:
        p0 = tf.map(motion.samples[0][1][e.a])
        q0 = tf.map(motion.samples[0][1][e.b])
        body.append(
            f'<line x1="{_fmt(p0[0])}" y1="{_fmt(p0[1])}" x2="{_fmt(q0[0])}" '
            f'y2="{_fmt(q0[1])}" stroke="black" stroke-width="{sw}" '
            f'stroke-linecap="round">'
        )
        for attr, which, idx in (("x1", e.a, 0), ("y1", e.a, 1),
                                 ("x2", e.b, 0), ("y2", e.b, 1)):
            vals = ";".join(_fmt(tf.map(c[which])[idx])
                            for _, c in motion.samples)
            body.append(
                f'<animate attributeName="{attr}" values="{vals}" '
                f'keyTimes="{keytimes}" dur="{dur}" repeatCount="indefinite"/>'
            )
        body.append("</line>")
    animated = _document(body, style, {"transform": tf.payload(),
                                       "samples": len(motion.samples)})
    return frames, animated


def parse_svg_lines(data: bytes) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Recover world-coordinate segments from a rendered SVG (used by the
    parse-back checks)."""
    text = data.decode()
    meta_start = text.index("<metadata>") + len("<metadata>")
    meta = json.loads(text[meta_start:text.index("</metadata>")])
    tr = meta["transform"]
    scale, x0, y1 = tr["scale"], tr["x0"], tr["y1"]

    def unmap(x, y):
        return (x / scale + x0, y1 - y / scale)

    out = []
    pos = 0
    while True:
        i = text.find("<line ", pos)
        if i < 0:
            break
        j = text.index(">", i)
        chunk = text[i:j]
        vals = {}
        for key in ("x1", "y1", "x2", "y2"):
            k = chunk.index(f'{key}="') + len(key) + 2
            vals[key] = float(chunk[k:chunk.index('"', k)])
        out.append((unmap(vals["x1"], vals["y1"]), unmap(vals["x2"], vals["y2"])))
        pos = j
    return out
