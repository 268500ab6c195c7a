"""Command-line surface: generate fixtures, run the rigidity reduction, the
flattening solver and the lockedness probe, and render SVG figures.

Exit codes: 0 success, 2 validation error, 3 failed expected-outcome
assertion (probe), 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import fixtures, model, probe, render, rigidity, touching
from .fixtures import FixtureParams
from .flatten import flatten
from .model import FormatError, ValidationError

EX_OK = 0
EX_VALIDATION = 2
EX_EXPECTATION = 3
EX_USAGE = 64


def _default_seed() -> int:
    env = os.environ.get("LINKLOCK_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"LINKLOCK_SEED must be an integer, got {env!r}")


def _params(args) -> FixtureParams:
    return FixtureParams(scale=args.scale, h=args.h, g=args.g,
                         delta=args.delta, seed=args.seed)


def _generate(name: str, params: FixtureParams):
    if name == "fig2":
        return fixtures.fig2_tree(params)
    if name == "fig2b":
        return fixtures.fig2b_tree(params)
    if name == "fig2-aug":
        return fixtures.fig2_zero_augmented(params)
    if name == "fig3":
        return fixtures.fig3_orthogonal_tree(params)
    if name == "comb":
        return fixtures.comb_tree()
    if name.startswith("chain-"):
        n = int(name.split("-", 1)[1])
        return fixtures._random_chain(n, params.seed + n)
    if name in ("fig2-cut-a", "fig2-cut-b"):
        for label, cfg in fixtures.fig2_cut(params):
            if label == name:
                return cfg
    raise KeyError(name)

FIXTURE_NAMES = ("fig2", "fig2b", "fig2-aug", "fig3", "comb",
                 "chain-4", "chain-8", "chain-16", "fig2-cut-a", "fig2-cut-b")


def _save(obj, path: Path) -> None:
    if isinstance(obj, touching.TouchingConfig):
        text = touching.touching_to_json(obj)
    elif isinstance(obj, model.Configuration):
        text = model.configuration_to_json(obj)
    elif isinstance(obj, model.Motion):
        text = model.motion_to_json(obj)
    else:
        raise TypeError(type(obj))
    path.write_text(text)


def _load_any(path: Path):
    text = path.read_text()
    for loader in (touching.touching_from_json, model.motion_from_json,
                   model.configuration_from_json, model.linkage_from_json):
        try:
            return loader(text)
        except FormatError:
            continue
    raise FormatError(f"{path}: not a recognized linklock JSON file")


def _cmd_gen(args) -> int:
    try:
        obj = _generate(args.fixture, _params(args))
    except KeyError:
        print(f"unknown fixture {args.fixture!r}; choices: "
              f"{', '.join(FIXTURE_NAMES)}", file=sys.stderr)
        return EX_USAGE
    _save(obj, Path(args.output))
    print(f"wrote {args.output}")
    return EX_OK


def _cmd_rigidity(args) -> int:
    obj = _load_any(Path(args.file))
    if not isinstance(obj, touching.TouchingConfig):
        raise ValidationError("rigidity analysis expects a touching-configuration file")
    trace = rigidity.reduce(obj)
    print(trace.proof_log())
    if args.output:
        Path(args.output).write_text(trace.to_json())
        print(f"wrote {args.output}")
    return EX_OK


def _cmd_flatten(args) -> int:
    obj = _load_any(Path(args.file))
    if isinstance(obj, touching.TouchingConfig):
        raise ValidationError(
            "flatten expects a nontouching configuration; perturb it first")
    if not isinstance(obj, model.Configuration):
        raise ValidationError("flatten expects a configuration file")
    root = args.root or min(obj.linkage.vertices)
    res = flatten(obj, root, budget=args.budget, seed=args.seed)
    print(f"status={res.status} finalFlatness={res.final_flatness:.6g} "
          f"maxDisplacement={res.max_displacement:.6g}")
    if args.output:
        Path(args.output).write_text(model.motion_to_json(res.motion))
        print(f"wrote {args.output}")
    return EX_OK


def _cmd_probe(args) -> int:
    try:
        tc = _generate(args.fixture, _params(args))
    except KeyError:
        print(f"unknown fixture {args.fixture!r}", file=sys.stderr)
        return EX_USAGE
    if not isinstance(tc, touching.TouchingConfig):
        raise ValidationError("probe expects a self-touching fixture")
    deltas = [float(x) for x in args.deltas.split(",")]
    report = probe.run_probe(tc, deltas, args.trials, args.budget, args.seed,
                             fixture_name=args.fixture)
    print(report.to_text())
    if args.output:
        out = Path(args.output)
        if out.suffix == ".csv":
            out.write_text(report.to_csv())
        else:
            out.write_text(report.to_json())
        print(f"wrote {args.output}")
    if report.expectation_failures:
        return EX_EXPECTATION
    return EX_OK


def _cmd_render(args) -> int:
    obj = _load_any(Path(args.file))
    style = render.RenderStyle(pull_apart_epsilon=args.epsilon,
                               labels=not args.no_labels)
    out = Path(args.output)
    if isinstance(obj, model.Motion) or args.motion:
        if not isinstance(obj, model.Motion):
            raise ValidationError("--motion needs a motion file")
        frames, animated = render.render_motion(obj, style)
        stem = out.with_suffix("")
        for i, frame in enumerate(frames):
            Path(f"{stem}_{i:03d}.svg").write_bytes(frame)
        anim = Path(f"{stem}_anim.svg")
        anim.write_bytes(animated)
        print(f"wrote {len(frames)} frames and {anim}")
        return EX_OK
    if isinstance(obj, model.Linkage):
        raise ValidationError("render needs coordinates; got a bare linkage")
    out.write_bytes(render.render_svg(obj, style))
    print(f"wrote {out}")
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linklock",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_params(sp):
        sp.add_argument("--scale", type=float, default=1.0)
        sp.add_argument("--h", type=float, default=0.01)
        sp.add_argument("--g", type=float, default=0.01)
        sp.add_argument("--delta", type=float, default=0.01)
        sp.add_argument("--seed", type=int, default=None)

    g = sub.add_parser("gen", help="generate a fixture")
    g.add_argument("fixture")
    add_params(g)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("rigidity", help="run the rule reduction and rank test")
    r.add_argument("file")
    r.add_argument("-o", "--output")
    r.set_defaults(func=_cmd_rigidity)

    f = sub.add_parser("flatten", help="search for a flattening motion")
    f.add_argument("file")
    f.add_argument("--root", default=None)
    f.add_argument("--budget", type=int, default=100_000)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("-o", "--output")
    f.set_defaults(func=_cmd_flatten)

    pr = sub.add_parser("probe", help="delta-sweep lockedness experiment")
    pr.add_argument("fixture")
    pr.add_argument("--deltas", default="0.1,0.05,0.01")
    pr.add_argument("--trials", type=int, default=10)
    pr.add_argument("--budget", type=int, default=100_000)
    add_params(pr)
    pr.add_argument("-o", "--output")
    pr.set_defaults(func=_cmd_probe)

    rd = sub.add_parser("render", help="render SVG figures")
    rd.add_argument("file")
    rd.add_argument("--motion", action="store_true")
    rd.add_argument("--epsilon", type=float, default=0.05)
    rd.add_argument("--no-labels", action="store_true")
    rd.add_argument("-o", "--output", required=True)
    rd.set_defaults(func=_cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EX_USAGE if exc.code not in (0, None) else EX_OK
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _default_seed()
        return args.func(args)
    except (ValidationError, FormatError, touching.PerturbationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
