"""Command line entry point: ``ganfinder {gen-data,train,eval,infer,render}``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import codec
from .grid import BLOCKED, PATH, Grid
from .mapgen import DatasetManifest, Family, MapGenConfig, build_dataset, load_instance
from .metrics import count_gaps, evaluate_dataset, evaluate_instance, format_table, success
from .model import PRESETS
from .postproc import postprocess, transfer_obstacles
from .render import panels

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must be N or HxW, got {text!r}")
    if len(dims) == 1:
        return dims[0], dims[0]
    if len(dims) == 2:
        return dims[0], dims[1]
    raise argparse.ArgumentTypeError(f"size must be N or HxW, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ganfinder", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="generate a dataset of grids with A* ground truth")
    g.add_argument("--family", choices=["rect", "rect20", "rect30", "random"], default="rect")
    g.add_argument("--size", type=_size, default=(64, 64), help="N or HxW (default 64)")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--density", type=float, help="target density for rectangle families")
    g.add_argument("--density-range", type=float, nargs=2, metavar=("LO", "HI"),
                   help="per-map density range for the random-shapes family")
    g.add_argument("--splits", type=float, nargs=3, default=(0.75, 0.15, 0.10), metavar=("TRAIN", "TEST", "VAL"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a model on a generated dataset")
    t.add_argument("--data", help="dataset directory (may come from --config)")
    t.add_argument("--config", help="key = value file with TrainConfig fields; flags override it")
    t.add_argument("--out", help="output directory for checkpoints and logs")
    t.add_argument("--ablation", choices=PRESETS, dest="preset")
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--max-steps", type=int)
    t.add_argument("--base-features", type=int)
    t.add_argument("--resume")

    e = sub.add_parser("eval", help="score a checkpoint on a dataset split")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--checkpoint")
    src.add_argument("--oracle", action="store_true", help="score ground-truth rasters instead of a model")
    e.add_argument("--data", required=True)
    e.add_argument("--split", choices=["train", "test", "validation"], default="test")
    e.add_argument("--out", help="directory for report.json / report.csv")
    e.add_argument("--limit", type=int)

    i = sub.add_parser("infer", help="run a checkpoint on one input PNG")
    i.add_argument("--checkpoint", required=True)
    i.add_argument("--input", required=True)
    i.add_argument("--out", required=True, help="generated PNG; the post-processed one is written next to it")
    i.add_argument("--start", type=int, nargs=2, metavar=("ROW", "COL"))
    i.add_argument("--goal", type=int, nargs=2, metavar=("ROW", "COL"))

    r = sub.add_parser("render", help="upscaled input / ground truth / generated / post-processed panels")
    r.add_argument("--data", required=True)
    r.add_argument("--instance", required=True, help="instance id from the manifest")
    r.add_argument("--checkpoint")
    r.add_argument("--scale", type=int, default=8)
    r.add_argument("--out", required=True)
    return p


def cmd_gen_data(args) -> int:
    family = args.family
    if family in ("rect", "rect20", "rect30"):
        if args.density_range is not None:
            raise UsageError("--density-range only applies to --family random")
        if family == "rect":
            family = "rect30" if args.density is not None and abs(args.density - 0.3) < 1e-12 else "rect20"
        kw = {"target_density": args.density}
    else:
        if args.density is not None:
            raise UsageError("--density only applies to rectangle families; use --density-range")
        kw = {"density_range": tuple(args.density_range or (0.05, 0.5))}
    h, w = args.size
    try:
        cfg = MapGenConfig(Family(family), width=w, height=h, seed=args.seed, count=args.count,
                           split_fractions=tuple(args.splits), **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    m = build_dataset(cfg, args.out)
    counts = m.counts()
    dens = np.mean([r.density for r in m.instances])
    print(f"{len(m.instances)} instances ({cfg.family.value}, {h}x{w}) -> {args.out}")
    print(f"splits: train {counts['train']}, test {counts['test']}, validation {counts['validation']}; "
          f"mean density {dens:.3f}")
    return 0


def cmd_train(args) -> int:
    from .trainer import TrainConfig, train

    overrides = {
        "data": args.data, "out": args.out, "preset": args.preset, "epochs": args.epochs,
        "batch_size": args.batch_size, "seed": args.seed, "max_steps": args.max_steps,
        "base_features": args.base_features, "resume": args.resume,
    }
    try:
        if args.config:
            cfg = TrainConfig.from_file(args.config, **overrides)
        else:
            if not args.data or not args.out:
                raise UsageError("--data and --out are required without --config")
            cfg = TrainConfig(**{k: v for k, v in overrides.items() if v is not None})
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if not (Path(cfg.data) / "manifest.json").exists():
        raise FileNotFoundError(f"no manifest.json in {cfg.data}")
    result = train(cfg)
    last = result.rows[-1]
    print(f"trained {cfg.preset}: {len(result.rows)} steps, final g_sup {last['g_sup']:.4f}, d_loss {last['d_loss']:.4f}")
    print(f"checkpoint: {result.checkpoint}")
    return 0


def cmd_eval(args) -> int:
    report = evaluate_dataset(args.checkpoint, args.data, args.split, oracle=args.oracle, limit=args.limit)
    out = Path(args.out) if args.out else (Path(args.checkpoint).parent if args.checkpoint else Path(args.data))
    jp, _ = report.write(out)
    print(format_table([report]))
    print(f"report: {jp}")
    return 0


def _endpoints(raster: np.ndarray, args) -> tuple[tuple[int, int], tuple[int, int]]:
    if args.start and args.goal:
        return tuple(args.start), tuple(args.goal)
    cells = sorted((int(c), int(r)) for r, c in np.argwhere(raster == PATH))
    if len(cells) != 2:
        raise UsageError(f"input has {len(cells)} path pixels; expected exactly start and goal (or pass --start/--goal)")
    (c0, r0), (c1, r1) = cells
    return (r0, c0), (r1, c1)


def cmd_infer(args) -> int:
    from .trainer import infer

    try:
        raster = codec.decode_classes(codec.load_png(args.input), strict=True)
    except codec.PaletteError as exc:
        raise UsageError(f"{args.input}: {exc}") from exc
    start, goal = _endpoints(raster, args)
    grid = Grid(raster == BLOCKED, start, goal)
    generated = codec.logits_to_raster(infer(args.checkpoint, codec.grid_raster(grid)))
    post = postprocess(grid, generated)
    out = Path(args.out)
    codec.save_png(codec.render(generated), out)
    post_path = out.with_name(out.stem + "_post" + out.suffix)
    codec.save_png(codec.render(post), post_path)
    gaps = count_gaps(transfer_obstacles(grid, generated), start, goal)
    print(f"generated: {out}\npost-processed: {post_path}")
    print(f"gaps: {gaps}; success: {success(post, grid)}")
    return 0


def cmd_render(args) -> int:
    manifest = DatasetManifest.read(args.data)
    recs = {r.id: r for r in manifest.instances}
    if args.instance not in recs:
        raise UsageError(f"unknown instance {args.instance!r}")
    grid, gt = load_instance(args.data, recs[args.instance])
    images = [codec.encode_input(grid), codec.render(gt)]
    if args.checkpoint:
        from .trainer import infer

        generated = codec.logits_to_raster(infer(args.checkpoint, codec.grid_raster(grid)))
        ev, post = evaluate_instance(args.instance, grid, generated, gt)
        images += [codec.render(generated), codec.render(post)]
        print(f"mse {ev.mse:.4f} gaps {ev.gaps} success {ev.success}")
    codec.save_png(panels(images, args.scale), args.out)
    print(f"wrote {args.out}")
    return 0


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "eval": cmd_eval, "infer": cmd_infer, "render": cmd_render}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ganfinder {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        logging.getLogger("ganfinder").debug("failure", exc_info=True)
        print(f"ganfinder {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
