"""Command-line interface: rendering, fusion, kernel galleries, synthesis, benchmarks."""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from bokehsim.defocus import defocus_magnitude, signed_defocus
from bokehsim.fusion import FusionConfig, fuse_defocus
from bokehsim.imagecore import ImageIOError, PlanarImage, load_image, save_image
from bokehsim.kernels import build_bank, growing_schedule, uniform_schedule
from bokehsim.metrics import psnr, ssim
from bokehsim.radiance import RadianceParams
from bokehsim.render import PipelineConfig, RenderConfig, RenderSession, refocus
from bokehsim.synth import (
    FlatRecipe,
    HighlightsRecipe,
    RampRecipe,
    TwoPlaneRecipe,
    ground_truth_composite,
    make_scene,
)

BENCH_METHODS = ("binary", "feathered", "laplacian_pyramid", "poisson_optimized")


@dataclass(frozen=True)
class CliConfig:
    """Pipeline settings; the defaults reproduce the reference configuration."""

    layers: int = 15
    gamma: float = 100.0
    eps_div: float = 1e-6
    conv_mode: str = "optimized"
    schedule: str = "growing"
    step: int = 4
    shape: str = "soft"
    sigma: float = 0.25
    phi: float = 0.5
    alpha: float = 3.0
    beta: float = 5.0
    threshold: float = 0.99
    base_map: str = "identity"
    theta: float = 0.25
    zeta: float = 10.0
    feather_radius: int = 5
    method: str = "poisson_optimized"
    steps: int = 200
    lr: float = 0.05
    levels: int = 4
    scales: int = 4
    normalize: str = "fixed_range"

    def updated(self, values):
        """Return a copy with validated key/value overrides applied."""
        known = {spec.name: spec.type for spec in fields(self)}
        coerced = {}
        for key, value in values.items():
            if key not in known:
                raise ValueError("unknown config key %r" % (key,))
            kind = known[key]
            if kind is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ValueError("config key %r expects an integer" % (key,))
                coerced[key] = value
            elif kind is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValueError("config key %r expects a number" % (key,))
                coerced[key] = float(value)
            else:
                if not isinstance(value, str):
                    raise ValueError("config key %r expects a string" % (key,))
                coerced[key] = value
        return replace(self, **coerced)


def load_config(path):
    """Read a CliConfig from a TOML file of flat key/value pairs."""
    with open(path, "rb") as handle:
        values = tomllib.load(handle)
    return CliConfig().updated(values)


def resolve_config(args):
    """Compose defaults, optional config file, and explicit flag overrides."""
    cfg = CliConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    overrides = {}
    for name in ("method", "steps", "lr", "theta", "schedule", "shape", "sigma", "phi"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.updated(overrides) if overrides else cfg


def build_schedule(cfg):
    """Construct the kernel schedule selected by a CliConfig."""
    if cfg.schedule == "growing":
        schedule = growing_schedule()
    elif cfg.schedule == "uniform":
        schedule = uniform_schedule(cfg.layers, cfg.step)
    else:
        raise ValueError("unknown schedule %r" % (cfg.schedule,))
    if cfg.layers != len(schedule):
        raise ValueError(
            "layers=%d does not match schedule length %d" % (cfg.layers, len(schedule))
        )
    return schedule


def pipeline_config(cfg):
    """Expand a CliConfig into the pipeline configuration objects."""
    bank = build_bank(build_schedule(cfg), cfg.shape, cfg.sigma, cfg.phi)
    return PipelineConfig(
        render=RenderConfig(
            layers=cfg.layers,
            gamma=cfg.gamma,
            eps_div=cfg.eps_div,
            bank=bank,
            conv_mode=cfg.conv_mode,
        ),
        radiance=RadianceParams(
            alpha=cfg.alpha,
            beta=cfg.beta,
            threshold=cfg.threshold,
            base_map=cfg.base_map,
        ),
        fusion=FusionConfig(
            theta=cfg.theta,
            zeta=cfg.zeta,
            feather_radius=cfg.feather_radius,
            method=cfg.method,
            steps=cfg.steps,
            lr=cfg.lr,
            levels=cfg.levels,
        ),
        normalize=cfg.normalize,
    )


def _sniff_kind(path):
    with open(path, "rb") as handle:
        magic = handle.read(2)
    return "pfm" if magic in (b"Pf", b"PF") else "png"


def _load_color(path):
    img = load_image(path, "pfm" if _sniff_kind(path) == "pfm" else "rgb8")
    if img.channels != 3:
        raise ImageIOError("%s: expected a 3-channel image" % path)
    return img


def _load_gray(path):
    img = load_image(path, "pfm" if _sniff_kind(path) == "pfm" else "gray16")
    if img.channels != 1:
        raise ImageIOError("%s: expected a single-channel map" % path)
    return img


def _as_gray_image(data):
    return PlanarImage(np.clip(data, 0.0, 1.0)[:, :, None])


def _require(parser, args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        parser.print_usage(sys.stderr)
        print(
            "bokehsim: missing required flags: %s"
            % ", ".join("--" + name for name in missing),
            file=sys.stderr,
        )
        return False
    return True


def cmd_render(args, parser):
    """Render a bokeh image from an image/disparity pair at a focal distance."""
    if not _require(parser, args, "input", "disparity", "focal", "out"):
        return 1
    cfg = resolve_config(args)
    pipeline = pipeline_config(cfg)
    image = _load_color(args.input)
    disparity = _load_gray(args.disparity)
    session = RenderSession.open(image, disparity)
    result = refocus(session, args.focal, blur_scale=args.blur_scale, cfg=pipeline)
    save_image(args.out, result.bokeh, "rgb8")
    if args.dump_intermediates:
        dump = args.dump_intermediates
        os.makedirs(dump, exist_ok=True)
        save_image(os.path.join(dump, "defocus.png"), _as_gray_image(result.defocus_lr.data), "gray16")
        save_image(os.path.join(dump, "radiance.pfm"), result.radiance, "pfm")
        save_image(os.path.join(dump, "mask.png"), _as_gray_image(result.mask.data), "gray16")
        save_image(os.path.join(dump, "bokeh_lr.png"), result.bokeh_lr, "rgb8")
    return 0


def cmd_fuse(args, parser):
    """Fuse a sharp image with an upsampled bokeh render under a chosen mask method."""
    if not _require(parser, args, "input", "bokeh", "disparity", "focal", "out"):
        return 1
    cfg = resolve_config(args)
    pipeline = pipeline_config(cfg)
    image = _load_color(args.input)
    bokeh = _load_color(args.bokeh)
    disparity = _load_gray(args.disparity)
    defocus = defocus_magnitude(signed_defocus(disparity, args.focal), cfg.normalize)
    fused, mask = fuse_defocus(image, bokeh, defocus, pipeline.fusion)
    save_image(args.out, fused, "rgb8")
    if args.mask_out:
        save_image(args.mask_out, _as_gray_image(mask.data), "gray16")
    if args.trace_out:
        with open(args.trace_out, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(("step", "loss"))
            for step, loss in enumerate(mask.loss_trace):
                writer.writerow((step, "%.12e" % loss))
    return 0


def cmd_kernels(args, parser):
    """Write per-layer kernel heightmaps and the size table for a schedule."""
    if not _require(parser, args, "out"):
        return 1
    cfg = resolve_config(args)
    bank = build_bank(build_schedule(cfg), cfg.shape, cfg.sigma, cfg.phi)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sizes.csv"), "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("layer", "size"))
        for layer, size in enumerate(bank.sizes, start=1):
            writer.writerow((layer, size))
    for layer, kernel in enumerate(bank.kernels, start=1):
        height = kernel.taps / kernel.taps.max()
        path = os.path.join(args.out, "kernel_%02d.png" % layer)
        save_image(path, _as_gray_image(height), "gray16")
    return 0


def _recipe_for(name, index):
    if name == "two_plane":
        return TwoPlaneRecipe(shape="disk" if index % 2 == 0 else "square")
    if name == "flat":
        return FlatRecipe(disparity=0.5)
    if name == "ramp":
        return RampRecipe()
    if name == "highlights":
        return HighlightsRecipe()
    raise ValueError("unknown recipe %r" % (name,))


def cmd_synth(args, parser):
    """Generate synthetic image/disparity scenes, with ground truth where exact."""
    if not _require(parser, args, "out"):
        return 1
    if args.scenes < 1:
        raise ValueError("scene count must be positive")
    os.makedirs(args.out, exist_ok=True)
    entries = []
    for index in range(args.scenes):
        recipe = _recipe_for(args.recipe, index)
        scene = make_scene(recipe, args.width, args.height, seed=args.seed + index)
        name = "scene_%03d" % index
        scene_dir = os.path.join(args.out, name)
        os.makedirs(scene_dir, exist_ok=True)
        entry = {
            "name": name,
            "image": "%s/image.pfm" % name,
            "disparity": "%s/disparity.pfm" % name,
            "image_png": "%s/image.png" % name,
            "disparity_png": "%s/disparity.png" % name,
        }
        save_image(os.path.join(scene_dir, "image.pfm"), scene.image, "pfm")
        save_image(os.path.join(scene_dir, "disparity.pfm"), scene.disparity, "pfm")
        save_image(os.path.join(scene_dir, "image.png"), scene.image, "rgb8")
        save_image(os.path.join(scene_dir, "disparity.png"), scene.disparity, "gray16")
        if args.recipe == "two_plane":
            truth = ground_truth_composite(scene, args.focal)
            save_image(os.path.join(scene_dir, "ground_truth.pfm"), truth, "pfm")
            entry["ground_truth"] = "%s/ground_truth.pfm" % name
        entries.append(entry)
    manifest = {
        "recipe": args.recipe,
        "seed": args.seed,
        "width": args.width,
        "height": args.height,
        "focal": args.focal,
        "scenes": entries,
    }
    with open(os.path.join(args.out, "manifest.json"), "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return 0


def cmd_bench(args, parser):
    """Render every fusion method over a synthetic suite and rank mean quality."""
    if not _require(parser, args, "scenes", "out"):
        return 1
    manifest_path = os.path.join(args.scenes, "manifest.json")
    if not os.path.exists(manifest_path):
        print("bokehsim: no scenes found in %s" % args.scenes, file=sys.stderr)
        return 1
    with open(manifest_path) as handle:
        manifest = json.load(handle)
    entries = manifest.get("scenes", [])
    if not entries:
        print("bokehsim: no scenes found in %s" % args.scenes, file=sys.stderr)
        return 1
    cfg = resolve_config(args)
    pipeline = pipeline_config(cfg)
    focal = float(manifest["focal"])
    rows = []
    sums = {method: [0.0, 0.0] for method in BENCH_METHODS}
    for entry in entries:
        if "ground_truth" not in entry:
            raise ValueError("scene %s has no ground truth" % entry.get("name", "?"))
        image = _load_color(os.path.join(args.scenes, entry["image"]))
        disparity = _load_gray(os.path.join(args.scenes, entry["disparity"]))
        truth = _load_color(os.path.join(args.scenes, entry["ground_truth"]))
        session = RenderSession.open(image, disparity)
        for method in BENCH_METHODS:
            run = replace(pipeline, fusion=replace(pipeline.fusion, method=method))
            result = refocus(session, focal, cfg=run)
            quality = (psnr(result.bokeh, truth), ssim(result.bokeh, truth))
            sums[method][0] += quality[0]
            sums[method][1] += quality[1]
            rows.append((entry["name"], method) + quality)
    count = len(entries)
    means = {m: (sums[m][0] / count, sums[m][1] / count) for m in BENCH_METHODS}
    ordered = sorted(means, key=lambda m: means[m][0], reverse=True)
    ranks = {m: 1 + sum(means[o][0] > means[m][0] for o in BENCH_METHODS) for m in ordered}
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("scene", "method", "psnr", "ssim", "rank"))
        for name, method, value_psnr, value_ssim in rows:
            writer.writerow((name, method, "%.6f" % value_psnr, "%.6f" % value_ssim, ""))
        for method in BENCH_METHODS:
            writer.writerow(
                (
                    "mean",
                    method,
                    "%.6f" % means[method][0],
                    "%.6f" % means[method][1],
                    ranks[method],
                )
            )
    if args.json:
        summary = {
            "scenes": count,
            "methods": {
                method: {
                    "mean_psnr": means[method][0],
                    "mean_ssim": means[method][1],
                    "rank": ranks[method],
                }
                for method in BENCH_METHODS
            },
        }
        with open(args.json, "w") as handle:
            json.dump(summary, handle, indent=2, sort_keys=True)
            handle.write("\n")
    return 0


def cmd_serve(args, parser):
    """Run the HTTP preview service."""
    import uvicorn

    from bokehsim.service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def _add_config_flags(sub):
    sub.add_argument("--config", help="TOML config file; flags override its values")
    sub.add_argument("--method", help="fusion method")
    sub.add_argument("--steps", type=int, help="optimizer steps")
    sub.add_argument("--lr", type=float, help="optimizer learning rate")
    sub.add_argument("--theta", type=float, help="binary mask threshold")


def build_parser():
    parser = argparse.ArgumentParser(prog="bokehsim", description=__doc__)
    commands = parser.add_subparsers(dest="command")

    render = commands.add_parser("render", help="render a bokeh image")
    render.add_argument("--input", help="sharp input image (PNG or PFM)")
    render.add_argument("--disparity", help="disparity map (16-bit PNG or PFM)")
    render.add_argument("--focal", type=float, help="focal disparity in [0, 1]")
    render.add_argument("--blur-scale", type=float, default=1.0, help="kernel size multiplier")
    render.add_argument("--out", help="output PNG path")
    render.add_argument("--dump-intermediates", help="directory for pipeline intermediates")
    _add_config_flags(render)
    render.set_defaults(func=cmd_render)

    fusecmd = commands.add_parser("fuse", help="fuse sharp and bokeh images")
    fusecmd.add_argument("--input", help="sharp input image")
    fusecmd.add_argument("--bokeh", help="upsampled bokeh image")
    fusecmd.add_argument("--disparity", help="disparity map")
    fusecmd.add_argument("--focal", type=float, help="focal disparity in [0, 1]")
    fusecmd.add_argument("--out", help="output PNG path")
    fusecmd.add_argument("--mask-out", help="optional 16-bit mask PNG path")
    fusecmd.add_argument("--trace-out", help="optional loss trace CSV path")
    _add_config_flags(fusecmd)
    fusecmd.set_defaults(func=cmd_fuse)

    kernels = commands.add_parser("kernels", help="write kernel heightmaps and sizes")
    kernels.add_argument("--out", help="output directory")
    kernels.add_argument("--schedule", help="growing or uniform")
    kernels.add_argument("--shape", help="soft or hard")
    kernels.add_argument("--sigma", type=float, help="soft disk falloff slope")
    kernels.add_argument("--phi", type=float, help="soft disk falloff offset")
    kernels.add_argument("--config", help="TOML config file; flags override its values")
    kernels.set_defaults(func=cmd_kernels)

    synth = commands.add_parser("synth", help="generate synthetic scenes")
    synth.add_argument("--out", help="output directory")
    synth.add_argument("--recipe", default="two_plane", help="two_plane, flat, ramp, or highlights")
    synth.add_argument("--scenes", type=int, default=5, help="number of scenes")
    synth.add_argument("--seed", type=int, default=0, help="base random seed")
    synth.add_argument("--width", type=int, default=256)
    synth.add_argument("--height", type=int, default=256)
    synth.add_argument("--focal", type=float, default=0.1, help="focal used for ground truth")
    synth.set_defaults(func=cmd_synth)

    bench = commands.add_parser("bench", help="compare fusion methods on a suite")
    bench.add_argument("--scenes", help="directory produced by the synth command")
    bench.add_argument("--out", help="output CSV path")
    bench.add_argument("--json", help="optional JSON summary path")
    _add_config_flags(bench)
    bench.set_defaults(func=cmd_bench)

    serve = commands.add_parser("serve", help="run the HTTP preview service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--port", type=int, default=int(os.environ.get("BOKEHSIM_PORT", "8000"))
    )
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return func(args, parser)
    except (ValueError, ImageIOError, OSError, json.JSONDecodeError) as exc:
        print("bokehsim: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
