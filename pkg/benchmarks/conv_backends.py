#!/usr/bin/env python3
"""Time the compiled and numpy convolution backends against the jitted reference."""

import argparse
import os
import time

import numpy as np

from bokehsim.imagecore import PlanarImage, conv_backend, convolve
from bokehsim.kernels import soft_disk
from bokehsim.render import render_pipeline
from bokehsim.synth import TwoPlaneRecipe, make_scene

REFERENCE_MAX_RADIUS = 7


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def timed_backend(backend, fn, repeats):
    os.environ["BOKEHSIM_CONV_BACKEND"] = backend
    try:
        return best_of(fn, repeats)
    except RuntimeError:
        return None
    finally:
        os.environ.pop("BOKEHSIM_CONV_BACKEND", None)


def bench_convolve(size, radii, repeats):
    rng = np.random.default_rng(0)
    img = PlanarImage(rng.uniform(0.0, 1.0, (size, size, 3)))
    probe = PlanarImage(rng.uniform(0.0, 1.0, (64, 64, 3)))
    print("convolve on %dx%dx3 (best of %d)" % (size, size, repeats))
    print("%8s %8s %12s %12s %12s %10s" % ("radius", "taps", "compiled", "numpy", "reference", "max|diff|"))
    for radius in radii:
        kernel = soft_disk(radius)
        compiled = timed_backend("compiled", lambda: convolve(img, kernel), repeats)
        numpy_time = timed_backend("numpy", lambda: convolve(img, kernel), repeats)
        reference = None
        if radius <= REFERENCE_MAX_RADIUS:
            reference = best_of(lambda: convolve(img, kernel, mode="reference"), repeats)
        ref_probe = convolve(probe, kernel, mode="reference")
        worst = 0.0
        for backend in ("compiled", "numpy"):
            os.environ["BOKEHSIM_CONV_BACKEND"] = backend
            try:
                got = convolve(probe, kernel)
            except RuntimeError:
                continue
            finally:
                os.environ.pop("BOKEHSIM_CONV_BACKEND", None)
            worst = max(worst, float(np.abs(got.data - ref_probe.data).max()))
        print(
            "%8.1f %8d %12s %12s %12s %10.2e"
            % (
                radius,
                kernel.size,
                "-" if compiled is None else "%.1f ms" % (compiled * 1e3),
                "-" if numpy_time is None else "%.1f ms" % (numpy_time * 1e3),
                "-" if reference is None else "%.1f ms" % (reference * 1e3),
                worst,
            )
        )


def bench_pipeline(repeats):
    scene = make_scene(TwoPlaneRecipe(), 256, 256, seed=0)
    run = lambda: render_pipeline(scene.image, scene.disparity, focal=0.1)
    print("\nrender_pipeline on 256x256 (best of %d)" % repeats)
    for backend in ("compiled", "numpy"):
        took = timed_backend(backend, run, repeats)
        print("%10s %s" % (backend, "unavailable" if took is None else "%.2f s" % took))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=512, help="square image edge")
    parser.add_argument("--radii", default="1,3,7,16,34", help="comma-separated kernel radii")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--skip-pipeline", action="store_true")
    args = parser.parse_args()
    radii = [float(token) for token in args.radii.split(",")]
    print("selected optimized backend: %s" % conv_backend())
    bench_convolve(args.size, radii, args.repeats)
    if not args.skip_pipeline:
        bench_pipeline(args.repeats)


if __name__ == "__main__":
    main()
