"""Command line driver: experiment harnesses and general-purpose subcommands.

Subcommands: decompose | phase | demod | register | bench-planewave |
bench-chirp | bench-demod.  Every artifact directory receives a config.json
sidecar with the fully resolved run configuration; benchmark CSVs are
byte-identical across reruns with the same seed regardless of thread count
(set SMVPHASE_THREADS to parallelize trials).

Exit codes: 0 success, 2 usage, 3 I/O failure, 4 numerical contract violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import demod as demod_mod
from . import fileio, multiscale, register, spectral, steerable, synthlab
from .errors import ShapeError, SmvphaseError

SCHEMA_VERSION = "smvphase-bench-v1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration plumbing


def _parse_sigma_grid(text: str) -> list[float]:
    """Accept 'start:step:stop' or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad sigma grid {text!r}; want start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("sigma grid step must be positive")
        grid = list(np.arange(start, stop + 0.5 * step, step))
    else:
        grid = [float(p) for p in text.split(",") if p.strip()]
    if not grid or any(s < 0 for s in grid):
        raise UsageError(f"bad sigma grid {text!r}")
    return [round(s, 10) for s in grid]


def _frame_from_args(args, n: int) -> steerable.FrameSpec:
    m_max = int(np.log2(n))
    if args.scales is not None and args.min_scale is not None:
        raise UsageError("--scales and --min-scale are mutually exclusive")
    if args.scales is not None:
        if args.scales < 1 or args.scales > m_max:
            raise UsageError(f"--scales must be in 1..{m_max}")
        m_min = m_max - args.scales + 1
    else:
        m_min = args.min_scale if args.min_scale is not None else 3
    if not 1 <= m_min <= m_max:
        raise UsageError(f"min scale {m_min} out of range 1..{m_max}")
    return steerable.FrameSpec(m_min=m_min, m_max=m_max, k_sub=args.subscales,
                               overcomplete=args.overcomplete)


def _thread_count() -> int:
    raw = os.environ.get("SMVPHASE_THREADS", "1")
    try:
        k = int(raw)
    except ValueError as exc:
        raise UsageError(f"SMVPHASE_THREADS={raw!r} is not an integer") from exc
    return max(1, k)


def _map_trials(fn, count: int) -> list:
    """Run fn(0..count-1); results in index order regardless of thread count."""
    workers = _thread_count()
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _trial_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(key))


def _write_config(out_dir: Path, args, command: str, extra: dict | None = None) -> None:
    cfg = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "threads_env": os.environ.get("SMVPHASE_THREADS", "1"),
    }
    for key, value in sorted(vars(args).items()):
        if key in ("func",):
            continue
        if isinstance(value, Path):
            value = str(value)
        cfg[key] = value
    if extra:
        cfg.update(extra)
    fileio.atomic_write_text(out_dir / "config.json", json.dumps(cfg, indent=2) + "\n")


def _load_pow2_image(path) -> np.ndarray:
    """Read an input PGM; malformed files are I/O errors, bad shapes usage errors."""
    try:
        img = fileio.read_pgm(path)
    except ValueError as exc:
        raise OSError(f"{path}: {exc}") from exc
    try:
        return spectral.ensure_pow2_image(img)
    except ShapeError as exc:
        raise UsageError(str(exc)) from exc


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _csv_text(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            cells.append(f"{cell:.8f}" if isinstance(cell, float) else str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _interior(n: int, frame: steerable.FrameSpec):
    margin = 2 * 2 ** (frame.m_max - frame.m_min)   # one coarsest-scale wavelength
    return synthlab.interior_slice(n, margin)


def _fold_ssim(phase_est, phase_true, sl) -> float:
    return synthlab.ssim(synthlab.fold_phase(phase_est)[sl],
                         synthlab.fold_phase(phase_true)[sl])


# ---------------------------------------------------------------------------
# subcommands


def cmd_decompose(args) -> int:
    img = _load_pow2_image(args.input)
    n = img.shape[0]
    frame = _frame_from_args(args, n)
    out = _out_dir(args)
    stack = steerable.decompose(img, frame)
    names = []
    for band in stack.bands:
        name = f"band_j{band.j}_s{band.s}"
        fileio.write_plane(out, name, band.image)
        names.append(name)
    fileio.write_plane(out, "approx", stack.approx)
    if stack.extras:
        for lp in stack.extras:
            name = f"lowpass_s{lp.s}"
            fileio.write_plane(out, name, lp.image)
            names.append(name)
    recon = steerable.reconstruct(stack)
    residual = float(np.linalg.norm(recon - img) / max(np.linalg.norm(img), 1e-300))
    manifest = {
        "bands": names,
        "approx": "approx",
        "n_bands": len(stack.bands),
        "reconstruction_residual": residual,
    }
    fileio.atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    _write_config(out, args, "decompose", {"side": n})
    print(f"bands: {len(stack.bands)}  reconstruction residual: {residual:.3e}")
    return EXIT_OK


def cmd_phase(args) -> int:
    img = _load_pow2_image(args.input)
    n = img.shape[0]
    frame = _frame_from_args(args, n)
    out = _out_dir(args)
    feats = multiscale.multiscale_features(img, frame, backend=args.backend,
                                           quality=args.quality)
    planes = {
        "amplitude": feats.amp,
        "phase": feats.phase,
        "orientation": feats.theta,
        "kmap": feats.k_map.astype(np.float64),
        "quality": feats.quality,
    }
    for name, plane in planes.items():
        fileio.write_plane(out, name, plane)
        fileio.write_visualization(out, name, plane)
    _write_config(out, args, "phase", {"side": n, "scale_labels": feats.labels})
    print(f"wrote {', '.join(planes)} to {out}")
    return EXIT_OK


def cmd_register(args) -> int:
    fixed = _load_pow2_image(args.fixed)
    moving = _load_pow2_image(args.moving)
    n = fixed.shape[0]
    frame = _frame_from_args(args, n)
    out = _out_dir(args)
    field, registered, report = register.register_pair(
        fixed, moving, frame=frame, quality=args.quality, backend=args.backend,
        mask_percentile=args.mask_percentile, freq_source=args.freq_source)
    fileio.write_plane(out, "displacement_x", field.dx)
    fileio.write_plane(out, "displacement_y", field.dy)
    fileio.write_plane(out, "mask", field.mask.astype(np.float64))
    fileio.write_plane(out, "registered", registered)
    fileio.write_visualization(out, "registered", registered)
    line = json.dumps(dataclasses.asdict(report))
    fileio.atomic_write_text(out / "report.jsonl", line + "\n")
    _write_config(out, args, "register", {"side": n})
    print(line)
    return EXIT_OK


def cmd_demod(args) -> int:
    out = _out_dir(args)
    if args.input is not None:
        pm = _load_pow2_image(args.input)
        if args.omega_c is not None:
            carrier = demod_mod.CarrierSpec(args.omega_c, np.deg2rad(args.theta_c_deg),
                                            args.phi_c)
        else:
            carrier = demod_mod.estimate_carrier(pm)
            print(f"estimated carrier (advisory): omega_c={carrier.omega_c:.3f} "
                  f"theta_c={np.rad2deg(carrier.theta_c):.2f}deg phi_c={carrier.phi_c:.3f}")
        frame = _frame_from_args(args, pm.shape[0])
        result = demod_mod.demodulate(pm, carrier, frame=frame, quality=args.quality,
                                      backend=args.backend)
        fileio.write_plane(out, "message_est", result.message_est)
        fileio.write_visualization(out, "message_est", result.message_est)
        _write_config(out, args, "demod", {"side": pm.shape[0]})
        print(f"wrote message_est to {out}")
        return EXIT_OK

    # synthetic demonstration at one noise level, both quality kinds
    n = args.size
    sigma = args.sigma
    message = synthlab.default_message(n, args.message_amp, args.message_freq)
    carrier = demod_mod.CarrierSpec(args.omega_c if args.omega_c is not None else 32.0,
                                    np.deg2rad(args.theta_c_deg), args.phi_c)
    gt = synthlab.pm_signal(n, carrier.omega_c, carrier.theta_c, carrier.phi_c,
                            message, sigma=sigma, seed=args.seed)
    frame = _frame_from_args(args, n)
    margin = 2 ** (frame.m_min + 1)
    sl = synthlab.interior_slice(n, margin)
    fileio.write_plane(out, "pm_signal", gt.image)
    fileio.write_visualization(out, "pm_signal", gt.image)
    fileio.write_plane(out, "message_true", message)
    fileio.write_visualization(out, "message_true", message)
    rows = []
    for kind in ("amplitude", "product"):
        result = demod_mod.demodulate(gt.image, carrier, frame=frame, quality=kind,
                                      backend=args.backend)
        name = f"message_est_{kind}"
        fileio.write_plane(out, name, result.message_est)
        fileio.write_visualization(out, name, result.message_est)
        corr = synthlab.correlation(result.message_est[sl], message[sl])
        rows.append([sigma, kind, float(corr)])
    csv = _csv_text(["sigma", "quality", "message_correlation"], rows)
    fileio.atomic_write_text(out / "demod.csv", csv)
    _write_config(out, args, "demod", {"side": n})
    print(csv, end="")
    return EXIT_OK


def cmd_bench_planewave(args) -> int:
    n = args.size
    out = _out_dir(args)
    frame = _frame_from_args(args, n)
    sl = _interior(n, frame)
    kinds = list(multiscale.QUALITY_KINDS)
    grid = args.sigma_grid

    def run_trial(flat_index: int) -> dict:
        si, trial = divmod(flat_index, args.trials)
        gt = synthlab.plane_wave(n, args.omega, np.deg2rad(args.theta_deg),
                                 sigma=grid[si], seed=_trial_seed(args.seed, si, trial))
        stack = multiscale.scale_features(gt.image, frame, backend=args.backend)
        scores = {}
        for kind in kinds:
            feats = multiscale.select(stack, multiscale.quality_maps(stack, kind))
            scores[kind] = _fold_ssim(feats.phase, gt.phase, sl)
        return scores

    results = _map_trials(run_trial, len(grid) * args.trials)
    rows = []
    for si, sigma in enumerate(grid):
        block = results[si * args.trials : (si + 1) * args.trials]
        for kind in kinds:
            vals = np.array([b[kind] for b in block])
            rows.append([sigma, kind, args.trials, float(vals.mean()), float(vals.std())])
    csv = _csv_text(["sigma", "quality", "trials", "mean_ssim", "std_ssim"], rows)
    fileio.atomic_write_text(out / "bench_planewave.csv", csv)
    _write_config(out, args, "bench-planewave", {"interior_margin": sl[0].start})
    print(csv, end="")
    return EXIT_OK


def cmd_bench_chirp(args) -> int:
    n = args.size
    out = _out_dir(args)
    base = _frame_from_args(args, n)
    frames = {
        "standard": dataclasses.replace(base, overcomplete=False),
        "overcomplete": dataclasses.replace(base, overcomplete=True),
    }
    sl = _interior(n, base)
    kinds = list(multiscale.QUALITY_KINDS)
    grid = args.sigma_grid

    def run_trial(flat_index: int) -> dict:
        si, trial = divmod(flat_index, args.trials)
        gt = synthlab.parabolic_chirp(n, a=args.chirp_rate, sigma=grid[si],
                                      seed=_trial_seed(args.seed, si, trial))
        scores = {}
        for fname, fr in frames.items():
            stack = multiscale.scale_features(gt.image, fr, backend=args.backend)
            for kind in kinds:
                feats = multiscale.select(stack, multiscale.quality_maps(stack, kind))
                scores[(fname, kind)] = _fold_ssim(feats.phase, gt.phase, sl)
        return scores

    results = _map_trials(run_trial, len(grid) * args.trials)
    rows = []
    for si, sigma in enumerate(grid):
        block = results[si * args.trials : (si + 1) * args.trials]
        for fname in frames:
            for kind in kinds:
                vals = np.array([b[(fname, kind)] for b in block])
                rows.append([sigma, fname, kind, args.trials,
                             float(vals.mean()), float(vals.std())])
    csv = _csv_text(["sigma", "feature_set", "quality", "trials",
                     "mean_ssim", "std_ssim"], rows)
    fileio.atomic_write_text(out / "bench_chirp.csv", csv)
    _write_config(out, args, "bench-chirp", {"interior_margin": sl[0].start})
    print(csv, end="")
    return EXIT_OK


def cmd_bench_demod(args) -> int:
    n = args.size
    out = _out_dir(args)
    frame = _frame_from_args(args, n)
    message = synthlab.default_message(n, args.message_amp, args.message_freq)
    carrier = demod_mod.CarrierSpec(args.omega_c if args.omega_c is not None else 32.0,
                                    np.deg2rad(args.theta_c_deg), args.phi_c)
    margin = 2 ** (frame.m_min + 1)
    sl = synthlab.interior_slice(n, margin)
    kinds = ("amplitude", "product")
    grid = args.sigma_grid

    def run_trial(flat_index: int) -> dict:
        si, trial = divmod(flat_index, args.trials)
        gt = synthlab.pm_signal(n, carrier.omega_c, carrier.theta_c, carrier.phi_c,
                                message, sigma=grid[si],
                                seed=_trial_seed(args.seed, si, trial))
        scores = {}
        for kind in kinds:
            result = demod_mod.demodulate(gt.image, carrier, frame=frame,
                                          quality=kind, backend=args.backend)
            scores[kind] = synthlab.correlation(result.message_est[sl], message[sl])
        return scores

    results = _map_trials(run_trial, len(grid) * args.trials)
    rows = []
    for si, sigma in enumerate(grid):
        block = results[si * args.trials : (si + 1) * args.trials]
        for kind in kinds:
            vals = np.array([b[kind] for b in block])
            rows.append([sigma, kind, args.trials, float(vals.mean()), float(vals.std())])
    csv = _csv_text(["sigma", "quality", "trials", "mean_corr", "std_corr"], rows)
    fileio.atomic_write_text(out / "bench_demod.csv", csv)
    _write_config(out, args, "bench-demod", {"interior_margin": margin})
    print(csv, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_frame_flags(p: argparse.ArgumentParser, overcomplete_default: bool = False):
    p.add_argument("--scales", type=int, default=None,
                   help="number of dyadic scales (alternative to --min-scale)")
    p.add_argument("--min-scale", type=int, default=None,
                   help="smallest dyadic scale (default 3)")
    p.add_argument("--subscales", type=int, default=2,
                   help="subscales per dyadic scale (default 2)")
    if overcomplete_default:
        p.add_argument("--no-overcomplete", dest="overcomplete",
                       action="store_false", default=True,
                       help="drop the per-dyadic low-pass feature scales")
    else:
        p.add_argument("--overcomplete", action="store_true", default=False,
                       help="add per-dyadic low-pass images as feature scales")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--quality", choices=multiscale.QUALITY_KINDS, default="product")
    p.add_argument("--backend", choices=("ms", "smv"), default="smv")
    p.add_argument("--out-dir", required=True)


def _add_bench_flags(p: argparse.ArgumentParser):
    p.add_argument("--size", type=int, default=256, help="image side (power of two)")
    p.add_argument("--sigma-grid", type=_parse_sigma_grid,
                   default=_parse_sigma_grid("0:0.25:1.5"),
                   help="start:step:stop or comma list (default 0:0.25:1.5)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smvphase",
        description="Multiscale spatial phase estimation with the structure multivector.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="steerable frame decomposition of a PGM image")
    p.add_argument("--input", required=True)
    _add_frame_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("phase", help="multiscale phase/orientation/amplitude maps")
    p.add_argument("--input", required=True)
    _add_frame_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("demod", help="phase demodulation (user image or synthetic demo)")
    p.add_argument("--input", default=None, help="PM image (PGM); synthetic if omitted")
    p.add_argument("--omega-c", type=float, default=None,
                   help="carrier frequency (estimated if omitted, advisory)")
    p.add_argument("--theta-c-deg", type=float, default=45.0)
    p.add_argument("--phi-c", type=float, default=0.0)
    p.add_argument("--message-amp", type=float, default=0.5)
    p.add_argument("--message-freq", type=int, default=4)
    p.add_argument("--sigma", type=float, default=0.75)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    _add_frame_flags(p, overcomplete_default=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_demod)

    p = sub.add_parser("register", help="fine-scale registration of a coarsely aligned pair")
    p.add_argument("--fixed", required=True)
    p.add_argument("--moving", required=True)
    p.add_argument("--mask-percentile", type=float, default=60.0)
    p.add_argument("--freq-source", choices=("fixed", "delta"), default="fixed")
    _add_frame_flags(p, overcomplete_default=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("bench-planewave", help="plane-wave phase estimation sweep (CSV)")
    p.add_argument("--omega", type=float, default=16.0)
    p.add_argument("--theta-deg", type=float, default=45.0)
    _add_bench_flags(p)
    _add_frame_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench_planewave)

    p = sub.add_parser("bench-chirp", help="chirp sweep, standard vs overcomplete (CSV)")
    p.add_argument("--chirp-rate", type=float, default=8.0 / np.pi)
    _add_bench_flags(p)
    _add_frame_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench_chirp)

    p = sub.add_parser("bench-demod", help="PM message recovery sweep (CSV)")
    p.add_argument("--omega-c", type=float, default=32.0)
    p.add_argument("--theta-c-deg", type=float, default=45.0)
    p.add_argument("--phi-c", type=float, default=0.0)
    p.add_argument("--message-amp", type=float, default=0.5)
    p.add_argument("--message-freq", type=int, default=4)
    _add_bench_flags(p)
    _add_frame_flags(p, overcomplete_default=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench_demod)

    return parser


def _validate(args) -> None:
    size = getattr(args, "size", None)
    if size is not None and (size < 8 or not spectral.is_power_of_two(size)):
        raise UsageError(f"--size must be a power of two >= 8, got {size}")
    trials = getattr(args, "trials", None)
    if trials is not None and trials < 1:
        raise UsageError("--trials must be >= 1")
    if getattr(args, "subscales", 1) < 1:
        raise UsageError("--subscales must be >= 1")
    pct = getattr(args, "mask_percentile", None)
    if pct is not None and not 0.0 <= pct <= 100.0:
        raise UsageError("--mask-percentile must be in [0, 100]")
    sigma = getattr(args, "sigma", None)
    if sigma is not None and sigma < 0:
        raise UsageError("--sigma must be >= 0")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        _validate(args)
        _thread_count()
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SmvphaseError, ValueError) as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
