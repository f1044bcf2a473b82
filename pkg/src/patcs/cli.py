"""Command-line front end: ``patcs <verb> [options]``.

Verbs
-----
phantom   write a Shepp-Logan field
forward   simulate measurements for a model
recover   turn measurements into generalised Fourier coefficients
cs        subsample coefficients and reconstruct (minimum energy + TV)
metrics   compare two fields
render    write a field as a 16-bit PGM image

Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import cspat, eigenbasis, freespace, io, riesz, wavesim
from .metrics import compare

log = logging.getLogger("patcs")

MODELS = ("square-1side", "square-2sides", "disk-bounded", "ball-bounded", "disk-free", "ball-free",
          "cs-pattern", "cs-tv")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    model: str = "square-2sides"
    grid: int = 255
    T: float = 3.0
    cfl: float = 0.5
    lmax: int = 64
    noise: float = 0.0
    j0: int = 22
    lines: int = 30
    density: str = "log"
    seed: int = 0
    out: str = "."

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.grid < 1 or self.lmax < 1:
            raise ConfigError("grid and lmax must be positive")
        if self.T <= 0 or self.cfl <= 0:
            raise ConfigError("T and cfl must be positive")
        if self.noise < 0:
            raise ConfigError("noise must be non-negative")
        if self.density not in ("log", "quadratic"):
            raise ConfigError(f"unknown density {self.density!r}")
        return self

    def to_meta(self) -> dict:
        return {f"config.{k}": v for k, v in dataclasses.asdict(self).items()}

    @classmethod
    def from_meta(cls, meta: dict) -> "ExperimentConfig":
        kw = {}
        for f in dataclasses.fields(cls):
            key = f"config.{f.name}"
            if key in meta:
                kw[f.name] = type(f.default)(meta[key])
        return cls(**kw)


def _versions() -> dict:
    import scipy

    return {"version.patcs": __version__, "version.numpy": np.__version__, "version.scipy": scipy.__version__}


def _outdir(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_field(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".pgm":
        return io.read_pgm(path).astype(float) / 65535.0
    return io.read_patmat(path)


def _image(F: np.ndarray) -> np.ndarray:
    # first index is x1 (horizontal), second x2 (vertical, upwards)
    return np.flipud(np.asarray(F).T)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_phantom(cfg: ExperimentConfig, args) -> int:
    out = _outdir(cfg)
    F = eigenbasis.shepp_logan(cfg.grid).values
    io.write_patmat(out / "phantom.patmat", F)
    io.write_sidecar(out / "phantom.txt", {**cfg.to_meta(), **_versions(), "kind": "shepp-logan",
                                          "mass": float(F.sum())})
    if args.csv:
        io.export_csv(out / "phantom.csv", F)
    print(f"phantom: {cfg.grid}x{cfg.grid} -> {out / 'phantom.patmat'}")
    return EXIT_OK


def _forward_square(cfg, args, out, meta):
    sim = wavesim.SimConfig(cfg.grid, cfg.T, cfg.cfl / (cfg.grid + 1))
    meta.update({"h": sim.h, "dt": sim.dt, "N": sim.N})
    if args.dry_run:
        return meta
    if cfg.lmax > cfg.grid:
        raise ConfigError(f"lmax = {cfg.lmax} exceeds the {cfg.grid} boundary nodes")
    F = _load_field(args.input) if args.input else eigenbasis.shepp_logan(cfg.grid).values
    if F.shape != (cfg.grid, cfg.grid):
        raise ConfigError(f"input field is {F.shape}, expected {(cfg.grid,) * 2}")
    sides = ("right",) if cfg.model == "square-1side" else ("top", "right")
    t0 = time.perf_counter()
    stream = wavesim.simulate(F, sim, sides=sides)
    meta["time.simulate"] = time.perf_counter() - t0
    io.write_patmat(out / "times.patmat", stream.times)
    for k, side in enumerate(sides):
        G = wavesim.measure(stream, side, cfg.lmax)
        Gn = wavesim.add_noise(G, cfg.noise, seed=cfg.seed + k)
        io.write_patmat(out / f"G_{side}.patmat", Gn.G)
        meta[f"delta.{side}"] = Gn.noise_level
    return meta


def _random_coeffs(rng, rows, K):
    decay = 1.0 / (1.0 + np.arange(K))
    return rng.standard_normal((rows, K)) * decay


def _forward_disk_bounded(cfg, args, out, meta):
    if args.dry_run:
        return meta
    times = np.linspace(0.0, cfg.T, int(math.ceil(cfg.T / 0.01)) + 1)
    rng = np.random.default_rng(cfg.seed)
    C = io.read_patmat(args.input) if args.input else _random_coeffs(rng, cfg.lmax, cfg.grid)
    G = np.array([wavesim.synth_measurements(C, l, times, model="disk") for l in range(C.shape[0])])
    ms = wavesim.add_noise(wavesim.MeasurementSet("disk", G, times, rows=np.arange(C.shape[0])), cfg.noise, cfg.seed)
    io.write_patmat(out / "times.patmat", times)
    io.write_patmat(out / "G_disk.patmat", ms.G)
    io.write_patmat(out / "truth.patmat", C)
    meta["delta.disk"] = ms.noise_level
    return meta


def _forward_ball_bounded(cfg, args, out, meta):
    if args.dry_run:
        return meta
    times = np.linspace(0.0, cfg.T, int(math.ceil(cfg.T / 0.01)) + 1)
    rng = np.random.default_rng(cfg.seed)
    index = [(m, p) for m in range(cfg.lmax) for p in range(-m, m + 1)]
    C = _random_coeffs(rng, len(index), cfg.grid)
    rows = []
    for (m, p), a in zip(index, C):
        z, c = riesz._ball_weights(m, cfg.grid)
        rows.append((c * a) @ np.cos(np.outer(z, times)))
    G = np.array(rows)
    ms = wavesim.add_noise(wavesim.MeasurementSet("ball", G, times), cfg.noise, cfg.seed)
    io.write_patmat(out / "times.patmat", times)
    io.write_patmat(out / "G_ball.patmat", ms.G)
    io.write_patmat(out / "truth.patmat", C)
    meta["delta.ball"] = ms.noise_level
    return meta


def _forward_free(cfg, args, out, meta):
    d = 2 if cfg.model == "disk-free" else 3
    R = freespace.required_radius(cfg.T)
    meta.update({"R": R, "M": cfg.grid})
    if args.dry_run:
        return meta
    if d == 2:
        fn = _disk_phantom
    else:
        a, b = freespace.ball_mode(0, 0, 1), freespace.ball_mode(1, 0, 1)
        fn = lambda x, y, z: a(x, y, z) + 0.5 * np.real(b(x, y, z))
    f0 = freespace.padded_field(fn, cfg.grid, R, d)
    nt = int(math.ceil(cfg.T / 0.02)) + 1
    times = np.linspace(0.0, cfg.T, nt)
    t0 = time.perf_counter()
    fields = freespace.iter_propagate(f0, times)
    if d == 2:
        tr = freespace.circle_trace(fields, times, cfg.lmax)
        idx = np.array(tr.index, dtype=float)[:, None]
    else:
        tr = freespace.sphere_trace(fields, times, cfg.lmax)
        idx = np.array(tr.index, dtype=float)
    meta["time.propagate"] = time.perf_counter() - t0
    # noise is calibrated on the stacked real and imaginary parts
    n_rows = tr.g.shape[0]
    ms = wavesim.MeasurementSet("free", np.vstack([tr.g.real, tr.g.imag]), times)
    noisy = wavesim.add_noise(ms, cfg.noise, cfg.seed)
    g = noisy.G[:n_rows] + 1j * noisy.G[n_rows:]
    io.write_patmat(out / "times.patmat", times)
    io.write_patmat(out / "trace_re.patmat", g.real)
    io.write_patmat(out / "trace_im.patmat", g.imag)
    io.write_patmat(out / "trace_index.patmat", idx)
    meta["delta.trace"] = noisy.noise_level
    return meta


def _disk_phantom(x, y):
    """Shepp-Logan ellipses evaluated directly on the unit disk."""
    F = np.zeros(np.broadcast(x, y).shape)
    for value, a, b, x0, y0, deg in eigenbasis.SHEPP_LOGAN_ELLIPSES:
        phi = np.deg2rad(deg)
        c, s = np.cos(phi), np.sin(phi)
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        F[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    F[np.abs(F) < 1e-12] = 0.0
    return F


def cmd_forward(cfg: ExperimentConfig, args) -> int:
    out = _outdir(cfg)
    meta = {**cfg.to_meta(), **_versions()}
    if cfg.model.startswith("square"):
        meta = _forward_square(cfg, args, out, meta)
    elif cfg.model == "disk-bounded":
        meta = _forward_disk_bounded(cfg, args, out, meta)
    elif cfg.model == "ball-bounded":
        meta = _forward_ball_bounded(cfg, args, out, meta)
    elif cfg.model in ("disk-free", "ball-free"):
        meta = _forward_free(cfg, args, out, meta)
    else:
        raise ConfigError(f"model {cfg.model!r} has no forward step")
    if args.dry_run:
        for k in sorted(meta):
            print(f"{k}={meta[k]}")
        return EXIT_OK
    io.write_sidecar(out / "forward.txt", meta)
    print(f"forward: {cfg.model} -> {out}")
    return EXIT_OK


def cmd_recover(cfg: ExperimentConfig, args) -> int:
    src = Path(args.input or cfg.out)
    meta_in = io.read_sidecar(src / "forward.txt")
    fcfg = ExperimentConfig.from_meta(meta_in)
    out = _outdir(cfg)
    times = io.read_patmat(src / "times.patmat").ravel()
    meta = {**fcfg.to_meta(), **_versions(), "source": str(src)}
    if fcfg.model.startswith("square"):
        J = args.J or fcfg.lmax
        disp = riesz.FDDispersion(float(meta_in["h"]), float(meta_in["dt"]))
        grids = {}
        for side in ("top", "right"):
            path = src / f"G_{side}.patmat"
            if not path.exists():
                continue
            G = wavesim.MeasurementSet(side, io.read_patmat(path), times)
            delta = float(meta_in.get(f"delta.{side}", 0.0))
            grids[side] = riesz.recover_square_side(G, riesz.StableSet.for_noise(side, delta), J, dispersion=disp)
        if len(grids) == 2:
            C = riesz.combine_sides(grids["top"], grids["right"])
        else:
            C = next(iter(grids.values()))
        io.write_patmat(out / "coeffs.patmat", C.coeffs)
        io.write_patmat(out / "valid.patmat", C.valid.astype(float))
        F = eigenbasis.synthesize(C, args.resolution or J).values
        io.write_patmat(out / "recon.patmat", F)
        io.write_pgm(out / "recon.pgm", _image(F))
        meta["valid_fraction"] = float(C.valid.mean())
    elif fcfg.model == "disk-bounded":
        G = wavesim.MeasurementSet("disk", io.read_patmat(src / "G_disk.patmat"), times,
                                   rows=np.arange(io.read_patmat(src / "G_disk.patmat").shape[0]))
        C = riesz.recover_disk(G, fcfg.grid)
        io.write_patmat(out / "coeffs.patmat", C.coeffs)
    elif fcfg.model == "ball-bounded":
        G = io.read_patmat(src / "G_ball.patmat")
        index = [(m, p) for m in range(fcfg.lmax) for p in range(-m, m + 1)]
        res = riesz.recover_ball(dict(zip(index, G)), times, fcfg.grid)
        io.write_patmat(out / "coeffs.patmat", np.array([res[k] for k in index]))
    elif fcfg.model in ("disk-free", "ball-free"):
        g = io.read_patmat(src / "trace_re.patmat") + 1j * io.read_patmat(src / "trace_im.patmat")
        idx = io.read_patmat(src / "trace_index.patmat").astype(int)
        K = args.J or 8
        re = np.zeros((len(idx), K))
        im = np.zeros((len(idx), K))
        if fcfg.model == "disk-free":
            tr = freespace.BoundaryTrace(g, times, [int(i[0]) for i in idx])
            for r, l in enumerate(tr.index):
                for n in range(1, K + 1):
                    v = freespace.disk_recover(tr, l, n, args.method)
                    re[r, n - 1], im[r, n - 1] = v.real, v.imag
        else:
            tr = freespace.BoundaryTrace(g, times, [tuple(int(a) for a in i) for i in idx], "sphere")
            for r, (l, m) in enumerate(tr.index):
                for n in range(1, K + 1):
                    v = freespace.ball_recover(tr, l, m, n, args.method)
                    re[r, n - 1], im[r, n - 1] = v.real, v.imag
        io.write_patmat(out / "coeffs_re.patmat", re)
        io.write_patmat(out / "coeffs_im.patmat", im)
    else:
        raise ConfigError(f"cannot recover model {fcfg.model!r}")
    io.write_sidecar(out / "recover.txt", meta)
    print(f"recover: {fcfg.model} -> {out}")
    return EXIT_OK


def cmd_cs(cfg: ExperimentConfig, args) -> int:
    if not args.input:
        raise ConfigError("cs needs --in <coefficient file>")
    C = io.read_patmat(args.input)
    J = C.shape[0]
    if C.shape != (J, J):
        raise ConfigError(f"coefficient grid must be square, got {C.shape}")
    out = _outdir(cfg)
    if args.dst:
        values = C
    else:
        values = (J + 1) * C     # continuum coefficients -> DST of the J x J image
    if cfg.j0 >= J:
        pattern = cspat.full_pattern(J)
    else:
        pattern = cspat.two_level_pattern(J, cfg.j0, cfg.lines, cfg.seed, cfg.density)
    timings = {}
    t0 = time.perf_counter()
    me = cspat.min_energy(pattern, values)
    timings["min_energy"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    meta = {**cfg.to_meta(), **_versions(), "fraction": pattern.fraction,
            "masks_per_side": pattern.masks_per_side,
            "lines_n": list(pattern.lines_n), "lines_k": list(pattern.lines_k)}
    io.write_patmat(out / "min_energy.patmat", me)
    io.write_pgm(out / "min_energy.pgm", _image(me))
    io.write_pgm(out / "pattern.pgm", _image(pattern.mask.astype(float)), 0.0, 1.0)
    try:
        tv, info = cspat.tv_min(pattern, values, return_info=True)
    except cspat.NonConvergenceError as exc:
        meta["error"] = str(exc)
        io.write_sidecar(out / "cs.txt", meta)
        print(f"cs: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    timings["tv"] = time.perf_counter() - t0
    io.write_patmat(out / "tv.patmat", tv)
    io.write_pgm(out / "tv.pgm", _image(tv))
    meta.update({"tv_norm": info.tv, "constraint_violation": info.eq_violation, "gap": info.gap})
    if args.reference:
        ref = _load_field(args.reference)
        for name, img in (("tv", tv), ("min_energy", me)):
            rep = compare(ref, img, constraint_violation=info.eq_violation if name == "tv" else None)
            for k, v in rep.as_dict().items():
                meta[f"{name}.{k}"] = v
    for k, v in timings.items():
        meta[f"time.{k}"] = v
    io.write_sidecar(out / "cs.txt", meta)
    print(f"cs: fraction {pattern.fraction:.4f} -> {out}")
    return EXIT_OK


def cmd_metrics(cfg: ExperimentConfig, args) -> int:
    if len(args.fields) != 2:
        raise ConfigError("metrics needs a reference and a candidate field")
    ref, cand = (_load_field(p) for p in args.fields)
    if ref.shape != cand.shape:
        raise ConfigError(f"shape mismatch {ref.shape} vs {cand.shape}")
    rep = compare(ref, cand)
    d = rep.as_dict()
    for k in sorted(d):
        print(f"{k}={d[k]!r}")
    if args.report:
        io.write_sidecar(args.report, d)
    return EXIT_OK


def cmd_render(cfg: ExperimentConfig, args) -> int:
    if len(args.fields) != 1:
        raise ConfigError("render needs exactly one field")
    F = _load_field(args.fields[0])
    target = Path(cfg.out)
    if target.suffix != ".pgm":
        target.mkdir(parents=True, exist_ok=True)
        target = target / (Path(args.fields[0]).stem + ".pgm")
    io.write_pgm(target, _image(F), args.vmin, args.vmax)
    print(f"render: {target}")
    return EXIT_OK


VERBS = {
    "phantom": cmd_phantom,
    "forward": cmd_forward,
    "recover": cmd_recover,
    "cs": cmd_cs,
    "metrics": cmd_metrics,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default=d.model, help="experiment model (%(default)s)")
    common.add_argument("--T", type=float, default=d.T, help="observation time")
    common.add_argument("--grid", type=int, default=d.grid,
                        help="interior nodes (square), padded cells (free space) or radial modes (bounded disk/ball)")
    common.add_argument("--cfl", type=float, default=d.cfl, help="dt = cfl * h")
    common.add_argument("--lmax", type=int, default=d.lmax, help="number of masks")
    common.add_argument("--noise", type=float, default=d.noise, help="relative max-norm noise level")
    common.add_argument("--j0", type=int, default=d.j0, help="fully sampled band")
    common.add_argument("--lines", type=int, default=d.lines, help="half-lines per side")
    common.add_argument("--density", default=d.density, choices=("log", "quadratic"))
    common.add_argument("--seed", type=int, default=d.seed)
    common.add_argument("--out", default=d.out, help="output directory (or .pgm file for render)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="patcs", description="Photoacoustic tomography as undersampled generalised Fourier measurements.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("phantom", parents=[common], help="write the Shepp-Logan phantom")
    sp.add_argument("--csv", action="store_true", help="also export CSV")

    sp = sub.add_parser("forward", parents=[common], help="simulate measurements")
    sp.add_argument("--in", dest="input", help="initial field (PATMAT/PGM) or coefficient file")
    sp.add_argument("--dry-run", action="store_true", help="validate and echo the configuration only")

    sp = sub.add_parser("recover", parents=[common], help="recover coefficients from measurements")
    sp.add_argument("--in", dest="input", help="directory written by 'forward'")
    sp.add_argument("--J", type=int, default=None, help="coefficient truncation")
    sp.add_argument("--resolution", type=int, default=None, help="synthesis resolution")
    sp.add_argument("--method", default="sine", choices=("sine", "hankel"))

    sp = sub.add_parser("cs", parents=[common], help="subsample and reconstruct")
    sp.add_argument("--in", dest="input", help="coefficient PATMAT file")
    sp.add_argument("--dst", action="store_true", help="input already holds DST coefficients of the image")
    sp.add_argument("--reference", help="ground-truth field for metrics")

    sp = sub.add_parser("metrics", parents=[common], help="compare fields")
    sp.add_argument("fields", nargs="*")
    sp.add_argument("--report", help="write the report as a key=value file")

    sp = sub.add_parser("render", parents=[common], help="write a field as PGM")
    sp.add_argument("fields", nargs="*")
    sp.add_argument("--vmin", type=float)
    sp.add_argument("--vmax", type=float)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = ExperimentConfig(args.model, args.grid, args.T, args.cfl, args.lmax, args.noise, args.j0,
                           args.lines, args.density, args.seed, args.out)
    try:
        cfg.validate()
        return VERBS[args.verb](cfg, args)
    # LinAlgError derives from ValueError, so numerical failures are matched first
    except (np.linalg.LinAlgError, cspat.NonConvergenceError, RuntimeError, FloatingPointError) as exc:
        print(f"patcs {args.verb}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"patcs {args.verb}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
