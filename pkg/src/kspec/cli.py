"""Command-line front end.

Subcommands: kendall, eigs, mp, lsd-solve, simulate, compare,
population-spectrum.  Every run echoes its fully resolved configuration as
a JSON line on stdout before writing artifacts.  Exit codes: 0 on success,
1 on numerical failure, 2 on configuration errors (offending key named).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .exceptions import KspecError
from .io import (
    ConfigError,
    fmt,
    load_density_json,
    load_manifest,
    load_measure_json,
    load_sample_matrix,
    read_matrix_csv,
    save_density_json,
    save_esd_csv,
    save_esd_json,
    save_measure_json,
    write_matrix_csv,
)
from .lsd import SpectralMeasure, density_from_stieltjes, measure_from_sigma, solve_stieltjes
from .matrix import DegeneratePolicy, kendall_tau
from .mp import MPParams, default_z_grid, ise, mp_cdf, mp_density, mp_quantiles, mp_support, mp_stieltjes
from .simulate import (
    GeneratorFamily,
    GeneratorSpec,
    ModelSpec,
    population_kendall_spectrum,
    run_experiment,
)
from .spectra import (
    SmoothedDensity,
    SpectralDistribution,
    eigenvalues_symmetric,
    kolmogorov_to_cdf,
    levy_distance,
)

SEED_ENV = "KSPEC_SEED"
QUANTILE_ATOMS = 4096


def _echo(command: str, options: dict) -> None:
    print(json.dumps({"command": command, "options": options}, sort_keys=True))


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_curves_csv(path, header: str, cols) -> None:
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in zip(*cols):
            f.write(",".join(fmt(v) for v in row) + "\n")


def _check_mp_args(y: float, sigma2: float) -> MPParams:
    if not 0.0 < y < 1.0:
        raise ConfigError(f"--y must lie in (0,1), got {y!r}")
    if not sigma2 > 0.0:
        raise ConfigError(f"--sigma2 must be positive, got {sigma2!r}")
    return MPParams(y, sigma2)


def _stieltjes_rows(values):
    zs = default_z_grid()
    return [z.real for z in zs], [z.imag for z in zs], [m.real for m in values], [m.imag for m in values]


# ---------------------------------------------------------------- targets


class _MPTarget:
    """Closed-form MP target."""

    def __init__(self, params: MPParams):
        self.params = params

    def describe(self) -> dict:
        return {"kind": "mp", "y": self.params.y, "sigma2": self.params.sigma2}

    def density_on(self, grid: np.ndarray) -> np.ndarray:
        return mp_density(self.params, grid)

    def cdf_at(self, x: np.ndarray) -> np.ndarray:
        return mp_cdf(self.params, x)

    def quantile_atoms(self, k: int) -> np.ndarray:
        return mp_quantiles(self.params, k)

    def ise_of(self, dens: SmoothedDensity) -> float:
        return ise(dens, self.params)


class _MeasureTarget:
    """General limit law: density by Stieltjes inversion, CDF by cumulative
    trapezoid on a dense reference grid."""

    def __init__(self, H: SpectralMeasure, y: float, eps: float = 1e-5):
        self.H, self.y = H, y
        sy = math.sqrt(y)
        lo = float(H.taus.min()) * (1.0 - sy) ** 2
        hi = float(H.taus.max()) * (1.0 + sy) ** 2
        pad = 0.05 * (hi - lo)
        self.grid = np.linspace(max(lo - pad, 1e-9), hi + pad, 4001)
        self.values = density_from_stieltjes(H, y, self.grid, eps=eps).values
        steps = np.diff(self.grid) * 0.5 * (self.values[:-1] + self.values[1:])
        cum = np.concatenate(([0.0], np.cumsum(steps)))
        self.cdf_grid = np.clip(cum / cum[-1], 0.0, 1.0)

    def describe(self) -> dict:
        return {"kind": "measure", "y": self.y, "atoms": [[t, w] for t, w in self.H.atoms]}

    def density_on(self, grid: np.ndarray) -> np.ndarray:
        return np.interp(grid, self.grid, self.values, left=0.0, right=0.0)

    def cdf_at(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.grid, self.cdf_grid, left=0.0, right=1.0)

    def quantile_atoms(self, k: int) -> np.ndarray:
        q = (np.arange(k) + 0.5) / k
        return np.interp(q, self.cdf_grid, self.grid)

    def ise_of(self, dens: SmoothedDensity) -> float:
        diff = dens.values - self.density_on(dens.grid)
        return float(np.trapezoid(diff**2, dens.grid))


# ------------------------------------------------------------- subcommands


def cmd_kendall(args) -> None:
    options = {"input": args.input, "policy": args.policy, "out": args.out}
    _echo("kendall", options)
    X = load_sample_matrix(args.input)
    policy = DegeneratePolicy.ERROR if args.policy == "error" else DegeneratePolicy.SKIP_PAIR
    K = kendall_tau(X, policy)
    out = _outdir(args.out)
    write_matrix_csv(K.matrix, out / "kendall.csv")
    print(f"wrote {out / 'kendall.csv'} (p={K.p}, n={K.n_samples})")


def cmd_eigs(args) -> None:
    options = {"input": args.input, "out": args.out, "plot": not args.no_plot}
    _echo("eigs", options)
    M = read_matrix_csv(args.input)
    dist = eigenvalues_symmetric(M)
    out = _outdir(args.out)
    save_esd_csv(dist, out / "esd.csv")
    save_esd_json(dist, out / "esd.json")
    if not args.no_plot:
        from .plots import esd_figure

        esd_figure(dist.eigenvalues, out / "eigs.png", f"spectrum of {Path(args.input).name}")
    print(f"wrote {out / 'esd.csv'} ({dist.p} eigenvalues)")


def cmd_mp(args) -> None:
    params = _check_mp_args(args.y, args.sigma2)
    if args.grid < 2:
        raise ConfigError(f"--grid must be at least 2, got {args.grid!r}")
    options = {
        "y": args.y,
        "sigma2": args.sigma2,
        "grid": args.grid,
        "out": args.out,
        "plot": not args.no_plot,
    }
    _echo("mp", options)
    a, b = mp_support(params)
    x = np.linspace(a, b, args.grid)
    f = mp_density(params, x)
    F = mp_cdf(params, x)
    out = _outdir(args.out)
    _write_curves_csv(out / "mp_curves.csv", "x,f,F", (x, f, F))
    ms = [mp_stieltjes(params, z) for z in default_z_grid()]
    _write_curves_csv(out / "mp_stieltjes.csv", "re_z,im_z,re_m,im_m", _stieltjes_rows(ms))
    if not args.no_plot:
        from .plots import mp_figure

        mp_figure(x, f, F, out / "mp.png", f"MP(y={args.y}, sigma2={args.sigma2})")
    print(f"wrote {out / 'mp_curves.csv'} and {out / 'mp_stieltjes.csv'}")


def _load_measure(args, manifest_dir: Path | None = None) -> SpectralMeasure:
    if getattr(args, "measure", None):
        return load_measure_json(args.measure)
    if getattr(args, "sigma_file", None):
        return measure_from_sigma(read_matrix_csv(args.sigma_file))
    raise ConfigError("need --measure or --sigma-file")


def cmd_lsd_solve(args) -> None:
    if not 0.0 < args.y < 1.0:
        raise ConfigError(f"--y must lie in (0,1), got {args.y!r}")
    if args.grid < 2:
        raise ConfigError(f"--grid must be at least 2, got {args.grid!r}")
    if not args.eps > 0:
        raise ConfigError(f"--eps must be positive, got {args.eps!r}")
    options = {
        "measure": args.measure,
        "sigma_file": args.sigma_file,
        "y": args.y,
        "z_grid": args.z_grid,
        "grid": args.grid,
        "eps": args.eps,
        "out": args.out,
        "plot": not args.no_plot,
    }
    _echo("lsd-solve", options)
    H = _load_measure(args)
    out = _outdir(args.out)
    save_measure_json(H, out / "measure.json")

    results = [solve_stieltjes(H, args.y, z) for z in default_z_grid()]
    re_z, im_z, re_m, im_m = _stieltjes_rows([r.m for r in results])
    with open(out / "lsd_stieltjes.csv", "w") as fh:
        fh.write("re_z,im_z,re_m,im_m,iterations,residual\n")
        for rz, iz, rm, im, r in zip(re_z, im_z, re_m, im_m, results):
            fh.write(
                ",".join([fmt(rz), fmt(iz), fmt(rm), fmt(im), str(r.iterations), fmt(r.residual)])
                + "\n"
            )

    sy = math.sqrt(args.y)
    lo = float(H.taus.min()) * (1.0 - sy) ** 2
    hi = float(H.taus.max()) * (1.0 + sy) ** 2
    pad = 0.05 * (hi - lo)
    x = np.linspace(max(lo - pad, 1e-9), hi + pad, args.grid)
    dens = density_from_stieltjes(H, args.y, x, eps=args.eps)
    _write_curves_csv(out / "lsd_density.csv", "x,value", (x, dens.values))
    if not args.no_plot:
        from .plots import density_figure

        density_figure(x, dens.values, out / "lsd.png", f"limit density, y={args.y}")
    print(f"wrote {out / 'lsd_stieltjes.csv'} and {out / 'lsd_density.csv'}")


def _resolve_simulate_config(args) -> dict:
    cfg = load_manifest(args.manifest)
    if SEED_ENV in os.environ:
        raw = os.environ[SEED_ENV]
        try:
            cfg["seed"] = int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    if args.workers < 1:
        raise ConfigError(f"--workers must be at least 1, got {args.workers!r}")
    return cfg


def _simulate_target(cfg: dict, manifest_dir: Path, sigma: np.ndarray | None):
    name = cfg["target"]
    if name == "mp":
        if cfg["p"] >= cfg["n"]:
            raise ConfigError("target 'mp' requires p < n (aspect ratio below 1)")
        return _MPTarget(MPParams(cfg["p"] / cfg["n"], 0.5))
    y = cfg["p"] / cfg["n"]
    if name == "sigma":
        if sigma is None:
            raise ConfigError("target 'sigma' requires the sigma_file key")
        return _MeasureTarget(measure_from_sigma(sigma), y)
    if name.endswith(".json"):
        return _MeasureTarget(load_measure_json(manifest_dir / name), y)
    raise ConfigError(f"unknown target: {name!r} (use 'mp', 'sigma', or a measure JSON path)")


def cmd_simulate(args) -> None:
    cfg = _resolve_simulate_config(args)
    options = dict(cfg)
    options.update({"manifest": args.manifest, "out": args.out, "workers": args.workers,
                    "plot": not args.no_plot, "eigenvalues": not args.no_eigenvalues})
    _echo("simulate", options)

    manifest_dir = Path(args.manifest).resolve().parent
    sigma = None
    if cfg["sigma_file"] is not None:
        sigma = read_matrix_csv(manifest_dir / cfg["sigma_file"])
    target = _simulate_target(cfg, manifest_dir, sigma)

    model = ModelSpec(
        n=cfg["n"],
        p=cfg["p"],
        generator=GeneratorSpec(GeneratorFamily(cfg["family"]), cfg["param"], cfg["seed"]),
        sigma=sigma,
        replications=cfg["R"],
        bandwidth=cfg["h"],
    )
    result = run_experiment(model, _unwrap_target(target), workers=args.workers)

    pooled = result.pooled_distribution()
    ks = kolmogorov_to_cdf(pooled, target.cdf_at(pooled.eigenvalues))
    levy = levy_distance(pooled, SpectralDistribution(target.quantile_atoms(QUANTILE_ATOMS)))

    grid = result.averaged_density.grid
    target_values = target.density_on(grid)
    out = _outdir(args.out)
    summary = {
        "config": cfg,
        "target": target.describe(),
        "mean_ise": result.mean_ise,
        "ise_of_averaged_density": target.ise_of(result.averaged_density),
        "per_replication_ise": result.per_replication_ise,
        "kolmogorov_to_target": ks,
        "levy_to_target": levy,
        "grid": {"lo": float(grid[0]), "hi": float(grid[-1]), "points": int(grid.size)},
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_curves_csv(out / "density.csv", "x,empirical,target",
                      (grid, result.averaged_density.values, target_values))
    save_density_json(result.averaged_density, out / "density.json")
    if not args.no_eigenvalues:
        with open(out / "eigenvalues.csv", "w") as fh:
            fh.write("replication,eigenvalue\n")
            for r in range(result.replications):
                for v in result.eigenvalue_pool[r]:
                    fh.write(f"{r},{fmt(v)}\n")
    if not args.no_plot:
        from .plots import spectrum_figure

        spectrum_figure(
            result.eigenvalue_pool,
            grid,
            result.averaged_density.values,
            target_values,
            out / "spectrum.png",
            f"{cfg['family']}({cfg['param']}), n={cfg['n']}, p={cfg['p']}, R={cfg['R']}",
        )
    print(f"wrote {out / 'summary.json'}  mean_ise={fmt(result.mean_ise)}  KS={fmt(ks)}")


def _unwrap_target(target):
    return target.params if isinstance(target, _MPTarget) else target.H


def cmd_compare(args) -> None:
    options = {
        "result": args.result,
        "y": args.y,
        "sigma2": args.sigma2,
        "measure": args.measure,
        "out": args.out,
    }
    _echo("compare", options)
    result_dir = Path(args.result)
    eig_path = result_dir / "eigenvalues.csv"
    dens_path = result_dir / "density.json"
    summary_path = result_dir / "summary.json"
    for path in (eig_path, dens_path, summary_path):
        if not path.exists():
            raise ConfigError(f"--result directory is missing {path.name}")
    with open(summary_path) as fh:
        summary = json.load(fh)

    if args.measure is not None:
        y = summary["config"]["p"] / summary["config"]["n"]
        target = _MeasureTarget(load_measure_json(args.measure), y)
    elif args.y is not None and args.sigma2 is not None:
        target = _MPTarget(_check_mp_args(args.y, args.sigma2))
    else:
        raise ConfigError("need either --measure or both --y and --sigma2")

    eigs = np.loadtxt(eig_path, delimiter=",", skiprows=1, ndmin=2)[:, 1]
    pooled = SpectralDistribution(eigs)
    dens = load_density_json(dens_path)

    report = {
        "kolmogorov": kolmogorov_to_cdf(pooled, target.cdf_at(pooled.eigenvalues)),
        "levy": levy_distance(pooled, SpectralDistribution(target.quantile_atoms(QUANTILE_ATOMS))),
        "ise": target.ise_of(dens),
        "target": target.describe(),
    }
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")


def cmd_population_spectrum(args) -> None:
    if args.samples < 1:
        raise ConfigError(f"--samples must be at least 1, got {args.samples!r}")
    options = {
        "eigs": args.eigs,
        "sigma_file": args.sigma_file,
        "samples": args.samples,
        "seed": args.seed,
        "out": args.out,
    }
    _echo("population-spectrum", options)
    if args.eigs is not None:
        try:
            lam = np.array([float(v) for v in args.eigs.split(",")])
        except ValueError:
            raise ConfigError(f"--eigs must be a comma-separated number list, got {args.eigs!r}") from None
    elif args.sigma_file is not None:
        lam = eigenvalues_symmetric(read_matrix_csv(args.sigma_file)).eigenvalues
    else:
        raise ConfigError("need --eigs or --sigma-file")
    est = population_kendall_spectrum(lam, args.samples, args.seed)
    out = _outdir(args.out)
    order = np.argsort(lam)[::-1]
    _write_curves_csv(out / "population_spectrum.csv", "sigma_eig,estimate",
                      (lam[order], est[order]))
    with open(out / "population_spectrum.json", "w") as fh:
        json.dump(
            {
                "sigma_eigs": [float(v) for v in lam],
                "estimates": [float(v) for v in est],
                "samples": args.samples,
                "seed": args.seed,
            },
            fh,
            sort_keys=True,
            indent=2,
        )
        fh.write("\n")
    print(f"wrote {out / 'population_spectrum.csv'} (sum={fmt(float(est.sum()))})")


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kspec",
        description="Spectral analysis of multivariate Kendall tau matrices.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("kendall", help="Kendall tau matrix of a sample file")
    sp.add_argument("--input", required=True, help="sample matrix (CSV or KSPC binary)")
    sp.add_argument("--policy", choices=["error", "skip-pair"], default="error")
    sp.add_argument("--out", required=True)
    sp.set_defaults(handler=cmd_kendall)

    sp = sub.add_parser("eigs", help="eigenvalues and ESD of a symmetric matrix")
    sp.add_argument("--input", required=True, help="square matrix CSV")
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(handler=cmd_eigs)

    sp = sub.add_parser("mp", help="Marchenko-Pastur curves for (y, sigma2)")
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--sigma2", type=float, required=True)
    sp.add_argument("--grid", type=int, default=512)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(handler=cmd_mp)

    sp = sub.add_parser("lsd-solve", help="limit spectrum under a population measure")
    sp.add_argument("--measure", help="SpectralMeasure JSON file")
    sp.add_argument("--sigma-file", help="population covariance CSV")
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--z-grid", choices=["default"], default="default")
    sp.add_argument("--grid", type=int, default=512)
    sp.add_argument("--eps", type=float, default=1e-5)
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(handler=cmd_lsd_solve)

    sp = sub.add_parser("simulate", help="run a Monte Carlo manifest")
    sp.add_argument("manifest", help="flat TOML manifest")
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--no-plot", action="store_true")
    sp.add_argument("--no-eigenvalues", action="store_true")
    sp.set_defaults(handler=cmd_simulate)

    sp = sub.add_parser("compare", help="distances between a result and a target")
    sp.add_argument("--result", required=True, help="simulate output directory")
    sp.add_argument("--y", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--measure", help="SpectralMeasure JSON target")
    sp.add_argument("--out", help="optional JSON report path")
    sp.set_defaults(handler=cmd_compare)

    sp = sub.add_parser("population-spectrum", help="population Kendall spectrum estimate")
    sp.add_argument("--eigs", help="comma-separated population eigenvalues")
    sp.add_argument("--sigma-file", help="population covariance CSV")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(handler=cmd_population_spectrum)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        args.handler(args)
    except (ConfigError, OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except KspecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
