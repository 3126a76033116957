"""File formats: sample matrices (CSV and the KSPC binary layout), curve
CSVs, measure/density JSON, and experiment manifests.

All floats serialize as the shortest round-trip decimal of the 64-bit
value, so write -> read -> write is byte-stable.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .lsd import SpectralMeasure
from .matrix import SampleMatrix
from .spectra import SmoothedDensity, SpectralDistribution

__all__ = [
    "ConfigError",
    "fmt",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_kspc",
    "write_kspc",
    "load_sample_matrix",
    "save_esd_csv",
    "load_esd_csv",
    "save_esd_json",
    "load_esd_json",
    "save_density_csv",
    "load_density_csv",
    "save_density_json",
    "load_density_json",
    "save_measure_json",
    "load_measure_json",
    "load_manifest",
]

KSPC_MAGIC = b"KSPC"

MANIFEST_KEYS = {"family", "param", "n", "p", "R", "h", "seed", "sigma_file", "target"}
MANIFEST_REQUIRED = {"family", "param", "n", "p"}
MANIFEST_DEFAULTS = {"R": 500, "h": 0.02, "seed": 0, "sigma_file": None, "target": "mp"}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


def fmt(x: float) -> str:
    """Shortest decimal that round-trips the 64-bit float."""
    return repr(float(x))


def write_matrix_csv(M, path) -> None:
    """Headerless CSV, one row per line."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as f:
        for row in M:
            f.write(",".join(fmt(v) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return M


def write_kspc(data, path) -> None:
    """Binary sample block: magic "KSPC", u32 p, u32 n, f64 column-major."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    p, n = data.shape
    with open(path, "wb") as f:
        f.write(KSPC_MAGIC)
        f.write(struct.pack("<II", p, n))
        f.write(np.asfortranarray(data).tobytes(order="F"))


def read_kspc(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != KSPC_MAGIC:
        raise ConfigError(f"{path}: bad magic {raw[:4]!r}, expected {KSPC_MAGIC!r}")
    p, n = struct.unpack("<II", raw[4:12])
    body = raw[12:]
    if len(body) != 8 * p * n:
        raise ConfigError(f"{path}: payload holds {len(body)} bytes, expected {8 * p * n}")
    flat = np.frombuffer(body, dtype="<f8")
    return flat.reshape((p, n), order="F").copy()


def load_sample_matrix(path) -> SampleMatrix:
    """Sample block from CSV or KSPC binary, sniffed by magic bytes."""
    with open(path, "rb") as f:
        head = f.read(4)
    if head == KSPC_MAGIC:
        return SampleMatrix(read_kspc(path))
    return SampleMatrix(read_matrix_csv(path))


def _write_xy_csv(path, header: str, cols) -> None:
    rows = zip(*cols)
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")


def _read_csv_columns(path, expected_header: str) -> np.ndarray:
    with open(path) as f:
        header = f.readline().strip()
    if header != expected_header:
        raise ConfigError(f"{path}: header {header!r}, expected {expected_header!r}")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def save_esd_csv(dist: SpectralDistribution, path) -> None:
    """Columns x,value: sorted eigenvalues with the ESD at each."""
    _write_xy_csv(path, "x,value", (dist.eigenvalues, dist.cdf(dist.eigenvalues)))


def load_esd_csv(path) -> SpectralDistribution:
    return SpectralDistribution(_read_csv_columns(path, "x,value")[:, 0])


def save_esd_json(dist: SpectralDistribution, path) -> None:
    with open(path, "w") as f:
        json.dump({"eigenvalues": [float(v) for v in dist.eigenvalues]}, f)
        f.write("\n")


def load_esd_json(path) -> SpectralDistribution:
    with open(path) as f:
        return SpectralDistribution(json.load(f)["eigenvalues"])


def save_density_csv(dens: SmoothedDensity, path) -> None:
    _write_xy_csv(path, "x,value", (dens.grid, dens.values))


def load_density_csv(path, bandwidth: float) -> SmoothedDensity:
    cols = _read_csv_columns(path, "x,value")
    return SmoothedDensity(grid=cols[:, 0], values=cols[:, 1], bandwidth=bandwidth)


def save_density_json(dens: SmoothedDensity, path) -> None:
    obj = {
        "grid": [float(v) for v in dens.grid],
        "values": [float(v) for v in dens.values],
        "bandwidth": float(dens.bandwidth),
    }
    with open(path, "w") as f:
        json.dump(obj, f)
        f.write("\n")


def load_density_json(path) -> SmoothedDensity:
    with open(path) as f:
        obj = json.load(f)
    return SmoothedDensity(
        grid=obj["grid"], values=obj["values"], bandwidth=obj["bandwidth"]
    )


def save_measure_json(H: SpectralMeasure, path) -> None:
    with open(path, "w") as f:
        json.dump({"atoms": [[float(t), float(w)] for t, w in H.atoms]}, f)
        f.write("\n")


def load_measure_json(path) -> SpectralMeasure:
    with open(path) as f:
        obj = json.load(f)
    if "atoms" not in obj:
        raise ConfigError(f"{path}: measure JSON needs an 'atoms' key")
    return SpectralMeasure(obj["atoms"])


def load_manifest(path) -> dict:
    """Flat TOML manifest for the simulate subcommand.

    Unknown keys are rejected by name; defaults are filled in for R, h,
    seed, sigma_file, and target.
    """
    with open(path, "rb") as f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
    for key in raw:
        if key not in MANIFEST_KEYS:
            raise ConfigError(f"unknown manifest key: {key!r}")
    for key in MANIFEST_REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing manifest key: {key!r}")
    cfg = dict(MANIFEST_DEFAULTS)
    cfg.update(raw)
    for key, kind in (("n", int), ("p", int), ("R", int), ("seed", int)):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"manifest key {key!r} must be an integer")
        cfg[key] = kind(cfg[key])
    for key in ("param", "h"):
        if not isinstance(cfg[key], (int, float)) or isinstance(cfg[key], bool):
            raise ConfigError(f"manifest key {key!r} must be a number")
        cfg[key] = float(cfg[key])
    if cfg["family"] not in ("normal", "uniform"):
        raise ConfigError(f"manifest key 'family' must be 'normal' or 'uniform', got {cfg['family']!r}")
    if cfg["sigma_file"] is not None and not isinstance(cfg["sigma_file"], str):
        raise ConfigError("manifest key 'sigma_file' must be a path string")
    if not isinstance(cfg["target"], str):
        raise ConfigError("manifest key 'target' must be a string")
    return cfg
