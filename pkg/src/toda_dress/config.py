"""Problem configuration: JSON schema, validation, and domain-object assembly.

Complex numbers are [re, im] pairs throughout.  Validation errors carry the
dotted path of the offending field so the CLI can point at it directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blockalg import BlockStructure, GradedPair, build_canonical_c
from .dressing import PoleData
from .errors import ConfigError, TodaDressError
from .solitons import SolitonSpec
from .spectral import canonical_theta


@dataclass(frozen=True)
class PoleConfig:
    mu: complex
    nu: complex
    I: int
    J: int
    K: int
    c_I: tuple[complex, ...]
    d_J: tuple[complex, ...]
    d_K: tuple[complex, ...]


@dataclass(frozen=True)
class ProblemConfig:
    """Validated contents of a problem file."""

    p: int
    sizes: tuple[int, ...]
    poles: tuple[PoleConfig, ...]
    grid_z_minus: tuple[float, float, int]
    grid_z_plus: tuple[float, float, int]
    h_fd: float
    tolerance: float
    output_directory: str

    def block_structure(self) -> BlockStructure:
        return BlockStructure(self.sizes)

    def graded_pair(self) -> GradedPair:
        return build_canonical_c(self.block_structure())

    def soliton_spec(self) -> SolitonSpec:
        pair = self.graded_pair()
        sd = canonical_theta(pair)
        poles = PoleData(mu=tuple(pc.mu for pc in self.poles),
                         nu=tuple(pc.nu for pc in self.poles))
        return SolitonSpec(
            spectral=sd,
            poles=poles,
            index_c=tuple(pc.I for pc in self.poles),
            index_d=tuple((pc.J, pc.K) for pc in self.poles),
            coeff_c=tuple(np.array(pc.c_I, dtype=complex) for pc in self.poles),
            coeff_d=tuple((np.array(pc.d_J, dtype=complex),
                           np.array(pc.d_K, dtype=complex)) for pc in self.poles),
        )


def _require(mapping, key, path, kind):
    if not isinstance(mapping, dict):
        raise ConfigError(path or "<root>", f"expected an object, got {type(mapping).__name__}")
    if key not in mapping:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    value = mapping[key]
    where = f"{path}.{key}" if path else key
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(where, f"expected an integer, got {value!r}")
    elif kind == "number":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(where, f"expected a number, got {value!r}")
    elif kind == "list":
        if not isinstance(value, list):
            raise ConfigError(where, f"expected a list, got {value!r}")
    elif kind == "str":
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
    elif kind == "dict":
        if not isinstance(value, dict):
            raise ConfigError(where, f"expected an object, got {value!r}")
    return value


def _complex_at(value, path) -> complex:
    if (not isinstance(value, list) or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
        raise ConfigError(path, f"expected a [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def _complex_vector(value, path, length) -> tuple[complex, ...]:
    if not isinstance(value, list) or len(value) != length:
        raise ConfigError(path, f"expected a list of {length} [re, im] pairs")
    return tuple(_complex_at(v, f"{path}[{k}]") for k, v in enumerate(value))


def _grid_axis(raw, path) -> tuple[float, float, int]:
    lo = float(_require(raw, "min", path, "number"))
    hi = float(_require(raw, "max", path, "number"))
    count = _require(raw, "count", path, "int")
    if count < 1:
        raise ConfigError(f"{path}.count", "must be >= 1")
    if hi < lo:
        raise ConfigError(f"{path}.max", "must be >= min")
    return (lo, hi, count)


def parse_config(raw: dict) -> ProblemConfig:
    """Validate a decoded JSON document into a ProblemConfig."""
    bs_raw = _require(raw, "block_structure", "", "dict")
    p = _require(bs_raw, "p", "block_structure", "int")
    sizes_raw = _require(bs_raw, "sizes", "block_structure", "list")
    if p < 2:
        raise ConfigError("block_structure.p", "must be >= 2")
    if len(sizes_raw) != p:
        raise ConfigError("block_structure.sizes", f"expected {p} entries, got {len(sizes_raw)}")
    sizes = []
    for k, s in enumerate(sizes_raw):
        if not isinstance(s, int) or isinstance(s, bool) or s < 1:
            raise ConfigError(f"block_structure.sizes[{k}]", f"expected a positive integer, got {s!r}")
        sizes.append(s)
    n_star = min(sizes)

    poles_raw = _require(raw, "poles", "", "list")
    if not poles_raw:
        raise ConfigError("poles", "need at least one pole entry")
    poles = []
    for k, entry in enumerate(poles_raw):
        path = f"poles[{k}]"
        if not isinstance(entry, dict):
            raise ConfigError(path, "expected an object")
        mu = _complex_at(_require(entry, "mu", path, "list"), f"{path}.mu")
        nu = _complex_at(_require(entry, "nu", path, "list"), f"{path}.nu")
        if mu == 0 or nu == 0:
            raise ConfigError(f"{path}.mu" if mu == 0 else f"{path}.nu", "must be nonzero")
        idx = {}
        for name in ("I", "J", "K"):
            v = _require(entry, name, path, "int")
            if not 1 <= v <= p:
                raise ConfigError(f"{path}.{name}", f"must be in 1..{p}")
            idx[name] = v
        if idx["J"] == idx["K"]:
            raise ConfigError(f"{path}.K", "J and K must differ")
        c_I = _complex_vector(_require(entry, "c_I", path, "list"), f"{path}.c_I", n_star)
        d_J = _complex_vector(_require(entry, "d_J", path, "list"), f"{path}.d_J", n_star)
        d_K = _complex_vector(_require(entry, "d_K", path, "list"), f"{path}.d_K", n_star)
        poles.append(PoleConfig(mu=mu, nu=nu, I=idx["I"], J=idx["J"], K=idx["K"],
                                c_I=c_I, d_J=d_J, d_K=d_K))

    grid_raw = _require(raw, "grid", "", "dict")
    z_minus = _grid_axis(_require(grid_raw, "z_minus", "grid", "dict"), "grid.z_minus")
    z_plus = _grid_axis(_require(grid_raw, "z_plus", "grid", "dict"), "grid.z_plus")

    ver_raw = raw.get("verification", {})
    if not isinstance(ver_raw, dict):
        raise ConfigError("verification", "expected an object")
    h_fd = float(ver_raw.get("h_fd", 1e-4))
    tolerance = float(ver_raw.get("tolerance", 1e-5))
    if h_fd <= 0:
        raise ConfigError("verification.h_fd", "must be positive")
    if tolerance <= 0:
        raise ConfigError("verification.tolerance", "must be positive")

    out_raw = raw.get("output", {})
    if not isinstance(out_raw, dict):
        raise ConfigError("output", "expected an object")
    out_dir = out_raw.get("directory", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("output.directory", "expected a string")

    config = ProblemConfig(
        p=p, sizes=tuple(sizes), poles=tuple(poles),
        grid_z_minus=z_minus, grid_z_plus=z_plus,
        h_fd=h_fd, tolerance=tolerance, output_directory=out_dir,
    )
    # surface domain-level rejections (pole collisions, vanishing pairings)
    # with a config-file address
    try:
        config.soliton_spec()
    except TodaDressError as exc:
        raise ConfigError("poles", str(exc)) from exc
    return config


def load_config(path: str | Path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", f"invalid JSON: {exc.msg}") from exc
    return parse_config(raw)


def config_to_dict(config: ProblemConfig) -> dict:
    """Round-trippable JSON form (full float precision)."""
    return {
        "block_structure": {"p": config.p, "sizes": list(config.sizes)},
        "poles": [
            {
                "mu": [pc.mu.real, pc.mu.imag],
                "nu": [pc.nu.real, pc.nu.imag],
                "I": pc.I, "J": pc.J, "K": pc.K,
                "c_I": [[v.real, v.imag] for v in pc.c_I],
                "d_J": [[v.real, v.imag] for v in pc.d_J],
                "d_K": [[v.real, v.imag] for v in pc.d_K],
            }
            for pc in config.poles
        ],
        "grid": {
            "z_minus": {"min": config.grid_z_minus[0], "max": config.grid_z_minus[1],
                        "count": config.grid_z_minus[2]},
            "z_plus": {"min": config.grid_z_plus[0], "max": config.grid_z_plus[1],
                       "count": config.grid_z_plus[2]},
        },
        "verification": {"h_fd": config.h_fd, "tolerance": config.tolerance},
        "output": {"directory": config.output_directory},
    }
