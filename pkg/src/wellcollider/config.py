"""Experiment configuration: parsing, validation and derived kinematics.

All quantities are dimensionless.  Positions are measured in units of
sqrt(2)*sigma (sigma being the standard deviation of the Gaussian wells),
energies in units of hbar^2/(2 m sigma^2), times in units of
2 m sigma^2/hbar and speeds in units of their ratio.  With this choice
hbar = 1, the kinetic prefactor of the one-body Hamiltonian is exactly 1/2,
and the Gaussian wells have unit width parameter.

Configuration files are flat INI-style documents; unknown sections or keys
are hard errors so that sweep outputs stay reproducible.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

BOUNDARY_PERIODIC = "periodic"
BOUNDARY_HARDWALL = "hardwall"
BOUNDARIES = (BOUNDARY_PERIODIC, BOUNDARY_HARDWALL)

CONFIG_FORMAT = "wellcollider-config-1"


class ConfigError(ValueError):
    """Raised for malformed or contradictory configuration input."""


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the 1D domain.

    For periodic boundaries the points are x_min + k*dx for k = 1..n with
    dx = (x_max - x_min)/n, i.e. the half-open interval (x_min, x_max].
    For hard walls the points are the n interior nodes of a sine basis,
    dx = (x_max - x_min)/(n + 1).
    """

    n: int = 675
    x_min: float = -7.0
    x_max: float = 7.0
    boundary: str = BOUNDARY_PERIODIC


@dataclass(frozen=True)
class RelaxSpec:
    """Imaginary-time relaxation control parameters."""

    tolerance: float = 1e-10
    max_steps: int = 40000
    dt_imag: float = 1e-3


@dataclass(frozen=True)
class SweepSpec:
    """Sweep over equally spaced inverse final speeds."""

    v_inverse_min: float = 0.1
    v_inverse_max: float = 2.5
    count: int = 49
    include_single_well: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """All physical and numerical parameters of one run.

    Exactly one of `acceleration` and `v_final_inverse` may be set; the
    other kinematic quantities follow from the initial well separation.
    """

    V0: float = 20.0
    V0_prime: float = 20.0
    alpha: float = 1.0
    mu0: float = -3.5
    mu0_prime: float = 3.5
    g: float = 0.5
    acceleration: float | None = None
    v_final_inverse: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    dt: float = 2.5e-4
    output_stride: int = 200
    relaxation: RelaxSpec = field(default_factory=RelaxSpec)
    eigensolver_count: int = 40
    sweep: SweepSpec | None = None


@dataclass(frozen=True)
class Kinematics:
    """Derived collision kinematics.

    d0 is the initial well separation, a the acceleration of each well,
    t_f the time at which the wells have passed through each other and
    restored their initial separation, v_f the well speed at t_f.
    """

    a: float
    t_f: float
    v_f: float
    d0: float


_SECTION_KEYS = {
    "wells": ("v0", "v0_prime", "alpha", "mu0", "mu0_prime", "g"),
    "kinematics": ("acceleration", "v_final_inverse"),
    "grid": ("n", "x_min", "x_max", "boundary"),
    "integration": ("dt", "output_stride"),
    "relaxation": ("tolerance", "max_steps", "dt_imag"),
    "analysis": ("eigensolver_count",),
    "sweep": ("v_inverse_min", "v_inverse_max", "count", "include_single_well"),
}


def _key_line(text: str, key: str) -> int | None:
    pattern = re.compile(r"^\s*" + re.escape(key) + r"\s*[=:]", re.IGNORECASE)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return None


def _where(text: str, key: str) -> str:
    lineno = _key_line(text, key)
    return f" (line {lineno})" if lineno is not None else ""


def _get_float(section, key: str, text: str) -> float | None:
    if key not in section:
        return None
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"value for '{key}' is not a number: {raw!r}{_where(text, key)}"
        ) from None


def _get_int(section, key: str, text: str) -> int | None:
    if key not in section:
        return None
    raw = section[key]
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(
            f"value for '{key}' is not an integer: {raw!r}{_where(text, key)}"
        ) from None
    return value


def _get_bool(section, key: str, text: str) -> bool | None:
    if key not in section:
        return None
    raw = section[key].strip().lower()
    if raw in ("true", "yes", "on", "1"):
        return True
    if raw in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"value for '{key}' is not a boolean: {raw!r}{_where(text, key)}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse a configuration document and return a validated config.

    Unknown sections or keys and contradictory kinematic input are errors.
    Omitted keys fall back to the symmetric two-well defaults.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from None

    for section_name in parser.sections():
        if section_name not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section_name}]")
        allowed = _SECTION_KEYS[section_name]
        for key in parser[section_name]:
            if key not in allowed:
                raise ConfigError(
                    f"unknown key '{key}' in section [{section_name}]{_where(text, key)}"
                )

    empty: dict[str, str] = {}
    wells = parser["wells"] if parser.has_section("wells") else empty
    kin = parser["kinematics"] if parser.has_section("kinematics") else empty
    grd = parser["grid"] if parser.has_section("grid") else empty
    intg = parser["integration"] if parser.has_section("integration") else empty
    rlx = parser["relaxation"] if parser.has_section("relaxation") else empty
    ana = parser["analysis"] if parser.has_section("analysis") else empty

    defaults = ExperimentConfig()
    v0 = _get_float(wells, "v0", text)
    if v0 is None:
        v0 = defaults.V0
    v0_prime = _get_float(wells, "v0_prime", text)
    if v0_prime is None:
        v0_prime = v0
    alpha = _get_float(wells, "alpha", text)
    if alpha is None:
        alpha = defaults.alpha
    mu0 = _get_float(wells, "mu0", text)
    if mu0 is None:
        mu0 = defaults.mu0
    mu0_prime = _get_float(wells, "mu0_prime", text)
    if mu0_prime is None:
        mu0_prime = -mu0
    g = _get_float(wells, "g", text)
    if g is None:
        g = defaults.g

    grid_defaults = GridSpec()
    n = _get_int(grd, "n", text)
    boundary = grd.get("boundary", grid_defaults.boundary).strip().lower()
    grid = GridSpec(
        n=grid_defaults.n if n is None else n,
        x_min=_get_float(grd, "x_min", text) if "x_min" in grd else grid_defaults.x_min,
        x_max=_get_float(grd, "x_max", text) if "x_max" in grd else grid_defaults.x_max,
        boundary=boundary,
    )

    relax_defaults = RelaxSpec()
    tol = _get_float(rlx, "tolerance", text)
    max_steps = _get_int(rlx, "max_steps", text)
    dt_imag = _get_float(rlx, "dt_imag", text)
    relaxation = RelaxSpec(
        tolerance=relax_defaults.tolerance if tol is None else tol,
        max_steps=relax_defaults.max_steps if max_steps is None else max_steps,
        dt_imag=relax_defaults.dt_imag if dt_imag is None else dt_imag,
    )

    sweep = None
    if parser.has_section("sweep"):
        swp = parser["sweep"]
        sweep_defaults = SweepSpec()
        vmin = _get_float(swp, "v_inverse_min", text)
        vmax = _get_float(swp, "v_inverse_max", text)
        count = _get_int(swp, "count", text)
        single = _get_bool(swp, "include_single_well", text)
        sweep = SweepSpec(
            v_inverse_min=sweep_defaults.v_inverse_min if vmin is None else vmin,
            v_inverse_max=sweep_defaults.v_inverse_max if vmax is None else vmax,
            count=sweep_defaults.count if count is None else count,
            include_single_well=bool(single) if single is not None else False,
        )

    dt = _get_float(intg, "dt", text)
    stride = _get_int(intg, "output_stride", text)
    eig_count = _get_int(ana, "eigensolver_count", text)

    config = ExperimentConfig(
        V0=v0,
        V0_prime=v0_prime,
        alpha=alpha,
        mu0=mu0,
        mu0_prime=mu0_prime,
        g=g,
        acceleration=_get_float(kin, "acceleration", text),
        v_final_inverse=_get_float(kin, "v_final_inverse", text),
        grid=grid,
        dt=defaults.dt if dt is None else dt,
        output_stride=defaults.output_stride if stride is None else stride,
        relaxation=relaxation,
        eigensolver_count=defaults.eigensolver_count if eig_count is None else eig_count,
        sweep=sweep,
    )
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    """Check every invariant; raise ConfigError naming the violated one."""

    def require(ok: bool, invariant: str) -> None:
        if not ok:
            raise ConfigError(f"invalid configuration: {invariant}")

    require(config.V0 > 0, f"V0 > 0 required, got {config.V0}")
    require(config.V0_prime >= 0, f"V0_prime >= 0 required, got {config.V0_prime}")
    require(config.alpha > 0, f"alpha > 0 required, got {config.alpha}")
    require(config.g >= 0, f"g >= 0 required (repulsive contact interaction), got {config.g}")
    require(
        config.mu0 < 0 < config.mu0_prime,
        f"mu0 < 0 < mu0_prime required, got mu0={config.mu0}, mu0_prime={config.mu0_prime}",
    )
    require(
        config.mu0 == -config.mu0_prime,
        f"symmetric initial placement mu0 = -mu0_prime required, "
        f"got mu0={config.mu0}, mu0_prime={config.mu0_prime}",
    )
    if config.acceleration is not None and config.v_final_inverse is not None:
        raise ConfigError(
            "invalid configuration: acceleration and v_final_inverse are both set; "
            "give exactly one"
        )
    if config.acceleration is not None:
        require(config.acceleration > 0, f"acceleration > 0 required, got {config.acceleration}")
    if config.v_final_inverse is not None:
        require(
            config.v_final_inverse > 0,
            f"v_final_inverse > 0 required, got {config.v_final_inverse}",
        )
    require(config.dt > 0, f"dt > 0 required, got {config.dt}")
    require(config.output_stride >= 1, f"output_stride >= 1 required, got {config.output_stride}")
    require(
        config.eigensolver_count >= 10,
        f"eigensolver_count >= 10 required, got {config.eigensolver_count}",
    )
    require(config.relaxation.tolerance > 0, "relaxation tolerance > 0 required")
    require(config.relaxation.max_steps >= 1, "relaxation max_steps >= 1 required")
    require(config.relaxation.dt_imag > 0, "relaxation dt_imag > 0 required")

    grid = config.grid
    require(grid.n >= 8, f"grid n >= 8 required, got {grid.n}")
    require(grid.x_max > grid.x_min, f"x_max > x_min required, got [{grid.x_min}, {grid.x_max}]")
    require(grid.boundary in BOUNDARIES, f"boundary must be one of {BOUNDARIES}, got {grid.boundary!r}")
    require(
        config.eigensolver_count <= grid.n,
        f"eigensolver_count <= grid n required, got {config.eigensolver_count} > {grid.n}",
    )

    if config.sweep is not None:
        swp = config.sweep
        require(swp.v_inverse_min > 0, f"sweep v_inverse_min > 0 required, got {swp.v_inverse_min}")
        require(
            swp.v_inverse_max > swp.v_inverse_min,
            "sweep v_inverse_max > v_inverse_min required",
        )
        require(swp.count >= 2, f"sweep count >= 2 required, got {swp.count}")


def derive_kinematics(config: ExperimentConfig) -> Kinematics:
    """Derive (a, t_f, v_f, d0) from whichever kinematic quantity is given.

    The wells follow mu(t) = mu0 + a t^2/2 and its mirror image, so the
    initial separation is restored (with swapped wells) at
    t_f = sqrt(2 d0/a), where the well speed is v_f = a t_f.
    """
    d0 = config.mu0_prime - config.mu0
    if config.acceleration is not None and config.v_final_inverse is not None:
        raise ConfigError("exactly one of acceleration and v_final_inverse must be set")
    if config.acceleration is not None:
        a = config.acceleration
        t_f = math.sqrt(2.0 * d0 / a)
        v_f = a * t_f
    elif config.v_final_inverse is not None:
        v_f = 1.0 / config.v_final_inverse
        a = v_f * v_f / (2.0 * d0)
        t_f = 2.0 * d0 / v_f
    else:
        raise ConfigError("no kinematics given: set acceleration or v_final_inverse")
    return Kinematics(a=a, t_f=t_f, v_f=v_f, d0=d0)


def sweep_points(spec: SweepSpec) -> np.ndarray:
    """Equally spaced inverse final speeds for a sweep."""
    return np.linspace(spec.v_inverse_min, spec.v_inverse_max, spec.count)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def canonical_text(config: ExperimentConfig) -> str:
    """Deterministic textual form of a config; also the run-directory echo."""
    out = io.StringIO()
    out.write(f"# {CONFIG_FORMAT}\n")
    out.write("[wells]\n")
    out.write(f"v0 = {_fmt(config.V0)}\n")
    out.write(f"v0_prime = {_fmt(config.V0_prime)}\n")
    out.write(f"alpha = {_fmt(config.alpha)}\n")
    out.write(f"mu0 = {_fmt(config.mu0)}\n")
    out.write(f"mu0_prime = {_fmt(config.mu0_prime)}\n")
    out.write(f"g = {_fmt(config.g)}\n")
    out.write("[kinematics]\n")
    if config.acceleration is not None:
        out.write(f"acceleration = {_fmt(config.acceleration)}\n")
    if config.v_final_inverse is not None:
        out.write(f"v_final_inverse = {_fmt(config.v_final_inverse)}\n")
    out.write("[grid]\n")
    out.write(f"n = {config.grid.n}\n")
    out.write(f"x_min = {_fmt(config.grid.x_min)}\n")
    out.write(f"x_max = {_fmt(config.grid.x_max)}\n")
    out.write(f"boundary = {config.grid.boundary}\n")
    out.write("[integration]\n")
    out.write(f"dt = {_fmt(config.dt)}\n")
    out.write(f"output_stride = {config.output_stride}\n")
    out.write("[relaxation]\n")
    out.write(f"tolerance = {_fmt(config.relaxation.tolerance)}\n")
    out.write(f"max_steps = {config.relaxation.max_steps}\n")
    out.write(f"dt_imag = {_fmt(config.relaxation.dt_imag)}\n")
    out.write("[analysis]\n")
    out.write(f"eigensolver_count = {config.eigensolver_count}\n")
    if config.sweep is not None:
        out.write("[sweep]\n")
        out.write(f"v_inverse_min = {_fmt(config.sweep.v_inverse_min)}\n")
        out.write(f"v_inverse_max = {_fmt(config.sweep.v_inverse_max)}\n")
        out.write(f"count = {config.sweep.count}\n")
        out.write(f"include_single_well = {_fmt(config.sweep.include_single_well)}\n")
    return out.getvalue()


def config_hash(config: ExperimentConfig) -> str:
    """Short stable hash identifying the physics + numerics of a config."""
    return hashlib.sha256(canonical_text(config).encode()).hexdigest()[:16]


def point_config(config: ExperimentConfig, v_inverse: float, single_well: bool) -> ExperimentConfig:
    """Resolve one sweep point into a standalone run configuration."""
    cfg = replace(
        config,
        acceleration=None,
        v_final_inverse=float(v_inverse),
        V0_prime=0.0 if single_well else config.V0_prime,
        sweep=None,
    )
    validate(cfg)
    return cfg
