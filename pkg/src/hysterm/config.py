"""Scenario configuration: strict JSON schema, validation, round-trip.

Unknown keys are fatal so that programmatic sweeps catch typos.  All
validation failures raise :class:`ConfigError` naming the violated
invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CFLError, ConfigError
from .grid import BC_DIRICHLET, BC_NEUMANN

PRESET_KINDS = {
    "homogeneous": {"u0", "h0"},
    "sine": {"amplitude", "modes", "h0"},
    "gaussian_bump": {"amplitude", "width", "center", "base", "h0"},
    "plateau": {"level", "curvature", "h0"},
    "two_phase_wall": {"u0", "wall_position"},
}

_PRESET_DEFAULTS = {
    "sine": {"h0": -1},
}

_TOP_KEYS = {
    "name", "dim", "extent", "nx", "dt", "T", "alpha", "beta", "bc",
    "preset", "snapshot_stride", "freeze_h", "cfl_safety", "seed",
    "output_dir",
}

_BC_KEYS = {"kind", "value"}


@dataclass
class ScenarioConfig:
    name: str
    dim: int
    extent: tuple
    nx: tuple
    dt: float
    T: float
    alpha: float
    beta: float
    bc: dict = field(default_factory=lambda: {"kind": BC_NEUMANN})
    preset: dict = field(default_factory=dict)
    snapshot_stride: int = 1
    freeze_h: bool = False
    cfl_safety: float = 0.9
    seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        self.extent = tuple(float(e) for e in self.extent)
        self.nx = tuple(int(n) for n in self.nx)
        validate_config(self)

    @property
    def dx_min(self) -> float:
        return min(e / (n - 1) for e, n in zip(self.extent, self.nx))

    @property
    def cfl_bound(self) -> float:
        return self.cfl_safety * self.dx_min**2 / (2.0 * self.dim)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "extent": list(self.extent),
            "nx": list(self.nx),
            "dt": self.dt,
            "T": self.T,
            "alpha": self.alpha,
            "beta": self.beta,
            "bc": dict(self.bc),
            "preset": dict(self.preset),
            "snapshot_stride": self.snapshot_stride,
            "freeze_h": self.freeze_h,
            "cfl_safety": self.cfl_safety,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }


def validate_config(cfg: ScenarioConfig) -> None:
    if cfg.dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {cfg.dim}")
    if len(cfg.extent) != cfg.dim or len(cfg.nx) != cfg.dim:
        raise ConfigError("extent and nx must have length dim")
    if any(n < 3 for n in cfg.nx):
        raise ConfigError(f"nx must be >= 3 per axis, got {cfg.nx}")
    if any(e <= 0 for e in cfg.extent):
        raise ConfigError(f"extent must be positive, got {cfg.extent}")
    if not cfg.alpha < cfg.beta:
        raise ConfigError(f"alpha >= beta: alpha={cfg.alpha}, beta={cfg.beta}")
    if cfg.T <= 0:
        raise ConfigError(f"T must be positive, got {cfg.T}")
    if cfg.dt <= 0:
        raise ConfigError(f"dt must be positive, got {cfg.dt}")
    if not 0 < cfg.cfl_safety <= 1:
        raise ConfigError(f"cfl_safety must be in ]0,1], got {cfg.cfl_safety}")
    if cfg.dt > cfg.cfl_bound:
        raise CFLError(
            f"CFL violated: dt={cfg.dt}, need <= "
            f"cfl_safety*dx_min^2/(2*dim) = {cfg.cfl_bound:.6g}"
        )
    if cfg.snapshot_stride < 1:
        raise ConfigError("snapshot_stride must be >= 1")
    bc_kind = cfg.bc.get("kind")
    if bc_kind not in (BC_NEUMANN, BC_DIRICHLET):
        raise ConfigError(f"unknown bc kind {bc_kind!r}")
    extra_bc = set(cfg.bc) - _BC_KEYS
    if extra_bc:
        raise ConfigError(f"unknown bc keys: {sorted(extra_bc)}")
    _validate_preset(cfg)


def _validate_preset(cfg: ScenarioConfig) -> None:
    preset = cfg.preset
    kind = preset.get("kind")
    if kind not in PRESET_KINDS:
        raise ConfigError(
            f"unknown preset {kind!r}; known: {sorted(PRESET_KINDS)}"
        )
    allowed = PRESET_KINDS[kind] | {"kind"}
    extra = set(preset) - allowed
    if extra:
        raise ConfigError(f"unknown preset keys for {kind}: {sorted(extra)}")
    defaults = _PRESET_DEFAULTS.get(kind, {})
    missing = PRESET_KINDS[kind] - set(preset) - set(defaults)
    if missing:
        raise ConfigError(f"preset {kind} missing keys: {sorted(missing)}")
    for key, val in defaults.items():
        preset.setdefault(key, val)
    inside = lambda v: cfg.alpha < v < cfg.beta
    if kind == "two_phase_wall" and not inside(preset["u0"]):
        raise ConfigError(
            "two_phase_wall u0 must lie strictly inside ]alpha, beta["
        )
    if kind == "plateau" and not inside(preset["level"]):
        raise ConfigError("plateau level must lie strictly inside ]alpha, beta[")
    if "h0" in PRESET_KINDS[kind] and preset["h0"] not in (-1, 1):
        raise ConfigError(f"preset h0 must be -1 or +1, got {preset['h0']}")


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    required = {"name", "dim", "extent", "nx", "dt", "T", "alpha", "beta",
                "preset"}
    missing = required - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    try:
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error in {path} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    return config_from_dict(data)


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
