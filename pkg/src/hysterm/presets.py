"""Initial data families for the simulator.

Each preset builds (u0, h_hint) on a grid.  The hint selects the relay
branch only where the initial value lies strictly inside the band; outside
it the relay state is forced by the value itself.
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .errors import ConfigError
from .grid import Grid


#: Tuned scenario dictionaries exercising each free-boundary regime:
#: an exact relay oscillator, a diffusion-flattened bump that crosses the
#: upper threshold without forming walls, a plateau whose degenerate vertex
#: seeds a stalling front, and a seeded permanent vertical wall.
BUNDLED = {
    "oscillator": {
        "name": "oscillator",
        "dim": 1,
        "extent": [1.0],
        "nx": [11],
        "dt": 1e-3,
        "T": 10.0,
        "alpha": 0.0,
        "beta": 1.0,
        "bc": {"kind": "neumann"},
        "preset": {"kind": "homogeneous", "u0": 0.5, "h0": 1},
    },
    "gaussian_bump": {
        "name": "gaussian_bump",
        "dim": 1,
        "extent": [1.0],
        "nx": [101],
        "dt": 4e-5,
        "T": 0.5,
        "alpha": 0.0,
        "beta": 1.0,
        "bc": {"kind": "neumann"},
        "snapshot_stride": 5,
        "preset": {
            "kind": "gaussian_bump",
            "base": 0.4,
            "amplitude": 0.5,
            "width": 0.15,
            "center": [0.5],
            "h0": -1,
        },
    },
    "plateau": {
        "name": "plateau",
        "dim": 1,
        "extent": [2.0],
        "nx": [201],
        "dt": 4e-5,
        "T": 0.6,
        "alpha": 0.0,
        "beta": 1.0,
        "bc": {"kind": "neumann"},
        "snapshot_stride": 5,
        "preset": {"kind": "plateau", "level": 0.05, "curvature": 0.3, "h0": 1},
    },
    "two_phase_wall": {
        "name": "two_phase_wall",
        "dim": 1,
        "extent": [1.0],
        "nx": [101],
        "dt": 4e-5,
        "T": 0.25,
        "alpha": 0.0,
        "beta": 1.0,
        "bc": {"kind": "neumann"},
        "snapshot_stride": 5,
        "preset": {"kind": "two_phase_wall", "u0": 0.5, "wall_position": 0.5},
    },
}


def bundled_config(name: str, **overrides) -> ScenarioConfig:
    """One of the tuned bundled scenarios, optionally with overrides."""
    from .config import config_from_dict

    if name not in BUNDLED:
        raise ConfigError(f"unknown bundled scenario {name!r}; known: {sorted(BUNDLED)}")
    data = {k: (dict(v) if isinstance(v, dict) else list(v) if isinstance(v, list) else v)
            for k, v in BUNDLED[name].items()}
    data.update(overrides)
    return config_from_dict(data)


def build_grid(cfg: ScenarioConfig) -> Grid:
    return Grid(
        extent=cfg.extent,
        nx=cfg.nx,
        bc_kind=cfg.bc["kind"],
        bc_value=float(cfg.bc.get("value", 0.0)),
    )


def _mesh(g: Grid):
    axes = g.axes()
    if g.dim == 1:
        return (axes[0],)
    return np.meshgrid(axes[0], axes[1], indexing="ij")


def initial_data(cfg: ScenarioConfig, g: Grid):
    """Returns (u0 field, h_hint field) for the configured preset."""
    p = cfg.preset
    kind = p["kind"]
    xs = _mesh(g)
    if kind == "homogeneous":
        u0 = np.full(g.shape, float(p["u0"]))
        hint = np.full(g.shape, int(p["h0"]), dtype=np.int8)
    elif kind == "sine":
        u0 = float(p["amplitude"]) * np.ones(g.shape)
        for x, e in zip(xs, g.extent):
            u0 = u0 * np.sin(np.pi * int(p["modes"]) * x / e)
        hint = np.full(g.shape, int(p["h0"]), dtype=np.int8)
    elif kind == "gaussian_bump":
        center = np.atleast_1d(np.asarray(p["center"], dtype=float))
        if center.size != g.dim:
            raise ConfigError("gaussian_bump center must have dim components")
        w = float(p["width"])
        if w <= 0:
            raise ConfigError("gaussian_bump width must be positive")
        d2 = sum((x - c) ** 2 for x, c in zip(xs, center))
        u0 = float(p["base"]) + float(p["amplitude"]) * np.exp(
            -d2 / (2.0 * w * w)
        )
        hint = np.full(g.shape, int(p["h0"]), dtype=np.int8)
    elif kind == "plateau":
        center = [e / 2.0 for e in g.extent]
        d2 = sum((x - c) ** 2 for x, c in zip(xs, center))
        u0 = float(p["level"]) + float(p["curvature"]) * d2
        hint = np.full(g.shape, int(p["h0"]), dtype=np.int8)
    elif kind == "two_phase_wall":
        u0 = np.full(g.shape, float(p["u0"]))
        wall = float(p["wall_position"])
        x0 = xs[0]
        hint = np.where(x0 < wall, -1, 1).astype(np.int8)
    else:  # pragma: no cover - schema already rejects this
        raise ConfigError(f"unknown preset {kind!r}")
    return u0, hint
