"""Free boundary extraction and classification.

The relay field partitions space-time into the +1 and -1 regions; its jump
set decomposes into temporal events (down-jumps at the lower threshold,
up-jumps at the upper one) and vertical walls: spatial faces whose two
endpoints keep opposite relay states, with both field values strictly
inside the band, for a persistence window.  Jump events further split by
the size of the spatial gradient into a degenerate part (gradient below
tolerance) and a non-degenerate part.

Events are grid points, not reconstructed sub-grid surfaces; downstream
diagnostics integrate over cylinders and are insensitive to sub-grid
placement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import SpaceTimePoint, SpaceTimeSolution, gradient, laplacian

JUMP_DOWN = "JumpDown"
JUMP_UP = "JumpUp"
VERTICAL_WALL = "VerticalWall"

DEFAULT_WALL_MIN_STEPS = 3


@dataclass(frozen=True)
class FbEvent:
    location: SpaceTimePoint
    kind: str
    u_value: float
    grad_norm: float
    dt_u: float


@dataclass
class FreeBoundaryAtlas:
    gamma_alpha: list
    gamma_beta: list
    gamma_v: list
    gamma_0: list
    gamma_star: list
    omega_plus: np.ndarray
    omega_minus: np.ndarray
    level_tol: float
    grad_tol: float
    wall_min_steps: int
    params: dict = field(default_factory=dict)

    @property
    def jump_events(self) -> list:
        return self.gamma_alpha + self.gamma_beta

    def gamma_v_points(self) -> list:
        return [e.location for e in self.gamma_v]

    def event_index_set(self) -> set:
        return {e.location for e in self.gamma_alpha + self.gamma_beta + self.gamma_v}


def default_level_tol(sol: SpaceTimeSolution) -> float:
    """One explicit step overshoots a threshold by at most dt*|drift|."""
    dts = np.diff(sol.times)
    dt = float(dts.min()) if dts.size else 0.0
    dx2 = min(sol.grid.dx) ** 2
    drift = 1.0
    probe = np.unique(np.linspace(0, sol.num_snapshots - 1, 5).astype(int))
    for k in probe:
        resid = laplacian(sol.u[k], sol.grid) - sol.h[k]
        drift = max(drift, float(np.abs(resid).max()))
    return max(1e-8, 2.0 * (dt + dx2) * drift)


def default_grad_tol(sol: SpaceTimeSolution) -> float:
    """One order above the O(dx^2) derivative noise floor."""
    return 5.0 * min(sol.grid.dx)


def _grad_norm_stack(sol: SpaceTimeSolution) -> np.ndarray:
    out = np.empty_like(sol.u)
    for k in range(sol.num_snapshots):
        gvec = gradient(sol.u[k], sol.grid)
        out[k] = np.sqrt((gvec**2).sum(axis=0))
    return out


def classify(
    sol: SpaceTimeSolution,
    level_tol: float | None = None,
    grad_tol: float | None = None,
    wall_min_steps: int = DEFAULT_WALL_MIN_STEPS,
) -> FreeBoundaryAtlas:
    """Extract and classify all free-boundary events of a solution."""
    if sol.num_snapshots < 2:
        raise ValueError("classify needs at least two snapshots")
    level_tol = default_level_tol(sol) if level_tol is None else float(level_tol)
    grad_tol = default_grad_tol(sol) if grad_tol is None else float(grad_tol)

    th = sol.thresholds
    gn = _grad_norm_stack(sol)
    dts = np.diff(sol.times)

    gamma_alpha: list = []
    gamma_beta: list = []

    flips = sol.h[1:] != sol.h[:-1]
    for k, spatial in zip(*_nonzero_slices(flips)):
        for idx in spatial:
            kk = k + 1
            went_up = sol.h[kk][idx] > sol.h[k][idx]
            uval = float(sol.u[kk][idx])
            ev = FbEvent(
                location=SpaceTimePoint(int(kk), idx),
                kind=JUMP_UP if went_up else JUMP_DOWN,
                u_value=uval,
                grad_norm=float(gn[kk][idx]),
                dt_u=float((sol.u[kk][idx] - sol.u[k][idx]) / dts[k]),
            )
            (gamma_beta if went_up else gamma_alpha).append(ev)

    gamma_v = _vertical_walls(sol, gn, dts, level_tol, wall_min_steps)

    jumps = gamma_alpha + gamma_beta
    gamma_0 = [e for e in jumps if e.grad_norm <= grad_tol]
    gamma_star = [e for e in jumps if e.grad_norm > grad_tol]

    return FreeBoundaryAtlas(
        gamma_alpha=gamma_alpha,
        gamma_beta=gamma_beta,
        gamma_v=gamma_v,
        gamma_0=gamma_0,
        gamma_star=gamma_star,
        omega_plus=sol.h > 0,
        omega_minus=sol.h < 0,
        level_tol=level_tol,
        grad_tol=grad_tol,
        wall_min_steps=wall_min_steps,
        params={"alpha": th.alpha, "beta": th.beta},
    )


def _nonzero_slices(flips: np.ndarray):
    """Per-time-slice lists of flipped spatial indices."""
    ks = []
    spatials = []
    for k in range(flips.shape[0]):
        nz = np.nonzero(flips[k])
        if nz[0].size:
            ks.append(k)
            spatials.append(list(zip(*nz)))
    return ks, spatials


def _vertical_walls(sol, gn, dts, level_tol, wall_min_steps):
    """Faces with opposite relay states and both values strictly in the band,
    persisting for at least ``wall_min_steps`` consecutive snapshots."""
    th = sol.thresholds
    lo, hi = th.alpha + level_tol, th.beta - level_tol
    events = []
    K = sol.num_snapshots
    for axis in range(sol.grid.dim):
        sl_a = [slice(None)] * sol.grid.dim
        sl_b = [slice(None)] * sol.grid.dim
        sl_a[axis] = slice(None, -1)
        sl_b[axis] = slice(1, None)
        sl_a, sl_b = tuple(sl_a), tuple(sl_b)
        ha, hb = sol.h[(slice(None),) + sl_a], sol.h[(slice(None),) + sl_b]
        ua, ub = sol.u[(slice(None),) + sl_a], sol.u[(slice(None),) + sl_b]
        active = (ha != hb) & (ua > lo) & (ua < hi) & (ub > lo) & (ub < hi)
        # forward run length ending at each slice
        runs = np.zeros(active.shape, dtype=np.int64)
        runs[0] = active[0]
        for k in range(1, K):
            runs[k] = (runs[k - 1] + 1) * active[k]
        # a slice belongs to a qualifying run iff the run it sits in reaches
        # length >= wall_min_steps; propagate the run maximum backwards
        peak = runs.copy()
        for k in range(K - 2, -1, -1):
            cont = active[k] & active[k + 1]
            np.maximum(peak[k], np.where(cont, peak[k + 1], 0), out=peak[k])
        qualifying = active & (peak >= wall_min_steps)
        for k in range(K):
            faces = np.nonzero(qualifying[k])
            if faces[0].size == 0:
                continue
            for face in zip(*faces):
                for side_idx in (face, _shift(face, axis)):
                    events.append(
                        FbEvent(
                            location=SpaceTimePoint(int(k), side_idx),
                            kind=VERTICAL_WALL,
                            u_value=float(sol.u[k][side_idx]),
                            grad_norm=float(gn[k][side_idx]),
                            dt_u=float(
                                (sol.u[k][side_idx] - sol.u[k - 1][side_idx])
                                / dts[k - 1]
                            )
                            if k >= 1
                            else 0.0,
                        )
                    )
    return events


def _shift(face, axis):
    out = list(face)
    out[axis] += 1
    return tuple(out)


def separation_check(
    sol: SpaceTimeSolution, level_tol: float | None = None
) -> float:
    """Minimum parabolic distance between the two discrete level sets.

    Samples the interior region (two cells away from the spatial boundary)
    and returns the cap when either set is empty.
    """
    level_tol = default_level_tol(sol) if level_tol is None else float(level_tol)
    th = sol.thresholds
    cap = sol.r_max()
    margin = 2
    interior = np.ones(sol.grid.shape, dtype=bool)
    for axis in range(sol.grid.dim):
        sl = [slice(None)] * sol.grid.dim
        sl[axis] = slice(0, margin)
        interior[tuple(sl)] = False
        sl[axis] = slice(-margin, None)
        interior[tuple(sl)] = False

    near_a = (np.abs(sol.u - th.alpha) <= level_tol) & interior[None]
    near_b = (np.abs(sol.u - th.beta) <= level_tol) & interior[None]
    pts_a = _points_with_coords(sol, near_a)
    pts_b = _points_with_coords(sol, near_b)
    if pts_a.shape[0] == 0 or pts_b.shape[0] == 0:
        return cap

    best = cap
    chunk = max(1, int(5e7) // max(1, pts_b.shape[0]))
    for start in range(0, pts_a.shape[0], chunk):
        a = pts_a[start : start + chunk]
        lag = np.abs(a[:, :1] - pts_b[None, :, 0])
        d2 = ((a[:, None, 1:] - pts_b[None, :, 1:]) ** 2).sum(axis=-1)
        crit = np.maximum(np.sqrt(d2), np.sqrt(lag))
        best = min(best, float(crit.min()))
    return best


def _points_with_coords(sol: SpaceTimeSolution, mask: np.ndarray) -> np.ndarray:
    nz = np.nonzero(mask)
    if nz[0].size == 0:
        return np.empty((0, 1 + sol.grid.dim))
    axes = sol.grid.axes()
    cols = [sol.times[nz[0]]]
    for a in range(sol.grid.dim):
        cols.append(axes[a][nz[1 + a]])
    return np.stack(cols, axis=1)


ATLAS_COLUMNS_1D = ["t_index", "x_index", "kind", "u_value", "grad_norm", "dt_u"]
ATLAS_COLUMNS_2D = [
    "t_index", "x_index", "y_index", "kind", "u_value", "grad_norm", "dt_u"
]


def write_atlas_csv(atlas: FreeBoundaryAtlas, path, dim: int) -> None:
    cols = ATLAS_COLUMNS_1D if dim == 1 else ATLAS_COLUMNS_2D
    events = sorted(
        atlas.gamma_alpha + atlas.gamma_beta + atlas.gamma_v,
        key=lambda e: (e.location.t_index, e.location.idx, e.kind),
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for e in events:
            row = [e.location.t_index, *e.location.idx, e.kind,
                   repr(e.u_value), repr(e.grad_norm), repr(e.dt_u)]
            writer.writerow(row)
