"""Free-boundary extraction: jump events, walls, separation, serialization."""

import numpy as np
import pytest

from hysterm.config import config_from_dict
from hysterm.free_boundary import (
    FreeBoundaryAtlas,
    classify,
    default_grad_tol,
    default_level_tol,
    separation_check,
    write_atlas_csv,
)
from hysterm.grid import Grid, SpaceTimeSolution
from hysterm.relay import Thresholds
from hysterm.solver import run


def small_config(**overrides):
    data = {
        "name": "fb",
        "dim": 1,
        "extent": [1.0],
        "nx": [11],
        "dt": 1e-3,
        "T": 5.0,
        "alpha": 0.0,
        "beta": 1.0,
        "bc": {"kind": "neumann"},
        "preset": {"kind": "homogeneous", "u0": 0.5, "h0": 1},
    }
    data.update(overrides)
    return config_from_dict(data)


class TestOscillatorAtlas:
    def test_slab_events_all_degenerate(self, oscillator_sol, oscillator_atlas):
        at = oscillator_atlas
        n_space = oscillator_sol.grid.nx[0]
        assert len(at.gamma_alpha) > 0 and len(at.gamma_alpha) % n_space == 0
        assert len(at.gamma_beta) > 0 and len(at.gamma_beta) % n_space == 0
        assert len(at.gamma_v) == 0
        assert len(at.gamma_star) == 0
        assert set(at.gamma_0) == set(at.gamma_alpha + at.gamma_beta)

    def test_event_levels(self, oscillator_atlas):
        at = oscillator_atlas
        for e in at.gamma_alpha:
            assert abs(e.u_value - 0.0) <= at.level_tol
        for e in at.gamma_beta:
            assert abs(e.u_value - 1.0) <= at.level_tol

    def test_down_jump_crossing_witness(self, oscillator_sol, oscillator_atlas):
        sol, at = oscillator_sol, oscillator_atlas
        for e in at.gamma_alpha:
            k, idx = e.location
            assert e.u_value <= 0.0 + at.level_tol
            assert sol.u[k - 1][idx] > 0.0

    def test_alternation_at_fixed_point(self, oscillator_atlas):
        at = oscillator_atlas
        per_point = {}
        for e in at.gamma_alpha + at.gamma_beta:
            per_point.setdefault(e.location.idx, []).append(
                (e.location.t_index, e.kind)
            )
        for evs in per_point.values():
            evs.sort()
            kinds = [kind for _, kind in evs]
            assert all(a != b for a, b in zip(kinds, kinds[1:]))

    def test_omega_masks_partition(self, oscillator_atlas):
        at = oscillator_atlas
        assert not (at.omega_plus & at.omega_minus).any()
        assert (at.omega_plus | at.omega_minus).all()


class TestNoBoundaryCases:
    def test_no_crossing_empty_atlas(self):
        cfg = small_config(
            alpha=-10.0,
            T=2.0,
            preset={"kind": "homogeneous", "u0": 0.5, "h0": 1},
        )
        sol = run(cfg)
        at = classify(sol)
        assert not at.gamma_alpha and not at.gamma_beta and not at.gamma_v
        assert at.omega_plus.all()

    def test_single_snapshot_rejected(self):
        g = Grid(extent=(1.0,), nx=(5,))
        sol = SpaceTimeSolution(
            grid=g,
            thresholds=Thresholds(0, 1),
            times=np.array([0.0]),
            u=np.zeros((1,) + g.shape),
            h=np.full((1,) + g.shape, -1, dtype=np.int8),
        )
        with pytest.raises(ValueError):
            classify(sol)


class TestVerticalWalls:
    def test_two_phase_wall_detected_at_midline(self, wall_sol, wall_atlas):
        at = wall_atlas
        assert len(at.gamma_v) > 0
        xs = {e.location.idx[0] for e in at.gamma_v}
        mid = wall_sol.grid.nx[0] // 2
        assert xs <= {mid - 1, mid, mid + 1}
        for e in at.gamma_v:
            assert at.level_tol < e.u_value < 1.0 - at.level_tol

    def test_wall_values_strictly_inside_band(self, wall_atlas):
        for e in wall_atlas.gamma_v:
            assert 0.0 + wall_atlas.level_tol < e.u_value < 1.0 - wall_atlas.level_tol

    def test_short_lived_interface_not_a_wall(self):
        """An h-interface that a sweeping front erases within two snapshots
        stays out of gamma_v."""
        g = Grid(extent=(1.0,), nx=(11,))
        times = np.arange(0, 0.011, 1e-3)
        K = times.size
        u = np.full((K,) + g.shape, 0.5)
        h = np.full((K,) + g.shape, -1, dtype=np.int8)
        h[3, :5] = 1  # one-snapshot interface at face (4,5)
        sol = SpaceTimeSolution(
            grid=g, thresholds=Thresholds(0, 1), times=times, u=u, h=h
        )
        at = classify(sol, level_tol=1e-3, wall_min_steps=3)
        assert all(e.kind != "VerticalWall" for e in at.gamma_v)

    def test_persistent_interface_is_a_wall(self):
        g = Grid(extent=(1.0,), nx=(11,))
        times = np.arange(0, 0.011, 1e-3)
        K = times.size
        u = np.full((K,) + g.shape, 0.5)
        h = np.full((K,) + g.shape, -1, dtype=np.int8)
        h[:, :5] = 1
        sol = SpaceTimeSolution(
            grid=g, thresholds=Thresholds(0, 1), times=times, u=u, h=h
        )
        at = classify(sol, level_tol=1e-3, wall_min_steps=3)
        assert len(at.gamma_v) == 2 * K  # both endpoints of one face, all slices
        assert {e.location.idx[0] for e in at.gamma_v} == {4, 5}


class TestSeparation:
    def test_flat_solution_gives_cap(self):
        g = Grid(extent=(1.0,), nx=(11,))
        times = np.arange(0, 0.011, 1e-3)
        u = np.full((times.size,) + g.shape, 0.5)
        sol = SpaceTimeSolution(
            grid=g,
            thresholds=Thresholds(0, 1),
            times=times,
            u=u,
            h=np.full(u.shape, -1, dtype=np.int8),
        )
        assert separation_check(sol, level_tol=1e-6) == sol.r_max()

    def test_oscillator_separation_near_sqrt_band(self, oscillator_sol):
        sep = separation_check(oscillator_sol)
        assert 0.9 <= sep <= 1.0

    def test_consecutive_sweep_gives_sqrt_dt(self):
        dt = 1e-4
        g = Grid(extent=(1.0,), nx=(11,))
        times = np.array([0.0, dt])
        u = np.stack([np.full(g.shape, 0.0), np.full(g.shape, 1.0)])
        h = np.stack(
            [np.full(g.shape, -1, dtype=np.int8), np.full(g.shape, 1, dtype=np.int8)]
        )
        sol = SpaceTimeSolution(
            grid=g, thresholds=Thresholds(0, 1), times=times, u=u, h=h
        )
        sep = separation_check(sol, level_tol=1e-9)
        assert sep == pytest.approx(np.sqrt(dt), abs=1e-12)


class TestRefinement:
    @pytest.mark.parametrize("dt", [1e-3, 5e-4, 2.5e-4])
    def test_event_times_converge_first_order(self, dt):
        """First down-switch of the oscillator is at t=0.5 exactly."""
        cfg = small_config(dt=dt, T=1.0)
        sol = run(cfg)
        at = classify(sol)
        t_first = min(sol.times[e.location.t_index] for e in at.gamma_alpha)
        assert abs(t_first - 0.5) <= dt + 1e-12


class TestDefaultsAndSerialization:
    def test_default_tolerances(self, oscillator_sol):
        lt = default_level_tol(oscillator_sol)
        gt = default_grad_tol(oscillator_sol)
        assert lt == pytest.approx(2.0 * (1e-3 + 0.1**2), rel=1e-9)
        assert gt == pytest.approx(0.5)

    def test_atlas_csv_columns_and_determinism(self, oscillator_atlas, tmp_path):
        p1, p2 = tmp_path / "a1.csv", tmp_path / "a2.csv"
        write_atlas_csv(oscillator_atlas, p1, dim=1)
        write_atlas_csv(oscillator_atlas, p2, dim=1)
        lines = p1.read_text().splitlines()
        assert lines[0] == "t_index,x_index,kind,u_value,grad_norm,dt_u"
        assert p1.read_bytes() == p2.read_bytes()
        assert len(lines) == 1 + len(oscillator_atlas.gamma_0) + len(
            oscillator_atlas.gamma_star
        )

    def test_classify_deterministic(self, oscillator_sol):
        a1 = classify(oscillator_sol)
        a2 = classify(oscillator_sol)
        assert a1.gamma_alpha == a2.gamma_alpha
        assert a1.gamma_v == a2.gamma_v
