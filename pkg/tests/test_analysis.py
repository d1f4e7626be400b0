import numpy as np
import pytest

from homflow import (
    FlowParams,
    IntegratorControls,
    NoBoundaryError,
    anisotropy_metrics,
    asymptotic_degeneracy,
    classify_outcome,
    critical_curve,
    curvature_series,
    find_fixed_points,
    get_system,
    integrate,
    is_isotropized,
    phase_grid,
)


def test_berger_fixed_points_alpha_minus_one():
    system = get_system("berger")
    points = find_fixed_points(system, -1.0, [[0, 3], [0, 5]], n_seeds=9)
    states = sorted(tuple(np.round(p.state, 6)) for p in points)
    assert states == [(0.0, 4.0), (1.0, 1.0), (np.round(16 / 9, 6), np.round(4 / 3, 6))]
    for p in points:
        assert p.residual_norm < 1e-10
    by_state = {tuple(np.round(p.state, 3)): p for p in points}
    assert by_state[(1.778, 1.333)].classification == "attracting"


def test_sl2r_special_fixed_point():
    system = get_system("sl2r-special")
    points = find_fixed_points(system, 1.0, [[0, 6], [0, 3]], n_seeds=9)
    assert len(points) == 1
    assert points[0].state == pytest.approx((4.0, 0.0), abs=1e-8)
    assert points[0].residual_norm < 1e-10


def test_berger_ricci_flow_has_no_interior_fixed_points():
    system = get_system("berger")
    points = find_fixed_points(system, 0.0, [[0.05, 3], [0.05, 5]], n_seeds=9)
    assert points == []
    # brute-force scan oracle: the flow never stalls on the positive box
    grid = np.linspace(0.1, 4.0, 25)
    worst = min(
        np.max(np.abs(system.rhs(np.array([a, b]), 0.0))) for a in grid for b in grid
    )
    assert worst > 0.5


def test_phase_grid_berger_alpha_minus_one_basins():
    system = get_system("berger")
    fps = find_fixed_points(system, -1.0, [[0, 3], [0, 5]], n_seeds=9)
    grid = phase_grid(
        system,
        -1.0,
        [[0.2, 3], [0.2, 4.8]],
        4,
        t_max=220.0,
        fixed_points=fps,
        match_radius=0.12,
        backward_runs=False,
    )
    assert not grid.errors
    for seed, label in zip(grid.seeds, grid.labels):
        a, b = seed
        if a > b + 0.3:
            assert label == "fixed:(1.778,1.333)", (seed, label)
        elif b > a + 0.3:
            assert label == "fixed:(0,4)", (seed, label)


def test_phase_grid_nil_special_all_toward_large_b():
    system = get_system("nil-special")
    for alpha in (0.0, -1.0):
        grid = phase_grid(system, alpha, [[0.5, 3], [0.5, 3]], 3, t_max=40.0, backward_runs=False)
        assert set(grid.labels) == {"A-B+"}


def test_phase_grid_rejects_tiny_lattice():
    with pytest.raises(ValueError):
        phase_grid(get_system("berger"), 0.0, [[0.5, 2], [0.5, 2]], 1)


def test_classify_outcome_collapse_label():
    system = get_system("nil-special")
    traj = integrate(system, (7, 3), FlowParams(1.0, 1.0))
    assert traj.terminal == "singular"
    assert classify_outcome(traj) == "collapse:B"


def test_critical_curve_nil_matches_xi_equals_three():
    system = get_system("nil-special")
    curve = critical_curve(system, 1.0, [[0.5, 2.5], [0.5, 3.0]], n_lines=7, t_max=12.0)
    assert len(curve) == 7
    xi = curve[:, 1] ** 2 / curve[:, 0]
    assert np.max(np.abs(xi - 3.0)) < 1e-3


def test_critical_curve_sol_is_horizontal_line():
    system = get_system("sol-special")
    curve = critical_curve(system, 1.0, [[0.5, 2.0], [2.0, 6.0]], n_lines=5, t_max=8.0)
    assert np.max(np.abs(curve[:, 1] - 4.0)) < 1e-3


def test_critical_curve_absent_for_sol_ricci_flow():
    system = get_system("sol-special")
    with pytest.raises(NoBoundaryError):
        critical_curve(system, 0.0, [[0.5, 2.0], [2.0, 6.0]], n_lines=4, t_max=5.0)


def test_curvature_series_round_su2():
    system = get_system("su2")
    traj = integrate(system, (2, 2, 2), FlowParams(0.0, 0.4), n_samples=50)
    series = curvature_series(traj)
    # round metric: Scal = 6/A, increasing as the sphere shrinks
    assert np.allclose(series[:, 1], 6.0 / traj.states[:, 0], rtol=1e-10)
    assert np.all(np.diff(series[:, 1]) > 0)


def test_curvature_series_nil_negative_approaching_zero():
    system = get_system("nil")
    traj = integrate(system, (7, 5, 3), FlowParams(0.0, 60.0), n_samples=200)
    series = curvature_series(traj)
    assert np.all(series[:, 1] < 0)
    assert np.all(np.diff(series[:, 1]) > 0)
    assert abs(series[-1, 1]) < 0.05 * abs(series[0, 1])


def test_anisotropy_berger_isotropizes_under_ricci_flow():
    system = get_system("berger")
    traj = integrate(system, (7, 5), FlowParams(0.0, 3.0))
    assert traj.terminal == "singular"
    assert is_isotropized(traj, tol=1e-2)


def test_anisotropy_berger_alpha_minus_one_does_not_isotropize():
    system = get_system("berger")
    controls = IntegratorControls(fixed_point_tol=1e-11)
    traj = integrate(system, (7, 5), FlowParams(-1.0, 80.0, controls=controls))
    metrics = anisotropy_metrics(traj)
    assert abs(metrics[-1, 1] - 4.0 / 3.0) < 1e-2
    assert not is_isotropized(traj, tol=1e-2)


def test_anisotropy_isom_fixed_line_stays_isotropic_ratio():
    system = get_system("isom-eta")
    traj = integrate(system, (2.0, 1.0, 3.0), FlowParams(1.0, 1.0), n_samples=30)
    metrics = anisotropy_metrics(traj)
    assert np.max(np.abs(metrics[:, 1] - 1.0)) < 1e-12  # A/B pinned to 1 on eta = 1


def test_asymptotic_degeneracies():
    nil = integrate(get_system("nil"), (7, 5, 3), FlowParams(0.0, 120.0))
    assert asymptotic_degeneracy(nil) == "pancake"
    sol = integrate(get_system("sol"), (7, 5, 3), FlowParams(0.0, 120.0))
    assert asymptotic_degeneracy(sol) == "cigar"
