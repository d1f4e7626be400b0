import numpy as np
import pytest

from homflow.geometry import (
    DegenerateMetricError,
    GeometryClass,
    MetricState,
    curvature_bundle,
    flow_rhs,
    ricci_frame_sum,
    ricci_hat_frame_sum,
    ricci_hat_milnor,
    ricci_milnor,
    ricci_norm_sq,
    scalar_curvature,
    sectional_curvatures,
    specialized_rhs,
    structure_constants,
)

UNIT = MetricState(1.0, 1.0, 1.0)


def rel_diff(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)), 1.0)
    return np.max(np.abs(x - y)) / scale


def random_states(n=400, seed=7):
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(0.1, 10.0, size=(3, n))
    return MetricState(a, b, c)


@pytest.mark.parametrize(
    "geometry, expected",
    [
        (GeometryClass.SU2, (-2.0, -2.0, -2.0)),
        (GeometryClass.NIL, (-2.0, 0.0, 0.0)),
        (GeometryClass.SOL, (-2.0, 0.0, 2.0)),
        (GeometryClass.ISOM_R2, (-2.0, -2.0, 0.0)),
        (GeometryClass.SL2R, (-2.0, -2.0, 2.0)),
    ],
)
def test_structure_constants(geometry, expected):
    assert structure_constants(geometry).as_tuple() == expected


def test_metric_state_rejects_nonpositive():
    with pytest.raises(DegenerateMetricError):
        MetricState(1.0, -5.0, 3.0)
    with pytest.raises(DegenerateMetricError):
        MetricState(1.0, 0.0, 3.0)
    with pytest.raises(DegenerateMetricError):
        MetricState(1.0, float("nan"), 3.0)


def test_geometry_class_parse():
    assert GeometryClass.parse("SU2") is GeometryClass.SU2
    with pytest.raises(ValueError):
        GeometryClass.parse("torus")


@pytest.mark.parametrize(
    "geometry, expected",
    [
        (GeometryClass.SU2, (1.0, 1.0, 1.0)),
        (GeometryClass.NIL, (1.0, -3.0, 1.0)),
        (GeometryClass.SOL, (-4.0, -4.0, 4.0)),
    ],
)
def test_sectional_curvatures_at_unit_state(geometry, expected):
    got = sectional_curvatures(structure_constants(geometry), UNIT)
    assert got == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize(
    "geometry, rc, rh",
    [
        (GeometryClass.SU2, (2.0, 2.0, 2.0), (4.0, 4.0, 4.0)),
        (GeometryClass.NIL, (2.0, -2.0, -2.0), (4.0, 20.0, 20.0)),
    ],
)
def test_ricci_components_at_unit_state(geometry, rc, rh):
    sc = structure_constants(geometry)
    assert ricci_milnor(sc, UNIT) == pytest.approx(rc, abs=1e-14)
    assert ricci_hat_milnor(sc, UNIT) == pytest.approx(rh, abs=1e-14)


@pytest.mark.parametrize("geometry", list(GeometryClass))
def test_closed_forms_match_frame_sums(geometry):
    sc = structure_constants(geometry)
    m = random_states()
    assert rel_diff(ricci_milnor(sc, m), ricci_frame_sum(sc, m)) < 1e-12
    assert rel_diff(ricci_hat_milnor(sc, m), ricci_hat_frame_sum(sc, m)) < 1e-12


@pytest.mark.parametrize(
    "geometry, expected",
    [(GeometryClass.SU2, 6.0), (GeometryClass.NIL, -2.0)],
)
def test_scalar_curvature_at_unit_state(geometry, expected):
    assert scalar_curvature(structure_constants(geometry), UNIT) == pytest.approx(expected, abs=1e-14)


def test_su2_scalar_sign_change_across_a_equals_4b():
    sc = structure_constants(GeometryClass.SU2)
    assert scalar_curvature(sc, MetricState(4.0, 1.0, 1.0)) == 0.0
    assert scalar_curvature(sc, MetricState(4.5, 1.0, 1.0)) < 0.0
    assert scalar_curvature(sc, MetricState(3.5, 1.0, 1.0)) > 0.0


def test_ricci_norm_values():
    assert ricci_norm_sq(structure_constants(GeometryClass.SU2), UNIT) == pytest.approx(12.0, abs=1e-14)
    assert ricci_norm_sq(structure_constants(GeometryClass.NIL), UNIT) == pytest.approx(12.0, abs=1e-14)
    # Isom at A = B is flat: every Ricci component vanishes
    flat = MetricState(2.5, 2.5, 7.0)
    assert ricci_norm_sq(structure_constants(GeometryClass.ISOM_R2), flat) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("geometry", list(GeometryClass))
def test_scalar_and_norm_match_component_sums(geometry):
    sc = structure_constants(geometry)
    m = random_states()
    rc = ricci_milnor(sc, m)
    scal_sum = rc[0] / m.a + rc[1] / m.b + rc[2] / m.c
    norm_sum = (rc[0] / m.a) ** 2 + (rc[1] / m.b) ** 2 + (rc[2] / m.c) ** 2
    assert rel_diff(scalar_curvature(sc, m), scal_sum) < 1e-12
    assert rel_diff(ricci_norm_sq(sc, m), norm_sum) < 1e-12


def test_curvature_bundle_invariants():
    m = random_states(300, seed=11)
    for geometry in GeometryClass:
        bundle = curvature_bundle(structure_constants(geometry), m)
        scal_sum = bundle.rc1 / m.a + bundle.rc2 / m.b + bundle.rc3 / m.c
        assert rel_diff(bundle.scal, scal_sum) < 1e-12
        norm_sum = (bundle.rc1 / m.a) ** 2 + (bundle.rc2 / m.b) ** 2 + (bundle.rc3 / m.c) ** 2
        assert rel_diff(bundle.rc_norm_sq, norm_sum) < 1e-12
        # Cauchy-Schwarz on the diagonal Ricci 3-vector, with roundoff slack
        assert np.all(bundle.rc_norm_sq >= bundle.scal ** 2 / 3 - 1e-12 * np.abs(bundle.rc_norm_sq) - 1e-300)


def test_scaling_degrees():
    m = random_states(200, seed=3)
    omega = 3.7
    scaled = m.scaled(omega)
    for geometry in GeometryClass:
        sc = structure_constants(geometry)
        assert rel_diff(sectional_curvatures(sc, scaled), np.asarray(sectional_curvatures(sc, m)) / omega) < 1e-12
        assert rel_diff(ricci_milnor(sc, scaled), ricci_milnor(sc, m)) < 1e-12
        assert rel_diff(ricci_hat_milnor(sc, scaled), np.asarray(ricci_hat_milnor(sc, m)) / omega) < 1e-12
        assert rel_diff(scalar_curvature(sc, scaled), scalar_curvature(sc, m) / omega) < 1e-12
        assert rel_diff(ricci_norm_sq(sc, scaled), ricci_norm_sq(sc, m) / omega**2) < 1e-12


@pytest.mark.parametrize(
    "geometry, state, alpha, expected",
    [
        (GeometryClass.SU2, (1, 1, 1), 0.0, (-4, -4, -4)),
        (GeometryClass.SU2, (1, 1, 1), 1.0, (-8, -8, -8)),
        (GeometryClass.NIL, (1, 1, 1), 1.0, (-8, -16, -16)),
    ],
)
def test_flow_rhs_examples(geometry, state, alpha, expected):
    got = flow_rhs(structure_constants(geometry), MetricState(*state), alpha)
    assert got == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize(
    "geometry, state, alpha, expected",
    [
        (GeometryClass.SU2, (1, 1, 1), 1.0, (-8, -8, -8)),
        (GeometryClass.SOL, (1, 1, 1), 0.0, (0, 16, 0)),
        (GeometryClass.SL2R, (1, 1, 1), 0.0, (12, 12, -4)),
    ],
)
def test_specialized_rhs_examples(geometry, state, alpha, expected):
    got = specialized_rhs(geometry, MetricState(*state), alpha)
    assert got == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("geometry", list(GeometryClass))
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
def test_generic_matches_specialized(geometry, alpha):
    sc = structure_constants(geometry)
    m = random_states(500, seed=23)
    assert rel_diff(flow_rhs(sc, m, alpha), specialized_rhs(geometry, m, alpha)) < 1e-12


def test_su2_permutation_equivariance():
    sc = structure_constants(GeometryClass.SU2)
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b, c = rng.uniform(0.1, 10.0, size=3)
        base = flow_rhs(sc, MetricState(a, b, c), 1.0)
        for perm in ((1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)):
            state = [a, b, c]
            permuted = flow_rhs(sc, MetricState(*(state[i] for i in perm)), 1.0)
            assert permuted == pytest.approx(tuple(base[i] for i in perm), rel=1e-12)


def test_sol_swap_symmetry():
    sc = structure_constants(GeometryClass.SOL)
    rng = np.random.default_rng(6)
    for _ in range(50):
        a, b, c = rng.uniform(0.1, 10.0, size=3)
        da, db, dc = flow_rhs(sc, MetricState(a, b, c), -1.0)
        da2, db2, dc2 = flow_rhs(sc, MetricState(c, b, a), -1.0)
        assert (da2, db2, dc2) == pytest.approx((dc, db, da), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_su2_difference_rate_negative_for_ordered_states(alpha):
    # for A > B > C the gap A - B shrinks under the flow
    sc = structure_constants(GeometryClass.SU2)
    rng = np.random.default_rng(9)
    for _ in range(200):
        c, b, a = np.sort(rng.uniform(0.1, 10.0, size=3))
        if a - b < 1e-3 or b - c < 1e-3:
            continue
        da, db, _ = flow_rhs(sc, MetricState(a, b, c), alpha)
        assert da - db < 0.0
