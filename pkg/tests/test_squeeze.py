import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softring.design import GRID_K_N_PER_MM, GRID_MASSES, DesignPoint, InfeasibleDesign, MaterialSpec, size_drone, standard_grid
from softring.elastica import invert_squeeze, solve_eta_bar, branch4_point
from softring.heatmap import ABSENT, Heatmap
from softring.rodsim.model import build_ring
from softring.rodsim.static import static_squeeze
from softring.squeeze import (
    Limiting,
    boundary_points,
    fit_full_squeeze_force,
    fit_sqt_boundary,
    initial_curvature,
    max_stress,
    redimensionalize,
    sqt_heatmap,
    squeezability,
)
from softring.statfit import FitError


def spec_at(m, k):
    return size_drone(DesignPoint.from_grid_units(m, k))


@pytest.fixture(scope="module")
def grid_heatmap():
    return sqt_heatmap(standard_grid())


def test_unstressed_when_laminated_curved(prototype):
    assert max_stress(prototype, 0.0, 1.0 / prototype.radius) == pytest.approx(0.0, abs=1e-6)


def test_flat_strip_prestress(prototype):
    expected = prototype.material.flexural_modulus * prototype.strip_thickness / (2 * prototype.radius)
    assert max_stress(prototype, 0.0, 0.0) == pytest.approx(expected, rel=1e-12)


def test_full_squeeze_stress(prototype):
    kappa = branch4_point(solve_eta_bar()).kappa_tilde / (2 * prototype.radius)
    expected = kappa * prototype.material.flexural_modulus * prototype.strip_thickness / 2
    assert max_stress(prototype, 1.0) == pytest.approx(expected, rel=1e-9)


def test_prototype_fully_squeezable(prototype):
    r = squeezability(prototype)
    assert r.sqt == 1.0 and r.limiting is Limiting.SELF_CONTACT


def test_scaled_prototype_fully_squeezable():
    assert squeezability(spec_at(0.405, 0.1)).sqt == 1.0


def test_published_boundary_point_is_squeezable():
    assert squeezability(spec_at(0.405, 0.55 * 0.405**0.35)).sqt == 1.0


def test_stiff_frame_is_stress_limited():
    r = squeezability(spec_at(0.405, 100.0))
    assert r.sqt < 1.0 and r.limiting is Limiting.STRESS_LIMIT


def test_curved_lamination_squeezes_further():
    spec = spec_at(0.405, 3.0)
    flat = squeezability(spec, initial_curvature(spec, "flat"))
    curved = squeezability(spec, initial_curvature(spec, "curved"))
    assert curved.sqt >= flat.sqt
    assert initial_curvature(spec, "curved") == pytest.approx(1.0 / spec.radius)


@settings(max_examples=60, deadline=None)
@given(m=st.floats(0.02, 3.0), k=st.floats(0.006, 100.0))
def test_result_invariants(m, k):
    try:
        spec = spec_at(m, k)
    except InfeasibleDesign:
        return
    r = squeezability(spec)
    assert 0.0 <= r.sqt <= 1.0
    assert r.sqt == pytest.approx(r.delta_R_max / (2 * spec.radius), rel=1e-12, abs=1e-15)
    assert (r.sqt == 1.0) == (r.limiting is Limiting.SELF_CONTACT)
    if r.sqt == 1.0:
        assert max_stress(spec, 1.0) <= spec.material.allowable_stress
    elif r.sqt > 0.0:
        assert r.sigma_max_at_limit == pytest.approx(spec.material.allowable_stress, rel=1e-3)


def test_redimensionalize_round_trip(prototype):
    R, EI = prototype.radius, prototype.EI
    d, f, k = redimensionalize(prototype, 0.3, 2.5, 3.1)
    assert d / (2 * R) == pytest.approx(0.3, rel=1e-15)
    assert f * R**2 / EI == pytest.approx(2.5, rel=1e-15)
    assert k * 2 * R == pytest.approx(3.1, rel=1e-15)


def test_full_squeeze_force_matches_elastica(prototype):
    r = squeezability(prototype)
    f1, _ = invert_squeeze(1.0)
    assert r.F_C_max == pytest.approx(f1 * prototype.EI / prototype.radius**2, rel=1e-9)


def test_full_squeeze_force_linear_in_k():
    a = squeezability(spec_at(0.405, 0.05)).F_C_max
    b = squeezability(spec_at(0.405, 0.1)).F_C_max
    assert b == pytest.approx(2 * a, rel=0.01)


def test_heatmap_monotone(grid_heatmap):
    for m in grid_heatmap.masses:
        _, v, _ = grid_heatmap.column(m)
        v = v[~np.isnan(v)]
        assert np.all(np.diff(v) <= 1e-12)
    for k in GRID_K_N_PER_MM:
        sel = np.isclose(grid_heatmap.k_n_per_mm, k)
        order = np.argsort(grid_heatmap.mass[sel])
        v = grid_heatmap.value[sel][order]
        v = v[~np.isnan(v)]
        assert np.all(np.diff(v) >= -1e-12)


def test_softest_column_fully_squeezable(grid_heatmap):
    sel = np.isclose(grid_heatmap.k_n_per_mm, min(GRID_K_N_PER_MM))
    assert np.all(grid_heatmap.value[sel] == 1.0)


def test_heatmap_has_both_regions(grid_heatmap):
    v = grid_heatmap.value
    assert np.any(v == 1.0) and np.any(v < 1.0)


def test_single_point_heatmap_matches_direct():
    dp = DesignPoint.from_grid_units(0.405, 3.0)
    hm = sqt_heatmap([dp])
    r = squeezability(size_drone(dp))
    assert len(hm) == 1 and hm.value[0] == r.sqt and hm.flag[0] == r.limiting.value


def test_infeasible_points_are_absent():
    hm = sqt_heatmap([DesignPoint.from_grid_units(0.02, 100.0, 8.0)])
    assert np.isnan(hm.value[0]) and hm.flag[0] == ABSENT


def test_heatmap_deterministic_under_threads():
    grid = standard_grid()[:24]
    a, b = sqt_heatmap(grid), sqt_heatmap(grid, threads=2)
    assert np.array_equal(a.value, b.value) and a.flag == b.flag


def test_heatmap_csv_round_trip(tmp_path, grid_heatmap):
    p = tmp_path / "sqt.csv"
    grid_heatmap.to_csv(p)
    back = Heatmap.from_csv(p, "sqt")
    assert np.array_equal(back.value, grid_heatmap.value, equal_nan=True)
    assert back.flag == grid_heatmap.flag


def _synthetic_heatmap(a, b):
    ms, ks, vs = [], [], []
    for m in GRID_MASSES:
        kb = a * m**b
        for k in GRID_K_N_PER_MM:
            ms.append(m)
            ks.append(k)
            vs.append(1.0 if k <= kb else 0.5)
    return Heatmap("sqt", np.array(ms), np.array(ks), np.array(vs), ("x",) * len(vs))


def test_boundary_fit_on_synthetic_map():
    hm = _synthetic_heatmap(0.55, 0.35)
    fit = fit_sqt_boundary(hm)
    # boundary points sit on grid geometric means, so recovery is within grid spacing
    ms, kb = boundary_points(hm)
    assert np.all(kb / (0.55 * ms**0.35) < GRID_K_N_PER_MM[1] / GRID_K_N_PER_MM[0])
    assert fit.exponent == pytest.approx(0.35, abs=0.1)


def test_boundary_fit_degenerate():
    hm = _synthetic_heatmap(1e3, 0.0)
    with pytest.raises(FitError):
        fit_sqt_boundary(hm)


def test_boundary_fit_published_law(grid_heatmap):
    fit = fit_sqt_boundary(grid_heatmap)
    assert fit.coefficient == pytest.approx(0.55, rel=0.15)
    assert fit.exponent == pytest.approx(0.35, abs=0.04)
    assert fit.r_squared >= 0.9


def test_force_fit_quality_and_k_exponent():
    fit = fit_full_squeeze_force(standard_grid())
    assert fit.r_squared >= 0.99
    assert fit.exponents[0] == pytest.approx(1.0, abs=0.05)


def test_force_fit_too_few_points():
    with pytest.raises(FitError):
        fit_full_squeeze_force([DesignPoint.from_grid_units(0.405, 0.1)])


@pytest.mark.parametrize("m, k", [(0.405, 0.1), (0.05, 0.02), (2.0, 1.0)])
def test_force_against_rod_oracle(m, k):
    spec = spec_at(m, k)
    r = squeezability(spec)
    curve = static_squeeze(build_ring(spec, n_nodes=80), np.linspace(0.1, r.sqt, 5), substeps=4)
    f_rod = curve.force_tilde[-1] * spec.EI / spec.radius**2
    assert f_rod == pytest.approx(r.F_C_max, rel=0.02)


def test_material_changes_boundary():
    weak = MaterialSpec(ultimate_strength=240e6)
    spec = size_drone(DesignPoint.from_grid_units(0.405, 3.0), weak)
    assert squeezability(spec).sqt <= squeezability(spec_at(0.405, 3.0)).sqt
