import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softring import G
from softring.agility import (
    Constraint,
    agt_indices,
    angular_acceleration,
    deflection_metrics,
    detect_constraint,
    dodge,
    dodge_phase_time,
    dodge_profile,
    layout_comparison,
    post_transient_asd,
    rigid_twin_limits,
    vertical_step,
)
from softring.rodsim import SimTrace, build_ring


def fake_trace(spec, n=50, **channels):
    t = np.arange(n) * 1e-3
    base = {
        "pu_dist": np.full((n, 6), 2.0 * spec.prop_diameter),
        "E_el": np.zeros(n),
        "curvature_max": np.full(n, 1.0 / spec.radius),
        "curvature_min": np.full(n, 1.0 / spec.radius),
        "self_gap_min": np.full(n, spec.radius),
    }
    base.update(channels)
    return SimTrace(t, base)


@pytest.fixture(scope="module")
def layouts(prototype):
    return layout_comparison(prototype)


def test_vertical_limit_normalisation(prototype):
    assert rigid_twin_limits(prototype, 8.0)[0] == pytest.approx(7.0 * G)
    assert rigid_twin_limits(prototype, 1.0)[0] == 0.0


def test_angular_limit_closed_form(prototype):
    j11, j22, _ = prototype.inertia
    torque = (4.0 * 0.405 * G / 2.0) * prototype.radius / math.sqrt(2.0)
    _, roll, pitch = rigid_twin_limits(prototype, 4.0)
    assert roll == pytest.approx(torque / j11, rel=1e-12)
    assert pitch == pytest.approx(torque / j22, rel=1e-12)


def test_rigid_vertical_step_matches_limit(rigid_prototype):
    r = vertical_step(rigid_prototype, 4.0)
    assert r.constraint_hit is Constraint.NONE
    assert r.peak_accel == pytest.approx(3.0 * G, rel=0.01)
    assert np.allclose(r.trace["frame_det"], 1.0, atol=1e-9)


def test_rigid_dodge_matches_rigid_body_limit(rigid_prototype):
    r = dodge(rigid_prototype, 4.0, "roll")
    assert r.constraint_hit is Constraint.NONE
    assert r.peak_accel == pytest.approx(r.rigid_peak, rel=0.02)


def test_prototype_vertical_step(prototype):
    r = vertical_step(prototype, 4.0)
    assert r.constraint_hit is Constraint.NONE
    assert r.peak_accel / G == pytest.approx(3.0, rel=0.1)


def test_soft_prototype_propeller_contact(soft_prototype):
    r = vertical_step(soft_prototype, 4.0)
    assert r.constraint_hit is Constraint.PROPELLER_CONTACT
    assert r.trace["pu_dist"].min() < soft_prototype.prop_diameter


def test_prototype_roll_dodge_tracks_rigid_twin(prototype):
    r = dodge(prototype, 4.0, "roll")
    assert r.constraint_hit is Constraint.NONE
    assert r.peak_accel == pytest.approx(r.rigid_peak, rel=0.1)


def test_soft_prototype_dodge_contact(soft_prototype):
    assert dodge(soft_prototype, 4.0, "roll").constraint_hit is Constraint.PROPELLER_CONTACT


def test_zero_amplitude_dodge(prototype):
    r = dodge(prototype, 4.0, "pitch", amplitude=0.0)
    scale = rigid_twin_limits(prototype, 4.0, build_ring(prototype))[2]
    # residual trim moment of the sagged hover shape
    assert np.abs(angular_acceleration(r.trace)).max() < 1e-3 * scale
    a_cu, a_au = deflection_metrics(r.trace)
    assert np.ptp(a_cu) < 1e-6 and np.ptp(a_au) < 1e-6


def test_dodge_axis_validation(prototype):
    with pytest.raises(ValueError):
        dodge(prototype, 4.0, "yaw")


def test_dodge_profile_reaches_angle_and_stops():
    alpha = 50.0
    T = dodge_phase_time(alpha)
    t = np.linspace(0.0, 4 * T, 400001)
    acc = alpha * np.array([dodge_profile(x, T) for x in t[:-1]])
    dt = t[1] - t[0]
    rate = np.concatenate([[0.0], np.cumsum(acc) * dt])
    angle = np.concatenate([[0.0], np.cumsum(rate[:-1]) * dt])
    assert angle.max() == pytest.approx(math.radians(60.0), rel=1e-4)
    assert rate[-1] == pytest.approx(0.0, abs=1e-9 * alpha * T)
    assert angle[-1] == pytest.approx(0.0, abs=1e-4)
    assert dodge_profile(4 * T, T) == 0.0 and dodge_profile(-1e-9, T) == 0.0
    with pytest.raises(ValueError):
        dodge_phase_time(0.0)


def test_rigid_twin_index_at_reference_thrust(rigid_prototype):
    ind = agt_indices(rigid_prototype, twr_values=(8,))
    assert ind.agt_z == pytest.approx(1.0, abs=0.02)


@settings(max_examples=60, deadline=None)
@given(d=st.floats(0.05, 3.0))
def test_propeller_contact_iff_close(prototype, d):
    dist = np.full((50, 6), 2.0 * prototype.prop_diameter)
    dist[20, 3] = d * prototype.prop_diameter
    c = detect_constraint(fake_trace(prototype, pu_dist=dist), prototype, 1e-3)
    assert (c is Constraint.PROPELLER_CONTACT) == (d < 1.0)


def test_collapse_and_self_contact_flags(prototype):
    seg = 2 * math.pi * prototype.radius / 80
    tr = fake_trace(prototype, self_gap_min=np.full(50, 0.5 * seg))
    assert detect_constraint(tr, prototype, seg) is Constraint.SELF_CONTACT
    tr = fake_trace(prototype, E_el=np.full(50, 1e3))
    assert detect_constraint(tr, prototype, seg) is Constraint.COLLAPSE
    tr = fake_trace(prototype, curvature_max=np.full(50, 1e3))
    assert detect_constraint(tr, prototype, seg) is Constraint.COLLAPSE
    assert detect_constraint(fake_trace(prototype), prototype, seg) is Constraint.NONE


def test_equal_directors_have_no_deflection(prototype):
    tr = SimTrace(np.arange(5) * 1e-3, {"alpha_CU": np.zeros(5), "alpha_AU": np.zeros((5, 4))})
    a_cu, a_au = deflection_metrics(tr)
    assert np.all(a_cu == 0.0) and np.all(a_au == 0.0)


def test_euler_second_derivative():
    t = np.arange(2001) * 1e-4
    euler = np.column_stack([0.5 * 3.0 * t**2, -0.5 * 2.0 * t**2, np.zeros_like(t)])
    acc = angular_acceleration(SimTrace(t, {"euler": euler}))
    assert np.allclose(acc[2:-2], [3.0, -2.0], rtol=1e-6)


def test_post_transient_window_too_short():
    t = np.arange(100) * 1e-3
    tr = SimTrace(t, {"a_CU": np.zeros((100, 3))})
    with pytest.raises(ValueError):
        post_transient_asd(tr)


def test_centralised_mode_dominates(layouts):
    assert layouts.asd_ratio >= 5.0


def test_centralised_deflections_larger(layouts):
    assert layouts.alpha_au_ratio > 4.0
    assert layouts.alpha_cu_ratio > 4.0


def test_distributed_spectrum_is_flat(layouts):
    s = layouts.spectra["distributed"]
    sel = (s.freq >= 10.0) & (s.freq <= 40.0)
    assert s.asd[sel].max() <= 3.0 * np.median(s.asd[sel])
