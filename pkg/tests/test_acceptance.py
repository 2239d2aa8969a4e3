"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
values and runtime; the lines are repeated in the terminal summary.
"""

import time

import numpy as np

from softring.agility import Constraint, agt_indices, layout_comparison, vertical_step
from softring.collision import count_acceleration_peaks, frontal_collision, gap_traversal, published_zscores, res_heatmap
from softring.design import GRID_K_N_PER_MM, DesignPoint, prototype_spec, size_drone, standard_grid
from softring.elastica import _branch4, characteristic_curves, ktilde_check, solve_eta_bar
from softring.rodsim import PlanarScenario, build_ring, simulate, static_squeeze
from softring.squeeze import fit_full_squeeze_force, fit_sqt_boundary, sqt_heatmap
from softring.statfit import nmae

RESULTS: list[str] = []

FORCE_NORM = 42.48
CURVATURE_NORM = 8.99


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def report(capsys, n: int, checks: dict, elapsed: float, limit: float, detail: str) -> None:
    checks = {**checks, f"runtime < {limit:g} s": elapsed < limit}
    ok = all(checks.values())
    failed = [name for name, v in checks.items() if not v]
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f} s]"
    if failed:
        line += f"  failed: {'; '.join(failed)}"
    RESULTS.append(line)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


def test_criterion_01_stiffness_constant(capsys):
    with Clock() as c:
        k = ktilde_check()
    report(capsys, 1, {"k~ within 1% of 11.1": abs(k / 11.1 - 1) <= 0.01}, c.elapsed, 1.0, f"k~ = {k:.4f}")


def test_criterion_02_full_squeeze_modulus(capsys):
    with Clock() as c:
        eta = solve_eta_bar()
        resid = abs(float(_branch4(eta)[0]) - 1.0)
    report(capsys, 2, {"eta in [0.850, 0.860]": 0.850 <= eta <= 0.860, "residual <= 1e-10": resid <= 1e-10},
           c.elapsed, 1.0, f"eta = {eta:.7f}, residual = {resid:.1e}")


def test_criterion_03_curve_endpoints(capsys):
    with Clock() as c:
        force, kappa = characteristic_curves()
        f2, k2 = force.force_tilde[-1], kappa.kappa_tilde[-1]
    report(capsys, 3, {"F~(2) within 2%": abs(f2 / FORCE_NORM - 1) <= 0.02,
                       "kappa~(2) within 2%": abs(k2 / CURVATURE_NORM - 1) <= 0.02},
           c.elapsed, 5.0, f"F~(2) = {f2:.3f}, kappa~(2) = {k2:.3f}")


def test_criterion_04_rod_cross_check(capsys, prototype):
    with Clock() as c:
        force, kappa = characteristic_curves(0.01)
        sel = force.delta_tilde <= 1.0
        d = force.delta_tilde[sel]
        rod = static_squeeze(build_ring(prototype, n_nodes=80), d[1:], substeps=2)
        ef = nmae(np.concatenate([[0.0], rod.force_tilde]), force.force_tilde[sel], FORCE_NORM)
        ek = nmae(np.concatenate([[2.0], rod.kappa_tilde]), kappa.kappa_tilde[sel], CURVATURE_NORM)
    report(capsys, 4, {"force nMAE <= 1%": ef <= 0.01, "curvature nMAE <= 1%": ek <= 0.01},
           c.elapsed, 300.0, f"nMAE force = {ef:.4%}, curvature = {ek:.4%}")


def test_criterion_05_boundary_fit(capsys):
    with Clock() as c:
        fit = fit_sqt_boundary(sqt_heatmap(standard_grid()))
    a, b, r2 = fit.coefficient, fit.exponents[0], fit.r_squared
    report(capsys, 5, {"coefficient 0.55 +- 15%": abs(a / 0.55 - 1) <= 0.15,
                       "exponent 0.35 +- 0.04": abs(b - 0.35) <= 0.04, "R^2 >= 0.9": r2 >= 0.9},
           c.elapsed, 60.0, f"k_b = {a:.3f} M^{b:.3f}, R^2 = {r2:.3f}")


def test_criterion_06_force_law(capsys):
    with Clock() as c:
        fit = fit_full_squeeze_force(standard_grid())
    a, (p, q), r2 = fit.coefficient, fit.exponents, fit.r_squared
    report(capsys, 6, {"coefficient 8.67 +- 15%": abs(a / 8.67 - 1) <= 0.15,
                       "k exponent 1 +- 0.05": abs(p - 1) <= 0.05, "M exponent 0.35 +- 0.05": abs(q - 0.35) <= 0.05,
                       "R^2 >= 0.99": r2 >= 0.99},
           c.elapsed, 60.0, f"F_C = {a:.3f} k^{p:.3f} M^{q:.3f}, R^2 = {r2:.4f}")


def test_criterion_07_strip_dimensions(capsys):
    # the built airframe flies 4-inch propellers; the pure scaling law picks smaller ones
    with Clock() as c:
        spec = prototype_spec()
        law = size_drone(DesignPoint.from_grid_units(0.405, 0.1))
    t, w = spec.strip_thickness * 1e3, spec.strip_width * 1e3
    report(capsys, 7, {"t = 0.5 mm +- 20%": abs(t / 0.5 - 1) <= 0.2, "w = 54 mm +- 5%": abs(w / 54 - 1) <= 0.05},
           c.elapsed, 1.0, f"t = {t:.3f} mm, w = {w:.2f} mm "
                           f"(scaling-law propellers: t = {law.strip_thickness * 1e3:.3f} mm, "
                           f"w = {law.strip_width * 1e3:.2f} mm)")


def test_criterion_08_collision_trends(capsys):
    column = [DesignPoint.from_grid_units(0.405, k) for k in GRID_K_N_PER_MM]
    maps, sweep_time = {}, 0.0
    for v0 in (1.0, 3.0, 5.0):
        with Clock() as c:
            maps[v0] = res_heatmap(column, v0)
        sweep_time = max(sweep_time, c.elapsed)
    argmax = {v0: float(hm.k_n_per_mm[np.nanargmax(hm.value)]) for v0, hm in maps.items()}
    k_min = float(maps[3.0].k_n_per_mm[np.nanargmin(maps[3.0].value)])
    soft = frontal_collision(size_drone(DesignPoint.from_grid_units(0.405, 0.006)), 3.0)
    n_peaks = count_acceleration_peaks(soft)
    z = published_zscores()
    z_err = max(abs(p.error) for p in z)
    n_bad = sum(abs(p.error) > 0.01 for p in z)
    checks = {
        "(a) argmax k non-decreasing in v0": argmax[1.0] <= argmax[3.0] <= argmax[5.0] and argmax[1.0] < argmax[5.0],
        "(b) res minimum at k = 100": k_min == 100.0,
        "(c) soft frame >= 2 peaks": n_peaks >= 2,
        f"(d) z within 0.01 ({n_bad} rows off)": n_bad == 0,
    }
    detail = (f"argmax k = {argmax[1.0]:g}/{argmax[3.0]:g}/{argmax[5.0]:g} N/mm, res min at k = {k_min:g}, "
              f"{n_peaks} a_CU peaks, max |z error| = {z_err:.3f}")
    # the runtime bound applies to one 16-point column sweep
    report(capsys, 8, checks, sweep_time, 900.0, detail)


def test_criterion_09_gap_traversal(capsys, prototype, rigid_prototype):
    with Clock() as c:
        soft = gap_traversal(prototype, 3.0, 0.7 * prototype.nominal_width)
        rigid = gap_traversal(rigid_prototype, 3.0, 0.7 * rigid_prototype.nominal_width)
    report(capsys, 9, {"prototype passes": soft.passed, "rigid twin blocked": not rigid.passed}, c.elapsed, 300.0,
           f"min span {soft.min_lateral_span / prototype.nominal_width:.3f} of nominal width at 3 m/s")


def test_criterion_10_agility(capsys, prototype, soft_prototype, rigid_prototype):
    with Clock() as c:
        rigid = agt_indices(rigid_prototype)
        proto = agt_indices(prototype)
        soft = agt_indices(soft_prototype)
        contact = vertical_step(soft_prototype, 4.0).constraint_hit
    i1 = (proto.agt_z, proto.agt_roll, proto.agt_pitch)
    i2 = (soft.agt_z, soft.agt_roll, soft.agt_pitch)
    checks = {
        "rigid agt_z = 1 +- 0.02": abs(rigid.agt_z - 1) <= 0.02,
        "prototype indices >= 0.9": min(i1) >= 0.9,
        "soft twin PropellerContact at TWR 4": contact is Constraint.PROPELLER_CONTACT,
        "soft twin agt_z below prototype": soft.agt_z < proto.agt_z,
    }
    fmt = lambda i: "/".join(f"{v:.3f}" for v in i)
    report(capsys, 10, checks, c.elapsed, 1200.0,
           f"rigid agt_z = {rigid.agt_z:.3f}, prototype z/roll/pitch = {fmt(i1)}, soft twin = {fmt(i2)}, soft twin TWR 4: {contact.value}")


def test_criterion_11_layout(capsys, prototype):
    with Clock() as c:
        r = layout_comparison(prototype, 4.0)
    report(capsys, 11, {"ASD ratio >= 5": r.asd_ratio >= 5.0, "alpha_AU ratio > 4": r.alpha_au_ratio > 4.0,
                        "alpha_CU ratio > 4": r.alpha_cu_ratio > 4.0},
           c.elapsed, 600.0, f"peak {r.peak_frequency:.1f} Hz, ASD ratio {r.asd_ratio:.2f}, "
                             f"alpha_AU ratio {r.alpha_au_ratio:.1f}, alpha_CU ratio {r.alpha_cu_ratio:.1f}")


def test_criterion_12_simulator_invariants(capsys, prototype):
    with Clock() as c:
        free = build_ring(prototype, n_nodes=80).with_damping(0.0, 0.0)
        tr = simulate(free, PlanarScenario(duration=1.0, initial_velocity=(1.0, 0.5), initial_spin=3.0,
                                           output_dt=1e-3, self_contact=False))
        p = tr["p"]
        drift_p = np.linalg.norm(p - p[0], axis=1).max() / np.linalg.norm(p[0])
        x0 = free.rest_positions
        ang = np.arctan2(x0[:, 1], x0[:, 0])
        disp = 0.02 * np.cos(2 * ang)[:, None] * x0
        tr = simulate(free, PlanarScenario(duration=1.0, displacement=disp, output_dt=1e-3, self_contact=False))
        E = tr["E_kin"] + tr["E_el"] + tr["E_pen"]
        drift_e = np.abs(E - E[0]).max() / E[0]
        ref = frontal_collision(prototype, 3.0)
        fine = frontal_collision(prototype, 3.0, dt=0.5 * ref.trace.meta["dt"])
        change = abs(fine.a_CU_max / ref.a_CU_max - 1)
    report(capsys, 12, {"momentum drift <= 1e-6/s": drift_p <= 1e-6, "energy drift <= 1%/s": drift_e <= 0.01,
                        "peak change <= 2% under dt halving": change <= 0.02},
           c.elapsed, 300.0, f"momentum {drift_p:.1e}, energy {drift_e:.2%}, "
                             f"a_CU peak {ref.a_CU_max:.1f} -> {fine.a_CU_max:.1f} g ({change:.2%})")
