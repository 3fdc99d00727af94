import math

import numpy as np
import pytest

from config import DEFAULT_DELTA_GRID
from errors import DomainError, SingularDesignError
from geometry.configurations import Configuration, lattice_sum
from bubbles.ansatz import AnsatzFamily
from reduction.coefficients import (
    A1,
    LEADING_ORDER,
    U3_INTEGRAL,
    a_b_coefficients,
    c0,
    delta_star_closed_form,
    fit_coefficients,
    fit_separate,
    i1_num,
    i2_num,
    lattice_c1,
    predicted_c1,
    predicted_c2,
    reduction_report,
    solve_d_beta,
    solve_delta_star,
    sphere_c2,
    stated_ratio,
)
from reduction.projection import make_projection_context, project_out, z_pairing
from reduction.residual_scan import beta_scaling, fit_power_law, fit_two_term, residual_norms, residual_scan


def test_predicted_coefficients_k2():
    assert predicted_c1(2) == pytest.approx(74.4412, rel=1e-5)
    assert predicted_c2(2) == pytest.approx(11.3137, rel=1e-5)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_predicted_ratio_is_stated_law(k):
    assert predicted_c1(k) / predicted_c2(k) == pytest.approx(math.pi ** 2 * k ** 2 / 6.0, rel=1e-14)
    assert stated_ratio(k) == pytest.approx(math.pi ** 2 * k ** 2 / 6.0, rel=1e-15)


def test_lattice_and_sphere_coefficients():
    assert lattice_c1(2) == pytest.approx(2.0 * lattice_sum(2) * U3_INTEGRAL, rel=1e-15)
    assert lattice_c1(1000) / predicted_c1(1000) == pytest.approx(1.0, rel=1e-5)
    assert sphere_c2(3) == pytest.approx(2.0 * math.pi ** 2 * predicted_c2(3), rel=1e-15)


def test_a_b_coefficients():
    a, b = a_b_coefficients(10.0, 5.0, 2)
    assert a == pytest.approx(10.0 / (2.0 * A1))
    assert a / b == pytest.approx(2.0)


@pytest.mark.parametrize("beta", [-1.0, -0.5, -0.1])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_delta_star_matches_closed_form(beta, k):
    expected = math.pi ** 2 * k ** 2 / (6.0 * abs(beta))
    assert solve_d_beta(beta, k) == pytest.approx(expected, rel=1e-10)
    assert math.log(solve_delta_star(beta, k)) == pytest.approx(math.log(delta_star_closed_form(beta, k)),
                                                               rel=1e-10)


def test_delta_star_reference_value():
    assert solve_delta_star(-0.5, 2) == pytest.approx(1.93e-6, rel=5e-3)


def test_delta_star_with_measured_ratio():
    assert solve_delta_star(-0.5, 2, ratio=1.0) == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_delta_star_rejects_bad_inputs():
    with pytest.raises(DomainError):
        solve_delta_star(0.1, 2)
    with pytest.raises(DomainError):
        solve_d_beta(-0.1, 2, ratio=-1.0)
    with pytest.raises(DomainError):
        delta_star_closed_form(0.0, 2)


def synthetic_numerators(deltas, c1, c2, beta):
    deltas = np.asarray(deltas)
    return -c1 * deltas ** 2 + c2 * beta * deltas ** 2 * np.log(deltas)


def test_fit_coefficients_recovers_model():
    beta = -0.05
    numerators = synthetic_numerators(DEFAULT_DELTA_GRID, 74.4, 11.3, beta)
    fit = fit_coefficients(DEFAULT_DELTA_GRID, numerators, beta)
    assert fit.fitted_c1 == pytest.approx(74.4, rel=1e-9)
    assert fit.fitted_c2 == pytest.approx(11.3, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_separate_recovers_model():
    beta = -0.1
    deltas = np.array(DEFAULT_DELTA_GRID)
    i1 = -55.0 * deltas ** 2
    i2 = beta * deltas ** 2 * (11.0 * np.log(deltas) + 3.0)
    fit = fit_separate(deltas, i1, i2, beta)
    assert fit.fitted_c1 == pytest.approx(55.0, rel=1e-10)
    assert fit.fitted_c2 == pytest.approx(11.0, rel=1e-10)
    assert fit.fitted_c3 == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(SingularDesignError):
        fit_separate(deltas, i1, i2, 0.0)


@pytest.mark.parametrize("grid", [
    [1e-3, 1e-2, 1e-1],
    [0.01, 0.01, 0.02, 0.1],
    [0.02, 0.03, 0.05, 0.1],
])
def test_fit_rejects_degenerate_grids(grid):
    with pytest.raises(SingularDesignError):
        fit_coefficients(grid, np.ones(len(grid)), -0.1)


def test_fit_rejects_out_of_range_grid():
    with pytest.raises(DomainError):
        fit_coefficients([1e-3, 1e-2, 1e-1, 1.5], np.ones(4), -0.1)


def test_fit_power_law():
    xs = np.array([1e-3, 1e-2, 1e-1])
    slope, prefactor = fit_power_law(xs, 3.0 * xs ** 2)
    assert slope == pytest.approx(2.0, rel=1e-6)
    assert prefactor == pytest.approx(3.0, rel=1e-5)
    with pytest.raises(DomainError):
        fit_power_law([1.0], [1.0])


def test_fit_two_term():
    deltas = np.array([1e-4, 1e-3, 1e-2, 1e-1])
    norms = 4.0 * deltas ** 2 + 2.0 * 0.05 * deltas
    fit = fit_two_term(deltas, norms, -0.05)
    assert fit.c_a == pytest.approx(4.0, rel=1e-8)
    assert fit.c_b == pytest.approx(2.0, rel=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-10)
    assert fit.linear_r_squared == pytest.approx(1.0, abs=1e-10)


def test_fit_two_term_reports_both_r_squared():
    deltas = np.array([1e-4, 1e-3, 1e-2, 1e-1])
    exact = 4.0 * deltas ** 2 + 2.0 * 0.05 * deltas
    # écart de 10 % sur le plus grand point seulement
    norms = exact * np.array([1.0, 1.0, 1.0, 1.1])
    fit = fit_two_term(deltas, norms, -0.05)
    assert fit.r_squared > 0.999
    assert fit.linear_r_squared < fit.r_squared
    with pytest.raises(DomainError):
        fit_two_term(deltas, -norms, -0.05)


def test_projection_removes_z_component(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.3), -0.1)
    context = make_projection_context(family, light_spec)
    assert context.z_energy > 0.0
    projected = project_out(context, context.z_field)
    assert abs(z_pairing(context, projected)) <= 1e-6 * context.z_energy


def test_c0_is_numerator_over_z_energy(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.3), -0.1)
    context = make_projection_context(family, light_spec)
    value = c0(family, light_spec, LEADING_ORDER, context=context)
    expected = (i1_num(family, light_spec) + i2_num(family, light_spec)) / context.z_energy
    assert value == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        c0(family, light_spec, "bogus", context=context)


def test_i2_vanishes_without_coupling(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.3), 0.0, allow_uncoupled=True)
    assert i2_num(family, light_spec) == 0.0


def test_residual_norms_report(ring_family, light_spec):
    report = residual_norms(ring_family, light_spec)
    assert report.norm_E1 > 0.0
    assert report.norm_E2 > 0.0
    assert 0.0 <= report.interior_share <= 1.0
    assert report.norm_alpha is None
    data = report.to_dict()
    assert data["delta"] == 0.1
    assert data["interior_share"] == report.interior_share


def test_e1_norm_linear_in_beta(ring_family, light_spec):
    single = residual_norms(ring_family, light_spec).norm_E1
    double = residual_norms(ring_family.with_beta(-0.2), light_spec).norm_E1
    assert double == pytest.approx(2.0 * single, rel=1e-6)


@pytest.mark.slow
def test_beta_scaling_slope(ring_family, light_spec):
    assert beta_scaling(ring_family, [-0.05, -0.1, -0.2], light_spec) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.slow
def test_torus_alpha_norm_reported(torus_family, light_spec):
    report = residual_norms(torus_family, light_spec)
    assert report.norm_alpha is not None and report.norm_alpha > 0.0


@pytest.mark.slow
def test_i1_leading_order_matches_lattice_coefficient(light_spec):
    delta = 0.02
    family = AnsatzFamily(Configuration("ring", 2, 1, delta), -0.05)
    assert -i1_num(family, light_spec) / delta ** 2 == pytest.approx(lattice_c1(2), rel=5e-2)


@pytest.mark.slow
def test_reduction_report_structure(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.05), -0.05)
    grid = [0.01, 0.02, 0.05, 0.1]
    report = reduction_report(family, grid, light_spec)
    assert report.delta_grid == grid
    assert len(report.rows()) == 4
    for i1, i2, c, energy in zip(report.I1_samples, report.I2_samples, report.c0_samples,
                                 report.z_energy_samples):
        assert c == pytest.approx((i1 + i2) / energy, rel=1e-12)
    assert report.predicted_c1 == pytest.approx(predicted_c1(2))
    assert report.delta_star == pytest.approx(solve_delta_star(-0.05, 2))
    threaded = reduction_report(family, grid, light_spec, workers=4)
    assert threaded.to_dict() == report.to_dict()


@pytest.mark.slow
def test_residual_norms_with_default_spec():
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.05), -0.05)
    report = residual_norms(family)
    assert math.isfinite(report.norm_E1) and report.norm_E1 > 0.0
    assert math.isfinite(report.norm_E2) and report.norm_E2 > 0.0


@pytest.mark.slow
def test_residual_scan_two_term_fit(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.05), -0.05)
    scan = residual_scan(family, [1e-4, 1e-3, 1e-2, 1e-1], light_spec)
    assert scan.two_term_r_squared >= 0.999
    assert scan.c_a > 0.0 and scan.c_b > 0.0
    assert scan.slope_E1 == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3, 4])
def test_fitted_coefficients_match_lattice_and_sphere(k, light_spec):
    family = AnsatzFamily(Configuration("ring", k, 1, 0.01), -0.05)
    report = reduction_report(family, [0.004, 0.008, 0.016, 0.04], light_spec)
    assert report.separate_c1 == pytest.approx(lattice_c1(k), rel=5e-2)
    assert report.separate_c2 == pytest.approx(sphere_c2(k), rel=5e-2)
    assert report.lattice_c1 == lattice_c1(k)
