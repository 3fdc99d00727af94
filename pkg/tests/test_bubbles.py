import math

import numpy as np
import pytest

from config import C4
from errors import DomainError, InvalidConfigurationError
from geometry.configurations import Configuration
from geometry.invariance import ring_space_generators, sample_points, symmetry_report, torus_space_generators
from geometry.symmetry import kelvin
from bubbles.ansatz import (
    AnsatzFamily,
    ansatz_eval,
    bubble_family_field,
    full_family_field,
    kernel_direction_field,
    radial_field,
)
from bubbles.expansion import reduction_identity_check, two_to_m_expand
from bubbles.nonlinear import nonlinear_terms_eval, nonlinear_values
from bubbles.profiles import (
    KernelElement,
    bubble_field,
    bubble_values,
    envelope_field,
    kelvin_bubble_image,
    kernel_field,
)
from bubbles.residuals import alpha_term_field, cubic_cross_terms, error_terms, residual_strong
from geometry.fields import zero_field
from geometry.symmetry import conjugate_function


def fd_laplacian(f, x, h):
    total = -8.0 * f(x)
    for axis in range(4):
        shift = np.zeros(4)
        shift[axis] = h
        total = total + f(x + shift) + f(x - shift)
    return total / h ** 2


def fd_orders(field, x, steps=(1e-2, 5e-3, 2.5e-3)):
    exact = field.minus_laplacian(x)
    errors = [abs(-fd_laplacian(field.func, x, h) - exact) for h in steps]
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


def test_bubble_peak_value():
    field = bubble_field(0.1, (0.3, 0.0, 0.4, 0.0))
    assert field((0.3, 0.0, 0.4, 0.0)) == pytest.approx(C4 / 0.1, rel=1e-14)
    assert C4 / 0.1 == pytest.approx(28.2843, rel=1e-5)


def test_bubble_rejects_nonpositive_width():
    with pytest.raises(DomainError):
        bubble_field(0.0)


def test_bubble_laplacian_is_cubic():
    field = bubble_field(0.4, (0.1, 0.2, -0.3, 0.0))
    points = sample_points(50)
    assert field.minus_laplacian(points) == pytest.approx(field(points) ** 3, rel=1e-14)


def test_bubble_finite_difference_order():
    field = bubble_field(1.0)
    orders = fd_orders(field, np.array([0.5, 0.1, -0.2, 0.6]))
    for order in orders:
        assert order == pytest.approx(2.0, abs=0.1)


@pytest.mark.parametrize("j", [0, 1, 2, 3, 4])
def test_kernel_element_finite_difference_order(j):
    field = kernel_field(KernelElement(j))
    orders = fd_orders(field, np.array([0.9, 0.3, 0.1, -0.5]))
    for order in orders:
        assert order == pytest.approx(2.0, abs=0.1)


def test_kernel_element_rejects_bad_index():
    with pytest.raises(DomainError):
        KernelElement(5)


def test_envelope_laplacian_matches_finite_differences():
    x = np.array([0.4, -0.3, 0.2, 0.1])
    for s in (1.0, 1.5, 2.0):
        field = envelope_field(s)
        approx = -fd_laplacian(field.func, x, 1e-3)
        assert approx == pytest.approx(field.minus_laplacian(x), rel=1e-5)
    # e_1 est la bulle standard
    assert envelope_field(1.0)(x) == pytest.approx(radial_field()(x), rel=1e-15)


def test_kelvin_image_of_bubble_is_bubble():
    delta, xi = 0.3, (0.5, 0.1, -0.2, 0.0)
    image = conjugate_function(kelvin(), bubble_field(delta, xi))
    new_delta, new_xi = kelvin_bubble_image(delta, xi)
    expected = bubble_field(new_delta, new_xi)
    points = sample_points(50)
    assert image(points) == pytest.approx(expected(points), rel=1e-12)


def test_ring_family_invariances():
    family = AnsatzFamily(Configuration("ring", 4, 1, 0.1), -0.1)
    report = symmetry_report(bubble_family_field(family), ring_space_generators(4), tol=1e-10)
    assert report.passed


def test_torus_first_sheet_invariances():
    family = AnsatzFamily(Configuration("torus", 2, 3, 0.1), -0.1)
    report = symmetry_report(bubble_family_field(family, 1), torus_space_generators(2, 3, False), tol=1e-10)
    assert report.passed


def test_torus_full_sum_invariant_under_sheet_rotation():
    family = AnsatzFamily(Configuration("torus", 2, 3, 0.1), -0.1)
    report = symmetry_report(full_family_field(family), torus_space_generators(2, 3), tol=1e-10)
    assert report.passed


def test_family_rejects_positive_beta_and_ring_alpha():
    config = Configuration("ring", 2, 1, 0.1)
    with pytest.raises(InvalidConfigurationError):
        AnsatzFamily(config, 0.1)
    with pytest.raises(InvalidConfigurationError):
        AnsatzFamily(config, 0.0)
    with pytest.raises(InvalidConfigurationError):
        AnsatzFamily(config, -0.1, 0.5)
    assert AnsatzFamily(config, 0.0, allow_uncoupled=True).beta == 0.0


def test_ansatz_components(ring_family, torus_family):
    x = np.array([0.2, 0.1, 0.0, 0.3])
    assert ring_family.m == 2
    assert ansatz_eval(ring_family, 2, x) == pytest.approx(radial_field()(x))
    assert ansatz_eval(ring_family, 1, x) == pytest.approx(bubble_family_field(ring_family)(x))
    assert torus_family.m == 3
    assert ansatz_eval(torus_family, 3, x) == pytest.approx(radial_field()(x))
    with pytest.raises(DomainError):
        ansatz_eval(ring_family, 3, x)


def test_kernel_direction_sums_dilations(ring_family):
    x = sample_points(20)
    z = kernel_direction_field(ring_family)
    expected = sum(kernel_field(KernelElement(0, 0.1, tuple(c)))(x)
                   for c in ring_family.config.sheet_centers(1))
    assert z(x) == pytest.approx(expected, rel=1e-14)


def test_stable_cross_terms_match_expansion():
    centers = Configuration("ring", 4, 1, 0.2).centers
    points = sample_points(200, scale=2.0)
    values = bubble_values(centers, 0.2, points)
    naive = np.sum(values, axis=0) ** 3 - np.sum(values ** 3, axis=0)
    assert cubic_cross_terms(values) == pytest.approx(naive, rel=1e-10)
    assert np.all(cubic_cross_terms(values[:1]) == 0.0)


def test_error_terms_scale_with_beta():
    config = Configuration("ring", 2, 1, 0.1)
    points = sample_points(50)
    e1, e2 = error_terms(AnsatzFamily(config, -0.1), points)
    e1_double, e2_double = error_terms(AnsatzFamily(config, -0.2), points)
    assert np.max(np.abs(e1_double - 2.0 * e1)) <= 1e-10
    cross = cubic_cross_terms(bubble_values(config.centers, 0.1, points))
    assert e2_double - cross == pytest.approx(2.0 * (e2 - cross), rel=1e-12, abs=1e-12)


def test_residual_strong_indices(ring_family):
    x = np.array([0.5, 0.5, 0.0, 0.0])
    e1, e2 = error_terms(ring_family, x)
    assert residual_strong(ring_family, 1, x) == e1
    assert residual_strong(ring_family, 2, x) == e2
    with pytest.raises(DomainError):
        residual_strong(ring_family, 3, x)


def test_alpha_term_only_on_torus_sheets(torus_family):
    points = sample_points(30)
    _, e2 = error_terms(torus_family, points)
    without_alpha = AnsatzFamily(torus_family.config, torus_family.beta, 0.0)
    _, e2_plain = error_terms(without_alpha, points)
    assert e2 - e2_plain == pytest.approx(alpha_term_field(torus_family)(points), rel=1e-12, abs=1e-12)


def test_nonlinear_terms_vanish_at_zero_correction(ring_family, torus_family):
    points = sample_points(40)
    for family in (ring_family, torus_family):
        n1, n2 = nonlinear_terms_eval(family, zero_field(), zero_field(), points)
        assert np.all(n1 == 0.0)
        assert np.all(n2 == 0.0)


def test_nonlinear_terms_are_at_least_quadratic():
    rng = np.random.default_rng(3)
    u, v = rng.uniform(0.5, 2.0, 10), rng.uniform(0.5, 2.0, 10)
    phi, psi = rng.uniform(-1.0, 1.0, 10), rng.uniform(-1.0, 1.0, 10)
    small = [nonlinear_values(0.0, 0.0, u, t * phi, [v], [t * psi]) for t in (1e-3, 5e-4)]
    ratio = np.abs(small[0][0]) / np.abs(small[1][0])
    assert ratio == pytest.approx(4.0, rel=1e-2)


@pytest.mark.parametrize("q", [2, 3])
def test_reduction_identity_even_profile(q):
    family = AnsatzFamily(Configuration("torus", 2, q, 0.3), -0.1)
    v = bubble_family_field(family, 1)
    points = sample_points(100)
    scale = float(np.max(v(points) ** 2))
    for i in range(1, q + 1):
        assert np.max(reduction_identity_check(v, q, i, points)) / scale <= 1e-12


def test_reduction_identity_fails_without_evenness():
    v = bubble_field(0.3, (0.7, 0.2, 0.1, 0.0))
    points = sample_points(100)
    assert np.max(reduction_identity_check(v, 3, 2, points)) > 1e-3


def test_two_to_m_expand_orders_components():
    u, v = radial_field(), bubble_field(0.5, (0.3, 0.0, 0.0, 0.0))
    components = two_to_m_expand(u, v, 3)
    assert len(components) == 4
    assert components[0] is v
    assert components[-1] is u
    with pytest.raises(DomainError):
        two_to_m_expand(u, v, 0)
