import math

import numpy as np
import pytest

from errors import DomainError, InvalidConfigurationError, NumericalError
from geometry.configurations import Configuration
from geometry.fields import AXIAL, Peak, ScalarField, pointwise
from bubbles.ansatz import AnsatzFamily, bubble_family_field, radial_field
from bubbles.profiles import KernelElement, bubble_field, kernel_field
from quadrature.accumulator import CompensatedSum, two_sum
from quadrature.integrate import _angular_error, energy_product, integrate, lp_norm
from quadrature.regions import BALL_EXTENT, ball_profile, cluster_peaks, decompose
from quadrature.rules import gauss_legendre, panel_rule, sphere_rule, sphere_rule_size
from quadrature.spec import ExteriorMap, IntegralResult, QuadratureSpec

U4 = 32.0 * math.pi ** 2 / 3.0
U3 = 8.0 * math.sqrt(2.0) * math.pi ** 2
Z0_ENERGY = 4.0 * math.pi ** 2 / 5.0


def power(field, p):
    return pointwise(lambda values: values ** p, field, name=f"{field.name}^{p}")


def test_two_sum_is_exact():
    s, t = two_sum(1e16, 1.0)
    assert s == 1e16
    assert t == 1.0


def test_compensated_sum_recovers_small_terms():
    total = CompensatedSum().extend([1e16, 1.0, -1e16, 1e-3]).value
    assert total == pytest.approx(1.001, abs=1e-15)
    assert sum([1e16, 1.0, -1e16, 1e-3]) != pytest.approx(1.001, abs=1e-15)


def test_compensated_sum_is_order_deterministic():
    values = np.random.default_rng(0).standard_normal(1000) * np.logspace(-8, 8, 1000)
    first = CompensatedSum().extend(values).value
    second = CompensatedSum().extend(values).value
    assert first == second


@pytest.mark.parametrize("order", [2, 4, 8])
def test_gauss_legendre_exactness(order):
    x, w = gauss_legendre(order)
    degree = 2 * order - 2
    assert float(w @ x ** degree) == pytest.approx(2.0 / (degree + 1), rel=1e-13)
    assert not x.flags.writeable


def test_panel_rule_integrates_polynomials():
    t, w = panel_rule([0.0, 1.0, 3.0], 4)
    assert float(w @ t ** 2) == pytest.approx(9.0, rel=1e-14)


def test_sphere_rule_area():
    assert float(np.sum(sphere_rule(0).weights)) == pytest.approx(2.0 * math.pi ** 2, rel=1e-8)
    for k in (2, 3, 4):
        sector = float(np.sum(sphere_rule(0, k).weights))
        assert sector == pytest.approx(2.0 * math.pi ** 2 / k, rel=1e-8)
    directions = sphere_rule(1).directions
    assert np.linalg.norm(directions, axis=-1) == pytest.approx(np.ones(len(directions)), abs=1e-14)


def test_sphere_rule_second_moment():
    rule = sphere_rule(1)
    # ∫_{S^3} x1² = |S^3|/4
    value = float(rule.weights @ rule.directions[:, 0] ** 2)
    assert value == pytest.approx(0.5 * math.pi ** 2, rel=1e-8)


def test_axial_sphere_rule():
    rule = sphere_rule(1, axial=True)
    assert float(np.sum(rule.weights)) == pytest.approx(2.0 * math.pi ** 2, rel=1e-8)
    assert rule.size == sphere_rule_size(1, axial=True)
    # x1² ne dépend pas de l'angle dans le plan (x3, x4)
    axial = float(rule.weights @ rule.directions[:, 0] ** 2)
    assert axial == pytest.approx(0.5 * math.pi ** 2, rel=1e-8)


@pytest.mark.parametrize("level,sector_order,axial", [(0, None, False), (1, 3, False), (2, 4, True), (1, 7, True)])
def test_sphere_rule_size_matches_rule(level, sector_order, axial):
    assert sphere_rule(level, sector_order, axial=axial).size == sphere_rule_size(level, sector_order, axial)


def test_angular_error_extrapolates_geometric_convergence():
    estimate, ratio = _angular_error([1.0, 1.1, 1.11])
    assert ratio == pytest.approx(0.1)
    assert estimate == pytest.approx(0.01 * 0.1 / 0.9)
    estimate, ratio = _angular_error([1.0, 1.1, 1.3])
    assert ratio == pytest.approx(2.0)
    assert estimate == pytest.approx(0.2)
    assert _angular_error([1.0, 1.0, 1.0]) == (0.0, 0.0)


def test_ball_profile_partition():
    assert ball_profile(0.3) == pytest.approx(1.0, abs=1e-3)
    assert ball_profile(1.0) == pytest.approx(0.5, rel=1e-14)
    assert ball_profile(BALL_EXTENT) <= 2e-12
    values = ball_profile(np.linspace(0.0, 2.0, 50))
    assert np.all(np.diff(values) <= 0.0)


def test_cluster_peaks_merges_overlapping():
    peaks = [Peak.at((0, 0, 0, 0), 0.1), Peak.at((0.05, 0, 0, 0), 0.2), Peak.at((1, 0, 0, 0), 0.1)]
    clusters = cluster_peaks(peaks)
    assert len(clusters) == 2
    assert clusters[0][1] == 0.1


def test_decompose_reduces_ring_by_rotation():
    family = AnsatzFamily(Configuration("ring", 4, 1, 0.05), -0.1)
    field = power(bubble_family_field(family), 4)
    decomposition = decompose(field.peaks, QuadratureSpec(use_symmetry=True), field.symmetry)
    assert len(decomposition.balls) == 1
    assert decomposition.balls[0].multiplicity == 4
    assert decomposition.sector_order == 4
    assert len(decomposition.weight_balls) == 4
    assert decomposition.axial
    assert not decomposition.coupled
    plain = decompose(field.peaks, QuadratureSpec(), field.symmetry)
    assert len(plain.balls) == 4
    assert plain.sector_order is None


def test_spec_validation():
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec(peak_radius=0.6)
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec(exterior_map="bogus")
    with pytest.raises(InvalidConfigurationError):
        QuadratureSpec.from_dict({"tolerance": 1e-3})


def test_spec_dict_round_trip():
    spec = QuadratureSpec(rel_tol=1e-6, use_symmetry=True, exterior_map="TangentMap")
    assert spec.exterior_map is ExteriorMap.TANGENT
    assert QuadratureSpec.from_dict(spec.to_dict()) == spec
    assert spec.replace(peak_radius=0.3).peak_radius == 0.3


def test_integral_result_rejects_non_finite():
    with pytest.raises(NumericalError):
        IntegralResult(float("nan"), 0.0, 1, 1)


def test_integral_of_u4(light_spec):
    result = integrate(power(radial_field(), 4), light_spec)
    assert result.value == pytest.approx(U4, rel=1e-6)
    assert result.interior + result.exterior == pytest.approx(result.value, rel=1e-12)
    assert result.evaluations > 0


def test_integral_of_u3(light_spec):
    assert integrate(power(radial_field(), 3), light_spec).value == pytest.approx(U3, rel=1e-6)


def test_tangent_map_matches_inversion(light_spec):
    tangent = light_spec.replace(exterior_map="tangent")
    value = integrate(power(radial_field(), 4), tangent).value
    assert value == pytest.approx(U4, rel=1e-6)


def test_concentrated_bubble_integral_is_scale_invariant(light_spec):
    field = bubble_field(0.01, (0.6, 0.0, 0.0, 0.8))
    assert integrate(power(field, 4), light_spec).value == pytest.approx(U4, rel=1e-6)


def test_lp_norm(light_spec):
    assert lp_norm(radial_field(), 4, light_spec) == pytest.approx(U4 ** 0.25, rel=1e-6)
    with pytest.raises(DomainError):
        lp_norm(radial_field(), 0.5, light_spec)


def test_kernel_energy(light_spec):
    z = kernel_field(KernelElement(0))
    assert energy_product(z, z, light_spec) == pytest.approx(Z0_ENERGY, rel=1e-6)


def test_kernel_orthogonal_to_bubble(light_spec):
    # ⟨U, Z⁰⟩ = ∫ U³ Z⁰ = 0 (dérivée de ∫U⁴ en δ)
    value = energy_product(kernel_field(KernelElement(0)), radial_field(), light_spec)
    assert abs(value) <= 1e-4


def test_energy_product_requires_laplacian(light_spec):
    with pytest.raises(DomainError):
        energy_product(radial_field(), power(radial_field(), 2), light_spec)


def test_integration_is_thread_deterministic(light_spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.1), -0.1)
    field = power(bubble_family_field(family), 4)
    serial = integrate(field, light_spec, workers=1).value
    threaded = integrate(field, light_spec, workers=4).value
    assert serial == threaded


@pytest.mark.slow
def test_symmetry_reduction_preserves_ring_integral(light_spec):
    family = AnsatzFamily(Configuration("ring", 4, 1, 0.05), -0.1)
    field = power(bubble_family_field(family), 4)
    full = integrate(field, light_spec).value
    reduced = integrate(field, light_spec.replace(use_symmetry=True)).value
    assert reduced == pytest.approx(full, rel=1e-6)
    # bulles presque disjointes
    assert full == pytest.approx(4.0 * U4, rel=5e-2)


def test_angular_cap_accepts_with_warning(light_spec, monkeypatch, caplog):
    monkeypatch.setattr("quadrature.integrate.ANGULAR_MAX_LEVEL", 2)

    # |x1| présente un pli en θ1 : la règle périodique ne converge qu'en h²
    def evaluate(x):
        return np.abs(x[..., 0]) * (1.0 + np.sum(x * x, axis=-1)) ** -3

    field = ScalarField(evaluate, symmetry=frozenset({AXIAL}), name="|x1|")
    with caplog.at_level("WARNING", logger="quadrature.integrate"):
        result = integrate(field, light_spec)
    assert "Précision angulaire non atteinte" in caplog.text
    # ∫_{S^3} |ω1| = 8π/3 et ∫_0^∞ r^4 (1+r²)^-3 dr = 3π/16
    assert result.value == pytest.approx(math.pi ** 2 / 2.0, rel=1e-2)

