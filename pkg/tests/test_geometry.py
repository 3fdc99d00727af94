import math

import numpy as np
import pytest

from errors import DomainError, InvalidConfigurationError, SymmetryError
from geometry.cones import cone_identity_sums, in_fundamental_cone
from geometry.configurations import (
    Configuration,
    empirical_lattice_constant,
    lattice_sum,
    orbit_representatives,
    pair_distance_sq,
    ring_centers,
    torus_centers,
    torus_lattice_sum,
)
from geometry.fields import AXIAL, KELVIN, RADIAL, linear_combination, zero_field
from geometry.invariance import (
    ring_space_generators,
    sample_points,
    preserves_axis_plane,
    symmetrize,
    symmetry_report,
    torus_space_generators,
)
from geometry.symmetry import (
    apply_op,
    block_rotation,
    coordinate_swap,
    identity_op,
    is_orthogonal,
    kelvin,
    reflection,
    sheet_rotation,
    theta_rotation,
)
from bubbles.ansatz import AnsatzFamily, bubble_family_field
from bubbles.profiles import KernelElement, bubble_field, kernel_field


def test_ring_centers_lie_on_sphere():
    config = Configuration("ring", 2, 1, 0.1)
    centers = config.centers
    assert centers.shape == (2, 4)
    assert np.linalg.norm(centers, axis=-1) == pytest.approx([math.sqrt(0.99)] * 2, abs=1e-15)
    assert centers[0] == pytest.approx([math.sqrt(0.99), 0.0, 0.0, 0.0])


def test_torus_centers_count_and_norms():
    config = Configuration("torus", 2, 2, 0.1)
    centers = config.centers
    assert centers.shape == (4, 4)
    assert np.max(np.abs(np.linalg.norm(centers, axis=-1) - config.rho)) <= 1e-14


def test_rho_is_derived_from_delta():
    config = Configuration("ring", 3, 1, 0.6)
    assert config.rho ** 2 + config.delta ** 2 == pytest.approx(1.0, abs=1e-15)
    assert config.with_delta(0.8).rho == pytest.approx(0.6)


@pytest.mark.parametrize("kind,k,q,delta", [
    ("torus", 3, 2, 0.1),
    ("ring", 2, 2, 0.1),
    ("ring", 1, 1, 0.1),
    ("ring", 2, 1, 1.0),
    ("ring", 2, 1, 0.0),
    ("sphere", 2, 1, 0.1),
])
def test_invalid_configurations_rejected(kind, k, q, delta):
    with pytest.raises(InvalidConfigurationError):
        Configuration(kind, k, q, delta)


def test_single_vertex_ring_requires_degenerate_flag():
    with pytest.raises(InvalidConfigurationError):
        ring_centers(1, 1.0)
    with pytest.raises(InvalidConfigurationError):
        ring_centers(0, 1.0, allow_degenerate=True)
    assert np.array_equal(ring_centers(1, 0.5, allow_degenerate=True), [[0.5, 0.0, 0.0, 0.0]])
    config = Configuration("ring", 1, 1, 0.6, allow_degenerate=True)
    assert config.centers.shape == (1, 4)


def test_configuration_dict_round_trip():
    config = Configuration("torus", 4, 3, 0.25)
    assert Configuration.from_dict(config.to_dict()) == config
    with pytest.raises(InvalidConfigurationError):
        Configuration.from_dict({"kind": "ring", "k": 2})


@pytest.mark.parametrize("k", [2, 4, 6, 8])
@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_pair_distance_matches_euclidean(k, q):
    config = Configuration("torus", k, q, 0.3)
    for r in range(1, q + 1):
        for s in range(1, q + 1):
            left = config.sheet_centers(r)
            right = config.sheet_centers(s)
            for i in range(1, k + 1):
                for j in range(1, k + 1):
                    direct = float(np.sum((left[i - 1] - right[j - 1]) ** 2))
                    assert abs(pair_distance_sq(config, i, j, r, s) - direct) <= 1e-12


def test_pair_distance_adjacent_sheets_same_index():
    config = Configuration("torus", 2, 2, 0.1)
    assert pair_distance_sq(config, 1, 1, 2, 1) == pytest.approx(2.0 * config.rho ** 2, rel=1e-14)


def test_pair_distance_rejects_bad_indices():
    config = Configuration("ring", 3, 1, 0.1)
    with pytest.raises(DomainError):
        pair_distance_sq(config, 0, 1)
    with pytest.raises(DomainError):
        pair_distance_sq(config, 1, 2, 2, 1)


@pytest.mark.parametrize("k", [2, 3, 7, 10, 100, 10000])
def test_lattice_sum_closed_form(k):
    assert lattice_sum(k) == pytest.approx((k * k - 1) / 12.0, rel=1e-12)


def test_lattice_sum_scales_with_rho():
    assert lattice_sum(5, 0.5) == pytest.approx(4.0 * lattice_sum(5), rel=1e-14)
    assert lattice_sum(1) == 0.0


def test_single_sheet_torus_lattice_matches_ring():
    for k in (2, 4, 8):
        assert torus_lattice_sum(k, 1) == pytest.approx(lattice_sum(k), rel=1e-13)
    assert empirical_lattice_constant(2, 1) == pytest.approx(1.0 / 16.0)


def test_other_sheets_increase_torus_lattice_sum():
    assert torus_lattice_sum(4, 3, include_other_sheets=True) > torus_lattice_sum(4, 3)


def test_orbit_representatives_under_rotation_and_reflection():
    centers = ring_centers(4, 1.0)
    assert orbit_representatives(centers, theta_rotation(4)) == [(0, 4)]
    assert orbit_representatives(centers, reflection((1,))) == [(0, 1), (1, 2), (2, 1)]
    with pytest.raises(SymmetryError):
        orbit_representatives(ring_centers(3, 1.0), theta_rotation(4))


def test_torus_centers_reject_odd_k():
    with pytest.raises(InvalidConfigurationError):
        torus_centers(3, 2, 1, 1.0)
    with pytest.raises(InvalidConfigurationError):
        torus_centers(2, 2, 3, 1.0)


def test_generators_are_orthogonal():
    ops = ring_space_generators(5) + torus_space_generators(4, 3)
    for op in ops:
        if op.conformal:
            continue
        assert is_orthogonal(op)
    assert not is_orthogonal(kelvin())


def test_block_rotation_has_order_k():
    op = block_rotation(6)
    assert np.max(np.abs(op.power(6).matrix - np.eye(4))) <= 1e-12
    assert np.max(np.abs(op.power(3).matrix - np.eye(4))) > 1.0


def test_kelvin_is_an_involution():
    points = sample_points(100)
    op = kelvin()
    assert np.max(np.abs(apply_op(op, apply_op(op, points)) - points)) <= 1e-12
    with pytest.raises(DomainError):
        apply_op(op, np.zeros(4))


def test_sheet_rotation_maps_second_sheet_to_first():
    config = Configuration("torus", 4, 3, 0.2)
    images = apply_op(sheet_rotation(3), config.sheet_centers(2))
    first = config.sheet_centers(1)
    for image in images:
        assert np.min(np.linalg.norm(first - image, axis=-1)) <= 1e-12


def test_identity_op_leaves_points_fixed():
    points = sample_points(10)
    assert np.array_equal(apply_op(identity_op(), points), points)


def test_sample_points_are_deterministic_and_away_from_origin():
    first = sample_points(500, seed=7)
    assert np.array_equal(first, sample_points(500, seed=7))
    assert np.min(np.linalg.norm(first, axis=-1)) >= 1e-3


def test_symmetrize_produces_invariant_field():
    field = bubble_field(0.3, (0.5, 0.1, 0.2, 0.3))
    generators = ring_space_generators(2)
    assert not symmetry_report(field, generators, tol=1e-10).passed
    averaged = symmetrize(field, generators)
    report = symmetry_report(averaged, generators, tol=1e-10)
    assert report.passed
    assert report.to_dict()["passed"] is True


def test_symmetrize_torus_space():
    field = bubble_field(0.4, (0.3, -0.2, 0.1, 0.5))
    generators = torus_space_generators(2, 2)
    averaged = symmetrize(field, generators)
    assert symmetry_report(averaged, generators, tol=1e-10).passed


def test_field_symmetry_tags():
    centered = bubble_field(1.0)
    assert centered.certifies(RADIAL)
    assert centered.certifies("rotation:7")
    assert centered.certifies(KELVIN)
    assert not bubble_field(0.5).certifies(KELVIN)
    combined = linear_combination([centered, zero_field()], [2.0, 1.0])
    assert combined.certifies(KELVIN)
    points = sample_points(5)
    assert combined(points) == pytest.approx(2.0 * centered(points))
    assert combined.minus_laplacian(points) == pytest.approx(2.0 * centered.minus_laplacian(points))


def test_fundamental_cone_membership():
    on_axis = np.array([1.0, 0.0, 0.0, 0.0])
    off_axis = np.array([0.0, 1.0, 0.0, 0.0])
    assert in_fundamental_cone(on_axis, 4, "ring")
    assert not in_fundamental_cone(off_axis, 4, "ring")
    # second angle near 0 suffices on the torus
    mixed = np.array([0.0, 1.0, 1.0, 0.0])
    assert in_fundamental_cone(mixed, 4, "torus")


@pytest.mark.parametrize("k", [2, 4, 6])
def test_cone_identity_for_invariant_function(k):
    def g(t1, t2):
        return 2.0 + np.cos(t1 - t2) + np.sin(k * t1) * np.cos(k * t2)

    weighted, plain = cone_identity_sums(g, k, 8 * k)
    assert weighted == pytest.approx(plain, rel=1e-12)


def test_axis_plane_preservation():
    assert preserves_axis_plane(block_rotation(4))
    assert preserves_axis_plane(reflection((1, 3)))
    assert preserves_axis_plane(kelvin())
    assert not preserves_axis_plane(coordinate_swap())


def test_axial_tags_follow_the_centers():
    assert bubble_field(0.1, (0.9, 0.1, 0.0, 0.0)).certifies(AXIAL)
    assert not bubble_field(0.1, (0.9, 0.0, 0.1, 0.0)).certifies(AXIAL)
    assert kernel_field(KernelElement(2, 0.1, (0.9, 0.0, 0.0, 0.0))).certifies(AXIAL)
    assert not kernel_field(KernelElement(3, 0.1, (0.9, 0.0, 0.0, 0.0))).certifies(AXIAL)
    ring = bubble_family_field(AnsatzFamily(Configuration("ring", 3, 1, 0.1), -0.1))
    assert AXIAL in ring.symmetry
    torus = bubble_family_field(AnsatzFamily(Configuration("torus", 2, 2, 0.1), -0.1, 0.5))
    assert AXIAL not in torus.symmetry


def test_symmetrize_drops_axial_tag_under_plane_swap():
    field = bubble_field(0.3, (0.5, 0.1, 0.0, 0.0))
    assert AXIAL in symmetrize(field, ring_space_generators(2)).symmetry
    assert AXIAL not in symmetrize(field, torus_space_generators(2, 1)).symmetry
