"""
Projection sur l'orthogonal (pour le produit ∫∇·∇) de la direction Z.
"""
import logging
from dataclasses import dataclass

from errors import NumericalError
from geometry.fields import ScalarField, linear_combination
from bubbles.ansatz import AnsatzFamily, kernel_direction_field
from quadrature.integrate import energy_product
from quadrature.spec import QuadratureSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionContext:
    family: AnsatzFamily
    z_field: ScalarField
    z_energy: float
    spec: QuadratureSpec


def make_projection_context(family, spec=None, workers=1):
    """Construit Z et calcule ‖∇Z‖² une seule fois."""
    spec = spec or QuadratureSpec()
    z = kernel_direction_field(family)
    energy = energy_product(z, z, spec, workers)
    if not energy > 0.0:
        raise NumericalError(f"énergie de Z non positive : {energy}", z_energy=energy)
    logger.debug("‖∇Z‖² = %.12g (k = %d, δ = %.3g)", energy, family.k, family.delta)
    return ProjectionContext(family, z, energy, spec)


def z_energy(context):
    return context.z_energy


def z_pairing(context, psi, workers=1):
    """⟨ψ, Z⟩ = ∫ ψ (-ΔZ)."""
    return energy_product(psi, context.z_field, context.spec, workers)


def project_out(context, psi, workers=1):
    """ψ - (⟨ψ, Z⟩ / ‖∇Z‖²) Z."""
    coefficient = z_pairing(context, psi, workers) / context.z_energy
    if coefficient == 0.0:
        return psi
    return linear_combination((psi, context.z_field), (1.0, -coefficient), name=f"P[{psi.name}]")
