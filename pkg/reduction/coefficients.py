"""
Équation réduite : intégrales I₁, I₂, constante c₀(δ), ajustement des
coefficients et racine δ* du modèle à deux termes.

    c₀(δ) = (I₁ + I₂ + corrections) / ‖∇Z‖²
    I₁ = ∫(V³ - Σ U_i³) Z   (tore : + ∫ α Ṽ Σ_{r>=2} Ṽ_r² Z̃)
    I₂ = β ∫ U² V Z
    I₁ + I₂ ≈ -𝔠₁δ² + 𝔠₂βδ² ln δ
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
from scipy.linalg import lstsq
from scipy.optimize import bisect

from config import C4
from errors import DomainError, SingularDesignError
from geometry.configurations import empirical_lattice_constant, lattice_sum
from geometry.fields import ScalarField, merge_peaks, merge_symmetry
from bubbles.ansatz import bubble_family_field, kernel_direction_field, radial_field
from bubbles.nonlinear import nonlinear_terms_eval
from bubbles.residuals import alpha_term_field, cross_term_field
from quadrature.integrate import energy_product, integrate
from quadrature.spec import QuadratureSpec
from reduction.projection import make_projection_context

logger = logging.getLogger(__name__)

# Intégrales fermées
U3_INTEGRAL = 8.0 * math.sqrt(2.0) * math.pi ** 2
U4_INTEGRAL = 32.0 * math.pi ** 2 / 3.0
A1 = 4.0 * math.pi ** 2 / 5.0  # ‖∇Z⁰‖²
RING_LATTICE_CONSTANT = 1.0 / 12.0
SPHERE_AREA = 2.0 * math.pi ** 2

LEADING_ORDER = "leading_order"


@dataclass(frozen=True)
class WithCorrections:
    """Mode de c₀ incluant les couplages ∫N₂(φ, ψ)Z - ⟨L₂ψ, Z⟩."""

    phi: ScalarField
    psi: ScalarField


def _product_field(func, fields, name):
    def evaluate(x):
        return func(*(f.func(x) for f in fields))
    return ScalarField(evaluate, None, merge_peaks(*fields), merge_symmetry(*fields), name)


def i1_num(family, spec=None, workers=1):
    """I₁ = ∫(V³ - Σ U_i³)Z, plus le terme α pour le tore."""
    z = kernel_direction_field(family)
    integrand = _product_field(lambda c, zz: c * zz, (cross_term_field(family), z), "I1")
    value = integrate(integrand, spec, workers).value
    if family.config.is_torus and family.alpha != 0.0 and family.q > 1:
        alpha_part = _product_field(lambda a, zz: a * zz, (alpha_term_field(family), z), "I1_alpha")
        value += integrate(alpha_part, spec, workers).value
    return value


def i2_num(family, spec=None, workers=1):
    """I₂ = β ∫ U² V Z (nul sans calcul pour β = 0)."""
    if family.beta == 0.0:
        return 0.0
    fields = (radial_field(), bubble_family_field(family, 1), kernel_direction_field(family))
    integrand = _product_field(lambda u, v, z: u ** 2 * v * z, fields, "I2")
    return family.beta * integrate(integrand, spec, workers).value


def correction_pairings(family, phi, psi, context, workers=1):
    """∫ N₂(φ, ψ) Z - (⟨ψ, Z⟩ - ∫ 3V² ψ Z)."""
    z = context.z_field
    v = bubble_family_field(family, 1)

    def n2_times_z(x):
        return nonlinear_terms_eval(family, phi, psi, x)[1] * z.func(x)

    nonlinear = ScalarField(n2_times_z, None, merge_peaks(z, v, phi, psi), merge_symmetry(z, v, phi, psi), "N2Z")
    potential = _product_field(lambda vv, p, zz: 3.0 * vv ** 2 * p * zz, (v, psi, z), "3V2psiZ")
    linear = energy_product(psi, z, context.spec, workers) - integrate(potential, context.spec, workers).value
    return integrate(nonlinear, context.spec, workers).value - linear


def c0(family, spec=None, mode=LEADING_ORDER, workers=1, context=None):
    """
    c₀(δ) = (I₁ + I₂ [+ corrections]) / ‖∇Z‖².

    Args:
        family: famille d'ansatz (δ inclus)
        spec: QuadratureSpec
        mode: LEADING_ORDER ou WithCorrections(φ, ψ)
        context: ProjectionContext déjà calculé (facultatif)
    """
    spec = spec or QuadratureSpec()
    context = context or make_projection_context(family, spec, workers)
    numerator = i1_num(family, spec, workers) + i2_num(family, spec, workers)
    if isinstance(mode, WithCorrections):
        numerator += correction_pairings(family, mode.phi, mode.psi, context, workers)
    elif mode != LEADING_ORDER:
        raise DomainError(f"mode de c0 inconnu : {mode}", mode=str(mode))
    return numerator / context.z_energy


def predicted_c1(k, lattice_constant=RING_LATTICE_CONSTANT):
    """𝔠₁ = A k³ ∫U³."""
    return lattice_constant * k ** 3 * U3_INTEGRAL


def predicted_c2(k):
    """𝔠₂ = ¼ c4³ k."""
    return 0.25 * C4 ** 3 * k


def lattice_c1(k, rho=1.0):
    """Coefficient de δ² dans -I₁ pour le polygone fini : k Σ_j |ξ_1 - ξ_j|^-2 ∫U³."""
    return k * lattice_sum(k, rho) * U3_INTEGRAL


def sphere_c2(k):
    """Coefficient de βδ² ln δ dans I₂, mesure de S³ comprise : 2π² ¼ c4³ k."""
    return SPHERE_AREA * predicted_c2(k)


def a_b_coefficients(c1, c2, k):
    """(𝔞, 𝔟) = (𝔠₁, 𝔠₂) / (A₁ k)."""
    return c1 / (A1 * k), c2 / (A1 * k)


def stated_ratio(k):
    """𝔞/𝔟 = 𝔠₁/𝔠₂ = π²k²/6."""
    return math.pi ** 2 * k ** 2 / 6.0


@dataclass(frozen=True)
class CoefficientFit:
    fitted_c1: float
    fitted_c2: float
    r_squared: float
    fitted_c3: Optional[float] = None


def _check_grid(deltas):
    deltas = np.asarray(deltas, dtype=float)
    if len(deltas) < 4 or len(np.unique(deltas)) < 4:
        raise SingularDesignError("au moins 4 valeurs de delta distinctes sont nécessaires", points=len(deltas))
    if np.any(deltas <= 0.0) or np.any(deltas >= 1.0):
        raise DomainError("les valeurs de delta doivent appartenir à ]0, 1[")
    if deltas.max() / deltas.min() < 10.0:
        raise SingularDesignError("la grille doit couvrir au moins une décade",
                                  span=float(deltas.max() / deltas.min()))
    return deltas


def _least_squares(design, target):
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesignError("matrice de régression singulière", shape=list(design.shape))
    solution, _, _, _ = lstsq(design, target)
    residual = target - design @ solution
    spread = float(np.sum((target - target.mean()) ** 2))
    r_squared = 1.0 - float(residual @ residual) / spread if spread > 0.0 else 1.0
    return solution, r_squared


def fit_coefficients(deltas, numerators, beta):
    """
    Moindres carrés de N(δ)/δ² contre le modèle -𝔠₁ + 𝔠₂ β ln δ.

    Returns:
        CoefficientFit (R² calculé sur N/δ²)
    """
    deltas = _check_grid(deltas)
    target = np.asarray(numerators, dtype=float) / deltas ** 2
    design = np.column_stack([-np.ones_like(deltas), beta * np.log(deltas)])
    (c1, c2), r_squared = _least_squares(design, target)
    return CoefficientFit(float(c1), float(c2), r_squared)


def fit_separate(deltas, i1_samples, i2_samples, beta):
    """
    Ajustements séparés : I₁/δ² ≈ -𝔠₁ et I₂/(βδ²) ≈ 𝔠₂ ln δ + c₃.
    """
    deltas = _check_grid(deltas)
    if beta == 0.0:
        raise SingularDesignError("beta nul : I₂ ne porte aucune information")
    ones = np.ones_like(deltas)
    (c1,), _ = _least_squares(-ones[:, None], np.asarray(i1_samples, dtype=float) / deltas ** 2)
    target = np.asarray(i2_samples, dtype=float) / (beta * deltas ** 2)
    (c2, c3), r_squared = _least_squares(np.column_stack([np.log(deltas), ones]), target)
    return CoefficientFit(float(c1), float(c2), r_squared, float(c3))


def delta_star_closed_form(beta, k, ratio=None):
    if beta >= 0.0:
        raise DomainError(f"beta doit être négatif, reçu : {beta}", beta=beta)
    ratio = stated_ratio(k) if ratio is None else ratio
    return math.exp(-ratio / abs(beta))


def solve_d_beta(beta, k, ratio=None):
    """Racine d_β de -𝔞 + 𝔟 β ln δ = 0 avec δ = e^{-d}, par bissection."""
    if beta >= 0.0:
        raise DomainError(f"beta doit être négatif, reçu : {beta}", beta=beta)
    ratio = stated_ratio(k) if ratio is None else float(ratio)
    if not ratio > 0.0:
        raise DomainError(f"le rapport a/b doit être positif, reçu : {ratio}", ratio=ratio)

    def model(d):
        return -ratio + abs(beta) * d

    upper = 2.0 * ratio / abs(beta) + 1.0
    return bisect(model, 0.0, upper, xtol=1e-15 * upper, rtol=4.0 * np.finfo(float).eps, maxiter=500)


def solve_delta_star(beta, k, ratio=None):
    """
    δ* = exp(-d_β), d_β racine du modèle à deux termes.

    Args:
        beta: couplage (< 0)
        k: nombre de bulles
        ratio: 𝔞/𝔟 (défaut : π²k²/6)
    """
    return math.exp(-solve_d_beta(beta, k, ratio))


@dataclass
class ReductionReport:
    """Échantillons de l'équation réduite sur une grille en δ et coefficients ajustés."""

    kind: str
    k: int
    q: int
    beta: float
    alpha: float
    delta_grid: List[float]
    I1_samples: List[float]
    I2_samples: List[float]
    c0_samples: List[float]
    z_energy_samples: List[float]
    fitted_c1: float
    fitted_c2: float
    fit_r_squared: float
    separate_c1: float
    separate_c2: float
    separate_c3: float
    predicted_c1: float
    predicted_c2: float
    lattice_c1: float
    sphere_c2: float
    lattice_constant: float
    a_coeff: float
    b_coeff: float
    delta_star: float
    delta_star_measured: Optional[float] = None

    def model(self, delta):
        """Modèle ajusté -𝔠₁δ² + 𝔠₂βδ² ln δ."""
        return -self.fitted_c1 * delta ** 2 + self.fitted_c2 * self.beta * delta ** 2 * math.log(delta)

    def rows(self):
        """Lignes (δ, I₁, I₂, c₀, modèle) pour l'export CSV."""
        return [
            {"delta": d, "I1": i1, "I2": i2, "c0": c, "model": self.model(d)}
            for d, i1, i2, c in zip(self.delta_grid, self.I1_samples, self.I2_samples, self.c0_samples)
        ]

    def to_dict(self):
        return asdict(self)


def _grid_sample(family, spec):
    context = make_projection_context(family, spec)
    i1 = i1_num(family, spec)
    i2 = i2_num(family, spec)
    logger.debug("δ = %.3g : I1 = %.6e, I2 = %.6e", family.delta, i1, i2)
    return i1, i2, (i1 + i2) / context.z_energy, context.z_energy


def reduction_report(family, delta_grid, spec=None, workers=1):
    """
    Calcule I₁, I₂, c₀ et ‖∇Z‖² sur la grille, puis ajuste les coefficients.

    Les points de grille sont indépendants et évalués en parallèle ; le
    rapport est assemblé dans l'ordre de la grille.
    """
    spec = spec or QuadratureSpec()
    grid = sorted(float(d) for d in delta_grid)
    families = [family.with_delta(d) for d in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            samples = list(executor.map(lambda f: _grid_sample(f, spec), families))
    else:
        samples = [_grid_sample(f, spec) for f in families]
    i1s, i2s, c0s, energies = (list(column) for column in zip(*samples))

    joint = fit_coefficients(grid, np.add(i1s, i2s), family.beta)
    separate = fit_separate(grid, i1s, i2s, family.beta)
    config = family.config
    if config.is_torus:
        constant = empirical_lattice_constant(config.k, config.q)
    else:
        constant = RING_LATTICE_CONSTANT
    a_coeff, b_coeff = a_b_coefficients(joint.fitted_c1, joint.fitted_c2, config.k)
    measured = None
    if joint.fitted_c1 > 0.0 and joint.fitted_c2 > 0.0:
        measured = solve_delta_star(family.beta, config.k, joint.fitted_c1 / joint.fitted_c2)
    return ReductionReport(
        kind=config.kind.value, k=config.k, q=config.q, beta=family.beta, alpha=family.alpha,
        delta_grid=grid, I1_samples=i1s, I2_samples=i2s, c0_samples=c0s, z_energy_samples=energies,
        fitted_c1=joint.fitted_c1, fitted_c2=joint.fitted_c2, fit_r_squared=joint.r_squared,
        separate_c1=separate.fitted_c1, separate_c2=separate.fitted_c2, separate_c3=separate.fitted_c3,
        predicted_c1=predicted_c1(config.k, constant), predicted_c2=predicted_c2(config.k),
        lattice_c1=lattice_c1(config.k), sphere_c2=sphere_c2(config.k), lattice_constant=constant,
        a_coeff=a_coeff, b_coeff=b_coeff,
        delta_star=solve_delta_star(family.beta, config.k),
        delta_star_measured=measured,
    )
