"""
Normes L^{4/3} des termes d'erreur et lois d'échelle en δ et |β|.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
from scipy.linalg import lstsq
from scipy.optimize import curve_fit

from errors import DomainError, SingularDesignError
from geometry.fields import pointwise
from bubbles.profiles import bubble_field
from bubbles.residuals import alpha_term_field, error_field
from geometry.configurations import ring_centers
from quadrature.integrate import lp_norm_result
from quadrature.spec import QuadratureSpec

logger = logging.getLogger(__name__)

NORM_EXPONENT = 4.0 / 3.0


@dataclass
class ResidualReport:
    """Normes des termes d'erreur à δ fixé, avec ventilation intérieur/extérieur de ∫|E|^{4/3}."""

    delta: float
    beta: float
    norm_E1: float
    norm_E2: float
    interior_E1: float
    exterior_E1: float
    interior_E2: float
    exterior_E2: float
    norm_alpha: Optional[float] = None

    @property
    def interior_share(self):
        total = self.interior_E2 + self.exterior_E2
        return self.interior_E2 / total if total > 0.0 else 0.0

    def to_dict(self):
        data = asdict(self)
        data["interior_share"] = self.interior_share
        return data


def residual_norms(family, spec=None, workers=1):
    """
    ‖E1‖_{4/3}, ‖E2‖_{4/3} (et la norme du terme α pour le tore).

    Args:
        family: famille d'ansatz
        spec: QuadratureSpec
        workers: threads pour les régions d'intégration
    """
    spec = spec or QuadratureSpec()
    norm1, result1 = lp_norm_result(error_field(family, 1), NORM_EXPONENT, spec, workers)
    norm2, result2 = lp_norm_result(error_field(family, 2), NORM_EXPONENT, spec, workers)
    norm_alpha = None
    if family.config.is_torus and family.q > 1 and family.alpha != 0.0:
        norm_alpha = lp_norm_result(alpha_term_field(family), NORM_EXPONENT, spec, workers)[0]
    logger.debug("δ = %.3g : ‖E1‖ = %.6e, ‖E2‖ = %.6e", family.delta, norm1, norm2)
    return ResidualReport(family.delta, family.beta, norm1, norm2, result1.interior, result1.exterior,
                          result2.interior, result2.exterior, norm_alpha)


def fit_power_law(xs, ys):
    """
    Pente log-log : ys ≈ C xs^p, ajusté par curve_fit sur (ln x, ln y).

    Returns:
        (p, C)
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise DomainError("ajustement log-log : au moins deux points strictement positifs requis")

    def line(t, slope, intercept):
        return slope * t + intercept

    (slope, intercept), _ = curve_fit(line, np.log(xs), np.log(ys), p0=(1.0, 0.0))
    return float(slope), float(math.exp(intercept))


@dataclass(frozen=True)
class TwoTermFit:
    """
    Ajustement ‖E2‖ ≈ c_a δ² + c_b |β| δ.

    Les coefficients minimisent l'écart relatif Σ((y - ŷ)/y)². `r_squared`
    est calculé sur ln y, à l'échelle de ce critère ; `linear_r_squared` est le
    R² usuel sur y, dominé par les plus grands δ.
    """

    c_a: float
    c_b: float
    r_squared: float
    linear_r_squared: float


def _r_squared(observed, fitted):
    spread = float(np.sum((observed - observed.mean()) ** 2))
    residual = observed - fitted
    return 1.0 - float(residual @ residual) / spread if spread > 0.0 else 1.0


def fit_two_term(deltas, norms, beta):
    """
    Moindres carrés relatifs de ‖E2‖ ≈ c_a δ² + c_b |β| δ.

    Returns:
        TwoTermFit (R² en espace logarithmique et en espace linéaire)
    """
    deltas = np.asarray(deltas, dtype=float)
    norms = np.asarray(norms, dtype=float)
    design = np.column_stack([deltas ** 2, abs(beta) * deltas])
    if np.linalg.matrix_rank(design) < 2:
        raise SingularDesignError("grille dégénérée pour l'ajustement à deux termes")
    if np.any(norms <= 0.0):
        raise DomainError("ajustement à deux termes : normes strictement positives requises")
    weights = 1.0 / norms
    solution, _, _, _ = lstsq(design * weights[:, None], norms * weights)
    fitted = design @ solution
    return TwoTermFit(float(solution[0]), float(solution[1]),
                      _r_squared(np.log(norms), np.log(np.abs(fitted))), _r_squared(norms, fitted))


@dataclass
class ResidualScan:
    reports: List[ResidualReport]
    c_a: float
    c_b: float
    two_term_r_squared: float
    two_term_linear_r_squared: float
    slope_E1: float
    slope_E2: float
    slope_alpha: Optional[float] = None

    def rows(self):
        return [
            {"delta": r.delta, "beta": r.beta, "norm_E1": r.norm_E1, "norm_E2": r.norm_E2,
             "interior_share": r.interior_share}
            for r in self.reports
        ]

    def to_dict(self):
        return {
            "reports": [r.to_dict() for r in self.reports],
            "c_a": self.c_a,
            "c_b": self.c_b,
            "two_term_r_squared": self.two_term_r_squared,
            "two_term_linear_r_squared": self.two_term_linear_r_squared,
            "slope_E1": self.slope_E1,
            "slope_E2": self.slope_E2,
            "slope_alpha": self.slope_alpha,
        }


def residual_scan(family, delta_grid, spec=None, workers=1):
    """Normes sur une grille en δ, ajustement à deux termes et pentes log-log."""
    spec = spec or QuadratureSpec()
    grid = sorted(float(d) for d in delta_grid)
    families = [family.with_delta(d) for d in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(lambda f: residual_norms(f, spec), families))
    else:
        reports = [residual_norms(f, spec) for f in families]
    norms2 = [r.norm_E2 for r in reports]
    fit = fit_two_term(grid, norms2, family.beta)
    slope_alpha = None
    if all(r.norm_alpha for r in reports):
        slope_alpha = fit_power_law(grid, [r.norm_alpha for r in reports])[0]
    return ResidualScan(reports, fit.c_a, fit.c_b, fit.r_squared, fit.linear_r_squared,
                        fit_power_law(grid, [r.norm_E1 for r in reports])[0],
                        fit_power_law(grid, norms2)[0], slope_alpha)


def beta_scaling(family, betas, spec=None, workers=1):
    """Pente log-log de ‖E1‖ en fonction de |β| à δ fixé (vaut 1)."""
    norms = [residual_norms(family.with_beta(b), spec, workers).norm_E1 for b in betas]
    return fit_power_law(np.abs(betas), norms)[0]


def cross_term_norm(delta, k=2, spec=None, workers=1):
    """‖U²_{δ,ξ1} U_{δ,ξ2}‖_{4/3} pour deux centres voisins du polygone."""
    rho = math.sqrt(1.0 - delta ** 2)
    centers = ring_centers(k, rho)
    first = bubble_field(delta, centers[0])
    second = bubble_field(delta, centers[1])
    product = pointwise(lambda a, b: a ** 2 * b, first, second, name="U1^2 U2")
    return lp_norm_result(product, NORM_EXPONENT, spec, workers)[0]

