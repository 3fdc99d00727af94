"""
Intégration adaptative déterministe sur R^4.

Chaque région (boule représentative ou morceau extérieur) est intégrée en
rayon par scipy.integrate.quad_vec sur le vecteur des règles angulaires de
niveaux [L-2, L-1, L]. Les deux écarts successifs donnent un rapport de
convergence ; lorsqu'il est géométrique, l'erreur du niveau L est extrapolée,
sinon le dernier écart sert d'estimation. Une estimation trop grande déclenche
un raffinement, jusqu'au niveau ANGULAR_MAX_LEVEL ou au plafond de directions,
où le résultat est accepté avec un avertissement. Les régions peuvent être
traitées en parallèle, la fusion se fait dans l'ordre fixe des régions par
somme compensée.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad_vec

from config import ANGULAR_BASE_LEVEL, ANGULAR_MAX_DIRECTIONS, ANGULAR_MAX_LEVEL, ANGULAR_TRUSTED_RATIO
from errors import BudgetExhaustedError, DomainError, NonIntegrableSingularityError
from geometry.fields import ScalarField, merge_peaks, merge_symmetry, pointwise
from quadrature.accumulator import CompensatedSum
from quadrature.regions import decompose
from quadrature.rules import sphere_rule, sphere_rule_size
from quadrature.spec import IntegralResult, QuadratureSpec

logger = logging.getLogger(__name__)

# Écart relatif au-delà duquel une divergence angulaire intérieure est fatale
_DIVERGENCE_FRACTION = 1e-3


@dataclass(frozen=True)
class _RegionValue:
    value: float
    error: float
    evaluations: int
    intervals: int
    interior: bool


@dataclass(frozen=True)
class _RegionTask:
    at_levels: Callable[[Sequence[int]], Callable[[float], np.ndarray]]
    lower: float
    upper: float
    breaks: Sequence[float]
    multiplicity: int
    interior: bool
    sector_order: Optional[int] = None
    axial: bool = False

    def size(self, level):
        return sphere_rule_size(level, self.sector_order, self.axial)


def _ball_task(f, decomposition, ball):
    axial = decomposition.ball_is_axial(ball)

    def at_levels(levels):
        rules = [sphere_rule(level, axial=axial) for level in levels]

        def radial(t):
            scale = ball.jacobian(t) * decomposition.ball_weight(ball, t)
            return np.array([scale * (rule.weights @ f.func(ball.points(t, rule.directions))) for rule in rules])

        return radial

    breaks = ball.radial_breaks()
    return _RegionTask(at_levels, 0.0, breaks[-1], breaks[1:-1], ball.multiplicity, True, None, axial)


def _piece_task(f, decomposition, piece):
    def at_levels(levels):
        rules = [sphere_rule(level, decomposition.sector_order, decomposition.coupled, decomposition.axial)
                 for level in levels]

        def radial(t):
            totals = []
            for rule in rules:
                x = piece.radius(t) * rule.directions
                totals.append(rule.weights @ (f.func(x) * decomposition.exterior_weight(x)))
            return piece.jacobian(t) * np.array(totals)

        return radial

    return _RegionTask(at_levels, piece.lower, piece.upper, list(piece.breaks),
                       decomposition.exterior_multiplicity, False, decomposition.sector_order, decomposition.axial)


def _angular_error(values):
    """
    Estimation de l'erreur angulaire du dernier niveau.

    Returns:
        (estimation, rapport des deux derniers écarts)
    """
    first = abs(values[1] - values[0])
    last = abs(values[2] - values[1])
    if last == 0.0:
        return 0.0, 0.0
    ratio = last / first if first > 0.0 else math.inf
    if ratio < ANGULAR_TRUSTED_RATIO:
        return last * ratio / (1.0 - ratio), ratio
    return last, ratio


def _integrate_region(task, spec, tolerance, limit):
    limit = max(limit, len(task.breaks) + 2)
    evaluations = 0
    intervals = 0
    top = ANGULAR_BASE_LEVEL + 2
    while True:
        levels = (top - 2, top - 1, top)
        result, error, info = quad_vec(task.at_levels(levels), task.lower, task.upper, epsabs=tolerance,
                                       epsrel=0.5 * spec.rel_tol, norm="max", limit=limit,
                                       points=task.breaks or None, full_output=True)
        evaluations += info.neval * sum(task.size(level) for level in levels)
        intervals += len(info.intervals)
        if info.status == 2 or not np.all(np.isfinite(result)):
            raise NonIntegrableSingularityError("valeurs non finies dans l'intégrande",
                                                interior=task.interior, level=top)
        if info.status == 1:
            raise BudgetExhaustedError("nombre maximal de subdivisions atteint",
                                       limit=limit, interior=task.interior, level=top)
        angular, ratio = _angular_error(result)
        value = float(result[-1])
        target = max(tolerance, 0.5 * spec.rel_tol * abs(value))
        accepted = angular <= target
        if not accepted and (top >= ANGULAR_MAX_LEVEL or task.size(top + 1) > ANGULAR_MAX_DIRECTIONS):
            if task.interior and ratio >= 1.0 and angular > max(target, _DIVERGENCE_FRACTION * abs(value)):
                raise NonIntegrableSingularityError("raffinement angulaire divergent", level=top,
                                                    angular_error=angular, ratio=ratio, interior=True)
            logger.warning("Précision angulaire non atteinte au niveau %d (écart estimé %.3e, cible %.3e)",
                           top, angular, target)
            accepted = True
        if accepted:
            return _RegionValue(task.multiplicity * value, task.multiplicity * (float(error) + angular),
                                evaluations, intervals, task.interior)
        logger.debug("Raffinement angulaire au niveau %d (écart %.3e, rapport %.2f)", top + 1, angular, ratio)
        top += 1


def integrate(f, spec=None, workers=1):
    """
    Intègre un champ scalaire sur R^4.

    Args:
        f: champ scalaire (pics et symétries déclarés)
        spec: QuadratureSpec (défauts si None)
        workers: nombre de threads pour les régions

    Returns:
        IntegralResult
    """
    spec = spec or QuadratureSpec()
    decomposition = decompose(f.peaks, spec, f.symmetry)
    tasks = [_ball_task(f, decomposition, ball) for ball in decomposition.balls]
    tasks += [_piece_task(f, decomposition, piece) for piece in decomposition.pieces]
    tolerance = spec.abs_tol / len(tasks)
    limit = max(1, int(spec.max_subdivisions) // len(tasks))

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(lambda task: _integrate_region(task, spec, tolerance, limit), tasks))
    else:
        values = [_integrate_region(task, spec, tolerance, limit) for task in tasks]

    total, inside, outside, error = CompensatedSum(), CompensatedSum(), CompensatedSum(), CompensatedSum()
    for region in values:
        total.add(region.value)
        error.add(region.error)
        (inside if region.interior else outside).add(region.value)
    return IntegralResult(
        value=total.value,
        error_estimate=error.value,
        evaluations=sum(v.evaluations for v in values),
        regions=sum(v.intervals for v in values),
        interior=inside.value,
        exterior=outside.value,
    )


def lp_norm_result(f, p, spec=None, workers=1):
    """(‖f‖_p, résultat de l'intégrale de |f|^p)."""
    if p < 1:
        raise DomainError(f"exposant p < 1 : {p}", p=p)
    integrand = pointwise(lambda values: np.abs(values) ** p, f, name=f"|{f.name}|^{p:g}")
    result = integrate(integrand, spec, workers)
    return max(result.value, 0.0) ** (1.0 / p), result


def lp_norm(f, p, spec=None, workers=1):
    """(∫|f|^p)^(1/p)."""
    return lp_norm_result(f, p, spec, workers)[0]


def energy_product_result(f, g, spec=None, workers=1):
    if not g.has_laplacian:
        raise DomainError(f"le champ {g.name} n'a pas de laplacien fermé", field=g.name)

    def evaluate(x):
        return f.func(x) * g.neg_laplacian(x)

    integrand = ScalarField(evaluate, None, merge_peaks(f, g), merge_symmetry(f, g), f"<{f.name},{g.name}>")
    return integrate(integrand, spec, workers)


def energy_product(f, g, spec=None, workers=1):
    """⟨f, g⟩ = ∫∇f·∇g = ∫ f (-Δg), avec le laplacien fermé de g."""
    return energy_product_result(f, g, spec, workers).value
