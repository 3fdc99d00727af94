"""
Règles de quadrature élémentaires : Gauss-Legendre, sphère S^3 en coordonnées
de Hopf, et règle de cubature fixe sur R^4 utilisée par le solveur.

Sur S^3 : ω = (cos η cos θ1, cos η sin θ1, sin η cos θ2, sin η sin θ2), de
mesure sin η cos η dη dθ1 dθ2 (aire totale 2π²). Gauss-Legendre en η,
règle du point milieu (trapèzes périodiques) en θ1 et θ2.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from config import (
    ANGULAR_ETA_NODES,
    ANGULAR_THETA_NODES,
    RULE_ANGULAR_LEVEL,
    RULE_FULL_ANGULAR_LEVEL,
    RULE_RADIAL_ORDER,
)


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nœuds et poids de Gauss-Legendre sur [-1, 1] (lecture seule)."""
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(breaks, order):
    """Gauss-Legendre d'ordre `order` sur chaque panneau [breaks[i], breaks[i+1]]."""
    x, w = gauss_legendre(order)
    nodes, weights = [], []
    for lower, upper in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (upper - lower)
        nodes.append(lower + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _periodic_nodes(lower, width, count):
    step = width / count
    return lower + (np.arange(count) + 0.5) * step, np.full(count, step)


@dataclass(frozen=True, eq=False)
class SphereRule:
    directions: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return len(self.weights)


def sphere_rule_size(level, sector_order=None, axial=False):
    """Nombre de directions de sphere_rule(level, sector_order, axial=axial)."""
    n_eta = ANGULAR_ETA_NODES * 2 ** level
    n_theta = ANGULAR_THETA_NODES * 2 ** level
    first = max(2, -(-n_theta // sector_order)) if sector_order else n_theta
    return n_eta * first * (1 if axial else n_theta)


@lru_cache(maxsize=64)
def sphere_rule(level, sector_order=None, coupled=False, axial=False):
    """
    Règle produit sur S^3 au niveau `level` (6·2^level nœuds en η,
    12·2^level en θ).

    Avec `sector_order` = k, θ1 est restreint à [-π/k, π/k] ; les poids
    somment alors à 2π²/k. Avec `coupled`, θ2 = θ1 + χ, χ parcourant le cercle.
    Avec `axial`, θ2 est réduit au seul nœud θ2 = 0 de poids 2π : la règle
    n'est exacte en θ2 que pour des intégrandes invariants par rotation du
    plan (x3, x4).
    """
    n_eta = ANGULAR_ETA_NODES * 2 ** level
    n_theta = ANGULAR_THETA_NODES * 2 ** level
    x, w = gauss_legendre(n_eta)
    eta = 0.25 * math.pi * (x + 1.0)
    w_eta = 0.25 * math.pi * w * np.sin(eta) * np.cos(eta)

    if sector_order:
        width = 2.0 * math.pi / sector_order
        theta1, w1 = _periodic_nodes(-0.5 * width, width, max(2, -(-n_theta // sector_order)))
    else:
        theta1, w1 = _periodic_nodes(-math.pi, 2.0 * math.pi, n_theta)
    if axial:
        second, w2 = np.zeros(1), np.full(1, 2.0 * math.pi)
    else:
        second, w2 = _periodic_nodes(-math.pi, 2.0 * math.pi, n_theta)

    e, t1, t2 = np.meshgrid(eta, theta1, second, indexing="ij")
    if coupled and not axial:
        t2 = t1 + t2
    weights = (w_eta[:, None, None] * w1[None, :, None] * w2[None, None, :]).ravel()
    directions = np.stack([
        np.cos(e) * np.cos(t1),
        np.cos(e) * np.sin(t1),
        np.sin(e) * np.cos(t2),
        np.sin(e) * np.sin(t2),
    ], axis=-1).reshape(-1, 4)
    directions.setflags(write=False)
    weights.setflags(write=False)
    return SphereRule(directions, weights)


@dataclass(frozen=True, eq=False)
class CubatureRule:
    """
    Règle fixe (nœuds, poids) sur R^4, construite sur le même découpage que
    l'intégration adaptative. Les poids incluent jacobiens, partition de
    l'unité et multiplicités d'orbite ; ils ne valent que pour des intégrandes
    invariants par la rotation de réduction lorsque `sector_order` est fixé.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interior: np.ndarray
    sector_order: int = 1

    @property
    def size(self):
        return len(self.weights)

    def integrate(self, values):
        """∫ f pour les valeurs aux nœuds (dernier axe = nœuds)."""
        return np.asarray(values) @ self.weights

    def gram(self, left, right):
        """Matrice (∫ a_i b_j) pour des tableaux (n, N) et (p, N)."""
        return (np.asarray(left) * self.weights) @ np.asarray(right).T


def build_rule(decomposition, radial_order=RULE_RADIAL_ORDER, angular_level=None):
    """
    Règle fixe : Gauss-Legendre par panneau radial, règle de Hopf en angle.

    Sans niveau explicite, RULE_ANGULAR_LEVEL s'applique aux découpages axiaux
    (θ2 intégré exactement) et RULE_FULL_ANGULAR_LEVEL aux autres.
    """
    if angular_level is None:
        angular_level = RULE_ANGULAR_LEVEL if decomposition.axial else RULE_FULL_ANGULAR_LEVEL
    blocks, weights, interior = [], [], []

    for ball in decomposition.balls:
        sphere = sphere_rule(angular_level, axial=decomposition.ball_is_axial(ball))
        t, w_t = panel_rule(ball.radial_breaks(), radial_order)
        points = ball.center + (ball.width * t)[:, None, None] * sphere.directions[None, :, :]
        radial = w_t * ball.jacobian(t) * decomposition.ball_weight(ball, t) * ball.multiplicity
        blocks.append(points.reshape(-1, 4))
        weights.append((radial[:, None] * sphere.weights[None, :]).ravel())
        interior.append(np.ones(len(t) * sphere.size, dtype=bool))

    sector = sphere_rule(angular_level, decomposition.sector_order, decomposition.coupled, decomposition.axial)
    for piece in decomposition.pieces:
        breaks = [piece.lower, *piece.breaks, piece.upper]
        t, w_t = panel_rule(sorted(set(breaks)), radial_order)
        points = (piece.radius(t)[:, None, None] * sector.directions[None, :, :]).reshape(-1, 4)
        radial = w_t * piece.jacobian(t) * decomposition.exterior_multiplicity
        w = (radial[:, None] * sector.weights[None, :]).ravel() * decomposition.exterior_weight(points)
        blocks.append(points)
        weights.append(w)
        interior.append(np.zeros(len(w), dtype=bool))

    weights = np.concatenate(weights)
    keep = weights != 0.0
    return CubatureRule(np.concatenate(blocks)[keep], weights[keep], np.concatenate(interior)[keep],
                        decomposition.exterior_multiplicity)
