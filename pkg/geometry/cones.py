"""
Domaines fondamentaux pour l'intégration réduite par symétrie.
"""
import math

import numpy as np

from geometry.configurations import ConfigurationKind

_BOUNDARY_SLACK = 1e-12


def plane_angles(x):
    """Angles polaires (θ1, θ2) dans les plans (x1, x2) et (x3, x4)."""
    x = np.asarray(x, dtype=float)
    return np.arctan2(x[..., 1], x[..., 0]), np.arctan2(x[..., 3], x[..., 2])


def _in_interval(theta, k):
    # I = {θ : θ à distance <= π/k d'un multiple de π}
    return np.abs(np.remainder(theta + math.pi / 2.0, math.pi) - math.pi / 2.0) <= math.pi / k + _BOUNDARY_SLACK


def in_fundamental_cone(x, k, mode):
    """
    Appartenance au cône fondamental (fermé).

    Anneau : |θ1| <= π/k. Tore : (θ1, θ2) ∈ Λ_k, réunion des régions où au
    moins un des deux angles est à distance <= π/k de 0 ou de π.
    """
    mode = ConfigurationKind(mode)
    theta1, theta2 = plane_angles(x)
    if mode is ConfigurationKind.RING:
        return np.abs(theta1) <= math.pi / k + _BOUNDARY_SLACK
    return _in_interval(theta1, k) | _in_interval(theta2, k)


def cone_weight(theta1, theta2, k):
    """Poids (k/2)(2·1_{Λ¹} + 1_{Λ²} + 1_{Λ³}) = (k/2)(1_I(θ1) + 1_I(θ2))."""
    return 0.5 * k * (_in_interval(np.asarray(theta1), k).astype(float)
                      + _in_interval(np.asarray(theta2), k).astype(float))


def cone_identity_sums(g, k, nodes):
    """
    Les deux membres de l'identité de cône sur la grille du tore plat.

    Pour g(θ1, θ2) invariante par (θ1, θ2) -> (θ1 + 2π/k, θ2 + 2π/k), renvoie
    (∫ poids·g, 2∫ g) calculés par la règle du point milieu à `nodes` nœuds
    par direction (multiple de 2k).
    """
    step = 2.0 * math.pi / nodes
    theta = -math.pi + (np.arange(nodes) + 0.5) * step
    t1, t2 = np.meshgrid(theta, theta, indexing="ij")
    values = g(t1, t2)
    weighted = float(np.sum(cone_weight(t1, t2, k) * values)) * step ** 2
    plain = 2.0 * float(np.sum(values)) * step ** 2
    return weighted, plain
