"""
Termes non linéaires N1, N2 (numérotation des termes d'erreur).

Les termes linéaires portant un préfacteur β ou α font partie de N, tels
qu'écrits dans la décomposition de l'opérateur ; ils ne sont pas reclassés
dans la partie linéaire.
"""
import numpy as np

from bubbles.ansatz import radial_field
from bubbles.residuals import _sheet_values, sheet_points


def nonlinear_values(beta, alpha, u, phi, sheets, psis):
    """
    Valeurs de (N1, N2) à partir des valeurs ponctuelles.

    Args:
        beta, alpha: couplages
        u, phi: U et φ aux points
        sheets: liste [Ṽ_1, ..., Ṽ_q] aux points (anneau : [V])
        psis: liste [ψ_1, ..., ψ_q] avec ψ_r = ψ∘T_r
    """
    v, psi = sheets[0], psis[0]
    n1 = phi ** 3 + 3.0 * u * phi ** 2
    n2 = psi ** 3 + 3.0 * v * psi ** 2
    if beta != 0.0:
        for v_r, psi_r in zip(sheets, psis):
            n1 = n1 + beta * (2.0 * u * v_r * psi_r + u * psi_r ** 2 + phi * v_r ** 2
                              + 2.0 * phi * v_r * psi_r + phi * psi_r ** 2)
        n2 = n2 + beta * (psi * phi ** 2 + 2.0 * u * psi * phi + v * phi ** 2)
        n2 = n2 + beta * (u ** 2 * psi + 2.0 * u * v * phi)
    if alpha != 0.0 and len(sheets) > 1:
        for v_r, psi_r in zip(sheets[1:], psis[1:]):
            n2 = n2 + alpha * (2.0 * psi * v_r * psi_r + psi * psi_r ** 2 + v * psi_r ** 2)
            n2 = n2 + alpha * (v_r ** 2 * psi + 2.0 * v * v_r * psi_r)
    return n1, n2


def nonlinear_terms_eval(family, phi, psi, x):
    """
    (N1(φ, ψ), N2(φ, ψ)) au point x.

    Args:
        family: famille d'ansatz
        phi: champ scalaire φ (correction de U)
        psi: champ scalaire ψ (correction de V ou Ṽ)
        x: point ou tableau de points
    """
    x = np.asarray(x, dtype=float)
    u = radial_field()(x)
    _, sheets = _sheet_values(family, x)
    psis = [psi(y) for y in sheet_points(family, x)]
    return nonlinear_values(family.beta, family.alpha, u, phi(x), sheets, psis)
