"""
Hiérarchie des erreurs de la boîte à outils.

Chaque erreur porte un code de sortie (2 pour la validation, 1 pour les échecs
numériques) et un contexte sérialisable.
"""


class ToolkitError(Exception):
    """Erreur de base, convertible en JSON {"code", "message", "context"}."""

    code = 1

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self):
        return {"code": self.code, "message": self.message, "context": self.context}


class ValidationError(ToolkitError, ValueError):
    code = 2


class InvalidConfigurationError(ValidationError):
    """Configuration de bulles invalide (k, q, delta, couplages)."""


class DomainError(ValidationError):
    """Argument hors du domaine de définition (origine pour Kelvin, beta >= 0...)."""


class SymmetryError(ValidationError):
    """Champ ou opération de symétrie incompatible avec la demande."""


class NumericalError(ToolkitError, RuntimeError):
    code = 1


class BudgetExhaustedError(NumericalError):
    """Nombre maximal de subdivisions atteint avant la tolérance."""


class NonIntegrableSingularityError(NumericalError):
    """Le raffinement autour d'un pic ne converge pas."""


class IllConditionedBasisError(NumericalError):
    """Matrice de Gram trop mal conditionnée."""


class EigensolverError(NumericalError):
    pass


class NonContractionError(NumericalError):
    """L'itération de point fixe ne contracte pas."""


class MaxIterationsError(NumericalError):
    pass


class LineSearchError(NumericalError):
    """Recherche linéaire d'Armijo épuisée."""


class SingularDesignError(NumericalError):
    """Matrice de régression singulière (grille dégénérée)."""
