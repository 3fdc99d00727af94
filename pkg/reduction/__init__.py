"""
Réduction de dimension finie : projection, coefficients et lois d'échelle des résidus.
"""
