"""
Solveur de Galerkin : bases symétriques, opérateur linéarisé, point fixe et Gauss-Newton.
"""
