"""
Bulles, noyau, ansatz à plusieurs bulles et termes d'erreur.
"""
