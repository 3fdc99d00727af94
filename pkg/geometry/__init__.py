"""
Géométrie de R^4 : champs scalaires, symétries, configurations de centres et cônes.
"""
