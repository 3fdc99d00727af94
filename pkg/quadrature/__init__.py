"""
Intégration déterministe sur R^4 : découpage en régions, règles et sommation compensée.
"""
