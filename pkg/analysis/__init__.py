"""
Contrôles d'invariants de la sous-commande verify.
"""
