"""
Utilitaires de la boîte à outils : configuration d'exécution et exports.
"""
