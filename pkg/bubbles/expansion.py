"""
Passage d'une solution à deux composantes (u, v) à m = q+1 composantes.
"""
import numpy as np

from errors import DomainError
from geometry.symmetry import apply_op, conjugate_function
from bubbles.ansatz import sheet_transform


def two_to_m_expand(u, v, q):
    """Composantes [v∘T_1, ..., v∘T_q, u]."""
    if int(q) != q or q < 1:
        raise DomainError(f"q doit être un entier >= 1, reçu : {q}", q=q)
    components = [v if r == 1 else conjugate_function(sheet_transform(q, r), v) for r in range(1, q + 1)]
    components.append(u)
    return components


def reduction_identity_check(v, q, i, x):
    """
    |Σ_{r=2..q} v_r²(T_i x) - Σ_{j≠i} v_j²(x)|, avec v_r = v∘T_r.

    L'identité tient lorsque v est paire ; elle réduit le système à m
    composantes au système à deux composantes.
    """
    if not 1 <= i <= q:
        raise DomainError(f"indice hors de 1..{q} : {i}", i=i, q=q)
    x = np.asarray(x, dtype=float)
    if q == 1:
        return np.zeros(x.shape[:-1])

    def v_r(r, points):
        return v(apply_op(sheet_transform(q, r), points))

    y = apply_op(sheet_transform(q, i), x)
    left = sum(v_r(r, y) ** 2 for r in range(2, q + 1))
    right = sum(v_r(j, x) ** 2 for j in range(1, q + 1) if j != i)
    return np.abs(left - right)
