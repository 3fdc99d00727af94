"""
Somme compensée à la Shewchuk : l'ordre d'ajout étant fixé, le résultat est
reproductible bit à bit.
"""


def two_sum(u, v):
    """Transformation exacte : u + v = s + t avec s = fl(u + v)."""
    s = u + v
    up = s - v
    vpp = s - up
    up -= u
    vpp -= v
    return s, -(up + vpp)


class CompensatedSum:
    """Accumulateur [s, t] dont la somme exacte est approchée à 1 ulp près."""

    def __init__(self, value=0.0):
        self._s = float(value)
        self._t = 0.0

    def add(self, value):
        y, u = two_sum(float(value), self._t)
        self._s, self._t = two_sum(y, self._s)
        if self._s == 0.0:
            self._s = u
        else:
            self._t += u
        return self

    def extend(self, values):
        for value in values:
            self.add(value)
        return self

    @property
    def value(self):
        return self._s + self._t
