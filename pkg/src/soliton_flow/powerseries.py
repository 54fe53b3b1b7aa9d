"""Truncated Laurent series in one variable ``t``.

Only what the singular-orbit startup needs: ring operations, division by a
series with a nonzero leading term, integer powers and differentiation.
Every series carries the absolute order ``top`` up to which it is kept;
results of binary operations keep the smaller of the two.
"""

from __future__ import annotations

import numpy as np


class Laurent:
    __slots__ = ("c", "v", "top")
    # make numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, coeffs, valuation=0, top=None):
        c = np.asarray(coeffs, dtype=float)
        if top is None:
            top = valuation + len(c) - 1
        keep = max(top - valuation + 1, 0)
        if len(c) < keep:
            c = np.concatenate([c, np.zeros(keep - len(c))])
        self.c = c[:keep]
        self.v = int(valuation)
        self.top = int(top)

    @classmethod
    def constant(cls, x, top):
        return cls([float(x)], 0, top)

    def coeff(self, order: int) -> float:
        k = order - self.v
        if order > self.top:
            raise IndexError(f"order {order} is beyond the kept precision {self.top}")
        if k < 0 or k >= len(self.c):
            return 0.0
        return float(self.c[k])

    def _aligned(self, other):
        other = _lift(other, self.top)
        top = min(self.top, other.top)
        v = min(self.v, other.v)
        a = np.zeros(top - v + 1)
        b = np.zeros(top - v + 1)
        a[self.v - v:self.v - v + len(self.c)] = self.c[: max(top - self.v + 1, 0)]
        b[other.v - v:other.v - v + len(other.c)] = other.c[: max(top - other.v + 1, 0)]
        return a, b, v, top

    def __add__(self, other):
        a, b, v, top = self._aligned(other)
        return Laurent(a + b, v, top)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(-self.c, self.v, self.top)

    def __sub__(self, other):
        return self + (-_lift(other, self.top))

    def __rsub__(self, other):
        return _lift(other, self.top) + (-self)

    def __mul__(self, other):
        if np.isscalar(other):
            return Laurent(self.c * float(other), self.v, self.top)
        other = _lift(other, self.top)
        v = self.v + other.v
        # a term of order o in self is only known up to self.top, so the product
        # is known up to min(self.top + other.v, other.top + self.v)
        top = min(self.top + other.v, other.top + self.v)
        prod = np.convolve(self.c, other.c)
        return Laurent(prod, v, top)

    __rmul__ = __mul__

    def _stripped(self):
        nz = np.flatnonzero(self.c)
        if len(nz) == 0:
            raise ZeroDivisionError("division by a series with no nonzero terms")
        j = nz[0]
        return self.c[j:], self.v + j

    def reciprocal(self):
        c, v = self._stripped()
        length = self.top - v + 1
        out = np.zeros(length)
        out[0] = 1.0 / c[0]
        for k in range(1, length):
            m = min(k, len(c) - 1)
            out[k] = -np.dot(c[1:m + 1], out[k - 1::-1][:m]) / c[0]
        # known through relative order ``length - 1``
        return Laurent(out, -v, -v + length - 1)

    def __truediv__(self, other):
        if np.isscalar(other):
            return Laurent(self.c / float(other), self.v, self.top)
        return self * _lift(other, self.top).reciprocal()

    def __rtruediv__(self, other):
        return _lift(other, self.top) * self.reciprocal()

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return Laurent.constant(1.0, self.top)
        out = self
        for _ in range(int(k) - 1):
            out = out * self
        return out

    def deriv(self):
        orders = np.arange(self.v, self.v + len(self.c))
        return Laurent(self.c * orders, self.v - 1, self.top - 1)

    def __call__(self, t):
        orders = np.arange(self.v, self.v + len(self.c))
        return float(np.sum(self.c * np.power(float(t), orders)))

    def __repr__(self):
        terms = [f"{x:+.6g} t^{self.v + i}" for i, x in enumerate(self.c) if x != 0]
        return f"Laurent({' '.join(terms) or '0'}; +O(t^{self.top + 1}))"


def _lift(x, top):
    if isinstance(x, Laurent):
        return x
    return Laurent.constant(x, top)
