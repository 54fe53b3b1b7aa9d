"""Orbit geometry and soliton parameters.

Two hypersurface types are supported:

* ``WarpedProduct`` -- a product of Einstein factors ``(M_i, h_i)`` with
  dimensions ``d_i`` and Einstein constants ``lambda_i``; factor 1 is the
  sphere that collapses at ``t = 0``.
* ``TwoSummand`` -- a homogeneous space whose isotropy representation splits
  into two irreducible summands of dimensions ``d1`` (the collapsing sphere)
  and ``d2``, with scalar-curvature constants ``A2, A3``.

Models are frozen dataclasses and safe to share between threads/processes.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ModelMismatchError


@dataclass(frozen=True)
class WarpedFactor:
    dim: int
    einstein_const: float


@dataclass(frozen=True)
class WarpedProduct:
    factors: tuple[WarpedFactor, ...]


@dataclass(frozen=True)
class TwoSummand:
    d1: int
    d2: int
    A2: float
    A3: float


class Normalization(enum.Enum):
    """How the additive freedom in the soliton potential is fixed.

    ``POTENTIAL_ZERO``: u(0) = 0 and C is free.
    ``C_ZERO``: C = 0 and u(0) is free.  The potential bounds are then
    applied to ``u - u(0)`` with the shifted constant ``C + eps*u(0)``.
    """

    POTENTIAL_ZERO = "potential_zero"
    C_ZERO = "c_zero"


@dataclass(frozen=True)
class OrbitModel:
    kind: Union[WarpedProduct, TwoSummand]
    epsilon: float = 1.0
    C: float = 0.0
    k: int = field(default=-1)

    def __post_init__(self):
        if self.k < 0:
            k = self.kind.d1 if isinstance(self.kind, TwoSummand) else self.kind.factors[0].dim
            object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "C", float(self.C))

    @classmethod
    def warped(cls, dims: Sequence[int], lambdas: Sequence[float], epsilon=1.0, C=0.0, k=-1):
        if len(dims) != len(lambdas):
            raise ValueError("dims and lambdas must have the same length")
        factors = tuple(WarpedFactor(int(d), float(l)) for d, l in zip(dims, lambdas))
        return cls(WarpedProduct(factors), epsilon=epsilon, C=C, k=k)

    @classmethod
    def two_summand(cls, d1, d2, A2, A3, epsilon=1.0, C=0.0):
        return cls(TwoSummand(int(d1), int(d2), float(A2), float(A3)), epsilon=epsilon, C=C)

    @property
    def is_warped(self) -> bool:
        return isinstance(self.kind, WarpedProduct)

    @property
    def dims(self) -> np.ndarray:
        if self.is_warped:
            return np.array([f.dim for f in self.kind.factors], dtype=float)
        return np.array([self.kind.d1, self.kind.d2], dtype=float)

    @property
    def lambdas(self) -> np.ndarray:
        if not self.is_warped:
            raise ModelMismatchError("Einstein constants are only defined for warped products")
        return np.array([f.einstein_const for f in self.kind.factors], dtype=float)

    @property
    def r(self) -> int:
        """Number of warping functions."""
        return len(self.kind.factors) if self.is_warped else 2

    @property
    def n(self) -> int:
        return total_dim(self)

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


def require_warped(model: OrbitModel) -> None:
    if not model.is_warped:
        raise ModelMismatchError(f"expected a warped-product model, got {type(model.kind).__name__}")


def require_two_summand(model: OrbitModel) -> None:
    if model.is_warped:
        raise ModelMismatchError("expected a two-summand model, got WarpedProduct")


def total_dim(model: OrbitModel) -> int:
    """Dimension n of the principal orbit (the hypersurface)."""
    if isinstance(model.kind, TwoSummand):
        return model.kind.d1 + model.kind.d2
    return sum(f.dim for f in model.kind.factors)


def validate(model: OrbitModel, u0: float) -> list[str]:
    """Return the list of violated model invariants (empty when valid).

    ``u0`` is the value of the potential on the singular orbit; the last check
    is the necessary condition ``C + eps*u0 < 0`` for non-Einstein expanders.
    """
    out = []
    if not model.epsilon > 0:
        out.append("epsilon-nonpositive: expanding solitons need epsilon > 0")
    kind = model.kind
    if isinstance(kind, WarpedProduct):
        if not kind.factors:
            out.append("no-factors: a warped product needs at least one factor")
            return out
        for i, f in enumerate(kind.factors, start=1):
            if f.dim < 1:
                out.append(f"dim-nonpositive: factor {i} has dim {f.dim}")
            if f.einstein_const < 0:
                out.append(f"einstein-const-negative: factor {i} has lambda {f.einstein_const}")
            elif f.einstein_const == 0 and f.dim != 1:
                out.append(f"flat-factor-dim: factor {i} is flat but has dim {f.dim} != 1")
        n = total_dim(model)
        if any(f.einstein_const > 0 for f in kind.factors) and n < 3:
            out.append(f"total-dim-too-small: n = {n} < 3 with a non-flat factor")
        first = kind.factors[0]
        if model.k != first.dim:
            out.append(f"collapsing-dim: k = {model.k} but factor 1 has dim {first.dim}")
        if model.k == 1:
            if first.einstein_const != 0:
                out.append("circle-startup: collapsing circle factor must have lambda = 0")
            if any(f.einstein_const <= 0 for f in kind.factors[1:]):
                out.append("circle-startup: factors 2..r must have lambda > 0")
        elif model.k > 1 and not math.isclose(first.einstein_const, model.k - 1):
            out.append(f"round-sphere: collapsing S^{model.k} needs lambda = {model.k - 1}")
    else:
        if kind.d1 < 1 or kind.d2 < 1:
            out.append(f"dim-nonpositive: (d1, d2) = ({kind.d1}, {kind.d2})")
        if not kind.A2 > 0:
            out.append(f"A2-nonpositive: A2 = {kind.A2}")
        if not kind.A3 > 0:
            out.append(f"A3-nonpositive: A3 = {kind.A3}")
        if model.k != kind.d1:
            out.append(f"collapsing-dim: k = {model.k} must equal d1 = {kind.d1}")
    if not model.C + model.epsilon * u0 < 0:
        out.append(f"E-nonnegative: E(0) = C + eps*u0 = {model.C + model.epsilon * u0} >= 0")
    return out


def _example1(m):
    return OrbitModel.two_summand(2, 4 * m, 2 * m * (m + 2), m / 2, epsilon=1.0, C=0.0)


def _example2(m):
    return OrbitModel.two_summand(3, 4 * m, 4 * m * (m + 2), 3 * m / 4, epsilon=1.0, C=0.0)


PRESETS = {f"example{j}-m{m}": (f, m) for j, f in ((1, _example1), (2, _example2)) for m in range(1, 5)}


def preset(name: str) -> OrbitModel:
    """Two-summand models over quaternionic projective space.

    ``example1-mM``: twistor space of HP^M (d1=2, d2=4M).
    ``example2-mM``: the Sp(1)-bundle S^{4M+3} -> HP^M (d1=3, d2=4M).
    """
    try:
        factory, m = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(m)
