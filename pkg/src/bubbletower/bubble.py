# language=rst
"""
Closed-form bubbles.

The standard bubble in dimension :math:`n \\ge 4` is

.. math::

    U(y) = \\left(\\frac{2}{1+|y|^2}\\right)^{\\frac{n-2}{2}},

the positive solution of :math:`\\Delta U + \\gamma U^p = 0` with
:math:`p = \\frac{n+2}{n-2}` and :math:`\\gamma = \\frac{n(n-2)}{4}`.  Its
translates and dilates :math:`U_{\\mu,\\xi}(y) = \\mu^{-\\frac{n-2}{2}}
U(\\frac{y-\\xi}{\\mu})` solve the same equation.

All evaluators take an array of points with shape ``(..., n)`` and return an
array with shape ``(...)`` (or ``(..., n)`` for gradients).  Derivatives are
always analytic; numerical differentiation only appears in the tests.

"""

import dataclasses
import logging
import typing as T

import numpy as np

from .errors import DomainError

_logger = logging.getLogger(__name__)


class Exponents(T.NamedTuple):
    # language=rst
    """Derived constants of the critical equation in dimension *n*.

    :ivar m: the decay exponent :math:`(n-2)/2`.
    :ivar p: the critical power :math:`(n+2)/(n-2)`.
    :ivar gamma: the coefficient :math:`n(n-2)/4`.

    """
    m: float
    p: float
    gamma: float


def exponents(n: int) -> Exponents:
    check_dimension(n)
    return Exponents(m=(n - 2) / 2, p=(n + 2) / (n - 2), gamma=n * (n - 2) / 4)


def check_dimension(n: int):
    if int(n) != n or n < 4:
        raise DomainError(f"n must be ≥ 4, got {n!r}")


def as_points(y, n: int) -> np.ndarray:
    # language=rst
    """Coerces *y* to a float array whose last axis has length *n*.

    :raises: DomainError if the last axis has the wrong length.

    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 0 or y.shape[-1] != n:
        raise DomainError(f"expected points with last axis of length {n}, got shape {y.shape}")
    return y


def squared_norm(y: np.ndarray) -> np.ndarray:
    return np.einsum('...i,...i->...', y, y)


@dataclasses.dataclass(frozen=True)
class BubbleParams:
    # language=rst
    """Scale and centre of one bubble :math:`U_{\\mu,\\xi}`.

    :ivar n: the dimension.
    :ivar mu: the (positive) scale.
    :ivar xi: the centre, as a tuple of *n* floats.

    """
    n: int
    mu: float
    xi: T.Tuple[float, ...]

    def __post_init__(self):
        check_dimension(self.n)
        if not self.mu > 0:
            raise DomainError(f"mu must be > 0, got {self.mu!r}")
        if len(self.xi) != self.n:
            raise DomainError(f"centre has {len(self.xi)} coordinates, expected {self.n}")
        object.__setattr__(self, 'xi', tuple(float(c) for c in self.xi))

    @classmethod
    def standard(cls, n: int) -> 'BubbleParams':
        return cls(n=n, mu=1.0, xi=(0.0,) * n)

    @property
    def center(self) -> np.ndarray:
        return np.array(self.xi)

    @property
    def m(self) -> float:
        return (self.n - 2) / 2

    @property
    def p(self) -> float:
        return (self.n + 2) / (self.n - 2)

    @property
    def gamma(self) -> float:
        return self.n * (self.n - 2) / 4


def eval_bubble(y, n: int) -> np.ndarray:
    check_dimension(n)
    y = as_points(y, n)
    return (2.0 / (1.0 + squared_norm(y))) ** ((n - 2) / 2)


def _scaled(y, params: BubbleParams):
    # Shared work of the scaled evaluators: displacement, its squared norm and
    # the bubble value.
    w = as_points(y, params.n) - params.center
    r2 = squared_norm(w)
    mu2 = params.mu * params.mu
    value = (2.0 * params.mu / (mu2 + r2)) ** params.m
    return w, r2, mu2, value


def eval_scaled_bubble(y, params: BubbleParams) -> np.ndarray:
    return _scaled(y, params)[3]


def scaled_bubble_gradient(y, params: BubbleParams) -> np.ndarray:
    # language=rst
    """:math:`\\nabla U_{\\mu,\\xi}(y) = -(n-2)\\,U_{\\mu,\\xi}(y)\\,
    \\frac{y-\\xi}{\\mu^2+|y-\\xi|^2}`."""
    w, r2, mu2, value = _scaled(y, params)
    return -(params.n - 2) * w * (value / (mu2 + r2))[..., None]


def bubble_gradient(y, n: int) -> np.ndarray:
    return scaled_bubble_gradient(y, BubbleParams.standard(n))


def scaled_dilation(y, params: BubbleParams) -> np.ndarray:
    # language=rst
    """The dilation field :math:`\\frac{n-2}{2}U_{\\mu,\\xi} + \\nabla
    U_{\\mu,\\xi}\\cdot(y-\\xi)`, in closed form."""
    w, r2, mu2, value = _scaled(y, params)
    return params.m * value * (mu2 - r2) / (mu2 + r2)


def eval_scaled_Z(alpha: int, y, params: BubbleParams) -> np.ndarray:
    # language=rst
    """Kernel generators of the linearization around :math:`U_{\\mu,\\xi}`.

    ``alpha == 0`` gives the dilation field, ``1 <= alpha <= n`` gives
    :math:`\\partial_\\alpha U_{\\mu,\\xi}`.

    :raises: DomainError if *alpha* is out of range.

    """
    if not 0 <= alpha <= params.n:
        raise DomainError(f"alpha must lie in 0..{params.n}, got {alpha!r}")
    if alpha == 0:
        return scaled_dilation(y, params)
    return scaled_bubble_gradient(y, params)[..., alpha - 1]


def eval_Z(alpha: int, y, n: int) -> np.ndarray:
    return eval_scaled_Z(alpha, y, BubbleParams.standard(n))


def laplacian_bubble(y, params: BubbleParams) -> np.ndarray:
    """:math:`\\Delta U_{\\mu,\\xi} = -\\gamma U_{\\mu,\\xi}^p`."""
    return -params.gamma * eval_scaled_bubble(y, params) ** params.p


def kelvin(f: T.Callable[[np.ndarray], np.ndarray], y, n: int,
           weight: T.Optional[float]=None) -> np.ndarray:
    # language=rst
    """The Kelvin transform :math:`|y|^{-w} f(y/|y|^2)`.

    Parameters:
        f: a vectorized evaluator of points with shape ``(..., n)``.
        y: the evaluation points.
        n: the dimension.
        weight: the exponent *w*; defaults to :math:`n-2`, the weight under
            which the bubbles are invariant.  Densities such as the error field
            transform with weight :math:`n+2`.

    :raises: DomainError if any point is the origin.

    """
    check_dimension(n)
    y = as_points(y, n)
    r2 = squared_norm(y)
    if np.any(r2 == 0.0):
        raise DomainError("the Kelvin transform is singular at y = 0")
    w = n - 2 if weight is None else weight
    return r2 ** (-w / 2) * f(y / r2[..., None])
