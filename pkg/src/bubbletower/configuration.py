# language=rst
"""
Two-ring tower geometry.

A configuration places *k* bubbles of scale :math:`\\mu` on a circle in the
:math:`(y_1, y_2)`-plane and *h* bubbles of scale :math:`\\lambda` on a circle
in the :math:`(y_3, y_4)`-plane:

.. math::

    \\mu = \\frac{\\delta^{2/(n-2)}}{k^2},\\quad
    \\lambda = \\frac{\\varepsilon^{2/(n-2)}}{h^2},\\quad
    \\xi_j = \\sqrt{1-\\mu^2}\\,(\\cos\\bar\\theta_j, \\sin\\bar\\theta_j, 0, \\ldots),\\quad
    \\eta_l = \\sqrt{1-\\lambda^2}\\,(0, 0, \\cos\\hat\\theta_l, \\sin\\hat\\theta_l, 0, \\ldots)

with :math:`\\bar\\theta_j = 2\\pi(j-1)/k` and :math:`\\hat\\theta_l = 2\\pi(l-1)/h`.
The radii make every bubble invariant under the Kelvin transform.

Indices are 0-based in code: ``xi[0]`` is :math:`\\xi_1`.

"""

import dataclasses
import itertools
import logging
import math
import typing as T

import numpy as np

from .bubble import BubbleParams, as_points, check_dimension
from .errors import DomainError
from .frozen import frozen

_logger = logging.getLogger(__name__)


ADMISSIBLE_BOX = (0.1, 10.0)
# language=rst
"""Closed box for :math:`\\delta` and :math:`\\varepsilon` searched by the reduced solver."""

SMALL_RING_THRESHOLD = 8
# language=rst
"""Ring sizes below this value are accepted but flagged in every report."""

REFLECTABLE = frozenset({2, 4})
# language=rst
"""1-based coordinates whose reflection is a symmetry in every dimension.

Coordinates 5 up to *n* are reflectable as well.

"""


def _frozen_array(a) -> np.ndarray:
    return frozen(np.asarray(a, dtype=float))


@dataclasses.dataclass(frozen=True, eq=False)
class TowerConfiguration:
    # language=rst
    """Immutable two-ring geometry.

    Equality and hashing only look at the five primaries; every other field
    is derived from them by :func:`make_configuration`.

    """
    n: int
    k: int
    h: int
    delta: float
    eps: float
    mu: float
    lam: float
    xi: np.ndarray
    eta: np.ndarray
    theta_bar: np.ndarray
    theta_hat: np.ndarray

    def primaries(self) -> T.Tuple[int, int, int, float, float]:
        return self.n, self.k, self.h, self.delta, self.eps

    def __eq__(self, other):
        if not isinstance(other, TowerConfiguration):
            return NotImplemented
        return self.primaries() == other.primaries()

    def __hash__(self):
        return hash(self.primaries())

    @property
    def ring1_radius(self) -> float:
        return math.sqrt(1.0 - self.mu * self.mu) if self.k else 0.0

    @property
    def ring2_radius(self) -> float:
        return math.sqrt(1.0 - self.lam * self.lam) if self.h else 0.0

    @property
    def xi_perp(self) -> np.ndarray:
        # language=rst
        """:math:`\\xi_j^\\perp = (-\\xi_{j2}, \\xi_{j1}, 0, \\ldots)`, one row per site."""
        perp = np.zeros_like(self.xi)
        perp[:, 0] = -self.xi[:, 1]
        perp[:, 1] = self.xi[:, 0]
        return perp

    @property
    def eta_perp(self) -> np.ndarray:
        # language=rst
        """:math:`\\eta_l^\\perp = (0, 0, -\\eta_{l4}, \\eta_{l3}, 0, \\ldots)`, one row per site."""
        perp = np.zeros_like(self.eta)
        perp[:, 2] = -self.eta[:, 3]
        perp[:, 3] = self.eta[:, 2]
        return perp

    @property
    def small_rings(self) -> bool:
        return self.k < SMALL_RING_THRESHOLD or self.h < SMALL_RING_THRESHOLD

    @property
    def ring_ratio(self) -> float:
        return self.k / self.h if self.h else math.inf

    def ring1_params(self, j: int) -> BubbleParams:
        return BubbleParams(n=self.n, mu=self.mu, xi=tuple(self.xi[j]))

    def ring2_params(self, l: int) -> BubbleParams:
        return BubbleParams(n=self.n, mu=self.lam, xi=tuple(self.eta[l]))

    def to_mapping(self) -> T.Dict[str, T.Any]:
        # language=rst
        """JSON-ready form: the five primaries plus the derived geometry."""
        return {
            'n': self.n,
            'k': self.k,
            'h': self.h,
            'delta': self.delta,
            'eps': self.eps,
            'mu': self.mu,
            'lambda': self.lam,
            'k_over_h': self.ring_ratio,
            'small_rings': self.small_rings,
            'xi': self.xi.tolist(),
            'eta': self.eta.tolist(),
        }


def _ring(n: int, count: int, scale: float, first_axis: int):
    angles = 2.0 * np.pi * np.arange(count) / count
    radius = math.sqrt(1.0 - scale * scale)
    points = np.zeros((count, n))
    points[:, first_axis] = radius * np.cos(angles)
    points[:, first_axis + 1] = radius * np.sin(angles)
    return points, angles


def make_configuration(n: int, k: int, h: int, delta: float, eps: float) -> TowerConfiguration:
    # language=rst
    """Builds and validates a two-ring configuration.

    :raises: DomainError if a primary is out of range, or if a scale is not
        below 1 (the centres would leave the unit ball).

    """
    check_dimension(n)
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer ≥ 3, got {k!r}")
    if int(h) != h or h < 3:
        raise DomainError(f"h must be an integer ≥ 3, got {h!r}")
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta!r}")
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    n, k, h, delta, eps = int(n), int(k), int(h), float(delta), float(eps)
    mu = delta ** (2 / (n - 2)) / k ** 2
    lam = eps ** (2 / (n - 2)) / h ** 2
    if mu >= 1.0:
        raise DomainError(f"delta={delta} and k={k} give mu={mu} ≥ 1")
    if lam >= 1.0:
        raise DomainError(f"eps={eps} and h={h} give lambda={lam} ≥ 1")
    xi, theta_bar = _ring(n, k, mu, 0)
    eta, theta_hat = _ring(n, h, lam, 2)
    config = TowerConfiguration(
        n=n, k=k, h=h, delta=delta, eps=eps, mu=mu, lam=lam,
        xi=_frozen_array(xi), eta=_frozen_array(eta),
        theta_bar=_frozen_array(theta_bar), theta_hat=_frozen_array(theta_hat)
    )
    if config.small_rings:
        _logger.warning("Ring sizes k=%d, h=%d are below %d; results are for oracle tests only.",
                        k, h, SMALL_RING_THRESHOLD)
    _logger.debug("Configuration n=%d k=%d h=%d delta=%g eps=%g: mu=%g lambda=%g",
                  n, k, h, delta, eps, mu, lam)
    return config


def single_bubble(n: int) -> TowerConfiguration:
    # language=rst
    """The degenerate configuration without rings.

    Only meant for tests: its approximate solution is the standard bubble,
    which solves the equation exactly.

    """
    check_dimension(n)
    empty = _frozen_array(np.zeros((0, n)))
    no_angles = _frozen_array(np.zeros(0))
    return TowerConfiguration(
        n=n, k=0, h=0, delta=0.0, eps=0.0, mu=0.0, lam=0.0,
        xi=empty, eta=empty, theta_bar=no_angles, theta_hat=no_angles
    )


def _rotate_plane(y: np.ndarray, axis: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    a, b = y[..., axis].copy(), y[..., axis + 1].copy()
    y[..., axis] = c * a - s * b
    y[..., axis + 1] = s * a + c * b
    return y


def symmetry_orbit(config: TowerConfiguration, y, j: int=0, l: int=0,
                   signs: T.Iterable[int]=()) -> np.ndarray:
    # language=rst
    """Applies a symmetry of the configuration to the points *y*.

    Parameters:
        j: rotate by :math:`2\\pi j/k` in the :math:`(y_1,y_2)`-plane.
        l: rotate by :math:`2\\pi l/h` in the :math:`(y_3,y_4)`-plane.
        signs: 1-based coordinates to reflect; a subset of
            :math:`\\{2, 4, 5, \\ldots, n\\}`.

    :raises: DomainError for a coordinate that isn't reflectable.

    """
    y = as_points(y, config.n).copy()
    signs = frozenset(signs)
    allowed = REFLECTABLE | set(range(5, config.n + 1))
    if not signs <= allowed:
        raise DomainError(f"coordinates {sorted(signs - allowed)} are not reflectable")
    if j % max(config.k, 1):
        y = _rotate_plane(y, 0, 2.0 * math.pi * j / config.k)
    if l % max(config.h, 1):
        y = _rotate_plane(y, 2, 2.0 * math.pi * l / config.h)
    for coordinate in sorted(signs):
        y[..., coordinate - 1] = -y[..., coordinate - 1]
    return y


def min_separation(config: TowerConfiguration) -> T.Tuple[float, float, float]:
    # language=rst
    """Smallest intra-ring and cross-ring distances between centres.

    Returns a tuple ``(ring 1, ring 2, cross)``, computed by an exhaustive
    pair scan.  Missing pairs give ``inf``.

    """
    def smallest(pairs):
        return min((float(np.linalg.norm(a - b)) for a, b in pairs), default=math.inf)

    return (
        smallest(itertools.combinations(config.xi, 2)),
        smallest(itertools.combinations(config.eta, 2)),
        smallest(itertools.product(config.xi, config.eta)),
    )
