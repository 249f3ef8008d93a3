# language=rst
"""
The approximate solution and its error.

With no correction, the approximate solution is the central bubble minus the
two rings,

.. math::

    U_* = U - \\sum_j U_{\\mu,\\xi_j} - \\sum_l U_{\\lambda,\\eta_l},

and its error is :math:`E = \\Delta U_* + \\gamma|U_*|^{p-1}U_*`.  Every bubble
solves :math:`\\Delta U + \\gamma U^p = 0`, so

.. math::

    E = \\gamma\\Big(|U_*|^{p-1}U_* - U^p + \\sum_j U_{\\mu,\\xi_j}^p +
    \\sum_l U_{\\lambda,\\eta_l}^p\\Big)

without any numerical differentiation.

"""

import dataclasses
import logging
import math
import typing as T

import numpy as np

import lab_utils

from .bubble import as_points, exponents, squared_norm
from .configuration import TowerConfiguration, make_configuration
from .errors import DomainError
from .quadrature import (
    EXTERIOR, Cell, QuadratureScheme, QuadratureSettings, norm_weight_exponent, region_integrals
)
from .scalar_field import ScalarField

_logger = logging.getLogger(__name__)


RING1, RING2 = 'ring1', 'ring2'


def _sites(config: TowerConfiguration):
    # Yields (centre, scale) of every ring bubble; ring 1 first.
    for xi in config.xi:
        yield xi, config.mu
    for eta in config.eta:
        yield eta, config.lam


def _bubble_and_gradient(y: np.ndarray, center: np.ndarray, scale: float, n: int):
    w = y - center
    denominator = scale * scale + squared_norm(w)
    value = (2.0 * scale / denominator) ** ((n - 2) / 2)
    return value, -(n - 2) * w * (value / denominator)[..., None]


def ring_bubble_values(config: TowerConfiguration, y) -> T.Tuple[np.ndarray, np.ndarray]:
    # language=rst
    """Values of all ring bubbles, as arrays of shape ``(..., k)`` and ``(..., h)``."""
    y = as_points(y, config.n)
    m = (config.n - 2) / 2

    def ring(centers, scale):
        if len(centers) == 0:
            return np.zeros(y.shape[:-1] + (0,))
        return np.stack([(2.0 * scale / (scale * scale + squared_norm(y - c))) ** m for c in centers],
                        axis=-1)

    return ring(config.xi, config.mu), ring(config.eta, config.lam)


def eval_Ustar(config: TowerConfiguration, y) -> np.ndarray:
    y = as_points(y, config.n)
    result = (2.0 / (1.0 + squared_norm(y))) ** ((config.n - 2) / 2)
    m = (config.n - 2) / 2
    for center, scale in _sites(config):
        result = result - (2.0 * scale / (scale * scale + squared_norm(y - center))) ** m
    return result


def eval_Ustar_gradient(config: TowerConfiguration, y) -> np.ndarray:
    y = as_points(y, config.n)
    n = config.n
    value, gradient = _bubble_and_gradient(y, np.zeros(n), 1.0, n)
    for center, scale in _sites(config):
        gradient = gradient - _bubble_and_gradient(y, center, scale, n)[1]
    return gradient


def eval_error(config: TowerConfiguration, y) -> np.ndarray:
    y = as_points(y, config.n)
    m, p, gamma = exponents(config.n)
    central = (2.0 / (1.0 + squared_norm(y))) ** m
    ustar = central.copy()
    powers = -central ** p
    for center, scale in _sites(config):
        bubble = (2.0 * scale / (scale * scale + squared_norm(y - center))) ** m
        ustar -= bubble
        powers += bubble ** p
    return gamma * (np.abs(ustar) ** (p - 1) * ustar + powers)


def nonlinear_remainder(config: TowerConfiguration, phi: ScalarField, y) -> np.ndarray:
    # language=rst
    """:math:`N(\\phi) = |U_*+\\phi|^{p-1}(U_*+\\phi) - |U_*|^{p-1}U_* - p|U_*|^{p-1}\\phi`."""
    y = as_points(y, config.n)
    p = exponents(config.n).p
    u = eval_Ustar(config, y)
    v = phi(y)
    total = u + v
    return np.abs(total) ** (p - 1) * total - np.abs(u) ** (p - 1) * u - p * np.abs(u) ** (p - 1) * v


def cutoff_profile(s, orientation: str='inner') -> np.ndarray:
    # language=rst
    """The step :math:`\\zeta`.

    ``'inner'``: 1 for :math:`s \\le 1`, 0 for :math:`s \\ge 2` and the cubic
    Hermite step :math:`1 - 3t^2 + 2t^3`, :math:`t = s - 1`, in between.
    ``'outer'`` is its complement.

    """
    t = np.clip(np.asarray(s, dtype=float) - 1.0, 0.0, 1.0)
    inner = 1.0 - t * t * (3.0 - 2.0 * t)
    if orientation == 'inner':
        return inner
    if orientation == 'outer':
        return 1.0 - inner
    raise DomainError(f"unknown cutoff orientation {orientation!r}")


def cutoff(config: TowerConfiguration, y, ring: str, index: int, alpha: float=1.0,
           orientation: str='inner') -> np.ndarray:
    # language=rst
    """The cutoff :math:`\\bar\\zeta_j` (``ring='ring1'``) or :math:`\\hat\\zeta_l`.

    For :math:`|y| \\le 1` the argument is :math:`s = (k/\\alpha)|y - \\xi_j|`;
    for :math:`|y| > 1` the same expression is evaluated at :math:`y/|y|^2`,
    which makes the cutoff invariant under the Kelvin transform.

    :raises: DomainError for an unknown ring or an index out of range.

    """
    y = as_points(y, config.n)
    if ring == RING1:
        centers, count = config.xi, config.k
    elif ring == RING2:
        centers, count = config.eta, config.h
    else:
        raise DomainError(f"ring must be {RING1!r} or {RING2!r}, got {ring!r}")
    if not 0 <= index < count:
        raise DomainError(f"{ring} index must lie in 0..{count - 1}, got {index!r}")
    r2 = squared_norm(y)
    outside = r2 > 1.0
    reflected = np.where(outside[..., None], y / np.where(outside, r2, 1.0)[..., None], y)
    s = (count / alpha) * np.sqrt(squared_norm(reflected - centers[index]))
    return cutoff_profile(s, orientation)


def _symmetry_tags(config: TowerConfiguration) -> T.FrozenSet[str]:
    tags = {'even-mask', 'kelvin-even'}
    if config.k:
        tags |= {'ring1-invariant', 'ring2-invariant'}
    return frozenset(tags)


def ustar_field(config: TowerConfiguration) -> ScalarField:
    return ScalarField(
        lambda y: eval_Ustar(config, y), config.n, _symmetry_tags(config),
        decay_exponent=config.n - 2, config=config, name='U*'
    )


def error_field(config: TowerConfiguration) -> ScalarField:
    # language=rst
    """:math:`E` as a field; it transforms with weight :math:`n+2` under Kelvin."""
    return ScalarField(
        lambda y: eval_error(config, y), config.n, _symmetry_tags(config),
        decay_exponent=config.n + 2, kelvin_weight=config.n + 2, config=config, name='E'
    )


@dataclasses.dataclass(frozen=True)
class ErrorBreakdown:
    # language=rst
    """Weighted norms of the error per region.

    :ivar exterior_norm: :math:`\\|E\\|_{**}` outside all balls.
    :ivar interior_ring1_norm: per *j*, :math:`\\|\\bar E_j\\|_{**}` of the
        rescaled error :math:`\\bar E_j(z) = \\mu^{(n+2)/2} E(\\xi_j + \\mu z)`
        on :math:`|z| < \\bar\\alpha/(\\mu k)`.
    :ivar interior_ring2_norm: the same around every :math:`\\eta_l`.
    :ivar predicted_exponents: the exponents of *k* in the bounds
        :math:`C(k^{1-n/q} + h^{1-n/q})`, :math:`Ck^{-n/q}` and :math:`Ch^{-n/q}`.

    """
    k: int
    h: int
    q: float
    exterior_norm: float
    interior_ring1_norm: T.Tuple[float, ...]
    interior_ring2_norm: T.Tuple[float, ...]
    predicted_exponents: T.Mapping[str, float]
    converged: bool

    def region_norms(self) -> T.Dict[str, float]:
        # language=rst
        """One representative norm per region kind; ring entries agree by symmetry."""
        return {
            'exterior': self.exterior_norm,
            RING1: self.interior_ring1_norm[0] if self.interior_ring1_norm else math.nan,
            RING2: self.interior_ring2_norm[0] if self.interior_ring2_norm else math.nan,
        }


def predicted_exponents(n: int, q: float) -> T.Dict[str, float]:
    return {'exterior': 1.0 - n / q, RING1: -n / q, RING2: -n / q}


def error_breakdown(config: TowerConfiguration, scheme: QuadratureScheme) -> ErrorBreakdown:
    # language=rst
    """Computes the region norms of the error in one pass over the scheme.

    Interior regions are integrated in the rescaled variable *z*, exactly as
    substituted; the exterior in *y*.

    :raises: DomainError if *config* has no rings, or if *scheme* wasn't built
        for *config*.

    """
    if config.k == 0 or config.h == 0:
        raise DomainError("no rings: the error norms need k ≥ 3 and h ≥ 3")
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")
    n, q = config.n, scheme.settings.q
    a = norm_weight_exponent(n, q)

    def density(cell: Cell) -> np.ndarray:
        error = eval_error(config, cell.points)
        result = np.abs((1.0 + np.sqrt(squared_norm(cell.points))) ** a * error) ** q
        if cell.patch is not None:
            inner = cell.region != EXTERIOR
            scale = cell.patch.scale
            z = cell.local[inner]
            rescaled = scale ** ((n + 2) / 2) * error[inner]
            # dz = dy / scale^n
            result[inner] = np.abs((1.0 + np.sqrt(squared_norm(z))) ** a * rescaled) ** q / scale ** n
        return result

    result = region_integrals(scheme, density, 'error norms')
    norms = np.asarray(result.value) ** (1.0 / q)
    k = config.k
    breakdown = ErrorBreakdown(
        k=config.k, h=config.h, q=q,
        exterior_norm=float(norms[EXTERIOR]),
        interior_ring1_norm=tuple(float(v) for v in norms[1:1 + k]),
        interior_ring2_norm=tuple(float(v) for v in norms[1 + k:]),
        predicted_exponents=predicted_exponents(n, q),
        converged=result.converged,
    )
    shown = breakdown.region_norms()
    _logger.info("Error norms for k=%d h=%d: exterior %.4e, ring 1 %.4e, ring 2 %.4e",
                 config.k, config.h, shown['exterior'], shown[RING1], shown[RING2])
    return breakdown


@dataclasses.dataclass(frozen=True)
class ErrorScan:
    # language=rst
    """Error breakdowns over a list of ring sizes, with fitted exponents.

    :ivar fitted_exponents: the log-log slope of every region norm against *k*;
        ``nan`` when fewer than two sizes were scanned.

    """
    n: int
    q: float
    rows: T.Tuple[ErrorBreakdown, ...]
    fitted_exponents: T.Mapping[str, float]

    CSV_COLUMNS = ('k', 'h', 'q', 'region', 'norm', 'predicted_exponent', 'fitted_exponent')

    def csv_rows(self) -> T.List[T.Dict[str, T.Any]]:
        rows = []
        for breakdown in self.rows:
            for region, norm in breakdown.region_norms().items():
                rows.append({
                    'k': breakdown.k,
                    'h': breakdown.h,
                    'q': self.q,
                    'region': region,
                    'norm': norm,
                    'predicted_exponent': breakdown.predicted_exponents[region],
                    'fitted_exponent': self.fitted_exponents[region],
                })
        return rows


def error_scan(n: int, ks: T.Sequence[int], delta: float, eps: float,
               settings: T.Optional[QuadratureSettings]=None, h_ratio: float=1.0) -> ErrorScan:
    # language=rst
    """Error breakdowns for every *k* in *ks*, with :math:`h = \\mathrm{round}(h_{ratio} k)`.

    The exponents are fitted with :func:`lab_utils.loglog_slope`.

    """
    settings = settings or QuadratureSettings()
    rows = []
    for k in ks:
        h = max(3, int(round(h_ratio * k)))
        config = make_configuration(n, k, h, delta, eps)
        rows.append(error_breakdown(config, QuadratureScheme.for_configuration(config, settings)))
    fitted = {}
    for region in ('exterior', RING1, RING2):
        if len(rows) < 2:
            fitted[region] = math.nan
        else:
            fitted[region] = lab_utils.loglog_slope(
                [row.k for row in rows], [row.region_norms()[region] for row in rows]
            )
    _logger.info("Fitted error exponents: %s", fitted)
    return ErrorScan(n=n, q=settings.q, rows=tuple(rows), fitted_exponents=fitted)
