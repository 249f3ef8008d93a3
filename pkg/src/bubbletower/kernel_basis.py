# language=rst
"""
Kernel candidates of the linearized operator.

The linearization of :math:`\\Delta u + \\gamma|u|^{p-1}u` at the approximate
solution :math:`u = U_*` is

.. math::

    L(\\varphi) = \\Delta\\varphi + p\\gamma|u|^{p-1}\\varphi.

Its approximate kernel is spanned by the infinitesimal generators of the
invariances of the equation, applied to *u*:

=====================  =========================================================
:math:`z_0`            dilation, :math:`\\frac{n-2}{2}u + \\nabla u\\cdot y`
:math:`z_a`            translations, :math:`\\partial_a u`, :math:`a = 1..n`
:math:`z_{n+1}`        rotation in the :math:`(y_1,y_2)`-plane
:math:`z_{n+2}`        rotation in the :math:`(y_3,y_4)`-plane
:math:`z_{n+2+a}`      special conformal fields
                       :math:`-2y_a z_0 + |y|^2 z_a`, :math:`a = 1..4`
remaining indices      rotations in the :math:`(y_i, y_\\alpha)`-planes with
                       :math:`i \\le 4 < \\alpha` or :math:`i \\le 2 < \\alpha \\le 4`
=====================  =========================================================

for :math:`N_0 = 5(n-1)` fields in total.  The special conformal fields are
rebased to :math:`\\mathbf{z}_{n+2+a} = (z_a - z_{n+2+a})/2`, which only
involves the bubbles whose centres have a nonzero :math:`a`-th coordinate.

Every field is a finite combination of the bubble-local fields
:func:`eval_Zgroup`, listed by :func:`z_decomposition`.  Since each local
field solves :math:`\\Delta Z = -p\\gamma B^{p-1}Z` for its own bubble *B*,

.. math::

    L(Z) = p\\gamma\\,(|u|^{p-1} - B^{p-1})\\,Z

in closed form, and :math:`L(z_\\beta)` follows by linearity.

"""

import dataclasses
import logging
import math
import typing as T

import numpy as np

import lab_utils

from .bubble import (
    BubbleParams, as_points, eval_scaled_bubble, exponents, kelvin, scaled_bubble_gradient,
    scaled_dilation, squared_norm
)
from .configuration import TowerConfiguration
from .error_field import eval_Ustar, eval_Ustar_gradient
from .errors import DomainError
from .quadrature import Cell, QuadratureScheme, integrate_cells, norm_weight_exponent
from .scalar_field import ScalarField

_logger = logging.getLogger(__name__)


RANK_THRESHOLD = 1e-6
THRESHOLD_SWEEP = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
SAMPLE_SEED = 20170
SAMPLE_RADII = (0.05, 20.0)
CORE_EXCLUSION = 2.0

CENTER, RING1, RING2 = 'center', 'ring1', 'ring2'


def N0(n: int) -> int:
    return 5 * (n - 1)


def script_N(n: int) -> int:
    # language=rst
    """Dimension of the span of all invariance generators, :math:`2n + 1 + n(n-1)/2`."""
    return 2 * n + 1 + n * (n - 1) // 2


class Site(T.NamedTuple):
    kind: str
    index: int = 0


class ZTerm(T.NamedTuple):
    # language=rst
    """One term ``coef · Z_alpha(site)`` of a decomposition."""
    coef: float
    alpha: int
    site: Site


class Generator(T.NamedTuple):
    # language=rst
    """Which invariance a field comes from.

    *kind* is ``'dilation'``, ``'translation'`` (axis *a*), ``'rotation'``
    (plane ``(a, b)``) or ``'conformal'`` (axis *a*).  Axes are 1-based.

    """
    kind: str
    a: int = 0
    b: int = 0

    @property
    def label(self) -> str:
        if self.kind == 'dilation':
            return 'dilation'
        if self.kind == 'rotation':
            return f'rotation{self.a}{self.b}'
        return f'{self.kind}{self.a}'


def generators(n: int) -> T.Tuple[Generator, ...]:
    # language=rst
    """The generator of every :math:`z_\\beta`, in index order."""
    result = [Generator('dilation')]
    result += [Generator('translation', a) for a in range(1, n + 1)]
    result += [Generator('rotation', 1, 2), Generator('rotation', 3, 4)]
    result += [Generator('conformal', a) for a in range(1, 5)]
    result += [Generator('rotation', 1, b) for b in range(3, n + 1)]
    result += [Generator('rotation', 2, b) for b in range(3, n + 1)]
    result += [Generator('rotation', 3, b) for b in range(5, n + 1)]
    result += [Generator('rotation', 4, b) for b in range(5, n + 1)]
    assert len(result) == N0(n)
    return tuple(result)


def rebasing_matrix(n: int) -> np.ndarray:
    # language=rst
    """The matrix *B* with :math:`\\mathbf{z} = Bz`; its determinant is :math:`(-1/2)^4`."""
    matrix = np.eye(N0(n))
    for a in range(1, 5):
        matrix[n + 2 + a, n + 2 + a] = -0.5
        matrix[n + 2 + a, a] = 0.5
    return matrix


def _check_beta(beta: int, n: int):
    if not 0 <= beta < N0(n):
        raise DomainError(f"beta must lie in 0..{N0(n) - 1}, got {beta!r}")


# Bubble-local fields ---------------------------------------------------------

def site_params(config: TowerConfiguration, site: Site) -> BubbleParams:
    if site.kind == CENTER:
        return BubbleParams.standard(config.n)
    if site.kind == RING1 and 0 <= site.index < config.k:
        return config.ring1_params(site.index)
    if site.kind == RING2 and 0 <= site.index < config.h:
        return config.ring2_params(site.index)
    raise DomainError(f"no site {site!r} in a configuration with k={config.k}, h={config.h}")


def _frame_vector(config: TowerConfiguration, alpha: int, site: Site) -> T.Optional[np.ndarray]:
    # Ring sites replace the Cartesian derivatives in their own plane by the
    # radial and tangential derivatives.
    if site.kind == RING1 and alpha in (1, 2):
        return config.xi[site.index] if alpha == 1 else config.xi_perp[site.index]
    if site.kind == RING2 and alpha in (3, 4):
        return config.eta[site.index] if alpha == 3 else config.eta_perp[site.index]
    return None


def eval_Zgroup(config: TowerConfiguration, alpha: int, site: Site, y) -> np.ndarray:
    # language=rst
    """Bubble-local kernel field :math:`Z_{\\alpha}` of one site.

    -   ``alpha == 0``: the dilation field of the site's bubble;
    -   ring-1 sites, ``alpha`` 1 and 2: :math:`\\xi_j\\cdot\\nabla U_j` and
        :math:`\\xi_j^\\perp\\cdot\\nabla U_j`;
    -   ring-2 sites, ``alpha`` 3 and 4: :math:`\\eta_l\\cdot\\nabla V_l` and
        :math:`\\eta_l^\\perp\\cdot\\nabla V_l`;
    -   otherwise the Cartesian derivative :math:`\\partial_\\alpha`.

    :raises: DomainError for an unknown site or *alpha* out of ``0..n``.

    """
    params = site_params(config, site)
    if not 0 <= alpha <= config.n:
        raise DomainError(f"alpha must lie in 0..{config.n}, got {alpha!r}")
    if alpha == 0:
        return scaled_dilation(y, params)
    gradient = scaled_bubble_gradient(y, params)
    frame = _frame_vector(config, alpha, site)
    if frame is not None:
        return gradient @ frame
    return gradient[..., alpha - 1]


def site_bubble(config: TowerConfiguration, site: Site, y) -> np.ndarray:
    return eval_scaled_bubble(y, site_params(config, site))


def linearized_potential(config: TowerConfiguration, y) -> np.ndarray:
    # language=rst
    """:math:`p\\gamma|U_*|^{p-1}`; for :math:`n = 4` this is :math:`6U_*^2`."""
    _, p, gamma = exponents(config.n)
    return p * gamma * np.abs(eval_Ustar(config, y)) ** (p - 1)


def eval_L_Zgroup(config: TowerConfiguration, alpha: int, site: Site, y,
                  potential: T.Optional[np.ndarray]=None) -> np.ndarray:
    # language=rst
    """:math:`L(Z_\\alpha(\\mathrm{site})) = p\\gamma(|U_*|^{p-1} - B^{p-1})Z_\\alpha`.

    Parameters:
        potential: :func:`linearized_potential` at *y*, if already computed.

    """
    _, p, gamma = exponents(config.n)
    if potential is None:
        potential = linearized_potential(config, y)
    own = p * gamma * site_bubble(config, site, y) ** (p - 1)
    return (potential - own) * eval_Zgroup(config, alpha, site, y)


def all_sites(config: TowerConfiguration) -> T.List[Site]:
    return ([Site(CENTER)] + [Site(RING1, j) for j in range(config.k)] +
            [Site(RING2, l) for l in range(config.h)])


def Pi(config: TowerConfiguration, alpha: int) -> T.Tuple[ScalarField, ...]:
    # language=rst
    """The fields :math:`(Z_{\\alpha 0}, \\bar Z_{\\alpha 1}, \\ldots, \\bar Z_{\\alpha k},
    \\hat Z_{\\alpha 1}, \\ldots, \\hat Z_{\\alpha h})`, :math:`1 + k + h` in total."""
    return tuple(
        ScalarField(lambda y, site=site: eval_Zgroup(config, alpha, site, y), config.n,
                    decay_exponent=config.n - 2, name=f'Z[{alpha}, {site.kind} {site.index}]')
        for site in all_sites(config)
    )


# Global fields -----------------------------------------------------------------

def _z_from_generator(g: Generator, y: np.ndarray, u: np.ndarray, grad: np.ndarray,
                      n: int) -> np.ndarray:
    if g.kind == 'dilation':
        return (n - 2) / 2 * u + np.einsum('...i,...i->...', grad, y)
    if g.kind == 'translation':
        return grad[..., g.a - 1]
    if g.kind == 'rotation':
        return -y[..., g.b - 1] * grad[..., g.a - 1] + y[..., g.a - 1] * grad[..., g.b - 1]
    z0 = (n - 2) / 2 * u + np.einsum('...i,...i->...', grad, y)
    return -2.0 * y[..., g.a - 1] * z0 + squared_norm(y) * grad[..., g.a - 1]


def z_values(config: TowerConfiguration, y, bold: bool=False) -> np.ndarray:
    # language=rst
    """All :math:`z_\\beta(y)` (or :math:`\\mathbf{z}_\\beta(y)`), stacked along a
    new first axis of length :math:`N_0`."""
    y = as_points(y, config.n)
    n = config.n
    u = eval_Ustar(config, y)
    grad = eval_Ustar_gradient(config, y)
    values = np.stack([_z_from_generator(g, y, u, grad, n) for g in generators(n)])
    if bold:
        for a in range(1, 5):
            values[n + 2 + a] = 0.5 * (values[a] - values[n + 2 + a])
    return values


def eval_z(beta: int, y, config: TowerConfiguration) -> np.ndarray:
    # language=rst
    """:math:`z_\\beta(y)` from :math:`U_*` and its closed-form gradient.

    :raises: DomainError if *beta* is out of ``0..N0-1``.

    """
    _check_beta(beta, config.n)
    y = as_points(y, config.n)
    return _z_from_generator(generators(config.n)[beta], y, eval_Ustar(config, y),
                             eval_Ustar_gradient(config, y), config.n)


def eval_bold_z(beta: int, y, config: TowerConfiguration) -> np.ndarray:
    _check_beta(beta, config.n)
    n = config.n
    if n + 3 <= beta <= n + 6:
        a = beta - n - 2
        return 0.5 * (eval_z(a, y, config) - eval_z(beta, y, config))
    return eval_z(beta, y, config)


def special_conformal(v: np.ndarray, grad: np.ndarray, y: np.ndarray, a: int) -> np.ndarray:
    # language=rst
    """:math:`T_a(v) = (|y|^2 - 1)\\partial_a v - 2y_a(\\frac{n-2}{2}v + \\nabla v\\cdot y)`.

    It vanishes for every Kelvin-invariant *v* that is even in :math:`y_a`.

    """
    n = y.shape[-1]
    z0 = (n - 2) / 2 * v + np.einsum('...i,...i->...', grad, y)
    return (squared_norm(y) - 1.0) * grad[..., a - 1] - 2.0 * y[..., a - 1] * z0


# Decompositions ----------------------------------------------------------------

def _ring1_derivative(config: TowerConfiguration, a: int, j: int, factor: float) -> T.List[ZTerm]:
    # factor * ∂_a U_j in terms of the site's frame fields.
    site = Site(RING1, j)
    if a > 2:
        return [ZTerm(factor, a, site)]
    r = config.ring1_radius
    c, s = math.cos(config.theta_bar[j]), math.sin(config.theta_bar[j])
    if a == 1:
        return [ZTerm(factor * c / r, 1, site), ZTerm(-factor * s / r, 2, site)]
    return [ZTerm(factor * s / r, 1, site), ZTerm(factor * c / r, 2, site)]


def _ring2_derivative(config: TowerConfiguration, a: int, l: int, factor: float) -> T.List[ZTerm]:
    site = Site(RING2, l)
    if a not in (3, 4):
        return [ZTerm(factor, a, site)]
    r = config.ring2_radius
    c, s = math.cos(config.theta_hat[l]), math.sin(config.theta_hat[l])
    if a == 3:
        return [ZTerm(factor * c / r, 3, site), ZTerm(-factor * s / r, 4, site)]
    return [ZTerm(factor * s / r, 3, site), ZTerm(factor * c / r, 4, site)]


def _bold_conformal(config: TowerConfiguration, a: int) -> T.List[ZTerm]:
    # bold z_{n+2+a}: only bubbles with a nonzero a-th centre coordinate.
    terms = []
    if a in (1, 2):
        r = config.ring1_radius
        for j in range(config.k):
            angle = config.theta_bar[j]
            coef = -r * (math.cos(angle) if a == 1 else math.sin(angle))
            terms += [ZTerm(coef, 0, Site(RING1, j)), ZTerm(coef, 1, Site(RING1, j))]
    else:
        r = config.ring2_radius
        for l in range(config.h):
            angle = config.theta_hat[l]
            coef = -r * (math.cos(angle) if a == 3 else math.sin(angle))
            terms += [ZTerm(coef, 0, Site(RING2, l)), ZTerm(coef, 3, Site(RING2, l))]
    return terms


def _rotation(config: TowerConfiguration, a: int, b: int) -> T.List[ZTerm]:
    # -y_b ∂_a u + y_a ∂_b u.  The central bubble is radial; a ring bubble
    # centred at c contributes -(c_b ∂_a - c_a ∂_b) B, up to the overall sign
    # of the rings in u.
    if (a, b) == (1, 2):
        return [ZTerm(-1.0, 2, Site(RING1, j)) for j in range(config.k)]
    if (a, b) == (3, 4):
        return [ZTerm(-1.0, 4, Site(RING2, l)) for l in range(config.h)]
    terms = []
    if a in (1, 2):
        r = config.ring1_radius
        for j in range(config.k):
            angle = config.theta_bar[j]
            coordinate = r * (math.cos(angle) if a == 1 else math.sin(angle))
            terms.append(ZTerm(-coordinate, b, Site(RING1, j)))
        if b in (3, 4):
            r = config.ring2_radius
            for l in range(config.h):
                angle = config.theta_hat[l]
                coordinate = r * (math.cos(angle) if b == 3 else math.sin(angle))
                terms.append(ZTerm(coordinate, a, Site(RING2, l)))
    else:
        r = config.ring2_radius
        for l in range(config.h):
            angle = config.theta_hat[l]
            coordinate = r * (math.cos(angle) if a == 3 else math.sin(angle))
            terms.append(ZTerm(-coordinate, b, Site(RING2, l)))
    return terms


def z_decomposition(beta: int, config: TowerConfiguration, bold: bool=False) -> T.Tuple[ZTerm, ...]:
    # language=rst
    """:math:`z_\\beta` (or :math:`\\mathbf{z}_\\beta`) as a combination of
    bubble-local fields.

    Examples, with 0-based site indices and :math:`\\bar r = |\\xi_j|`:

    -   :math:`z_0 = Z_{00} - \\sum_j(\\bar Z_{0j} + \\bar Z_{1j}) - \\sum_l(\\hat Z_{0l} + \\hat Z_{3l})`;
    -   :math:`z_{n+1} = -\\sum_j \\bar Z_{2j}`;
    -   :math:`\\mathbf{z}_{n+3} = -\\bar r\\sum_j\\cos\\bar\\theta_j(\\bar Z_{0j} + \\bar Z_{1j})`;
    -   :math:`z_{n+7} = -\\bar r\\sum_j\\cos\\bar\\theta_j\\bar Z_{3j} + \\hat r\\sum_l\\cos\\hat\\theta_l\\hat Z_{1l}`.

    :raises: DomainError if *beta* is out of range.

    """
    n = config.n
    _check_beta(beta, n)
    g = generators(n)[beta]
    if g.kind == 'dilation':
        terms = [ZTerm(1.0, 0, Site(CENTER))]
        for j in range(config.k):
            terms += [ZTerm(-1.0, 0, Site(RING1, j)), ZTerm(-1.0, 1, Site(RING1, j))]
        for l in range(config.h):
            terms += [ZTerm(-1.0, 0, Site(RING2, l)), ZTerm(-1.0, 3, Site(RING2, l))]
    elif g.kind == 'translation':
        terms = [ZTerm(1.0, g.a, Site(CENTER))]
        for j in range(config.k):
            terms += _ring1_derivative(config, g.a, j, -1.0)
        for l in range(config.h):
            terms += _ring2_derivative(config, g.a, l, -1.0)
    elif g.kind == 'rotation':
        terms = _rotation(config, g.a, g.b)
    else:
        rebased = _bold_conformal(config, g.a)
        if bold:
            terms = rebased
        else:
            # z_{n+2+a} = z_a - 2 bold z_{n+2+a}
            terms = list(z_decomposition(g.a, config)) + [
                ZTerm(-2.0 * t.coef, t.alpha, t.site) for t in rebased
            ]
    return tuple(terms)


def eval_decomposition(terms: T.Iterable[ZTerm], config: TowerConfiguration, y) -> np.ndarray:
    y = as_points(y, config.n)
    total = np.zeros(y.shape[:-1])
    for term in terms:
        total += term.coef * eval_Zgroup(config, term.alpha, term.site, y)
    return total


def linearized_residual(beta: int, config: TowerConfiguration, y, bold: bool=False) -> np.ndarray:
    # language=rst
    """:math:`L(z_\\beta)(y)`, assembled term by term from :func:`eval_L_Zgroup`."""
    y = as_points(y, config.n)
    potential = linearized_potential(config, y)
    total = np.zeros(y.shape[:-1])
    for term in z_decomposition(beta, config, bold):
        total += term.coef * eval_L_Zgroup(config, term.alpha, term.site, y, potential)
    return total


# Checks ------------------------------------------------------------------------

def sample_points(config: TowerConfiguration, count: int=100, seed: int=SAMPLE_SEED) -> np.ndarray:
    # language=rst
    """Seeded points with :math:`0.05 \\le |y| \\le 20`, log-uniform in the radius,
    outside the balls of radius :math:`2\\mu` and :math:`2\\lambda` around the
    ring centres."""
    rng = np.random.default_rng(seed)
    low, high = SAMPLE_RADII
    accepted = []
    total = 0
    while total < count:
        directions = rng.standard_normal((count, config.n))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        points = directions * np.exp(rng.uniform(math.log(low), math.log(high), count))[:, None]
        keep = np.ones(count, dtype=bool)
        for center in config.xi:
            keep &= np.linalg.norm(points - center, axis=1) > CORE_EXCLUSION * config.mu
        for center in config.eta:
            keep &= np.linalg.norm(points - center, axis=1) > CORE_EXCLUSION * config.lam
        accepted.append(points[keep])
        total += int(keep.sum())
    return np.concatenate(accepted)[:count]


def appendix_residual(beta: int, config: TowerConfiguration, sample: np.ndarray,
                      bold: bool=False) -> float:
    # language=rst
    """:math:`\\max |z_\\beta - \\sum \\mathrm{coef}\\cdot Z|` over *sample*."""
    direct = eval_bold_z(beta, sample, config) if bold else eval_z(beta, sample, config)
    decomposed = eval_decomposition(z_decomposition(beta, config, bold), config, sample)
    return float(np.max(np.abs(direct - decomposed)))


def appendix_max_residuals(config: TowerConfiguration, sample: np.ndarray) -> T.Tuple[float, ...]:
    # language=rst
    """Per :math:`\\beta`, the larger residual of the plain and the rebased identity."""
    return tuple(
        max(appendix_residual(beta, config, sample), appendix_residual(beta, config, sample, bold=True))
        for beta in range(N0(config.n))
    )


def kelvin_lemma_residual(config: TowerConfiguration, sample: np.ndarray) -> T.Dict[str, float]:
    # language=rst
    """Maximum violations of the special-conformal identities on *sample*.

    -   ``'central'``: :math:`T_a(U) = 0` for every axis *a*;
    -   ``'ring2'``: :math:`T_a(V_l) = 0` for :math:`a = 1, 2`;
    -   ``'ring1'``: :math:`T_1(U_j) = -2\\xi_{j1}(\\bar Z_{0j} + \\bar Z_{1j})`.

    """
    n = config.n
    y = as_points(sample, n)
    result = {}
    params = BubbleParams.standard(n)
    u, grad = eval_scaled_bubble(y, params), scaled_bubble_gradient(y, params)
    result['central'] = max(float(np.max(np.abs(special_conformal(u, grad, y, a)))) for a in range(1, n + 1))
    worst = 0.0
    for l in range(config.h):
        params = config.ring2_params(l)
        v, grad = eval_scaled_bubble(y, params), scaled_bubble_gradient(y, params)
        worst = max([worst] + [float(np.max(np.abs(special_conformal(v, grad, y, a)))) for a in (1, 2)])
    result['ring2'] = worst
    worst = 0.0
    for j in range(config.k):
        params = config.ring1_params(j)
        v, grad = eval_scaled_bubble(y, params), scaled_bubble_gradient(y, params)
        expected = -2.0 * config.xi[j, 0] * (eval_Zgroup(config, 0, Site(RING1, j), y) +
                                             eval_Zgroup(config, 1, Site(RING1, j), y))
        worst = max(worst, float(np.max(np.abs(special_conformal(v, grad, y, 1) - expected))))
    result['ring1'] = worst
    return result


def l_image_kelvin_residual(config: TowerConfiguration, sample: np.ndarray) -> T.Dict[str, float]:
    # language=rst
    """Relative violation of the Kelvin parity of :math:`L(Z_{\\alpha 0})`.

    With weight :math:`n+2`, :math:`L(Z_{00})` is Kelvin-odd and
    :math:`L(Z_{\\alpha 0})`, :math:`\\alpha \\ge 1`, Kelvin-even.

    """
    n = config.n
    y = as_points(sample, n)
    result = {}
    for alpha in range(n + 1):
        def image(points, alpha=alpha):
            return eval_L_Zgroup(config, alpha, Site(CENTER), points)

        values = image(y)
        sign = -1.0 if alpha == 0 else 1.0
        transformed = kelvin(image, y, n, weight=n + 2)
        scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
        result[f'alpha{alpha}'] = float(np.max(np.abs(transformed - sign * values))) / scale
    return result


# Gram matrix and residual norms ------------------------------------------------

@dataclasses.dataclass(frozen=True)
class GramResult:
    # language=rst
    """The Gram matrix :math:`G_{\\beta\\gamma} = \\int|U_*|^{p-1}\\mathbf{z}_\\beta\\mathbf{z}_\\gamma`.

    Singular values and ranks refer to the unit-diagonal scaling
    :math:`D^{-1/2}GD^{-1/2}`, which doesn't depend on how the individual
    fields are normalized.

    """
    gram: np.ndarray
    rank: int
    singular_values: T.Tuple[float, ...]
    min_singular_ratio: float
    rank_sweep: T.Mapping[float, int]
    converged: bool


def numerical_rank(singular_values: np.ndarray, threshold: float) -> int:
    return int(np.sum(singular_values > threshold * singular_values[0]))


def gram_rank(config: TowerConfiguration, scheme: QuadratureScheme,
              threshold: float=RANK_THRESHOLD) -> GramResult:
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")
    p = exponents(config.n).p

    def partial_gram(cell: Cell) -> np.ndarray:
        values = z_values(config, cell.points, bold=True)
        weights = cell.weights * np.abs(eval_Ustar(config, cell.points)) ** (p - 1)
        return (values * weights) @ values.T

    result = integrate_cells(scheme, partial_gram, 'Gram matrix')
    gram = 0.5 * (result.value + result.value.T)
    diagonal = np.sqrt(np.diag(gram))
    scaled = gram / np.outer(diagonal, diagonal)
    singular_values = np.linalg.svd(scaled, compute_uv=False)
    rank = numerical_rank(singular_values, threshold)
    sweep = {t: numerical_rank(singular_values, t) for t in THRESHOLD_SWEEP}
    _logger.info("Gram rank %d of %d (smallest singular value ratio %.3e)",
                 rank, N0(config.n), singular_values[-1] / singular_values[0])
    return GramResult(
        gram=gram, rank=rank,
        singular_values=tuple(float(s) for s in singular_values),
        min_singular_ratio=float(singular_values[-1] / singular_values[0]),
        rank_sweep=sweep,
        converged=result.converged,
    )


def residual_norms(config: TowerConfiguration, scheme: QuadratureScheme,
                   bold: bool=True) -> T.Tuple[T.Tuple[float, ...], bool]:
    # language=rst
    """:math:`\\|L(\\mathbf{z}_\\beta)\\|_{**}` for every :math:`\\beta` in one pass.

    Returns the norms and whether the quadrature converged.

    """
    n, q = config.n, scheme.settings.q
    a = norm_weight_exponent(n, q)
    count = N0(n)

    def partial(cell: Cell) -> np.ndarray:
        weight = (1.0 + np.sqrt(squared_norm(cell.points))) ** a
        rows = [np.abs(weight * linearized_residual(beta, config, cell.points, bold)) ** q
                for beta in range(count)]
        return np.stack(rows) @ cell.weights

    result = integrate_cells(scheme, partial, 'L residual norms')
    return tuple(float(v) ** (1.0 / q) for v in result.value), result.converged


@dataclasses.dataclass(frozen=True)
class KernelBasis:
    # language=rst
    """The kernel candidates of one configuration, as :class:`ScalarField` values."""
    config: TowerConfiguration

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def N0(self) -> int:
        return N0(self.n)

    @property
    def script_N(self) -> int:
        return script_N(self.n)

    def z(self, beta: int) -> ScalarField:
        _check_beta(beta, self.n)
        return ScalarField(lambda y: eval_z(beta, y, self.config), self.n,
                           decay_exponent=self.n - 3, name=f'z[{beta}]')

    def bold_z(self, beta: int) -> ScalarField:
        _check_beta(beta, self.n)
        return ScalarField(lambda y: eval_bold_z(beta, y, self.config), self.n,
                           decay_exponent=self.n - 3, name=f'bold z[{beta}]')

    def L_image(self, beta: int, bold: bool=True) -> ScalarField:
        _check_beta(beta, self.n)
        return ScalarField(lambda y: linearized_residual(beta, y=y, config=self.config, bold=bold),
                           self.n, decay_exponent=self.n + 1, name=f'L z[{beta}]')

    def labels(self) -> T.Tuple[str, ...]:
        return tuple(g.label for g in generators(self.n))

    def rebasing_determinant(self) -> float:
        return float(np.linalg.det(rebasing_matrix(self.n)))

    def fingerprint(self) -> str:
        return lab_utils.Fingerprint().update(self.config.to_mapping()).digest()
