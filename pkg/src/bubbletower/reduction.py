# language=rst
"""
The reduced equations for the ring parameters.

Projecting the equation onto the dilation field of the first bubble of each
ring, with no correction, gives the two coefficients

.. math::

    \\bar c_0(\\delta, \\varepsilon) =
        \\frac{\\int \\bar\\zeta_1 E \\bar Z_0}{\\int U_{\\mu,\\xi_1}^{p-1}\\bar Z_0^2},
    \\qquad
    \\hat c_0(\\delta, \\varepsilon) =
        \\frac{\\int \\hat\\zeta_1 E \\hat Z_0}{\\int U_{\\lambda,\\eta_1}^{p-1}\\hat Z_0^2},

and the balancing parameters are their common root.  To leading order
:math:`\\bar c_0 \\approx A\\delta(\\delta a_1 - a_2)`, so :math:`\\delta^*
\\approx a_2/a_1`; only the products :math:`A a_i` can be measured.

Coefficients are always integrated up to ``max_refine``, so that they are
smooth functions of :math:`(\\delta, \\varepsilon)` for the root finders.

"""

import concurrent.futures
import dataclasses
import logging
import math
import typing as T

import numpy as np
import scipy.optimize

import lab_utils

from .bubble import BubbleParams, eval_bubble, exponents, scaled_dilation
from .config import worker_count
from .configuration import ADMISSIBLE_BOX, TowerConfiguration, make_configuration
from .error_field import RING1, RING2, cutoff, eval_error
from .errors import DomainError, NoRootError
from .kernel_basis import Site, eval_Zgroup, site_bubble
from .quadrature import (
    EXTERIOR, BallScheme, Cell, QuadratureScheme, QuadratureSettings, integrate_cells
)

_logger = logging.getLogger(__name__)


GENUINE_ROOT_FACTOR = 1e-3
FIT_FACTORS = (0.5, 1.0, 1.5)


@dataclasses.dataclass(frozen=True)
class SolverOptions:
    # language=rst
    """Options of :func:`solve_reduced`.

    :ivar tol: target for :math:`\\max(|\\bar c_0|, |\\hat c_0|)`, relative to
        the largest coefficient of the scan.
    :ivar scan_points: geometric samples of the diagonal :math:`\\delta =
        \\varepsilon` in the admissible box.
    :ivar fd_step: relative finite-difference step of the Newton Jacobian.
    :ivar max_halvings: step halvings per Newton iteration.

    """
    tol: float = 1e-8
    max_iter: int = 50
    scan_points: int = 9
    fd_step: float = 1e-6
    max_halvings: int = 10
    box: T.Tuple[float, float] = ADMISSIBLE_BOX


# Projected coefficients ----------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ReducedCoefficients:
    # language=rst
    """Both projected coefficients of one configuration.

    :ivar pieces: per ring, the numerator split into the ball around the first
        bubble, the exterior region, the balls of the other bubbles of the same
        ring and the balls of the other ring.  The pieces add up to the
        numerator.

    """
    cbar0: float
    chat0: float
    denominator_bar: float
    denominator_hat: float
    delta: float
    eps: float
    k: int
    h: int
    n: int
    q: float
    pieces: T.Mapping[str, T.Mapping[str, float]]
    converged: bool

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return dataclasses.asdict(self)


def _split(values: np.ndarray, k: int, ring: str) -> T.Dict[str, float]:
    ring1, ring2 = values[1:1 + k], values[1 + k:]
    own = ring1 if ring == RING1 else ring2
    return {
        'ball': float(own[0]),
        'exterior': float(values[EXTERIOR]),
        'other_ring1': float(np.sum(ring1) - (own[0] if ring == RING1 else 0.0)),
        'other_ring2': float(np.sum(ring2) - (own[0] if ring == RING2 else 0.0)),
    }


def reduced_coefficients(config: TowerConfiguration, scheme: QuadratureScheme) -> ReducedCoefficients:
    # language=rst
    """Computes :math:`\\bar c_0` and :math:`\\hat c_0` in one pass.

    :raises: DomainError if *scheme* belongs to another configuration.

    """
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")
    settings = scheme.settings
    p = exponents(config.n).p
    regions = scheme.region_count
    first = {RING1: Site(RING1, 0), RING2: Site(RING2, 0)}
    alphas = {RING1: settings.alpha_bar, RING2: settings.alpha_hat}

    def partial(cell: Cell) -> np.ndarray:
        y, weights = cell.points, cell.weights
        error = eval_error(config, y)
        parts = []
        denominators = []
        for ring in (RING1, RING2):
            z0 = eval_Zgroup(config, 0, first[ring], y)
            zeta = cutoff(config, y, ring, 0, alphas[ring], settings.cutoff_orientation)
            parts.append(np.bincount(cell.region, weights=weights * zeta * error * z0, minlength=regions))
            denominators.append(np.dot(weights, site_bubble(config, first[ring], y) ** (p - 1) * z0 ** 2))
        return np.concatenate(parts + [denominators])

    result = integrate_cells(scheme, partial, 'projected coefficients', stop_early=False)
    values = result.value
    numerators = {RING1: values[:regions], RING2: values[regions:2 * regions]}
    denominator_bar, denominator_hat = values[-2:]
    coefficients = ReducedCoefficients(
        cbar0=float(np.sum(numerators[RING1]) / denominator_bar),
        chat0=float(np.sum(numerators[RING2]) / denominator_hat),
        denominator_bar=float(denominator_bar),
        denominator_hat=float(denominator_hat),
        delta=config.delta, eps=config.eps, k=config.k, h=config.h, n=config.n, q=settings.q,
        pieces={ring: _split(numerators[ring], config.k, ring) for ring in (RING1, RING2)},
        converged=result.converged,
    )
    _logger.debug("delta=%g eps=%g: cbar0=%.6e chat0=%.6e",
                  config.delta, config.eps, coefficients.cbar0, coefficients.chat0)
    return coefficients


def projected_coefficient(config: TowerConfiguration, ring: T.Union[int, str],
                          scheme: QuadratureScheme) -> float:
    # language=rst
    """:math:`\\bar c_0` for ``ring`` 1 or ``'ring1'``, :math:`\\hat c_0` for 2
    or ``'ring2'``.

    :raises: DomainError for any other ring.

    """
    ring = {1: RING1, 2: RING2}.get(ring, ring)
    if ring not in (RING1, RING2):
        raise DomainError(f"ring must be 1 or 2, got {ring!r}")
    coefficients = reduced_coefficients(config, scheme)
    return coefficients.cbar0 if ring == RING1 else coefficients.chat0


def standard_denominator(n: int, settings: T.Optional[QuadratureSettings]=None) -> float:
    # language=rst
    """:math:`\\int U^{p-1}Z_0^2`, which every projection denominator equals
    by scale invariance."""
    p = exponents(n).p
    params = BubbleParams.standard(n)

    def partial(cell: Cell) -> np.ndarray:
        return np.dot(cell.weights, eval_bubble(cell.points, n) ** (p - 1) *
                      scaled_dilation(cell.points, params) ** 2)

    return float(integrate_cells(QuadratureScheme.plain(n, settings), partial, 'denominator').value)


@dataclasses.dataclass(frozen=True)
class ClaimSplit:
    # language=rst
    """The far part :math:`|\\int(\\bar\\zeta_1 - 1)E\\bar Z_0|` of the leading
    balance against the whole :math:`|\\int E\\bar Z_0|`."""
    k: int
    far: float
    total: float
    converged: bool

    @property
    def ratio(self) -> float:
        return self.far / self.total if self.total else math.inf


def claim_split(config: TowerConfiguration, scheme: QuadratureScheme) -> ClaimSplit:
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")
    settings = scheme.settings
    site = Site(RING1, 0)

    def partial(cell: Cell) -> np.ndarray:
        y = cell.points
        density = cell.weights * eval_error(config, y) * eval_Zgroup(config, 0, site, y)
        zeta = cutoff(config, y, RING1, 0, settings.alpha_bar, settings.cutoff_orientation)
        return np.array([np.sum(density * (zeta - 1.0)), np.sum(density)])

    result = integrate_cells(scheme, partial, 'near/far split')
    far, total = result.value
    return ClaimSplit(config.k, abs(float(far)), abs(float(total)), result.converged)


# Pair interactions -----------------------------------------------------------------

def interaction_constant_limit(n: int) -> float:
    # language=rst
    """:math:`2^{(n-2)/2}\\int U^{p-1}Z_0 = -2^{(n-2)/2}\\frac{(n-2)^2}{2(n+2)}\\int U^p`.

    With :math:`\\int U^p = |S^{n-1}|\\,2^{(n+2)/2}/n`, this is
    :math:`-8\\pi^2/3` for :math:`n = 4`.  It's negative: :math:`Z_0` is
    negative wherever :math:`|y| > 1`.

    """
    m, p, _ = exponents(n)
    sphere = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    integral_Up = sphere * 2.0 ** ((n + 2) / 2) / n
    return 2.0 ** m * (m - n / p) * integral_Up


@dataclasses.dataclass(frozen=True)
class PairInteraction:
    # language=rst
    """:math:`\\int_{B(0, \\bar\\alpha/(\\mu k))} U^{p-1}Z_0\\,\\mu^{(n-2)/2}B(\\xi_1 + \\mu z)\\,dz`
    for another bubble *B*, and its ratio to the predicted decay.

    :ivar ratio: the value divided by :math:`(\\mu s)^{(n-2)/2} / |\\xi_1 - c|^{n-2}`,
        where *s* and *c* are the scale and centre of *B*.
    :ivar limit: :func:`interaction_constant_limit`.

    """
    ring: str
    index: int
    k: int
    value: float
    ratio: float
    limit: float
    converged: bool

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return dataclasses.asdict(self)


def pair_interaction(config: TowerConfiguration, index: int,
                     settings: T.Optional[QuadratureSettings]=None, ring: str=RING1) -> PairInteraction:
    # language=rst
    """Interaction of the first ring-1 bubble with bubble *index* of *ring*.

    :raises: DomainError for ``index == 0`` on ring 1, or an unknown bubble.

    """
    settings = settings or QuadratureSettings()
    if ring == RING1 and index == 0:
        raise DomainError("a bubble has no pair interaction with itself")
    other = Site(ring, index)
    params = config.ring2_params(index) if ring == RING2 else config.ring1_params(index)
    n, mu = config.n, config.mu
    m, p, _ = exponents(n)
    xi = config.xi[0]
    standard = BubbleParams.standard(n)

    def partial(cell: Cell) -> np.ndarray:
        z = cell.points
        far = mu ** m * site_bubble(config, other, xi + mu * z)
        return np.dot(cell.weights, eval_bubble(z, n) ** (p - 1) * scaled_dilation(z, standard) * far)

    ball = BallScheme(n, settings.alpha_bar / (mu * config.k), settings)
    result = integrate_cells(ball, partial, f'pair interaction {ring} {index}')
    distance = float(np.linalg.norm(xi - params.center))
    prediction = (mu * params.mu) ** m / distance ** (n - 2)
    interaction = PairInteraction(
        ring=ring, index=index, k=config.k,
        value=float(result.value),
        ratio=float(result.value) / prediction,
        limit=interaction_constant_limit(n),
        converged=result.converged,
    )
    _logger.debug("Pair interaction with %s %d: ratio %.6g (limit %.6g)",
                  ring, index, interaction.ratio, interaction.limit)
    return interaction


# Root finding --------------------------------------------------------------------

def _evaluate(n: int, k: int, h: int, settings: QuadratureSettings,
              delta: float, eps: float) -> ReducedCoefficients:
    config = make_configuration(n, k, h, delta, eps)
    return reduced_coefficients(config, QuadratureScheme.for_configuration(config, settings))


def _evaluate_many(n: int, k: int, h: int, settings: QuadratureSettings,
                   points: T.Sequence[T.Tuple[float, float]]) -> T.List[ReducedCoefficients]:
    # Concurrent evaluations; results keep the order of *points*.
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(worker_count(), len(points))) as pool:
        futures = [pool.submit(_evaluate, n, k, h, settings, d, e) for d, e in points]
        return [f.result() for f in futures]


def coefficient_table(n: int, k: int, h: int, deltas: T.Sequence[float],
                      eps: T.Optional[float]=None,
                      settings: T.Optional[QuadratureSettings]=None) -> T.List[T.Dict[str, float]]:
    # language=rst
    """:math:`\\bar c_0` and :math:`\\hat c_0` for every :math:`\\delta` in
    *deltas*, at a fixed *eps* or on the diagonal if *eps* is ``None``."""
    settings = settings or QuadratureSettings()
    points = [(float(d), float(d if eps is None else eps)) for d in deltas]
    return [
        {'delta': c.delta, 'eps': c.eps, 'cbar0': c.cbar0, 'chat0': c.chat0}
        for c in _evaluate_many(n, k, h, settings, points)
    ]


@dataclasses.dataclass(frozen=True)
class ReducedSolution:
    # language=rst
    """The balancing parameters and the leading constants.

    :ivar a1, a2: :math:`A a_1` and :math:`A a_2` from the quadratic fit of
        :math:`\\bar c_0` in :math:`\\delta`; *b1*, *b2* likewise for
        :math:`\\hat c_0` in :math:`\\varepsilon`.
    :ivar residuals: :math:`|\\bar c_0|` and :math:`|\\hat c_0|` at the root,
        absolute and relative to the largest coefficient of the scan.
    :ivar genuine: whether :math:`|\\bar c_0(\\delta^*)| \\le 10^{-3}|\\bar
        c_0(\\delta^*/2)|`.

    """
    delta_star: float
    eps_star: float
    a1: float
    a2: float
    b1: float
    b2: float
    residuals: T.Mapping[str, float]
    k: int
    h: int
    n: int
    q: float
    iterations: int
    genuine: bool
    table: T.Tuple[T.Mapping[str, float], ...]

    @property
    def fit_root(self) -> float:
        return self.a2 / self.a1 if self.a1 else math.nan

    def to_mapping(self) -> T.Dict[str, T.Any]:
        result = dataclasses.asdict(self)
        result['fit_root'] = self.fit_root
        return result


def _diagonal_bracket(table: T.Sequence[T.Mapping[str, float]]) -> T.Optional[T.Tuple[float, float]]:
    for lower, upper in zip(table, table[1:]):
        if np.sign(lower['cbar0']) != np.sign(upper['cbar0']) or \
                np.sign(lower['chat0']) != np.sign(upper['chat0']):
            return lower['delta'], upper['delta']
    return None


def _newton(n: int, k: int, h: int, settings: QuadratureSettings, options: SolverOptions,
            start: T.Tuple[float, float], target: float) -> T.Tuple[float, float, int]:
    # Damped Newton with a forward-difference Jacobian; three evaluations per
    # iteration run concurrently.
    lower, upper = options.box
    x = np.array(start, dtype=float)
    for iteration in range(1, options.max_iter + 1):
        steps = options.fd_step * x
        c0, cd, ce = _evaluate_many(n, k, h, settings, [
            tuple(x), (x[0] + steps[0], x[1]), (x[0], x[1] + steps[1])
        ])
        f = np.array([c0.cbar0, c0.chat0])
        residual = float(np.max(np.abs(f)))
        _logger.info("Newton iteration %d: delta=%.10g eps=%.10g residual=%.3e",
                     iteration, x[0], x[1], residual)
        if residual <= target:
            return float(x[0]), float(x[1]), iteration
        jacobian = np.column_stack([
            (np.array([cd.cbar0, cd.chat0]) - f) / steps[0],
            (np.array([ce.cbar0, ce.chat0]) - f) / steps[1],
        ])
        step = -np.linalg.solve(jacobian, f)
        factor = 1.0
        for _ in range(options.max_halvings + 1):
            candidate = x + factor * step
            if np.all(candidate >= lower) and np.all(candidate <= upper):
                trial = _evaluate(n, k, h, settings, *candidate)
                if max(abs(trial.cbar0), abs(trial.chat0)) < residual:
                    break
            factor /= 2.0
        else:
            raise lab_utils.ConvergenceError(
                f"Newton step can't reduce the residual {residual:.3e} at delta={x[0]:g}, eps={x[1]:g}",
                math.nan
            )
        x = candidate
    raise lab_utils.ConvergenceError(
        f"Newton iteration didn't converge in {options.max_iter} iterations", math.nan
    )


def solve_reduced(n: int, k: int, h: int, settings: T.Optional[QuadratureSettings]=None,
                  options: T.Optional[SolverOptions]=None) -> ReducedSolution:
    # language=rst
    """Finds :math:`(\\delta^*, \\varepsilon^*)` with :math:`\\bar c_0 = \\hat c_0 = 0`.

    The diagonal :math:`\\delta = \\varepsilon` of the admissible box is
    scanned first.  For :math:`k = h` both coefficients agree on the diagonal,
    and the root is found there with Brent's method; otherwise a damped Newton
    iteration starts from the bracketing interval.

    :raises:
        NoRootError if the scan finds no sign change, carrying the table;
        ConvergenceError if Newton's method stalls.

    """
    settings = settings or QuadratureSettings()
    options = options or SolverOptions()
    lower, upper = options.box
    deltas = np.geomspace(lower, upper, options.scan_points)
    table = coefficient_table(n, k, h, deltas, None, settings)
    scale = max(max(abs(row['cbar0']), abs(row['chat0'])) for row in table)
    target = options.tol * scale
    bracket = _diagonal_bracket(table)
    if bracket is None:
        raise NoRootError(f"no sign change of the coefficients for delta = eps in {options.box}", table)

    if k == h:
        counter = [0]

        def cbar0(delta):
            counter[0] += 1
            return _evaluate(n, k, h, settings, delta, delta).cbar0

        delta_star = scipy.optimize.brentq(cbar0, *bracket, xtol=1e-12, rtol=1e-14,
                                           maxiter=options.max_iter)
        eps_star, iterations = delta_star, counter[0]
    else:
        delta_star, eps_star, iterations = _newton(
            n, k, h, settings, options, (math.sqrt(bracket[0] * bracket[1]),) * 2, target
        )

    # The first fit point, delta*/2, also decides whether the root is genuine.
    fit_points = [(f * delta_star, eps_star) for f in FIT_FACTORS] + \
                 [(delta_star, f * eps_star) for f in FIT_FACTORS if f != 1.0]
    results = _evaluate_many(n, k, h, settings, fit_points)
    along_delta = results[:3]
    along_eps = [results[3], results[1], results[4]]
    at_root, at_half = results[1], results[0]
    a1, a2_negative, _ = lab_utils.quadratic_coefficients(
        [c.delta for c in along_delta], [c.cbar0 for c in along_delta])
    b1, b2_negative, _ = lab_utils.quadratic_coefficients(
        [c.eps for c in along_eps], [c.chat0 for c in along_eps])
    genuine = abs(at_root.cbar0) <= GENUINE_ROOT_FACTOR * abs(at_half.cbar0)
    if not genuine:
        _logger.warning("The root delta*=%g looks like a flat region: |cbar0| = %.3e there, %.3e at delta*/2",
                        delta_star, abs(at_root.cbar0), abs(at_half.cbar0))
    solution = ReducedSolution(
        delta_star=float(delta_star), eps_star=float(eps_star),
        a1=a1, a2=-a2_negative, b1=b1, b2=-b2_negative,
        residuals={
            'cbar0': abs(at_root.cbar0), 'chat0': abs(at_root.chat0),
            'cbar0_relative': abs(at_root.cbar0) / scale, 'chat0_relative': abs(at_root.chat0) / scale,
        },
        k=k, h=h, n=n, q=settings.q, iterations=iterations, genuine=genuine, table=tuple(table),
    )
    _logger.info("Reduced system n=%d k=%d h=%d: delta*=%.10g eps*=%.10g after %d evaluations",
                 n, k, h, solution.delta_star, solution.eps_star, iterations)
    return solution
