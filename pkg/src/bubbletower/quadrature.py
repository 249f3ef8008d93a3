# language=rst
"""
Integration over :math:`\\mathbb{R}^n` adapted to bubble concentration.

A :class:`QuadratureScheme` splits every integrand with a smooth partition of
unity :math:`1 = \\sum_p \\chi_p + (1 - \\sum_p \\chi_p)`, where
:math:`\\chi_p` equals 1 on the ball :math:`B(c_p, \\rho_p)` around a bubble
centre and vanishes outside :math:`B(c_p, 2\\rho_p)`, with
:math:`\\rho = \\bar\\alpha/k` on the first ring and :math:`\\hat\\alpha/h` on
the second.

-   The patch parts :math:`\\chi_p f` are integrated in coordinates centred at
    the bubble.  Inside :math:`B(c_p, \\rho_p)` the radial rule is graded in
    :math:`\\log(1 + |y - c_p|/\\mu)`; the annulus up to :math:`2\\rho_p` uses
    Gauss-Legendre.
-   The remainder :math:`(1 - \\sum\\chi_p) f` is integrated on the unit ball,
    with the outside folded in by inversion:
    :math:`\\int_{|y|>1} g(y)\\,dy = \\int_{|x|<1} |x|^{-2n} g(x/|x|^2)\\,dx`.

Each node carries a region label: 0 for the exterior region, ``1 + j`` for the
ball around :math:`\\xi_j` and ``1 + k + l`` for the ball around
:math:`\\eta_l`.  Integrals over regions therefore add up to the total by
construction.

Angular rules are products of trapezoid rules in the two ring planes and
Gauss-Legendre rules in the remaining angles.  Trapezoid counts are multiples
of *k* and *h*, aligned with the ring angles, so that every rule is invariant
under the ring rotations, the reflections of :math:`y_2, y_4, y_5, \\ldots`,
and (for :math:`k = h`) the exchange of the two planes.

Cells, either (part of) one radial shell of the remainder or one patch, are integrated
in parallel.  Their partial results are combined by a pairwise sum in cell
order, so results are deterministic.

"""

import concurrent.futures
import dataclasses
import functools
import logging
import math
import typing as T

import numpy as np

from .bubble import check_dimension, squared_norm
from .config import worker_count
from .configuration import TowerConfiguration, min_separation
from .errors import DomainError, QuadratureError
from .scalar_field import ScalarField

_logger = logging.getLogger(__name__)


REFINE_FACTOR = 2
SUP_MAX_LEVEL = 3
SUP_REL_CHANGE = 1e-3
EXTERIOR = 0
CUTOFF_ORIENTATIONS = frozenset({'inner', 'outer'})
# Remainder shells are split into cells of at most this many directions.
CELL_DIRECTIONS = 1 << 16


@dataclasses.dataclass(frozen=True)
class QuadratureSettings:
    # language=rst
    """Tunable parameters of a scheme.

    :ivar q: the Lebesgue exponent of :func:`norm_starstar`; must lie in
        :math:`(n/2, n)`, which is checked against the dimension when a scheme
        is built.
    :ivar alpha_bar: ring-1 patch radius, in units of :math:`1/k`.
    :ivar alpha_hat: ring-2 patch radius, in units of :math:`1/h`.
    :ivar rel_tol: target relative error between two refinement levels.
    :ivar radial_nodes: radial Gauss nodes at level 0.
    :ivar angular_degree: angular resolution at level 0; roughly the number of
        trapezoid nodes per circle around a patch.
    :ivar max_refine: number of refinements after level 0.
    :ivar cutoff_orientation: ``'inner'`` or ``'outer'``; see
        :func:`bubbletower.error_field.cutoff`.

    """
    q: float = 3.0
    alpha_bar: float = 1.0
    alpha_hat: float = 1.0
    rel_tol: float = 1e-6
    radial_nodes: int = 32
    angular_degree: int = 16
    max_refine: int = 1
    cutoff_orientation: str = 'inner'

    def __post_init__(self):
        if self.cutoff_orientation not in CUTOFF_ORIENTATIONS:
            raise DomainError(f"cutoff_orientation must be one of {sorted(CUTOFF_ORIENTATIONS)}, "
                              f"got {self.cutoff_orientation!r}")
        if not self.alpha_bar > 0 or not self.alpha_hat > 0:
            raise DomainError("alpha_bar and alpha_hat must be > 0")
        if not 0 < self.rel_tol < 1:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol!r}")
        if self.radial_nodes < 2:
            raise DomainError(f"radial_nodes must be ≥ 2, got {self.radial_nodes!r}")
        if self.angular_degree < 4:
            raise DomainError(f"angular_degree must be ≥ 4, got {self.angular_degree!r}")
        if self.max_refine < 1:
            raise DomainError(f"max_refine must be ≥ 1, got {self.max_refine!r}")

    def scaled(self, count: int, level: int) -> int:
        # language=rst
        """The node count *count* at refinement *level*; every level doubles it."""
        return count * REFINE_FACTOR ** level


def check_exponent(q: float, n: int):
    if not n / 2 < q < n:
        raise DomainError(f"q must lie in the open interval (n/2, n) = ({n / 2}, {n}), got {q!r}")


def norm_weight_exponent(n: int, q: float) -> float:
    # language=rst
    """The exponent :math:`n + 2 - 2n/q` of the weight in :func:`norm_starstar`."""
    return n + 2 - 2 * n / q


# 1-D and spherical rules ----------------------------------------------------

@functools.lru_cache(maxsize=256)
def gauss_legendre(count: int) -> T.Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(count)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_interval(count: int, a: float, b: float) -> T.Tuple[np.ndarray, np.ndarray]:
    nodes, weights = gauss_legendre(count)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def _round_up(value: int, multiple: int) -> int:
    multiple = max(multiple, 1)
    return multiple * int(math.ceil(value / multiple))


@functools.lru_cache(maxsize=64)
def generic_sphere(d: int, count: int) -> T.Tuple[np.ndarray, np.ndarray]:
    # language=rst
    """Product rule on :math:`S^{d-1}`, recursive in the last coordinate.

    ``d == 1`` is the two-point set :math:`\\{\\pm 1\\}`; ``d == 2`` the
    trapezoid rule; higher *d* combine a Gauss rule in the latitude with the
    rule on :math:`S^{d-2}`.

    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return (np.stack([np.cos(angles), np.sin(angles)], axis=-1),
                np.full(count, 2.0 * np.pi / count))
    t, wt = gauss_interval(count, -0.5 * np.pi, 0.5 * np.pi)
    wt = wt * np.cos(t) ** (d - 2)
    sub, wsub = generic_sphere(d - 1, count)
    points = np.concatenate([
        (np.cos(t)[:, None, None] * sub[None, :, :]),
        np.broadcast_to(np.sin(t)[:, None, None], (len(t), len(sub), 1))
    ], axis=-1).reshape(-1, d)
    return points, (wt[:, None] * wsub[None, :]).reshape(-1)


@functools.lru_cache(maxsize=64)
def sphere_rule(n: int, m1: int, m2: int, nchi: int, npsi: int, nsub: int
                ) -> T.Tuple[np.ndarray, np.ndarray]:
    # language=rst
    """Product rule on :math:`S^{n-1}` in Hopf-type coordinates.

    For :math:`n = 4`:
    :math:`y = (\\cos\\chi\\, e(\\phi_1), \\sin\\chi\\, e(\\phi_2))` with
    weight :math:`\\cos\\chi\\sin\\chi`, trapezoid rules in
    :math:`\\phi_1, \\phi_2` and Gauss-Legendre in :math:`\\chi`.  For
    :math:`n > 4`, a latitude :math:`\\psi` splits off the last
    :math:`n - 4` coordinates:
    :math:`y = (\\cos\\psi\\cos\\chi\\, e(\\phi_1), \\cos\\psi\\sin\\chi\\,
    e(\\phi_2), \\sin\\psi\\, \\omega)` with :math:`\\omega \\in S^{n-5}` and
    weight :math:`\\cos^3\\psi\\,\\sin^{n-5}\\psi\\,\\cos\\chi\\sin\\chi`.

    Returns read-only arrays ``(directions, weights)``.

    """
    chi, wchi = gauss_interval(nchi, 0.0, 0.5 * np.pi)
    wchi = wchi * np.cos(chi) * np.sin(chi)
    phi1 = 2.0 * np.pi * np.arange(m1) / m1
    phi2 = 2.0 * np.pi * np.arange(m2) / m2
    c, s = np.cos(chi)[:, None, None], np.sin(chi)[:, None, None]
    shape = (nchi, m1, m2)
    base = np.stack([
        np.broadcast_to(c * np.cos(phi1)[None, :, None], shape),
        np.broadcast_to(c * np.sin(phi1)[None, :, None], shape),
        np.broadcast_to(s * np.cos(phi2)[None, None, :], shape),
        np.broadcast_to(s * np.sin(phi2)[None, None, :], shape),
    ], axis=-1).reshape(-1, 4)
    wbase = np.broadcast_to(
        wchi[:, None, None] * (2.0 * np.pi / m1) * (2.0 * np.pi / m2), shape
    ).reshape(-1)
    if n == 4:
        points, weights = base, wbase
    else:
        psi, wpsi = gauss_interval(npsi, 0.0, 0.5 * np.pi)
        wpsi = wpsi * np.cos(psi) ** 3 * np.sin(psi) ** (n - 5)
        sub, wsub = generic_sphere(n - 4, nsub)
        cp, sp = np.cos(psi)[:, None, None, None], np.sin(psi)[:, None, None, None]
        full = (len(psi), len(base), len(sub))
        points = np.concatenate([
            np.broadcast_to(cp * base[None, :, None, :], full + (4,)),
            np.broadcast_to(sp * sub[None, None, :, :], full + (n - 4,)),
        ], axis=-1).reshape(-1, n)
        weights = (wpsi[:, None, None] * wbase[None, :, None] * wsub[None, None, :]).reshape(-1)
    points = np.ascontiguousarray(points)
    weights = np.ascontiguousarray(weights)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def _rotate(directions: np.ndarray, plane: int, angle: float) -> np.ndarray:
    if angle == 0.0:
        return directions
    c, s = math.cos(angle), math.sin(angle)
    rotated = directions.copy()
    a, b = directions[:, plane], directions[:, plane + 1]
    rotated[:, plane] = c * a - s * b
    rotated[:, plane + 1] = s * a + c * b
    return rotated


def partition_bump(t: np.ndarray) -> np.ndarray:
    # language=rst
    """:math:`C^\\infty` step: 1 for :math:`t \\le 1`, 0 for :math:`t \\ge 2`."""
    t = np.asarray(t, dtype=float)
    a = np.clip(2.0 - t, 0.0, 1.0)
    b = np.clip(t - 1.0, 0.0, 1.0)
    with np.errstate(divide='ignore'):
        ga = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
        gb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return ga / (ga + gb)


# Scheme ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Patch:
    # language=rst
    """A refinement ball around one bubble.

    :ivar center: the bubble centre.
    :ivar scale: the bubble scale :math:`\\mu` or :math:`\\lambda`.
    :ivar radius: :math:`\\rho`; the patch covers :math:`B(c, 2\\rho)`.
    :ivar plane: 0 for a ring-1 site, 2 for a ring-2 site.
    :ivar angle: the ring angle; the local frame is rotated by it.
    :ivar region: the region label of the inner ball.

    """
    center: T.Tuple[float, ...]
    scale: float
    radius: float
    plane: int
    angle: float
    region: int


@dataclasses.dataclass(frozen=True)
class Cell:
    # language=rst
    """Materialized nodes of one unit of parallel work.

    :ivar points: shape ``(N, n)``.
    :ivar weights: shape ``(N,)``, including the partition of unity.
    :ivar region: shape ``(N,)``, region labels.
    :ivar local: for patch cells, the rescaled coordinates
        :math:`z = (y - c)/\\mu`; ``None`` for remainder cells.
    :ivar patch: the patch, or ``None``.

    """
    points: np.ndarray
    weights: np.ndarray
    region: np.ndarray
    local: T.Optional[np.ndarray] = None
    patch: T.Optional[Patch] = None


@dataclasses.dataclass(frozen=True)
class _Counts:
    remainder_radial: int
    inner_radial: int
    annulus_radial: int
    global_sphere: T.Tuple[int, int, int, int, int]
    patch_sphere: T.Tuple[int, int, int, int, int]


@dataclasses.dataclass(frozen=True)
class QuadratureScheme:
    # language=rst
    """A quadrature rule for one configuration.

    Use :meth:`for_configuration` to get patches around every bubble, or
    :meth:`plain` for a rule without patches (single smooth bubbles).

    :raises: QuadratureError if the patches of a configuration overlap.

    """
    n: int
    settings: QuadratureSettings
    config: T.Optional[TowerConfiguration] = None

    def __post_init__(self):
        check_dimension(self.n)
        check_exponent(self.settings.q, self.n)
        if self.config is not None:
            if self.config.n != self.n:
                raise DomainError(f"scheme dimension {self.n} doesn't match configuration n={self.config.n}")
            self._check_geometry()

    @classmethod
    def for_configuration(cls, config: TowerConfiguration,
                          settings: T.Optional[QuadratureSettings]=None) -> 'QuadratureScheme':
        return cls(n=config.n, settings=settings or QuadratureSettings(), config=config)

    @classmethod
    def plain(cls, n: int, settings: T.Optional[QuadratureSettings]=None) -> 'QuadratureScheme':
        return cls(n=n, settings=settings or QuadratureSettings())

    @property
    def k(self) -> int:
        return self.config.k if self.config is not None else 0

    @property
    def h(self) -> int:
        return self.config.h if self.config is not None else 0

    @property
    def region_count(self) -> int:
        return 1 + self.k + self.h

    @property
    def ring1_radius(self) -> float:
        return self.settings.alpha_bar / self.k

    @property
    def ring2_radius(self) -> float:
        return self.settings.alpha_hat / self.h

    @functools.cached_property
    def patches(self) -> T.Tuple[Patch, ...]:
        if self.config is None:
            return ()
        c = self.config
        ring1 = tuple(
            Patch(tuple(c.xi[j]), c.mu, self.ring1_radius, 0, float(c.theta_bar[j]), 1 + j)
            for j in range(c.k)
        )
        ring2 = tuple(
            Patch(tuple(c.eta[l]), c.lam, self.ring2_radius, 2, float(c.theta_hat[l]), 1 + c.k + l)
            for l in range(c.h)
        )
        return ring1 + ring2

    def _check_geometry(self):
        ring1, ring2, cross = min_separation(self.config)
        problems = []
        if self.k and ring1 < 4.0 * self.ring1_radius:
            problems.append(f"ring-1 spacing {ring1:.4g} < 4·alpha_bar/k = {4 * self.ring1_radius:.4g}")
        if self.h and ring2 < 4.0 * self.ring2_radius:
            problems.append(f"ring-2 spacing {ring2:.4g} < 4·alpha_hat/h = {4 * self.ring2_radius:.4g}")
        if self.k and self.h and cross < 2.0 * (self.ring1_radius + self.ring2_radius):
            problems.append(f"cross-ring distance {cross:.4g} is too small for the patches")
        if problems:
            raise QuadratureError("bubble patches overlap: " + "; ".join(problems))

    def _counts(self, level: int) -> _Counts:
        s = self.settings
        radial = s.scaled(s.radial_nodes, level)
        angular = s.scaled(s.angular_degree, level)
        half = int(math.ceil(angular / 2))
        tail = (max(2, int(math.ceil(angular / 4))), max(2, 2 * int(math.ceil(angular / 4))))
        if not self.patches:
            global_sphere = (2 * half, 2 * half, half) + tail
            patch_sphere = global_sphere
        else:
            nchi = max(half, int(math.ceil(angular * max(self.k, self.h) / 16)))
            global_sphere = (self.k * half, self.h * half, nchi) + tail
            patch_sphere = (_round_up(angular, self.k), _round_up(angular, self.h), half) + tail
        return _Counts(
            remainder_radial=radial,
            inner_radial=radial,
            annulus_radial=max(4, int(math.ceil(radial / 2))),
            global_sphere=global_sphere,
            patch_sphere=patch_sphere,
        )

    def node_count(self, level: int=0) -> int:
        counts = self._counts(level)
        global_dirs = len(sphere_rule(self.n, *counts.global_sphere)[1])
        patch_dirs = len(sphere_rule(self.n, *counts.patch_sphere)[1])
        return (2 * counts.remainder_radial * global_dirs +
                len(self.patches) * (counts.inner_radial + counts.annulus_radial) * patch_dirs)

    def partition_sum(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(points.shape[:-1])
        for patch in self.patches:
            distance = np.sqrt(squared_norm(points - np.array(patch.center)))
            total += partition_bump(distance / patch.radius)
        return total

    def cell_builders(self, level: int) -> T.List[T.Callable[[], Cell]]:
        # language=rst
        """Lazy cell constructors for refinement *level*, in summation order.

        Cells are materialized by the workers, so a level never needs to hold
        all its nodes at once.

        """
        counts = self._counts(level)
        directions, dir_weights = sphere_rule(self.n, *counts.global_sphere)
        radii, radial_weights = gauss_interval(counts.remainder_radial, 0.0, 1.0)
        chunks = [slice(start, start + CELL_DIRECTIONS)
                  for start in range(0, len(dir_weights), CELL_DIRECTIONS)]
        builders = [
            functools.partial(self._remainder_cell, float(r), float(w),
                              directions[chunk], dir_weights[chunk])
            for r, w in zip(radii, radial_weights)
            for chunk in chunks
        ]
        if self.patches:
            local_dirs, local_weights = sphere_rule(self.n, *counts.patch_sphere)
            builders.extend(
                functools.partial(self._patch_cell, patch, counts, local_dirs, local_weights)
                for patch in self.patches
            )
        return builders

    def _remainder_cell(self, r: float, w: float, directions: np.ndarray,
                        dir_weights: np.ndarray) -> Cell:
        n = self.n
        inner_weight = w * r ** (n - 1) * dir_weights
        points = np.concatenate([r * directions, directions / r])
        weights = np.concatenate([inner_weight, inner_weight * r ** (-2 * n)])
        if self.patches:
            weights = weights * (1.0 - self.partition_sum(points))
        return Cell(points, weights, np.zeros(len(points), dtype=int))

    def _patch_cell(self, patch: Patch, counts: _Counts, directions: np.ndarray,
                    dir_weights: np.ndarray) -> Cell:
        n = self.n
        center = np.array(patch.center)
        local_dirs = _rotate(directions, patch.plane, patch.angle)
        # Inner ball, graded in log(1 + s) with s = |y - c| / scale.
        tau, wtau = gauss_interval(counts.inner_radial, 0.0, math.log1p(patch.radius / patch.scale))
        s = np.expm1(tau)
        inner_radial = wtau * np.exp(tau) * s ** (n - 1) * patch.scale ** n
        z_inner = (s[:, None, None] * local_dirs[None, :, :]).reshape(-1, n)
        w_inner = (inner_radial[:, None] * dir_weights[None, :]).reshape(-1)
        # Annulus between radius and twice the radius.
        r, wr = gauss_interval(counts.annulus_radial, patch.radius, 2.0 * patch.radius)
        annulus_radial = wr * r ** (n - 1) * partition_bump(r / patch.radius)
        z_annulus = (r[:, None, None] * local_dirs[None, :, :]).reshape(-1, n) / patch.scale
        w_annulus = (annulus_radial[:, None] * dir_weights[None, :]).reshape(-1)
        local = np.concatenate([z_inner, z_annulus])
        return Cell(
            points=center + patch.scale * local,
            weights=np.concatenate([w_inner, w_annulus]),
            region=np.concatenate([
                np.full(len(w_inner), patch.region, dtype=int),
                np.full(len(w_annulus), EXTERIOR, dtype=int),
            ]),
            local=local,
            patch=patch,
        )

    def accumulate(self, reducer: T.Callable[[Cell], np.ndarray], level: int=0) -> np.ndarray:
        # language=rst
        """Applies *reducer* to every cell of *level* and sums the partial results.

        The reducer must return arrays of one fixed shape.  Cells run on a
        thread pool capped by :envvar:`BUBBLETOWER_THREADS`; the sum is pairwise
        in cell order.

        """
        builders = self.cell_builders(level)

        def work(builder):
            return np.asarray(reducer(builder()), dtype=float)

        workers = worker_count()
        if workers == 1:
            partials = [work(b) for b in builders]
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(pool.map(work, builders))
        return pairwise_sum(partials)


@dataclasses.dataclass(frozen=True)
class BallScheme:
    # language=rst
    """A single-cell rule on the ball :math:`B(0, R)`, graded in
    :math:`\\log(1 + |y|)`.

    Works with :func:`integrate_cells` like a :class:`QuadratureScheme`.

    """
    n: int
    radius: float
    settings: QuadratureSettings = QuadratureSettings()

    def __post_init__(self):
        check_dimension(self.n)
        if not self.radius > 0:
            raise DomainError(f"ball radius must be > 0, got {self.radius!r}")

    def cell(self, level: int=0) -> Cell:
        s = self.settings
        n = self.n
        angular = s.scaled(s.angular_degree, level)
        half = int(math.ceil(angular / 2))
        tail = (max(2, int(math.ceil(angular / 4))), max(2, 2 * int(math.ceil(angular / 4))))
        directions, dir_weights = sphere_rule(n, 2 * half, 2 * half, half, *tail)
        tau, wtau = gauss_interval(2 * s.scaled(s.radial_nodes, level), 0.0, math.log1p(self.radius))
        r = np.expm1(tau)
        radial = wtau * np.exp(tau) * r ** (n - 1)
        return Cell(
            points=(r[:, None, None] * directions[None, :, :]).reshape(-1, n),
            weights=(radial[:, None] * dir_weights[None, :]).reshape(-1),
            region=np.zeros(len(r) * len(dir_weights), dtype=int),
        )

    def accumulate(self, reducer: T.Callable[[Cell], np.ndarray], level: int=0) -> np.ndarray:
        return np.asarray(reducer(self.cell(level)), dtype=float)


def pairwise_sum(values: T.Sequence[np.ndarray]) -> np.ndarray:
    if len(values) == 1:
        return values[0]
    middle = len(values) // 2
    return pairwise_sum(values[:middle]) + pairwise_sum(values[middle:])


# Integration -----------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class IntegrationResult:
    # language=rst
    """Value of an integral (scalar or array) with its error estimate.

    :ivar err_est: :math:`|I_\\ell - I_{\\ell-1}|` between the last two levels.
    :ivar converged: whether the estimate met ``rel_tol``.
    :ivar levels: the number of levels evaluated.

    """
    value: T.Any
    err_est: T.Any
    converged: bool
    levels: int


def integrate_cells(scheme: 'QuadratureScheme', reducer: T.Callable[[Cell], np.ndarray],
                    name: str='integral', stop_early: bool=True) -> IntegrationResult:
    # language=rst
    """Refines *scheme* until two consecutive levels agree within ``rel_tol``.

    Never raises on non-convergence; the best value is returned with
    ``converged = False`` and a warning is logged.

    Parameters:
        scheme: anything with ``settings`` and ``accumulate(reducer, level)``.
        stop_early: if false, always evaluate up to ``max_refine`` and return
            the finest level.  The result is then a smooth function of the
            integrand's parameters, which root finders need.

    """
    settings = scheme.settings
    previous = scheme.accumulate(reducer, 0)
    error = np.full_like(previous, np.inf)
    for level in range(1, settings.max_refine + 1):
        value = scheme.accumulate(reducer, level)
        error = np.abs(value - previous)
        scale = max(float(np.max(np.abs(value))), np.finfo(float).tiny)
        _logger.debug("%s: level %d, max error estimate %.3e at scale %.3e",
                      name, level, float(np.max(error)), scale)
        converged = float(np.max(error)) <= settings.rel_tol * scale or not np.any(value)
        if converged and (stop_early or level == settings.max_refine):
            return IntegrationResult(_unwrap(value), _unwrap(error), True, level + 1)
        previous = value
    _logger.warning("%s didn't reach rel_tol=%g after %d refinements (estimate %.3e)",
                    name, settings.rel_tol, settings.max_refine, float(np.max(error)))
    return IntegrationResult(_unwrap(previous), _unwrap(error), False, settings.max_refine + 1)


def _unwrap(a: np.ndarray):
    return float(a) if np.ndim(a) == 0 else a


def integrate(f: ScalarField, scheme: QuadratureScheme) -> IntegrationResult:
    # language=rst
    """:math:`\\int_{\\mathbb{R}^n} f`.

    :raises: QuadratureError if *f* doesn't declare a decay rate above *n*.

    """
    if not f.decay_exponent > scheme.n:
        raise QuadratureError(
            f"{f.name} declares decay |y|^-{f.decay_exponent}, which isn't integrable in dimension {scheme.n}"
        )
    return integrate_cells(scheme, lambda cell: np.sum(cell.weights * f(cell.points)), f.name)


def region_integrals(scheme: QuadratureScheme, density: T.Callable[[Cell], np.ndarray],
                     name: str='region integrals') -> IntegrationResult:
    # language=rst
    """Integrals of *density* over every region at once.

    *density* maps a cell to values at its nodes; it may use ``cell.local``.
    The result holds an array of length :attr:`QuadratureScheme.region_count`.

    """
    size = scheme.region_count
    return integrate_cells(
        scheme,
        lambda cell: np.bincount(cell.region, weights=cell.weights * density(cell), minlength=size),
        name,
    )


def _region_selector(scheme: QuadratureScheme,
                     region: T.Optional[T.Union[str, T.Tuple[str, int]]]) -> T.Callable[[np.ndarray], np.ndarray]:
    if region is None:
        return lambda values: np.sum(values)
    if region == 'exterior':
        return lambda values: values[EXTERIOR]
    try:
        ring, index = region
    except (TypeError, ValueError):
        raise DomainError(f"no region {region!r} in this scheme") from None
    offset = 1 if ring == 'ring1' else 1 + scheme.k
    limit = scheme.k if ring == 'ring1' else scheme.h
    if ring not in ('ring1', 'ring2') or not 0 <= index < limit:
        raise DomainError(f"no region {region!r} in this scheme")
    return lambda values: values[offset + index]


def weighted_norm(f: ScalarField, scheme: QuadratureScheme, q: T.Optional[float]=None,
                  region: T.Optional[T.Union[str, T.Tuple[str, int]]]=None) -> IntegrationResult:
    # language=rst
    """:func:`norm_starstar` with its error estimate and convergence flag.

    ``err_est`` is the estimate of the integral of :math:`|\\cdot|^q`, carried
    through the *q*-th root to first order.

    :raises: DomainError, QuadratureError as :func:`norm_starstar`.

    """
    n = scheme.n
    q = scheme.settings.q if q is None else q
    check_exponent(q, n)
    if not f.decay_exponent > n + 2 - n / q:
        raise QuadratureError(f"{f.name} decays too slowly for the weighted L^{q} norm")
    select = _region_selector(scheme, region)
    a = norm_weight_exponent(n, q)

    def density(cell: Cell) -> np.ndarray:
        weight = (1.0 + np.sqrt(squared_norm(cell.points))) ** a
        return np.abs(weight * f(cell.points)) ** q

    result = region_integrals(scheme, density, f.name)
    total = float(select(np.atleast_1d(result.value)))
    error = float(select(np.atleast_1d(result.err_est)))
    value = total ** (1.0 / q)
    err_est = value * error / (q * total) if total > 0 else error ** (1.0 / q)
    return IntegrationResult(value, err_est, result.converged, result.levels)


def norm_starstar(f: ScalarField, scheme: QuadratureScheme, q: T.Optional[float]=None,
                  region: T.Optional[T.Union[str, T.Tuple[str, int]]]=None) -> float:
    # language=rst
    """The weighted norm :math:`\\|(1+|y|)^{n+2-2n/q} f\\|_{L^q}`.

    Only the value is returned; a rule that didn't reach ``rel_tol`` is logged
    as a warning.  Use :func:`weighted_norm` when the caller needs the flag.

    Parameters:
        q: defaults to the scheme's configured exponent.
        region: ``None`` for all of :math:`\\mathbb{R}^n`, ``'exterior'``,
            ``('ring1', j)`` or ``('ring2', l)`` with 0-based indices.

    :raises:
        DomainError if *q* is outside :math:`(n/2, n)` or *region* doesn't
        exist; QuadratureError if *f* decays too slowly.

    """
    return weighted_norm(f, scheme, q, region).value


# Sampled sup-norm ------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class SupNormResult:
    # language=rst
    """A sampled maximum: the value, where it was attained, and how many
    sample densities were tried."""
    value: float
    argmax: T.Tuple[float, ...]
    levels: int


def _sample_shells(scheme: QuadratureScheme, level: int) -> T.List[np.ndarray]:
    n = scheme.n
    count = 8 * 2 ** level
    directions = sphere_rule(n, count, count, count // 2, max(2, count // 4), max(2, count // 4))[0]
    radii = np.linspace(0.0, 2.0, count + 1)[1:]
    shells = [np.zeros((1, n))]
    shells.extend(r * directions for r in radii)
    # Image of the inner grid under y -> 4y/|y|^2 covers |y| >= 2.
    shells.extend((4.0 / r) * directions for r in radii)
    for patch in scheme.patches:
        center = np.array(patch.center)
        local = _rotate(directions, patch.plane, patch.angle)
        taus = np.linspace(0.0, math.log1p(2.0 * patch.radius / patch.scale), count + 1)
        shells.append(center[None, :])
        shells.extend(center + patch.scale * math.expm1(t) * local for t in taus[1:])
    return shells


def norm_star(f: ScalarField, scheme: QuadratureScheme) -> SupNormResult:
    # language=rst
    """Sampled :math:`\\sup_y (1 + |y|^{n-2})|f(y)|`.

    The sample is a coarse grid on :math:`|y| \\le 2`, its image under
    :math:`y \\mapsto 4y/|y|^2` for the outside, and graded grids in every
    patch, including the bubble centres.  The density doubles until the
    maximum changes by less than 0.1%.

    """
    n = scheme.n
    if not f.decay_exponent >= n - 2:
        raise QuadratureError(f"{f.name} decays too slowly for the weighted sup-norm")
    best = None
    for level in range(SUP_MAX_LEVEL + 1):
        value, argmax = -1.0, None
        for points in _sample_shells(scheme, level):
            weighted = (1.0 + squared_norm(points) ** ((n - 2) / 2)) * np.abs(f(points))
            index = int(np.argmax(weighted))
            if weighted[index] > value:
                value, argmax = float(weighted[index]), points[index]
        current = SupNormResult(value, tuple(float(c) for c in argmax), level + 1)
        if best is not None and abs(current.value - best.value) <= SUP_REL_CHANGE * current.value:
            return current
        best = current
    _logger.warning("Sampled sup-norm of %s still moved at the finest sample density", f.name)
    return best
