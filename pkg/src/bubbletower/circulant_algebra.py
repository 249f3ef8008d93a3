# language=rst
"""
Interaction matrices of the bubble-local kernel fields.

For fields *W* (tests) and *V* (unknowns) from
:func:`bubbletower.kernel_basis.eval_Zgroup`, an interaction matrix holds
:math:`M_{WV} = \\int L(V)W`.  Two families matter:

-   :math:`M_1`, over :math:`\\alpha = 0..4` and all sites, laid out as five
    groups ``[centre, ring 1 (k), ring 2 (h)]``.  Its fifteen upper blocks are
    named ``A`` to ``P`` (skipping ``O``) in row-major order: block ``B``
    tests with :math:`\\alpha = 0` against unknowns with :math:`\\alpha = 1`.
-   :math:`\\tilde H_\\alpha` for :math:`\\alpha \\ge 5`, over the sites only.

Every letter block splits into the ring-ring parts ``bar`` (ring 1 tests,
ring 1 unknowns) and ``hat``, which are circulant, and the cross parts.
:func:`cross_block` ``(a, b)`` holds :math:`\\int L(\\hat Z_{bl})\\bar Z_{aj}`
at row *j*, column *l*; block ``X`` of the pair ``(a, b)`` has
``cross1 = cross_block(a, b)`` and ``cross2 = cross_block(b, a).T``.

The ring rotations map every ring field onto the same field of another site,
so each cross block is fixed by its entry at ``(0, 0)``:

.. math::

    \\int L(\\hat Z_{bl})\\bar Z_{aj} = \\sum_{a', b'}
        \\hat R_l(a, a')\\,\\bar R_j(b, b')\\,
        \\int L(\\hat Z_{b'1})\\bar Z_{a'1}

where :math:`\\bar R_j` rotates the Cartesian indices 1, 2 of the ring-2
fields by :math:`\\bar\\theta_j`, :math:`\\hat R_l` rotates the Cartesian
indices 3, 4 of the ring-1 fields by :math:`\\hat\\theta_l`, and both act as
the identity on every other index.  The same argument gives the coefficients

.. math::

    \\beta_{ab} = \\int L(\\bar Z_{a1})\\hat Z_{b1},

which vanish unless the fields agree in their parity in :math:`y_2` and in
:math:`y_4`.

"""

import dataclasses
import logging
import string
import typing as T

import numpy as np

import lab_utils

from .bubble import exponents
from .configuration import TowerConfiguration, make_configuration
from .errors import DomainError
from .kernel_basis import (
    CENTER, RING1, RING2, Site, eval_Zgroup, linearized_potential, site_bubble, z_decomposition
)
from .quadrature import Cell, QuadratureScheme, QuadratureSettings, integrate_cells

_logger = logging.getLogger(__name__)


M1_ALPHAS = tuple(range(5))
BLOCK_NAMES = tuple(c for c in string.ascii_uppercase[:16] if c != 'O')
# Points per batch inside a cell; bounds the size of the field arrays.
POINT_BATCH = 4096
RHS_SEED = 20170

Field = T.Tuple[int, Site]


def block_pairs() -> T.Dict[str, T.Tuple[int, int]]:
    # language=rst
    """Maps ``'A'`` to ``(0, 0)``, ``'B'`` to ``(0, 1)``, ..., ``'P'`` to ``(4, 4)``."""
    pairs = [(a, b) for a in M1_ALPHAS for b in M1_ALPHAS if a <= b]
    return dict(zip(BLOCK_NAMES, pairs))


def parity_allowed(a: int, b: int) -> bool:
    # language=rst
    """Whether :math:`\\beta_{ab}` can be non-zero.

    Only the fields with index 2 are odd in :math:`y_2`, and only those with
    index 4 are odd in :math:`y_4`.

    """
    return (a == 2) == (b == 2) and (a == 4) == (b == 4)


def site_fields(config: TowerConfiguration, alpha: int) -> T.List[Field]:
    return ([(alpha, Site(CENTER))] + [(alpha, Site(RING1, j)) for j in range(config.k)] +
            [(alpha, Site(RING2, l)) for l in range(config.h)])


def m1_fields(config: TowerConfiguration) -> T.List[Field]:
    return [field for alpha in M1_ALPHAS for field in site_fields(config, alpha)]


def field_index(config: TowerConfiguration, alpha: int, site: Site) -> int:
    # language=rst
    """Position of a field in the :math:`M_1` layout."""
    size = 1 + config.k + config.h
    offset = {CENTER: 0, RING1: 1, RING2: 1 + config.k}[site.kind]
    return alpha * size + offset + site.index


def _ring_slice(config: TowerConfiguration, alpha: int, kind: str) -> slice:
    start = field_index(config, alpha, Site(kind, 0))
    return slice(start, start + (config.k if kind == RING1 else config.h))


def _relative(value: float, scale: float) -> float:
    return float(value) / max(float(scale), np.finfo(float).tiny)


def _check_scheme(config: TowerConfiguration, scheme: QuadratureScheme):
    if scheme.config != config:
        raise DomainError("the quadrature scheme belongs to a different configuration")


# Assembly ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class InteractionMatrix:
    # language=rst
    """:math:`\\int L(V)W` for a list of fields, rows indexed by *W*."""
    fields: T.Tuple[Field, ...]
    matrix: np.ndarray
    err_est: np.ndarray
    converged: bool

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def symmetry_deviation(self) -> float:
        # language=rst
        """:math:`\\max|M - M^T| / \\max|M|`; zero up to quadrature error."""
        return _relative(np.max(np.abs(self.matrix - self.matrix.T)), self.scale)


def interaction_matrix(config: TowerConfiguration, fields: T.Sequence[Field],
                       scheme: QuadratureScheme, name: str='interaction matrix') -> InteractionMatrix:
    # language=rst
    """Assembles :math:`\\int L(V)W` for all pairs of *fields* in one pass.

    The linearized potential is evaluated once per batch of nodes and the
    bubble term once per site, so the cost grows with the number of fields,
    not with its square.

    :raises: DomainError if *scheme* was built for another configuration.

    """
    _check_scheme(config, scheme)
    fields = tuple(fields)
    _, p, gamma = exponents(config.n)
    sites = sorted({site for _, site in fields})

    def partial(cell: Cell) -> np.ndarray:
        total = np.zeros((len(fields), len(fields)))
        for start in range(0, len(cell.weights), POINT_BATCH):
            y = cell.points[start:start + POINT_BATCH]
            weights = cell.weights[start:start + POINT_BATCH]
            potential = linearized_potential(config, y)
            own = {site: p * gamma * site_bubble(config, site, y) ** (p - 1) for site in sites}
            values = np.stack([eval_Zgroup(config, alpha, site, y) for alpha, site in fields])
            images = np.stack([potential - own[site] for _, site in fields]) * values
            total += (values * weights) @ images.T
        return total

    result = integrate_cells(scheme, partial, name)
    _logger.info("Assembled %s of size %d", name, len(fields))
    return InteractionMatrix(fields, result.value, result.err_est, result.converged)


# Coefficients beta ---------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class BetaTable:
    # language=rst
    """The 25 coefficients :math:`\\beta_{ab}`, :math:`a, b \\in 0..4`.

    :ivar beta: :math:`\\int L(\\bar Z_{a1})\\hat Z_{b1}` at ``[a, b]``.
    :ivar reverse: :math:`\\int L(\\hat Z_{a1})\\bar Z_{b1}` at ``[a, b]``.

    """
    n: int
    k: int
    h: int
    beta: np.ndarray
    reverse: np.ndarray
    converged: bool

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.beta)))

    def parity_zeros(self) -> T.Dict[str, float]:
        # language=rst
        """Every coefficient that vanishes by parity, relative to :attr:`scale`."""
        return {
            f'beta{a}{b}': _relative(abs(self.beta[a, b]), self.scale)
            for a in M1_ALPHAS for b in M1_ALPHAS if not parity_allowed(a, b)
        }

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return {
            'n': self.n, 'k': self.k, 'h': self.h,
            'beta': self.beta, 'reverse': self.reverse,
            'parity_zeros': self.parity_zeros(), 'converged': self.converged,
        }


def beta_table(config: TowerConfiguration, scheme: QuadratureScheme) -> BetaTable:
    fields = [(a, Site(RING1, 0)) for a in M1_ALPHAS] + [(b, Site(RING2, 0)) for b in M1_ALPHAS]
    result = interaction_matrix(config, fields, scheme, 'beta coefficients')
    m = result.matrix
    size = len(M1_ALPHAS)
    beta = m[size:, :size].T.copy()
    reverse = m[:size, size:].T.copy()
    return BetaTable(config.n, config.k, config.h, beta, reverse, result.converged)


def predicted_beta_exponents(n: int) -> T.Dict[int, float]:
    # language=rst
    """Decay exponents in *k* of :math:`|\\beta_{aa}|`: :math:`4 - 2n` for
    :math:`a \\in \\{0, 2, 4\\}` and :math:`6 - 2n` for :math:`a \\in \\{1, 3\\}`."""
    return {a: (6.0 if a in (1, 3) else 4.0) - 2 * n for a in M1_ALPHAS}


@dataclasses.dataclass(frozen=True)
class BetaScaling:
    n: int
    ks: T.Tuple[int, ...]
    tables: T.Tuple[BetaTable, ...]
    fitted: T.Mapping[int, float]
    predicted: T.Mapping[int, float]

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return {
            'n': self.n, 'ks': self.ks,
            'diagonal': [[float(t.beta[a, a]) for a in M1_ALPHAS] for t in self.tables],
            'fitted_exponents': {f'beta{a}{a}': v for a, v in self.fitted.items()},
            'predicted_exponents': {f'beta{a}{a}': v for a, v in self.predicted.items()},
        }


def beta_scaling(n: int, ks: T.Sequence[int], delta: float, eps: float,
                 settings: T.Optional[QuadratureSettings]=None, h_ratio: float=1.0) -> BetaScaling:
    # language=rst
    """Fits the decay of :math:`|\\beta_{aa}|` in *k* with ``h = round(h_ratio * k)``.

    Exponents can't be fitted for coefficients that vanish; those are left
    out of ``fitted``.

    """
    tables = []
    for k in ks:
        config = make_configuration(n, k, max(3, int(round(h_ratio * k))), delta, eps)
        tables.append(beta_table(config, QuadratureScheme.for_configuration(config, settings)))
    fitted = {}
    for a in M1_ALPHAS:
        magnitudes = [abs(float(t.beta[a, a])) for t in tables]
        if all(m > 0 for m in magnitudes):
            fitted[a] = lab_utils.loglog_slope(ks, magnitudes)
    return BetaScaling(n, tuple(ks), tuple(tables), fitted, predicted_beta_exponents(n))


# The blocks of M1 ----------------------------------------------------------------

def _cartesian_rotation(angle: float, plane: T.Tuple[int, int], index: int) -> T.Dict[int, float]:
    # Row *index* of the rotation by *angle* in *plane*, as {column: value}.
    c, s = np.cos(angle), np.sin(angle)
    first, second = plane
    if index == first:
        return {first: c, second: -s}
    if index == second:
        return {first: s, second: c}
    return {index: 1.0}


def covariant_cross_block(config: TowerConfiguration, a: int, b: int, base: np.ndarray) -> np.ndarray:
    # language=rst
    """The cross block :math:`\\int L(\\hat Z_{bl})\\bar Z_{aj}` predicted from
    its first entries ``base[a', b']`` by rotation covariance."""
    result = np.zeros((config.k, config.h))
    for j, theta_bar in enumerate(config.theta_bar):
        for l, theta_hat in enumerate(config.theta_hat):
            for a2, ra in _cartesian_rotation(theta_hat, (3, 4), a).items():
                for b2, rb in _cartesian_rotation(theta_bar, (1, 2), b).items():
                    result[j, l] += ra * rb * base[a2, b2]
    return result


@dataclasses.dataclass(frozen=True)
class LetterBlock:
    # language=rst
    """One of the fifteen blocks of :math:`M_1`.

    :ivar alphas: ``(a, b)``; rows test fields with index *a*, columns are
        unknowns with index *b*.
    :ivar bar: ring 1 against ring 1, :math:`k \\times k`.
    :ivar hat: ring 2 against ring 2, :math:`h \\times h`.
    :ivar cross1: ring-1 tests, ring-2 unknowns, :math:`k \\times h`.
    :ivar cross2: ring-2 rows, ring-1 columns, :math:`h \\times k`; its
        transpose is ``cross_block(b, a)``.

    """
    name: str
    alphas: T.Tuple[int, int]
    bar: np.ndarray
    hat: np.ndarray
    cross1: np.ndarray
    cross2: np.ndarray

    def norms(self) -> T.Dict[str, float]:
        return {part: float(np.linalg.norm(getattr(self, part)))
                for part in ('bar', 'hat', 'cross1', 'cross2')}

    def circulant_deviation(self, scale: float) -> float:
        # language=rst
        """Largest deviation of ``bar`` and ``hat`` from their circulant
        completions, relative to *scale*."""
        deviation = max(lab_utils.CirculantMatrix.from_dense(self.bar)[1],
                        lab_utils.CirculantMatrix.from_dense(self.hat)[1])
        return _relative(deviation, scale)


@dataclasses.dataclass(frozen=True)
class M1Blocks:
    # language=rst
    """:math:`M_1` with its block structure and the measured structural
    deviations.

    All deviations are relative to the largest entry of :math:`M_1`.

    :ivar covariant_deviation: largest deviation of any cross block from
        :func:`covariant_cross_block`.
    :ivar F_cross_covariant: deviation of ``F.cross1`` from
        :math:`\\cos\\bar\\theta_j\\,\\beta'_{11}`, where :math:`\\beta'` are
        the first cross entries.
    :ivar F_cross_cartesian: deviation from
        :math:`\\cos^2\\bar\\theta_j\\beta'_{11} + \\sin^2\\bar\\theta_j\\beta'_{22}`,
        the shape for Cartesian :math:`\\partial_1 U_j` fields.

    """
    config: TowerConfiguration
    matrix: np.ndarray
    blocks: T.Mapping[str, LetterBlock]
    base: np.ndarray
    symmetry_deviation: float
    circulant_deviations: T.Mapping[str, float]
    identities: T.Mapping[str, float]
    parity_zeros: T.Mapping[str, float]
    covariant_deviation: float
    F_cross_covariant: float
    F_cross_cartesian: float
    converged: bool

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def cross_block(self, a: int, b: int) -> np.ndarray:
        return cross_block(self.config, self.matrix, a, b)

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return {
            'size': self.matrix.shape[0],
            'scale': self.scale,
            'block_norms': {name: block.norms() for name, block in self.blocks.items()},
            'symmetry_deviation': self.symmetry_deviation,
            'circulant_deviations': self.circulant_deviations,
            'identities': self.identities,
            'parity_zeros': self.parity_zeros,
            'covariant_deviation': self.covariant_deviation,
            'F_cross_covariant': self.F_cross_covariant,
            'F_cross_cartesian': self.F_cross_cartesian,
            'converged': self.converged,
        }


def cross_block(config: TowerConfiguration, matrix: np.ndarray, a: int, b: int) -> np.ndarray:
    # language=rst
    """:math:`\\int L(\\hat Z_{bl})\\bar Z_{aj}` at ``[j, l]``, taken from :math:`M_1`."""
    return matrix[_ring_slice(config, a, RING1), _ring_slice(config, b, RING2)]


def letter_block(config: TowerConfiguration, matrix: np.ndarray, name: str) -> LetterBlock:
    a, b = block_pairs()[name]
    return LetterBlock(
        name=name, alphas=(a, b),
        bar=matrix[_ring_slice(config, a, RING1), _ring_slice(config, b, RING1)],
        hat=matrix[_ring_slice(config, a, RING2), _ring_slice(config, b, RING2)],
        cross1=cross_block(config, matrix, a, b),
        cross2=cross_block(config, matrix, b, a).T,
    )


def assemble_M1_blocks(config: TowerConfiguration, scheme: QuadratureScheme) -> M1Blocks:
    # language=rst
    """Assembles :math:`M_1` by quadrature and measures its structure.

    Besides the circulant structure of every ring-ring block, three identities
    hold up to rounding, because every quadrature rule is invariant under the
    ring rotations: :math:`\\hat F = \\hat J`, :math:`\\bar M = \\bar P` and
    :math:`\\hat B = 0`.

    """
    result = interaction_matrix(config, m1_fields(config), scheme, 'M1')
    matrix = result.matrix
    scale = max(float(np.max(np.abs(matrix))), np.finfo(float).tiny)
    blocks = {name: letter_block(config, matrix, name) for name in BLOCK_NAMES}
    base = np.array([[cross_block(config, matrix, a, b)[0, 0] for b in M1_ALPHAS] for a in M1_ALPHAS])

    identities = {
        'F_hat=J_hat': _relative(np.max(np.abs(blocks['F'].hat - blocks['J'].hat)), scale),
        'M_bar=P_bar': _relative(np.max(np.abs(blocks['M'].bar - blocks['P'].bar)), scale),
        'B_hat=0': _relative(np.max(np.abs(blocks['B'].hat)), scale),
    }
    # Only the first entries vanish; the rotations mix the others.
    parity_zeros = {
        f'cross{a}{b}': _relative(abs(base[a, b]), scale)
        for a in M1_ALPHAS for b in M1_ALPHAS if not parity_allowed(a, b)
    }
    covariant = max(
        float(np.max(np.abs(cross_block(config, matrix, a, b) -
                            covariant_cross_block(config, a, b, base))))
        for a in M1_ALPHAS for b in M1_ALPHAS
    )
    cos_bar, sin_bar = np.cos(config.theta_bar), np.sin(config.theta_bar)
    F1 = blocks['F'].cross1
    covariant_F = np.outer(cos_bar, np.ones(config.h)) * base[1, 1]
    cartesian_F = np.outer(cos_bar ** 2 * base[1, 1] + sin_bar ** 2 * base[2, 2], np.ones(config.h))

    m1 = M1Blocks(
        config=config, matrix=matrix, blocks=blocks, base=base,
        symmetry_deviation=_relative(np.max(np.abs(matrix - matrix.T)), scale),
        circulant_deviations={name: block.circulant_deviation(scale) for name, block in blocks.items()},
        identities=identities,
        parity_zeros=parity_zeros,
        covariant_deviation=_relative(covariant, scale),
        F_cross_covariant=_relative(np.max(np.abs(F1 - covariant_F)), scale),
        F_cross_cartesian=_relative(np.max(np.abs(F1 - cartesian_F)), scale),
        converged=result.converged,
    )
    _logger.info("M1: circulant deviation %.3e, covariant deviation %.3e, symmetry deviation %.3e",
                 max(m1.circulant_deviations.values()), m1.covariant_deviation, m1.symmetry_deviation)
    return m1


# Kernel vectors and orthogonality conditions ---------------------------------------

def m1_kernel_vectors(config: TowerConfiguration) -> T.Tuple[np.ndarray, ...]:
    # language=rst
    """The coefficient vectors :math:`w_0, \\ldots, w_4` of
    :math:`z_0, \\ldots, z_4` in the :math:`M_1` layout.

    :math:`M_1 w_\\beta` is the vector of :math:`\\int L(z_\\beta)W`, which
    vanishes up to the error of the approximation.

    """
    size = len(M1_ALPHAS) * (1 + config.k + config.h)
    vectors = []
    for beta in M1_ALPHAS:
        w = np.zeros(size)
        for term in z_decomposition(beta, config):
            w[field_index(config, term.alpha, term.site)] += term.coef
        vectors.append(w)
    return tuple(vectors)


def kernel_residuals(matrix: np.ndarray, vectors: T.Sequence[np.ndarray]) -> T.Tuple[float, ...]:
    # language=rst
    """:math:`\\|Mw\\| / (\\|M\\|_2\\|w\\|)` for every *w*."""
    norm = max(float(np.linalg.norm(matrix, 2)), np.finfo(float).tiny)
    return tuple(float(np.linalg.norm(matrix @ w)) / (norm * float(np.linalg.norm(w)))
                 for w in vectors)


@dataclasses.dataclass(frozen=True)
class OrthogonalityReport:
    # language=rst
    """Magnitudes of the solvability conditions of the ring-1 equations.

    :ivar conditions: ``cond1`` to ``cond7``.
    :ivar products: the individual terms that make them vanish.

    Inner products are relative to :math:`\\max|M_1|\\,\\max_\\alpha\\|\\hat
    c_\\alpha\\|\\sqrt{kh}`; block norms to :math:`\\max|M_1|\\sqrt{kh}`.

    """
    conditions: T.Mapping[str, float]
    products: T.Mapping[str, float]

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return {'conditions': self.conditions, 'products': self.products}


def default_c_hat(h: int, seed: int=RHS_SEED) -> T.Tuple[np.ndarray, ...]:
    # language=rst
    """Five seeded random ring-2 vectors; the ones for :math:`\\alpha = 1, 2`
    are made orthogonal to :math:`\\widehat{\\cos}` and :math:`\\widehat{\\sin}`."""
    rng = np.random.default_rng(seed)
    cos_hat, sin_hat = lab_utils.ring_modes(h)
    vectors = []
    for alpha in M1_ALPHAS:
        v = rng.standard_normal(h)
        if alpha in (1, 2):
            for mode in (cos_hat, sin_hat):
                v -= (v @ mode) / (mode @ mode) * mode
        vectors.append(v)
    return tuple(vectors)


def check_orthogonality_conditions(blocks: M1Blocks,
                                   c_hat: T.Optional[T.Sequence[np.ndarray]]=None,
                                   seed: int=RHS_SEED) -> OrthogonalityReport:
    config = blocks.config
    if c_hat is None:
        c_hat = default_c_hat(config.h, seed)
    c_hat = [np.asarray(c, dtype=float) for c in c_hat]
    if len(c_hat) != len(M1_ALPHAS) or any(c.shape != (config.h,) for c in c_hat):
        raise DomainError(f"c_hat must be five vectors of length h={config.h}")
    one_bar = np.ones(config.k)
    cos_bar, sin_bar = lab_utils.ring_modes(config.k)
    c_norm = max(float(np.linalg.norm(c)) for c in c_hat)
    size = np.sqrt(config.k * config.h)
    vector_scale = blocks.scale * c_norm * size
    matrix_scale = blocks.scale * size

    def cross(a, b):
        return blocks.cross_block(a, b)

    def image(*tests):
        return sum(cross(a, b) @ c_hat[b] for a in tests for b in M1_ALPHAS)

    def dot(v, mode):
        return _relative(abs(float(v @ mode)), vector_scale)

    conditions = {
        'cond1': dot(image(2), one_bar),
        'cond2': dot(image(0, 1), cos_bar),
        'cond3': dot(image(0, 1), sin_bar),
        'cond4': dot(image(3), cos_bar),
        'cond5': dot(image(3), sin_bar),
        'cond6': dot(image(4), cos_bar),
        'cond7': dot(image(4), sin_bar),
    }
    names_ones = ('C2T', 'G2T', 'J1', 'K1', 'L1')
    names_sums = ('A1+B2T', 'B1+F1', 'C1+G1', 'D1+H1', 'E1+I1')
    names_cos = ('D2T', 'H2T', 'K2T', 'M1', 'N1')
    products = {}
    for b in M1_ALPHAS:
        products[f'{names_ones[b]}.1'] = dot(cross(2, b) @ c_hat[b], one_bar)
        products[names_sums[b]] = _relative(np.linalg.norm(cross(0, b) + cross(1, b)), matrix_scale)
        products[f'{names_cos[b]}.cos'] = dot(cross(3, b) @ c_hat[b], cos_bar)
    return OrthogonalityReport(conditions, products)


# H tilde and the block systems --------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class HtildeResult:
    # language=rst
    """:math:`\\tilde H_\\alpha` in the layout ``[centre, ring 1, ring 2]``.

    :ivar row_sum_residual: :math:`\\|\\tilde H w\\| / (\\|\\tilde H\\|_2\\|w\\|)`
        for :math:`w = [1, -\\bar 1, -\\hat 1]`, the coefficients of
        :math:`z_\\alpha = \\partial_\\alpha u`.

    """
    alpha: int
    matrix: np.ndarray
    row_sum_residual: float
    converged: bool


def assemble_Htilde(config: TowerConfiguration, alpha: int, scheme: QuadratureScheme) -> HtildeResult:
    # language=rst
    """:raises: DomainError unless :math:`5 \\le \\alpha \\le n`."""
    if not 5 <= alpha <= config.n:
        raise DomainError(f"H tilde exists for alpha in 5..n only, got alpha={alpha} with n={config.n}")
    result = interaction_matrix(config, site_fields(config, alpha), scheme, f'H tilde {alpha}')
    kernel = np.concatenate([[1.0], -np.ones(config.k), -np.ones(config.h)])
    residual, = kernel_residuals(result.matrix, [kernel])
    _logger.info("H tilde %d: row-sum residual %.3e", alpha, residual)
    return HtildeResult(alpha, result.matrix, residual, result.converged)


@dataclasses.dataclass(frozen=True)
class AssembledSystem:
    # language=rst
    """A :class:`lab_utils.BlockInteractionSystem` taken from an assembled matrix.

    :ivar circulant_deviation: of the two ring blocks, relative to their
        largest entry.
    :ivar coupling_spread: largest deviation of the cross entries from their
        mean :math:`\\gamma`, relative to :math:`|\\gamma|`.

    """
    alpha: int
    system: lab_utils.BlockInteractionSystem
    circulant_deviation: float
    coupling_spread: float
    converged: bool


def default_rhs(m: int, rng: np.random.Generator) -> np.ndarray:
    cos_, sin_ = lab_utils.ring_modes(m)
    v = rng.standard_normal(m)
    for mode in (cos_, sin_):
        v -= (v @ mode) / (mode @ mode) * mode
    return v


def block_system(config: TowerConfiguration, alpha: int, scheme: QuadratureScheme,
                 rhs: T.Optional[T.Tuple[np.ndarray, np.ndarray]]=None,
                 seed: int=RHS_SEED) -> AssembledSystem:
    # language=rst
    """The coupled ring system of :math:`\\alpha`.

    For :math:`\\alpha \\ge 5` the blocks come from :math:`\\tilde H_\\alpha`;
    for :math:`\\alpha = 0` from block ``A`` of :math:`M_1`, which has the same
    shape :math:`[\\bar A, \\beta_{00}\\mathbb{1}; \\beta_{00}\\mathbb{1}, \\hat A]`.

    Parameters:
        rhs: ``(rbar, rhat)``; by default seeded random vectors orthogonal to
            the ring modes.

    :raises: DomainError for other values of *alpha*.

    """
    if alpha != 0 and not 5 <= alpha <= config.n:
        raise DomainError(f"block systems exist for alpha = 0 and 5..n, got {alpha}")
    matrix = interaction_matrix(config, site_fields(config, alpha), scheme, f'block system {alpha}')
    m = matrix.matrix
    k, h = config.k, config.h
    bar, hat = m[1:1 + k, 1:1 + k], m[1 + k:, 1 + k:]
    coupling = np.concatenate([m[1:1 + k, 1 + k:].ravel(), m[1 + k:, 1:1 + k].ravel()])
    gamma = float(np.mean(coupling))
    Hbar, bar_deviation = lab_utils.CirculantMatrix.from_dense(bar)
    Hhat, hat_deviation = lab_utils.CirculantMatrix.from_dense(hat)
    if rhs is None:
        rng = np.random.default_rng(seed)
        rhs = default_rhs(k, rng), default_rhs(h, rng)
    system = lab_utils.BlockInteractionSystem(Hbar, Hhat, gamma, *rhs)
    scale = max(float(np.max(np.abs(bar))), float(np.max(np.abs(hat))))
    return AssembledSystem(
        alpha=alpha, system=system,
        circulant_deviation=_relative(max(bar_deviation, hat_deviation), scale),
        coupling_spread=_relative(np.max(np.abs(coupling - gamma)), abs(gamma)),
        converged=matrix.converged,
    )


@dataclasses.dataclass(frozen=True)
class BlockSolveReport:
    # language=rst
    """Contraction solve of an assembled system, checked against the dense oracle.

    :ivar iterations: ``None`` if the contraction didn't converge.
    :ivar dense_deviation: :math:`\\max|w - w_{dense}| / \\max|w_{dense}|`;
        ``None`` if either solve is unavailable.
    :ivar norm_ratio: :math:`\\|\\bar w\\| / (k^{n-4}\\|\\bar r\\|)`.

    """
    alpha: int
    contraction_factor: float
    product_bound: float
    iterations: T.Optional[int]
    dense_deviation: T.Optional[float]
    norm_ratio: T.Optional[float]
    failure: T.Optional[str] = None

    def to_mapping(self) -> T.Dict[str, T.Any]:
        return dataclasses.asdict(self)


def solve_block_system(assembled: AssembledSystem, n: int, tol: float=1e-12,
                       max_iter: int=200) -> BlockSolveReport:
    system = assembled.system
    solution, failure = None, None
    try:
        result = lab_utils.solve_block_contraction(system, tol, max_iter)
        solution = np.concatenate([result.wbar, result.what])
    except lab_utils.ConvergenceError as e:
        _logger.warning("Block system %d: %s", assembled.alpha, e)
        failure = str(e)
    dense = None
    if system.k + system.h <= lab_utils.DENSE_ORACLE_MAX_SIZE:
        dense = np.concatenate(lab_utils.dense_deflated_solve(system))
    dense_deviation = None
    if solution is not None and dense is not None:
        dense_deviation = _relative(np.max(np.abs(solution - dense)), np.max(np.abs(dense)))
    reference = solution if solution is not None else dense
    norm_ratio = None
    if reference is not None:
        norm_ratio = _relative(np.linalg.norm(reference[:system.k]),
                               system.k ** (n - 4) * np.linalg.norm(system.rbar))
    return BlockSolveReport(
        alpha=assembled.alpha,
        contraction_factor=system.contraction_factor(),
        product_bound=system.product_bound(),
        iterations=result.iterations if solution is not None else None,
        dense_deviation=dense_deviation,
        norm_ratio=norm_ratio,
        failure=failure,
    )
