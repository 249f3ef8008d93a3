# language=rst
"""
Circulant matrices and two-block interaction systems.

A circulant matrix is stored as its first row *r*; the full matrix is
:math:`C_{ij} = r_{(j-i) \\bmod m}`.  Its eigenvectors are the Fourier modes,
with eigenvalues :math:`\\overline{\\mathrm{fft}(r)}`, so products and solves
cost :math:`O(m \\log m)`.

"""

import dataclasses
import logging
import math
import typing as T

import numpy as np
import scipy.linalg

from ._errors import ConsistencyError, ConvergenceError

_logger = logging.getLogger(__name__)


MODE_TOLERANCE = 1e-8
SINGULAR_TOLERANCE = 1e-12
CONSISTENCY_TOLERANCE = 1e-10
DENSE_ORACLE_MAX_SIZE = 64


class CirculantMatrix:
    # language=rst
    """A circulant matrix given by its first row.

    Example::

        >>> CirculantMatrix([2.0, 1.0, 1.0]).eigenvalues.real
        array([4., 1., 1.])

    """
    def __init__(self, first_row: T.Sequence[float]):
        row = np.array(first_row, dtype=float)
        if row.ndim != 1 or len(row) == 0:
            raise ValueError(f"first_row must be a non-empty vector, got shape {row.shape}")
        row.setflags(write=False)
        self._row = row
        self._eigenvalues = np.conj(np.fft.fft(row))
        self._eigenvalues.setflags(write=False)

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> T.Tuple['CirculantMatrix', float]:
        # language=rst
        """The circulant matrix with the first row of *matrix*.

        Returns the matrix together with the largest deviation of any row of
        *matrix* from the corresponding cyclic shift of its first row.

        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        result = cls(matrix[0])
        return result, float(np.max(np.abs(result.to_dense() - matrix)))

    @property
    def first_row(self) -> np.ndarray:
        return self._row

    @property
    def size(self) -> int:
        return len(self._row)

    @property
    def eigenvalues(self) -> np.ndarray:
        # language=rst
        """Eigenvalue ``k`` belongs to the Fourier mode
        :math:`e^{2\\pi i jk/m}`."""
        return self._eigenvalues

    def to_dense(self) -> np.ndarray:
        m = self.size
        shifts = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
        return self._row[shifts]

    def matvec(self, x: T.Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"vector of shape {x.shape} doesn't match circulant of size {self.size}")
        return np.fft.ifft(self._eigenvalues * np.fft.fft(x)).real

    def __matmul__(self, x):
        return self.matvec(x)

    def __repr__(self):
        return f"CirculantMatrix({self._row.tolist()!r})"


def circ_matvec(c: CirculantMatrix, x: T.Sequence[float]) -> np.ndarray:
    return c.matvec(x)


def ring_modes(m: int) -> T.Tuple[np.ndarray, np.ndarray]:
    # language=rst
    """The vectors :math:`(\\cos(2\\pi j/m))_j` and :math:`(\\sin(2\\pi j/m))_j`."""
    angles = 2.0 * np.pi * np.arange(m) / m
    return np.cos(angles), np.sin(angles)


def deflated_modes(m: int, deflation: T.Sequence[np.ndarray]) -> T.FrozenSet[int]:
    # language=rst
    """The Fourier modes spanned by the deflation vectors.

    :raises: ValueError if the vectors don't span a set of whole Fourier
        modes, so that deflation can't be done by zeroing modes.

    """
    if not deflation:
        return frozenset()
    vectors = np.array([np.asarray(d, dtype=float) for d in deflation])
    if vectors.shape[1] != m:
        raise ValueError(f"deflation vectors have length {vectors.shape[1]}, expected {m}")
    modes = set()
    for spectrum in np.fft.fft(vectors, axis=1):
        scale = max(float(np.max(np.abs(spectrum))), np.finfo(float).tiny)
        modes.update(int(i) for i in np.flatnonzero(np.abs(spectrum) > MODE_TOLERANCE * scale))
    rank = np.linalg.matrix_rank(vectors)
    if len(modes) != rank:
        raise ValueError(
            f"deflation vectors of rank {rank} touch {len(modes)} Fourier modes {sorted(modes)}; "
            "they must span whole modes"
        )
    return frozenset(modes)


def _consistency(rhs: np.ndarray, deflation: T.Sequence[np.ndarray], tol: float):
    norm = float(np.linalg.norm(rhs))
    if norm == 0.0:
        return
    products = [float(np.dot(rhs, d)) / (norm * float(np.linalg.norm(d))) for d in deflation]
    if any(abs(p) > tol for p in products):
        raise ConsistencyError(
            f"right-hand side isn't orthogonal to the deflation set: {products}", products
        )


def circ_solve_deflated(c: CirculantMatrix, rhs: T.Sequence[float],
                        deflation: T.Sequence[np.ndarray]=(),
                        tol: float=CONSISTENCY_TOLERANCE) -> np.ndarray:
    # language=rst
    """The unique solution of :math:`Cw = r` orthogonal to the deflation vectors.

    The deflated Fourier modes are zeroed; every other mode is divided by its
    eigenvalue.

    :raises:
        ConsistencyError if *rhs* isn't orthogonal to the deflation vectors;
        numpy.linalg.LinAlgError if a mode outside the deflation set is
        singular.

    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (c.size,):
        raise ValueError(f"rhs of shape {rhs.shape} doesn't match circulant of size {c.size}")
    modes = deflated_modes(c.size, deflation)
    _consistency(rhs, deflation, tol)
    eigenvalues = c.eigenvalues
    keep = np.ones(c.size, dtype=bool)
    keep[list(modes)] = False
    scale = max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny)
    singular = keep & (np.abs(eigenvalues) <= SINGULAR_TOLERANCE * scale)
    if np.any(singular):
        raise np.linalg.LinAlgError(
            f"circulant is singular in the non-deflated modes {np.flatnonzero(singular).tolist()}"
        )
    spectrum = np.fft.fft(rhs)
    solution = np.zeros_like(spectrum)
    solution[keep] = spectrum[keep] / eigenvalues[keep]
    return np.fft.ifft(solution).real


def pseudo_inverse_norm(c: CirculantMatrix, deflation: T.Sequence[np.ndarray]=()) -> float:
    # language=rst
    """Spectral norm of the deflated inverse: one over the smallest kept eigenvalue."""
    keep = np.ones(c.size, dtype=bool)
    keep[list(deflated_modes(c.size, deflation))] = False
    return 1.0 / float(np.min(np.abs(c.eigenvalues[keep])))


@dataclasses.dataclass(frozen=True, eq=False)
class BlockInteractionSystem:
    # language=rst
    """The coupled system

    .. math::

        \\begin{pmatrix} \\bar H & \\gamma \\mathbb{1} \\\\
        \\gamma \\mathbb{1} & \\hat H \\end{pmatrix}
        \\begin{pmatrix} \\bar w \\\\ \\hat w \\end{pmatrix} =
        \\begin{pmatrix} \\bar r \\\\ \\hat r \\end{pmatrix}

    with circulant diagonal blocks and a constant coupling :math:`\\gamma`.
    Solutions are sought orthogonal to the deflation vectors of each block,
    by default the cos and sin ring modes.

    """
    Hbar: CirculantMatrix
    Hhat: CirculantMatrix
    gamma: float
    rbar: np.ndarray
    rhat: np.ndarray
    deflation_bar: T.Tuple[np.ndarray, ...] = None
    deflation_hat: T.Tuple[np.ndarray, ...] = None

    def __post_init__(self):
        object.__setattr__(self, 'rbar', np.asarray(self.rbar, dtype=float))
        object.__setattr__(self, 'rhat', np.asarray(self.rhat, dtype=float))
        if self.rbar.shape != (self.k,) or self.rhat.shape != (self.h,):
            raise ValueError("right-hand sides don't match the block sizes")
        if self.deflation_bar is None:
            object.__setattr__(self, 'deflation_bar', ring_modes(self.k))
        if self.deflation_hat is None:
            object.__setattr__(self, 'deflation_hat', ring_modes(self.h))

    @property
    def k(self) -> int:
        return self.Hbar.size

    @property
    def h(self) -> int:
        return self.Hhat.size

    def dense(self) -> np.ndarray:
        k, h = self.k, self.h
        matrix = np.empty((k + h, k + h))
        matrix[:k, :k] = self.Hbar.to_dense()
        matrix[k:, k:] = self.Hhat.to_dense()
        matrix[:k, k:] = self.gamma
        matrix[k:, :k] = self.gamma
        return matrix

    def deflation_matrix(self) -> np.ndarray:
        # language=rst
        """The deflation vectors as columns of a :math:`(k+h)`-row matrix."""
        k, h = self.k, self.h
        columns = [np.concatenate([d, np.zeros(h)]) for d in self.deflation_bar]
        columns += [np.concatenate([np.zeros(k), d]) for d in self.deflation_hat]
        return np.array(columns).T

    def contraction_factor(self) -> float:
        # language=rst
        """Spectral radius of the alternating map.

        Only the sum of the iterate enters the coupling, and the constant
        vector is the zero Fourier mode of both blocks, so the radius is
        :math:`\\gamma^2 kh / |\\bar\\lambda_0 \\hat\\lambda_0|`.

        """
        denominator = abs(self.Hbar.eigenvalues[0] * self.Hhat.eigenvalues[0])
        if denominator == 0.0:
            return math.inf
        return self.gamma ** 2 * self.k * self.h / denominator

    def product_bound(self) -> float:
        # language=rst
        """The cruder bound
        :math:`|\\gamma|\\,\\|\\bar H^{-1}\\|\\,\\|\\hat H^{-1}\\|\\,kh`."""
        return (abs(self.gamma) * self.k * self.h *
                pseudo_inverse_norm(self.Hbar, self.deflation_bar) *
                pseudo_inverse_norm(self.Hhat, self.deflation_hat))


@dataclasses.dataclass(frozen=True, eq=False)
class ContractionResult:
    wbar: np.ndarray
    what: np.ndarray
    iterations: int
    contraction_factor: float
    product_bound: float


def solve_block_contraction(system: BlockInteractionSystem, tol: float=1e-12,
                            max_iter: int=200) -> ContractionResult:
    # language=rst
    """Alternating deflated solves of the two blocks.

    Each sweep computes :math:`\\bar w = \\bar H^+(\\bar r - \\gamma (\\sum \\hat w)
    \\mathbb{1})` and then :math:`\\hat w = \\hat H^+(\\hat r - \\gamma (\\sum
    \\bar w) \\mathbb{1})`.  The iteration stops when the residual of the first
    block equation is below ``tol`` times the norm of the right-hand side; for
    :math:`\\gamma = 0` that happens after one sweep.

    :raises: ConvergenceError after *max_iter* sweeps, carrying the
        contraction factor.

    """
    k, h = system.k, system.h
    ones_bar, ones_hat = np.ones(k), np.ones(h)
    target = tol * max(float(np.linalg.norm(np.concatenate([system.rbar, system.rhat]))),
                       np.finfo(float).tiny)
    factor = system.contraction_factor()
    what = np.zeros(h)
    for iteration in range(1, max_iter + 1):
        wbar = circ_solve_deflated(system.Hbar, system.rbar - system.gamma * what.sum() * ones_bar,
                                   system.deflation_bar)
        what = circ_solve_deflated(system.Hhat, system.rhat - system.gamma * wbar.sum() * ones_hat,
                                   system.deflation_hat)
        residual = system.Hbar.matvec(wbar) + system.gamma * what.sum() * ones_bar - system.rbar
        if np.linalg.norm(residual) <= target:
            _logger.debug("Block contraction converged after %d sweeps (factor %.3e)", iteration, factor)
            return ContractionResult(wbar, what, iteration, factor, system.product_bound())
    raise ConvergenceError(
        f"block contraction didn't converge in {max_iter} sweeps (contraction factor {factor:.3e})",
        factor
    )


def dense_deflated_solve(system: BlockInteractionSystem,
                         max_size: int=DENSE_ORACLE_MAX_SIZE) -> T.Tuple[np.ndarray, np.ndarray]:
    # language=rst
    """Brute-force oracle for :func:`solve_block_contraction`.

    Projects the full :math:`(k+h)`-dimensional system onto the orthogonal
    complement :math:`Q` of the deflation vectors and solves
    :math:`Q^T M Q c = Q^T r` densely.

    :raises: ValueError if :math:`k + h` exceeds *max_size*.

    """
    size = system.k + system.h
    if size > max_size:
        raise ValueError(f"dense oracle is limited to k + h ≤ {max_size}, got {size}")
    q = scipy.linalg.null_space(system.deflation_matrix().T)
    rhs = np.concatenate([system.rbar, system.rhat])
    coefficients = scipy.linalg.solve(q.T @ system.dense() @ q, q.T @ rhs)
    solution = q @ coefficients
    return solution[:system.k], solution[system.k:]
