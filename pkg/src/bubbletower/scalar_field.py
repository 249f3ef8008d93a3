# language=rst
"""
Evaluable scalar fields with declared symmetries.

A :class:`ScalarField` wraps a pure, vectorized evaluator together with the
symmetries it claims and its decay rate at infinity.  Declared symmetries are
spot-checked once, at construction.

Symmetry tags:

``ring1-invariant``
    invariant under rotation by :math:`2\\pi/k` in the :math:`(y_1,y_2)`-plane;
``ring2-invariant``
    invariant under rotation by :math:`2\\pi/h` in the :math:`(y_3,y_4)`-plane;
``even-mask``
    even in each of the coordinates :math:`y_2, y_4, y_5, \\ldots, y_n`;
``kelvin-even`` / ``kelvin-odd``
    :math:`|y|^{-w} f(y/|y|^2) = \\pm f(y)`, with *w* the field's Kelvin weight.

"""

import dataclasses
import logging
import math
import typing as T

import numpy as np

from .bubble import as_points, check_dimension, kelvin
from .configuration import TowerConfiguration, symmetry_orbit
from .errors import DomainError

_logger = logging.getLogger(__name__)


SYMMETRY_TAGS = frozenset({
    'ring1-invariant', 'ring2-invariant', 'even-mask', 'kelvin-even', 'kelvin-odd'
})
SPOT_CHECK_POINTS = 32
SPOT_CHECK_SEED = 20170
SPOT_CHECK_RTOL = 1e-8

Evaluator = T.Callable[[np.ndarray], np.ndarray]


def spot_check_points(n: int, count: int, seed: int) -> np.ndarray:
    # language=rst
    """Seeded points with uniform directions and log-uniform radii in [0.05, 20]."""
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = np.exp(rng.uniform(math.log(0.05), math.log(20.0), count))
    return directions * radii[:, None]


@dataclasses.dataclass(frozen=True)
class ScalarField:
    # language=rst
    """A map :math:`\\mathbb{R}^n \\to \\mathbb{R}` with declared properties.

    :ivar evaluator: pure and thread-safe; maps points ``(..., n)`` to values ``(...)``.
    :ivar n: the dimension.
    :ivar symmetry_tags: a subset of :data:`SYMMETRY_TAGS`.
    :ivar decay_exponent: *d* such that :math:`f = O(|y|^{-d})`; ``inf`` for
        compact support.
    :ivar kelvin_weight: weight used by the Kelvin tags; defaults to :math:`n-2`.
    :ivar config: the configuration whose ring symmetries the tags refer to.
    :ivar name: used in log and error messages only.

    """
    evaluator: Evaluator
    n: int
    symmetry_tags: T.FrozenSet[str] = frozenset()
    decay_exponent: float = math.inf
    kelvin_weight: T.Optional[float] = None
    config: T.Optional[TowerConfiguration] = None
    name: str = 'field'

    def __post_init__(self):
        check_dimension(self.n)
        tags = frozenset(self.symmetry_tags)
        object.__setattr__(self, 'symmetry_tags', tags)
        unknown = tags - SYMMETRY_TAGS
        if unknown:
            raise DomainError(f"unknown symmetry tags {sorted(unknown)} on {self.name}")
        if {'kelvin-even', 'kelvin-odd'} <= tags:
            raise DomainError(f"{self.name} can't be both kelvin-even and kelvin-odd")
        if tags & {'ring1-invariant', 'ring2-invariant'} and self.config is None:
            raise DomainError(f"ring symmetry tags on {self.name} need a configuration")
        if tags:
            self._spot_check()

    def __call__(self, y) -> np.ndarray:
        return self.evaluator(as_points(y, self.n))

    @property
    def weight(self) -> float:
        return self.n - 2 if self.kelvin_weight is None else self.kelvin_weight

    def _images(self, tag: str, y: np.ndarray):
        # Yields (image values, expected sign) pairs for one tag.
        if tag == 'ring1-invariant':
            yield self(symmetry_orbit(self.config, y, j=1)), 1.0
        elif tag == 'ring2-invariant':
            yield self(symmetry_orbit(self.config, y, l=1)), 1.0
        elif tag == 'even-mask':
            for coordinate in [2, 4] + list(range(5, self.n + 1)):
                flipped = y.copy()
                flipped[:, coordinate - 1] *= -1.0
                yield self(flipped), 1.0
        else:
            sign = 1.0 if tag == 'kelvin-even' else -1.0
            yield kelvin(self.evaluator, y, self.n, self.weight), sign

    def _spot_check(self):
        y = spot_check_points(self.n, SPOT_CHECK_POINTS, SPOT_CHECK_SEED)
        values = self(y)
        scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
        for tag in sorted(self.symmetry_tags):
            for image, sign in self._images(tag, y):
                deviation = float(np.max(np.abs(sign * image - values)))
                if deviation > SPOT_CHECK_RTOL * scale:
                    raise DomainError(
                        f"{self.name} violates its declared symmetry '{tag}' "
                        f"(deviation {deviation:.3e} at scale {scale:.3e})"
                    )
        _logger.debug("Spot-checked %s for %s", sorted(self.symmetry_tags), self.name)


def zero_field(n: int) -> ScalarField:
    return ScalarField(lambda y: np.zeros(y.shape[:-1]), n, name='zero')
