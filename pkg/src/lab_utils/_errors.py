import typing as T


class LabError(Exception):
    """Base class of the errors raised by :mod:`lab_utils`."""


class ConsistencyError(LabError):
    # language=rst
    """A right-hand side isn't orthogonal to the deflation set.

    :ivar inner_products: the normalized inner products with every
        deflation vector, in the order the vectors were given.

    """
    def __init__(self, message: str, inner_products: T.Sequence[float]):
        super().__init__(message)
        self.inner_products = tuple(float(v) for v in inner_products)


class ConvergenceError(LabError):
    # language=rst
    """An iteration didn't converge within its iteration limit.

    :ivar contraction_factor: the estimated spectral radius of the iteration.

    """
    def __init__(self, message: str, contraction_factor: float):
        super().__init__(message)
        self.contraction_factor = float(contraction_factor)
