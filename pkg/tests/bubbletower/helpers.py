import numpy as np


def random_points(rng: np.random.Generator, count: int, n: int,
                  low: float=0.05, high: float=20.0) -> np.ndarray:
    # language=rst
    """Points with uniform directions and log-uniform radii in [*low*, *high*]."""
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return directions * np.exp(rng.uniform(np.log(low), np.log(high), count))[:, None]


def central_difference(f, y: np.ndarray, axis: int, step: float=1e-5) -> np.ndarray:
    # language=rst
    """:math:`\\partial_{axis} f` at the points *y* by a central difference."""
    e = np.zeros(y.shape[-1])
    e[axis] = step
    return (f(y + e) - f(y - e)) / (2.0 * step)


def laplacian(f, y: np.ndarray, step: float=1e-3) -> np.ndarray:
    # language=rst
    """Five-point finite-difference Laplacian, per axis, of *f* at *y*."""
    total = np.zeros(y.shape[:-1])
    for axis in range(y.shape[-1]):
        e = np.zeros(y.shape[-1])
        e[axis] = step
        total += (-f(y + 2 * e) + 16 * f(y + e) - 30 * f(y) + 16 * f(y - e) - f(y - 2 * e)) / (12 * step ** 2)
    return total
