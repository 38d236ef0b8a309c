"""
Vector/matrix primitives shared by every SUVR module.

Dense vectors and matrices are float64 numpy arrays; the seeded generator is
numpy's PCG64, which yields the same stream for the same seed on every
platform.
"""

import numpy as np

from suvr_engine.exceptions import DimensionMismatchError
from suvr_engine.exceptions import NonPositiveTemperatureError
from suvr_engine.exceptions import NormTooSmallError

NORM_FLOOR = 1e-12

DenseVector = np.ndarray
DenseMatrix = np.ndarray
SeededRng = np.random.Generator


def make_rng(seed: int | np.random.SeedSequence) -> SeededRng:
    """Create the generator used for all engine randomness."""
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Derive `count` independent child seeds from one experiment seed."""
    return np.random.SeedSequence(seed).spawn(count)


def as_vector(values) -> DenseVector:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def as_matrix(values) -> DenseMatrix:
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or 0 in m.shape:
        raise DimensionMismatchError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    return m


def l2_normalize(v) -> DenseVector:
    """
    Scale a vector to unit L2 norm.

    Raises:
        NormTooSmallError: If the norm is below 1e-12.
    """
    v = as_vector(v)
    norm = float(np.linalg.norm(v))
    if norm < NORM_FLOOR:
        raise NormTooSmallError(f"cannot normalize vector with norm {norm:.3e}")
    return v / norm


def normalize_rows(matrix) -> DenseMatrix:
    """L2-normalize every row of a matrix; any near-zero row raises NormTooSmallError."""
    matrix = as_matrix(matrix)
    norms = np.linalg.norm(matrix, axis=1)
    small = np.flatnonzero(norms < NORM_FLOOR)
    if small.size:
        raise NormTooSmallError(
            f"cannot normalize row {int(small[0])} with norm {norms[small[0]]:.3e}"
        )
    return matrix / norms[:, None]


def dot(u, v) -> float:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"dot of length {u.size} and {v.size}")
    return float(np.dot(u, v))


def log_softmax(scores, tau: float) -> DenseVector:
    """Log-probabilities of `stable_softmax`, computed without exponentiating twice."""
    if tau <= 0:
        raise NonPositiveTemperatureError(f"temperature must be > 0, got {tau}")
    z = as_vector(scores) / tau
    z = z - z.max()
    return z - np.log(np.exp(z).sum())


def stable_softmax(scores, tau: float) -> DenseVector:
    """
    Temperature softmax with unconditional max-subtraction.

    Args:
        scores: Finite scores s_i.
        tau: Temperature, strictly positive.

    Returns:
        Probabilities p_i = exp(s_i / tau) / sum_j exp(s_j / tau).
    """
    if tau <= 0:
        raise NonPositiveTemperatureError(f"temperature must be > 0, got {tau}")
    z = as_vector(scores) / tau
    e = np.exp(z - z.max())
    return e / e.sum()


def random_unit_rows(n: int, d: int, rng: SeededRng) -> DenseMatrix:
    """Draw an n x d matrix of standard-normal rows and normalize each row."""
    if n < 1 or d < 1:
        raise DimensionMismatchError(f"random_unit_rows needs n, d >= 1, got ({n}, {d})")
    return normalize_rows(rng.standard_normal((n, d)))
