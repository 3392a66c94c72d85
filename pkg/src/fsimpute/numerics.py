"""Dense matrix helpers, seeded random streams and order statistics.

Matrices are plain ``float64`` numpy arrays of shape ``(rows, cols)``.
Random numbers come from numpy's PCG64 bit generator.  A stream is
identified by an integer seed and a path of string labels; child streams
are derived from ``(seed, path)`` alone, so they never depend on how many
draws were taken from the parent.
"""
import zlib

import numpy as np


class ShapeError(ValueError):
    """Raised when matrix dimensions are incompatible or empty."""


def as_matrix(a, name="matrix"):
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    return m


def matmul(a, b):
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def _label_key(label):
    # crc32 is stable across processes and platforms, unlike hash()
    return zlib.crc32(str(label).encode("utf-8"))


class RngStream:
    """A reproducible random stream (PCG64) addressed by seed and label path.

    Parameters
    ----------
    seed : int
        Non-negative 64-bit seed.
    path : tuple of str
        Labels identifying this stream below the root.

    Examples
    --------
    >>> root = RngStream(7)
    >>> a = root.child("amputation").uniform(size=3)
    >>> b = RngStream(7).child("amputation").uniform(size=3)
    >>> bool((a == b).all())
    True
    """

    def __init__(self, seed, path=()):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(str(p) for p in path)
        ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_label_key(p) for p in self.path))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *labels):
        """Independent stream for ``labels``; unaffected by draws on ``self``."""
        return RngStream(self.seed, self.path + tuple(str(x) for x in labels))

    @property
    def generator(self):
        return self._gen

    def uniform(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={'/'.join(self.path) or '.'})"


def uniform_matrix(rows, cols, rng):
    """``rows x cols`` matrix of i.i.d. draws from U[0, 1)."""
    if rows < 1 or cols < 1:
        raise ShapeError(f"uniform matrix needs positive dimensions, got {rows}x{cols}")
    return rng.uniform(size=(int(rows), int(cols)))


def lower_median(values):
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("median of an empty sequence")
    # 1-indexed position ceil(n/2) -> 0-indexed (n - 1) // 2
    return float(v[(v.size - 1) // 2])


def column_median(m, j):
    """Lower median of column ``j``: order statistic ``ceil(rows/2)``, 1-indexed."""
    m = as_matrix(m)
    if not 0 <= j < m.shape[1]:
        raise IndexError(f"column {j} out of range for matrix with {m.shape[1]} columns")
    if m.shape[0] < 1:
        raise ShapeError("median of a matrix with no rows")
    return lower_median(m[:, j])
