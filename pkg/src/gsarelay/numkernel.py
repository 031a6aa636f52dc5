"""Deterministic complex-matrix primitives shared by all other modules.

Everything in here is a thin, contract-checked layer over numpy's LAPACK
bindings: SVD-based rank and null-space computation, guarded linear solves,
and seeded circularly-symmetric complex Gaussian matrices.

Reproducibility contract for :func:`random_complex_gaussian`: the generator
is numpy's ``default_rng`` (PCG64 bit stream seeded through ``SeedSequence``)
and normal variates come from ``Generator.standard_normal`` (ziggurat
method).  A complex entry is ``(x + 1j*y) / sqrt(2)`` with ``x``, ``y``
consecutive standard-normal draws, so real and imaginary parts are
independent with variance 1/2 each and the entry has unit second moment.
The same integer seed therefore yields the same matrix on every platform
running the same numpy generation scheme.

All functions are pure; random state is owned by the caller per stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, SingularMatrix

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_cmatrix",
    "rank",
    "null_space_basis",
    "solve_square",
    "random_complex_gaussian",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs used throughout the package.

    ``rel_rank_tol``: singular values at or below ``rel_rank_tol * s_max``
    count as zero when deciding rank / null-space dimension.
    ``residual_tol``: acceptable relative residual for solves, alignment
    equations, and end-to-end recovery checks.
    """

    rel_rank_tol: float = 1e-9
    residual_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("rel_rank_tol", "residual_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(
                    f"{name} must lie strictly between 0 and 1, got {value!r}"
                )


DEFAULT_TOL = Tolerance()


def as_cmatrix(a, *, name: str = "matrix") -> np.ndarray:
    """Coerce *a* to a 2-D complex128 array, rejecting non-finite entries."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidMatrix(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return arr


def _singular_values(arr: np.ndarray) -> np.ndarray:
    if min(arr.shape) == 0:
        return np.zeros(0)
    return np.linalg.svd(arr, compute_uv=False)


def rank(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank: number of singular values above ``rel_rank_tol * s_max``.

    A zero matrix (or one with a zero-sized dimension) has rank 0.
    """
    arr = as_cmatrix(a)
    s = _singular_values(arr)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rel_rank_tol * s[0]))


def null_space_basis(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the right null space of *a*.

    The result has ``cols(a) - rank(a)`` columns, each satisfying
    ``norm(a @ v) <= residual_tol * norm(a)``.
    """
    arr = as_cmatrix(a)
    n = arr.shape[1]
    if n == 0:
        raise InvalidMatrix("matrix must have at least one column")
    if arr.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(arr, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > tol.rel_rank_tol * s[0]))
    return vh[r:].conj().T


def solve_square(a, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Solve ``a @ x = b`` for square full-rank *a*.

    Raises :class:`SingularMatrix` when *a* is rank deficient at the
    configured cutoff, or when the computed solution fails the relative
    residual bound (an ill-conditioned system counts as degenerate here:
    callers treat it as a bad random draw and reseed).
    """
    arr = as_cmatrix(a, name="a")
    rhs = as_cmatrix(b, name="b")
    n = arr.shape[0]
    if arr.shape[1] != n:
        raise InvalidMatrix(f"a must be square, got shape {arr.shape}")
    if rhs.shape[0] != n:
        raise InvalidMatrix(
            f"b has {rhs.shape[0]} rows, expected {n} to match a"
        )
    if n == 0:
        return np.zeros((0, rhs.shape[1]), dtype=np.complex128)
    if rank(arr, tol) < n:
        raise SingularMatrix(f"{n}x{n} system is rank deficient")
    x = np.linalg.solve(arr, rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0.0:
        residual = np.linalg.norm(arr @ x - rhs)
        if residual > tol.residual_tol * scale:
            raise SingularMatrix(
                f"solve residual {residual:.3e} exceeds "
                f"{tol.residual_tol:.1e} * |b|"
            )
    return x


def random_complex_gaussian(rows: int, cols: int, seed) -> np.ndarray:
    """i.i.d. CN(0, 1) matrix of the given shape.

    ``seed`` may be an integer (or sequence of integers) used to construct a
    fresh ``numpy.random.Generator``, or an existing ``Generator`` whose
    state is advanced.  Entries have zero mean, independent real/imaginary
    parts with variance 1/2 each.
    """
    if rows < 0 or cols < 0:
        raise ValueError(f"shape must be nonnegative, got ({rows}, {cols})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)
