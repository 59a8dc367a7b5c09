"""Finite-dimensional complex inner-product spaces with weighted inner
products.

Every space carries a Hermitian positive-definite weight (Gram) matrix
``W``; the inner product is

    <x | y> = x^H · W · y,

conjugate-linear in the FIRST argument.  All heavier machinery (relations,
boundary data, solvers) is expressed against these spaces, so that weighted
geometries (energy norms, graph norms, boundary-data norms) are handled by
one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "InnerProductSpace",
    "LinearMap",
    "inner",
    "adjoint",
    "project",
    "RankDeficientBasis",
]

#: Relative tolerance for the Hermitian-deviation check of weights.
HERMITIAN_RTOL = 1e-12

#: Condition-number threshold above which a projection basis is rejected.
COND_THRESHOLD = 1e12


class RankDeficientBasis(ValueError):
    """Raised when a projection basis is numerically rank deficient."""


def _as_matrix(a, dim=None) -> np.ndarray:
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if dim is not None and m.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class InnerProductSpace:
    """A finite-dimensional complex Hilbert space with weight matrix.

    Parameters
    ----------
    dim:
        Positive dimension.
    weight:
        Hermitian positive-definite ``dim x dim`` matrix; defaults to the
        identity.  Positive definiteness is established by a Cholesky
        factorisation (its failure is the error path) and the smallest
        eigenvalue is stored in :attr:`cmin`.
    """

    dim: int
    weight: np.ndarray = None  # type: ignore[assignment]
    cmin: float = field(init=False)
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be a positive integer")
        w = np.eye(self.dim, dtype=complex) if self.weight is None else _as_matrix(self.weight, self.dim)
        dev = np.linalg.norm(w - w.conj().T)
        scale = max(np.linalg.norm(w), 1e-300)
        if dev > HERMITIAN_RTOL * scale:
            raise ValueError(f"weight is not Hermitian (relative deviation {dev / scale:.3e})")
        w = 0.5 * (w + w.conj().T)
        try:
            chol = sla.cholesky(w, lower=True)
        except sla.LinAlgError as exc:
            raise ValueError("weight is not positive definite") from exc
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "cmin", float(sla.eigvalsh(w)[0]))

    # -- basic geometry ----------------------------------------------------

    def inner(self, x, y) -> complex:
        x = self.check_vector(x)
        y = self.check_vector(y)
        return complex(x.conj() @ (self.weight @ y))

    def norm(self, x) -> float:
        x = self.check_vector(x)
        # via the Cholesky factor: ||L^H x||_2, nonnegative by construction
        return float(np.linalg.norm(self._chol.conj().T @ x))

    def check_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).reshape(-1)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got {x.shape}")
        return x

    def solve_weight(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``W x = rhs`` through the cached Cholesky factor."""
        y = sla.solve_triangular(self._chol, rhs, lower=True)
        return sla.solve_triangular(self._chol.conj().T, y, lower=False)

    def is_identity_weight(self, tol: float = 1e-14) -> bool:
        return bool(np.allclose(self.weight, np.eye(self.dim), atol=tol))


@dataclass(frozen=True)
class LinearMap:
    """A linear map between two inner-product spaces, stored as a matrix."""

    source: InnerProductSpace
    target: InnerProductSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if m.shape != (self.target.dim, self.source.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"(target.dim, source.dim) = ({self.target.dim}, {self.source.dim})"
            )
        object.__setattr__(self, "matrix", m)

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ self.source.check_vector(x)


def inner(space: InnerProductSpace, x, y) -> complex:
    """Weighted inner product ``x^H · W · y`` (conjugate-linear in ``x``)."""
    return space.inner(x, y)


def adjoint(m: LinearMap) -> LinearMap:
    """The adjoint map ``T*`` with ``<Tx|y>_target = <x|T*y>_source``.

    Concretely ``T* = W_source^{-1} · T^H · W_target``.
    """
    mat = m.source.solve_weight(m.matrix.conj().T @ m.target.weight)
    return LinearMap(source=m.target, target=m.source, matrix=mat)


def project(space: InnerProductSpace, basis, x) -> np.ndarray:
    """Coefficients of the orthogonal projection of ``x`` onto ``span(basis)``.

    Returns the coefficient vector ``c`` minimising ``||x - sum c_i b_i||``
    in the weighted norm, computed from the basis Gram system.  A basis
    whose Gram matrix has condition number above ``1e12`` is rejected.
    """
    b = np.column_stack([space.check_vector(v) for v in basis])
    x = space.check_vector(x)
    wb = space.weight @ b
    gram = b.conj().T @ wb
    gram = 0.5 * (gram + gram.conj().T)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > COND_THRESHOLD:
        raise RankDeficientBasis(f"projection basis Gram condition number {cond:.3e} exceeds {COND_THRESHOLD:.0e}")
    rhs = wb.conj().T @ x
    return np.linalg.solve(gram, rhs)
