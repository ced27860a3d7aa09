"""Dense Hermitian linear algebra primitives.

All functions are pure and operate on complex numpy matrices. Hermitian input
is validated against `Tolerances.hermiticity`; positive semidefinite input is
validated against the relative negativity floor. Ranks are decided by a
relative cutoff on the spectrum (eigenvalues at or below
``rel_tol * max|λ|`` count as zero), so normalised and unnormalised operators
behave the same.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from steerdistil.core import errors
from steerdistil.core.helper import DEFAULT_TOLERANCES, Operator, Tolerances


def dagger(matrix: Operator) -> Operator:
    """Conjugate transpose."""
    return np.conj(np.swapaxes(matrix, -1, -2))


def frobenius(matrix: np.ndarray) -> float:
    """Frobenius norm (summed over any leading axes)."""
    return float(np.sqrt(np.sum(np.abs(matrix) ** 2)))


def hermiticity_deviation(matrix: Operator) -> float:
    """Maximal absolute entry of H − H†."""
    return float(np.max(np.abs(matrix - dagger(matrix)), initial=0.0))


def require_hermitian(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Check Hermiticity and return the exactly Hermitian part.

    Args:
        matrix: Square complex matrix.
        tolerances: Numerical tolerances.

    Returns:
        (H + H†) / 2.

    Raises:
        NonHermitianInputError: If H deviates from H† beyond tolerance.
        DimensionMismatchError: If the matrix is not square.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:  # noqa: PLR2004
        msg = f"Expected a square matrix, got shape {matrix.shape}."
        raise errors.DimensionMismatchError(msg)
    deviation = hermiticity_deviation(matrix)
    if deviation > tolerances.hermiticity:
        msg = (
            f"Operator is not Hermitian: max |H - H†| = {deviation:.3e} "
            f"exceeds {tolerances.hermiticity:.1e}."
        )
        raise errors.NonHermitianInputError(msg)
    return (matrix + dagger(matrix)) / 2


def spectral_decompose(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian operator.

    Args:
        matrix: Hermitian operator.
        tolerances: Numerical tolerances.

    Returns:
        Real eigenvalues sorted in descending order and the matching
        orthonormal eigenvectors as columns.

    Raises:
        NonHermitianInputError: If the operator is not Hermitian.
    """
    hermitian = require_hermitian(matrix, tolerances=tolerances)
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitian)
    return eigenvalues[::-1], eigenvectors[:, ::-1]


def _psd_spectrum(
    matrix: Operator,
    tolerances: Tolerances,
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition that rejects negative operators."""
    eigenvalues, eigenvectors = spectral_decompose(matrix, tolerances=tolerances)
    scale = float(np.max(np.abs(eigenvalues), initial=0.0))
    if eigenvalues.size and eigenvalues[-1] < -tolerances.negativity * scale:
        msg = (
            f"Operator is not positive semidefinite: smallest eigenvalue "
            f"{eigenvalues[-1]:.3e} with largest magnitude {scale:.3e}."
        )
        raise errors.NegativeOperatorError(msg)
    return eigenvalues, eigenvectors


def _retained(eigenvalues: np.ndarray, rel_tol: float) -> np.ndarray:
    """Boolean mask of eigenvalues above the support cutoff."""
    largest = float(np.max(eigenvalues, initial=0.0))
    if largest <= 0:
        return np.zeros(eigenvalues.shape, dtype=bool)
    return eigenvalues > rel_tol * largest


def support_basis(
    matrix: Operator,
    rel_tol: float | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Orthonormal basis (as columns) of the support of a PSD operator."""
    rel_tol = tolerances.support if rel_tol is None else rel_tol
    eigenvalues, eigenvectors = _psd_spectrum(matrix, tolerances)
    return eigenvectors[:, _retained(eigenvalues, rel_tol)]


def rank(
    matrix: Operator,
    rel_tol: float | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> int:
    """Number of eigenvalues above the support cutoff."""
    return int(support_basis(matrix, rel_tol, tolerances=tolerances).shape[1])


def support_projector(
    matrix: Operator,
    rel_tol: float | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Projector onto the support of a PSD operator.

    Args:
        matrix: Positive semidefinite operator.
        rel_tol: Eigenvalues at or below ``rel_tol * λ_max`` are treated as
            zero. Defaults to `Tolerances.support`.
        tolerances: Numerical tolerances.

    Returns:
        The orthogonal projector onto the retained eigenspaces.

    Raises:
        NegativeOperatorError: If the operator has a significantly negative
            eigenvalue.
    """
    basis = support_basis(matrix, rel_tol, tolerances=tolerances)
    return basis @ dagger(basis)


def _spectral_function(
    matrix: Operator,
    function: Callable[[np.ndarray], np.ndarray],
    tolerances: Tolerances,
) -> Operator:
    """Apply a scalar function on the support, zero on the kernel."""
    eigenvalues, eigenvectors = _psd_spectrum(matrix, tolerances)
    keep = _retained(eigenvalues, tolerances.support)
    values = np.zeros_like(eigenvalues)
    values[keep] = function(eigenvalues[keep])
    return (eigenvectors * values) @ dagger(eigenvectors)


def sqrt_pinv(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Inverse square root on the support, zero on its orthocomplement.

    Raises:
        NegativeOperatorError: If the operator is not PSD.
    """
    return _spectral_function(matrix, lambda x: 1 / np.sqrt(x), tolerances)


def matrix_sqrt(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Positive square root of a PSD operator.

    Eigenvalues in the negativity tolerance band are clipped to zero.

    Raises:
        NegativeOperatorError: If the operator is not PSD.
    """
    eigenvalues, eigenvectors = _psd_spectrum(matrix, tolerances)
    roots = np.sqrt(np.clip(eigenvalues, 0, None))
    return (eigenvectors * roots) @ dagger(eigenvectors)


def polar_decompose(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[Operator, Operator]:
    """Left polar decomposition A = U P.

    P = √(A†A). On the support of P, U is fixed by A. On ker(P), U maps
    an orthonormal basis of ker(P) onto range(A)^⊥ by the unitary closest to
    the identity, so the result is deterministic and U = I on ker(P) whenever
    ker(P) = range(A)^⊥.

    Args:
        matrix: Square matrix.
        tolerances: Numerical tolerances.

    Returns:
        Unitary U and positive semidefinite P.

    Raises:
        DimensionMismatchError: If the matrix is not square.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:  # noqa: PLR2004
        msg = f"Polar decomposition needs a square matrix, got {matrix.shape}."
        raise errors.DimensionMismatchError(msg)
    left, singular, right_h = scipy.linalg.svd(matrix)
    right = dagger(right_h)
    positive = (right * singular) @ right_h
    keep = _retained(singular, tolerances.support)
    unitary = left[:, keep] @ dagger(right[:, keep])
    kernel = right[:, ~keep]
    if kernel.shape[1]:
        cokernel = left[:, ~keep]
        overlap_u, _, overlap_vh = scipy.linalg.svd(dagger(cokernel) @ kernel)
        unitary = unitary + cokernel @ overlap_u @ overlap_vh @ dagger(kernel)
    return unitary, positive


def unitary_from_generator(generator: Operator) -> Operator:
    """Exact unitary exp(iH) of a Hermitian generator, computed spectrally."""
    eigenvalues, eigenvectors = scipy.linalg.eigh((generator + dagger(generator)) / 2)
    return (eigenvectors * np.exp(1j * eigenvalues)) @ dagger(eigenvectors)


def support_inclusion_deviation(
    inner: Operator,
    outer: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Frobenius norm of (I − Π_outer) Π_inner.

    Zero iff supp(inner) ⊆ supp(outer); both operators must be PSD.
    """
    inner_projector = support_projector(inner, tolerances=tolerances)
    outer_projector = support_projector(outer, tolerances=tolerances)
    identity = np.eye(outer.shape[0])
    return frobenius((identity - outer_projector) @ inner_projector)


def unitary_deviation(matrix: Operator) -> float:
    """Maximal absolute entry of U†U − I."""
    identity = np.eye(matrix.shape[1])
    return float(np.max(np.abs(dagger(matrix) @ matrix - identity), initial=0.0))


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal basis of the real space of Hermitian dim × dim matrices.

    The basis is orthonormal under the Hilbert-Schmidt inner product
    ⟨A, B⟩ = tr(AB). Diagonal units come first, then the symmetric and the
    antisymmetric off-diagonal pairs in row-major order.

    Returns:
        Array of shape (dim², dim, dim).
    """
    basis = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    for index in range(dim):
        basis[index, index, index] = 1
    index = dim
    scale = 1 / np.sqrt(2)
    for row in range(dim):
        for col in range(row + 1, dim):
            basis[index, row, col] = basis[index, col, row] = scale
            basis[index + 1, row, col] = 1j * scale
            basis[index + 1, col, row] = -1j * scale
            index += 2
    return basis


def haar_unitary(dim: int, rng: np.random.Generator) -> Operator:
    """Haar distributed unitary from the QR decomposition of a Ginibre matrix."""
    ginibre = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = scipy.linalg.qr(ginibre)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases
