"""Dense complex linear algebra on small bipartite operators.

Matrices are plain ``numpy`` complex arrays. A :class:`DensityMatrix` adds the
bipartition ``(d_sys, d_anc)`` and is validated on construction. The tensor
ordering is fixed everywhere: flat index = ``sys * d_anc + anc``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DimensionMismatch, NotDensityMatrix, NotHermitian, NotPSD

Side = Literal["sys", "anc"]


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a square complex128 array; never reshapes."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated bipartite density operator on ``C^d_sys (x) C^d_anc``."""

    mat: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        m = as_matrix(self.mat)
        d_sys, d_anc = (int(x) for x in self.dims)
        if d_sys < 1 or d_anc < 1 or d_sys * d_anc != m.shape[0]:
            raise DimensionMismatch(f"dims {self.dims} do not match matrix size {m.shape[0]}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", (d_sys, d_anc))
        check_density(m)

    @classmethod
    def from_pure(cls, psi, dims: tuple[int, int]) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128)
        return cls(projector(psi / np.linalg.norm(psi)), dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def tensor(self) -> np.ndarray:
        """View as a rank-4 array indexed ``[sys, anc, sys', anc']``."""
        d_sys, d_anc = self.dims
        return self.mat.reshape(d_sys, d_anc, d_sys, d_anc)


def check_density(m: np.ndarray, tol: Tolerances = DEFAULT.tol) -> None:
    if np.max(np.abs(m - dagger(m))) > tol.hermitian:
        raise NotDensityMatrix("matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol.trace:
        raise NotDensityMatrix(f"trace {np.trace(m).real:.15g} differs from 1")
    if np.linalg.eigvalsh(m).min() < -tol.psd:
        raise NotDensityMatrix("matrix has a negative eigenvalue")


def kron(a, b) -> np.ndarray:
    """Tensor product with the first factor as the system (slow) index."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(rho: DensityMatrix, keep: Side) -> DensityMatrix:
    t = rho.tensor()
    if keep == "sys":
        out, d = np.einsum("ijkj->ik", t), rho.dims[0]
    elif keep == "anc":
        out, d = np.einsum("ijil->jl", t), rho.dims[1]
    else:
        raise ValueError(f"keep must be 'sys' or 'anc', not {keep!r}")
    return DensityMatrix(out, (d, 1))


def partial_transpose(rho, side: Side = "sys", dims: tuple[int, int] | None = None) -> np.ndarray:
    """Transpose one tensor factor. The result need not be PSD, so it is a bare matrix.

    ``rho`` is a :class:`DensityMatrix`, or any square matrix when ``dims`` is given.
    """
    if isinstance(rho, DensityMatrix):
        m, (d_sys, d_anc) = rho.mat, rho.dims
    else:
        if dims is None:
            raise DimensionMismatch("dims are required for a bare matrix")
        m, (d_sys, d_anc) = as_matrix(rho), dims
        if d_sys * d_anc != m.shape[0]:
            raise DimensionMismatch(f"dims {dims} do not match matrix size {m.shape[0]}")
    t = m.reshape(d_sys, d_anc, d_sys, d_anc)
    if side == "sys":
        t = t.transpose(2, 1, 0, 3)
    elif side == "anc":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"side must be 'sys' or 'anc', not {side!r}")
    return np.ascontiguousarray(t).reshape(m.shape)


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_spectrum(h, tol: Tolerances = DEFAULT.tol) -> Spectrum:
    h = as_matrix(h)
    if np.max(np.abs(h - dagger(h))) > tol.spectrum_input:
        raise NotHermitian("input deviates from its adjoint")
    # LAPACK heevd is deterministic for identical input bits.
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def _entropy_from_eigenvalues(w: np.ndarray, tol: Tolerances) -> float:
    if w.min() < -tol.psd:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{tol.psd:g}")
    w = w[w > tol.entropy_clip]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def von_neumann_entropy(rho, tol: Tolerances = DEFAULT.tol) -> float:
    """Entropy in bits; eigenvalues under ``tol.entropy_clip`` count as zero."""
    m = rho.mat if isinstance(rho, DensityMatrix) else rho
    return _entropy_from_eigenvalues(hermitian_spectrum(m, tol).eigenvalues, tol)


def mutual_information(rho: DensityMatrix, tol: Tolerances = DEFAULT.tol) -> float:
    s_a = von_neumann_entropy(partial_trace(rho, "sys"), tol)
    s_b = von_neumann_entropy(partial_trace(rho, "anc"), tol)
    return s_a + s_b - von_neumann_entropy(rho, tol)
