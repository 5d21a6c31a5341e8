"""Input ensembles and the joint system-ancilla state after the embedding unitary.

The unitary itself is never built. Each input ``|psi_i>`` is mapped to

    |out_i> = sqrt(1 - |a_i|^2) |e_i>|0>_a + a_i |f>|1>_a

where ``e_i`` is the discrimination basis and ``f`` the common failure vector.
For the two-state protocol ``e = (|+>, |->)`` and ``f = |0>``; for the d-state
protocol ``e_i = |i>`` and ``f = (|1> + ... + |d>)/sqrt(d)``. Such a unitary
exists iff ``<out_i|out_j> = <psi_i|psi_j>``, i.e. ``<psi_i|psi_j> = conj(a_i) a_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import BadPriors, DegenerateEnsemble, DimensionMismatch, SingularGram
from .matrixcore import DensityMatrix, dagger, ket

Construction = Literal["two_state", "d_state"]

SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Priors and failure amplitudes; pairwise overlaps follow as ``conj(a_i) a_j``."""

    priors: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float).copy()
        a = np.asarray(self.alphas, dtype=np.complex128).copy()
        if p.ndim != 1 or a.shape != p.shape:
            raise DimensionMismatch("priors and alphas must be 1-D of equal length")
        if p.size < 2:
            raise DimensionMismatch("need at least two states")
        _check_priors(p)
        mods = np.abs(a)
        if np.any(mods <= 0.0) or np.any(mods >= 1.0):
            raise DegenerateEnsemble(
                "every |alpha_i| must lie strictly inside (0, 1); "
                "boundary values mean identical or orthogonal inputs"
            )
        p.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "alphas", a)

    @property
    def d(self) -> int:
        return self.priors.size

    def overlaps(self) -> np.ndarray:
        """Gram matrix of the inputs: unit diagonal, ``conj(a_i) a_j`` elsewhere."""
        g = np.outer(self.alphas.conj(), self.alphas)
        np.fill_diagonal(g, 1.0)
        return g


def _check_priors(p: np.ndarray, tol: Tolerances = DEFAULT.tol) -> None:
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise BadPriors("every prior must be strictly positive")
    if abs(p.sum() - 1.0) > tol.trace:
        raise BadPriors(f"priors sum to {p.sum():.15g}, not 1")


@dataclass(frozen=True, eq=False)
class ProtocolState:
    rho: DensityMatrix
    ensemble: Ensemble
    construction: Construction
    branch_vectors: tuple[np.ndarray, ...]
    success_basis: np.ndarray  # columns e_i
    failure_vector: np.ndarray

    def output_gram(self) -> np.ndarray:
        v = np.array(self.branch_vectors)
        return v.conj() @ v.T


def discrimination_basis(d: int, construction: Construction) -> tuple[np.ndarray, np.ndarray]:
    """Return (success basis as columns, failure vector) for a construction."""
    if construction == "two_state":
        if d != 2:
            raise DimensionMismatch("the two-state construction needs d = 2")
        e = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)
        return e, ket(2, 0)
    if construction == "d_state":
        return np.eye(d, dtype=np.complex128), np.full(d, 1 / np.sqrt(d), dtype=np.complex128)
    raise ValueError(f"unknown construction {construction!r}")


def _assemble(ens: Ensemble, construction: Construction) -> ProtocolState:
    d = ens.d
    e, f = discrimination_basis(d, construction)
    anc0, anc1 = ket(2, 0), ket(2, 1)
    success = np.sqrt(1.0 - np.abs(ens.alphas) ** 2)
    outs = tuple(
        success[i] * np.kron(e[:, i], anc0) + ens.alphas[i] * np.kron(f, anc1) for i in range(d)
    )
    mat = sum(p * np.outer(v, v.conj()) for p, v in zip(ens.priors, outs))
    # Symmetrize away rounding so the Hermiticity check is exact.
    mat = 0.5 * (mat + dagger(mat))
    return ProtocolState(DensityMatrix(mat, (d, 2)), ens, construction, outs, e, f)


def minus_amplitude(alpha: complex, alpha_plus: complex) -> complex:
    """Solve ``alpha = conj(alpha_plus) * alpha_minus`` for ``alpha_minus``."""
    return complex(alpha) / np.conj(complex(alpha_plus))


def build_two_state(p_plus: float, p_minus: float, alpha: complex, alpha_plus: complex) -> ProtocolState:
    """Joint state for discriminating two inputs with overlap ``alpha``.

    ``|alpha_plus|`` is the single free parameter; ``alpha_minus`` is derived
    from it. Raises :class:`DegenerateEnsemble` when either amplitude has
    modulus 0 or 1 and :class:`BadPriors` for invalid priors.
    """
    _check_priors(np.array([p_plus, p_minus], dtype=float))
    if alpha_plus == 0:
        raise DegenerateEnsemble("alpha_plus = 0")
    ens = Ensemble(np.array([p_plus, p_minus]), np.array([alpha_plus, minus_amplitude(alpha, alpha_plus)]))
    return _assemble(ens, "two_state")


def build_d_state(priors: Sequence[float], alphas: Sequence[complex]) -> ProtocolState:
    return _assemble(Ensemble(np.asarray(priors, float), np.asarray(alphas, complex)), "d_state")


def build(ensemble: Ensemble, construction: Construction = "d_state") -> ProtocolState:
    return _assemble(ensemble, construction)


def hadamard_relabel(state: ProtocolState) -> DensityMatrix:
    """Map a d = 2 d-state construction onto the two-state one (|1> -> |+>, |2> -> |->)."""
    if state.ensemble.d != 2:
        raise DimensionMismatch("relabeling is defined for d = 2 only")
    h = np.kron(SQRT_HALF * np.array([[1, 1], [1, -1]]), np.eye(2))
    m = h @ state.rho.mat @ h.T
    return DensityMatrix(0.5 * (m + dagger(m)), (2, 2))


def validate_embedding(ensemble: Ensemble, target_gram, tol: Tolerances = DEFAULT.tol) -> tuple[bool, float]:
    """Check that a unitary can map the targets onto the protocol outputs.

    Returns ``(ok, residual)`` where residual is the largest off-diagonal
    deviation ``|G_ij - conj(a_i) a_j|``.
    """
    g = np.asarray(target_gram, dtype=np.complex128)
    if g.shape != (ensemble.d, ensemble.d):
        raise DimensionMismatch(f"target Gram has shape {g.shape}, expected {(ensemble.d,) * 2}")
    diff = np.abs(g - ensemble.overlaps())
    np.fill_diagonal(diff, 0.0)
    residual = float(diff.max())
    return residual <= tol.gram_rank, residual


def states_from_gram(gram, tol: Tolerances = DEFAULT.tol) -> list[np.ndarray]:
    """Concrete unit vectors ``psi_j`` in C^d with ``<psi_i|psi_j> = gram[i, j]``.

    Uses the Cholesky factor ``G = L L^dagger``; ``psi_j`` is column j of
    ``L^dagger``.
    """
    g = np.asarray(gram, dtype=np.complex128)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch("Gram matrix must be square")
    if np.max(np.abs(g - dagger(g))) > tol.spectrum_input:
        raise SingularGram("Gram matrix is not Hermitian")
    g = 0.5 * (g + dagger(g))
    if np.linalg.eigvalsh(g).min() <= tol.gram_rank:
        raise SingularGram("Gram matrix is not positive definite; the states are linearly dependent")
    upper = dagger(np.linalg.cholesky(g))
    return [upper[:, j].copy() for j in range(g.shape[0])]
