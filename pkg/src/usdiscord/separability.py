"""PPT test, closed-form separability conditions and explicit separable forms.

For the protocol family the joint state is PPT iff the weighted amplitudes
``p_i a_i sqrt(1 - |a_i|^2)`` coincide, and then it is separable. The
explicit decomposition built here is

    rho = (rho_1 - t |f><f|) (x) |0><0|  +  |f><f| (x) sigma_a

with ``rho_1 = sum_i p_i (1 - |a_i|^2) |e_i><e_i|`` and
``t = 1 / <f| rho_1^{-1} |f>``; at this ``t`` both factors are PSD and
``sigma_a`` is rank one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .ensembles import Ensemble, ProtocolState, build
from .errors import ConditionNotMet, DimensionMismatch, ReconstructionFailure
from .matrixcore import DensityMatrix, partial_transpose, projector


def ppt_test(rho: DensityMatrix, tol: Tolerances = DEFAULT.tol) -> tuple[bool, float]:
    """Return ``(is_ppt, min eigenvalue of the system-side partial transpose)``."""
    pt = partial_transpose(rho, "sys")
    w = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T)).min())
    return w >= -tol.ppt, w


def _weighted_amplitudes(ensemble: Ensemble) -> np.ndarray:
    a = ensemble.alphas
    return ensemble.priors * a * np.sqrt(1.0 - np.abs(a) ** 2)


def _max_pairwise_gap(z: np.ndarray) -> float:
    return float(np.max(np.abs(z[:, None] - z[None, :])))


def two_state_condition(ensemble: Ensemble, tol: Tolerances = DEFAULT.tol) -> tuple[bool, float]:
    """p+ sqrt((1-|a+|^2)/2) a+ == p- sqrt((1-|a-|^2)/2) a- as complex numbers."""
    if ensemble.d != 2:
        raise DimensionMismatch("two_state_condition needs exactly two states")
    z = _weighted_amplitudes(ensemble) / np.sqrt(2.0)
    residual = float(abs(z[0] - z[1]))
    return residual <= tol.condition, residual


def d_state_condition(ensemble: Ensemble, tol: Tolerances = DEFAULT.tol) -> tuple[bool, float]:
    residual = _max_pairwise_gap(_weighted_amplitudes(ensemble))
    return residual <= tol.condition, residual


def minor_matrix(ensemble: Ensemble, i: int, j: int) -> np.ndarray:
    """4x4 principal submatrix of the system-transposed d-state on rows/cols
    (i0, i1, j0, j1). Indices are 1-based as in ``1 <= i < j <= d``."""
    d = ensemble.d
    if not (1 <= i < j <= d):
        raise IndexError(f"need 1 <= i < j <= {d}, got ({i}, {j})")
    p, a = ensemble.priors, ensemble.alphas
    s = float(np.sum(p * np.abs(a) ** 2)) / d
    x = _weighted_amplitudes(ensemble) / np.sqrt(d)  # p_k a_k sqrt((1-|a_k|^2)/d)
    xi, xj = x[i - 1], x[j - 1]
    wi = p[i - 1] * (1 - abs(a[i - 1]) ** 2)
    wj = p[j - 1] * (1 - abs(a[j - 1]) ** 2)
    return np.array(
        [
            [wi, np.conj(xi), 0.0, np.conj(xj)],
            [xi, s, xi, s],
            [0.0, np.conj(xi), wj, np.conj(xj)],
            [xj, s, xj, s],
        ],
        dtype=np.complex128,
    )


def minor_determinant(ensemble: Ensemble, i: int, j: int) -> float:
    """Closed form of det(minor_matrix): never positive, zero iff the pair satisfies the condition."""
    d = ensemble.d
    if not (1 <= i < j <= d):
        raise IndexError(f"need 1 <= i < j <= {d}, got ({i}, {j})")
    p, a = ensemble.priors, ensemble.alphas
    w = p * (1 - np.abs(a) ** 2)
    z = _weighted_amplitudes(ensemble)
    total_failure = float(np.sum(p * np.abs(a) ** 2))
    return float(-(w[i - 1] + w[j - 1]) * total_failure * abs(z[i - 1] - z[j - 1]) ** 2 / d**2)


@dataclass(frozen=True, eq=False)
class SeparableDecomposition:
    """Terms ``(weight, system operator, ancilla operator)`` summing to rho."""

    terms: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    normalized: bool = False
    reading: str = "shifted"
    residual: float = field(default=float("nan"))

    def reassemble(self) -> np.ndarray:
        return sum(w * np.kron(s, a) for w, s, a in self.terms)

    def normalize(self) -> "SeparableDecomposition":
        """Rescale every factor to unit trace and move the mass into the weights."""
        out = []
        for w, s, a in self.terms:
            ts, ta = np.trace(s).real, np.trace(a).real
            out.append((float(w * ts * ta), s / ts, a / ta))
        return SeparableDecomposition(tuple(out), True, self.reading, self.residual)

    def min_factor_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(op).min()) for _, s, a in self.terms for op in (s, a))


def _success_operator(state: ProtocolState) -> np.ndarray:
    ens, e = state.ensemble, state.success_basis
    w = ens.priors * (1 - np.abs(ens.alphas) ** 2)
    return (e * w) @ e.conj().T


def _ancilla_coherence(state: ProtocolState) -> tuple[float, complex]:
    """(failure weight, <0|sigma|1>) of the ancilla operator paired with |f><f|."""
    ens, e, f = state.ensemble, state.success_basis, state.failure_vector
    fail = float(np.sum(ens.priors * np.abs(ens.alphas) ** 2))
    z = _weighted_amplitudes(ens)
    # sum_i p_i c_i conj(a_i) <f|e_i>; equals conj(kappa) * <f|sum_i e_i> when z_i = kappa.
    coh = complex(np.sum(np.conj(z) * (f.conj() @ e)))
    return fail, coh


def printed_decomposition(state: ProtocolState) -> SeparableDecomposition:
    """Two-term form with all success weight on the |0>_a term.

    It reproduces rho algebraically when the condition holds, but its
    ancilla factor has a zero |0><0| entry next to nonzero coherences and is
    therefore not positive.
    """
    fail, coh = _ancilla_coherence(state)
    f = state.failure_vector
    sigma = np.array([[0.0, coh], [np.conj(coh), fail]], dtype=np.complex128)
    terms = ((1.0, _success_operator(state), projector([1, 0])), (1.0, projector(f), sigma))
    dec = SeparableDecomposition(terms, reading="printed")
    return SeparableDecomposition(terms, reading="printed", residual=float(np.max(np.abs(dec.reassemble() - state.rho.mat))))


def build_decomposition(state_or_ensemble, tol: Tolerances = DEFAULT.tol) -> SeparableDecomposition:
    """Explicit separable form of a condition-satisfying protocol state.

    Accepts a :class:`ProtocolState` or an :class:`Ensemble` (built with the
    d-state construction). Raises :class:`ConditionNotMet` when the weighted
    amplitudes differ, :class:`ReconstructionFailure` when the terms do not
    sum back to rho.
    """
    state = state_or_ensemble if isinstance(state_or_ensemble, ProtocolState) else build(state_or_ensemble)
    ok, residual = d_state_condition(state.ensemble, tol)
    if not ok:
        raise ConditionNotMet(f"weighted amplitudes differ by {residual:.3e}")

    rho1 = _success_operator(state)
    f = state.failure_vector
    fail, coh = _ancilla_coherence(state)
    shift = 1.0 / float(np.real(f.conj() @ np.linalg.solve(rho1, f)))
    sys_op = rho1 - shift * projector(f)
    sys_op = 0.5 * (sys_op + sys_op.conj().T)
    sigma = np.array([[shift, coh], [np.conj(coh), fail]], dtype=np.complex128)
    terms = ((1.0, sys_op, projector([1, 0])), (1.0, projector(f), sigma))

    dec = SeparableDecomposition(terms)
    err = float(np.max(np.abs(dec.reassemble() - state.rho.mat)))
    if err > tol.reconstruction_fail:
        raise ReconstructionFailure(f"separable terms miss rho by {err:.3e}")
    return SeparableDecomposition(terms, residual=err)


@dataclass(frozen=True, eq=False)
class SeparabilityVerdict:
    ppt: bool
    min_pt_eigenvalue: float
    closed_form_condition: bool
    condition_residual: float
    decomposition: SeparableDecomposition | None = None

    @property
    def consistent(self) -> bool:
        return self.ppt == self.closed_form_condition

    def to_dict(self) -> dict:
        out = {
            "ppt": self.ppt,
            "min_pt_eigenvalue": self.min_pt_eigenvalue,
            "closed_form_condition": self.closed_form_condition,
            "condition_residual": self.condition_residual,
            "consistent": self.consistent,
            "decomposition": None,
        }
        if self.decomposition is not None:
            out["decomposition"] = {
                "terms": len(self.decomposition.terms),
                "reconstruction_residual": self.decomposition.residual,
                "min_factor_eigenvalue": self.decomposition.min_factor_eigenvalue(),
            }
        return out


def verdict(state: ProtocolState, tol: Tolerances = DEFAULT.tol) -> SeparabilityVerdict:
    ppt, w = ppt_test(state.rho, tol)
    cond, res = d_state_condition(state.ensemble, tol)
    dec = build_decomposition(state, tol) if cond else None
    return SeparabilityVerdict(ppt, w, cond, res, dec)
