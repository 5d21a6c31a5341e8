"""Left/right quantum discord over von Neumann measurements, and zero-discord certificates.

"Left" means the measurement acts on the system (first factor), "right" on
the ancilla (second factor). For a measured side M and unmeasured side U,

    D_M(rho) = I(rho) - [S(rho_U) - min_{E} sum_k p_k S(rho_{U|k})]

and the minimum runs over rank-1 projective measurements ``E`` on M.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT, Config, Tolerances
from .ensembles import Ensemble
from .errors import DimensionMismatch, UnsupportedDimension
from .matrixcore import DensityMatrix, mutual_information, partial_trace, von_neumann_entropy

MeasuredSide = Literal["left", "right"]


def _measured_dim(rho: DensityMatrix, side: MeasuredSide) -> int:
    if side == "left":
        return rho.dims[0]
    if side == "right":
        return rho.dims[1]
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def _pairs(m: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(m), 2))


def bloch_vectors(theta: float, phi: float) -> np.ndarray:
    """Columns are the two measurement vectors for Bloch direction (theta, phi)."""
    c, s, e = np.cos(theta / 2), np.sin(theta / 2), np.exp(1j * phi)
    return np.array([[c, s], [e * s, -e * c]], dtype=np.complex128)


def givens_unitary(m: int, angles) -> np.ndarray:
    """Product of complex Givens rotations, one (angle, phase) pair per index pair i < j.

    Together with the free column phases this covers every orthonormal basis of C^m.
    """
    angles = np.asarray(angles, dtype=float)
    pairs = _pairs(m)
    if angles.size != 2 * len(pairs):
        raise DimensionMismatch(f"need {2 * len(pairs)} angles for m = {m}, got {angles.size}")
    u = np.eye(m, dtype=np.complex128)
    for (i, j), (t, p) in zip(pairs, angles.reshape(-1, 2)):
        g = np.eye(m, dtype=np.complex128)
        c, s = np.cos(t), np.sin(t)
        g[i, i] = c
        g[j, j] = c
        g[i, j] = -np.exp(-1j * p) * s
        g[j, i] = np.exp(1j * p) * s
        u = u @ g
    return u


@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-1 projective measurement on one side.

    For ``dim == 2`` the angles are the Bloch pair (theta, phi); otherwise they
    are (angle, phase) per Givens pair, see :func:`givens_unitary`.
    """

    subsystem: MeasuredSide
    dim: int
    angles: tuple[float, ...]

    def vectors(self) -> np.ndarray:
        if self.dim == 2:
            return bloch_vectors(*self.angles)
        return givens_unitary(self.dim, self.angles)

    def projectors(self) -> list[np.ndarray]:
        v = self.vectors()
        return [np.outer(v[:, k], v[:, k].conj()) for k in range(self.dim)]

    @classmethod
    def computational(cls, subsystem: MeasuredSide, dim: int) -> "MeasurementBasis":
        n = 2 if dim == 2 else dim * (dim - 1)
        return cls(subsystem, dim, (0.0,) * n)

    def canonical(self) -> "MeasurementBasis":
        """Fold qubit angles back into theta in [0, pi], phi in [0, 2 pi)."""
        if self.dim != 2:
            return self
        v0 = self.vectors()[:, 0]
        v0 = v0 * np.exp(-1j * np.angle(v0[0])) if abs(v0[0]) > 0 else v0
        theta = 2 * np.arccos(np.clip(abs(v0[0]), 0.0, 1.0))
        phi = float(np.mod(np.angle(v0[1]), 2 * np.pi)) if abs(v0[1]) > 1e-15 else 0.0
        return MeasurementBasis(self.subsystem, 2, (float(theta), phi))


def _measurement_kernel(t: np.ndarray, side: MeasuredSide) -> np.ndarray:
    """Reshape rho so one matmul maps |v><v| on the measured side to the unmeasured block."""
    if side == "left":
        a, b = t.shape[0], t.shape[1]
        return t.transpose(0, 2, 1, 3).reshape(a * a, b * b)
    a, b = t.shape[0], t.shape[1]
    return t.transpose(1, 3, 0, 2).reshape(b * b, a * a)


def _hermitian_eigvals(blocks: np.ndarray) -> np.ndarray:
    if blocks.shape[-1] == 2:
        a, d = blocks[..., 0, 0].real, blocks[..., 1, 1].real
        r = np.hypot(0.5 * (a - d), np.abs(blocks[..., 0, 1]))
        mid = 0.5 * (a + d)
        return np.stack([mid - r, mid + r], axis=-1)
    return np.linalg.eigvalsh(blocks)


def _batched_conditional_entropy(kernel: np.ndarray, vecs: np.ndarray, tol: Tolerances) -> np.ndarray:
    """sum_k p_k S(rho_{U|k}) for a stack of bases ``vecs[n, :, k]``.

    Works with unnormalized conditional blocks: p S(sigma / p) = -tr(sigma log sigma) + p log p.
    """
    n, m, _ = vecs.shape
    du = int(round(np.sqrt(kernel.shape[1])))
    # outer[n, k, x, y] = conj(v_k[x]) v_k[y] multiplies rho[x ., y .]
    outer = np.einsum("nxk,nyk->nkxy", vecs.conj(), vecs).reshape(n * m, m * m)
    blocks = (outer @ kernel).reshape(n, m, du, du)
    lam = np.clip(_hermitian_eigvals(blocks), 0.0, None)
    p = lam.sum(axis=-1)
    safe_lam = np.where(lam > 0, lam, 1.0)
    safe_p = np.where(p > 0, p, 1.0)
    ent = -np.sum(lam * np.log2(safe_lam), axis=-1) + p * np.log2(safe_p)
    ent = np.where(p > tol.outcome_prob, ent, 0.0)
    return np.maximum(ent, 0.0).sum(axis=-1)


def conditional_entropy(rho: DensityMatrix, basis: MeasurementBasis, tol: Tolerances = DEFAULT.tol) -> float:
    """Average entropy of the unmeasured side after measuring ``basis``, in bits."""
    if basis.dim != _measured_dim(rho, basis.subsystem):
        raise DimensionMismatch(
            f"{basis.subsystem} basis has dim {basis.dim}, state side has dim {_measured_dim(rho, basis.subsystem)}"
        )
    kernel = _measurement_kernel(rho.tensor(), basis.subsystem)
    return float(_batched_conditional_entropy(kernel, basis.vectors()[None], tol)[0])


@dataclass(frozen=True)
class DiscordReport:
    side: MeasuredSide
    discord: float
    mutual_info: float
    classical_correlation: float
    argmin_basis: MeasurementBasis
    optimizer_evals: int
    zero_certified: bool
    commutator_residual: float

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "discord": self.discord,
            "mutual_info": self.mutual_info,
            "classical_correlation": self.classical_correlation,
            "argmin_basis": {
                "subsystem": self.argmin_basis.subsystem,
                "dim": self.argmin_basis.dim,
                "angles": list(self.argmin_basis.angles),
            },
            "optimizer_evals": self.optimizer_evals,
            "zero_certified": self.zero_certified,
            "commutator_residual": self.commutator_residual,
        }


def _grid(m: int, cfg: Config) -> np.ndarray:
    if m == 2:
        n_t, n_p = cfg.optimizer.qubit_grid
        thetas = np.linspace(0.0, np.pi, n_t)
        phis = np.linspace(0.0, 2 * np.pi, n_p, endpoint=False)
        return np.array(list(itertools.product(thetas, phis)))
    n_t, n_p = cfg.optimizer.givens_grid
    thetas = np.linspace(0.0, np.pi / 2, n_t)
    phis = np.linspace(0.0, 2 * np.pi, n_p, endpoint=False)
    per_pair = list(itertools.product(thetas, phis))
    return np.array([sum(c, ()) for c in itertools.product(per_pair, repeat=len(_pairs(m)))])


def _vectors_for(m: int, points: np.ndarray) -> np.ndarray:
    """Stack of measurement bases, vectorized version of ``MeasurementBasis.vectors``."""
    n = len(points)
    if m == 2:
        c, s = np.cos(points[:, 0] / 2), np.sin(points[:, 0] / 2)
        e = np.exp(1j * points[:, 1])
        out = np.empty((n, 2, 2), dtype=np.complex128)
        out[:, 0, 0], out[:, 0, 1] = c, s
        out[:, 1, 0], out[:, 1, 1] = e * s, -e * c
        return out
    u = np.broadcast_to(np.eye(m, dtype=np.complex128), (n, m, m)).copy()
    for q, (i, j) in enumerate(_pairs(m)):
        t, p = points[:, 2 * q], points[:, 2 * q + 1]
        c, s = np.cos(t), np.sin(t)
        g = np.broadcast_to(np.eye(m, dtype=np.complex128), (n, m, m)).copy()
        g[:, i, i], g[:, j, j] = c, c
        g[:, i, j] = -np.exp(-1j * p) * s
        g[:, j, i] = np.exp(1j * p) * s
        u = u @ g
    return u


def _minimize_conditional_entropy(rho: DensityMatrix, side: MeasuredSide, cfg: Config):
    m = _measured_dim(rho, side)
    kernel = _measurement_kernel(rho.tensor(), side)
    tol = cfg.tol
    points = _grid(m, cfg)
    values = np.empty(len(points))
    chunk = 4096
    for start in range(0, len(points), chunk):
        sl = slice(start, start + chunk)
        values[sl] = _batched_conditional_entropy(kernel, _vectors_for(m, points[sl]), tol)
    evals = len(points)

    order = np.lexsort(points.T[::-1])  # lexicographic tie-break before the stable sort by value
    order = order[np.argsort(values[order], kind="stable")]
    seeds = [points[i] for i in order[: cfg.optimizer.seeds]]

    def objective(x):
        return float(_batched_conditional_entropy(kernel, _vectors_for(m, x[None]), tol)[0])

    def polish(x0):
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": cfg.optimizer.xatol,
                "fatol": cfg.optimizer.fatol,
                "maxiter": cfg.optimizer.maxiter,
                "maxfev": cfg.optimizer.maxiter * 2,
                "adaptive": m > 2,
            },
        )
        return float(res.fun), tuple(float(v) for v in res.x), int(res.nfev)

    if cfg.optimizer.workers > 1:
        with ThreadPoolExecutor(cfg.optimizer.workers) as pool:
            results = list(pool.map(polish, seeds))
    else:
        results = [polish(x) for x in seeds]
    results.append((float(values[order[0]]), tuple(float(v) for v in points[order[0]]), 0))
    evals += sum(r[2] for r in results)
    best_val, best_x, _ = min(results, key=lambda r: (r[0], r[1]))
    return best_val, MeasurementBasis(side, m, best_x).canonical(), evals


def discord(rho: DensityMatrix, side: MeasuredSide, cfg: Config = DEFAULT) -> DiscordReport:
    """Discord with the measurement on ``side``; a best-found upper bound.

    Only measured dimensions 2 and 3 are optimized; larger ones raise
    :class:`UnsupportedDimension` (use :func:`zero_discord_certify` instead).
    """
    m = _measured_dim(rho, side)
    if m not in (2, 3):
        raise UnsupportedDimension(f"discord optimization supports a measured side of dim 2 or 3, got {m}")
    tol = cfg.tol
    mi = mutual_information(rho, tol)
    unmeasured = partial_trace(rho, "anc" if side == "left" else "sys")
    s_unmeasured = von_neumann_entropy(unmeasured, tol)
    h_min, basis, evals = _minimize_conditional_entropy(rho, side, cfg)
    classical = s_unmeasured - h_min
    value = mi - classical
    if -tol.discord_clamp <= value < 0.0:
        value = 0.0
    ok, residual = zero_discord_certify(rho, side, tol)
    return DiscordReport(side, float(value), float(mi), float(classical), basis, evals, ok, residual)


@dataclass(frozen=True, eq=False)
class OperatorSchmidtDecomposition:
    """``rho = sum_n c_n S_n (x) F_n`` with Hilbert-Schmidt orthonormal S_n, F_n."""

    coefficients: np.ndarray
    left: np.ndarray  # (n, d_sys, d_sys)
    right: np.ndarray  # (n, d_anc, d_anc)
    rank: int = field(default=0)

    def reconstruct(self, terms: int | None = None) -> np.ndarray:
        n = self.rank if terms is None else terms
        return sum(c * np.kron(s, f) for c, s, f in zip(self.coefficients[:n], self.left[:n], self.right[:n]))


def operator_schmidt(rho: DensityMatrix, tol: Tolerances = DEFAULT.tol) -> OperatorSchmidtDecomposition:
    """SVD of the realigned matrix R[(a a'), (b b')] = rho[(a b), (a' b')]."""
    d_sys, d_anc = rho.dims
    realigned = rho.tensor().transpose(0, 2, 1, 3).reshape(d_sys**2, d_anc**2)
    u, c, vh = np.linalg.svd(realigned)
    n = c.size
    left = u[:, :n].T.reshape(n, d_sys, d_sys)
    right = vh[:n].reshape(n, d_anc, d_anc)
    rank = int(np.count_nonzero(c > tol.schmidt_rank))
    return OperatorSchmidtDecomposition(c, left, right, rank)


def _max_commutator(ops: np.ndarray) -> float:
    worst = 0.0
    for a, b in itertools.combinations(ops, 2):
        worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return worst


def zero_discord_certify(rho: DensityMatrix, side: MeasuredSide, tol: Tolerances = DEFAULT.tol) -> tuple[bool, float]:
    """Zero discord on ``side`` iff that side's Schmidt operators pairwise commute.

    Returns ``(certified, residual)``; residual is the largest commutator entry.
    """
    osd = operator_schmidt(rho, tol)
    if side == "left":
        ops = osd.left[: osd.rank]
    elif side == "right":
        ops = osd.right[: osd.rank]
    else:
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    residual = _max_commutator(ops)
    return residual <= tol.commutator, residual


@dataclass(frozen=True)
class LeftZeroCondition:
    """Closed-form test for zero left discord on the protocol family.

    The equal-success-weight condition only characterizes zero left discord
    for separable protocol states, so both flags are carried and ``holds``
    is their conjunction.
    """

    equal_success_weights: bool
    weights_residual: float
    separable: bool
    separability_residual: float

    @property
    def holds(self) -> bool:
        return self.equal_success_weights and self.separable

    def __bool__(self) -> bool:
        return self.holds


def left_zero_condition_closed_form(ensemble: Ensemble, tol: Tolerances = DEFAULT.tol) -> LeftZeroCondition:
    from .separability import d_state_condition

    weights = ensemble.priors * (1.0 - np.abs(ensemble.alphas) ** 2)
    residual = float(weights.max() - weights.min())
    sep, sep_res = d_state_condition(ensemble, tol)
    return LeftZeroCondition(residual <= tol.condition, residual, sep, sep_res)

