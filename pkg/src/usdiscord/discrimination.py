"""Success probabilities, their optimum over the free amplitude, and Monte Carlo runs.

Only moduli of overlaps and amplitudes enter the probabilities; complex
inputs are accepted and their phases ignored.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal, Sequence

import numpy as np

from .ensembles import Ensemble, ProtocolState, build
from .errors import BadPriors, DimensionMismatch, Infeasible

Region = Literal["interior", "clamped_low", "clamped_high"]

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"


def _priors(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DimensionMismatch("need at least two priors")
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
        raise BadPriors("priors must be positive and sum to 1")
    return p


def success_probability_two(p_plus: float, p_minus: float, alpha_mod: float, alpha_plus_mod: float) -> float:
    """P = 1 - p- |a|^2 / |a+|^2 - p+ |a+|^2, defined for |a| < |a+| <= 1."""
    _priors([p_plus, p_minus])
    a, ap = abs(alpha_mod), abs(alpha_plus_mod)
    if not (a < ap <= 1.0):
        raise Infeasible(f"need |alpha| < |alpha_plus| <= 1, got {a} and {ap}")
    return 1.0 - p_minus * a**2 / ap**2 - p_plus * ap**2


def success_probability_d(priors: Sequence[float], alphas: Sequence[complex]) -> float:
    ens = Ensemble(np.asarray(priors, float), np.asarray(alphas, complex))
    return float(1.0 - np.sum(ens.priors * np.abs(ens.alphas) ** 2))


def _overlap_moduli(priors, overlaps) -> tuple[np.ndarray, np.ndarray]:
    p = _priors(priors)
    q = np.abs(np.asarray(overlaps, dtype=np.complex128))
    if q.shape != (p.size - 1,):
        raise DimensionMismatch(f"need {p.size - 1} overlaps with the first state, got {q.size}")
    if np.any(q > 1.0):
        raise Infeasible("overlap moduli cannot exceed 1")
    return p, q


def success_probability_parameterized(alpha1_mod: float, priors, overlaps, closed: bool = False) -> float:
    """P(|a_1|) = 1 - p_1 |a_1|^2 - sum_j p_j |a_1j|^2 / |a_1|^2.

    The feasible set is ``max_j |a_1j| < |a_1| <= 1``; ``closed=True`` admits
    the lower endpoint.
    """
    p, q = _overlap_moduli(priors, overlaps)
    x = abs(alpha1_mod)
    lo = q.max()
    if x > 1.0 or x < lo or (x == lo and not closed) or x == 0.0:
        raise Infeasible(f"|alpha_1| = {x} outside ({lo}, 1]")
    return float(1.0 - p[0] * x**2 - np.sum(p[1:] * q**2) / x**2)


def alpha_bar(priors, overlaps) -> float:
    """Stationary point ((sum_j p_j |a_1j|^2) / p_1)^(1/4) of the one-variable probability."""
    p, q = _overlap_moduli(priors, overlaps)
    return float((np.sum(p[1:] * q**2) / p[0]) ** 0.25)


@dataclass(frozen=True)
class OptimumReport:
    region: Region
    argmax: float
    p_opt: float
    alpha_bar: float

    def to_dict(self) -> dict:
        return asdict(self)


def optimal_probability(priors, overlaps) -> OptimumReport:
    """Maximize P over |a_1| in [max_j |a_1j|, 1].

    P is concave in |a_1|^2 with its peak at ``alpha_bar**2``, so the optimum
    is the stationary point clamped into the interval. Ties at the interval
    ends resolve to ``interior``.
    """
    p, q = _overlap_moduli(priors, overlaps)
    weighted = float(np.sum(p[1:] * q**2))
    abar = (weighted / p[0]) ** 0.25
    lo = float(q.max())
    if lo <= abar <= 1.0:
        return OptimumReport("interior", abar, 1.0 - 2.0 * np.sqrt(p[0]) * np.sqrt(weighted), abar)
    if abar < lo:
        return OptimumReport("clamped_low", lo, 1.0 - p[0] * lo**2 - weighted / lo**2, abar)
    return OptimumReport("clamped_high", 1.0, 1.0 - p[0] - weighted, abar)


def equal_overlap_optimal(d: int, gamma_mod: float) -> float:
    """Optimum for equal priors 1/d and equal pairwise overlaps |gamma|^2."""
    if d < 2:
        raise DimensionMismatch("d must be at least 2")
    g = abs(gamma_mod)
    if g > 1.0:
        raise Infeasible("|gamma| must not exceed 1")
    if g <= (d - 1) ** -0.25:
        return 1.0 - 2.0 * np.sqrt(d - 1) / d * g**2
    return (d - 1) / d * (1.0 - g**4)


def equal_overlap_region(d: int, gamma_mod: float) -> tuple[Region, float]:
    """(region, optimal |a_1|) for the equal-prior, equal-overlap family."""
    g = abs(gamma_mod)
    abar = (d - 1) ** 0.25 * g
    if abar <= 1.0:
        return "interior", abar
    return "clamped_high", 1.0


@dataclass(frozen=True)
class TrialStats:
    trials: int
    successes: int
    misidentifications_given_success: int
    frequency: float
    stderr: float
    seed: int
    workers: int = 1
    rng: str = RNG_ALGORITHM

    def to_dict(self) -> dict:
        return asdict(self)


def _outcome_tables(state: ProtocolState) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities: ancilla success per input, and system outcome given success."""
    d = state.ensemble.d
    p_success = np.empty(d)
    p_guess = np.empty((d, d))
    e = state.success_basis
    for i, out in enumerate(state.branch_vectors):
        branches = out.reshape(d, 2)
        success_branch = branches[:, 0]
        p_success[i] = float(np.vdot(success_branch, success_branch).real)
        amps = e.conj().T @ success_branch
        probs = np.abs(amps) ** 2
        p_guess[i] = probs / probs.sum()
    return p_success, p_guess


def _simulate(rng: np.random.Generator, n: int, priors, p_success, p_guess) -> tuple[int, int]:
    d = priors.size
    which = rng.choice(d, size=n, p=priors)
    ok = rng.random(n) < p_success[which]
    idx = which[ok]
    cdf = np.cumsum(p_guess, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(idx.size)
    guess = (u[:, None] >= cdf[idx]).sum(axis=1)
    return int(ok.sum()), int(np.count_nonzero(guess != idx))


def run_monte_carlo(state_or_ensemble, trials: int, seed: int, workers: int = 1) -> TrialStats:
    """Sample the protocol trial by trial (vectorized).

    Each trial draws an input by the priors, measures the ancilla in
    {|0>, |1>} with Born probabilities of that input's output state, and on
    outcome 0 measures the system in the discrimination basis. Trials are
    split over ``workers`` streams spawned from ``seed``; with the same
    (seed, workers) the counts are bit-identical.
    """
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    if int(workers) < 1:
        raise ValueError("workers must be >= 1")
    state = state_or_ensemble if isinstance(state_or_ensemble, ProtocolState) else build(state_or_ensemble)
    p_success, p_guess = _outcome_tables(state)
    priors = state.ensemble.priors
    streams = np.random.SeedSequence(int(seed)).spawn(int(workers))
    shares = [trials // workers + (1 if k < trials % workers else 0) for k in range(workers)]
    successes = wrong = 0
    for ss, n in zip(streams, shares):
        # Chunks bound memory at 10^6-scale runs.
        rng = np.random.Generator(np.random.PCG64(ss))
        remaining = n
        while remaining > 0:
            m = min(remaining, 1 << 20)
            s, w = _simulate(rng, m, priors, p_success, p_guess)
            successes += s
            wrong += w
            remaining -= m
    freq = successes / trials
    return TrialStats(
        trials=int(trials),
        successes=successes,
        misidentifications_given_success=wrong,
        frequency=freq,
        stderr=float(np.sqrt(freq * (1 - freq) / trials)),
        seed=int(seed),
        workers=int(workers),
    )
