"""Numerical tolerances and optimizer settings shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    trace: float = 1e-12
    psd: float = 1e-10
    spectrum_input: float = 1e-10
    entropy_clip: float = 1e-12
    outcome_prob: float = 1e-14
    ppt: float = 1e-10
    condition: float = 1e-10
    gram_rank: float = 1e-10
    schmidt_rank: float = 1e-10
    commutator: float = 1e-8
    reconstruction: float = 1e-10
    reconstruction_fail: float = 1e-8
    discord_clamp: float = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    """Grid + local polish settings for the discord minimization.

    ``qubit_grid`` is (polar, azimuthal) points on the Bloch sphere.
    ``givens_grid`` is (angle, phase) points per Givens pair for m = 3.
    """

    qubit_grid: tuple[int, int] = (32, 64)
    givens_grid: tuple[int, int] = (5, 6)
    seeds: int = 5
    xatol: float = 1e-7
    fatol: float = 1e-10
    maxiter: int = 4000
    workers: int = 1


@dataclass(frozen=True)
class Config:
    tol: Tolerances = field(default_factory=Tolerances)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def with_tol(self, **kwargs) -> "Config":
        return replace(self, tol=replace(self.tol, **kwargs))


DEFAULT = Config()
