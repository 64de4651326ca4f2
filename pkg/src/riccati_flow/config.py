"""Dataclass configurations and tolerance bundles."""

from __future__ import annotations

import os
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by structural predicates and eigenvalue classification.

    Attributes
    ----------
    structural_tol : float
        Relative residual bound for structural predicates.
    rank_tol : float
        Singular value cutoff relative to the largest singular value.
    eig_zero_tol, eig_inf_tol : float
        Generalized eigenvalues with ``|alpha/beta|`` below ``eig_zero_tol``
        count as zero, above ``eig_inf_tol`` as infinite.
    """

    structural_tol: float = 1e-8
    rank_tol: float = 1e-10
    eig_zero_tol: float = 1e-8
    eig_inf_tol: float = 1e8

    def __post_init__(self):
        for name in ("structural_tol", "rank_tol", "eig_zero_tol", "eig_inf_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rank_tol > self.structural_tol:
            raise ValueError("rank_tol must not exceed structural_tol")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class ScanConfig:
    """Time grid for singular-time scans and CSV sampling."""

    t0: float = -2.0
    t1: float = 2.0
    grid: int = 2001
    refine_tol: float = 1e-8

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("empty time range")
        if self.grid < 2:
            raise ValueError("grid must have at least two points")


@dataclass(frozen=True)
class SdaConfig:
    """Stopping rule for doubling runs."""

    tol: float = 1e-13
    kmax: int = 60


@dataclass(frozen=True)
class ExampleConfig:
    """Parameters of the long-time periodic-orbit experiments."""

    which: int = 41
    seed: int = 0
    t_max: float = 1000.0
    grid: int = 20001
    rho: float = 0.1
    s_scale: float = 1.0
    extra: dict = field(default_factory=dict)


def thread_count() -> int:
    """Worker cap read from ``RICCATI_FLOW_THREADS`` (default 1)."""
    raw = os.environ.get("RICCATI_FLOW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
