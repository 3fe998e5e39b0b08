"""Shared receiver plumbing: options, reports, and failure modes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IdentifiabilityError(ValueError):
    """The configuration cannot support a unique estimate for this receiver."""


class RankDeficiencyError(RuntimeError):
    """A design/regression matrix lost the rank the estimator relies on."""


class AmbiguityError(RuntimeError):
    """The anchor entry used to fix the scaling ambiguity is (numerically) zero."""


@dataclass(frozen=True)
class BalsOptions:
    """Iteration control for the alternating least-squares receivers.

    Convergence is declared when the relative change of the squared
    reconstruction residual drops below ``tol``.
    """

    max_iterations: int = 200
    tol: float = 1e-6
    init_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class EstimateReport:
    """Output of one receiver run.

    ``channel`` is the matrix estimated at the running entity (UT-side at the
    surface, BS-side at the BS); ``symbols`` the estimated symbol matrix.
    ``iterations`` is 0 for closed-form receivers.  ``residuals`` traces the
    squared Frobenius reconstruction error per iteration.  ``ambiguity``
    records the scaling removed: a complex scalar, or one scalar per stream
    for the krstc surface receivers.
    """

    channel: np.ndarray
    symbols: np.ndarray
    iterations: int = 0
    residuals: list = field(default_factory=list)
    ambiguity: object = None


def init_symbols(rows: int, cols: int, seed: int) -> np.ndarray:
    """Unit-variance circular complex Gaussian start for the ALS iterations."""
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def require_full_rank(mat: np.ndarray, need: int, what: str, tol: float = 1e-10) -> None:
    """Raise :class:`RankDeficiencyError` unless ``mat`` has numerical rank ``need``."""
    s = np.linalg.svd(mat, compute_uv=False)
    rank = 0 if s.size == 0 or s[0] == 0 else int(np.count_nonzero(s > tol * s[0]))
    if rank < need:
        raise RankDeficiencyError(f"{what} has numerical rank {rank}, need {need}")


def anchor_or_raise(value: complex, scale: float, what: str) -> complex:
    """Guard against dividing by a vanishing anchor entry."""
    if not np.isfinite(value) or abs(value) <= 1e-12 * scale:
        raise AmbiguityError(f"{what} anchor is numerically zero ({value!r})")
    return value
