"""Transmit coding and surface phase-shift construction.

The sensing phase-shift tensor and the reflecting phase-shift matrix are
sampled from a ``k*nc``-dimensional DFT matrix so that all per-sub-frame
slices keep full rank.  Transmit coding truncates a Sylvester Hadamard
matrix: a tensor code of shape ``(l, r, k)`` for the tstc scheme, a ``(k, l)``
code matrix for krstc.  Amplitudes carry the power split: every sensing
entry has magnitude ``sqrt((1-rho)/nc)`` and every reflecting entry
``sqrt(rho)``, so per element the reflected and sensed powers add to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import dft, hadamard

from .scenario import ScenarioConfig


@dataclass(frozen=True)
class CodingSet:
    """Everything the transmitter and surface agree on for one block.

    ``sensing`` has shape ``(nc, n, k)``, ``reflect`` ``(k, n)``.  ``code``
    is the ``(l, r, k)`` mixing tensor for tstc (includes the ``1/sqrt(l)``
    combiner normalization) or the ``(k, l)`` code matrix for krstc.
    """

    scheme: str
    sensing: np.ndarray
    reflect: np.ndarray
    code: np.ndarray

    def mix_matrix(self, k: int) -> np.ndarray:
        """Per-sub-frame transmit mixing matrix: ``(l, r)`` dense or diagonal."""
        if self.scheme == "tstc":
            return self.code[:, :, k]
        return np.diag(self.code[k])

    @property
    def subframes(self) -> int:
        return self.sensing.shape[2]

    @property
    def elements(self) -> int:
        return self.sensing.shape[1]

    @property
    def rf_chains(self) -> int:
        return self.sensing.shape[0]

    @property
    def ut_antennas(self) -> int:
        return self.code.shape[0] if self.scheme == "tstc" else self.code.shape[1]

    @property
    def streams(self) -> int:
        return self.code.shape[1]


def design_phase_shifts(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Build the sensing tensor and reflecting matrix from one DFT matrix.

    Fiber ``(ic, j, :)`` of the sensing tensor is the ``ic``-th length-``k``
    block of DFT column ``j``; reflecting column ``j`` is the first ``k``
    entries of DFT column ``j*nc``.  Needs ``k*nc >= n`` for the sensing
    fibers and ``k >= n`` for the reflecting columns to exist.
    """
    nc, n, k, rho = cfg.nc, cfg.n, cfg.k, cfg.rho
    if k * nc < n:
        raise ValueError(f"phase-shift design needs k*nc >= n, got {k}*{nc} < {n}")
    if k < n:
        raise ValueError(f"reflecting design samples DFT column (n-1)*nc, which needs k >= n; got k={k}, n={n}")
    d = dft(k * nc)
    phi = np.empty((nc, n, k), dtype=complex)
    for ic in range(nc):
        phi[ic] = d[ic * k : (ic + 1) * k, :n].T
    psi = d[:k, np.arange(n) * nc].copy()
    phi *= math.sqrt((1.0 - rho) / nc)
    psi *= math.sqrt(rho)
    return phi, psi


def _hadamard_or_raise(k: int) -> np.ndarray:
    if k < 1 or (k & (k - 1)) != 0:
        raise ValueError(f"Sylvester Hadamard construction needs k to be a power of two, got {k}")
    return hadamard(k).astype(float)


def design_tstc(cfg: ScenarioConfig) -> np.ndarray:
    """Tensor code: slice ``k`` reshapes row ``k`` of a truncated Hadamard matrix.

    The mode-3 unfolding of ``sqrt(l) * code`` equals the first ``r*l``
    columns of the ``k``-dimensional Hadamard matrix.
    """
    l, r, k = cfg.l, cfg.r, cfg.k
    if k < r * l:
        raise ValueError(f"tstc code truncation needs k >= r*l, got {k} < {r * l}")
    had = _hadamard_or_raise(k)
    return had[:, : r * l].reshape(k, r, l).transpose(2, 1, 0) / math.sqrt(l)


def design_krstc(cfg: ScenarioConfig) -> np.ndarray:
    """Code matrix: first ``l`` columns of the ``k``-dimensional Hadamard matrix."""
    l, k = cfg.l, cfg.k
    if k < l:
        raise ValueError(f"krstc code truncation needs k >= l, got {k} < {l}")
    return _hadamard_or_raise(k)[:, :l].copy()


def build_coding(cfg: ScenarioConfig) -> CodingSet:
    """Construct the full coding set for the configured scheme."""
    phi, psi = design_phase_shifts(cfg)
    code = design_tstc(cfg) if cfg.scheme == "tstc" else design_krstc(cfg)
    return CodingSet(scheme=cfg.scheme, sensing=phi, reflect=psi, code=code)


def qam_constellation(order: int) -> np.ndarray:
    """Unit-average-energy square QAM constellation points.

    Points are laid out on the Gray-coded square grid and scaled so the mean
    symbol energy is exactly one.
    """
    side = math.isqrt(order)
    if side * side != order or side < 2:
        raise ValueError(f"order must be a square constellation size, got {order}")
    levels = 2.0 * np.arange(side) - (side - 1)
    points = (levels[:, None] + 1j * levels[None, :]).reshape(-1)
    return points / math.sqrt(2.0 * (order - 1) / 3.0)


def gen_symbols(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw a symbol matrix of i.i.d. uniform QAM entries and impose anchors.

    Anchors overwrite the drawn symbols: entry ``(0, 0)`` is set to 1 for
    tstc; the whole first column is set to ones for krstc.  The anchor
    entries are excluded from error-rate accounting downstream.
    """
    points = qam_constellation(cfg.qam_order)
    rows = cfg.streams
    x = points[rng.integers(0, points.size, size=(rows, cfg.t))]
    if cfg.scheme == "tstc":
        x[0, 0] = 1.0
    else:
        x[:, 0] = 1.0
    return x
