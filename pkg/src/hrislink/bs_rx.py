"""Semi-blind estimation at the BS, given the fed-back surface estimates.

The BS knows the reflecting phase shifts and the transmit code, and receives
the estimated UT-side channel over the control link (scenario 1) or both
that channel and the decoded symbols (scenario 2).  Receivers:

* :func:`bs_bals`: alternating least-squares over the BS-side channel
  (mode-1 unfolding) and the symbols (transposed mode-2 unfolding);
* :func:`bs_kronf`: one least-squares solve for the Kronecker-structured
  composite of symbols and BS-side channel, then a rank-1 split;
* :func:`bs_channel_only`: the scenario-2 shortcut, a single least-squares
  solve for the BS-side channel with symbols known.

The scaling ambiguity at the BS is a single complex scalar for both coding
schemes; it is removed against the (0, 0) anchor of the symbol estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coding import CodingSet
from .identifiability import table_min_subframes
from .rx_common import (
    BalsOptions,
    EstimateReport,
    IdentifiabilityError,
    anchor_or_raise,
    init_symbols,
    require_full_rank,
)
from .tensor_ops import khatri_rao, pinv, rank1_approx, unfold, unvec, vec


@dataclass(frozen=True)
class ControlLinkPayload:
    """What the surface controller feeds back to the BS.

    ``scenario`` 1 carries only the UT-side channel estimate; scenario 2
    additionally carries the symbol estimate, already anchored.
    """

    ut_channel: np.ndarray
    symbols: np.ndarray | None = None
    scenario: int = 1

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise ValueError(f"scenario must be 1 or 2, got {self.scenario}")
        if self.scenario == 2 and self.symbols is None:
            raise ValueError("scenario 2 requires the symbol estimate in the payload")


def _dims(y_bs: np.ndarray, coding: CodingSet) -> tuple[int, int, int, int, int, int]:
    m, t, k = y_bs.shape
    if coding.subframes != k:
        raise ValueError(f"coding built for k={coding.subframes}, signal has k={k}")
    return m, t, k, coding.elements, coding.ut_antennas, coding.streams


def _check_subframes(receiver: str, scheme: str, k: int, *, nc, l, r, n, t, m) -> None:
    need = table_min_subframes(receiver, "bs", scheme, nc=nc, l=l, r=r, n=n, t=t, m=m)
    if k < need:
        raise IdentifiabilityError(
            f"{receiver} at the BS ({scheme}) needs at least {need} sub-frames, got {k}"
        )


def _reflect_blocks(coding: CodingSet, ut_channel: np.ndarray) -> list[np.ndarray]:
    """Per-sub-frame effective source matrices ``diag(psi_k) @ G @ mix_k``."""
    return [
        coding.reflect[k][:, None] * (ut_channel @ coding.mix_matrix(k))
        for k in range(coding.subframes)
    ]


def channel_code_matrix(coding: CodingSet, ut_channel: np.ndarray) -> np.ndarray:
    """Channel-step regressor blocks, side by side: shape ``(n, k*streams)``."""
    return np.hstack(_reflect_blocks(coding, ut_channel))


def symbol_code_matrix(coding: CodingSet, ut_channel: np.ndarray) -> np.ndarray:
    """Symbol-step regressor blocks, stacked: shape ``(k*n, streams)``."""
    return np.vstack(_reflect_blocks(coding, ut_channel))


def composite_code_matrix(coding: CodingSet) -> np.ndarray:
    """Composite-step regressor.

    tstc: ``kron(mix_k.T, diag(psi_k))`` blocks side by side, shape
    ``(streams*n, k*l*n)``.  krstc: the column-wise Khatri-Rao product of the
    code and reflect matrices (both transposed), shape ``(l*n, k)``.
    """
    if coding.scheme == "tstc":
        return np.hstack([
            np.kron(coding.mix_matrix(k).T, np.diag(coding.reflect[k]))
            for k in range(coding.subframes)
        ])
    return khatri_rao(coding.code.T, coding.reflect.T)


def bs_bals(
    y_bs: np.ndarray,
    payload: ControlLinkPayload,
    coding: CodingSet,
    opts: BalsOptions | None = None,
    remove_scaling: bool = True,
) -> EstimateReport:
    """Alternating least-squares estimation of the BS-side channel and symbols."""
    opts = opts or BalsOptions()
    m, t, k, n, l, streams = _dims(y_bs, coding)
    _check_subframes("bals", coding.scheme, k, nc=coding.rf_chains, l=l, r=streams, n=n, t=t, m=m)

    blocks = _reflect_blocks(coding, payload.ut_channel)
    y1 = unfold(y_bs, 1)                    # (m, k*t)
    y2t = unfold(y_bs, 2).T                 # (k*m, t)
    energy = float(np.vdot(y_bs, y_bs).real)
    floor = 1e-26 * energy

    x_hat = init_symbols(streams, t, opts.init_seed)
    h_hat = np.zeros((m, n), dtype=complex)
    residuals: list[float] = []
    iterations = 0
    for _ in range(opts.max_iterations):
        iterations += 1
        channel_step = np.hstack([block @ x_hat for block in blocks])
        h_hat = y1 @ pinv(channel_step)
        symbol_step = np.vstack([h_hat @ block for block in blocks])
        x_hat = pinv(symbol_step) @ y2t
        resid = float(np.linalg.norm(y2t - symbol_step @ x_hat) ** 2)
        residuals.append(resid)
        if resid <= floor:
            break
        if len(residuals) >= 2:
            prev = residuals[-2]
            if prev > 0 and abs(resid - prev) <= opts.tol * prev:
                break

    report = EstimateReport(h_hat, x_hat, iterations, residuals)
    if remove_scaling:
        report = remove_ambiguity_bs(report)
    return report


def bs_kronf(
    y_bs: np.ndarray,
    payload: ControlLinkPayload,
    coding: CodingSet,
    remove_scaling: bool = True,
) -> EstimateReport:
    """Closed-form estimation via Kronecker factorization of the composite.

    The composite right factor is assembled column by column as
    ``vec(diag(psi_k) @ G @ mix_k)`` (tstc) or as the fed-back channel vector
    scaling the Khatri-Rao composite regressor (krstc).
    """
    m, t, k, n, l, streams = _dims(y_bs, coding)
    _check_subframes("kronf", coding.scheme, k, nc=coding.rf_chains, l=l, r=streams, n=n, t=t, m=m)

    blocks = _reflect_blocks(coding, payload.ut_channel)
    if coding.scheme == "tstc":
        right = np.column_stack([vec(block) for block in blocks])   # (streams*n, k)
    else:
        right = vec(payload.ut_channel)[:, None] * composite_code_matrix(coding)
    require_full_rank(right, streams * n, "composite right factor")
    composite = unfold(y_bs, 3).T @ pinv(right)                     # (t*m, streams*n)
    rearranged = composite.reshape(t, m, streams, n).transpose(3, 1, 2, 0).reshape(n * m, streams * t)
    u, sigma, v = rank1_approx(rearranged)
    h_hat = unvec(math.sqrt(sigma) * u, m, n)
    x_hat = unvec(math.sqrt(sigma) * v.conj(), t, streams).T

    report = EstimateReport(h_hat, x_hat, 0, [])
    if remove_scaling:
        report = remove_ambiguity_bs(report)
    return report


def bs_channel_only(y_bs: np.ndarray, payload: ControlLinkPayload, coding: CodingSet) -> EstimateReport:
    """Single least-squares solve for the BS-side channel (scenario 2).

    Uses the fed-back channel and symbol estimates as-is; any residual
    scaling they carry is inherited, so no anchor normalization is applied.
    """
    if payload.scenario != 2 or payload.symbols is None:
        raise ValueError("the channel-only receiver needs a scenario-2 payload with symbols")
    m, t, k, n, l, streams = _dims(y_bs, coding)
    _check_subframes("h", coding.scheme, k, nc=coding.rf_chains, l=l, r=streams, n=n, t=t, m=m)

    blocks = _reflect_blocks(coding, payload.ut_channel)
    channel_step = np.hstack([block @ payload.symbols for block in blocks])
    require_full_rank(channel_step, n, "channel-step regressor")
    h_hat = unfold(y_bs, 1) @ pinv(channel_step)
    return EstimateReport(h_hat, np.array(payload.symbols, copy=True), 0, [])


def remove_ambiguity_bs(report: EstimateReport) -> EstimateReport:
    """Normalize the BS estimates against the (0, 0) anchor symbol."""
    x, h = report.symbols, report.channel
    scale = float(np.linalg.norm(x)) / math.sqrt(x.size)
    beta = anchor_or_raise(complex(x[0, 0]), scale, "symbol")
    fixed = x / beta
    fixed[0, 0] = 1.0  # anchor is known a priori; avoid the division ulp
    return EstimateReport(h * beta, fixed, report.iterations,
                          report.residuals, ambiguity=beta)
