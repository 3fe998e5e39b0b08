"""Identifiability thresholds, rank bounds, and cost accounting.

``min_subframes`` evaluates, per receiver/entity/scheme, the minimum number
of sub-frames that makes the receiver's least-squares steps uniquely
solvable (under the full-rank coding design).  ``rank_bounds`` checks the
block-rank upper bounds those thresholds rest on against a concrete
realization.  ``flops_estimate`` and ``feedback_bits`` evaluate the
per-receiver cost and control-link load formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coding import CodingSet
from .scenario import ChannelRealization, ScenarioConfig

HRIS_RECEIVERS = {"tstc": ("bals", "kronf"), "krstc": ("bals", "krf")}
BS_RECEIVERS = {"tstc": ("bals", "kronf", "h"), "krstc": ("bals", "kronf", "h")}


@dataclass
class IdentReport:
    """Threshold check for one receiver row (or a receiver pair)."""

    receiver: str
    entity: str
    scheme: str
    min_k: int
    k: int
    satisfied: bool
    rows: list = field(default_factory=list)


def table_min_subframes(receiver: str, entity: str, scheme: str,
                        *, nc: int, l: int, r: int, n: int, t: int,
                        m: int | None = None) -> int:
    """Minimum sub-frame count for one receiver/entity/scheme combination."""
    key = (receiver, entity, scheme)
    if key == ("bals", "hris", "tstc"):
        value = Fraction(max(Fraction(r), Fraction(l * n, t)), nc)
    elif key == ("kronf", "hris", "tstc"):
        value = Fraction(l * r * n, nc)
    elif key == ("bals", "bs", "tstc"):
        if m is None:
            raise ValueError("BS rows need the BS antenna count m")
        value = max(Fraction(r, m), Fraction(n, t))
    elif key == ("kronf", "bs", "tstc"):
        value = Fraction(r * n)
    elif key == ("bals", "hris", "krstc"):
        value = Fraction(max(Fraction(l), Fraction(l * n, t)), nc)
    elif key == ("krf", "hris", "krstc"):
        value = Fraction(l * n, nc)
    elif key == ("bals", "bs", "krstc"):
        if m is None:
            raise ValueError("BS rows need the BS antenna count m")
        value = max(Fraction(l, m), Fraction(n, t))
    elif key == ("kronf", "bs", "krstc"):
        value = Fraction(l * n)
    elif key in (("h", "bs", "tstc"), ("h", "bs", "krstc")):
        value = Fraction(n, t)
    else:
        raise ValueError(f"unknown receiver/entity/scheme combination {key}")
    return math.ceil(value)


def min_subframes(cfg: ScenarioConfig, receiver: str, entity: str, scheme: str | None = None) -> int:
    scheme = scheme or cfg.scheme
    return table_min_subframes(receiver, entity, scheme,
                               nc=cfg.nc, l=cfg.l, r=cfg.r, n=cfg.n, t=cfg.t, m=cfg.m)


def check_identifiability(cfg: ScenarioConfig, pair: tuple[str, str], scheme: str | None = None) -> IdentReport:
    """Check one surface/BS receiver pair; both rows must hold simultaneously."""
    scheme = scheme or cfg.scheme
    hris_rx, bs_rx = pair
    if hris_rx not in HRIS_RECEIVERS[scheme]:
        raise ValueError(f"{hris_rx!r} is not a surface receiver for {scheme}")
    if bs_rx not in BS_RECEIVERS[scheme]:
        raise ValueError(f"{bs_rx!r} is not a BS receiver for {scheme}")
    rows = []
    for receiver, entity in ((hris_rx, "hris"), (bs_rx, "bs")):
        need = min_subframes(cfg, receiver, entity, scheme)
        rows.append(IdentReport(receiver, entity, scheme, need, cfg.k, cfg.k >= need))
    min_k = max(row.min_k for row in rows)
    return IdentReport(f"{hris_rx}-{bs_rx}", "pair", scheme, min_k, cfg.k,
                       cfg.k >= min_k, rows=rows)


def feasible_subframes(cfg: ScenarioConfig, pair: tuple[str, str], scheme: str | None = None) -> int:
    """Smallest power-of-two sub-frame count a pair can actually run with.

    Covers the identifiability rows plus the construction floors of the
    coding design: the reflecting columns need ``k >= n`` and the Hadamard
    truncation needs ``k >= r*l`` (tstc) or ``k >= l`` (krstc).
    """
    scheme = scheme or cfg.scheme
    report = check_identifiability(cfg, pair, scheme)
    code_floor = cfg.r * cfg.l if scheme == "tstc" else cfg.l
    floor = max(report.min_k, cfg.n, code_floor)
    return 1 << max(0, (floor - 1).bit_length())


def numerical_rank(mat: np.ndarray, tol: float = 1e-10) -> int:
    """Count singular values above ``tol * sigma_max``."""
    s = np.linalg.svd(np.atleast_2d(mat), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


@dataclass
class RankReport:
    """Observed block ranks of one realization against their upper bounds."""

    kappa_g: int
    kappa_h: int
    kappa_x: int
    zeta_x: int          # largest rank of a sensed symbol-step block
    zeta_x_bound: int
    xi_x: int            # largest rank of a reflected symbol-step block
    xi_x_bound: int
    xi_h: int            # largest rank of a BS channel-step block
    xi_h_bound: int
    fg_bar_rank: int     # rank of the assembled surface channel-step matrix
    fg_bar_bound: int
    ok: bool


def rank_bounds(cfg: ScenarioConfig, realization: ChannelRealization,
                coding: CodingSet, symbols: np.ndarray,
                scheme: str | None = None, tol: float = 1e-10) -> RankReport:
    """Evaluate the per-block rank bounds on a concrete realization."""
    scheme = scheme or cfg.scheme
    g, h = realization.ut_ris, realization.ris_bs
    x = symbols
    kappa_g = numerical_rank(g, tol)
    kappa_h = numerical_rank(h, tol)
    kappa_x = numerical_rank(x, tol)
    width = cfg.r if scheme == "tstc" else cfg.l

    zeta_blocks, xi_x_blocks, xi_h_blocks, fg_blocks = [], [], [], []
    for k in range(cfg.k):
        phi_k = coding.sensing[:, :, k]
        psi_k = np.diag(coding.reflect[k])
        mix_k = coding.mix_matrix(k)
        zeta_blocks.append(numerical_rank(phi_k @ g @ mix_k, tol))
        xi_x_blocks.append(numerical_rank(h @ psi_k @ g @ mix_k, tol))
        xi_h_blocks.append(numerical_rank(psi_k @ g @ mix_k @ x, tol))
        fg_blocks.append(np.kron((mix_k @ x).T, phi_k))

    zeta_x = max(zeta_blocks)
    xi_x = max(xi_x_blocks)
    xi_h = max(xi_h_blocks)
    fg_bar_rank = numerical_rank(np.vstack(fg_blocks), tol)

    if scheme == "tstc":
        zeta_bound = min(cfg.nc, kappa_g, width)
        xi_x_bound = min(kappa_h, kappa_g, width)
    else:
        zeta_bound = min(cfg.nc, kappa_g)
        xi_x_bound = min(kappa_h, kappa_g)
    xi_h_bound = min(kappa_g, kappa_x)
    fg_bar_bound = min(cfg.k * cfg.nc * kappa_x, cfg.l * cfg.n)

    ok = (
        all(z <= zeta_bound for z in zeta_blocks)
        and all(z <= xi_x_bound for z in xi_x_blocks)
        and all(z <= xi_h_bound for z in xi_h_blocks)
        and fg_bar_rank <= fg_bar_bound
    )
    return RankReport(kappa_g, kappa_h, kappa_x,
                      zeta_x, zeta_bound, xi_x, xi_x_bound, xi_h, xi_h_bound,
                      fg_bar_rank, fg_bar_bound, ok)


def flops_estimate(cfg: ScenarioConfig, receiver: str, entity: str,
                   scheme: str | None = None, iterations: int = 1) -> float:
    """Dominant flop count for one receiver; iterative rows scale with ``iterations``."""
    scheme = scheme or cfg.scheme
    m, n, nc, l, r, t, k = cfg.m, cfg.n, cfg.nc, cfg.l, cfg.r, cfg.t, cfg.k
    key = (receiver, entity, scheme)
    per_iteration = {
        ("bals", "hris", "tstc"): k * nc * (r**2 + l**2 * n**2 * t),
        ("bals", "bs", "tstc"): k * (r**2 * m + n**2 * t),
        ("bals", "hris", "krstc"): l**2 * k * nc * (1 + n**2 * t),
        ("bals", "bs", "krstc"): k * (l**2 * m + n**2 * t),
    }
    single = {
        ("kronf", "hris", "tstc"): l * r * n * (l * r * n * k * nc + t),
        ("kronf", "bs", "tstc"): r * n * (r * n * k + t * m),
        ("krf", "hris", "krstc"): l * n * (l * n * k * nc + t),
        ("kronf", "bs", "krstc"): l * n * (l * n * k + t * m),
        ("h", "bs", "tstc"): k * n**2 * t,
        ("h", "bs", "krstc"): k * n**2 * t,
    }
    if key in per_iteration:
        return float(per_iteration[key] * iterations)
    if key in single:
        return float(single[key])
    raise ValueError(f"unknown receiver/entity/scheme combination {key}")


def feedback_bits(cfg: ScenarioConfig, scenario: int, scheme: str | None = None) -> int:
    """Control-link load in bits for one coherence block.

    Scenario 1 feeds back only the quantized UT-side channel estimate;
    scenario 2 additionally feeds back the decoded data symbols (anchors
    are known and not sent).
    """
    scheme = scheme or cfg.scheme
    if scenario not in (1, 2):
        raise ValueError(f"scenario must be 1 or 2, got {scenario}")
    channel_bits = cfg.l * cfg.n * cfg.eta
    if scenario == 1:
        return channel_bits
    bits_per_symbol = round(math.log2(cfg.qam_order))
    if scheme == "tstc":
        return (cfg.r * cfg.t - 1) * bits_per_symbol + channel_bits
    return cfg.l * (cfg.t - 1) * bits_per_symbol + channel_bits
