"""Received-signal generation at the surface RF chains and at the BS.

Per sub-frame ``k`` the noiseless slices are

* sensed:    ``phi_k @ G @ mix_k @ X``   -> shape ``(nc, t)``
* reflected: ``H @ diag(psi_k) @ G @ mix_k @ X`` -> shape ``(m, t)``

where ``mix_k`` is the dense tstc mixing matrix or ``diag(lambda_k)`` for
krstc.  Noise is added after the full noiseless synthesis so the noiseless
path doubles as an oracle.  The caller is responsible for scaling the symbol
matrix by the transmit amplitude.
"""

from __future__ import annotations

import numpy as np

from .coding import CodingSet
from .scenario import ChannelRealization, ScenarioConfig, add_noise


def _check_dims(cfg: ScenarioConfig, channels: ChannelRealization, coding: CodingSet, symbols: np.ndarray) -> None:
    if channels.ut_ris.shape != (cfg.n, cfg.l):
        raise ValueError(f"UT-side channel must be {(cfg.n, cfg.l)}, got {channels.ut_ris.shape}")
    if channels.ris_bs.shape != (cfg.m, cfg.n):
        raise ValueError(f"BS-side channel must be {(cfg.m, cfg.n)}, got {channels.ris_bs.shape}")
    if coding.sensing.shape != (cfg.nc, cfg.n, cfg.k):
        raise ValueError(f"sensing tensor must be {(cfg.nc, cfg.n, cfg.k)}, got {coding.sensing.shape}")
    if coding.reflect.shape != (cfg.k, cfg.n):
        raise ValueError(f"reflect matrix must be {(cfg.k, cfg.n)}, got {coding.reflect.shape}")
    if symbols.shape != (cfg.streams, cfg.t):
        raise ValueError(f"symbol matrix must be {(cfg.streams, cfg.t)}, got {symbols.shape}")
    if coding.scheme != cfg.scheme:
        raise ValueError(f"coding built for {coding.scheme!r} but config says {cfg.scheme!r}")


def synth_yrc(
    cfg: ScenarioConfig,
    channels: ChannelRealization,
    coding: CodingSet,
    symbols: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Sensed signal tensor of shape ``(nc, t, k)``; noiseless when ``rng`` is None."""
    _check_dims(cfg, channels, coding, symbols)
    g = channels.ut_ris
    if cfg.scheme == "tstc":
        y = np.einsum("cnk,nl,lrk,rt->ctk", coding.sensing, g, coding.code, symbols)
    else:
        y = np.einsum("cnk,nl,lk,lt->ctk", coding.sensing, g, coding.code.T, symbols)
    if rng is None:
        return y
    return add_noise(y, cfg.noise_watts, rng)


def synth_ybs(
    cfg: ScenarioConfig,
    channels: ChannelRealization,
    coding: CodingSet,
    symbols: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Reflected signal tensor of shape ``(m, t, k)``; noiseless when ``rng`` is None."""
    _check_dims(cfg, channels, coding, symbols)
    g, h = channels.ut_ris, channels.ris_bs
    if cfg.scheme == "tstc":
        y = np.einsum("mn,kn,nl,lrk,rt->mtk", h, coding.reflect, g, coding.code, symbols)
    else:
        y = np.einsum("mn,kn,nl,lk,lt->mtk", h, coding.reflect, g, coding.code.T, symbols)
    if rng is None:
        return y
    return add_noise(y, cfg.noise_watts, rng)
