"""BS-side receivers: design matrices, recovery oracles, ambiguity removal."""

import numpy as np
import pytest

from hrislink.bs_rx import (
    ControlLinkPayload,
    bs_bals,
    bs_channel_only,
    bs_kronf,
    channel_code_matrix,
    composite_code_matrix,
    remove_ambiguity_bs,
    symbol_code_matrix,
)
from hrislink.coding import CodingSet, build_coding, gen_symbols
from hrislink.rx_common import (
    BalsOptions,
    EstimateReport,
    IdentifiabilityError,
    RankDeficiencyError,
)
from hrislink.scenario import ScenarioConfig, draw_channels
from hrislink.synthesis import synth_ybs
from hrislink.tensor_ops import vec


def make_case(seed=0, scheme="tstc", **kw):
    base = dict(m=4, n=8, nc=2, l=2, r=2, t=4, k=16, scheme=scheme)
    base.update(kw)
    cfg = ScenarioConfig(**base)
    rng = np.random.default_rng(seed)
    channels = draw_channels(cfg, rng)
    coding = build_coding(cfg)
    symbols = gen_symbols(cfg, rng)
    y = synth_ybs(cfg, channels, coding, symbols)
    return cfg, channels, coding, symbols, y


def nmse(a, b):
    return np.linalg.norm(a - b) ** 2 / np.linalg.norm(b) ** 2


# ------------------------------------------------------------ design matrices

def test_channel_code_matrix_single_subframe():
    cfg, channels, coding, _, _ = make_case()
    single = CodingSet("tstc", coding.sensing[:, :, :1], coding.reflect[:1],
                       coding.code[:, :, :1])
    out = channel_code_matrix(single, channels.ut_ris)
    expected = np.diag(single.reflect[0]) @ channels.ut_ris @ single.code[:, :, 0]
    assert np.allclose(out, expected)


def test_design_matrices_zero_channel():
    cfg, _, coding, _, _ = make_case()
    zero = np.zeros((cfg.n, cfg.l), dtype=complex)
    assert np.all(channel_code_matrix(coding, zero) == 0)
    assert np.all(symbol_code_matrix(coding, zero) == 0)
    assert symbol_code_matrix(coding, zero).shape == (cfg.k * cfg.n, cfg.r)


def test_composite_code_matrix_column_counts():
    cfg_t, _, coding_t, _, _ = make_case()
    assert composite_code_matrix(coding_t).shape == (cfg_t.r * cfg_t.n,
                                                     cfg_t.k * cfg_t.l * cfg_t.n)
    cfg_k, _, coding_k, _, _ = make_case(scheme="krstc")
    assert composite_code_matrix(coding_k).shape == (cfg_k.l * cfg_k.n, cfg_k.k)


# ------------------------------------------------------------------- als path

@pytest.mark.parametrize("scheme", ["tstc", "krstc"])
def test_bals_exact_recovery_with_true_feedback(scheme):
    cfg, channels, coding, symbols, y = make_case(scheme=scheme)
    payload = ControlLinkPayload(channels.ut_ris)
    rep = bs_bals(y, payload, coding)
    assert nmse(rep.channel, channels.ris_bs) < 1e-10
    assert nmse(rep.symbols, symbols) < 1e-10


def test_bals_residual_trace_nonincreasing():
    cfg, channels, coding, symbols, _ = make_case(seed=2)
    rng = np.random.default_rng(5)
    y = synth_ybs(cfg, channels, coding, np.sqrt(cfg.pt_watts) * symbols, rng)
    payload = ControlLinkPayload(channels.ut_ris * np.sqrt(cfg.pt_watts))
    for seed in range(5):
        rep = bs_bals(y, payload, coding, BalsOptions(init_seed=seed))
        trace = rep.residuals
        assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(trace, trace[1:]))


def test_bals_true_init_converges_immediately():
    cfg, channels, coding, symbols, y = make_case(seed=3)
    import hrislink.bs_rx as mod
    original = mod.init_symbols
    mod.init_symbols = lambda rows, cols, seed: symbols.copy()
    try:
        rep = bs_bals(y, ControlLinkPayload(channels.ut_ris), coding)
    finally:
        mod.init_symbols = original
    assert rep.iterations <= 2
    assert nmse(rep.channel, channels.ris_bs) < 1e-10


def test_bals_identifiability_precheck():
    cfg, channels, coding, symbols, y = make_case(t=2, n=8)
    # bs bals needs k >= ceil(n/t) = 4; truncate below that
    short = CodingSet("tstc", coding.sensing[:, :, :3], coding.reflect[:3],
                      coding.code[:, :, :3])
    with pytest.raises(IdentifiabilityError):
        bs_bals(y[:, :, :3], ControlLinkPayload(channels.ut_ris), short)


# ------------------------------------------------------------------ kronf path

def test_kronf_exact_recovery_tstc():
    cfg, channels, coding, symbols, y = make_case(n=4, k=32)  # k >= r*n = 8
    rep = bs_kronf(y, ControlLinkPayload(channels.ut_ris), coding)
    assert nmse(rep.channel, channels.ris_bs) < 1e-10
    assert nmse(rep.symbols, symbols) < 1e-10


def test_kronf_composite_is_kronecker_of_truth():
    cfg, channels, coding, symbols, y = make_case(n=4, k=32)
    from hrislink.tensor_ops import pinv, unfold

    blocks = [np.diag(coding.reflect[k]) @ channels.ut_ris @ coding.mix_matrix(k)
              for k in range(cfg.k)]
    right = np.column_stack([vec(b) for b in blocks])
    z = unfold(y, 3).T @ pinv(right)
    assert np.max(np.abs(z - np.kron(symbols.T, channels.ris_bs))) < 1e-12


def test_kronf_rearrangement_is_rank_one():
    cfg, channels, _, symbols, _ = make_case(n=4, k=32)
    z = np.kron(symbols.T, channels.ris_bs)
    t, m, r, n = cfg.t, cfg.m, cfg.r, cfg.n
    rearranged = z.reshape(t, m, r, n).transpose(3, 1, 2, 0).reshape(n * m, r * t)
    s = np.linalg.svd(rearranged, compute_uv=False)
    assert s[1] / s[0] < 1e-10
    assert np.allclose(rearranged, np.outer(vec(channels.ris_bs), vec(symbols.T)))


def test_kronf_exact_recovery_krstc():
    cfg, channels, coding, symbols, y = make_case(scheme="krstc", n=4, k=16)  # k >= l*n = 8
    rep = bs_kronf(y, ControlLinkPayload(channels.ut_ris), coding)
    assert nmse(rep.channel, channels.ris_bs) < 1e-10


# ----------------------------------------------------------------- h-only path

def test_channel_only_exact_recovery():
    cfg, channels, coding, symbols, y = make_case(k=8)
    payload = ControlLinkPayload(channels.ut_ris, symbols, scenario=2)
    rep = bs_channel_only(y, payload, coding)
    assert nmse(rep.channel, channels.ris_bs) < 1e-10
    assert rep.iterations == 0


def test_channel_only_zero_symbols_rank_deficient():
    cfg, channels, coding, symbols, y = make_case(k=8)
    payload = ControlLinkPayload(channels.ut_ris, np.zeros_like(symbols), scenario=2)
    with pytest.raises(RankDeficiencyError):
        bs_channel_only(y, payload, coding)


def test_channel_only_equals_single_bals_channel_step():
    cfg, channels, coding, symbols, y = make_case(k=8)
    payload = ControlLinkPayload(channels.ut_ris, symbols, scenario=2)
    rep = bs_channel_only(y, payload, coding)
    from hrislink.tensor_ops import pinv, unfold
    blocks = [np.diag(coding.reflect[k]) @ channels.ut_ris @ coding.mix_matrix(k) @ symbols
              for k in range(cfg.k)]
    direct = unfold(y, 1) @ pinv(np.hstack(blocks))
    assert np.allclose(rep.channel, direct)


def test_channel_only_requires_scenario_two():
    cfg, channels, coding, symbols, y = make_case(k=8)
    with pytest.raises(ValueError):
        bs_channel_only(y, ControlLinkPayload(channels.ut_ris), coding)
    with pytest.raises(ValueError):
        ControlLinkPayload(channels.ut_ris, None, scenario=2)


# ------------------------------------------------------------------ ambiguity

def test_remove_ambiguity_anchored_unchanged():
    rng = np.random.default_rng(11)
    h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    x = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    x[0, 0] = 1.0
    rep = remove_ambiguity_bs(EstimateReport(h.copy(), x.copy()))
    assert np.allclose(rep.channel, h) and np.allclose(rep.symbols, x)


def test_remove_ambiguity_constructed_scalar():
    rng = np.random.default_rng(12)
    h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    x = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    x[0, 0] = 1.0
    beta = -0.4 + 2.2j
    rep = remove_ambiguity_bs(EstimateReport(h / beta, beta * x))
    assert np.allclose(rep.channel, h) and np.allclose(rep.symbols, x)


def test_remove_ambiguity_after_kronf_pipeline():
    cfg, channels, coding, symbols, y = make_case(n=4, k=32)
    raw = bs_kronf(y, ControlLinkPayload(channels.ut_ris), coding, remove_scaling=False)
    # the raw estimates carry a mutual scalar; removal must cancel it
    fixed = remove_ambiguity_bs(raw)
    assert nmse(fixed.channel, channels.ris_bs) < 1e-10
    assert nmse(fixed.symbols, symbols) < 1e-10


# ---------------------------------------------------------------- invariants

def test_reconstruction_compensation_before_removal():
    cfg, channels, coding, symbols, y = make_case(n=4, k=32)
    rep = bs_kronf(y, ControlLinkPayload(channels.ut_ris), coding, remove_scaling=False)
    for k in (0, cfg.k - 1):
        recon = (rep.channel @ np.diag(coding.reflect[k]) @ channels.ut_ris
                 @ coding.mix_matrix(k) @ rep.symbols)
        assert np.linalg.norm(recon - y[:, :, k]) < 1e-10 * max(1.0, np.linalg.norm(y[:, :, k]))


def test_scalar_ambiguity_law():
    cfg, channels, coding, symbols, y = make_case(n=4, k=32)
    rep = bs_kronf(y, ControlLinkPayload(channels.ut_ris), coding, remove_scaling=False)
    x_ratio = rep.symbols / symbols
    h_ratio = channels.ris_bs / rep.channel
    assert np.max(np.abs(x_ratio - x_ratio[0, 0])) < 1e-8 * abs(x_ratio[0, 0])
    assert np.max(np.abs(h_ratio - h_ratio[0, 0])) < 1e-8 * abs(h_ratio[0, 0])
    assert abs(x_ratio[0, 0] / h_ratio[0, 0] - 1) < 1e-8


def test_channel_only_invariant_to_bals_options():
    cfg, channels, coding, symbols, y = make_case(k=8)
    payload = ControlLinkPayload(channels.ut_ris, symbols, scenario=2)
    a = bs_channel_only(y, payload, coding)
    b = bs_channel_only(y, payload, coding)
    assert np.array_equal(a.channel, b.channel)
