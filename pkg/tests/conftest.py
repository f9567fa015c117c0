"""Shared helpers: channel builders, independent mini-oracles, metrics."""

import numpy as np
import pytest

from fdcfsim.config import desk_config
from fdcfsim.metrics import BeamformerSet
from fdcfsim.numerics import RngStream, complex_gaussian
from fdcfsim.topology import ChannelRealization, generate_drop


def make_chan(cfg, seed, zero_s=False, zero_f=False):
    chan = generate_drop(cfg, RngStream(seed, 0), RngStream(seed, 1))
    if zero_s or zero_f:
        chan = ChannelRealization(
            chan.h,
            np.zeros_like(chan.f) if zero_f else chan.f,
            np.zeros_like(chan.s) if zero_s else chan.s,
            chan.ap_pos,
            chan.ue_pos,
            chan.k_dl,
        )
    return chan


def chan_from_arrays(h, f, s, k_dl):
    """Hand-built realization (positions are placeholders)."""
    h = np.asarray(h, dtype=np.complex128)
    b = h.shape[0]
    k = h.shape[1]
    return ChannelRealization(
        h,
        np.asarray(f, dtype=np.complex128),
        np.asarray(s, dtype=np.complex128),
        np.zeros((b, 2)),
        np.zeros((k, 2)),
        k_dl,
    )


def random_feasible_bf(cfg, seed, scale=1.0):
    """Random beamformers scaled into the power budgets."""
    rng = RngStream(seed, 7)
    w_dl = complex_gaussian(rng, (cfg.b, cfg.k_dl, cfg.m), 1.0)
    for b in range(cfg.b):
        p = np.sum(np.abs(w_dl[b]) ** 2)
        if p > 0:
            w_dl[b] *= np.sqrt(scale * cfg.rho_ap / p)
    v_dl = complex_gaussian(rng, (cfg.k_dl, cfg.n), 1.0)
    v_ul = complex_gaussian(rng, (cfg.k_ul, cfg.n), 1.0)
    for u in range(cfg.k_ul):
        p = np.sum(np.abs(v_ul[u]) ** 2)
        if p > 0:
            v_ul[u] *= np.sqrt(scale * cfg.rho_ue / p)
    w_ul = complex_gaussian(rng, (cfg.b, cfg.k_ul, cfg.m), 1.0)
    return BeamformerSet(w_dl, v_dl, v_ul, w_ul)


def reldiff(a, b):
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / denom


def angle_deg(a, b):
    """Principal angle between complex vectors, in degrees."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0 if na == nb else 90.0
    c = abs(np.vdot(a, b)) / (na * nb)
    return float(np.degrees(np.arccos(min(1.0, c))))


@pytest.fixture
def desk_cfg():
    return desk_config(seed=3)
