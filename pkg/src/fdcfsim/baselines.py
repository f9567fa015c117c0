"""Comparison schemes: separate UL/DL training, local MMSE, half duplex.

All schemes are evaluated on the same true channel realization; they differ
only in what their training stage can see or exchange.
"""

from dataclasses import replace

import numpy as np

from . import metrics as mt
from .ota import run_ibt
from .topology import ChannelRealization

SCHEME_IDS = ("proposed", "separate_ota", "local_mmse", "half_duplex", "perfect_csi")

# pilot-slot resource cost per training iteration
R_IBT_3SLOT = 3
R_IBT_2SLOT = 2


def r_ibt_for(scheme, tau):
    """Training resources per iteration: 3*tau with the retransmission slot,
    2*tau without it."""
    return (R_IBT_2SLOT if scheme == "local_mmse" else R_IBT_3SLOT) * tau


def run_separate_ota(chan, cfg, controls=None, rng=None):
    """UL and DL trained blind to the UE-to-UE cross links; metrics keep them."""
    _, history = run_ibt(chan, cfg, controls, mode="separate", rng=rng)
    return history


def run_local_mmse(chan, cfg, controls=None, rng=None):
    """No retransmission slot; AP updates drop the inter-AP cross terms."""
    _, history = run_ibt(chan, cfg, controls, mode="local", rng=rng)
    return history


def _half_channel(chan, downlink):
    """Channel view for one orthogonal half: no cross links, no AP coupling."""
    b_cnt, m, n = chan.h.shape[0], chan.h.shape[2], chan.h.shape[3]
    if downlink:
        h = chan.h[:, : chan.k_dl]
        k_dl = chan.k_dl
        ue_pos = chan.ue_pos[: chan.k_dl]
    else:
        h = chan.h[:, chan.k_dl :]
        k_dl = 0
        ue_pos = chan.ue_pos[chan.k_dl :]
    k_ul = h.shape[1] - k_dl
    f = np.zeros((k_dl, k_ul, n, n), dtype=np.complex128)
    s = np.zeros((b_cnt, b_cnt, m, m), dtype=np.complex128)
    return ChannelRealization(h.copy(), f, s, chan.ap_pos, ue_pos.copy(), k_dl)


def run_half_duplex(chan, cfg, controls=None, rng=None):
    """DL-only and UL-only training/serving on orthogonal halves.

    Each half runs the full OTA protocol with the other UE set absent and no
    self-interference; every UE rate carries the 1/2 time-share factor.
    """
    cfg_dl = replace(cfg, k_ul=0)
    cfg_ul = replace(cfg, k_dl=0)
    _, hist_dl = run_ibt(_half_channel(chan, True), cfg_dl, controls, mode="proposed",
                         rng=rng, si_eval="zero")
    _, hist_ul = run_ibt(_half_channel(chan, False), cfg_ul, controls, mode="proposed",
                         rng=rng, si_eval="zero")

    merged = []
    for m_dl, m_ul in zip(hist_dl, hist_ul):
        rate_dl = 0.5 * m_dl.rate_dl
        rate_ul = 0.5 * m_ul.rate_ul
        merged.append(
            mt.IterationMetrics(
                iteration=m_dl.iteration,
                sinr_dl=m_dl.sinr_dl,
                sinr_ul=m_ul.sinr_ul,
                rate_dl=rate_dl,
                rate_ul=rate_ul,
                sum_rate=float(np.sum(rate_dl) + np.sum(rate_ul)),
                sum_sinr=float(np.sum(m_dl.sinr_dl) + np.sum(m_ul.sinr_ul)),
                sum_mse=m_dl.sum_mse + m_ul.sum_mse,
                clip_events=m_dl.clip_events + m_ul.clip_events,
            )
        )
    return merged
