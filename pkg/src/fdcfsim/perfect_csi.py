"""Alternating sum-MSE minimization with global CSI.

One iteration runs the stages in the slot order of the distributed protocol:
DL combiners, then UL precoders (seeing the fresh DL combiners), then per-AP
DL precoders with a shared per-AP power multiplier, then per-AP UL combiners.
UE-stage updates are mutually decoupled and applied through a damped
best-response step.

schedule="blockwise" (default) sweeps the APs sequentially inside the two
w-stages, so every sub-update is an exact (constrained) minimization given
all-current variables and the sum MSE cannot increase. schedule="ota"
reproduces what the over-the-air protocol computes: APs update
simultaneously from the same received slots, and the UL-combiner stage sees
the UL precoders as they were at slot 1 plus the fresh cross-term bracket;
the trained iterates of run_ibt match this schedule exactly in the
noiseless limit (simultaneous AP updates may transiently raise the MSE).
"""

from dataclasses import dataclass

import numpy as np

from . import metrics as mt
from .numerics import DEFAULT_BISECT_TOL, bisect_power_multiplier, hermitian_solve, shifted_power, shifted_solve

ALPHA_MIN = 0.1


@dataclass(frozen=True)
class UpdateControls:
    nu_scale: float = 1.0
    nu_gram_scale: float = 0.3
    bisect_tol: float = DEFAULT_BISECT_TOL
    damping_mode: str = "adaptive"  # "adaptive" | "fixed"
    alpha_fixed: float = 1.0
    ap_alpha: float = 0.3  # best-response step for the per-AP stages
    max_iters: int = 20

    @classmethod
    def from_config(cls, cfg):
        return cls(
            nu_scale=cfg.nu_scale,
            nu_gram_scale=cfg.nu_gram_scale,
            bisect_tol=cfg.bisect_tol,
            damping_mode=cfg.damping_mode,
            alpha_fixed=cfg.alpha_fixed,
            ap_alpha=cfg.ap_alpha,
            max_iters=cfg.iters,
        )


def init_beamformers(chan, cfg):
    """Deterministic start: matched-filter DL precoders at full budget split
    evenly across streams, unit UL precoders on antenna 1, unit-norm matched
    UL combiners."""
    b_cnt, m, n = cfg.b, cfg.m, cfg.n
    ones = np.ones(n, dtype=np.complex128)

    w_dl = np.zeros((b_cnt, cfg.k_dl, m), dtype=np.complex128)
    scale = np.sqrt(cfg.rho_ap / cfg.k_dl) if cfg.k_dl else 0.0
    for b in range(b_cnt):
        for k in range(cfg.k_dl):
            d = chan.h_dl[b, k] @ ones
            nrm = np.linalg.norm(d)
            if nrm > 0:
                w_dl[b, k] = scale * d / nrm

    w_ul = np.zeros((b_cnt, cfg.k_ul, m), dtype=np.complex128)
    for b in range(b_cnt):
        for u in range(cfg.k_ul):
            d = chan.h_ul[b, u] @ ones
            nrm = np.linalg.norm(d)
            if nrm > 0:
                w_ul[b, u] = d / nrm

    v_dl = np.zeros((cfg.k_dl, n), dtype=np.complex128)
    v_dl[:, 0] = 1.0
    v_ul = np.zeros((cfg.k_ul, n), dtype=np.complex128)
    v_ul[:, 0] = np.sqrt(cfg.rho_ue)
    return mt.BeamformerSet(w_dl, v_dl, v_ul, w_ul)


def update_v_dl(k, cache, cfg):
    """Unconstrained MMSE combiner for DL UE k (other blocks fixed)."""
    gram = (
        cache.h_dl[k].T @ cache.h_dl[k].conj()
        + cache.f_ul[k].T @ cache.f_ul[k].conj()
        + cfg.sigma2_ue * np.eye(cfg.n)
    )
    return hermitian_solve(gram, cache.h_dl[k, k], cfg.ridge_scale)


def update_v_ul(u, cache, controls, cfg):
    """Power-constrained MMSE precoder for UL UE u.

    The Gram couples UE u's channel with every AP combiner set plus the
    leakage it causes into the DL UEs; mu_u >= 0 by bisection keeps
    ||v||^2 <= rho_UE with equality when active.
    """
    t = cache.hc_ul[:, u]  # (K_ul, N); row j = sum_b H[b,u]^H w_ul[b,j]
    gram = t.T @ t.conj() + cache.f_dl[:, u].T @ cache.f_dl[:, u].conj()
    rhs = cache.hc_ul[u, u]
    if not np.any(rhs):
        return np.zeros(cfg.n, dtype=np.complex128)
    mu = bisect_power_multiplier(
        lambda s: shifted_power(gram, rhs, s, cfg.ridge_scale), cfg.rho_ue, controls.bisect_tol
    )
    return shifted_solve(gram, rhs, mu, cfg.ridge_scale)


def update_w_dl_ap(b, cache, controls, cfg):
    """All DL precoders of AP b jointly, with one shared power multiplier.

    Returns (W_b, lambda_b) where W_b is (K_dl, M). lambda_b satisfies
    complementary slackness for sum_k ||w_bk||^2 <= rho_AP.
    """
    phi = cache.phi_dl[b, b]
    rhs = (cache.hc_dl[b] - cache.xi_dl[b]).T  # (M, K_dl)
    if not np.any(rhs):
        return np.zeros((cfg.k_dl, cfg.m), dtype=np.complex128), 0.0
    lam = bisect_power_multiplier(
        lambda s: shifted_power(phi, rhs, s, cfg.ridge_scale), cfg.rho_ap, controls.bisect_tol
    )
    return shifted_solve(phi, rhs, lam, cfg.ridge_scale).T, lam


def w_ul_shift(phi_bb, xi_mat, controls, cfg):
    """Scalar added to the UL-combiner Gram diagonal: AWGN power, the
    SI-covariance tuning term, and a Gram-scaled ridge that keeps the
    simultaneous distributed updates stable."""
    nu_si = controls.nu_scale * float(np.trace(xi_mat).real) / cfg.m
    nu_gram = controls.nu_gram_scale * float(np.trace(phi_bb).real) / cfg.m
    return nu_si + nu_gram + cfg.sigma2_ap


def update_w_ul_ap(b, cache, controls, cfg):
    """All UL combiners of AP b (unconstrained MMSE), (K_ul, M)."""
    xi_mat = cache.xi_mat[b]
    phi_bb = cache.phi_ul[b, b]
    gram = phi_bb + xi_mat + w_ul_shift(phi_bb, xi_mat, controls, cfg) * np.eye(cfg.m)
    rhs = (cache.h_ul[b] - cache.xi_ul[b]).T  # (M, K_ul)
    if not rhs.size:
        return np.zeros((cfg.k_ul, cfg.m), dtype=np.complex128)
    return hermitian_solve(gram, rhs, cfg.ridge_scale).T


def damped_apply(old, candidate, alpha):
    """Best-response step: convex combination of iterate and block minimizer."""
    return (1.0 - alpha) * old + alpha * candidate


def alpha_dl(cache, k, controls):
    """Step size for DL UE k: desired power vs UE-to-UE interference power."""
    if controls.damping_mode == "fixed":
        return controls.alpha_fixed
    p_sig = float(np.sum(np.abs(cache.h_dl[k, k]) ** 2))
    p_x = float(np.sum(np.abs(cache.f_ul[k]) ** 2))
    if p_sig + p_x == 0.0:
        return 1.0
    return float(np.clip(p_sig / (p_sig + p_x), ALPHA_MIN, 1.0))


def alpha_ul(cache, u, controls):
    if controls.damping_mode == "fixed":
        return controls.alpha_fixed
    p_sig = float(np.sum(np.abs(cache.hc_ul[u, u]) ** 2))
    p_x = float(np.sum(np.abs(cache.f_dl[:, u]) ** 2))
    if p_sig + p_x == 0.0:
        return 1.0
    return float(np.clip(p_sig / (p_sig + p_x), ALPHA_MIN, 1.0))


def _w_dl_stage_seidel(cache, bf, controls, cfg):
    """Sequential per-AP DL-precoder sweep; cross terms refreshed between APs.

    phi_dl depends only on the (fixed) DL combiners, so within the stage only
    the xi sums need recomputing as APs commit their updates.
    """
    phi = cache.phi_dl
    w = bf.w_dl
    for b in range(cfg.b):
        full = np.einsum("cmp,ckp->km", phi[b], w)
        xi_b = full - np.einsum("mp,kp->km", phi[b, b], w[b])
        rhs = (cache.hc_dl[b] - xi_b).T
        if not np.any(rhs):
            w[b] = damped_apply(w[b], np.zeros_like(w[b]), controls.ap_alpha)
            continue
        lam = bisect_power_multiplier(
            lambda s: shifted_power(phi[b, b], rhs, s, cfg.ridge_scale),
            cfg.rho_ap,
            controls.bisect_tol,
        )
        cand = shifted_solve(phi[b, b], rhs, lam, cfg.ridge_scale).T
        w[b] = damped_apply(w[b], cand, controls.ap_alpha)


def _w_ul_stage_seidel(cache, bf, controls, cfg):
    """Sequential per-AP UL-combiner sweep with refreshed cross terms."""
    phi = cache.phi_ul
    w = bf.w_ul
    eye = np.eye(cfg.m)
    for b in range(cfg.b):
        full = np.einsum("cmp,cup->um", phi[b], w)
        xi_b = full - np.einsum("mp,up->um", phi[b, b], w[b])
        rhs = (cache.h_ul[b] - xi_b).T
        if not rhs.size:
            continue
        xi_mat = cache.xi_mat[b]
        gram = phi[b, b] + xi_mat + w_ul_shift(phi[b, b], xi_mat, controls, cfg) * eye
        cand = hermitian_solve(gram, rhs, cfg.ridge_scale).T
        w[b] = damped_apply(w[b], cand, controls.ap_alpha)


def _w_ul_stage_ota_vintage(chan, bf, v_ul_old, cache_new, controls, cfg):
    """UL-combiner stage as the OTA protocol computes it.

    Every pilot block feeding this update (slots 1 and 3) carried the UL
    precoders of slot 1, so the stage is the simultaneous per-AP MMSE
    update evaluated at (v_ul_old, w_ul_old).
    """
    h_ul_old = np.einsum("bjmn,jn->bjm", chan.h_ul, v_ul_old)
    phi_old = np.einsum("bjm,cjp->bcmp", h_ul_old, h_ul_old.conj())
    full = np.einsum("bcmp,cup->bum", phi_old, bf.w_ul)
    w_new = np.zeros_like(bf.w_ul)
    for b in range(cfg.b):
        xi_mat = cache_new.xi_mat[b]
        gram = phi_old[b, b] + xi_mat + w_ul_shift(phi_old[b, b], xi_mat, controls, cfg) * np.eye(cfg.m)
        bracket = full[b] - bf.w_ul[b] @ phi_old[b, b].T  # (K_ul, M)
        rhs = (h_ul_old[b] - bracket).T
        if rhs.size:
            cand = hermitian_solve(gram, rhs, cfg.ridge_scale).T
            w_new[b] = damped_apply(bf.w_ul[b], cand, controls.ap_alpha)
    return w_new


def run_alt_opt(chan, cfg, controls=None, si=None, schedule="blockwise", block_mse_out=None,
                iterate_out=None, init_bf=None):
    """Alternating optimization driver; returns (BeamformerSet, [IterationMetrics]).

    Metrics entry 0 is the initialization; entries 1..iters follow each full
    iteration. With block_mse_out a list, the sum MSE after every block stage
    is appended (4 values per iteration) for descent checking; iterate_out
    collects a copy of the beamformer set per iteration. init_bf overrides
    the deterministic initialization (used by step-level comparisons).
    """
    if controls is None:
        controls = UpdateControls.from_config(cfg)
    if si is None:
        si = mt.ResidualSI.statistical(cfg.stat_si_eps)
    if schedule not in ("blockwise", "ota"):
        raise ValueError(f"unknown schedule {schedule!r}")

    bf = init_beamformers(chan, cfg) if init_bf is None else init_bf.copy()
    bf.assert_finite()
    history = [mt.evaluate(chan, bf, cfg, si, iteration=0)]
    if iterate_out is not None:
        iterate_out.append(bf.copy())

    def record_block():
        if block_mse_out is not None:
            cache = mt.build_cache(chan, bf, si)
            block_mse_out.append(mt.sum_mse(cache, bf, cfg, si))

    for it in range(1, controls.max_iters + 1):
        cache = mt.build_cache(chan, bf, si)
        v_ul_slot1 = bf.v_ul.copy()

        # stage 1: DL combiners (mutually decoupled)
        cand = np.stack([update_v_dl(k, cache, cfg) for k in range(cfg.k_dl)]) if cfg.k_dl else bf.v_dl
        for k in range(cfg.k_dl):
            bf.v_dl[k] = damped_apply(bf.v_dl[k], cand[k], alpha_dl(cache, k, controls))
        record_block()

        # stage 2: UL precoders, seeing the fresh DL combiners
        cache = mt.build_cache(chan, bf, si)
        cand = np.stack([update_v_ul(u, cache, controls, cfg) for u in range(cfg.k_ul)]) if cfg.k_ul else bf.v_ul
        for u in range(cfg.k_ul):
            bf.v_ul[u] = damped_apply(bf.v_ul[u], cand[u], alpha_ul(cache, u, controls))
        record_block()

        # stage 3: per-AP DL precoders, shared multiplier per AP
        cache = mt.build_cache(chan, bf, si)
        if schedule == "ota":
            new_w = np.empty_like(bf.w_dl)
            for b in range(cfg.b):
                cand, _ = update_w_dl_ap(b, cache, controls, cfg)
                new_w[b] = damped_apply(bf.w_dl[b], cand, controls.ap_alpha)
            bf.w_dl = new_w
        else:
            _w_dl_stage_seidel(cache, bf, controls, cfg)
        record_block()

        # stage 4: per-AP UL combiners
        cache = mt.build_cache(chan, bf, si)
        if schedule == "ota":
            bf.w_ul = _w_ul_stage_ota_vintage(chan, bf, v_ul_slot1, cache, controls, cfg)
        else:
            _w_ul_stage_seidel(cache, bf, controls, cfg)
        record_block()

        bf.assert_finite()
        history.append(mt.evaluate(chan, bf, cfg, si, iteration=it))
        if iterate_out is not None:
            iterate_out.append(bf.copy())

    return bf, history
