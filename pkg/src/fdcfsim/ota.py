"""Distributed beamforming via over-the-air iterative bi-directional training.

Per iteration the protocol runs three pilot slots:

  slot 1  APs send precoded DL pilots while UL UEs send precoded UL pilots;
          DL UEs update their combiners from what they receive, and each AP
          correlates its receive block against the DL pilots to estimate its
          aggregate self-interference leakage per DL stream.
  slot 2  APs send UL-combiner-precoded UL pilots (scaled 1/sqrt(beta1)),
          DL UEs send combiner-precoded DL pilots (scaled 1/sqrt(beta2));
          UL UEs update their precoders from what they receive.
  slot 3  both UE groups retransmit their received blocks after projecting
          onto their own pilot subspace and precoding with v v^H; the
          projection strips the UE-to-UE leakage so each AP can reconstruct
          the inter-AP cross terms it cannot observe locally.

AP-side updates then reproduce the per-AP MMSE solutions from received
blocks only. Receivers know beta1/beta2 and compensate them where the
blocks enter quadratically; with beta=1 this is the identity. Modes:
"proposed" (full protocol), "separate" (training signals synthesized with
the UE-to-UE channels removed), "local" (slot 3 unused, cross terms
dropped).
"""

from dataclasses import dataclass

import numpy as np

from . import metrics as mt
from .config import ConfigError
from .numerics import (
    bisect_power_multiplier,
    complex_gaussian,
    hermitian_solve,
    project_pilot_subspace,
    shifted_power,
    shifted_solve,
)
from .perfect_csi import UpdateControls, alpha_dl, alpha_ul, damped_apply, init_beamformers

MODES = ("proposed", "separate", "local")
POWER_RTOL = 1e-6


@dataclass(frozen=True)
class PilotBook:
    """Orthogonal pilot matrices; [P,Q]^H [P,Q] = tau * I."""

    p: np.ndarray  # (tau, K_dl)
    q: np.ndarray  # (tau, K_ul)

    @property
    def tau(self):
        return self.p.shape[0]


def build_pilots(cfg, rng=None):
    """Pilot columns from the tau-point DFT basis (entries of unit modulus).

    Deterministic; the rng argument is accepted for interface stability but
    unused. First k_dl columns serve the DL UEs, the next k_ul the UL UEs.
    """
    tau = cfg.tau
    if tau < cfg.k_dl + cfg.k_ul:
        raise ConfigError("tau must be >= K_dl+K_ul")
    grid = np.arange(tau)
    dft = np.exp(-2j * np.pi * np.outer(grid, grid) / tau)
    return PilotBook(p=dft[:, : cfg.k_dl].copy(), q=dft[:, cfg.k_dl : cfg.k_dl + cfg.k_ul].copy())


@dataclass
class OtaScaling:
    beta1: float = 1.0
    beta2: float = 1.0


@dataclass
class SlotOne:
    x_ap: np.ndarray  # (B, M, tau)   DL pilot blocks
    x_ue: np.ndarray  # (K_ul, N, tau) UL pilot blocks
    y_ap: np.ndarray  # (B, M, tau)
    y_ue: np.ndarray  # (K_dl, N, tau)


@dataclass
class SlotTwo:
    x_ap: np.ndarray  # (B, M, tau)
    x_ue: np.ndarray  # (K_dl, N, tau)
    y_ap: np.ndarray  # (B, M, tau)
    y_ue: np.ndarray  # (K_ul, N, tau)


@dataclass
class SlotThree:
    x_dl: np.ndarray  # (K_dl, N, tau)
    x_ul: np.ndarray  # (K_ul, N, tau)
    y_ap: np.ndarray  # (B, M, tau)


def _enforce_budget(x, budget, cfg, counter):
    """Scale per-node transmit blocks down to the power budget when clipping
    is enabled; returns the number of clipped nodes."""
    if not x.size:
        return 0
    tau = x.shape[-1]
    power = np.sum(np.abs(x) ** 2, axis=(1, 2)) / tau
    over = power > budget * (1 + POWER_RTOL)
    clipped = int(np.count_nonzero(over))
    if cfg.power_clip and clipped:
        scale = np.sqrt(budget / power[over])
        x[over] *= scale[:, None, None]
        counter["events"] += clipped
    return clipped


def compute_scaling(cfg, bf, proj_dl1=None):
    """Network-wide scalings for the current iteration.

    auto mode: beta1 covers the AP slot-2 blocks (combiner norms), beta2
    covers the UE slot-2 blocks and, when the slot-1 receive blocks are
    already known, the slot-3 DL retransmissions.
    """
    if cfg.beta_mode == "fixed":
        return OtaScaling(cfg.beta1, cfg.beta2)
    need1 = 0.0
    if bf.w_ul.size:
        need1 = float(np.max(np.sum(np.abs(bf.w_ul) ** 2, axis=(1, 2)))) / cfg.rho_ap
    need2 = 0.0
    if bf.v_dl.size:
        vnorm2 = np.sum(np.abs(bf.v_dl) ** 2, axis=1)
        need2 = float(np.max(vnorm2)) / cfg.rho_ue
        if proj_dl1 is not None:
            tau = proj_dl1.shape[-1]
            head = np.abs(np.einsum("kn,knt->kt", bf.v_dl.conj(), proj_dl1)) ** 2
            need3 = vnorm2 * np.sum(head, axis=1) / (tau * cfg.rho_ue)
            need2 = max(need2, float(np.max(need3)) if need3.size else 0.0)
    return OtaScaling(beta1=need1 if need1 > 0 else 1.0, beta2=need2 if need2 > 0 else 1.0)


def slot1(chan, bf, pilots, cfg, rng, counter):
    """First pilot slot: DL pilots from all APs, UL pilots from all UL UEs."""
    x_ap = np.einsum("bkm,tk->bmt", bf.w_dl, pilots.p.conj())
    _enforce_budget(x_ap, cfg.rho_ap, cfg, counter)
    x_ue = np.einsum("um,tu->umt", bf.v_ul, pilots.q.conj())
    _enforce_budget(x_ue, cfg.rho_ue, cfg, counter)
    y_ap = (
        np.einsum("bumn,unt->bmt", chan.h_ul, x_ue)
        + np.einsum("bcmp,cpt->bmt", chan.s, x_ap)
        + complex_gaussian(rng, (cfg.b, cfg.m, cfg.tau), cfg.sigma2_ap)
    )
    y_ue = (
        np.einsum("bkmn,bmt->knt", chan.h_dl.conj(), x_ap)
        + np.einsum("kumn,umt->knt", chan.f.conj(), x_ue)
        + complex_gaussian(rng, (cfg.k_dl, cfg.n, cfg.tau), cfg.sigma2_ue)
    )
    return SlotOne(x_ap, x_ue, y_ap, y_ue)


def slot2(chan, bf, pilots, cfg, scaling, rng, counter):
    """Second pilot slot: combiner-precoded pilots in both directions."""
    x_ap = np.einsum("bum,tu->bmt", bf.w_ul, pilots.q.conj()) / np.sqrt(scaling.beta1)
    _enforce_budget(x_ap, cfg.rho_ap, cfg, counter)
    x_ue = np.einsum("kn,tk->knt", bf.v_dl, pilots.p.conj()) / np.sqrt(scaling.beta2)
    _enforce_budget(x_ue, cfg.rho_ue, cfg, counter)
    y_ap = (
        np.einsum("bkmn,knt->bmt", chan.h_dl, x_ue)
        + np.einsum("bcmp,cpt->bmt", chan.s, x_ap)
        + complex_gaussian(rng, (cfg.b, cfg.m, cfg.tau), cfg.sigma2_ap)
    )
    y_ue = (
        np.einsum("bumn,bmt->unt", chan.h_ul.conj(), x_ap)
        + np.einsum("kunp,kpt->unt", chan.f, x_ue)
        + complex_gaussian(rng, (cfg.k_ul, cfg.n, cfg.tau), cfg.sigma2_ue)
    )
    return SlotTwo(x_ap, x_ue, y_ap, y_ue)


def slot3(chan, bf, pilots, cfg, scaling, y_dl1, y_dl2, rng, counter, v_ul_tx=None):
    """Third slot: projected retransmissions enabling cross-term recovery.

    Each UE precodes with the beamformer that was active when it received
    the block it retransmits: DL UEs use their fresh combiner (updated
    before slot 2), UL UEs the precoder they held during slot 2 (v_ul_tx).
    """
    tau = cfg.tau
    v_ul_tx = bf.v_ul if v_ul_tx is None else v_ul_tx
    x_dl = np.zeros((cfg.k_dl, cfg.n, tau), dtype=np.complex128)
    for k in range(cfg.k_dl):
        proj = project_pilot_subspace(y_dl1[k], pilots.p, tau)
        x_dl[k] = np.outer(bf.v_dl[k], bf.v_dl[k].conj() @ proj) / np.sqrt(scaling.beta2)
    _enforce_budget(x_dl, cfg.rho_ue, cfg, counter)
    x_ul = np.zeros((cfg.k_ul, cfg.n, tau), dtype=np.complex128)
    for u in range(cfg.k_ul):
        proj = project_pilot_subspace(y_dl2[u], pilots.q, tau)
        x_ul[u] = np.sqrt(scaling.beta1) * np.outer(v_ul_tx[u], v_ul_tx[u].conj() @ proj)
    _enforce_budget(x_ul, cfg.rho_ue, cfg, counter)
    y_ap = (
        np.einsum("bkmn,knt->bmt", chan.h_dl, x_dl)
        + np.einsum("bumn,unt->bmt", chan.h_ul, x_ul)
        + complex_gaussian(rng, (cfg.b, cfg.m, cfg.tau), cfg.sigma2_ap)
    )
    return SlotThree(x_dl, x_ul, y_ap)


def update_v_dl_ota(y_dl1_k, pilots, k, ridge_scale=1e-12):
    """DL combiner from the slot-1 receive block: (Y Y^H)^-1 Y p_k."""
    gram = y_dl1_k @ y_dl1_k.conj().T
    return hermitian_solve(gram, y_dl1_k @ pilots.p[:, k], ridge_scale)


def update_v_ul_ota(y_dl2_u, pilots, u, cfg, scaling, tol=None):
    """UL precoder from the slot-2 receive block, power-constrained.

    The beta1 attenuation is undone before forming the Gram; mu_u >= 0 by
    bisection keeps ||v||^2 <= rho_UE (equality when active).
    """
    tau = pilots.tau
    y = np.sqrt(scaling.beta1) * y_dl2_u
    gram = y @ y.conj().T
    rhs = y @ pilots.q[:, u]
    if not np.any(rhs):
        return np.zeros(cfg.n, dtype=np.complex128)
    tol = cfg.bisect_tol if tol is None else tol
    mu = bisect_power_multiplier(
        lambda m_: shifted_power(gram, rhs, tau * m_, cfg.ridge_scale), cfg.rho_ue, tol
    )
    return shifted_solve(gram, rhs, tau * mu, cfg.ridge_scale)


def estimate_si(y_ul1_b, pilots):
    """Leakage estimates g_hat[i] = Y^UL-1 p_i / tau, returned as (M, K_dl)."""
    return y_ul1_b @ pilots.p / pilots.tau


def update_w_dl_ota(b, y_ul2_b, y_ul3_b, w_old_b, pilots, cfg, scaling, include_cross=True, tol=None):
    """DL precoders of AP b from slots 2 and 3.

    Gram and matched term are formed from the beta2-compensated slot-2
    block; the slot-3 bracket subtracts the locally known contribution so
    only the inter-AP cross term remains. The shared multiplier keeps the
    AP power budget with a floor at sigma2_ue (nonnegative regularizer).
    Returns (W_b (K_dl, M), lambda_b).
    """
    tau = cfg.tau
    yp = np.sqrt(scaling.beta2) * (y_ul2_b @ pilots.p)  # (M, K_dl)
    gram = yp @ yp.conj().T
    main = tau * yp
    if include_cross:
        cross = tau * np.sqrt(scaling.beta2) * (y_ul3_b @ pilots.p) - gram @ w_old_b.T
        rhs = main - cross
    else:
        rhs = main
    if not np.any(rhs):
        return np.zeros((cfg.k_dl, cfg.m), dtype=np.complex128), cfg.sigma2_ue
    tol = cfg.bisect_tol if tol is None else tol
    tau2 = float(tau) ** 2
    mu = bisect_power_multiplier(
        lambda m_: shifted_power(gram, rhs, tau2 * m_, cfg.ridge_scale), cfg.rho_ap, tol
    )
    w = shifted_solve(gram, rhs, tau2 * mu, cfg.ridge_scale)
    return w.T, mu + cfg.sigma2_ue


def update_w_ul_ota(b, y_ul1_b, y_ul3_b, w_old_b, pilots, cfg, controls, include_cross=True):
    """UL combiners of AP b from slots 1 and 3; returns (K_ul, M).

    The Gram diagonal is shifted by tau^2 * nu_bar where nu_bar collects the
    AWGN power, the residual-SI variance proxy and its tuning term, and the
    Gram-scaled convergence ridge; every piece is measurable at the AP.
    """
    tau = cfg.tau
    yq = y_ul1_b @ pilots.q  # (M, K_ul)
    gram = yq @ yq.conj().T
    main = tau * yq
    if include_cross:
        cross = tau * (y_ul3_b @ pilots.q) - gram @ w_old_b.T
        rhs = main - cross
    else:
        rhs = main
    if not rhs.size:
        return np.zeros((cfg.k_ul, cfg.m), dtype=np.complex128)
    eps_si = cfg.ota_nu_bar_proxy
    nu_bar = cfg.sigma2_ap + (1.0 + controls.nu_scale) * eps_si
    shift = float(tau) ** 2 * nu_bar + controls.nu_gram_scale * float(np.trace(gram).real) / cfg.m
    if shift > 0:
        return shifted_solve(gram, rhs, shift, cfg.ridge_scale).T
    return hermitian_solve(gram, rhs, cfg.ridge_scale).T


def leakage(chan, w_dl):
    """True aggregate SI leakage per (AP, DL stream): sum_c S[b,c] w_dl[c,i]."""
    return np.einsum("bcmp,cip->bim", chan.s, w_dl)


def dump_slot_signals(path, s1, s2=None, s3=None):
    """Write one iteration's transmit/receive blocks as a text fixture."""
    from .textio import write_blocks

    blocks = {
        "slot1_x_ap": s1.x_ap, "slot1_x_ue": s1.x_ue,
        "slot1_y_ap": s1.y_ap, "slot1_y_ue": s1.y_ue,
    }
    if s2 is not None:
        blocks.update({
            "slot2_x_ap": s2.x_ap, "slot2_x_ue": s2.x_ue,
            "slot2_y_ap": s2.y_ap, "slot2_y_ue": s2.y_ue,
        })
    if s3 is not None:
        blocks.update({"slot3_x_dl": s3.x_dl, "slot3_x_ul": s3.x_ul, "slot3_y_ap": s3.y_ap})
    write_blocks(path, blocks)


def run_ibt(chan, cfg, controls=None, mode="proposed", rng=None, si_eval="explicit",
            iterate_out=None, init_bf=None):
    """Iterative bi-directional training driver.

    Returns (BeamformerSet, [IterationMetrics]); metrics entry 0 is the
    initialization, evaluated with no SI cancellation in place. Training
    signals are synthesized on `chan` (mode "separate" removes the UE-to-UE
    channels from the synthesis); metrics always use the true channels.
    si_eval: "explicit" uses the current leakage-estimate errors, "zero"
    evaluates with no residual SI (half-duplex halves). init_bf overrides
    the deterministic initialization (used by step-level comparisons).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if controls is None:
        controls = UpdateControls.from_config(cfg)
    if rng is None:
        from .numerics import RngStream

        rng = RngStream(cfg.seed, 0)

    pilots = build_pilots(cfg)
    chan_train = chan.with_zero_cross_links() if mode == "separate" else chan
    include_cross = mode != "local"
    si_zero = mt.ResidualSI.statistical(0.0)

    def eval_si():
        # residual after cancellation with a leakage estimate refreshed by the
        # pilot slot that precedes any data transmission: pure pilot-noise
        # correlation, per-entry variance sigma2_ap / tau, independent per
        # (AP, DL stream)
        if si_eval == "zero" or cfg.k_dl == 0:
            return si_zero
        delta = complex_gaussian(rng, (cfg.b, cfg.k_dl, cfg.m), cfg.sigma2_ap / cfg.tau)
        return mt.ResidualSI.explicit(delta)

    bf = init_beamformers(chan_train, cfg) if init_bf is None else init_bf.copy()
    bf.assert_finite()
    history = [mt.evaluate(chan, bf, cfg, eval_si(), iteration=0)]
    if iterate_out is not None:
        iterate_out.append(bf.copy())

    for it in range(1, controls.max_iters + 1):
        counter = {"events": 0}
        cache0 = mt.build_cache(chan_train, bf, si_zero)
        v_ul_slot1 = bf.v_ul.copy()

        s1 = slot1(chan_train, bf, pilots, cfg, rng, counter)

        for k in range(cfg.k_dl):
            cand = update_v_dl_ota(s1.y_ue[k], pilots, k, cfg.ridge_scale)
            bf.v_dl[k] = damped_apply(bf.v_dl[k], cand, alpha_dl(cache0, k, controls))

        proj_dl1 = None
        if cfg.k_dl:
            proj_dl1 = np.stack(
                [project_pilot_subspace(s1.y_ue[k], pilots.p, cfg.tau) for k in range(cfg.k_dl)]
            )
        scaling = compute_scaling(cfg, bf, proj_dl1)

        s2 = slot2(chan_train, bf, pilots, cfg, scaling, rng, counter)

        cache1 = mt.build_cache(chan_train, bf, si_zero)
        for u in range(cfg.k_ul):
            cand = update_v_ul_ota(s2.y_ue[u], pilots, u, cfg, scaling)
            bf.v_ul[u] = damped_apply(bf.v_ul[u], cand, alpha_ul(cache1, u, controls))

        if include_cross:
            s3 = slot3(chan_train, bf, pilots, cfg, scaling, s1.y_ue, s2.y_ue, rng, counter,
                       v_ul_tx=v_ul_slot1)
            y3 = s3.y_ap
        else:
            y3 = np.zeros_like(s1.y_ap)

        new_w_dl = np.empty_like(bf.w_dl)
        for b in range(cfg.b):
            cand, _ = update_w_dl_ota(
                b, s2.y_ap[b], y3[b], bf.w_dl[b], pilots, cfg, scaling, include_cross
            )
            new_w_dl[b] = damped_apply(bf.w_dl[b], cand, controls.ap_alpha)
        bf.w_dl = new_w_dl

        new_w_ul = np.empty_like(bf.w_ul)
        for b in range(cfg.b):
            cand = update_w_ul_ota(
                b, s1.y_ap[b], y3[b], bf.w_ul[b], pilots, cfg, controls, include_cross
            )
            new_w_ul[b] = damped_apply(bf.w_ul[b], cand, controls.ap_alpha)
        bf.w_ul = new_w_ul

        bf.assert_finite()
        entry = mt.evaluate(chan, bf, cfg, eval_si(), iteration=it)
        entry.beta1, entry.beta2 = scaling.beta1, scaling.beta2
        entry.clip_events = counter["events"]
        history.append(entry)
        if iterate_out is not None:
            iterate_out.append(bf.copy())

    return bf, history
