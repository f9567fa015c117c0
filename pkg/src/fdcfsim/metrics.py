"""Effective-channel caches and SINR / MSE / rate evaluation.

The cache holds every aggregate appearing in the MMSE update and SINR
expressions so that updates and metrics share one set of definitions:

    h_dl[k,i]      sum_b H[b,k]^H w_dl[b,i]                  (N,)
    f_ul[k,u]      F[k,u]^H v_ul[u]                          (N,)
    h_ul[b,j]      H[b,j] v_ul[j]                            (M,)
    hc_dl[b,k]     H[b,k] v_dl[k]                            (M,)
    hc_ul[u,j]     sum_b H[b,j]^H w_ul[b,u]                  (N,)
    f_dl[k,u]      F[k,u] v_dl[k]                            (N,)
    phi_dl[b,c]    sum_i hc_dl[b,i] hc_dl[c,i]^H             (M,M)
    phi_ul[b,c]    sum_j h_ul[b,j] h_ul[c,j]^H               (M,M)
    xi_dl[b,k]     sum_{c != b} phi_dl[b,c] w_dl[c,k]        (M,)
    xi_ul[b,u]     sum_{c != b} phi_ul[b,c] w_ul[c,u]        (M,)
    xi_mat[b]      residual self-interference covariance     (M,M)

Residual self-interference is either explicit (a concrete leakage-estimate
error vector per (b, DL stream)) or statistical (zero mean with aggregate
covariance eps*I per AP).
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class BeamformerSet:
    """Current iterate: DL precoders/combiners and UL precoders/combiners."""

    w_dl: np.ndarray  # (B, K_dl, M)
    v_dl: np.ndarray  # (K_dl, N)
    v_ul: np.ndarray  # (K_ul, N)
    w_ul: np.ndarray  # (B, K_ul, M)

    def copy(self):
        return BeamformerSet(
            self.w_dl.copy(), self.v_dl.copy(), self.v_ul.copy(), self.w_ul.copy()
        )

    def ap_dl_power(self):
        """Per-AP transmit power sum_k ||w_dl[b,k]||^2, shape (B,)."""
        return np.sum(np.abs(self.w_dl) ** 2, axis=(1, 2))

    def ue_ul_power(self):
        """Per-UL-UE transmit power ||v_ul[u]||^2, shape (K_ul,)."""
        return np.sum(np.abs(self.v_ul) ** 2, axis=1)

    def assert_finite(self):
        for name in ("w_dl", "v_dl", "v_ul", "w_ul"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise NonFiniteIterate(f"non-finite entries in {name}")

    def validate(self, cfg, rtol=1e-6):
        self.assert_finite()
        if np.any(self.ap_dl_power() > cfg.rho_ap * (1 + rtol)):
            raise ValueError("AP DL power budget violated")
        if self.v_ul.size and np.any(self.ue_ul_power() > cfg.rho_ue * (1 + rtol)):
            raise ValueError("UE UL power budget violated")


class NonFiniteIterate(RuntimeError):
    """An optimizer iterate diverged to NaN/Inf."""


@dataclass(frozen=True)
class ResidualSI:
    """Residual self-interference model after digital cancellation."""

    mode: str  # "explicit" | "statistical"
    delta: np.ndarray = None  # (B, K_dl, M) leakage-estimate errors
    eps: float = 0.0  # aggregate covariance level (statistical mode)

    @classmethod
    def explicit(cls, delta):
        return cls(mode="explicit", delta=np.asarray(delta))

    @classmethod
    def statistical(cls, eps):
        return cls(mode="statistical", eps=float(eps))

    def xi_matrices(self, b_cnt, m):
        """Per-AP covariance sum over DL streams, (B, M, M) Hermitian PSD."""
        if self.mode == "explicit":
            return np.einsum("bim,bip->bmp", self.delta, self.delta.conj())
        return self.eps * np.broadcast_to(np.eye(m), (b_cnt, m, m)).copy()


@dataclass
class EffectiveChannelCache:
    h_dl: np.ndarray
    f_ul: np.ndarray
    h_ul: np.ndarray
    hc_dl: np.ndarray
    hc_ul: np.ndarray
    f_dl: np.ndarray
    phi_dl: np.ndarray
    phi_ul: np.ndarray
    xi_dl: np.ndarray
    xi_ul: np.ndarray
    xi_mat: np.ndarray


def build_cache(chan, bf, si):
    """Evaluate every cached aggregate for the current beamformers."""
    hd, hu, f = chan.h_dl, chan.h_ul, chan.f
    w_dl, v_dl, v_ul, w_ul = bf.w_dl, bf.v_dl, bf.v_ul, bf.w_ul
    b_cnt, m = chan.h.shape[0], chan.h.shape[2]

    h_dl = np.einsum("bkmn,bim->kin", hd.conj(), w_dl)
    f_ul = np.einsum("kumn,um->kun", f.conj(), v_ul)
    h_ul = np.einsum("bjmn,jn->bjm", hu, v_ul)
    hc_dl = np.einsum("bkmn,kn->bkm", hd, v_dl)
    hc_ul = np.einsum("bjmn,bum->ujn", hu.conj(), w_ul)
    f_dl = np.einsum("kunp,kp->kun", f, v_dl)

    phi_dl = np.einsum("bim,cip->bcmp", hc_dl, hc_dl.conj())
    phi_ul = np.einsum("bjm,cjp->bcmp", h_ul, h_ul.conj())

    xi_dl = np.einsum("bcmp,ckp->bkm", phi_dl, w_dl) - np.einsum(
        "bmp,bkp->bkm", np.einsum("bbmp->bmp", phi_dl), w_dl
    )
    xi_ul = np.einsum("bcmp,cup->bum", phi_ul, w_ul) - np.einsum(
        "bmp,bup->bum", np.einsum("bbmp->bmp", phi_ul), w_ul
    )

    return EffectiveChannelCache(
        h_dl, f_ul, h_ul, hc_dl, hc_ul, f_dl, phi_dl, phi_ul, xi_dl, xi_ul,
        si.xi_matrices(b_cnt, m),
    )


def si_interference_powers(bf, si):
    """Per-UL-UE residual-SI interference power sum_i |sum_b w^H delta_bi|^2."""
    if si.mode == "explicit":
        c = np.einsum("bum,bim->ui", bf.w_ul.conj(), si.delta)
        return np.sum(np.abs(c) ** 2, axis=1)
    return si.eps * np.sum(np.abs(bf.w_ul) ** 2, axis=(0, 2))


def sinr_dl(k, cache, bf, cfg):
    """DL SINR of UE k for the current iterate (linear ratio)."""
    v = bf.v_dl[k]
    vnorm2 = float(np.sum(np.abs(v) ** 2))
    if vnorm2 == 0.0:
        return 0.0
    gains = cache.h_dl[k] @ v.conj()  # (K_dl,), entry i = v^H h_dl[k,i]
    sig = np.abs(gains[k]) ** 2
    intra = float(np.sum(np.abs(gains) ** 2) - np.abs(gains[k]) ** 2)
    cross = float(np.sum(np.abs(cache.f_ul[k] @ v.conj()) ** 2))
    denom = intra + cross + cfg.sigma2_ue * vnorm2
    if denom == 0.0:
        return float(np.inf) if sig > 0 else 0.0
    return float(sig / denom)


def sinr_ul(u, cache, bf, cfg, si):
    """UL SINR of UE u under the given residual-SI model (linear ratio)."""
    w = bf.w_ul[:, u]  # (B, M)
    wnorm2 = float(np.sum(np.abs(w) ** 2))
    if wnorm2 == 0.0:
        return 0.0
    gains = np.einsum("bm,bjm->j", w.conj(), cache.h_ul)  # entry j = sum_b w^H h_ul[b,j]
    sig = np.abs(gains[u]) ** 2
    inter = float(np.sum(np.abs(gains) ** 2) - sig)
    si_pow = float(si_interference_powers(bf, si)[u])
    denom = inter + si_pow + cfg.sigma2_ap * wnorm2
    if denom == 0.0:
        return float(np.inf) if sig > 0 else 0.0
    return float(sig / denom)


def mse_dl(k, cache, bf, cfg):
    """DL mean-square error of UE k (closed form, unit-power symbols)."""
    v = bf.v_dl[k]
    gains = cache.h_dl[k] @ v.conj()
    cross = float(np.sum(np.abs(cache.f_ul[k] @ v.conj()) ** 2))
    return float(
        np.sum(np.abs(gains) ** 2)
        + cross
        + cfg.sigma2_ue * np.sum(np.abs(v) ** 2)
        - 2.0 * gains[k].real
        + 1.0
    )


def mse_ul(u, cache, bf, cfg, si):
    """UL mean-square error of UE u (closed form)."""
    w = bf.w_ul[:, u]
    gains = np.einsum("bm,bjm->j", w.conj(), cache.h_ul)
    si_pow = float(si_interference_powers(bf, si)[u])
    return float(
        np.sum(np.abs(gains) ** 2)
        + si_pow
        + cfg.sigma2_ap * np.sum(np.abs(w) ** 2)
        - 2.0 * gains[u].real
        + 1.0
    )


def sum_mse(cache, bf, cfg, si):
    k_dl, k_ul = bf.v_dl.shape[0], bf.v_ul.shape[0]
    return sum(mse_dl(k, cache, bf, cfg) for k in range(k_dl)) + sum(
        mse_ul(u, cache, bf, cfg, si) for u in range(k_ul)
    )


@dataclass
class IterationMetrics:
    iteration: int
    sinr_dl: np.ndarray
    sinr_ul: np.ndarray
    rate_dl: np.ndarray
    rate_ul: np.ndarray
    sum_rate: float
    sum_sinr: float  # raw-SINR sum, secondary metric
    sum_mse: float
    beta1: float = 1.0
    beta2: float = 1.0
    clip_events: int = 0

    def per_ue_rates(self):
        return self.rate_dl, self.rate_ul


def rates_from_sinr(sinr):
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def sum_rate(metrics):
    """Sum of UL and DL rates (bits/s/Hz) for one IterationMetrics."""
    return float(np.sum(metrics.rate_dl) + np.sum(metrics.rate_ul))


def effective_rate(r, t, r_ibt, r_tot):
    """Rate discounted by training overhead, floored at zero."""
    frac = 1.0 - (t * r_ibt) / r_tot
    return r * frac if frac > 0 else 0.0


def evaluate(chan, bf, cfg, si, iteration, cache=None):
    """Genie evaluation of the iterate on the true channels."""
    if cache is None:
        cache = build_cache(chan, bf, si)
    k_dl, k_ul = cfg.k_dl, cfg.k_ul
    s_dl = np.array([sinr_dl(k, cache, bf, cfg) for k in range(k_dl)])
    s_ul = np.array([sinr_ul(u, cache, bf, cfg, si) for u in range(k_ul)])
    r_dl = rates_from_sinr(s_dl)
    r_ul = rates_from_sinr(s_ul)
    return IterationMetrics(
        iteration=iteration,
        sinr_dl=s_dl,
        sinr_ul=s_ul,
        rate_dl=r_dl,
        rate_ul=r_ul,
        sum_rate=float(np.sum(r_dl) + np.sum(r_ul)),
        sum_sinr=float(np.sum(s_dl) + np.sum(s_ul)),
        sum_mse=sum_mse(cache, bf, cfg, si),
    )
