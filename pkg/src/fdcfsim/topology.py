"""AP grid / UE drop generation and per-drop channel realizations.

One drop = one set of UE positions plus i.i.d. Rayleigh channels whose
per-entry variances follow the distance pathloss law. The first k_dl UEs of
a drop are the DL set, the remainder the UL set. Realizations are immutable
after creation (arrays are marked read-only) and carry a content checksum so
the harness can assert they are never mutated by an optimizer run.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .numerics import complex_gaussian, db_to_linear

MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class ChannelRealization:
    """One drop's channels: h (B,K,M,N), f (K_dl,K_ul,N,N), s (B,B,M,M)."""

    h: np.ndarray
    f: np.ndarray
    s: np.ndarray
    ap_pos: np.ndarray
    ue_pos: np.ndarray
    k_dl: int

    def __post_init__(self):
        for arr in (self.h, self.f, self.s, self.ap_pos, self.ue_pos):
            arr.flags.writeable = False

    @property
    def h_dl(self):
        """Channels of the DL UEs, (B, K_dl, M, N)."""
        return self.h[:, : self.k_dl]

    @property
    def h_ul(self):
        """Channels of the UL UEs, (B, K_ul, M, N)."""
        return self.h[:, self.k_dl :]

    def checksum(self):
        dig = hashlib.blake2b(digest_size=16)
        for arr in (self.h, self.f, self.s, self.ap_pos, self.ue_pos):
            dig.update(np.ascontiguousarray(arr).tobytes())
        return dig.hexdigest()

    def with_zero_cross_links(self):
        """Copy with the UE-to-UE channels removed (separate-training view)."""
        return ChannelRealization(
            self.h, np.zeros_like(self.f), self.s, self.ap_pos, self.ue_pos, self.k_dl
        )


def generate_topology(cfg, rng):
    """AP grid positions and uniform UE drop, both centered on the origin.

    APs sit on a grid_side x grid_side lattice with spacing isd; UEs are
    i.i.d. uniform over the square of side grid_side*isd covering the grid.
    """
    side = cfg.grid_side * cfg.isd
    line = (np.arange(cfg.grid_side) - (cfg.grid_side - 1) / 2.0) * cfg.isd
    gx, gy = np.meshgrid(line, line, indexing="ij")
    ap_pos = np.column_stack([gx.ravel(), gy.ravel()])
    ue_pos = rng.gen.uniform(-side / 2.0, side / 2.0, size=(cfg.k, 2))
    return ap_pos, ue_pos


def pathloss_linear(d, cfg):
    """Distance (m) to linear power gain; distances are clamped to 1 m."""
    d = np.maximum(d, MIN_DISTANCE_M)
    return db_to_linear(cfg.pathloss_const_db - cfg.pathloss_exp * np.log10(d))


def _pairwise_dist(a, b):
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def draw_channels(cfg, ap_pos, ue_pos, rng):
    """Draw one ChannelRealization for the given positions.

    h[b,k] ~ CN(0, delta_bk I); f[k,u] like h but from UE-UE distance with
    the extra UE isolation offset; s off-diagonal from AP-AP distance and
    s[b,b] (residual self-interference after analog cancellation) at the
    flat attenuation level with no geometric term.
    """
    b_cnt, m, n = cfg.b, cfg.m, cfg.n
    k_dl, k_ul = cfg.k_dl, cfg.k_ul

    var_h = pathloss_linear(_pairwise_dist(ap_pos, ue_pos), cfg)
    h = complex_gaussian(rng, (b_cnt, cfg.k, m, n), 1.0) * np.sqrt(var_h)[:, :, None, None]

    d_ue = _pairwise_dist(ue_pos[:k_dl], ue_pos[k_dl:])
    var_f = pathloss_linear(d_ue, cfg) * db_to_linear(cfg.ue_isolation_db)
    f = complex_gaussian(rng, (k_dl, k_ul, n, n), 1.0) * np.sqrt(var_f)[:, :, None, None]

    var_s = pathloss_linear(_pairwise_dist(ap_pos, ap_pos), cfg)
    np.fill_diagonal(var_s, db_to_linear(cfg.si_attenuation_db))
    s = complex_gaussian(rng, (b_cnt, b_cnt, m, m), 1.0) * np.sqrt(var_s)[:, :, None, None]

    return ChannelRealization(h, f, s, np.asarray(ap_pos, float), np.asarray(ue_pos, float), k_dl)


def generate_drop(cfg, topo_rng, chan_rng):
    ap_pos, ue_pos = generate_topology(cfg, topo_rng)
    return draw_channels(cfg, ap_pos, ue_pos, chan_rng)
