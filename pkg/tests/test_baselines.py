import numpy as np
from dataclasses import replace

from fdcfsim import baselines, ota
from fdcfsim.config import desk_config, noiseless
from fdcfsim.numerics import RngStream

from conftest import make_chan


class TestSeparate:
    def test_coincides_with_proposed_when_no_cross_links(self, desk_cfg):
        chan = make_chan(desk_cfg, 1, zero_f=True)
        _, prop = ota.run_ibt(chan, desk_cfg, mode="proposed", rng=RngStream(1, 2))
        sep = baselines.run_separate_ota(chan, desk_cfg, rng=RngStream(1, 2))
        for a, b in zip(prop, sep):
            assert abs(a.sum_rate - b.sum_rate) <= 1e-8 * max(1.0, a.sum_rate)
            assert abs(a.sum_mse - b.sum_mse) <= 1e-8 * max(1.0, a.sum_mse)

    def test_training_ignores_cross_links_but_metrics_keep_them(self, desk_cfg):
        # strong cross links: the separate scheme must diverge from proposed
        cfg = replace(desk_cfg, ue_isolation_db=0.0)
        chan = make_chan(cfg, 2)
        _, prop = ota.run_ibt(chan, cfg, mode="proposed", rng=RngStream(2, 2))
        sep = baselines.run_separate_ota(chan, cfg, rng=RngStream(2, 2))
        assert abs(prop[-1].sum_rate - sep[-1].sum_rate) > 1e-3

    def test_deterministic(self, desk_cfg):
        chan = make_chan(desk_cfg, 3)
        a = baselines.run_separate_ota(chan, desk_cfg, rng=RngStream(3, 2))
        b = baselines.run_separate_ota(chan, desk_cfg, rng=RngStream(3, 2))
        assert all(x.sum_rate == y.sum_rate for x, y in zip(a, b))


class TestLocal:
    def test_single_ap_equals_proposed(self):
        # empty cross sums; noiseless so the unused slot-3 draws no AWGN
        cfg = noiseless(desk_config(grid_side=1, seed=4))
        chan = make_chan(cfg, 4)
        _, prop = ota.run_ibt(chan, cfg, mode="proposed", rng=RngStream(4, 2))
        loc = baselines.run_local_mmse(chan, cfg, rng=RngStream(4, 2))
        for a, b in zip(prop, loc):
            assert abs(a.sum_rate - b.sum_rate) <= 1e-10 * max(1.0, a.sum_rate)

    def test_resource_accounting(self, desk_cfg):
        assert baselines.r_ibt_for("local_mmse", desk_cfg.tau) == 2 * desk_cfg.tau
        assert baselines.r_ibt_for("proposed", desk_cfg.tau) == 3 * desk_cfg.tau
        assert baselines.r_ibt_for("separate_ota", desk_cfg.tau) == 3 * desk_cfg.tau


class TestHalfDuplex:
    def test_rates_carry_time_share(self, desk_cfg):
        chan = make_chan(desk_cfg, 5)
        history = baselines.run_half_duplex(chan, desk_cfg, rng=RngStream(5, 2))
        last = history[-1]
        assert np.allclose(last.rate_dl, 0.5 * np.log2(1 + last.sinr_dl))
        assert np.allclose(last.rate_ul, 0.5 * np.log2(1 + last.sinr_ul))
        assert len(history) == desk_cfg.iters + 1

    def test_interference_free_dominance(self, desk_cfg):
        # with no cross links, coupling, SI, or noise, full duplex serves the
        # same links all the time; half duplex gets half of each
        cfg = noiseless(desk_cfg, si_eps=0.0, ota_si_proxy=0.0)
        chan = make_chan(cfg, 6, zero_f=True, zero_s=True)
        _, prop = ota.run_ibt(chan, cfg, mode="proposed", rng=RngStream(6, 2))
        hd = baselines.run_half_duplex(chan, cfg, rng=RngStream(6, 2))
        for a, b in zip(prop[1:], hd[1:]):
            assert a.sum_rate >= b.sum_rate - 1e-9

    def test_no_interference_terms_structurally(self, desk_cfg):
        # HD halves run on channels with F = S = 0 and zero residual SI
        chan = make_chan(desk_cfg, 7)
        hd = baselines.run_half_duplex(chan, desk_cfg, rng=RngStream(7, 2))
        # a DL-only noise-limited link cannot exceed the interference-free bound
        assert np.isfinite(hd[-1].sum_rate)
        assert hd[-1].sum_rate > 0
