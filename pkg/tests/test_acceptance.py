"""Acceptance gate: every exit criterion at its stated tolerance.

Each test prints one PASS line when its criterion holds. The full-scale
Monte-Carlo experiment is executed once and shared by the criteria that
consume it.
"""

import os
import time
from dataclasses import replace

import numpy as np
import pytest

from fdcfsim import baselines, harness, metrics as mt, ota, perfect_csi as pc
from fdcfsim.config import desk_config, noiseless, paper_config
from fdcfsim.numerics import RngStream, dbm_to_watts
from fdcfsim.perfect_csi import UpdateControls
from conftest import make_chan, random_feasible_bf, reldiff
from test_metrics import mc_oracle

EPS = dbm_to_watts(-95.0)
PAPER_DROPS = 50
PAPER_SCHEMES = ("proposed", "separate_ota", "local_mmse", "half_duplex")


def ideal_cfg(seed, **overrides):
    base = dict(si_eps=EPS, ota_si_proxy=EPS, beta_mode="fixed", beta1=1.0, beta2=1.0,
                power_clip=False, bisect_tol=1e-9)
    base.update(overrides)
    return noiseless(desk_config(seed=seed), **base)


@pytest.fixture(scope="module")
def paper_result(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("paper"))
    spec = harness.ExperimentSpec(
        cfg=paper_config(seed=2024), schemes=PAPER_SCHEMES, drops=PAPER_DROPS, out_dir=out
    )
    t0 = time.time()
    result = harness.run_experiment(spec)
    elapsed = time.time() - t0
    harness.emit_outputs(result, spec)
    return spec, result, elapsed


def test_monotone_descent():
    """Sum MSE non-increasing across all 4x20 block updates, 100 instances."""
    t0 = time.time()
    worst = -np.inf
    for seed in range(100):
        cfg = desk_config(seed=seed, damping_mode="fixed", alpha_fixed=1.0,
                          ap_alpha=1.0, nu_scale=0.0, nu_gram_scale=0.0)
        chan = make_chan(cfg, seed)
        track = []
        _, history = pc.run_alt_opt(chan, cfg, block_mse_out=track)
        seq = np.asarray([history[0].sum_mse] + track)
        assert seq.size == 1 + 4 * 20
        worst = max(worst, float(np.max(np.diff(seq))))
        assert np.all(np.diff(seq) <= 1e-9)
    elapsed = time.time() - t0
    assert elapsed < 30.0
    print(f"\nPASS monotone descent: 100 instances, worst increase {worst:.2e}, {elapsed:.1f}s")


def test_ota_csi_update_equivalence():
    """Each OTA update matches its global-CSI counterpart to 1e-6 relative."""
    worst = 0.0
    for seed in range(20):
        cfg = ideal_cfg(seed)
        chan = make_chan(cfg, seed, zero_s=True)
        bf = random_feasible_bf(cfg, seed)
        controls = UpdateControls.from_config(cfg)
        pilots = ota.build_pilots(cfg)
        rng = RngStream(seed, 50)
        counter = {"events": 0}
        scaling = ota.OtaScaling(1.0, 1.0)
        s1 = ota.slot1(chan, bf, pilots, cfg, rng, counter)
        s2 = ota.slot2(chan, bf, pilots, cfg, scaling, rng, counter)
        s3 = ota.slot3(chan, bf, pilots, cfg, scaling, s1.y_ue, s2.y_ue, rng, counter)
        cache = mt.build_cache(chan, bf, mt.ResidualSI.statistical(cfg.stat_si_eps))
        for k in range(cfg.k_dl):
            worst = max(worst, reldiff(
                ota.update_v_dl_ota(s1.y_ue[k], pilots, k, cfg.ridge_scale),
                pc.update_v_dl(k, cache, cfg)))
        for u in range(cfg.k_ul):
            worst = max(worst, reldiff(
                ota.update_v_ul_ota(s2.y_ue[u], pilots, u, cfg, scaling),
                pc.update_v_ul(u, cache, controls, cfg)))
        for b in range(cfg.b):
            got, _ = ota.update_w_dl_ota(b, s2.y_ap[b], s3.y_ap[b], bf.w_dl[b], pilots, cfg, scaling)
            ref, _ = pc.update_w_dl_ap(b, cache, controls, cfg)
            worst = max(worst, reldiff(got, ref))
            worst = max(worst, reldiff(
                ota.update_w_ul_ota(b, s1.y_ap[b], s3.y_ap[b], bf.w_ul[b], pilots, cfg, controls),
                pc.update_w_ul_ap(b, cache, controls, cfg)))
        assert worst < 1e-6
    print(f"\nPASS OTA-CSI update equivalence: 20 instances, worst rel diff {worst:.2e}")


def test_ota_csi_trajectory_equivalence():
    """20-iteration trajectories match per step to 1e-5 (common-state steps)."""
    worst = 0.0
    for seed in range(20):
        cfg = ideal_cfg(seed)
        chan = make_chan(cfg, seed, zero_s=True)
        one = replace(UpdateControls.from_config(cfg), max_iters=1)
        ref = []
        ota.run_ibt(chan, cfg, mode="proposed", rng=RngStream(seed, 2), iterate_out=ref)
        assert len(ref) == cfg.iters + 1
        for t in range(1, len(ref)):
            c_out, o_out = [], []
            pc.run_alt_opt(chan, cfg, controls=one, schedule="ota",
                           iterate_out=c_out, init_bf=ref[t - 1])
            ota.run_ibt(chan, cfg, controls=one, mode="proposed",
                        rng=RngStream(seed, 9), iterate_out=o_out, init_bf=ref[t - 1])
            a, b = c_out[1], o_out[1]
            step = max(reldiff(a.w_dl, b.w_dl), reldiff(a.v_dl, b.v_dl),
                       reldiff(a.v_ul, b.v_ul), reldiff(a.w_ul, b.w_ul))
            worst = max(worst, step)
            assert step < 1e-5
    print(f"\nPASS OTA-CSI trajectory equivalence: 20 seeds x 20 steps, worst {worst:.2e}")


def test_projection_nulling():
    """Slot-3 retransmissions carry <= 1e-12 energy in the opposing subspace."""
    worst = 0.0
    for seed in range(20):
        cfg = ideal_cfg(seed)
        chan = make_chan(cfg, seed)
        bf = random_feasible_bf(cfg, seed)
        pilots = ota.build_pilots(cfg)
        rng = RngStream(seed, 60)
        counter = {"events": 0}
        scaling = ota.OtaScaling(1.0, 1.0)
        s1 = ota.slot1(chan, bf, pilots, cfg, rng, counter)
        s2 = ota.slot2(chan, bf, pilots, cfg, scaling, rng, counter)
        s3 = ota.slot3(chan, bf, pilots, cfg, scaling, s1.y_ue, s2.y_ue, rng, counter)
        # cross-subspace content, normalized correlation Y Pi / tau
        dl_leak = np.linalg.norm(np.einsum("knt,tu->knu", s3.x_dl, pilots.q.conj())) / cfg.tau
        ul_leak = np.linalg.norm(np.einsum("unt,tk->unk", s3.x_ul, pilots.p.conj())) / cfg.tau
        worst = max(worst, float(dl_leak), float(ul_leak))
        assert dl_leak <= 1e-12 and ul_leak <= 1e-12
    print(f"\nPASS projection nulling: 20 instances, worst opposing-subspace energy {worst:.2e}")


def test_cross_term_reconstruction():
    """Noiseless slot-3 reconstruction of both cross terms to 1e-8."""
    worst = 0.0
    for seed in range(10):
        cfg = ideal_cfg(seed)
        chan = make_chan(cfg, seed, zero_s=True)
        bf = random_feasible_bf(cfg, seed)
        pilots = ota.build_pilots(cfg)
        rng = RngStream(seed, 70)
        counter = {"events": 0}
        scaling = ota.OtaScaling(1.0, 1.0)
        s1 = ota.slot1(chan, bf, pilots, cfg, rng, counter)
        s2 = ota.slot2(chan, bf, pilots, cfg, scaling, rng, counter)
        s3 = ota.slot3(chan, bf, pilots, cfg, scaling, s1.y_ue, s2.y_ue, rng, counter)
        cache = mt.build_cache(chan, bf, mt.ResidualSI.statistical(0.0))
        tau = cfg.tau
        for b in range(cfg.b):
            yp = s2.y_ap[b] @ pilots.p
            gram = yp @ yp.conj().T
            got = (tau * (s3.y_ap[b] @ pilots.p) - gram @ bf.w_dl[b].T).T / tau ** 2
            err = np.linalg.norm(got - cache.xi_dl[b]) / max(1.0, np.linalg.norm(cache.xi_dl[b]))
            worst = max(worst, float(err))
            yq = s1.y_ap[b] @ pilots.q
            gram = yq @ yq.conj().T
            got = (tau * (s3.y_ap[b] @ pilots.q) - gram @ bf.w_ul[b].T).T / tau ** 2
            err = np.linalg.norm(got - cache.xi_ul[b]) / max(1.0, np.linalg.norm(cache.xi_ul[b]))
            worst = max(worst, float(err))
        assert worst <= 1e-8
    print(f"\nPASS cross-term reconstruction: worst rel error {worst:.2e}")


def test_power_feasibility_and_slackness():
    """Iterates and transmit blocks within budget; multipliers slack-consistent."""
    for seed in range(5):
        cfg = desk_config(seed=seed)
        chan = make_chan(cfg, seed)
        iterates = []
        bf, _ = ota.run_ibt(chan, cfg, rng=RngStream(seed, 3), iterate_out=iterates)
        for it_bf in iterates:
            it_bf.validate(cfg, rtol=1e-6)
        # transmit blocks of one full slot cycle at the trained point
        pilots = ota.build_pilots(cfg)
        counter = {"events": 0}
        rng = RngStream(seed, 4)
        s1 = ota.slot1(chan, bf, pilots, cfg, rng, counter)
        proj = np.stack([
            ota.project_pilot_subspace(s1.y_ue[k], pilots.p, cfg.tau) for k in range(cfg.k_dl)
        ])
        scaling = ota.compute_scaling(cfg, bf, proj)
        s2 = ota.slot2(chan, bf, pilots, cfg, scaling, rng, counter)
        s3 = ota.slot3(chan, bf, pilots, cfg, scaling, s1.y_ue, s2.y_ue, rng, counter)
        tau = cfg.tau
        for x, budget in ((s1.x_ap, cfg.rho_ap), (s1.x_ue, cfg.rho_ue),
                          (s2.x_ap, cfg.rho_ap), (s2.x_ue, cfg.rho_ue),
                          (s3.x_dl, cfg.rho_ue), (s3.x_ul, cfg.rho_ue)):
            if x.size:
                powers = np.sum(np.abs(x) ** 2, axis=(1, 2)) / tau
                assert np.all(powers <= budget * (1 + 1e-6))
        # complementary slackness of the DL precoder multiplier
        controls = UpdateControls.from_config(cfg)
        cache = mt.build_cache(chan, bf, mt.ResidualSI.statistical(cfg.stat_si_eps))
        for b in range(cfg.b):
            w, lam = pc.update_w_dl_ap(b, cache, controls, cfg)
            p = float(np.sum(np.abs(w) ** 2))
            if lam == 0.0:
                assert p <= cfg.rho_ap * (1 + 1e-6)
            else:
                assert abs(p - cfg.rho_ap) <= 1e-6 * cfg.rho_ap
    print("\nPASS power feasibility: iterates, slot blocks, and multiplier slackness")


def test_pilot_orthogonality_full_scale():
    cfg = paper_config()
    book = ota.build_pilots(cfg)
    stack = np.hstack([book.p, book.q])
    gram = stack.conj().T @ stack
    err = np.linalg.norm(gram - cfg.tau * np.eye(cfg.k))
    assert err <= 1e-10 * cfg.tau
    print(f"\nPASS pilot orthogonality: tau=32, K=16+16, Gram error {err:.2e}")


def test_sinr_mse_against_monte_carlo():
    """Closed forms within 1% of symbol-level Monte-Carlo at 1e6 draws."""
    worst = 0.0
    for seed in range(5):
        cfg = desk_config(seed=seed)
        chan = make_chan(cfg, seed)
        bf = random_feasible_bf(cfg, seed)
        rng = RngStream(seed, 8)
        from fdcfsim.numerics import complex_gaussian

        si = mt.ResidualSI.explicit(
            complex_gaussian(rng, (cfg.b, cfg.k_dl, cfg.m), cfg.sigma2_ap / cfg.tau)
        )
        cache = mt.build_cache(chan, bf, si)
        sinr_dl_mc, sinr_ul_mc, mse_dl_mc, mse_ul_mc = mc_oracle(
            chan, bf, cfg, si, draws=1_000_000, seed=seed
        )
        for k in range(cfg.k_dl):
            worst = max(worst, abs(mt.sinr_dl(k, cache, bf, cfg) / sinr_dl_mc[k] - 1))
            worst = max(worst, abs(mt.mse_dl(k, cache, bf, cfg) / mse_dl_mc[k] - 1))
        for u in range(cfg.k_ul):
            worst = max(worst, abs(mt.sinr_ul(u, cache, bf, cfg, si) / sinr_ul_mc[u] - 1))
            worst = max(worst, abs(mt.mse_ul(u, cache, bf, cfg, si) / mse_ul_mc[u] - 1))
        assert worst < 0.01
    print(f"\nPASS SINR/MSE Monte-Carlo agreement: 5 instances, worst rel dev {worst:.2%}")


def test_fig1_ordering(paper_result):
    """Mean sum rate at iteration 20: proposed > separate > local, proposed > HD,
    each gap exceeding the standard error of the mean."""
    spec, result, elapsed = paper_result
    t = spec.cfg.iters
    mean = {s: result.mean_sum_rate[s][t] for s in PAPER_SCHEMES}
    sem = {s: result.sem_sum_rate[s][t] for s in PAPER_SCHEMES}
    pairs = [("proposed", "separate_ota"), ("separate_ota", "local_mmse"),
             ("proposed", "half_duplex")]
    for hi, lo in pairs:
        gap = mean[hi] - mean[lo]
        bar = max(sem[hi], sem[lo])
        assert gap > bar, (hi, lo, gap, bar)
    assert elapsed < 1800.0
    summary = ", ".join(f"{s}={mean[s]:.1f}(±{sem[s]:.1f})" for s in PAPER_SCHEMES)
    print(f"\nPASS fig1 ordering at {PAPER_DROPS} drops in {elapsed/60:.1f} min: {summary}")


def test_fig2_effective_rate_dominance(paper_result):
    spec, result, _ = paper_result
    assert spec.r_tot_grid == (1000, 2500, 5000, 7500, 10000)
    for i, r_tot in enumerate(spec.r_tot_grid):
        assert result.eff_rate["proposed"][i] > result.eff_rate["separate_ota"][i]
        assert result.eff_rate["proposed"][i] > result.eff_rate["local_mmse"][i]
    assert baselines.r_ibt_for("proposed", 32) == 96
    assert baselines.r_ibt_for("separate_ota", 32) == 96
    assert baselines.r_ibt_for("local_mmse", 32) == 64
    vals = ", ".join(f"{r}:{result.eff_rate['proposed'][i]:.0f}" for i, r in enumerate(spec.r_tot_grid))
    print(f"\nPASS fig2 dominance on r_tot grid (proposed eff rates {vals})")


def test_effective_rate_arithmetic():
    value = mt.effective_rate(200.0, 20, 96, 10000)
    assert abs(value - 161.6) < 1e-9
    print(f"\nPASS effective-rate arithmetic: R_eff(200, 20, 96, 10000) = {value}")


def test_plot_frontend_renders(tmp_path):
    """[SECONDARY] The figure renderer produces three images from desk-scale
    CSVs and leaves the inputs unchanged. Skipped unless frontend/ is built."""
    import subprocess

    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    cli_js = os.path.join(root, "frontend", "dist", "cli.js")
    if not os.path.exists(cli_js):
        pytest.skip("frontend not built (cd frontend && npm install && npm run build)")
    out = str(tmp_path / "csv")
    spec = harness.ExperimentSpec(cfg=desk_config(seed=6), drops=2, out_dir=out)
    harness.emit_outputs(harness.run_experiment(spec), spec)
    before = {n: open(os.path.join(out, n), "rb").read() for n in os.listdir(out)}
    figs = str(tmp_path / "figs")
    proc = subprocess.run(["node", cli_js, "render", "--in", out, "--out", figs],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    for name in ("fig1.svg", "fig2.svg", "fig3.svg"):
        assert os.path.getsize(os.path.join(figs, name)) > 0
    for name, body in before.items():
        assert open(os.path.join(out, name), "rb").read() == body
    print("\nPASS plot frontend: three SVGs rendered, inputs unchanged")


def test_determinism_across_thread_counts(tmp_path):
    outs = []
    for threads in (1, 2):
        out = str(tmp_path / f"t{threads}")
        spec = harness.ExperimentSpec(cfg=desk_config(seed=9), drops=3, out_dir=out,
                                      threads=threads)
        harness.emit_outputs(harness.run_experiment(spec), spec)
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert names == sorted(os.listdir(outs[1]))
    for name in names:
        a = open(os.path.join(outs[0], name), "rb").read()
        b = open(os.path.join(outs[1], name), "rb").read()
        assert a == b, name
    print(f"\nPASS determinism: {len(names)} files byte-identical for 1 vs 2 workers")
