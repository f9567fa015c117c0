"""Monte-Carlo orchestration: drops x schemes, aggregation, file emission.

Every scheme inside a drop consumes the identical ChannelRealization; all
randomness is keyed by (seed, drop, purpose) so results are byte-identical
regardless of worker count. Failed drops are excluded and reported.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, metrics as mt, perfect_csi
from .config import ConfigError, NetworkConfig, network_config_from_dict
from .numerics import RngStream
from .ota import run_ibt
from .topology import generate_drop

# rng purposes within a drop
_PURPOSE_TOPOLOGY = 0
_PURPOSE_CHANNELS = 1
_PURPOSE_SCHEME = {
    "proposed": 2,
    "separate_ota": 3,
    "local_mmse": 4,
    "half_duplex": 5,
    "perfect_csi": 6,
}
_STREAMS_PER_DROP = 8

DEFAULT_SCHEMES = ("proposed", "separate_ota", "local_mmse", "half_duplex")
DEFAULT_R_TOT_GRID = (1000, 2500, 5000, 7500, 10000)

_FIG1_COLUMNS = {
    "proposed": "Proposed",
    "separate_ota": "Seperate",  # matches the reference data files' spelling
    "local_mmse": "Local",
    "half_duplex": "HD",
    "perfect_csi": "PerfectCSI",
}


@dataclass
class ExperimentSpec:
    cfg: NetworkConfig = field(default_factory=NetworkConfig)
    schemes: tuple = DEFAULT_SCHEMES
    drops: int = 100
    r_tot_grid: tuple = DEFAULT_R_TOT_GRID
    out_dir: str = "out"
    emit_per_ue: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.drops < 1:
            raise ConfigError("drops must be >= 1")
        unknown = [s for s in self.schemes if s not in baselines.SCHEME_IDS]
        if unknown:
            raise ConfigError(f"unknown scheme(s): {', '.join(unknown)}")
        if any(r <= 0 for r in self.r_tot_grid):
            raise ConfigError("r_tot_grid entries must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


@dataclass
class DropResult:
    drop: int
    checksum: str
    sum_rate: dict  # scheme -> (iters+1,) array
    final_rates: dict  # scheme -> {"dl": array, "ul": array}
    clip_events: dict  # scheme -> int
    error: str = None


@dataclass
class AggregateResult:
    mean_sum_rate: dict  # scheme -> (iters+1,) array over iterations 0..iters
    sem_sum_rate: dict  # standard error of the mean at each iteration
    eff_rate: dict  # scheme -> list aligned with r_tot_grid
    per_ue_rates: dict  # scheme -> {"dl": sorted array, "ul": sorted array}
    checksums: dict  # scheme -> per-drop channel checksums
    failures: list
    drops_used: int


def _drop_rng(seed, drop, purpose):
    return RngStream(seed, drop * _STREAMS_PER_DROP + purpose)


def run_drop(spec, drop):
    """Run every scheme of one drop on a single shared realization."""
    cfg = spec.cfg
    chan = generate_drop(
        cfg,
        _drop_rng(cfg.seed, drop, _PURPOSE_TOPOLOGY),
        _drop_rng(cfg.seed, drop, _PURPOSE_CHANNELS),
    )
    checksum = chan.checksum()
    sum_rate, final_rates, clips = {}, {}, {}
    for scheme in spec.schemes:
        rng = _drop_rng(cfg.seed, drop, _PURPOSE_SCHEME[scheme])
        if scheme == "proposed":
            _, history = run_ibt(chan, cfg, mode="proposed", rng=rng)
        elif scheme == "separate_ota":
            history = baselines.run_separate_ota(chan, cfg, rng=rng)
        elif scheme == "local_mmse":
            history = baselines.run_local_mmse(chan, cfg, rng=rng)
        elif scheme == "half_duplex":
            history = baselines.run_half_duplex(chan, cfg, rng=rng)
        else:  # perfect_csi
            _, history = perfect_csi.run_alt_opt(chan, cfg)
        if chan.checksum() != checksum:
            raise RuntimeError(f"channel realization mutated by scheme {scheme}")
        sum_rate[scheme] = np.array([m.sum_rate for m in history])
        final_rates[scheme] = {"dl": history[-1].rate_dl.copy(), "ul": history[-1].rate_ul.copy()}
        clips[scheme] = int(sum(m.clip_events for m in history))
    return DropResult(drop, checksum, sum_rate, final_rates, clips)


def _run_drop_safe(spec, drop):
    try:
        return run_drop(spec, drop)
    except Exception as exc:  # drop-failure policy: exclude and report
        return DropResult(drop, "", {}, {}, {}, error=f"{type(exc).__name__}: {exc}")


def run_experiment(spec):
    """Execute all drops and aggregate; deterministic in spec.cfg.seed."""
    threads = spec.threads
    env = os.environ.get("FDCF_THREADS")
    if env:
        threads = max(1, int(env))
    drops = list(range(spec.drops))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_drop_safe, [spec] * len(drops), drops))
    else:
        results = [_run_drop_safe(spec, d) for d in drops]

    ok = [r for r in results if r.error is None]
    failures = [{"drop": r.drop, "error": r.error} for r in results if r.error is not None]
    if not ok:
        raise RuntimeError("every drop failed; first error: " + failures[0]["error"])

    iters = spec.cfg.iters
    mean_sum_rate, sem_sum_rate, eff_rate, per_ue, checksums = {}, {}, {}, {}, {}
    for scheme in spec.schemes:
        curves = np.stack([r.sum_rate[scheme] for r in ok])  # (drops, iters+1)
        mean = curves.mean(axis=0)
        sem = curves.std(axis=0, ddof=1) / np.sqrt(len(ok)) if len(ok) > 1 else np.zeros(iters + 1)
        mean_sum_rate[scheme] = mean
        sem_sum_rate[scheme] = sem
        r_ibt = baselines.r_ibt_for(scheme, spec.cfg.tau)
        eff_rate[scheme] = [
            max(mt.effective_rate(mean[t], t, r_ibt, r_tot) for t in range(iters + 1))
            for r_tot in spec.r_tot_grid
        ]
        per_ue[scheme] = {
            side: np.sort(np.concatenate([r.final_rates[scheme][side] for r in ok]))
            for side in ("dl", "ul")
        }
        checksums[scheme] = [r.checksum for r in ok]
    return AggregateResult(
        mean_sum_rate, sem_sum_rate, eff_rate, per_ue, checksums, failures, len(ok)
    )


def _fmt(x):
    return f"{x:.10g}"


def emit_outputs(result, spec):
    """Write fig1.csv, fig2.csv, fig3_*.csv and run_meta.json; returns paths."""
    os.makedirs(spec.out_dir, exist_ok=True)
    paths = []

    fig1 = os.path.join(spec.out_dir, "fig1.csv")
    schemes = [s for s in spec.schemes]
    with open(fig1, "w") as fh:
        fh.write("Itr," + ",".join(_FIG1_COLUMNS[s] for s in schemes) + "\n")
        for t in range(1, spec.cfg.iters + 1):
            row = [str(t)] + [_fmt(result.mean_sum_rate[s][t]) for s in schemes]
            fh.write(",".join(row) + "\n")
    paths.append(fig1)

    fig2 = os.path.join(spec.out_dir, "fig2.csv")
    fig2_schemes = [s for s in schemes if s in ("proposed", "separate_ota", "local_mmse")]
    with open(fig2, "w") as fh:
        fh.write("Res," + ",".join(_FIG1_COLUMNS[s] for s in fig2_schemes) + "\n")
        for i, r_tot in enumerate(spec.r_tot_grid):
            row = [str(r_tot)] + [_fmt(result.eff_rate[s][i]) for s in fig2_schemes]
            fh.write(",".join(row) + "\n")
    paths.append(fig2)

    if spec.emit_per_ue:
        for scheme in schemes:
            for side in ("dl", "ul"):
                samples = result.per_ue_rates[scheme][side]
                if not samples.size:
                    continue
                path = os.path.join(spec.out_dir, f"fig3_{scheme}_{side}.csv")
                y = np.linspace(0.0, 1.0, samples.size)
                with open(path, "w") as fh:
                    fh.write("x,y\n")
                    for xi, yi in zip(samples, y):
                        fh.write(f"{_fmt(xi)},{_fmt(yi)}\n")
                paths.append(path)

    meta = {
        "config": asdict(spec.cfg),
        "schemes": list(spec.schemes),
        "drops": spec.drops,
        "drops_used": result.drops_used,
        "r_tot_grid": list(spec.r_tot_grid),
        "seed": spec.cfg.seed,
        "failures": result.failures,
        "channel_checksums": result.checksums,
    }
    meta_path = os.path.join(spec.out_dir, "run_meta.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(meta_path)
    return paths


def parse_config(path=None, overrides=None):
    """Build an ExperimentSpec from a flat key=value file plus overrides.

    Unspecified fields keep the full-scale defaults. Experiment-level keys:
    drops, schemes (comma list), out_dir, r_tot_grid (comma list),
    emit_per_ue, threads; everything else is a NetworkConfig key.
    """
    raw = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                raw[key.strip().lower()] = value.strip()
    if overrides:
        raw.update({k.lower(): v for k, v in overrides.items() if v is not None})

    spec_kwargs = {}
    if "drops" in raw:
        spec_kwargs["drops"] = int(raw.pop("drops"))
    if "schemes" in raw:
        value = raw.pop("schemes")
        names = value if isinstance(value, (list, tuple)) else [s.strip() for s in str(value).split(",") if s.strip()]
        spec_kwargs["schemes"] = tuple(names)
    if "out_dir" in raw:
        spec_kwargs["out_dir"] = str(raw.pop("out_dir"))
    if "r_tot_grid" in raw:
        value = raw.pop("r_tot_grid")
        grid = value if isinstance(value, (list, tuple)) else [int(v) for v in str(value).split(",") if v.strip()]
        spec_kwargs["r_tot_grid"] = tuple(int(v) for v in grid)
    if "emit_per_ue" in raw:
        value = str(raw.pop("emit_per_ue")).lower()
        spec_kwargs["emit_per_ue"] = value in ("1", "true", "yes", "on")
    if "threads" in raw:
        spec_kwargs["threads"] = int(raw.pop("threads"))

    cfg = network_config_from_dict(raw)
    return ExperimentSpec(cfg=cfg, **spec_kwargs)
