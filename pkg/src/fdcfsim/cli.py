"""Command-line entry point.

    fdcfsim run [--config FILE] [--scale desk|paper] [--seed N] [--drops N]
                [--iters N] [--schemes a,b,c] [--out DIR] [--threads N]
    fdcfsim validate [--seed N]
    fdcfsim dump-channels [--scale desk|paper] [--seed N] --out FILE

Exit codes: 0 success, 1 configuration error, 2 runtime abort.
"""

import argparse
import sys

import numpy as np

from . import harness, textio
from .config import ConfigError, desk_config, network_config_from_dict
from .numerics import RngStream
from .topology import generate_drop

_DESK_OVERRIDES = dict(grid_side=2, m=2, n=2, k_dl=2, k_ul=2, tau=8)
_DESK_DROPS = 20


def _build_parser():
    parser = argparse.ArgumentParser(prog="fdcfsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment and emit CSV/JSON")
    run.add_argument("--config", help="flat key=value config file")
    run.add_argument("--scale", choices=["desk", "paper"], help="preset scenario size")
    run.add_argument("--seed", type=int)
    run.add_argument("--drops", type=int)
    run.add_argument("--iters", type=int)
    run.add_argument("--schemes", help="comma-separated scheme list")
    run.add_argument("--out", dest="out_dir")
    run.add_argument("--threads", type=int)

    val = sub.add_parser("validate", help="run the built-in invariant battery at desk scale")
    val.add_argument("--seed", type=int, default=7)

    dump = sub.add_parser("dump-channels", help="emit one channel realization as a text fixture")
    dump.add_argument("--scale", choices=["desk", "paper"], default="desk")
    dump.add_argument("--seed", type=int, default=1)
    dump.add_argument("--out", required=True)
    return parser


def _spec_from_args(args):
    overrides = {}
    if args.scale == "desk":
        overrides.update(_DESK_OVERRIDES)
        overrides["drops"] = _DESK_DROPS
    for key in ("seed", "drops", "iters", "threads", "schemes", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return harness.parse_config(args.config, overrides)


def _cmd_run(args):
    spec = _spec_from_args(args)
    result = harness.run_experiment(spec)
    paths = harness.emit_outputs(result, spec)
    for path in paths:
        print(path)
    if result.failures:
        print(f"warning: {len(result.failures)} drop(s) failed and were excluded", file=sys.stderr)
    return 0


def _cmd_validate(args):
    from . import baselines, numerics, ota, perfect_csi

    cfg = desk_config(seed=args.seed)
    checks = []

    def check(name, fn):
        fn()
        checks.append(name)
        print(f"PASS {name}")

    rng = RngStream(args.seed, 0)
    chan = generate_drop(cfg, RngStream(args.seed, 0), RngStream(args.seed, 1))

    def pilots_orthogonal():
        book = ota.build_pilots(cfg)
        stack = np.hstack([book.p, book.q])
        gram = stack.conj().T @ stack
        assert np.linalg.norm(gram - cfg.tau * np.eye(cfg.k)) < 1e-10 * cfg.tau

    def projection_idempotent():
        book = ota.build_pilots(cfg)
        y = numerics.complex_gaussian(rng, (cfg.n, cfg.tau), 1.0)
        p1 = numerics.project_pilot_subspace(y, book.p, cfg.tau)
        p2 = numerics.project_pilot_subspace(p1, book.p, cfg.tau)
        assert np.linalg.norm(p1 - p2) < 1e-10

    def bisection_slackness():
        lam = numerics.bisect_power_multiplier(lambda l: (2.0 / (1 + l)) ** 2, 1.0)
        assert abs(lam - 1.0) < 1e-4
        assert numerics.bisect_power_multiplier(lambda l: 0.5 / (1 + l), 1.0) == 0.0

    def descent_monotone():
        exact = desk_config(seed=args.seed, damping_mode="fixed", alpha_fixed=1.0,
                            ap_alpha=1.0, nu_scale=0.0, nu_gram_scale=0.0)
        track = []
        _, history = perfect_csi.run_alt_opt(chan, exact, block_mse_out=track)
        seq = np.asarray([history[0].sum_mse] + track)
        assert np.all(np.diff(seq) <= 1e-9)

    def power_feasible():
        bf, _ = ota.run_ibt(chan, cfg, rng=RngStream(args.seed, 2))
        bf.validate(cfg)

    def deterministic():
        _, h1 = ota.run_ibt(chan, cfg, rng=RngStream(args.seed, 3))
        _, h2 = ota.run_ibt(chan, cfg, rng=RngStream(args.seed, 3))
        assert all(a.sum_rate == b.sum_rate for a, b in zip(h1, h2))

    def hd_structural():
        history = baselines.run_half_duplex(chan, cfg, rng=RngStream(args.seed, 4))
        assert np.isfinite(history[-1].sum_rate)

    try:
        check("pilot orthogonality", pilots_orthogonal)
        check("projection idempotence", projection_idempotent)
        check("bisection slackness", bisection_slackness)
        check("sum-MSE monotone descent", descent_monotone)
        check("power feasibility", power_feasible)
        check("determinism", deterministic)
        check("half-duplex run", hd_structural)
    except AssertionError as exc:
        print(f"FAIL after {len(checks)} checks: {exc}", file=sys.stderr)
        return 2
    print(f"{len(checks)} checks passed")
    return 0


def _cmd_dump(args):
    overrides = dict(_DESK_OVERRIDES) if args.scale == "desk" else {}
    overrides["seed"] = args.seed
    cfg = network_config_from_dict(overrides)
    chan = generate_drop(cfg, RngStream(args.seed, 0), RngStream(args.seed, 1))
    textio.dump_channels(args.out, chan)
    print(args.out)
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "dump-channels":
            return _cmd_dump(args)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime abort
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
