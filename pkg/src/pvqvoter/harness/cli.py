"""Command line entry point: ``pvqvoter <subcommand> [flags]``.

Every model flag corresponds to a configuration key (``--sweep-p`` is
``sweep.p``, ``--seeding-k`` is ``seeding.k``) and overrides the value read
from ``--config``.  Invalid values exit with status 2, like usage errors;
other failures exit with status 1.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from pvqvoter.errors import ConfigurationError, InvalidParameter, PvqvoterError
from pvqvoter.harness.config import Config, NetworkMode, SweepGrid, load_config
from pvqvoter.harness.csvio import (StationaryRecord, write_mfa_csv, write_stationary_csv,
                                    write_summary_csv, write_trajectory_csv)
from pvqvoter.harness.sweep import make_network, run_sweep
from pvqvoter.meanfield import MfaState, integrate, stationary_states
from pvqvoter.dynamics import rep_seed
from pvqvoter.network import validate_layer, write_edge_list

USAGE_ERROR = 2

MODEL_KEYS = ("side", "q", "p", "a1", "h", "beta", "variant", "mcs", "reps", "seed", "init")
SWEEP_KEYS = ("sweep.p", "sweep.a1", "sweep.h", "sweep.variant", "sweep.reps")
SEEDING_KEYS = ("seeding.strategy", "seeding.k")


def _flag(key: str) -> str:
    return "--" + key.replace(".", "-")


def _add_keys(parser: argparse.ArgumentParser, keys) -> None:
    for key in keys:
        parser.add_argument(_flag(key), dest=key, metavar="VALUE", default=None,
                            help=f"configuration key {key}")


def _common(parser: argparse.ArgumentParser, out_help: str) -> None:
    parser.add_argument("--config", type=Path, help="flat key=value configuration file")
    parser.add_argument("--out", type=Path, help=out_help + " (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvqvoter",
                                     description="Two-layer q-voter model of PV adoption.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    sim = sub.add_parser("simulate", help="Monte Carlo trajectories of one parameter set")
    _common(sim, "trajectory CSV")
    _add_keys(sim, MODEL_KEYS + ("network",) + SEEDING_KEYS)
    sim.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", help="replicated sweep over a parameter grid")
    _common(sw, "summary CSV")
    _add_keys(sw, MODEL_KEYS + ("network",) + SWEEP_KEYS + SEEDING_KEYS)
    sw.add_argument("--trajectories", type=Path, help="also write every trajectory here")
    sw.add_argument("--workers", type=int, default=1)

    mfa = sub.add_parser("mfa", help="integrate the mean-field equations")
    _common(mfa, "MFA trajectory CSV")
    _add_keys(mfa, ("q", "p", "a1", "h", "variant"))
    mfa.add_argument("--cA0", type=float, default=0.0, help="initial adoption level")
    mfa.add_argument("--cS0", type=float, default=0.0, help="initial opinion level")
    mfa.add_argument("--dt", type=float, default=0.01)
    mfa.add_argument("--t-max", type=float, default=1e5)
    mfa.add_argument("--eps", type=float, default=1e-6)
    mfa.add_argument("--record-every", type=float, default=1.0)

    st = sub.add_parser("stationary", help="analytic stationary states over a p-grid")
    _common(st, "stationary CSV")
    st.add_argument("--p", dest="sweep.p", metavar="VALUES", default=None,
                    help="comma list or start:stop:step of p values")
    st.add_argument("--h", dest="sweep.h", metavar="VALUES", default=None)
    st.add_argument("--variant", dest="sweep.variant", metavar="VALUES", default=None)
    _add_keys(st, ("q", "a1"))

    vn = sub.add_parser("validate-net", help="build and check the two network layers")
    parser_keys = ("side", "beta", "seed")
    _common(vn, "validation report")
    _add_keys(vn, parser_keys)
    vn.add_argument("--rep", type=int, default=0, help="replication whose network is built")
    vn.add_argument("--dump-spatial", type=Path, help="write the spatial layer edge list")
    vn.add_argument("--dump-social", type=Path, help="write the social layer edge list")
    return parser


def _config(args: argparse.Namespace) -> Config:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError("config", f"cannot read {args.config}: {exc}") from None
    keys = MODEL_KEYS + ("network",) + SWEEP_KEYS + SEEDING_KEYS
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return load_config(text, overrides)


def _dest(args):
    return sys.stdout if args.out is None else args.out


def _simulate(args, cfg: Config) -> int:
    result = run_sweep(SweepGrid.single(cfg.params), cfg.params, cfg.seeding,
                       cfg.network, workers=args.workers)
    for err in result.errors:
        print(f"error: {err}", file=sys.stderr)
    write_trajectory_csv(result.trajectories, _dest(args))
    return 1 if result.errors else 0


def _sweep(args, cfg: Config) -> int:
    result = run_sweep(cfg.grid, cfg.params, cfg.seeding, cfg.network, workers=args.workers)
    for err in result.errors:
        print(f"error: {err}", file=sys.stderr)
    write_summary_csv(result.cells, _dest(args))
    if args.trajectories is not None:
        write_trajectory_csv(result.trajectories, args.trajectories)
    return 1 if result.errors else 0


def _mfa(args, cfg: Config) -> int:
    prm = cfg.params
    traj = integrate(MfaState(args.cA0, args.cS0), prm.p, prm.h, prm.a1, prm.q, prm.variant,
                     dt=args.dt, t_max=args.t_max, eps=args.eps, record_every=args.record_every)
    write_mfa_csv(traj, _dest(args), prm.variant, prm.p, prm.a1, prm.h, prm.q)
    report = sys.stdout if args.out is not None else sys.stderr
    print(f"time_to_stationary={traj.time:.12g} converged={str(traj.converged).lower()}",
          file=report)
    return 0


def _stationary(args, cfg: Config) -> int:
    records = []
    grid = cfg.grid
    for variant in grid.variants:
        for h in grid.h_values:
            for p in grid.p_values:
                for pt in stationary_states(p, h, cfg.params.q, variant, a1=cfg.params.a1):
                    records.append(StationaryRecord(variant, h, cfg.params.q, pt))
    write_stationary_csv(records, _dest(args))
    return 0


def _validate_net(args, cfg: Config) -> int:
    prm = cfg.params
    seed = rep_seed(prm.master_seed, args.rep)
    net = make_network(prm, seed)
    lines = []
    ok = True
    for name, layer in (("spatial", net.spatial), ("social", net.social)):
        problems = validate_layer(layer)
        ok = ok and not problems
        deg = layer.degrees()
        lines.append(f"{name}: n={layer.n} edges={layer.edge_count} degree min={deg.min()} "
                     f"max={deg.max()} mean={deg.mean():.6g} "
                     f"{'valid' if not problems else 'INVALID'}")
        lines.extend(f"  {msg}" for msg in problems)
    lines.append(f"social build attempts={net.social.metadata.get('attempts')} "
                 f"rewiring: {net.social.metadata.get('rewiring')}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
    if args.dump_spatial is not None:
        write_edge_list(net.spatial, args.dump_spatial)
    if args.dump_social is not None:
        write_edge_list(net.social, args.dump_social)
    return 0 if ok else 1


COMMANDS = {"simulate": _simulate, "sweep": _sweep, "mfa": _mfa,
            "stationary": _stationary, "validate-net": _validate_net}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if getattr(args, "workers", 1) < 1:
            raise ConfigurationError("workers", "must be positive")
        return COMMANDS[args.command](args, cfg)
    except (ConfigurationError, InvalidParameter) as exc:
        print(f"pvqvoter {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (PvqvoterError, OSError) as exc:
        print(f"pvqvoter {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
