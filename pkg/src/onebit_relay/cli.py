"""Command-line front end: sweep, export-dataset, online-demo, oracle-check."""

import argparse
import json
import sys

from .channel import TimeVaryingConfig
from .harness import (ExperimentSpec, export_dataset, oracle_checks,
                      run_sweep, summarize)


def _spec_from_args(args, require_seed: bool = True) -> ExperimentSpec:
    d = {}
    if args.config:
        with open(args.config) as f:
            d = json.load(f)
    overrides = {
        "n_users": args.users, "relay_counts": args.relays, "n_antennas": args.antennas,
        "constellation": args.constellation, "snr_db": args.snr_db,
        "detectors": args.detectors, "pilots_per_input": args.pilots,
        "symbols_per_trial": args.symbols, "trials": args.trials, "seed": args.seed,
        "redraw_channels": args.redraw_channels, "state_cap": args.state_cap,
    }
    for key, val in overrides.items():
        if val is not None:
            d[key] = val
    if args.sweep_hop is not None and args.sweep_db is not None:
        d["sweep"] = [[args.sweep_hop, args.sweep_db]]
    if args.doppler is not None:
        d["time_varying"] = ({"normalized_doppler": args.doppler,
                              "varying_hop": args.varying_hop}
                             if args.doppler > 0 else None)
    if require_seed and d.get("seed") is None:
        raise SystemExit("a --seed (or a seed in --config) is required")
    d.setdefault("sweep", [])
    return ExperimentSpec.from_json_dict(d)


def _add_spec_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with an ExperimentSpec; flags override it")
    p.add_argument("--users", type=int, help="uplink user count K")
    p.add_argument("--relays", type=int, nargs="+", help="relays per layer L_1 .. L_{M-1}")
    p.add_argument("--antennas", type=int, help="BS antenna count N")
    p.add_argument("--constellation", choices=["qpsk", "8psk"])
    p.add_argument("--snr-db", type=float, nargs="+", dest="snr_db",
                   help="base per-hop SNRs in dB")
    p.add_argument("--sweep-hop", type=int, help="hop index whose SNR is swept")
    p.add_argument("--sweep-db", type=float, nargs="+", help="swept SNR grid in dB")
    p.add_argument("--detectors", nargs="+",
                   help="subset of ML AML ONLINE ZF LMMSE")
    p.add_argument("--pilots", type=int, help="pilot repeats T per input")
    p.add_argument("--symbols", type=int, help="data symbols per trial")
    p.add_argument("--trials", type=int, help="channel realizations per grid point")
    p.add_argument("--seed", type=int, help="experiment seed (reproducibility contract)")
    p.add_argument("--doppler", type=float, help="normalized Doppler f_d*T_s (0 = static)")
    p.add_argument("--varying-hop", type=int, default=2)
    p.add_argument("--redraw-channels", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--state-cap", type=int, help="max enumerated relay bits for exact ML")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="onebit-relay",
        description="Monte-Carlo benchmarks for multi-hop one-bit MU-MIMO detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run SER/SVEP sweeps and write a results CSV")
    _add_spec_flags(p_sweep)
    p_sweep.add_argument("--out", default="results.csv", help="output CSV path")

    p_export = sub.add_parser("export-dataset",
                              help="write labeled train/test splits per grid point")
    _add_spec_flags(p_export)
    p_export.add_argument("--out", default="datasets", help="output directory")

    p_demo = sub.add_parser("online-demo",
                            help="time-varying demo comparing online vs frozen detection")
    _add_spec_flags(p_demo)
    p_demo.add_argument("--out", default="online_demo.csv", help="output CSV path")
    p_demo.add_argument("--log-jsonl", help="optional per-slot trajectory log (JSON lines)")

    p_oracle = sub.add_parser("oracle-check",
                              help="run the brute-force verification oracles")
    p_oracle.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "sweep":
        spec = _spec_from_args(args)
        rows = run_sweep(spec)
        print(summarize(rows, args.out))
        print(f"wrote {args.out}")
        return 0

    if args.command == "export-dataset":
        spec = _spec_from_args(args)
        written = export_dataset(spec, args.out)
        for path in written:
            print(f"wrote {path}")
        return 0

    if args.command == "online-demo":
        if args.doppler is None:
            args.doppler = 0.005
        spec = _spec_from_args(args)
        if spec.time_varying is None:
            spec = ExperimentSpec.from_json_dict(
                dict(spec.to_json_dict(),
                     time_varying={"normalized_doppler": 0.005, "varying_hop": 2}))
        demo_spec = ExperimentSpec.from_json_dict(
            dict(spec.to_json_dict(), detectors=["ONLINE", "AML", "LMMSE"]))
        if args.log_jsonl:
            _log_trajectory(demo_spec, args.log_jsonl)
        rows = run_sweep(demo_spec)
        print(summarize(rows, args.out))
        print(f"wrote {args.out}")
        return 0

    if args.command == "oracle-check":
        ok = True
        for name, passed, detail in oracle_checks(args.seed):
            ok &= passed
            print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        return 0 if ok else 1

    return 2


def _log_trajectory(spec: ExperimentSpec, path: str):
    """Re-run the first grid point's first trial with per-slot JSON logging."""
    from .channel import draw_channel
    from .online_em import run_algorithm2
    from .harness import _stream, _S_CHANNEL

    point = spec.grid_points()[0] if spec.grid_points() else {}
    cfg = spec.config_at(point)
    ch = draw_channel(cfg, _stream(spec, 1, 0, _S_CHANNEL))
    rng = _stream(spec, 1, 0, 99)
    with open(path, "w") as log:
        run_algorithm2(cfg, spec.frame, ch, rng, tv=spec.time_varying,
                       trajectory_log=log)
    print(f"wrote {path}")


if __name__ == "__main__":
    sys.exit(main())
