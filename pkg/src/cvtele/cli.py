"""Command-line entry point: ``cvtele {run,reproduce-paper,spectra,tomography}``.

Exit codes: 0 success, 1 validation failure, 2 regression failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import anchors
from .homodyne import read_dataset
from .pipeline import EXAMPLE_CONFIG, ConfigError, ExperimentConfig, load_config, run_pipeline
from .spectra import ChannelResponse, SqueezerSpec, write_spectrum_csv
from .tomography import MleOptions, mle_reconstruct

EXIT_OK, EXIT_INVALID, EXIT_REGRESSION = 0, 1, 2

log = logging.getLogger("cvtele")


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.sampling.seed = args.seed
    if args.out is not None:
        cfg.output = args.out
    metrics = run_pipeline(cfg)
    shown = {k: v for k, v in metrics.items() if k not in ("config", "model")}
    print(json.dumps(shown, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    try:
        results = anchors.reproduce_paper(args.only)
    except KeyError:
        print(f"error: unknown row id {args.only!r}; known ids: {', '.join(anchors.ROW_IDS)}",
              file=sys.stderr)
        return EXIT_INVALID
    print(anchors.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_REGRESSION


def _cmd_spectra(args) -> int:
    try:
        spec = SqueezerSpec(args.squeezing_db, args.fwhm, args.efficiency)
        spec.pump_ratio()
        chan = ChannelResponse(args.gain, args.delay)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out or "spectrum.csv")
    write_spectrum_csv(out, spec, chan, args.f_min, args.f_max, args.points)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_tomography(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    opts = cfg.mle
    if args.n_max is not None:
        opts = MleOptions(**{**opts.__dict__, "n_max": args.n_max})
    data = read_dataset(args.dataset)
    report = mle_reconstruct(data, opts)
    doc = report.to_dict()
    out = Path(args.out or "rho.json")
    out.write_text(json.dumps(doc, indent=1))
    print(json.dumps(doc["metrics"], indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvtele", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate state -> teleporter -> tomography")
    run.add_argument("--config", help="YAML experiment config (defaults mirror the reference experiment)")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory")
    run.set_defaults(func=_cmd_run)

    rep = sub.add_parser("reproduce-paper", help="check the closed-form published figures")
    rep.add_argument("--only", help="run a single row by id")
    rep.set_defaults(func=_cmd_reproduce)

    spc = sub.add_parser("spectra", help="write teleported-vacuum noise spectra as CSV")
    spc.add_argument("--out")
    spc.add_argument("--squeezing-db", type=float, default=6.9)
    spc.add_argument("--fwhm", type=float, default=24e6, help="EPR OPO FWHM in Hz")
    spc.add_argument("--efficiency", type=float, default=1.0)
    spc.add_argument("--gain", type=float, default=1.0)
    spc.add_argument("--delay", type=float, default=0.0, help="channel delay mismatch in s")
    spc.add_argument("--f-min", type=float, default=0.0)
    spc.add_argument("--f-max", type=float, default=20e6)
    spc.add_argument("--points", type=int, default=401)
    spc.set_defaults(func=_cmd_spectra)

    tom = sub.add_parser("tomography", help="reconstruct a state from a theta,x dataset CSV")
    tom.add_argument("dataset")
    tom.add_argument("--config", help="YAML config whose mle section is used")
    tom.add_argument("--n-max", type=int)
    tom.add_argument("--out", help="report JSON path")
    tom.set_defaults(func=_cmd_tomography)

    sub.add_parser("example-config", help="print a complete example config").set_defaults(
        func=lambda args: print(EXAMPLE_CONFIG, end="") or EXIT_OK)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
