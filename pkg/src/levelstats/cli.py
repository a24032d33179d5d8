"""Command-line entry point.

Subcommands: sample (cache spectra), analyze (ensemble statistics tables),
xxz (disorder sweep), table (analytic surmise table). A JSON config file
provides the base settings; presets fill in desk- or paper-scale defaults;
explicit flags override both. Exit codes: 0 success, 1 validation error,
2 numerical failure, 3 I/O error.
"""

import argparse
import dataclasses
import sys

from .errors import NumericalError, ValidationError
from .pipeline import CampaignConfig, cmd_analyze, cmd_sample, cmd_table, cmd_xxz, desk_preset, paper_preset


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="levelstats",
        description="k-th neighbor level spacing statistics: sampling, analysis, reports",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sample", "generate and cache spectra for a campaign"),
        ("analyze", "moments, histograms, number variance, gof tables"),
        ("xxz", "disordered spin-chain sweep"),
        ("table", "analytic surmise constants table"),
    ):
        p = sub.add_parser(name, help=help_text)
        source = p.add_mutually_exclusive_group()
        source.add_argument("--config", help="JSON campaign config file")
        source.add_argument("--preset", choices=("desk", "paper"), help="scale preset")
        p.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
        p.add_argument("--workers", type=int, help="parallel sampling workers")
        p.add_argument("--out", help="output directory")
        p.add_argument("--k-min", type=int, dest="k_min")
        p.add_argument("--k-max", type=int, dest="k_max")
        p.add_argument(
            "--ensemble", choices=("goe", "gue", "gse", "poisson"), help="matrix class"
        )
        p.add_argument("--n-dim", type=int, dest="dim", help="matrix dimension")
        p.add_argument("--realizations", type=int, dest="n_realizations")
    return parser


def _resolve_config(args):
    mode = "xxz" if args.command == "xxz" else "ensemble"
    if args.config:
        with open(args.config) as fh:
            config = CampaignConfig.from_json(fh.read())
        if args.command == "xxz" and config.mode != "xxz":
            raise ValidationError("the xxz command needs a config with mode='xxz'")
    elif args.preset == "paper":
        config = paper_preset(mode=mode)
    else:
        config = desk_preset(mode=mode)
    overrides = {}
    for field_name in ("seed", "workers", "k_min", "k_max", "ensemble", "dim", "n_realizations"):
        value = getattr(args, field_name, None)
        if value is not None:
            overrides[field_name] = value
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        if args.command == "sample":
            cmd_sample(config)
            print(f"spectra cached under {config.out_dir}")
        elif args.command == "analyze":
            written = cmd_analyze(config)
            print(f"wrote {len(written)} files under {config.out_dir}")
        elif args.command == "xxz":
            _, written = cmd_xxz(config)
            print(f"wrote {len(written)} files under {config.out_dir}")
        elif args.command == "table":
            written = cmd_table(config)
            print(f"wrote {written[0]}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
