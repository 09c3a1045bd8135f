"""Command-line interface.

Subcommands:

    kobayashi-lab domain info   --domain '<json>' | --config cfg.json
    kobayashi-lab metric eval   --config cfg.json [--seed N] [--out DIR]
    kobayashi-lab geodesic solve --config cfg.json [--seed N] [--out DIR]
    kobayashi-lab verify {visibility,gehring-hayman,lower-bounds,shells} --config ...
    kobayashi-lab sweep         --config cfg.json [--seed N] [--out DIR]

Exit codes: 0 when every record passes, 1 when any verification fails, and
2 for usage or configuration errors.  Runs are deterministic for a fixed
(config, seed); CSV output is byte-identical across repeats.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import domains as domains_mod
from .domains import DomainError
from .reports import ConfigError, load_config, parse_config, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kobayashi-lab",
        description="Kobayashi-geometry numerical laboratory: metric bounds, "
        "near-geodesics, and quantitative visibility / length inequality sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dom = sub.add_parser("domain", help="domain model utilities")
    dom_sub = p_dom.add_subparsers(dest="domain_command", required=True)
    p_info = dom_sub.add_parser("info", help="print domain facts as JSON")
    p_info.add_argument("--domain", help="inline JSON domain descriptor")
    p_info.add_argument("--config", help="experiment config to take the domain from")

    def add_run_parser(name: str, help_text: str, sub_name: str | None = None):
        p = sub.add_parser(name, help=help_text)
        if sub_name:
            inner = p.add_subparsers(dest=f"{name}_command", required=True)
            p2 = inner.add_parser(sub_name, help=help_text)
        else:
            p2 = p
        p2.add_argument("--config", required=True, help="experiment config JSON file")
        p2.add_argument("--seed", type=int, help="override the config seed")
        p2.add_argument("--out", help="override the output directory")
        return p2

    add_run_parser("metric", "pointwise metric estimates", "eval")
    add_run_parser("geodesic", "solve near-geodesics for configured pairs", "solve")

    p_ver = sub.add_parser("verify", help="run one inequality verifier sweep")
    p_ver.add_argument(
        "kind",
        choices=["visibility", "gehring-hayman", "lower-bounds", "shells"],
        help="which inequality family to verify",
    )
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--seed", type=int)
    p_ver.add_argument("--out", help="override the output directory")

    p_sweep = sub.add_parser("sweep", help="run a multi-experiment sweep config")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--out", help="override the output directory")
    return parser


def _domain_info(args) -> int:
    if not args.domain and not args.config:
        print("domain info needs --domain or --config", file=sys.stderr)
        return 2
    try:
        if args.domain:
            dom = domains_mod.from_descriptor(args.domain)
        else:
            dom = load_config(args.config).domain
    except (DomainError, ConfigError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    diam, exact = dom.diameter()
    info = {
        "descriptor": dom.descriptor(),
        "label": dom.label,
        "dimension": dom.dim,
        "convex": dom.convex,
        "smooth_boundary": dom.smooth,
        "inradius": dom.inradius(),
        "diameter": diam,
        "diameter_exact": exact,
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def _run_experiment(args, expected: str | None) -> int:
    try:
        config = load_config(args.config)
        payload = dict(config.raw)
        if expected is not None and config.experiment != expected:
            payload["experiment"] = expected
        if args.seed is not None:
            payload["seed"] = args.seed
        if payload != config.raw:
            config = parse_config(payload)
        if getattr(args, "out", None):
            config.out = args.out
        bundle = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(bundle.summary, indent=2, sort_keys=True))
    return 0 if bundle.violations == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "domain":
        return _domain_info(args)
    if args.command == "metric":
        return _run_experiment(args, "metric-eval")
    if args.command == "geodesic":
        return _run_experiment(args, "geodesic")
    if args.command == "verify":
        kind_map = {
            "visibility": "visibility",
            "gehring-hayman": "gehring-hayman",
            "lower-bounds": "lower-bounds",
            "shells": "shells",
        }
        return _run_experiment(args, kind_map[args.kind])
    if args.command == "sweep":
        return _run_experiment(args, None)
    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return 2


if __name__ == "__main__":
    sys.exit(main())
