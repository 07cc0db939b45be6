"""Command line entry point.

Exit status: 0 when every check passed, 1 when a check failed or too many
samples were excluded, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .config import ConfigError, load_config
from .report import emit_report, records_to_csv, records_to_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("wignerlab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wignerlab", description="Wigner matrix spectral experiments and exact oracles.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    oracle = sub.add_parser("oracle", help="run the exact oracle suite")
    oracle.add_argument("--out", help="write the JSON report here instead of stdout")
    oracle.add_argument("--quick", action="store_true", help="fewer random trials")

    for name, text in [("wigner", "semicircle discrepancy experiment"),
                       ("bound", "expectation bound sweep"),
                       ("er", "Erdos-Renyi experiment"),
                       ("endpoint", "endpoint mass experiment")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", help="master seed")
        p.add_argument("--samples", help="samples per n")
        p.add_argument("--n", help="comma separated matrix sizes")
        p.add_argument("--ensemble", help="off-diagonal entry law, e.g. real-gaussian(1.0)")
        p.add_argument("--diag", help="diagonal entry law (default zero)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads")
        if name == "wigner":
            p.add_argument("--deltas")
            p.add_argument("--no-dist", action="store_true", help="skip the potential distance")
            p.add_argument("--tail-out", help="write the tail report JSON here")
        if name == "bound":
            p.add_argument("--z")
        if name == "er":
            p.add_argument("--p")
        if name == "endpoint":
            p.add_argument("--epsilons")
    return parser


def _config(args):
    overrides = {
        "seed": args.seed,
        "samples": args.samples,
        "n": args.n,
        "offdiag": args.ensemble,
        "diag": args.diag,
        "out": args.out,
        "format": args.format,
        "threads": args.threads,
        "deltas": getattr(args, "deltas", None),
        "z": getattr(args, "z", None),
        "p": getattr(args, "p", None),
        "epsilons": getattr(args, "epsilons", None),
    }
    if getattr(args, "no_dist", False):
        overrides["distances"] = False
    if args.command == "er":
        overrides["ensemble"] = "er"
    elif args.config is None:
        overrides["ensemble"] = "wigner"
    cfg = load_config(args.config, overrides)
    if args.command != "er" and cfg.ensemble != "wigner":
        raise ConfigError(f"{args.command} needs the wigner ensemble")
    return cfg


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _emit(records, cfg):
    if not records:
        raise ConfigError("no records to emit")
    if cfg.output is None:
        _write(records_to_csv(records) if cfg.format == "csv" else records_to_json(records), None)
    else:
        emit_report(records, cfg.format, cfg.output)


def _excess_failures(failed: int, total: int) -> bool:
    if failed:
        log.warning("%d of %d samples excluded after eigensolver failures", failed, total)
    return total > 0 and failed / total > harness.FAILURE_LIMIT


def run(args) -> int:
    if args.command == "oracle":
        report = harness.run_oracle_suite(quick=args.quick)
        _write(json.dumps(report, indent=2, default=str) + "\n", args.out)
        if not report["passed"]:
            log.error("failing checks: %s", ", ".join(report["failing"]))
            return EXIT_FAIL
        return EXIT_OK

    cfg = _config(args)
    total = cfg.samples * len(cfg.n_list)
    if args.command == "wigner":
        result = harness.run_semicircle_experiment(cfg)
        _emit(result.records, cfg)
        if args.tail_out:
            _write(json.dumps(result.tail.to_dict(), indent=2) + "\n", args.tail_out)
        failed = sum(result.tail.failures.values())
        return EXIT_FAIL if _excess_failures(failed, total) else EXIT_OK
    if args.command == "bound":
        _emit(harness.run_bound_sweep(cfg).rows, cfg)
        return EXIT_OK
    if args.command == "er":
        rep = harness.run_er_experiment(cfg)
        _emit(rep.records, cfg)
        if rep.violations:
            log.error("%d interval counts moved by more than one", rep.violations)
            return EXIT_FAIL
        return EXIT_FAIL if _excess_failures(rep.failures, total) else EXIT_OK
    if args.command == "endpoint":
        rep = harness.run_endpoint_experiment(cfg)
        _emit(rep.records, cfg)
        return EXIT_FAIL if _excess_failures(rep.failures, total) else EXIT_OK
    raise AssertionError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"wignerlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"wignerlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
