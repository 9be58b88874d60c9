"""Command line entry point.

    beliefavg run --config FILE [--seed S] [--reps R] [--out DIR]
    beliefavg reproduce --figure TAG --out DIR
    beliefavg sweep --config FILE --deltas 0,0.1,1.0 [--out DIR]

Exit status: 0 on success, 2 on a configuration error, 3 when a run breaks
a protocol invariant.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..protocols import InvariantError
from .config import ConfigError, load_config
from .experiments import FIGURES, quantization_sweep, reproduce_figure, resolve_out, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3


def _deltas(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad precision list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beliefavg", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one configured experiment")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--reps", type=int)
    r.add_argument("--out")

    f = sub.add_parser("reproduce", help="run the preset behind a figure")
    f.add_argument("--figure", required=True, choices=sorted(FIGURES))
    f.add_argument("--out")

    s = sub.add_parser("sweep", help="compare precision levels on shared seeds")
    s.add_argument("--config", required=True)
    s.add_argument("--deltas", type=_deltas, required=True)
    s.add_argument("--out")
    return p


def _print_summary(label: str, summary) -> None:
    agg = summary.aggregate()
    body = " ".join(f"{k}={v:.6g}" for k, v in agg.items())
    print(f"{label}: reps={len(summary.reps)} {body}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            over = {}
            if args.seed is not None:
                over["seed"] = args.seed
            if args.reps is not None:
                over["repetitions"] = args.reps
            cfg = cfg.replace(**over).validate()
            if cfg.scenario == "quantization-sweep":
                rows = quantization_sweep(cfg, out=args.out)
                for row in rows:
                    print(f"delta={row.delta:g} steady_error={row.steady_error:.6g} slope={row.slope:.4g}")
            else:
                _print_summary(cfg.scenario, run_experiment(cfg, args.out))
        elif args.command == "reproduce":
            if resolve_out(args.out) is None:
                raise ConfigError("reproduce needs --out or BELIEFAVG_OUT")
            for label, res in reproduce_figure(args.figure, args.out).items():
                if isinstance(res, list):
                    for row in res:
                        print(f"{label} delta={row.delta:g} steady_error={row.steady_error:.6g} "
                              f"slope={row.slope:.4g}")
                else:
                    _print_summary(f"{args.figure}/{label}", res)
        else:
            cfg = load_config(args.config)
            for row in quantization_sweep(cfg, args.deltas, out=args.out):
                print(f"delta={row.delta:g} steady_error={row.steady_error:.6g} slope={row.slope:.4g}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
