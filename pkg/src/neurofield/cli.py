"""Command-line entry point: ``neurofield run | verify | info``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import scipy.fft

from . import __version__
from .errors import NeuroFieldError

log = logging.getLogger("neurofield")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _parser() -> argparse.ArgumentParser:
    from .experiments import EXPERIMENTS, SUITES

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    common.add_argument("--threads", type=int, default=1, help="FFT worker threads (default: 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="neurofield", description=__doc__)
    p.add_argument("--version", action="version", version=f"neurofield {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run one configured experiment")
    r.add_argument("--config", type=Path, help="INI experiment file")
    r.add_argument("--experiment", choices=EXPERIMENTS, help="experiment kind when the config omits it")
    r.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config key; repeatable")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))

    i = sub.add_parser("info", help="print the resolved configuration and derived constants")
    i.add_argument("--config", type=Path)
    i.add_argument("--experiment", choices=EXPERIMENTS)
    i.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE")
    return p


def _cmd_run(args) -> int:
    from .experiments import load_config, run

    try:
        cfg = load_config(args.config, args.override, args.experiment)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        arts = run(cfg, args.out)
    except NeuroFieldError as exc:
        print(f"{cfg.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"partial artifacts and failure manifest in {args.out}", file=sys.stderr)
        return EXIT_FAILED
    print(f"{cfg.experiment}: {len(arts.files)} artifacts in {args.out} ({time.perf_counter() - t0:.1f} s)")
    for key, rep in arts.reports.items():
        print(f"  {key}: {json.dumps(rep, default=str)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .experiments import SUITES, verify

    suites = SUITES if args.suite == "all" else (args.suite,)
    failed = []
    for name in suites:
        t0 = time.perf_counter()
        res = verify(name, args.out)
        for c in res.checks:
            mark = "PASS" if c.passed else "FAIL"
            print(f"{mark} {name}: {c.name}: {c.value:.6g} (limit {c.limit:.6g})")
            if not c.passed:
                failed.append(f"{name}: {c.name}")
        print(f"{name}: {'ok' if res.passed else 'FAILED'} in {time.perf_counter() - t0:.1f} s")
    if failed:
        print("failures:\n  " + "\n  ".join(failed), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _cmd_info(args) -> int:
    from .experiments import config_to_ini, load_config
    from .kernels import constants

    try:
        cfg = load_config(args.config, args.override, args.experiment)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    c = constants(cfg.params)
    print(f"neurofield {__version__}")
    print(config_to_ini(cfg), end="")
    print("[derived]")
    print(f"dx = {cfg.grid.dx:.6g}")
    print(f"l1_norm = {c.l1_norm:.12g}")
    print(f"mu_0 = {c.mu_0:.12g}")
    print(f"mu_c = {c.mu_c:.12g}")
    print(f"q_c = {c.q_c:.12g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = getattr(args, "threads", 1)
    if threads < 1:
        print("--threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    with scipy.fft.set_workers(threads):
        return {"run": _cmd_run, "verify": _cmd_verify, "info": _cmd_info}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
