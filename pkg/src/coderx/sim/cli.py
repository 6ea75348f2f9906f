"""Command line: ``coderx {sweep,decode,gen-code,info}``.

Exit codes: 0 success, 1 invalid input (configuration, code or LLR file),
2 usage errors such as unknown flags or a missing configuration file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .. import __version__
from ..codes import (AlistError, ParityCheckMatrix, build_rm_code, hamming_7_4, parse_alist,
                     regular_ldpc, serialize_alist)
from ..receivers import lp_decode
from .config import FORMULATIONS, PROFILES, CodeSpec, ConfigError, config_to_dict, load_config
from .report import emit_csv
from .runner import run_ber_sweep


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coderx", description="Code-anchored MIMO receivers and LP decoding.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a BER sweep and write CSV")
    s.add_argument("--config", required=True, type=Path, help="YAML sweep configuration")
    s.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
    s.add_argument("--seed", type=int, help="override the master seed")
    s.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    s.add_argument("--frames", type=int, help="override frames per SNR point")

    d = sub.add_parser("decode", help="LP-decode one LLR vector")
    d.add_argument("--code", required=True,
                   help=f"alist path, 'hamming' or a profile ({', '.join(PROFILES)})")
    d.add_argument("--llr", required=True, type=Path, help="whitespace-separated LLRs (log p0/p1)")
    d.add_argument("--formulation", choices=FORMULATIONS, default="exact")

    g = sub.add_parser("gen-code", help="write a parity-check matrix in alist format")
    g.add_argument("--family", required=True, choices=("rm", "ldpc", "hamming"))
    g.add_argument("--r", type=int, help="rm: order")
    g.add_argument("--n", type=int, help="rm: number of variables (length 2**n); ldpc: block length")
    g.add_argument("--k", type=int, help="ldpc: dimension")
    g.add_argument("--bit-degree", type=int, default=3, help="ldpc: column weight")
    g.add_argument("--seed", type=int, default=1, help="ldpc: construction seed")
    g.add_argument("--out", type=Path, help="alist destination (default: stdout)")

    i = sub.add_parser("info", help="show version, built-in codes, or a resolved configuration")
    i.add_argument("--config", type=Path, help="YAML sweep configuration to validate and echo")
    return p


def _load_code(spec: str) -> ParityCheckMatrix:
    if spec == "hamming":
        return hamming_7_4()
    if spec in PROFILES:
        return CodeSpec(name=spec).build()
    return parse_alist(Path(spec).read_text())


def _cmd_sweep(args, parser) -> int:
    if not args.config.is_file():
        parser.error(f"configuration file not found: {args.config}")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.frames is not None:
        changes["frames"] = args.frames
    if changes:
        cfg = cfg.with_overrides(**changes)
    records = run_ber_sweep(cfg, workers=args.threads)
    emit_csv(records, args.out if args.out else sys.stdout)
    return 0


def _cmd_decode(args, parser) -> int:
    if not args.llr.is_file():
        parser.error(f"LLR file not found: {args.llr}")
    if args.code not in PROFILES and args.code != "hamming" and not Path(args.code).is_file():
        parser.error(f"code file not found: {args.code}")
    code = _load_code(args.code)
    try:
        llr = np.array(args.llr.read_text().split(), dtype=float)
    except ValueError as exc:
        raise ValueError(f"{args.llr}: {exc}") from exc
    res = lp_decode(code, llr, args.formulation)
    print("".join(str(b) for b in res.bits))
    print(f"integral={res.integral} objective={res.objective:.10g} status={res.report.status}")
    return 0


def _cmd_gen_code(args, parser) -> int:
    if args.family == "rm":
        if args.r is None or args.n is None:
            parser.error("rm needs --r and --n")
        H = build_rm_code(args.r, args.n)[1]
    elif args.family == "ldpc":
        if args.n is None or args.k is None:
            parser.error("ldpc needs --n and --k")
        H = regular_ldpc(args.n, args.n - args.k, args.bit_degree, seed=args.seed)
    else:
        H = hamming_7_4()
    text = serialize_alist(H)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_info(args, parser) -> int:
    if args.config is None:
        print(f"coderx {__version__}")
        for name, (n, red, dv, seed) in PROFILES.items():
            print(f"profile {name}: regular LDPC n={n} k={n - red} bit degree {dv} seed {seed}")
        return 0
    if not args.config.is_file():
        parser.error(f"configuration file not found: {args.config}")
    cfg = load_config(args.config)
    code = cfg.code.build()
    sys.stdout.write(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))
    print(f"# code: n={code.n} k={code.dimension} checks={code.m}")
    return 0


_COMMANDS = {"sweep": _cmd_sweep, "decode": _cmd_decode, "gen-code": _cmd_gen_code, "info": _cmd_info}


def cli_main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        for key, msg in exc.problems:
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return 1
    except (AlistError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
