"""Command line front end.

Subcommands: validate, ber-sweep, angle-sweep, coding-gain, pep-bound.
--seed and --workers override the config file; OMNISTBC_WORKERS is the
environment fallback for --workers.
"""

import argparse
import math
import os
import sys

from .analysis import (
    ciod_gain_closed_form,
    coding_gain,
    ostbc_gain_closed_form,
    pep_upper_bound,
    qostbc_gain_closed_form,
)
from .config import ConfigError, load_config

__all__ = ["main", "cli"]

_ENUMERABLE_KINDS = ("single", "ac", "ostbc", "qostbc", "ciod")


def _codebook(kind, rate):
    """Full codebook of one enumerable kind at bit rate ``rate``."""
    import numpy as np

    from . import codes
    from .constellations import make_psk

    if kind == "single":
        psk = make_psk(2**rate)
        return [p.reshape(1, 1) for p in psk.points]
    if kind == "ac":
        psk = make_psk(2**rate)
        return [
            codes.ac_matrix(a, b) for a in psk.points for b in psk.points
        ]
    nbits = 4 * rate
    encode = {
        "ostbc": codes.encode_ostbc,
        "qostbc": codes.encode_qostbc,
        "ciod": codes.encode_ciod,
    }[kind]
    book = []
    for word in range(2**nbits):
        bits = np.array([(word >> (nbits - 1 - k)) & 1 for k in range(nbits)])
        book.append(encode(bits, rate).matrix)
    return book


def _require_enumerable(kind):
    if kind not in _ENUMERABLE_KINDS:
        raise ConfigError(
            f"code: {kind!r} has no enumerable codebook at practical sizes; "
            f"choose one of {', '.join(_ENUMERABLE_KINDS)}"
        )


def _cmd_validate(args):
    from .selfcheck import run_all_checks

    failed = 0
    for name, passed, detail in run_all_checks():
        tag = "PASS" if passed else "FAIL"
        print(f"[{tag}] {name}: {detail}")
        failed += 0 if passed else 1
    if failed:
        print(f"{failed} check(s) failed")
    return 1 if failed else 0


def _load(args):
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    workers = args.workers
    if workers is None:
        env = os.environ.get("OMNISTBC_WORKERS")
        if env is not None:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(f"OMNISTBC_WORKERS: cannot parse {env!r}")
    if workers is not None:
        overrides["workers"] = workers
    return load_config(args.config, **overrides)


def _cmd_ber_sweep(args):
    from .engine import emit_csv, run_ber_sweep

    cfg = _load(args)
    points = run_ber_sweep(cfg)
    emit_csv(points, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    return 0


def _cmd_angle_sweep(args):
    from .engine import emit_csv, run_angle_sweep

    cfg = _load(args)
    pairs = run_angle_sweep(cfg, args.snr_db)
    emit_csv([p for _, p in pairs], args.out)
    print(f"wrote {len(pairs)} points to {args.out}")
    return 0


def _cmd_coding_gain(args):
    _require_enumerable(args.code)
    gain = coding_gain(_codebook(args.code, args.rate))
    closed = None
    if args.code == "qostbc":
        closed = qostbc_gain_closed_form(2**args.rate)
    elif args.code == "ciod":
        from .codes import ciod_constellation

        closed = ciod_gain_closed_form(ciod_constellation(args.rate).scale)
    elif args.code == "ostbc":
        closed = ostbc_gain_closed_form(args.rate)
    print(f"{gain:.12g}")
    if closed is not None and not math.isclose(gain, closed, rel_tol=1e-9, abs_tol=1e-9):
        print(
            f"warning: enumeration disagrees with closed form {closed:.12g}",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_pep_bound(args):
    _require_enumerable(args.code)
    n_ports = {"single": 1, "ac": 2}.get(args.code, 4)
    sigma_n2 = 10.0 ** (-args.snr_db / 10.0)
    bound = pep_upper_bound(_codebook(args.code, args.rate), n_ports, sigma_n2, args.k)
    print(f"{bound:.12g}")
    return 0


def cli(argv=None):
    parser = argparse.ArgumentParser(
        prog="omnistbc",
        description="Link-level simulator for omnidirectional space-time block codes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="run the invariant suite")

    for name, fn in (("ber-sweep", _cmd_ber_sweep), ("angle-sweep", _cmd_angle_sweep)):
        p = sub.add_parser(name, help=f"run a {name.replace('-', ' ')}")
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--workers", type=int, default=None, help="override workers")
        if name == "angle-sweep":
            p.add_argument("--snr-db", type=float, required=True, help="fixed SNR in dB")
        p.set_defaults(handler=fn)

    p = sub.add_parser("coding-gain", help="print the enumerated coding gain")
    p.add_argument("--code", required=True)
    p.add_argument("--rate", type=int, required=True)
    p.set_defaults(handler=_cmd_coding_gain)

    p = sub.add_parser("pep-bound", help="print the pairwise-error upper bound")
    p.add_argument("--code", required=True)
    p.add_argument("--rate", type=int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--k", type=int, default=1, help="number of user terminals")
    p.set_defaults(handler=_cmd_pep_bound)

    args = parser.parse_args(argv)
    if args.command == "validate":
        return _cmd_validate(args)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
