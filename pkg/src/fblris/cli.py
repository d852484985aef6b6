"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 numeric failure.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .channel import SystemConfig
from .errors import FblrisError, NumericError
from .experiments import (
    DEFAULT_N_GRID,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SNR_GRID,
    ExperimentSpec,
    make_grid,
    resolve_preset,
    run_blocklength,
    run_capacity,
    run_curve,
    run_figure,
    run_gamma_product,
    run_moments,
    run_rate_vs_snr,
)
from .gamma_product import GammaProductParams
from .selftest import run_selftest

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# flag dest -> (type, default)
_OPTIONS = {
    "t": (int, 2),
    "r": (int, 1),
    "n_ris": (int, 4),
    "snr_db": (float, -5.0),
    "epsilon": (float, 1e-3),
    "scheme": (str, "bpsk"),
    "channel": (str, "rayleigh"),
    "samples": (int, DEFAULT_SAMPLES),
    "seed": (int, DEFAULT_SEED),
    "n_min": (int, DEFAULT_N_GRID[0]),
    "n_max": (int, DEFAULT_N_GRID[1]),
    "n_step": (int, DEFAULT_N_GRID[2]),
    "snr_min": (float, DEFAULT_SNR_GRID[0]),
    "snr_max": (float, DEFAULT_SNR_GRID[1]),
    "snr_step": (float, DEFAULT_SNR_GRID[2]),
    "out": (str, None),
    "format": (str, "csv"),
}


class UsageError(Exception):
    pass


def load_config_file(path):
    """Read ``key = value`` lines or a JSON object; keys use flag spelling."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key] = value
    out = {}
    for key, value in raw.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "preset":
            out[dest] = str(value)
            continue
        if dest not in _OPTIONS:
            raise UsageError(f"{path}: unknown config key {key!r}")
        typ = _OPTIONS[dest][0]
        out[dest] = typ(value) if value is not None else None
    return out


def _add_common(p):
    p.add_argument("--config", help="key = value or JSON config file; flags override it")
    p.add_argument("--preset", help="figure preset, e.g. fig1 or fig1-bpsk")
    for dest, (typ, _) in _OPTIONS.items():
        flag = "--" + dest.replace("_", "-")
        p.add_argument(flag, dest=dest, type=typ, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fblris",
        description="Finite-blocklength bounds for RIS-assisted MIMO links.",
    )
    parser.add_argument("--version", action="version", version=f"fblris {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("moments", "estimate I, U, T, V for one scheme"),
        ("curve", "achievability/converse rates over a blocklength grid"),
        ("rate-vs-snr", "capacity and BPSK/QPSK rates over an SNR grid"),
        ("capacity", "Gaussian-input capacity (MC and quadrature)"),
    ):
        _add_common(sub.add_parser(name, help=help_text))

    p = sub.add_parser("blocklength", help="blocklength needed for a fraction of I")
    _add_common(p)
    p.add_argument("--eta", type=float, action="append",
                   help="target fraction of I (repeatable; default 0.7 0.8 0.9)")

    p = sub.add_parser("gamma-product", help="tabulate the product-of-Gamma density")
    _add_common(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--z-min", type=float, default=0.01)
    p.add_argument("--z-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--log-grid", action="store_true")

    p = sub.add_parser("figure", help="reproduce a figure preset")
    p.add_argument("name", help="fig1 fig2 fig3 fig5 fig555 fig6 fig66 fig8 fig9 fig10")
    _add_common(p)

    sub.add_parser("selftest", help="run the invariant suite")
    return parser


def resolve_options(args):
    """Merge defaults < preset < config file < explicit flags."""
    opts = {dest: default for dest, (_, default) in _OPTIONS.items()}
    preset = None
    preset_name = getattr(args, "name", None) or getattr(args, "preset", None)
    config = load_config_file(args.config) if getattr(args, "config", None) else {}
    if preset_name is None:
        preset_name = config.pop("preset", None)
    if preset_name:
        preset, scheme = resolve_preset(preset_name)
        opts.update(t=preset.t, r=preset.r, n_ris=preset.n_ris, snr_db=preset.snr_db,
                    epsilon=preset.epsilon)
        if scheme:
            opts["scheme"] = scheme
    opts.update(config)
    for dest in _OPTIONS:
        value = getattr(args, dest, None)
        if value is not None:
            opts[dest] = value
    return opts, preset


def spec_from_options(opts, snr=False):
    cfg = SystemConfig(opts["t"], opts["r"], opts["n_ris"], opts["snr_db"], opts["epsilon"],
                       opts["scheme"], opts["channel"])
    snr_grid = ()
    if snr:
        snr_grid = make_grid(opts["snr_min"], opts["snr_max"], opts["snr_step"], integer=False)
    return ExperimentSpec(
        cfg=cfg,
        scheme=opts["scheme"],
        n_grid=make_grid(opts["n_min"], opts["n_max"], opts["n_step"]),
        samples=opts["samples"],
        seed=opts["seed"],
        output_path=opts["out"],
        format=opts["format"],
        snr_grid=snr_grid,
    )


def _dispatch(args):
    if args.command == "selftest":
        results = run_selftest()
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return EXIT_CHECK if failed else EXIT_OK

    opts, preset = resolve_options(args)
    cmd = args.command
    if cmd == "figure":
        if preset is None:
            raise UsageError("figure needs a preset name")
        spec = spec_from_options(opts, snr=preset.kind == "rate_vs_snr")
        _, text = run_figure(spec, preset)
    elif cmd == "moments":
        _, _, text = run_moments(spec_from_options(opts))
    elif cmd == "curve":
        _, text = run_curve(spec_from_options(opts))
    elif cmd == "rate-vs-snr":
        _, text = run_rate_vs_snr(spec_from_options(opts, snr=True))
    elif cmd == "capacity":
        _, text = run_capacity(spec_from_options(opts))
    elif cmd == "blocklength":
        etas = args.eta or [0.7, 0.8, 0.9]
        _, text = run_blocklength(spec_from_options(opts), etas)
    elif cmd == "gamma-product":
        params = GammaProductParams(args.k, args.theta, args.copies)
        if args.log_grid:
            z = np.logspace(np.log10(args.z_min), np.log10(args.z_max), args.points)
        else:
            z = np.linspace(args.z_min, args.z_max, args.points)
        _, text = run_gamma_product(spec_from_options(opts), params, z)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown command {cmd!r}")
    if not opts["out"]:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except NumericError as exc:
        print(f"fblris: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, FblrisError, OSError, json.JSONDecodeError) as exc:
        print(f"fblris: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
