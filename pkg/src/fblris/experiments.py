"""Experiment orchestration: presets, runners and deterministic file output."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .bounds import (
    bound_curve,
    gaussian_capacity,
    required_blocklength,
    threshold_blocklength,
)
from .channel import SCHEMES, SystemConfig
from .errors import DomainError, InsufficientSamplesError
from .gamma_product import GammaProductParams, product_gamma_pdf
from .info_metrics import MIN_SAMPLES, InfoStats, estimate_moments
from .modulation import make_constellation

FORMATS = ("csv", "json")
DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 20240101
DEFAULT_N_GRID = (50, 2000, 10)
DEFAULT_SNR_GRID = (-20.0, 20.0, 2.0)


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str  # "curve" or "rate_vs_snr"
    t: int
    r: int
    n_ris: int
    snr_db: float = 0.0
    epsilon: float = 1e-3


PRESETS: Dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("fig1", "curve", 2, 1, 4, -5.0),
        Preset("fig2", "curve", 2, 1, 16, -5.0),
        Preset("fig3", "curve", 2, 2, 4, -5.0),
        Preset("fig5", "curve", 2, 2, 16, -5.0),
        Preset("fig555", "curve", 2, 2, 32, -10.0),
        Preset("fig6", "curve", 3, 2, 4, -5.0),
        Preset("fig66", "curve", 3, 2, 16, -5.0),
        Preset("fig8", "rate_vs_snr", 2, 1, 4),
        Preset("fig9", "rate_vs_snr", 2, 1, 32),
        Preset("fig10", "rate_vs_snr", 3, 1, 4),
    )
}


def resolve_preset(name: str) -> Tuple[Preset, Optional[str]]:
    """Look up ``fig1`` or ``fig1-bpsk`` style names; returns (preset, scheme or None)."""
    key = name.lower()
    scheme = None
    base, _, suffix = key.rpartition("-")
    if base and suffix in SCHEMES:
        key, scheme = base, suffix
    if key not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    return PRESETS[key], scheme


def make_grid(start, stop, step, integer=True):
    if step <= 0:
        raise DomainError("grid step must be positive")
    if stop < start:
        raise DomainError("grid stop must be >= start")
    if integer:
        out = list(range(int(start), int(stop) + 1, int(step)))
    else:
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        out = [round(start + i * step, 10) for i in range(count)]
    return tuple(out)


@dataclass(frozen=True)
class ExperimentSpec:
    cfg: SystemConfig
    scheme: str = "bpsk"
    n_grid: Tuple[int, ...] = make_grid(*DEFAULT_N_GRID)
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    output_path: Optional[str] = None
    format: str = "csv"
    snr_grid: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scheme", str(self.scheme).lower())
        object.__setattr__(self, "format", str(self.format).lower())
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.samples < MIN_SAMPLES:
            raise InsufficientSamplesError(f"samples must be >= {MIN_SAMPLES}, got {self.samples}")
        if not self.n_grid or self.n_grid[0] < 1 or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise DomainError("n_grid must be ascending positive integers")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise DomainError("snr grid must be ascending")

    def describe(self) -> dict:
        """JSON-serializable description embedded in every output file."""
        d = asdict(self)
        d.pop("output_path")
        d["n_grid"] = compress_grid(self.n_grid)
        d["snr_grid"] = list(self.snr_grid)
        return d


def compress_grid(values: Sequence[int]):
    """Arithmetic grids are recorded as {start, stop, step}; others verbatim."""
    values = list(values)
    if len(values) >= 3:
        step = values[1] - values[0]
        if all(b - a == step for a, b in zip(values, values[1:])):
            return {"start": values[0], "stop": values[-1], "step": step}
    return values


def fmt(x) -> str:
    """Shortest round-trip decimal for floats."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def _header_lines(kind: str, spec_desc: dict) -> List[str]:
    return [
        f"# fblris {__version__}",
        f"# command: {kind}",
        "# spec: " + json.dumps(spec_desc, sort_keys=True, separators=(",", ":")),
    ]


def render_csv(kind: str, spec_desc: dict, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    for line in _header_lines(kind, spec_desc):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def render_json(kind: str, spec_desc: dict, header: Sequence[str], rows: Sequence[Sequence], extra=None) -> str:
    doc = {
        "version": f"fblris {__version__}",
        "command": kind,
        "spec": spec_desc,
        "records": [dict(zip(header, row)) for row in rows],
    }
    if extra:
        doc.update(extra)
    return json.dumps(_json_safe(doc), sort_keys=True, indent=2) + "\n"


def emit(spec: ExperimentSpec, kind: str, header, rows, extra=None) -> str:
    """Render and (if an output path is set) write the result; returns the text."""
    desc = spec.describe()
    if spec.format == "json":
        text = render_json(kind, desc, header, rows, extra)
    else:
        text = render_csv(kind, desc, header, rows)
    if spec.output_path:
        try:
            with open(spec.output_path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write output file {spec.output_path!r}: {exc.strerror or exc}") from exc
    return text


MOMENT_HEADER = ("t", "r", "n_ris", "snr_db", "scheme", "I", "U", "T", "V", "stderr", "samples", "seed")


def _moment_row(cfg: SystemConfig, scheme: str, st: InfoStats):
    return (cfg.t, cfg.r, cfg.n_ris, float(cfg.snr_db), scheme, st.i_bits, st.u_bits2,
            st.t_bits3, st.v_bits2, st.stderr_i, st.samples, st.seed)


def moments_for(spec: ExperimentSpec, scheme: Optional[str] = None, cfg: Optional[SystemConfig] = None) -> InfoStats:
    scheme = scheme or spec.scheme
    cfg = (cfg or spec.cfg).replace(scheme=scheme)
    return estimate_moments(cfg, make_constellation(scheme, cfg), spec.samples, spec.seed)


def run_moments(spec: ExperimentSpec):
    st = moments_for(spec)
    row = _moment_row(spec.cfg, spec.scheme, st)
    text = emit(spec, "moments", MOMENT_HEADER, [row])
    return st, dict(zip(MOMENT_HEADER, row)), text


CURVE_HEADER = ("n", "ach_rate", "ach_refined", "conv_rate", "capacity")


def run_curve(spec: ExperimentSpec):
    cfg = spec.cfg.replace(scheme=spec.scheme)
    curve = bound_curve(cfg, spec.scheme, spec.n_grid, cfg.epsilon, spec.samples, spec.seed)
    rows = [(n, a, ar, c, curve.capacity_ref) for n, a, ar, c in
            zip(curve.n_values, curve.ach_rate, curve.ach_refined, curve.conv_rate)]
    text = emit(spec, "curve", CURVE_HEADER, rows, extra={"stats": asdict(curve.stats)})
    return curve, text


SNR_HEADER = ("snr_db", "capacity", "i_bpsk", "i_qpsk")


def run_rate_vs_snr(spec: ExperimentSpec):
    if not spec.snr_grid:
        raise DomainError("rate-vs-snr needs a nonempty snr grid")
    rows = []
    for snr in spec.snr_grid:
        cfg = spec.cfg.replace(snr_db=snr)
        cap = gaussian_capacity(cfg, spec.samples, spec.seed)
        rates = [moments_for(spec, scheme=s, cfg=cfg).i_bits for s in ("bpsk", "qpsk")]
        rows.append((snr, cap.mc_bits, rates[0], rates[1]))
    text = emit(spec, "rate-vs-snr", SNR_HEADER, rows)
    return rows, text


CAPACITY_HEADER = ("t", "r", "n_ris", "snr_db", "capacity_mc", "stderr", "capacity_quad", "samples", "seed")


def run_capacity(spec: ExperimentSpec):
    cfg = spec.cfg
    cap = gaussian_capacity(cfg, spec.samples, spec.seed)
    row = (cfg.t, cfg.r, cfg.n_ris, float(cfg.snr_db), cap.mc_bits, cap.stderr, cap.quad_bits,
           cap.samples, cap.seed)
    text = emit(spec, "capacity", CAPACITY_HEADER, [row])
    return cap, text


BLOCKLENGTH_HEADER = ("scheme", "eta", "I", "U", "n_required", "n_threshold")


def run_blocklength(spec: ExperimentSpec, etas: Sequence[float]):
    st = moments_for(spec)
    rows = []
    for eta in etas:
        rows.append((spec.scheme, float(eta), st.i_bits, st.dispersion,
                     required_blocklength(st, spec.cfg.epsilon, eta),
                     threshold_blocklength(st, spec.cfg.epsilon, eta)))
    text = emit(spec, "blocklength", BLOCKLENGTH_HEADER, rows)
    return rows, text


GAMMA_HEADER = ("z", "pdf")


def run_gamma_product(spec: ExperimentSpec, params: GammaProductParams, z_values: Sequence[float]):
    pdf = product_gamma_pdf(np.asarray(z_values, dtype=float), params)
    rows = list(zip((float(z) for z in z_values), (float(v) for v in np.atleast_1d(pdf))))
    desc_spec = replace(spec, n_grid=(1,), snr_grid=())
    text = emit(desc_spec, "gamma-product", GAMMA_HEADER, rows,
                extra={"params": asdict(params)})
    return rows, text


FIGURE_HEADER = ("scheme", "n", "ach_rate", "ach_refined", "conv_rate", "capacity", "I", "U")


def run_figure(spec: ExperimentSpec, preset: Preset):
    """Reproduce one figure: both schemes over the n grid (or the SNR sweep)."""
    if preset.kind == "rate_vs_snr":
        return run_rate_vs_snr(spec)
    cap = gaussian_capacity(spec.cfg, spec.samples, spec.seed)
    rows = []
    curves = {}
    for scheme in SCHEMES:
        cfg = spec.cfg.replace(scheme=scheme)
        curve = bound_curve(cfg, scheme, spec.n_grid, cfg.epsilon, spec.samples, spec.seed,
                            capacity=cap)
        curves[scheme] = curve
        for n, a, ar, c in zip(curve.n_values, curve.ach_rate, curve.ach_refined, curve.conv_rate):
            rows.append((scheme, n, a, ar, c, cap.mc_bits, curve.stats.i_bits, curve.stats.dispersion))
    text = emit(spec, f"figure {preset.name}", FIGURE_HEADER, rows)
    return curves, text


def spec_from_preset(preset: Preset, **overrides) -> ExperimentSpec:
    cfg = SystemConfig(preset.t, preset.r, preset.n_ris, preset.snr_db, preset.epsilon)
    kwargs = {"cfg": cfg}
    if preset.kind == "rate_vs_snr":
        kwargs["snr_grid"] = make_grid(*DEFAULT_SNR_GRID, integer=False)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**kwargs)

