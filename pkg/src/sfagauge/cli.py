"""Command line front end: run spectra, compare them, dump saddles and eigen data, emit plot scripts.

Config files are flat ``section.key = value`` text, ``#`` starts a comment::

    field.e0 = 0.0834
    state.kind = p
    method.name = sfa_direct
    method.gauge = length

Exit codes: 0 success, 2 bad config or input file, 3 solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .field import PulseParams
from .quadrature import NonConvergedError
from .saddle import EmptyResultError, SaddleCoalescenceError, solve_saddles, spa_spectrum, with_state
from .sfa import spectrum as sfa_spectrum
from .spectra import Gauge, Method, SpectrumGrid, momenta_along, pair_peaks, peak_energies
from .states import BoundStateModel, StateKind

log = logging.getLogger("sfagauge")

CSV_COLUMNS = ("energy_au", "momentum_au", "theta_rad", "value", "method", "gauge", "state")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class ConfigError(ValueError):
    """Bad configuration or input file; maps to exit code 2."""


class NoPeaksError(ValueError):
    """Fewer than three peaks in a compared spectrum."""


DEFAULTS = {
    "field.e0": "0.0834",
    "field.omega": "0.056",
    "field.n_cycles": "4",
    "field.cep": "0",
    "state.kind": "s",
    "state.ip": "0.5",
    "method.name": "sfa_direct",
    "method.gauge": "length",
    "grid.e_min": "0.01",
    "grid.e_max": "1.2",
    "grid.n_points": "500",
    "grid.theta": "0",
    "tdse.dr": "0.1",
    "tdse.r_max": "400",
    "tdse.l_max": "30",
    "tdse.dt": "0.025",
    "tdse.r_c": "2.0",
    "tdse.z_eff": "auto",
    "tdse.mask_start": "0.9",
    "tdse.smooth": "false",
    "tdse.checkpoint": "",
    "output.csv": "",
    "output.plot": "",
}


@dataclass
class RunConfig:
    pulse: PulseParams
    state: BoundStateModel
    method: Method
    gauge: Gauge | None
    energies: np.ndarray
    theta: float
    tdse: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def parse_config_text(text: str) -> dict:
    values = dict(DEFAULTS)
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        values[key] = val
    return values


def _num(values, key, kind=float, positive=False, nonneg=False):
    try:
        v = kind(values[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {values[key]!r} as {kind.__name__}") from None
    if not math.isfinite(v) or (positive and v <= 0) or (nonneg and v < 0):
        raise ConfigError(f"{key}: invalid value {values[key]!r}")
    return v


def build_config(values: dict) -> RunConfig:
    try:
        pulse = PulseParams(_num(values, "field.e0", nonneg=True), _num(values, "field.omega", positive=True),
                            _num(values, "field.n_cycles", int, positive=True), _num(values, "field.cep"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field: {exc}") from None
    try:
        kind = StateKind.parse(values["state.kind"])
    except ValueError:
        raise ConfigError(f"state.kind: unknown state {values['state.kind']!r}") from None
    state = BoundStateModel(kind, _num(values, "state.ip", positive=True))
    try:
        method = Method(values["method.name"].strip().lower())
    except ValueError:
        raise ConfigError(f"method.name: unknown method {values['method.name']!r}") from None
    try:
        gauge = Gauge.parse(values["method.gauge"])
    except ValueError:
        raise ConfigError(f"method.gauge: unknown gauge {values['method.gauge']!r}") from None
    if method is Method.TDSE:
        if values["method.gauge"] not in ("", DEFAULTS["method.gauge"]):
            warnings.warn("method.gauge is ignored for tdse runs", stacklevel=2)
        gauge = None
    e_min = _num(values, "grid.e_min", positive=True)
    e_max = _num(values, "grid.e_max", positive=True)
    n = _num(values, "grid.n_points", int, positive=True)
    if e_max <= e_min or n < 2:
        raise ConfigError("grid: need e_max > e_min and n_points >= 2")
    theta = _num(values, "grid.theta")
    tdse = {
        "dr": _num(values, "tdse.dr", positive=True),
        "r_max": _num(values, "tdse.r_max", positive=True),
        "l_max": _num(values, "tdse.l_max", int, positive=True),
        "dt": _num(values, "tdse.dt", positive=True),
        "r_c": _num(values, "tdse.r_c", positive=True),
        "mask_start": _num(values, "tdse.mask_start", positive=True),
        "smooth": values["tdse.smooth"].strip().lower() in ("1", "true", "yes", "on"),
        "checkpoint": values["tdse.checkpoint"],
    }
    z = values["tdse.z_eff"].strip().lower()
    tdse["z_eff"] = None if z == "auto" else _num(values, "tdse.z_eff", positive=True)
    if not 0.5 < tdse["mask_start"] < 1:
        raise ConfigError("tdse.mask_start: must lie in (0.5, 1)")
    output = {"csv": values["output.csv"], "plot": values["output.plot"]}
    return RunConfig(pulse, state, method, gauge, np.linspace(e_min, e_max, n), theta, tdse, output)


def load_config(path) -> RunConfig:
    if path is None:
        return build_config(dict(DEFAULTS))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return build_config(parse_config_text(text))


# --------------------------------------------------------------------------
# running


def _run_tdse(cfg: RunConfig) -> SpectrumGrid:
    from .tdse import (CutCoulomb, RadialGrid, find_zeff, initial_state, load_checkpoint,
                       photoelectron_spectrum, propagate, save_checkpoint)

    t = cfg.tdse
    grid = RadialGrid.from_extent(t["dr"], t["r_max"], t["mask_start"])
    ell = 0 if cfg.state.kind is StateKind.S_EVEN else 1
    z = t["z_eff"]
    if z is None:
        z = find_zeff(cfg.state.ip, ell, t["r_c"], grid, smooth=t["smooth"])
        log.info("tuned z_eff = %.10f", z)
    pot = CutCoulomb(z, t["r_c"], t["smooth"])
    chk = Path(t["checkpoint"]) if t["checkpoint"] else None
    if chk is not None and chk.exists():
        final = load_checkpoint(chk)
    else:
        final = propagate(initial_state(pot, ell, grid, t["l_max"]), pot, cfg.pulse, grid, dt=t["dt"])
        if chk is not None:
            save_checkpoint(chk, final)
    spec = photoelectron_spectrum(final, pot, cfg.energies, cfg.theta, cfg.state.kind)
    spec.metadata.update(z_eff=z, r_c=t["r_c"], dr=t["dr"], r_max=t["r_max"], l_max=t["l_max"], dt=t["dt"])
    return spec


def run(cfg: RunConfig) -> SpectrumGrid:
    if cfg.method is Method.SFA_DIRECT:
        spec = sfa_spectrum(cfg.state, cfg.gauge, cfg.pulse, cfg.energies, cfg.theta)
    elif cfg.method is Method.SFA_SPA:
        spec = spa_spectrum(cfg.state, cfg.gauge, cfg.pulse, cfg.energies, cfg.theta)
    else:
        spec = _run_tdse(cfg)
    p = cfg.pulse
    spec.metadata.update(e0=p.e0, omega=p.omega, n_cycles=p.n_cycles, cep=p.cep, ip=cfg.state.ip)
    return spec


def _fmt(x) -> str:
    return repr(float(x))


def spectrum_csv(spec: SpectrumGrid, timestamp: str | None = None) -> str:
    """CSV text: ``#`` metadata lines, one header line, one row per energy."""
    buf = io.StringIO()
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    buf.write(f"# created {stamp}\n")
    for key in sorted(spec.metadata):
        val = spec.metadata[key]
        if isinstance(val, (list, tuple)):
            val = " ".join(_fmt(v) for v in val)
        elif isinstance(val, (float, np.floating)):
            val = _fmt(val)
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    k = spec.momenta
    kmag = np.sqrt(np.sum(k * k, axis=1))
    for e, km, v in zip(spec.energies, kmag, spec.values):
        w.writerow([_fmt(e), _fmt(km), _fmt(spec.theta), _fmt(v), spec.method.value, spec.gauge_label,
                    spec.state_kind.value])
    return buf.getvalue()


def read_spectrum_csv(path) -> SpectrumGrid:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            item = line[1:].strip()
            if "=" in item:
                key, val = item.split("=", 1)
                meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ConfigError(f"{path}: not a spectrum CSV")
    rows = rows[1:]
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    try:
        e = np.array([float(r[0]) for r in rows])
        v = np.array([float(r[3]) for r in rows])
        theta = float(rows[0][2])
        method = Method(rows[0][4])
        gauge = None if rows[0][5] == "n/a" else Gauge.parse(rows[0][5])
        kind = StateKind.parse(rows[0][6])
        return SpectrumGrid(e, theta, v, method, gauge, kind, meta)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------
# comparison


@dataclass
class ComparisonReport:
    scale_factor: float
    peak_table: list
    max_offset: float
    omega: float

    @property
    def max_offset_omega(self) -> float:
        return self.max_offset / self.omega

    def to_text(self) -> str:
        lines = [f"scale_factor={_fmt(self.scale_factor)}", f"omega={_fmt(self.omega)}",
                 f"max_offset={_fmt(self.max_offset)}", f"max_offset_omega={_fmt(self.max_offset_omega)}",
                 "peak_a,peak_b,offset,offset_omega"]
        for a, b, d in self.peak_table:
            lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(d)},{_fmt(d / self.omega)}")
        return "\n".join(lines) + "\n"


def compare(a: SpectrumGrid, b: SpectrumGrid, window, omega: float, n_peaks: int = 10) -> ComparisonReport:
    """Rescale ``b`` onto ``a`` by one constant factor and pair their peaks.

    ``scale_factor`` is ``exp(mean(log a - log b))`` on the union of both
    grids inside the window, each spectrum interpolated linearly in
    ``log``.  Peaks are paired as mutual nearest neighbours; the first
    ``n_peaks`` pairs enter ``max_offset``.
    """
    lo = max(window[0], a.energies[0], b.energies[0])
    hi = min(window[1], a.energies[-1], b.energies[-1])
    if not hi > lo:
        raise ConfigError("spectra do not overlap inside the window")
    if not math.isclose(a.theta, b.theta, abs_tol=1e-12):
        raise ConfigError(f"spectra differ in theta ({a.theta} vs {b.theta})")
    e = np.union1d(a.energies, b.energies)
    e = e[(e >= lo) & (e <= hi)]
    tiny = 1e-300
    la = np.interp(e, a.energies, np.log(np.maximum(a.values, tiny)))
    lb = np.interp(e, b.energies, np.log(np.maximum(b.values, tiny)))
    scale = float(np.exp(np.mean(la - lb)))
    pa = _window_peaks(a, lo, hi, omega)
    pb = _window_peaks(b, lo, hi, omega)
    pairs = pair_peaks(pa, pb)[:n_peaks]
    table = [(float(x), float(y), float(x - y)) for x, y in pairs]
    max_off = max((abs(d) for *_, d in table), default=0.0)
    return ComparisonReport(scale, table, max_off, omega)


def _window_peaks(spec: SpectrumGrid, lo, hi, omega):
    w = spec.window(lo, hi)
    peaks = peak_energies(w.energies, w.values, omega) if w.energies.size > 2 else np.array([])
    if peaks.size < 3:
        raise NoPeaksError(f"only {peaks.size} peaks in [{lo}, {hi}] for {w.method.value}/{w.state_kind.value}")
    return peaks


# --------------------------------------------------------------------------
# saddles and eigen data


def saddles_csv(cfg: RunConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["energy_au", "index", "t_re", "t_im", "v_z_re", "v_z_im", "phase_re", "phase_im",
                "prefactor_re", "prefactor_im", "ff_L_re", "ff_L_im", "ff_V_re", "ff_V_im", "residual"])
    for e, p in zip(cfg.energies, momenta_along(cfg.energies, cfg.theta)):
        try:
            sols = solve_saddles(p, cfg.pulse, cfg.state.ip)
        except EmptyResultError:
            continue
        for i, s in enumerate(sols):
            s = with_state(s, p, cfg.state)
            vals = [s.t_s, s.velocity[2], s.action_phase, s.prefactor, s.form_factor_L, s.form_factor_V]
            row = [_fmt(e), i]
            for v in vals:
                row += [_fmt(complex(v).real), _fmt(complex(v).imag)]
            w.writerow(row + [_fmt(s.residual)])
    return buf.getvalue()


def eigen_csv(cfg: RunConfig) -> str:
    from .tdse import CutCoulomb, RadialGrid, find_zeff, radial_eigenstate

    t = cfg.tdse
    grid = RadialGrid.from_extent(t["dr"], t["r_max"], t["mask_start"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "r_c", "z_eff", "energy_au", "target_ip"])
    for ell in (0, 1):
        z = find_zeff(cfg.state.ip, ell, t["r_c"], grid, smooth=t["smooth"])
        energy, _ = radial_eigenstate(CutCoulomb(z, t["r_c"], t["smooth"]), ell, 0, grid)
        w.writerow([ell, _fmt(t["r_c"]), _fmt(z), _fmt(energy), _fmt(cfg.state.ip)])
    return buf.getvalue()


# --------------------------------------------------------------------------
# plot scripts

_PLOT_HEAD = '''"""Plot generated by sfagauge; reads the CSV files listed below."""
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")][1:]
    return np.loadtxt(rows, delimiter=",", usecols=(0, 3))

'''


def plot_script(paths, out_image: str = "spectrum.png") -> str:
    """A standalone matplotlib script with log-scale y axis, one curve per CSV.

    Four CSVs covering s/p in both gauges get the two-panel layout: length
    gauge in the main panel, velocity gauge in the second.
    """
    if not paths:
        raise ConfigError("plot needs at least one CSV")
    specs = [read_spectrum_csv(p) for p in paths]
    labels = [f"{s.method.value} {s.gauge_label} {s.state_kind.value}" for s in specs]
    style = {StateKind.S_EVEN: "-", StateKind.P_ODD: "--"}
    fig1 = (len(specs) == 4 and {(s.gauge, s.state_kind) for s in specs}
            == {(g, k) for g in Gauge for k in StateKind})
    lines = [_PLOT_HEAD]
    if fig1:
        lines.append("fig, (ax_l, ax_v) = plt.subplots(1, 2, figsize=(10, 4))\n")
        for path, spec, label in zip(paths, specs, labels):
            ax = "ax_l" if spec.gauge is Gauge.LENGTH else "ax_v"
            lines.append(f"d = load({str(path)!r})\n")
            lines.append(f"{ax}.plot(d[:, 0], d[:, 1], {style[spec.state_kind]!r}, label={label!r})\n")
        lines.append('ax_l.set_title("length gauge")\nax_v.set_title("velocity gauge")\n')
        axes = ("ax_l", "ax_v")
    else:
        lines.append("fig, ax = plt.subplots(figsize=(7, 4))\n")
        for path, label in zip(paths, labels):
            lines.append(f"d = load({str(path)!r})\n")
            lines.append(f"ax.plot(d[:, 0], d[:, 1], label={label!r})\n")
        axes = ("ax",)
    for ax in axes:
        lines.append(f'{ax}.set_yscale("log")\n{ax}.set_xlabel("energy (a.u.)")\n'
                     f'{ax}.set_ylabel("|M|^2 (a.u.)")\n{ax}.legend()\n')
        lines.append(f'sec = {ax}.secondary_xaxis("top", functions=(lambda e: e * 27.2114, lambda v: v / 27.2114))\n'
                     'sec.set_xlabel("energy (eV)")\n')
    lines.append(f"fig.tight_layout()\nfig.savefig({out_image!r}, dpi=150)\n")
    return "".join(lines)


# --------------------------------------------------------------------------
# entry point


def _window(text):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--window: expected emin:emax, got {text!r}") from None
    if not hi > lo:
        raise ConfigError("--window: need emax > emin")
    return lo, hi


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parser():
    ap = argparse.ArgumentParser(prog="sfagauge", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "saddles", "eigen"):
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--out")
        if name == "spectrum":
            sp.add_argument("--window", help="restrict the output to emin:emax")
    cp = sub.add_parser("compare")
    cp.add_argument("csv_a")
    cp.add_argument("csv_b")
    cp.add_argument("--window", default="0:inf")
    cp.add_argument("--omega", type=float, help="photon energy; read from csv_a metadata by default")
    cp.add_argument("--peaks", type=int, default=10)
    cp.add_argument("--out")
    pp = sub.add_parser("plot")
    pp.add_argument("csv", nargs="*")
    pp.add_argument("--image", default="spectrum.png")
    pp.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "spectrum":
            cfg = load_config(args.config)
            spec = run(cfg)
            if args.window:
                spec = spec.window(*_window(args.window))
            _emit(spectrum_csv(spec), args.out or cfg.output["csv"])
        elif args.command == "compare":
            a, b = read_spectrum_csv(args.csv_a), read_spectrum_csv(args.csv_b)
            omega = args.omega or float(a.metadata.get("omega", "nan"))
            if not omega > 0:
                raise ConfigError("compare: omega missing from csv metadata; pass --omega")
            rep = compare(a, b, _window(args.window), omega, args.peaks)
            _emit(rep.to_text(), args.out)
        elif args.command == "saddles":
            _emit(saddles_csv(load_config(args.config)), args.out)
        elif args.command == "eigen":
            _emit(eigen_csv(load_config(args.config)), args.out)
        elif args.command == "plot":
            _emit(plot_script(args.csv, args.image), args.out)
    except (ConfigError, NoPeaksError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergedError, SaddleCoalescenceError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
