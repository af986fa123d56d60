"""Command-line front end: ``phaselag {spectrum,resolvent-sweep,gevrey-fit,evolve,abscissa}``.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical failure.
A ``report.json`` is written for every run, including failed ones.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import analysis, config, linalg, modal, radial, timeevo
from .model import ValidationError
from .svg import Axes, Series, emit_svg

SCHEMA_VERSION = 1
COMMANDS = ("spectrum", "resolvent-sweep", "gevrey-fit", "evolve", "abscissa")
ENV_PREFIX = "PHASELAG_"

SWEEP_HEADER = ("gamma", "resolvent_norm", "gamma_times_norm")
SPECTRUM_HEADER = ("re", "im", "block_index")
EVOLVE_HEADER = ("t", "energy", "dissipation_1", "dissipation_2", "norm_ratio")


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def _num(v) -> str:
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


class Writer:
    """Atomic artifact writer bound to one output directory."""

    def __init__(self, directory: str, svg: bool = True):
        self.dir = directory
        self.svg = svg
        self.artifacts: dict[str, str] = {}
        os.makedirs(directory, exist_ok=True)
        if not os.access(directory, os.W_OK):
            raise config.ConfigError(f"output directory {directory} is not writable")

    def text(self, name: str, content: str, kind: str | None = None) -> str:
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
            os.replace(tmp, os.path.join(self.dir, name))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        if kind:
            self.artifacts[kind] = name
        return name

    def csv(self, name: str, header, rows, kind: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, (int, str)) else _num(x) for x in row])
        return self.text(name, buf.getvalue(), kind)

    def plot(self, name: str, series, axes: Axes, kind: str) -> str | None:
        if not self.svg:
            return None
        return self.text(name, emit_svg(series, axes), kind)


def build_operator(cfg: config.RunConfig, refined: bool = False):
    if cfg.case == 1:
        K = cfg.sweep.K * (2 if refined else 1)
        return modal.assemble_blocks(cfg.model, cfg.domain, K, paper_literal=cfg.paper_literal)
    try:
        grid = radial.RadialGrid(cfg.domain.R0, cfg.domain.R, cfg.sweep.h)
    except ValueError as exc:
        raise config.ConfigError(f"[sweep] h: {exc}") from None
    if refined:
        grid = radial.refine(grid)
    try:
        return radial.assemble_transmission(cfg.model, grid, paper_literal=cfg.paper_literal)
    except ValueError as exc:
        raise config.ConfigError(f"[sweep] h: {exc}") from None


def _gamma(cfg):
    s = cfg.sweep
    return analysis.log_grid(s.decade_min, s.decade_max, s.per_decade)


def _sweep(cfg, op):
    return analysis.resolvent_sweep(op, _gamma(cfg), shifted=cfg.sweep.shifted, seed=cfg.seed,
                                    workers=cfg.sweep.workers, tol=cfg.linalg.tol,
                                    maxiter=cfg.linalg.maxiter, block=cfg.linalg.block)


def _write_sweep(w: Writer, sw, name: str, kind: str) -> None:
    w.csv(f"{name}.csv", SWEEP_HEADER, zip(sw.gamma, sw.norms, sw.gamma_times_norm), kind)
    w.plot(f"{name}.svg",
           [Series("resolvent norm", sw.gamma, sw.norms),
            Series("gamma * norm", sw.gamma, sw.gamma_times_norm)],
           Axes("gamma", "norm", "Resolvent sweep", xlog=True, ylog=True), f"{kind}_plot")


class Report:
    def __init__(self, command: str, cfg_echo: dict):
        self.command = command
        self.config = cfg_echo
        self.headline: dict[str, dict] = {}
        self.flags: dict[str, bool] = {}

    def add(self, name: str, value, source: str) -> None:
        self.headline[name] = {"value": value, "source": source}

    def to_json(self, artifacts: dict, status: str, error: str | None) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "status": status,
            "error": error,
            "config": self.config,
            "headline": self.headline,
            "flags": self.flags,
            "artifacts": artifacts,
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def cmd_spectrum(cfg, w: Writer, rep: Report) -> None:
    op = build_operator(cfg)
    c0 = analysis.default_shift(op)
    spec = analysis.spectrum(op)
    rows = [(ev.real, ev.imag, k) for k, evs in enumerate(spec) for ev in evs]
    w.csv("spectrum.csv", SPECTRUM_HEADER, rows, "spectrum")
    allev = np.concatenate(spec)
    w.plot("spectrum.svg", [Series("eigenvalues", allev.real, allev.imag, kind="points")],
           Axes("Re", "Im", "Spectrum"), "spectrum_plot")
    omega = float(allev.real.max())
    rep.add("spectral_abscissa", omega, "spectrum.csv")
    rep.add("spectral_abscissa_shifted", omega - 2 * c0, "spectrum.csv")
    rep.add("c0", c0, "spectrum.csv")
    rep.add("eigenvalue_count", int(allev.size), "spectrum.csv")


def cmd_resolvent_sweep(cfg, w: Writer, rep: Report) -> None:
    op = build_operator(cfg)
    sw = _sweep(cfg, op)
    _write_sweep(w, sw, "sweep", "sweep")
    ax = analysis.verify_imaginary_axis(sw)
    rep.add("c0", sw.c0, "sweep.csv")
    rep.add("min_singular", ax.min_singular, "sweep.csv")
    rep.add("argmin_gamma", ax.argmin_gamma, "sweep.csv")
    rep.flags["imaginary_axis_inclusion"] = ax.passed
    refined = None
    if cfg.sweep.refine_check:
        refined = _sweep(cfg, build_operator(cfg, refined=True))
        _write_sweep(w, refined, "sweep_refined", "sweep_refined")
        rep.flags["imaginary_axis_inclusion"] = ax.passed and analysis.verify_imaginary_axis(refined).passed
    if cfg.case == 1:
        ind = analysis.analyticity_indicator(sw, cfg.fit.tail_decades)
        rep.add("sup_gamma_norm", ind.sup, "sweep.csv")
        rep.add("tail_slope", ind.tail_slope, "sweep.csv")
        ok = math.isfinite(ind.sup) and -0.1 <= ind.tail_slope <= 0.1
        if refined is not None:
            ind2 = analysis.analyticity_indicator(refined, cfg.fit.tail_decades)
            change = abs(ind2.sup - ind.sup) / ind.sup
            rep.add("sup_gamma_norm_refined", ind2.sup, "sweep_refined.csv")
            rep.add("sup_relative_change", change, "sweep_refined.csv")
            rep.flags["analyticity_surrogate"] = ok and change < 0.01
    else:
        _gevrey(cfg, sw, refined, rep)


def _gevrey(cfg, sw, refined, rep: Report, source: str = "sweep.csv") -> analysis.GevreyFit:
    fit = analysis.gevrey_fit(sw, cfg.fit.decades)
    rep.add("varsigma", fit.varsigma, source)
    rep.add("fit_C", fit.C, source)
    rep.add("r_squared", fit.r_squared, source)
    rep.add("fit_window", list(fit.window), source)
    if refined is not None:
        fit2 = analysis.gevrey_fit(refined, cfg.fit.decades)
        rep.add("varsigma_refined", fit2.varsigma, "sweep_refined.csv")
        rep.add("r_squared_refined", fit2.r_squared, "sweep_refined.csv")
        rep.flags["gevrey_surrogate"] = (fit.varsigma >= 0.2 and fit.r_squared >= 0.95
                                         and abs(fit2.varsigma - fit.varsigma) < 0.05)
    return fit


def read_sweep_csv(path: str) -> analysis.ResolventSweep:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise config.ConfigError(f"cannot read sweep CSV {path}: {exc}") from None
    if not rows or tuple(rows[0][:2]) != SWEEP_HEADER[:2]:
        raise config.ConfigError(f"{path}: expected header starting with gamma,resolvent_norm")
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError):
        raise config.ConfigError(f"{path}: malformed numeric row") from None
    if data.size == 0:
        raise config.ConfigError(f"{path}: no data rows")
    try:
        return analysis.ResolventSweep.from_arrays(data[:, 0], data[:, 1])
    except ValueError as exc:
        raise config.ConfigError(f"{path}: {exc}") from None


def cmd_gevrey_fit(cfg, w: Writer, rep: Report, sweep_csv: str | None = None) -> None:
    if sweep_csv is not None:
        sw = read_sweep_csv(sweep_csv)
        source = os.path.basename(sweep_csv)
        refined = None
        rep.config["sweep_csv"] = source
    else:
        op = build_operator(cfg)
        sw = _sweep(cfg, op)
        _write_sweep(w, sw, "sweep", "sweep")
        source = "sweep.csv"
        refined = None
        if cfg.sweep.refine_check:
            refined = _sweep(cfg, build_operator(cfg, refined=True))
            _write_sweep(w, refined, "sweep_refined", "sweep_refined")
    try:
        fit = _gevrey(cfg, sw, refined, rep, source)
    except ValueError as exc:
        raise config.ConfigError(f"gevrey_fit: {exc}") from None
    m = analysis._top_window(sw.gamma, cfg.fit.decades)
    g = sw.gamma[m]
    model = fit.C * g ** (-fit.varsigma)
    w.csv("fit.csv", ("gamma", "resolvent_norm", "fitted_norm"), zip(g, sw.norms[m], model), "fit")
    w.plot("fit.svg", [Series("resolvent norm", g, sw.norms[m]), Series("power-law fit", g, model)],
           Axes("gamma", "norm", "Power-law fit", xlog=True, ylog=True), "fit_plot")


def _evolve(cfg, op, dt):
    x0 = timeevo.initial_state(op, cfg.evolve.preset, seed=cfg.seed, modes=cfg.evolve.modes)
    if cfg.case == 1:
        steps = int(round(cfg.evolve.T / dt))
        return timeevo.evolve_modal(op, x0, dt * np.arange(steps + 1), workers=cfg.sweep.workers)
    return timeevo.evolve_radial(op, x0, dt, cfg.evolve.T)


def cmd_evolve(cfg, w: Writer, rep: Report) -> None:
    op = build_operator(cfg)
    c0 = analysis.default_shift(op)
    tr = _evolve(cfg, op, cfg.evolve.dt)
    ratio = timeevo.norm_ratio(tr, c0)
    w.csv("evolve.csv", EVOLVE_HEADER,
          zip(tr.times, tr.energy, tr.dissipation_1, tr.dissipation_2, ratio), "evolve")
    w.plot("evolve.svg",
           [Series("energy", tr.times, tr.energy), Series("norm ratio", tr.times, ratio)],
           Axes("t", "value", "Energy and quasi-contraction ratio"), "evolve_plot")
    res = timeevo.energy_identity_residual(tr, op, c0)
    qc = timeevo.quasi_contraction_check(tr, c0)
    rep.add("c0", c0, "evolve.csv")
    rep.add("energy_residual", res.max_relative, "evolve.csv")
    rep.add("max_norm_ratio", qc.max_ratio, "evolve.csv")
    rep.add("energy_inequality_holds", res.inequality_holds, "evolve.csv")
    rep.flags["quasi_contraction"] = qc.passed
    if cfg.evolve.refine_check:
        tr2 = _evolve(cfg, op, cfg.evolve.dt / 2)
        r2 = timeevo.energy_identity_residual(tr2, op, c0)
        w.csv("evolve_refined.csv", EVOLVE_HEADER,
              zip(tr2.times, tr2.energy, tr2.dissipation_1, tr2.dissipation_2,
                  timeevo.norm_ratio(tr2, c0)), "evolve_refined")
        factor = res.max_relative / r2.max_relative if r2.max_relative > 0 else math.inf
        rep.add("energy_residual_refined", r2.max_relative, "evolve_refined.csv")
        rep.add("residual_factor", factor, "evolve_refined.csv")
        qc2 = timeevo.quasi_contraction_check(tr2, c0)
        rep.flags["quasi_contraction"] = qc.passed and qc2.passed
        if cfg.case == 1:
            rep.flags["energy_identity"] = res.max_relative <= 1e-5 and 3.5 <= factor <= 4.5


def cmd_abscissa(cfg, w: Writer, rep: Report) -> None:
    op = build_operator(cfg)
    wnum = analysis.numerical_abscissa(op)
    c0 = max(0.0, wnum)
    shift = 2 * c0
    omega = analysis.spectral_abscissa(op, shift)
    times = np.linspace(0.0, cfg.evolve.horizon, 41)
    growth = analysis.growth_bound(op, times, shift)
    smooth = analysis.smoothing_rate(op, shift=shift)
    w.csv("growth.csv", ("t", "semigroup_norm"), zip(growth.times, growth.norms), "growth")
    w.csv("smoothing.csv", ("t", "generator_semigroup_norm"), zip(smooth.times, smooth.norms),
          "smoothing")
    w.plot("growth.svg", [Series("semigroup norm", growth.times, growth.norms)],
           Axes("t", "norm", "Semigroup growth", ylog=True), "growth_plot")
    w.plot("smoothing.svg", [Series("generator times semigroup", smooth.times, smooth.norms)],
           Axes("t", "norm", "Small-time smoothing", xlog=True, ylog=True), "smoothing_plot")
    rep.add("numerical_abscissa", wnum, "growth.csv")
    rep.add("c0", c0, "growth.csv")
    rep.add("omega_spec", omega, "growth.csv")
    rep.add("omega_0", growth.rate, "growth.csv")
    rep.add("smoothing_slope", smooth.rate, "smoothing.csv")
    if cfg.case == 1:
        rep.flags["sdg_check"] = omega != 0 and abs(growth.rate - omega) <= 0.05 * abs(omega)
        rep.flags["smoothing_slope"] = smooth.rate >= -1.1


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="phaselag",
        description="Resolvent, spectrum and energy diagnostics for phase-lag thermoelastic plates.",
        epilog=("Environment overrides (used when the flag is absent): PHASELAG_CONFIG, "
                "PHASELAG_OUT, PHASELAG_SEED, PHASELAG_CASE, PHASELAG_PAPER_LITERAL_GENERATOR=1. "
                "Exit codes: 0 ok, 2 config/validation error, 3 numerical failure."))
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="INI configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (default: [output] dir)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--case", type=int, choices=(1, 2),
                   help="1: modal plate on a rectangle, 2: radial transmission plate")
    p.add_argument("--paper-literal-generator", action="store_true", default=None,
                   help="use Theta_j instead of Theta_{j+1} in the last generator row")
    p.add_argument("--sweep-csv", metavar="PATH", help="gevrey-fit: fit an existing sweep CSV")
    return p


def _resolve_args(args) -> dict:
    case = args.case if args.case is not None else _env("CASE")
    seed = args.seed if args.seed is not None else _env("SEED")
    literal = args.paper_literal_generator
    if literal is None:
        literal = _env("PAPER_LITERAL_GENERATOR", "0").strip().lower() in ("1", "true", "yes", "on")
    try:
        case = None if case is None else int(case)
        seed = None if seed is None else int(seed)
    except ValueError:
        raise config.ConfigError("PHASELAG_CASE and PHASELAG_SEED must be integers") from None
    if case not in (None, 1, 2):
        raise config.ConfigError(f"case must be 1 or 2, got {case}")
    return dict(case=case, seed=seed, paper_literal=literal,
                out=args.out if args.out is not None else _env("OUT"))


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    cfg_path = args.config if args.config is not None else _env("CONFIG")
    out_dir = args.out or _env("OUT") or "out"
    rep = Report(args.command, {})
    w = None
    code, status, error = 0, "ok", None
    t_start = time.perf_counter()
    try:
        cfg = config.load(cfg_path, **_resolve_args(args))
        out_dir = cfg.output.dir
        rep.config = cfg.echo()
        w = Writer(out_dir, cfg.output.svg)
        if args.command == "spectrum":
            cmd_spectrum(cfg, w, rep)
        elif args.command == "resolvent-sweep":
            cmd_resolvent_sweep(cfg, w, rep)
        elif args.command == "gevrey-fit":
            cmd_gevrey_fit(cfg, w, rep, args.sweep_csv)
        elif args.command == "evolve":
            cmd_evolve(cfg, w, rep)
        else:
            cmd_abscissa(cfg, w, rep)
    except (config.ConfigError, ValidationError) as exc:
        code, status, error = 2, "config_error", str(exc)
    except linalg.LinAlgError as exc:
        code, status, error = 3, "numerical_failure", f"{type(exc).__name__}: {exc}"
    except ValueError as exc:
        code, status, error = 2, "invalid_input", str(exc)
    elapsed = time.perf_counter() - t_start

    if w is None:
        try:
            w = Writer(out_dir)
        except (OSError, config.ConfigError) as exc:
            print(f"error: {error or exc}", file=sys.stderr)
            return code or 2
    w.text("report.json", rep.to_json(dict(sorted(w.artifacts.items())), status, error))

    print(f"phaselag {args.command}: {status} ({elapsed:.2f} s)")
    for name, entry in rep.headline.items():
        print(f"  {name} = {entry['value']}  [{entry['source']}]")
    for name, ok in rep.flags.items():
        print(f"  {name}: {'PASS' if ok else 'FAIL'}")
    if error:
        print(f"error: {error}", file=sys.stderr)
    print(f"  report: {os.path.join(out_dir, 'report.json')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
