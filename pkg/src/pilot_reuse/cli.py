"""Command-line front end.

    pilot-reuse simulate   --model guard --drops 2000 --out runs/a
    pilot-reuse ccdf       --set m_antennas=500 --out runs/b
    pilot-reuse min-delta  --gamma 0.6 --threshold-db 10
    pilot-reuse throughput --t-coherence 200 500 --m-list 100 500
    pilot-reuse figure fig3 --out figs

Every command computes all results before touching the output directory, so
an invalid configuration exits non-zero without leaving partial files.
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import io as pio
from .analytic import (ccdf_theorem1, cell_throughput, solve_min_delta,
                       spectral_efficiency, y_of_delta)
from .config import SystemConfig, db_to_linear, load_config
from .geometry import DeploymentModel
from .montecarlo import CcdfCurve, Interference, SinrMode, empirical_ccdf, run_drops
from .numerics import QuadratureError
from .svg import PlotStyle, Series, render_svg

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")
RUN_DEFAULTS = {"drops": 2000, "sinr_mode": "instantaneous", "interference": "voronoi"}
# fig3 pairs simulation with the closed form, so it simulates the matching model
PRESET_DEFAULTS = {"fig3": {"drops": 10_000, "sinr_mode": "effective",
                            "interference": "exclusion_ball"}}


class InputError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    subcommand: str
    config: SystemConfig
    models: list[DeploymentModel]
    thresholds_db: np.ndarray
    n_drops: int
    seed: int
    sinr_mode: SinrMode
    interference: Interference
    out_dir: Path
    formats: tuple[str, ...]
    workers: int = 1
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.thresholds_db, dtype=float)
        if t.size == 0 or np.any(np.diff(t) <= 0):
            raise InputError("threshold grid must be non-empty and strictly ascending")
        for name, values in self.sweep.items():
            if len(values) == 0:
                raise InputError(f"sweep axis {name!r} is empty")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise InputError(f"unknown output formats {sorted(bad)}")

    @property
    def thresholds(self) -> np.ndarray:
        return db_to_linear(np.asarray(self.thresholds_db, dtype=float))


# -- output staging ------------------------------------------------------------

class Outputs:
    """Collects file contents in memory and writes them all at the end."""

    def __init__(self, out_dir: Path, formats):
        self.out_dir = Path(out_dir)
        self.formats = tuple(formats)
        self.files: dict[str, str] = {}

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            dest = self.out_dir / name
            fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, dest)
            written.append(dest)
        return written


# -- argument handling ---------------------------------------------------------

def _parse_grid(text: str) -> np.ndarray:
    """'a:b:step' (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise InputError("grid step must be positive")
            return np.round(np.arange(a, b + step / 2, step), 10)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise InputError(f"bad threshold grid {text!r}: {exc}") from None


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = yaml.safe_load(value)
    for key in ("m_antennas", "delta", "epsilon", "k_users"):
        if getattr(args, key) is not None:
            out[key] = getattr(args, key)
    return out


def _build_config(args, **fixed) -> SystemConfig:
    try:
        return load_config(args.config, **{**_overrides(args), **fixed})
    except (ValueError, TypeError, OSError, yaml.YAMLError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None


def _spec(args, config: SystemConfig, models=None, **sweep) -> ExperimentSpec:
    models = models or [DeploymentModel.parse(args.model)]
    return ExperimentSpec(args.command, config, models, _parse_grid(args.thresholds_db),
                          args.drops, args.seed, SinrMode(args.sinr_mode),
                          Interference(args.interference), Path(args.out),
                          tuple(f.strip() for f in args.format.split(",") if f.strip()),
                          args.workers, sweep)


def _run_meta(spec: ExperimentSpec, config: SystemConfig, **extra) -> dict:
    meta = {"config_hash": config.config_hash(), "seed": spec.seed}
    meta.update(extra)
    meta["config"] = json.dumps(config.to_dict(), sort_keys=True)
    return meta


# -- commands ------------------------------------------------------------------

def cmd_simulate(spec: ExperimentSpec) -> Outputs:
    out = Outputs(spec.out_dir, spec.formats)
    cfg = spec.config
    model = spec.models[0]
    ss = run_drops(cfg, model, spec.n_drops, spec.seed, spec.sinr_mode, spec.interference,
                   workers=spec.workers)
    curve = empirical_ccdf(ss.samples, spec.thresholds, label=ss.label())
    meta = pio.sample_meta(ss)
    if out.wants("csv"):
        out.add("samples.csv", pio.samples_csv(ss))
        out.add("ccdf.csv", pio.ccdf_csv(curve, meta))
    if out.wants("json"):
        out.add("samples.json", pio.samples_to_json(ss))
    if out.wants("svg"):
        out.add("ccdf.svg", render_svg(_series([curve])))
    return out


def cmd_ccdf(spec: ExperimentSpec) -> Outputs:
    out = Outputs(spec.out_dir, spec.formats)
    cfg = spec.config
    cov = np.clip(ccdf_theorem1(spec.thresholds, cfg), 0.0, 1.0)
    curve = CcdfCurve(spec.thresholds, cov, "analytic",
                      f"analytic M={cfg.m_antennas} eps={cfg.epsilon:g} delta={cfg.delta:g}")
    meta = {"config_hash": cfg.config_hash(), "provenance": "analytic",
            "config": json.dumps(cfg.to_dict(), sort_keys=True)}
    if out.wants("csv"):
        out.add("ccdf.csv", pio.ccdf_csv(curve, meta))
    if out.wants("json"):
        out.add("ccdf.json", pio.curves_to_json([curve], meta))
    if out.wants("svg"):
        out.add("ccdf.svg", render_svg(_series([curve])))
    return out


def min_delta_report(gamma: float, t_db: float, cfg: SystemConfig, delta_max: float) -> dict:
    if not 0.0 < gamma < 1.0:
        raise InputError("gamma must lie in (0, 1)")
    res = solve_min_delta(gamma, float(db_to_linear(t_db)), cfg, delta_max=delta_max)
    return {"gamma": gamma, "t_db": t_db, "delta_max": delta_max,
            "feasible": res.feasible, "delta_real": res.delta_real,
            "delta_int": res.delta_int, "y_at_delta": res.y_at_delta,
            "monotone": res.monotone, "config_hash": cfg.config_hash()}


def cmd_min_delta(spec: ExperimentSpec) -> tuple[Outputs, dict]:
    out = Outputs(spec.out_dir, spec.formats)
    s = spec.sweep
    report = min_delta_report(s["gamma"][0], s["t_db"][0], spec.config, s["delta_max"][0])
    out.add("min_delta.json", json.dumps(report, indent=1, sort_keys=True) + "\n")
    return out, report


def throughput_table(cfg: SystemConfig, m_values, tc_values, deltas):
    """Rows (m, t_c, delta, tau_0, tau_s, status) and delta_star per (m, t_c)."""
    rows, best = [], {}
    for m in m_values:
        tau0 = {}
        for d in deltas:
            c = cfg.replace(m_antennas=int(m), delta=int(d), guard_radius=None)
            tau0[d] = spectral_efficiency(lambda t, c=c: ccdf_theorem1(t, c), c.t_max)
        for tc in tc_values:
            curve = []
            for d in deltas:
                if cfg.k_users * d > tc:
                    warnings.warn(f"K*delta = {cfg.k_users * d} exceeds T_C = {tc}; "
                                  f"skipping delta = {d}", RuntimeWarning, stacklevel=2)
                    rows.append([int(m), int(tc), int(d), tau0[d], "", "skipped: K*delta > T_C"])
                    continue
                ts = cell_throughput(cfg.k_users, d, tc, tau0[d])
                rows.append([int(m), int(tc), int(d), tau0[d], ts, "ok"])
                curve.append((d, ts))
            if curve:
                best[(int(m), int(tc))] = max(curve, key=lambda p: (p[1], -p[0]))[0]
    return rows, best


def cmd_throughput(spec: ExperimentSpec) -> tuple[Outputs, dict]:
    out = Outputs(spec.out_dir, spec.formats)
    s = spec.sweep
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows, best = throughput_table(spec.config, s["m"], s["t_c"], s["delta"])
    _emit_throughput(out, "throughput", spec.config, rows, best)
    return out, best


def _emit_throughput(out: Outputs, stem: str, cfg: SystemConfig, rows, best) -> None:
    meta = {"config_hash": cfg.config_hash(),
            "delta_star": json.dumps({f"M={m},T_C={tc}": d for (m, tc), d in best.items()}),
            "config": json.dumps(cfg.to_dict(), sort_keys=True)}
    header = ["m_antennas", "t_coherence", "delta", "tau_0", "tau_s", "status"]
    if out.wants("csv"):
        out.add(f"{stem}.csv", pio.table_csv(header, rows, meta))
    if out.wants("json"):
        doc = {"meta": meta, "delta_star": [{"m_antennas": m, "t_coherence": tc, "delta_star": d}
                                            for (m, tc), d in best.items()],
               "rows": [dict(zip(header, r)) for r in rows]}
        out.add(f"{stem}.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if out.wants("svg"):
        series = []
        for (m, tc) in best:
            pts = [(r[2], r[4]) for r in rows if r[0] == m and r[1] == tc and r[5] == "ok"]
            series.append(Series(np.array([p[0] for p in pts], float),
                                 np.array([p[1] for p in pts], float), f"M={m} T_C={tc}"))
        out.add(f"{stem}.svg", render_svg(series, PlotStyle(
            x_label="pilot reuse factor", y_label="cell throughput (bit/s/Hz)", y_range=None)))


# -- figure presets ------------------------------------------------------------

FIG2_MODELS = (DeploymentModel.HEXAGONAL, DeploymentModel.GUARD_REGION, DeploymentModel.RANDOM_PPP)


def fig2_curves(base: SystemConfig, thresholds, n_drops: int, seed: int, mode: SinrMode,
                workers: int = 1) -> list[CcdfCurve]:
    curves = []
    for m in (100, 500):
        for eps in (0.0, 0.5):
            cfg = base.replace(m_antennas=m, epsilon=eps, delta=3, sigma2=0.0)
            for model in FIG2_MODELS:
                ss = run_drops(cfg, model, n_drops, seed, mode, workers=workers)
                curves.append(empirical_ccdf(ss.samples, thresholds, label=ss.label()))
    return curves


def fig3_curves(base: SystemConfig, thresholds, n_drops: int, seed: int, mode: SinrMode,
                interference: Interference, workers: int = 1) -> list[CcdfCurve]:
    curves = []
    for m in (64, 500):
        for delta in (1, 3):
            for eps in (0.0, 0.5, 1.0):
                cfg = base.replace(m_antennas=m, epsilon=eps, delta=delta, guard_radius=None)
                tag = f"M={m} eps={eps:g} delta={delta}"
                ss = run_drops(cfg, DeploymentModel.GUARD_REGION, n_drops, seed, mode,
                               interference, workers=workers)
                curves.append(empirical_ccdf(ss.samples, thresholds, label=f"sim {tag}"))
                cov = np.clip(ccdf_theorem1(thresholds, cfg), 0.0, 1.0)
                curves.append(CcdfCurve(thresholds, cov, "analytic", f"analytic {tag}"))
    return curves


def fig4_table(base: SystemConfig, deltas) -> list[list]:
    rows = []
    for m in (64, 500):
        cfg = base.replace(m_antennas=m, epsilon=0.5)
        for t_db in (10.0, 15.0):
            t = float(db_to_linear(t_db))
            rows.extend([m, t_db, float(d), float(y_of_delta(float(d), t, cfg))] for d in deltas)
    return rows


def cmd_figure(spec: ExperimentSpec, which: str) -> Outputs:
    out = Outputs(spec.out_dir, spec.formats)
    base = spec.config
    meta = _run_meta(spec, base, preset=which, sinr_mode=spec.sinr_mode.value,
                     n_drops=spec.n_drops)
    if which in ("fig2", "fig3"):
        if which == "fig2":
            curves = fig2_curves(base, spec.thresholds, spec.n_drops, spec.seed, spec.sinr_mode,
                                 spec.workers)
        else:
            meta["interference"] = spec.interference.value
            curves = fig3_curves(base, spec.thresholds, spec.n_drops, spec.seed, spec.sinr_mode,
                                 spec.interference, spec.workers)
        if out.wants("csv"):
            out.add(f"{which}.csv", pio.curves_csv(curves, meta))
        if out.wants("json"):
            out.add(f"{which}.json", pio.curves_to_json(curves, meta) + "\n")
        if out.wants("svg"):
            out.add(f"{which}.svg", render_svg(_series(curves)))
    elif which == "fig4":
        deltas = np.round(np.arange(1.0, 8.0 + 1e-9, 0.25), 10)
        rows = fig4_table(base, deltas)
        header = ["m_antennas", "t_db", "delta", "y"]
        meta.pop("seed")
        if out.wants("csv"):
            out.add("fig4.csv", pio.table_csv(header, rows, meta))
        if out.wants("json"):
            out.add("fig4.json", json.dumps({"meta": meta, "rows": [dict(zip(header, r))
                                                                     for r in rows]},
                                            indent=1, sort_keys=True) + "\n")
        if out.wants("svg"):
            series = []
            for m in (64, 500):
                for t_db in (10.0, 15.0):
                    pts = np.array([[r[2], r[3]] for r in rows if r[0] == m and r[1] == t_db])
                    series.append(Series(pts[:, 0], pts[:, 1], f"M={m} T={t_db:g} dB"))
            out.add("fig4.svg", render_svg(series, PlotStyle(
                x_label="pilot reuse factor", y_label="y(delta)", y_range=(0.0, 1.0))))
    elif which == "fig5":
        cfg = base.replace(t_max_db=21.0, epsilon=0.5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rows, best = throughput_table(cfg, (100, 500), (50, 200, 500), list(range(1, 9)))
        _emit_throughput(out, "fig5", cfg, rows, best)
    else:
        raise InputError(f"unknown figure preset {which!r}")
    return out


def _series(curves: list[CcdfCurve]) -> list[Series]:
    return [Series(c.thresholds_db, c.coverage, c.label or c.provenance,
                   dashed=c.provenance == "analytic") for c in curves]


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML file of SystemConfig fields")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config field (repeatable; wins over --config)")
    common.add_argument("--m", dest="m_antennas", type=int, help="BS antennas M")
    common.add_argument("--delta", type=float, help="pilot reuse factor")
    common.add_argument("--epsilon", type=float, help="power control fraction")
    common.add_argument("--k", dest="k_users", type=int, help="users per cell K")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--drops", type=int, help="default 2000 (10000 for fig3)")
    common.add_argument("--out", default="out")
    common.add_argument("--format", default="csv,json", help="comma list of csv,json,svg")
    common.add_argument("--model", default="guard", choices=["random", "hex", "guard"])
    common.add_argument("--sinr-mode", choices=[m.value for m in SinrMode],
                        help="default instantaneous (effective for fig3)")
    common.add_argument("--interference", choices=[i.value for i in Interference],
                        help="default voronoi (exclusion_ball for fig3)")
    common.add_argument("--thresholds-db", default="-10:30:1",
                        help="'start:stop:step' or comma list, in dB")
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="pilot-reuse",
                                description="Pilot reuse in multi-cell massive MIMO uplink")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="Monte Carlo SINR samples and CCDF")
    sub.add_parser("ccdf", parents=[common], help="closed-form coverage curve")
    md = sub.add_parser("min-delta", parents=[common], help="smallest reuse factor for a target")
    md.add_argument("--gamma", type=float, required=True)
    md.add_argument("--threshold-db", type=float, required=True)
    md.add_argument("--delta-max", type=float, default=20.0)
    tp = sub.add_parser("throughput", parents=[common], help="cell throughput versus reuse")
    tp.add_argument("--m-list", type=int, nargs="+", default=[100, 500])
    tp.add_argument("--t-coherence", type=int, nargs="+", default=[200])
    tp.add_argument("--delta-range", type=int, nargs=2, default=[1, 8], metavar=("LO", "HI"))
    fg = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    fg.add_argument("name", choices=["fig2", "fig3", "fig4", "fig5"])
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        preset = PRESET_DEFAULTS.get(getattr(args, "name", None), {})
        for key, value in {**RUN_DEFAULTS, **preset}.items():
            if getattr(args, key) is None:
                setattr(args, key, value)
        if args.drops < 1:
            raise InputError("--drops must be >= 1")
        cfg = _build_config(args)
        if args.command == "simulate":
            outputs = cmd_simulate(_spec(args, cfg))
        elif args.command == "ccdf":
            outputs = cmd_ccdf(_spec(args, cfg))
        elif args.command == "min-delta":
            outputs, report = cmd_min_delta(_spec(args, cfg, gamma=[args.gamma],
                                                  t_db=[args.threshold_db],
                                                  delta_max=[args.delta_max]))
            print(json.dumps(report, sort_keys=True))
        elif args.command == "throughput":
            lo, hi = args.delta_range
            outputs, best = cmd_throughput(_spec(args, cfg, m=args.m_list, t_c=args.t_coherence,
                                                 delta=list(range(lo, hi + 1))))
            for (m, tc), d in best.items():
                print(f"M={m} T_C={tc}: delta_star={d}")
        else:
            outputs = cmd_figure(_spec(args, cfg), args.name)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QuadratureError as exc:
        print(f"error: quadrature failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        for path in outputs.commit():
            print(path)
    except OSError as exc:
        print(f"error: could not write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
