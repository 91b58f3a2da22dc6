"""CSV / JSON serialisation of sample sets, curves and sweeps.

CSV files carry '#'-prefixed metadata lines (config hash, seed, ...) above a
single header row.  Floats are written with ``repr`` so reruns with the same
seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .config import SystemConfig, linear_to_db
from .montecarlo import CcdfCurve, SinrSampleSet


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def csv_text(meta: dict, header: list[str], rows) -> str:
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def read_csv(path) -> tuple[dict, list[dict]]:
    """Return (metadata, rows) of a file written by this module."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def sample_meta(ss: SinrSampleSet) -> dict:
    return {
        "config_hash": ss.config.config_hash(),
        "seed": ss.seed,
        "model": ss.model.value,
        "sinr_mode": ss.sinr_mode.value,
        "interference": ss.interference.value,
        "n_drops": ss.n_drops,
        "config": json.dumps(ss.config.to_dict(), sort_keys=True),
    }


def samples_csv(ss: SinrSampleSet) -> str:
    db = np.atleast_1d(linear_to_db(ss.samples))
    rows = ([i, _fmt(x), _fmt(d)] for i, (x, d) in enumerate(zip(ss.samples, db)))
    return csv_text(sample_meta(ss), ["drop_index", "sinr_linear", "sinr_db"], rows)


def write_samples_csv(ss: SinrSampleSet, path) -> None:
    _write(path, samples_csv(ss))


def samples_to_json(ss: SinrSampleSet) -> str:
    doc = {
        "config": ss.config.to_dict(),
        "config_hash": ss.config.config_hash(),
        "model": ss.model.value,
        "sinr_mode": ss.sinr_mode.value,
        "interference": ss.interference.value,
        "seed": ss.seed,
        "n_drops": ss.n_drops,
        "samples": [_fmt(x) if math.isinf(x) else float(x) for x in ss.samples],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def samples_from_json(text: str) -> SinrSampleSet:
    doc = json.loads(text)
    samples = [float(x) for x in doc["samples"]]
    return SinrSampleSet(np.array(samples), SystemConfig(**doc["config"]), doc["model"],
                         doc["sinr_mode"], doc["seed"], doc["n_drops"], doc["interference"])


def ccdf_csv(curve: CcdfCurve, meta: dict | None = None) -> str:
    meta = dict(meta or {})
    meta.setdefault("provenance", curve.provenance)
    if curve.label:
        meta.setdefault("label", curve.label)
    stderr = curve.stderr if curve.stderr is not None else np.zeros_like(curve.coverage)
    rows = ([_fmt(d), _fmt(t), _fmt(c), _fmt(s)] for d, t, c, s in
            zip(np.atleast_1d(linear_to_db(curve.thresholds)), curve.thresholds,
                curve.coverage, stderr))
    return csv_text(meta, ["t_db", "t_linear", "coverage", "stderr"], rows)


def write_ccdf_csv(curve: CcdfCurve, path, meta: dict | None = None) -> None:
    _write(path, ccdf_csv(curve, meta))


def curves_csv(curves: list[CcdfCurve], meta: dict | None = None) -> str:
    """Several curves in long format: label, provenance, t_db, t_linear, coverage, stderr."""
    rows = []
    for c in curves:
        stderr = c.stderr if c.stderr is not None else np.zeros_like(c.coverage)
        for d, t, cov, s in zip(np.atleast_1d(linear_to_db(c.thresholds)), c.thresholds,
                                c.coverage, stderr):
            rows.append([c.label, c.provenance, _fmt(d), _fmt(t), _fmt(cov), _fmt(s)])
    return csv_text(meta or {}, ["label", "provenance", "t_db", "t_linear", "coverage",
                                 "stderr"], rows)


def write_curves_csv(curves: list[CcdfCurve], path, meta: dict | None = None) -> None:
    _write(path, curves_csv(curves, meta))


def ccdf_from_csv(path) -> CcdfCurve:
    meta, rows = read_csv(path)
    return CcdfCurve([float(r["t_linear"]) for r in rows], [float(r["coverage"]) for r in rows],
                     meta.get("provenance", "empirical"), meta.get("label", ""),
                     np.array([float(r["stderr"]) for r in rows]))


def curves_to_json(curves: list[CcdfCurve], meta: dict | None = None) -> str:
    doc = {"meta": meta or {}, "curves": [
        {"label": c.label, "provenance": c.provenance,
         "t_linear": c.thresholds.tolist(), "coverage": c.coverage.tolist(),
         **({"stderr": c.stderr.tolist()} if c.stderr is not None else {})}
        for c in curves]}
    return json.dumps(doc, indent=1, sort_keys=True)


def table_csv(header: list[str], rows, meta: dict | None = None) -> str:
    fmt_rows = ([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row]
                for row in rows)
    return csv_text(meta or {}, header, fmt_rows)


def write_table_csv(path, header: list[str], rows, meta: dict | None = None) -> None:
    _write(path, table_csv(header, rows, meta))
