"""File formats: trajectories.csv, events.json, report.json, verify.json.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces every number bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path

from .continuation import TrajectorySample
from .stability import StabilityReport
from .tracker import TraceResult

FORMAT_VERSION = 1
CSV_HEADER = ["traj_id", "h", "re", "im", "residual"]


def complex_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def trajectories_csv(result: TraceResult) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# format_version: {FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t in sorted(result.trajectories, key=lambda t: t.id):
        for x in t.samples:
            w.writerow([t.id, repr(float(x.h)), repr(float(x.s.real)),
                        repr(float(x.s.imag)), repr(float(x.residual))])
    return buf.getvalue()


def read_trajectories_csv(text: str) -> dict[int, list[TrajectorySample]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# format_version: {FORMAT_VERSION}":
        raise ValueError("missing or unsupported format_version line")
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    out: dict[int, list[TrajectorySample]] = {}
    for row in reader:
        tid, h, re, im, res = row
        out.setdefault(int(tid), []).append(
            TrajectorySample(float(h), complex(float(re), float(im)), float(res)))
    return out


def events_doc(result: TraceResult) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "sigma0": result.region.sigma0,
        "events": [asdict(e) for e in result.events],
    }


def stability_doc(rep: StabilityReport) -> dict:
    return {
        "conclusive": rep.conclusive,
        "delay_margin": rep.delay_margin,
        "near_marginal_from": rep.near_marginal_from,
        "marginal_tol": rep.marginal_tol,
        "near_marginal_band": rep.near_marginal_band,
        "notes": rep.notes,
        "points": [{"h": p.h, "abscissa": p.abscissa, "verdict": p.verdict} for p in rep.points],
    }


def report_doc(result: TraceResult, rep: StabilityReport) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "zeros_final": [complex_json(z) for z in result.zeros_final],
        "delay_set": result.delay_set,
        "max_residual": result.max_residual,
        "stability_report": stability_doc(rep),
        "trajectories": [
            {"id": t.id, "origin": t.origin, "event_id": t.event_id, "status": t.status,
             "end_h": t.end_h, "reason": t.reason, "samples": len(t.samples)}
            for t in result.trajectories
        ],
        "step_stats": asdict(result.stats),
        "warnings": result.warnings,
        "config": {
            "a_coeffs": list(result.q.a.coeffs),
            "b_coeffs": list(result.q.b.coeffs),
            "delay_free": result.q.delay_free,
            "sigma0": result.region.sigma0,
            "omega_max": result.region.omega_max,
            "h_final": result.h_final,
            "trace": asdict(result.config),
        },
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
