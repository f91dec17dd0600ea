"""Command-line front end: ``qptrace trace | verify | report``."""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import serialize
from .continuation import TraceConfig
from .crossing import Region, default_omega_max
from .errors import InvalidInputError, QPTraceError, VerificationUnavailable
from .oracle import count_zeros, region_rectangle
from .quasipoly import QuasiPolynomial
from .stability import stability_report
from .tracker import TraceResult, trace_all

log = logging.getLogger("qptrace")

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3
EXIT_MISMATCH = 4

FIELDS = ("a_coeffs", "b_coeffs", "sigma0", "h_final", "eps_tz", "omega_max", "output_dir")
_FLAG_FOR = {"a_coeffs": "a", "b_coeffs": "b", "sigma0": "sigma0", "h_final": "h_final",
             "eps_tz": "eps_tz", "omega_max": "omega_max", "output_dir": "out"}


@dataclass
class ProblemSpec:
    a_coeffs: list[float]
    b_coeffs: list[float]
    sigma0: float
    h_final: float
    eps_tz: float = 1e-3
    omega_max: float | None = None
    output_dir: Path = Path("out")

    def quasi_polynomial(self) -> QuasiPolynomial:
        return QuasiPolynomial.from_coeffs(self.a_coeffs, self.b_coeffs)

    def validate(self) -> QuasiPolynomial:
        q = self.quasi_polynomial()
        if not (math.isfinite(self.h_final) and self.h_final > 0):
            raise InvalidInputError("h_final must be a positive number")
        if not self.eps_tz > 0:
            raise InvalidInputError("eps_tz must be positive")
        if self.omega_max is not None and not self.omega_max > 0:
            raise InvalidInputError("omega_max must be positive")
        return q

    def region(self, q: QuasiPolynomial) -> Region:
        wmax = self.omega_max or default_omega_max(q, self.sigma0, self.h_final)
        return Region(self.sigma0, wmax)


def parse_real(text: str) -> float:
    """float(), plus the spellings ``pi`` and ``-pi``."""
    t = text.strip().lower()
    if t in ("pi", "+pi", "-pi"):
        return -math.pi if t.startswith("-") else math.pi
    return float(t)


def parse_coeffs(text: str) -> list[float]:
    try:
        vals = [parse_real(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse coefficients {text!r}: {exc}") from None
    if not vals:
        raise InvalidInputError("empty coefficient list")
    return vals


def read_config(path: Path) -> dict[str, str]:
    """``key = value`` lines (no section header); ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    parser.read_string("[problem]\n" + text, source=str(path))
    raw = dict(parser["problem"])
    unknown = set(raw) - set(FIELDS)
    if unknown:
        raise InvalidInputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return raw


def build_spec(args: argparse.Namespace) -> ProblemSpec:
    raw: dict[str, str] = read_config(Path(args.config)) if args.config else {}
    for name in FIELDS:
        val = getattr(args, _FLAG_FOR[name])
        if val is not None:
            raw[name] = val
    for name in ("a_coeffs", "b_coeffs", "sigma0", "h_final"):
        if name not in raw:
            raise InvalidInputError(f"missing required parameter {name}")
    try:
        return ProblemSpec(
            a_coeffs=parse_coeffs(raw["a_coeffs"]),
            b_coeffs=parse_coeffs(raw["b_coeffs"]),
            sigma0=parse_real(raw["sigma0"]),
            h_final=parse_real(raw["h_final"]),
            eps_tz=parse_real(raw.get("eps_tz", "1e-3")),
            omega_max=parse_real(raw["omega_max"]) if raw.get("omega_max") else None,
            output_dir=Path(raw.get("output_dir", "out")),
        )
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from None


def _trace(spec: ProblemSpec) -> TraceResult:
    q = spec.validate()
    return trace_all(q, spec.region(q), spec.h_final, TraceConfig(eps_tz=spec.eps_tz))


def _prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    return path


def run_trace(spec: ProblemSpec) -> int:
    result = _trace(spec)
    rep = stability_report(result)
    out = _prepare_out(spec.output_dir)
    serialize.write_text(out / "trajectories.csv", serialize.trajectories_csv(result))
    serialize.write_text(out / "events.json", serialize.dumps(serialize.events_doc(result)))
    serialize.write_text(out / "report.json", serialize.dumps(serialize.report_doc(result, rep)))
    print(f"{len(result.zeros_final)} zeros in Re(s) > {spec.sigma0:g} at h = {spec.h_final:g}; "
          f"max residual {result.max_residual:.3e}; wrote {out}")
    if result.defects:
        for t in result.defects:
            print(f"error: trajectory {t.id} failed at h={t.end_h!r}: {t.reason}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def verify_counts(result: TraceResult, delays: list[float]) -> list[dict]:
    """Traced active-zero count against the argument-principle count at each delay."""
    q, region = result.q, result.region
    rect = region_rectangle(q, region.sigma0, region.omega_max, result.h_final)
    rows = []
    for h in delays:
        traced = result.active_count(h)
        row = {"delay": h, "traced": traced}
        try:
            row["oracle"] = count_zeros(q, h, rect)
            row["match"] = row["oracle"] == traced
        except VerificationUnavailable as exc:
            row["oracle"] = None
            row["match"] = False
            row["error"] = f"verification-unavailable: {exc}"
        rows.append(row)
    return rows


def run_verify(spec: ProblemSpec, delays: list[float]) -> int:
    for h in delays:
        if not 0 <= h <= spec.h_final:
            raise InvalidInputError(f"delay {h} outside [0, h_final={spec.h_final}]")
    out = _prepare_out(spec.output_dir)
    rows = verify_counts(_trace(spec), delays) if delays else []
    doc = {"format_version": serialize.FORMAT_VERSION, "all_match": all(r["match"] for r in rows),
           "results": rows}
    serialize.write_text(out / "verify.json", serialize.dumps(doc))
    for r in rows:
        print(f"h={r['delay']:<10.6g} traced={r['traced']:<4} oracle={r['oracle']}  "
              f"{'ok' if r['match'] else 'MISMATCH'}")
    return EXIT_OK if doc["all_match"] else EXIT_MISMATCH


def run_report(spec: ProblemSpec) -> int:
    result = _trace(spec)
    rep = stability_report(result)
    print(f"zeros in Re(s) > {spec.sigma0:g} at h = {spec.h_final:g}:")
    for z in sorted(result.zeros_final, key=lambda z: (-z.real, z.imag)):
        print(f"  {z.real:+.6f} {z.imag:+.6f}j")
    print(f"crossing events: {len(result.events)} "
          f"({sum(e.entering for e in result.events)} entering)")
    print(f"max residual: {result.max_residual:.3e}")
    if rep.conclusive:
        dm = "none up to h_final" if rep.delay_margin is None else f"{rep.delay_margin:.6g}"
        print(f"delay margin estimate: {dm}")
    for note in rep.notes:
        print(f"note: {note}")
    return EXIT_NUMERIC if result.defects else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", help="coefficients of a(s), ascending, comma-separated")
    common.add_argument("--b", help="coefficients of b(s), ascending, comma-separated")
    common.add_argument("--sigma0", help="boundary abscissa of the region Re(s) > sigma0")
    common.add_argument("--h-final", dest="h_final", help="final delay (a number or pi)")
    common.add_argument("--eps-tz", dest="eps_tz", help="trajectory residual tolerance")
    common.add_argument("--omega-max", dest="omega_max", help="frequency search window")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="key = value file with the same field names")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qptrace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("trace", parents=[common], help="trace all zeros and write result files")
    v = sub.add_parser("verify", parents=[common], help="compare traced counts with the oracle")
    v.add_argument("--delays", default="", help="comma-separated delays to check")
    sub.add_parser("report", parents=[common], help="print a stability summary")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = build_spec(args)
        if args.command == "trace":
            return run_trace(spec)
        if args.command == "verify":
            delays = parse_coeffs(args.delays) if args.delays.strip() else []
            return run_verify(spec, delays)
        return run_report(spec)
    except InvalidInputError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QPTraceError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
