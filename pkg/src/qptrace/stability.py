"""Stability summary derived from a traced spectrum."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .continuation import newton_correct
from .errors import DefectPointError
from .tracker import TraceResult

MARGINAL_TOL = 1e-8
NEAR_MARGINAL_BAND = 1e-2
POLISH_BAND = 5e-2
GRID_POINTS = 401


@dataclass(frozen=True)
class StabilityPoint:
    h: float
    abscissa: float | None
    verdict: str


@dataclass
class StabilityReport:
    """Rightmost traced zero per delay and what it means for Re(s) < 0.

    ``abscissa`` is restricted to the analysis region; None means the region
    holds no zero at that delay. Verdicts are ``stable``, ``marginal``
    (within ``marginal_tol`` of the imaginary axis) or ``unstable``.
    """

    sigma0: float
    conclusive: bool
    points: list[StabilityPoint]
    delay_margin: float | None
    near_marginal_from: float | None
    marginal_tol: float
    near_marginal_band: float
    notes: list[str] = field(default_factory=list)


def _verdict(x: float | None, tol: float) -> str:
    if x is None or x < -tol:
        return "stable"
    return "marginal" if x <= tol else "unstable"


def _abscissa(result: TraceResult, h: float) -> float | None:
    zs = [t.position(h) for t in result.active_at(h)]
    if not zs:
        return None
    top = max(z.real for z in zs)
    q = result.q
    best = -np.inf
    for z in zs:
        if z.real < top - POLISH_BAND:
            continue
        try:
            # traced points sit within eps_tz in |f|; polishing pins the real part
            z, _, _ = newton_correct(q, z, h, 20, 1e-14 * q.scale)
        except DefectPointError:
            pass
        best = max(best, z.real)
    return float(best)


def stability_report(result: TraceResult, grid_points: int = GRID_POINTS,
                     marginal_tol: float = MARGINAL_TOL,
                     near_marginal_band: float = NEAR_MARGINAL_BAND) -> StabilityReport:
    """Scan a delay grid (uniform plus the delay set and h_final).

    The delay margin is the first delay at which the restricted abscissa
    reaches 0: linearly interpolated where it jumps across, otherwise the
    first grid delay found marginal.
    """
    sigma0 = result.region.sigma0
    grid = set(np.linspace(0.0, result.h_final, grid_points).tolist())
    grid.update(result.delay_set)
    grid.add(result.h_final)
    points = []
    for h in sorted(grid):
        x = _abscissa(result, h)
        points.append(StabilityPoint(h, x, _verdict(x, marginal_tol)))

    notes = []
    conclusive = sigma0 < 0
    if not conclusive:
        notes.append("inconclusive-for-stability: sigma0 >= 0 hides zeros left of the boundary")

    margin = None
    prev = None
    for p in points:
        if p.verdict != "stable":
            if prev is not None and prev.abscissa is not None and p.verdict == "unstable":
                t = -prev.abscissa / (p.abscissa - prev.abscissa)
                margin = prev.h + t * (p.h - prev.h)
            else:
                margin = p.h
            break
        prev = p

    near = next((p.h for p in points
                 if p.abscissa is not None and p.abscissa >= -near_marginal_band), None)
    if near is not None:
        notes.append(f"zeros within {near_marginal_band:g} of the imaginary axis from h={near:.6g}")
    if margin is not None:
        notes.append(f"restricted abscissa reaches 0 at h={margin:.6g}")
    return StabilityReport(sigma0, conclusive, points, margin, near, marginal_tol,
                           near_marginal_band, notes)
