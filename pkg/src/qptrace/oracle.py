"""Independent checks: zero counting by the argument principle, Newton refinement.

Nothing here touches the continuation code path. f and f_s are evaluated
with numpy's own polynomial routines rather than the Horner code in
:mod:`qptrace.poly`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (ContourTooCloseError, InvalidInputError, NoZeroNearSeedError,
                     PhaseAmbiguityError)
from .quasipoly import QuasiPolynomial

CLEARANCE_RTOL = 1e-6
INFLATE = 1e-3
INFLATE_ATTEMPTS = 5
MAX_REFINE = 12
MAX_NEWTON = 100
MAX_TURN = math.pi / 8


@dataclass(frozen=True)
class ContourRectangle:
    """Axis-aligned rectangle traversed counter-clockwise.

    ``segments_per_edge`` is a minimum; edges along which exp(-h s)
    oscillates quickly get more samples.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    segments_per_edge: int = 256

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidInputError("rectangle needs re_min < re_max and im_min < im_max")
        if self.segments_per_edge < 1:
            raise InvalidInputError("segments_per_edge must be >= 1")

    def inflated(self, d: float) -> ContourRectangle:
        return replace(self, re_min=self.re_min - d, re_max=self.re_max + d,
                       im_min=self.im_min - d, im_max=self.im_max + d)

    def corners(self) -> list[complex]:
        """Counter-clockwise, starting bottom-left."""
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]


def _f(q: QuasiPolynomial, s, h: float):
    s = np.asarray(s, dtype=complex)
    return npoly.polyval(s, q.a.coeffs) + npoly.polyval(s, q.b.coeffs) * np.exp(-h * s)


def _fs(q: QuasiPolynomial, s, h: float):
    s = np.asarray(s, dtype=complex)
    da = npoly.polyder(q.a.coeffs)
    db = npoly.polyder(q.b.coeffs)
    b = npoly.polyval(s, q.b.coeffs)
    return npoly.polyval(s, da) + (npoly.polyval(s, db) - h * b) * np.exp(-h * s)


def _edge_winding(q: QuasiPolynomial, h: float, z0: complex, z1: complex, n: int,
                  floor: float) -> float:
    """Accumulated phase of f along the segment z0 -> z1, refined where it jumps.

    Raises ContourTooCloseError when a refined sample gets within ``floor``
    of zero, or when refinement cannot resolve the phase (a zero sits on or
    next to the segment).
    """
    t = np.linspace(0.0, 1.0, n + 1)
    vals = _f(q, z0 + t * (z1 - z0), h)
    for _ in range(MAX_REFINE + 1):
        if np.min(np.abs(vals)) <= floor:
            raise ContourTooCloseError("a contour sample lies next to a zero")
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) > math.pi / 2
        if not bad.any():
            return float(dphi.sum())
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        mid_vals = _f(q, z0 + mids * (z1 - z0), h)
        t = np.concatenate([t, mids])
        vals = np.concatenate([vals, mid_vals])
        order = np.argsort(t, kind="stable")
        t, vals = t[order], vals[order]
    raise ContourTooCloseError(
        f"phase still jumps by more than pi/2 after {MAX_REFINE} refinements")


def _segments(h: float, z0: complex, z1: complex, minimum: int) -> int:
    # exp(-h s) turns by h * |d Im s|; keep that below MAX_TURN per segment
    # so no full phase turn can hide between two samples
    return max(minimum, math.ceil(h * abs(z1.imag - z0.imag) / MAX_TURN))


def _winding(q: QuasiPolynomial, h: float, rect: ContourRectangle) -> float:
    c = rect.corners()
    floor = CLEARANCE_RTOL * q.scale
    total = 0.0
    for i in range(4):
        z0, z1 = c[i], c[(i + 1) % 4]
        total += _edge_winding(q, h, z0, z1, _segments(h, z0, z1, rect.segments_per_edge), floor)
    return total / (2 * math.pi)


def count_zeros(q: QuasiPolynomial, h: float, rect: ContourRectangle) -> int:
    """Number of zeros of f(., h) inside ``rect`` (winding number of f around 0).

    When the contour runs too close to a zero, the rectangle is inflated by
    INFLATE on every side and retried, at most INFLATE_ATTEMPTS times.
    """
    if h < 0:
        raise InvalidInputError("delay must be non-negative")
    last: ContourTooCloseError | None = None
    for _ in range(INFLATE_ATTEMPTS + 1):
        try:
            turns = _winding(q, h, rect)
        except ContourTooCloseError as exc:
            last = exc
            rect = rect.inflated(INFLATE)
            continue
        n = round(turns)
        if abs(turns - n) >= 0.25:
            raise PhaseAmbiguityError(f"winding {turns:.3f} is not close to an integer")
        return int(n)
    raise ContourTooCloseError(f"no clear contour after {INFLATE_ATTEMPTS} inflations: {last}")


def region_rectangle(q: QuasiPolynomial, sigma0: float, omega_max: float,
                     h_final: float, segments_per_edge: int = 256) -> ContourRectangle:
    """[sigma0, sigma_right] x [-omega_max, omega_max], sigma_right right of every zero."""
    from .crossing import zero_modulus_bound

    right = max(sigma0, 0.0) + zero_modulus_bound(q, sigma0, h_final) + 1.0
    return ContourRectangle(sigma0, right, -omega_max, omega_max, segments_per_edge)


def refine_zero(q: QuasiPolynomial, h: float, seed: complex, tol: float = 1e-12) -> complex:
    """Newton iteration from ``seed`` until |f| <= tol * scale * max(1, |s|)**degree(a).

    The |s| factor tracks the round-off floor of f, which grows like |s|**n.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")

    def target(z):
        return tol * q.scale * max(1.0, abs(z)) ** q.a.degree

    s = complex(seed)
    for _ in range(MAX_NEWTON):
        f = complex(_f(q, s, h))
        if abs(f) <= target(s):
            return s
        fs = complex(_fs(q, s, h))
        if fs == 0 or not np.isfinite(fs):
            break
        s = s - f / fs
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            break
    if abs(complex(_f(q, s, h))) <= target(s):
        return s
    raise NoZeroNearSeedError(f"Newton from {seed} did not converge at h={h}")
