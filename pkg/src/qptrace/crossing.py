"""Boundary crossings of zeros through the vertical line Re(s) = sigma0."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryPoleError, DegenerateCrossingError, InvalidInputError
from .poly import RealPolynomial, cluster_roots, evaluate, find_roots, root_bound
from .quasipoly import QuasiPolynomial, eval_all, eval_f

log = logging.getLogger(__name__)

GRID_POINTS = 4096
MAX_GRID_POINTS = 2 ** 21
MAX_SCAN_TURN = math.pi / 8
BISECT_TOL = 1e-12
CROSSING_RTOL = 1e-8
COALESCE_TOL = 1e-9
TANGENT_RTOL = 1e-9


@dataclass(frozen=True)
class Region:
    """Half-plane Re(s) > sigma0, searched up to |Im s| <= omega_max."""

    sigma0: float
    omega_max: float

    def __post_init__(self):
        if not math.isfinite(self.sigma0):
            raise InvalidInputError("sigma0 must be finite")
        if not (self.omega_max > 0 and math.isfinite(self.omega_max)):
            raise InvalidInputError("omega_max must be a positive finite number")


@dataclass(frozen=True)
class CrossingEvent:
    omega: float
    delay: float
    branch: int
    entering: bool
    rt_value: float

    def boundary_point(self, sigma0: float) -> complex:
        return complex(sigma0, self.omega)


def zero_modulus_bound(q: QuasiPolynomial, sigma0: float, h_final: float) -> float:
    """Radius R such that no zero with Re(s) >= sigma0 and 0 <= h <= h_final has |s| > R.

    In that half-plane |exp(-h s)| <= M = exp(h_final * max(-sigma0, 0)), so a
    zero needs |a(s)| <= M |b(s)|. The Cauchy bound of the majorant
    |a_n| x^n - sum_k (|a_k| + M |b_k|) x^k gives R.
    """
    m = math.exp(h_final * max(-sigma0, 0.0))
    a, b = q.a.coeffs, q.b.coeffs
    lead = abs(a[-1])
    worst = 0.0
    for k in range(len(a) - 1):
        bk = abs(b[k]) if k < len(b) else 0.0
        worst = max(worst, (abs(a[k]) + m * bk) / lead)
    return 1.0 + worst


def default_omega_max(q: QuasiPolynomial, sigma0: float, h_final: float) -> float:
    """1.25 x the larger of a heuristic window and the rigorous zero modulus bound."""
    ab = q.characteristic_at_zero
    heuristic = root_bound(ab) + 2.0 * math.pi * (q.a.degree + 1) / h_final
    return 1.25 * max(heuristic, zero_modulus_bound(q, sigma0, h_final))


def delay_of_omega(q: QuasiPolynomial, sigma0: float, omega: float) -> float | None:
    """Delay from the magnitude equation, or None when it is not positive."""
    if sigma0 == 0:
        raise InvalidInputError("the magnitude equation is degenerate for sigma0 = 0")
    s = complex(sigma0, omega)
    bs = evaluate(q.b, s)
    if bs == 0:
        raise BoundaryPoleError(f"b vanishes at boundary point {s}")
    ratio = abs(evaluate(q.a, s) / bs)
    if ratio == 0:
        return None
    h = -math.log(ratio) / sigma0
    return h if h > 0 else None


def direction_test(q: QuasiPolynomial, sigma0: float, omega: float, delay: float) -> float:
    """Re[(1/s)(b'/b - a'/a - delay)] at s = sigma0 + j omega.

    Positive means the zero moves into Re(s) > sigma0 as the delay grows.
    """
    s = complex(sigma0, omega)
    if s == 0:
        raise DegenerateCrossingError("crossing at s = 0")
    av, bv = evaluate(q.a, s), evaluate(q.b, s)
    if av == 0 or bv == 0:
        raise DegenerateCrossingError(f"a or b vanishes at boundary point {s}")
    return _direction_value(q, s, delay).real


def _direction_value(q: QuasiPolynomial, s: complex, delay: float) -> complex:
    av, bv = evaluate(q.a, s), evaluate(q.b, s)
    return (evaluate(q.db, s) / bv - evaluate(q.da, s) / av - delay) / s


def phase_residual(q: QuasiPolynomial, sigma0: float, omega: float, delay: float, branch: int) -> float:
    """h w + 2 k pi + arg(-a/b), wrapped to (-pi, pi]."""
    s = complex(sigma0, omega)
    r = delay * omega + 2 * math.pi * branch + cmath.phase(-evaluate(q.a, s) / evaluate(q.b, s))
    return math.remainder(r, 2 * math.pi)


def branch_range(h_final: float, omega_max: float) -> range:
    kmax = math.ceil(h_final * omega_max / (2 * math.pi)) + 1
    return range(-kmax, kmax + 1)


def polish_crossing(q: QuasiPolynomial, sigma0: float, omega: float, delay: float,
                    iterations: int = 4) -> tuple[float, float]:
    """Newton on f(sigma0 + j w, h) = 0 in the two real unknowns (w, h).

    df/dw = j f_s and df/dh = f_h give a 2x2 real system. Steps that do not
    lower |f| are discarded, so the result is never worse than the input.
    """
    best = abs(eval_f(q, complex(sigma0, omega), delay))
    for _ in range(iterations):
        f, fs, fh = eval_all(q, complex(sigma0, omega), delay)
        jw = 1j * fs
        det = jw.real * fh.imag - fh.real * jw.imag
        if det == 0:
            break
        dw = (f.real * fh.imag - fh.real * f.imag) / det
        dh = (jw.real * f.imag - f.real * jw.imag) / det
        w_new, h_new = omega - dw, delay - dh
        if w_new < 0 or h_new <= 0:
            break
        r = abs(eval_f(q, complex(sigma0, w_new), h_new))
        if not r < best:
            break
        omega, delay, best = w_new, h_new, r
    return omega, delay


def _classify(q, sigma0, omega, delay, branch, h_final, tol) -> CrossingEvent | None:
    if omega > 0:
        omega, delay = polish_crossing(q, sigma0, omega, delay)
    if not (0 < delay <= h_final):
        return None
    s = complex(sigma0, omega)
    # f is only known to about |s|**n times its coefficient size
    if abs(eval_f(q, s, delay)) > tol * q.scale * max(1.0, abs(s)) ** q.a.degree:
        log.warning("discarding crossing candidate w=%.12g h=%.12g: residual too large", omega, delay)
        return None
    try:
        rt = direction_test(q, sigma0, omega, delay)
    except DegenerateCrossingError as exc:
        log.warning("degenerate crossing at w=%.12g h=%.12g excluded: %s", omega, delay, exc)
        return None
    if abs(rt) <= TANGENT_RTOL * abs(_direction_value(q, s, delay)):
        log.warning("tangential crossing at w=%.12g h=%.12g excluded", omega, delay)
        return None
    return CrossingEvent(float(omega), float(delay), int(branch), rt > 0, float(rt))


def scan_points(q: QuasiPolynomial, region: Region, h_final: float) -> int:
    """Grid size for the phase scan: at least GRID_POINTS, denser for wide windows.

    Where h(w) <= h_final the wrapped residual turns at roughly
    h_final + (n_a + n_b) (1 + 1/|sigma0|) radians per unit w; the grid keeps
    that below MAX_SCAN_TURN per cell so no sign change hides between samples.
    """
    rate = h_final + (q.a.degree + q.b.degree) * (1.0 + 1.0 / abs(region.sigma0))
    n = math.ceil(region.omega_max * rate / MAX_SCAN_TURN) + 1
    return int(min(max(n, GRID_POINTS), MAX_GRID_POINTS))


def _scan_nonzero_sigma(q: QuasiPolynomial, region: Region, h_final: float) -> list[tuple[float, float, int]]:
    sigma0 = region.sigma0
    a = np.asarray(q.a.coeffs)
    b = np.asarray(q.b.coeffs)

    def wrapped(w):
        s = sigma0 + 1j * np.asarray(w, dtype=float)
        av = np.polynomial.polynomial.polyval(s, a)
        bv = np.polynomial.polynomial.polyval(s, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = -av / bv
            h = -np.log(np.abs(ratio)) / sigma0
            # at a crossing -a/b * exp(j h w) = exp(-h sigma0) > 0, so its phase vanishes
            r = np.angle(ratio * np.exp(1j * h * s.imag))
        return r, h

    grid = np.linspace(0.0, region.omega_max, scan_points(q, region, h_final))
    r, h = wrapped(grid)
    found = []

    s0 = complex(sigma0, 0.0)
    b0 = evaluate(q.b, s0)
    if b0 != 0:
        ratio0 = -evaluate(q.a, s0) / b0
        if ratio0.real > 0:
            h0 = -math.log(abs(ratio0)) / sigma0
            found.append((0.0, h0, 0))

    ok = np.isfinite(r) & np.isfinite(h)
    both = ok[:-1] & ok[1:]
    # h(w) is continuous, so a cell with both ends beyond h_final or at
    # h <= 0 cannot hold a crossing that survives the delay filter
    lo_h = np.minimum(h[:-1], h[1:])
    hi_h = np.maximum(h[:-1], h[1:])
    both &= (lo_h <= h_final * (1 + 1e-9)) & (hi_h > 0)
    exact = both & (r[:-1] == 0.0)
    exact[0] = False
    change = both & (r[:-1] * r[1:] < 0) & (np.abs(r[:-1]) < math.pi / 2) & (np.abs(r[1:]) < math.pi / 2)
    for i in np.flatnonzero(exact | change):
        r0, r1 = r[i], r[i + 1]
        if r0 == 0.0 and i > 0:
            lo = hi = grid[i]
        elif r0 * r1 < 0 and abs(r0) < math.pi / 2 and abs(r1) < math.pi / 2:
            lo, hi = grid[i], grid[i + 1]
            flo = r0
            while hi - lo > BISECT_TOL * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                fm = wrapped(mid)[0]
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
        else:
            continue
        w = 0.5 * (lo + hi)
        if w == 0.0:
            continue
        hw = float(wrapped(w)[1])
        if not (0 < hw <= h_final):
            continue
        sw = complex(sigma0, w)
        raw = hw * w + cmath.phase(-evaluate(q.a, sw) / evaluate(q.b, sw))
        branch = -round(raw / (2 * math.pi))
        found.append((float(w), hw, branch))
    return found


def _imaginary_axis_crossings(q: QuasiPolynomial, region: Region, h_final: float) -> list[tuple[float, float, int]]:
    # |a(jw)|^2 - |b(jw)|^2 as a real polynomial in w
    def split(p: RealPolynomial):
        re = [0.0] * len(p.coeffs)
        im = [0.0] * len(p.coeffs)
        for k, c in enumerate(p.coeffs):
            unit = (1j) ** k
            re[k] = c * unit.real
            im[k] = c * unit.imag
        return RealPolynomial(re), RealPolynomial(im)

    ar, ai = split(q.a)
    br, bi = split(q.b)
    diff = ar * ar + ai * ai + RealPolynomial([-x for x in (br * br + bi * bi).coeffs])
    roots = find_roots(diff)
    scale = max(1.0, max(abs(r) for r in roots))
    # a multiple root (tangency of |a| and |b|) comes back as a tight cluster
    omegas = []
    for group in cluster_roots(roots, 1e-7 * scale):
        w = sum(group) / len(group)
        if abs(w.imag) <= 1e-6 * scale and 0 < w.real <= region.omega_max:
            omegas.append(w.real)
    omegas.sort()
    found = []
    for w in omegas:
        s = complex(0.0, w)
        theta = cmath.phase(-evaluate(q.a, s) / evaluate(q.b, s))
        # 0 = h w + 2 k pi + theta  =>  h = -(theta + 2 k pi) / w
        k = math.floor(-theta / (2 * math.pi))
        while True:
            h = -(theta + 2 * math.pi * k) / w
            if h > h_final:
                break
            if h > 0:
                found.append((w, h, k))
            k -= 1
    return found


def find_crossings(q: QuasiPolynomial, region: Region, h_final: float, tol: float = CROSSING_RTOL) -> list[CrossingEvent]:
    """Every boundary zero with 0 <= w <= omega_max and 0 < h(w) <= h_final.

    A candidate is kept when |f| <= tol * scale * max(1, |s|)**degree(a). Events are sorted by delay, then by
    frequency. Only w >= 0 is reported; the conjugate crossing at -w is
    implied by the real coefficients.
    """
    if h_final <= 0:
        raise InvalidInputError("h_final must be positive")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    if q.delay_free:
        return []
    if region.sigma0 == 0:
        raw = _imaginary_axis_crossings(q, region, h_final)
    else:
        raw = _scan_nonzero_sigma(q, region, h_final)
    events = []
    for w, h, k in raw:
        ev = _classify(q, region.sigma0, w, h, k, h_final, tol)
        if ev is not None:
            events.append(ev)
    events.sort(key=lambda e: (e.delay, e.omega))
    merged: list[CrossingEvent] = []
    for ev in events:
        if merged and abs(ev.delay - merged[-1].delay) <= COALESCE_TOL \
                and abs(ev.omega - merged[-1].omega) <= COALESCE_TOL:
            continue
        merged.append(ev)
    return merged
