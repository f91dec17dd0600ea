"""Following one zero of f(s, h) as the delay h increases.

The zero obeys ds/dh = -(f_h + f) / f_s. On the zero manifold the extra f
term vanishes; off it, it pulls the iterate back like a continuous Newton
flow, so |f| decays along the exact solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DefectPointError, InvalidInputError, OutOfDomainError
from .quasipoly import SINGULAR_RTOL, QuasiPolynomial, eval_all, eval_f, eval_second

RESIDUAL_FLOOR = 1e-3
# Newton only polishes predictions already this close (in units of eps_tz);
# correcting a poor prediction can land on a different zero
CORRECTOR_WINDOW = 10.0
COLLISION_REACH = 10.0


@dataclass(frozen=True)
class TraceConfig:
    eps_tz: float = 1e-3
    h_step_init: float = 1e-2
    h_step_min: float = 1e-8
    h_step_max: float = 0.1
    corrector_cap: int = 3

    def __post_init__(self):
        if not self.eps_tz > 0:
            raise InvalidInputError("eps_tz must be positive")
        if not 0 < self.h_step_min <= self.h_step_init <= self.h_step_max:
            raise InvalidInputError("need 0 < h_step_min <= h_step_init <= h_step_max")
        if self.corrector_cap < 0:
            raise InvalidInputError("corrector_cap must be >= 0")


@dataclass(frozen=True)
class TrajectorySample:
    h: float
    s: complex
    residual: float


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    corrections: int = 0

    def merge(self, other: StepStats) -> None:
        self.accepted += other.accepted
        self.rejected += other.rejected
        self.corrections += other.corrections


@dataclass
class Advance:
    """Outcome of :func:`advance`.

    ``defect`` names the failure when the trajectory had to be abandoned,
    ``stopped`` is set when the ``stop_below`` threshold was crossed.
    ``next_step`` is the step the controller would try next. ``collision``
    holds ``(h_c, x_c)`` when the zero meets another one at the real double
    zero x_c at delay h_c; samples may run past h_c and are trimmed by the
    caller.
    """

    samples: list[TrajectorySample]
    next_step: float
    defect: str | None = None
    stopped: bool = False
    collision: tuple[float, float] | None = None
    stats: StepStats = field(default_factory=StepStats)


def sample_at(q: QuasiPolynomial, s: complex, h: float) -> TrajectorySample:
    return TrajectorySample(h, s, abs(eval_f(q, s, h)))


def rhs(q: QuasiPolynomial, s: complex, h: float) -> complex:
    f, fs, fh = eval_all(q, s, h)
    if abs(fs) <= SINGULAR_RTOL * q.scale:
        raise DefectPointError(f"f_s vanishes at s={s}, h={h}")
    return -(fh + f) / fs


def frozen_rhs(q: QuasiPolynomial, s: complex, h: float) -> complex:
    """The flow with h held fixed: -f / f_s (pure Newton flow)."""
    f, fs, _ = eval_all(q, s, h)
    if abs(fs) <= SINGULAR_RTOL * q.scale:
        raise DefectPointError(f"f_s vanishes at s={s}, h={h}")
    return -f / fs


def rk4_step(q: QuasiPolynomial, s: complex, h: float, dh: float, field_fn=rhs) -> complex:
    k1 = field_fn(q, s, h)
    k2 = field_fn(q, s + 0.5 * dh * k1, h + 0.5 * dh)
    k3 = field_fn(q, s + 0.5 * dh * k2, h + 0.5 * dh)
    k4 = field_fn(q, s + dh * k3, h + dh)
    return s + dh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def newton_correct(q: QuasiPolynomial, s: complex, h: float, iterations: int,
                   target: float) -> tuple[complex, float, int]:
    """Up to ``iterations`` Newton steps at fixed h, stopping once |f| <= target."""
    f, fs, _ = eval_all(q, s, h)
    used = 0
    while used < iterations and abs(f) > target:
        if abs(fs) <= SINGULAR_RTOL * q.scale:
            raise DefectPointError(f"f_s vanishes at s={s}, h={h}")
        s = s - f / fs
        used += 1
        f, fs, _ = eval_all(q, s, h)
    return s, abs(f), used


def next_step(dh: float, residual: float, cfg: TraceConfig) -> float:
    """Step controller: dh * sqrt(eps / |f|) with |f| floored, clamped to the limits."""
    ratio = cfg.eps_tz / max(residual, RESIDUAL_FLOOR * cfg.eps_tz)
    return min(max(dh * math.sqrt(ratio), cfg.h_step_min), cfg.h_step_max)


def real_double_zero(q: QuasiPolynomial, x0: float, h0: float,
                     max_iter: int = 40) -> tuple[float, float] | None:
    """Solve f = f_s = 0 for real x and h >= 0 by Newton on the real 2x2 system.

    For real x both f and f_s are real, so real double zeros are generic
    events of the one-parameter family (a conjugate pair turning into two
    real zeros or back). Returns ``(x, h)`` or None.
    """
    x, h = float(x0), float(h0)
    try:
        for _ in range(max_iter):
            f, fs, fh = eval_all(q, complex(x), h)
            fss, fsh = eval_second(q, complex(x), h)
            j00, j01, j10, j11 = fs.real, fh.real, fss.real, fsh.real
            det = j00 * j11 - j01 * j10
            if det == 0 or not math.isfinite(det):
                return None
            dx = (f.real * j11 - fs.real * j01) / det
            dh = (j00 * fs.real - j10 * f.real) / det
            x, h = x - dx, h - dh
            if not (math.isfinite(x) and math.isfinite(h)) or h < 0:
                return None
            if abs(dx) <= 1e-14 * max(1.0, abs(x)) and abs(dh) <= 1e-14 * max(1.0, abs(h)):
                break
        f, fs, _ = eval_all(q, complex(x), h)
    except (InvalidInputError, OutOfDomainError, OverflowError, ZeroDivisionError):
        return None
    size = q.scale * max(1.0, abs(x)) ** q.a.degree
    if h < 0 or abs(f) > 1e-9 * size or abs(fs) > 1e-6 * size:
        return None
    return x, h


def collision_ahead(q: QuasiPolynomial, s0: complex, s1: complex, h1: float,
                    not_before: float, horizon: float) -> tuple[float, float] | None:
    """A real double zero the trajectory passed, or is about to pass, on the way s0 -> s1.

    Only looked for when the quadratic model puts a double zero (f_s = 0)
    within COLLISION_REACH steps of s1. Newton is started from that model
    point and from s1 itself; a candidate must fit the local picture of a
    double zero, in which the zeros sit at x +- sqrt(c (hc - h)) with
    c = -2 f_h / f_ss, so the distance from s1 and the current speed both
    follow from c.
    """
    move = abs(s1 - s0)
    if move == 0:
        return None
    try:
        _, fs, _ = eval_all(q, s1, h1)
        fss, _ = eval_second(q, s1, h1)
    except (OutOfDomainError, OverflowError):
        return None
    if fss == 0:
        return None
    reach = abs(fs / fss)
    if reach > COLLISION_REACH * move:
        return None
    # the model point must also be within reach of the real axis
    if abs((s1 - fs / fss).imag) > COLLISION_REACH * move:
        return None
    for x0 in ((s1 - fs / fss).real, s1.real):
        found = real_double_zero(q, x0, h1)
        if found is not None and _fits_double_zero(q, s1, h1, found, reach, move,
                                                   not_before, horizon):
            return found[1], found[0]
    return None


def _fits_double_zero(q, s1, h1, found, reach, move, not_before, horizon) -> bool:
    x, hc = found
    if abs(x - s1) > 3.0 * max(reach, move) or not not_before < hc <= horizon:
        return False
    try:
        _, _, fh_c = eval_all(q, complex(x), hc)
        fss_c, _ = eval_second(q, complex(x), hc)
        v = rhs(q, s1, h1)
    except (OutOfDomainError, OverflowError, DefectPointError):
        return False
    if fss_c == 0:
        return False
    c = abs(2.0 * fh_c / fss_c)
    d = abs(x - s1)
    slack = 1e-6 * max(1.0, abs(x))
    if d > 3.0 * math.sqrt(c * abs(h1 - hc)) + slack:
        return False
    if hc > h1 and d > slack:
        # approaching: speed c / (2 d) directed at x
        if (x - s1.real) * v.real <= 0:
            return False
        ratio = abs(v) * 2.0 * d / c
        if not 0.5 <= ratio <= 2.0:
            return False
    return True


def advance(q: QuasiPolynomial, sample: TrajectorySample, h_target: float, cfg: TraceConfig,
            dh: float | None = None, stop_below: float | None = None,
            not_before: float | None = None) -> Advance:
    """Integrate from ``sample`` to exactly ``h_target``.

    The returned samples start with ``sample`` itself. Each step is a
    classical RK4 step, followed by at most ``cfg.corrector_cap`` Newton
    corrections when the residual exceeds ``eps_tz`` (but not
    CORRECTOR_WINDOW * eps_tz); a step that still fails is rejected and
    halved. The step controller uses the residual of the RK4 prediction,
    before correction.

    With ``stop_below`` set, integration stops after the first accepted
    sample whose real part is below that value. With ``not_before`` set,
    every step also checks for a collision with another zero at a real
    double zero later than ``not_before`` (see :func:`collision_ahead`).
    """
    if h_target < sample.h:
        raise InvalidInputError(f"h_target {h_target} lies before the sample at {sample.h}")
    samples = [sample]
    stats = StepStats()
    step = cfg.h_step_init if dh is None else dh
    if h_target == sample.h:
        return Advance(samples, step, stats=stats)
    if sample.residual > cfg.eps_tz:
        raise InvalidInputError(
            f"start residual {sample.residual:.3e} exceeds eps_tz {cfg.eps_tz:.3e}")

    h, s = sample.h, sample.s
    while h < h_target:
        landing = h + step >= h_target or h_target - (h + step) < cfg.h_step_min
        trial = h_target - h if landing else step
        h_new = h_target if landing else h + trial
        try:
            s_new = rk4_step(q, s, h, trial)
            predicted = abs(eval_f(q, s_new, h_new))
            residual, used = predicted, 0
            if cfg.eps_tz < residual <= CORRECTOR_WINDOW * cfg.eps_tz and cfg.corrector_cap > 0:
                s_new, residual, used = newton_correct(
                    q, s_new, h_new, cfg.corrector_cap, cfg.eps_tz)
        except DefectPointError as exc:
            hit = _stuck_collision(q, s, h, h + trial, not_before)
            if hit is not None:
                return Advance(samples, step, collision=hit, stats=stats)
            return Advance(samples, step, defect=f"defect-point: {exc}", stats=stats)
        except (OutOfDomainError, OverflowError, ZeroDivisionError) as exc:
            return Advance(samples, step, defect=f"numeric-failure: {exc}", stats=stats)
        stats.corrections += used
        if not residual <= cfg.eps_tz:
            stats.rejected += 1
            if trial / 2 < cfg.h_step_min:
                hit = _stuck_collision(q, s, h, h + trial, not_before)
                if hit is not None:
                    return Advance(samples, step, collision=hit, stats=stats)
                return Advance(samples, step,
                               defect=f"step-underflow at h={h!r} (residual {residual:.3e})",
                               stats=stats)
            step = trial / 2
            continue
        stats.accepted += 1
        s_old = s
        h, s = h_new, s_new
        samples.append(TrajectorySample(h, s, residual))
        if not landing or trial >= step:
            step = next_step(trial, predicted, cfg)
        if stop_below is not None and s.real < stop_below:
            return Advance(samples, step, stopped=True, stats=stats)
        if not_before is not None:
            hit = collision_ahead(q, s_old, s, h, not_before, min(h + step, h_target))
            if hit is not None:
                return Advance(samples, step, collision=hit, stats=stats)
    return Advance(samples, step, stats=stats)


def _stuck_collision(q, s, h, h_limit, not_before):
    if not_before is None:
        return None
    found = real_double_zero(q, s.real, h)
    if found is None or not not_before < found[1] <= h_limit:
        return None
    if abs(found[0] - s) > 1e-2 * max(1.0, abs(s)):
        return None
    return found[1], found[0]


def integrate_fixed(q: QuasiPolynomial, s0: complex, h0: float, h1: float,
                    dh: float) -> list[TrajectorySample]:
    """Plain fixed-step RK4 with neither corrector nor controller."""
    n = max(1, round((h1 - h0) / dh))
    out = [sample_at(q, s0, h0)]
    s = s0
    for i in range(n):
        h = h0 + i * (h1 - h0) / n
        s = rk4_step(q, s, h, (h1 - h0) / n)
        out.append(sample_at(q, s, h0 + (i + 1) * (h1 - h0) / n))
    return out
