"""Sweep the delay from 0 to h_final and keep every zero in Re(s) > sigma0."""

from __future__ import annotations

import bisect
import cmath
import logging
import math
from dataclasses import dataclass, field

from .continuation import (Advance, StepStats, TraceConfig, TrajectorySample, advance,
                           newton_correct, sample_at)
from .quasipoly import eval_second
from .crossing import CrossingEvent, Region, find_crossings
from .errors import DefectPointError, InvalidInputError
from .poly import cluster_roots, find_roots
from .quasipoly import SINGULAR_RTOL, QuasiPolynomial, eval_all, eval_f

log = logging.getLogger(__name__)

BOUNDARY_MARGIN = 1e-9
EXIT_MARGIN = 1e-6
EVENT_TOL = 1e-9
ROOT_TOL = 1e-12
CLUSTER_TOL = 1e-6
SPLIT_RADIUS = 1e-4
COLLISION_GAP = 1e-11
MAX_COLLISION_ROUNDS = 1000


@dataclass
class Trajectory:
    """One traced zero.

    ``origin`` is ``"initial-root"``, ``"entered-at-event"`` (then
    ``event_id`` indexes ``TraceResult.events``) or ``"split-at-collision"``.
    ``status`` is ``"active"``, ``"exited"``, ``"merged"`` (met another zero
    at a double zero and was continued by two new trajectories) or
    ``"defect"``; ``end_h`` is the exit delay (the matching exiting event,
    else interpolated between samples), the collision delay, or the defect
    delay.
    """

    id: int
    origin: str
    samples: list[TrajectorySample]
    event_id: int | None = None
    status: str = "active"
    end_h: float | None = None
    reason: str | None = None
    next_step: float | None = None
    collision_floor: float = 0.0

    @property
    def start_h(self) -> float:
        return self.samples[0].h

    @property
    def last(self) -> TrajectorySample:
        return self.samples[-1]

    def alive_at(self, h: float) -> bool:
        if h < self.start_h:
            return False
        if self.status == "active":
            return h <= self.last.h
        if self.status == "merged":
            return h < self.end_h
        return h <= self.end_h

    def position(self, h: float) -> complex:
        """Linear interpolation between the samples bracketing ``h``."""
        hs = [x.h for x in self.samples]
        i = bisect.bisect_left(hs, h)
        if i < len(hs) and hs[i] == h:
            return self.samples[i].s
        if i == 0 or i == len(hs):
            raise ValueError(f"h={h} outside the sampled range of trajectory {self.id}")
        lo, hi = self.samples[i - 1], self.samples[i]
        t = (h - lo.h) / (hi.h - lo.h)
        return lo.s + t * (hi.s - lo.s)


@dataclass
class TraceResult:
    trajectories: list[Trajectory]
    events: list[CrossingEvent]
    delay_set: list[float]
    zeros_final: list[complex]
    max_residual: float
    q: QuasiPolynomial
    region: Region
    h_final: float
    config: TraceConfig
    stats: StepStats = field(default_factory=StepStats)
    warnings: list[str] = field(default_factory=list)

    def active_at(self, h: float) -> list[Trajectory]:
        return [t for t in self.trajectories if t.alive_at(h)]

    def active_count(self, h: float) -> int:
        return len(self.active_at(h))

    @property
    def defects(self) -> list[Trajectory]:
        return [t for t in self.trajectories if t.status == "defect"]


def _warn(result_warnings: list[str], msg: str) -> None:
    log.warning(msg)
    result_warnings.append(msg)


def initial_seeds(q: QuasiPolynomial, sigma0: float, cfg: TraceConfig,
                  warnings: list[str]) -> list[list[TrajectorySample]]:
    """Starting samples for the zeros of a + b with Re >= sigma0 - margin.

    A simple root starts at h = 0. A cluster (multiple root) cannot be
    followed from h = 0 since f_s vanishes there; each member is instead
    displaced by SPLIT_RADIUS along equally spaced directions and polished at
    h = h_step_min.
    """
    p0 = q.characteristic_at_zero
    if p0.degree < 1:
        return []
    roots = find_roots(p0, ROOT_TOL)
    seeds = []
    for group in cluster_roots(roots, CLUSTER_TOL):
        center = sum(group) / len(group)
        if abs(center.imag) < CLUSTER_TOL:
            center = complex(center.real, 0.0)
        if center.real < sigma0 - BOUNDARY_MARGIN:
            continue
        m = len(group)
        start = TrajectorySample(0.0, center, abs(eval_f(q, center, 0.0)))
        _, fs, _ = eval_all(q, center, 0.0)
        if m == 1 and abs(fs) > SINGULAR_RTOL * q.scale:
            seeds.append([start])
            continue
        h1 = cfg.h_step_min
        for k in range(m):
            rot = cmath.exp(2j * math.pi * k / m)
            guess = center + SPLIT_RADIUS * complex(round(rot.real, 15), round(rot.imag, 15))
            try:
                s, res, _ = newton_correct(q, guess, h1, 50, 1e-3 * cfg.eps_tz)
            except DefectPointError as exc:
                _warn(warnings, f"could not split multiple root at {center}: {exc}")
                s, res = guess, abs(eval_f(q, guess, h1))
            seeds.append([start, TrajectorySample(h1, s, res)])
    return seeds


def _exit_delay(prev: TrajectorySample, cur: TrajectorySample, sigma0: float) -> float:
    dr = cur.s.real - prev.s.real
    if dr >= 0:
        return cur.h
    t = (sigma0 - prev.s.real) / dr
    t = min(max(t, 0.0), 1.0)
    return prev.h + t * (cur.h - prev.h)


def trace_all(q: QuasiPolynomial, region: Region, h_final: float,
              cfg: TraceConfig | None = None) -> TraceResult:
    """Trace every zero in Re(s) > sigma0 from h = 0 to ``h_final``."""
    if not h_final > 0:
        raise InvalidInputError("h_final must be positive")
    cfg = cfg or TraceConfig()
    sigma0 = region.sigma0
    warnings: list[str] = []
    stats = StepStats()

    events = find_crossings(q, region, h_final)
    entering = [(i, e) for i, e in enumerate(events) if e.entering]
    delay_set = [0.0]
    for _, e in entering:
        if e.delay - delay_set[-1] > EVENT_TOL:
            delay_set.append(e.delay)

    trajectories: list[Trajectory] = []

    def new_traj(origin, samples, event_id=None):
        t = Trajectory(len(trajectories), origin, samples, event_id)
        trajectories.append(t)
        return t

    exits = [e for e in events if not e.entering]
    for samples in initial_seeds(q, sigma0, cfg, warnings):
        t = new_traj("initial-root", samples)
        if len(samples) > 1:
            t.next_step = max(cfg.h_step_min, samples[-1].h - samples[0].h)
        _check_exit(t, sigma0, exits)

    stops = delay_set[1:] + ([h_final] if h_final - delay_set[-1] > EVENT_TOL else [])
    for h_next in stops:
        pending = [t for t in trajectories if t.status == "active" and t.last.h < h_next]
        for _ in range(MAX_COLLISION_ROUNDS):
            if not pending:
                break
            reports = []
            for t in pending:
                if t.status != "active":
                    continue
                out = advance(q, t.last, h_next, cfg, dh=t.next_step,
                              stop_below=sigma0 - EXIT_MARGIN,
                              not_before=max(t.start_h, t.collision_floor) + COLLISION_GAP)
                _absorb(t, out, sigma0, warnings, exits)
                stats.merge(out.stats)
                if out.collision is not None:
                    reports.append((t, out.collision))
            pending = _resolve_collisions(q, reports, trajectories, new_traj, cfg, warnings,
                                          sigma0, exits)
        else:
            _warn(warnings, f"gave up resolving collisions before h={h_next!r}")
        for idx, ev in entering:
            if abs(ev.delay - h_next) > EVENT_TOL:
                continue
            conj = [1, -1] if ev.omega > 0 else [1]
            for sign in conj:
                s = complex(sigma0, sign * ev.omega)
                new_traj("entered-at-event", [sample_at(q, s, h_next)], idx)
        _proximity_check(trajectories, h_next, cfg, warnings)

    zeros_final = [t.last.s for t in trajectories
                   if t.status == "active" and t.last.h == h_final]
    accepted = [x.residual for t in trajectories for x in t.samples]
    return TraceResult(
        trajectories=trajectories,
        events=events,
        delay_set=delay_set,
        zeros_final=zeros_final,
        max_residual=max(accepted, default=0.0),
        q=q,
        region=region,
        h_final=h_final,
        config=cfg,
        stats=stats,
        warnings=warnings,
    )


def _check_exit(t: Trajectory, sigma0: float, exits: list[CrossingEvent]) -> None:
    """Mark ``t`` exited once its last sample is left of the boundary.

    The exit delay is taken from the matching exiting crossing event when
    one falls inside the last step, else interpolated linearly.
    """
    if t.last.s.real >= sigma0 - EXIT_MARGIN:
        return
    prev = t.samples[-2] if len(t.samples) > 1 else t.last
    t.status = "exited"
    guess = _exit_delay(prev, t.last, sigma0)
    w = abs(prev.s.imag + (t.last.s.imag - prev.s.imag)
            * ((guess - prev.h) / (t.last.h - prev.h) if t.last.h > prev.h else 0.0))
    near = [e for e in exits if prev.h - EVENT_TOL <= e.delay <= t.last.h + EVENT_TOL]
    if near:
        best = min(near, key=lambda e: abs(e.omega - w))
        t.end_h = best.delay
    else:
        t.end_h = guess


def _absorb(t: Trajectory, out: Advance, sigma0: float, warnings: list[str],
            exits: list[CrossingEvent]) -> None:
    t.samples.extend(out.samples[1:])
    t.next_step = out.next_step
    if out.defect is not None:
        t.status = "defect"
        t.end_h = t.last.h
        t.reason = out.defect
        _warn(warnings, f"trajectory {t.id} abandoned at h={t.last.h!r}: {out.defect}")
    elif out.stopped:
        _check_exit(t, sigma0, exits)


def _proximity_check(trajectories: list[Trajectory], h: float, cfg: TraceConfig,
                     warnings: list[str]) -> None:
    live = [t for t in trajectories if t.status == "active" and t.last.h == h]
    for i, t1 in enumerate(live):
        for t2 in live[i + 1:]:
            if abs(t1.last.s - t2.last.s) < 10 * cfg.eps_tz:
                _warn(warnings, f"trajectories {t1.id} and {t2.id} are within "
                                f"{abs(t1.last.s - t2.last.s):.2e} at h={h!r}")


def _trim(t: Trajectory, hc: float, xc: complex, q: QuasiPolynomial) -> None:
    while len(t.samples) > 1 and t.samples[-1].h >= hc:
        t.samples.pop()
    if t.samples[-1].h < hc:
        t.samples.append(sample_at(q, xc, hc))
    t.status = "merged"
    t.end_h = hc


def unfold_double_zero(q: QuasiPolynomial, xc: float, hc: float,
                       cfg: TraceConfig) -> list[TrajectorySample]:
    """The two zeros born just after the double zero (xc, hc).

    The quadratic model f ~ f_ss ds^2 / 2 + f_h dh gives
    ds = +-sqrt(-2 f_h dh / f_ss): real for a pair that becomes two real
    zeros, imaginary for two real zeros that become a conjugate pair. dh is
    picked so that the zeros start SPLIT_RADIUS apart from xc; each guess is
    then Newton-polished at hc + dh.
    """
    s = complex(xc, 0.0)
    _, _, fh = eval_all(q, s, hc)
    fss, _ = eval_second(q, s, hc)
    dh = SPLIT_RADIUS ** 2 * abs(fss) / (2.0 * abs(fh)) if fh != 0 else SPLIT_RADIUS ** 2
    dh = min(max(dh, 1e-10), 1e-4)
    root = cmath.sqrt(-2.0 * fh * dh / fss)
    if abs(root.imag) < 1e-3 * abs(root):
        root = complex(root.real, 0.0)
    elif abs(root.real) < 1e-3 * abs(root):
        root = complex(0.0, root.imag)
    h1 = hc + dh
    out = []
    for guess in (s + root, s - root):
        z, res, _ = newton_correct(q, guess, h1, 50, 1e-3 * cfg.eps_tz)
        out.append(TrajectorySample(h1, z, res))
    return out


def _resolve_collisions(q, reports, trajectories, new_traj, cfg, warnings,
                        sigma0, exits) -> list[Trajectory]:
    """End colliding pairs at the double zero and start the two continuing branches.

    A double zero left of the boundary means the trajectory has already left
    the region, so it is closed as an exit instead.
    """
    spawned: list[Trajectory] = []
    used: set[int] = set()
    for t, (hc, xc) in reports:
        if t.id in used:
            continue
        if xc < sigma0 - EXIT_MARGIN:
            _trim(t, hc, complex(xc, 0.0), q)
            t.status = "active"
            _check_exit(t, sigma0, exits)
            used.add(t.id)
            continue
        size = max(1.0, abs(xc))
        partners = [u for u, (h2, x2) in reports
                    if u.id != t.id and u.id not in used
                    and abs(h2 - hc) <= 1e-7 * max(1.0, hc) and abs(x2 - xc) <= 1e-6 * size]
        if not partners:
            near = [u for u in trajectories
                    if u.id != t.id and u.id not in used and u.status == "active"
                    and u.start_h < hc <= u.last.h]
            near = [(abs(u.position(hc) - xc), u) for u in near]
            near = [(d, u) for d, u in near if d <= 1e-2 * size]
            if near:
                partners = [min(near, key=lambda du: du[0])[1]]
        if not partners and any(h2 < hc - EVENT_TOL for _, (h2, _) in reports):
            # an earlier collision this round spawns branches that may be the
            # partner, so step back and retry once they have caught up
            t.samples = [x for x in t.samples if x.h < hc] or t.samples[:1]
            spawned.append(t)
            used.add(t.id)
            continue
        if not partners:
            _warn(warnings, f"trajectory {t.id} reached a double zero at h={hc!r} "
                            f"with no partner; continuing through it")
            _trim(t, hc, complex(xc, 0.0), q)
            t.status = "active"
            t.end_h = None
            try:
                first = unfold_double_zero(q, xc, hc, cfg)[0]
            except (DefectPointError, ArithmeticError) as exc:
                _fail(t, hc, f"defect-point: cannot unfold double zero: {exc}", warnings)
                continue
            t.samples.append(first)
            t.next_step = max(cfg.h_step_min, first.h - hc)
            t.collision_floor = hc
            spawned.append(t)
            used.add(t.id)
            continue
        u = partners[0]
        used.update((t.id, u.id))
        xz = complex(xc, 0.0)
        _trim(t, hc, xz, q)
        _trim(u, hc, xz, q)
        try:
            branches = unfold_double_zero(q, xc, hc, cfg)
        except (DefectPointError, ArithmeticError) as exc:
            for v in (t, u):
                _fail(v, hc, f"defect-point: cannot unfold double zero: {exc}", warnings)
            continue
        if abs(branches[0].s - branches[1].s) < 0.1 * SPLIT_RADIUS:
            _warn(warnings, f"both branches leaving the double zero at h={hc!r} "
                            f"converged to the same point")
        log.info("trajectories %d and %d meet at %.12g (h=%.12g)", t.id, u.id, xc, hc)
        for b in branches:
            v = new_traj("split-at-collision", [sample_at(q, xz, hc), b])
            v.next_step = max(cfg.h_step_min, b.h - hc)
            spawned.append(v)
    return spawned


def _fail(t: Trajectory, h: float, reason: str, warnings: list[str]) -> None:
    t.status = "defect"
    t.end_h = h
    t.reason = reason
    _warn(warnings, f"trajectory {t.id} abandoned at h={h!r}: {reason}")
