"""Acceptance checks for the primary component.

Each check prints one line, ``PASS`` or ``FAIL`` with the measured numbers,
and then asserts. Run ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py`` for the summary alone.
"""

import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import (EXAMPLE_A, EXAMPLE_B, EXAMPLE_H, EXAMPLE_SIGMA0, RANDOM_H,  # noqa: E402
                      RANDOM_SIGMA0, CROSSING_REFERENCE, FINAL_ZEROS_AS_STATED, FINAL_ZEROS_CORRECTED,
                      match_one_to_one, random_instances)
from qptrace import (QuasiPolynomial, Region, RealPolynomial, TraceConfig,  # noqa: E402
                     default_omega_max, eval_f, eval_fh, eval_fs, find_crossings, find_roots,
                     refine_zero, stability_report, trace_all)
from qptrace.cli import main as cli_main, verify_counts  # noqa: E402
from qptrace.continuation import integrate_fixed  # noqa: E402
from qptrace.serialize import read_trajectories_csv  # noqa: E402

ORACLE_DELAYS = [0.0, 0.5, 1.0, 2.0, math.pi]

_cache = {}


def _report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    # shown even when pytest captures output
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return ok


def _example():
    if "example" not in _cache:
        q = QuasiPolynomial.from_coeffs(EXAMPLE_A, EXAMPLE_B)
        region = Region(EXAMPLE_SIGMA0, default_omega_max(q, EXAMPLE_SIGMA0, EXAMPLE_H))
        t0 = time.perf_counter()
        result = trace_all(q, region, EXAMPLE_H)
        _cache["example"] = (q, region, result, time.perf_counter() - t0)
    return _cache["example"]


def _random_suite():
    if "random" not in _cache:
        out = []
        for q in random_instances():
            region = Region(RANDOM_SIGMA0, default_omega_max(q, RANDOM_SIGMA0, RANDOM_H))
            out.append((q, trace_all(q, region, RANDOM_H)))
        _cache["random"] = out
    return _cache["random"]


def check_crossing_events():
    q, region, _, _ = _example()
    t0 = time.perf_counter()
    events = find_crossings(q, region, EXAMPLE_H)
    elapsed = time.perf_counter() - t0
    worst = 0.0
    if len(events) == len(CROSSING_REFERENCE):
        worst = max(max(abs(e.omega - w), abs(e.delay - h)) for e, (w, h) in zip(events, CROSSING_REFERENCE))
    ok = len(events) == 12 and worst <= 0.01 and elapsed < 1.0
    return _report("Crossing events reproduction", ok,
                   f"{len(events)} events (want 12), worst |d(w,h)| = {worst:.4f} (<= 0.01), "
                   f"{elapsed:.3f} s (< 1 s)")


def check_final_zeros():
    _, _, result, elapsed = _example()
    zs = result.zeros_final
    ok = len(zs) == 26 and match_one_to_one(zs, FINAL_ZEROS_AS_STATED, 0.01) and elapsed < 10.0
    return _report("Final zero set reproduction (26 zeros as stated)", ok,
                   f"{len(zs)} zeros (want 26), 1-to-1 match within 0.01: "
                   f"{match_one_to_one(zs, FINAL_ZEROS_AS_STATED, 0.01)}, {elapsed:.3f} s (< 10 s)")


def check_final_zeros_corrected():
    # not a criterion: the reference row "-0.30, +-1.00j" read as one real zero and +-j
    _, _, result, _ = _example()
    zs = result.zeros_final
    ok = len(zs) == 25 and match_one_to_one(zs, FINAL_ZEROS_CORRECTED, 0.01)
    return _report("Final zero set supplementary (real -0.30 plus +-j, 25 zeros)", ok,
                   f"{len(zs)} zeros, 1-to-1 match within 0.01: "
                   f"{match_one_to_one(zs, FINAL_ZEROS_CORRECTED, 0.01)}")


def check_marginal():
    _, _, result, _ = _example()
    zs = result.zeros_final
    dj = min(abs(z - 1j) for z in zs)
    dmj = min(abs(z + 1j) for z in zs)
    rep = stability_report(result)
    dm = rep.delay_margin
    ok = dj < 1e-3 and dmj < 1e-3 and dm is not None and abs(dm - math.pi) <= 0.02
    return _report("Marginal-zero check", ok,
                   f"|z - j| = {dj:.2e}, |z + j| = {dmj:.2e} (< 1e-3), delay margin = {dm} "
                   f"(in [pi - 0.02, pi + 0.02])")


def check_residual_tube():
    q, region, result, _ = _example()
    tight = trace_all(q, region, EXAMPLE_H, TraceConfig(eps_tz=2.5e-4))
    ok = (result.max_residual < 1e-3 and not tight.defects
          and tight.max_residual < 2.5e-4)
    return _report("Residual tube", ok,
                   f"max residual {result.max_residual:.3e} (< 1e-3); with eps_tz = 2.5e-4: "
                   f"{tight.max_residual:.3e} (< 2.5e-4), defects {len(tight.defects)}")


def check_quadratic_order():
    q, region, _, _ = _example()
    ev = min(find_crossings(q, region, EXAMPLE_H), key=lambda e: abs(e.omega - 2.28))
    s0 = ev.boundary_point(EXAMPLE_SIGMA0)
    coarse = max(p.residual for p in integrate_fixed(q, s0, ev.delay, EXAMPLE_H, 1e-2))
    fine = max(p.residual for p in integrate_fixed(q, s0, ev.delay, EXAMPLE_H, 5e-3))
    ratio = coarse / fine
    return _report("Quadratic order", ratio >= 3.0,
                   f"max residual {coarse:.3e} (dh 1e-2) / {fine:.3e} (dh 5e-3) = {ratio:.2f} (>= 3)")


def check_oracle_equivalence():
    _, _, result, _ = _example()
    rows = verify_counts(result, ORACLE_DELAYS)
    bad = [r for r in rows if not r["match"]]
    detail = [f"example: traced {[r['traced'] for r in rows]} vs oracle {[r['oracle'] for r in rows]}"]
    random_delays = [h for h in ORACLE_DELAYS if h <= RANDOM_H]
    for i, (_, r) in enumerate(_random_suite()):
        rr = verify_counts(r, random_delays)
        bad += [dict(row, instance=i) for row in rr if not row["match"]]
    detail.append(f"random: 10 instances x {len(random_delays)} delays, {len(bad)} mismatches")
    return _report("Oracle equivalence", not bad, "; ".join(detail))


def check_direction():
    total, wrong = 0, 0
    for q, r in _random_suite():
        for ev in r.events:
            if not ev.entering:
                continue
            total += 1
            seed = ev.boundary_point(RANDOM_SIGMA0)
            try:
                up = refine_zero(q, ev.delay + 1e-3, seed)
                down = refine_zero(q, ev.delay - 1e-3, seed)
            except ArithmeticError:
                wrong += 1
                continue
            if not up.real > down.real:
                wrong += 1
    return _report("Direction-test soundness", wrong == 0 and total > 0,
                   f"{total} entering events, {wrong} disagree with finite differences")


def _property_failures():
    rng = np.random.default_rng(0)
    fails = []
    points = [(0.3 + 0.8j, 0.7), (-0.6 + 2.1j, 1.9), (1.1 - 0.4j, 0.25)]
    for q in random_instances(seed=11, count=10):
        for s, h in points:
            for fn in (eval_f, eval_fs, eval_fh):
                v, w = fn(q, s, h), fn(q, s.conjugate(), h)
                if abs(w - v.conjugate()) > 1e-14 * max(1.0, abs(v)):
                    fails.append(f"conjugate symmetry of {fn.__name__}")
            for exact, shift in ((eval_fs(q, s, h), lambda d: eval_f(q, s + d, h)),
                                 (eval_fh(q, s, h), lambda d: eval_f(q, s, h + d))):
                err = [abs((shift(d) - shift(-d)) / (2 * d) - exact) for d in (4e-2, 2e-2, 1e-2)]
                if err[0] < 1e-9 * max(1.0, abs(exact)):
                    continue
                for a, b in zip(err, err[1:]):
                    if not 3.0 <= a / b <= 5.0:
                        fails.append(f"gradient ratio {a / b:.2f}")
    for n in range(1, 21):
        c = rng.uniform(-2, 2, n + 1)
        c[-1] = rng.choice([-1, 1]) * rng.uniform(0.5, 2)
        p = RealPolynomial(c)
        rebuilt = np.array([1.0 + 0j])
        for root in find_roots(p, 1e-12):
            rebuilt = np.convolve(rebuilt, [-root, 1.0])
        monic = np.asarray(p.coeffs) / p.leading
        if np.max(np.abs(rebuilt - monic)) / np.max(np.abs(monic)) > 1e-9:
            fails.append(f"reconstruction degree {n}")
    with tempfile.TemporaryDirectory() as tmp:
        args = ["--a", "1,1,1", "--b", "0,1", "--sigma0=-1", "--h-final", "pi"]
        first, second = Path(tmp, "a"), Path(tmp, "b")
        codes = [cli_main(["trace", *args, "--out", str(d)]) for d in (first, second)]
        if codes != [0, 0]:
            fails.append(f"cli exit codes {codes}")
        for name in ("trajectories.csv", "events.json", "report.json"):
            if (first / name).read_bytes() != (second / name).read_bytes():
                fails.append(f"{name} differs between runs")
        text = (first / "trajectories.csv").read_text(encoding="utf-8")
        parsed = read_trajectories_csv(text)
        rows = [f"{tid},{p.h!r},{p.s.real!r},{p.s.imag!r},{p.residual!r}"
                for tid in sorted(parsed) for p in parsed[tid]]
        if "\n".join(text.splitlines()[2:]) != "\n".join(rows):
            fails.append("CSV round trip")
        doc = (first / "report.json").read_text(encoding="utf-8")
        if json.dumps(json.loads(doc), indent=2) + "\n" != doc:
            fails.append("JSON round trip")
    return fails


def check_properties():
    fails = _property_failures()
    return _report("Property suite", not fails,
                   "conjugate symmetry, gradient ratios, reconstruction (<= 1e-9), "
                   f"CSV/JSON round trip and rerun identity: {len(fails)} failures"
                   + (f" {fails[:3]}" if fails else ""))


CHECKS = [check_crossing_events, check_final_zeros, check_final_zeros_corrected, check_marginal,
          check_residual_tube, check_quadratic_order, check_oracle_equivalence,
          check_direction, check_properties]


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__ for c in CHECKS])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} passed")
    sys.exit(0 if all(results) else 1)
