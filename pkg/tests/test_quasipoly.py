import cmath
import math

import numpy as np
import pytest

from qptrace import QuasiPolynomial, evaluate, eval_f, eval_fh, eval_fs, sensitivity_bound
from qptrace.errors import InvalidInputError, OutOfDomainError, SingularSensitivityError
from qptrace.quasipoly import eval_second

from conftest import random_instances

POINTS = [(0.3 + 0.8j, 0.7), (-0.6 + 2.1j, 1.9), (1.1 - 0.4j, 0.25)]


def test_eval_f_examples(example_q):
    assert abs(eval_f(example_q, 1j, math.pi)) < 1e-15
    assert eval_f(example_q, -1, 0.0) == 0


def test_eval_fs_examples(example_q):
    assert eval_fs(example_q, -1, 0.0) == 0
    assert eval_fs(example_q, 1j, 0.0) == 2 + 2j


def test_eval_fh_examples(example_q):
    assert eval_fh(example_q, 0, 1.3) == 0
    assert eval_fh(example_q, 1j, 0.0) == 1


def test_sensitivity_examples(example_q):
    assert sensitivity_bound(example_q, 0j, 0.4) == 0
    assert sensitivity_bound(example_q, 1j, 0.0) == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-15)


def test_sensitivity_singular(example_q):
    with pytest.raises(SingularSensitivityError):
        sensitivity_bound(example_q, -1 + 0j, 0.0)


@pytest.mark.parametrize("q", random_instances(seed=7, count=10))
def test_h_zero_is_a_plus_b_exactly(q):
    for s in (0.2 + 1.3j, -0.9 - 0.1j, 2.0):
        assert eval_f(q, s, 0.0) == evaluate(q.a, s) + evaluate(q.b, s)


@pytest.mark.parametrize("q", random_instances(seed=8, count=10))
def test_conjugate_symmetry(q):
    for s, h in POINTS:
        for fn in (eval_f, eval_fs, eval_fh):
            v, w = fn(q, s, h), fn(q, s.conjugate(), h)
            assert abs(w - v.conjugate()) <= 1e-14 * max(1.0, abs(v))


def _central_errors(fn, exact, deltas):
    return [abs((fn(d) - fn(-d)) / (2 * d) - exact) for d in deltas]


@pytest.mark.parametrize("q", random_instances(seed=9, count=10))
def test_partials_match_central_differences(q):
    deltas = [4e-2, 2e-2, 1e-2]
    for s, h in POINTS:
        fs, fh = eval_fs(q, s, h), eval_fh(q, s, h)
        err_s = _central_errors(lambda d: eval_f(q, s + d, h), fs, deltas)
        err_h = _central_errors(lambda d: eval_f(q, s, h + d), fh, deltas)
        for err in (err_s, err_h):
            if err[0] < 1e-9 * max(1.0, abs(fs)):
                continue  # locally quadratic or better, nothing to compare
            for coarse, fine in zip(err, err[1:]):
                assert 3.0 <= coarse / fine <= 5.0


@pytest.mark.parametrize("q", random_instances(seed=10, count=5))
def test_second_partials_match_differences(q):
    d = 1e-5
    for s, h in POINTS:
        fss, fsh = eval_second(q, s, h)
        num_ss = (eval_fs(q, s + d, h) - eval_fs(q, s - d, h)) / (2 * d)
        num_sh = (eval_fs(q, s, h + d) - eval_fs(q, s, h - d)) / (2 * d)
        assert abs(num_ss - fss) <= 1e-6 * max(1.0, abs(fss))
        assert abs(num_sh - fsh) <= 1e-6 * max(1.0, abs(fsh))


def test_overflow_guard(example_q):
    with pytest.raises(OutOfDomainError):
        eval_f(example_q, -1000 + 0j, 1.0)


def test_negative_delay_rejected(example_q):
    with pytest.raises(InvalidInputError):
        eval_f(example_q, 1j, -0.1)


def test_retardedness_enforced():
    with pytest.raises(InvalidInputError, match="retardedness"):
        QuasiPolynomial.from_coeffs([1, 1], [0, 1])


def test_delay_free_flag():
    with pytest.raises(InvalidInputError):
        QuasiPolynomial.from_coeffs([1, 1], [0.0], delay_free=False)
    q = QuasiPolynomial.from_coeffs([1, 1], [0.0])
    assert q.delay_free
    assert eval_fh(q, 0.3 + 2j, 5.0) == 0


def test_sensitivity_predicts_zero_motion(example_q):
    # a zero of f moves with speed |f_h / f_s| along its trajectory
    from qptrace import refine_zero
    z = refine_zero(example_q, 1.0, -0.5 + 2.5j)
    rate = sensitivity_bound(example_q, z, 1.0)
    for dh in (1e-3, 1e-4):
        z2 = refine_zero(example_q, 1.0 + dh, z)
        assert abs(z2 - z) / dh == pytest.approx(rate, rel=5 * dh * max(1.0, rate))


def test_exp_matches_cmath(example_q):
    s, h = 0.4 + 3.0j, 2.2
    want = evaluate(example_q.a, s) + evaluate(example_q.b, s) * cmath.exp(-h * s)
    assert eval_f(example_q, s, h) == want
    assert np.isfinite(abs(eval_f(example_q, -50 + 0j, 10.0)))
