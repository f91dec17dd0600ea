"""Evaluation of f(s, h) = a(s) + b(s) exp(-h s) and its partial derivatives."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from .errors import InvalidInputError, OutOfDomainError, SingularSensitivityError
from .poly import RealPolynomial, derivative, evaluate

EXP_OVERFLOW = 700.0
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class QuasiPolynomial:
    """Retarded quasi-polynomial with ``degree(a) > degree(b)``.

    ``b`` may only be identically zero when ``delay_free=True`` is passed,
    which records that the caller really meant a delay-free problem.
    """

    a: RealPolynomial
    b: RealPolynomial
    delay_free: bool = False
    da: RealPolynomial = field(init=False, repr=False, compare=False)
    db: RealPolynomial = field(init=False, repr=False, compare=False)
    d2a: RealPolynomial = field(init=False, repr=False, compare=False)
    d2b: RealPolynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.a.is_zero:
            raise InvalidInputError("a must not be identically zero")
        if self.b.is_zero:
            if not self.delay_free:
                raise InvalidInputError(
                    "b is identically zero; pass delay_free=True to accept a delay-free problem"
                )
        else:
            if self.delay_free:
                raise InvalidInputError("delay_free=True requires b to be identically zero")
            if self.a.degree <= self.b.degree:
                raise InvalidInputError(
                    "retardedness requires degree(a) > degree(b), got "
                    f"degree(a)={self.a.degree}, degree(b)={self.b.degree}"
                )
        object.__setattr__(self, "da", derivative(self.a))
        object.__setattr__(self, "db", derivative(self.b))
        object.__setattr__(self, "d2a", derivative(self.da))
        object.__setattr__(self, "d2b", derivative(self.db))

    @classmethod
    def from_coeffs(cls, a, b, delay_free: bool | None = None) -> QuasiPolynomial:
        """Build from ascending coefficient lists; an all-zero ``b`` is read as delay-free."""
        pa, pb = RealPolynomial(a), RealPolynomial(b)
        if delay_free is None:
            delay_free = pb.is_zero
        return cls(pa, pb, delay_free)

    @property
    def scale(self) -> float:
        """Reference magnitude for singularity and residual tests: max |a_k|."""
        return self.a.scale

    @property
    def characteristic_at_zero(self) -> RealPolynomial:
        """a + b, the quasi-polynomial at h = 0."""
        return self.a + self.b


def _delay_factor(s: complex, h: float) -> complex:
    if h < 0:
        raise InvalidInputError(f"delay must be non-negative, got {h}")
    x = -h * s
    if x.real > EXP_OVERFLOW:
        raise OutOfDomainError(f"exp(-h*s) overflows at s={s}, h={h}")
    return cmath.exp(x)


def eval_f(q: QuasiPolynomial, s: complex, h: float) -> complex:
    return evaluate(q.a, s) + evaluate(q.b, s) * _delay_factor(s, h)


def eval_fs(q: QuasiPolynomial, s: complex, h: float) -> complex:
    """Partial derivative in s: a'(s) + (b'(s) - h b(s)) exp(-h s)."""
    e = _delay_factor(s, h)
    return evaluate(q.da, s) + (evaluate(q.db, s) - h * evaluate(q.b, s)) * e


def eval_fh(q: QuasiPolynomial, s: complex, h: float) -> complex:
    """Partial derivative in h: -s b(s) exp(-h s)."""
    return -s * evaluate(q.b, s) * _delay_factor(s, h)


def eval_all(q: QuasiPolynomial, s: complex, h: float) -> tuple[complex, complex, complex]:
    """(f, f_s, f_h) sharing one exponential and one pass over each polynomial."""
    e = _delay_factor(s, h)
    bs = evaluate(q.b, s)
    f = evaluate(q.a, s) + bs * e
    fs = evaluate(q.da, s) + (evaluate(q.db, s) - h * bs) * e
    fh = -s * bs * e
    return f, fs, fh


def sensitivity_bound(q: QuasiPolynomial, s: complex, h: float) -> float:
    """First-order rate |f_h / f_s| at which a zero moves with the delay.

    The un-divided ratio is used, which avoids the removable singularity at
    zeros of a(s) that the a-normalised form has.
    """
    _, fs, fh = eval_all(q, s, h)
    if abs(fs) <= SINGULAR_RTOL * q.scale:
        raise SingularSensitivityError(f"f_s vanishes at s={s}, h={h}")
    return abs(fh) / abs(fs)


def eval_second(q: QuasiPolynomial, s: complex, h: float) -> tuple[complex, complex]:
    """(f_ss, f_sh), used to locate and unfold double zeros."""
    e = _delay_factor(s, h)
    bs, dbs = evaluate(q.b, s), evaluate(q.db, s)
    d2a = evaluate(q.d2a, s)
    d2b = evaluate(q.d2b, s)
    fss = d2a + (d2b - 2.0 * h * dbs + h * h * bs) * e
    fsh = -(bs + s * dbs - h * s * bs) * e
    return fss, fsh
