"""Real-coefficient polynomials stored in ascending coefficient order."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, NumericFailure

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RealPolynomial:
    """Polynomial ``sum(coeffs[k] * s**k)`` with real coefficients.

    Trailing zeros are stripped on construction, so ``coeffs[-1]`` is the
    leading coefficient unless the polynomial is identically zero, which is
    stored as ``(0.0,)``.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        c = [float(x) for x in coeffs]
        for x in c:
            if not math.isfinite(x):
                raise InvalidInputError(f"non-finite coefficient {x!r}")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    @property
    def scale(self) -> float:
        """Largest coefficient magnitude."""
        return max(abs(x) for x in self.coeffs)

    def __call__(self, s):
        return evaluate(self, s)

    def __add__(self, other: RealPolynomial) -> RealPolynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0.0,) * (n - len(self.coeffs))
        b = other.coeffs + (0.0,) * (n - len(other.coeffs))
        return RealPolynomial(x + y for x, y in zip(a, b))

    def __mul__(self, other: RealPolynomial) -> RealPolynomial:
        return RealPolynomial(np.convolve(self.coeffs, other.coeffs))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: float = 1.0) -> RealPolynomial:
        """Expand ``leading * prod(s - r)``. Imaginary round-off is discarded."""
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(leading * c.real)


def evaluate(p: RealPolynomial, s):
    """Horner evaluation. Works for scalars and numpy arrays alike.

    For a real scalar ``s`` the result is a complex with imaginary part 0.
    """
    acc = 0.0
    for c in reversed(p.coeffs):
        acc = acc * s + c
    if isinstance(acc, np.ndarray):
        return acc.astype(complex)
    return complex(acc)


def derivative(p: RealPolynomial) -> RealPolynomial:
    if p.degree == 0:
        return RealPolynomial([0.0])
    return RealPolynomial(k * c for k, c in enumerate(p.coeffs) if k > 0)


def root_bound(p: RealPolynomial) -> float:
    """Cauchy bound: every root satisfies ``|root| <= 1 + max |c_k / c_n|``."""
    if p.degree < 1:
        raise InvalidInputError("root_bound needs a polynomial of degree >= 1")
    lead = abs(p.leading)
    return 1.0 + max(abs(c) / lead for c in p.coeffs[:-1])


def find_roots(p: RealPolynomial, tol: float = 1e-12, max_iter: int = 500) -> list[complex]:
    """All ``degree`` roots of ``p`` (with multiplicity) by Aberth-Ehrlich iteration.

    Initial guesses sit on the circle of radius ``root_bound(p)``. A root is
    frozen once its Newton correction is at rounding level or its residual is
    below the Horner rounding error bound; multiple roots only reach the
    latter. Raises :class:`NumericFailure` if some residual still exceeds
    ``tol * p.scale * max(1, |root|)**degree`` after ``max_iter`` sweeps.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    n = p.degree
    if n < 1:
        raise InvalidInputError("find_roots needs a polynomial of degree >= 1")
    c = np.asarray(p.coeffs, dtype=float)
    dc = np.asarray(derivative(p).coeffs, dtype=float)
    abs_c = np.abs(c)
    if n == 1:
        return [complex(-c[0] / c[1])]

    radius = root_bound(p)
    # offset keeps the start off the real axis and away from conjugate symmetry
    angles = 2.0 * np.pi * np.arange(n) / n + np.pi / (2.0 * n) + 0.25
    z = radius * np.exp(1j * angles)
    active = np.ones(n, dtype=bool)

    for _ in range(max_iter):
        zi = z[active]
        pz = np.polynomial.polynomial.polyval(zi, c)
        dpz = np.polynomial.polynomial.polyval(zi, dc)
        err_bound = 8.0 * _EPS * np.polynomial.polynomial.polyval(np.abs(zi), abs_c)
        small = np.abs(pz) <= err_bound
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = zi[:, None] - z[None, :]
            idx = np.flatnonzero(active)
            diff[np.arange(len(idx)), idx] = np.inf
            repulsion = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * repulsion)
        w = np.where(np.isfinite(w), w, 0.0)
        w = np.where(small, 0.0, w)
        z[active] = zi - w
        done = small | (np.abs(w) <= 4.0 * _EPS * np.abs(zi))
        active[idx[done]] = False
        if not active.any():
            break

    resid = np.abs(np.polynomial.polynomial.polyval(z, c))
    # |p(z)| carries rounding error ~ |z|**n, so the tolerance grows with it
    limit = tol * p.scale * np.maximum(1.0, np.abs(z)) ** n
    bad = resid > limit
    if np.any(bad):
        what = "did not converge" if active.any() else "stalled"
        raise NumericFailure(
            f"Aberth iteration {what} for polynomial {p.coeffs} "
            f"(residual {resid[bad].max():.3e} above tolerance)"
        )
    return [complex(x) for x in z]


def cluster_roots(roots: Sequence[complex], tol: float) -> list[list[complex]]:
    """Group roots closer than ``10 * tol`` (transitively) into clusters.

    Clusters are returned in order of their first member.
    """
    groups: list[list[complex]] = []
    parent = list(range(len(roots)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < 10.0 * tol:
                parent[find(j)] = find(i)
    order: dict[int, list[complex]] = {}
    for i, r in enumerate(roots):
        order.setdefault(find(i), []).append(r)
    groups.extend(order.values())
    return groups
