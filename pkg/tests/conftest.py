import math

import numpy as np
import pytest

from qptrace import QuasiPolynomial, Region, default_omega_max, trace_all

# a(s) = s^2 + s + 1, b(s) = s, traced in Re(s) > -1 up to h = pi
EXAMPLE_A = [1.0, 1.0, 1.0]
EXAMPLE_B = [0.0, 1.0]
EXAMPLE_SIGMA0 = -1.0
EXAMPLE_H = math.pi

CROSSING_REFERENCE = [(2.28, 0.65), (5.00, 1.57), (7.22, 1.96), (9.23, 2.21), (11.12, 2.40),
          (12.92, 2.55), (14.65, 2.68), (16.33, 2.79), (17.97, 2.88), (19.56, 2.97),
          (21.13, 3.05), (22.66, 3.12)]

# zeros at h = pi in the upper half plane, conjugates implied
_UPPER = [(-0.27, 2.60), (-0.47, 4.54), (-0.59, 6.52), (-0.68, 8.51), (-0.75, 10.51),
          (-0.80, 12.51), (-0.85, 14.50), (-0.89, 16.50), (-0.93, 18.50), (-0.96, 20.50),
          (-0.99, 22.50)]


def _pairs(points):
    out = []
    for re, im in points:
        out.append(complex(re, im))
        if im != 0.0:
            out.append(complex(re, -im))
    return out


# the reference zero list with its "-0.30, +-1.00j" row read as a pair
FINAL_ZEROS_AS_STATED = _pairs([(0.0, 1.0), (-0.30, 1.00)] + _UPPER)
# the same row read as a real zero -0.30 plus the imaginary pair +-j
FINAL_ZEROS_CORRECTED = _pairs([(0.0, 1.0), (-0.30, 0.0)] + _UPPER)

RANDOM_SEED = 0
RANDOM_COUNT = 10
RANDOM_SIGMA0 = -1.0
RANDOM_H = 2.0


@pytest.fixture(scope="session")
def example_q():
    return QuasiPolynomial.from_coeffs(EXAMPLE_A, EXAMPLE_B)


@pytest.fixture(scope="session")
def example_region(example_q):
    return Region(EXAMPLE_SIGMA0, default_omega_max(example_q, EXAMPLE_SIGMA0, EXAMPLE_H))


@pytest.fixture(scope="session")
def example_result(example_q, example_region):
    return trace_all(example_q, example_region, EXAMPLE_H)


def random_instances(seed=RANDOM_SEED, count=RANDOM_COUNT):
    """Retarded quasi-polynomials with deg a in 1..5, deg b < deg a, coefficients U[-2, 2]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        na = int(rng.integers(1, 6))
        nb = int(rng.integers(0, na))
        a = rng.uniform(-2, 2, na + 1)
        b = rng.uniform(-2, 2, nb + 1)
        out.append(QuasiPolynomial.from_coeffs(a, b))
    return out


@pytest.fixture(scope="session")
def random_results():
    out = []
    for q in random_instances():
        region = Region(RANDOM_SIGMA0, default_omega_max(q, RANDOM_SIGMA0, RANDOM_H))
        out.append((q, trace_all(q, region, RANDOM_H)))
    return out


def match_one_to_one(found, expected, tol):
    """True when every expected point pairs with a distinct found point within tol.

    Uses augmenting paths, which is plenty for a few dozen points.
    """
    if len(found) != len(expected):
        return False
    adj = [[j for j, z in enumerate(found)
            if abs(z.real - e.real) <= tol and abs(z.imag - e.imag) <= tol] for e in expected]
    owner = [-1] * len(found)

    def augment(i, seen):
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(expected)))
