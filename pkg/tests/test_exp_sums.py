import math
import pytest
import numpy as np
from pydantic import ValidationError

from maassqe.errors import DomainError, ScaleError
from maassqe.helpers import euler_phi
from maassqe.exp_sums import (
    TwistedSumParams,
    CyclotomicInteger,
    balanced,
    kloosterman,
    weil_ratio,
    gauss_sum,
    twisted_sum_direct,
    twisted_sum_evaluated,
    twisted_sum,
    twisted_bound_ratio,
    gauss_magnitude_defect,
    coprime_split,
    crt_split,
)


def test_kloosterman_small_values():
    assert np.abs(kloosterman(1, 1, 3) + 1.0) < 1e-12
    assert np.abs(kloosterman(1, 1, 1) - 1.0) < 1e-12
    assert np.abs(kloosterman(0, 0, 12) - euler_phi(12)) < 1e-12
    # Ramanujan sum at a prime
    assert np.abs(kloosterman(1, 0, 7) + 1.0) < 1e-12
    with pytest.raises(DomainError):
        kloosterman(1, 1, 0)


def test_kloosterman_symmetry():
    for c in (5, 12, 35, 64):
        for n, m in ((1, 2), (3, 7), (4, 6)):
            assert np.abs(kloosterman(n, m, c) - kloosterman(m, n, c)) < 1e-10


def test_weil_bound():
    worst = max(weil_ratio(n, m, c) for c in range(1, 301) for n in range(1, 6) for m in range(1, 6))
    assert worst <= 1.0 + 1e-12


def test_kloosterman_exact_mode():
    exact = kloosterman(2, 3, 11, exact=True)
    assert isinstance(exact, CyclotomicInteger)
    assert np.abs(complex(exact) - kloosterman(2, 3, 11)) < 1e-12
    with pytest.raises(ScaleError):
        kloosterman(1, 1, 501, exact=True)


def test_gauss_sum_magnitude():
    for c in range(1, 200, 2):
        for a in (1, 2, 5):
            if math.gcd(a, c) == 1:
                assert np.abs(abs(gauss_sum(a, 0, c)) - math.sqrt(c)) < 1e-9
    assert np.abs(gauss_sum(1, 0, 4) - (2 + 2j)) < 1e-12


def test_gauss_magnitude_defect():
    assert max(gauss_magnitude_defect(c) for c in range(1, 200, 2)) < 1e-9
    with pytest.raises(DomainError):
        gauss_magnitude_defect(12)


def test_balanced():
    assert balanced(7, 10) == -3
    assert balanced(5, 10) == 5
    assert balanced(-1, 9) == -1


def test_twisted_params_validation():
    with pytest.raises(ValidationError):
        TwistedSumParams(c=9, u=5)


def test_twisted_closed_form_matches_direct():
    rng = np.random.default_rng(7)
    odd = [c for c in range(3, 40, 2)]
    for _ in range(25):
        c = int(rng.choice(odd))
        u = int(rng.integers(-(c // 2), c // 2 + 1))
        v = int(rng.integers(-(c // 2), c // 2 + 1))
        d = int(rng.integers(-5, 6))
        gamma = int(rng.integers(1, 6))
        if math.gcd(c, 2 * gamma) != 1:
            continue
        p = TwistedSumParams(c=c, d=d, u=u, v=v, gamma=gamma)
        assert twisted_sum_evaluated(p, exact=True) == twisted_sum_direct(p, exact=True)


def test_twisted_vanishing_branch():
    p = TwistedSumParams(c=15, d=2, u=3, v=1, gamma=1)
    assert math.gcd(p.u, p.c) != math.gcd(p.v, p.c)
    assert twisted_sum_evaluated(p, exact=True).is_zero()
    assert twisted_sum_direct(p, exact=True).is_zero()


def test_twisted_closed_form_needs_odd_modulus():
    with pytest.raises(DomainError):
        twisted_sum_evaluated(TwistedSumParams(c=8, u=1, v=1))


@pytest.mark.parametrize("c", [4, 12, 20, 24])
def test_twisted_crt_split(c):
    p = TwistedSumParams(c=c, d=1, u=1, v=-1, gamma=1)
    direct = complex(twisted_sum_direct(p))
    assert np.abs(twisted_sum(p) - direct) < 1e-8 * max(1.0, abs(direct))


def test_twisted_bound_ratio_finite():
    ratio = twisted_bound_ratio(TwistedSumParams(c=21, d=1, u=2, v=2, gamma=1))
    assert np.isfinite(ratio) and ratio >= 0.0


@pytest.mark.parametrize("c, c1", [(15, 3), (15, 5), (28, 7), (36, 4)])
def test_coprime_split(c, c1):
    p = TwistedSumParams(c=c, d=2, u=c // 2, v=-3, gamma=1)
    first, second = coprime_split(p, c1)
    assert (first.c, second.c) == (c1, c // c1)
    assert (first.gamma, second.gamma) == (c // c1, c1)
    product = twisted_sum_direct(first) * twisted_sum_direct(second)
    direct = twisted_sum_direct(p)
    assert np.abs(product - direct) < 1e-8 * max(1.0, abs(direct))


def test_coprime_split_needs_unitary_divisor():
    p = TwistedSumParams(c=12, d=1, u=1, v=1)
    with pytest.raises(DomainError):
        coprime_split(p, 2)
    with pytest.raises(DomainError):
        coprime_split(p, 5)
    odd, even = crt_split(p)
    assert (odd.c, even.c) == (3, 4)
