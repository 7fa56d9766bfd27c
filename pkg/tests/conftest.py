from fractions import Fraction

import pytest

from mirlab import families
from mirlab.distributions import uniform_stream
from mirlab.sir import SirSpec, sir_as_instance


@pytest.fixture(scope="session")
def e1():
    return families.e1()


@pytest.fixture(scope="session")
def e1_uniform_h():
    return families.e1(h=[families._uniform(0, 1)], name="E1U")


@pytest.fixture(scope="session")
def e2():
    return families.e2_pure_integer()


@pytest.fixture(scope="session")
def e3():
    return families.e3()


@pytest.fixture(scope="session")
def w2():
    return families.w2()


@pytest.fixture(scope="session")
def sir_unit():
    return sir_as_instance(SirSpec(Fraction(1), Fraction(1), families._uniform(0, 1)))


def rand_frac(seed, i, slot, lo, hi, den=32):
    """Deterministic rational in [lo, hi] with a small denominator."""
    u = float(uniform_stream(seed, i, slot))
    return Fraction(lo) + Fraction(round(u * den), den) * (Fraction(hi) - Fraction(lo))


@pytest.fixture
def rational_sampler():
    return rand_frac
