import math

import pytest

from eulerscale.bump import HalfBump
from eulerscale.construction import (ExpLaw, GeneratorData, LatticeFrame, PowerLaw, TableLaw,
                                     ZeroLaw, build_solution)


@pytest.fixture(scope="session")
def frame():
    return LatticeFrame()


@pytest.fixture(scope="session")
def reference_generator():
    """h(k) = e^{-|k|}, g(m) = e |m|^{-0.3}, half bump with T = 1."""
    return GeneratorData(h=ExpLaw(1.0, 1.0), g=PowerLaw(math.e, 0.3), bump=HalfBump(1.0))


@pytest.fixture(scope="session")
def zero_generator():
    return GeneratorData(h=ZeroLaw(), g=ZeroLaw(), bump=HalfBump(1.0))


@pytest.fixture(scope="session")
def sol8(frame, reference_generator):
    return build_solution(frame, reference_generator, 8, 8)


@pytest.fixture(scope="session")
def sol8_exact(frame, reference_generator):
    return build_solution(frame, reference_generator, 8, 8, exact=True)


@pytest.fixture(scope="session")
def unit_seed_solution(frame):
    """Box K=M=1 with g(1)=1 and no axis data."""
    gen = GeneratorData(h=ZeroLaw(), g=TableLaw({1: 1.0}), bump=HalfBump(1.0))
    return build_solution(frame, gen, 1, 1, exact=True)
