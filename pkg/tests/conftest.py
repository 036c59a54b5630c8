from pathlib import Path

import pytest

from modlie.scalars import constant_ring, default_ring
from modlie.superalg import BasisElement, SuperAlgebra

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"


def make_sl2(ring=None, ef=None):
    """sl(2) on e, h, f with [h,e] = 2e, [h,f] = -2f, [e,f] = ef (default h)"""
    ring = ring or constant_ring(3)
    one = ring.one
    two = ring.const(2)
    table = {
        (0, 1): {0: -two},        # [e, h] = -2e
        (0, 2): {1: ef or one},   # [e, f] = h
        (1, 2): {2: -two},        # [h, f] = -2f
    }
    basis = [BasisElement("e"), BasisElement("h"), BasisElement("f")]
    return SuperAlgebra(ring, basis, table, name="sl(2)")


@pytest.fixture(scope="module")
def sl2():
    return make_sl2()


@pytest.fixture(scope="module")
def sl2_symbolic():
    ring = default_ring(3)
    return make_sl2(ring, ef=ring.gen("eps"))


@pytest.fixture(scope="module")
def abelian3():
    ring = constant_ring(3)
    return SuperAlgebra(ring, [BasisElement("a"), BasisElement("b"), BasisElement("c")], {}, name="k^3")


@pytest.fixture(scope="module")
def odd_pair():
    """(1|1)-dimensional: h even central, x odd with [x, x] = h"""
    ring = constant_ring(3)
    basis = [BasisElement("h"), BasisElement("x", parity=1)]
    return SuperAlgebra(ring, basis, {(1, 1): {0: ring.one}}, name="q(1|1)")
