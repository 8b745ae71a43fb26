import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.errors import LatticeMismatch, SupportBudgetExceeded
from qdouble.groups import build_cyclic, build_s3
from qdouble.lattice import Lattice, path_ribbon
from qdouble.ribbon import ribbon_op
from qdouble.site import a_op, b_op, vertex_action
from qdouble.state import (HilbertSpace, Operator, dump_state, gram_matrix, inner, load_state,
                           random_state, rank_of_span, support_budget)

SPACE = HilbertSpace(build_s3(), Lattice("plane", 3, 3))
seeds = st.integers(min_value=0, max_value=10 ** 6)


def some_operator(space, k):
    lat = space.lattice
    V = lat.vertex
    rib = path_ribbon(lat, [V(2, 0), V(1, 0), V(0, 0)])
    ops = [vertex_action(space, 1, V(1, 1)), a_op(space, V(1, 0)), b_op(space, 0),
           ribbon_op(space, rib, 4, 2), ribbon_op(space, rib, 1, 3) + vertex_action(space, 5, 0) * 2j]
    return ops[k % len(ops)]


@given(s1=seeds, s2=seeds, k=st.integers(0, 4))
def test_adjoint_contract(s1, s2, k):
    phi = random_state(SPACE, 12, s1)
    psi = random_state(SPACE, 12, s2)
    A = some_operator(SPACE, k)
    assert abs(inner(phi, A.apply(psi)) - inner(A.adjoint().apply(phi), psi)) < 1e-12


@given(s=seeds, c=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_linearity(s, c):
    a = random_state(SPACE, 10, s)
    b = random_state(SPACE, 10, s + 1)
    A = some_operator(SPACE, s)
    lhs = A.apply(a + b * c)
    rhs = A.apply(a) + A.apply(b) * c
    assert (lhs - rhs).norm() < 1e-12


@given(s=seeds)
def test_composition_matches_sequential_application(s):
    psi = random_state(SPACE, 10, s)
    A, B = some_operator(SPACE, s), some_operator(SPACE, s + 2)
    assert ((A @ B).apply(psi) - A.apply(B.apply(psi))).norm() < 1e-12


def test_inner_and_norm():
    psi = random_state(SPACE, 20, 3)
    assert abs(psi.norm() - 1) < 1e-12
    assert abs(inner(psi, psi) - 1) < 1e-12
    zero = SPACE.zero()
    assert inner(psi, zero) == 0
    assert (psi - psi).support == 0


def test_orthogonal_basis_configs():
    e = SPACE.identity_config_state()
    cfg = e.configs[0].copy()
    cfg[0] = 1
    other = SPACE.basis_state(cfg)
    assert inner(e, other) == 0
    assert e.support == 1


def test_rank_and_gram():
    states = [random_state(SPACE, 8, k) for k in range(5)]
    combo = states[0] * 2 + states[1] * (1 - 1j)
    assert rank_of_span(states + [combo]) == 5
    g = gram_matrix(states)
    assert np.allclose(g, g.conj().T)


def test_support_cap():
    with support_budget(5):
        small = HilbertSpace(build_cyclic(2), Lattice("plane", 3, 3))
        with pytest.raises(SupportBudgetExceeded):
            random_state(small, 8, 0)
    assert HilbertSpace(build_cyclic(2), Lattice("plane", 3, 3)).support_cap > 5


def test_lattice_mismatch():
    other = HilbertSpace(build_s3(), Lattice("plane", 4, 3))
    with pytest.raises(LatticeMismatch):
        inner(random_state(SPACE, 3, 0), random_state(other, 3, 0))


def test_dump_round_trip():
    psi = random_state(SPACE, 15, 9)
    buf = io.StringIO()
    dump_state(psi, buf, {"note": "fixture"})
    buf.seek(0)
    back = load_state(SPACE, buf)
    assert (back - psi).norm() < 1e-15


def test_identity_and_zero_operators():
    psi = random_state(SPACE, 6, 1)
    assert (Operator.identity(SPACE).apply(psi) - psi).norm() == 0
    assert Operator.zero(SPACE).apply(psi).support == 0


@given(s=seeds, k=st.integers(0, 4), threads=st.integers(2, 4))
def test_threaded_apply_matches_serial(s, k, threads):
    psi = random_state(SPACE, 40, s)
    A = some_operator(SPACE, k)
    serial = A.apply(psi, threads=1)
    parallel = A.apply(psi, threads=threads)
    assert (serial - parallel).norm() < 1e-12
    assert parallel.support == serial.support
