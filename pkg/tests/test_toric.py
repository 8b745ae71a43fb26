import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.lattice import Lattice, Site
from qdouble.site import vacuum_plane
from qdouble.state import Operator, OperatorCheck
from qdouble.toric import (ToricOps, braiding_phase, creation_walkthrough, fourier_reduction,
                           occupation, toric_teleport, w_equals_xz)

LAT = Lattice("plane", 3, 3)


@pytest.fixture(scope="module", params=[2, 3, 5])
def toric(request):
    return ToricOps(request.param, LAT)


def test_weyl_relation(toric):
    check = OperatorCheck(toric.space, n_states=5)
    e = LAT.edge("H", 0, 1)
    lhs = toric.Z(e) @ toric.X(e)
    rhs = toric.X(e) @ toric.Z(e) * toric.q
    assert check.deviation(lhs, rhs) < 1e-12


def test_generators_have_order_n(toric):
    check = OperatorCheck(toric.space, n_states=5)
    e = LAT.edge("V", 1, 0)
    ident = Operator.identity(toric.space)
    assert check.deviation(toric.X(e, toric.n), ident) < 1e-12
    assert check.deviation(toric.Z(e, toric.n), ident) < 1e-12


def test_stabilizers_are_projectors(toric):
    check = OperatorCheck(toric.space, n_states=4)
    A = toric.A(LAT.vertex(1, 1))
    B = toric.B(LAT.face(0, 0))
    assert check.deviation(A @ A, A) < 1e-12
    assert check.deviation(B @ B, B) < 1e-12
    assert check.deviation(A @ B, B @ A) < 1e-12


def test_vacuum_occupation_is_trivial():
    T = ToricOps(3, LAT)
    vac = vacuum_plane(T.space)
    assert occupation(T, vac, Site(LAT.vertex(1, 1), LAT.face(0, 0))) == (0, 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fourier_reduction(n):
    assert fourier_reduction(n)["max_deviation"] < 1e-12


@pytest.mark.parametrize("n,i,j", [(2, 1, 1), (3, 1, 2), (3, 2, 2)])
def test_walkthrough(n, i, j):
    rep = creation_walkthrough(n, i, j)
    assert rep["passed"], rep["steps"]


@given(i=st.integers(0, 4), j=st.integers(0, 4))
def test_braiding_phase_z5(i, j):
    rep = braiding_phase(5, i, j)
    assert rep["max_deviation"] < 1e-10


def test_trivial_labels_do_not_braid():
    for n in (2, 3):
        rep = braiding_phase(n, 0, 1)
        assert abs(complex(rep["phase_re"], rep["phase_im"]) - 1) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_w_equals_xz(n):
    assert w_equals_xz(n)["passed"]


def test_toric_teleport_z3():
    rep = toric_teleport(3, seed=7)
    assert rep["passed"], rep["parts"]
    assert rep["parts"]["bell_norm"] < 1e-10


def test_teleport_extraction_of_fixed_state():
    psi = np.zeros((2, 2))
    psi[1, 0] = 1
    assert toric_teleport(2, psi_vec=psi)["passed"]
