import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.double import find_irrep
from qdouble.errors import NotOpen, SitesNotDisjoint
from qdouble.experiments import isotopic_routes, teleport_route
from qdouble.groups import build_cyclic, build_s3
from qdouble.lattice import Lattice, Site, concat_ribbons, path_ribbon
from qdouble.ribbon import (LogicalQubit, check_block_teleport, check_group_basis,
                            check_ribbon_algebra, check_ribbon_commutation, k_gate,
                            l_space_rank, quasiparticle_ribbon, ribbon_op, trace_coefs,
                            trace_ribbon, triangle_op)
from qdouble.site import vacuum_plane
from qdouble.state import HilbertSpace, Operator, OperatorCheck, random_state

Z3 = build_cyclic(3)
S3 = build_s3()
Z3_PLANE = HilbertSpace(Z3, Lattice("plane", 3, 3))
S3_PLANE = HilbertSpace(S3, Lattice("plane", 3, 3))


def test_ribbon_algebra_exhaustive_z3():
    rib = teleport_route(Z3_PLANE.lattice)
    rep = check_ribbon_algebra(Z3_PLANE, rib, OperatorCheck(Z3_PLANE, n_states=3))
    assert rep["passed"]


def test_triangle_operators():
    lat = Z3_PLANE.lattice
    rib = teleport_route(lat)
    direct = next(t for t in rib.triangles if t.kind == "direct")
    check = OperatorCheck(Z3_PLANE, n_states=4)
    T = [triangle_op(Z3_PLANE, direct, g) for g in range(3)]
    # the T^g are orthogonal idempotents summing to one
    total = Operator.zero(Z3_PLANE)
    for g in range(3):
        total = total + T[g]
        for g2 in range(3):
            target = T[g] if g == g2 else Operator.zero(Z3_PLANE)
            assert check.deviation(T[g] @ T[g2], target) < 1e-12
    assert check.deviation(total, Operator.identity(Z3_PLANE)) < 1e-12


def test_closed_contractible_ribbon_acts_trivially_on_vacuum():
    lat = Z3_PLANE.lattice
    vac = vacuum_plane(Z3_PLANE)
    loop = lat.boundary_ribbon(Site(lat.vertex(1, 1), lat.face(1, 1)))
    with pytest.raises(NotOpen):
        ribbon_op(Z3_PLANE, loop, 0, 0)
    for h in range(3):
        for g in range(3):
            out = ribbon_op(Z3_PLANE, loop, h, g, require_open=False).apply(vac)
            expect = vac if g == Z3.id else vac * 0
            assert (out - expect).norm() < 1e-12


def test_endpoint_relations_z3():
    lat = Lattice("plane", 4, 3)
    space = HilbertSpace(Z3, lat)
    V = lat.vertex
    rib = path_ribbon(lat, [V(0, 1), V(1, 1), V(2, 1), V(3, 1)])
    rep = check_ribbon_commutation(space, rib, OperatorCheck(space, n_states=4))
    assert rep["passed"]


def test_group_basis_and_rank_z3():
    vac = vacuum_plane(Z3_PLANE)
    rib = teleport_route(Z3_PLANE.lattice)
    rep, states = check_group_basis(Z3_PLANE, rib, vac)
    assert rep["passed"] and rep["rank"] == 9
    rank, _ = l_space_rank(Z3_PLANE, [rib], vac)
    assert rank == 9


def test_route_independence_z3():
    vac = vacuum_plane(Z3_PLANE)
    a, b = isotopic_routes(Z3_PLANE.lattice)
    for h in range(3):
        for g in range(3):
            x = ribbon_op(Z3_PLANE, a, h, g).apply(vac)
            y = ribbon_op(Z3_PLANE, b, h, g).apply(vac)
            assert (x - y).norm() < 1e-12


def test_concatenation_rule():
    """F_{xi xi'}^{h,g} = sum_f F_{xi'}^{f^-1 h f, f^-1 g} F_xi^{h,f} on S3."""
    lat = S3_PLANE.lattice
    V, F = lat.vertex, lat.face
    a = path_ribbon(lat, [V(2, 0), V(1, 0)], end_face=F(0, 0))
    b = path_ribbon(lat, [V(1, 0), V(0, 0)])
    ab = concat_ribbons(a, b)
    check = OperatorCheck(S3_PLANE, n_states=3)
    G = S3
    for h, g in [(1, 4), (3, 5), (4, 0)]:
        rhs = Operator.zero(S3_PLANE)
        for f in range(6):
            fi = G.inv[f]
            rhs = rhs + (ribbon_op(S3_PLANE, b, G.m(fi, h, f), G.m(fi, g), require_open=False)
                         @ ribbon_op(S3_PLANE, a, h, f, require_open=False))
        assert check.deviation(ribbon_op(S3_PLANE, ab, h, g, require_open=False), rhs) < 1e-12


def test_tau_trace_formula():
    R = find_irrep(S3, "e", "tau")
    coefs = trace_coefs(R)
    uv, vu = S3.index("uv"), S3.index("vu")
    expected = np.zeros((6, 6))
    expected[S3.id, S3.id] = 2
    expected[S3.id, uv] = expected[S3.id, vu] = -1
    assert np.allclose(coefs, expected)


def test_quasiparticle_traces_sum_to_w():
    rib = teleport_route(S3_PLANE.lattice)
    check = OperatorCheck(S3_PLANE, n_states=3)
    R = find_irrep(S3, "u", "-1")
    total = Operator.zero(S3_PLANE)
    for u in R.carrier_basis():
        total = total + quasiparticle_ribbon(S3_PLANE, rib, R, u, u)
    assert check.deviation(total, trace_ribbon(S3_PLANE, rib, R)) < 1e-12


@given(seed=st.integers(0, 10 ** 5))
def test_k_gate_eigenvalues(seed):
    lat = S3_PLANE.lattice
    V = lat.vertex
    sigma = find_irrep(S3, "e", "sigma")
    Xa = trace_ribbon(S3_PLANE, teleport_route(lat), sigma)
    Xb = trace_ribbon(S3_PLANE, path_ribbon(lat, [V(0, 2), V(1, 2), V(2, 2)]), sigma)
    K = k_gate(Xa, Xb)
    psi = random_state(S3_PLANE, 1, seed)           # one basis configuration
    a = (Xa.apply(psi).amps / psi.amps)[0]
    b = (Xb.apply(psi).amps / psi.amps)[0]
    assert np.isclose(abs(a), 1) and np.isclose(abs(b), 1)
    expected = (1 + a + b - a * b) / 2
    assert np.isclose(abs(expected), 1)
    assert (K.apply(psi) - psi * expected).norm() < 1e-12


def test_block_teleport_z3():
    vac = vacuum_plane(Z3_PLANE)
    rep = check_block_teleport(Z3_PLANE, teleport_route(Z3_PLANE.lattice), vac)
    assert rep["passed"] and len(rep["sector_norms"]) == 9


def test_logical_qubit_needs_disjoint_sites():
    lat = S3_PLANE.lattice
    V, F = lat.vertex, lat.face
    s = Site(V(0, 0), F(0, 0))
    rib = teleport_route(lat)
    with pytest.raises(SitesNotDisjoint):
        LogicalQubit(S3_PLANE, [s, s, s, s], rib, rib, rib, None)
