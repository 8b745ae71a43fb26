import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.double import DoubleElement, double_irreps, projector
from qdouble.groups import build_cyclic, build_s3
from qdouble.lattice import Lattice, Site
from qdouble.site import (a_op, b_op, check_site_representation, energy, face_delta, hom_oracle,
                          kappa_basis, site_action, stabilizer_deviation,
                          vacuum_dimension_lattice, vacuum_plane, vertex_action)
from qdouble.state import HilbertSpace, OperatorCheck, inner, random_state

S3 = build_s3()
PLANE = HilbertSpace(S3, Lattice("plane", 3, 3))


def brute_hom_count(G):
    """Commuting pairs up to simultaneous conjugation, by explicit orbits."""
    pairs = {(a, b) for a in range(G.order) for b in range(G.order)
             if G.mul[a, b] == G.mul[b, a]}
    orbits = 0
    while pairs:
        a, b = pairs.pop()
        orbits += 1
        pairs -= {(G.conj(g, a), G.conj(g, b)) for g in range(G.order)}
    return orbits


@pytest.mark.parametrize("G", [build_cyclic(2), build_cyclic(3), build_cyclic(4), S3],
                         ids=lambda G: G.name)
def test_hom_oracle_matches_brute_force(G):
    assert hom_oracle(G, 1) == brute_hom_count(G)
    assert hom_oracle(G, 0) == 1


def test_hom_oracle_abelian_genus_two():
    assert hom_oracle(build_cyclic(2), 2) == 16


@pytest.mark.parametrize("n,size", [(2, (2, 2)), (2, (3, 2)), (3, (2, 2))])
def test_vacuum_dimension_cyclic(n, size):
    G = build_cyclic(n)
    space = HilbertSpace(G, Lattice("torus", *size))
    rank, _ = vacuum_dimension_lattice(space)
    kappas, _ = kappa_basis(space)
    assert rank == len(kappas) == n * n


def test_kappa_states_are_orthogonal_and_invariant():
    space = HilbertSpace(build_cyclic(2), Lattice("torus", 2, 2))
    kappas, _ = kappa_basis(space)
    for a, k in enumerate(kappas):
        assert stabilizer_deviation(space, k) < 1e-12
        for b, k2 in enumerate(kappas):
            ov = inner(k, k2)
            if a == b:
                assert abs(ov - k.support) < 1e-9      # squared norm = orbit size
            else:
                assert abs(ov) < 1e-12


def test_vacuum_plane_is_stabilized():
    space = HilbertSpace(S3, Lattice("plane", 3, 2))
    vac = vacuum_plane(space)
    assert vac.support == 6 ** 5          # gauge orbit of the identity configuration
    assert stabilizer_deviation(space, vac) < 1e-12
    # a sum of |V| + |F| terms, each exact up to rounding over the support
    assert abs(energy(space, vac)) < 1e-9
    site = Site(space.lattice.vertex(1, 1), space.lattice.face(0, 0))
    for h in range(6):
        assert (vertex_action(space, h, site.v).apply(vac) - vac).norm() < 1e-12
        expect = vac if h == S3.id else vac * 0
        assert (face_delta(space, h, site).apply(vac) - expect).norm() < 1e-12


def test_site_representation_relations():
    lat = Lattice("plane", 3, 3)
    space = HilbertSpace(build_cyclic(3), lat)
    site = Site(lat.vertex(1, 1), lat.face(0, 1))
    assert check_site_representation(space, site, OperatorCheck(space, n_states=4))["passed"]


def test_site_representation_s3_interior():
    site = Site(PLANE.lattice.vertex(1, 1), PLANE.lattice.face(1, 0))
    rep = check_site_representation(PLANE, site, OperatorCheck(PLANE, n_states=3, support=6))
    assert rep["passed"]


coef = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=36, max_size=36)


@given(a=coef, b=coef, seed=st.integers(0, 1000))
def test_site_action_is_an_algebra_map(a, b, seed):
    x = DoubleElement(S3, np.array(a).reshape(6, 6))
    y = DoubleElement(S3, np.array(b).reshape(6, 6))
    site = Site(PLANE.lattice.vertex(1, 1), PLANE.lattice.face(1, 1))
    psi = random_state(PLANE, 6, seed)
    lhs = site_action(PLANE, x @ y, site).apply(psi)
    rhs = site_action(PLANE, x, site).apply(site_action(PLANE, y, site).apply(psi))
    assert (lhs - rhs).norm() < 1e-9 * (1 + lhs.norm())


def test_stabilizers_commute():
    lat = Lattice("torus", 3, 3)
    space = HilbertSpace(build_cyclic(2), lat)
    check = OperatorCheck(space, n_states=5, support=8)
    A = [a_op(space, v) for v in range(lat.n_vertices)]
    B = [b_op(space, p) for p in range(lat.n_faces)]
    worst = 0.0
    for X, Y in itertools.product(A + B, repeat=2):
        worst = max(worst, check.deviation(X @ Y, Y @ X))
    assert worst < 1e-10


def test_projectors_resolve_identity_on_states():
    site = Site(PLANE.lattice.vertex(1, 1), PLANE.lattice.face(1, 1))
    psi = random_state(PLANE, 10, 4)
    total = PLANE.zero()
    for R in double_irreps(S3):
        total = total + site_action(PLANE, projector(R), site).apply(psi)
    assert (total - psi).norm() < 1e-12
