import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdouble.double import (DoubleElement, check_hopf_axioms, dimension_count, double_antipode,
                            double_coproduct, double_counit, double_irreps, irrep_matrix,
                            projector, rep_matrix, verify_peter_weyl, verify_projector_family)
from qdouble.groups import build_cyclic, build_s3

S3 = build_s3()
coef = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=36, max_size=36)


def element(values):
    return DoubleElement(S3, np.array(values, complex).reshape(6, 6))


def test_s3_irrep_bookkeeping():
    counts = dimension_count(S3)
    assert counts["count"] == 8
    assert sorted(counts["dims"]) == [1, 1, 2, 2, 2, 2, 3, 3]
    assert counts["sum_sq"] == 36


@pytest.mark.parametrize("G", [build_cyclic(2), build_cyclic(4), S3], ids=lambda G: G.name)
def test_double_axioms_and_projectors(G):
    assert check_hopf_axioms(G)["passed"]
    rep = verify_projector_family(G)
    assert rep["passed"]
    assert rep["count"] == len(double_irreps(G))


def test_zn_double_has_n_squared_irreps():
    for n in (2, 3, 4, 5):
        assert len(double_irreps(build_cyclic(n))) == n * n


@given(a=coef, b=coef, c=coef)
def test_product_associative(a, b, c):
    x, y, z = element(a), element(b), element(c)
    assert ((x @ y) @ z - x @ (y @ z)).norm() < 1e-9


@given(a=coef, b=coef)
def test_antipode_reverses_products(a, b):
    x, y = element(a), element(b)
    lhs = double_antipode(x @ y)
    rhs = double_antipode(y) @ double_antipode(x)
    assert (lhs - rhs).norm() < 1e-9


@settings(max_examples=5)
@given(a=coef, b=coef)
def test_counit_and_coproduct_multiplicative(a, b):
    x, y = element(a), element(b)
    assert abs(double_counit(x @ y) - double_counit(x) * double_counit(y)) < 1e-9
    # Delta(xy) = Delta(x) Delta(y), compared through the 2-tensor product
    dx, dy, dxy = double_coproduct(x), double_coproduct(y), double_coproduct(x @ y)
    n = 6
    acc = np.zeros_like(dxy)
    basis = [[DoubleElement.basis(S3, g, h) for h in range(n)] for g in range(n)]
    prods = {}
    for g1, h1, g2, h2 in zip(*np.nonzero(np.abs(dx) > 1e-12)):
        for k1, l1, k2, l2 in zip(*np.nonzero(np.abs(dy) > 1e-12)):
            key1, key2 = (g1, h1, k1, l1), (g2, h2, k2, l2)
            if key1 not in prods:
                prods[key1] = (basis[g1][h1] @ basis[k1][l1]).coef
            if key2 not in prods:
                prods[key2] = (basis[g2][h2] @ basis[k2][l2]).coef
            acc += dx[g1, h1, g2, h2] * dy[k1, l1, k2, l2] * np.einsum(
                "ab,cd->abcd", prods[key1], prods[key2])
    assert np.abs(acc - dxy).max() < 1e-8


@given(a=coef, b=coef)
def test_irreps_are_representations(a, b):
    x, y = element(a), element(b)
    for R in double_irreps(S3):
        assert np.allclose(rep_matrix(R, x @ y), rep_matrix(R, x) @ rep_matrix(R, y), atol=1e-8)


def test_projector_acts_as_identity_on_its_irrep():
    for R in double_irreps(S3):
        assert np.allclose(rep_matrix(R, projector(R)), np.eye(R.dim))


def test_delta_basis_decomposes_the_carrier():
    # sum_g d_g (x) e acts as the identity and each d_g picks out one class element
    for R in double_irreps(S3):
        total = sum(irrep_matrix(R, g, S3.id) for g in range(6))
        assert np.allclose(total, np.eye(R.dim))
        for g in range(6):
            rank = np.linalg.matrix_rank(irrep_matrix(R, g, S3.id))
            assert rank == (R.pi.dim if g in R.cls else 0)


def test_peter_weyl_round_trips():
    assert verify_peter_weyl(build_cyclic(3))["passed"]
