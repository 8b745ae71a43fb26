"""Acceptance suite: one test per criterion, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary (see
``conftest.py``).
"""

import resource
import time
from collections import Counter

import numpy as np
import pytest

from qdouble.double import verify_peter_weyl, verify_projector_family
from qdouble.experiments import (block_teleport, deformation_invariance, double_bookkeeping,
                                 group_basis_experiment, logical_qubit, multisite_rank,
                                 ribbon_commutation, vacuum_experiment, w_algebra)
from qdouble.groups import build_cyclic, build_s3
from qdouble.hopf import hopf_verify
from qdouble.lattice import Lattice
from qdouble.site import vacuum_plane
from qdouble.toric import ToricOps, braiding_phase, fourier_reduction, toric_teleport

S3 = build_s3()
Z2, Z3, Z4 = (build_cyclic(n) for n in (2, 3, 4))
criterion = pytest.mark.criterion


def peak_rss_bytes():
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


@criterion(1, "vacuum dimension: lattice rank, kappa count and oracle agree")
@pytest.mark.parametrize("G,size,expected", [
    (Z2, (2, 2), 4), (Z2, (3, 2), 4), (Z2, (2, 3), 4), (Z2, (3, 3), 4),
    (Z3, (2, 2), 9), (Z3, (3, 2), 9),
], ids=["Z2-2x2", "Z2-3x2", "Z2-2x3", "Z2-3x3", "Z3-2x2", "Z3-3x2"])
def test_vacuum_dimension(G, size, expected):
    t0 = time.perf_counter()
    rep = vacuum_experiment(G, *size)
    assert time.perf_counter() - t0 < 30
    assert rep["dim_lattice"] == rep["kappa_classes"] == rep["dim_oracle"] == expected
    assert rep["passed"]


@criterion(2, "D(S3) irreps: eight, dimensions and hom count")
def test_double_s3_irreps():
    rep = double_bookkeeping(S3)
    assert rep["irrep_count"] == 8
    assert Counter(rep["dims"]) == Counter([1, 1, 2, 3, 3, 2, 2, 2])
    assert rep["sum_of_squares"] == 36
    assert rep["hom_oracle"] == 8


@criterion(3, "projector family and Peter-Weyl round trips")
@pytest.mark.parametrize("G", [S3, Z4], ids=["S3", "Z4"])
def test_projectors(G):
    assert verify_projector_family(G)["max_deviation"] < 1e-12
    assert verify_peter_weyl(G)["max_deviation"] < 1e-10


@criterion(4, "S3 group basis on 3x3 plane: orthonormality and rank 36")
def test_s3_group_basis():
    t0 = time.perf_counter()
    rep = group_basis_experiment(S3)
    elapsed = time.perf_counter() - t0
    assert rep["max_deviation"] < 1e-10
    assert rep["rank"] == 36
    assert elapsed < 600
    assert peak_rss_bytes() < 2 * 1024 ** 3


@criterion(5, "ribbon endpoint commutation relations on 20 states")
@pytest.mark.parametrize("G", [Z3, S3], ids=["Z3", "S3"])
def test_ribbon_commutation(G):
    rep = ribbon_commutation(G, n_states=20, seed=0)
    assert rep["max_deviation"] < 1e-10


@criterion(6, "deformation invariance of ribbon states")
@pytest.mark.parametrize("G", [Z2, S3], ids=["Z2", "S3"])
def test_deformation_invariance(G):
    rep = deformation_invariance(G)
    assert rep["max_deviation"] < 1e-12
    assert rep["passed"]


@criterion(7, "toric braiding phase q^(ij)")
@pytest.mark.parametrize("n", [2, 3, 5])
def test_braiding(n):
    T = ToricOps(n, Lattice("plane", 3, 3))
    vac = vacuum_plane(T.space)
    for i in range(n):
        for j in range(n):
            rep = braiding_phase(n, i, j, T, vac)
            got = complex(rep["phase_re"], rep["phase_im"])
            assert abs(got - np.exp(2j * np.pi * i * j / n)) < 1e-10
            assert rep["max_deviation"] < 1e-10


@criterion(8, "teleportation: toric collapse and D(S3) block sectors")
def test_teleportation():
    toric = toric_teleport(3)
    assert toric["max_deviation"] < 1e-10
    rep = block_teleport(S3)
    assert rep["sectors"] == 8
    assert rep["all_nonzero"]
    assert rep["max_deviation"] < 1e-10


@criterion(9, "Z2 with three disjoint sites spans rank 16")
def test_multisite_rank():
    t0 = time.perf_counter()
    rep = multisite_rank(Z2)
    assert rep["rank"] == 16
    assert time.perf_counter() - t0 < 300


@criterion(10, "D(S3) logical qubit")
def test_logical_qubit():
    rep = logical_qubit(n_states=20, seed=0)
    parts = rep["parts"]
    assert parts["overlap"] < 1e-10
    assert parts["projector_fix"] < 1e-10
    assert parts["x_squared"] < 1e-10
    assert parts["k_squared"] < 1e-10
    assert rep["support_used"] > 0
    assert rep["passed"]


@criterion(11, "W trace algebra: products, adjoints, self-adjointness")
def test_w_algebra():
    rep = w_algebra(S3, n_states=20, seed=0)
    named = rep["named_products"]
    assert named["sigma_sigma_is_identity"] < 1e-12
    assert named["sigma_tau_is_tau"] < 1e-12
    assert max(rep["dagger_law"].values()) < 1e-12
    assert rep["self_adjoint"] and max(rep["self_adjoint"].values()) < 1e-12
    assert rep["max_deviation"] < 1e-12


def _by_name(recs):
    return {r["name"]: r for r in recs}


@criterion(12, "D(H) site representation, sign pattern, module maps, integrals")
@pytest.mark.parametrize("instance,quick", [
    ("sweedler_4", False), ("function_z4", False), ("group_s3", True),
], ids=["sweedler_4", "C(Z4)", "CS3"])
def test_hopf_suite(instance, quick):
    recs = hopf_verify(instance, quick=quick)
    by = _by_name(recs)
    failed = [r["name"] for r in recs if not r["passed"]]
    assert not failed
    site_reps = [r for n, r in by.items() if n.startswith("site_rep_")]
    assert site_reps and all(r["max_deviation"] < 1e-10 for r in site_reps)
    assert any(n.startswith("pm_L_pattern_") and r["passed"] for n, r in by.items())
    modules = [r for n, r in by.items() if "_module_" in n]
    assert len(modules) == 6 and all(r["max_deviation"] < 1e-10 for r in modules)
    assert any(n.startswith("A_squared_") and r["max_deviation"] < 1e-10 for n, r in by.items())
    if instance == "sweedler_4":
        assert len(site_reps) == 4
        flip = next(r for n, r in by.items() if n.startswith("sign_necessity_"))
        assert flip["max_deviation"] > 0.1


@criterion(13, "Fourier reduction of toric operators")
@pytest.mark.parametrize("n", [2, 3, 4])
def test_fourier_reduction(n):
    assert fourier_reduction(n)["max_deviation"] < 1e-12
