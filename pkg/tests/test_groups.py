import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.errors import ConfigError
from qdouble.groups import (build_cyclic, build_s3, check_character_orthogonality, cocycle,
                            group_irreps, load_group, parse_group_name)

GROUPS = [build_cyclic(2), build_cyclic(3), build_cyclic(4), build_cyclic(5), build_s3()]
elements = st.integers(min_value=0, max_value=5)


def test_s3_basics(s3):
    assert s3.order == 6
    assert not s3.is_abelian
    assert sorted(len(c) for c in s3.conjugacy.classes) == [1, 2, 3]


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_character_orthogonality(G):
    irreps = group_irreps(G)
    assert sum(pi.dim ** 2 for pi in irreps) == G.order
    assert check_character_orthogonality(G, irreps)["passed"]


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_section_picks_conjugators(G):
    data = G.conjugacy
    for k, cls in enumerate(data.classes):
        r = data.reps[k]
        for c in cls:
            assert G.conj(data.section[c], r) == c


@given(a=elements, b=elements, c=elements)
def test_s3_associative_and_inverse(a, b, c):
    G = build_s3()
    assert G.m(a, b, c) == G.m(G.m(a, b), c)
    assert G.m(a, G.inv[a]) == G.id
    assert G.conj(a, G.conj(b, c)) == G.conj(G.m(a, b), c)


@given(g=elements, c=elements)
def test_cocycle_lands_in_centralizer(g, c):
    G = build_s3()
    n = cocycle(G, c, g)
    r = G.conjugacy.reps[G.conjugacy.class_index(c)]
    assert G.conj(n, r) == r


@given(n=st.integers(min_value=1, max_value=9), a=st.integers(0, 20), b=st.integers(0, 20))
def test_cyclic_tables(n, a, b):
    G = build_cyclic(n)
    assert G.mul[a % n, b % n] == (a + b) % n


def test_irreps_are_homomorphisms(s3):
    for pi in group_irreps(s3):
        for a in range(6):
            for b in range(6):
                assert np.allclose(pi(a) @ pi(b), pi(s3.mul[a, b]))


def test_parse_and_load():
    assert parse_group_name("Z4").order == 4
    assert load_group({"kind": "cyclic", "n": 3}).order == 3
    G = load_group({"kind": "table", "mul": [[0, 1], [1, 0]]})
    assert G.order == 2
    with pytest.raises(ConfigError):
        parse_group_name("q8")
    with pytest.raises(ConfigError):
        load_group({"kind": "table", "mul": [[0, 1], [0, 1]]})
    with pytest.raises(ConfigError):
        load_group([1, 2])
