import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.errors import BadDimensions, BoundaryTooClose, EndpointMismatch, NotARibbon
from qdouble.lattice import (Lattice, Ribbon, Site, concat_ribbons, path_ribbon,
                             ribbon_from_spec, sites_disjoint)

sizes = st.integers(min_value=2, max_value=6)


@given(w=sizes, h=sizes)
def test_counts(w, h):
    t = Lattice("torus", w, h)
    assert (t.n_vertices, t.n_edges, t.n_faces) == (w * h, 2 * w * h, w * h)
    p = Lattice("plane", w, h)
    assert p.n_edges == (w - 1) * h + w * (h - 1)
    assert p.n_faces == (w - 1) * (h - 1)
    # Euler characteristic: 0 on the torus, 1 on the disc
    assert t.n_vertices - t.n_edges + t.n_faces == 0
    assert p.n_vertices - p.n_edges + p.n_faces == 1


@given(w=sizes, h=sizes)
def test_face_boundaries_close_up(w, h):
    lat = Lattice("torus", w, h)
    for p in range(lat.n_faces):
        corners = lat.face_corners(p)
        walk = corners[0]
        for (e, sign), nxt in zip(lat.face_boundary(p), corners[1:] + corners[:1]):
            s, t = lat.edges[e][:2]
            assert (s, t) == ((walk, nxt) if sign > 0 else (nxt, walk))
            walk = nxt


def test_indexing_and_quadrants():
    lat = Lattice("plane", 3, 3)
    assert lat.vertex(1, 2) == 7
    assert lat.edge("H", 0, 0) == 0 and lat.edge("V", 0, 0) == 6
    s = lat.site(1, 1, 1, 1)
    assert lat.quadrant(s) == "NE"
    assert lat.quadrant(Site(lat.vertex(1, 1), lat.face(0, 0))) == "SW"
    assert lat.is_interior_vertex(lat.vertex(1, 1))
    assert not lat.is_interior_vertex(lat.vertex(0, 0))
    with pytest.raises(BadDimensions):
        Lattice("sphere", 3, 3)
    with pytest.raises(BadDimensions):
        Lattice("plane", 1, 3)
    assert Lattice.from_spec(lat.to_spec()) == lat


def test_vertex_star_is_anticlockwise():
    lat = Lattice("torus", 3, 3)
    v = lat.vertex(1, 1)
    star = lat.vertex_star(v)
    kinds = [lat.edge_name(e)[0] for e, _ in star]
    assert kinds == ["H", "V", "H", "V"]
    assert [out for _, out in star] == [True, True, False, False]


def test_path_ribbon_is_right_handed_and_strongly_open():
    lat = Lattice("plane", 4, 4)
    V = lat.vertex
    r = path_ribbon(lat, [V(0, 1), V(1, 1), V(2, 1), V(3, 1)])
    assert r.handedness == "right"
    assert r.classification == "strongly-open"
    assert [t.kind for t in r.triangles].count("direct") == 3
    back = r.reversed()
    assert back.start == r.end and back.end == r.start
    assert ribbon_from_spec(lat, r.to_spec()).sites == r.sites


def test_turning_ribbon_and_concatenation():
    lat = Lattice("plane", 3, 3)
    V, F = lat.vertex, lat.face
    r = path_ribbon(lat, [V(1, 0), V(1, 1), V(0, 1)])
    assert Site(V(1, 1), F(1, 1)) in r.sites          # anticlockwise turn passes the NE face
    a = path_ribbon(lat, [V(2, 0), V(1, 0)], end_face=F(0, 0))
    b = path_ribbon(lat, [V(1, 0), V(0, 0)])
    ab = concat_ribbons(a, b)
    assert ab.start == a.start and ab.end == b.end
    with pytest.raises(EndpointMismatch):
        concat_ribbons(b, a)


def test_classification():
    lat = Lattice("plane", 4, 4)
    closed = lat.boundary_ribbon(Site(lat.vertex(1, 1), lat.face(1, 1)))
    assert closed.classification == "closed"
    assert not closed.is_open()
    single = Ribbon(lat, [Site(lat.vertex(1, 1), lat.face(1, 1)),
                          Site(lat.vertex(1, 1), lat.face(0, 1))])
    assert single.classification == "other"


def test_errors():
    lat = Lattice("plane", 3, 3)
    V, F = lat.vertex, lat.face
    with pytest.raises(NotARibbon):
        Ribbon(lat, [Site(V(0, 0), F(0, 0)), Site(V(1, 1), F(1, 1))])
    with pytest.raises(BoundaryTooClose):
        path_ribbon(lat, [V(0, 0), V(1, 0)])          # faces would be below the patch
    assert sites_disjoint([Site(V(0, 0), F(0, 0)), Site(V(2, 0), F(1, 0))])
    assert not sites_disjoint([Site(V(0, 0), F(0, 0)), Site(V(0, 0), F(1, 0))])
