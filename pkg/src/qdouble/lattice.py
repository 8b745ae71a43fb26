"""Oriented square lattices (plane patch or torus), sites, triangles and
ribbons.

Conventions: vertex (x, y) has index ``y*W + x``.  Horizontal edge H(x, y)
runs (x, y) -> (x+1, y), vertical edge V(x, y) runs (x, y) -> (x, y+1).
Face (i, j) has lower-left corner (i, j).  Its boundary is read clockwise;
from the lower-left corner that is left, top, right (reversed), bottom
(reversed).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import (BadDimensions, BoundaryTooClose, EndpointMismatch, NonAdjacentSite,
                     NotARibbon)

# anticlockwise compass order used for vertex stars
_DIRS = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}
# faces around a vertex, keyed by the offset of their lower-left corner
_QUADRANTS = {"NE": (0, 0), "NW": (-1, 0), "SW": (-1, -1), "SE": (0, -1)}
_CLOCKWISE_FACES = ["NE", "SE", "SW", "NW"]


@dataclass(frozen=True)
class Site:
    v: int
    p: int


@dataclass(frozen=True)
class Triangle:
    kind: str        # "direct" or "dual"
    edge: int
    start: Site
    end: Site
    # direct: +1 when travelling start.v -> end.v follows the edge orientation
    # dual: +1 when the shared vertex is the source of the edge
    sign: int

    def reversed(self):
        return Triangle(self.kind, self.edge, self.end, self.start,
                        -self.sign if self.kind == "direct" else self.sign)


class Lattice:
    def __init__(self, topology: str, width: int, height: int):
        if topology not in ("plane", "torus"):
            raise BadDimensions(f"unknown topology {topology!r}")
        if width < 2 or height < 2:
            raise BadDimensions("width and height must be at least 2")
        self.topology = topology
        self.width = W = width
        self.height = H = height
        torus = topology == "torus"
        self.edges = []        # (source, target, "H"/"V", x, y)
        self._edge_at = {}
        for y in range(H):
            for x in range(W if torus else W - 1):
                self._add_edge("H", x, y, self.vertex(x, y), self.vertex(x + 1, y))
        for y in range(H if torus else H - 1):
            for x in range(W):
                self._add_edge("V", x, y, self.vertex(x, y), self.vertex(x, y + 1))
        self.faces = []        # (i, j)
        self._face_at = {}
        fw, fh = (W, H) if torus else (W - 1, H - 1)
        for j in range(fh):
            for i in range(fw):
                self._face_at[(i, j)] = len(self.faces)
                self.faces.append((i, j))

    @classmethod
    def from_spec(cls, spec):
        try:
            return cls(spec["topology"], int(spec["width"]), int(spec["height"]))
        except KeyError as exc:
            raise BadDimensions(f"lattice spec missing {exc}") from None

    def to_spec(self):
        return {"topology": self.topology, "width": self.width, "height": self.height}

    def __repr__(self):
        return f"Lattice({self.topology}, {self.width}x{self.height})"

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash((self.topology, self.width, self.height))

    # ------------------------------------------------------------------
    def _add_edge(self, kind, x, y, s, t):
        self._edge_at[(kind, x, y)] = len(self.edges)
        self.edges.append((s, t, kind, x, y))

    def _wrap(self, x, y):
        if self.topology == "torus":
            return x % self.width, y % self.height
        return x, y

    def vertex(self, x, y):
        x, y = self._wrap(x, y)
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise KeyError(f"no vertex at ({x}, {y})")
        return y * self.width + x

    def vertex_xy(self, v):
        return v % self.width, v // self.width

    def edge(self, kind, x, y):
        x, y = self._wrap(x, y)
        return self._edge_at[(kind, x, y)]

    def has_edge(self, kind, x, y):
        return (kind,) + self._wrap(x, y) in self._edge_at

    def face(self, i, j):
        return self._face_at[self._wrap(i, j)]

    def has_face(self, i, j):
        return self._wrap(i, j) in self._face_at

    def edge_name(self, e):
        s, t, kind, x, y = self.edges[e]
        return f"{kind}({x},{y})"

    @property
    def n_vertices(self):
        return self.width * self.height

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    # ------------------------------------------------------------------
    def _star_entry(self, v, d):
        x, y = self.vertex_xy(v)
        if d == "E" and self.has_edge("H", x, y):
            return self.edge("H", x, y), True
        if d == "N" and self.has_edge("V", x, y):
            return self.edge("V", x, y), True
        if d == "W" and self.has_edge("H", x - 1, y):
            return self.edge("H", x - 1, y), False
        if d == "S" and self.has_edge("V", x, y - 1):
            return self.edge("V", x, y - 1), False
        return None

    def vertex_star(self, v, start="E"):
        """Edges at v as (edge, outgoing) pairs, anticlockwise from ``start``."""
        order = list(_DIRS)
        k = order.index(start)
        out = []
        for d in order[k:] + order[:k]:
            entry = self._star_entry(v, d)
            if entry is not None:
                out.append(entry)
        return out

    def face_corners(self, p):
        """Corners of p clockwise from the lower-left: LL, UL, UR, LR."""
        i, j = self.faces[p]
        return [self.vertex(i, j), self.vertex(i, j + 1), self.vertex(i + 1, j + 1),
                self.vertex(i + 1, j)]

    def face_boundary(self, p):
        """(edge, sign) clockwise from the lower-left corner."""
        i, j = self.faces[p]
        return [(self.edge("V", i, j), 1), (self.edge("H", i, j + 1), 1),
                (self.edge("V", i + 1, j), -1), (self.edge("H", i, j), -1)]

    def face_word(self, site: Site):
        """Clockwise boundary word of the face starting at the cilium."""
        corners = self.face_corners(site.p)
        if site.v not in corners:
            raise NonAdjacentSite(f"vertex {site.v} is not on face {site.p}")
        k = corners.index(site.v)
        b = self.face_boundary(site.p)
        return b[k:] + b[:k]

    def quadrant(self, site: Site):
        """Position of the face relative to the vertex: NE, NW, SW or SE."""
        corners = self.face_corners(site.p)
        if site.v not in corners:
            raise NonAdjacentSite(f"vertex {site.v} is not on face {site.p}")
        return ["NE", "SE", "SW", "NW"][corners.index(site.v)]

    def face_in_quadrant(self, v, quad):
        x, y = self.vertex_xy(v)
        dx, dy = _QUADRANTS[quad]
        if not self.has_face(x + dx, y + dy):
            return None
        return self.face(x + dx, y + dy)

    def site(self, vx, vy, fi, fj):
        s = Site(self.vertex(vx, vy), self.face(fi, fj))
        self.quadrant(s)
        return s

    def vertex_faces(self, v):
        return [f for f in (self.face_in_quadrant(v, q) for q in _CLOCKWISE_FACES) if f is not None]

    def is_interior_vertex(self, v):
        return len(self.vertex_star(v)) == 4 and len(self.vertex_faces(v)) == 4

    # ------------------------------------------------------------------
    def triangle(self, a: Site, b: Site) -> Triangle:
        if (a.v == b.v) == (a.p == b.p):
            raise NotARibbon("consecutive sites must differ in exactly one of vertex and face")
        if a.p == b.p:
            cands = []
            for e, sign in self.face_boundary(a.p):
                s, t = self.edges[e][:2]
                if (s, t) == (a.v, b.v):
                    cands.append((e, 1))
                elif (s, t) == (b.v, a.v):
                    cands.append((e, -1))
            if len(cands) != 1:
                raise NotARibbon(f"no unique edge of face {a.p} joins {a.v} and {b.v}")
            return Triangle("direct", cands[0][0], a, b, cands[0][1])
        edges_p = {e for e, _ in self.face_boundary(a.p)}
        edges_q = {e for e, _ in self.face_boundary(b.p)}
        cands = [(e, out) for e, out in self.vertex_star(a.v) if e in edges_p and e in edges_q]
        if len(cands) != 1:
            raise NotARibbon(f"faces {a.p} and {b.p} do not share a unique edge at {a.v}")
        return Triangle("dual", cands[0][0], a, b, 1 if cands[0][1] else -1)

    def boundary_ribbon(self, site: Site) -> "Ribbon":
        """Closed ribbon encircling the vertex of ``site``.

        Its direct part runs clockwise around the 2x2 block of faces meeting
        at the vertex (faces on the right) and its dual part crosses the four
        edges at the vertex.
        """
        v = site.v
        if not self.is_interior_vertex(v):
            raise BoundaryTooClose(f"vertex {v} is not interior")
        x, y = self.vertex_xy(v)
        ring = [(1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]
        try:
            path = [self.vertex(x + dx, y + dy) for dx, dy in ring]
        except KeyError:
            raise BoundaryTooClose(f"vertex {v} is too close to the boundary") from None
        return path_ribbon(self, path, side="right")


def _left_face(lat, a, b, side, strict=True):
    """Face on the given side of the directed step a -> b."""
    ax, ay = lat.vertex_xy(a)
    bx, by = lat.vertex_xy(b)
    dx, dy = _step(lat, ax, ay, bx, by)
    nx, ny = (-dy, dx) if side == "left" else (dy, -dx)
    cx2, cy2 = 2 * ax + dx + nx, 2 * ay + dy + ny   # doubled coordinates of the face centre
    i, j = (cx2 - 1) // 2, (cy2 - 1) // 2
    if not lat.has_face(i, j):
        if not strict:
            return None
        raise BoundaryTooClose(f"no face on the {side} of step {a}->{b}")
    return lat.face(i, j)


def _step(lat, ax, ay, bx, by):
    for d in _DIRS.values():
        x, y = lat._wrap(ax + d[0], ay + d[1])
        if (x, y) == (bx, by):
            return d
    raise NotARibbon(f"vertices ({ax},{ay}) and ({bx},{by}) are not adjacent")


def _rotate(lat, v, p_from, p_to, side):
    """Sites visited rotating at v from p_from to p_to (exclusive of start)."""
    quads = {lat.face_in_quadrant(v, q): q for q in _CLOCKWISE_FACES}
    if p_from not in quads or p_to not in quads:
        raise NotARibbon("face is not incident to the rotation vertex")
    order = _CLOCKWISE_FACES if side == "left" else _CLOCKWISE_FACES[::-1]
    k = order.index(quads[p_from])
    out = []
    for step in range(1, 5):
        q = order[(k + step) % 4]
        f = lat.face_in_quadrant(v, q)
        if f is None:
            raise BoundaryTooClose(f"rotation at vertex {v} leaves the patch")
        out.append(Site(v, f))
        if f == p_to:
            break
    return out


def path_ribbon(lat: Lattice, vertex_path, side="right", start_face=None, end_face=None) -> "Ribbon":
    """Ribbon following a vertex path with its faces on the given side.

    With ``side="right"`` (the handedness for which the ribbon operators of
    this package obey the endpoint exchange relations) the faces lie to the
    right of the direction of travel and the ribbon turns anticlockwise at
    each vertex; ``"left"`` is the mirror image.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    vertex_path = list(vertex_path)
    if len(vertex_path) < 2:
        raise NotARibbon("path needs at least two vertices")
    faces = [_left_face(lat, a, b, side) for a, b in zip(vertex_path, vertex_path[1:])]
    p0 = faces[0] if start_face is None else start_face
    sites = [Site(vertex_path[0], p0)]
    if p0 != faces[0]:
        sites += _rotate(lat, vertex_path[0], p0, faces[0], side)
    for k, b in enumerate(vertex_path[1:]):
        sites.append(Site(b, faces[k]))
        nxt = faces[k + 1] if k + 1 < len(faces) else end_face
        if nxt is not None and nxt != faces[k]:
            sites += _rotate(lat, b, faces[k], nxt, side)
    return Ribbon(lat, sites)


class Ribbon:
    """A ribbon given by its site chain; triangles are inferred."""

    def __init__(self, lattice: Lattice, sites, triangles=None):
        self.lattice = lattice
        self.sites = [s if isinstance(s, Site) else Site(*s) for s in sites]
        if len(self.sites) < 1:
            raise NotARibbon("ribbon needs at least one site")
        for s in self.sites:
            lattice.quadrant(s)
        if triangles is None:
            triangles = [lattice.triangle(a, b) for a, b in zip(self.sites, self.sites[1:])]
        self.triangles = list(triangles)

    @property
    def start(self):
        return self.sites[0]

    @property
    def end(self):
        return self.sites[-1]

    def __len__(self):
        return len(self.triangles)

    def __repr__(self):
        return f"Ribbon({[(s.v, s.p) for s in self.sites]}, {self.classification})"

    @cached_property
    def classification(self):
        return classify_ribbon(self)

    def is_open(self):
        return self.classification in ("open", "strongly-open")

    @cached_property
    def handedness(self):
        """"right" when every triangle has its face on the right of the
        direct path (dual triangles then turn anticlockwise), "left" for the
        mirror image and "mixed" otherwise."""
        kinds = {_triangle_side(self.lattice, t) for t in self.triangles}
        if len(kinds) == 1:
            return kinds.pop()
        return "mixed" if kinds else "right"

    def reversed(self):
        return Ribbon(self.lattice, self.sites[::-1], [t.reversed() for t in self.triangles[::-1]])

    def edges(self):
        return sorted({t.edge for t in self.triangles})

    def to_spec(self):
        return [{"kind": t.kind, "edge": t.edge, "from": [t.start.v, t.start.p],
                 "to": [t.end.v, t.end.p]} for t in self.triangles]


def _triangle_side(lat, t: Triangle):
    if t.kind == "direct":
        return "right" if _left_face(lat, t.start.v, t.end.v, "right", strict=False) == t.start.p \
            else "left"
    a = lat.quadrant(t.start)
    b = lat.quadrant(t.end)
    k = _CLOCKWISE_FACES.index(a)
    return "left" if _CLOCKWISE_FACES[(k + 1) % 4] == b else "right"


def classify_ribbon(r: Ribbon) -> str:
    s = r.sites
    if len(s) > 1 and s[0] == s[-1]:
        return "closed"
    if s[0].v == s[-1].v or s[0].p == s[-1].p:
        return "other"
    for attr in ("v", "p"):
        seen, last = set(), None
        for site in s:
            x = getattr(site, attr)
            if x != last and x in seen:
                return "open"
            seen.add(x)
            last = x
    return "strongly-open"


def concat_ribbons(r1: Ribbon, r2: Ribbon) -> Ribbon:
    """r2 after r1: the end site of r1 must be the start site of r2."""
    if r1.end != r2.start:
        raise EndpointMismatch("end of the first ribbon is not the start of the second")
    return Ribbon(r1.lattice, r1.sites + r2.sites[1:], r1.triangles + r2.triangles)


def ribbon_from_spec(lat: Lattice, spec) -> Ribbon:
    """Build a ribbon from a list of triangle records or a list of sites."""
    if spec and isinstance(spec[0], dict):
        sites = [Site(*spec[0]["from"])] + [Site(*t["to"]) for t in spec]
        rib = Ribbon(lat, sites)
        for t, rec in zip(rib.triangles, spec):
            if t.kind != rec["kind"] or t.edge != rec["edge"]:
                raise NotARibbon("triangle record disagrees with its sites")
        return rib
    return Ribbon(lat, [Site(*s) for s in spec])


def sites_disjoint(sites) -> bool:
    """Pairwise disjoint: no shared vertex or face."""
    vs = [s.v for s in sites]
    ps = [s.p for s in sites]
    return len(set(vs)) == len(vs) and len(set(ps)) == len(ps)
