"""D(G) site actions, vertex and face projectors, vacuum states and the
vacuum-dimension computations (lattice rank, gauge-orbit basis and the
group-theoretic count)."""

from __future__ import annotations

import itertools

import numpy as np

from .double import DoubleElement, DoubleIrrep, projector
from .errors import SupportBudgetExceeded
from .groups import GroupTable
from .lattice import Lattice, Site
from .state import (HilbertSpace, MonomialOp, Multiplier, Operator, OperatorCheck, SparseState,
                    inner, rank_of_span)


def _vertex_updates(space: HilbertSpace, h: int, v: int):
    G = space.G
    ups = []
    for e, outgoing in space.lattice.vertex_star(v):
        if outgoing:
            ups.append((e, Multiplier(h), None))
        else:
            ups.append((e, None, Multiplier(int(G.inv[h]))))
    return tuple(ups)


def vertex_action(space: HilbertSpace, h: int, v: int) -> Operator:
    """h acting at v: left multiplication on outgoing edges, right
    multiplication by h^-1 on incoming ones."""
    return Operator.monomial(space, MonomialOp(updates=_vertex_updates(space, h, v)))


def face_action(space: HilbertSpace, table, site: Site) -> Operator:
    """A function a on G acting at the face of ``site`` through the
    clockwise boundary word read from the cilium."""
    word = tuple(space.lattice.face_word(site))
    return Operator.monomial(space, MonomialOp(pre=((word, np.asarray(table, complex)),)))


def face_delta(space: HilbertSpace, g: int, site: Site) -> Operator:
    t = np.zeros(space.G.order)
    t[g] = 1.0
    return face_action(space, t, site)


def site_action(space: HilbertSpace, x: DoubleElement, site: Site) -> Operator:
    """x in D(G) acting at ``site``: sum_h (face table x[:, h]) o h-vertex."""
    word = tuple(space.lattice.face_word(site))
    terms = []
    for h in range(space.G.order):
        col = x.coef[:, h]
        if not np.any(col):
            continue
        m = MonomialOp(updates=_vertex_updates(space, h, site.v), post=((word, col.copy()),))
        terms.append((1.0, (m,)))
    return Operator(space, terms)


def site_action_right(space: HilbertSpace, x: DoubleElement, site: Site) -> Operator:
    """Right action psi <| x := S(x) |> psi."""
    from .double import double_antipode
    return site_action(space, double_antipode(x), site)


def a_op(space: HilbertSpace, v: int) -> Operator:
    n = space.G.order
    return Operator(space, [(1.0 / n, (MonomialOp(updates=_vertex_updates(space, h, v)),))
                            for h in range(n)])


def b_op(space: HilbertSpace, p: int) -> Operator:
    corner = space.lattice.face_corners(p)[0]
    return face_delta(space, space.G.id, Site(corner, p))


def site_projector(space: HilbertSpace, R: DoubleIrrep, site: Site) -> Operator:
    return site_action(space, projector(R), site)


def site_projector_measure(space, R: DoubleIrrep, site: Site, state: SparseState):
    """Apply P_{C,pi} at ``site``; returns the projected state and the
    probability ||P psi||^2 / ||psi||^2."""
    out = site_projector(space, R, site).apply(state)
    n0 = state.norm() ** 2
    return out, (out.norm() ** 2 / n0 if n0 > 0 else 0.0)


# ---------------------------------------------------------------------------
# vacuum states


def vacuum_plane(space: HilbertSpace, normalize=True) -> SparseState:
    """prod_v A(v) applied to the all-identity configuration."""
    state = space.identity_config_state()
    for v in range(space.lattice.n_vertices):
        state = a_op(space, v).apply(state)
    return state.normalized() if normalize else state


def vacuum_torus(space: HilbertSpace) -> SparseState:
    """The vacuum in the trivial-holonomy sector of a torus."""
    return vacuum_plane(space)


def stabilizer_deviation(space: HilbertSpace, state: SparseState, vertices=None, faces=None):
    """Largest |A(v) psi - psi| and |B(p) psi - psi| over the given sets."""
    lat = space.lattice
    vertices = range(lat.n_vertices) if vertices is None else vertices
    faces = range(lat.n_faces) if faces is None else faces
    dev = 0.0
    for v in vertices:
        dev = max(dev, (a_op(space, v).apply(state) - state).norm())
    for p in faces:
        dev = max(dev, (b_op(space, p).apply(state) - state).norm())
    return dev


def energy(space: HilbertSpace, state: SparseState) -> float:
    """sum_v (1 - <A(v)>) + sum_p (1 - <B(p)>) for a normalized state."""
    lat = space.lattice
    n2 = state.norm() ** 2
    total = 0.0
    for v in range(lat.n_vertices):
        total += 1 - inner(state, a_op(space, v).apply(state)).real / n2
    for p in range(lat.n_faces):
        total += 1 - inner(state, b_op(space, p).apply(state)).real / n2
    return total


# ---------------------------------------------------------------------------
# flat configurations and the vacuum dimension on a torus


def _face_words(lat: Lattice):
    return [tuple(lat.face_boundary(p)) for p in range(lat.n_faces)]


def spanning_tree(lat: Lattice):
    """Bottom row of horizontal edges plus every vertical edge below the top row."""
    tree = [lat.edge("H", x, 0) for x in range(lat.width - 1)]
    tree += [lat.edge("V", x, y) for y in range(lat.height - 1) for x in range(lat.width)]
    return tree


def _solve_plan(lat: Lattice, fixed):
    """Order in which unknown edges are solved from face constraints.

    Returns (free co-tree edges, [(face, edge solved from it)]).  When no
    face has a single unknown edge, one unknown edge is promoted to free.
    """
    words = _face_words(lat)
    known = set(fixed)
    free, plan = [], []
    unknown = [e for e in range(lat.n_edges) if e not in known]
    while unknown:
        progress = False
        for p, word in enumerate(words):
            missing = {e for e, _ in word if e not in known}
            if len(missing) == 1:
                (e,) = missing
                if sum(1 for f, _ in word if f == e) != 1:
                    continue
                plan.append((p, e))
                known.add(e)
                progress = True
        unknown = [e for e in unknown if e not in known]
        if unknown and not progress:
            free.append(unknown[0])
            known.add(unknown[0])
            unknown = unknown[1:]
    return free, plan


def _solve_edges(G: GroupTable, configs, word, e):
    """Set edge e so that the word evaluates to the identity (vectorised)."""
    mul, inv = G.mul, G.inv
    k = [i for i, (f, _) in enumerate(word) if f == e][0]
    pre = np.full(configs.shape[0], G.id)
    for f, s in word[:k]:
        x = configs[:, f]
        pre = mul[pre, x if s > 0 else inv[x]]
    post = np.full(configs.shape[0], G.id)
    for f, s in word[k + 1:]:
        x = configs[:, f]
        post = mul[post, x if s > 0 else inv[x]]
    # pre * y * post = e  =>  y = pre^-1 post^-1
    y = mul[inv[pre], inv[post]]
    sign = word[k][1]
    configs[:, e] = y if sign > 0 else inv[y]


def gauge_fixed_flat_configs(space: HilbertSpace) -> np.ndarray:
    """Flat configurations with every spanning-tree edge set to e."""
    G, lat = space.G, space.lattice
    tree = spanning_tree(lat)
    free, plan = _solve_plan(lat, tree)
    n = G.order
    count = n ** len(free)
    if count > space.support_cap:
        raise SupportBudgetExceeded(count, space.support_cap)
    configs = np.full((count, lat.n_edges), G.id, dtype=np.int64)
    for k, assignment in enumerate(itertools.product(range(n), repeat=len(free))):
        configs[k, free] = assignment
    words = _face_words(lat)
    for p, e in plan:
        _solve_edges(G, configs, words[p], e)
    flat = np.ones(count, dtype=bool)
    for word in words:
        flat &= space.eval_word(configs, word) == G.id
    return configs[flat].astype(np.uint8)


def kappa_basis(space: HilbertSpace):
    """Gauge-orbit sums of flat configurations, one per class of holonomies
    modulo simultaneous conjugation.  Each state has amplitude 1 on its orbit."""
    G = space.G
    fixed = gauge_fixed_flat_configs(space)
    seen = set()
    states, labels = [], []
    projector_all = [a_op(space, v) for v in range(space.lattice.n_vertices)]
    for row in fixed:
        key = row.tobytes()
        if key in seen:
            continue
        orbit = {G.mul[G.mul[g, row], G.inv[g]].astype(np.uint8).tobytes() for g in range(G.order)}
        seen |= orbit
        st = space.basis_state(row)
        for A in projector_all:
            st = A.apply(st)
        st = st * (1.0 / np.abs(st.amps).max())
        states.append(st)
        labels.append(row.tolist())
    return states, labels


def enumerate_flat_configs(space: HilbertSpace, max_configs=2 ** 22) -> np.ndarray:
    """All flat configurations by brute force over G^E (small lattices only)."""
    G, lat = space.G, space.lattice
    total = G.order ** lat.n_edges
    if total > max_configs:
        raise SupportBudgetExceeded(total, max_configs)
    idx = np.arange(total, dtype=np.int64)
    configs = np.empty((total, lat.n_edges), dtype=np.uint8)
    for e in range(lat.n_edges):
        configs[:, e] = idx % G.order
        idx //= G.order
    flat = np.ones(total, dtype=bool)
    for word in _face_words(lat):
        flat &= space.eval_word(configs, word) == G.id
    return configs[flat]


def vacuum_dimension_lattice(space: HilbertSpace, max_configs=2 ** 22):
    """Rank of the image of prod A prod B on the full configuration basis.

    prod B kills every non-flat configuration and prod A maps a flat one to
    its gauge-orbit average, so it is enough to apply prod A to one
    configuration per orbit.  Returns (rank, states).
    """
    flat = enumerate_flat_configs(space, max_configs)
    A = [a_op(space, v) for v in range(space.lattice.n_vertices)]
    seen = set()
    images = []
    keys = space.keys(flat)
    for row, key in zip(flat, keys):
        k = key.tobytes() if isinstance(key, np.void) else int(key)
        if k in seen:
            continue
        st = space.basis_state(row)
        for op in A:
            st = op.apply(st)
        for kk in st.keys:
            seen.add(kk.tobytes() if isinstance(kk, np.void) else int(kk))
        images.append(st)
    return rank_of_span(images), images


def _commutator(G, a, b):
    return G.mul[G.mul[a, b], G.mul[G.inv[a], G.inv[b]]]


def hom_oracle(G: GroupTable, genus: int = 1) -> int:
    """|Hom(pi_1(Sigma_k), G) / G| by Burnside's lemma.

    A homomorphism is a tuple (a_1, b_1, ..., a_k, b_k) with prod [a_i, b_i]
    = e; the number of conjugation orbits is the average number of such
    tuples fixed by each g, i.e. lying in the centralizer of g.
    """
    n = G.order
    total = 0
    for g in range(n):
        cent = [x for x in range(n) if G.conj(x, g) == g]
        c = np.array(cent)
        pairs_a, pairs_b = np.meshgrid(c, c, indexing="ij")
        comm = _commutator(G, pairs_a.ravel(), pairs_b.ravel())
        # distribution of commutator values over one handle
        dist = np.bincount(comm, minlength=n).astype(object)
        acc = np.zeros(n, dtype=object)
        acc[G.id] = 1
        for _ in range(genus):
            nxt = np.zeros(n, dtype=object)
            for x in range(n):
                if acc[x]:
                    for y in range(n):
                        if dist[y]:
                            nxt[G.mul[x, y]] += acc[x] * dist[y]
            acc = nxt
        total += int(acc[G.id])
    assert total % n == 0
    return total // n


def check_site_representation(space: HilbertSpace, site: Site, checker: OperatorCheck = None):
    """h |> delta_g |> = delta_{hgh^-1} |> h |>, plus the group and function
    algebra relations, as operator identities."""
    G = space.G
    checker = checker or OperatorCheck(space)
    dev = 0.0
    n = G.order
    hs = [vertex_action(space, h, site.v) for h in range(n)]
    ds = [face_delta(space, g, site) for g in range(n)]
    for h in range(n):
        for g in range(n):
            dev = max(dev, checker.deviation(hs[h] @ ds[g], ds[G.conj(h, g)] @ hs[h]))
            dev = max(dev, checker.deviation(hs[h] @ hs[g], hs[G.mul[h, g]]))
            dev = max(dev, checker.deviation(ds[h] @ ds[g], ds[g] if g == h else Operator.zero(space)))
    total = Operator.zero(space)
    for d in ds:
        total = total + d
    dev = max(dev, checker.deviation(total, Operator.identity(space)))
    return {"name": "site_representation", "passed": dev < 1e-10, "max_deviation": dev}
