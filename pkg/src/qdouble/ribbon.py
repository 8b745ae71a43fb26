"""Ribbon operators F^{h,g}, their quasiparticle-basis combinations F' and
traces W, and the checks built on them (commutation relations, L-space
ranks, Bell states, the S3 logical qubit)."""

from __future__ import annotations

import numpy as np

from .double import DoubleIrrep, double_antipode, double_irreps, projector
from .errors import NotOpen, SitesNotDisjoint
from .lattice import Ribbon, Triangle, sites_disjoint
from .site import b_op, face_delta, site_action, vertex_action
from .state import (HilbertSpace, MonomialOp, Multiplier, Operator, OperatorCheck, SparseState,
                    gram_matrix, inner, rank_of_span)


def triangle_op(space: HilbertSpace, t: Triangle, label: int) -> Operator:
    """T^g for a direct triangle, L^h for a dual one."""
    G = space.G
    if t.kind == "direct":
        table = np.zeros(G.order)
        table[label] = 1.0
        return Operator.monomial(space, MonomialOp(pre=((((t.edge, t.sign),), table),)))
    if t.sign > 0:
        up = (t.edge, Multiplier(label), None)
    else:
        up = (t.edge, None, Multiplier(int(G.inv[label])))
    return Operator.monomial(space, MonomialOp(updates=(up,)))


def _compile(space: HilbertSpace, ribbon: Ribbon, h: int, g: int) -> MonomialOp:
    """Single monomial for F^{h,g}: dual triangles act by k^-1 h k where k is
    the direct-path product so far; the predicate is delta_g(k) at the end."""
    G = space.G
    word = []
    ups = []
    hinv = int(G.inv[h])
    for t in ribbon.triangles:
        if t.kind == "direct":
            word.append((t.edge, t.sign))
        elif h != G.id:
            w = tuple(word)
            if t.sign > 0:
                ups.append((t.edge, Multiplier(h, w), None))
            else:
                ups.append((t.edge, None, Multiplier(hinv, w)))
    table = np.zeros(G.order)
    table[g] = 1.0
    return MonomialOp(pre=((tuple(word), table),), updates=tuple(ups))


def ribbon_op(space: HilbertSpace, ribbon: Ribbon, h: int, g: int, require_open=True) -> Operator:
    if require_open and not ribbon.is_open():
        raise NotOpen(f"ribbon is {ribbon.classification}")
    return Operator.monomial(space, _compile(space, ribbon, h, g))


def ribbon_ops(space, ribbon, require_open=True):
    """All F^{h,g} on one ribbon, indexed [h][g]."""
    n = space.G.order
    return [[ribbon_op(space, ribbon, h, g, require_open) for g in range(n)] for h in range(n)]


def ribbon_sum(space, ribbon, coefs, require_open=True) -> Operator:
    """sum_{h,g} coefs[h, g] F^{h,g}."""
    terms = []
    for h, g in zip(*np.nonzero(np.abs(coefs) > 1e-15)):
        terms.append((complex(coefs[h, g]), (_compile(space, ribbon, int(h), int(g)),)))
    if require_open and not ribbon.is_open():
        raise NotOpen(f"ribbon is {ribbon.classification}")
    return Operator(space, terms)


def quasiparticle_coefs(R: DoubleIrrep, u, v) -> np.ndarray:
    """Coefficients of F'^{C,pi;u,v} = sum_n pi(n^-1)_{ji} F^{c, q_c n q_d^-1}."""
    G = R.G
    q = G.conjugacy.section
    (c, i), (d, j) = u, v
    coefs = np.zeros((G.order, G.order), complex)
    for n in R.centralizer:
        coefs[c, G.m(q[c], n, G.inv[q[d]])] += R.pi(G.inv[n])[j, i]
    return coefs


def trace_coefs(R: DoubleIrrep, character=None, section=None, cls=None) -> np.ndarray:
    """Coefficients of W^{C,pi} = sum_c sum_n chi(n^-1) F^{c, q_c n q_c^-1}.

    ``character`` overrides Tr pi (used for tensor products), ``section`` and
    ``cls`` override the class data (used for the dual class C*)."""
    G = R.G
    q = G.conjugacy.section if section is None else section
    chi = character or R.pi.character
    coefs = np.zeros((G.order, G.order), complex)
    cls = R.cls if cls is None else cls
    cent = R.centralizer
    for c in cls:
        for n in cent:
            coefs[c, G.m(q[c], n, G.inv[q[c]])] += chi(G.inv[n])
    return coefs


def quasiparticle_ribbon(space, ribbon, R: DoubleIrrep, u, v) -> Operator:
    return ribbon_sum(space, ribbon, quasiparticle_coefs(R, u, v))


def trace_ribbon(space, ribbon, R: DoubleIrrep, character=None) -> Operator:
    return ribbon_sum(space, ribbon, trace_coefs(R, character))


def dual_trace_coefs(R: DoubleIrrep) -> np.ndarray:
    """W^{C*, pi*}: class C^-1 with base point r^-1, section q_{c^-1} = q_c
    and the conjugate irrep of the same centralizer."""
    G = R.G
    q = G.conjugacy.section
    cls = [int(G.inv[c]) for c in R.cls]
    qstar = np.array(q)
    for c in R.cls:
        qstar[G.inv[c]] = q[c]
    return trace_coefs(R, character=lambda n: np.conj(R.pi.character(n)), section=qstar, cls=cls)


# ---------------------------------------------------------------------------
# checks


def _report(name, dev, tol, **extra):
    out = {"name": name, "passed": bool(dev < tol), "max_deviation": float(dev)}
    out.update(extra)
    return out


def check_ribbon_algebra(space, ribbon, checker: OperatorCheck, tol=1e-10):
    """F^{h,g} F^{h',g'} = delta_{g,g'} F^{hh',g}, adjoint F^{h^-1,g}, and
    (F^{h,g})^dagger F^{h,g} = F^{e,g}, exhaustively over labels."""
    G = space.G
    F = ribbon_ops(space, ribbon, require_open=False)
    zero = Operator.zero(space)
    dev = 0.0
    n = G.order
    for h in range(n):
        for g in range(n):
            for h2 in range(n):
                for g2 in range(n):
                    rhs = F[G.mul[h, h2]][g] if g == g2 else zero
                    dev = max(dev, checker.deviation(F[h][g] @ F[h2][g2], rhs))
            dev = max(dev, checker.deviation(F[h][g].adjoint(), F[G.inv[h]][g]))
            dev = max(dev, checker.deviation(F[h][g].adjoint() @ F[h][g], F[G.id][g]))
    return _report("ribbon_algebra", dev, tol)


def check_ribbon_commutation(space: HilbertSpace, ribbon: Ribbon, checker: OperatorCheck,
                             tol=1e-10, labels=None):
    """The endpoint exchange relations and commutation with vertex actions
    and B(p) away from the endpoints."""
    G = space.G
    lat = space.lattice
    s0, s1 = ribbon.start, ribbon.end
    n = G.order
    labels = labels or [(h, g) for h in range(n) for g in range(n)]
    F = {(h, g): ribbon_op(space, ribbon, h, g) for h in range(n) for g in range(n)}
    dev = {"start_vertex": 0.0, "start_face": 0.0, "end_vertex": 0.0, "end_face": 0.0,
           "away_vertex": 0.0, "away_face": 0.0}
    for h, g in labels:
        for f in range(n):
            a = vertex_action(space, f, s0.v)
            dev["start_vertex"] = max(dev["start_vertex"], checker.deviation(
                a @ F[h, g], F[G.conj(f, h), G.mul[f, g]] @ a))
            b = face_delta(space, f, s0)
            dev["start_face"] = max(dev["start_face"], checker.deviation(
                b @ F[h, g], F[h, g] @ face_delta(space, G.mul[G.inv[h], f], s0)))
            a = vertex_action(space, f, s1.v)
            dev["end_vertex"] = max(dev["end_vertex"], checker.deviation(
                a @ F[h, g], F[h, G.mul[g, G.inv[f]]] @ a))
            b = face_delta(space, f, s1)
            target = G.m(f, G.inv[g], h, g)
            dev["end_face"] = max(dev["end_face"], checker.deviation(
                b @ F[h, g], F[h, g] @ face_delta(space, target, s1)))
    touched_v = {s.v for s in ribbon.sites}
    touched_p = {s.p for s in ribbon.sites}
    for v in range(lat.n_vertices):
        if v in (s0.v, s1.v):
            continue
        for f in range(n):
            a = vertex_action(space, f, v)
            for h, g in labels:
                if v not in touched_v and (h, g) != labels[0]:
                    continue
                dev["away_vertex"] = max(dev["away_vertex"],
                                         checker.deviation(a @ F[h, g], F[h, g] @ a))
    for p in range(lat.n_faces):
        if p in (s0.p, s1.p):
            continue
        B = b_op(space, p)
        for h, g in labels:
            if p not in touched_p and (h, g) != labels[0]:
                continue
            dev["away_face"] = max(dev["away_face"], checker.deviation(B @ F[h, g], F[h, g] @ B))
    worst = max(dev.values())
    return _report("ribbon_commutation", worst, tol, parts=dev)


def group_basis(space, ribbon, vacuum):
    """psi^{h,g} = F^{h,g}|vac> for all labels, row-major in (h, g)."""
    n = space.G.order
    return [ribbon_op(space, ribbon, h, g).apply(vacuum) for h in range(n) for g in range(n)]


def check_group_basis(space, ribbon, vacuum, tol=1e-10):
    """<psi^{h,g}|psi^{h',g'}> = delta delta / |G| (vacuum normalized)."""
    states = group_basis(space, ribbon, vacuum)
    gram = gram_matrix(states)
    n = space.G.order
    dev = float(np.abs(gram - np.eye(n * n) / n).max())
    rank = rank_of_span(states)
    return _report("group_basis_orthogonality", dev, tol, rank=rank,
                   support_used=max(s.support for s in states)), states


def l_space_rank(space, ribbons, vacuum):
    """Rank of span{prod_k F_k^{h_k,g_k}|vac>} over all label tuples."""
    G = space.G
    n = G.order
    for r in ribbons:
        if not r.is_open():
            raise NotOpen("L-space ribbons must be open")
    states = [vacuum]
    for r in ribbons:
        F = [[ribbon_op(space, r, h, g) for g in range(n)] for h in range(n)]
        states = [F[h][g].apply(s) for s in states for h in range(n) for g in range(n)]
    return rank_of_span(states), states


def check_sites_disjoint(sites):
    if not sites_disjoint(sites):
        raise SitesNotDisjoint("sites share a vertex or a face")


def bell_state(space, ribbon, vacuum) -> SparseState:
    """|Bell; xi> = sum_h F^{h,e}|vac>."""
    G = space.G
    coefs = np.zeros((G.order, G.order))
    coefs[:, G.id] = 1.0
    return ribbon_sum(space, ribbon, coefs).apply(vacuum)


def check_block_teleport(space, ribbon, vacuum, tol=1e-10):
    """P |>_{s0} Bell = Bell <|_{s1} P != 0 for every irrep, plus the
    decomposition of Bell into the weighted traces W."""
    G = space.G
    bell = bell_state(space, ribbon, vacuum)
    s0, s1 = ribbon.start, ribbon.end
    dev = 0.0
    norms = {}
    recon = space.zero()
    for R in double_irreps(G):
        P = projector(R)
        left = site_action(space, P, s0).apply(bell)
        right = site_action(space, double_antipode(P), s1).apply(bell)
        dev = max(dev, (left - right).norm())
        norms[R.name] = left.norm()
        # mini Bell state: (dim pi / |C_G|) W^{C,pi} |vac>
        mini = trace_ribbon(space, ribbon, R).apply(vacuum) * (R.pi.dim / len(R.centralizer))
        dev = max(dev, (mini - left).norm())
        recon = recon + mini
    dev = max(dev, (recon - bell).norm())
    nonzero = min(norms.values()) > 1e-6
    rep = _report("block_teleport", dev, tol, sector_norms=norms, all_nonzero=nonzero,
                  support_used=bell.support)
    rep["passed"] = rep["passed"] and nonzero
    return rep


# ---------------------------------------------------------------------------
# D(S3) logical qubit


class LogicalQubit:
    """|0_L> = W^tau_xi' W^tau_xi |vac>, |1_L> = W^sigma_xi'' |0_L>."""

    def __init__(self, space, sites, xi, xi2, xi3, vacuum):
        check_sites_disjoint(sites)
        G = space.G
        self.space = space
        self.sites = sites
        self.ribbons = (xi, xi2, xi3)
        self.vacuum = vacuum
        irreps = {R.name: R for R in double_irreps(G)}
        self.tau = irreps[f"{G.labels[G.id]},tau"]
        self.sigma = irreps[f"{G.labels[G.id]},sigma"]
        self.W_tau = [trace_ribbon(space, r, self.tau) for r in (xi, xi2)]
        self.X_L = trace_ribbon(space, xi3, self.sigma)
        self.zero = self.W_tau[1].apply(self.W_tau[0].apply(vacuum))
        self.one = self.X_L.apply(self.zero)

    def check(self, checker: OperatorCheck, tol=1e-10):
        space = self.space
        ov = abs(inner(self.zero, self.one)) / (self.zero.norm() * self.one.norm())
        P = projector(self.tau)
        fix = 0.0
        for s in self.sites:
            Ps = site_action(space, P, s)
            for st in (self.zero, self.one):
                fix = max(fix, (Ps.apply(st) - st).norm() / st.norm())
        x2 = checker.deviation(self.X_L @ self.X_L, Operator.identity(space))
        supports = [self.vacuum.support, self.zero.support, self.one.support]
        diag = all(op.is_diagonal for op in self.W_tau + [self.X_L])
        parts = {"overlap": ov, "projector_fix": fix, "x_squared": x2}
        return _report("logical_qubit", max(parts.values()), tol, parts=parts,
                       support_used=max(supports), vacuum_support=self.vacuum.support,
                       support_within_vacuum=max(supports) <= self.vacuum.support,
                       all_diagonal=diag)


def k_gate(X_a: Operator, X_b: Operator) -> Operator:
    """K_{a,b} = (1 + X_a + X_b - X_a X_b) / 2."""
    space = X_a.space
    return (Operator.identity(space) + X_a + X_b - X_a @ X_b) * 0.5
