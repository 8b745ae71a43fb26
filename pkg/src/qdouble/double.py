"""The quantum double D(G): products, antipode, irreps (C, pi), central
projectors and the Peter-Weyl matrix-unit map."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GroupMismatch, ToleranceExceeded
from .groups import GroupTable, IrrepTable, centralizer_irreps

ALGEBRA_TOL = 1e-12


class DoubleElement:
    """An element sum_{g,h} coef[g, h] delta_g (x) h of D(G).

    D(G) has dimension |G|^2, which is at most a few hundred here, so the
    coefficients are kept as a dense array.
    """

    __slots__ = ("G", "coef")

    def __init__(self, G: GroupTable, coef=None):
        self.G = G
        n = G.order
        self.coef = np.zeros((n, n), dtype=complex) if coef is None else np.asarray(coef, dtype=complex)

    @classmethod
    def basis(cls, G, g, h):
        x = cls(G)
        x.coef[g, h] = 1.0
        return x

    @classmethod
    def one(cls, G):
        x = cls(G)
        x.coef[:, G.id] = 1.0
        return x

    @classmethod
    def group_element(cls, G, h):
        x = cls(G)
        x.coef[:, h] = 1.0
        return x

    @classmethod
    def delta(cls, G, g):
        return cls.basis(G, g, G.id)

    def _check(self, other):
        if other.G is not self.G and other.G != self.G:
            raise GroupMismatch("double elements over different groups")

    def __add__(self, other):
        self._check(other)
        return DoubleElement(self.G, self.coef + other.coef)

    def __sub__(self, other):
        self._check(other)
        return DoubleElement(self.G, self.coef - other.coef)

    def __mul__(self, scalar):
        return DoubleElement(self.G, self.coef * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return double_product(self, other)

    def norm(self):
        return float(np.abs(self.coef).max()) if self.coef.size else 0.0

    def terms(self, tol=1e-15):
        """Nonzero (g, h, coefficient) triples."""
        gs, hs = np.nonzero(np.abs(self.coef) > tol)
        return [(int(g), int(h), complex(self.coef[g, h])) for g, h in zip(gs, hs)]

    def __repr__(self):
        L = self.G.labels
        parts = [f"{c:.3g}*d_{L[g]}(x){L[h]}" for g, h, c in self.terms()]
        return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=None)
def _conj_perms(G: GroupTable):
    # perm[h][g] = h^-1 g h
    return np.array([[G.conj(G.inv[h], g) for g in range(G.order)] for h in range(G.order)])


def double_product(x: DoubleElement, y: DoubleElement) -> DoubleElement:
    """(d_g (x) h)(d_g' (x) h') = [g = h g' h^-1] d_g (x) h h'."""
    x._check(y)
    G = x.G
    perm = _conj_perms(G)
    out = np.zeros_like(x.coef)
    for h in range(G.order):
        xh = x.coef[:, h]
        if not xh.any():
            continue
        yh = y.coef[perm[h], :]
        for h2 in range(G.order):
            out[:, G.mul[h, h2]] += xh * yh[:, h2]
    return DoubleElement(G, out)


def double_antipode(x: DoubleElement) -> DoubleElement:
    """S(d_g (x) h) = d_{h^-1 g^-1 h} (x) h^-1."""
    G = x.G
    out = np.zeros_like(x.coef)
    for g, h, c in x.terms(0.0):
        hi = G.inv[h]
        out[G.conj(hi, G.inv[g]), hi] += c
    return DoubleElement(G, out)


def double_coproduct(x: DoubleElement) -> np.ndarray:
    """Coefficients of Delta(x) as an array indexed [g1, h1, g2, h2]."""
    G = x.G
    n = G.order
    out = np.zeros((n, n, n, n), dtype=complex)
    for g, h, c in x.terms(0.0):
        for f in range(n):
            out[f, h, G.mul[G.inv[f], g], h] += c
    return out


def double_counit(x: DoubleElement) -> complex:
    return complex(x.coef[x.G.id, :].sum())


def check_hopf_axioms(G: GroupTable) -> dict:
    """Associativity and the antipode law on all basis elements."""
    n = G.order
    basis = [DoubleElement.basis(G, g, h) for g in range(n) for h in range(n)]
    dev = 0.0
    for a in basis:
        for b in basis:
            ab = a @ b
            for c in basis[:: max(1, len(basis) // 12)]:
                dev = max(dev, ((ab @ c) - (a @ (b @ c))).norm())
    for a in basis:
        cop = double_coproduct(a)
        left = DoubleElement(G)
        right = DoubleElement(G)
        for g1, h1, g2, h2 in zip(*np.nonzero(cop)):
            c = cop[g1, h1, g2, h2]
            x1 = DoubleElement.basis(G, g1, h1)
            x2 = DoubleElement.basis(G, g2, h2)
            left = left + (double_antipode(x1) @ x2) * c
            right = right + (x1 @ double_antipode(x2)) * c
        target = DoubleElement.one(G) * double_counit(a)
        dev = max(dev, (left - target).norm(), (right - target).norm())
        dev = max(dev, (double_antipode(double_antipode(a)) - a).norm())
    return {"name": "double_hopf_axioms", "passed": dev < ALGEBRA_TOL, "max_deviation": dev}


# ---------------------------------------------------------------------------
# irreps


@dataclass(frozen=True)
class DoubleIrrep:
    """The irrep V_{C,pi}: basis c (x) e_i, ordered class-element major."""

    G: GroupTable
    class_index: int
    pi: IrrepTable

    @property
    def cls(self):
        return self.G.conjugacy.classes[self.class_index]

    @property
    def rep(self):
        return self.G.conjugacy.reps[self.class_index]

    @property
    def centralizer(self):
        return self.G.conjugacy.centralizers[self.class_index]

    @property
    def dim(self):
        return len(self.cls) * self.pi.dim

    @property
    def name(self):
        return f"{self.G.labels[self.rep]},{self.pi.name}"

    def carrier_basis(self):
        return [(c, i) for c in self.cls for i in range(self.pi.dim)]

    def position(self, c, i):
        return self.cls.index(c) * self.pi.dim + i

    def __hash__(self):
        return hash((id(self.G), self.class_index, self.pi.name))

    def __eq__(self, other):
        return (isinstance(other, DoubleIrrep) and self.G == other.G
                and self.class_index == other.class_index and self.pi.name == other.pi.name)


def double_irreps(G: GroupTable) -> list:
    out = []
    for k in range(len(G.conjugacy.classes)):
        for pi in centralizer_irreps(G, k):
            out.append(DoubleIrrep(G, k, pi))
    return out


def find_irrep(G: GroupTable, rep_label, pi_name) -> DoubleIrrep:
    r = G.index(rep_label)
    for R in double_irreps(G):
        if R.cls.__contains__(r) and R.pi.name == pi_name:
            return R
    raise KeyError(f"no irrep ({rep_label}, {pi_name})")


def irrep_matrix(R: DoubleIrrep, g: int, h: int) -> np.ndarray:
    """Matrix of d_g (x) h on V_{C,pi}:
    c (x) e_i -> [g = h c h^-1] hch^-1 (x) pi(q_{hch^-1}^-1 h q_c) e_i."""
    G = R.G
    q = G.conjugacy.section
    d = R.pi.dim
    M = np.zeros((R.dim, R.dim), dtype=complex)
    for a, c in enumerate(R.cls):
        c2 = G.conj(h, c)
        if c2 != g:
            continue
        b = R.cls.index(c2)
        z = G.mul[G.inv[q[c2]], G.mul[h, q[c]]]
        M[b * d:(b + 1) * d, a * d:(a + 1) * d] = R.pi(z)
    return M


def rep_matrix(R: DoubleIrrep, x: DoubleElement) -> np.ndarray:
    M = np.zeros((R.dim, R.dim), dtype=complex)
    for g, h, c in x.terms():
        M += c * irrep_matrix(R, g, h)
    return M


def projector(R: DoubleIrrep) -> DoubleElement:
    """P_{C,pi} = (dim pi / |C_G|) sum_c sum_n Tr pi(n^-1) d_c (x) q_c n q_c^-1."""
    G = R.G
    q = G.conjugacy.section
    out = DoubleElement(G)
    scale = R.pi.dim / len(R.centralizer)
    for c in R.cls:
        for n in R.centralizer:
            out.coef[c, G.m(q[c], n, G.inv[q[c]])] += scale * R.pi.character(G.inv[n])
    return out


def peter_weyl_phi(R: DoubleIrrep, u, v) -> DoubleElement:
    """Image of the matrix unit e_u (x) f^v with u=(c,i), v=(d,j):
    (dim pi/|C_G|) sum_n pi(n^-1)_{ji} d_c (x) q_c n q_d^-1."""
    G = R.G
    q = G.conjugacy.section
    (c, i), (d, j) = u, v
    out = DoubleElement(G)
    scale = R.pi.dim / len(R.centralizer)
    for n in R.centralizer:
        out.coef[c, G.m(q[c], n, G.inv[q[d]])] += scale * R.pi(G.inv[n])[j, i]
    return out


def verify_projector_family(G: GroupTable, tol=ALGEBRA_TOL, raise_on_fail=False) -> dict:
    """Orthogonality, completeness and centrality of all P_{C,pi}."""
    irreps = double_irreps(G)
    P = [projector(R) for R in irreps]
    dev = 0.0
    for a, Pa in enumerate(P):
        for b, Pb in enumerate(P):
            target = Pa if a == b else DoubleElement(G)
            dev = max(dev, ((Pa @ Pb) - target).norm())
    total = DoubleElement(G)
    for Pa in P:
        total = total + Pa
    dev = max(dev, (total - DoubleElement.one(G)).norm())
    n = G.order
    for g in range(n):
        for h in range(n):
            x = DoubleElement.basis(G, g, h)
            for Pa in P:
                dev = max(dev, ((x @ Pa) - (Pa @ x)).norm())
    # P acts as the identity on its own irrep and as zero on the others
    for a, R in enumerate(irreps):
        for b, Pb in enumerate(P):
            target = np.eye(R.dim) if a == b else np.zeros((R.dim, R.dim))
            dev = max(dev, float(np.abs(rep_matrix(R, Pb) - target).max()))
    report = {"name": f"projector_family_{G.name}", "passed": dev < tol, "max_deviation": dev,
              "count": len(P)}
    if raise_on_fail and not report["passed"]:
        raise ToleranceExceeded(report["name"], dev, tol)
    return report


def verify_peter_weyl(G: GroupTable, tol=1e-10) -> dict:
    """Both round trips of Phi, the bimodule property and sum_u Phi(e_u f^u) = P."""
    irreps = double_irreps(G)
    n = G.order
    dev = 0.0
    # Phi followed by the direct sum of irreps gives matrix units
    for R in irreps:
        B = R.carrier_basis()
        for a, u in enumerate(B):
            for b, v in enumerate(B):
                phi = peter_weyl_phi(R, u, v)
                for R2 in irreps:
                    M = rep_matrix(R2, phi)
                    target = np.zeros((R2.dim, R2.dim))
                    if R2 == R:
                        target[a, b] = 1.0
                    dev = max(dev, float(np.abs(M - target).max()))
        total = DoubleElement(G)
        for u in B:
            total = total + peter_weyl_phi(R, u, u)
        dev = max(dev, (total - projector(R)).norm())
    # the direct sum of irreps followed by Phi is the identity on D(G)
    basis = [DoubleElement.basis(G, g, h) for g in range(n) for h in range(n)]
    for x in basis:
        back = DoubleElement(G)
        for R in irreps:
            M = rep_matrix(R, x)
            B = R.carrier_basis()
            for a, b in zip(*np.nonzero(np.abs(M) > 1e-15)):
                back = back + peter_weyl_phi(R, B[a], B[b]) * M[a, b]
        dev = max(dev, (back - x).norm())
    # left and right module property
    for R in irreps:
        B = R.carrier_basis()
        for x in basis:
            M = rep_matrix(R, x)
            for a, u in enumerate(B):
                for b, v in enumerate(B):
                    phi = peter_weyl_phi(R, u, v)
                    left = DoubleElement(G)
                    right = DoubleElement(G)
                    for k, w in enumerate(B):
                        if M[k, a]:
                            left = left + peter_weyl_phi(R, w, v) * M[k, a]
                        if M[b, k]:
                            right = right + peter_weyl_phi(R, u, w) * M[b, k]
                    dev = max(dev, (left - (x @ phi)).norm(), (right - (phi @ x)).norm())
    return {"name": f"peter_weyl_{G.name}", "passed": dev < tol, "max_deviation": dev}


def dimension_count(G: GroupTable) -> dict:
    dims = [R.dim for R in double_irreps(G)]
    return {"count": len(dims), "dims": dims, "sum_sq": sum(d * d for d in dims)}
