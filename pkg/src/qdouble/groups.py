"""Finite groups as dense index tables, plus the representation data the
rest of the package consumes (classes, centralizers, sections, irreps)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, IncompleteIrrepSet, UnsupportedGroup


class GroupTable:
    """A finite group on the indices ``0..order-1``.

    ``mul[a, b]`` is the index of ``a*b``.  The axioms are checked
    exhaustively on construction, which is cheap for the group sizes used
    here (a few dozen elements at most).
    """

    def __init__(self, mul, labels=None, name="group", kind="table",
                 section=None, reps=None, irreps=None):
        mul = np.asarray(mul, dtype=np.int64)
        n = mul.shape[0]
        if mul.shape != (n, n) or n < 1:
            raise ConfigError("multiplication table must be square and nonempty")
        if mul.min() < 0 or mul.max() >= n:
            raise ConfigError("multiplication table entries out of range")
        self.order = n
        self.mul = mul
        self.name = name
        self.kind = kind
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        self._check_axioms()
        ident = [e for e in range(n) if np.array_equal(mul[e], np.arange(n))]
        self.id = ident[0]
        self.inv = np.array([int(np.nonzero(mul[a] == self.id)[0][0]) for a in range(n)],
                            dtype=np.int64)
        # optional shipped data: class representatives, section and irreps
        self._shipped_reps = reps
        self._shipped_section = section
        self._irreps = irreps or {}

    def _check_axioms(self):
        n, mul = self.order, self.mul
        for row in itertools.chain(mul, mul.T):
            if len(set(row.tolist())) != n:
                raise ConfigError("rows and columns of the table must be permutations")
        left = mul[mul[:, :, None], np.arange(n)[None, None, :]]
        right = mul[np.arange(n)[:, None, None], mul[None, :, :]]
        if not np.array_equal(left, right):
            raise ConfigError("multiplication table is not associative")
        if not any(np.array_equal(mul[e], np.arange(n)) and np.array_equal(mul[:, e], np.arange(n))
                   for e in range(n)):
            raise ConfigError("no two-sided identity")

    # basic operations -------------------------------------------------
    def m(self, *elements):
        out = self.id
        for g in elements:
            out = int(self.mul[out, g])
        return out

    def conj(self, g, h):
        """Return g h g^-1."""
        return int(self.mul[self.mul[g, h], self.inv[g]])

    def index(self, label):
        if isinstance(label, (int, np.integer)):
            return int(label)
        return self.labels.index(label)

    @cached_property
    def is_abelian(self):
        return bool(np.array_equal(self.mul, self.mul.T))

    def __repr__(self):
        return f"GroupTable({self.name}, order={self.order})"

    def __eq__(self, other):
        return isinstance(other, GroupTable) and np.array_equal(self.mul, other.mul)

    def __hash__(self):
        return hash((self.order, self.mul.tobytes()))

    @cached_property
    def conjugacy(self) -> "ConjugacyData":
        return conjugacy(self)


@dataclass(frozen=True)
class ConjugacyData:
    classes: tuple          # tuple of tuples of element indices
    reps: tuple             # r_C per class
    centralizers: tuple     # sorted element tuple of C_G(r_C) per class
    section: np.ndarray     # q_c for every element c (indexed by element)
    class_of: np.ndarray    # class index of every element

    def class_index(self, element):
        return int(self.class_of[element])


def conjugacy(G: GroupTable) -> ConjugacyData:
    n = G.order
    class_of = -np.ones(n, dtype=np.int64)
    classes, reps = [], []
    shipped = G._shipped_reps
    order = list(shipped) + [g for g in range(n) if g not in shipped] if shipped else range(n)
    for r in order:
        if class_of[r] >= 0:
            continue
        cls = sorted({G.conj(g, r) for g in range(n)})
        class_of[cls] = len(classes)
        classes.append(tuple(cls))
        reps.append(r)
    centralizers = tuple(tuple(g for g in range(n) if G.conj(g, r) == r) for r in reps)
    if G._shipped_section is not None:
        section = np.asarray(G._shipped_section, dtype=np.int64)
    else:
        section = np.zeros(n, dtype=np.int64)
        for k, r in enumerate(reps):
            first = {}
            for g in range(n):
                first.setdefault(G.conj(g, r), g)
            norm = G.inv[first[r]]
            for c in classes[k]:
                section[c] = G.mul[first[c], norm]
    data = ConjugacyData(tuple(classes), tuple(reps), centralizers, section, class_of)
    _check_section(G, data)
    return data


def _check_section(G, data):
    for k, r in enumerate(data.reps):
        if data.section[r] != G.id:
            raise ConfigError("section must satisfy q_r = e")
        for c in data.classes[k]:
            if G.conj(data.section[c], r) != c:
                raise ConfigError(f"section fails q_c r q_c^-1 = c at {G.labels[c]}")
        seen = {G.mul[data.section[c], m] for c in data.classes[k] for m in data.centralizers[k]}
        if len(seen) != G.order:
            raise ConfigError("q_c n does not factorise G uniquely")


def cocycle(G: GroupTable, c: int, g: int) -> int:
    """zeta_c(g) = q_{g c g^-1}^-1 g q_c, an element of the centralizer of r_C."""
    q = G.conjugacy.section
    return int(G.mul[G.inv[q[G.conj(g, c)]], G.mul[g, q[c]]])


# ---------------------------------------------------------------------------
# irreducible representations


@dataclass
class IrrepTable:
    """A unitary irrep of a subgroup ``elements`` of G.

    ``matrices`` has one slot per element of the ambient group; slots outside
    the subgroup are zero.
    """

    name: str
    elements: tuple
    matrices: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.matrices.shape[1]

    def __call__(self, g):
        return self.matrices[g]

    def character(self, g):
        return complex(np.trace(self.matrices[g]))

    def conjugate(self):
        return IrrepTable(self.name + "*", self.elements, self.matrices.conj())

    def validate(self, G: GroupTable, tol=1e-12):
        els = set(self.elements)
        d = self.dim
        if not np.allclose(self.matrices[G.id], np.eye(d), atol=tol):
            raise ConfigError(f"irrep {self.name}: identity not mapped to 1")
        for a in self.elements:
            m = self.matrices[a]
            if np.abs(m.conj().T @ m - np.eye(d)).max() > tol:
                raise ConfigError(f"irrep {self.name}: not unitary at {G.labels[a]}")
            for b in self.elements:
                ab = int(G.mul[a, b])
                if ab not in els:
                    raise ConfigError(f"irrep {self.name}: support is not a subgroup")
                if np.abs(self.matrices[ab] - m @ self.matrices[b]).max() > tol:
                    raise ConfigError(f"irrep {self.name}: not a homomorphism")
        return self


def _irrep_from(G, name, elements, mats):
    full = np.zeros((G.order,) + np.asarray(mats[0]).shape, dtype=complex)
    for g, m in zip(elements, mats):
        full[g] = m
    return IrrepTable(name, tuple(elements), full).validate(G)


def _cyclic_characters(G, elements, generator):
    """Characters of the cyclic subgroup generated by ``generator``."""
    n = len(elements)
    powers = [G.id]
    for _ in range(n - 1):
        powers.append(int(G.mul[powers[-1], generator]))
    out = []
    for j in range(n):
        mats = [np.array([[np.exp(2j * np.pi * j * k / n)]]) for k in range(n)]
        out.append(_irrep_from(G, str(j), powers, mats))
    return out


def centralizer_irreps(G: GroupTable, class_index: int) -> list:
    """Complete list of unitary irreps of C_G(r_C) for class ``class_index``."""
    data = G.conjugacy
    r = data.reps[class_index]
    if r in G._irreps:
        return list(G._irreps[r])
    if G.kind == "cyclic":
        gen = 1 % G.order
        return _cyclic_characters(G, data.centralizers[class_index], gen)
    raise UnsupportedGroup(f"no irrep data for the centralizer of {G.labels[r]} in {G.name}")


def group_irreps(G: GroupTable) -> list:
    return centralizer_irreps(G, G.conjugacy.class_index(G.id))


def check_character_orthogonality(G: GroupTable, irreps: list, tol=1e-10) -> dict:
    """Evaluate both character orthogonality relations and the matrix-entry
    relation; returns a report with the largest deviation found."""
    if not irreps:
        raise IncompleteIrrepSet("empty irrep list")
    H = irreps[0].elements
    if sum(p.dim ** 2 for p in irreps) != len(H):
        raise IncompleteIrrepSet(f"sum of squared dims {sum(p.dim ** 2 for p in irreps)} "
                                 f"!= subgroup order {len(H)}")
    nH = len(H)
    chars = np.array([[p.character(g) for g in H] for p in irreps])
    gram = chars @ chars.conj().T / nH
    dev = float(np.abs(gram - np.eye(len(irreps))).max())
    # column relation: sum_i chi_i(g) conj chi_i(h) = |C_H(g)| [g ~ h in H]
    col = chars.T @ chars.conj()
    for a, g in enumerate(H):
        cent = sum(1 for x in H if G.conj(x, g) == g)
        cls = {G.conj(x, g) for x in H}
        for b, h in enumerate(H):
            dev = max(dev, abs(col[a, b] - (cent if h in cls else 0)))
    # matrix entries: (1/|H|) sum_g pi(g)_ab conj(rho(g)_cd) = delta delta delta / d
    for i, p in enumerate(irreps):
        for j, rho in enumerate(irreps):
            P = np.array([p(g) for g in H])
            R = np.array([rho(g) for g in H])
            t = np.einsum("gab,gcd->abcd", P, R.conj()) / nH
            if i == j:
                d = p.dim
                target = np.einsum("ac,bd->abcd", np.eye(d), np.eye(d)) / d
            else:
                target = 0.0
            dev = max(dev, float(np.abs(t - target).max()))
    return {"name": "character_orthogonality", "passed": bool(dev < tol),
            "max_deviation": float(dev)}


# ---------------------------------------------------------------------------
# builders


def build_cyclic(n: int) -> GroupTable:
    if n < 1:
        raise ConfigError("cyclic group order must be positive")
    idx = np.arange(n)
    return GroupTable((idx[:, None] + idx[None, :]) % n, name=f"Z{n}", kind="cyclic")


S3_LABELS = ["e", "u", "v", "w", "uv", "vu"]


def _perm_sign(p):
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        sign *= (-1) ** (length - 1)
    return sign


def build_s3() -> GroupTable:
    """S_3 generated by u=(12) and v=(23), elements ordered e,u,v,w,uv,vu."""
    def compose(a, b):  # (a b)(x) = a(b(x))
        return tuple(a[b[x]] for x in range(3))

    e, u, v = (0, 1, 2), (1, 0, 2), (0, 2, 1)
    uv, vu = compose(u, v), compose(v, u)
    w = compose(uv, u)
    perms = [e, u, v, w, uv, vu]
    mul = [[perms.index(compose(a, b)) for b in perms] for a in perms]
    G = GroupTable(mul, labels=S3_LABELS, name="S3", kind="s3",
                   reps=[0, 1, 4], section=[0, 0, 3, 2, 0, 2])
    # section: q_e=q_u=q_uv=e, q_v=w, q_w=v, q_vu=v
    s3 = np.sqrt(3) / 2
    tu = np.diag([1.0, -1.0])
    tv = np.array([[-0.5, s3], [s3, 0.5]])
    tau = [np.eye(2), tu, tv, tu @ tv @ tu, tu @ tv, tv @ tu]
    all_els = list(range(6))
    om = np.exp(2j * np.pi / 3)
    G._irreps = {
        0: [_irrep_from(G, "1", all_els, [np.eye(1)] * 6),
            _irrep_from(G, "sigma", all_els, [np.array([[_perm_sign(p)]]) for p in perms]),
            _irrep_from(G, "tau", all_els, tau)],
        1: [_irrep_from(G, "1", [0, 1], [np.eye(1)] * 2),
            _irrep_from(G, "-1", [0, 1], [np.eye(1), -np.eye(1)])],
        4: [_irrep_from(G, "1", [0, 4, 5], [np.eye(1)] * 3),
            _irrep_from(G, "omega", [0, 4, 5], [np.eye(1), np.array([[om]]), np.array([[om ** 2]])]),
            _irrep_from(G, "omega*", [0, 4, 5], [np.eye(1), np.array([[om ** 2]]), np.array([[om]])])],
    }
    return G


def build_trivial() -> GroupTable:
    return build_cyclic(1)


def _parse_matrix(raw):
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def load_group(spec) -> GroupTable:
    """Build a group from its JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("group spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "cyclic":
        return build_cyclic(int(spec["n"]))
    if kind == "s3":
        return build_s3()
    if kind == "table":
        G = GroupTable(spec["mul"], labels=spec.get("labels"), name=spec.get("name", "table"))
        irreps = {}
        for rep, lst in (spec.get("irreps") or {}).items():
            r = G.index(int(rep) if str(rep).isdigit() else rep)
            cent = [g for g in range(G.order) if G.conj(g, r) == r]
            irreps[r] = [_irrep_from(G, f"{k}", cent, [_parse_matrix(m) for m in mats])
                         for k, mats in enumerate(lst)]
        G._shipped_reps = sorted(irreps) or None
        G._irreps = irreps
        G.conjugacy  # validate now
        return G
    raise ConfigError(f"unknown group kind {kind!r}")


def parse_group_name(name: str) -> GroupTable:
    """Short names used on the command line: z2, z3, ..., s3."""
    name = name.lower()
    if name == "s3":
        return build_s3()
    if name.startswith("z") and name[1:].isdigit():
        return build_cyclic(int(name[1:]))
    raise ConfigError(f"unknown group name {name!r}")
