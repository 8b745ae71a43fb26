"""Sparse state vectors over group-valued edge configurations and the
monomial operator engine.

Every lattice operator in this package compiles to a finite linear
combination of chains of :class:`MonomialOp`.  A monomial sends each basis
configuration to a single basis configuration times a scalar, so applying
it to a sparse state costs a few vectorised table lookups per edge.
"""

from __future__ import annotations

import contextlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import LatticeMismatch, SupportBudgetExceeded
from .groups import GroupTable
from .lattice import Lattice

DEFAULT_SUPPORT_CAP = 2 ** 24
PRUNE_RELATIVE = 1e-14


_support_cap = [DEFAULT_SUPPORT_CAP]


@contextlib.contextmanager
def support_budget(cap):
    """Use ``cap`` as the support cap of every space created in the block."""
    _support_cap.append(int(cap))
    try:
        yield
    finally:
        _support_cap.pop()


def current_support_cap():
    return _support_cap[-1]


def default_threads():
    try:
        return max(1, int(os.environ.get("QDL_THREADS", "1")))
    except ValueError:
        return 1


class HilbertSpace:
    """The edge Hilbert space (C G)^{(x) E} of a lattice."""

    def __init__(self, G: GroupTable, lattice: Lattice, support_cap=None, threads=None):
        if G.order > 255:
            raise ValueError("group too large for uint8 edge storage")
        self.G = G
        self.lattice = lattice
        self.n_edges = lattice.n_edges
        self.support_cap = _support_cap[-1] if support_cap is None else support_cap
        self.threads = default_threads() if threads is None else threads
        n = G.order
        self.packed = n ** self.n_edges < 2 ** 63
        if self.packed:
            self._weights = np.array([n ** e for e in range(self.n_edges)], dtype=np.int64)
        # lookup tables as small intp arrays for fast fancy indexing
        self.mul = G.mul.astype(np.intp)
        self.inv = G.inv.astype(np.intp)

    def keys(self, configs):
        if self.packed:
            keys = np.zeros(configs.shape[0], dtype=np.int64)
            for e in range(self.n_edges):
                keys += configs[:, e].astype(np.int64) * self._weights[e]
            return keys
        c = np.ascontiguousarray(configs)
        return c.view(np.dtype((np.void, c.shape[1]))).ravel()

    def check(self, other):
        if other is not self and (other.G != self.G or other.lattice != self.lattice):
            raise LatticeMismatch("states or operators live on different spaces")

    def basis_state(self, config, amplitude=1.0):
        cfg = np.asarray(config, dtype=np.uint8).reshape(1, self.n_edges)
        return SparseState(self, cfg, np.array([amplitude], dtype=complex))

    def identity_config_state(self):
        return self.basis_state(np.full(self.n_edges, self.G.id))

    def zero(self):
        return SparseState(self, np.zeros((0, self.n_edges), np.uint8), np.zeros(0, complex))

    def eval_word(self, configs, word):
        """Product of x_e^{sign} over ``word`` for every config row."""
        val = np.full(configs.shape[0], self.G.id, dtype=np.intp)
        for e, s in word:
            x = configs[:, e].astype(np.intp)
            if s < 0:
                x = self.inv[x]
            val = self.mul[val, x]
        return val


class SparseState:
    """Sorted unique configurations with complex amplitudes."""

    __slots__ = ("space", "configs", "amps", "_keys")

    def __init__(self, space: HilbertSpace, configs, amps, normalized=True, keys=None):
        self.space = space
        self.configs = configs
        self.amps = amps
        self._keys = keys
        if not normalized:
            self._merge()

    # construction helpers -------------------------------------------
    @property
    def keys(self):
        if self._keys is None:
            self._keys = self.space.keys(self.configs)
        return self._keys

    def _merge(self):
        self.configs, self.amps, self._keys = merge_rows(self.space, self.configs, self.amps,
                                                         prune=True)
        if self.configs.shape[0] > self.space.support_cap:
            raise SupportBudgetExceeded(self.configs.shape[0], self.space.support_cap)

    @property
    def support(self):
        return int(self.configs.shape[0])

    def copy(self):
        return SparseState(self.space, self.configs.copy(), self.amps.copy(), keys=self._keys)

    # arithmetic ------------------------------------------------------
    def __add__(self, other):
        self.space.check(other.space)
        return SparseState(self.space, np.concatenate([self.configs, other.configs]),
                           np.concatenate([self.amps, other.amps]), normalized=False)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, scalar):
        return SparseState(self.space, self.configs, self.amps * scalar, keys=self._keys)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def normalized(self):
        n = self.norm()
        return self / n if n > 0 else self

    def __repr__(self):
        return f"SparseState(support={self.support}, norm={self.norm():.6g})"


def merge_rows(space: HilbertSpace, configs, amps, keys=None, prune=False):
    """Sort rows by key, sum duplicate amplitudes and optionally prune
    amplitudes below the relative threshold."""
    if configs.shape[0] == 0:
        return configs, amps, space.keys(configs)
    if keys is None:
        keys = space.keys(configs)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    amps = np.add.reduceat(amps[order], starts)
    configs = configs[order[starts]]
    keys = keys[starts]
    del order
    if prune:
        mx = np.abs(amps).max()
        keep = np.abs(amps) > PRUNE_RELATIVE * mx if mx > 0 else np.zeros(len(amps), bool)
    else:
        keep = amps != 0
    if not keep.all():
        configs, amps, keys = configs[keep], amps[keep], keys[keep]
    return configs, amps, keys


def inner(s1: SparseState, s2: SparseState) -> complex:
    """<s1|s2>, conjugate-linear in the first argument."""
    s1.space.check(s2.space)
    if s1.support == 0 or s2.support == 0:
        return 0j
    _, i1, i2 = np.intersect1d(s1.keys, s2.keys, assume_unique=True, return_indices=True)
    return complex(np.vdot(s1.amps[i1], s2.amps[i2]))


def distance(s1: SparseState, s2: SparseState) -> float:
    return (s1 - s2).norm() if (s1.support or s2.support) else 0.0


def linear_combination(states, coefs):
    space = states[0].space
    configs = np.concatenate([s.configs for s in states])
    amps = np.concatenate([s.amps * c for s, c in zip(states, coefs)])
    return SparseState(space, configs, amps, normalized=False)


# ---------------------------------------------------------------------------
# monomials


@dataclass(frozen=True)
class Multiplier:
    """The config-dependent element w^-1 h w, with w a signed edge word."""

    h: int
    word: tuple = ()

    def inverse(self, G):
        return Multiplier(int(G.inv[self.h]), self.word)


@dataclass(frozen=True, eq=False)
class MonomialOp:
    """post-diagonal o edge updates o pre-diagonal, times ``coef``.

    Diagonal factors are (word, table) pairs contributing table[word(x)];
    ``pre`` is evaluated on the input config and ``post`` on the output.
    Updates are (edge, left, right) with x_e -> left x_e right; their
    multiplier words are evaluated on the input and must not contain any
    updated edge.
    """

    coef: complex = 1.0
    pre: tuple = ()
    updates: tuple = ()
    post: tuple = ()

    def __post_init__(self):
        touched = {e for e, _, _ in self.updates}
        if len(touched) != len(self.updates):
            raise ValueError("an edge is updated twice in one monomial")
        for _, left, right in self.updates:
            for m in (left, right):
                if m is not None and any(e in touched for e, _ in m.word):
                    raise ValueError("multiplier word depends on an updated edge")

    @property
    def is_diagonal(self):
        return not self.updates

    def adjoint(self, G) -> "MonomialOp":
        ups = tuple((e, None if l is None else l.inverse(G), None if r is None else r.inverse(G))
                    for e, l, r in self.updates)
        conj = lambda fs: tuple((w, np.conj(t)) for w, t in fs)  # noqa: E731
        return MonomialOp(np.conj(self.coef), conj(self.post), ups, conj(self.pre))

    def apply_raw(self, space: HilbertSpace, configs, amps):
        amps = amps * self.coef
        for word, table in self.pre:
            amps = amps * table[space.eval_word(configs, word)]
        if self.pre:
            keep = amps != 0
            if not keep.all():
                configs, amps = configs[keep], amps[keep]
        if self.updates:
            out = configs.copy()
            mul, inv = space.mul, space.inv
            for e, left, right in self.updates:
                x = configs[:, e].astype(np.intp)
                if left is not None:
                    if left.word:
                        w = space.eval_word(configs, left.word)
                        m = mul[mul[inv[w], left.h], w]
                        x = mul[m, x]
                    elif left.h != space.G.id:
                        x = mul[left.h, x]
                if right is not None:
                    if right.word:
                        w = space.eval_word(configs, right.word)
                        m = mul[mul[inv[w], right.h], w]
                        x = mul[x, m]
                    elif right.h != space.G.id:
                        x = mul[x, right.h]
                out[:, e] = x
            configs = out
        for word, table in self.post:
            amps = amps * table[space.eval_word(configs, word)]
        if self.post:
            keep = amps != 0
            if not keep.all():
                configs, amps = configs[keep], amps[keep]
        return configs, amps


class Operator:
    """A finite sum of coefficient * (chain of monomials).

    Chains act right to left, so ``chain[-1]`` is applied first.
    """

    def __init__(self, space: HilbertSpace, terms=None):
        self.space = space
        self.terms = list(terms) if terms is not None else []

    @classmethod
    def identity(cls, space):
        return cls(space, [(1.0, ())])

    @classmethod
    def zero(cls, space):
        return cls(space, [])

    @classmethod
    def monomial(cls, space, m: MonomialOp, coef=1.0):
        return cls(space, [(coef, (m,))])

    @property
    def n_terms(self):
        return len(self.terms)

    @property
    def is_diagonal(self):
        return all(m.is_diagonal for _, chain in self.terms for m in chain)

    def __add__(self, other):
        self.space.check(other.space)
        return Operator(self.space, self.terms + other.terms)

    def __sub__(self, other):
        return self + other * -1.0

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        return Operator(self.space, [(c * scalar, ch) for c, ch in self.terms])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, SparseState):
            return self.apply(other)
        self.space.check(other.space)
        return Operator(self.space, [(c1 * c2, ch1 + ch2) for c1, ch1 in self.terms
                                     for c2, ch2 in other.terms])

    def adjoint(self):
        G = self.space.G
        return Operator(self.space, [(np.conj(c), tuple(m.adjoint(G) for m in reversed(ch)))
                                     for c, ch in self.terms])

    def simplified(self, tol=1e-15):
        """Merge terms with identical chains and drop zero coefficients."""
        merged = {}
        order = []
        for c, ch in self.terms:
            key = tuple(id(m) for m in ch)
            if key not in merged:
                merged[key] = [0j, ch]
                order.append(key)
            merged[key][0] += c
        return Operator(self.space, [(merged[k][0], merged[k][1]) for k in order
                                     if abs(merged[k][0]) > tol])

    # application -----------------------------------------------------
    def _apply_chunk(self, configs, amps):
        """Apply every term, merging partial results as they accumulate so
        that peak memory stays near a couple of output supports."""
        space = self.space
        merged = (np.zeros((0, configs.shape[1]), np.uint8), np.zeros(0, complex))
        pending_c, pending_a, pending = [], [], 0
        for c, chain in self.terms:
            cf, am = configs, amps * c
            for m in reversed(chain):
                cf, am = m.apply_raw(space, cf, am)
                if am.size == 0:
                    break
            if am.size:
                pending_c.append(cf)
                pending_a.append(am)
                pending += am.size
            if pending > max(1 << 20, merged[1].size):
                merged = merge_rows(space, np.concatenate([merged[0]] + pending_c),
                                    np.concatenate([merged[1]] + pending_a))[:2]
                pending_c, pending_a, pending = [], [], 0
        if pending_c:
            merged = (np.concatenate([merged[0]] + pending_c),
                      np.concatenate([merged[1]] + pending_a))
        return merged

    def apply(self, state: SparseState, threads=None) -> SparseState:
        self.space.check(state.space)
        threads = self.space.threads if threads is None else threads
        if state.support == 0:
            return state.space.zero()
        if threads > 1 and state.support >= 4 * threads:
            bounds = np.linspace(0, state.support, threads + 1).astype(int)
            chunks = [(state.configs[a:b], state.amps[a:b]) for a, b in zip(bounds, bounds[1:])]
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(lambda ch: self._apply_chunk(*ch), chunks))
            configs = np.concatenate([p[0] for p in parts])
            amps = np.concatenate([p[1] for p in parts])
        else:
            configs, amps = self._apply_chunk(state.configs, state.amps)
        return SparseState(state.space, configs, amps, normalized=False)

    def __call__(self, state):
        return self.apply(state)

    def power_apply(self, state, k):
        for _ in range(k):
            state = self.apply(state)
        return state


def diagonal_op(space, word, table, coef=1.0):
    return Operator.monomial(space, MonomialOp(coef, pre=((tuple(word), np.asarray(table, complex)),)))


# ---------------------------------------------------------------------------
# spans, ranks, random states


def gram_matrix(states, block=1 << 16) -> np.ndarray:
    """Gram matrix <s_a|s_b>.

    Supports are sorted, so each block of the union of keys corresponds to a
    contiguous slice of every state; the Gram matrix is accumulated block by
    block from small dense slabs.
    """
    m = len(states)
    gram = np.zeros((m, m), dtype=complex)
    if m == 0:
        return gram
    union = np.unique(np.concatenate([s.keys for s in states]))
    for lo in range(0, len(union), block):
        ukeys = union[lo:lo + block]
        first, last = ukeys[0], ukeys[-1]
        slab = np.zeros((m, len(ukeys)), dtype=complex)
        for a, s in enumerate(states):
            i0 = np.searchsorted(s.keys, first, side="left")
            i1 = np.searchsorted(s.keys, last, side="right")
            if i1 > i0:
                cols = np.searchsorted(ukeys, s.keys[i0:i1])
                slab[a, cols] = s.amps[i0:i1]
        gram += slab.conj() @ slab.T
    return gram


def rank_of_span(states, rel_tol=1e-8) -> int:
    if not states:
        return 0
    gram = gram_matrix(states)
    ev = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    top = ev.max()
    if top <= 0:
        return 0
    return int(np.sum(ev > rel_tol * top))


def random_state(space: HilbertSpace, support: int, seed, base: SparseState = None) -> SparseState:
    """Reproducible unit-norm random state.

    With ``base`` the configurations are drawn from its support, which keeps
    operator tests inside a relevant sector (for example near the vacuum).
    """
    rng = np.random.default_rng(seed)
    if base is not None:
        idx = rng.choice(base.support, size=min(support, base.support), replace=False)
        configs = base.configs[np.sort(idx)]
    else:
        configs = rng.integers(0, space.G.order, size=(support, space.n_edges), dtype=np.uint8)
    amps = rng.normal(size=configs.shape[0]) + 1j * rng.normal(size=configs.shape[0])
    st = SparseState(space, configs, amps, normalized=False)
    return st.normalized()


# ---------------------------------------------------------------------------
# text dump


def dump_state(state: SparseState, fh, meta=None):
    header = {"group": state.space.G.name, "lattice": state.space.lattice.to_spec(),
              "n_edges": state.space.n_edges, "support": state.support}
    header.update(meta or {})
    fh.write("# " + json.dumps(header) + "\n")
    for cfg, a in zip(state.configs, state.amps):
        fh.write(f"{cfg.tobytes().hex()} {a.real:.17g} {a.imag:.17g}\n")


def load_state(space: HilbertSpace, fh) -> SparseState:
    rows, amps = [], []
    for line in fh:
        if line.startswith("#") or not line.strip():
            continue
        key, re_, im_ = line.split()
        rows.append(np.frombuffer(bytes.fromhex(key), dtype=np.uint8))
        amps.append(complex(float(re_), float(im_)))
    configs = np.array(rows, dtype=np.uint8).reshape(-1, space.n_edges)
    return SparseState(space, configs, np.array(amps, complex), normalized=False)


@dataclass
class OperatorCheck:
    """Operator-identity harness: max over seeded random states of |(A-B)psi|."""

    space: HilbertSpace
    n_states: int = 20
    support: int = 16
    seed: int = 0
    base: SparseState = None
    states: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.states is None:
            self.states = [random_state(self.space, self.support, self.seed + k, self.base)
                           for k in range(self.n_states)]

    def deviation(self, lhs, rhs):
        worst = 0.0
        for psi in self.states:
            a = lhs(psi) if callable(lhs) else lhs.apply(psi)
            b = rhs(psi) if callable(rhs) else rhs.apply(psi)
            worst = max(worst, distance(a, b))
        return worst
