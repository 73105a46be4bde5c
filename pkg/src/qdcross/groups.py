"""Concrete discrete groups with exact normal forms and finite-index normal subgroups.

Elements are stored by canonical integer coordinates (Python ints, so no
overflow).  The catalog:

* ``IntegerLattice(m)``: Z^m, coordinates added componentwise.
* ``Heisenberg()``: H3(Z) as triples with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab').
* ``CyclicProduct(k1, ..., kr)``: Z/k1 x ... x Z/kr, residues in [0, k).
* ``DirectProduct(G1, G2)``: pairs of normal forms.

Each group exposes a family of finite-index normal subgroups ordered by
nondecreasing index (moduli vectors, congruence levels, ...), plus quotient
maps onto the finite coset spaces.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

DEFAULT_INDEX_CAP = 100_000


class GroupError(ValueError):
    pass


class GroupMismatchError(GroupError):
    pass


class NotNormalError(GroupError):
    pass


class IndexCapError(GroupError):
    pass


class GroupElement:
    __slots__ = ("group", "nf", "_hash")

    def __init__(self, group: Group, nf):
        self.group = group
        self.nf = nf
        self._hash = hash(nf)

    def __mul__(self, other: GroupElement) -> GroupElement:
        return self.group.mul(self, other)

    def inv(self) -> GroupElement:
        return self.group.inv(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.nf == other.nf and (self.group is other.group or self.group == other.group)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: GroupElement) -> bool:
        _same_group(self, other)
        return self.nf < other.nf

    def __repr__(self) -> str:
        return f"{self.group.kind}{self.nf!r}"

    def is_identity(self) -> bool:
        return self.nf == self.group.identity_nf()

    def to_json(self):
        return self.group.nf_to_json(self.nf)


def _same_group(a: GroupElement, b: GroupElement) -> None:
    if not (a.group is b.group or a.group == b.group):
        raise GroupMismatchError(f"elements from different groups: {a.group} vs {b.group}")


class Group:
    """Common interface; subclasses implement the ``*_nf`` primitives."""

    kind: str = "group"

    # --- primitives on normal forms -------------------------------------
    def identity_nf(self):
        raise NotImplementedError

    def mul_nf(self, a, b):
        raise NotImplementedError

    def inv_nf(self, a):
        raise NotImplementedError

    def canonical(self, coords):
        raise NotImplementedError

    def generator_nfs(self) -> list:
        raise NotImplementedError

    def box_nfs(self, n: int) -> Iterable:
        raise NotImplementedError

    @property
    def order(self) -> int | None:
        return None

    @property
    def is_abelian(self) -> bool:
        return True

    def subgroup(self, params) -> FiniteIndexSubgroup:
        raise NotImplementedError

    def subgroup_family(self) -> Iterator[FiniteIndexSubgroup]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def nf_to_json(self, nf):
        return list(nf)

    def nf_from_json(self, obj):
        return self.canonical(obj)

    # --- element-level API ---------------------------------------------
    def element(self, coords) -> GroupElement:
        return GroupElement(self, self.canonical(coords))

    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_nf())

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self._own(a)
        self._own(b)
        return GroupElement(self, self.mul_nf(a.nf, b.nf))

    def inv(self, a: GroupElement) -> GroupElement:
        self._own(a)
        return GroupElement(self, self.inv_nf(a.nf))

    def generators(self) -> list[GroupElement]:
        return [GroupElement(self, g) for g in self.generator_nfs()]

    def _own(self, a: GroupElement) -> None:
        if not isinstance(a, GroupElement) or not (a.group is self or a.group == self):
            raise GroupMismatchError(f"{a!r} is not an element of {self}")

    def ball_layers(self) -> Iterator[list[GroupElement]]:
        """Spheres of the word metric, each sorted by normal form."""
        gens = self.generator_nfs()
        e = self.identity_nf()
        seen = {e}
        layer = [e]
        while layer:
            yield [GroupElement(self, x) for x in layer]
            nxt = set()
            for x in layer:
                for g in gens:
                    y = self.mul_nf(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.add(y)
            layer = sorted(nxt)

    def word_lengths(self, r: int) -> dict[GroupElement, int]:
        out: dict[GroupElement, int] = {}
        for length, layer in enumerate(self.ball_layers()):
            if length > r:
                break
            for x in layer:
                out[x] = length
        return out

    def elements(self) -> list[GroupElement]:
        if self.order is None:
            raise GroupError(f"{self} is infinite")
        return sorted(x for layer in self.ball_layers() for x in layer)


def word_ball(G: Group, r: int) -> frozenset[GroupElement]:
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return frozenset(G.word_lengths(r))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _int_tuple(coords, length: int) -> tuple[int, ...]:
    t = tuple(coords) if not isinstance(coords, int) else (coords,)
    if len(t) != length:
        raise GroupError(f"expected {length} coordinates, got {len(t)}")
    out = []
    for v in t:
        if isinstance(v, bool) or int(v) != v:
            raise GroupError(f"non-integer coordinate {v!r}")
        out.append(int(v))
    return tuple(out)


@dataclass(frozen=True)
class IntegerLattice(Group):
    rank: int = 1
    kind = "lattice"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("rank must be positive")

    def identity_nf(self):
        return (0,) * self.rank

    def mul_nf(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv_nf(self, a):
        return tuple(-x for x in a)

    def canonical(self, coords):
        return _int_tuple(coords, self.rank)

    def generator_nfs(self):
        out = []
        for i in range(self.rank):
            for sign in (1, -1):
                v = [0] * self.rank
                v[i] = sign
                out.append(tuple(v))
        return out

    def box_nfs(self, n):
        return itertools.product(range(n), repeat=self.rank)

    def subgroup(self, params) -> ModularSubgroup:
        if isinstance(params, int):
            params = (params,) * self.rank
        return ModularSubgroup(self, tuple(int(p) for p in params))

    def subgroup_family(self):
        for N in itertools.count(1):
            yield ModularSubgroup(self, (N,) * self.rank)

    def to_dict(self):
        return {"kind": self.kind, "rank": self.rank}


@dataclass(frozen=True)
class Heisenberg(Group):
    kind = "heisenberg"

    def identity_nf(self):
        return (0, 0, 0)

    def mul_nf(self, x, y):
        a, b, c = x
        a2, b2, c2 = y
        return (a + a2, b + b2, c + c2 + a * b2)

    def inv_nf(self, x):
        a, b, c = x
        return (-a, -b, -c + a * b)

    def canonical(self, coords):
        return _int_tuple(coords, 3)

    def generator_nfs(self):
        return [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]

    def box_nfs(self, n):
        return itertools.product(range(n), range(n), range(n * n))

    @property
    def is_abelian(self):
        return False

    def subgroup(self, params) -> CongruenceSubgroup:
        if not isinstance(params, int):
            (params,) = params
        return CongruenceSubgroup(self, int(params))

    def subgroup_family(self):
        for N in itertools.count(1):
            yield CongruenceSubgroup(self, N)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class CyclicProduct(Group):
    orders: tuple[int, ...] = (1,)
    kind = "cyclic"

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if not self.orders or any(k < 1 for k in self.orders):
            raise GroupError(f"invalid cyclic orders {self.orders}")

    def identity_nf(self):
        return (0,) * len(self.orders)

    def mul_nf(self, a, b):
        return tuple((x + y) % k for x, y, k in zip(a, b, self.orders))

    def inv_nf(self, a):
        return tuple((-x) % k for x, k in zip(a, self.orders))

    def canonical(self, coords):
        t = _int_tuple(coords, len(self.orders))
        return tuple(x % k for x, k in zip(t, self.orders))

    def generator_nfs(self):
        out = []
        for i, k in enumerate(self.orders):
            if k == 1:
                continue
            for sign in (1, -1):
                v = [0] * len(self.orders)
                v[i] = sign % k
                if tuple(v) not in out:
                    out.append(tuple(v))
        return out

    @property
    def order(self):
        return math.prod(self.orders)

    def box_nfs(self, n):
        return itertools.product(*(range(k) for k in self.orders))

    def subgroup(self, params) -> FiniteIndexSubgroup:
        if isinstance(params, dict) and "elements" in params:
            return ListedSubgroup(self, frozenset(self.canonical(x) for x in params["elements"]))
        if isinstance(params, int):
            params = (params,) * len(self.orders)
        return ModularSubgroup(self, tuple(int(p) for p in params))

    def subgroup_family(self):
        divisor_lists = [[d for d in range(1, k + 1) if k % d == 0] for k in self.orders]
        combos = sorted(itertools.product(*divisor_lists), key=lambda m: (math.prod(m), m))
        for m in combos:
            yield ModularSubgroup(self, m)

    def to_dict(self):
        return {"kind": self.kind, "orders": list(self.orders)}


@dataclass(frozen=True)
class DirectProduct(Group):
    left: Group = field(default_factory=IntegerLattice)
    right: Group = field(default_factory=IntegerLattice)
    kind = "product"

    def identity_nf(self):
        return (self.left.identity_nf(), self.right.identity_nf())

    def mul_nf(self, a, b):
        return (self.left.mul_nf(a[0], b[0]), self.right.mul_nf(a[1], b[1]))

    def inv_nf(self, a):
        return (self.left.inv_nf(a[0]), self.right.inv_nf(a[1]))

    def canonical(self, coords):
        first, second = coords
        return (self.left.canonical(first), self.right.canonical(second))

    def generator_nfs(self):
        e1, e2 = self.left.identity_nf(), self.right.identity_nf()
        return [(g, e2) for g in self.left.generator_nfs()] + [
            (e1, h) for h in self.right.generator_nfs()
        ]

    @property
    def order(self):
        if self.left.order is None or self.right.order is None:
            return None
        return self.left.order * self.right.order

    @property
    def is_abelian(self):
        return self.left.is_abelian and self.right.is_abelian

    def box_nfs(self, n):
        return itertools.product(self.left.box_nfs(n), self.right.box_nfs(n))

    def subgroup(self, params) -> ProductSubgroup:
        p1, p2 = params
        return ProductSubgroup(self, self.left.subgroup(p1), self.right.subgroup(p2))

    def subgroup_family(self):
        cache = ([], [])
        iters = (self.left.subgroup_family(), self.right.subgroup_family())

        def member(side: int, i: int):
            lst = cache[side]
            while len(lst) <= i:
                nxt = next(iters[side], None)
                if nxt is None:
                    return None
                lst.append(nxt)
            return lst[i]

        heap = [(member(0, 0).index * member(1, 0).index, 0, 0)]
        seen = {(0, 0)}
        while heap:
            _, i, j = heapq.heappop(heap)
            yield ProductSubgroup(self, cache[0][i], cache[1][j])
            for i2, j2 in ((i + 1, j), (i, j + 1)):
                a, b = member(0, i2), member(1, j2)
                if a is not None and b is not None and (i2, j2) not in seen:
                    seen.add((i2, j2))
                    heapq.heappush(heap, (a.index * b.index, i2, j2))

    def to_dict(self):
        return {"kind": self.kind, "factors": [self.left.to_dict(), self.right.to_dict()]}

    def nf_to_json(self, nf):
        return [self.left.nf_to_json(nf[0]), self.right.nf_to_json(nf[1])]

    def nf_from_json(self, obj):
        return (self.left.nf_from_json(obj[0]), self.right.nf_from_json(obj[1]))


def group_from_dict(d: dict) -> Group:
    kind = d.get("kind")
    if kind == "lattice":
        return IntegerLattice(int(d.get("rank", 1)))
    if kind == "heisenberg":
        return Heisenberg()
    if kind == "cyclic":
        return CyclicProduct(tuple(d["orders"]))
    if kind == "product":
        left, right = d["factors"]
        return DirectProduct(group_from_dict(left), group_from_dict(right))
    raise GroupError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# subgroups and quotients
# ---------------------------------------------------------------------------


class FiniteIndexSubgroup:
    """A finite-index normal subgroup L of ``group``.

    Normality is checked at construction on generators: g l g^-1 in L for
    every group generator g and subgroup generator l.
    """

    group: Group

    @property
    def index(self) -> int:
        raise NotImplementedError

    def contains_nf(self, nf) -> bool:
        raise NotImplementedError

    def coset_index_nf(self, nf) -> int:
        raise NotImplementedError

    def coset_rep_nf(self, i: int):
        raise NotImplementedError

    def generator_nfs(self) -> list:
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    def contains(self, x: GroupElement) -> bool:
        self.group._own(x)
        return self.contains_nf(x.nf)

    def _check_normal(self) -> None:
        G = self.group
        for g in G.generator_nfs():
            gi = G.inv_nf(g)
            for l in self.generator_nfs():
                if not self.contains_nf(l):
                    raise NotNormalError(f"generator {l} is not in the subgroup")
                conj = G.mul_nf(G.mul_nf(g, l), gi)
                if not self.contains_nf(conj):
                    raise NotNormalError(f"{g} {l} {gi} = {conj} leaves the subgroup")

    def to_dict(self) -> dict:
        return {"group": self.group.to_dict(), "params": self.params(), "index": self.index}


@dataclass(frozen=True)
class ModularSubgroup(FiniteIndexSubgroup):
    """N1 Z x ... x Nm Z inside Z^m, or the analogous subgroup of a cyclic product."""

    group: Group
    moduli: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.group, (IntegerLattice, CyclicProduct)):
            raise GroupError("modular subgroups live in lattices or cyclic products")
        n = self.group.rank if isinstance(self.group, IntegerLattice) else len(self.group.orders)
        if len(self.moduli) != n or any(N < 1 for N in self.moduli):
            raise GroupError(f"invalid moduli {self.moduli}")
        if isinstance(self.group, CyclicProduct):
            for N, k in zip(self.moduli, self.group.orders):
                if k % N:
                    raise GroupError(f"modulus {N} does not divide order {k}")
        self._check_normal()

    @property
    def index(self):
        return math.prod(self.moduli)

    def contains_nf(self, nf):
        return all(v % N == 0 for v, N in zip(nf, self.moduli))

    def coset_index_nf(self, nf):
        i = 0
        for v, N in zip(reversed(nf), reversed(self.moduli)):
            i = i * N + v % N
        return i

    def coset_rep_nf(self, i):
        out = []
        for N in self.moduli:
            i, r = divmod(i, N)
            out.append(r)
        return self.group.canonical(out)

    def generator_nfs(self):
        out = []
        for j, N in enumerate(self.moduli):
            v = [0] * len(self.moduli)
            v[j] = N
            out.append(self.group.canonical(v))
        return out

    def params(self):
        return list(self.moduli)


@dataclass(frozen=True)
class CongruenceSubgroup(FiniteIndexSubgroup):
    """Level-N congruence kernel {(a,b,c): a = b = c = 0 mod N} of H3(Z)."""

    group: Heisenberg
    level: int

    def __post_init__(self):
        if self.level < 1:
            raise GroupError("level must be positive")
        self._check_normal()

    @property
    def index(self):
        return self.level**3

    def contains_nf(self, nf):
        N = self.level
        return nf[0] % N == 0 and nf[1] % N == 0 and nf[2] % N == 0

    def coset_index_nf(self, nf):
        N = self.level
        return nf[0] % N + N * (nf[1] % N) + N * N * (nf[2] % N)

    def coset_rep_nf(self, i):
        N = self.level
        i, a = divmod(i, N)
        c, b = divmod(i, N)
        return (a, b, c)

    def generator_nfs(self):
        N = self.level
        return [(N, 0, 0), (0, N, 0), (0, 0, N)]

    def params(self):
        return self.level


@dataclass(frozen=True)
class ListedSubgroup(FiniteIndexSubgroup):
    """A normal subgroup of a finite group given by its element list."""

    group: Group
    members: frozenset
    _coset_of: dict = field(default_factory=dict, compare=False, repr=False)
    _reps: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        G = self.group
        if G.order is None:
            raise GroupError("listed subgroups require a finite group")
        if G.identity_nf() not in self.members:
            raise GroupError("subgroup must contain the identity")
        for a in self.members:
            for b in self.members:
                if G.mul_nf(a, G.inv_nf(b)) not in self.members:
                    raise GroupError("element list is not closed under a b^-1")
        self._check_normal()
        for x in sorted(el.nf for el in G.elements()):
            if x in self._coset_of:
                continue
            i = len(self._reps)
            self._reps.append(x)
            for l in self.members:
                self._coset_of[G.mul_nf(x, l)] = i

    @property
    def index(self):
        return len(self._reps)

    def contains_nf(self, nf):
        return nf in self.members

    def coset_index_nf(self, nf):
        return self._coset_of[nf]

    def coset_rep_nf(self, i):
        return self._reps[i]

    def generator_nfs(self):
        return sorted(self.members)

    def params(self):
        return {"elements": [self.group.nf_to_json(x) for x in sorted(self.members)]}


@dataclass(frozen=True)
class ProductSubgroup(FiniteIndexSubgroup):
    group: DirectProduct
    left: FiniteIndexSubgroup
    right: FiniteIndexSubgroup

    def __post_init__(self):
        self._check_normal()

    @property
    def index(self):
        return self.left.index * self.right.index

    def contains_nf(self, nf):
        return self.left.contains_nf(nf[0]) and self.right.contains_nf(nf[1])

    def coset_index_nf(self, nf):
        return self.left.coset_index_nf(nf[0]) * self.right.index + self.right.coset_index_nf(nf[1])

    def coset_rep_nf(self, i):
        i1, i2 = divmod(i, self.right.index)
        return (self.left.coset_rep_nf(i1), self.right.coset_rep_nf(i2))

    def generator_nfs(self):
        e1, e2 = self.group.left.identity_nf(), self.group.right.identity_nf()
        return [(l, e2) for l in self.left.generator_nfs()] + [
            (e1, r) for r in self.right.generator_nfs()
        ]

    def params(self):
        return [self.left.params(), self.right.params()]


def subgroup_from_dict(G: Group, d: dict) -> FiniteIndexSubgroup:
    L = G.subgroup(d["params"])
    if "index" in d and int(d["index"]) != L.index:
        raise GroupError(f"declared index {d['index']} != computed {L.index}")
    return L


@dataclass(frozen=True)
class QuotientMap:
    """Coset indexing G -> {0, ..., index-1} with q(e) = 0."""

    subgroup: FiniteIndexSubgroup
    index_cap: int = DEFAULT_INDEX_CAP

    def __post_init__(self):
        if self.subgroup.index > self.index_cap:
            raise IndexCapError(f"index {self.subgroup.index} exceeds cap {self.index_cap}")

    @property
    def group(self) -> Group:
        return self.subgroup.group

    @property
    def size(self) -> int:
        return self.subgroup.index

    def __call__(self, x: GroupElement) -> int:
        self.group._own(x)
        return self.subgroup.coset_index_nf(x.nf)

    def rep(self, i: int) -> GroupElement:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return GroupElement(self.group, self.subgroup.coset_rep_nf(i))

    def mul(self, i: int, j: int) -> int:
        G = self.group
        return self.subgroup.coset_index_nf(
            G.mul_nf(self.subgroup.coset_rep_nf(i), self.subgroup.coset_rep_nf(j))
        )

    def inv(self, i: int) -> int:
        G = self.group
        return self.subgroup.coset_index_nf(G.inv_nf(self.subgroup.coset_rep_nf(i)))


def quotient(G: Group, L: FiniteIndexSubgroup, index_cap: int = DEFAULT_INDEX_CAP) -> QuotientMap:
    if not (L.group is G or L.group == G):
        raise GroupMismatchError("subgroup belongs to a different group")
    return QuotientMap(L, index_cap)
