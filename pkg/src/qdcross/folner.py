"""Folner boxes, boundary ratios, separating subgroups and tile completion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .groups import (
    DEFAULT_INDEX_CAP,
    FiniteIndexSubgroup,
    Group,
    GroupElement,
    GroupError,
    IndexCapError,
    QuotientMap,
    group_from_dict,
    quotient,
    subgroup_from_dict,
)


class TilingError(GroupError):
    pass


@dataclass(frozen=True)
class FolnerSet:
    group: Group
    elements: frozenset[GroupElement]
    n: int = 0

    def __post_init__(self):
        if self.group.identity() not in self.elements:
            raise ValueError("a Folner set must contain the identity")
        for x in self.elements:
            self.group._own(x)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def __contains__(self, x) -> bool:
        return x in self.elements


def folner_box(G: Group, n: int) -> FolnerSet:
    """Box-shaped Folner set of side ``n``.

    Z^m gives {0..n-1}^m, H3(Z) gives 0 <= a,b < n, 0 <= c < n^2, finite groups
    give the whole group; direct products take the product of the factor boxes.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return FolnerSet(G, frozenset(G.element(nf) for nf in G.box_nfs(n)), n)


def right_translate(F: Iterable[GroupElement], s: GroupElement) -> frozenset[GroupElement]:
    return frozenset(f * s for f in F)


def boundary_counts(F: FolnerSet, s: GroupElement) -> tuple[int, int]:
    """(|F minus Fs|, |Fs minus F|)."""
    F.group._own(s)
    Fs = right_translate(F.elements, s)
    return len(F.elements - Fs), len(Fs - F.elements)


def boundary_ratio(F: FolnerSet, s: GroupElement) -> Fraction:
    F.group._own(s)
    Fs = right_translate(F.elements, s)
    return Fraction(len(F.elements ^ Fs), len(F.elements))


def boundary_ratio_str(F: FolnerSet, s: GroupElement) -> str:
    """Unreduced |F delta Fs|/|F|, e.g. "2/16"."""
    out, into = boundary_counts(F, s)
    return f"{out + into}/{len(F)}"


def difference_set(A: Iterable[GroupElement], B: Iterable[GroupElement]) -> frozenset[GroupElement]:
    """{a^-1 b : a in A, b in B}."""
    A = list(A)
    B = list(B)
    if not A:
        return frozenset()
    G = A[0].group
    out = set()
    for a in A:
        ai = G.inv_nf(a.nf)
        for b in B:
            out.add(G.mul_nf(ai, b.nf))
    return frozenset(GroupElement(G, x) for x in out)


def separates(L: FiniteIndexSubgroup, D: Iterable[GroupElement]) -> bool:
    """True when D meets L only in the identity."""
    return all(x.is_identity() or not L.contains_nf(x.nf) for x in D)


def separating_subgroup(
    F: FolnerSet,
    family: Iterable[FiniteIndexSubgroup] | None = None,
    index_cap: int = DEFAULT_INDEX_CAP,
) -> FiniteIndexSubgroup:
    """First member L of ``family`` with F^-1 F meeting L only in e."""
    G = F.group
    if family is None:
        family = G.subgroup_family()
    D = difference_set(F.elements, F.elements)
    for L in family:
        if L.index > index_cap:
            break
        if separates(L, D):
            return L
    raise IndexCapError(f"no separating subgroup with index <= {index_cap}")


@dataclass(frozen=True)
class Tiling:
    """Tile K and finite-index normal subgroup L with G = K L as a disjoint union."""

    tile: tuple[GroupElement, ...]
    subgroup: FiniteIndexSubgroup
    certificate: dict = field(default_factory=dict, compare=False)

    @property
    def group(self) -> Group:
        return self.subgroup.group

    @property
    def index(self) -> int:
        return self.subgroup.index

    def quotient(self, index_cap: int = DEFAULT_INDEX_CAP) -> QuotientMap:
        return quotient(self.group, self.subgroup, index_cap)

    def coset_table(self) -> dict[int, GroupElement]:
        L = self.subgroup
        return {L.coset_index_nf(k.nf): k for k in self.tile}

    def to_dict(self) -> dict:
        return {
            "group": self.group.to_dict(),
            "subgroup": {"params": self.subgroup.params(), "index": self.index},
            "tile": [k.to_json() for k in self.tile],
            "certificate": dict(self.certificate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> Tiling:
        G = group_from_dict(d["group"])
        L = subgroup_from_dict(G, d["subgroup"])
        tile = tuple(GroupElement(G, G.nf_from_json(k)) for k in d["tile"])
        return cls(tile, L, dict(d.get("certificate", {})))

    @classmethod
    def from_json(cls, text: str) -> Tiling:
        return cls.from_dict(json.loads(text))


def _transversal_checks(K: list[GroupElement], L: FiniteIndexSubgroup) -> dict:
    G = L.group
    # K^-1 K meets L only in e, by exhaustive pair enumeration
    injective = True
    for a in K:
        ai = G.inv_nf(a.nf)
        for b in K:
            if a.nf != b.nf and L.contains_nf(G.mul_nf(ai, b.nf)):
                injective = False
                break
        if not injective:
            break
    return {"injective": injective, "size_equals_index": len(K) == L.index}


def certify_tiling(
    K: Iterable[GroupElement], L: FiniteIndexSubgroup, F: FolnerSet | None = None
) -> Tiling:
    """Wrap an explicit tile, checking the transversal property exactly."""
    K = sorted(set(K))
    cert = _transversal_checks(K, L)
    if F is not None:
        cert["contains_folner"] = F.elements <= set(K)
    if not all(cert.values()):
        raise TilingError(f"not a certified tiling: {cert}")
    return Tiling(tuple(K), L, cert)


def complete_tile(
    F: FolnerSet, L: FiniteIndexSubgroup, index_cap: int = DEFAULT_INDEX_CAP
) -> Tiling:
    """Extend F to a full coset transversal K of L.

    Cosets missed by F receive their smallest representative in the order
    (word length, normal form).
    """
    G = F.group
    q = quotient(G, L, index_cap)
    filled: dict[int, GroupElement] = {}
    for f in sorted(F.elements):
        i = q(f)
        if i in filled:
            raise TilingError(f"{filled[i]!r} and {f!r} lie in the same coset of L")
        filled[i] = f
    if len(filled) < q.size:
        for layer in G.ball_layers():
            for x in layer:
                i = q(x)
                if i not in filled:
                    filled[i] = x
            if len(filled) == q.size:
                break
    return certify_tiling(filled.values(), L, F)


def verify_tiling(T: Tiling, window: Iterable[GroupElement]) -> dict[GroupElement, tuple[GroupElement, GroupElement]]:
    """Factor every w in ``window`` as w = k l, checking uniqueness over all of K."""
    G = T.group
    L = T.subgroup
    out = {}
    for w in window:
        found = []
        for k in T.tile:
            l = G.mul_nf(G.inv_nf(k.nf), w.nf)
            if L.contains_nf(l):
                found.append((k, GroupElement(G, l)))
        if len(found) != 1:
            raise TilingError(f"{w!r} has {len(found)} factorizations")
        out[w] = found[0]
    T.certificate["window_verified"] = True
    return out
