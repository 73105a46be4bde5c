import itertools
from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdcross.groups import (
    CongruenceSubgroup,
    CyclicProduct,
    DirectProduct,
    FiniteIndexSubgroup,
    GroupError,
    GroupMismatchError,
    Heisenberg,
    IndexCapError,
    IntegerLattice,
    NotNormalError,
    group_from_dict,
    quotient,
    subgroup_from_dict,
    word_ball,
)

Z = IntegerLattice(1)
Z2 = IntegerLattice(2)
H = Heisenberg()
C5 = CyclicProduct((5,))

small = st.integers(-40, 40)


def lattice_elements(G):
    return st.tuples(*[small] * G.rank).map(G.element)


heis_elements = st.tuples(small, small, st.integers(-400, 400)).map(H.element)
c12x3 = CyclicProduct((12, 3))
cyc_elements = st.tuples(st.integers(0, 11), st.integers(0, 2)).map(c12x3.element)
ZxH = DirectProduct(Z, H)
prod_elements = st.tuples(st.tuples(small), st.tuples(small, small, small)).map(ZxH.element)

ALL = [
    (Z2, lattice_elements(Z2)),
    (H, heis_elements),
    (c12x3, cyc_elements),
    (ZxH, prod_elements),
]


def test_multiplication_examples():
    assert Z2.element((1, 2)) * Z2.element((3, -1)) == Z2.element((4, 1))
    assert H.element((1, 0, 0)) * H.element((0, 1, 0)) == H.element((1, 1, 1))
    assert H.element((0, 1, 0)) * H.element((1, 0, 0)) == H.element((1, 1, 0))


def test_inverse_examples():
    assert Z.element(5).inv() == Z.element(-5)
    assert H.element((1, 1, 1)).inv() == H.element((-1, -1, 0))
    assert C5.element(2).inv() == C5.element(3)


def test_heisenberg_inverse_formula():
    for a, b, c in itertools.product(range(-3, 4), repeat=3):
        assert H.element((a, b, c)).inv() == H.element((-a, -b, -c + a * b))


def test_big_coordinates_do_not_wrap():
    big = 10**30
    x = H.element((big, big, 0))
    assert (x * x).nf == (2 * big, 2 * big, big * big)


def test_mixing_groups_is_rejected():
    with pytest.raises(GroupMismatchError):
        Z.element(1) * Z2.element((1, 0))
    with pytest.raises(GroupMismatchError):
        _ = Z.element(1) < C5.element(1)


def test_bad_coordinates():
    with pytest.raises(GroupError):
        Z2.element((1, 2, 3))
    with pytest.raises(GroupError):
        CyclicProduct((0,))


@pytest.mark.parametrize("G,strategy", ALL, ids=["Z2", "H3", "C12xC3", "ZxH3"])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_laws(G, strategy, data):
    a, b, c = (data.draw(strategy) for _ in range(3))
    e = G.identity()
    assert (a * b) * c == a * (b * c)
    assert a * a.inv() == e and a.inv() * a == e
    assert e * a == a and a * e == a


@settings(max_examples=60, deadline=None)
@given(a=heis_elements, b=heis_elements)
def test_equality_matches_hash_key(a, b):
    assert (a == b) == (a.nf == b.nf)
    if a == b:
        assert hash(a) == hash(b)


def _bfs_ball(mul, identity, gens, r):
    seen = {identity}
    frontier = [identity]
    for _ in range(r):
        frontier = [mul(x, g) for x in frontier for g in gens]
        frontier = [y for y in set(frontier) if y not in seen]
        seen.update(frontier)
    return seen


def test_word_ball_examples():
    assert {x.nf[0] for x in word_ball(Z, 2)} == {-2, -1, 0, 1, 2}
    assert len(word_ball(Z2, 1)) == 5
    with pytest.raises(ValueError):
        word_ball(Z, -1)


@pytest.mark.parametrize("r", [0, 1, 2, 3, 4])
def test_heisenberg_ball_against_bfs(r):
    def mul(x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])

    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    expected = _bfs_ball(mul, (0, 0, 0), gens, r)
    assert {x.nf for x in word_ball(H, r)} == expected


def test_heisenberg_ball_sizes_grow():
    sizes = [len(word_ball(H, r)) for r in range(5)]
    assert sizes[:3] == [1, 5, 17]
    assert all(b > a for a, b in zip(sizes, sizes[1:]))


def test_finite_group_elements():
    G = CyclicProduct((2, 3))
    assert G.order == 6
    assert len(G.elements()) == 6
    with pytest.raises(GroupError):
        Z.elements()


def test_quotient_examples():
    q = quotient(Z, Z.subgroup([5]))
    assert q.size == 5
    assert q(Z.element(7)) == q(Z.element(2))
    assert q(Z.identity()) == 0
    assert quotient(Z2, Z2.subgroup([3, 4])).size == 12


@pytest.mark.parametrize("N", range(1, 7))
def test_heisenberg_congruence_index(N):
    L = H.subgroup(N)
    q = quotient(H, L)
    images = {q(H.element(x)) for x in itertools.product(range(N), repeat=3)}
    assert L.index == N**3 == len(images) == q.size
    assert set(images) == set(range(N**3))


@pytest.mark.parametrize("N", [2, 3, 4])
def test_congruence_kernel_is_conjugation_closed(N):
    L = H.subgroup(N)
    for l in itertools.product(range(-N, N + 1, N), repeat=3):
        lx = H.element(l)
        assert L.contains(lx)
        for g in H.generators():
            assert L.contains(g * lx * g.inv())


SUBGROUPS = [
    (Z2, Z2.subgroup([3, 4]), lattice_elements(Z2)),
    (H, H.subgroup(3), heis_elements),
    (c12x3, c12x3.subgroup([4, 3]), cyc_elements),
    (c12x3, c12x3.subgroup({"elements": [[0, 0], [6, 0]]}), cyc_elements),
    (ZxH, ZxH.subgroup([[2], 2]), prod_elements),
]


@pytest.mark.parametrize("G,L,strategy", SUBGROUPS, ids=["Z2", "H3", "cyc", "listed", "product"])
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_quotient_is_a_homomorphism(G, L, strategy, data):
    q = quotient(G, L)
    x, y = data.draw(strategy), data.draw(strategy)
    assert q.mul(q(x), q(y)) == q(x * y)
    assert q.inv(q(x)) == q(x.inv())
    assert (q(x) == q(y)) == L.contains(x.inv() * y)
    assert q(q.rep(q(x))) == q(x)


def test_listed_subgroup():
    G = CyclicProduct((12,))
    L = G.subgroup({"elements": [0, 4, 8]})
    assert L.index == 4
    with pytest.raises(GroupError):
        G.subgroup({"elements": [0, 4]})
    with pytest.raises(GroupError):
        G.subgroup({"elements": [4, 8]})


def test_modular_subgroup_must_divide_order():
    with pytest.raises(GroupError):
        CyclicProduct((12,)).subgroup([5])


@dataclass(frozen=True)
class _ColumnSubgroup(FiniteIndexSubgroup):
    """{(0, b, 0)}: not normal in H3, and not finite index either."""

    group: Heisenberg

    def __post_init__(self):
        self._check_normal()

    def contains_nf(self, nf):
        return nf[0] == 0 and nf[2] == 0

    def generator_nfs(self):
        return [(0, 1, 0)]


def test_non_normal_subgroup_is_rejected():
    with pytest.raises(NotNormalError):
        _ColumnSubgroup(H)


def test_index_cap():
    with pytest.raises(IndexCapError):
        quotient(Z2, Z2.subgroup([1000, 1000]), index_cap=1000)


def test_subgroup_family_ordered_by_index():
    for G in (Z, Z2, H, c12x3, DirectProduct(Z, CyclicProduct((4,)))):
        fam = list(itertools.islice(G.subgroup_family(), 12))
        idx = [L.index for L in fam]
        assert idx == sorted(idx)


@pytest.mark.parametrize("G", [Z, Z2, H, c12x3, ZxH])
def test_descriptor_round_trip(G):
    assert group_from_dict(G.to_dict()) == G


def test_subgroup_round_trip():
    L = ZxH.subgroup([[3], 2])
    assert subgroup_from_dict(ZxH, L.to_dict()) == L
    bad = dict(L.to_dict(), index=7)
    with pytest.raises(GroupError):
        subgroup_from_dict(ZxH, bad)


def test_unknown_group_kind():
    with pytest.raises(GroupError):
        group_from_dict({"kind": "lamplighter"})


def test_congruence_level_positive():
    with pytest.raises(GroupError):
        CongruenceSubgroup(H, 0)
