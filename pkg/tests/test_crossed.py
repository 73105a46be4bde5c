import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import instances as I
from qdcross import crossed
from qdcross.contfrac import GOLDEN_THETA, circle_distance
from qdcross.crossed import (
    ActionError,
    ActionInstance,
    CrossedElement,
    FiniteDimAlgebra,
    InnerAction,
    TranslationAction,
    TrivialAction,
    almost_periodicity_defect,
    bunce_deddens_instance,
    crossed_compression,
    defect_set,
    lambda_tensor_compression,
    matrix_from_json,
    matrix_to_json,
    projection_from_vectors,
    rotation_action,
    sigma_compression,
    crossed_commutator,
    tilted_projection,
)
from qdcross.folner import certify_tiling, folner_box
from qdcross.groups import Heisenberg, IntegerLattice
from qdcross.projection import WindowError, build_phi

Z = IntegerLattice(1)
H = Heisenberg()
FLIP = np.array([[0, 1], [1, 0]], dtype=complex)


def window(lo, hi):
    return [Z.element(x) for x in range(lo, hi + 1)]


def test_algebra_basics():
    A = FiniteDimAlgebra((2, 1))
    assert A.dim == 3
    a = np.zeros((3, 3))
    a[0, 1] = a[2, 2] = 1
    assert A.contains(a)
    a[0, 2] = 1
    assert not A.contains(a)
    with pytest.raises(ValueError):
        A.element(a)
    with pytest.raises(ValueError):
        FiniteDimAlgebra((0,))
    b = np.diag([1.0, -3.0, 2.0]).astype(complex)
    assert A.norm(b) == pytest.approx(3.0)


def test_trivial_action_fixes_everything():
    alpha = TrivialAction(H, FiniteDimAlgebra((2,)))
    for g in H.generators():
        np.testing.assert_array_equal(alpha.act(g, FLIP), FLIP)


def test_translation_action_on_c3():
    alpha = TranslationAction(Z, Z.subgroup([3]))
    a = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.diag(alpha.act(Z.element(1), a)), [3.0, 1.0, 2.0])
    np.testing.assert_array_equal(alpha.act(Z.element(3), a), a)
    composed = alpha.act(Z.element(1), alpha.act(Z.element(1), alpha.act(Z.element(1), a)))
    np.testing.assert_array_equal(composed, a)
    U = alpha.implementer(Z.element(1))
    np.testing.assert_allclose(U @ a @ U.T, alpha.act(Z.element(1), a))


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8, 13, -7])
def test_rotation_action_closed_form(N):
    alpha = rotation_action(GOLDEN_THETA)
    got = alpha.act(Z.element(N), FLIP)
    z = cmath.exp(2j * math.pi * N * GOLDEN_THETA)
    np.testing.assert_allclose(got, [[0, 1 / z], [z, 0]], atol=1e-12)
    assert np.linalg.norm(got - FLIP, 2) == pytest.approx(abs(z - 1), abs=1e-12)


def test_inner_action_validation():
    A = FiniteDimAlgebra((2,))
    with pytest.raises(ActionError):
        InnerAction(Z, A, (np.diag([1.0, 2.0]),))
    with pytest.raises(ActionError):
        InnerAction(H, A, (np.eye(2),))
    with pytest.raises(ActionError):
        InnerAction(IntegerLattice(2), A, (np.diag([1, 1j]), FLIP))


def test_action_instance_checks():
    alpha = rotation_action(0.3)
    with pytest.raises(ActionError):
        ActionInstance(alpha, (np.array([[0, 1], [0, 0]]),))
    inst = ActionInstance(alpha, (FLIP,))
    assert inst.labels == ("a0",)


def test_bunce_deddens_instances():
    inst = bunce_deddens_instance(Z, Z.subgroup([2]))
    assert inst.algebra.dim == 2
    np.testing.assert_array_equal(inst.action.implementer(Z.element(1)), [[0, 1], [1, 0]])
    inst_h = bunce_deddens_instance(H, H.subgroup(2))
    assert inst_h.algebra.dim == 8
    trivial = bunce_deddens_instance(Z, Z.subgroup([1]))
    assert trivial.algebra.dim == 1
    np.testing.assert_array_equal(trivial.action.act(Z.element(5), np.eye(1)), np.eye(1))


def test_defect_set_example():
    F = folner_box(Z, 2)
    T = certify_tiling(window(0, 5), Z.subgroup([6]), F)
    assert [x.nf[0] for x in defect_set(T, F)] == [0, 6]
    raw = {k - kp + f for k in range(6) for kp in range(6) for f in range(2)}
    assert {x for x in raw if x % 6 == 0} == {0, 6}
    alpha = TranslationAction(Z, Z.subgroup([3]))
    assert almost_periodicity_defect(alpha, np.diag([1.0, 0, 0]), T, F) == 0.0
    triv = TrivialAction(Z, FiniteDimAlgebra((2,)))
    assert almost_periodicity_defect(triv, FLIP, T, F) == 0.0


@pytest.mark.parametrize("name", ["Z", "Z2", "H3"])
def test_defect_set_brute_force(name):
    F, T, _, _ = I.level(name, 2)
    brute = {k * kp.inv() * f for k in T.tile for kp in T.tile for f in F.elements}
    brute = {x for x in brute if T.subgroup.contains(x)}
    assert set(defect_set(T, F)) == brute


def test_rotation_defect_is_circle_distance():
    cfg = I.run_config("rotation")
    alpha = cfg.action_instance().action
    values = []
    for lv in cfg.levels:
        F, T, _, _ = I.config_level("rotation", lv.n)
        d = almost_periodicity_defect(alpha, FLIP, T, F)
        assert d == pytest.approx(circle_distance(lv.n, GOLDEN_THETA), abs=1e-12)
        values.append(d)
    assert all(b < a for a, b in zip(values, values[1:]))


def test_sigma_examples():
    w = window(0, 3)
    scalar = TrivialAction(Z, FiniteDimAlgebra((1,)))
    np.testing.assert_array_equal(sigma_compression(np.array([[2.5]]), scalar, w).matrix, 2.5 * np.eye(4))
    triv = TrivialAction(Z, FiniteDimAlgebra((2,)))
    S = sigma_compression(FLIP, triv, w)
    for i in range(4):
        np.testing.assert_array_equal(S.block(i, i), FLIP)
    alpha = TranslationAction(Z, Z.subgroup([3]))
    a = np.diag([1.0, 2.0, 3.0])
    S = sigma_compression(a, alpha, w)
    for i in range(4):
        np.testing.assert_array_equal(np.diag(S.block(i, i)).real, np.roll([1.0, 2.0, 3.0], -i))
    np.testing.assert_array_equal(S.block(3, 3), S.block(0, 0))
    assert np.count_nonzero(S.matrix - np.diag(np.diag(S.matrix))) == 0


def test_lambda_tensor_examples():
    w = window(0, 3)
    np.testing.assert_array_equal(lambda_tensor_compression(Z.identity(), w, 2).matrix, np.eye(8))
    M = lambda_tensor_compression(Z.element(1), w, 2)
    for i in range(4):
        for j in range(4):
            expected = np.eye(2) if i == j + 1 else np.zeros((2, 2))
            np.testing.assert_array_equal(M.block(i, j), expected)


@pytest.mark.parametrize("alpha", [TranslationAction(Z, Z.subgroup([3])), rotation_action(GOLDEN_THETA)])
def test_covariance_on_interior(alpha):
    w = window(-6, 6)
    D = alpha.algebra.dim
    a = np.diag(np.arange(1.0, D + 1)) if D == 3 else FLIP
    for s in (1, 2, -3):
        U = lambda_tensor_compression(Z.element(s), w, D).matrix
        lhs = U @ sigma_compression(a, alpha, w).matrix @ U.conj().T
        rhs = sigma_compression(alpha.act(Z.element(s), a), alpha, w).matrix
        for i, x in enumerate(range(-6, 7)):
            if -6 <= x - s <= 6:
                blk = slice(i * D, (i + 1) * D)
                np.testing.assert_allclose(lhs[blk, blk], rhs[blk, blk], atol=1e-12)


def test_crossed_compression_unit():
    alpha = rotation_action(GOLDEN_THETA)
    e = CrossedElement({Z.identity(): np.eye(2, dtype=complex)})
    np.testing.assert_allclose(crossed_compression(e, alpha, window(-3, 3)).matrix, np.eye(14), atol=1e-15)
    exact = TranslationAction(Z, Z.subgroup([3]))
    e3 = CrossedElement({Z.identity(): np.eye(3, dtype=complex)})
    np.testing.assert_array_equal(crossed_compression(e3, exact, window(-3, 3)).matrix, np.eye(21))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_self_adjoint_elements_compress_to_hermitian_interior(seed):
    rng = np.random.default_rng(seed)
    alpha = rotation_action(GOLDEN_THETA)
    vals = {}
    for s in rng.choice(np.arange(-2, 3), size=3, replace=False):
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        vals[Z.element(int(s))] = m
    f = CrossedElement(vals)
    fs = f.adjoint(alpha)
    sym = dict(f.values)
    for s, v in fs.values.items():
        sym[s] = sym[s] + v if s in sym else v
    g = CrossedElement(sym)
    gg = g.adjoint(alpha)
    assert set(gg.values) == set(g.values)
    for s in g.values:
        np.testing.assert_allclose(gg.values[s], g.values[s], atol=1e-12)
    R = 8
    M = crossed_compression(g, alpha, window(-R, R)).matrix
    inner = slice(2 * 2, 2 * (2 * R + 1 - 2))
    np.testing.assert_allclose(M[inner, inner], M[inner, inner].conj().T, atol=1e-12)


def test_q_projections():
    Q = tilted_projection(3, 0.3)
    np.testing.assert_allclose(Q @ Q, Q, atol=1e-15)
    assert np.trace(Q).real == pytest.approx(1.0)
    Q2 = projection_from_vectors([[1, 0, 0], [1, 1, 0]], 3)
    np.testing.assert_allclose(Q2, np.diag([1, 1, 0]), atol=1e-15)
    np.testing.assert_array_equal(projection_from_vectors([], 2), np.zeros((2, 2)))


def test_matrix_json_round_trip():
    M = np.array([[1.5, 2 - 1j], [0.25j, -3]])
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(M)), M)
    np.testing.assert_array_equal(matrix_from_json([["1+2j", 0]]), [[1 + 2j, 0]])


def test_scalar_algebra_has_no_commutator():
    F, T, _, P = I.level("H3", 2)
    alpha = TrivialAction(H, FiniteDimAlgebra((1,)))
    rep = crossed_commutator(np.eye(1), alpha, np.eye(1), P)
    assert rep.full_norm == 0.0 and rep.max_block_norm == 0.0 and rep.passed


def test_crossed_commutator_needs_covering_window():
    P = I.config_level("bd", 4)[3]
    alpha = TranslationAction(Z, Z.subgroup([2]))
    with pytest.raises(WindowError):
        crossed_commutator(np.diag([1.0, 0.0]), alpha, None, P, window=P.window[1:])


def test_crossed_commutator_rejects_non_projection_q():
    P = I.config_level("bd", 4)[3]
    alpha = TranslationAction(Z, Z.subgroup([2]))
    with pytest.raises(ValueError):
        crossed_commutator(np.diag([1.0, 0.0]), alpha, np.diag([1.0, 0.5]), P)


def _hand_built_norm(n: int, Q) -> float:
    """[sigma(FLIP), Q (x) P] for the rotation instance, assembled from scratch."""
    F = folner_box(Z, n)
    T = certify_tiling(window(0, n - 1), Z.subgroup([n]), F)
    phi = build_phi(F, T)
    xs = sorted(x.nf[0] for x in phi.support)
    W = len(xs)
    z = cmath.exp(2j * math.pi * GOLDEN_THETA)
    Pm = np.zeros((W, W))
    for y in range(n):
        v = np.array([math.sqrt(phi(Z.element(x))) if (x - y) % n == 0 else 0.0 for x in xs])
        Pm += np.outer(v, v)
    S = np.zeros((2 * W, 2 * W), dtype=complex)
    for i, x in enumerate(xs):
        # alpha(-x) FLIP = u^-x FLIP u^x with u = diag(1, z)
        S[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = [[0, z**x], [z ** (-x), 0]]
    M = np.kron(Pm, Q)
    return float(np.linalg.norm(S @ M - M @ S, 2))


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("tilt", [0.0, 0.4])
def test_crossed_commutator_full_norm_against_hand_built(n, tilt):
    Q = tilted_projection(2, tilt) if tilt else np.eye(2)
    P = I.config_level("rotation", n)[3]
    rep = crossed_commutator(FLIP, rotation_action(GOLDEN_THETA), Q, P, n=n)
    assert rep.full_norm == pytest.approx(_hand_built_norm(n, Q), abs=1e-12)
    assert rep.norm_matches_max_block and rep.blocks_orthogonal and rep.per_block_chain


@pytest.mark.parametrize("name,n", [("bd_tilted", 8), ("rotation", 8), ("heisenberg", 2)])
def test_full_norm_routes_agree(name, n, monkeypatch):
    cfg = I.run_config(name)
    inst = cfg.action_instance()
    P = I.config_level(name, n)[3]
    Q = cfg.q_projection(n, inst.algebra.dim)
    Q = np.eye(inst.algebra.dim, dtype=complex) if Q is None else Q
    a = inst.test_elements[-1]
    W = list(P.window)
    dense = crossed._full_commutator_norm(a, inst.action, Q, P, W, threshold=10**6)
    low_rank = crossed._full_commutator_norm(a, inst.action, Q, P, W, threshold=0)
    monkeypatch.setattr(crossed, "LOW_RANK_BUDGET", 0)
    matrix_free = crossed._full_commutator_norm(a, inst.action, Q, P, W, threshold=0)
    assert abs(dense - low_rank) <= 1e-12
    assert abs(dense - matrix_free) <= 1e-10


def test_report_flags_on_bd_tilted():
    for n, _, rep in I.crossed_reports("bd_tilted"):
        assert rep.terms_within_one_over_n is True
        assert rep.within_four_over_n is True
        assert rep.passed
        assert len(rep.blocks) == len(I.config_level("bd_tilted", n)[1].tile)


def test_rotation_norms_decay():
    reports = I.crossed_reports("rotation")
    norms = [rep.full_norm for _, _, rep in reports]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    for n, _, rep in reports:
        assert rep.proof_bound == pytest.approx(2 * circle_distance(n, GOLDEN_THETA), abs=1e-12)
