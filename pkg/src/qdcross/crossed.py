"""Finite-dimensional algebras with group actions, the regular covariant
representation on finite windows, and the block-by-block commutator estimate
for Q (x) P.

Window operators on H (x) l^2(W) are indexed by (window position, algebra
coordinate) in that order, so Q (x) P is ``np.kron(P, Q)`` here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse.linalg as spla

from .folner import FolnerSet, Tiling
from .groups import (
    FiniteIndexSubgroup,
    Group,
    GroupElement,
    IntegerLattice,
    QuotientMap,
    quotient,
)
from .linalg import DENSE_THRESHOLD, LowRankOperator, gram_norm, operator_norm
from .projection import NORM_SLACK, CertificateError, Projection, WindowError

ACTION_TOL = 1e-12
BLOCK_TOL = 1e-10


class ActionError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteDimAlgebra:
    """Direct sum of matrix blocks M_{d1} + ... + M_{dr}, represented
    block-diagonally on C^D."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(int(d) for d in self.blocks))
        if not self.blocks or any(d < 1 for d in self.blocks):
            raise ValueError(f"invalid block sizes {self.blocks}")

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    def _mask(self) -> np.ndarray:
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        start = 0
        for d in self.blocks:
            mask[start : start + d, start : start + d] = True
            start += d
        return mask

    def contains(self, a: np.ndarray, atol: float = 0.0) -> bool:
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            return False
        return bool(np.max(np.abs(a[~self._mask()]), initial=0.0) <= atol)

    def element(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if not self.contains(a):
            raise ValueError(f"not an element of the algebra with blocks {self.blocks}")
        return a

    def norm(self, a: np.ndarray) -> float:
        return operator_norm(a)

    def unit(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def diagonal(self, values: Iterable[complex]) -> np.ndarray:
        return self.element(np.diag(np.asarray(list(values), dtype=complex)))


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


class Action:
    """alpha(g) a = U(g) a U(g)^*, with U a unitary on C^D."""

    kind = "action"
    group: Group
    algebra: FiniteDimAlgebra
    exact = False

    def implementer(self, g: GroupElement) -> np.ndarray:
        raise NotImplementedError

    def act(self, g: GroupElement, a: np.ndarray) -> np.ndarray:
        U = self.implementer(g)
        return U @ a @ U.conj().T

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TrivialAction(Action):
    group: Group
    algebra: FiniteDimAlgebra
    kind = "trivial"
    exact = True

    def implementer(self, g):
        self.group._own(g)
        return np.eye(self.algebra.dim, dtype=complex)

    def act(self, g, a):
        self.group._own(g)
        return np.array(a, dtype=complex)

    def to_dict(self):
        return {"kind": self.kind, "blocks": list(self.algebra.blocks)}


@dataclass(frozen=True)
class TranslationAction(Action):
    """G acting on C(G/L_m) = C^{[G:L_m]} by (alpha(g) f)(c) = f(g^-1 c)."""

    group: Group
    subgroup: FiniteIndexSubgroup
    quotient_map: QuotientMap = field(init=False, compare=False, repr=False)
    kind = "translation"
    exact = True

    def __post_init__(self):
        object.__setattr__(self, "quotient_map", quotient(self.group, self.subgroup))

    @property
    def algebra(self) -> FiniteDimAlgebra:
        return FiniteDimAlgebra((1,) * self.subgroup.index)

    def permutation(self, g: GroupElement) -> list[int]:
        """c -> q(g) c on coset indices."""
        q = self.quotient_map
        gi = q(g)
        return [q.mul(gi, c) for c in range(q.size)]

    def implementer(self, g):
        perm = self.permutation(g)
        U = np.zeros((len(perm), len(perm)), dtype=complex)
        for c, gc in enumerate(perm):
            U[gc, c] = 1.0
        return U

    def act(self, g, a):
        # exact reindexing, no floating products
        perm = self.permutation(g)
        a = np.asarray(a, dtype=complex)
        out = np.empty_like(a)
        out[np.ix_(perm, perm)] = a
        return out

    def to_dict(self):
        return {"kind": self.kind, "subgroup": self.subgroup.params()}


@dataclass(frozen=True, eq=False)
class InnerAction(Action):
    """Z^m acting by Ad(u_1^{g_1} ... u_m^{g_m}) for commuting unitaries u_i in A."""

    group: Group
    algebra: FiniteDimAlgebra
    unitaries: tuple[np.ndarray, ...]
    kind = "inner"

    def __post_init__(self):
        if not isinstance(self.group, IntegerLattice):
            raise ActionError("inner actions are supported on integer lattices only")
        us = tuple(self.algebra.element(u) for u in self.unitaries)
        object.__setattr__(self, "unitaries", us)
        if len(us) != self.group.rank:
            raise ActionError(f"need {self.group.rank} implementing unitaries, got {len(us)}")
        eye = np.eye(self.algebra.dim)
        for u in us:
            if np.max(np.abs(u @ u.conj().T - eye)) > ACTION_TOL:
                raise ActionError("non-unitary implementer")
        for u, v in itertools.combinations(us, 2):
            if np.max(np.abs(u @ v - v @ u)) > ACTION_TOL:
                raise ActionError("implementing unitaries do not commute")

    def implementer(self, g):
        self.group._own(g)
        U = np.eye(self.algebra.dim, dtype=complex)
        for u, e in zip(self.unitaries, g.nf):
            base = u if e >= 0 else u.conj().T
            U = U @ np.linalg.matrix_power(base, abs(e))
        return U

    def to_dict(self):
        return {
            "kind": self.kind,
            "blocks": list(self.algebra.blocks),
            "unitaries": [matrix_to_json(u) for u in self.unitaries],
        }


def rotation_action(theta: float) -> InnerAction:
    """Z acting on M_2 by Ad(diag(1, e^{2 pi i theta}))."""
    u = np.diag([1.0, np.exp(2j * np.pi * theta)])
    return InnerAction(IntegerLattice(1), FiniteDimAlgebra((2,)), (u,))


def act(alpha: Action, g: GroupElement, a: np.ndarray) -> np.ndarray:
    return alpha.act(g, a)


@dataclass(frozen=True, eq=False)
class ActionInstance:
    action: Action
    test_elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        A = self.action.algebra
        elems = tuple(A.element(a) for a in self.test_elements)
        object.__setattr__(self, "test_elements", elems)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"a{i}" for i in range(len(elems))))
        for a in elems:
            if np.max(np.abs(a - a.conj().T), initial=0.0) > ACTION_TOL:
                raise ActionError("test elements must be self-adjoint")
        self.check()

    @property
    def group(self) -> Group:
        return self.action.group

    @property
    def algebra(self) -> FiniteDimAlgebra:
        return self.action.algebra

    def check(self) -> None:
        """alpha(g) is a *-automorphism and alpha(gh) = alpha(g) alpha(h) on generators."""
        alpha = self.action
        G = self.group
        tol = 0.0 if alpha.exact else ACTION_TOL
        gens = G.generators()
        for a in self.test_elements:
            na = operator_norm(a)
            for g in gens:
                ga = alpha.act(g, a)
                if not self.algebra.contains(ga, atol=ACTION_TOL):
                    raise ActionError(f"alpha({g!r}) leaves the algebra")
                if abs(operator_norm(ga) - na) > ACTION_TOL:
                    raise ActionError(f"alpha({g!r}) is not isometric")
                for h in gens:
                    lhs = alpha.act(g * h, a)
                    rhs = alpha.act(g, alpha.act(h, a))
                    if np.max(np.abs(lhs - rhs)) > tol:
                        raise ActionError(f"alpha fails the homomorphism law at {g!r}, {h!r}")


def bunce_deddens_instance(G: Group, L_m: FiniteIndexSubgroup) -> ActionInstance:
    """A = C(G/L_m) with G translating through the finite quotient."""
    alpha = TranslationAction(G, L_m)
    m = L_m.index
    A = alpha.algebra
    tests, labels = [], []
    for c in range(min(m, 4)):
        v = np.zeros(m)
        v[c] = 1.0
        tests.append(A.diagonal(v))
        labels.append(f"indicator[{c}]")
    if m > 1:
        tests.append(A.diagonal([(-1.0) ** c * (c + 1) / m for c in range(m)]))
        labels.append("signed_ramp")
    return ActionInstance(alpha, tuple(tests), tuple(labels))


# ---------------------------------------------------------------------------
# almost periodicity
# ---------------------------------------------------------------------------


def defect_set(T: Tiling, F: FolnerSet) -> list[GroupElement]:
    """L cap K K^-1 F, enumerated through the quotient.

    k k'^-1 f lies in L exactly when q(k') = q(f k), and K holds one element of
    each coset, so each (k, f) contributes one product.
    """
    q = T.quotient()
    table = T.coset_table()
    out = set()
    for k in T.tile:
        for f in F.elements:
            kp = table[q(f * k)]
            l = k * kp.inv() * f
            if not T.subgroup.contains(l):
                raise CertificateError(f"{l!r} should lie in L")
            out.add(l)
    return sorted(out)


def almost_periodicity_defect(alpha: Action, a: np.ndarray, T: Tiling, F: FolnerSet) -> float:
    return max(operator_norm(alpha.act(l, a) - a) for l in defect_set(T, F))


# ---------------------------------------------------------------------------
# compressions of the regular representation
# ---------------------------------------------------------------------------


@dataclass
class CompressionOperator:
    window: list[GroupElement]
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        n = self.dim * len(self.window)
        if self.matrix.shape != (n, n):
            raise WindowError(f"matrix shape {self.matrix.shape} vs {n}")

    def block(self, i: int, j: int) -> np.ndarray:
        D = self.dim
        return self.matrix[i * D : (i + 1) * D, j * D : (j + 1) * D]


def _positions(window: list[GroupElement]) -> dict[GroupElement, int]:
    pos = {x: i for i, x in enumerate(window)}
    if len(pos) != len(window):
        raise WindowError("duplicate window entries")
    return pos


def sigma_blocks(a: np.ndarray, alpha: Action, window: list[GroupElement]) -> list[np.ndarray]:
    return [alpha.act(x.inv(), a) for x in window]


def sigma_compression(a: np.ndarray, alpha: Action, window: list[GroupElement]) -> CompressionOperator:
    """sigma(a)(h (x) delta_x) = rho(alpha(x^-1) a) h (x) delta_x, on the window."""
    D = alpha.algebra.dim
    M = np.zeros((D * len(window), D * len(window)), dtype=complex)
    for i, b in enumerate(sigma_blocks(a, alpha, window)):
        M[i * D : (i + 1) * D, i * D : (i + 1) * D] = b
    return CompressionOperator(list(window), D, M)


def lambda_tensor_compression(s: GroupElement, window: list[GroupElement], dim: int) -> CompressionOperator:
    """I_H (x) lambda(s) restricted to the window."""
    pos = _positions(window)
    Lam = np.zeros((len(window), len(window)))
    for x, j in pos.items():
        i = pos.get(s * x)
        if i is not None:
            Lam[i, j] = 1.0
    return CompressionOperator(list(window), dim, np.kron(Lam, np.eye(dim)).astype(complex))


@dataclass
class CrossedElement:
    """Finitely supported A-valued function on G, an element of C_c(G, A)."""

    values: dict[GroupElement, np.ndarray]

    @property
    def support(self) -> list[GroupElement]:
        return sorted(self.values)

    def convolve(self, other: CrossedElement, alpha: Action) -> CrossedElement:
        """(f * g)(t) = sum_s f(s) alpha(s)(g(s^-1 t))."""
        out: dict[GroupElement, np.ndarray] = {}
        for s, fs in self.values.items():
            for r, gr in other.values.items():
                t = s * r
                term = fs @ alpha.act(s, gr)
                out[t] = out[t] + term if t in out else term
        return CrossedElement(out)

    def adjoint(self, alpha: Action) -> CrossedElement:
        """f^*(s) = alpha(s)(f(s^-1)^*)."""
        out = {}
        for s, fs in self.values.items():
            si = s.inv()
            out[si] = alpha.act(si, fs.conj().T)
        return CrossedElement(out)


def crossed_compression(f: CrossedElement, alpha: Action, window: list[GroupElement]) -> CompressionOperator:
    """sum_s sigma(f(s)) (I (x) lambda(s)), compressed to the window."""
    D = alpha.algebra.dim
    pos = _positions(window)
    M = np.zeros((D * len(window), D * len(window)), dtype=complex)
    for s, fs in f.values.items():
        for x, j in pos.items():
            i = pos.get(s * x)
            if i is None:
                continue
            sx = window[i]
            M[i * D : (i + 1) * D, j * D : (j + 1) * D] += alpha.act(sx.inv(), fs)
    return CompressionOperator(list(window), D, M)


# ---------------------------------------------------------------------------
# the Q (x) P commutator
# ---------------------------------------------------------------------------


def projection_from_vectors(vectors, dim: int) -> np.ndarray:
    """Orthogonal projection onto the span of ``vectors`` in C^dim."""
    V = np.asarray(vectors, dtype=complex).reshape(-1, dim).T
    if V.size == 0:
        return np.zeros((dim, dim), dtype=complex)
    Qf, _ = np.linalg.qr(V)
    return Qf @ Qf.conj().T


def _range_basis(Q: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((Q + Q.conj().T) / 2)
    return v[:, w > 0.5]


def _check_projection(Q: np.ndarray, dim: int) -> np.ndarray:
    Q = np.asarray(Q, dtype=complex)
    if Q.shape != (dim, dim):
        raise ValueError(f"Q must be {dim}x{dim}")
    if np.max(np.abs(Q @ Q - Q)) > 1e-12 or np.max(np.abs(Q - Q.conj().T)) > 1e-12:
        raise ValueError("Q is not an orthogonal projection")
    return Q


@dataclass
class CosetBlock:
    label: GroupElement
    commutator_norm: float
    half_norm: float
    q_commutator: float
    rows: list[GroupElement]
    matrix: np.ndarray = field(repr=False)


@dataclass
class CrossedCommutatorReport:
    defect: float
    blocks: list[CosetBlock]
    full_norm: float
    max_block_norm: float
    orthogonality_residual: float
    overlapping_pairs: int
    proof_bound: float
    n: int | None = None

    @property
    def norm_matches_max_block(self) -> bool:
        return abs(self.full_norm - self.max_block_norm) <= BLOCK_TOL

    @property
    def blocks_orthogonal(self) -> bool:
        return self.orthogonality_residual <= BLOCK_TOL

    @property
    def within_proof_bound(self) -> bool:
        return self.full_norm <= self.proof_bound + NORM_SLACK

    @property
    def per_block_chain(self) -> bool:
        """||C_y|| <= 2 h_y and h_y <= ||[alpha(y^-1)a, Q]|| + defect, per coset."""
        return all(
            b.commutator_norm <= 2 * b.half_norm + NORM_SLACK
            and b.half_norm <= b.q_commutator + self.defect + NORM_SLACK
            for b in self.blocks
        )

    @property
    def max_q_commutator(self) -> float:
        return max((b.q_commutator for b in self.blocks), default=0.0)

    @property
    def terms_within_one_over_n(self) -> bool | None:
        if self.n is None:
            return None
        return self.max_q_commutator <= 1 / self.n and self.defect <= 1 / self.n

    @property
    def within_four_over_n(self) -> bool | None:
        if self.n is None:
            return None
        return self.full_norm <= 4 / self.n + NORM_SLACK

    @property
    def passed(self) -> bool:
        ok = (
            self.norm_matches_max_block
            and self.blocks_orthogonal
            and self.within_proof_bound
            and self.per_block_chain
        )
        if self.terms_within_one_over_n:
            ok = ok and bool(self.within_four_over_n)
        return ok


def _coset_block(a, alpha: Action, Q: np.ndarray, vec) -> CosetBlock:
    D = alpha.algebra.dim
    rows = sorted(vec.amplitudes)
    xi = np.array([vec.amplitudes[x] for x in rows])
    sig = np.zeros((D * len(rows), D * len(rows)), dtype=complex)
    for i, b in enumerate(sigma_blocks(a, alpha, rows)):
        sig[i * D : (i + 1) * D, i * D : (i + 1) * D] = b
    M = np.kron(np.outer(xi, xi), Q)
    C = sig @ M - M @ sig
    half = (np.eye(len(M)) - M) @ sig @ M
    b = alpha.act(vec.label.inv(), a)
    return CosetBlock(
        vec.label,
        operator_norm(C),
        operator_norm(half),
        operator_norm(b @ Q - Q @ b),
        rows,
        C,
    )


def _orthogonality(blocks: list[CosetBlock], dim: int) -> tuple[float, int]:
    """max ||C_y^* C_z|| over y != z; only blocks sharing a window point can be nonzero."""
    by_point: dict[GroupElement, list[int]] = {}
    for idx, b in enumerate(blocks):
        for x in b.rows:
            by_point.setdefault(x, []).append(idx)
    pairs = set()
    for members in by_point.values():
        pairs.update(itertools.combinations(members, 2))
    worst = 0.0
    for i, j in sorted(pairs):
        bi, bj = blocks[i], blocks[j]
        union = sorted(set(bi.rows) | set(bj.rows))
        pos = {x: k for k, x in enumerate(union)}

        def embed(b: CosetBlock) -> np.ndarray:
            idx = np.concatenate([np.arange(pos[x] * dim, (pos[x] + 1) * dim) for x in b.rows])
            E = np.zeros((dim * len(union), dim * len(union)), dtype=complex)
            E[np.ix_(idx, idx)] = b.matrix
            return E

        Ei, Ej = embed(bi), embed(bj)
        worst = max(worst, operator_norm(Ei.conj().T @ Ej))
    return worst, len(pairs)


LOW_RANK_BUDGET = 5_000_000


def _full_commutator_norm(a, alpha: Action, Q: np.ndarray, P: Projection, window, threshold: int) -> float:
    """||[sigma(a), Q (x) P]|| on the whole window, without using the coset blocks.

    Dense for small windows, the low-rank factorization when its factors fit
    in ``LOW_RANK_BUDGET`` entries, matrix-free otherwise.
    """
    D = alpha.algebra.dim
    W = len(window)
    if D * W <= threshold:
        X = P.factor_on(window)
        sig = sigma_compression(a, alpha, window).matrix
        M = np.kron(X @ X.T, Q)
        return operator_norm(sig @ M - M @ sig)
    blocks = np.array(sigma_blocks(a, alpha, window))
    basis = _range_basis(Q)
    if D * W * 2 * basis.shape[1] * P.rank <= LOW_RANK_BUDGET:
        X = P.factor_on(window)
        Z = np.kron(X, basis)
        Zb = Z.reshape(W, D, -1)
        sigZ = np.einsum("wij,wjk->wik", blocks, Zb).reshape(D * W, -1)
        sigHZ = np.einsum("wji,wjk->wik", blocks.conj(), Zb).reshape(D * W, -1)
        return gram_norm(LowRankOperator(np.hstack([sigZ, -Z]), np.hstack([Z, sigHZ])))
    X = P.sparse_factor_on(window)
    XT = X.T.tocsr()

    def sig(v, adjoint=False):
        V = v.reshape(W, D)
        if adjoint:
            return np.einsum("wji,wj->wi", blocks.conj(), V).reshape(-1)
        return np.einsum("wij,wj->wi", blocks, V).reshape(-1)

    def proj(v):
        V = v.reshape(W, D)
        return (X @ (XT @ V) @ Q.T).reshape(-1)

    def matvec(v):
        v = np.asarray(v, dtype=complex).ravel()
        return sig(proj(v)) - proj(sig(v))

    def rmatvec(v):
        v = np.asarray(v, dtype=complex).ravel()
        return proj(sig(v, adjoint=True)) - sig(proj(v), adjoint=True)

    op = spla.LinearOperator((D * W, D * W), matvec=matvec, rmatvec=rmatvec, dtype=complex)
    return operator_norm(op, threshold=threshold)


def crossed_commutator(
    a: np.ndarray,
    alpha: Action,
    Q: np.ndarray | None,
    P: Projection,
    window: list[GroupElement] | None = None,
    n: int | None = None,
    dense_threshold: int = DENSE_THRESHOLD,
) -> CrossedCommutatorReport:
    """Verify the estimate ||[sigma(a), Q (x) P]|| <= 2 max_y (||[alpha(y^-1)a, Q]|| + defect).

    Records per-coset block norms, the full commutator norm computed
    independently on the window, block orthogonality and the defect.
    """
    D = alpha.algebra.dim
    Q = np.eye(D, dtype=complex) if Q is None else _check_projection(Q, D)
    a = alpha.algebra.element(a)
    if window is None:
        window = list(P.window)
    missing = set(P.window) - set(window)
    if missing:
        raise WindowError(f"window misses {len(missing)} coset-support points")
    phi = P.phi
    defect = almost_periodicity_defect(alpha, a, phi.tiling, phi.folner)
    blocks = [_coset_block(a, alpha, Q, v) for v in P.vectors]
    residual, overlaps = _orthogonality(blocks, D)
    full = _full_commutator_norm(a, alpha, Q, P, list(window), dense_threshold)
    max_block = max((b.commutator_norm for b in blocks), default=0.0)
    bound = 2 * max((b.q_commutator + defect for b in blocks), default=defect)
    return CrossedCommutatorReport(defect, blocks, full, max_block, residual, overlaps, bound, n)


def tilted_projection(dim: int, angle: float) -> np.ndarray:
    """Rank-one projection onto (cos t, sin t, 0, ...)."""
    D = dim
    v = np.zeros(D, dtype=complex)
    v[0] = math.cos(angle)
    if D > 1:
        v[1] = math.sin(angle)
    return np.outer(v, v.conj())


def matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[_complex_to_json(z) for z in row] for row in M]


def _complex_to_json(z: complex):
    if z.imag == 0:
        return float(z.real)
    return [float(z.real), float(z.imag)]


def matrix_from_json(rows) -> np.ndarray:
    def conv(v):
        if isinstance(v, (list, tuple)):
            re, im = v
            return complex(re, im)
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        return complex(v)

    return np.array([[conv(v) for v in row] for row in rows], dtype=complex)
