"""The weight function phi, coset vectors xi_{yL}, the projection P and its
commutators with the left regular representation.

phi^2 is kept as exact rationals so the coset identities can be checked with
zero tolerance; floating point only enters through the amplitudes sqrt(phi^2).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .folner import FolnerSet, Tiling, boundary_ratio
from .groups import GroupElement, QuotientMap
from .linalg import DENSE_THRESHOLD, LowRankOperator, gram_norm, operator_norm

NORM_SLACK = 1e-9
IDENTITY_TOL = 1e-12


class CertificateError(AssertionError):
    """A proven inequality or identity failed: the construction is broken."""


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class PhiTable:
    folner: FolnerSet
    tiling: Tiling
    values: dict[GroupElement, Fraction]
    quotient: QuotientMap = field(compare=False)
    by_coset: dict[int, tuple[GroupElement, ...]] = field(compare=False)

    def __call__(self, x: GroupElement) -> Fraction:
        return self.values.get(x, Fraction(0))

    @property
    def support(self) -> frozenset[GroupElement]:
        return frozenset(self.values)

    def coset_members(self, y: GroupElement) -> tuple[GroupElement, ...]:
        return self.by_coset.get(self.quotient(y), ())


def build_phi(F: FolnerSet, T: Tiling) -> PhiTable:
    """phi^2(x) = |K cap F x| / |F| on its support F^-1 K.

    Counting pairs (f, k) with f^-1 k = x gives |K cap Fx| directly since
    f -> f x is injective.
    """
    G = F.group
    counts: dict = defaultdict(int)
    for f in F.elements:
        fi = G.inv_nf(f.nf)
        for k in T.tile:
            counts[G.mul_nf(fi, k.nf)] += 1
    size = len(F)
    values = {GroupElement(G, x): Fraction(c, size) for x, c in counts.items()}
    q = T.quotient()
    by_coset: dict[int, list] = defaultdict(list)
    for x in sorted(values):
        by_coset[q(x)].append(x)
    return PhiTable(F, T, values, q, {i: tuple(v) for i, v in by_coset.items()})


def coset_sum(phi: PhiTable, y: GroupElement) -> Fraction:
    """Sum of phi^2 over the coset yL (exact)."""
    return sum((phi.values[x] for x in phi.coset_members(y)), Fraction(0))


def coset_variation(phi: PhiTable, y: GroupElement, s: GroupElement) -> Fraction:
    """Sum over x in yL of |phi^2(x) - phi^2(sx)|, checked against |F delta Fs|/|F|."""
    si = s.inv()
    xs = set(phi.coset_members(y))
    xs.update(si * x for x in phi.coset_members(s * y))
    total = sum((abs(phi(x) - phi(s * x)) for x in xs), Fraction(0))
    bound = boundary_ratio(phi.folner, s)
    if total > bound:
        raise CertificateError(f"variation {total} exceeds boundary ratio {bound} at y={y!r}, s={s!r}")
    return total


@dataclass(frozen=True)
class CosetVector:
    label: GroupElement
    amplitudes: dict[GroupElement, float]

    def norm_squared(self) -> float:
        return math.fsum(a * a for a in self.amplitudes.values())


def coset_vectors(phi: PhiTable) -> list[CosetVector]:
    out = []
    for y in phi.tiling.tile:
        amps = {x: math.sqrt(phi.values[x]) for x in phi.coset_members(y)}
        out.append(CosetVector(y, amps))
    return out


@dataclass
class WindowOperator:
    """Dense matrix indexed by a finite ordered window of group elements."""

    window: list[GroupElement]
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (len(self.window), len(self.window)):
            raise WindowError(f"matrix shape {self.matrix.shape} vs window {len(self.window)}")
        if len(set(self.window)) != len(self.window):
            raise WindowError("duplicate window entries")


def window_positions(window: list[GroupElement]) -> dict[GroupElement, int]:
    pos = {x: i for i, x in enumerate(window)}
    if len(pos) != len(window):
        raise WindowError("duplicate window entries")
    return pos


def lambda_window(s: GroupElement, window: list[GroupElement]) -> WindowOperator:
    """Compression of lambda(s): delta_x -> delta_{sx}, dropped when sx leaves the window."""
    pos = window_positions(window)
    M = np.zeros((len(window), len(window)))
    for x, j in pos.items():
        i = pos.get(s * x)
        if i is not None:
            M[i, j] = 1.0
    return WindowOperator(list(window), M)


@dataclass
class Projection:
    """P = sum over y in K of the rank-one projections onto xi_{yL}.

    Stored through its factor Xi (window x |K|, sparse, real), so that
    P = Xi Xi^T.  ``to_dense`` materializes it for small windows.
    """

    phi: PhiTable
    vectors: list[CosetVector]
    window: list[GroupElement]
    position: dict[GroupElement, int]
    factor: sp.csc_matrix

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def factor_on(self, window: list[GroupElement]) -> np.ndarray:
        pos = window_positions(window)
        X = np.zeros((len(window), self.rank))
        for j, v in enumerate(self.vectors):
            for x, a in v.amplitudes.items():
                i = pos.get(x)
                if i is None:
                    raise WindowError(f"window misses support point {x!r}")
                X[i, j] = a
        return X

    def sparse_factor_on(self, window: list[GroupElement]) -> sp.csr_matrix:
        pos = window_positions(window)
        rows, cols, data = [], [], []
        for j, v in enumerate(self.vectors):
            for x, a in v.amplitudes.items():
                i = pos.get(x)
                if i is None:
                    raise WindowError(f"window misses support point {x!r}")
                rows.append(i)
                cols.append(j)
                data.append(a)
        return sp.csr_matrix((data, (rows, cols)), shape=(len(window), self.rank))

    def to_dense(self) -> WindowOperator:
        X = self.factor.toarray()
        return WindowOperator(list(self.window), X @ X.T)

    def gram(self) -> np.ndarray:
        X = self.factor
        return (X.T @ X).toarray()

    def gram_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(self.rank)), initial=0.0))

    def idempotence_defect(self) -> float:
        """||P^2 - P|| = max |g (g - 1)| over eigenvalues g of Xi^T Xi."""
        g = np.linalg.eigvalsh(self.gram())
        return float(np.max(np.abs(g * (g - 1.0)), initial=0.0))

    def trace(self) -> float:
        return math.fsum(v.norm_squared() for v in self.vectors)


def build_projection(phi: PhiTable) -> Projection:
    for y in phi.tiling.tile:
        total = coset_sum(phi, y)
        if total != 1:
            raise CertificateError(f"coset sum {total} != 1 at y={y!r}")
    vecs = coset_vectors(phi)
    window = sorted(phi.support)
    P = Projection(phi, vecs, window, window_positions(window), None)
    P.factor = P.sparse_factor_on(window).tocsc()
    defect = P.gram_defect()
    if defect > IDENTITY_TOL:
        raise CertificateError(f"coset vectors are not orthonormal: {defect}")
    return P


def commutator_window(s: GroupElement, P: Projection) -> list[GroupElement]:
    """W u sW u s^-1 W: outside it [lambda(s), P] vanishes identically."""
    W = set(P.window)
    si = s.inv()
    return sorted(W | {s * x for x in W} | {si * x for x in W})


def _dense_lambda_commutator(s: GroupElement, P: Projection, V: list[GroupElement]) -> float:
    X = P.factor_on(V)
    Lam = lambda_window(s, V).matrix
    Pm = X @ X.T
    return operator_norm(Lam @ Pm - Pm @ Lam)


def _sparse_lambda_commutator(s: GroupElement, P: Projection, V: list[GroupElement]) -> float:
    """Matrix-free version of the dense computation for large windows."""
    pos = window_positions(V)
    rows, cols = [], []
    for x, j in pos.items():
        i = pos.get(s * x)
        if i is not None:
            rows.append(i)
            cols.append(j)
    Lam = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(V), len(V)))
    X = P.sparse_factor_on(V)
    XT = X.T.tocsr()
    LamT = Lam.T.tocsr()

    def matvec(v):
        v = np.asarray(v, dtype=float).ravel()
        return Lam @ (X @ (XT @ v)) - X @ (XT @ (Lam @ v))

    def rmatvec(v):
        v = np.asarray(v, dtype=float).ravel()
        return X @ (XT @ (LamT @ v)) - LamT @ (X @ (XT @ v))

    op = spla.LinearOperator((len(V), len(V)), matvec=matvec, rmatvec=rmatvec, dtype=float)
    return operator_norm(op)


def _blockwise_lambda_commutator(s: GroupElement, P: Projection) -> float:
    """[lambda(s), P] maps the coset space of zL into that of szL; take the max
    of the block norms, each a rank-two operator."""
    phi = P.phi
    by_label = {phi.quotient(v.label): v for v in P.vectors}
    si = s.inv()
    best = 0.0
    for v in P.vectors:
        w = by_label[phi.quotient(s * v.label)]
        u = {s * x: a for x, a in v.amplitudes.items()}
        back = {si * x: a for x, a in w.amplitudes.items()}
        rows = sorted(set(u) | set(w.amplitudes))
        cols = sorted(set(v.amplitudes) | set(back))
        rpos = {x: i for i, x in enumerate(rows)}
        cpos = {x: i for i, x in enumerate(cols)}
        left = np.zeros((len(rows), 2))
        right = np.zeros((len(cols), 2))
        for x, a in u.items():
            left[rpos[x], 0] = a
        for x, a in w.amplitudes.items():
            left[rpos[x], 1] = -a
        for x, a in v.amplitudes.items():
            right[cpos[x], 0] = a
        for x, a in back.items():
            right[cpos[x], 1] = a
        best = max(best, gram_norm(LowRankOperator(left, right)))
    return best


def lambda_envelope(F: FolnerSet, s: GroupElement) -> float:
    return 2.0 * math.sqrt(boundary_ratio(F, s))


def lambda_commutator_norm(
    s: GroupElement,
    P: Projection,
    window: list[GroupElement] | None = None,
    dense_threshold: int = DENSE_THRESHOLD,
    check: bool = True,
) -> float:
    """||[lambda(s), P]|| as an operator on l^2(G).

    P vanishes off its window W, so the commutator vanishes off
    V = W u sW u s^-1 W and the finite computation is exact.  A caller-supplied
    window must contain V.  Above ``dense_threshold`` the default window is
    handled through the coset-block decomposition and an explicit window
    through a matrix-free operator.
    """
    V = commutator_window(s, P)
    if window is not None:
        missing = set(V) - set(window)
        if missing:
            raise WindowError(f"window misses {len(missing)} points of W u sW u s^-1 W")
        V = list(window)
    if len(V) <= dense_threshold:
        value = _dense_lambda_commutator(s, P, V)
    elif window is not None:
        value = _sparse_lambda_commutator(s, P, V)
    else:
        value = _blockwise_lambda_commutator(s, P)
    if check:
        env = lambda_envelope(P.phi.folner, s)
        if value > env + NORM_SLACK:
            raise CertificateError(f"||[lambda(s),P]|| = {value} exceeds envelope {env} for s={s!r}")
    return value


def projection_defect(P: Projection, x: GroupElement) -> float:
    """||P delta_x - delta_x||, checked against sqrt(1 - phi^2(x))."""
    closed = math.sqrt(1 - P.phi(x))
    i = P.position.get(x)
    if i is None:
        value = 1.0
    else:
        row = P.factor.getrow(i).toarray().ravel()
        col = P.factor @ row
        col[i] -= 1.0
        value = math.sqrt(math.fsum(c * c for c in col))
    if abs(value - closed) > IDENTITY_TOL:
        raise CertificateError(f"projection defect {value} != closed form {closed} at {x!r}")
    return value
