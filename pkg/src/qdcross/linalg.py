"""Numeric substrate: exact rationals, dense operator norms, low-rank norms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse.linalg as spla

Rational = Fraction

DENSE_THRESHOLD = 2000
MAX_POWER_ITERATIONS = 20000
POWER_SEED = 20240531


class ConvergenceError(RuntimeError):
    pass


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def operator_norm(M, tol: float = 1e-12, threshold: int = DENSE_THRESHOLD) -> float:
    """Largest singular value of ``M``.

    Matrices whose larger side is at most ``threshold`` go through a full SVD.
    Larger dense ones use power iteration on ``M* M``; iteration stops once the
    Rayleigh residual pins the top singular value to within ``tol``.  Matrix-free
    ``LinearOperator`` inputs get a Lanczos warm start before the same
    certified power iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(M, spla.LinearOperator):
        if max(M.shape) <= threshold:
            return operator_norm(M @ np.eye(M.shape[1], dtype=M.dtype), tol, threshold)
        return lanczos_norm(M, tol=tol)
    M = _as_matrix(M)
    if M.size == 0:
        return 0.0
    if max(M.shape) <= threshold:
        return float(np.linalg.norm(M, 2))
    return power_norm(M, tol=tol)


def _start_vector(n: int, complex_: bool) -> np.ndarray:
    rng = np.random.default_rng(POWER_SEED)
    x = rng.standard_normal(n)
    if complex_:
        x = x + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def power_norm(M, tol: float = 1e-12, max_iter: int = MAX_POWER_ITERATIONS, x0=None) -> float:
    """Power iteration on M* M from a fixed seeded start (or ``x0``)."""
    if not isinstance(M, spla.LinearOperator):
        M = _as_matrix(M)
    complex_ = np.iscomplexobj(M) if isinstance(M, np.ndarray) else np.dtype(M.dtype).kind == "c"
    MH = M.H if isinstance(M, spla.LinearOperator) else M.conj().T
    x = _start_vector(M.shape[1], complex_) if x0 is None else x0 / np.linalg.norm(x0)
    for _ in range(max_iter):
        y = MH @ (M @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        rho = float(np.real(np.vdot(x, y)))
        residual = float(np.linalg.norm(y - rho * x))
        sigma = np.sqrt(max(rho, 0.0))
        # |lambda - rho| <= residual for some eigenvalue lambda of M*M,
        # hence |sqrt(lambda) - sigma| <= residual / sigma.
        if sigma > 0 and residual <= tol * sigma:
            return float(sigma)
        x = y / ny
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def lanczos_norm(M: spla.LinearOperator, tol: float = 1e-12) -> float:
    """Top singular value of a matrix-free operator.

    Lanczos (ARPACK) on M* M supplies the start vector; power iteration then
    continues from it until the same Rayleigh-residual certificate as
    ``power_norm`` holds.
    """
    n = M.shape[1]
    if n <= 2:
        return operator_norm(M @ np.eye(n, dtype=M.dtype), tol)
    A = M.H @ M
    complex_ = np.dtype(M.dtype).kind == "c"
    v0 = _start_vector(n, complex_)
    _, vecs = spla.eigsh(A, k=1, which="LA", v0=v0, tol=0)
    return power_norm(M, tol=tol, x0=vecs[:, 0])


@dataclass(frozen=True)
class LowRankOperator:
    """The operator ``left @ right^*`` stored through its factors.

    Column ``j`` of ``left`` paired with column ``j`` of ``right`` is one
    rank-one term.
    """

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        if self.left.ndim != 2 or self.right.ndim != 2:
            raise ValueError("factors must be matrices")
        if self.left.shape[1] != self.right.shape[1]:
            raise ValueError(
                f"factor ranks differ: {self.left.shape[1]} vs {self.right.shape[1]}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left.shape[0], self.right.shape[0])

    @property
    def rank_bound(self) -> int:
        return self.left.shape[1]

    def materialize(self) -> np.ndarray:
        return self.left @ self.right.conj().T


def gram_norm(op: LowRankOperator, threshold: int = DENSE_THRESHOLD) -> float:
    """Operator norm of ``left @ right^*`` from the rank-sized core.

    Thin QR factors ``left = Q_l R_l`` and ``right = Q_r R_r`` (the R factors
    are Cholesky factors of the two Gram matrices) reduce the norm to that of
    ``R_l R_r^*``.  QR rather than explicit Gram products keeps absolute error
    near machine epsilon, which matters when the norm itself is ~1e-10.
    """
    L, R = op.left, op.right
    if op.rank_bound == 0 or L.shape[0] == 0 or R.shape[0] == 0:
        return 0.0
    _, rl = np.linalg.qr(L, mode="reduced")
    _, rr = np.linalg.qr(R, mode="reduced")
    core = rl @ rr.conj().T
    return operator_norm(core, threshold=threshold)


def is_hermitian(M, atol: float = 0.0) -> bool:
    M = np.asarray(M)
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= atol)
