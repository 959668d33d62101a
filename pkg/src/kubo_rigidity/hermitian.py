"""Dense complex Hermitian linear algebra on bipartite spaces.

Index convention: the basis vector e_i (x) e_j of C^m (x) C^n sits at
position ``n * i + j`` (row-major Kronecker order). Every routine in the
package relies on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ContractError, ConvergenceError, DomainError

HERMITIAN_READ_TOL = 1e-9
ISOMETRY_TOL = 1e-12


def hermitian(M) -> np.ndarray:
    """Return ``(M + M^*) / 2`` as a complex array, rejecting non-finite input."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ContractError("matrix has non-finite entries")
    return (M + M.conj().T) / 2


@dataclass(frozen=True, eq=False)
class Bipartite:
    """Hermitian operator on C^m (x) C^n."""

    mat: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractError(f"factor dimensions must be positive, got {self.m}x{self.n}")
        mat = hermitian(self.mat)
        if mat.shape[0] != self.m * self.n:
            raise ContractError(
                f"matrix of size {mat.shape[0]} does not match {self.m}x{self.n} factors"
            )
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @property
    def dims(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def dim(self) -> int:
        return self.m * self.n

    def with_mat(self, mat) -> Bipartite:
        return Bipartite(mat, self.m, self.n)

    def __add__(self, other: Bipartite) -> Bipartite:
        _check_same_dims(self, other)
        return self.with_mat(self.mat + other.mat)

    def __mul__(self, scalar: float) -> Bipartite:
        return self.with_mat(scalar * self.mat)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Bipartite:
        return self.with_mat(self.mat / scalar)

    def trace(self) -> float:
        return float(np.trace(self.mat).real)


def _check_same_dims(X: Bipartite, Y: Bipartite) -> None:
    if X.dims != Y.dims:
        raise ContractError(f"factor dimensions differ: {X.dims} vs {Y.dims}")


# ---------------------------------------------------------------------------
# Eigensolvers
# ---------------------------------------------------------------------------


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(M, method: str = "lapack") -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    ``method="lapack"`` calls ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    the cyclic complex Jacobi solver :func:`jacobi_eigh`.
    """
    if isinstance(M, Bipartite):
        M = M.mat
    H = hermitian(M)
    if method == "lapack":
        w, U = np.linalg.eigh(H)
        return EigenSystem(w, U)
    if method == "jacobi":
        return jacobi_eigh(H)
    raise ContractError(f"unknown eigensolver {method!r}")


def eigvalsh(M) -> np.ndarray:
    if isinstance(M, Bipartite):
        M = M.mat
    return np.linalg.eigvalsh(hermitian(M))


def _off_norm(A: np.ndarray) -> float:
    # direct sum; ||A||^2 - ||diag||^2 cancels catastrophically near convergence
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def jacobi_eigh(M, tol: float = 1e-13, max_sweeps: int = 100) -> EigenSystem:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each (p, q) rotation first removes the phase of ``A[p, q]`` and then
    applies a real Givens rotation. Iteration stops once the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||M||_F)``.
    """
    A = hermitian(M).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    off = _off_norm(A)
    sweeps = 0
    while off > threshold:
        if sweeps == max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps; "
                f"off-diagonal residual {off:.3e} > {threshold:.3e}"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                mod = abs(b)
                if mod == 0.0:
                    continue
                phase = b / mod
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mod)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                R = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ R
                A[idx, :] = R.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ R
        sweeps += 1
        off = _off_norm(A)
    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], V[:, order])


def apply_spectral_function(
    M,
    g: Callable[[np.ndarray], np.ndarray],
    domain: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Return ``U diag(g(lambda)) U^*`` for the eigendecomposition of ``M``.

    ``domain`` is an optional elementwise predicate on eigenvalues. Any
    eigenvalue failing it, or mapped to a non-finite value, raises
    :class:`DomainError`.
    """
    w, U = eigh(M)
    if domain is not None:
        bad = ~np.asarray(domain(w), dtype=bool)
        if bad.any():
            raise DomainError(f"eigenvalue {w[bad][0]!r} outside the domain of the function")
    with np.errstate(all="ignore"):
        gw = np.asarray(g(w), dtype=float)
    if not np.all(np.isfinite(gw)):
        raise DomainError(f"eigenvalue {w[~np.isfinite(gw)][0]!r} outside the domain of the function")
    return hermitian((U * gw) @ U.conj().T)


# ---------------------------------------------------------------------------
# Tensor structure
# ---------------------------------------------------------------------------


def kron(A, B) -> Bipartite:
    A = hermitian(A)
    B = hermitian(B)
    return Bipartite(np.kron(A, B), A.shape[0], B.shape[0])


def partial_transpose(X: Bipartite) -> Bipartite:
    """Transpose on the second factor, ``(id_m (x) T_n)(X)``."""
    m, n = X.dims
    T = X.mat.reshape(m, n, m, n).transpose(0, 3, 2, 1).reshape(m * n, m * n)
    return Bipartite(T, m, n)


def partial_trace_second(X: Bipartite) -> np.ndarray:
    m, n = X.dims
    return hermitian(np.einsum("ijkj->ik", X.mat.reshape(m, n, m, n)))


def local_congruence(X: Bipartite, R: np.ndarray | None = None, S: np.ndarray | None = None) -> Bipartite:
    """Return ``(R (x) S) X (R (x) S)^*`` for square ``R``, ``S`` (identity if omitted)."""
    m, n = X.dims
    R = np.eye(m) if R is None else np.asarray(R, dtype=complex)
    S = np.eye(n) if S is None else np.asarray(S, dtype=complex)
    if R.shape != (m, m) or S.shape != (n, n):
        raise ContractError(f"local factors {R.shape}, {S.shape} do not match {m}x{n}")
    K = np.kron(R, S)
    return Bipartite(K @ X.mat @ K.conj().T, m, n)


@dataclass(frozen=True, eq=False)
class LocalIsometryPair:
    """Isometries ``V: C^m0 -> C^m`` and ``W: C^n0 -> C^n``."""

    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        for name in ("V", "W"):
            U = np.asarray(getattr(self, name), dtype=complex)
            if U.ndim != 2 or U.shape[0] < U.shape[1]:
                raise ContractError(f"{name} must be a tall matrix, got shape {U.shape}")
            err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]))
            if err > ISOMETRY_TOL:
                raise ContractError(f"{name} is not an isometry: ||{name}*{name} - I|| = {err:.3e}")
            object.__setattr__(self, name, U)

    @classmethod
    def canonical(cls, m0: int, n0: int, m: int, n: int) -> LocalIsometryPair:
        """Inclusions onto the spans of the leading standard basis vectors."""
        if m < m0 or n < n0:
            raise ContractError(f"cannot embed {m0}x{n0} into {m}x{n}")
        return cls(np.eye(m, m0), np.eye(n, n0))

    @property
    def source_dims(self) -> tuple[int, int]:
        return self.V.shape[1], self.W.shape[1]

    @property
    def target_dims(self) -> tuple[int, int]:
        return self.V.shape[0], self.W.shape[0]

    def operator(self) -> np.ndarray:
        return np.kron(self.V, self.W)


def embed(X: Bipartite, iso: LocalIsometryPair) -> Bipartite:
    if X.dims != iso.source_dims:
        raise ContractError(f"isometries act on {iso.source_dims}, operator is {X.dims}")
    K = iso.operator()
    return Bipartite(K @ X.mat @ K.conj().T, *iso.target_dims)


def compress(X: Bipartite, iso: LocalIsometryPair) -> Bipartite:
    """Inverse of :func:`embed` on its range: ``(V (x) W)^* X (V (x) W)``."""
    if X.dims != iso.target_dims:
        raise ContractError(f"isometries map into {iso.target_dims}, operator is {X.dims}")
    K = iso.operator()
    return Bipartite(K.conj().T @ X.mat @ K, *iso.source_dims)


def swap_middle_factors(X, dims: tuple[int, int, int, int]) -> Bipartite:
    """Regroup ``C^d0 (x) C^d1 (x) C^d2 (x) C^d3`` as ``(C^d0 (x) C^d2) (x) (C^d1 (x) C^d3)``.

    Conjugates ``X`` by the permutation exchanging the second and third
    tensor factors. The result is bipartite with factors ``d0*d2`` and
    ``d1*d3``; applying it again with ``(d0, d2, d1, d3)`` undoes it.
    """
    mat = X.mat if isinstance(X, Bipartite) else hermitian(X)
    d0, d1, d2, d3 = dims
    N = d0 * d1 * d2 * d3
    if mat.shape != (N, N):
        raise ContractError(f"operator of size {mat.shape[0]} does not match factors {dims}")
    T = mat.reshape(d0, d1, d2, d3, d0, d1, d2, d3)
    T = T.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(N, N)
    return Bipartite(T, d0 * d2, d1 * d3)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def matrix_to_entries(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def entries_to_matrix(entries) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ContractError(f"malformed matrix entries: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ContractError(f"entries must be a 2-D array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def bipartite_to_dict(X: Bipartite) -> dict:
    return {"m": X.m, "n": X.n, "entries": matrix_to_entries(X.mat)}


def bipartite_from_dict(data: dict) -> Bipartite:
    try:
        m, n = int(data["m"]), int(data["n"])
        M = entries_to_matrix(data["entries"])
    except KeyError as exc:
        raise ContractError(f"matrix JSON is missing key {exc}") from None
    if M.shape != (m * n, m * n):
        raise ContractError(f"entries of shape {M.shape} do not match m*n = {m * n}")
    asym = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if asym > HERMITIAN_READ_TOL:
        raise ContractError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    return Bipartite(M, m, n)


def load_bipartite(path) -> Bipartite:
    with open(path) as fh:
        return bipartite_from_dict(json.load(fh))


def dump_bipartite(X: Bipartite, path) -> None:
    with open(path, "w") as fh:
        json.dump(bipartite_to_dict(X), fh)
