"""Membership tests for the PSD, PPT, separable and Schmidt-number cones.

Separability is only decided where positivity of the partial transpose is
equivalent to it (2x2 and 2x3). Schmidt numbers are only reported exactly
where a structural argument pins them down; elsewhere a generic bound is
returned and marked as such.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ContractError, DomainError, UndecidableError
from .hermitian import Bipartite, eigvalsh, partial_transpose

DEFAULT_CONE_TOL = 1e-9
SCHMIDT_RTOL = 1e-10
PERES_HORODECKI_DIMS = {(2, 2), (2, 3), (3, 2)}


def cone_tol() -> float:
    """Base cone tolerance; the ``CONE_TOL`` environment variable overrides the default."""
    raw = os.environ.get("CONE_TOL")
    if raw is None:
        return DEFAULT_CONE_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ContractError(f"CONE_TOL={raw!r} is not a number") from None
    if not tol >= 0:
        raise ContractError(f"CONE_TOL must be non-negative, got {tol}")
    return tol


def scaled_tol(X: Bipartite, tol: float | None = None) -> float:
    """Absolute tolerance: the base tolerance times ``|Tr X|`` (or 1 for traceless X)."""
    base = cone_tol() if tol is None else tol
    scale = abs(X.trace())
    return base * (scale if scale > 0 else 1.0)


@dataclass
class ConeVerdict:
    """Outcome of a cone-membership test.

    ``certificate`` is one of ``"PTSpectrum"``, ``"PeresHorodecki"``,
    ``"StructuralLemma"``, ``"NotPSD"`` or ``"Unknown"``; raw minimum
    eigenvalues are always reported so callers can re-threshold.
    """

    member: bool
    certificate: str
    min_pt_eigenvalue: float
    min_eigenvalue: float
    tol: float
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "min_pt_eig": self.min_pt_eigenvalue,
            "min_eig": self.min_eigenvalue,
            "certificate": self.certificate,
            "tol": self.tol,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ConeVerdict:
        return cls(
            member=bool(data["member"]),
            certificate=data["certificate"],
            min_pt_eigenvalue=float(data["min_pt_eig"]),
            min_eigenvalue=float(data.get("min_eig", float("nan"))),
            tol=float(data.get("tol", DEFAULT_CONE_TOL)),
            detail=data.get("detail", {}),
        )


@dataclass(frozen=True)
class SchmidtInfo:
    vector_dims: tuple[int, int]
    schmidt_rank: int
    singular_values: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class SchmidtNumberBound:
    lower: int
    upper: int
    method: str

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": self.method}


def is_psd(X: Bipartite, tol: float | None = None) -> tuple[bool, float]:
    w0 = float(eigvalsh(X)[0])
    return w0 >= -scaled_tol(X, tol), w0


def is_ppt(X: Bipartite, tol: float | None = None) -> ConeVerdict:
    atol = scaled_tol(X, tol)
    spec = eigvalsh(X)
    pt_spec = eigvalsh(partial_transpose(X))
    psd = spec[0] >= -atol
    pt_psd = pt_spec[0] >= -atol
    detail = {"pt_spectrum": pt_spec.tolist()}
    return ConeVerdict(
        member=bool(psd and pt_psd),
        certificate="PTSpectrum" if psd else "NotPSD",
        min_pt_eigenvalue=float(pt_spec[0]),
        min_eigenvalue=float(spec[0]),
        tol=atol,
        detail=detail,
    )


def is_interior_ppt(X: Bipartite, tol: float | None = None) -> bool:
    """Strict positivity of both ``X`` and its partial transpose (beyond the tolerance)."""
    v = is_ppt(X, tol)
    return v.min_eigenvalue > v.tol and v.min_pt_eigenvalue > v.tol


def is_separable_small(X: Bipartite, tol: float | None = None) -> ConeVerdict:
    """Separability in 2x2 and 2x3, where it coincides with PPT."""
    if X.dims not in PERES_HORODECKI_DIMS:
        raise UndecidableError(
            f"separability of a {X.m}x{X.n} operator is undecidable here; "
            "only 2x2 and 2x3 are supported"
        )
    v = is_ppt(X, tol)
    if v.certificate == "PTSpectrum":
        v.certificate = "PeresHorodecki"
    return v


def schmidt_rank(z, dims: tuple[int, int]) -> SchmidtInfo:
    """Schmidt rank of ``z`` in C^m (x) C^n from the singular values of its m x n reshaping."""
    m, n = dims
    z = np.asarray(z, dtype=complex).ravel()
    if z.size != m * n:
        raise ContractError(f"vector of length {z.size} does not match {m}x{n}")
    sv = np.linalg.svd(z.reshape(m, n), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return SchmidtInfo((m, n), 0, np.zeros(0))
    rank = int(np.count_nonzero(sv > SCHMIDT_RTOL * sv[0]))
    return SchmidtInfo((m, n), rank, sv)


def schmidt_number_2x2(X: Bipartite, tol: float | None = None) -> SchmidtNumberBound:
    if X.dims != (2, 2):
        raise ContractError(f"expected a 2x2 operator, got {X.m}x{X.n}")
    v = is_ppt(X, tol)
    if v.certificate == "NotPSD":
        raise DomainError(f"operator is not positive semidefinite (min eigenvalue {v.min_eigenvalue:.3e})")
    k = 1 if v.member else 2
    return SchmidtNumberBound(k, k, "PeresHorodecki")


def schmidt_number_bound(X: Bipartite, tol: float | None = None) -> SchmidtNumberBound:
    """Best available bound on SN(X) for an arbitrary PSD operator."""
    if X.dims == (2, 2):
        return schmidt_number_2x2(X, tol)
    v = is_ppt(X, tol)
    if v.certificate == "NotPSD":
        raise DomainError(f"operator is not positive semidefinite (min eigenvalue {v.min_eigenvalue:.3e})")
    top = min(X.dims)
    if X.dims in PERES_HORODECKI_DIMS:
        k = 1 if v.member else 2
        return SchmidtNumberBound(k, k, "PeresHorodecki")
    if top == 1:
        return SchmidtNumberBound(1, 1, "generic")
    return SchmidtNumberBound(1 if v.member else 2, top, "generic")


def schmidt_number_pure_tensor(
    psi,
    psi_dims: tuple[int, int],
    Y: Bipartite,
    y_bound: SchmidtNumberBound | None = None,
) -> SchmidtNumberBound:
    """Schmidt number of ``psi psi^* (x) Y`` regrouped as a bipartite operator.

    Multiplies the bounds on SN(Y) by SR(psi). The result lives on
    ``(C^p (x) C^m) (x) (C^q (x) C^n)`` for ``psi`` in C^p (x) C^q and
    ``Y`` on C^m (x) C^n.
    """
    r = schmidt_rank(psi, psi_dims).schmidt_rank
    if r == 0:
        raise DomainError("psi is the zero vector")
    inner = schmidt_number_bound(Y) if y_bound is None else y_bound
    cap = min(psi_dims[0] * Y.m, psi_dims[1] * Y.n)
    lower, upper = r * inner.lower, min(r * inner.upper, cap)
    method = "StructuralLemma" if inner.exact else f"StructuralLemma (inexact: inner {inner.method})"
    return SchmidtNumberBound(lower, upper, method)
