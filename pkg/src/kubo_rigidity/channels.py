"""Choi matrices of linear maps, channel classification, and Choi-level means.

For ``Phi: M_m -> M_n`` the Choi matrix is ``C = sum_ij E_ij (x) Phi(E_ij)``:
the (i, j) block of ``C`` is ``Phi(E_ij)``. Maps are stored through these
images.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .cones import (
    DEFAULT_CONE_TOL,
    ConeVerdict,
    is_ppt,
    is_separable_small,
    schmidt_number_bound,
    scaled_tol,
)
from .errors import ContractError, DomainError, UndecidableError
from .hermitian import (
    Bipartite,
    apply_spectral_function,
    bipartite_from_dict,
    bipartite_to_dict,
    eigvalsh,
    entries_to_matrix,
    local_congruence,
    partial_trace_second,
)
from .kubo_ando import RepresentingFunction, mean
from .rigidity import RigidityReport, build_pair, xform_mean

TP_TOL = 1e-10
HP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Hermiticity-preserving linear map ``M_m -> M_n`` given by ``images[i, j] = Phi(E_ij)``."""

    images: np.ndarray

    def __post_init__(self):
        im = np.asarray(self.images, dtype=complex)
        if im.ndim != 4 or im.shape[0] != im.shape[1] or im.shape[2] != im.shape[3]:
            raise ContractError(f"images must have shape (m, m, n, n), got {im.shape}")
        if not np.all(np.isfinite(im)):
            raise ContractError("map images have non-finite entries")
        adj = im.transpose(1, 0, 3, 2).conj()
        scale = max(1.0, float(np.max(np.abs(im))) if im.size else 1.0)
        err = float(np.max(np.abs(im - adj))) if im.size else 0.0
        if err > HP_RTOL * scale:
            raise ContractError(f"map is not Hermiticity-preserving (defect {err:.3e})")
        im.flags.writeable = False
        object.__setattr__(self, "images", im)

    @property
    def m(self) -> int:
        return self.images.shape[0]

    @property
    def n(self) -> int:
        return self.images.shape[2]

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.shape != (self.m, self.m):
            raise ContractError(f"input must be {self.m}x{self.m}, got {X.shape}")
        return np.einsum("ij,ijab->ab", X, self.images)

    def extended(self, X) -> np.ndarray:
        """``(id_k (x) Phi)(X)`` for ``X`` on C^k (x) C^m."""
        X = np.asarray(X, dtype=complex)
        k, rem = divmod(X.shape[0], self.m)
        if rem or X.shape != (k * self.m, k * self.m):
            raise ContractError(f"input of shape {X.shape} is not on C^k (x) C^{self.m}")
        T = X.reshape(k, self.m, k, self.m)
        out = np.einsum("piqj,ijab->paqb", T, self.images)
        return out.reshape(k * self.n, k * self.n)


def from_kraus(kraus) -> LinearMap:
    """``Phi(X) = sum_k K_k X K_k^*`` for ``n x m`` Kraus operators."""
    Ks = [np.atleast_2d(np.asarray(K, dtype=complex)) for K in kraus]
    if not Ks:
        raise ContractError("need at least one Kraus operator")
    n, m = Ks[0].shape
    if any(K.shape != (n, m) for K in Ks):
        raise ContractError("Kraus operators must share one shape")
    images = sum(np.einsum("ai,bj->ijab", K, K.conj()) for K in Ks)
    return LinearMap(images)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    bip: Bipartite
    trace_preserving: bool = field(init=False)

    def __post_init__(self):
        defect = float(np.linalg.norm(partial_trace_second(self.bip) - np.eye(self.bip.m)))
        object.__setattr__(self, "trace_preserving", defect <= TP_TOL)

    @property
    def mat(self) -> np.ndarray:
        return self.bip.mat

    @property
    def dims(self) -> tuple[int, int]:
        return self.bip.dims

    def tp_defect(self) -> float:
        return float(np.linalg.norm(partial_trace_second(self.bip) - np.eye(self.bip.m)))


def choi_of_map(phi: LinearMap) -> ChoiMatrix:
    m, n = phi.m, phi.n
    C = phi.images.transpose(0, 2, 1, 3).reshape(m * n, m * n)
    return ChoiMatrix(Bipartite(C, m, n))


def map_of_choi(C: ChoiMatrix | Bipartite) -> LinearMap:
    bip = C.bip if isinstance(C, ChoiMatrix) else C
    m, n = bip.dims
    return LinearMap(bip.mat.reshape(m, n, m, n).transpose(0, 2, 1, 3))


def _as_choi(x) -> ChoiMatrix:
    if isinstance(x, ChoiMatrix):
        return x
    if isinstance(x, LinearMap):
        return choi_of_map(x)
    if isinstance(x, Bipartite):
        return ChoiMatrix(x)
    raise ContractError(f"expected a map or Choi matrix, got {type(x).__name__}")


@dataclass
class MapClass:
    """Classification of a map through its Choi matrix.

    ``entanglement_breaking`` is ``None`` when separability is undecidable
    at these dimensions.
    """

    completely_positive: bool
    trace_preserving: bool
    ppt_map: bool
    entanglement_breaking: bool | None
    schmidt_number: dict
    verdict: ConeVerdict
    min_eigenvalue: float
    tp_defect: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.to_dict()
        return d


def classify(C, tol: float | None = None) -> MapClass:
    C = _as_choi(C)
    v = is_ppt(C.bip, tol)
    cp = v.min_eigenvalue >= -v.tol
    ppt = v.member
    try:
        eb_verdict = is_separable_small(C.bip, tol)
        eb: bool | None = eb_verdict.member
        v = eb_verdict
    except UndecidableError:
        # PPT failure still rules out separability
        eb = False if not ppt else None
    sn = schmidt_number_bound(C.bip, tol).to_dict() if cp else {}
    return MapClass(
        completely_positive=bool(cp),
        trace_preserving=C.trace_preserving,
        ppt_map=bool(ppt),
        entanglement_breaking=eb,
        schmidt_number=sn,
        verdict=v,
        min_eigenvalue=v.min_eigenvalue,
        tp_defect=C.tp_defect(),
    )


def normalize(C) -> ChoiMatrix:
    """``((Tr_2 C)^{-1/2} (x) I) C ((Tr_2 C)^{-1/2} (x) I)``, which has ``Tr_2 = I``."""
    C = _as_choi(C)
    T = partial_trace_second(C.bip)
    w = np.linalg.eigvalsh(T)
    if w[0] <= 1e-14 * max(abs(w[-1]), 1e-300):
        raise DomainError(f"partial trace is singular (min eigenvalue {w[0]:.3e}); cannot normalize")
    R = apply_spectral_function(T, lambda x: x**-0.5, domain=lambda x: x > 0)
    return ChoiMatrix(local_congruence(C.bip, R))


def interior_shift(C, delta: float | None = None) -> ChoiMatrix:
    """``C + delta I`` with default ``delta = 1e-8 Tr C``; opt-in regularisation for boundary channels."""
    C = _as_choi(C)
    if delta is None:
        delta = 1e-8 * C.bip.trace()
    return ChoiMatrix(C.bip.with_mat(C.mat + delta * np.eye(C.bip.dim)))


def _require_full_rank(C: ChoiMatrix, name: str) -> None:
    w0 = float(eigvalsh(C.bip)[0])
    if w0 <= scaled_tol(C.bip, DEFAULT_CONE_TOL):
        raise DomainError(
            f"Choi matrix of {name} is not positive definite (min eigenvalue {w0:.3e}); "
            "consider interior_shift() to move it off the boundary"
        )


def choi_level_mean(f: RepresentingFunction, phi, psi) -> LinearMap:
    """The map whose Choi matrix is ``C_phi sigma C_psi``."""
    Cp, Cq = _as_choi(phi), _as_choi(psi)
    if Cp.dims != Cq.dims:
        raise ContractError(f"maps act between different spaces: {Cp.dims} vs {Cq.dims}")
    _require_full_rank(Cp, "phi")
    _require_full_rank(Cq, "psi")
    return map_of_choi(mean(f, Cp.bip, Cq.bip))


def normalized_channel_mean(f: RepresentingFunction, phi, psi) -> LinearMap:
    """Choi-level mean followed by the trace-restoring normalisation."""
    Cp, Cq = _as_choi(phi), _as_choi(psi)
    for name, C in (("phi", Cp), ("psi", Cq)):
        if not C.trace_preserving:
            raise ContractError(f"{name} is not trace-preserving (defect {C.tp_defect():.3e})")
    raw = choi_of_map(choi_level_mean(f, Cp, Cq))
    return map_of_choi(normalize(raw))


def verify_thm_ent_rig(f: RepresentingFunction, epsilon: float, c: float = 0.0) -> RigidityReport:
    """Full-rank entanglement-breaking qubit channels whose normalised mean is not PPT."""
    pair = build_pair(epsilon, c)
    A, B = pair.A.matrix(), pair.B.matrix()
    tA, tB = pair.A.tr2_scalar(), pair.B.tr2_scalar()
    CA, CB = normalize(A), normalize(B)
    scalar_gap = max(
        float(np.linalg.norm(CA.mat - A.mat / tA)),
        float(np.linalg.norm(CB.mat - B.mat / tB)),
    )
    cls_in = [classify(CA), classify(CB)]
    full_rank = [float(eigvalsh(C.bip)[0]) > scaled_tol(C.bip) for C in (CA, CB)]
    raw = choi_of_map(choi_level_mean(f, CA, CB))
    out = choi_of_map(normalized_channel_mean(f, CA, CB))
    cls_raw = classify(raw)
    cls_out = classify(out)

    closed = xform_mean(f, pair.A.scaled(1 / tA), pair.B.scaled(1 / tB))
    closed = closed.scaled(1 / closed.tr2_scalar())

    inputs_ok = all(x.trace_preserving and x.entanglement_breaking for x in cls_in) and all(full_rank)
    if not inputs_ok:
        conclusion = "inconclusive"
    elif not cls_out.ppt_map:
        conclusion = "violated"
    elif cls_out.entanglement_breaking and f.is_affine:
        conclusion = "preserved"
    else:
        conclusion = "inconclusive"
    details = {
        "c": c,
        "input_classes": [x.to_dict() for x in cls_in],
        "input_full_rank": full_rank,
        "input_tp_defect": [x.tp_defect for x in cls_in],
        "scalar_normalisation_gap": scalar_gap,
        "raw_mean_ppt": cls_raw.ppt_map,
        "normalisation_preserves_ppt": cls_raw.ppt_map == cls_out.ppt_map,
        "output_class": cls_out.to_dict(),
        "affine": f.is_affine,
    }
    return RigidityReport(
        theorem="ent-rig",
        mean=f.spec,
        epsilon=epsilon,
        inputs=[x.verdict.to_dict() for x in cls_in],
        mean_verdict=cls_out.verdict.to_dict(),
        lambda3={"exact": closed.lambda3(), "numeric": cls_out.verdict.min_pt_eigenvalue},
        kappa=f.kappa,
        fitted=None,
        conclusion=conclusion,
        details=details,
    )


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def channel_from_dict(data: dict) -> LinearMap:
    if "kraus" in data:
        return from_kraus([entries_to_matrix(K) for K in data["kraus"]])
    if "choi" in data:
        return map_of_choi(bipartite_from_dict(data["choi"]))
    raise ContractError("channel JSON needs a 'kraus' or 'choi' key")


def channel_to_dict(phi: LinearMap) -> dict:
    return {"choi": bipartite_to_dict(choi_of_map(phi).bip)}


def load_channel(path) -> LinearMap:
    with open(path) as fh:
        return channel_from_dict(json.load(fh))
