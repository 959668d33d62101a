"""Two-qubit counterexamples to cone preservation and their lifts.

Every operator here is built in the orthonormal basis

    u = e1(x)e1,  v = e2(x)e2,  s = (e1(x)e2 + e2(x)e1)/sqrt2,  a = (e1(x)e2 - e2(x)e1)/sqrt2

as ``alpha (uu* + vv*) + beta ss* + gamma aa*``. The pair

    A_eps: ((1+eps)/2, (1-eps)/2, (3+eps)/2),   B_eps: ((1-eps)/2, (1+eps)/2, (3-eps)/2)

is separable, while the partial transpose of ``A_eps sigma B_eps`` has the
eigenvalue ``lambda3 = alpha + beta/2 - gamma/2 ~ -(4/3) kappa eps^2``.

Nothing here claims a theorem holds at a given eps: each check evaluates
and reports ``"violated"``, ``"preserved"`` or ``"inconclusive"``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .cones import (
    ConeVerdict,
    is_interior_ppt,
    is_ppt,
    is_separable_small,
    schmidt_number_2x2,
    schmidt_number_pure_tensor,
)
from .errors import ContractError
from .hermitian import (
    Bipartite,
    LocalIsometryPair,
    compress,
    embed,
    eigvalsh,
    kron,
    partial_transpose,
    swap_middle_factors,
)
from .kubo_ando import RepresentingFunction, curvature_numeric, mean, mean_commuting, mean_on_support

DEFAULT_EPS_GRID = (0.1, 0.05, 0.025, 0.0125)
IDENTITY_TOL = 1e-9

_R2 = np.sqrt(0.5)
# columns u, v, s, a in the computational basis |00>, |01>, |10>, |11>
MAGIC_BASIS = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, _R2, _R2],
        [0.0, 0.0, _R2, -_R2],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class XForm:
    """Operator ``alpha (uu* + vv*) + beta ss* + gamma aa*`` on C^2 (x) C^2."""

    alpha: float
    beta: float
    gamma: float

    def coefficients(self) -> np.ndarray:
        """Eigenvalues on (u, v, s, a)."""
        return np.array([self.alpha, self.alpha, self.beta, self.gamma])

    def matrix(self) -> Bipartite:
        U = MAGIC_BASIS
        return Bipartite((U * self.coefficients()) @ U.T, 2, 2)

    def pt_spectrum(self) -> np.ndarray:
        al, be, ga = self.alpha, self.beta, self.gamma
        half = (be - ga) / 2
        return np.sort([(be + ga) / 2, (be + ga) / 2, al + half, al - half])

    def tr2_scalar(self) -> float:
        """``Tr_2 X = (alpha + beta/2 + gamma/2) I``."""
        return self.alpha + self.beta / 2 + self.gamma / 2

    def lambda3(self) -> float:
        return self.alpha + self.beta / 2 - self.gamma / 2

    def shifted(self, delta: float) -> XForm:
        # uu* + vv* + ss* + aa* = I
        return XForm(self.alpha + delta, self.beta + delta, self.gamma + delta)

    def is_psd(self) -> bool:
        return min(self.alpha, self.beta, self.gamma) >= 0

    def scaled(self, k: float) -> XForm:
        return XForm(k * self.alpha, k * self.beta, k * self.gamma)


def xform_mean(f: RepresentingFunction, A: XForm, B: XForm) -> XForm:
    al, be, ga = mean_commuting(f, [A.alpha, A.beta, A.gamma], [B.alpha, B.beta, B.gamma])
    return XForm(float(al), float(be), float(ga))


@dataclass(frozen=True)
class RigidityPair:
    epsilon: float
    c: float
    A: XForm
    B: XForm

    @property
    def shift(self) -> float:
        return self.c * self.epsilon**2


def build_pair(epsilon: float, c: float = 0.0) -> RigidityPair:
    """``A_eps + c eps^2 I`` and ``B_eps + c eps^2 I``."""
    if not 0.0 < epsilon < 1.0:
        raise ContractError(f"epsilon must lie in (0, 1), got {epsilon}")
    if c < 0:
        raise ContractError(f"interior shift must be non-negative, got {c}")
    e = epsilon
    A = XForm((1 + e) / 2, (1 - e) / 2, (3 + e) / 2)
    B = XForm((1 - e) / 2, (1 + e) / 2, (3 - e) / 2)
    d = c * e * e
    return RigidityPair(e, c, A.shifted(d), B.shifted(d))


def lambda3_closed_form(f: RepresentingFunction, epsilon: float, c: float = 0.0) -> float:
    pair = build_pair(epsilon, c)
    return xform_mean(f, pair.A, pair.B).lambda3()


def lambda3_numeric(f: RepresentingFunction, epsilon: float, c: float = 0.0) -> float:
    """Minimum partial-transpose eigenvalue of the mean of the full 4x4 matrices."""
    pair = build_pair(epsilon, c)
    M = mean(f, pair.A.matrix(), pair.B.matrix())
    return float(eigvalsh(partial_transpose(M))[0])


def fit_eps2_coefficient(eps, lam) -> float:
    """Richardson estimate of ``c2`` in ``lam = c2 eps^2 + c3 eps^3`` from the last two points."""
    e1, e2 = eps[-2], eps[-1]
    y1, y2 = lam[-2] / e1**2, lam[-1] / e2**2
    return (e1 * y2 - e2 * y1) / (e1 - e2)


@dataclass
class Lambda3Report:
    mean: str
    epsilons: list[float]
    lambda3_exact: list[float]
    lambda3_numeric: list[float]
    fitted_coefficient: float
    predicted: float
    kappa: float
    max_path_gap: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_grid(eps_grid) -> list[float]:
    grid = [float(e) for e in eps_grid]
    if len(grid) < 2:
        raise ContractError("epsilon grid needs at least two points")
    if any(not 0.0 < e < 1.0 for e in grid):
        raise ContractError(f"epsilon grid must lie in (0, 1): {grid}")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ContractError(f"epsilon grid must be strictly descending: {grid}")
    return grid


def lambda3_scan(f: RepresentingFunction, eps_grid=DEFAULT_EPS_GRID) -> Lambda3Report:
    grid = _check_grid(eps_grid)
    exact = [lambda3_closed_form(f, e) for e in grid]
    numeric = [lambda3_numeric(f, e) for e in grid]
    kappa = curvature_numeric(f)
    return Lambda3Report(
        mean=f.spec,
        epsilons=grid,
        lambda3_exact=exact,
        lambda3_numeric=numeric,
        fitted_coefficient=fit_eps2_coefficient(grid, exact),
        predicted=-4.0 / 3.0 * kappa,
        kappa=kappa,
        max_path_gap=max(abs(x - y) for x, y in zip(exact, numeric)),
    )


# ---------------------------------------------------------------------------
# Theorem reports
# ---------------------------------------------------------------------------


@dataclass
class RigidityReport:
    theorem: str
    mean: str
    epsilon: float
    inputs: list[dict]
    mean_verdict: dict
    lambda3: dict
    kappa: float
    fitted: float | None
    conclusion: str
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RigidityReport:
        return cls(**data)


def _conclusion(f: RepresentingFunction, inputs_certified: bool, mean_in_cone: bool) -> str:
    if not inputs_certified:
        return "inconclusive"
    if not mean_in_cone:
        return "violated"
    return "preserved" if f.is_affine else "inconclusive"


def _lambda3_entry(f, epsilon, c) -> dict:
    return {
        "exact": lambda3_closed_form(f, epsilon, c),
        "numeric": lambda3_numeric(f, epsilon, c),
    }


def verify_thm_main1(f: RepresentingFunction, epsilon: float, c: float = 0.0) -> RigidityReport:
    """Two-qubit check: separable (optionally interior) inputs, mean outside PPT."""
    pair = build_pair(epsilon, c)
    A, B = pair.A.matrix(), pair.B.matrix()
    vin = [is_separable_small(A), is_separable_small(B)]
    M = mean(f, A, B)
    vmean = is_separable_small(M)
    commuting = xform_mean(f, pair.A, pair.B).matrix()
    details = {
        "c": c,
        "c_threshold": 4.0 / 3.0 * f.kappa,
        "inputs_interior": [is_interior_ppt(A), is_interior_ppt(B)],
        "mean_min_eig": vmean.min_eigenvalue,
        "path_gap": float(np.linalg.norm(M.mat - commuting.mat)),
        "affine": f.is_affine,
    }
    inputs_ok = all(v.member for v in vin) and (c == 0 or all(details["inputs_interior"]))
    return RigidityReport(
        theorem="main1",
        mean=f.spec,
        epsilon=epsilon,
        inputs=[v.to_dict() for v in vin],
        mean_verdict=vmean.to_dict(),
        lambda3=_lambda3_entry(f, epsilon, c),
        kappa=f.kappa,
        fitted=None,
        conclusion=_conclusion(f, inputs_ok, vmean.member),
        details=details,
    )


def _lifted_verdict(X2: Bipartite, Xl: Bipartite) -> ConeVerdict:
    """Separability of a locally embedded 2x2 operator, certified through the 2x2 block."""
    inner = is_separable_small(X2)
    outer = is_ppt(Xl)
    return ConeVerdict(
        member=inner.member,
        certificate="StructuralLemma",
        min_pt_eigenvalue=outer.min_pt_eigenvalue,
        min_eigenvalue=outer.min_eigenvalue,
        tol=outer.tol,
        detail={"reason": "local isometric embedding preserves separability", "inner": inner.to_dict()},
    )


def _lift(f: RepresentingFunction, epsilon: float, m: int, n: int, c: float):
    if m < 2 or n < 2:
        raise ContractError(f"target dimensions must be at least 2x2, got {m}x{n}")
    pair = build_pair(epsilon, c)
    A, B = pair.A.matrix(), pair.B.matrix()
    iso = LocalIsometryPair.canonical(2, 2, m, n)
    At, Bt = embed(A, iso), embed(B, iso)
    M2 = mean(f, A, B)
    Mt = mean_on_support(f, At, Bt)
    residual = float(np.linalg.norm(embed(M2, iso).mat - Mt.mat))
    back = float(np.linalg.norm(compress(Mt, iso).mat - M2.mat))
    vin = [_lifted_verdict(A, At), _lifted_verdict(B, Bt)]
    return pair, (A, B, M2), (At, Bt, Mt), vin, residual, back


def lift_counterexample(f: RepresentingFunction, epsilon: float, m: int, n: int, c: float = 0.0) -> RigidityReport:
    """Embed the two-qubit pair into C^m (x) C^n and recheck."""
    pair, (_, _, M2), (_, _, Mt), vin, residual, back = _lift(f, epsilon, m, n, c)
    vmean = is_ppt(Mt)
    v2 = is_ppt(M2)
    details = {
        "dims": [m, n],
        "min_pt_eig_2x2": v2.min_pt_eigenvalue,
        "min_pt_eig_gap": abs(vmean.min_pt_eigenvalue - min(v2.min_pt_eigenvalue, 0.0)),
        "congruence_residual": residual,
        "compression_residual": back,
        "affine": f.is_affine,
    }
    inputs_ok = all(v.member for v in vin) and residual <= IDENTITY_TOL
    return RigidityReport(
        theorem="main2",
        mean=f.spec,
        epsilon=epsilon,
        inputs=[v.to_dict() for v in vin],
        mean_verdict=vmean.to_dict(),
        lambda3=_lambda3_entry(f, epsilon, c),
        kappa=f.kappa,
        fitted=None,
        conclusion=_conclusion(f, inputs_ok, vmean.member),
        details=details,
    )


def verify_intermediate_cone(f: RepresentingFunction, epsilon: float, m: int, n: int, c: float = 0.0) -> RigidityReport:
    """Sandwich check for any convex cone ``C`` with ``S_1 <= C <= PPT``.

    Inputs in ``S_1`` lie in every such ``C``; a mean outside ``PPT`` lies
    outside every such ``C``. For affine means the mean is a convex
    combination of the inputs, so every ``C`` contains it.
    """
    pair, (A, B, _), (At, Bt, Mt), vin, residual, _ = _lift(f, epsilon, m, n, c)
    vmean = is_ppt(Mt)
    inputs_ok = all(v.member for v in vin)
    details: dict[str, Any] = {
        "dims": [m, n],
        "inputs_in_every_C": inputs_ok,
        "mean_outside_every_C": not vmean.member,
        "congruence_residual": residual,
        "affine": f.is_affine,
    }
    if f.is_affine:
        t = f.affine_weight
        combo = (1 - t) * At.mat + t * Bt.mat
        details["convex_combination_residual"] = float(np.linalg.norm(Mt.mat - combo))
        in_every_C = inputs_ok and details["convex_combination_residual"] <= IDENTITY_TOL
        details["mean_in_every_C"] = in_every_C
        conclusion = "preserved" if in_every_C else "inconclusive"
    else:
        conclusion = _conclusion(f, inputs_ok, vmean.member)
    return RigidityReport(
        theorem="main3",
        mean=f.spec,
        epsilon=epsilon,
        inputs=[v.to_dict() for v in vin],
        mean_verdict=vmean.to_dict(),
        lambda3=_lambda3_entry(f, epsilon, c),
        kappa=f.kappa,
        fitted=None,
        conclusion=conclusion,
        details=details,
    )


def max_entangled_vector(r: int) -> np.ndarray:
    """``psi_r = sum_j e_j (x) e_j`` in C^r (x) C^r (unnormalised)."""
    return np.eye(r).ravel().astype(complex)


def schmidt_amplify(f: RepresentingFunction, r: int, epsilon: float, c: float = 0.0) -> RigidityReport:
    """Schmidt-number amplification on C^{2r} (x) C^{2r}.

    Inputs ``P_r (x) A_0`` and ``P_r (x) B_0`` (regrouped) have SN <= r;
    when the mean equals ``P_r (x) (A_0 sigma B_0)`` and ``A_0 sigma B_0``
    is entangled, its SN is 2r.
    """
    if r < 1:
        raise ContractError(f"r must be a positive integer, got {r}")
    pair = build_pair(epsilon, c)
    A0, B0 = pair.A.matrix(), pair.B.matrix()
    psi = max_entangled_vector(r)
    P = np.outer(psi, psi.conj())
    dims = (r, r, 2, 2)
    Ar = swap_middle_factors(kron(P, A0.mat), dims)
    Br = swap_middle_factors(kron(P, B0.mat), dims)
    M0 = mean(f, A0, B0)
    Mr = mean_on_support(f, Ar, Br)
    target = swap_middle_factors(kron(P, M0.mat), dims)
    residual = float(np.linalg.norm(Mr.mat - target.mat))

    sn_in = [schmidt_number_pure_tensor(psi, (r, r), X) for X in (A0, B0)]
    sn_mean = schmidt_number_pure_tensor(psi, (r, r), M0, schmidt_number_2x2(M0))
    vin = [is_ppt(Ar), is_ppt(Br)]
    vmean = is_ppt(Mr)
    inputs_ok = all(b.upper <= r for b in sn_in)
    if residual > IDENTITY_TOL or not inputs_ok:
        conclusion = "inconclusive"
    elif sn_mean.lower >= 2 * r:
        conclusion = "violated"
    elif sn_mean.upper <= r:
        conclusion = "preserved" if f.is_affine else "inconclusive"
    else:
        conclusion = "inconclusive"
    details = {
        "r": r,
        "dims": [2 * r, 2 * r],
        "input_schmidt_number": [b.to_dict() for b in sn_in],
        "mean_schmidt_number": sn_mean.to_dict(),
        "tensor_congruence_residual": residual,
        "affine": f.is_affine,
    }
    if f.is_affine:
        details["note"] = "no amplification; arithmetic means preserve S_r"
    return RigidityReport(
        theorem="main4",
        mean=f.spec,
        epsilon=epsilon,
        inputs=[v.to_dict() for v in vin],
        mean_verdict=vmean.to_dict(),
        lambda3=_lambda3_entry(f, epsilon, c),
        kappa=f.kappa,
        fitted=None,
        conclusion=conclusion,
        details=details,
    )
