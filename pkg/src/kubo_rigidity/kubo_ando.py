"""Representing functions of Kubo-Ando means, the matrix mean, and curvature.

A mean is specified by its representing function ``f`` with ``f(1) = 1``:

    A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.

The curvature of a mean is ``kappa = -f''(1)``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .hermitian import Bipartite, eigh, hermitian

COND_WARNING = 1e8
PD_RTOL = 1e-12
SERIES_CUTOFF = 1e-6
FD_STEPS = (1e-3, 5e-4, 2.5e-4)


class Family(str, enum.Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    HARMONIC = "harmonic"
    LOGARITHMIC = "log"
    DUAL_LOGARITHMIC = "duallog"


_ALIASES = {
    "arithmetic": Family.ARITHMETIC,
    "geometric": Family.GEOMETRIC,
    "harmonic": Family.HARMONIC,
    "log": Family.LOGARITHMIC,
    "logarithmic": Family.LOGARITHMIC,
    "duallog": Family.DUAL_LOGARITHMIC,
    "dual-log": Family.DUAL_LOGARITHMIC,
}


class MeanSpecError(ContractError):
    """A ``<family>:<alpha>`` string could not be parsed."""

    def __init__(self, spec: str, position: int, reason: str):
        self.spec = spec
        self.position = position
        super().__init__(f"bad mean spec {spec!r} at position {position}: {reason}")


def _exprel(z: np.ndarray) -> np.ndarray:
    """``expm1(z) / z`` with its Taylor series near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    series = 1.0 + z / 2.0 + z * z / 6.0
    return np.where(small, series, np.expm1(safe) / safe)


def _log_mean(x: np.ndarray, alpha: float) -> np.ndarray:
    # ((a-1)/a) (x^a - 1)/(x^(a-1) - 1) rewritten as exprel(aL)/exprel((a-1)L),
    # which is regular at x = 1 and at a in {0, 1}.
    L = np.log(x)
    return _exprel(alpha * L) / _exprel((alpha - 1.0) * L)


def _evaluate(family: Family, alpha: float, x: np.ndarray) -> np.ndarray:
    if family is Family.ARITHMETIC:
        return (1.0 - alpha) + alpha * x
    if family is Family.GEOMETRIC:
        return x**alpha
    if family is Family.HARMONIC:
        return x / ((1.0 - alpha) * x + alpha)
    if family is Family.LOGARITHMIC:
        return _log_mean(x, alpha)
    if family is Family.DUAL_LOGARITHMIC:
        return x / _log_mean(x, alpha)
    raise ContractError(f"unknown family {family!r}")


def second_difference_richardson(g, steps=FD_STEPS) -> float:
    """Second derivative of ``g`` at 1 from central differences, Richardson-extrapolated."""
    h1, h2, h3 = steps
    if not (math.isclose(h1, 2 * h2) and math.isclose(h2, 2 * h3)):
        raise ContractError("Richardson steps must halve successively")
    D = [float((g(1.0 + h) - 2.0 * g(1.0) + g(1.0 - h)) / (h * h)) for h in steps]
    R1 = [(4.0 * D[1] - D[0]) / 3.0, (4.0 * D[2] - D[1]) / 3.0]
    return (16.0 * R1[1] - R1[0]) / 15.0


def first_difference_richardson(g, steps=FD_STEPS) -> float:
    D = [float((g(1.0 + h) - g(1.0 - h)) / (2.0 * h)) for h in steps]
    R1 = [(4.0 * D[1] - D[0]) / 3.0, (4.0 * D[2] - D[1]) / 3.0]
    return (16.0 * R1[1] - R1[0]) / 15.0


@dataclass(frozen=True)
class RepresentingFunction:
    """Representing function of a weighted Kubo-Ando mean.

    ``d1`` and ``d2`` are f'(1) and f''(1). They are analytic for the
    arithmetic, geometric and harmonic families and come from
    Richardson-extrapolated finite differences for the logarithmic ones.
    """

    family: Family
    alpha: float
    d1: float = field(compare=False)
    d2: float = field(compare=False)
    analytic: bool = field(compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError(f"representing functions are defined on (0, inf), got {x[x <= 0].flat[0]}")
        out = _evaluate(self.family, self.alpha, x)
        return float(out) if out.ndim == 0 else out

    @property
    def kappa(self) -> float:
        return 0.0 - self.d2

    @property
    def spec(self) -> str:
        return f"{self.family.value}:{self.alpha:g}"

    @property
    def is_affine(self) -> bool:
        """True when the mean is a weighted arithmetic mean (zero curvature).

        Weight 0 and 1 collapse the geometric and harmonic families to the
        affine functions 1 and x.
        """
        if self.family is Family.ARITHMETIC:
            return True
        if self.family in (Family.GEOMETRIC, Family.HARMONIC):
            return self.alpha in (0.0, 1.0)
        return False

    @property
    def affine_weight(self) -> float | None:
        """``t`` with ``A sigma B = (1 - t) A + t B`` for affine means, else None."""
        if not self.is_affine:
            return None
        # geometric/harmonic weight 0 is f = 1 (t = 0); weight 1 is f = x (t = 1)
        return self.alpha

    def __str__(self) -> str:
        return self.spec


def make_mean(family, alpha: float) -> RepresentingFunction:
    family = _ALIASES.get(family, family) if isinstance(family, str) else family
    if not isinstance(family, Family):
        raise ContractError(f"unknown mean family {family!r}")
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0) or math.isnan(alpha):
        raise ContractError(f"weight must lie in [0, 1], got {alpha}")
    if family is Family.ARITHMETIC:
        d1, d2, analytic = alpha, 0.0, True
    elif family is Family.GEOMETRIC:
        d1, d2, analytic = alpha, alpha * (alpha - 1.0), True
    elif family is Family.HARMONIC:
        d1, d2, analytic = alpha, -2.0 * alpha * (1.0 - alpha), True
    else:
        g = lambda x: _evaluate(family, alpha, np.asarray(x, dtype=float))  # noqa: E731
        d1 = first_difference_richardson(g)
        d2 = second_difference_richardson(g)
        analytic = False
    return RepresentingFunction(family, alpha, d1, d2, analytic)


def parse_mean_spec(spec: str) -> RepresentingFunction:
    """Parse ``<family>:<alpha>`` such as ``geometric:0.5``."""
    text = spec.strip()
    if text.count(":") != 1:
        pos = text.find(":", text.find(":") + 1) if ":" in text else len(text)
        raise MeanSpecError(spec, pos, "expected exactly one ':' separating family and weight")
    name, _, weight = text.partition(":")
    key = name.strip().lower()
    if key not in _ALIASES:
        raise MeanSpecError(spec, 0, f"unknown family {name!r}; choose from {sorted(set(_ALIASES))}")
    pos = len(name) + 1
    try:
        alpha = float(weight)
    except ValueError:
        raise MeanSpecError(spec, pos, f"weight {weight!r} is not a number") from None
    if not (0.0 <= alpha <= 1.0):
        raise MeanSpecError(spec, pos, f"weight {alpha} outside [0, 1]")
    return make_mean(_ALIASES[key], alpha)


def curvature_numeric(f: RepresentingFunction) -> float:
    """kappa = -f''(1) by Richardson-extrapolated central differences."""
    return -second_difference_richardson(f)


def table_kappa(f: RepresentingFunction) -> float | None:
    """Tabulated reference curvature for the family, reproduced verbatim.

    The harmonic entry is not well-defined in the reference and is returned
    as ``None``. The logarithmic entries disagree with a direct expansion of
    the representing functions; :func:`curvature_numeric` is authoritative.
    """
    a = f.alpha
    return {
        Family.ARITHMETIC: 0.0,
        Family.GEOMETRIC: a * (1.0 - a),
        Family.HARMONIC: None,
        Family.LOGARITHMIC: (1.0 - a + a * a) / 6.0,
        Family.DUAL_LOGARITHMIC: (1.0 + a - a * a) / 6.0,
    }[f.family]


# ---------------------------------------------------------------------------
# Matrix means
# ---------------------------------------------------------------------------


def _require_pd(M: np.ndarray, name: str):
    w, U = eigh(M)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    if w[0] <= PD_RTOL * scale:
        raise DomainError(f"{name} is not positive definite: min eigenvalue {w[0]:.3e}")
    return w, U


def mean(f: RepresentingFunction, A, B):
    """Kubo-Ando mean ``A sigma B`` of positive definite matrices.

    Accepts arrays or :class:`Bipartite` operators; two bipartite inputs
    give a bipartite result with the same factors.
    """
    if isinstance(A, Bipartite) and isinstance(B, Bipartite):
        if A.dims != B.dims:
            raise ContractError(f"factor dimensions differ: {A.dims} vs {B.dims}")
        return A.with_mat(mean(f, A.mat, B.mat))
    A = hermitian(A.mat if isinstance(A, Bipartite) else A)
    B = hermitian(B.mat if isinstance(B, Bipartite) else B)
    if A.shape != B.shape:
        raise ContractError(f"shape mismatch {A.shape} vs {B.shape}")
    wa, Ua = _require_pd(A, "A")
    _require_pd(B, "B")
    if wa[-1] / wa[0] > COND_WARNING:
        warnings.warn(f"A is ill-conditioned (cond {wa[-1] / wa[0]:.2e}); mean may be inaccurate")
    s = np.sqrt(wa)
    A_half = (Ua * s) @ Ua.conj().T
    A_mhalf = (Ua / s) @ Ua.conj().T
    C = hermitian(A_mhalf @ B @ A_mhalf)
    wc, Uc = eigh(C)
    if wc[0] <= 0:
        raise DomainError(f"A^-1/2 B A^-1/2 lost positivity (min eigenvalue {wc[0]:.3e})")
    fC = (Uc * np.asarray(f(wc), dtype=float)) @ Uc.conj().T
    return hermitian(A_half @ fC @ A_half)


def mean_on_support(f: RepresentingFunction, A, B, rtol: float = 1e-10):
    """Mean of positive semidefinite ``A``, ``B`` sharing the same support.

    Both operators are compressed to the common range, averaged there, and
    expanded back. Raises :class:`DomainError` if the supports differ.
    """
    if isinstance(A, Bipartite) and isinstance(B, Bipartite):
        if A.dims != B.dims:
            raise ContractError(f"factor dimensions differ: {A.dims} vs {B.dims}")
        return A.with_mat(mean_on_support(f, A.mat, B.mat, rtol))
    A = hermitian(A.mat if isinstance(A, Bipartite) else A)
    B = hermitian(B.mat if isinstance(B, Bipartite) else B)
    w, U = eigh(A + B)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    if w[0] < -rtol * scale:
        raise DomainError(f"inputs are not positive semidefinite (min eigenvalue {w[0]:.3e})")
    Q = U[:, w > rtol * scale]
    Ac = Q.conj().T @ A @ Q
    Bc = Q.conj().T @ B @ Q
    for name, M in (("A", Ac), ("B", Bc)):
        lo = np.linalg.eigvalsh(hermitian(M))[0]
        if lo <= rtol * scale:
            raise DomainError(f"{name} does not share the common support (min eigenvalue {lo:.3e} there)")
    return hermitian(Q @ mean(f, Ac, Bc) @ Q.conj().T)


def mean_commuting(f: RepresentingFunction, a, b) -> np.ndarray:
    """Mean of commuting operators given by their joint eigenvalues: ``a_i f(b_i / a_i)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"coefficient shapes differ: {a.shape} vs {b.shape}")
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("joint eigenvalues must be strictly positive")
    return a * np.asarray(f(b / a), dtype=float)
