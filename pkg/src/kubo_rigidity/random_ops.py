"""Seeded random operators for property checks."""

from __future__ import annotations

import numpy as np

from .hermitian import Bipartite, hermitian


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    return hermitian(ginibre(rng, d))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(rng, d))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    G = ginibre(rng, d, d if rank is None else rank)
    return hermitian(G @ G.conj().T)


def random_pd(rng: np.random.Generator, d: int, floor: float = 0.1) -> np.ndarray:
    """Positive definite with smallest eigenvalue at least ``floor``."""
    return random_psd(rng, d) + floor * np.eye(d)


def random_product_vector(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return np.kron(rng.normal(size=m) + 1j * rng.normal(size=m), rng.normal(size=n) + 1j * rng.normal(size=n))


def random_separable(rng: np.random.Generator, m: int, n: int, terms: int = 10) -> Bipartite:
    """Positive combination of random product states ``xx* (x) yy*``."""
    X = np.zeros((m * n, m * n), dtype=complex)
    for w in rng.uniform(0.1, 1.0, size=terms):
        z = random_product_vector(rng, m, n)
        X += w * np.outer(z, z.conj()) / np.vdot(z, z).real
    return Bipartite(X, m, n)


def random_pd_bipartite(rng: np.random.Generator, m: int, n: int, floor: float = 0.1) -> Bipartite:
    return Bipartite(random_pd(rng, m * n, floor), m, n)


def random_kraus(rng: np.random.Generator, m: int, n: int, count: int = 3) -> list[np.ndarray]:
    return [ginibre(rng, n, m) for _ in range(count)]
