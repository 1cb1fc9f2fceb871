"""
Random matrix families for the inequality sweeps. Every instance draws
from its own generator seeded by (seed, instance).
"""

from typing import Optional

import numpy as np

from .exceptions import InvalidParameterError


def instance_rng(seed: int, instance: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, instance])


def ginibre(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2.0)


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(m, m, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[None, :]


def gue(m: int, rng: np.random.Generator, radius: Optional[float] = None) -> np.ndarray:
    """GUE-type Hermitian matrix; rescaled to spectral radius `radius` when given"""
    x = ginibre(m, m, rng)
    h = 0.5 * (x + x.conj().T) / np.sqrt(m)
    if radius is not None:
        h = h * (radius / max(np.max(np.abs(np.linalg.eigvalsh(h))), 1e-300))
        h = 0.5 * (h + h.conj().T)
    return h


def with_spectrum(eigenvalues: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """U diag(eigenvalues) U* with Haar U"""
    u = haar_unitary(eigenvalues.size, rng)
    h = (u * eigenvalues[None, :]) @ u.conj().T
    return 0.5 * (h + h.conj().T)


def uniform_spectrum(m: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    return with_spectrum(rng.uniform(lo, hi, m), rng)


def wishart(m: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Positive semidefinite X X* / k"""
    k = rank or m
    x = ginibre(m, k, rng)
    w = x @ x.conj().T / k
    return 0.5 * (w + w.conj().T)


def haar_projection(m: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Orthogonal projection onto a Haar-random subspace (random rank when not given)"""
    k = int(rng.integers(1, m)) if rank is None else rank
    if not 0 <= k <= m:
        raise InvalidParameterError(f"projection rank must lie in [0, {m}], got {k}")
    if k == 0:
        return np.zeros((m, m), dtype=complex)
    q, _ = np.linalg.qr(ginibre(m, k, rng))
    p = q @ q.conj().T
    return 0.5 * (p + p.conj().T)


def contraction(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random m x k operator of norm one"""
    j = ginibre(m, k, rng)
    return j / np.linalg.norm(j, 2)


def perturbed_pair(m: int, rng: np.random.Generator, radius: float = 0.75,
                   decay: float = 2.0) -> tuple:
    """A and B = A + W with W of rapidly decaying singular values"""
    a = uniform_spectrum(m, -radius, radius, rng)
    u = haar_unitary(m, rng)
    s = radius * (1.0 + np.arange(m)) ** (-decay) * rng.uniform(0.1, 1.0, m)
    w = (u * s[None, :]) @ u.conj().T
    b = a + 0.5 * (w + w.conj().T)
    return a, 0.5 * (b + b.conj().T)
