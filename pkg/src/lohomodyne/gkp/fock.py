"""Dense operators and states in a truncated number basis ``|0>, ..., |cutoff>``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from ..errors import DimensionMismatch, ValidationError

DENSITY_TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-12


def _dim(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValidationError(f"cutoff must be a positive integer, got {cutoff!r}")
    return int(cutoff) + 1


@dataclass(frozen=True)
class FockOperator:
    """Square complex matrix on the truncated number basis."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def cutoff(self) -> int:
        return self.dim - 1

    def is_density(self, trace_tol=DENSITY_TRACE_TOL, herm_tol=HERMITIAN_TOL) -> bool:
        m = self.entries
        return abs(np.trace(m) - 1) <= trace_tol and np.max(np.abs(m - m.conj().T)) <= herm_tol

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.entries @ op))


def annihilation(cutoff: int) -> np.ndarray:
    dim = _dim(cutoff)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(_dim(cutoff), dtype=float)).astype(complex)


def quadrature(cutoff: int, theta: float = 0.0) -> np.ndarray:
    """``e^{-i theta} a + e^{i theta} a^dag``; vacuum variance 1."""
    a = annihilation(cutoff)
    return np.exp(-1j * theta) * a + np.exp(1j * theta) * a.conj().T


def fock_state(n: int, cutoff: int) -> np.ndarray:
    dim = _dim(cutoff)
    if not 0 <= n < dim:
        raise ValidationError(f"level {n} outside truncation of dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    """Exact number-basis amplitudes ``e^{-|b|^2/2} b^k / sqrt(k!)`` (not renormalized)."""
    dim = _dim(cutoff)
    k = np.arange(dim)
    if beta == 0:
        return fock_state(0, cutoff)
    logmag = -0.5 * abs(beta) ** 2 + k * math.log(abs(beta)) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * k * np.angle(beta))


def displacement(alpha: complex, cutoff: int) -> np.ndarray:
    """Matrix elements ``<m|D(alpha)|n>`` of the untruncated displacement, for ``m, n <= cutoff``.

    Uses the closed Laguerre form, so the block is exact rather than the
    exponential of truncated ladder operators.
    """
    dim = _dim(cutoff)
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    x = abs(alpha) ** 2
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    d = np.abs(m - n)
    lag = eval_genlaguerre(lo, d, x)
    logpref = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) + d * math.log(abs(alpha)) - 0.5 * x
    phase = np.where(m >= n, np.exp(1j * d * np.angle(alpha)), np.exp(1j * d * np.angle(-alpha.conjugate())))
    return np.exp(logpref) * phase * lag


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def random_density(cutoff: int, support: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix supported on the lowest ``support`` levels."""
    dim = _dim(cutoff)
    if not 1 <= support <= dim:
        raise ValidationError(f"support must lie in [1, {dim}], got {support}")
    rank = support if rank is None else rank
    g = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    rho = np.zeros((dim, dim), dtype=complex)
    block = g @ g.conj().T
    rho[:support, :support] = block / np.trace(block).real
    return rho


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``(1/2) ||rho - sigma||_1`` for Hermitian arguments."""
    diff = rho - sigma
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
