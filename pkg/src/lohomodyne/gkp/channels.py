"""Isotropic Gaussian random-displacement channel in two representations.

The channel with variance ``sigma^2`` solves the master equation
``d rho/dt = L[a] rho + L[a^dag] rho`` for time ``sigma^2``; equivalently it is
``int d^2 alpha / (pi sigma^2) exp(-|alpha|^2 / sigma^2) D(alpha) rho D(alpha)^dag``.
Density operators are vectorized by stacking columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..errors import DimensionMismatch, ValidationError
from .fock import _dim, annihilation, displacement, unvec, vec

MAX_SUPEROP_CUTOFF = 60


@dataclass(frozen=True)
class Channel:
    """A CPTP map on the truncated space, as a superoperator matrix or a Kraus set."""

    dim: int
    superop: np.ndarray | None = None
    kraus: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if (self.superop is None) == (self.kraus is None):
            raise ValidationError("give exactly one of superop or kraus")
        if self.superop is not None and self.superop.shape != (self.dim**2, self.dim**2):
            raise DimensionMismatch(f"superoperator shape {self.superop.shape} does not match dim {self.dim}")
        if self.kraus is not None:
            for k in self.kraus:
                if k.shape[1] != self.dim:
                    raise DimensionMismatch(f"Kraus operator shape {k.shape} does not match dim {self.dim}")

    @property
    def representation(self) -> str:
        return "superop" if self.superop is not None else "kraus"

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"state shape {rho.shape} does not match dim {self.dim}")
        if self.superop is not None:
            return unvec(self.superop @ vec(rho), self.dim)
        stack = np.asarray(self.kraus)
        k, m, d = stack.shape
        left = (stack @ rho).transpose(1, 0, 2).reshape(m, k * d)
        right = stack.conj().transpose(0, 2, 1).reshape(k * d, m)
        return left @ right

    def to_superop(self) -> np.ndarray:
        if self.superop is not None:
            return self.superop
        out = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for k in self.kraus:
            out += np.kron(k.conj(), k)
        return out

    def to_kraus(self, tol: float = 1e-14) -> tuple[np.ndarray, ...]:
        """Kraus operators, from the Choi matrix when only the superoperator is stored."""
        if self.kraus is not None:
            return self.kraus
        d = self.dim
        # Choi matrix J = sum_ij |i><j| (x) N(|i><j|); reshuffle the superoperator
        s = self.superop.reshape(d, d, d, d, order="F")  # s[a, b, i, j] = <a|N(|i><j|)|b>
        choi = np.transpose(s, (2, 0, 3, 1)).reshape(d * d, d * d)
        choi = 0.5 * (choi + choi.conj().T)
        w, v = np.linalg.eigh(choi)
        keep = w > tol * max(w.max(), 1.0)
        ops = []
        for val, vecj in zip(w[keep], v[:, keep].T):
            ops.append(math.sqrt(val) * vecj.reshape(d, d).T)
        return tuple(ops)

    def compose(self, other: "Channel") -> "Channel":
        """``self`` after ``other``."""
        if other.dim != self.dim:
            raise DimensionMismatch("channels act on different truncations")
        return Channel(self.dim, superop=self.to_superop() @ other.to_superop())

    def completeness(self) -> np.ndarray:
        """``sum_k K_k^dag K_k`` (identity for a trace-preserving Kraus set)."""
        if self.kraus is None:
            raise ValidationError("completeness is defined for Kraus sets")
        stack = np.asarray(self.kraus)
        return np.einsum("kji,kjl->il", stack.conj(), stack)


def lindblad_dissipator(op: np.ndarray) -> np.ndarray:
    """``L[op] = op* (x) op - (1/2) I (x) op^dag op - (1/2) (op^dag op)^T (x) I``."""
    d = op.shape[0]
    eye = np.eye(d)
    ldl = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)


def displacement_generator(cutoff: int) -> np.ndarray:
    a = annihilation(cutoff)
    return lindblad_dissipator(a) + lindblad_dissipator(a.conj().T)


def displacement_channel(sigma_sq: float, cutoff: int) -> Channel:
    """Channel as the exponential of the dissipative generator scaled by ``sigma^2``."""
    s2 = float(sigma_sq)
    if not (s2 >= 0 and math.isfinite(s2)):
        raise ValidationError(f"sigma_sq must be non-negative, got {sigma_sq!r}")
    dim = _dim(cutoff)
    if cutoff > MAX_SUPEROP_CUTOFF:
        raise ValidationError(
            f"dense superoperator limited to cutoff <= {MAX_SUPEROP_CUTOFF}; use the Kraus form"
        )
    if s2 == 0:
        return Channel(dim, superop=np.eye(dim * dim, dtype=complex))
    return Channel(dim, superop=expm(s2 * displacement_generator(cutoff)))


@dataclass(frozen=True)
class GridSpec:
    """Tensor Gauss-Hermite rule in the scaled variables ``alpha = sigma (u + i v)``.

    The Gaussian weight ``exp(-u^2 - v^2)`` has std ``1/sqrt2`` per axis, so the
    outermost of 21 nodes (``|u| ~ 5.55``) sits near 7.8 standard deviations.
    """

    nodes: int = 21

    def __post_init__(self):
        if int(self.nodes) != self.nodes or self.nodes < 1:
            raise ValidationError(f"nodes must be a positive integer, got {self.nodes!r}")

    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        return np.polynomial.hermite.hermgauss(int(self.nodes))


def displacement_channel_kraus(sigma_sq: float, cutoff: int, grid_spec: GridSpec | None = None) -> Channel:
    """Kraus set ``sqrt(w_i w_j / pi) D(sigma (u_i + i u_j))`` from a Gauss-Hermite grid."""
    s2 = float(sigma_sq)
    if not (s2 >= 0 and math.isfinite(s2)):
        raise ValidationError(f"sigma_sq must be non-negative, got {sigma_sq!r}")
    dim = _dim(cutoff)
    if s2 == 0:
        return Channel(dim, kraus=(np.eye(dim, dtype=complex),))
    grid_spec = grid_spec or GridSpec()
    x, w = grid_spec.rule()
    sigma = math.sqrt(s2)
    ops = []
    for xi, wi in zip(x, w):
        for xj, wj in zip(x, w):
            ops.append(math.sqrt(wi * wj / math.pi) * displacement(sigma * complex(xi, xj), cutoff))
    return Channel(dim, kraus=tuple(ops))
