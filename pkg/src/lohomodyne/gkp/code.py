"""Finite-energy square GKP codewords in the number basis.

The ideal codeword ``|s>`` (peaks at ``x = (2j + s) sqrt(pi)``) equals, up to
normalization, ``sum_{m,n} (-1)^{s m + m n} D(alpha_mn)|0>`` with
``alpha_mn = (2 n sqrt(pi) + i m sqrt(pi)) / sqrt(2)``. The finite-energy
codeword applies the envelope ``exp(-D^2 n)``. Lattice points are kept while
their envelope weight ``exp(-|alpha|^2 (1 - e^{-2 D^2}) / 2)`` exceeds 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..errors import CutoffTooSmall, ValidationError
from .params import n_bar_from_delta, sigma_gkp_sq_from_delta, squeezing_db

LATTICE_WEIGHT_FLOOR = 1e-12
PROJECTOR_INFIDELITY = 1e-6
TAIL_POPULATION = 1e-8
TAIL_LEVELS = 10
DEFAULT_MAX_CUTOFF = 200


@dataclass(frozen=True)
class GkpCode:
    delta_env: float
    n_bar: float
    sigma_gkp_sq: float
    squeezing_db: float
    cutoff: int
    ket0: np.ndarray
    ket1: np.ndarray
    raw_overlap: complex

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @property
    def encoder(self) -> np.ndarray:
        """Isometry ``V = [|0_L>, |1_L>]`` of shape ``(dim, 2)``."""
        return np.stack([self.ket0, self.ket1], axis=1)

    @property
    def projector(self) -> np.ndarray:
        v = self.encoder
        return v @ v.conj().T


def _lattice_points(delta_env: float) -> list[tuple[int, int, complex]]:
    shrink = -math.expm1(-2.0 * delta_env**2)
    r2_max = 2.0 * -math.log(LATTICE_WEIGHT_FLOOR) / shrink
    step = math.sqrt(math.pi / 2.0)
    n_max = int(math.sqrt(r2_max) / (2 * step)) + 1
    m_max = int(math.sqrt(r2_max) / step) + 1
    pts = []
    for n in range(-n_max, n_max + 1):
        for m in range(-m_max, m_max + 1):
            a = complex(2 * n * step, m * step)
            if abs(a) ** 2 <= r2_max:
                pts.append((m, n, a))
    return pts


def raw_codeword(logical: int, delta_env: float, cutoff: int) -> np.ndarray:
    """Unnormalized envelope-damped codeword amplitudes on levels ``0..cutoff``.

    Lattice points ``alpha`` and ``-alpha`` share a phase, so only even levels
    survive; they are summed as pairs to keep odd levels exactly zero.
    """
    if logical not in (0, 1):
        raise ValidationError(f"logical index must be 0 or 1, got {logical!r}")
    k = np.arange(cutoff + 1)
    even = k[::2]
    log_norm = -0.5 * gammaln(even + 1) - delta_env**2 * even
    out = np.zeros(cutoff + 1, dtype=complex)
    acc = np.zeros(even.size, dtype=complex)
    for m, n, a in _lattice_points(delta_env):
        sign = -1.0 if (logical * m + m * n) % 2 else 1.0
        if a == 0:
            acc[0] += sign
            continue
        logmag = -0.5 * abs(a) ** 2 + even * math.log(abs(a)) + log_norm
        acc += sign * np.exp(logmag + 1j * even * np.angle(a))
    out[::2] = acc
    return out


def _orthonormal_pair(v0: np.ndarray, v1: np.ndarray) -> tuple[np.ndarray, np.ndarray, complex]:
    k0 = v0 / np.linalg.norm(v0)
    k1 = v1 / np.linalg.norm(v1)
    overlap = complex(np.vdot(k0, k1))
    k1 = k1 - overlap * k0
    rest = np.linalg.norm(k1)
    if rest < 1e-12:
        raise CutoffTooSmall("codewords are linearly dependent at this cutoff")
    k1 = k1 / rest
    # a second pass removes the residual from the first subtraction
    k1 = k1 - np.vdot(k0, k1) * k0
    k1 = k1 / np.linalg.norm(k1)
    return k0, k1, overlap


def _projector_infidelity(p_small: np.ndarray, p_ref: np.ndarray) -> float:
    n = p_small.shape[0]
    return 1.0 - float(np.real(np.trace(p_small @ p_ref[:n, :n]))) / 2.0


def build_gkp_code(
    delta_env: float,
    cutoff: int | None = None,
    max_cutoff: int = DEFAULT_MAX_CUTOFF,
    tol: float = PROJECTOR_INFIDELITY,
) -> GkpCode:
    """Build the code at a fixed ``cutoff`` or, when ``cutoff`` is None, adaptively.

    The adaptive cutoff is the smallest one whose codespace projector has
    infidelity below ``tol`` against the projector at ``max_cutoff``.
    """
    d = float(delta_env)
    if not (d > 0 and math.isfinite(d)):
        raise ValidationError(f"delta_env must be positive, got {delta_env!r}")
    ref_cut = max_cutoff if cutoff is None else max(cutoff, max_cutoff)
    r0 = raw_codeword(0, d, ref_cut)
    r1 = raw_codeword(1, d, ref_cut)
    for r in (r0, r1):
        pop = np.abs(r) ** 2
        tail = pop[-TAIL_LEVELS:].sum() / pop.sum()
        if tail > TAIL_POPULATION:
            raise CutoffTooSmall(
                f"population {tail:.3g} in the top {TAIL_LEVELS} levels at cutoff {ref_cut}; raise max_cutoff"
            )

    if cutoff is None:
        k0, k1, _ = _orthonormal_pair(r0, r1)
        p_ref = np.outer(k0, k0.conj()) + np.outer(k1, k1.conj())
        chosen = None
        for c in range(1, ref_cut + 1):
            try:
                a0, a1, _ = _orthonormal_pair(r0[: c + 1], r1[: c + 1])
            except CutoffTooSmall:
                continue
            p = np.outer(a0, a0.conj()) + np.outer(a1, a1.conj())
            if _projector_infidelity(p, p_ref) < tol:
                chosen = c
                break
        if chosen is None:
            raise CutoffTooSmall(f"no cutoff up to {ref_cut} meets projector infidelity {tol}")
        cutoff = chosen
    elif int(cutoff) != cutoff or cutoff < 1:
        raise ValidationError(f"cutoff must be a positive integer, got {cutoff!r}")

    k0, k1, overlap = _orthonormal_pair(r0[: cutoff + 1], r1[: cutoff + 1])
    return GkpCode(
        delta_env=d,
        n_bar=n_bar_from_delta(d),
        sigma_gkp_sq=sigma_gkp_sq_from_delta(d),
        squeezing_db=squeezing_db(sigma_gkp_sq_from_delta(d)),
        cutoff=int(cutoff),
        ket0=k0,
        ket1=k1,
        raw_overlap=overlap,
    )
