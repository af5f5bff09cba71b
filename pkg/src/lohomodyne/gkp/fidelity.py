"""Entanglement fidelity of encode / noise / recover, and the analytic GKP curve."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from ..core import StateMoments
from ..errors import (
    CutoffLeakage,
    DimensionMismatch,
    NoBudget,
    NonPositiveSigma,
    ValidationError,
)
from .channels import Channel
from .code import GkpCode
from .fock import FockOperator, annihilation

SQRT_PI = math.sqrt(math.pi)
TAIL_Z = 8.5  # upper normal tail below 1e-17
LEAKAGE_LEVELS = 5
LEAKAGE_TOL = 1e-8


def p_succ(sigma_eff: float) -> float:
    """Probability that a normal displacement of std ``sigma_eff`` lands in an accepted cell.

    Accepted cells are ``[(2n - 1/2) sqrt(pi), (2n + 1/2) sqrt(pi)]``. The value is
    assembled as ``1 - (rejected mass)`` from upper normal tails, truncated once
    the remaining tail is below 1e-16.
    """
    s = float(sigma_eff)
    if not (s > 0):
        raise NonPositiveSigma(f"sigma_eff must be positive, got {sigma_eff!r}")
    if not math.isfinite(s):
        return 0.5
    a = SQRT_PI / s
    n_max = int(math.ceil((TAIL_Z / a - 0.5) / 2.0)) + 1
    n = np.arange(0, max(n_max, 1) + 1)
    # rejected cell n >= 0 spans [(2n + 1/2) a, (2n + 3/2) a] in units of sigma; mirror for n < 0
    rejected = ndtr(-(2 * n + 0.5) * a) - ndtr(-(2 * n + 1.5) * a)
    return 1.0 - 2.0 * math.fsum(rejected)


def analytic_entanglement_fidelity(sigma_gkp_sq: float, sigma_noise_sq: float) -> float:
    """``p_succ(sqrt(3 sigma_gkp^2 + sigma_noise^2))^2`` for teleported error correction."""
    g = float(sigma_gkp_sq)
    n = float(sigma_noise_sq)
    if g < 0 or n < 0 or not (math.isfinite(g) and math.isfinite(n)):
        raise ValidationError("variances must be non-negative and finite")
    var = 3.0 * g + n
    if var == 0:
        return 1.0
    p = p_succ(math.sqrt(var))
    return p * p


def sigma_noise_for_infidelity(sigma_gkp_sq: float, eps_ec: float) -> float:
    """Largest ``sigma_noise`` whose analytic infidelity does not exceed ``eps_ec``."""
    eps = float(eps_ec)
    if not 0 < eps < 1:
        raise ValidationError(f"eps_ec must lie in (0, 1), got {eps_ec!r}")

    def excess(sn):
        return (1.0 - analytic_entanglement_fidelity(sigma_gkp_sq, sn * sn)) - eps

    if excess(0.0) > 0:
        raise NoBudget(f"code alone exceeds infidelity {eps} at zero added noise")
    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            raise NoBudget("infidelity target not reached on the analytic curve")
    return brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-14)


# ---------------------------------------------------------------------------
# explicit recoveries


def _logical_kraus(code: GkpCode, channel: Channel, recovery) -> np.ndarray:
    rec = np.asarray(recovery, dtype=complex)
    if rec.ndim == 2:
        rec = rec[None]
    if rec.ndim != 3 or rec.shape[1] != 2 or rec.shape[2] != code.dim:
        raise DimensionMismatch(f"recovery Kraus operators must be 2 x {code.dim}, got {rec.shape[1:]}")
    if channel.dim != code.dim:
        raise DimensionMismatch(f"channel dim {channel.dim} differs from code dim {code.dim}")
    v = code.encoder
    noisy = np.asarray(channel.to_kraus()) @ v  # (K, dim, 2)
    return np.einsum("rad,kdb->rkab", rec, noisy).reshape(-1, 2, 2)


def logical_choi(code: GkpCode, channel: Channel, recovery) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) L(|i><j|)`` of the 2-level logical channel."""
    rec = np.asarray(recovery, dtype=complex)
    if rec.ndim == 2:
        rec = rec[None]
    if rec.ndim != 3 or rec.shape[1] != 2 or rec.shape[2] != code.dim:
        raise DimensionMismatch(f"recovery Kraus operators must be 2 x {code.dim}, got {rec.shape[1:]}")
    if channel.dim != code.dim:
        raise DimensionMismatch(f"channel dim {channel.dim} differs from code dim {code.dim}")
    v = code.encoder
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out = channel.apply(np.outer(v[:, i], v[:, j].conj()))
            blk = np.einsum("rad,de,rbe->ab", rec, out, rec.conj())
            choi[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = blk
    return choi


def kraus_from_choi(choi: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    d = int(round(math.sqrt(choi.shape[0])))
    h = 0.5 * (choi + choi.conj().T)
    w, vecs = np.linalg.eigh(h)
    keep = w > tol * max(float(w.max()), 1.0)
    return np.array([math.sqrt(x) * vk.reshape(d, d).T for x, vk in zip(w[keep], vecs[:, keep].T)])


def entanglement_fidelity(code: GkpCode, channel: Channel, recovery) -> float:
    """``(1/4) sum_k |tr M_k|^2`` over Kraus operators ``M_k`` of recover o channel o encode."""
    if channel.kraus is not None:
        m = _logical_kraus(code, channel, recovery)
    else:
        m = kraus_from_choi(logical_choi(code, channel, recovery))
    tr = m[:, 0, 0] + m[:, 1, 1]
    return float(np.sum(np.abs(tr) ** 2)) / 4.0


def entanglement_fidelity_from_choi(choi: np.ndarray) -> float:
    """``(1/d^2) sum_ij <i|L(|i><j|)|j>``, the maximally entangled overlap."""
    d = int(round(math.sqrt(choi.shape[0])))
    total = 0.0 + 0.0j
    for i in range(d):
        for j in range(d):
            total += choi[d * i + i, d * j + j]
    return float(total.real) / d**2


def codeword_projection_recovery(code: GkpCode) -> np.ndarray:
    """The single Kraus operator ``V^dag`` (trace-decreasing off the codespace)."""
    return code.encoder.conj().T[None]


def transpose_channel_recovery(code: GkpCode, channel: Channel, rel_tol: float = 1e-12) -> np.ndarray:
    """Transpose-channel recovery ``R_k = V^dag E_k^dag N(P)^{-1/2}``.

    The inverse square root is taken on the support of ``N(P)``; eigenvalues
    below ``rel_tol`` times the largest are dropped.
    """
    if channel.dim != code.dim:
        raise DimensionMismatch(f"channel dim {channel.dim} differs from code dim {code.dim}")
    p = code.projector
    np_ = channel.apply(p)
    np_ = 0.5 * (np_ + np_.conj().T)
    w, u = np.linalg.eigh(np_)
    keep = w > rel_tol * w.max()
    inv_sqrt = (u[:, keep] / np.sqrt(w[keep])) @ u[:, keep].conj().T
    vdag = code.encoder.conj().T
    kraus = np.asarray(channel.to_kraus())
    return np.einsum("ad,kdb,be->kae", vdag, np.conj(np.transpose(kraus, (0, 2, 1))), inv_sqrt)


# ---------------------------------------------------------------------------
# moments bridge


def state_moments_from_fock(rho, ensemble=None, q_degrees=()) -> StateMoments:
    """Moments of a single-mode density operator for use with the bounds.

    ``q`` is the normalized quadrature ``a + a^dag`` (vacuum ``<q^2> = 1``).
    ``composite`` carries ``n_half_sq = <(n + 1/2)^2>^(1/2)``; ``q_pow`` holds
    ``<q^m>`` for the requested even degrees.
    """
    op = rho if isinstance(rho, FockOperator) else FockOperator(np.asarray(rho))
    if not op.is_density():
        raise ValidationError("rho is not a unit-trace Hermitian operator")
    m = op.entries
    pops = np.real(np.diag(m))
    if pops[-LEAKAGE_LEVELS:].sum() > LEAKAGE_TOL:
        raise CutoffLeakage(
            f"population {pops[-LEAKAGE_LEVELS:].sum():.3g} in the top {LEAKAGE_LEVELS} levels"
        )
    n = np.arange(op.dim, dtype=float)
    n_exp = float(np.dot(pops, n))
    n_half = float(np.dot(pops, (n + 0.5) ** 2))
    a = annihilation(op.cutoff)
    q = a + a.conj().T
    q_sq = float(np.real(np.trace(m @ q @ q)))
    q_pow = {}
    for deg in q_degrees:
        deg = int(deg)
        if deg < 1 or deg % 2:
            raise ValidationError(f"quadrature moment degrees must be positive and even, got {deg}")
        q_pow[deg] = float(np.real(np.trace(m @ np.linalg.matrix_power(q, deg))))
    w2 = 1.0
    if ensemble is not None:
        if ensemble.n_modes != 1:
            raise DimensionMismatch("single-mode density operators need a one-mode ensemble")
        w2 = ensemble.omegas[0] ** 2
    return StateMoments(
        omega_exp=w2 * n_exp,
        n_tot=n_exp,
        q_sq=q_sq,
        q_pow=q_pow,
        composite={"n_half_sq": math.sqrt(n_half), "n_plus_half_sq_exp": n_half},
    )
