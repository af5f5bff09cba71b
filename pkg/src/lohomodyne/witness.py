"""Exact finite-LO versus ideal quadrature evolution on coherent inputs.

For a coherent signal with amplitude ``i*gamma_k`` on mode ``a_k`` and vacuum
LO modes, the overlap between ``exp(-i s q_delta)|psi>`` and ``exp(-i s q)|psi>``
has modulus ``exp(-sum_k |D_k|^2 / 2)`` with a closed-form two-component
vector ``D_k``. Minimizing over a global phase gives the exact distance^2
``2 (1 - exp(-sum_k |D_k|^2 / 2))``, which every upper bound must dominate.

Phase frame: each mode is rotated so its quadrature reads
``alpha_k (a_k + a_k^dag)`` with real ``alpha_k >= 0``. The amplitude ``i*gamma_k``
then lies along the conjugate axis, so ``<q> = 0`` on the input state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import evolution_distance_bound, evolution_distance_bound_refined
from .core import ModeEnsemble, StateMoments, _finite_nonneg, omega_bar_sq
from .errors import DomainError, ValidationError, ZeroDelta

SERIES_CUTOFF = 1e-4
REFINED_REGIME = math.pi / 4


def wrap_angle_pi(x: float) -> float:
    """Representative of ``x`` modulo ``2 pi`` in ``(-pi, pi]``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"angle must be finite, got {x!r}")
    y = math.fmod(x + math.pi, 2.0 * math.pi)
    if y < 0:
        y += 2.0 * math.pi
    y -= math.pi
    return math.pi if y <= -math.pi else y


def g_phi(phi: float) -> float:
    """``(phi/2) cot(phi/2)`` on ``[-pi, pi]`` with ``g(0) = 1``."""
    phi = float(phi)
    if not (abs(phi) <= math.pi):
        raise DomainError(f"|phi| must not exceed pi, got {phi!r}")
    if abs(phi) < SERIES_CUTOFF:
        p2 = phi * phi
        return 1.0 - p2 / 12.0 - p2 * p2 / 720.0
    if abs(phi) == math.pi:
        return 0.0
    h = 0.5 * phi
    return h / math.tan(h)


@dataclass(frozen=True)
class CoherentWitnessInput:
    """Coherent input with amplitude ``i*gammas[k]`` on signal mode ``k``."""

    delta: float
    s: float
    ensemble: ModeEnsemble
    gammas: tuple[float, ...]

    def __post_init__(self):
        _finite_nonneg("delta", self.delta)
        if not math.isfinite(self.s):
            raise ValidationError(f"s must be finite, got {self.s!r}")
        gam = tuple(float(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gam)
        if len(gam) != self.ensemble.n_modes:
            raise ValidationError(f"need {self.ensemble.n_modes} amplitudes, got {len(gam)}")
        if not all(math.isfinite(g) for g in gam):
            raise ValidationError("amplitudes must be finite")
        for a in self.ensemble.alphas:
            if abs(a.imag) > 0 or a.real < 0:
                raise ValidationError("the witness is restricted to real non-negative alphas")

    @property
    def omega_exp(self) -> float:
        """``<Omega> = sum_k omega_k^2 gamma_k^2`` of the coherent input."""
        w = self.ensemble.omega_array
        return math.fsum(w * w * np.asarray(self.gammas) ** 2)

    @property
    def n_tot(self) -> float:
        return math.fsum(np.asarray(self.gammas) ** 2)

    def moments(self) -> StateMoments:
        return StateMoments(omega_exp=self.omega_exp, n_tot=self.n_tot)


def _sinc_terms(u: float, phi: float) -> tuple[float, float]:
    """``(sin(phi)/u, (1 - cos(phi))/u)`` with a series near ``u = 0``."""
    if abs(u) < SERIES_CUTOFF:
        u2 = u * u
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0, u / 2.0 - u * u2 / 24.0
    # 1 - cos(phi) = 2 sin^2(phi/2) avoids cancellation for small phi
    return math.sin(phi) / u, 2.0 * math.sin(0.5 * phi) ** 2 / u


def delta_vectors(inp: CoherentWitnessInput) -> np.ndarray:
    """Per-mode two-component vectors ``D_k``; shape ``(n_modes, 2)``."""
    out = np.zeros((inp.ensemble.n_modes, 2))
    for k, (alpha, omega, gamma) in enumerate(zip(inp.ensemble.alphas, inp.ensemble.omegas, inp.gammas)):
        a_s = alpha.real * inp.s
        u = omega * inp.delta * inp.s
        phi = wrap_angle_pi(u)
        sin_u, vers_u = _sinc_terms(u, phi)
        c = math.cos(phi)
        out[k, 0] = -2.0 * math.sin(0.5 * phi) ** 2 * gamma + (sin_u - c) * a_s
        out[k, 1] = -math.sin(phi) * (gamma - a_s) - a_s * vers_u
    return out


def coherent_exact_distance_sq(inp: CoherentWitnessInput, zero_limit: bool = False) -> float:
    """Exact phase-minimized distance^2 for the coherent input.

    ``delta = 0`` raises :class:`ZeroDelta` unless ``zero_limit`` is set, in
    which case the limiting value 0 is returned.
    """
    if inp.delta == 0:
        if zero_limit:
            return 0.0
        raise ZeroDelta("delta must be positive for the exact witness")
    d = delta_vectors(inp)
    x = math.fsum((d * d).ravel())
    return 2.0 * -math.expm1(-0.5 * x)


def in_refined_regime(inp: CoherentWitnessInput) -> bool:
    """True when every ``omega_k delta s`` lies in ``[-pi/4, pi/4]``."""
    return all(abs(w * inp.delta * inp.s) <= REFINED_REGIME for w in inp.ensemble.omegas)


@dataclass(frozen=True)
class WitnessPoint:
    exact: float
    general: float
    refined: float
    refined_regime: bool

    @property
    def general_ok(self) -> bool:
        return self.exact <= self.general * (1 + 1e-12) + 1e-300

    @property
    def refined_ok(self) -> bool:
        return (not self.refined_regime) or self.exact <= self.refined * (1 + 1e-12) + 1e-300


def witness_point(inp: CoherentWitnessInput) -> WitnessPoint:
    """Exact distance^2 alongside the general and refined upper bounds."""
    m = inp.moments()
    return WitnessPoint(
        exact=coherent_exact_distance_sq(inp),
        general=evolution_distance_bound(inp.delta, inp.s, m, inp.ensemble).distance_sq,
        refined=evolution_distance_bound_refined(inp.delta, inp.s, m, inp.ensemble).distance_sq,
        refined_regime=in_refined_regime(inp),
    )


def leading_order_floor(inp: CoherentWitnessInput) -> float:
    """``(9/10)^2 (ds)^2 (<Omega> + (4/9)^2 s^2 wbar^2)``, the small-angle lower estimate.

    It drops the first component of ``D_k`` and holds when each ``gamma_k``
    has the opposite sign to ``s`` (or is zero) and ``|omega_k delta s|`` is small.
    """
    x = (inp.delta * inp.s) ** 2
    return 0.81 * x * (inp.omega_exp + (4.0 / 9.0) ** 2 * inp.s**2 * omega_bar_sq(inp.ensemble))
