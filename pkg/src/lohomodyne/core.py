"""Shared domain types and the fidelity / distance / overlap conversions.

Units follow the normalized-quadrature convention: a quadrature
``q = -i(alpha a^dag - conj(alpha) a)`` with ``sum |alpha_k|^2 = 1``, so the
vacuum variance of ``q`` is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    NegativeInput,
    NegativeWeight,
    NonPositiveResolution,
    NormalizationError,
    RangeError,
    ValidationError,
)

INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12
DISTANCE_SQ_CAP = 2.0


def _finite_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if value < 0:
        raise NegativeInput(f"{name} must be non-negative, got {value!r}")
    return value


@dataclass(frozen=True)
class ModeEnsemble:
    """Per-mode quadrature coefficients ``alphas`` and detector weights ``omegas``.

    Construct through :func:`validate_ensemble`, which checks normalization.
    """

    alphas: tuple[complex, ...]
    omegas: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphas) == 0 or len(self.alphas) != len(self.omegas):
            raise ValidationError("alphas and omegas must be non-empty and of equal length")

    @property
    def n_modes(self) -> int:
        return len(self.alphas)

    @property
    def alpha_abs_sq(self) -> np.ndarray:
        return np.abs(np.asarray(self.alphas, dtype=complex)) ** 2

    @property
    def omega_array(self) -> np.ndarray:
        return np.asarray(self.omegas, dtype=float)

    @property
    def is_standard(self) -> bool:
        """True when every mode carrying quadrature weight has ``omega == 1``."""
        w = self.omega_array[self.alpha_abs_sq > 0]
        return bool(np.all(np.abs(w - 1.0) <= INTERNAL_TOL))


def validate_ensemble(alphas, omegas) -> ModeEnsemble:
    """Build a :class:`ModeEnsemble`, rejecting (never rescaling) bad input."""
    alphas = tuple(complex(a) for a in alphas)
    omegas = tuple(float(w) for w in omegas)
    if len(alphas) == 0 or len(alphas) != len(omegas):
        raise ValidationError("alphas and omegas must be non-empty and of equal length")
    if not all(math.isfinite(w) for w in omegas) or not all(
        math.isfinite(a.real) and math.isfinite(a.imag) for a in alphas
    ):
        raise ValidationError("coefficients must be finite")
    if any(w < 0 for w in omegas):
        raise NegativeWeight(f"detector weights must be non-negative, got {omegas}")
    norm = math.fsum(abs(a) ** 2 for a in alphas)
    if abs(norm - 1.0) > INPUT_TOL:
        raise NormalizationError(f"sum |alpha_k|^2 = {norm!r}, expected 1")
    wmax = max(omegas)
    if abs(wmax - 1.0) > INPUT_TOL:
        raise NormalizationError(f"max omega_k = {wmax!r}, expected 1")
    return ModeEnsemble(alphas, omegas)


def standard_ensemble() -> ModeEnsemble:
    """The single-mode, unit-weight ensemble (standard pulsed homodyne)."""
    return ModeEnsemble((1.0 + 0j,), (1.0,))


def omega_bar_sq(ensemble: ModeEnsemble) -> float:
    """``sum_k |alpha_k|^2 omega_k^2``."""
    return math.fsum(ensemble.alpha_abs_sq * ensemble.omega_array**2)


def omega_bar4(ensemble: ModeEnsemble) -> float:
    """``sum_k |alpha_k|^2 omega_k^4``."""
    return math.fsum(ensemble.alpha_abs_sq * ensemble.omega_array**4)


@dataclass(frozen=True)
class StateMoments:
    """Scalar expectations of the input state consumed by the bounds.

    ``omega_exp`` is the weighted photon number <Omega>, ``n_tot`` the total
    photon number. ``q_sq`` may be omitted, in which case the conservative
    substitute ``4 n_tot + 2`` is used and flagged in the report notes.
    """

    omega_exp: float
    n_tot: float
    q_sq: float | None = None
    q_pow: Mapping[int, float] = field(default_factory=dict)
    composite: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        _finite_nonneg("omega_exp", self.omega_exp)
        _finite_nonneg("n_tot", self.n_tot)
        if self.q_sq is not None:
            _finite_nonneg("q_sq", self.q_sq)
        for k, v in self.q_pow.items():
            _finite_nonneg(f"q_pow[{k}]", v)
        for k, v in self.composite.items():
            _finite_nonneg(f"composite[{k}]", v)
        if self.omega_exp > self.n_tot * (1 + INPUT_TOL) + INPUT_TOL:
            raise ValidationError(
                f"<Omega> = {self.omega_exp} exceeds <n_tot> = {self.n_tot}; weights are at most 1"
            )

    @classmethod
    def standard(cls, n_tot: float, q_sq: float | None = None) -> "StateMoments":
        """Moments for unit detector weights, where <Omega> = <n_tot>."""
        return cls(omega_exp=n_tot, n_tot=n_tot, q_sq=q_sq)

    def q_sq_or_default(self) -> tuple[float, bool]:
        """Return ``(q_sq, defaulted)``."""
        if self.q_sq is not None:
            return float(self.q_sq), False
        return conservative_q_sq(self.n_tot), True


def conservative_q_sq(n_tot: float) -> float:
    """Upper bound ``4 n + 2`` on <q^2> for a normalized quadrature.

    For ``sum |alpha|^2 = 1`` the exact vacuum value is 1, so this is loose by
    a factor two there; it is kept because it is the documented fallback.
    """
    return 4.0 * float(n_tot) + 2.0


@dataclass(frozen=True)
class ApparatusModel:
    """Measurement-apparatus noise: Gaussian at resolution ``r`` or explicit moments."""

    kind: str
    r: float | None = None
    b2: float | None = None
    b4: float | None = None
    b6: float | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.r is None or not math.isfinite(self.r) or self.r <= 0:
                raise NonPositiveResolution(f"resolution r must be > 0, got {self.r!r}")
            b2, b4, b6 = gaussian_moments(self.r)
            object.__setattr__(self, "b2", b2)
            object.__setattr__(self, "b4", b4)
            object.__setattr__(self, "b6", b6)
        elif self.kind == "explicit":
            for name in ("b2", "b4"):
                v = getattr(self, name)
                if v is None or not math.isfinite(v) or v <= 0:
                    raise ValidationError(f"{name} must be > 0, got {v!r}")
            if self.b6 is not None and (not math.isfinite(self.b6) or self.b6 <= 0):
                raise ValidationError(f"b6 must be > 0, got {self.b6!r}")
        else:
            raise ValidationError(f"unknown apparatus kind {self.kind!r}")

    @classmethod
    def gaussian(cls, r: float) -> "ApparatusModel":
        return cls(kind="gaussian", r=r)

    @classmethod
    def explicit(cls, b2: float, b4: float, b6: float | None = None) -> "ApparatusModel":
        return cls(kind="explicit", b2=b2, b4=b4, b6=b6)


def gaussian_moments(r: float) -> tuple[float, float, float]:
    """Even moments ``(b2, b4, b6)`` of a Gaussian apparatus density of std ``1/(2r)``."""
    r = float(r)
    if not math.isfinite(r) or r <= 0:
        raise NonPositiveResolution(f"resolution r must be > 0, got {r!r}")
    v = 1.0 / (2.0 * r) ** 2
    return v, 3.0 * v * v, 15.0 * v * v * v


@dataclass(frozen=True)
class BoundReport:
    """An evaluated bound with both distance^2 and fidelity lower bound."""

    distance_sq: float
    fidelity_lb: float
    equation_id: str
    inputs_echo: Mapping[str, object] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not (self.distance_sq >= 0):
            raise ValidationError(f"distance_sq must be >= 0, got {self.distance_sq!r}")
        if self.fidelity_lb != fidelity_from_distance_sq(self.distance_sq):
            raise ValidationError("fidelity_lb inconsistent with distance_sq")


def make_report(distance_sq, equation_id, inputs, notes=(), unit_vectors=False) -> BoundReport:
    """Assemble a report; cap at 2 when both compared vectors are unit vectors."""
    notes = list(notes)
    d = float(distance_sq)
    if not math.isfinite(d):
        if unit_vectors and d == math.inf:
            d = DISTANCE_SQ_CAP
            notes.append("capped at 2")
        else:
            raise ValidationError(f"bound evaluated to non-finite value {d!r}")
    if unit_vectors and d > DISTANCE_SQ_CAP:
        d = DISTANCE_SQ_CAP
        notes.append("capped at 2")
    return BoundReport(d, fidelity_from_distance_sq(d), equation_id, dict(inputs), tuple(notes))


def fidelity_from_distance_sq(eps: float) -> float:
    """Fidelity lower bound ``max(0, 1 - eps)`` from a squared vector distance."""
    eps = float(eps)
    if math.isnan(eps):
        raise ValidationError("eps is NaN")
    if eps < 0:
        raise NegativeInput(f"distance^2 must be non-negative, got {eps!r}")
    return max(0.0, 1.0 - eps)


def fidelity_from_overlap(re_overlap: float) -> float:
    """Fidelity lower bound ``Re<phi1|phi2>^2`` from the real part of an overlap."""
    x = float(re_overlap)
    if not (-1.0 <= x <= 1.0):
        raise RangeError(f"real overlap must lie in [-1, 1], got {x!r}")
    return x * x


def fidelity_from_overlap_deficit(eps: float) -> float:
    """Chained linear form ``1 - 2 eps`` for ``Re<phi1|phi2> = 1 - eps``.

    Never exceeds :func:`fidelity_from_overlap` since ``(1-eps)^2 >= 1-2 eps``.
    """
    eps = _finite_nonneg("eps", eps)
    if eps > 2:
        raise RangeError(f"overlap deficit must lie in [0, 2], got {eps!r}")
    return max(0.0, 1.0 - 2.0 * eps)


def distance_sq_from_overlap(re_overlap: float) -> float:
    """``|u - v|^2 = 2 - 2 Re<u|v>`` for unit vectors."""
    x = float(re_overlap)
    if not (-1.0 <= x <= 1.0):
        raise RangeError(f"real overlap must lie in [-1, 1], got {x!r}")
    return 2.0 - 2.0 * x
