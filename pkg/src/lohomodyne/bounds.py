"""Closed-form convergence bounds for finite local-oscillator homodyne.

Every function is a pure scalar map from the LO parameter ``delta`` (inverse
LO amplitude), state moments and apparatus description to a squared vector
distance. Results are wrapped in :class:`~lohomodyne.core.BoundReport` so the
distance^2 and the fidelity lower bound always travel together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ApparatusModel,
    BoundReport,
    ModeEnsemble,
    StateMoments,
    _finite_nonneg,
    conservative_q_sq,
    gaussian_moments,
    make_report,
    omega_bar4,
    omega_bar_sq,
)
from .errors import (
    DegreeTooSmall,
    MissingMoment,
    NegativeInput,
    OddDegree,
    SmallMomentBound,
    ValidationError,
)

__all__ = [
    "FunctionMeasureMoments",
    "ConditionalDisplacementSpec",
    "ApparatusTransition",
    "TeleportationMoments",
    "RegularizedBound",
    "evolution_distance_bound",
    "evolution_distance_bound_refined",
    "evolution_distance_bound_sph",
    "gaussian_apparatus_moments",
    "measurement_fidelity_bound",
    "measurement_fidelity_bound_sph",
    "function_distance_bound",
    "function_distance_bound_sph",
    "regularized_function_bound",
    "charfn_error_bound",
    "moment_error_bound",
    "moment_error_bound_at",
    "conddisp_coefficients",
    "conditional_displacement_bound",
    "regularization_gap_bound",
    "apparatus_conditioning_bound",
    "conditional_unitary_bound",
    "teleportation_bound",
    "multi_measurement_function_bound",
]


def _delta(delta: float) -> float:
    return _finite_nonneg("delta", delta)


def _real(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# evolution bounds


def evolution_distance_bound(delta, s, moments: StateMoments, ensemble: ModeEnsemble) -> BoundReport:
    """Distance^2 between ``exp(-i s q_delta)|psi>`` and ``exp(-i s q)|psi>``.

    Valid with the LO modes in vacuum: ``4 (delta s)^2 ((1+s^2)<Omega> + s^2 wbar^2)``,
    capped at 2.
    """
    delta = _delta(delta)
    s = _real("s", s)
    wb2 = omega_bar_sq(ensemble)
    om = moments.omega_exp
    d = 4.0 * (delta * s) ** 2 * ((1.0 + s * s) * om + s * s * wb2)
    inputs = {"delta": delta, "s": s, "omega_exp": om, "omega_bar_sq": wb2}
    return make_report(d, "evolution-general", inputs, unit_vectors=True)


def evolution_distance_bound_refined(
    delta, s, moments: StateMoments, ensemble: ModeEnsemble, omega_bar4_value=None
) -> BoundReport:
    """Refined evolution bound with the sharper ``1/2`` and ``2/9`` constants.

    ``(ds)^2 [2 (1 + (2/9) s^2 (ds)^2 wbar^2) <Omega> + s^2 (wbar^2/2 + (2/9)(ds)^2 wbar4)]``
    with ``ds = delta*s``, capped at 2.
    """
    delta = _delta(delta)
    s = _real("s", s)
    wb2 = omega_bar_sq(ensemble)
    wb4 = omega_bar4(ensemble) if omega_bar4_value is None else _finite_nonneg("omega_bar4", omega_bar4_value)
    om = moments.omega_exp
    x = (delta * s) ** 2
    d = x * (
        2.0 * (1.0 + (2.0 / 9.0) * s * s * x * wb2) * om
        + s * s * (0.5 * wb2 + (2.0 / 9.0) * x * wb4)
    )
    inputs = {"delta": delta, "s": s, "omega_exp": om, "omega_bar_sq": wb2, "omega_bar4": wb4}
    return make_report(d, "evolution-refined", inputs, unit_vectors=True)


def evolution_distance_bound_sph(delta, s, n_tot, q_sq=None) -> BoundReport:
    """Evolution bound for standard pulsed homodyne (all detector weights 1).

    ``(ds)^2 (2 <n> + s^2 ((1/9)(ds)^2 <q^2> + 1/2))``, capped at 2.
    """
    delta = _delta(delta)
    s = _real("s", s)
    n_tot = _finite_nonneg("n_tot", n_tot)
    notes = []
    if q_sq is None:
        q_sq = conservative_q_sq(n_tot)
        notes.append("q_sq defaulted to 4 n_tot + 2")
    q_sq = _finite_nonneg("q_sq", q_sq)
    x = (delta * s) ** 2
    d = x * (2.0 * n_tot + s * s * (x * q_sq / 9.0 + 0.5))
    inputs = {"delta": delta, "s": s, "n_tot": n_tot, "q_sq": q_sq}
    return make_report(d, "evolution-sph", inputs, notes, unit_vectors=True)


# ---------------------------------------------------------------------------
# measurement bounds


def gaussian_apparatus_moments(r) -> tuple[float, float, float]:
    """``(1/(2r)^2, 3/(2r)^4, 15/(2r)^6)`` for Gaussian added noise of std ``r``."""
    return gaussian_moments(r)


def _apparatus_echo(apparatus: ApparatusModel) -> dict:
    echo = {"apparatus": apparatus.kind, "b2": apparatus.b2, "b4": apparatus.b4}
    if apparatus.r is not None:
        echo["r"] = apparatus.r
    return echo


def measurement_fidelity_bound(
    delta, apparatus: ApparatusModel, moments: StateMoments, ensemble: ModeEnsemble
) -> BoundReport:
    """Post-measurement classical-quantum state bound ``4 d^2 (b2 <Omega> + b4 (<Omega> + wbar^2))``."""
    delta = _delta(delta)
    wb2 = omega_bar_sq(ensemble)
    om = moments.omega_exp
    d = 4.0 * delta * delta * (apparatus.b2 * om + apparatus.b4 * (om + wb2))
    inputs = {"delta": delta, **_apparatus_echo(apparatus), "omega_exp": om, "omega_bar_sq": wb2}
    return make_report(d, "measurement-general", inputs, unit_vectors=True)


def measurement_fidelity_bound_sph(delta, apparatus: ApparatusModel, n_tot, q_sq=None) -> BoundReport:
    """Standard pulsed homodyne variant ``d^2 (2 b2 <n> + (1/9) d^2 b6 <q^2> + b4/2)``."""
    delta = _delta(delta)
    n_tot = _finite_nonneg("n_tot", n_tot)
    if apparatus.b6 is None:
        raise MissingMoment("the standard pulsed homodyne bound needs the apparatus moment b6")
    notes = []
    if q_sq is None:
        q_sq = conservative_q_sq(n_tot)
        notes.append("q_sq defaulted to 4 n_tot + 2")
    q_sq = _finite_nonneg("q_sq", q_sq)
    d2 = delta * delta
    d = d2 * (2.0 * apparatus.b2 * n_tot + d2 * apparatus.b6 * q_sq / 9.0 + 0.5 * apparatus.b4)
    inputs = {"delta": delta, **_apparatus_echo(apparatus), "b6": apparatus.b6, "n_tot": n_tot, "q_sq": q_sq}
    return make_report(d, "measurement-sph", inputs, notes, unit_vectors=True)


# ---------------------------------------------------------------------------
# bounded functions of the quadrature


@dataclass(frozen=True)
class FunctionMeasureMoments:
    """Moments ``f_l = int |kappa|^l d|mu|(kappa)`` of the Fourier measure of ``f``."""

    f0: float
    f2: float
    f1: float | None = None
    f4: float | None = None

    def __post_init__(self):
        _finite_nonneg("f0", self.f0)
        _finite_nonneg("f2", self.f2)
        if self.f1 is not None:
            _finite_nonneg("f1", self.f1)
            if self.f1 * self.f1 > self.f0 * self.f2 * (1 + 1e-12) + 1e-300:
                raise ValidationError("f1^2 <= f0 f2 violated (Cauchy-Schwarz)")
        if self.f4 is not None:
            _finite_nonneg("f4", self.f4)

    @classmethod
    def point(cls, kappa: float, weight: float = 1.0) -> "FunctionMeasureMoments":
        """Moments of ``weight * exp(i kappa x)``."""
        k = abs(float(kappa))
        w = abs(float(weight))
        return cls(f0=w, f1=w * k, f2=w * k * k, f4=w * k**4)


def function_distance_bound(
    delta, fm: FunctionMeasureMoments, moments: StateMoments, ensemble: ModeEnsemble
) -> BoundReport:
    """``|(f(q_delta) - f(q))|psi>|^2 <= 4 d^2 (f0 + f2) f2 (<Omega> + wbar^2)``."""
    delta = _delta(delta)
    wb2 = omega_bar_sq(ensemble)
    om = moments.omega_exp
    d = 4.0 * delta * delta * (fm.f0 + fm.f2) * fm.f2 * (om + wb2)
    inputs = {"delta": delta, "f0": fm.f0, "f2": fm.f2, "omega_exp": om, "omega_bar_sq": wb2}
    return make_report(d, "function-general", inputs)


def function_distance_bound_sph(delta, fm: FunctionMeasureMoments, n_tot, q_sq=None) -> BoundReport:
    """Standard pulsed homodyne variant ``d^2 (f0 + f2)(2<n> + (1/9) d^2 f4 <q^2> + f2/2)``."""
    delta = _delta(delta)
    n_tot = _finite_nonneg("n_tot", n_tot)
    if fm.f4 is None:
        raise MissingMoment("the standard pulsed homodyne function bound needs f4")
    notes = []
    if q_sq is None:
        q_sq = conservative_q_sq(n_tot)
        notes.append("q_sq defaulted to 4 n_tot + 2")
    q_sq = _finite_nonneg("q_sq", q_sq)
    d2 = delta * delta
    d = d2 * (fm.f0 + fm.f2) * (2.0 * n_tot + d2 * fm.f4 * q_sq / 9.0 + 0.5 * fm.f2)
    inputs = {"delta": delta, "f0": fm.f0, "f2": fm.f2, "f4": fm.f4, "n_tot": n_tot, "q_sq": q_sq}
    return make_report(d, "function-sph", inputs, notes)


@dataclass(frozen=True)
class RegularizedBound:
    """Tight and loose forms of the regularized-function bound; ``tight <= loose``."""

    tight: BoundReport
    loose: BoundReport


def regularized_function_bound(
    delta, fm: FunctionMeasureMoments, moments: StateMoments, ensemble: ModeEnsemble, h_sq_exp
) -> RegularizedBound:
    """Bound for ``f`` approximated by a regularized ``f_h`` with ``|f - f_h| <= h``.

    ``h_sq_exp`` is ``<h(q)^2>``. The tight form adds distances, the loose one
    uses ``(a+b)^2 <= 2(a^2+b^2)``.
    """
    delta = _delta(delta)
    h = _finite_nonneg("h_sq_exp", h_sq_exp)
    wb2 = omega_bar_sq(ensemble)
    om = moments.omega_exp
    a_sq = 4.0 * delta * delta * (fm.f0 + fm.f2) * fm.f2 * (om + wb2)
    tight = (math.sqrt(a_sq) + math.sqrt(h)) ** 2
    loose = 2.0 * a_sq + 2.0 * h
    inputs = {"delta": delta, "f0": fm.f0, "f2": fm.f2, "omega_exp": om, "omega_bar_sq": wb2, "h_sq_exp": h}
    return RegularizedBound(
        tight=make_report(tight, "regularized-tight", inputs),
        loose=make_report(loose, "regularized-loose", inputs),
    )


def charfn_error_bound(delta, gamma_abs, n_tot, variant="general", q_sq=None) -> float:
    """Error bound on a characteristic-function value estimated by homodyne averaging.

    ``general``: ``4 d^2 g^2 ((1 + g^2) <n> + g^2)``.
    ``sph``: ``d^2 g^2 ((2 + (4/9) d^2 g^4) <n> + (2/9) d^2 g^4 + g^2/2)``, which is
    the standard pulsed homodyne evolution bound with ``<q^2> = 4<n> + 2``; an
    explicit ``q_sq`` replaces that substitute.
    """
    delta = _delta(delta)
    g = _finite_nonneg("gamma_abs", gamma_abs)
    n = _finite_nonneg("n_tot", n_tot)
    d2, g2 = delta * delta, g * g
    if variant == "general":
        return 4.0 * d2 * g2 * ((1.0 + g2) * n + g2)
    if variant == "sph":
        if q_sq is None:
            return d2 * g2 * ((2.0 + (4.0 / 9.0) * d2 * g2 * g2) * n + (2.0 / 9.0) * d2 * g2 * g2 + 0.5 * g2)
        q = _finite_nonneg("q_sq", q_sq)
        return d2 * g2 * (2.0 * n + g2 * (d2 * g2 * q / 9.0 + 0.5))
    raise ValidationError(f"variant must be 'general' or 'sph', got {variant!r}")


# ---------------------------------------------------------------------------
# moments of the quadrature


def _check_moment_degree(k) -> int:
    if int(k) != k:
        raise ValidationError(f"degree must be an integer, got {k!r}")
    k = int(k)
    if k % 2:
        raise OddDegree(f"degree k must be even, got {k}")
    if k < 4:
        raise DegreeTooSmall(f"degree k must be at least 4, got {k}")
    return k


def moment_error_bound(delta, k, n_tot, q_4k) -> tuple[float, float]:
    """Squared error bound on the k-th quadrature moment, with optimized ``lambda``.

    Returns ``(error_sq_bound, lambda_used)`` where
    ``lambda^(2(k-1)) = 4 sqrt6 d sqrt(<n>+1) / (sin(pi/k)^3 sqrt(q_4k))`` and
    ``error_sq_bound = 16 sqrt6 d sqrt(<n>+1) sqrt(q_4k) / sin(pi/k)^3``.
    ``q_4k`` is an upper bound on ``<q^(4k)>`` and must be at least 1/2.
    """
    delta = _delta(delta)
    k = _check_moment_degree(k)
    n = _finite_nonneg("n_tot", n_tot)
    q = _finite_nonneg("q_4k", q_4k)
    if q < 0.5:
        raise SmallMomentBound(f"q_4k must be at least 1/2, got {q}")
    s3 = math.sin(math.pi / k) ** 3
    if delta == 0.0:
        return 0.0, 0.0
    lam_pow = 4.0 * math.sqrt(6.0) * delta * math.sqrt(n + 1.0) / (s3 * math.sqrt(q))
    lam = lam_pow ** (1.0 / (2 * (k - 1)))
    err = 16.0 * math.sqrt(6.0) * delta * math.sqrt(n + 1.0) * math.sqrt(q) / s3
    return err, lam


def moment_error_bound_at(delta, k, n_tot, q_4k, lam) -> float:
    """Un-optimized two-term squared error bound at a caller-chosen ``lambda > 0``.

    ``32 d^2 (1 + 2/S + 4 lam^2/S^3)(<n>+1) / (S^3 lam^(2(k-1))) + 2 lam^(2k) q_4k``
    with ``S = sin(pi/k)``. No lower limit on ``q_4k`` applies here.
    """
    delta = _delta(delta)
    k = _check_moment_degree(k)
    n = _finite_nonneg("n_tot", n_tot)
    q = _finite_nonneg("q_4k", q_4k)
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValidationError(f"lambda must be positive and finite, got {lam!r}")
    sn = math.sin(math.pi / k)
    s3 = sn**3
    first = 32.0 * delta * delta * (1.0 + 2.0 / sn + 4.0 * lam * lam / s3) * (n + 1.0) / (s3 * lam ** (2 * (k - 1)))
    return first + 2.0 * lam ** (2 * k) * q


# ---------------------------------------------------------------------------
# conditional operations


@dataclass(frozen=True)
class ConditionalDisplacementSpec:
    """Gain ``xi`` and the L1 norms of ``w, w', w''`` and of ``|kappa|^l |w~(kappa)|``."""

    xi: float
    w0: float = 0.0
    w1: float = 0.0
    w2: float = 0.0
    wt0: float = 0.0
    wt1: float = 0.0
    wt2: float = 0.0

    def __post_init__(self):
        _real("xi", self.xi)
        for name in ("w0", "w1", "w2", "wt0", "wt1", "wt2"):
            _finite_nonneg(name, getattr(self, name))

    @property
    def is_linear(self) -> bool:
        return not any((self.w0, self.w1, self.w2, self.wt0, self.wt1, self.wt2))


def conddisp_coefficients(spec: ConditionalDisplacementSpec, p_abs):
    """Eigenvalues ``(P, Q)`` of the auxiliary operators at ``|p| = p_abs``.

    ``P = (sqrt(w0 wt0) + |p| sqrt(w1 wt1)) / sqrt(pi) + 1`` and
    ``Q = |p| (wt2 + |p| (wt1^2 + 2 xi^2))``. Accepts arrays.
    """
    p = np.abs(np.asarray(p_abs, dtype=float))
    P = (math.sqrt(spec.w0 * spec.wt0) + p * math.sqrt(spec.w1 * spec.wt1)) / math.sqrt(math.pi) + 1.0
    Q = p * (spec.wt2 + p * (spec.wt1**2 + 2.0 * spec.xi**2))
    if P.ndim == 0:
        return float(P), float(Q)
    return P, Q


def conddisp_composite_product(spec: ConditionalDisplacementSpec, p_values, p_weights, omega_plus) -> float:
    """``<(1+Q)Q P^2 (Omega + wbar^2)>`` for a product state.

    ``p_values``/``p_weights`` describe the distribution of the control
    momentum; ``omega_plus`` is ``<Omega> + wbar^2`` of the independent target.
    """
    w = np.asarray(p_weights, dtype=float)
    if np.any(w < 0):
        raise NegativeInput("p_weights must be non-negative")
    P, Q = conddisp_coefficients(spec, np.atleast_1d(p_values))
    return float(np.sum(w * (1.0 + Q) * Q * P * P)) * _finite_nonneg("omega_plus", omega_plus)


def conditional_displacement_bound(delta, spec: ConditionalDisplacementSpec, composite_exp) -> BoundReport:
    """``4 d^2 <(1+Q)Q P^2 (Omega + wbar^2)>`` with the expectation supplied by the caller."""
    delta = _delta(delta)
    c = _finite_nonneg("composite_exp", composite_exp)
    d = 4.0 * delta * delta * c
    inputs = {
        "delta": delta,
        "xi": spec.xi,
        "w0": spec.w0,
        "w1": spec.w1,
        "w2": spec.w2,
        "wt0": spec.wt0,
        "wt1": spec.wt1,
        "wt2": spec.wt2,
        "composite_exp": c,
    }
    notes = ("linear conditional displacement",) if spec.is_linear else ()
    return make_report(d, "conditional-displacement", inputs, notes, unit_vectors=True)


def regularization_gap_bound(p_sq_uv_sq_exp) -> float:
    """Distance^2 between two conditional-unitary families: ``<p^2 (u(x) - v(x))^2>``."""
    v = float(p_sq_uv_sq_exp)
    if math.isnan(v) or v < 0:
        raise NegativeInput(f"expectation of a square must be non-negative, got {v!r}")
    return v


@dataclass(frozen=True)
class ApparatusTransition:
    """Summary of a noisy measured-value-to-displacement map."""

    K1: float
    K2: float
    n_half_sq: float

    def __post_init__(self):
        for name in ("K1", "K2", "n_half_sq"):
            _finite_nonneg(name, getattr(self, name))


def apparatus_conditioning_bound(transition: ApparatusTransition) -> BoundReport:
    """``2 K1^2 K2 <(n + 1/2)^2>^(1/2)``."""
    t = transition
    d = 2.0 * t.K1 * t.K1 * t.K2 * t.n_half_sq
    inputs = {"K1": t.K1, "K2": t.K2, "n_half_sq": t.n_half_sq}
    return make_report(d, "apparatus-conditioning", inputs, unit_vectors=True)


def conditional_unitary_bound(F_sq_exp, Q_sq_exp) -> BoundReport:
    """``2 sqrt(<F^2>) sqrt(<Q^2>)``."""
    f = _finite_nonneg("F_sq_exp", F_sq_exp)
    q = _finite_nonneg("Q_sq_exp", Q_sq_exp)
    d = 2.0 * math.sqrt(f) * math.sqrt(q)
    return make_report(d, "conditional-unitary", {"F_sq_exp": f, "Q_sq_exp": q}, unit_vectors=True)


# ---------------------------------------------------------------------------
# teleportation chain


@dataclass(frozen=True)
class TeleportationMoments:
    """Scalar expectations for the three-step teleportation chain.

    ``m1``: composite conditional-displacement expectation (sum of the two
    position and momentum terms). ``m2a``, ``m2b``: ``<(n_tot + 1/2)^2>^(1/2)`` of
    the two measured systems. ``n_a``, ``n_b``: mean photon numbers of the
    two measured modes after the ideal unitary teleport. ``b2``/``b4`` override
    the Gaussian apparatus moments when given. Missing entries stay ``None``
    and raise :class:`MissingMoment` on use.
    """

    m1: float | None = None
    m2a: float | None = None
    m2b: float | None = None
    n_a: float | None = None
    n_b: float | None = None
    b2: float | None = None
    b4: float | None = None

    @classmethod
    def from_mapping(cls, data) -> "TeleportationMoments":
        unknown = set(data) - {"m1", "m2a", "m2b", "n_a", "n_b", "b2", "b4"}
        if unknown:
            raise ValidationError(f"unknown teleportation moments {sorted(unknown)}")
        return cls(**{k: (None if v is None else float(v)) for k, v in data.items()})

    def require(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise MissingMoment(f"teleportation chain moment {name!r} is missing")
        return _finite_nonneg(name, v)


def teleportation_bound(delta, xi, sigma, chain_moments: TeleportationMoments) -> BoundReport:
    """Composite distance bound for homodyne-based CV teleportation.

    Step distances: conditional displacements ``d_B^2 = 16 d^2 xi^2 m1``;
    apparatus conditioning of each measurement ``2 xi^2 d^2 sigma^2 m2``; the two
    homodyne measurements at resolution ``r = d sigma``. Distances add along the
    chain, so the reported distance^2 is ``(d_A + d_B + d_C)^2``.
    """
    delta = _delta(delta)
    xi = _real("xi", xi)
    sigma = _finite_nonneg("sigma", sigma)
    cm = chain_moments
    m1 = cm.require("m1")
    m2a, m2b = cm.require("m2a"), cm.require("m2b")
    n_a, n_b = cm.require("n_a"), cm.require("n_b")
    notes = []

    d_b_sq = 16.0 * delta * delta * xi * xi * m1
    c_a = 2.0 * xi * xi * delta * delta * sigma * sigma * m2a
    c_b = 2.0 * xi * xi * delta * delta * sigma * sigma * m2b
    d_c = math.sqrt(c_a) + math.sqrt(c_b)

    if cm.b2 is not None or cm.b4 is not None:
        apparatus = ApparatusModel.explicit(cm.require("b2"), cm.require("b4"))
        notes.append("explicit apparatus moments")
    elif delta * sigma > 0:
        apparatus = ApparatusModel.gaussian(delta * sigma)
    else:
        apparatus = None
    ens = ModeEnsemble((1.0 + 0j,), (1.0,))
    if apparatus is None:
        # delta = 0 is the ideal measurement; the bound vanishes in that limit
        a_a = a_b = 0.0
        notes.append("ideal measurement limit")
    else:
        a_a = measurement_fidelity_bound(delta, apparatus, StateMoments.standard(n_a), ens).distance_sq
        a_b = measurement_fidelity_bound(delta, apparatus, StateMoments.standard(n_b), ens).distance_sq
    d_a = math.sqrt(a_a) + math.sqrt(a_b)

    total = d_a + math.sqrt(d_b_sq) + d_c
    notes.append(f"d_A^2={d_a * d_a:.17g}")
    notes.append(f"d_B^2={d_b_sq:.17g}")
    notes.append(f"d_C^2={d_c * d_c:.17g}")
    inputs = {
        "delta": delta,
        "xi": xi,
        "sigma": sigma,
        "m1": m1,
        "m2a": m2a,
        "m2b": m2b,
        "n_a": n_a,
        "n_b": n_b,
    }
    return make_report(total * total, "teleportation-chain", inputs, notes, unit_vectors=True)


# ---------------------------------------------------------------------------
# several measurements


def multi_measurement_function_bound(
    delta, per_measurement_fm, omega_tot_exp, omega_bar_sq_tot
) -> BoundReport:
    """Bound for a function of several homodyne outcomes vanishing on the diagonal.

    ``f_tot,l = sqrt(sum_j f_j,l^2)``;
    distance^2 ``= 4 d^2 ((f_tot,1^2 + f_tot,2^2) <Omega_tot> + f_tot,2^2 wbar_tot^2)``.
    """
    delta = _delta(delta)
    om = _finite_nonneg("omega_tot_exp", omega_tot_exp)
    wb2 = _finite_nonneg("omega_bar_sq_tot", omega_bar_sq_tot)
    fms = list(per_measurement_fm)
    if not fms:
        raise ValidationError("at least one measurement is required")
    if any(fm.f1 is None for fm in fms):
        raise MissingMoment("every measurement needs f1")
    f1_sq = math.fsum(fm.f1**2 for fm in fms)
    f2_sq = math.fsum(fm.f2**2 for fm in fms)
    d = 4.0 * delta * delta * ((f1_sq + f2_sq) * om + f2_sq * wb2)
    inputs = {
        "delta": delta,
        "n_measurements": len(fms),
        "f_tot1": math.sqrt(f1_sq),
        "f_tot2": math.sqrt(f2_sq),
        "omega_tot_exp": om,
        "omega_bar_sq_tot": wb2,
    }
    return make_report(d, "multi-measurement", inputs)
