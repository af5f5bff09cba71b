"""Local-oscillator and resolution budgets for homodyne-based GKP error correction.

Pipeline: tolerable noise -> measurement resolution -> photon-number bounds on
the measured modes -> quadratic solve for ``delta^2`` -> LO photon number and
equivalent photodiode added noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import _finite_nonneg
from .errors import NoBudget, ValidationError
from .gkp.params import squeezing_db, sigma_gkp_sq_from_n_bar

PHOTODIODE_NOISE = (730.0, 8250.0)


@dataclass(frozen=True)
class GkpBudgetInput:
    """One planning row.

    ``sigma_gkp`` optionally overrides the code's intrinsic noise std derived
    from ``n_bar``; tabulated rows quote it rounded to three places.
    """

    n_bar: float
    sigma_noise: float
    sigma_0: float
    eps_ec: float
    eps_m: float
    sigma_gkp: float | None = None
    pauli_allowance: bool = True

    def __post_init__(self):
        for name in ("n_bar", "sigma_noise"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")
        _finite_nonneg("sigma_0", self.sigma_0)
        for name in ("eps_ec", "eps_m"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ValidationError(f"{name} must lie in (0, 1), got {v!r}")
        if self.sigma_gkp is not None and not (math.isfinite(self.sigma_gkp) and self.sigma_gkp > 0):
            raise ValidationError(f"sigma_gkp must be positive, got {self.sigma_gkp!r}")
        if 3.0 * self.sigma_0**2 >= self.sigma_noise**2:
            raise NoBudget(
                f"3 sigma_0^2 = {3 * self.sigma_0**2:.6g} leaves no resolution budget "
                f"below sigma_noise^2 = {self.sigma_noise**2:.6g}"
            )

    @property
    def sigma_gkp_value(self) -> float:
        if self.sigma_gkp is not None:
            return float(self.sigma_gkp)
        return math.sqrt(sigma_gkp_sq_from_n_bar(self.n_bar))


@dataclass(frozen=True)
class GkpBudgetPlan:
    input: GkpBudgetInput
    r: float
    n_prime_a: float
    n_prime_b: float
    c2: float
    c4: float
    delta_m_sq: float
    n_lo: float
    sigma_e: float
    residual: float

    @property
    def squeezing_db(self) -> float:
        return squeezing_db(self.input.sigma_gkp_value**2)

    def n_lo_at(self, sigma_target: float) -> float:
        """LO photons needed when the photodiode added noise is ``sigma_target``.

        Scaling the LO photon number by ``k`` tolerates ``sqrt(k)`` more added
        noise, so a noisier diode needs ``n_lo (sigma_target / sigma_e)^2``.
        """
        t = float(sigma_target)
        if not (t > 0 and math.isfinite(t)):
            raise ValidationError(f"sigma_target must be positive, got {t!r}")
        if self.sigma_e < t:
            return self.n_lo * (t / self.sigma_e) ** 2
        return self.n_lo


def required_resolution(sigma_noise, sigma_0) -> float:
    """``r = sqrt(2 sigma_noise^2 - 6 sigma_0^2)``, inverting ``sigma_noise^2 = 3 sigma_0^2 + r^2/2``."""
    sn = _finite_nonneg("sigma_noise", sigma_noise)
    s0 = _finite_nonneg("sigma_0", sigma_0)
    arg = 2.0 * sn * sn - 6.0 * s0 * s0
    if not arg > 0:
        raise NoBudget(f"2 sigma_noise^2 - 6 sigma_0^2 = {arg:.6g} is not positive")
    return math.sqrt(arg)


def sigma_noise_from(sigma_0, r) -> float:
    """Total displacement noise ``sqrt(3 sigma_0^2 + r^2 / 2)``."""
    s0 = _finite_nonneg("sigma_0", sigma_0)
    r = _finite_nonneg("r", r)
    return math.sqrt(3.0 * s0 * s0 + 0.5 * r * r)


def measured_mode_photons(n_bar, sigma_0, pauli_allowance: bool = True) -> tuple[float, float]:
    """Upper bounds ``(n'_a, n'_b)`` on the photon numbers of the two measured modes.

    With ``v = 2 n_bar + 1``: ``n'_a = (3v - 2 + 3 sigma_0^2 + 4 pi)/4`` and
    ``n'_b = (4v - 2 + 4 sigma_0^2 + 2 pi)/4``. The ``4 pi`` and ``2 pi`` terms
    cover logical Pauli displacements and can be switched off.
    """
    n_bar = _finite_nonneg("n_bar", n_bar)
    if n_bar == 0:
        raise ValidationError("n_bar must be positive")
    s0 = _finite_nonneg("sigma_0", sigma_0)
    v = 2.0 * n_bar + 1.0
    pa, pb = (4.0 * math.pi, 2.0 * math.pi) if pauli_allowance else (0.0, 0.0)
    n_a = (3.0 * v - 2.0 + 3.0 * s0 * s0 + pa) / 4.0
    n_b = (4.0 * v - 2.0 + 4.0 * s0 * s0 + pb) / 4.0
    return n_a, n_b


def quartic_coefficients(r, n_prime_a, n_prime_b) -> tuple[float, float]:
    """``(c2, c4)`` of the summed measurement infidelity ``c2 d^2 + c4 d^4``."""
    if not (r > 0):
        raise ValidationError(f"r must be positive, got {r!r}")
    n = _finite_nonneg("n_prime_a", n_prime_a) + _finite_nonneg("n_prime_b", n_prime_b)
    two_r = 2.0 * r
    c2 = 4.0 * n / two_r**2 + 3.0 / two_r**4
    c4 = (40.0 / 3.0) * (n + 0.5) / two_r**6
    return c2, c4


def solve_delta_m(eps_m, r, n_prime_a, n_prime_b) -> tuple[float, float]:
    """Positive root ``x = delta^2`` of ``c4 x^2 + c2 x = eps_m`` and its residual.

    Uses the cancellation-free form ``x = 2 eps / (c2 + sqrt(c2^2 + 4 c4 eps))``.
    """
    eps = float(eps_m)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValidationError(f"eps_m must be positive, got {eps_m!r}")
    c2, c4 = quartic_coefficients(r, n_prime_a, n_prime_b)
    x = 2.0 * eps / (c2 + math.sqrt(c2 * c2 + 4.0 * c4 * eps))
    residual = abs(eps - (c2 * x + c4 * x * x))
    return x, residual


def solve_delta_m_leading(eps_m, r, n_prime_a, n_prime_b) -> float:
    """``delta^2 = eps_m / c2``, neglecting the quartic term."""
    c2, _ = quartic_coefficients(r, n_prime_a, n_prime_b)
    return float(eps_m) / c2


def plan(inp: GkpBudgetInput) -> GkpBudgetPlan:
    """Run the full budget pipeline for one row."""
    r = required_resolution(inp.sigma_noise, inp.sigma_0)
    n_a, n_b = measured_mode_photons(inp.n_bar, inp.sigma_0, inp.pauli_allowance)
    c2, c4 = quartic_coefficients(r, n_a, n_b)
    x, residual = solve_delta_m(inp.eps_m, r, n_a, n_b)
    return GkpBudgetPlan(
        input=inp,
        r=r,
        n_prime_a=n_a,
        n_prime_b=n_b,
        c2=c2,
        c4=c4,
        delta_m_sq=x,
        n_lo=1.0 / x,
        sigma_e=r / math.sqrt(x),
        residual=residual,
    )


# Parameter rows of the reference budget table:
# (n_bar, sigma_gkp, eps_ec, eps_m, sigma_noise, sigma_0)
REFERENCE_ROWS = (
    (4.8, 0.229, 0.06, 0.02, 0.1, 0.05),
    (7.6, 0.182, 0.015, 0.005, 0.1, 0.05),
    (12.0, 0.144, 0.002, 0.0005, 0.1, 0.05),
    (12.0, 0.144, 0.008, 0.002, 0.18, 0.09),
    (12.0, 0.144, 0.008, 0.002, 0.18, 0.045),
    (12.0, 0.144, 0.005, 0.005, 0.15, 0.075),
    (15.4, 0.127, 0.0008, 0.0002, 0.14, 0.05),
)


def reference_inputs() -> list[GkpBudgetInput]:
    return [
        GkpBudgetInput(n_bar=n, sigma_noise=sn, sigma_0=s0, eps_ec=ec, eps_m=em, sigma_gkp=sg)
        for n, sg, ec, em, sn, s0 in REFERENCE_ROWS
    ]
