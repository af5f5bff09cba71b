"""Parameter relations of the finite-energy square GKP code.

``n_bar = 1 / (2 D^2)``, ``sigma_gkp^2 = (1 - e^{-D^2}) / (1 + e^{-D^2}) = tanh(D^2/2)``
and the squeezing figure ``-10 log10(2 sigma_gkp^2)`` dB, where ``D`` is the
envelope damping of ``exp(-D^2 n)``.
"""

from __future__ import annotations

import math

from ..errors import ValidationError


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")
    return value


def n_bar_from_delta(delta_env: float) -> float:
    d = _positive("delta_env", delta_env)
    return 1.0 / (2.0 * d * d)


def delta_from_n_bar(n_bar: float) -> float:
    return 1.0 / math.sqrt(2.0 * _positive("n_bar", n_bar))


def sigma_gkp_sq_from_delta(delta_env: float) -> float:
    d = _positive("delta_env", delta_env)
    return math.tanh(0.5 * d * d)


def delta_from_sigma_gkp_sq(sigma_sq: float) -> float:
    s = _positive("sigma_gkp_sq", sigma_sq)
    if s >= 1:
        raise ValidationError(f"sigma_gkp^2 must be below 1, got {s!r}")
    return math.sqrt(2.0 * math.atanh(s))


def sigma_gkp_sq_from_n_bar(n_bar: float) -> float:
    return math.tanh(0.25 / _positive("n_bar", n_bar))


def squeezing_db(sigma_sq: float) -> float:
    """``-10 log10(2 sigma^2)``; vacuum (``sigma^2 = 1/2``) is 0 dB."""
    return -10.0 * math.log10(2.0 * _positive("sigma_sq", sigma_sq))


def sigma_sq_from_db(db: float) -> float:
    return 0.5 * 10.0 ** (-float(db) / 10.0)
