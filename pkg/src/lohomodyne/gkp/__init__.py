"""Finite-energy GKP codes, Gaussian displacement noise and recovery fidelity."""

from .channels import Channel, GridSpec, displacement_channel, displacement_channel_kraus
from .code import GkpCode, build_gkp_code
from .fidelity import (
    analytic_entanglement_fidelity,
    codeword_projection_recovery,
    entanglement_fidelity,
    p_succ,
    sigma_noise_for_infidelity,
    state_moments_from_fock,
    transpose_channel_recovery,
)
from .fock import FockOperator
from .params import (
    delta_from_n_bar,
    delta_from_sigma_gkp_sq,
    n_bar_from_delta,
    sigma_gkp_sq_from_delta,
    sigma_gkp_sq_from_n_bar,
    sigma_sq_from_db,
    squeezing_db,
)

__all__ = [
    "Channel",
    "GridSpec",
    "FockOperator",
    "GkpCode",
    "build_gkp_code",
    "displacement_channel",
    "displacement_channel_kraus",
    "analytic_entanglement_fidelity",
    "codeword_projection_recovery",
    "entanglement_fidelity",
    "p_succ",
    "sigma_noise_for_infidelity",
    "state_moments_from_fock",
    "transpose_channel_recovery",
    "delta_from_n_bar",
    "delta_from_sigma_gkp_sq",
    "n_bar_from_delta",
    "sigma_gkp_sq_from_delta",
    "sigma_gkp_sq_from_n_bar",
    "sigma_sq_from_db",
    "squeezing_db",
]
