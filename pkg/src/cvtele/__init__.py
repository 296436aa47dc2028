"""Continuous-variable teleportation through characteristic functions."""

from .cf import CFGrid, cf_eval, cf_eval2, displacement_matrix, moments_from_state, reconstruct
from .errors import CVTeleError
from .fock import FockDensityMatrix, FockVector
from .gaussian import GaussianState
from .handle import State
from .kernels import BACKEND
from .oracle import oracle_teleport
from .states import build, parse_spec
from .teleport import (
    Numerics,
    TeleportJob,
    added_noise,
    cm_from_resource,
    distorting_state,
    epr_uncertainty,
    fidelity,
    fidelity_coherent,
    run_protocol,
    teleport_cf,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CFGrid", "CVTeleError", "FockDensityMatrix", "FockVector", "GaussianState",
    "Numerics", "State", "TeleportJob", "added_noise", "build", "cf_eval", "cf_eval2",
    "cm_from_resource", "displacement_matrix", "distorting_state", "epr_uncertainty",
    "fidelity", "fidelity_coherent", "moments_from_state", "oracle_teleport", "parse_spec",
    "reconstruct", "run_protocol", "teleport_cf",
]
