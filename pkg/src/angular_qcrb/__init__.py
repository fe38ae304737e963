"""Quantum Cramer-Rao bounds for simultaneous estimation of multiple
rotation angles with OAM-carrying NOON-like probe states, with and without
photon loss."""

from .errors import QcrbError
from .fock import FockVector, choose_cutoff, make_coherent, make_fock, make_squeezed_coherent, make_squeezed_vacuum, moments
from .loss import LossConfig, cq_trace_inverse_exact, delta_opt, qcrb_lossy, robustness
from .probes import ProbeKind, ProbeSpec, multimode_moments, solve_params_for_nbar, total_mean_photons
from .qfim import SensingConfig, StructuredQfim, qcrb_ideal, qfim, trace_inverse_dense, trace_inverse_structured
from .sweep import SweepSpec, preset, run_sweep
from .verify import verify

__version__ = "0.1.0"

__all__ = [
    "FockVector",
    "LossConfig",
    "ProbeKind",
    "ProbeSpec",
    "QcrbError",
    "SensingConfig",
    "StructuredQfim",
    "SweepSpec",
    "choose_cutoff",
    "cq_trace_inverse_exact",
    "delta_opt",
    "make_coherent",
    "make_fock",
    "make_squeezed_coherent",
    "make_squeezed_vacuum",
    "moments",
    "multimode_moments",
    "preset",
    "qcrb_ideal",
    "qcrb_lossy",
    "qfim",
    "robustness",
    "run_sweep",
    "solve_params_for_nbar",
    "total_mean_photons",
    "trace_inverse_dense",
    "trace_inverse_structured",
    "verify",
]
