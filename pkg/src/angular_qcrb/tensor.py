"""Explicit multimode state vectors for tiny fixtures (few modes, small cutoff).

Only used to check reduction rules and commutators by brute force; the rest
of the package never materializes the (d+1)-mode state.
"""

import numpy as np

from . import fock
from .probes import ProbeSpec


def truncated_psi(probe: ProbeSpec, cutoff: int) -> np.ndarray:
    """Single-mode amplitudes of ``|psi>`` cut at ``cutoff`` and renormalized."""
    kind, params = probe.single_mode()
    amps = np.asarray(fock.make_state(kind, params, cutoff, tol=1.0).coeffs)
    return amps / np.linalg.norm(amps)


def probe_vector(probe: ProbeSpec, cutoff: int = 6) -> np.ndarray:
    """Normalized ``(d+1)``-mode state vector, mode 0 first (C order)."""
    psi = truncated_psi(probe, cutoff)
    dim = cutoff + 1
    n_modes = probe.d + 1
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    total = np.zeros(dim**n_modes, dtype=complex)
    for m in range(n_modes):
        term = np.ones(1, dtype=complex)
        for j in range(n_modes):
            term = np.kron(term, psi if j == m else vac)
        total += term
    return total / np.linalg.norm(total)


def mode_operator(single: np.ndarray, mode: int, n_modes: int) -> np.ndarray:
    """Embed a single-mode operator on ``mode`` of an ``n_modes`` register."""
    eye = np.eye(single.shape[0])
    out = np.ones((1, 1))
    for j in range(n_modes):
        out = np.kron(out, single if j == mode else eye)
    return out


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float))


def annihilation_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)
