"""Ideal (lossless) quantum Fisher information matrix and Cramer-Rao bound.

For the balanced NOON-like probes the QFIM of the ``d`` angular
displacements is ``F = 16 l^2 (<n_m^2> I - <n_m>^2 J)`` with ``J`` the
all-ones matrix.  Matrices of the form ``a I - b J`` are kept as
``(a, b, dim)`` and inverted in closed form; a dense Cholesky path exists only
to falsify that algebra.  The angles themselves never enter the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidStateError, ParameterDomainError, SingularMatrixError
from .probes import MultimodeMoments, ProbeSpec, closed_form_moments, multimode_moments

DENSE_MAX_DIM = 512


@dataclass(frozen=True)
class SensingConfig:
    """OAM quanta ``l`` per photon and number ``d`` of estimated angles."""

    l: int  # noqa: E741
    d: int

    def __post_init__(self):
        for name in ("l", "d"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterDomainError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))


@dataclass(frozen=True)
class StructuredQfim:
    """``a I - b J`` of size ``dim``; entries ``a - b`` on and ``-b`` off the diagonal."""

    a: float
    b: float
    dim: int

    def is_positive_definite(self) -> bool:
        # eigenvalues: a (multiplicity dim - 1) and a - dim * b
        return (self.dim == 1 or self.a > 0) and self.a - self.dim * self.b > 0

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_MAX_DIM:
            raise ValueError(f"dense path is capped at dim={DENSE_MAX_DIM}, got {self.dim}")
        return self.a * np.eye(self.dim) - self.b * np.ones((self.dim, self.dim))

    def scaled(self, factor: float) -> "StructuredQfim":
        return StructuredQfim(self.a * factor, self.b * factor, self.dim)


def trace_inverse_structured(F: StructuredQfim) -> float:
    """``Tr[(aI - bJ)^-1] = d/a * (1 + b/(a - d b))`` (Sherman-Morrison)."""
    a, b, d = F.a, F.b, F.dim
    if not F.is_positive_definite():
        raise SingularMatrixError(f"a I - b J is not positive definite (a={a!r}, b={b!r}, dim={d})")
    return d / a * (1.0 + b / (a - d * b))


def trace_inverse_dense(F: StructuredQfim | np.ndarray) -> float:
    """Trace of the inverse by Cholesky factorization of the dense matrix."""
    M = F.dense() if isinstance(F, StructuredQfim) else np.asarray(F, dtype=float)
    try:
        factor = cho_factor(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from None
    return float(np.trace(cho_solve(factor, np.eye(M.shape[0]))))


def _check_dims(probe: ProbeSpec, cfg: SensingConfig) -> None:
    if probe.d != cfg.d:
        raise ParameterDomainError(f"probe has d={probe.d} but sensing config has d={cfg.d}")


def qfim(probe: ProbeSpec, cfg: SensingConfig, moments: MultimodeMoments | None = None) -> StructuredQfim:
    """QFIM ``16 l^2 Cov(n_j, n_m)`` in structured form."""
    _check_dims(probe, cfg)
    mm = multimode_moments(probe) if moments is None else moments
    scale = 16.0 * cfg.l**2
    F = StructuredQfim(scale * mm.n2_m, scale * mm.nbar_m**2, cfg.d)
    if not F.is_positive_definite():
        raise InvalidStateError(f"QFIM of {probe} is not positive definite")
    return F


def qfim_dense_from_covariance(moments: MultimodeMoments, cfg: SensingConfig) -> np.ndarray:
    """Element-by-element ``16 l^2 Cov(n_j, n_m)`` using ``<n_j n_m> = 0`` for ``j != m``."""
    if cfg.d > DENSE_MAX_DIM:
        raise ValueError(f"dense path is capped at d={DENSE_MAX_DIM}")
    scale = 16.0 * cfg.l**2
    F = np.empty((cfg.d, cfg.d))
    for j in range(cfg.d):
        for m in range(cfg.d):
            second = moments.n2_m if j == m else 0.0
            F[j, m] = scale * (second - moments.nbar_m * moments.nbar_m)
    return F


def ideal_bound(nbar_m: float, g2_m: float, d: int, l: int) -> float:  # noqa: E741
    """Closed-form ideal bound from per-mode ``nbar`` and intramode ``g2``."""
    return d / (16.0 * l * l * (nbar_m * nbar_m * g2_m + nbar_m)) * (1.0 + 1.0 / (g2_m + 1.0 / nbar_m - d))


def qcrb_ideal(probe: ProbeSpec, cfg: SensingConfig, moments: MultimodeMoments | None = None) -> float:
    """Ideal QCRB in rad^2."""
    _check_dims(probe, cfg)
    mm = multimode_moments(probe) if moments is None else moments
    return ideal_bound(mm.nbar_m, mm.g2_m, cfg.d, cfg.l)


def qcrb_ideal_per_state(probe: ProbeSpec, cfg: SensingConfig, printed: bool = False) -> float:
    """Ideal QCRB from the per-state closed-form ``nbar`` and ``g2``.

    ``printed=True`` uses the published squeezed-family ``g2`` expressions
    verbatim (see :func:`closed_form_moments`).
    """
    _check_dims(probe, cfg)
    nbar, g2 = closed_form_moments(probe, printed=printed)
    return ideal_bound(nbar, g2, cfg.d, cfg.l)


def saturation_commutator_check(probe: ProbeSpec, l: int = 1, cutoff: int = 6, atol: float = 0.0) -> bool:  # noqa: E741
    """Check ``<Psi|[2l n_j, 2l n_m]|Psi> = 0`` for all mode pairs on an
    explicit state vector (small ``d`` and cutoff only)."""
    from .tensor import mode_operator, number_operator, probe_vector

    if probe.d > 2 or cutoff > 6:
        raise ValueError("explicit fixture limited to d <= 2 and cutoff <= 6")
    psi = probe_vector(probe, cutoff)
    n_modes = probe.d + 1
    gens = [2 * l * mode_operator(number_operator(cutoff), m, n_modes) for m in range(n_modes)]
    for j in range(n_modes):
        for m in range(n_modes):
            comm = gens[j] @ gens[m] - gens[m] @ gens[j]
            if abs(np.vdot(psi, comm @ psi)) > atol:
                return False
    return True


def relative_gap(x: float, y: float) -> float:
    return abs(x - y) / max(abs(x), abs(y), math.ulp(0.0))
