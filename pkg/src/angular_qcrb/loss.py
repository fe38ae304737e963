"""Photon loss: variational Kraus family, lossy bounds and robustness.

Loss on every mode is a fictitious beam splitter of transmissivity ``eta``.
Its Kraus operators carry a variational phase parameter ``delta`` (``0``:
loss before the Dove prisms, ``-1``: after).  With uniform ``eta`` and
``delta`` the enlarged-space QFIM ``C_Q`` is again ``a I - b J`` with

    a = 16 l^2 N^2 (chi^2 <n^2>_psi + gamma <n>_psi),   b = 16 l^2 chi^2 nbar_m^2,

where ``chi = 1 - (1+delta)(1-eta)`` and ``gamma = eta (1-eta) (1+delta)^2``.
The system-environment state itself is never built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ParameterDomainError, SingularMatrixError
from .probes import MultimodeMoments, ProbeSpec, closed_form_moments, multimode_moments
from .qfim import SensingConfig, StructuredQfim, _check_dims, qcrb_ideal, trace_inverse_dense, trace_inverse_structured


@dataclass(frozen=True)
class LossConfig:
    eta: float
    delta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ParameterDomainError(f"eta must lie in (0, 1], got {self.eta!r}")
        if not math.isfinite(self.delta):
            raise ParameterDomainError(f"delta must be finite, got {self.delta!r}")


@dataclass(frozen=True)
class ChannelCoefficients:
    chi: float
    gamma: float


def channel_coefficients(loss: LossConfig) -> ChannelCoefficients:
    x = 1.0 + loss.delta
    return ChannelCoefficients(
        chi=1.0 - x * (1.0 - loss.eta),
        gamma=loss.eta * (1.0 - loss.eta) * x * x,
    )


def cq_matrix(probe: ProbeSpec, cfg: SensingConfig, loss: LossConfig, moments: MultimodeMoments | None = None) -> StructuredQfim:
    """``C_Q`` as ``a I - b J``.

    Diagonal ``16 l^2 (chi^2 (<n_m^2> - <n_m>^2) + gamma <n_m>)``, off-diagonal
    ``-16 l^2 chi^2 <n_j><n_m>``.
    """
    _check_dims(probe, cfg)
    mm = multimode_moments(probe) if moments is None else moments
    c = channel_coefficients(loss)
    scale = 16.0 * cfg.l**2
    return StructuredQfim(
        a=scale * (c.chi**2 * mm.n2_m + c.gamma * mm.nbar_m),
        b=scale * c.chi**2 * mm.nbar_m**2,
        dim=cfg.d,
    )


def _sigma(mm: MultimodeMoments, c: ChannelCoefficients) -> tuple[float, float]:
    # single-mode <n^2>_psi and <n>_psi are the per-mode values over N^2
    n_psi = mm.nbar_m / mm.norm_sq
    n2_psi = mm.n2_m / mm.norm_sq
    return c.chi**2 * n2_psi + c.gamma * n_psi, n_psi


def cq_trace_inverse_exact(probe: ProbeSpec, cfg: SensingConfig, loss: LossConfig, moments: MultimodeMoments | None = None) -> float:
    """Exact two-term ``Tr[C_Q^-1]``."""
    _check_dims(probe, cfg)
    mm = multimode_moments(probe) if moments is None else moments
    c = channel_coefficients(loss)
    sigma, n_psi = _sigma(mm, c)
    second = sigma - cfg.d * mm.norm_sq * c.chi**2 * n_psi**2
    if not (sigma > 0 and second > 0):
        raise SingularMatrixError(f"C_Q is singular (chi={c.chi!r}, gamma={c.gamma!r})")
    scale = 16.0 * cfg.l**2 * mm.norm_sq
    return (cfg.d - 1) / (scale * sigma) + 1.0 / (scale * second)


def cq_trace_inverse_dense(probe: ProbeSpec, cfg: SensingConfig, loss: LossConfig, moments: MultimodeMoments | None = None) -> float:
    return trace_inverse_dense(cq_matrix(probe, cfg, loss, moments))


def cq_trace_inverse_largeD(probe: ProbeSpec, cfg: SensingConfig, loss: LossConfig, moments: MultimodeMoments | None = None) -> float:
    """Leading term ``(d-1) / (16 l^2 N^2 sigma)`` of the exact trace; valid for ``d >> 1``."""
    _check_dims(probe, cfg)
    mm = multimode_moments(probe) if moments is None else moments
    sigma, _ = _sigma(mm, channel_coefficients(loss))
    if not sigma > 0:
        raise SingularMatrixError("C_Q is singular (sigma = 0)")
    return (cfg.d - 1) / (16.0 * cfg.l**2 * mm.norm_sq * sigma)


def delta_opt(probe: ProbeSpec, eta: float, moments: MultimodeMoments | None = None) -> float:
    """Variational parameter maximizing the large-d trace.

    ``<n^2> / ((1-eta) <n^2> + eta <n>) - 1``.  Since ``<n^2> >= <n>`` this is
    never negative; it exceeds 1 once ``<n^2>/<n> > 2 eta / (2 eta - 1)``.
    """
    LossConfig(eta)
    mm = multimode_moments(probe) if moments is None else moments
    return mm.n2_m / ((1.0 - eta) * mm.n2_m + eta * mm.nbar_m) - 1.0


def delta_argmax(
    probe: ProbeSpec,
    cfg: SensingConfig,
    eta: float,
    bounds: tuple[float, float] = (-1.0, 1.0),
    xatol: float = 1e-10,
    moments: MultimodeMoments | None = None,
) -> tuple[float, float]:
    """Numerical ``(argmax, max)`` of the large-d trace over ``delta`` in ``bounds``.

    Bounded Brent search, then the interval endpoints are compared so a
    boundary maximum is reported exactly.
    """
    mm = multimode_moments(probe) if moments is None else moments

    def value(delta: float) -> float:
        return cq_trace_inverse_largeD(probe, cfg, LossConfig(eta, delta), mm)

    res = minimize_scalar(lambda x: -value(x), bounds=bounds, method="bounded", options={"xatol": xatol, "maxiter": 500})
    candidates = [(value(float(res.x)), float(res.x)), (value(bounds[0]), bounds[0]), (value(bounds[1]), bounds[1])]
    best_value, best_delta = max(candidates)
    return best_delta, best_value


def lossy_bound(nbar_m: float, g2_m: float, d: int, l: int, eta: float) -> float:  # noqa: E741
    """Closed-form lossy bound from per-mode ``nbar`` and intramode ``g2``."""
    return (d - 1) / (16.0 * l * l * nbar_m) * ((1.0 - eta) / eta + 1.0 / (1.0 + nbar_m * g2_m))


def _require_multi(cfg: SensingConfig) -> None:
    if cfg.d < 2:
        raise DomainError("the lossy bound has a (d-1) prefactor and needs d >= 2; use cq_trace_inverse_exact for d = 1")


def qcrb_lossy(probe: ProbeSpec, cfg: SensingConfig, eta: float, moments: MultimodeMoments | None = None) -> float:
    """Lossy QCRB in rad^2 (large-d trace at the optimal ``delta``)."""
    _check_dims(probe, cfg)
    _require_multi(cfg)
    LossConfig(eta)
    mm = multimode_moments(probe) if moments is None else moments
    return lossy_bound(mm.nbar_m, mm.g2_m, cfg.d, cfg.l, eta)


def qcrb_lossy_per_state(probe: ProbeSpec, cfg: SensingConfig, eta: float, printed: bool = False) -> float:
    """Lossy QCRB from the per-state closed-form ``nbar`` and ``g2``."""
    _check_dims(probe, cfg)
    _require_multi(cfg)
    LossConfig(eta)
    nbar, g2 = closed_form_moments(probe, printed=printed)
    return lossy_bound(nbar, g2, cfg.d, cfg.l, eta)


def robustness(probe: ProbeSpec, cfg: SensingConfig, eta: float, moments: MultimodeMoments | None = None) -> float:
    """Gap ``R`` between the lossy (large-d) and ideal QCRB; smaller is more robust."""
    mm = multimode_moments(probe) if moments is None else moments
    return qcrb_lossy(probe, cfg, eta, mm) - qcrb_ideal(probe, cfg, mm)


def robustness_diagnostics(probe: ProbeSpec, cfg: SensingConfig, eta: float, moments: MultimodeMoments | None = None) -> dict:
    """``R`` together with the exact-trace alternative at the optimal ``delta``."""
    mm = multimode_moments(probe) if moments is None else moments
    ideal = qcrb_ideal(probe, cfg, mm)
    lossy = qcrb_lossy(probe, cfg, eta, mm)
    dopt = delta_opt(probe, eta, mm)
    exact = cq_trace_inverse_exact(probe, cfg, LossConfig(eta, dopt), mm)
    return {
        "ideal": ideal,
        "lossy": lossy,
        "R": lossy - ideal,
        "delta_opt": dopt,
        "lossy_exact": exact,
        "R_exact": exact - ideal,
    }


# -- explicit Kraus operators (small fixtures) -----------------------------


def kraus_operators(eta: float, delta: float, cutoff: int, l: int = 1, theta: float = 0.0) -> list[np.ndarray]:  # noqa: E741
    """Single-mode Kraus operators ``Pi_k``, ``k = 0..cutoff``, as dense matrices.

    ``Pi_k = sqrt((1-eta)^k / k!) exp(i 2 l theta (n - delta k)) eta^(n/2) a^k``.
    """
    n = np.arange(cutoff + 1, dtype=float)
    a = np.diag(np.sqrt(n[1:]), k=1)
    eta_half = np.diag(eta ** (n / 2))
    ops = []
    ak = np.eye(cutoff + 1)
    for k in range(cutoff + 1):
        phase = np.diag(np.exp(1j * 2 * l * theta * (n - delta * k)))
        ops.append(math.sqrt((1.0 - eta) ** k / math.factorial(k)) * phase @ eta_half @ ak)
        ak = a @ ak
    return ops


def kraus_completeness_deviation(eta: float, cutoff: int = 4, delta: float = 0.0, l: int = 1, theta: float = 0.3) -> float:  # noqa: E741
    """Max elementwise ``|sum_k Pi_k^dag Pi_k - I|``."""
    ops = kraus_operators(eta, delta, cutoff, l, theta)
    total = sum(op.conj().T @ op for op in ops)
    return float(np.max(np.abs(total - np.eye(cutoff + 1))))


def kraus_generators(eta: float, delta: float, cutoff: int, l: int = 1, theta: float = 0.3) -> tuple[np.ndarray, np.ndarray]:  # noqa: E741
    """``Gamma = i sum_k dPi_k^dag Pi_k`` and ``Lambda = sum_k dPi_k^dag dPi_k``
    built from the explicit operators, with ``dPi_k = i 2l (n - delta k) Pi_k``."""
    n = np.diag(np.arange(cutoff + 1, dtype=float))
    ops = kraus_operators(eta, delta, cutoff, l, theta)
    gamma_op = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    lambda_op = np.zeros_like(gamma_op)
    for k, op in enumerate(ops):
        d_op = 1j * 2 * l * (n - delta * k * np.eye(cutoff + 1)) @ op
        gamma_op += 1j * d_op.conj().T @ op
        lambda_op += d_op.conj().T @ d_op
    return gamma_op, lambda_op
