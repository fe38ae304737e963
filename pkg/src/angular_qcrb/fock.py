"""Truncated single-mode Fock-space states and photon-number moments.

This module is the brute-force reference for every closed-form moment used
elsewhere in the package.  States are real-parameter pure states stored as
amplitude vectors ``c_0..c_K``.  Amplitudes are generated with ratio
recurrences (no factorials) so cutoffs in the thousands are safe.

Squeezing convention: ``S(r) = exp[r (a^dag^2 - a^2) / 2]`` with ``r >= 0``,
so ``<n> = sinh(r)^2`` and the squeezed-vacuum amplitudes are all
non-negative.  Squeezed coherent states are ``D(beta) S(r) |0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import gammainc

from .errors import CutoffTooSmallError, InfeasibleToleranceError, ParameterDomainError

DEFAULT_TOL = 1e-12
MAX_CUTOFF = 4096
_EPS = np.finfo(float).eps

FOCK = "fock"
COHERENT = "coherent"
SQUEEZED_VACUUM = "squeezed_vacuum"
SQUEEZED_COHERENT = "squeezed_coherent"
KINDS = (FOCK, COHERENT, SQUEEZED_VACUUM, SQUEEZED_COHERENT)


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated single-mode state.

    Attributes:
        cutoff: highest retained Fock index ``K``.
        coeffs: read-only complex array of length ``K + 1``.
        tail_mass: upper bound on the probability discarded by truncation,
            including a floating-point allowance for the retained sum.
    """

    cutoff: int
    coeffs: np.ndarray
    tail_mass: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def norm_sq(self) -> float:
        return math.fsum(self.probabilities)


@dataclass(frozen=True)
class SingleModeMoments:
    n_mean: float
    n2_mean: float
    a2dag_a2: float
    vac_overlap_sq: float

    @property
    def g2(self) -> float:
        """Single-mode second-order coherence ``<a^dag^2 a^2> / <n>^2``."""
        return self.a2dag_a2 / self.n_mean**2


def _freeze(amps: np.ndarray) -> np.ndarray:
    out = np.asarray(amps, dtype=complex)
    out.setflags(write=False)
    return out


def _roundoff_allowance(probs: np.ndarray) -> float:
    # amplitude n carries O(n) accumulated rounding from the recurrence
    n = np.arange(probs.size)
    return 4.0 * _EPS * (math.fsum(n * probs) + 2.0)


def _check_cutoff(K: int) -> int:
    if int(K) != K or K < 0:
        raise ValueError(f"cutoff must be a non-negative integer, got {K!r}")
    if K > MAX_CUTOFF:
        raise InfeasibleToleranceError(f"cutoff {K} exceeds the hard ceiling {MAX_CUTOFF}")
    return int(K)


def make_fock(n: int, K: int) -> FockVector:
    K = _check_cutoff(K)
    if int(n) != n or n < 0:
        raise ParameterDomainError(f"Fock index must be a non-negative integer, got {n!r}")
    if n > K:
        raise CutoffTooSmallError(f"Fock state |{n}> does not fit in cutoff {K}")
    amps = np.zeros(K + 1)
    amps[int(n)] = 1.0
    return FockVector(K, _freeze(amps), 0.0)


def _coherent_amplitudes(alpha: float, K: int) -> np.ndarray:
    amps = np.empty(K + 1)
    amps[0] = math.exp(-0.5 * alpha * alpha)
    if amps[0] == 0.0:
        raise InfeasibleToleranceError(f"vacuum amplitude underflows for alpha={alpha}")
    for n in range(K):
        amps[n + 1] = amps[n] * alpha / math.sqrt(n + 1)
    return amps


def poisson_tail(K: int, lam: float) -> float:
    """``P(X > K)`` for ``X ~ Poisson(lam)``; exact, via the regularized gamma."""
    if lam == 0.0:
        return 0.0
    if K < 0:
        return 1.0
    return float(gammainc(K + 1, lam))


def make_coherent(alpha: float, K: int, tol: float = DEFAULT_TOL) -> FockVector:
    """Coherent state ``|alpha>`` truncated at ``K``.

    The tail bound is the exact Poisson tail ``P(n > K)`` with mean
    ``alpha**2``; a cutoff whose tail exceeds ``tol`` is rejected.
    """
    K = _check_cutoff(K)
    if alpha < 0 or not math.isfinite(alpha):
        raise ParameterDomainError(f"alpha must be real and >= 0, got {alpha!r}")
    amps = _coherent_amplitudes(alpha, K)
    tail = poisson_tail(K, alpha * alpha) + _roundoff_allowance(amps**2)
    if tail > tol:
        raise CutoffTooSmallError(f"coherent alpha={alpha}: tail {tail:.3g} at K={K} exceeds {tol:.3g}")
    return FockVector(K, _freeze(amps), tail)


def _squeezed_vacuum_amplitudes(r: float, K: int) -> np.ndarray:
    t = math.tanh(r)
    amps = np.zeros(K + 1)
    amps[0] = 1.0 / math.sqrt(math.cosh(r))
    for m in range(K // 2):
        amps[2 * m + 2] = amps[2 * m] * t * math.sqrt((2 * m + 1) / (2 * m + 2))
    return amps


def make_squeezed_vacuum(r: float, K: int, tol: float = DEFAULT_TOL) -> FockVector:
    """Squeezed vacuum ``S(r)|0>`` truncated at ``K``.

    Consecutive even-index probabilities shrink by at least ``tanh(r)**2``,
    which gives the geometric tail bound ``p_last * t^2 / (1 - t^2)``.
    """
    K = _check_cutoff(K)
    if r < 0 or not math.isfinite(r):
        raise ParameterDomainError(f"squeezing r must be real and >= 0, got {r!r}")
    amps = _squeezed_vacuum_amplitudes(r, K)
    t2 = math.tanh(r) ** 2
    p_last = amps[2 * (K // 2)] ** 2
    tail = p_last * t2 / (1.0 - t2) if t2 < 1.0 else math.inf
    tail += _roundoff_allowance(amps**2)
    if tail > tol:
        raise CutoffTooSmallError(f"squeezed vacuum r={r}: tail {tail:.3g} at K={K} exceeds {tol:.3g}")
    return FockVector(K, _freeze(amps), tail)


def _squeezed_coherent_amplitudes(beta: float, r: float, K: int) -> np.ndarray:
    # From [(a - beta) cosh r - (a^dag - beta) sinh r] |beta, r> = 0:
    #   sqrt(n+1) c_{n+1} = beta (1 - t) c_n + t sqrt(n) c_{n-1}
    t = math.tanh(r)
    b = beta * (1.0 - t)
    amps = np.empty(K + 1)
    amps[0] = math.exp(-0.5 * beta * beta * (1.0 - t)) / math.sqrt(math.cosh(r))
    if amps[0] == 0.0:
        raise InfeasibleToleranceError(f"vacuum amplitude underflows for beta={beta}, r={r}")
    if K >= 1:
        amps[1] = b * amps[0]
    for n in range(1, K):
        amps[n + 1] = (b * amps[n] + t * math.sqrt(n) * amps[n - 1]) / math.sqrt(n + 1)
    return amps


def make_squeezed_coherent(beta: float, r: float, K: int, tol: float = DEFAULT_TOL) -> FockVector:
    """Squeezed coherent state ``D(beta) S(r) |0>`` truncated at ``K``.

    The exact state is normalized, so the discarded probability equals the
    normalization deficit of the retained amplitudes.  That deficit (plus a
    rounding allowance) is the reported tail bound.
    """
    K = _check_cutoff(K)
    if beta < 0 or r < 0 or not (math.isfinite(beta) and math.isfinite(r)):
        raise ParameterDomainError(f"need real beta >= 0 and r >= 0, got beta={beta!r}, r={r!r}")
    amps = _squeezed_coherent_amplitudes(beta, r, K)
    probs = amps**2
    tail = max(0.0, 1.0 - math.fsum(probs)) + _roundoff_allowance(probs)
    if tail > tol:
        raise CutoffTooSmallError(
            f"squeezed coherent beta={beta}, r={r}: normalization drift {tail:.3g} at K={K} exceeds {tol:.3g}"
        )
    return FockVector(K, _freeze(amps), tail)


def moments(state: FockVector) -> SingleModeMoments:
    """Photon-number moments by compensated direct summation."""
    p = state.probabilities
    n = np.arange(p.size, dtype=float)
    return SingleModeMoments(
        n_mean=math.fsum(n * p),
        n2_mean=math.fsum(n * n * p),
        a2dag_a2=math.fsum(n * (n - 1.0) * p),
        vac_overlap_sq=float(p[0]),
    )


# -- cutoff selection ------------------------------------------------------
#
# The selected K bounds the *second-moment* tail sum_{n>K} n^2 p_n by
# tol * min(1, <n>^2 / 2).  Since n^2 >= 1 beyond any K >= 0 this also bounds
# the probability tail.  The <n>^2 / 2 factor is a lower bound on <a^2dag a^2>
# for all three continuous families, so weak states keep g2 accurate too.


def _coherent_cutoff(alpha: float, tol: float, ceiling: int) -> int:
    lam = alpha * alpha
    if lam == 0.0:
        return 0
    # sum_{n>K} n^2 p_n = lam^2 P(X > K-2) + lam P(X > K-1)
    for K in range(ceiling + 1):
        if lam * lam * poisson_tail(K - 2, lam) + lam * poisson_tail(K - 1, lam) <= tol:
            return K
    raise InfeasibleToleranceError(f"coherent alpha={alpha}: tol {tol:g} needs cutoff > {ceiling}")


def _squeezed_vacuum_cutoff(r: float, tol: float, ceiling: int) -> int:
    t2 = math.tanh(r) ** 2
    if t2 == 0.0:
        return 0
    if t2 >= 1.0:
        raise InfeasibleToleranceError(f"squeezing r={r} saturates tanh")
    # p_m = |c_{2m}|^2; weighted w_m = (2m)^2 p_m has ratio
    # w_{m+1}/w_m <= q_M = t^2 (2M+1)(M+1) / (2 M^2) for all m >= M.
    p = 1.0 / math.cosh(r)
    for m_last in range(ceiling // 2 + 1):
        M = m_last + 1
        p = p * t2 * (2 * m_last + 1) / (2 * m_last + 2)  # now p_M
        q = t2 * (2 * M + 1) * (M + 1) / (2.0 * M * M)
        if q < 1.0 and 4.0 * M * M * p / (1.0 - q) <= tol:
            return 2 * m_last
    raise InfeasibleToleranceError(f"squeezed vacuum r={r}: tol {tol:g} needs cutoff > {ceiling}")


def _squeezed_coherent_cutoff(beta: float, r: float, tol: float, ceiling: int) -> int:
    if r == 0.0:
        return _coherent_cutoff(beta, tol, ceiling)
    if beta == 0.0:
        return _squeezed_vacuum_cutoff(r, tol, ceiling)
    # No closed-form tail here.  Generate amplitudes well past the target,
    # sum the weighted tail directly, and bound what lies beyond the computed
    # range geometrically with the last observed two-step ratio (ratios decay
    # towards tanh(r)^2 from above, so the last one dominates later ones).
    span = ceiling + 64
    amps = _squeezed_coherent_amplitudes(beta, r, span)
    n = np.arange(span + 1, dtype=float)
    w = n * n * amps**2
    rho = max(w[-1] / w[-3], w[-2] / w[-4]) if w[-3] > 0 and w[-4] > 0 else 0.0
    beyond = (w[-1] + w[-2]) * rho / (1.0 - rho) if rho < 1.0 else math.inf
    suffix = np.cumsum(w[::-1])[::-1]  # suffix[k] = sum_{n >= k} w_n
    for K in range(ceiling + 1):
        if suffix[K + 1] + beyond <= tol:
            return K
    raise InfeasibleToleranceError(f"squeezed coherent beta={beta}, r={r}: tol {tol:g} needs cutoff > {ceiling}")


def _analytic_mean(kind: str, params: Mapping[str, float]) -> float:
    if kind == COHERENT:
        return float(params["alpha"]) ** 2
    if kind == SQUEEZED_VACUUM:
        return math.sinh(float(params["r"])) ** 2
    return float(params["beta"]) ** 2 + math.sinh(float(params["r"])) ** 2


def choose_cutoff(kind: str, params: Mapping[str, float], tol: float, ceiling: int = MAX_CUTOFF) -> int:
    """Smallest cutoff whose weighted tail bound is at most ``tol`` (scaled
    down for states with ``<n> < sqrt(2)``, see above).

    ``params`` keys per kind: fock ``n``; coherent ``alpha``; squeezed_vacuum
    ``r``; squeezed_coherent ``beta`` and ``r``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if kind in (COHERENT, SQUEEZED_VACUUM, SQUEEZED_COHERENT):
        tol = tol * min(1.0, 0.5 * _analytic_mean(kind, params) ** 2)
    if kind == FOCK:
        n = int(params["n"])
        if n > ceiling:
            raise InfeasibleToleranceError(f"Fock |{n}> exceeds cutoff ceiling {ceiling}")
        return n
    if kind == COHERENT:
        return _coherent_cutoff(float(params["alpha"]), tol, ceiling)
    if kind == SQUEEZED_VACUUM:
        return _squeezed_vacuum_cutoff(float(params["r"]), tol, ceiling)
    if kind == SQUEEZED_COHERENT:
        return _squeezed_coherent_cutoff(float(params["beta"]), float(params["r"]), tol, ceiling)
    raise ValueError(f"unknown state kind {kind!r}")


def make_state(kind: str, params: Mapping[str, float], K: int, tol: float = DEFAULT_TOL) -> FockVector:
    if kind == FOCK:
        return make_fock(int(params["n"]), K)
    if kind == COHERENT:
        return make_coherent(float(params["alpha"]), K, tol)
    if kind == SQUEEZED_VACUUM:
        return make_squeezed_vacuum(float(params["r"]), K, tol)
    if kind == SQUEEZED_COHERENT:
        return make_squeezed_coherent(float(params["beta"]), float(params["r"]), K, tol)
    raise ValueError(f"unknown state kind {kind!r}")


def converged_state(kind: str, params: Mapping[str, float], tol: float = DEFAULT_TOL) -> FockVector:
    """State built at ``choose_cutoff(kind, params, tol)``."""
    return make_state(kind, params, choose_cutoff(kind, params, tol), tol)
