"""Balanced (d+1)-mode NOON-like probe states.

Each probe is ``N * sum_m |0>...|psi>_m...|0>`` with one of four single-mode
states ``|psi>``: Fock (MNOONS), coherent (MECS), squeezed vacuum (MESVS) or
squeezed coherent (MESCS).  Cross terms of the superposition vanish under
``n_m`` and ``a_m^dag^2 a_m^2``, so every per-mode moment is ``N^2`` times the
single-mode moment of ``|psi>``.

The published closed forms for the squeezed families' ``g2`` carry a bare
additive constant (``+4`` and ``+2``) where the algebra gives ``4 N^2`` and
``2 N^2``.  Both versions are evaluated here; the Fock-space oracle decides.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

from . import fock
from .errors import InfeasibleError, NotRepresentableError, ParameterDomainError


class ProbeKind(str, enum.Enum):
    MNOONS = "MNOONS"
    MECS = "MECS"
    MESVS = "MESVS"
    MESCS = "MESCS"

    def __str__(self) -> str:
        return self.value


CANONICAL_ORDER = (ProbeKind.MNOONS, ProbeKind.MECS, ProbeKind.MESVS, ProbeKind.MESCS)

PARAM_NAMES = {
    ProbeKind.MNOONS: ("N",),
    ProbeKind.MECS: ("alpha",),
    ProbeKind.MESVS: ("r1",),
    ProbeKind.MESCS: ("beta", "r2"),
}


@dataclass(frozen=True)
class ProbeSpec:
    """Probe family, its single-mode parameters and the number ``d`` of
    estimated angular displacements (``d + 1`` modes in total).

    Use the named constructors; ``values`` follows ``PARAM_NAMES[kind]``.
    """

    kind: ProbeKind
    d: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        if int(self.d) != self.d or self.d < 1:
            raise ParameterDomainError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        names = PARAM_NAMES[self.kind]
        if len(self.values) != len(names):
            raise ParameterDomainError(f"{self.kind} expects parameters {names}, got {self.values!r}")
        vals = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterDomainError(f"non-finite parameter in {vals!r}")
        if self.kind is ProbeKind.MNOONS:
            if vals[0] != int(vals[0]) or vals[0] < 1:
                raise ParameterDomainError(f"MNOONS needs a positive integer N, got {self.values[0]!r}")
        elif self.kind is ProbeKind.MESCS:
            beta, r2 = vals
            if beta < 0 or r2 < 0 or (beta == 0 and r2 == 0):
                raise ParameterDomainError(f"MESCS needs beta >= 0, r2 >= 0, not both zero; got {vals!r}")
        elif vals[0] <= 0:
            raise ParameterDomainError(f"{self.kind} needs a positive {names[0]}, got {vals[0]!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def mnoons(cls, N: int, d: int) -> "ProbeSpec":
        return cls(ProbeKind.MNOONS, d, (N,))

    @classmethod
    def mecs(cls, alpha: float, d: int) -> "ProbeSpec":
        return cls(ProbeKind.MECS, d, (alpha,))

    @classmethod
    def mesvs(cls, r1: float, d: int) -> "ProbeSpec":
        return cls(ProbeKind.MESVS, d, (r1,))

    @classmethod
    def mescs(cls, beta: float, r2: float, d: int) -> "ProbeSpec":
        return cls(ProbeKind.MESCS, d, (beta, r2))

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES[self.kind], self.values))

    def with_d(self, d: int) -> "ProbeSpec":
        return ProbeSpec(self.kind, d, self.values)

    def single_mode(self) -> tuple[str, dict[str, float]]:
        """The ``fock`` module kind and parameters of ``|psi>``."""
        v = self.values
        if self.kind is ProbeKind.MNOONS:
            return fock.FOCK, {"n": int(v[0])}
        if self.kind is ProbeKind.MECS:
            return fock.COHERENT, {"alpha": v[0]}
        if self.kind is ProbeKind.MESVS:
            return fock.SQUEEZED_VACUUM, {"r": v[0]}
        return fock.SQUEEZED_COHERENT, {"beta": v[0], "r": v[1]}


@dataclass(frozen=True)
class MultimodeMoments:
    """Per-mode photon statistics of a probe.

    ``nbar_m`` and ``n2_m`` are ``<n_m>`` and ``<n_m^2>`` on any one mode,
    ``g2_m`` the intramode correlation and ``nbar_total = (d+1) nbar_m``.
    """

    norm_sq: float
    nbar_m: float
    n2_m: float
    g2_m: float
    nbar_total: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def a2dag_a2_m(self) -> float:
        return self.n2_m - self.nbar_m


def normalization_from_overlap(vac_overlap_sq: float, d: int) -> float:
    """``N^2 = 1 / ((1+d)(1 + d |<psi|0>|^2))`` for any single-mode state."""
    return 1.0 / ((1.0 + d) * (1.0 + d * vac_overlap_sq))


def vacuum_overlap_sq(probe: ProbeSpec) -> float:
    """Closed-form ``|<psi|0>|^2``."""
    v = probe.values
    if probe.kind is ProbeKind.MNOONS:
        return 0.0
    if probe.kind is ProbeKind.MECS:
        return math.exp(-v[0] ** 2)
    if probe.kind is ProbeKind.MESVS:
        return 1.0 / math.cosh(v[0])
    beta, r2 = v
    return math.exp(-beta * beta * (1.0 - math.tanh(r2))) / math.cosh(r2)


def normalization_sq(probe: ProbeSpec) -> float:
    """Squared normalization factor ``N^2`` of the probe, in closed form."""
    return normalization_from_overlap(vacuum_overlap_sq(probe), probe.d)


def single_mode_nbar(probe: ProbeSpec) -> float:
    v = probe.values
    if probe.kind is ProbeKind.MNOONS:
        return v[0]
    if probe.kind is ProbeKind.MECS:
        return v[0] ** 2
    if probe.kind is ProbeKind.MESVS:
        return math.sinh(v[0]) ** 2
    return v[0] ** 2 + math.sinh(v[1]) ** 2


def closed_form_moments(probe: ProbeSpec, printed: bool = False) -> tuple[float, float]:
    """Per-state closed forms ``(nbar_m, g2_m)``.

    For MESVS and MESCS, ``printed=True`` evaluates the published expression
    with its bare additive constant; the default scales that constant by
    ``N^2``, which is what the operator algebra gives.
    """
    n2 = normalization_sq(probe)
    nbar = n2 * single_mode_nbar(probe)
    v = probe.values
    if probe.kind is ProbeKind.MNOONS:
        return nbar, (v[0] - 1.0) / nbar
    if probe.kind is ProbeKind.MECS:
        return nbar, 1.0 / n2
    const_scale = 1.0 if printed else n2
    if probe.kind is ProbeKind.MESVS:
        r = v[0]
        num = n2 * (3.0 * math.cosh(2 * r) - 7.0) * math.cosh(r) ** 2 + 4.0 * const_scale
        return nbar, num / (2.0 * nbar**2)
    beta, r = v
    z1 = beta**2 * math.sinh(2 * r) + (2 * beta**2 - 1.0) * math.cosh(2 * r)
    z2 = 0.375 * math.cosh(4 * r) + beta**4 - 2 * beta**2 - 1.375
    return nbar, (n2 * (z1 + z2) + 2.0 * const_scale) / nbar**2


def _from_nbar_g2(norm_sq: float, nbar: float, g2: float, d: int, **diagnostics) -> MultimodeMoments:
    return MultimodeMoments(
        norm_sq=norm_sq,
        nbar_m=nbar,
        n2_m=nbar * nbar * g2 + nbar,
        g2_m=g2,
        nbar_total=(d + 1) * nbar,
        diagnostics=diagnostics,
    )


@lru_cache(maxsize=4096)
def _oracle_single_mode(kind: str, items: tuple, tol: float) -> tuple[fock.SingleModeMoments, int, float]:
    params = dict(items)
    state = fock.converged_state(kind, params, tol)
    return fock.moments(state), state.cutoff, state.tail_mass


def multimode_moments_oracle(probe: ProbeSpec, tol: float = fock.DEFAULT_TOL) -> MultimodeMoments:
    """Per-mode moments from a converged truncated Fock vector of ``|psi>``.

    ``N^2`` comes from the generic overlap formula with the oracle's vacuum
    overlap, then ``nbar_m = N^2 <n>_psi`` and ``n2_m = N^2 <n^2>_psi``.
    """
    if not tol >= 1e-14:
        raise ValueError(f"oracle tolerance must be >= 1e-14, got {tol!r}")
    kind, params = probe.single_mode()
    sm, cutoff, tail = _oracle_single_mode(kind, tuple(sorted(params.items())), float(tol))
    norm_sq = normalization_from_overlap(sm.vac_overlap_sq, probe.d)
    nbar = norm_sq * sm.n_mean
    return MultimodeMoments(
        norm_sq=norm_sq,
        nbar_m=nbar,
        n2_m=norm_sq * sm.n2_mean,
        g2_m=norm_sq * sm.a2dag_a2 / nbar**2,
        nbar_total=(probe.d + 1) * nbar,
        diagnostics={"source": "oracle", "cutoff": cutoff, "tail_mass": tail},
    )


def closed_form_multimode_moments(probe: ProbeSpec) -> MultimodeMoments:
    """Moments from the closed forms alone (corrected ``g2`` for the squeezed
    kinds).  Needs no Fock cutoff, so it also covers states whose oracle
    would exceed the cutoff ceiling."""
    nbar, g2 = closed_form_moments(probe)
    return _from_nbar_g2(normalization_sq(probe), nbar, g2, probe.d, source="closed_form")


def multimode_moments(probe: ProbeSpec, tol: float = fock.DEFAULT_TOL) -> MultimodeMoments:
    """Per-mode moments used by every bound in the package.

    MNOONS and MECS use their closed forms.  For MESVS and MESCS the values
    are the oracle's; the printed and corrected closed forms are evaluated
    too and their relative deviations from the oracle ``g2`` are reported in
    ``diagnostics``.
    """
    if probe.kind in (ProbeKind.MNOONS, ProbeKind.MECS):
        return closed_form_multimode_moments(probe)
    ref = multimode_moments_oracle(probe, tol)
    _, g2_printed = closed_form_moments(probe, printed=True)
    _, g2_corrected = closed_form_moments(probe, printed=False)
    diag = dict(ref.diagnostics)
    diag.update(
        g2_printed=g2_printed,
        g2_printed_rel_dev=(g2_printed - ref.g2_m) / ref.g2_m,
        g2_corrected_rel_dev=(g2_corrected - ref.g2_m) / ref.g2_m,
    )
    return MultimodeMoments(ref.norm_sq, ref.nbar_m, ref.n2_m, ref.g2_m, ref.nbar_total, diag)


def total_mean_photons(probe: ProbeSpec) -> float:
    """Total mean photon number ``sum_m <n_m> = (d+1) nbar_m`` (closed form)."""
    return (probe.d + 1) * normalization_sq(probe) * single_mode_nbar(probe)


# -- parameter inversion ---------------------------------------------------


@dataclass(frozen=True)
class EqualSplit:
    """MESCS with ``beta^2 = sinh(r2)^2``: photons split evenly between
    displacement and squeezing.  Solved variable: ``r2``."""

    def build(self, x: float, d: int) -> ProbeSpec:
        return ProbeSpec.mescs(math.sinh(x), x, d)

    def __str__(self) -> str:
        return "equal_split"


@dataclass(frozen=True)
class FixedR2:
    """MESCS at fixed squeezing; solved variable: ``beta``."""

    value: float

    def build(self, x: float, d: int) -> ProbeSpec:
        return ProbeSpec.mescs(x, self.value, d)

    def __str__(self) -> str:
        return f"fixed_r2:{self.value!r}"


@dataclass(frozen=True)
class FixedBeta:
    """MESCS at fixed displacement; solved variable: ``r2``."""

    value: float

    def build(self, x: float, d: int) -> ProbeSpec:
        return ProbeSpec.mescs(self.value, x, d)

    def __str__(self) -> str:
        return f"fixed_beta:{self.value!r}"


MescsConstraint = EqualSplit | FixedR2 | FixedBeta


def parse_constraint(text: str) -> MescsConstraint:
    """Parse ``equal_split``, ``fixed_r2:<value>`` or ``fixed_beta:<value>``."""
    name, _, arg = text.partition(":")
    name = name.strip()
    if name == "equal_split" and not arg:
        return EqualSplit()
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad MESCS constraint {text!r}") from None
    if value < 0:
        raise ValueError(f"constraint value must be >= 0, got {value}")
    if name == "fixed_r2":
        return FixedR2(value)
    if name == "fixed_beta":
        return FixedBeta(value)
    raise ValueError(f"bad MESCS constraint {text!r}")


_PARAM_CEILING = {ProbeKind.MECS: 1e4, ProbeKind.MESVS: 50.0, ProbeKind.MESCS: 50.0}
_MAX_ITER = 200
_RESIDUAL = 1e-12


def _bisect_increasing(f, lo: float, hi: float) -> float:
    flo = f(lo)
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= _RESIDUAL or mid in (lo, hi):
            return mid if abs(fm) <= abs(flo) else lo
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_params_for_nbar(
    kind: ProbeKind | str,
    nbar_target: float,
    d: int,
    constraint: MescsConstraint | None = None,
) -> ProbeSpec:
    """Probe of the given family whose total mean photon number is ``nbar_target``.

    Bisection on the monotone map parameter -> N, on a bracket doubled from an
    initial guess.  MNOONS targets must be integers.  ``constraint`` selects
    the MESCS one-parameter slice (default ``EqualSplit()``).
    """
    kind = ProbeKind(kind)
    if not nbar_target > 0 or not math.isfinite(nbar_target):
        raise ParameterDomainError(f"target mean photon number must be positive, got {nbar_target!r}")
    if kind is ProbeKind.MNOONS:
        N = round(nbar_target)
        if abs(nbar_target - N) > 1e-12 or N < 1:
            raise NotRepresentableError(f"MNOONS needs an integer photon number, got {nbar_target!r}")
        return ProbeSpec.mnoons(N, d)

    if kind is ProbeKind.MECS:
        build = lambda x: ProbeSpec.mecs(x, d)  # noqa: E731
    elif kind is ProbeKind.MESVS:
        build = lambda x: ProbeSpec.mesvs(x, d)  # noqa: E731
    else:
        c = constraint if constraint is not None else EqualSplit()
        build = lambda x: c.build(x, d)  # noqa: E731

    def residual(x: float) -> float:
        if x == 0.0:
            # alpha = 0 / r = 0 are excluded from ProbeSpec; evaluate the limit
            try:
                return total_mean_photons(build(0.0)) - nbar_target
            except ParameterDomainError:
                return -nbar_target
        return total_mean_photons(build(x)) - nbar_target

    ceiling = _PARAM_CEILING[kind]
    if residual(0.0) >= 0:
        raise InfeasibleError(f"{kind} {constraint or ''}: target {nbar_target} is below the constraint's minimum")
    lo, hi = 0.0, 1.0
    while residual(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > ceiling:
            raise InfeasibleError(f"{kind}: no bracket for target {nbar_target} below parameter {ceiling}")
    x = _bisect_increasing(residual, lo, hi)
    if abs(residual(x)) > 1e-10 * max(1.0, nbar_target):
        raise InfeasibleError(f"{kind}: bisection stalled at residual {residual(x):.3g}")
    return build(x)
