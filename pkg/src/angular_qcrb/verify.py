"""Cross-check suite: every closed form against an independent route.

Each check family reports the worst relative deviation it saw and a status:
``pass``/``fail`` against its tolerance, or ``documented`` for known,
expected discrepancies that are reported rather than enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import InfeasibleToleranceError, QcrbError
from .loss import (
    LossConfig,
    cq_trace_inverse_dense,
    cq_trace_inverse_exact,
    cq_trace_inverse_largeD,
    delta_argmax,
    delta_opt,
    kraus_completeness_deviation,
    kraus_generators,
    qcrb_lossy,
)
from .probes import (
    CANONICAL_ORDER,
    ProbeKind,
    closed_form_moments,
    closed_form_multimode_moments,
    multimode_moments,
    multimode_moments_oracle,
    normalization_from_overlap,
    normalization_sq,
    solve_params_for_nbar,
    total_mean_photons,
)
from .qfim import SensingConfig, qcrb_ideal, qfim, trace_inverse_dense, trace_inverse_structured

DEFAULT_TOLERANCES = {
    "oracle_vs_closed_form": 1e-9,
    "normalization": 1e-10,
    "dense_vs_structured": 1e-10,
    "eq7_identity": 1e-12,
    "lossless_consistency": 1e-10,
    "delta_opt_vs_argmax": 1e-5,
    "delta_opt_value": 1e-9,
    "eq17_reconstruction": 1e-10,
    "kraus_completeness": 1e-12,
    "kraus_reduction": 1e-12,
    "roundtrip_solver": 1e-10,
    "truncation_convergence": 1e-11,
}

PROFILES = {
    "default": DEFAULT_TOLERANCES,
    "tight": {k: 1e-13 for k in DEFAULT_TOLERANCES},
}


@dataclass(frozen=True)
class VerifyGrid:
    nbar: tuple = tuple(range(1, 11))
    d: tuple = (1, 5, 15)
    dense_d: tuple = (1, 2, 5, 15, 50, 200)
    etas: tuple = (0.3, 0.5, 0.7, 0.9)
    dense_nbar: float = 5
    l: int = 2

    @property
    def empty(self) -> bool:
        return not self.nbar or not self.d


@dataclass
class Family:
    name: str
    tol: float | None
    documented: bool = False
    worst: float = 0.0
    checks: int = 0
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, deviation: float, label: str, tol: float | None = None) -> None:
        tol = self.tol if tol is None else tol
        self.checks += 1
        if not math.isfinite(deviation):
            deviation = math.inf
        self.worst = max(self.worst, deviation)
        if tol is not None and deviation > tol and not self.documented:
            self.failures.append(f"{label}: {deviation:.3e}")

    def error(self, label: str, exc: Exception) -> None:
        self.checks += 1
        self.failures.append(f"{label}: {type(exc).__name__}: {exc}")

    def report(self) -> dict:
        status = "documented" if self.documented else ("fail" if self.failures else "pass")
        out = {"family": self.name, "status": status, "worst": self.worst, "tol": self.tol, "checks": self.checks}
        if self.failures:
            out["failures"] = self.failures[:20]
        if self.notes:
            out["notes"] = self.notes[:20]
        return out


def rel(x: float, y: float) -> float:
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def _probes(grid: VerifyGrid):
    for kind in CANONICAL_ORDER:
        for nbar in grid.nbar:
            for d in grid.d:
                label = f"{kind} nbar={nbar} d={d}"
                yield kind, nbar, d, label


def verify(profile: str | dict = "default", grid: VerifyGrid | None = None) -> dict:
    """Run every cross-check; returns a JSON-ready report."""
    tols = dict(PROFILES[profile]) if isinstance(profile, str) else {**DEFAULT_TOLERANCES, **profile}
    grid = grid or VerifyGrid()
    if grid.empty:
        return {"passed": True, "families": [], "tolerances": tols}

    fam = {
        name: Family(name, tols.get(name))
        for name in (
            "oracle_vs_closed_form",
            "normalization",
            "dense_vs_structured",
            "eq7_identity",
            "lossless_consistency",
            "delta_opt_vs_argmax",
            "eq17_reconstruction",
            "kraus_completeness",
            "kraus_reduction",
            "roundtrip_solver",
            "truncation_convergence",
        )
    }
    printed = Family("a2_printed_vs_oracle", None, documented=True)
    anchors = Family("delta_opt_physical_anchors", None, documented=True)
    unit = Family("delta_opt_outside_unit_interval", None, documented=True)

    for kind, nbar, d, label in _probes(grid):
        try:
            probe = solve_params_for_nbar(kind, nbar, d)
        except QcrbError as exc:
            fam["roundtrip_solver"].error(label, exc)
            continue
        fam["roundtrip_solver"].record(abs(total_mean_photons(probe) - nbar), label)
        try:
            oracle = multimode_moments_oracle(probe)
        except QcrbError as exc:
            fam["oracle_vs_closed_form"].error(label, exc)
            continue
        fam["normalization"].record(rel(normalization_sq(probe), oracle.norm_sq), label)
        nb, g2 = closed_form_moments(probe)
        fam["oracle_vs_closed_form"].record(rel(nb, oracle.nbar_m), label + " nbar")
        fam["oracle_vs_closed_form"].record(rel(g2, oracle.g2_m), label + " g2")
        if kind in (ProbeKind.MESVS, ProbeKind.MESCS):
            _, g2p = closed_form_moments(probe, printed=True)
            printed.record(rel(g2p, oracle.g2_m), label)

        # truncation convergence: doubled cutoff
        sm_kind, params = probe.single_mode()
        K = fock.choose_cutoff(sm_kind, params, fock.DEFAULT_TOL)
        if 2 * K <= fock.MAX_CUTOFF and K > 0:
            a = fock.moments(fock.make_state(sm_kind, params, K))
            b = fock.moments(fock.make_state(sm_kind, params, 2 * K))
            for x, y in ((a.n_mean, b.n_mean), (a.n2_mean, b.n2_mean)):
                fam["truncation_convergence"].record(abs(x - y) / max(1.0, abs(y)), label)

        mm = multimode_moments(probe)
        cfg = SensingConfig(grid.l, d)
        F = qfim(probe, cfg, mm)
        ideal = qcrb_ideal(probe, cfg, mm)
        fam["eq7_identity"].record(rel(ideal, trace_inverse_structured(F)), label)
        if d < 2:
            continue
        for delta in (-1.0, -0.5, 0.0):
            fam["lossless_consistency"].record(rel(cq_trace_inverse_exact(probe, cfg, LossConfig(1.0, delta), mm), ideal), label)
        for eta in grid.etas:
            dopt = delta_opt(probe, eta, mm)
            anchors.record(0.0 if -1.0 <= dopt <= 0.0 else 1.0, label)
            if not -1.0 <= dopt <= 0.0 and len(anchors.notes) < 20:
                anchors.notes.append(f"{label} eta={eta}: delta_opt={dopt:.6g}")
            unit.record(0.0 if -1.0 <= dopt <= 1.0 else 1.0, label)
            if dopt > 1.0 and len(unit.notes) < 20:
                unit.notes.append(f"{label} eta={eta}: delta_opt={dopt:.6g} > 1")
            # search window always contains delta_opt: 1 + delta_opt < 1 / (1 - eta)
            hi = max(1.0, eta / (1.0 - eta)) if eta < 1 else 1.0
            arg, best = delta_argmax(probe, cfg, eta, bounds=(-1.0, hi), moments=mm)
            at_opt = cq_trace_inverse_largeD(probe, cfg, LossConfig(eta, dopt), mm)
            f = fam["delta_opt_vs_argmax"]
            f.record(abs(arg - dopt), f"{label} eta={eta} argmax")
            f.record(rel(at_opt, best), f"{label} eta={eta} value", tols["delta_opt_value"])
            fam["eq17_reconstruction"].record(rel(qcrb_lossy(probe, cfg, eta, mm), at_opt), f"{label} eta={eta}")

    dense = fam["dense_vs_structured"]
    for kind in CANONICAL_ORDER:
        for d in grid.dense_d:
            label = f"{kind} nbar={grid.dense_nbar} d={d}"
            try:
                probe = solve_params_for_nbar(kind, grid.dense_nbar, d)
                try:
                    mm = multimode_moments(probe)
                except InfeasibleToleranceError:
                    # the algebra check does not care where the moments come from
                    mm = closed_form_multimode_moments(probe)
                    dense.notes.append(f"{label}: oracle beyond cutoff ceiling, closed-form moments used")
                cfg = SensingConfig(grid.l, d)
                F = qfim(probe, cfg, mm)
                dense.record(rel(trace_inverse_structured(F), trace_inverse_dense(F)), label)
                if d >= 2:
                    loss = LossConfig(0.7, delta_opt(probe, 0.7, mm))
                    dense.record(
                        rel(cq_trace_inverse_exact(probe, cfg, loss, mm), cq_trace_inverse_dense(probe, cfg, loss, mm)), label + " C_Q"
                    )
            except QcrbError as exc:
                dense.error(label, exc)

    for eta in (0.5, 0.3, 0.9):
        fam["kraus_completeness"].record(kraus_completeness_deviation(eta, cutoff=4), f"eta={eta}")
        for delta in (-1.0, -0.5, 0.0, 0.7):
            gam, lam = kraus_generators(eta, delta, cutoff=4, l=2)
            chi = 1 - (1 + delta) * (1 - eta)
            gma = eta * (1 - eta) * (1 + delta) ** 2
            n = np.diag(np.arange(5.0))
            dev = max(np.max(np.abs(gam - 4 * chi * n)), np.max(np.abs(lam - 16 * (chi**2 * n @ n + gma * n))))
            fam["kraus_reduction"].record(float(dev) / 16.0, f"eta={eta} delta={delta}")

    families = [f.report() for f in fam.values()] + [printed.report(), anchors.report(), unit.report()]
    return {
        "passed": all(f["status"] != "fail" for f in families),
        "families": families,
        "tolerances": tols,
    }
