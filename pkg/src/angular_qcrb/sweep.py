"""Parameter sweeps, figure presets and machine-readable output."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import QcrbError
from .fock import DEFAULT_TOL
from .loss import (
    LossConfig,
    cq_matrix,
    cq_trace_inverse_exact,
    cq_trace_inverse_largeD,
    delta_opt,
    qcrb_lossy,
    robustness_diagnostics,
)
from .probes import (
    CANONICAL_ORDER,
    EqualSplit,
    MescsConstraint,
    ProbeKind,
    ProbeSpec,
    multimode_moments,
    parse_constraint,
    solve_params_for_nbar,
)
from .qfim import SensingConfig, qcrb_ideal, qfim

AXES = ("nbar_total", "d", "l", "eta")
INTEGER_AXES = ("d", "l")
OUTPUTS = ("ideal", "lossy", "robustness", "g2")
CSV_COLUMNS = ("axis_name", "axis_value", "probe", "quantity", "value", "error_code", "diagnostics_json")
ETA_FLOOR = 0.05


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)
    probes: tuple = CANONICAL_ORDER
    mescs_constraint: MescsConstraint = EqualSplit()
    outputs: tuple = ("ideal",)
    delta: float | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if self.steps == 1 and self.start != self.stop:
            raise ValueError("a single step needs start == stop")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad or not self.outputs:
            raise ValueError(f"outputs must be a nonempty subset of {OUTPUTS}, got {self.outputs!r}")
        object.__setattr__(self, "probes", tuple(ProbeKind(p) for p in self.probes))
        if not self.probes:
            raise ValueError("at least one probe is required")
        missing = [k for k in AXES if k != self.axis and k not in self.fixed]
        if missing:
            raise ValueError(f"fixed values missing for {missing}")
        values = self.axis_values()
        if self.axis in INTEGER_AXES and any(v != round(v) or v < 1 for v in values):
            raise ValueError(f"axis {self.axis} must take positive integer steps, got {values}")
        etas = values if self.axis == "eta" else [self.fixed["eta"]]
        if any(not (0.0 < e <= 1.0) for e in etas):
            raise ValueError("eta values must lie in (0, 1]")
        for k in INTEGER_AXES:
            if k != self.axis and (self.fixed[k] != round(self.fixed[k]) or self.fixed[k] < 1):
                raise ValueError(f"{k} must be a positive integer, got {self.fixed[k]!r}")

    def axis_values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, int(self.steps))]


@dataclass(frozen=True)
class CurvePoint:
    axis_name: str
    axis_value: float
    probe_kind: ProbeKind
    quantity: str
    value: float | None
    error_code: str | None = None
    diagnostics: dict = field(default_factory=dict)


# -- figure presets --------------------------------------------------------

_NBAR = dict(start=1, stop=10, steps=10)
_D = dict(start=2, stop=30, steps=29)
_L = dict(start=1, stop=10, steps=10)

PRESETS = {
    "fig2a": dict(axis="nbar_total", **_NBAR, fixed=dict(l=2, d=15, eta=1.0), outputs=("ideal",)),
    "fig2b": dict(axis="nbar_total", **_NBAR, fixed=dict(l=2, d=15, eta=1.0), outputs=("g2",)),
    "fig3a": dict(axis="d", **_D, fixed=dict(l=2, nbar_total=5, eta=1.0), outputs=("ideal",)),
    "fig3b": dict(axis="l", **_L, fixed=dict(d=15, nbar_total=5, eta=1.0), outputs=("ideal",)),
    "fig5a": dict(axis="eta", start=ETA_FLOOR, stop=1.0, steps=20, fixed=dict(l=2, d=15, nbar_total=5), outputs=("lossy",)),
    "fig5b": dict(axis="nbar_total", **_NBAR, fixed=dict(l=2, d=15, eta=0.7), outputs=("ideal", "lossy")),
    "fig6a": dict(axis="d", **_D, fixed=dict(l=2, nbar_total=5, eta=0.7), outputs=("ideal", "lossy")),
    "fig6b": dict(axis="l", **_L, fixed=dict(d=15, nbar_total=5, eta=0.7), outputs=("ideal", "lossy")),
    "fig7a": dict(axis="d", **_D, fixed=dict(l=2, nbar_total=5, eta=0.7), outputs=("robustness",)),
    "fig7b": dict(axis="l", **_L, fixed=dict(d=10, nbar_total=5, eta=0.7), outputs=("robustness",)),
}


def preset(name: str, **overrides) -> SweepSpec:
    """SweepSpec for a named figure preset; keyword overrides replace fields."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kwargs = dict(PRESETS[name])
    kwargs["fixed"] = dict(kwargs["fixed"])
    kwargs.update(overrides)
    return SweepSpec(**kwargs)


# -- evaluation ------------------------------------------------------------


def _probe_diagnostics(probe: ProbeSpec, mm) -> dict:
    diag = {"params": probe.params, "norm_sq": mm.norm_sq, "nbar_m": mm.nbar_m, "g2_m": mm.g2_m}
    for key in ("g2_printed", "g2_printed_rel_dev", "cutoff"):
        if key in mm.diagnostics:
            diag[key] = mm.diagnostics[key]
    return diag


def _evaluate(quantity: str, probe: ProbeSpec, mm, cfg: SensingConfig, eta: float, delta: float | None) -> tuple[float, dict]:
    if quantity == "g2":
        return mm.g2_m, {}
    if quantity == "ideal":
        return qcrb_ideal(probe, cfg, mm), {}
    if quantity == "lossy":
        if delta is None:
            value = qcrb_lossy(probe, cfg, eta, mm)
            dopt = delta_opt(probe, eta, mm)
            exact = cq_trace_inverse_exact(probe, cfg, LossConfig(eta, dopt), mm)
            return value, {"delta_opt": dopt, "lossy_exact": exact, "exact_minus_approx": exact - value}
        loss = LossConfig(eta, delta)
        value = cq_trace_inverse_largeD(probe, cfg, loss, mm)
        exact = cq_trace_inverse_exact(probe, cfg, loss, mm)
        return value, {"delta": delta, "lossy_exact": exact, "exact_minus_approx": exact - value}
    diag = robustness_diagnostics(probe, cfg, eta, mm)
    return diag["R"], {k: diag[k] for k in ("delta_opt", "R_exact", "lossy", "ideal")}


def evaluate_points(
    kind: ProbeKind,
    axis_name: str,
    axis_value: float,
    values: dict,
    outputs: Sequence[str],
    constraint: MescsConstraint = EqualSplit(),
    delta: float | None = None,
    tol: float = DEFAULT_TOL,
) -> list[CurvePoint]:
    """All requested quantities for one probe at one parameter point."""
    d, l, eta = int(round(values["d"])), int(round(values["l"])), float(values["eta"])

    def failed(exc: QcrbError, quantities) -> list[CurvePoint]:
        return [CurvePoint(axis_name, axis_value, kind, q, None, exc.code, {"message": str(exc)}) for q in quantities]

    try:
        probe = solve_params_for_nbar(kind, values["nbar_total"], d, constraint)
        mm = multimode_moments(probe, tol)
        cfg = SensingConfig(l, d)
    except QcrbError as exc:
        return failed(exc, outputs)
    base = _probe_diagnostics(probe, mm)
    points = []
    for quantity in outputs:
        try:
            value, extra = _evaluate(quantity, probe, mm, cfg, eta, delta)
        except QcrbError as exc:
            points.extend(failed(exc, [quantity]))
            continue
        if not math.isfinite(value):
            points.append(CurvePoint(axis_name, axis_value, kind, quantity, None, "non_finite", {**base, **extra}))
            continue
        points.append(CurvePoint(axis_name, axis_value, kind, quantity, float(value), None, {**base, **extra}))
    return points


def _task(args) -> list[CurvePoint]:
    return evaluate_points(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[CurvePoint]:
    """Evaluate a sweep.  Output order is axis-major, then probe in canonical
    order, then quantity in the order requested, whatever ``jobs`` is."""
    probes = [k for k in CANONICAL_ORDER if k in spec.probes]
    tasks = []
    for x in spec.axis_values():
        values = dict(spec.fixed)
        values[spec.axis] = x
        for kind in probes:
            tasks.append((kind, spec.axis, x, values, spec.outputs, spec.mescs_constraint, spec.delta, spec.tol))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    return [p for chunk in chunks for p in chunk]


def point_record(probe: ProbeSpec, cfg: SensingConfig, eta: float | None = None, delta: float | None = None, tol: float = DEFAULT_TOL) -> dict:
    """One-shot evaluation with every intermediate quantity."""
    mm = multimode_moments(probe, tol)
    F = qfim(probe, cfg, mm)
    rec = {
        "probe": str(probe.kind),
        "params": probe.params,
        "d": cfg.d,
        "l": cfg.l,
        "norm_sq": mm.norm_sq,
        "nbar_m": mm.nbar_m,
        "nbar_total": mm.nbar_total,
        "g2_m": mm.g2_m,
        "qfim_a": F.a,
        "qfim_b": F.b,
        "ideal": qcrb_ideal(probe, cfg, mm),
        "moment_diagnostics": mm.diagnostics,
    }
    if eta is not None:
        dopt = delta_opt(probe, eta, mm)
        use = dopt if delta is None else delta
        loss = LossConfig(eta, use)
        rec.update(eta=eta, delta_opt=dopt, delta=use)
        cq = cq_matrix(probe, cfg, loss, mm)
        rec.update(cq_a=cq.a, cq_b=cq.b)
        rec["lossy_exact"] = cq_trace_inverse_exact(probe, cfg, loss, mm)
        rec["lossy_approx"] = cq_trace_inverse_largeD(probe, cfg, loss, mm) if cfg.d >= 2 else None
        if cfg.d >= 2:
            rec["lossy"] = qcrb_lossy(probe, cfg, eta, mm)
            rec["robustness"] = rec["lossy"] - rec["ideal"]
    return rec


# -- output ----------------------------------------------------------------


def _num(x: float) -> str:
    return f"{x:.16e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, ProbeKind):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def write_csv(points: Iterable[CurvePoint], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow(
            [
                p.axis_name,
                _num(p.axis_value),
                p.probe_kind.value,
                p.quantity,
                "" if p.value is None else _num(p.value),
                p.error_code or "",
                dumps(p.diagnostics),
            ]
        )


def write_jsonl(points: Iterable[CurvePoint], fh: IO[str]) -> None:
    for p in points:
        fh.write(
            dumps(
                {
                    "axis_name": p.axis_name,
                    "axis_value": p.axis_value,
                    "probe": p.probe_kind,
                    "quantity": p.quantity,
                    "value": p.value,
                    "error_code": p.error_code,
                    "diagnostics": p.diagnostics,
                }
            )
            + "\n"
        )


def spec_from_mapping(cfg: dict) -> SweepSpec:
    """Build a SweepSpec from flat config keys (as used by the CLI / JSON config)."""
    axis = cfg["axis"]
    fixed = {k: float(cfg[k]) for k in ("nbar_total", "d", "l", "eta") if k != axis and cfg.get(k) is not None}
    kw = dict(axis=axis, start=float(cfg["start"]), stop=float(cfg["stop"]), steps=int(cfg["steps"]), fixed=fixed)
    if cfg.get("probes"):
        kw["probes"] = tuple(cfg["probes"])
    if cfg.get("outputs"):
        kw["outputs"] = tuple(cfg["outputs"])
    if cfg.get("mescs_constraint"):
        kw["mescs_constraint"] = parse_constraint(cfg["mescs_constraint"])
    if cfg.get("delta") is not None:
        kw["delta"] = float(cfg["delta"])
    if cfg.get("tol") is not None:
        kw["tol"] = float(cfg["tol"])
    return SweepSpec(**kw)


__all__ = [
    "AXES",
    "CSV_COLUMNS",
    "CurvePoint",
    "PRESETS",
    "SweepSpec",
    "evaluate_points",
    "point_record",
    "preset",
    "run_sweep",
    "spec_from_mapping",
    "write_csv",
    "write_jsonl",
]
