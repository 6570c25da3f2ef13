"""Experiment orchestration: ensemble runs, class comparisons, kappa sweeps.

Each ensemble generates `circuit_count` circuits from consecutive seeds
(base_seed + k), compresses every circuit at the configured ratio, classifies
the outcome as robust or fragile, and aggregates class-level statistics.
Circuits are processed independently (optionally across processes) and the
records are always assembled in seed order, so reports are deterministic
regardless of scheduling.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import IO, Callable, Iterable, Sequence

from . import stats as st
from .circuits import Axis, Circuit, GenerationParams, circuit_depth, generate_uniform
from .errors import InvalidParameterError, NoTransitionError, UndefinedStatisticError
from .pruning import RiskThresholds, aware_prune, causal_prune, importance_profile
from .stats import AngleStats, AxisAngleStats, ClassLabel

__all__ = [
    "EnsembleConfig",
    "CircuitRecord",
    "ClassSummary",
    "FingerprintEntry",
    "CorrelationSummary",
    "EnsembleReport",
    "SweepConfig",
    "SweepPoint",
    "SweepResult",
    "run_ensemble",
    "kappa_sweep",
    "sweep_grid",
    "compare_classes",
    "report_to_dict",
    "report_from_dict",
    "write_records_csv",
    "RECORD_CSV_COLUMNS",
]

PRUNING_MODES = ("causal", "aware")

# Seed offset separating sweep probe circuits from main-ensemble circuits.
SWEEP_SEED_OFFSET = 10_000
SWEEP_SEED_STRIDE = 100


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    alpha: float
    rho: float
    kappa: float
    circuit_count: int = 100
    base_seed: int = 0
    classify_threshold: float = st.DEFAULT_CLASSIFY_THRESHOLD
    small_angle_threshold: float = st.DEFAULT_SMALL_ANGLE_THRESHOLD
    pruning_mode: str = "causal"

    def __post_init__(self) -> None:
        GenerationParams(self.n, self.alpha, self.rho, self.base_seed)  # validates n/alpha/rho/seed
        if self.circuit_count < 2:
            raise InvalidParameterError(f"circuit_count must be >= 2, got {self.circuit_count}")
        if not 0.0 < self.kappa < 1.0:
            raise InvalidParameterError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.pruning_mode not in PRUNING_MODES:
            raise InvalidParameterError(f"pruning_mode must be one of {PRUNING_MODES}, got {self.pruning_mode!r}")

    def seed_for(self, k: int) -> int:
        return self.base_seed + k


@dataclass(frozen=True)
class CircuitRecord:
    """One circuit's row in an ensemble report."""

    seed: int
    gate_count: int
    depth: int
    fidelity: float
    label: ClassLabel
    angle_stats: AngleStats
    angle_importance_r: float | None
    importance_entropy: float | None
    importance_gini: float | None


@dataclass(frozen=True)
class ClassSummary:
    count: int
    fraction: float
    mean_fidelity: float | None


@dataclass(frozen=True)
class FingerprintEntry:
    robust_mean: float | None
    fragile_mean: float | None
    p_value: float | None


@dataclass(frozen=True)
class CorrelationSummary:
    robust_mean_r: float | None
    fragile_mean_r: float | None
    p_value: float | None


@dataclass(frozen=True)
class EnsembleReport:
    config: EnsembleConfig
    records: tuple[CircuitRecord, ...]
    class_summary: dict[str, ClassSummary]
    fidelity_gap: float | None
    cohens_d_fidelity: float | None
    angle_fingerprint: dict[str, FingerprintEntry]
    per_axis_p: dict[str, float | None]
    correlation_summary: CorrelationSummary


def _prune_circuit(circuit: Circuit, kappa: float, mode: str, small_angle_threshold: float,
                   max_qubits: int | None, profile=None):
    if mode == "aware":
        thresholds = RiskThresholds(small_angle=small_angle_threshold)
        return aware_prune(circuit, kappa, thresholds=thresholds, profile=profile, max_qubits=max_qubits)
    return causal_prune(circuit, kappa, profile=profile, max_qubits=max_qubits)


def _build_record(config: EnsembleConfig, max_qubits: int | None, k: int) -> CircuitRecord:
    seed = config.seed_for(k)
    circuit = generate_uniform(GenerationParams(config.n, config.alpha, config.rho, seed))
    profile = importance_profile(circuit, max_qubits)
    result = _prune_circuit(circuit, config.kappa, config.pruning_mode,
                            config.small_angle_threshold, max_qubits, profile)
    angle_summary = st.angle_stats(circuit, config.small_angle_threshold)
    try:
        correlation = st.angle_importance_r(circuit, profile)
    except UndefinedStatisticError:
        correlation = None
    try:
        entropy = st.shannon_entropy(profile)
        concentration = st.gini(profile)
    except UndefinedStatisticError:
        entropy = None
        concentration = None
    return CircuitRecord(
        seed=seed,
        gate_count=len(circuit.gates),
        depth=circuit_depth(circuit),
        fidelity=result.fidelity,
        label=st.classify(result.fidelity, config.classify_threshold),
        angle_stats=angle_summary,
        angle_importance_r=correlation,
        importance_entropy=entropy,
        importance_gini=concentration,
    )


def _parallel_map(fn: Callable, items: Sequence, threads: int | None) -> list:
    """Order-preserving map, optionally across worker processes."""
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(threads, len(items))
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _mean_or_none(values: Sequence[float]) -> float | None:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return float(sum(values)) / len(values)


def _welch_p_or_none(a: Sequence[float], b: Sequence[float]) -> float | None:
    a = [v for v in a if v is not None]
    b = [v for v in b if v is not None]
    if len(a) < 2 or len(b) < 2:
        return None
    try:
        return st.welch_t_test(a, b).p_value
    except UndefinedStatisticError:
        return None


def _aggregate(config: EnsembleConfig, records: Sequence[CircuitRecord]) -> EnsembleReport:
    robust = [r for r in records if r.label is ClassLabel.ROBUST]
    fragile = [r for r in records if r.label is ClassLabel.FRAGILE]
    total = len(records)

    class_summary = {}
    for name, group in (("robust", robust), ("fragile", fragile)):
        class_summary[name] = ClassSummary(
            count=len(group),
            fraction=len(group) / total,
            mean_fidelity=_mean_or_none([r.fidelity for r in group]),
        )

    gap = None
    if robust and fragile:
        gap = st.fidelity_gap([r.fidelity for r in robust], [r.fidelity for r in fragile])
    try:
        effect = st.cohens_d([r.fidelity for r in robust], [r.fidelity for r in fragile]) \
            if len(robust) >= 2 and len(fragile) >= 2 else None
    except UndefinedStatisticError:
        effect = None

    fingerprint = {}
    for field in ("mean_theta", "std_theta", "small_angle_ratio"):
        rv = [getattr(r.angle_stats, field) for r in robust]
        fv = [getattr(r.angle_stats, field) for r in fragile]
        fingerprint[field] = FingerprintEntry(
            robust_mean=_mean_or_none(rv),
            fragile_mean=_mean_or_none(fv),
            p_value=_welch_p_or_none(rv, fv),
        )

    per_axis_p = {}
    for axis in Axis:
        rv = [r.angle_stats.per_axis[axis].mean for r in robust]
        fv = [r.angle_stats.per_axis[axis].mean for r in fragile]
        per_axis_p[axis.value] = _welch_p_or_none(rv, fv)

    rr = [r.angle_importance_r for r in robust]
    fr = [r.angle_importance_r for r in fragile]
    correlation = CorrelationSummary(
        robust_mean_r=_mean_or_none(rr),
        fragile_mean_r=_mean_or_none(fr),
        p_value=_welch_p_or_none(rr, fr),
    )

    return EnsembleReport(
        config=config,
        records=tuple(records),
        class_summary=class_summary,
        fidelity_gap=gap,
        cohens_d_fidelity=effect,
        angle_fingerprint=fingerprint,
        per_axis_p=per_axis_p,
        correlation_summary=correlation,
    )


def run_ensemble(config: EnsembleConfig, threads: int | None = None,
                 max_qubits: int | None = None) -> EnsembleReport:
    """Generate, compress, classify and analyze a full circuit ensemble.

    Deterministic given the config; `threads` only changes the schedule.
    Aggregate fields involving an empty class are reported as None rather
    than fabricated.
    """
    worker = partial(_build_record, config, max_qubits)
    records = _parallel_map(worker, range(config.circuit_count), threads)
    return _aggregate(config, records)


@dataclass(frozen=True)
class SweepConfig:
    n: int
    alpha: float
    rho: float
    base_seed: int = 0
    probe_count: int = 30
    kappa_start: float = 0.05
    kappa_stop: float = 0.40
    kappa_step: float = 0.03
    classify_threshold: float = st.DEFAULT_CLASSIFY_THRESHOLD
    small_angle_threshold: float = st.DEFAULT_SMALL_ANGLE_THRESHOLD
    pruning_mode: str = "causal"

    def __post_init__(self) -> None:
        GenerationParams(self.n, self.alpha, self.rho, self.base_seed)
        if self.probe_count < 2:
            raise InvalidParameterError(f"probe_count must be >= 2, got {self.probe_count}")
        if not 0.0 < self.kappa_start <= self.kappa_stop < 1.0:
            raise InvalidParameterError(
                f"kappa grid [{self.kappa_start}, {self.kappa_stop}] must lie inside (0, 1)"
            )
        if self.kappa_step <= 0:
            raise InvalidParameterError(f"kappa_step must be positive, got {self.kappa_step}")
        if self.pruning_mode not in PRUNING_MODES:
            raise InvalidParameterError(f"pruning_mode must be one of {PRUNING_MODES}, got {self.pruning_mode!r}")


@dataclass(frozen=True)
class SweepPoint:
    kappa: float
    gap: float | None
    robust_fraction: float
    valid: bool


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[SweepPoint, ...]
    selected_kappa: float


def sweep_grid(config: SweepConfig) -> list[float]:
    """Grid values kappa_start, kappa_start + step, ... up to kappa_stop."""
    grid = []
    i = 0
    while True:
        kappa = round(config.kappa_start + i * config.kappa_step, 9)
        if kappa > config.kappa_stop + 1e-12:
            break
        grid.append(kappa)
        i += 1
    return grid


def _probe_fidelity(config: SweepConfig, max_qubits: int | None,
                    task: tuple[int, float, int]) -> float:
    grid_index, kappa, k = task
    seed = config.base_seed + SWEEP_SEED_OFFSET + grid_index * SWEEP_SEED_STRIDE + k
    circuit = generate_uniform(GenerationParams(config.n, config.alpha, config.rho, seed))
    result = _prune_circuit(circuit, kappa, config.pruning_mode,
                            config.small_angle_threshold, max_qubits)
    return result.fidelity


def kappa_sweep(config: SweepConfig, threads: int | None = None,
                max_qubits: int | None = None) -> SweepResult:
    """Probe every grid kappa with a fresh probe ensemble and select the one
    maximizing the robust/fragile fidelity gap (ties go to the smaller kappa).

    A grid point is valid only when both classes are non-empty; if no point
    is valid the configuration exhibits no transition and NoTransitionError
    is raised. Probe seeds are disjoint from main-ensemble seeds.
    """
    grid = sweep_grid(config)
    tasks = [(gi, kappa, k) for gi, kappa in enumerate(grid) for k in range(config.probe_count)]
    fidelities = _parallel_map(partial(_probe_fidelity, config, max_qubits), tasks, threads)

    points = []
    best_kappa = None
    best_gap = None
    for gi, kappa in enumerate(grid):
        fids = fidelities[gi * config.probe_count:(gi + 1) * config.probe_count]
        robust = [f for f in fids if st.classify(f, config.classify_threshold) is ClassLabel.ROBUST]
        fragile = [f for f in fids if st.classify(f, config.classify_threshold) is ClassLabel.FRAGILE]
        valid = bool(robust) and bool(fragile)
        gap = st.fidelity_gap(robust, fragile) if valid else None
        points.append(SweepPoint(kappa=kappa, gap=gap, robust_fraction=len(robust) / len(fids), valid=valid))
        if valid and (best_gap is None or gap > best_gap):
            best_gap = gap
            best_kappa = kappa
    if best_kappa is None:
        raise NoTransitionError(
            "no grid point produced both robust and fragile outcomes; "
            "the configuration exhibits no compression transition"
        )
    return SweepResult(grid=tuple(points), selected_kappa=best_kappa)


def _fmt(value: float | None, fmt: str = "0.4f", absent: str = "n/a") -> str:
    if value is None:
        return absent
    return format(value, fmt)


def compare_classes(report: EnsembleReport) -> str:
    """Render the three class-comparison tables (fingerprint, per-axis
    p-values, angle-importance correlation) as aligned text."""
    marker = "n/a (class too small)"
    rows = [
        ("mean angle", "mean_theta"),
        ("angle std dev", "std_theta"),
        ("small-angle ratio", "small_angle_ratio"),
    ]
    lines = ["Rotation-angle fingerprint by class"]
    lines.append(f"  {'statistic':<20}{'robust':>10}{'fragile':>10}  p-value")
    for title, key in rows:
        entry = report.angle_fingerprint[key]
        p = _fmt(entry.p_value, "0.4g", marker)
        lines.append(f"  {title:<20}{_fmt(entry.robust_mean):>10}{_fmt(entry.fragile_mean):>10}  {p}")

    lines.append("")
    lines.append("Per-axis angle comparison (Welch p-value on per-circuit axis means)")
    lines.append(f"  {'axis':<6}p-value")
    for axis in Axis:
        lines.append(f"  r{axis.value:<5}{_fmt(report.per_axis_p[axis.value], '0.4g', marker)}")

    lines.append("")
    lines.append("Angle-importance correlation by class")
    corr = report.correlation_summary
    lines.append(f"  {'class':<10}mean r")
    lines.append(f"  {'robust':<10}{_fmt(corr.robust_mean_r)}")
    lines.append(f"  {'fragile':<10}{_fmt(corr.fragile_mean_r)}")
    lines.append(f"  Welch p-value: {_fmt(corr.p_value, '0.4g', marker)}")
    return "\n".join(lines) + "\n"


RECORD_CSV_COLUMNS = [
    "seed", "gate_count", "depth", "fidelity", "label", "mean_theta", "std_theta",
    "small_angle_ratio", "r_angle_importance", "entropy", "gini",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(stream: IO[str], records: Iterable[CircuitRecord]) -> None:
    """One CSV row per circuit, columns fixed by RECORD_CSV_COLUMNS."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RECORD_CSV_COLUMNS)
    for r in records:
        writer.writerow([
            r.seed, r.gate_count, r.depth, _cell(r.fidelity), r.label.value,
            _cell(r.angle_stats.mean_theta), _cell(r.angle_stats.std_theta),
            _cell(r.angle_stats.small_angle_ratio), _cell(r.angle_importance_r),
            _cell(r.importance_entropy), _cell(r.importance_gini),
        ])


def _angle_stats_to_dict(a: AngleStats) -> dict:
    return {
        "mean_theta": a.mean_theta,
        "std_theta": a.std_theta,
        "small_angle_ratio": a.small_angle_ratio,
        "per_axis": {
            axis.value: {
                "mean": s.mean, "std": s.std,
                "small_angle_ratio": s.small_angle_ratio, "count": s.count,
            }
            for axis, s in a.per_axis.items()
        },
    }


def _angle_stats_from_dict(obj: dict) -> AngleStats:
    return AngleStats(
        mean_theta=obj["mean_theta"],
        std_theta=obj["std_theta"],
        small_angle_ratio=obj["small_angle_ratio"],
        per_axis={
            Axis(key): AxisAngleStats(
                mean=val["mean"], std=val["std"],
                small_angle_ratio=val["small_angle_ratio"], count=val["count"],
            )
            for key, val in obj["per_axis"].items()
        },
    )


def _record_to_dict(r: CircuitRecord) -> dict:
    return {
        "seed": r.seed,
        "gate_count": r.gate_count,
        "depth": r.depth,
        "fidelity": r.fidelity,
        "label": r.label.value,
        "angle_stats": _angle_stats_to_dict(r.angle_stats),
        "angle_importance_r": r.angle_importance_r,
        "importance_entropy": r.importance_entropy,
        "importance_gini": r.importance_gini,
    }


def _record_from_dict(obj: dict) -> CircuitRecord:
    return CircuitRecord(
        seed=obj["seed"],
        gate_count=obj["gate_count"],
        depth=obj["depth"],
        fidelity=obj["fidelity"],
        label=ClassLabel(obj["label"]),
        angle_stats=_angle_stats_from_dict(obj["angle_stats"]),
        angle_importance_r=obj["angle_importance_r"],
        importance_entropy=obj["importance_entropy"],
        importance_gini=obj["importance_gini"],
    )


def report_to_dict(report: EnsembleReport) -> dict:
    c = report.config
    return {
        "config": {
            "n": c.n, "alpha": c.alpha, "rho": c.rho, "kappa": c.kappa,
            "circuit_count": c.circuit_count, "base_seed": c.base_seed,
            "classify_threshold": c.classify_threshold,
            "small_angle_threshold": c.small_angle_threshold,
            "pruning_mode": c.pruning_mode,
        },
        "records": [_record_to_dict(r) for r in report.records],
        "class_summary": {
            name: {"count": s.count, "fraction": s.fraction, "mean_fidelity": s.mean_fidelity}
            for name, s in report.class_summary.items()
        },
        "fidelity_gap": report.fidelity_gap,
        "cohens_d_fidelity": report.cohens_d_fidelity,
        "angle_fingerprint": {
            key: {"robust": e.robust_mean, "fragile": e.fragile_mean, "p_value": e.p_value}
            for key, e in report.angle_fingerprint.items()
        },
        "per_axis_p": dict(report.per_axis_p),
        "correlation_summary": {
            "robust_mean_r": report.correlation_summary.robust_mean_r,
            "fragile_mean_r": report.correlation_summary.fragile_mean_r,
            "p_value": report.correlation_summary.p_value,
        },
    }


def report_from_dict(obj: dict) -> EnsembleReport:
    cfg = obj["config"]
    config = EnsembleConfig(
        n=cfg["n"], alpha=cfg["alpha"], rho=cfg["rho"], kappa=cfg["kappa"],
        circuit_count=cfg["circuit_count"], base_seed=cfg["base_seed"],
        classify_threshold=cfg["classify_threshold"],
        small_angle_threshold=cfg["small_angle_threshold"],
        pruning_mode=cfg["pruning_mode"],
    )
    fingerprint = {
        key: FingerprintEntry(robust_mean=e["robust"], fragile_mean=e["fragile"], p_value=e["p_value"])
        for key, e in obj["angle_fingerprint"].items()
    }
    summary = {
        name: ClassSummary(count=s["count"], fraction=s["fraction"], mean_fidelity=s["mean_fidelity"])
        for name, s in obj["class_summary"].items()
    }
    corr = obj["correlation_summary"]
    return EnsembleReport(
        config=config,
        records=tuple(_record_from_dict(r) for r in obj["records"]),
        class_summary=summary,
        fidelity_gap=obj["fidelity_gap"],
        cohens_d_fidelity=obj["cohens_d_fidelity"],
        angle_fingerprint=fingerprint,
        per_axis_p=dict(obj["per_axis_p"]),
        correlation_summary=CorrelationSummary(
            robust_mean_r=corr["robust_mean_r"],
            fragile_mean_r=corr["fragile_mean_r"],
            p_value=corr["p_value"],
        ),
    )
