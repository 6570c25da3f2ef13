"""Command-line interface: generate | prune | ensemble | sweep | report.

All commands are deterministic given their flags; every invocation writes a
run manifest next to its outputs so each artifact cites the configuration
that produced it. Exit codes: 0 success, 2 invalid arguments or input,
3 no transition found, 4 resource cap exceeded, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import GenerationParams, circuit_depth, export_qasm, from_json, generate_uniform, to_json
from .errors import CircuitFormatError, InvalidParameterError, NoTransitionError, ResourceLimitError
from .pruning import RiskThresholds, aware_prune, causal_prune, importance_profile, write_importance_csv
from .protocol import (
    EnsembleConfig,
    SweepConfig,
    compare_classes,
    kappa_sweep,
    report_from_dict,
    report_to_dict,
    run_ensemble,
    write_records_csv,
)
from .stats import ClassLabel, classify

HISTOGRAM_BINS = 40


def _env_max_qubits() -> int | None:
    raw = os.environ.get("QBRITTLE_MAX_QUBITS")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InvalidParameterError(f"QBRITTLE_MAX_QUBITS must be an integer, got {raw!r}") from None


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: Path, command: str, config: dict, inputs: list[str], outputs: list[str]) -> None:
    doc = {
        "tool": "qbrittle",
        "version": __version__,
        "command": command,
        "timestamp": _timestamp(),
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")


def histogram_rows(robust_vals, fragile_vals, lo: float, hi: float,
                   bins: int = HISTOGRAM_BINS) -> list[tuple[float, float, int, int]]:
    """Shared-edge counts of both classes over [lo, hi]."""
    edges = np.linspace(lo, hi, bins + 1)
    robust_counts, _ = np.histogram(np.asarray(robust_vals, dtype=float), bins=edges)
    fragile_counts, _ = np.histogram(np.asarray(fragile_vals, dtype=float), bins=edges)
    return [
        (float(edges[i]), float(edges[i + 1]), int(robust_counts[i]), int(fragile_counts[i]))
        for i in range(bins)
    ]


def write_histogram_csv(path: Path, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "robust_count", "fragile_count"])
    for lo, hi, rc, fc in rows:
        writer.writerow([repr(lo), repr(hi), rc, fc])
    path.write_text(buf.getvalue())


def render_histogram_svg(rows, title: str, x_label: str) -> str:
    """Minimal grouped-bar SVG: robust in blue, fragile in red."""
    width, height = 640, 360
    left, right, top, bottom = 55, 15, 35, 45
    plot_w = width - left - right
    plot_h = height - top - bottom
    peak = max([max(rc, fc) for _, _, rc, fc in rows] + [1])
    bin_w = plot_w / len(rows)
    bar_w = bin_w / 2

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for i, (_, _, rc, fc) in enumerate(rows):
        x = left + i * bin_w
        for j, (count, color) in enumerate(((rc, "#4878cf"), (fc, "#d65f5f"))):
            if count == 0:
                continue
            h = plot_h * count / peak
            parts.append(
                f'<rect x="{x + j * bar_w:.2f}" y="{top + plot_h - h:.2f}" '
                f'width="{bar_w:.2f}" height="{h:.2f}" fill="{color}"/>'
            )
    axis_y = top + plot_h
    parts.append(f'<line x1="{left}" y1="{axis_y}" x2="{left + plot_w}" y2="{axis_y}" stroke="black"/>')
    parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{axis_y}" stroke="black"/>')
    lo = rows[0][0]
    hi = rows[-1][1]
    for frac in (0.0, 0.5, 1.0):
        x = left + frac * plot_w
        value = lo + frac * (hi - lo)
        parts.append(f'<text x="{x:.1f}" y="{axis_y + 18}" text-anchor="middle" font-size="11">{value:.2f}</text>')
    parts.append(f'<text x="{left - 8}" y="{axis_y + 4}" text-anchor="end" font-size="11">0</text>')
    parts.append(f'<text x="{left - 8}" y="{top + 4}" text-anchor="end" font-size="11">{peak}</text>')
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">{x_label}</text>'
    )
    parts.append(
        f'<text x="{left + plot_w - 4}" y="{top + 14}" text-anchor="end" font-size="11" fill="#4878cf">robust</text>'
    )
    parts.append(
        f'<text x="{left + plot_w - 4}" y="{top + 28}" text-anchor="end" font-size="11" fill="#d65f5f">fragile</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_generate(args, max_qubits: int | None) -> int:
    params = GenerationParams(n=args.n, alpha=args.alpha, rho=args.rho, seed=args.seed)
    circuit = generate_uniform(params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_json(circuit) + "\n")
    outputs = [str(out)]
    if args.qasm:
        qasm_path = Path(args.qasm)
        qasm_path.write_text(export_qasm(circuit))
        outputs.append(str(qasm_path))
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "generate",
                    {"n": args.n, "alpha": args.alpha, "rho": args.rho, "seed": args.seed},
                    [], outputs)
    print(f"wrote {out}: {len(circuit.gates)} gates, depth {circuit_depth(circuit)}")
    return 0


def cmd_prune(args, max_qubits: int | None) -> int:
    in_path = Path(args.in_path)
    try:
        circuit = from_json(in_path.read_text())
    except OSError as exc:
        raise CircuitFormatError(f"cannot read {in_path}: {exc}") from None
    profile = importance_profile(circuit, max_qubits)
    if args.mode == "aware":
        thresholds = RiskThresholds(small_angle=args.small_angle_threshold)
        result = aware_prune(circuit, args.kappa, thresholds=thresholds,
                             profile=profile, max_qubits=max_qubits)
    else:
        result = causal_prune(circuit, args.kappa, profile=profile, max_qubits=max_qubits)

    outputs = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(to_json(result.compressed) + "\n")
        outputs.append(str(out))
    if args.importance_csv:
        buf = io.StringIO()
        write_importance_csv(buf, circuit, profile)
        Path(args.importance_csv).write_text(buf.getvalue())
        outputs.append(args.importance_csv)
    if args.dump_state_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "re", "im"])
        for i, amp in enumerate(profile.baseline_state.amplitudes):
            writer.writerow([i, repr(float(amp.real)), repr(float(amp.imag))])
        Path(args.dump_state_csv).write_text(buf.getvalue())
        outputs.append(args.dump_state_csv)

    label = classify(result.fidelity, args.classify_threshold)
    manifest_base = Path(args.out) if args.out else in_path
    _write_manifest(manifest_base.with_suffix(manifest_base.suffix + ".manifest.json"), "prune",
                    {"kappa": args.kappa, "mode": args.mode,
                     "classify_threshold": args.classify_threshold,
                     "small_angle_threshold": args.small_angle_threshold},
                    [str(in_path)], outputs)
    print(
        f"removed {len(result.removed_indices)} of {len(circuit.gates)} gates; "
        f"fidelity={result.fidelity:.6f}; label={label.value}; "
        f"kappa_effective={result.kappa_effective:.4f}"
    )
    return 0


def cmd_ensemble(args, max_qubits: int | None) -> int:
    config = EnsembleConfig(
        n=args.n, alpha=args.alpha, rho=args.rho, kappa=args.kappa,
        circuit_count=args.count, base_seed=args.base_seed,
        classify_threshold=args.classify_threshold,
        small_angle_threshold=args.small_angle_threshold,
        pruning_mode=args.mode,
    )
    report = run_ensemble(config, threads=args.threads, max_qubits=max_qubits)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report_to_dict(report), indent=1) + "\n")
    records_path = out_dir / "records.csv"
    buf = io.StringIO()
    write_records_csv(buf, report.records)
    records_path.write_text(buf.getvalue())

    robust = [r for r in report.records if r.label is ClassLabel.ROBUST]
    fragile = [r for r in report.records if r.label is ClassLabel.FRAGILE]
    outputs = [str(report_path), str(records_path)]

    fid_rows = histogram_rows([r.fidelity for r in robust], [r.fidelity for r in fragile],
                              0.0, 1.0, args.bins)
    fid_csv = out_dir / "fidelity_hist.csv"
    write_histogram_csv(fid_csv, fid_rows)
    outputs.append(str(fid_csv))
    corr_rows = histogram_rows(
        [r.angle_importance_r for r in robust if r.angle_importance_r is not None],
        [r.angle_importance_r for r in fragile if r.angle_importance_r is not None],
        -1.0, 1.0, args.bins,
    )
    corr_csv = out_dir / "correlation_hist.csv"
    write_histogram_csv(corr_csv, corr_rows)
    outputs.append(str(corr_csv))
    if args.svg:
        fid_svg = out_dir / "fidelity_hist.svg"
        fid_svg.write_text(render_histogram_svg(fid_rows, "Post-compression fidelity", "fidelity"))
        corr_svg = out_dir / "correlation_hist.svg"
        corr_svg.write_text(render_histogram_svg(corr_rows, "Angle-importance correlation", "r"))
        outputs.extend([str(fid_svg), str(corr_svg)])

    _write_manifest(out_dir / "manifest.json", "ensemble",
                    report_to_dict(report)["config"], [], outputs)

    summary = report.class_summary
    print(
        f"robust: {summary['robust'].count} ({summary['robust'].fraction:.2f}), "
        f"fragile: {summary['fragile'].count} ({summary['fragile'].fraction:.2f})"
    )
    gap = "absent" if report.fidelity_gap is None else f"{report.fidelity_gap:.6f}"
    effect = "absent" if report.cohens_d_fidelity is None else f"{report.cohens_d_fidelity:.4f}"
    print(f"fidelity gap: {gap}; cohens d: {effect}")
    print(f"wrote {out_dir}")
    if not robust or not fragile:
        print("warning: one outcome class is empty; gap and class comparisons are reported as null",
              file=sys.stderr)
    return 0


def cmd_sweep(args, max_qubits: int | None) -> int:
    config = SweepConfig(
        n=args.n, alpha=args.alpha, rho=args.rho, base_seed=args.base_seed,
        probe_count=args.probes,
        kappa_start=args.kappa_start, kappa_stop=args.kappa_stop, kappa_step=args.kappa_step,
        classify_threshold=args.classify_threshold,
        small_angle_threshold=args.small_angle_threshold,
        pruning_mode=args.mode,
    )
    result = kappa_sweep(config, threads=args.threads, max_qubits=max_qubits)

    outputs = []
    if args.out_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kappa", "gap", "robust_fraction", "valid"])
        for point in result.grid:
            writer.writerow([
                repr(point.kappa),
                "" if point.gap is None else repr(point.gap),
                repr(point.robust_fraction),
                int(point.valid),
            ])
        out_csv = Path(args.out_csv)
        out_csv.parent.mkdir(parents=True, exist_ok=True)
        out_csv.write_text(buf.getvalue())
        outputs.append(str(out_csv))
        _write_manifest(out_csv.with_suffix(out_csv.suffix + ".manifest.json"), "sweep",
                        {"n": args.n, "alpha": args.alpha, "rho": args.rho,
                         "base_seed": args.base_seed, "probes": args.probes,
                         "kappa_start": args.kappa_start, "kappa_stop": args.kappa_stop,
                         "kappa_step": args.kappa_step, "mode": args.mode},
                        [], outputs)

    for point in result.grid:
        gap = "absent" if point.gap is None else f"{point.gap:.6f}"
        print(f"kappa={point.kappa:.2f} robust_fraction={point.robust_fraction:.3f} "
              f"gap={gap} valid={int(point.valid)}")
    print(f"selected_kappa={result.selected_kappa!r}")
    return 0


def cmd_report(args, max_qubits: int | None) -> int:
    path = Path(args.in_path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise CircuitFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"{path} is not valid JSON: {exc}") from None
    try:
        report = report_from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"{path} is not an ensemble report: missing or bad field {exc}") from None

    c = report.config
    print(f"ensemble: n={c.n} alpha={c.alpha} rho={c.rho} kappa={c.kappa} "
          f"count={c.circuit_count} base_seed={c.base_seed} mode={c.pruning_mode}")
    summary = report.class_summary
    print(f"robust: {summary['robust'].count} ({summary['robust'].fraction:.2f}), "
          f"fragile: {summary['fragile'].count} ({summary['fragile'].fraction:.2f})")
    gap = "absent" if report.fidelity_gap is None else f"{report.fidelity_gap:.6f}"
    effect = "absent" if report.cohens_d_fidelity is None else f"{report.cohens_d_fidelity:.4f}"
    print(f"fidelity gap: {gap}; cohens d: {effect}")
    print()
    print(compare_classes(report), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbrittle",
        description="Generate, compress and statistically analyze uniform parametrized quantum circuits.",
    )
    parser.add_argument("--version", action="version", version=f"qbrittle {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate one structurally-uniform circuit")
    gen.add_argument("--n", type=int, required=True, help="qubit count (even, >= 4)")
    gen.add_argument("--alpha", type=float, required=True, help="depth factor; layers = floor(n * alpha)")
    gen.add_argument("--rho", type=float, required=True, help="redundancy rate in [0, 1]")
    gen.add_argument("--seed", type=int, required=True, help="generator seed")
    gen.add_argument("--out", required=True, help="output circuit JSON path")
    gen.add_argument("--qasm", default=None, help="also export OpenQASM 2.0 to this path")
    gen.set_defaults(func=cmd_generate)

    prune = sub.add_parser("prune", help="compress a circuit by leave-one-out importance")
    prune.add_argument("--in", dest="in_path", required=True, help="input circuit JSON path")
    prune.add_argument("--kappa", type=float, required=True, help="fraction of gates to remove")
    prune.add_argument("--mode", choices=["causal", "aware"], default="causal")
    prune.add_argument("--out", default=None, help="compressed circuit JSON path")
    prune.add_argument("--importance-csv", default=None, help="per-gate importance CSV path")
    prune.add_argument("--dump-state-csv", default=None, help="debug dump of the intact final state")
    prune.add_argument("--classify-threshold", type=float, default=0.9)
    prune.add_argument("--small-angle-threshold", type=float, default=0.1)
    prune.set_defaults(func=cmd_prune)

    ens = sub.add_parser("ensemble", help="run a full ensemble experiment")
    ens.add_argument("--n", type=int, required=True)
    ens.add_argument("--alpha", type=float, required=True)
    ens.add_argument("--rho", type=float, required=True)
    ens.add_argument("--kappa", type=float, required=True)
    ens.add_argument("--count", type=int, default=100, help="number of circuits")
    ens.add_argument("--base-seed", type=int, default=0)
    ens.add_argument("--mode", choices=["causal", "aware"], default="causal")
    ens.add_argument("--out-dir", required=True)
    ens.add_argument("--bins", type=int, default=HISTOGRAM_BINS, help="histogram bin count")
    ens.add_argument("--svg", action="store_true", help="also render histogram SVGs")
    ens.add_argument("--threads", type=int, default=None, help="parallel workers (default: all cores)")
    ens.add_argument("--classify-threshold", type=float, default=0.9)
    ens.add_argument("--small-angle-threshold", type=float, default=0.1)
    ens.set_defaults(func=cmd_ensemble)

    swp = sub.add_parser("sweep", help="search the kappa grid for the clearest transition")
    swp.add_argument("--n", type=int, required=True)
    swp.add_argument("--alpha", type=float, required=True)
    swp.add_argument("--rho", type=float, required=True)
    swp.add_argument("--base-seed", type=int, default=0)
    swp.add_argument("--probes", type=int, default=30, help="probe circuits per grid point")
    swp.add_argument("--kappa-start", type=float, default=0.05)
    swp.add_argument("--kappa-stop", type=float, default=0.40)
    swp.add_argument("--kappa-step", type=float, default=0.03)
    swp.add_argument("--mode", choices=["causal", "aware"], default="causal")
    swp.add_argument("--out-csv", default=None, help="sweep table CSV path")
    swp.add_argument("--threads", type=int, default=None)
    swp.add_argument("--classify-threshold", type=float, default=0.9)
    swp.add_argument("--small-angle-threshold", type=float, default=0.1)
    swp.set_defaults(func=cmd_sweep)

    rep = sub.add_parser("report", help="re-render the class-comparison tables from a report JSON")
    rep.add_argument("--in", dest="in_path", required=True, help="report JSON path")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        max_qubits = _env_max_qubits()
        return args.func(args, max_qubits)
    except (InvalidParameterError, CircuitFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoTransitionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
