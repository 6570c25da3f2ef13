import io
import math

import numpy as np
import pytest

from helpers import naive_importances, random_circuit
from qbrittle.circuits import (
    Axis,
    Circuit,
    Cnot,
    GenerationParams,
    Rotation,
    generate_uniform,
)
from qbrittle.errors import InvalidParameterError, UndefinedStatisticError
from qbrittle.pruning import (
    RiskThresholds,
    aware_prune,
    causal_prune,
    importance_profile,
    risk_assess,
    write_importance_csv,
)
from qbrittle.simulator import fidelity, run


def test_terminal_phase_gate_has_zero_importance():
    profile = importance_profile(Circuit(1, (Rotation(Axis.Z, 0, 0.5),)))
    assert profile.importances[0] <= 1e-12


def test_single_ry_importance_is_half():
    profile = importance_profile(Circuit(1, (Rotation(Axis.Y, 0, math.pi / 2),)))
    assert profile.importances[0] == pytest.approx(0.5, abs=1e-12)


def test_importance_matches_naive_leave_one_out():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        circuit = random_circuit(rng, n, int(rng.integers(1, 25)))
        swept = importance_profile(circuit).importances
        assert np.max(np.abs(swept - naive_importances(circuit))) < 1e-12


def test_rotation_importance_respects_analytic_bound():
    rng = np.random.default_rng(5)
    circuits = [random_circuit(rng, 3, 20, theta_lo=0.001, theta_hi=math.pi / 2) for _ in range(10)]
    circuits.append(generate_uniform(GenerationParams(6, 1.5, 0.3, seed=2)))
    for circuit in circuits:
        importances = importance_profile(circuit).importances
        for i, gate in circuit.rotations():
            assert 0.0 <= importances[i] <= math.sin(gate.theta / 2) ** 2 + 1e-9


def test_empty_circuit_has_no_profile():
    with pytest.raises(InvalidParameterError):
        importance_profile(Circuit(2, ()))


def test_causal_prune_reference_arithmetic():
    circuit = generate_uniform(GenerationParams(10, 2.3, 0.28, seed=0))
    result = causal_prune(circuit, 0.11)
    assert len(result.removed_indices) == 37
    assert len(result.compressed.gates) == 342 - 37
    assert result.kappa_effective == pytest.approx(37 / 342)
    assert 0.0 <= result.fidelity <= 1.0
    # reported fidelity equals a fresh recomputation
    fresh = fidelity(run(circuit), run(result.compressed))
    assert result.fidelity == pytest.approx(fresh, abs=1e-12)


def test_causal_prune_is_deterministic():
    circuit = generate_uniform(GenerationParams(8, 1.5, 0.3, seed=21))
    first = causal_prune(circuit, 0.2)
    second = causal_prune(circuit, 0.2)
    assert first.removed_indices == second.removed_indices
    assert first.fidelity == second.fidelity


def test_prune_tie_break_is_index_order():
    # all-zero importance: every gate is a phase on the |0> basis state
    circuit = Circuit(1, (Rotation(Axis.Z, 0, 0.3), Rotation(Axis.Z, 0, 0.4), Rotation(Axis.Z, 0, 0.5)))
    result = causal_prune(circuit, 0.7)  # floor(2.1) = 2
    assert result.removed_indices == (0, 1)
    assert result.fidelity == pytest.approx(1.0, abs=1e-12)


def test_removing_zero_importance_gate_keeps_fidelity():
    circuit = Circuit(1, (Rotation(Axis.Z, 0, 0.3), Rotation(Axis.Y, 0, 1.2)))
    profile = importance_profile(circuit)
    assert profile.importances[0] <= 1e-12
    result = causal_prune(circuit, 0.5)
    assert result.removed_indices == (0,)
    assert result.fidelity >= 1.0 - 1e-10


def test_prune_rejects_useless_kappa():
    circuit = generate_uniform(GenerationParams(6, 1.0, 0.2, seed=1))
    with pytest.raises(InvalidParameterError):
        causal_prune(circuit, 0.001)  # floor(kappa * N) = 0
    with pytest.raises(InvalidParameterError):
        causal_prune(circuit, 0.0)
    with pytest.raises(InvalidParameterError):
        causal_prune(circuit, 1.0)


def test_risk_assess_flags_uniform_angles():
    gates = tuple(Rotation(Axis.X, i % 2, 0.8) for i in range(6))
    report = risk_assess(Circuit(2, gates))
    assert report.std_theta == pytest.approx(0.0, abs=1e-12)
    assert report.small_angle_ratio == 0.0
    assert report.brittle


def test_risk_assess_small_angle_ratio():
    gates = (Rotation(Axis.X, 0, 0.01), Rotation(Axis.Y, 1, math.pi / 2),
             Rotation(Axis.X, 0, 0.01), Rotation(Axis.Y, 1, math.pi / 2))
    report = risk_assess(Circuit(2, gates), RiskThresholds(small_angle=0.1))
    assert report.small_angle_ratio == pytest.approx(0.5)


def test_risk_assess_needs_two_rotations():
    with pytest.raises(UndefinedStatisticError):
        risk_assess(Circuit(2, (Rotation(Axis.X, 0, 1.0), Cnot(0, 1))))


def test_generated_small_angle_ratio_matches_expectation():
    # expectation (rho*L*n + floor(n*rho)) / (L*n + floor(n*rho)) ~ 0.286 at (10, 2.3, 0.28)
    ratios = [
        risk_assess(generate_uniform(GenerationParams(10, 2.3, 0.28, seed))).small_angle_ratio
        for seed in range(20)
    ]
    assert float(np.mean(ratios)) == pytest.approx(0.286, abs=0.03)


def _non_brittle_circuit() -> Circuit:
    # wide spread and plenty of small angles: std ~0.78 > 0.5255, ratio 0.5 > 0.28
    gates = []
    for i in range(10):
        theta = 0.01 if i % 2 == 0 else math.pi / 2
        gates.append(Rotation((Axis.X, Axis.Y, Axis.Z)[i % 3], i % 4, theta))
    return Circuit(4, tuple(gates))


def _brittle_circuit() -> Circuit:
    # two protected small-angle gates among tightly clustered large angles
    gates = [Rotation(Axis.X, 0, 0.01), Rotation(Axis.Z, 1, 0.02)]
    gates += [Rotation((Axis.X, Axis.Y, Axis.Z)[i % 3], i % 4, 0.9) for i in range(8)]
    return Circuit(4, tuple(gates))


def test_aware_prune_is_noop_for_non_brittle():
    circuit = _non_brittle_circuit()
    assert not risk_assess(circuit).brittle
    causal = causal_prune(circuit, 0.25)
    aware = aware_prune(circuit, 0.25)
    assert aware == causal


def test_aware_prune_protects_small_angles():
    circuit = _brittle_circuit()
    assert risk_assess(circuit).brittle
    result = aware_prune(circuit, 0.3)  # quota 3 <= 8 unprotected gates
    assert len(result.removed_indices) == 3
    for i in result.removed_indices:
        gate = circuit.gates[i]
        assert gate.theta >= 0.1
    assert result.kappa_effective == pytest.approx(0.3)


def test_aware_prune_partial_pool_removes_what_it_can():
    # 6 protected small-angle gates, 2 unprotected, quota 3: only the 2
    # unprotected gates go, and kappa_effective drops below the request
    gates = [Rotation(Axis.Z, 0, 0.01 + 0.001 * i) for i in range(6)]
    gates += [Rotation(Axis.Y, 1, 0.9), Rotation(Axis.Y, 2, 0.9)]
    circuit = Circuit(3, tuple(gates))
    assert risk_assess(circuit).brittle
    result = aware_prune(circuit, 0.4)  # quota floor(3.2) = 3 > 2 candidates
    assert len(result.removed_indices) == 2
    assert set(result.removed_indices) == {6, 7}
    assert result.kappa_effective == pytest.approx(0.25)


def test_aware_prune_exhaustion_reports_lower_kappa():
    gates = tuple(Rotation(Axis.Z, 0, 0.01 + 0.001 * i) for i in range(4))
    circuit = Circuit(1, gates)
    assert risk_assess(circuit).brittle
    result = aware_prune(circuit, 0.5)  # quota 2, but every gate is protected
    assert result.removed_indices == ()
    assert result.kappa_effective == 0.0
    assert result.fidelity == pytest.approx(1.0, abs=1e-12)
    assert result.compressed == circuit


def test_importance_csv_layout():
    circuit = Circuit(2, (Rotation(Axis.X, 0, 0.5), Cnot(0, 1)))
    profile = importance_profile(circuit)
    buf = io.StringIO()
    write_importance_csv(buf, circuit, profile)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "gate_index,gate_type,axis,qubits,theta,importance"
    assert len(lines) == 3
    assert lines[1].startswith("0,rot,x,0,0.5,")
    assert lines[2].startswith("1,cnot,,0;1,,")
