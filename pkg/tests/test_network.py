from __future__ import annotations

import numpy as np
import pytest

from qetu_hubbard.circuit import Circuit, circuit_unitary, depth_excluding_rz, lower, op, phase_equivalent
from qetu_hubbard.hubbard import ModelParams, split_hamiltonian
from qetu_hubbard.network import (
    ANCILLA,
    EXCHANGED_MAPPING,
    GRID,
    START_MAPPING,
    TrotterPlan,
    block_sequence,
    build_controlled_v,
    build_trotter_circuit,
    controlled_v_error,
    mapping_at_config,
    prepare_initial_state_circuit,
    system_blocks,
)
from qetu_hubbard.oracle import dense_expm, initial_product_state
from qetu_hubbard.pauli import to_matrix
from qetu_hubbard.simulator import apply_circuit, zero_state


def test_grid_has_twelve_couplers_and_ancilla_centre():
    assert len(GRID.edges) == 12
    assert sum(GRID.adjacent(ANCILLA, q) for q in range(1, 9)) == 4


def test_mappings():
    assert START_MAPPING.qubit_of("1u") == 1
    assert EXCHANGED_MAPPING.qubit_of("1u") == 2
    assert mapping_at_config(4) == EXCHANGED_MAPPING
    assert mapping_at_config(6) == START_MAPPING
    with pytest.raises(ValueError):
        mapping_at_config(0)


def test_block_merging():
    seq = block_sequence(2, 1.0)
    kinds = [b for b, _ in seq]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    total = sum(t for b, t in seq if b == "H1")
    assert np.isclose(total, 1.0)
    assert len(block_sequence(2, 1.0, merge=False)) == 26


@pytest.mark.parametrize("merge", [True, False])
def test_lowered_circuit_is_grid_local(problem, merge):
    c = lower(build_controlled_v(TrotterPlan(2, 0.5, shift=problem.shift), merge=merge))
    GRID.check_circuit(c)
    assert c.is_native()


def test_grid_check_rejects_long_range():
    with pytest.raises(ValueError):
        GRID.check_circuit(Circuit(9, [op("CPHASE", 1, 3, params=[1.0])]))


def test_merge_does_not_change_unitary(problem):
    plan = TrotterPlan(3, 0.5, shift=problem.shift)
    a = circuit_unitary(build_controlled_v(plan, merge=True))
    b = circuit_unitary(build_controlled_v(plan, merge=False))
    assert np.abs(a - b).max() <= 1e-12


def test_lowering_preserves_controlled_v(problem):
    c = build_controlled_v(TrotterPlan(1, 0.5, shift=problem.shift))
    assert phase_equivalent(circuit_unitary(lower(c)), circuit_unitary(c), 1e-10)


def test_exact_blocks_are_block_diagonal(problem):
    u = circuit_unitary(build_controlled_v(TrotterPlan(1, 0.5, shift=problem.shift), exact_blocks=True))
    _, _, off = system_blocks(u)
    assert off <= 1e-12


def test_zero_time_is_identity():
    c = build_trotter_circuit(TrotterPlan(1, 1e-300))
    assert phase_equivalent(circuit_unitary(c), np.eye(512), 1e-12)


def test_uncontrolled_steps_converge_at_second_order():
    p = ModelParams()
    h = sum(to_matrix(x) for x in split_hamiltonian(p))
    errs = []
    for n in (4, 8):
        blk, _, _ = system_blocks(circuit_unitary(build_trotter_circuit(TrotterPlan(n, 0.3, p))))
        errs.append(np.linalg.norm(blk - dense_expm(h, 0.3), 2))
    assert errs[1] < 1e-3
    assert abs(errs[0] / errs[1] - 4) < 0.2


def test_single_step_error_and_order(problem):
    errs = [controlled_v_error(TrotterPlan(n, 0.5, shift=problem.shift), problem.shifted_hamiltonian) for n in (1, 2, 4)]
    assert 1e-3 < errs[0] < 1e-2
    slope = -np.polyfit(np.log([1, 2, 4]), np.log(errs), 1)[0]
    assert abs(slope - 2) < 0.1


def test_depth_values(problem):
    depths = [depth_excluding_rz(lower(build_controlled_v(TrotterPlan(n, shift=problem.shift), merge=False))) for n in (1, 2)]
    assert depths == [31, 60]


def test_missing_shift():
    with pytest.raises(ValueError):
        build_controlled_v(TrotterPlan())
    with pytest.raises(ValueError):
        TrotterPlan(0)


def test_initial_state_circuit():
    c = lower(prepare_initial_state_circuit())
    psi = apply_circuit(zero_state(9), c)
    assert np.isclose(np.linalg.norm(psi), 1)
    sys = psi[:256]
    assert np.isclose(abs(np.vdot(sys, initial_product_state())), 1.0)
    # spin-up orbitals read 1,0,0,1 on sites 1..4 with certainty
    probs = np.abs(psi) ** 2
    ups = [START_MAPPING.qubit_of(f"{s}u") for s in (1, 2, 3, 4)]
    for i in np.flatnonzero(probs > 1e-12):
        bits = format(i, "09b")
        assert "".join(bits[q] for q in ups) == "1001"
