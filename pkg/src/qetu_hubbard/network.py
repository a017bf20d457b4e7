"""Grid layout, fermionic swap network and the controlled evolution circuit.

Device qubits: qubit 0 is the ancilla at the grid centre; qubits 1..8 run
around the border starting at the top-left corner::

    1 2 3
    8 0 4
    7 6 5

In the start configuration device qubit ``k + 1`` holds the spin-orbital with
Jordan-Wigner index ``k``. Because the ancilla is the most significant
Kronecker factor, the system register of a 9-qubit circuit is directly the
8-qubit Jordan-Wigner register.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .circuit import Circuit, Gate, Op, circuit_unitary, op
from .hubbard import (
    CANONICAL_ORDER,
    CONTROL_ORBITALS,
    HOPPING_EDGES,
    ONSITE_EDGES,
    ModelParams,
    ShiftCoefficients,
    SpinOrbital,
    split_hamiltonian,
)
from .oracle import dense_expm
from .pauli import to_matrix

ANCILLA = 0
NUM_QUBITS = 9
_RING_CELLS = ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0))


def system_qubit(jw_index: int) -> int:
    """Device qubit holding Jordan-Wigner mode ``jw_index`` in the start mapping."""
    return jw_index + 1


ONSITE_PAIRS: tuple[tuple[int, int], ...] = tuple((system_qubit(a), system_qubit(b)) for a, b in ONSITE_EDGES)
HOPPING_PAIRS: tuple[tuple[int, int], ...] = tuple((system_qubit(a), system_qubit(b)) for a, b in HOPPING_EDGES)


@dataclass(frozen=True)
class GridLayout:
    """3x3 grid with nearest-neighbour couplers."""

    positions: tuple[tuple[int, int], ...] = ((1, 1),) + _RING_CELLS

    @property
    def edges(self) -> frozenset[frozenset[int]]:
        out = set()
        for a, (ra, ca) in enumerate(self.positions):
            for b, (rb, cb) in enumerate(self.positions):
                if a < b and abs(ra - rb) + abs(ca - cb) == 1:
                    out.add(frozenset((a, b)))
        return frozenset(out)

    def adjacent(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.edges

    def check_circuit(self, c: Circuit) -> None:
        """Raise if any two-qubit gate couples non-adjacent cells."""
        for o in c.ops:
            if len(o.qubits) == 2 and not self.adjacent(*o.qubits):
                raise ValueError(f"{o.gate.kind} on non-adjacent qubits {o.qubits}")


GRID = GridLayout()


@dataclass(frozen=True)
class ModeMapping:
    """Assignment of device qubits to spin-orbitals (``None`` marks the ancilla)."""

    assignment: tuple[SpinOrbital | None, ...]

    def __post_init__(self) -> None:
        if len(self.assignment) != NUM_QUBITS:
            raise ValueError("mapping must cover 9 qubits")
        orbs = [a for a in self.assignment if a is not None]
        if len(orbs) != 8 or set(orbs) != set(CANONICAL_ORDER):
            raise ValueError("mapping must place each spin-orbital once and one ancilla")

    def qubit_of(self, orbital: SpinOrbital | str) -> int:
        if isinstance(orbital, str):
            orbital = SpinOrbital.parse(orbital)
        return self.assignment.index(orbital)

    def qubits_with_spin(self, spin: str) -> tuple[int, ...]:
        return tuple(q for q, a in enumerate(self.assignment) if a is not None and a.spin == spin)

    def swapped(self, pairs: Iterable[tuple[int, int]]) -> ModeMapping:
        cells = list(self.assignment)
        for a, b in pairs:
            cells[a], cells[b] = cells[b], cells[a]
        return ModeMapping(tuple(cells))


START_MAPPING = ModeMapping((None,) + CANONICAL_ORDER)
EXCHANGED_MAPPING = START_MAPPING.swapped(ONSITE_PAIRS)

# fSWAP layers applied when moving from configuration k to k + 1
STAGE_MOVES: dict[int, tuple[tuple[int, int], ...]] = {2: ONSITE_PAIRS, 5: ONSITE_PAIRS}


def mapping_at_config(k: int) -> ModeMapping:
    """Mapping active at configuration ``k`` (1..7) of the Trotter step."""
    if k not in range(1, 8):
        raise ValueError("configuration index must be in 1..7")
    return EXCHANGED_MAPPING if 3 <= k <= 5 else START_MAPPING


@dataclass(frozen=True)
class TrotterPlan:
    """Parameters of one controlled evolution ``V``.

    Attributes:
        n_steps: Number of second-order Trotter steps.
        dt: Evolution time per ``V`` application.
        params: Model parameters.
        shift: Affine spectral shift; when absent the unshifted ``H`` is used.
    """

    n_steps: int = 1
    dt: float = 0.5
    params: ModelParams = ModelParams()
    shift: ShiftCoefficients | None = None

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def tau(self) -> float:
        """Evolution time seen by ``H`` (scaled by ``c1`` when shifted)."""
        return self.dt * (self.shift.c1 if self.shift else 1.0)


# block sequence -------------------------------------------------------------

_STEP_BLOCKS = ("K1", "H1", "K1", "K2", "H2", "FS", "H3", "FS", "H2", "K2", "K1", "H1", "K1")
_STEP_WEIGHTS = {"H1": 0.5, "H2": 0.5, "H3": 1.0}


def block_sequence(n_steps: int, tau: float, controlled: bool = True, merge: bool = True) -> list[tuple[str, float]]:
    """Sequence of ``(block, time)`` for ``n_steps`` Trotter steps.

    With ``merge`` set, adjacent identical control layers cancel and adjacent
    evolution blocks of the same kind merge their times; otherwise the steps
    are plainly concatenated.
    """
    seq: list[tuple[str, float]] = []
    for _ in range(n_steps):
        for b in _STEP_BLOCKS:
            if b.startswith("K") and not controlled:
                continue
            item = (b, _STEP_WEIGHTS.get(b, 0.0) * tau / n_steps)
            if merge and seq and seq[-1][0] == b:
                if b in _STEP_WEIGHTS:
                    seq[-1] = (b, seq[-1][1] + item[1])
                else:
                    seq.pop()
                continue
            seq.append(item)
    return seq


def _control_op(letter: str) -> Op:
    targets = tuple(START_MAPPING.qubit_of(o) for o in CONTROL_ORBITALS)
    return op("CPS0", ANCILLA, *targets, paulis=letter * len(targets))


def _embed_system(mat: np.ndarray) -> Op:
    return Op(Gate("MATRIX", matrix=mat), tuple(system_qubit(k) for k in range(8)))


def _block_ops(block: str, time: float, p: ModelParams, exact: dict[str, np.ndarray] | None) -> list[Op]:
    if block == "K1":
        return [_control_op("X")]
    if block == "K2":
        return [_control_op("Z")]
    if block == "FS":
        return [op("FSWAP", a, b) for a, b in ONSITE_PAIRS]
    if exact is not None:
        return [_embed_system(dense_expm(exact[block], time))]
    if block == "H1":
        # exp(-i time (u/4) ZZ) = RZZ(u time / 2)
        return [op("RZZ", a, b, params=[p.u * time / 2]) for a, b in ONSITE_PAIRS]
    # exp(+i time (t/2)(XX + YY)) = HOPXY(2 t time); H3 runs in the exchanged mapping
    return [op("HOPXY", a, b, params=[2 * p.t * time]) for a, b in HOPPING_PAIRS]


def _exact_blocks(p: ModelParams) -> dict[str, np.ndarray]:
    h1, h2, h3 = (to_matrix(h) for h in split_hamiltonian(p))
    # H3 is applied between the fSWAP layers, i.e. as the un-conjugated hop
    return {"H1": h1, "H2": h2, "H3": h2}


def _emit(seq: list[tuple[str, float]], p: ModelParams, exact: bool) -> list[Op]:
    table = _exact_blocks(p) if exact else None
    out: list[Op] = []
    for block, time in seq:
        out.extend(_block_ops(block, time, p, table))
    return out


def build_trotter_step(plan: TrotterPlan) -> Circuit:
    """One uncontrolled second-order step approximating ``exp(-i tau H / n)``."""
    seq = block_sequence(1, plan.tau / plan.n_steps, controlled=False)
    return Circuit(NUM_QUBITS, _emit(seq, plan.params, exact=False))


def build_trotter_circuit(plan: TrotterPlan, merge: bool = True) -> Circuit:
    """``n_steps`` uncontrolled steps approximating ``exp(-i tau H)``."""
    seq = block_sequence(plan.n_steps, plan.tau, controlled=False, merge=merge)
    return Circuit(NUM_QUBITS, _emit(seq, plan.params, exact=False))


def build_controlled_v(plan: TrotterPlan, exact_blocks: bool = False, merge: bool = True) -> Circuit:
    """Controlled forward/backward evolution ``V`` on 9 qubits.

    Ancilla ``|1>`` evolves the system with ``exp(-i dt H_sh)``, ancilla
    ``|0>`` with ``exp(+i dt H_sh)``, where ``H_sh = c1 H + c2``.

    Args:
        plan: Trotter parameters including the spectral shift.
        exact_blocks: Replace each evolution layer by a dense exact exponential
            of its Hamiltonian part (for verifying the control structure).
        merge: Cancel the control layers and fuse the onsite layers shared
            by consecutive steps (exact; only the depth changes).

    Raises:
        ValueError: if the plan has no shift.
    """
    if plan.shift is None:
        raise ValueError("controlled V needs shift coefficients")
    ops = [op("RZ", ANCILLA, params=[-2 * plan.shift.c2 * plan.dt])]
    ops += _emit(block_sequence(plan.n_steps, plan.tau, merge=merge), plan.params, exact_blocks)
    return Circuit(NUM_QUBITS, ops)


def prepare_initial_state_circuit() -> Circuit:
    """Product state: spin-up sites 1..4 in 1,0,0,1 and spin-down in -,-,+,+."""
    kinds = {"1u": "X", "4u": "X", "1d": "PREPMINUS", "2d": "PREPMINUS", "3d": "PREPPLUS", "4d": "PREPPLUS"}
    return Circuit(NUM_QUBITS, [op(k, START_MAPPING.qubit_of(o)) for o, k in kinds.items()])


def system_blocks(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Split a 9-qubit unitary into ancilla-0 and ancilla-1 blocks.

    Returns:
        The two 256x256 diagonal blocks and the max-norm of the off-diagonal blocks.
    """
    d = u.shape[0] // 2
    off = max(np.abs(u[:d, d:]).max(), np.abs(u[d:, :d]).max())
    return u[:d, :d], u[d:, d:], float(off)


def controlled_v_exact(h_shifted: np.ndarray, dt: float) -> np.ndarray:
    """Block-diagonal ``diag(exp(+i dt H), exp(-i dt H))``."""
    fwd = dense_expm(h_shifted, dt)
    d = fwd.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = fwd.conj().T
    out[d:, d:] = fwd
    return out


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def controlled_v_error(plan: TrotterPlan, h_shifted: np.ndarray) -> float:
    """Spectral-norm distance between the Trotterized and the exact controlled ``V``."""
    u = circuit_unitary(build_controlled_v(plan))
    return spectral_norm(u - controlled_v_exact(h_shifted, plan.dt))
