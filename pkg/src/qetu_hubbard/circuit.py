"""Circuit IR over the native gate set, abstract gates and their lowering.

Native kinds (device gate set)::

    X, Y, RZ(lam), SX, SY, CPHASE(lam), ISWAP(theta, eta)

Abstract kinds::

    RZZ(theta), FSWAP, HOPXY(theta), C0X, C0Z, CPS0[paulis], BASISU,
    PREPPLUS, PREPMINUS, CNOT, H, RX(theta), MATRIX

All lowering rules hold up to a global phase. Multi-qubit gates list their
qubits in Kronecker order: the first qubit is the most significant factor of
the gate matrix (for controlled kinds it is the control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NATIVE_KINDS = frozenset({"X", "Y", "RZ", "SX", "SY", "CPHASE", "ISWAP"})
ABSTRACT_KINDS = frozenset(
    {"RZZ", "FSWAP", "HOPXY", "C0X", "C0Z", "CPS0", "BASISU", "PREPPLUS", "PREPMINUS", "CNOT", "H", "RX", "MATRIX"}
)
_N_PARAMS = {"RZ": 1, "CPHASE": 1, "ISWAP": 2, "RZZ": 1, "HOPXY": 1, "RX": 1}
_ARITY = {
    "X": 1, "Y": 1, "RZ": 1, "SX": 1, "SY": 1, "PREPPLUS": 1, "PREPMINUS": 1, "H": 1, "RX": 1,
    "CPHASE": 2, "ISWAP": 2, "RZZ": 2, "FSWAP": 2, "HOPXY": 2, "C0X": 2, "C0Z": 2, "BASISU": 2, "CNOT": 2,
}
_SELF_INVERSE = frozenset({"X", "Y", "FSWAP", "C0X", "C0Z", "CPS0", "BASISU", "CNOT", "H"})
_NEGATE_FIRST = frozenset({"RZ", "CPHASE", "ISWAP", "RZZ", "HOPXY", "RX"})

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_SY = 0.5 * np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]])
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_RY_HALF = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)
_S2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    """A gate kind with its real parameters.

    Attributes:
        kind: Name from ``NATIVE_KINDS`` or ``ABSTRACT_KINDS``.
        params: Angles in radians.
        paulis: Pauli letters for ``CPS0`` (one per target qubit).
        matrix: Explicit unitary for ``MATRIX`` gates.
    """

    kind: str
    params: tuple[float, ...] = ()
    paulis: str = ""
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in NATIVE_KINDS | ABSTRACT_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))
        if len(self.params) != _N_PARAMS.get(self.kind, 0):
            raise ValueError(f"{self.kind} takes {_N_PARAMS.get(self.kind, 0)} parameters")
        if self.kind == "CPS0" and (not self.paulis or set(self.paulis) - set("IXYZ")):
            raise ValueError("CPS0 needs a Pauli string")
        if self.kind == "MATRIX" and self.matrix is None:
            raise ValueError("MATRIX gate needs an explicit matrix")

    @property
    def native(self) -> bool:
        return self.kind in NATIVE_KINDS

    @property
    def num_qubits(self) -> int:
        if self.kind == "CPS0":
            return 1 + len(self.paulis)
        if self.kind == "MATRIX":
            return int(round(math.log2(self.matrix.shape[0])))
        return _ARITY[self.kind]

    def unitary(self) -> np.ndarray:
        return gate_matrix(self)

    def inverse(self) -> list[Gate]:
        """Gate sequence realizing the exact inverse (as an operator)."""
        k = self.kind
        if k in _SELF_INVERSE:
            return [self]
        if k in _NEGATE_FIRST:
            return [Gate(k, (-self.params[0],) + self.params[1:])]
        if k == "SX":  # SX^2 = X exactly
            return [Gate("SX"), Gate("X")]
        if k == "SY":  # SY^2 = Y exactly
            return [Gate("SY"), Gate("Y")]
        if k == "PREPPLUS":
            return [Gate("PREPMINUS")]
        if k == "PREPMINUS":
            return [Gate("PREPPLUS")]
        if k == "MATRIX":
            return [Gate("MATRIX", matrix=self.matrix.conj().T)]
        raise ValueError(f"no inverse for {k}")  # pragma: no cover


@dataclass(frozen=True)
class Op:
    """A gate applied to an ordered tuple of qubits."""

    gate: Gate
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.gate.num_qubits:
            raise ValueError(f"{self.gate.kind} acts on {self.gate.num_qubits} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")


def op(kind: str, *qubits: int, params: Sequence[float] = (), paulis: str = "") -> Op:
    """Shorthand constructor: ``op("CPHASE", 0, 1, params=[pi])``."""
    return Op(Gate(kind, tuple(params), paulis), qubits)


@dataclass(frozen=True)
class Circuit:
    """Immutable ordered list of operations on ``num_qubits`` qubits."""

    num_qubits: int
    ops: tuple[Op, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        for o in self.ops:
            if any(not 0 <= q < self.num_qubits for q in o.qubits):
                raise ValueError(f"qubit index out of range in {o}")

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: Circuit) -> Circuit:
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit-count mismatch")
        return Circuit(self.num_qubits, self.ops + other.ops)

    def extended(self, ops: Iterable[Op]) -> Circuit:
        return Circuit(self.num_qubits, self.ops + tuple(ops))

    def inverse(self) -> Circuit:
        """Reverse the op list and invert every gate."""
        out: list[Op] = []
        for o in reversed(self.ops):
            out.extend(Op(g, o.qubits) for g in o.gate.inverse())
        return Circuit(self.num_qubits, out)

    def is_native(self) -> bool:
        return all(o.gate.native for o in self.ops)

    def count(self, kind: str | None = None) -> int:
        return sum(1 for o in self.ops if kind is None or o.gate.kind == kind)

    def two_qubit_pairs(self) -> set[tuple[int, int]]:
        return {tuple(sorted(o.qubits)) for o in self.ops if len(o.qubits) == 2}

    def dumps(self) -> str:
        """Line-oriented text form: ``KIND q0 [q1 ...] [params...] [paulis]``."""
        lines = []
        for o in self.ops:
            g = o.gate
            if g.kind == "MATRIX":
                raise ValueError("MATRIX gates cannot be serialized")
            parts = [g.kind, *map(str, o.qubits), *(f"{x:.17g}" for x in g.params)]
            if g.paulis:
                parts.append(g.paulis)
            lines.append(" ".join(parts))
        return f"QUBITS {self.num_qubits}\n" + "".join(line + "\n" for line in lines)

    @classmethod
    def loads(cls, text: str) -> Circuit:
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0][0] != "QUBITS":
            raise ValueError("missing QUBITS header")
        n = int(lines[0][1])
        ops = []
        for parts in lines[1:]:
            kind, rest = parts[0], parts[1:]
            paulis = rest.pop() if rest and rest[-1].isalpha() else ""
            npar = _N_PARAMS.get(kind, 0)
            qubits = [int(x) for x in rest[: len(rest) - npar]]
            params = [float(x) for x in rest[len(rest) - npar:]] if npar else []
            ops.append(Op(Gate(kind, tuple(params), paulis), tuple(qubits)))
        return cls(n, ops)


# gate matrices -------------------------------------------------------------


def rz(lam: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * lam), np.exp(0.5j * lam)])


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def cphase(lam: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * lam)]).astype(complex)


def iswap(theta: float, eta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, 1j * np.exp(1j * eta) * s, 0],
            [0, 1j * np.exp(-1j * eta) * s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def rzz(theta: float) -> np.ndarray:
    """``exp(-i theta Z.Z / 2)``."""
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a])


_FSWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)
_BASISU = np.array([[1, 0, 0, 0], [0, _S2, _S2, 0], [0, _S2, -_S2, 0], [0, 0, 0, 1]], dtype=complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_PAULI = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


def _zero_controlled(target: np.ndarray) -> np.ndarray:
    d = target.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[:d, :d] = target
    return out


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of a gate in its own qubit order."""
    k, p = g.kind, g.params
    if k == "X":
        return _X
    if k == "Y":
        return _Y
    if k == "RZ":
        return rz(p[0])
    if k == "SX":
        return _SX
    if k == "SY":
        return _SY
    if k == "CPHASE":
        return cphase(p[0])
    if k == "ISWAP":
        return iswap(p[0], p[1])
    if k == "RZZ":
        return rzz(p[0])
    if k == "FSWAP":
        return _FSWAP
    if k == "HOPXY":  # exp(i theta/4 (XX + YY))
        return iswap(p[0], 0.0)
    if k == "C0X":
        return _zero_controlled(_X)
    if k == "C0Z":
        return _zero_controlled(_Z)
    if k == "CPS0":
        t = np.ones((1, 1), dtype=complex)
        for ch in g.paulis:
            t = np.kron(t, _PAULI[ch])
        return _zero_controlled(t)
    if k == "BASISU":
        return _BASISU
    if k == "PREPPLUS":
        return _RY_HALF
    if k == "PREPMINUS":
        return _RY_HALF.T
    if k == "CNOT":
        return _CNOT
    if k == "H":
        return _H
    if k == "RX":
        return rx(p[0])
    if k == "MATRIX":
        return np.asarray(g.matrix, dtype=complex)
    raise ValueError(k)  # pragma: no cover


# lowering ------------------------------------------------------------------

_PI = math.pi


def decompose_to_native(g: Gate, qubits: Sequence[int]) -> list[Op]:
    """Lower one gate to native operations (equal up to a global phase).

    Raises:
        ValueError: for kinds without a lowering rule (``MATRIX``).
    """
    q = tuple(qubits)
    k = g.kind
    if g.native:
        return [Op(g, q)]
    if k == "FSWAP":
        a, b = q
        return [op("ISWAP", a, b, params=(_PI, 0.0)), op("RZ", a, params=[-_PI / 2]), op("RZ", b, params=[-_PI / 2])]
    if k == "RZZ":
        a, b = q
        th = g.params[0]
        return [op("RZ", a, params=[th]), op("RZ", b, params=[th]), op("CPHASE", a, b, params=[-2 * th])]
    if k == "HOPXY":
        return [op("ISWAP", *q, params=(g.params[0], 0.0))]
    if k == "C0Z":
        c, t = q
        return [op("RZ", t, params=[_PI]), op("CPHASE", c, t, params=[_PI])]
    if k == "C0X":
        c, t = q
        return [
            op("RZ", c, params=[_PI]),
            op("SY", t),
            op("CPHASE", c, t, params=[-_PI]),
            op("SY", t),
            op("RZ", t, params=[_PI]),
        ]
    if k == "CPS0":
        out: list[Op] = []
        for ch, t in zip(g.paulis, q[1:]):
            if ch == "X":
                out += decompose_to_native(Gate("C0X"), (q[0], t))
            elif ch == "Z":
                out += decompose_to_native(Gate("C0Z"), (q[0], t))
            elif ch == "Y":
                # Y = i X Z: zero-controlled Z then X, plus a controlled phase i
                out += decompose_to_native(Gate("C0Z"), (q[0], t))
                out += decompose_to_native(Gate("C0X"), (q[0], t))
                out.append(op("RZ", q[0], params=[-_PI / 2]))
        return out
    if k == "BASISU":
        a, b = q
        return [op("ISWAP", a, b, params=(_PI / 2, -_PI / 2)), op("CPHASE", a, b, params=[_PI]), op("RZ", a, params=[_PI])]
    if k == "H":
        return [op("RZ", q[0], params=[_PI]), op("SY", q[0])]
    if k == "PREPPLUS":
        return [op("SY", q[0])]
    if k == "PREPMINUS":
        return [op("Y", q[0]), op("SY", q[0])]
    if k == "CNOT":
        c, t = q
        return [
            op("RZ", t, params=[_PI]),
            op("SY", t),
            op("CPHASE", c, t, params=[_PI]),
            op("RZ", t, params=[_PI]),
            op("SY", t),
        ]
    if k == "RX":
        return [op("RZ", q[0], params=[_PI]), op("SY", q[0]), op("RZ", q[0], params=[g.params[0] + _PI]), op("SY", q[0])]
    raise ValueError(f"no lowering rule for {k}")


def lower(c: Circuit) -> Circuit:
    """Lower every op of a circuit to native gates."""
    out: list[Op] = []
    for o in c.ops:
        out.extend(decompose_to_native(o.gate, o.qubits))
    return Circuit(c.num_qubits, out)


# dense unitaries -----------------------------------------------------------


def apply_matrix(tensor: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply ``mat`` to the leading ``n`` axes of a ``(2,)*n + rest`` tensor."""
    k = len(qubits)
    moved = np.moveaxis(tensor, qubits, range(k))
    shape = moved.shape
    res = (mat @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(res, range(k), qubits)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a circuit (product of embedded gate matrices)."""
    n = c.num_qubits
    if n > 10:
        raise ValueError("too many qubits for a dense unitary")
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for o in c.ops:
        u = apply_matrix(u, gate_matrix(o.gate), o.qubits, n)
    return u.reshape(dim, dim)


def phase_equivalent(u: np.ndarray, v: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff ``u = e^{i phi} v`` within ``tol`` in max norm."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    j = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[j]) == 0:
        return bool(np.abs(u).max() <= tol)
    ratio = u[j] / v[j]
    if abs(ratio) == 0:
        return False
    phase = ratio / abs(ratio)
    return bool(np.abs(u - phase * v).max() <= tol)


def depth_excluding_rz(c: Circuit) -> int:
    """Greedy as-soon-as-possible layer count with Rz gates taking no layer.

    Raises:
        ValueError: if the circuit still contains abstract gates.
    """
    level = [0] * c.num_qubits
    for o in c.ops:
        if not o.gate.native:
            raise ValueError(f"abstract gate {o.gate.kind} in depth computation")
        if o.gate.kind == "RZ":
            continue
        top = max(level[q] for q in o.qubits) + 1
        for q in o.qubits:
            level[q] = top
    return max(level, default=0)
