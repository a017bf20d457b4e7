"""Signed Pauli strings, weighted Pauli sums and their dense matrices.

Qubit 0 is the leftmost Kronecker factor everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator

import numpy as np

_LETTERS = "IXYZ"
_UNITS = (1, -1, 1j, -1j)
_DENSE_LIMIT = 12

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, letter) with a.b = phase * letter
_PRODUCT = {}
for _a in _LETTERS:
    for _b in _LETTERS:
        _m = _MATS[_a] @ _MATS[_b]
        for _c in _LETTERS:
            _ph = np.trace(_MATS[_c].conj().T @ _m) / 2
            if abs(abs(_ph) - 1) < 1e-12:
                _PRODUCT[(_a, _b)] = (complex(np.round(_ph.real) + 1j * np.round(_ph.imag)), _c)


def _as_unit(phase: complex) -> complex:
    phase = complex(phase)
    for u in _UNITS:
        if abs(phase - u) < 1e-12:
            return complex(u)
    raise ValueError(f"phase {phase} is not one of +1, -1, +i, -i")


@dataclass(frozen=True)
class PauliString:
    """A Pauli operator ``phase * P_0 (x) P_1 (x) ... (x) P_{n-1}``.

    Attributes:
        axes: One letter from ``IXYZ`` per qubit.
        phase: One of +1, -1, +i, -i.
    """

    axes: str
    phase: complex = 1

    def __post_init__(self) -> None:
        if not self.axes or any(ch not in _LETTERS for ch in self.axes):
            raise ValueError(f"invalid Pauli letters {self.axes!r}")
        object.__setattr__(self, "phase", _as_unit(self.phase))

    @property
    def num_qubits(self) -> int:
        return len(self.axes)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str], phase: complex = 1) -> PauliString:
        """Build a string from ``{qubit: letter}``; unlisted qubits are identity."""
        letters = ["I"] * n
        for q, p in ops.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} outside 0..{n - 1}")
            letters[q] = p
        return cls("".join(letters), phase)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.axes) if ch != "I")

    def with_phase(self, phase: complex) -> PauliString:
        return PauliString(self.axes, phase)

    def matrix(self) -> np.ndarray:
        if self.num_qubits > _DENSE_LIMIT:
            raise ValueError("too many qubits for a dense matrix")
        return self.phase * reduce(np.kron, (_MATS[ch] for ch in self.axes))

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __str__(self) -> str:
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return f"{sign}{self.axes}"


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit-count mismatch: {a.num_qubits} vs {b.num_qubits}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Return the operator product ``a @ b`` with its phase tracked exactly."""
    _check_sizes(a, b)
    phase = a.phase * b.phase
    letters = []
    for x, y in zip(a.axes, b.axes):
        ph, c = _PRODUCT[(x, y)]
        phase *= ph
        letters.append(c)
    return PauliString("".join(letters), phase)


def anticommutes(a: PauliString, b: PauliString) -> bool:
    """True iff ``ab = -ba``: an odd number of positions with distinct non-identity letters."""
    _check_sizes(a, b)
    clash = sum(1 for x, y in zip(a.axes, b.axes) if x != "I" and y != "I" and x != y)
    return clash % 2 == 1


class PauliSum:
    """Real-weighted sum of Pauli strings.

    Duplicate strings are merged and zero coefficients are dropped. The
    stored strings always carry phase +1; a phase of -1 on input is folded
    into the coefficient, while an imaginary phase is kept on the string so
    that non-Hermitian sums remain representable.
    """

    def __init__(self, num_qubits: int, terms: Iterable[tuple[float, PauliString]] = (), tol: float = 0.0):
        self.num_qubits = int(num_qubits)
        acc: dict[tuple[str, complex], float] = {}
        for coeff, ps in terms:
            if ps.num_qubits != self.num_qubits:
                raise ValueError("all strings must share one qubit count")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            phase = ps.phase
            if phase.imag == 0 and phase.real < 0:
                coeff, phase = -coeff, complex(1)
            elif phase.imag < 0:
                coeff, phase = -coeff, complex(1j)
            key = (ps.axes, phase)
            acc[key] = acc.get(key, 0.0) + coeff
        self._terms = tuple(
            (c, PauliString(axes, ph)) for (axes, ph), c in acc.items() if abs(c) > tol
        )

    @property
    def terms(self) -> tuple[tuple[float, PauliString], ...]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self._terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit-count mismatch")
        return PauliSum(self.num_qubits, self._terms + other._terms)

    def scaled(self, factor: float) -> PauliSum:
        return PauliSum(self.num_qubits, ((factor * c, p) for c, p in self._terms))

    def is_hermitian(self) -> bool:
        return all(p.phase.imag == 0 for _, p in self._terms)

    def strings(self) -> list[PauliString]:
        return [p for _, p in self._terms]

    def __repr__(self) -> str:
        body = " ".join(f"{c:+.6g}*{p}" for c, p in self._terms)
        return f"PauliSum(n={self.num_qubits}: {body or '0'})"


def to_matrix(h: PauliSum | PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli sum (or single string)."""
    if isinstance(h, PauliString):
        return h.matrix()
    n = h.num_qubits
    if n > _DENSE_LIMIT:
        raise ValueError(f"{n} qubits is too many for a dense matrix (limit {_DENSE_LIMIT})")
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for coeff, ps in h:
        # P|j> = phase_j |j ^ xmask>, computed without forming Kronecker products
        xmask = 0
        zmask = 0
        ny = 0
        for q, ch in enumerate(ps.axes):
            bit = 1 << (n - 1 - q)
            if ch in "XY":
                xmask |= bit
            if ch in "YZ":
                zmask |= bit
            ny += ch == "Y"
        parity = np.bitwise_count(idx & zmask) & 1
        col_phase = (1j) ** ny * (1.0 - 2.0 * parity)
        out[idx ^ xmask, idx] += coeff * ps.phase * col_phase
    return out
