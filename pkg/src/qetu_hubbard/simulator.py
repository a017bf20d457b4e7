"""Statevector and density-matrix simulation with depolarizing and readout noise.

States are plain numpy arrays: a statevector has ``2**n`` amplitudes, a
density matrix is ``2**n x 2**n``. Basis index bits are big-endian, so the
bitstring of index ``i`` is ``format(i, f"0{n}b")`` and character ``q`` is
qubit ``q``.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .circuit import Circuit, Op, apply_matrix, gate_matrix
from .pauli import PauliSum, to_matrix

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.diag([1.0, -1.0]).astype(complex),
)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for substream ``stream`` of a master seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing and readout error rates.

    ``p1q`` defaults to ``p2q / 10`` and ``pmeas`` to ``10 * p2q``.
    """

    p2q: float = 0.0
    p1q: float | None = None
    pmeas: float | None = None

    def __post_init__(self) -> None:
        if self.p1q is None:
            object.__setattr__(self, "p1q", self.p2q / 10)
        if self.pmeas is None:
            object.__setattr__(self, "pmeas", 10 * self.p2q)
        for name in ("p2q", "p1q", "pmeas"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")

    @property
    def is_noiseless(self) -> bool:
        return self.p2q == 0 and self.p1q == 0 and self.pmeas == 0

    def gate_error(self, o: Op) -> float:
        """Depolarizing probability attached to an op (Rz gates are virtual)."""
        if o.gate.kind == "RZ":
            return 0.0
        return self.p1q if len(o.qubits) == 1 else self.p2q


class Counts(Mapping[str, int]):
    """Measured bitstrings and their occurrence counts."""

    def __init__(self, counts: Mapping[str, int], num_qubits: int | None = None):
        self._counts = {k: int(v) for k, v in sorted(counts.items()) if int(v) > 0}
        lengths = {len(k) for k in self._counts}
        if len(lengths) > 1:
            raise ValueError("bitstrings of different lengths")
        self.num_qubits = num_qubits if num_qubits is not None else (lengths.pop() if lengths else 0)

    def __getitem__(self, key: str) -> int:
        return self._counts[key]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    @property
    def shots(self) -> int:
        return sum(self._counts.values())

    def get(self, key: str, default: int = 0) -> int:
        return self._counts.get(key, default)

    def __add__(self, other: Counts) -> Counts:
        merged = defaultdict(int, self._counts)
        for k, v in other.items():
            merged[k] += v
        return Counts(merged, self.num_qubits)

    def probabilities(self) -> dict[str, float]:
        total = self.shots
        if total == 0:
            raise ValueError("no shots")
        return {k: v / total for k, v in self._counts.items()}

    def rows(self) -> list[tuple[str, int]]:
        return list(self._counts.items())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bitstring", "count"])
            w.writerows(self.rows())

    def __repr__(self) -> str:
        return f"Counts(shots={self.shots}, outcomes={len(self)})"


# kernels -------------------------------------------------------------------


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def _check_simulable(o: Op) -> None:
    if not (o.gate.native or o.gate.kind == "MATRIX"):
        raise ValueError(f"abstract gate {o.gate.kind} must be lowered before simulation")


def apply_circuit(state: np.ndarray, c: Circuit) -> np.ndarray:
    """Apply a lowered circuit to a statevector."""
    n = c.num_qubits
    if state.shape != (2**n,):
        raise ValueError("state dimension does not match the circuit")
    psi = np.asarray(state, dtype=complex).reshape((2,) * n)
    for o in c.ops:
        _check_simulable(o)
        psi = apply_matrix(psi, gate_matrix(o.gate), o.qubits, n)
    return psi.reshape(-1)


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    """Replace the state of ``qubits`` by the maximally mixed state with probability ``p``."""
    k = len(qubits)
    axes = list(qubits) + [n + q for q in qubits]
    moved = np.moveaxis(rho, axes, range(2 * k))
    shape = moved.shape
    m = moved.reshape(2**k, 2**k, -1)
    traced = np.einsum("iir->r", m)
    out = (1 - p) * m
    idx = np.arange(2**k)
    out[idx, idx, :] += (p / 2**k) * traced
    return np.moveaxis(out.reshape(shape), range(2 * k), axes)


def run_density(c: Circuit, noise: NoiseModel, rho0: np.ndarray | None = None) -> np.ndarray:
    """Evolve a density matrix through a noisy lowered circuit.

    Each gate is followed by a depolarizing channel on its qubits.
    """
    n = c.num_qubits
    if n > 10:
        raise ValueError("density simulation limited to 10 qubits")
    dim = 2**n
    if rho0 is None:
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[0, 0] = 1.0
    rho = np.asarray(rho0, dtype=complex).reshape((2,) * (2 * n))
    for o in c.ops:
        _check_simulable(o)
        u = gate_matrix(o.gate)
        rho = apply_matrix(rho, u, o.qubits, 2 * n)
        rho = apply_matrix(rho, u.conj(), [n + q for q in o.qubits], 2 * n)
        p = noise.gate_error(o)
        if p > 0:
            rho = _depolarize(rho, o.qubits, p, n)
    return rho.reshape(dim, dim)


def apply_readout_error(probs: np.ndarray, pmeas: float, n: int) -> np.ndarray:
    """Push a probability vector through independent symmetric bit flips."""
    if pmeas == 0:
        return probs
    flip = np.array([[1 - pmeas, pmeas], [pmeas, 1 - pmeas]])
    t = probs.reshape((2,) * n)
    for q in range(n):
        t = apply_matrix(t, flip, (q,), n)
    return t.reshape(-1)


def _clean(probs: np.ndarray) -> np.ndarray:
    probs = np.clip(np.real(probs), 0.0, None)
    return probs / probs.sum()


def sample_probabilities(probs: np.ndarray, shots: int, rng: np.random.Generator, n: int) -> Counts:
    """Draw ``shots`` outcomes from a probability vector."""
    hits = rng.multinomial(int(shots), _clean(probs))
    nz = np.flatnonzero(hits)
    return Counts({format(int(i), f"0{n}b"): int(hits[i]) for i in nz}, n)


def _random_pauli(rng: np.random.Generator, k: int) -> tuple[int, ...]:
    """Uniform non-identity Pauli on ``k`` qubits, as indices into ``_PAULIS``."""
    code = int(rng.integers(1, 4**k))
    return tuple((code >> (2 * (k - 1 - j))) & 3 for j in range(k))


def _trajectory_counts(c: Circuit, shots: int, noise: NoiseModel, seed: int, initial: np.ndarray) -> Counts:
    """Pauli-trajectory sampling.

    Each shot carries its own set of inserted Pauli errors; shots sharing an
    identical error pattern share one statevector run.
    """
    n = c.num_qubits
    rng = make_rng(seed, 0)
    patterns: dict[int, list[tuple[int, tuple[int, ...]]]] = defaultdict(list)
    for pos, o in enumerate(c.ops):
        p = noise.gate_error(o)
        if p <= 0:
            continue
        k = len(o.qubits)
        q = p * (4**k - 1) / 4**k
        hits = rng.binomial(shots, q)
        if hits:
            for shot in rng.choice(shots, size=hits, replace=False):
                patterns[int(shot)].append((pos, _random_pauli(rng, k)))
    groups: dict[tuple, int] = defaultdict(int)
    for shot_errors in patterns.values():
        groups[tuple(shot_errors)] += 1
    clean_shots = shots - len(patterns)
    if clean_shots:
        groups[()] += clean_shots
    total = Counts({}, n)
    for idx, (pattern, m) in enumerate(sorted(groups.items())):
        where = defaultdict(list)
        for pos, paulis in pattern:
            where[pos].append(paulis)
        psi = np.asarray(initial, dtype=complex).reshape((2,) * n)
        for pos, o in enumerate(c.ops):
            _check_simulable(o)
            psi = apply_matrix(psi, gate_matrix(o.gate), o.qubits, n)
            for paulis in where.get(pos, ()):
                for q, code in zip(o.qubits, paulis):
                    if code:
                        psi = apply_matrix(psi, _PAULIS[code], (q,), n)
        probs = apply_readout_error(np.abs(psi.reshape(-1)) ** 2, noise.pmeas, n)
        total = total + sample_probabilities(probs, m, make_rng(seed, idx + 1), n)
    return total


def sample(
    c: Circuit,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    backend: str = "density",
    initial: np.ndarray | None = None,
) -> Counts:
    """Measure every qubit at the end of ``c``.

    Args:
        c: Lowered circuit.
        shots: Number of repetitions.
        noise: Noise model; ``None`` means noiseless.
        seed: Master seed; identical inputs give identical counts.
        backend: ``"density"`` (exact channel, then sampling) or
            ``"trajectory"`` (stochastic Pauli insertions).
        initial: Initial statevector, default ``|0...0>``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    noise = noise or NoiseModel()
    n = c.num_qubits
    psi0 = zero_state(n) if initial is None else np.asarray(initial, dtype=complex)
    if noise.p1q == 0 and noise.p2q == 0:
        probs = np.abs(apply_circuit(psi0, c)) ** 2
    elif backend == "density":
        probs = np.real(np.diag(run_density(c, noise, np.outer(psi0, psi0.conj()))))
    elif backend == "trajectory":
        return _trajectory_counts(c, shots, noise, seed, psi0)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    probs = apply_readout_error(probs, noise.pmeas, n)
    return sample_probabilities(probs, shots, make_rng(seed, 0), n)


def expectation(state: np.ndarray, obs: PauliSum | np.ndarray) -> float:
    """``<psi|O|psi>`` for a Hermitian observable."""
    if isinstance(obs, PauliSum):
        if not obs.is_hermitian():
            raise ValueError("observable is not Hermitian")
        mat = to_matrix(obs)
    else:
        mat = np.asarray(obs)
        if np.abs(mat - mat.conj().T).max() > 1e-10:
            raise ValueError("observable is not Hermitian")
    if mat.shape[0] != state.shape[0]:
        raise ValueError("dimension mismatch")
    val = np.vdot(state, mat @ state)
    return float(val.real)


def total_variation(a: Counts, b: Counts) -> float:
    """Total-variation distance between two empirical distributions."""
    pa, pb = a.probabilities(), b.probabilities()
    keys: Iterable[str] = set(pa) | set(pb)
    return 0.5 * sum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in keys)
