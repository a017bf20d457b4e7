"""Three-circuit energy measurement with symmetry post-selection.

The model Hamiltonian splits into three commuting groups that are read out
in parallel:

* ``onsite``: the ``ZZ`` terms, measured directly in the computational basis.
* ``hopping_h2``: nearest-neighbour hops, diagonalized pairwise by ``BASISU``.
* ``hopping_h3``: the remaining hops, which become nearest-neighbour after an
  fSWAP layer on the onsite pairs; then ``BASISU`` as before.

After ``BASISU`` on a pair, ``P(01) - P(10)`` equals ``<(XX + YY) / 2>``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, lower, op
from .hubbard import ModelParams, number_operator
from .network import EXCHANGED_MAPPING, HOPPING_PAIRS, NUM_QUBITS, ONSITE_PAIRS, START_MAPPING, ModeMapping
from .pauli import to_matrix
from .simulator import (
    Counts,
    NoiseModel,
    apply_circuit,
    apply_readout_error,
    make_rng,
    run_density,
    sample,
    sample_probabilities,
    zero_state,
)

VARIANTS = ("onsite", "hopping_h2", "hopping_h3")


class EmptyPostSelectionError(ValueError):
    """Every shot was rejected."""


@dataclass(frozen=True)
class MeasurementPlan:
    """One measurement variant.

    Attributes:
        variant: One of ``VARIANTS``.
        pairs: Qubit pairs evaluated jointly.
        basis_change: Lowered layer appended before the final measurement.
        mapping: Spin-orbital placement when the qubits are read out.
        circuit: Base circuit followed by ``basis_change``.
    """

    variant: str
    pairs: tuple[tuple[int, int], ...]
    basis_change: Circuit
    mapping: ModeMapping
    circuit: Circuit = field(repr=False)


def basis_change_layer(variant: str) -> tuple[Circuit, tuple[tuple[int, int], ...], ModeMapping]:
    """Lowered pre-measurement layer, measured pairs and final mapping."""
    if variant == "onsite":
        return Circuit(NUM_QUBITS, []), ONSITE_PAIRS, START_MAPPING
    ops = []
    mapping = START_MAPPING
    if variant == "hopping_h3":
        ops += [op("FSWAP", a, b) for a, b in ONSITE_PAIRS]
        mapping = EXCHANGED_MAPPING
    elif variant != "hopping_h2":
        raise ValueError(f"unknown variant {variant!r}")
    ops += [op("BASISU", a, b) for a, b in HOPPING_PAIRS]
    return lower(Circuit(NUM_QUBITS, ops)), HOPPING_PAIRS, mapping


def build_measurement_circuits(base: Circuit) -> dict[str, MeasurementPlan]:
    """Append each variant's basis change to ``base``."""
    plans = {}
    for v in VARIANTS:
        layer, pairs, mapping = basis_change_layer(v)
        plans[v] = MeasurementPlan(v, pairs, layer, mapping, base + layer)
    return plans


# post-selection ------------------------------------------------------------


@dataclass(frozen=True)
class PostSelectionFilter:
    """Conserved quantities a valid shot must satisfy.

    ``None`` disables the corresponding particle-number check.
    """

    n_up: int | None = None
    n_down: int | None = None
    ancilla: int = 0
    ancilla_qubit: int = 0

    def __post_init__(self) -> None:
        for n in (self.n_up, self.n_down):
            if n is not None and not 0 <= n <= 4:
                raise ValueError("particle numbers must lie in 0..4")

    def accepts(self, bits: str, mapping: ModeMapping) -> bool:
        if int(bits[self.ancilla_qubit]) != self.ancilla:
            return False
        for spin, n in (("u", self.n_up), ("d", self.n_down)):
            if n is not None and sum(int(bits[q]) for q in mapping.qubits_with_spin(spin)) != n:
                return False
        return True


def post_select(counts: Counts, filt: PostSelectionFilter, mapping: ModeMapping) -> tuple[Counts, float]:
    """Keep the shots accepted by ``filt``.

    Returns:
        Filtered counts and the retained fraction.

    Raises:
        EmptyPostSelectionError: no shot survives.
    """
    kept = Counts({b: c for b, c in counts.items() if filt.accepts(b, mapping)}, counts.num_qubits)
    if kept.shots == 0:
        raise EmptyPostSelectionError("post-selection rejected every shot")
    return kept, kept.shots / counts.shots


def ground_sector(state: np.ndarray, tol: float = 1e-8) -> tuple[int, int]:
    """``(N_up, N_down)`` of a number-definite system state.

    Raises:
        ValueError: the state is not a particle-number eigenstate.
    """
    out = []
    for spin in ("u", "d"):
        n = to_matrix(number_operator(spin))
        mean = float(np.vdot(state, n @ state).real)
        var = float(np.vdot(state, n @ n @ state).real) - mean**2
        if var > tol or abs(mean - round(mean)) > 1e-6:
            raise ValueError("state has no definite particle number")
        out.append(int(round(mean)))
    return out[0], out[1]


def make_filter(sector: tuple[int, int], mitigate: bool, sector_down: bool = False) -> PostSelectionFilter:
    """Ancilla-only filter, or ancilla plus particle numbers when mitigating.

    The spin-down number is checked only with ``sector_down`` since the
    initial state is not number-definite in that sector.
    """
    if not mitigate:
        return PostSelectionFilter()
    return PostSelectionFilter(n_up=sector[0], n_down=sector[1] if sector_down else None)


# estimators ----------------------------------------------------------------


def pair_parities(counts: Counts, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """``<Z_a Z_b>`` for each pair."""
    total = counts.shots
    out = np.zeros(len(pairs))
    for bits, c in counts.items():
        for k, (a, b) in enumerate(pairs):
            out[k] += c * (1 if bits[a] == bits[b] else -1)
    return out / total


def pair_hops(counts: Counts, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """``P(01) - P(10)`` for each pair."""
    total = counts.shots
    out = np.zeros(len(pairs))
    for bits, c in counts.items():
        for k, (a, b) in enumerate(pairs):
            if bits[a] != bits[b]:
                out[k] += c if bits[a] == "0" else -c
    return out / total


def estimate_energy(counts: Mapping[str, Counts], p: ModelParams) -> float:
    """Energy from post-selected counts of the three variants.

    ``E = (u/4) sum <ZZ> - t sum (P01 - P10)`` over both hopping variants.

    Raises:
        EmptyPostSelectionError: a variant has no shots.
    """
    for v in VARIANTS:
        if counts[v].shots == 0:
            raise EmptyPostSelectionError(f"no shots for {v}")
    onsite = pair_parities(counts["onsite"], ONSITE_PAIRS).sum()
    hops = pair_hops(counts["hopping_h2"], HOPPING_PAIRS).sum() + pair_hops(counts["hopping_h3"], HOPPING_PAIRS).sum()
    return float(p.u / 4 * onsite - p.t * hops)


def exact_variant_probabilities(state: np.ndarray, variant: str) -> np.ndarray:
    """Noiseless outcome distribution of a variant for a 9-qubit statevector."""
    layer, _, _ = basis_change_layer(variant)
    return np.abs(apply_circuit(state, layer)) ** 2


def variant_probabilities(base: Circuit, noise: NoiseModel | None = None) -> dict[str, np.ndarray]:
    """Outcome distributions of the three variants, readout error included.

    The base circuit is simulated once (statevector when noiseless, density
    matrix otherwise) and shared across the variants.
    """
    noise = noise or NoiseModel()
    noiseless = noise.p1q == 0 and noise.p2q == 0
    if noiseless:
        psi = apply_circuit(zero_state(NUM_QUBITS), base)
    else:
        rho = run_density(base, noise)
    out = {}
    for v in VARIANTS:
        layer = basis_change_layer(v)[0]
        if noiseless:
            probs = np.abs(apply_circuit(psi, layer)) ** 2
        else:
            probs = np.real(np.diag(run_density(layer, noise, rho)))
        out[v] = apply_readout_error(probs, noise.pmeas, NUM_QUBITS)
    return out


def sample_variants(probs: Mapping[str, np.ndarray], shots: int, seed: int = 0) -> dict[str, Counts]:
    """Draw ``shots`` outcomes per variant; variant ``k`` uses substream ``k`` of ``seed``."""
    return {v: sample_probabilities(probs[v], shots, make_rng(seed, k), NUM_QUBITS) for k, v in enumerate(VARIANTS)}


def measure_variants(
    base: Circuit,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    backend: str = "density",
) -> dict[str, Counts]:
    """Sample all three variants, each with ``shots`` repetitions."""
    noise = noise or NoiseModel()
    if backend not in ("density", "trajectory"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "trajectory" and not (noise.p1q == 0 and noise.p2q == 0):
        plans = build_measurement_circuits(base)
        return {
            v: sample(plans[v].circuit, shots, noise, seed=seed * 16 + k, backend="trajectory")
            for k, v in enumerate(VARIANTS)
        }
    return sample_variants(variant_probabilities(base, noise), shots, seed)


def mitigated_energy(
    raw: Mapping[str, Counts],
    p: ModelParams,
    sector: tuple[int, int],
    mitigate: bool,
    sector_down: bool = False,
) -> tuple[float, float]:
    """Post-select every variant, then estimate the energy.

    Returns:
        Energy and the mean retained fraction.
    """
    filt = make_filter(sector, mitigate, sector_down)
    kept, fractions = {}, []
    for v in VARIANTS:
        mapping = basis_change_layer(v)[2]
        kept[v], frac = post_select(raw[v], filt, mapping)
        fractions.append(frac)
    return estimate_energy(kept, p), float(np.mean(fractions))


def write_counts_csv(path, counts: Mapping[str, Counts]) -> None:
    """``variant,bitstring,count`` rows sorted by variant then bitstring."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "bitstring", "count"])
        for v in sorted(counts):
            w.writerows((v, b, c) for b, c in counts[v].rows())


def standard_error(values: Sequence[float]) -> float:
    vals = np.asarray(values, dtype=float)
    return float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
