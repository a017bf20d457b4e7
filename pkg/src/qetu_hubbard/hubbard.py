"""2x2 Fermi-Hubbard model in Jordan-Wigner form.

Spin-orbitals are ordered along a closed loop through the lattice::

    1u, 1d, 2d, 2u, 4u, 4d, 3d, 3u

and the Jordan-Wigner qubit index of an orbital is its position in this
loop. Sites are laid out as ``1 2 / 3 4`` with bonds 1-2, 2-4, 4-3, 3-1.

Two Hamiltonians are provided:

* :func:`build_jw_hamiltonian` is the exact Jordan-Wigner image of the
  fermionic model (interior Z-strings along the loop).
* :func:`split_hamiltonian` returns the three commuting layers ``H1``,
  ``H2``, ``H3`` exactly as the swap-network circuit realizes them. ``H1``
  and ``H2`` act on loop neighbours, ``H3`` is the fSWAP-conjugate of the
  same nearest-neighbour hopping. Because the loop is closed, the wrap-around
  bond 3u-1u and its partner 3d-1d carry no Z-string through the rest of the
  loop; on the odd total-parity sector the sum ``H1 + H2 + H3`` coincides
  with the exact model, on the even sector those two bonds differ by the
  fermion-parity sign. :func:`model_hamiltonian` is this network sum and is
  the Hamiltonian whose ground state the circuits prepare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .pauli import PauliString, PauliSum, multiply

N_MODES = 8


class SpinOrbital(NamedTuple):
    """Lattice site (1..4) and spin (``"u"`` or ``"d"``)."""

    site: int
    spin: str

    @property
    def label(self) -> str:
        return f"{self.site}{self.spin}"

    @classmethod
    def parse(cls, label: str) -> SpinOrbital:
        site, spin = int(label[:-1]), label[-1]
        if site not in (1, 2, 3, 4) or spin not in ("u", "d"):
            raise ValueError(f"bad spin-orbital label {label!r}")
        return cls(site, spin)


CANONICAL_ORDER: tuple[SpinOrbital, ...] = tuple(
    SpinOrbital.parse(s) for s in ("1u", "1d", "2d", "2u", "4u", "4d", "3d", "3u")
)
BONDS: tuple[tuple[int, int], ...] = ((1, 2), (2, 4), (4, 3), (3, 1))

# loop edges (k, k+1 mod 8); odd edges hold the onsite pairs
ONSITE_EDGES: tuple[tuple[int, int], ...] = ((0, 1), (2, 3), (4, 5), (6, 7))
HOPPING_EDGES: tuple[tuple[int, int], ...] = ((1, 2), (3, 4), (5, 6), (7, 0))

# control strings: both act on 2u, 3u, 1d, 4d
CONTROL_ORBITALS: tuple[SpinOrbital, ...] = tuple(SpinOrbital.parse(s) for s in ("2u", "3u", "1d", "4d"))


def mode_index(orbital: SpinOrbital | str) -> int:
    """Jordan-Wigner qubit index of a spin-orbital."""
    if isinstance(orbital, str):
        orbital = SpinOrbital.parse(orbital)
    return CANONICAL_ORDER.index(orbital)


@dataclass(frozen=True)
class ModelParams:
    """Onsite repulsion ``u`` and hopping ``t``."""

    u: float = 1.0
    t: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.t)):
            raise ValueError("u and t must be finite")


@dataclass(frozen=True)
class ShiftCoefficients:
    """Affine map ``H -> c1*H + c2`` placing the spectrum in ``[eta, pi - eta]``."""

    c1: float
    c2: float
    eta: float

    def apply(self, energy: float) -> float:
        return self.c1 * energy + self.c2


def _zz(i: int, j: int) -> PauliString:
    return PauliString.from_sparse(N_MODES, {i: "Z", j: "Z"})


def _hop_strings(i: int, j: int, string: bool) -> tuple[PauliString, PauliString]:
    lo, hi = min(i, j), max(i, j)
    z = {k: "Z" for k in range(lo + 1, hi)} if string else {}
    return (
        PauliString.from_sparse(N_MODES, {**z, lo: "X", hi: "X"}),
        PauliString.from_sparse(N_MODES, {**z, lo: "Y", hi: "Y"}),
    )


def onsite_hamiltonian(p: ModelParams) -> PauliSum:
    """``(u/4) sum_i Z_{i,u} Z_{i,d}``."""
    terms = [(p.u / 4, _zz(mode_index(f"{s}u"), mode_index(f"{s}d"))) for s in (1, 2, 3, 4)]
    return PauliSum(N_MODES, terms)


def build_jw_hamiltonian(p: ModelParams) -> PauliSum:
    """Exact Jordan-Wigner form: 4 onsite ZZ terms and 16 hopping terms."""
    terms = list(onsite_hamiltonian(p))
    for a, b in BONDS:
        for spin in ("u", "d"):
            for ps in _hop_strings(mode_index(f"{a}{spin}"), mode_index(f"{b}{spin}"), True):
                terms.append((-p.t / 2, ps))
    return PauliSum(N_MODES, terms)


def fswap_conjugate(ps: PauliString, a: int, b: int) -> PauliString:
    """Return ``F ps F`` for the fermionic swap ``F`` on qubits ``a``, ``b``.

    ``F = SWAP * CZ``, so X_a -> Z_a X_b, Y_a -> Z_a Y_b, Z_a -> Z_b and
    symmetrically for ``b``.
    """
    n = ps.num_qubits
    out = PauliString.identity(n).with_phase(ps.phase)
    for q, ch in enumerate(ps.axes):
        if ch == "I":
            continue
        if q not in (a, b):
            img = PauliString.from_sparse(n, {q: ch})
        else:
            other = b if q == a else a
            img = PauliString.from_sparse(n, {other: ch} if ch == "Z" else {q: "Z", other: ch})
        out = multiply(out, img)
    return out


def split_hamiltonian(p: ModelParams) -> tuple[PauliSum, PauliSum, PauliSum]:
    """The three layers realized by the swap network.

    ``H1`` is the onsite term, ``H2`` the nearest-neighbour hopping on the
    loop edges (1d-2d, 2u-4u, 4d-3d, 3u-1u) and ``H3`` the hopping obtained by
    conjugating those same edges with the onsite-pair fSWAP layer
    (1u-2u, 2d-4d, 4u-3u, 3d-1d, each carrying two interior Z's).
    """
    h2_terms = []
    h3_terms = []
    for i, j in HOPPING_EDGES:
        for ps in _hop_strings(i, j, False):
            h2_terms.append((-p.t / 2, ps))
            img = ps
            for a, b in ONSITE_EDGES:
                img = fswap_conjugate(img, a, b)
            h3_terms.append((-p.t / 2, img))
    return onsite_hamiltonian(p), PauliSum(N_MODES, h2_terms), PauliSum(N_MODES, h3_terms)


def model_hamiltonian(p: ModelParams) -> PauliSum:
    """``H1 + H2 + H3`` of :func:`split_hamiltonian`."""
    h1, h2, h3 = split_hamiltonian(p)
    return h1 + h2 + h3


def control_string(letter: str) -> PauliString:
    """``K1`` (``letter="X"``) or ``K2`` (``letter="Z"``) on 2u, 3u, 1d, 4d."""
    return PauliString.from_sparse(N_MODES, {mode_index(o): letter for o in CONTROL_ORBITALS})


def parity_string() -> PauliString:
    """Total fermion parity ``Z^{(x)8}``."""
    return PauliString("Z" * N_MODES)


def number_operator(spin: str) -> PauliSum:
    """``N_spin = sum_i (I - Z_i)/2`` over the orbitals of one spin."""
    terms = []
    for k, orb in enumerate(CANONICAL_ORDER):
        if orb.spin == spin:
            terms.append((0.5, PauliString.identity(N_MODES)))
            terms.append((-0.5, PauliString.from_sparse(N_MODES, {k: "Z"})))
    return PauliSum(N_MODES, terms)


def shift_coefficients(lambda_min: float, lambda_max: float, eta: float = 0.1) -> ShiftCoefficients:
    """Coefficients mapping ``[lambda_min, lambda_max]`` onto ``[eta, pi - eta]``.

    Raises:
        ValueError: degenerate spectrum or ``eta`` outside ``(0, pi/2)``.
    """
    if not lambda_max > lambda_min:
        raise ValueError("lambda_max must exceed lambda_min")
    if not 0 < eta < math.pi / 2:
        raise ValueError("eta must lie in (0, pi/2)")
    c1 = (math.pi - 2 * eta) / (lambda_max - lambda_min)
    return ShiftCoefficients(c1=c1, c2=eta - c1 * lambda_min, eta=eta)
