from __future__ import annotations

import math

import numpy as np
import pytest

from qetu_hubbard.hubbard import (
    CANONICAL_ORDER,
    ModelParams,
    SpinOrbital,
    build_jw_hamiltonian,
    control_string,
    fswap_conjugate,
    mode_index,
    model_hamiltonian,
    number_operator,
    parity_string,
    shift_coefficients,
    split_hamiltonian,
)
from qetu_hubbard.oracle import fock_hamiltonian
from qetu_hubbard.pauli import PauliString, anticommutes, to_matrix


def test_canonical_order():
    labels = [o.label for o in CANONICAL_ORDER]
    assert labels == ["1u", "1d", "2d", "2u", "4u", "4d", "3d", "3u"]
    assert mode_index("3u") == 7
    assert SpinOrbital.parse("2d") == SpinOrbital(2, "d")


def test_term_counts():
    assert len(build_jw_hamiltonian(ModelParams())) == 20
    h1, h2, h3 = split_hamiltonian(ModelParams())
    assert (len(h1), len(h2), len(h3)) == (4, 8, 8)


@pytest.mark.parametrize("u,t", [(1.0, 1.0), (2.5, -0.3), (0.0, 1.0)])
def test_jw_matches_fock(u, t):
    p = ModelParams(u, t)
    assert np.abs(to_matrix(build_jw_hamiltonian(p)) - fock_hamiltonian(p)).max() <= 1e-12


def test_model_matches_jw_on_odd_parity_sector():
    p = ModelParams(1.3, 0.7)
    diff = to_matrix(model_hamiltonian(p)) - to_matrix(build_jw_hamiltonian(p))
    parity = np.diag(to_matrix(parity_string())).real
    odd = parity < 0
    assert np.abs(diff[np.ix_(odd, odd)]).max() <= 1e-12


def test_fswap_conjugation_rules():
    assert fswap_conjugate(PauliString("XI"), 0, 1) == PauliString("ZX")
    assert fswap_conjugate(PauliString("ZI"), 0, 1) == PauliString("IZ")
    assert fswap_conjugate(PauliString("IY"), 0, 1) == PauliString("YZ")


def test_control_strings_anticommute_with_their_blocks():
    h1, h2, h3 = split_hamiltonian(ModelParams())
    k1, k2 = control_string("X"), control_string("Z")
    assert all(anticommutes(k1, ps) for ps in h1.strings())
    assert all(anticommutes(k2, ps) for ps in h2.strings() + h3.strings())
    assert not all(anticommutes(k1, ps) for ps in h2.strings())


def test_number_operators_commute_with_model():
    h = to_matrix(model_hamiltonian(ModelParams()))
    for spin in "ud":
        n = to_matrix(number_operator(spin))
        assert np.abs(h @ n - n @ h).max() <= 1e-12


def test_shift_maps_interval():
    sh = shift_coefficients(-3.0, 5.0, 0.1)
    assert math.isclose(sh.apply(-3.0), 0.1)
    assert math.isclose(sh.apply(5.0), math.pi - 0.1)
    with pytest.raises(ValueError):
        shift_coefficients(1.0, 1.0)
    with pytest.raises(ValueError):
        shift_coefficients(0.0, 1.0, eta=2.0)


def test_bad_params():
    with pytest.raises(ValueError):
        ModelParams(float("nan"), 1.0)
