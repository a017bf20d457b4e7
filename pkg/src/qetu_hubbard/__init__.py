"""Eigenvalue-filter ground-state preparation for the 2x2 Fermi-Hubbard model.

Modules:
    pauli: Pauli strings and sums.
    hubbard: Model, Jordan-Wigner form and the swap-network splitting.
    circuit: Gate set, circuits, native lowering and depth.
    network: 3x3 grid layout and the controlled evolution circuit.
    simulator: Statevector and density-matrix simulation with noise.
    qetu: Filter polynomial, phase factors and the filtering circuit.
    measurement: Three-circuit energy estimation with post-selection.
    oracle: Fock-space reference Hamiltonian and exact diagonalization.
    cli: Experiment command line.
"""

__version__ = "0.1.0"
