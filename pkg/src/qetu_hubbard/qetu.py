"""Eigenvalue filtering: step-function target, phase factors and the QETU circuit.

Conventions. The signal unitary for eigenvalue ``lam`` of the shifted
Hamiltonian is ``W = diag(e^{i s lam}, e^{-i s lam})`` with ``s`` equal to
the evolution time per controlled ``V``. For symmetric phases
``(phi_0, ..., phi_d)`` the ancilla-0 block of

    e^{i phi_0 X} W e^{i phi_1 X} W^dag ... W^dag e^{i phi_d X}

is real and equals an even polynomial ``F(cos(s lam))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import least_squares, minimize, minimize_scalar

from .circuit import Circuit, Gate, Op, circuit_unitary, lower, op
from .hubbard import ModelParams, ShiftCoefficients, model_hamiltonian, shift_coefficients
from .network import (
    ANCILLA,
    NUM_QUBITS,
    TrotterPlan,
    build_controlled_v,
    controlled_v_exact,
    prepare_initial_state_circuit,
)
from .oracle import Spectrum, exact_spectrum
from .pauli import to_matrix
from .simulator import apply_circuit, zero_state

DEFAULT_DT = 0.5
DEFAULT_ETA = 0.1
DEFAULT_C = 0.999


class PhaseSolveError(RuntimeError):
    """The phase optimization did not reach the requested residual."""


class InfeasibleFitError(ValueError):
    """The polynomial degree is too small to separate the two bands."""


@dataclass(frozen=True)
class StepFunctionSpec:
    """Two-plateau filter in the cosine domain ``x = cos(s * lambda)``."""

    mu: float
    delta: float
    eta: float
    c: float
    eps: float
    s: float
    sigma_plus: float
    sigma_minus: float
    sigma_min: float
    sigma_max: float


def build_step_spec(
    lambda0: float, lambda1: float, eta: float = DEFAULT_ETA, c: float = DEFAULT_C, eps: float = 1e-2, s: float = DEFAULT_DT
) -> StepFunctionSpec:
    """Thresholds for a filter passing ``lambda0`` and rejecting ``lambda1`` and above.

    Raises:
        ValueError: eigenvalues out of order or outside ``[eta, pi - eta]``.
    """
    tol = 1e-9
    if not lambda0 < lambda1:
        raise ValueError("need lambda0 < lambda1")
    if lambda0 < eta - tol or lambda1 > math.pi - eta + tol:
        raise ValueError("spectrum must lie in [eta, pi - eta]")
    if not 0 < c < 1:
        raise ValueError("plateau height c must lie in (0, 1)")
    mu, delta = (lambda0 + lambda1) / 2, lambda1 - lambda0
    return StepFunctionSpec(
        mu=mu,
        delta=delta,
        eta=eta,
        c=c,
        eps=eps,
        s=s,
        sigma_plus=math.cos(s * (mu - delta / 2)),
        sigma_minus=math.cos(s * (mu + delta / 2)),
        sigma_min=math.cos(s * (math.pi - eta)),
        sigma_max=math.cos(s * eta),
    )


@dataclass(frozen=True)
class TargetPolynomial:
    """Even Chebyshev series ``F(x) = sum_k c_k T_k(x)``.

    Attributes:
        coefficients: ``c_0 .. c_d``; odd entries are zero.
        pass_error: Max ``|F - c|`` on the pass band.
        stop_error: Max ``|F|`` on the stop band.
    """

    coefficients: np.ndarray
    pass_error: float = float("nan")
    stop_error: float = float("nan")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def band_error(self) -> float:
        return max(self.pass_error, self.stop_error)

    def __call__(self, x):
        return cheb.chebval(x, self.coefficients)

    def max_abs(self, points: int | None = None) -> float:
        points = points or 10 * max(self.degree, 1) + 1
        return float(np.abs(self(np.cos(np.linspace(0, math.pi, points)))).max())


def _band_grids(spec: StepFunctionSpec, d: int) -> tuple[np.ndarray, np.ndarray]:
    m = max(2 * d, 20)
    # pass band [sigma_plus, 1], stop band [0, sigma_minus]; evenness mirrors both
    th_pass = np.linspace(0.0, math.acos(min(spec.sigma_plus, 1.0)), m)
    th_stop = np.linspace(math.acos(spec.sigma_minus), math.pi / 2, 2 * m)
    return np.cos(th_pass), np.cos(th_stop)


def fit_target_polynomial(
    spec: StepFunctionSpec, d: int, bound: float = 1.0 - 1e-6, strict: bool = False
) -> TargetPolynomial:
    """Least-squares even polynomial for the two-plateau target with ``|F| <= bound``.

    The bound is imposed as linear inequality constraints on a dense grid of
    ``[0, 1]``; a post-check on a finer grid rescales any residual overshoot.

    Raises:
        ValueError: ``d`` odd or negative.
        InfeasibleFitError: with ``strict`` set and band error above 0.5.
    """
    if d < 0 or d % 2:
        raise ValueError("degree must be a non-negative even integer")
    ks = np.arange(0, d + 1, 2)
    x_pass, x_stop = _band_grids(spec, d)
    w_pass = np.full(len(x_pass), 1 / math.sqrt(len(x_pass)))
    w_stop = np.full(len(x_stop), 1 / math.sqrt(len(x_stop)))
    basis = lambda x: np.cos(np.outer(np.arccos(np.clip(x, -1, 1)), ks))  # noqa: E731
    a = np.vstack([basis(x_pass) * w_pass[:, None], basis(x_stop) * w_stop[:, None]])
    y = np.r_[spec.c * w_pass, np.zeros(len(x_stop))]
    grid = basis(np.cos(np.linspace(0, math.pi / 2, 20 * d + 101)))
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    if np.abs(grid @ coef).max() > bound:
        hess, lin = a.T @ a, a.T @ y
        start = coef * bound / np.abs(grid @ coef).max()
        res = minimize(
            lambda v: 0.5 * v @ hess @ v - lin @ v,
            start,
            jac=lambda v: hess @ v - lin,
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": lambda v: bound - grid @ v, "jac": lambda v: -grid},
                {"type": "ineq", "fun": lambda v: bound + grid @ v, "jac": lambda v: grid},
            ],
            options={"maxiter": 1000, "ftol": 1e-15},
        )
        coef = res.x
    full = np.zeros(d + 1)
    full[ks] = coef
    fine = np.cos(np.linspace(0, math.pi / 2, 200 * d + 1001))
    peak = np.abs(cheb.chebval(fine, full)).max()
    if peak > 1.0:
        full *= (1.0 - 1e-9) / peak
    xp, xs = _band_grids(spec, max(d, 50))
    out = TargetPolynomial(
        coefficients=full,
        pass_error=float(np.abs(cheb.chebval(xp, full) - spec.c).max()),
        stop_error=float(np.abs(cheb.chebval(xs, full)).max()),
    )
    if strict and out.band_error > 0.5:
        raise InfeasibleFitError(f"degree {d} too small: band error {out.band_error:.3f}")
    return out


# phase factors ---------------------------------------------------------------


@dataclass(frozen=True)
class PhaseSequence:
    """Symmetric phase angles ``phi_0 .. phi_d``."""

    angles: np.ndarray
    residual: float = 0.0

    def __post_init__(self) -> None:
        ang = np.asarray(self.angles, dtype=float)
        if ang.ndim != 1 or len(ang) == 0:
            raise ValueError("need at least one angle")
        if np.abs(ang - ang[::-1]).max() > 0:
            raise ValueError("phase angles must be symmetric")
        object.__setattr__(self, "angles", ang)

    @property
    def degree(self) -> int:
        return len(self.angles) - 1

    @classmethod
    def from_half(cls, half: Sequence[float], degree: int, residual: float = 0.0) -> PhaseSequence:
        half = np.asarray(half, dtype=float)
        tail = half[: degree + 1 - len(half)][::-1]
        return cls(np.r_[half, tail], residual)


def _qsp_block(angles: np.ndarray, x: np.ndarray) -> np.ndarray:
    th = np.arccos(x)
    ew = np.exp(1j * th)
    # running product of 2x2 matrices, one per x
    c, s = math.cos(angles[0]), math.sin(angles[0])
    m00 = np.full(x.shape, c, dtype=complex)
    m01 = np.full(x.shape, 1j * s, dtype=complex)
    m10, m11 = m01.copy(), m00.copy()
    for k in range(1, len(angles)):
        w = ew if k % 2 else ew.conj()
        # M <- M @ diag(w, w*)
        m00, m10 = m00 * w, m10 * w
        m01, m11 = m01 * w.conj(), m11 * w.conj()
        c, s = math.cos(angles[k]), math.sin(angles[k])
        m00, m01 = c * m00 + 1j * s * m01, 1j * s * m00 + c * m01
        m10, m11 = c * m10 + 1j * s * m11, 1j * s * m10 + c * m11
    return m00


def qsp_eval(phi: PhaseSequence | Sequence[float], x):
    """Real part of the (0,0) element of the alternating phase product at ``x``.

    Raises:
        ValueError: ``x`` outside ``[-1, 1]``.
    """
    angles = phi.angles if isinstance(phi, PhaseSequence) else np.asarray(phi, dtype=float)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1):
        raise ValueError("x must lie in [-1, 1]")
    out = _qsp_block(angles, np.atleast_1d(xa)).real
    return float(out[0]) if xa.ndim == 0 else out


def solve_phases(
    target: TargetPolynomial, tol: float = 1e-10, max_nfev: int = 2000, restarts: int = 3, seed: int = 0
) -> PhaseSequence:
    """Symmetric phases reproducing ``target`` at the Chebyshev nodes.

    Only ``d/2 + 1`` free angles are optimized. The start point
    ``(0, -pi/2, ..., -pi/2, 0)`` gives ``F = 0`` and a well-conditioned
    Jacobian in this alternating convention.

    Raises:
        PhaseSolveError: residual above ``1e-6`` after all restarts.
    """
    d = target.degree
    if d % 2:
        raise ValueError("target must have even degree")
    if d == 0:
        c0 = float(target.coefficients[0])
        if abs(c0) > 1:
            raise PhaseSolveError("constant target exceeds 1")
        return PhaseSequence(np.array([math.acos(c0)]), 0.0)
    nodes = np.cos((2 * np.arange(d + 1) + 1) * math.pi / (2 * (d + 1)))
    values = target(nodes)
    m = d // 2 + 1

    def residual(half: np.ndarray) -> np.ndarray:
        return _qsp_block(np.r_[half, half[-2::-1]], nodes).real - values

    rng = np.random.default_rng(seed)
    start = np.r_[0.0, np.full(m - 1, -math.pi / 2)]
    best = None
    for attempt in range(restarts + 1):
        x0 = start if attempt == 0 else start + 0.1 * rng.standard_normal(m)
        res = least_squares(residual, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        err = float(np.abs(res.fun).max())
        if best is None or err < best[1]:
            best = (res.x, err)
        if err <= tol:
            break
    half, err = best
    if err > 1e-6:
        raise PhaseSolveError(f"phase residual {err:.3g} after {restarts + 1} attempts")
    return PhaseSequence.from_half(half, d, err)


def matrix_function_oracle(h: np.ndarray, target: TargetPolynomial | np.ndarray, s: float) -> np.ndarray:
    """``Q F(cos(s Lambda)) Q^dag`` for ``H = Q Lambda Q^dag``."""
    w, q = np.linalg.eigh(h)
    coef = target.coefficients if isinstance(target, TargetPolynomial) else np.asarray(target)
    f = cheb.chebval(np.cos(s * w), coef)
    return (q * f) @ q.conj().T


# circuits ------------------------------------------------------------------


def ancilla_rotation(phi: float, qubit: int = ANCILLA) -> Op:
    """``exp(i phi X)`` on the ancilla, i.e. ``Rx(-2 phi)``."""
    return op("RX", qubit, params=[-2 * phi])


def build_qetu_circuit(phi: PhaseSequence, v: Circuit, ancilla: int = ANCILLA) -> Circuit:
    """Interleave ancilla rotations with ``V`` and ``V^dag``.

    Order: ``e^{i phi_0 X}, V, e^{i phi_1 X}, V^dag, ..., V^dag, e^{i phi_d X}``.
    """
    if phi.degree % 2:
        raise ValueError("QETU needs an even number of V applications")
    v_dag = v.inverse()
    ops = [ancilla_rotation(phi.angles[0], ancilla)]
    for k in range(1, phi.degree + 1):
        ops.extend((v if k % 2 else v_dag).ops)
        ops.append(ancilla_rotation(phi.angles[k], ancilla))
    return Circuit(v.num_qubits, ops)


def exact_v_circuit(h_shifted: np.ndarray, dt: float) -> Circuit:
    """Controlled ``V`` as one dense gate acting on the ancilla and the system."""
    n_sys = int(round(math.log2(h_shifted.shape[0])))
    mat = controlled_v_exact(h_shifted, dt)
    return Circuit(n_sys + 1, [Op(Gate("MATRIX", matrix=mat), tuple(range(n_sys + 1)))])


def lower_for_simulation(c: Circuit) -> Circuit:
    """Lower everything except explicit matrices."""
    out: list[Op] = []
    for o in c.ops:
        out.extend([o] if o.gate.kind == "MATRIX" else lower(Circuit(c.num_qubits, [o])).ops)
    return Circuit(c.num_qubits, out)


def calibrate_cosine_scale(dt: float = DEFAULT_DT, degree: int = 6, seed: int = 0) -> float:
    """Measure the cosine-argument scale ``s`` with a 1-qubit circuit oracle.

    A QETU circuit with random symmetric phases is built around an exact
    controlled evolution of a 1-qubit Hamiltonian with eigenvalues
    ``lam``; the scale ``s`` is fitted so that ``qsp_eval(phi, cos(s lam))``
    reproduces the circuit's ancilla-0 block.
    """
    rng = np.random.default_rng(seed)
    half = rng.uniform(-math.pi, math.pi, degree // 2 + 1)
    phi = PhaseSequence.from_half(half, degree)
    lams = np.linspace(0.2, 2.9, 12)
    measured = []
    for lam in lams:
        h = np.diag([lam, lam]).astype(complex)
        u = circuit_unitary(build_qetu_circuit(phi, exact_v_circuit(h, dt)))
        measured.append(u[0, 0])
    measured = np.asarray(measured)
    if np.abs(measured.imag).max() > 1e-9:
        raise RuntimeError("ancilla-0 block is not real")

    def mismatch(s: float) -> float:
        return float(np.sum((qsp_eval(phi, np.cos(s * lams)) - measured.real) ** 2))

    grid = np.linspace(0.05, 2.0, 400)
    s0 = grid[int(np.argmin([mismatch(s) for s in grid]))]
    res = minimize_scalar(mismatch, bracket=(s0 - 0.005, s0, s0 + 0.005), tol=1e-14)
    return float(res.x)


# ground-state preparation --------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """Model spectrum and shift for one parameter set."""

    params: ModelParams
    hamiltonian: np.ndarray
    spectrum: Spectrum
    shift: ShiftCoefficients

    @property
    def shifted_hamiltonian(self) -> np.ndarray:
        return self.shift.c1 * self.hamiltonian + self.shift.c2 * np.eye(self.hamiltonian.shape[0])

    @property
    def lambda0(self) -> float:
        return self.spectrum.ground_energy

    @property
    def lambda1(self) -> float:
        """First energy level strictly above the ground energy."""
        return float(self.spectrum.distinct_levels()[1])

    @property
    def ground_state(self) -> np.ndarray:
        return self.spectrum.ground_state

    def step_spec(self, c: float = DEFAULT_C, s: float = DEFAULT_DT) -> StepFunctionSpec:
        sh = self.shift
        return build_step_spec(sh.apply(self.lambda0), sh.apply(self.lambda1), sh.eta, c, s=s)


def setup_problem(params: ModelParams = ModelParams(), eta: float = DEFAULT_ETA) -> ProblemInstance:
    h = to_matrix(model_hamiltonian(params))
    spec = exact_spectrum(h)
    shift = shift_coefficients(spec.eigenvalues[0], spec.eigenvalues[-1], eta)
    return ProblemInstance(params, h, spec, shift)


@dataclass(frozen=True)
class PreparationResult:
    """Filtered system state and diagnostics."""

    state: np.ndarray
    success_probability: float
    overlap_sq: float
    target: TargetPolynomial
    phases: PhaseSequence
    circuit: Circuit = field(repr=False)


def design_filter(problem: ProblemInstance, d: int, c: float = DEFAULT_C, s: float = DEFAULT_DT, seed: int = 0):
    """Fit the target polynomial and solve its phases."""
    target = fit_target_polynomial(problem.step_spec(c, s), d)
    return target, solve_phases(target, seed=seed)


def qetu_base_circuit(
    problem: ProblemInstance, phases: PhaseSequence, n_steps: int = 1, dt: float = DEFAULT_DT, exact_v: bool = False
) -> Circuit:
    """Initial-state preparation followed by the QETU circuit (abstract gates)."""
    if exact_v:
        v = exact_v_circuit(problem.shifted_hamiltonian, dt)
    else:
        v = build_controlled_v(TrotterPlan(n_steps, dt, problem.params, problem.shift))
    return prepare_initial_state_circuit() + build_qetu_circuit(phases, v)


def prepare_ground_state(
    params: ModelParams = ModelParams(),
    eta: float = DEFAULT_ETA,
    c: float = DEFAULT_C,
    d: int = 30,
    n_steps: int = 1,
    seed: int = 0,
    dt: float = DEFAULT_DT,
    exact_v: bool = False,
    problem: ProblemInstance | None = None,
) -> PreparationResult:
    """Run initial-state preparation and QETU, then post-select the ancilla on ``|0>``.

    Raises:
        RuntimeError: vanishing success probability.
    """
    problem = problem or setup_problem(params, eta)
    target, phases = design_filter(problem, d, c, dt, seed)
    circuit = lower_for_simulation(qetu_base_circuit(problem, phases, n_steps, dt, exact_v))
    psi = apply_circuit(zero_state(NUM_QUBITS), circuit)
    half = psi.shape[0] // 2
    branch = psi[:half]
    prob = float(np.vdot(branch, branch).real)
    if prob < 1e-12:
        raise RuntimeError("ancilla success probability vanished")
    state = branch / math.sqrt(prob)
    overlap = float(abs(np.vdot(problem.ground_state, state)) ** 2)
    return PreparationResult(state, prob, overlap, target, phases, circuit)


# CSV serialization ---------------------------------------------------------


def write_series_csv(path, values: Sequence[float]) -> None:
    """Write ``index,value`` rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, v in enumerate(values):
            w.writerow([i, f"{float(v):.17g}"])


def read_series_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["value"]) for r in sorted(rows, key=lambda r: int(r["index"]))])
