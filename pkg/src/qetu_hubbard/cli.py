"""Command-line experiments: spectrum, Trotter convergence, overlap and energy sweeps.

Every command writes one CSV (header row, floats with 17 significant
digits, rows sorted by their grid key) into ``--out``. Settings may come
from a flat ``key = value`` file given with ``--config``; explicit flags
override the file.

Exit codes: 0 success, 2 configuration error, 3 phase-solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import depth_excluding_rz, lower
from .hubbard import ModelParams
from .measurement import (
    EmptyPostSelectionError,
    ground_sector,
    measure_variants,
    mitigated_energy,
    write_counts_csv,
)
from .network import TrotterPlan, build_controlled_v, controlled_v_error
from .oracle import initial_product_state
from .qetu import (
    DEFAULT_C,
    DEFAULT_DT,
    DEFAULT_ETA,
    PhaseSolveError,
    design_filter,
    prepare_ground_state,
    qetu_base_circuit,
    setup_problem,
)
from .simulator import NoiseModel

log = logging.getLogger("qetu_hubbard")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class ExperimentConfig:
    """Settings shared by all commands."""

    u: float = 1.0
    t: float = 1.0
    eta: float = DEFAULT_ETA
    c: float = DEFAULT_C
    dt: float = DEFAULT_DT
    degrees: list[int] = field(default_factory=lambda: [30])
    steps: list[int] = field(default_factory=lambda: [1])
    noise: list[float] = field(default_factory=lambda: [0.0])
    shots: int = 10000
    seed: int = 0
    out: Path = Path(".")
    postselect: str = "both"
    postselect_sector: bool = False
    noise_backend: str = "density"
    dump_circuit: bool = False
    gnuplot: bool = False

    def validate(self) -> None:
        for name in ("degrees", "steps", "noise"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if any(d < 0 or d % 2 for d in self.degrees):
            raise ConfigError("degrees must be non-negative even integers")
        if any(n < 1 for n in self.steps):
            raise ConfigError("steps must be >= 1")
        if any(not 0 <= p <= 0.1 for p in self.noise):
            raise ConfigError("noise levels must lie in [0, 0.1]")
        if not 0 < self.eta < math.pi / 2:
            raise ConfigError("eta must lie in (0, pi/2)")
        if not 0 < self.c < 1:
            raise ConfigError("c must lie in (0, 1)")
        if self.postselect not in ("on", "off", "both"):
            raise ConfigError("postselect must be on, off or both")
        if self.noise_backend not in ("density", "trajectory"):
            raise ConfigError("noise backend must be density or trajectory")

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.u, self.t)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_CONVERTERS = {
    "u": float,
    "t": float,
    "eta": float,
    "c": float,
    "dt": float,
    "degrees": _int_list,
    "steps": _int_list,
    "noise": _float_list,
    "shots": int,
    "seed": int,
    "out": Path,
    "postselect": str,
    "postselect_sector": _bool,
    "noise_backend": str,
    "dump_circuit": _bool,
    "gnuplot": _bool,
}


def read_config_file(path: str | Path) -> dict[str, object]:
    """Parse a flat ``key = value`` file (a leading section header is optional)."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser()
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    raw: dict[str, str] = {}
    for section in parser.sections():
        raw.update(parser[section])
    return {k.replace("-", "_"): v for k, v in raw.items()}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _CONVERTERS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    unknown = set(values) - set(_CONVERTERS)
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")
    try:
        cfg = ExperimentConfig(**{k: _CONVERTERS[k](v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


# commands ------------------------------------------------------------------


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_gnuplot(cfg: ExperimentConfig, name: str, xcol: int, ycol: int, logscale: str = "") -> None:
    if not cfg.gnuplot:
        return
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set terminal pngcairo size 800,600\nset output '{name}.png'",
    ]
    if logscale:
        lines.append(f"set logscale {logscale}")
    lines.append(f"plot '{name}.csv' using {xcol}:{ycol} with linespoints")
    (cfg.out / f"{name}.gp").write_text("\n".join(lines) + "\n")


def cmd_spectrum(cfg: ExperimentConfig) -> int:
    """Oracle quantities of the model."""
    pb = setup_problem(cfg.params, cfg.eta)
    lam0, lam1 = pb.lambda0, pb.lambda1
    gamma = abs(np.vdot(pb.ground_state, initial_product_state()))
    rows = [
        ("lambda0", lam0),
        ("lambda1", lam1),
        ("mu", (lam0 + lam1) / 2),
        ("delta", lam1 - lam0),
        ("gamma", gamma),
        ("c1", pb.shift.c1),
        ("c2", pb.shift.c2),
    ]
    _write_csv(cfg.out / "spectrum.csv", ["quantity", "value"], [(k, fmt(v)) for k, v in rows])
    return EXIT_OK


def cmd_trotter(cfg: ExperimentConfig) -> int:
    """Trotter error and circuit depth of the controlled evolution."""
    pb = setup_problem(cfg.params, cfg.eta)
    rows = []
    for n in sorted(set(cfg.steps)):
        plan = TrotterPlan(n, cfg.dt, cfg.params, pb.shift)
        err = controlled_v_error(plan, pb.shifted_hamiltonian)
        plain = lower(build_controlled_v(plan, merge=False))
        merged = lower(build_controlled_v(plan, merge=True))
        if cfg.dump_circuit:
            (cfg.out / f"controlled_v_n{n}.txt").write_text(plain.dumps())
        rows.append((n, fmt(err), depth_excluding_rz(plain), depth_excluding_rz(merged)))
    _write_csv(cfg.out / "trotter.csv", ["n_steps", "l2_error", "depth_excl_rz", "depth_merged"], rows)
    _write_gnuplot(cfg, "trotter", 1, 2, "xy")
    return EXIT_OK


def cmd_overlap(cfg: ExperimentConfig) -> int:
    """Ground-state overlap after QETU versus polynomial degree."""
    pb = setup_problem(cfg.params, cfg.eta)
    rows, failed = [], False
    for n in sorted(set(cfg.steps)):
        for d in sorted(set(cfg.degrees)):
            try:
                res = prepare_ground_state(cfg.params, cfg.eta, cfg.c, d, n, cfg.seed, cfg.dt, problem=pb)
            except PhaseSolveError as exc:
                log.error("degree %d: %s", d, exc)
                rows.append((d, n, "nan", "nan", "phase_solve_failed"))
                failed = True
                continue
            if cfg.dump_circuit:
                (cfg.out / f"qetu_d{d}_n{n}.txt").write_text(res.circuit.dumps())
            rows.append((d, n, fmt(res.overlap_sq), fmt(res.success_probability), "ok"))
    _write_csv(cfg.out / "overlap.csv", ["degree", "n_steps", "overlap_sq", "success_prob", "status"], rows)
    _write_gnuplot(cfg, "overlap", 1, 3)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_energy(cfg: ExperimentConfig) -> int:
    """Energy estimation over the degree x noise grid, with and without post-selection."""
    pb = setup_problem(cfg.params, cfg.eta)
    sector = ground_sector(pb.ground_state)
    modes = {"off": (False,), "on": (True,), "both": (False, True)}[cfg.postselect]
    n_steps = cfg.steps[0]
    rows, failed = [], False
    for d in sorted(set(cfg.degrees)):
        try:
            _, phases = design_filter(pb, d, cfg.c, cfg.dt, cfg.seed)
        except PhaseSolveError as exc:
            log.error("degree %d: %s", d, exc)
            failed = True
            continue
        base = lower(qetu_base_circuit(pb, phases, n_steps, cfg.dt))
        if cfg.dump_circuit:
            (cfg.out / f"energy_base_d{d}.txt").write_text(base.dumps())
        for p2q in sorted(set(cfg.noise)):
            raw = measure_variants(base, cfg.shots, NoiseModel(p2q), cfg.seed, cfg.noise_backend)
            write_counts_csv(cfg.out / f"counts_d{d}_p{p2q:g}.csv", raw)
            for mit in modes:
                try:
                    e, _ = mitigated_energy(raw, cfg.params, sector, mit, cfg.postselect_sector)
                    rows.append((d, fmt(p2q), cfg.shots, int(mit), fmt(e), fmt(abs(e - pb.lambda0))))
                except EmptyPostSelectionError:
                    rows.append((d, fmt(p2q), cfg.shots, int(mit), "nan", "nan"))
    _write_csv(cfg.out / "energy.csv", ["degree", "p2q", "shots", "mitigated", "energy", "abs_error"], rows)
    _write_gnuplot(cfg, "energy", 2, 6, "xy")
    return EXIT_SOLVER if failed else EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "trotter": cmd_trotter, "overlap": cmd_overlap, "energy": cmd_energy}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qetu-hubbard", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--u", type=float)
        p.add_argument("--t", type=float)
        p.add_argument("--eta", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--degrees", help="comma-separated even degrees")
        p.add_argument("--steps", help="comma-separated Trotter step counts")
        p.add_argument("--noise", help="comma-separated two-qubit error rates")
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--postselect", choices=("on", "off", "both"))
        p.add_argument("--postselect-sector", dest="postselect_sector", action="store_const", const=True)
        p.add_argument("--noise-backend", dest="noise_backend", choices=("density", "trajectory"))
        p.add_argument("--dump-circuit", dest="dump_circuit", action="store_const", const=True)
        p.add_argument("--gnuplot", action="store_const", const=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, OSError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except PhaseSolveError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
