"""
Command-line front end: each subcommand runs one verification suite from a
flat ``key = value`` config (dotted sections) and writes CSV or JSON reports.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (a
quadrature that missed its tolerance or a check that did not pass).  Reports
are written before a numerical failure is signalled, with failing rows
flagged.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ._records import format_float, parse_record
from .modespace import GridError, ModeGrid, TangentVector
from .propagator import (
    QuadratureError,
    SliceSpec,
    SpacetimePoint,
    commutator_distribution,
    pauli_jordan_mode_sum,
    surface_independence_report,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


# --- config schema -----------------------------------------------------------


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(text: str) -> int:
    return int(text)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError("expected true or false")


def _floats(text: str) -> list[float]:
    return [_float(p) for p in text.split(",") if p.strip()]


def _vectors(text: str) -> list[list[float]]:
    """Comma-separated list of space-separated vectors."""
    return [[_float(v) for v in part.split()] for part in text.split(",") if part.strip()]


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], object]
    default: str
    help: str


def _grid_keys(d: int, N: int, L: float, m: float) -> dict[str, Key]:
    return {
        "grid.dimension": Key(_int, str(d), "spatial dimension, 1 or 3"),
        "grid.sites_per_axis": Key(_int, str(N), "even number of sites per axis"),
        "grid.box_length": Key(_float, repr(L), "periodic box length"),
        "grid.mass": Key(_float, repr(m), "field mass"),
    }


_COMMON = {
    "quadrature.tolerance": Key(_float, "1e-08", "absolute quadrature tolerance"),
    "quadrature.max_pieces": Key(_int, "400", "tail half-period budget"),
}

SCHEMAS: dict[str, tuple[str, dict[str, Key]]] = {
    "propagator": (
        "scalar",
        {
            **_grid_keys(1, 4096, 400.0, 1.0),
            **_COMMON,
            "propagator.times": Key(_floats, "1.0", "comma-separated t values of the sweep"),
            "propagator.positions": Key(_floats, "0.0", "comma-separated x values (first axis, others 0)"),
        },
    ),
    "bracket": (
        "scalar",
        {
            **_grid_keys(1, 4, 2 * math.pi, 1.0),
            **_COMMON,
            "bracket.seed": Key(_int, "0", "seed for random Jacobi triples"),
            "bracket.triples": Key(_int, "10", "number of random Jacobi triples per kind"),
        },
    ),
    "spectrum": (
        "scalar",
        {
            **_grid_keys(3, 6, 2 * math.pi, 0.0),
            **_COMMON,
            "fock.modes": Key(_vectors, "1 0 0, 2 0 0", "integer momentum labels n (k = 2 pi n / L), comma separated"),
            "fock.cutoff": Key(_int, "3", "maximum occupation per mode"),
            "fock.hbar": Key(_float, "1.0", "Planck constant"),
            "commutator.x": Key(_vectors, "0.7 0.2 0.1 0.0", "first point: t x1 .. xd"),
            "commutator.y": Key(_vectors, "0.0 0.0 0.0 0.0", "second point: t x1 .. xd"),
        },
    ),
    "slices": (
        "scalar",
        {
            **_grid_keys(1, 128, 40.0, 1.0),
            **_COMMON,
            "tangents.kind": Key(_choice("localized", "random"), "localized", "random tangent family"),
            "tangents.seed": Key(_int, "0", "seed for the two tangents"),
            "tangents.width": Key(_float, "1.0", "packet width for localized tangents"),
            "slices.rapidities": Key(_floats, "0.0, 0.0, 0.5", "rapidity of each slice"),
            "slices.offsets": Key(_floats, "0.0, 1.7, 0.0", "time at which each slice crosses the box centre"),
            "slices.nodes": Key(_int, "32", "Gauss-Legendre nodes per panel"),
            "slices.close_seam": Key(_bool, "false", "add the timelike seam flux to boosted windows"),
            "slices.tolerance": Key(_float, "1e-06", "pass threshold on the max pairwise deviation"),
        },
    ),
    "maxwell": (
        "maxwell",
        {
            **_grid_keys(3, 4, 2 * math.pi, 0.0),
            **_COMMON,
            "maxwell.seed": Key(_int, "0", "seed for the random probes"),
            "maxwell.points": Key(_vectors, "2.0 0.3 0.1 0.0, 0.5 2.0 0.0 0.0", "separations t x1 x2 x3 for the scalar factor"),
            "maxwell.small_mass": Key(_float, "0.001", "mass used for the continuity check"),
        },
    ),
    "dirac": (
        "dirac",
        {
            **_grid_keys(1, 64, 20.0, 1.0),
            **_COMMON,
            "dirac.points": Key(_vectors, "0.7 0.3, 0.2 1.9, 0.5 2.0", "separations t x1 .. xd"),
            "dirac.step": Key(_float, "0.0001", "finite-difference step"),
            "dirac.method": Key(_choice("quadrature", "mode_sum"), "quadrature", "source of the scalar distribution"),
            "dirac.fermion_modes": Key(_int, "4", "number of fermionic modes for the operator algebra"),
        },
    ),
}


def load_config(command: str, text: str | None, tolerance: float | None) -> dict[str, object]:
    """Merge defaults and the config text, validate every field, apply ``--tolerance``."""
    sector, schema = SCHEMAS[command]
    raw = {k: key.default for k, key in schema.items()}
    problems = []
    if text is not None:
        try:
            given = parse_record(text)
        except ValueError as exc:
            raise ConfigError(f"config: {exc}") from None
        if "sector" in given:
            if given.pop("sector") != sector:
                problems.append(f"sector: command {command!r} needs sector {sector!r}")
        for k in given:
            if k not in schema:
                problems.append(f"{k}: unknown key for {command!r}")
        raw.update({k: v for k, v in given.items() if k in schema})
    cfg: dict[str, object] = {}
    for k, v in raw.items():
        try:
            cfg[k] = schema[k].parse(v)
        except ValueError as exc:
            problems.append(f"{k}: {exc} (got {v!r})")
    if tolerance is not None:
        cfg["quadrature.tolerance"] = tolerance
    tol = cfg.get("quadrature.tolerance")
    if isinstance(tol, float) and not tol > 0:
        problems.append("quadrature.tolerance: must be positive")
    if not problems:
        try:
            cfg["grid"] = ModeGrid(
                cfg["grid.dimension"], cfg["grid.sites_per_axis"], cfg["grid.box_length"], cfg["grid.mass"]
            )
        except GridError as exc:
            problems.append(f"grid: {exc}")
    if not problems:
        problems.extend(_sector_checks(command, cfg))
    if problems:
        raise ConfigError("\n".join(problems))
    return cfg


def _points(cfg, key, grid: ModeGrid) -> list[SpacetimePoint]:
    pts = []
    for v in cfg[key]:
        if len(v) != grid.dimension + 1:
            raise ConfigError(f"{key}: each point needs {grid.dimension + 1} numbers (t and x), got {len(v)}")
        pts.append(SpacetimePoint.of(v))
    return pts


def _sector_checks(command: str, cfg) -> list[str]:
    grid: ModeGrid = cfg["grid"]
    out = []
    if command == "slices":
        if grid.dimension != 1:
            out.append("grid.dimension: slice integrals need a 1-D grid")
        if len(cfg["slices.rapidities"]) != len(cfg["slices.offsets"]):
            out.append("slices.offsets: needs one entry per rapidity")
        elif len(cfg["slices.rapidities"]) < 2:
            out.append("slices.rapidities: need at least two slices")
        if cfg["slices.nodes"] < 16:
            out.append("slices.nodes: at least 16")
    if command == "maxwell" and (grid.dimension != 3 or grid.mass != 0):
        out.append("grid: the photon sector needs a massless 3-D grid")
    if command == "dirac":
        if grid.mass <= 0:
            out.append("grid.mass: Dirac fields need a positive mass")
        if not 1 <= cfg["dirac.fermion_modes"] <= 12:
            out.append("dirac.fermion_modes: between 1 and 12")
        if not cfg["dirac.step"] > 0:
            out.append("dirac.step: must be positive")
    if command == "spectrum":
        if cfg["fock.cutoff"] < 1:
            out.append("fock.cutoff: at least 1")
        if not cfg["fock.hbar"] > 0:
            out.append("fock.hbar: must be positive")
        for label in cfg["fock.modes"]:
            try:
                grid.mode_index(np.asarray(label) * grid.mode_spacing)
            except KeyError as exc:
                out.append(f"fock.modes: {exc.args[0]}")
        size = (cfg["fock.cutoff"] + 1) ** max(len(cfg["fock.modes"]), 1)
        if not cfg["fock.modes"]:
            out.append("fock.modes: need at least one mode")
        elif size > 4096:
            out.append(f"fock.modes: basis of {size} states exceeds 4096")
    for key in ("commutator.x", "commutator.y", "dirac.points"):
        if key in cfg:
            for v in cfg[key]:
                if len(v) != grid.dimension + 1:
                    out.append(f"{key}: each point needs {grid.dimension + 1} numbers (t and x), got {len(v)}")
    if command == "maxwell":
        for v in cfg["maxwell.points"]:
            if len(v) != 4:
                out.append("maxwell.points: each point needs 4 numbers")
    if command == "bracket" and cfg["bracket.triples"] < 0:
        out.append("bracket.triples: must be non-negative")
    return out


# --- output ------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def _json_value(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else "null"
    if v is None:
        return "null"
    return json.dumps(str(v))


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[tuple]


def write_tables(out: Path, command: str, tables: list[Table], fmt: str, meta: dict) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        for t in tables:
            p = out / f"{t.name}.csv"
            lines = [",".join(t.header)] + [",".join(_cell(v) for v in row) for row in t.rows]
            p.write_text("\n".join(lines) + "\n")
            paths.append(p)
    else:
        payload = {"command": command, **meta}
        for t in tables:
            payload[t.name] = [dict(zip(t.header, row)) for row in t.rows]
        p = out / f"{command}.json"
        p.write_text(_json_value(payload) + "\n")
        paths.append(p)
    return paths


# --- commands ----------------------------------------------------------------


@dataclass
class Outcome:
    tables: list[Table]
    meta: dict
    failures: list[str]


def cmd_propagator(cfg) -> Outcome:
    grid: ModeGrid = cfg["grid"]
    rows, failures = [], []
    origin = SpacetimePoint(0.0, (0.0,) * grid.dimension)
    for t in cfg["propagator.times"]:
        for x in cfg["propagator.positions"]:
            p = SpacetimePoint(t, (x,) + (0.0,) * (grid.dimension - 1))
            modesum = pauli_jordan_mode_sum(grid, p)
            try:
                q = commutator_distribution(
                    grid.mass, grid.dimension, p, origin, cfg["quadrature.tolerance"], cfg["quadrature.max_pieces"]
                )
                value, err = q.value, q.error
            except (QuadratureError, ValueError) as exc:
                value = getattr(exc, "value", math.nan)
                value = float(np.real(value)) if value is not None else math.nan
                err = getattr(exc, "error", math.inf)
                failures.append(f"t={t:g} x={x:g}: {exc}")
            rows.append((t, x, modesum, value, err, abs(modesum - value)))
    header = ["t", "x", "delta_modesum", "delta_quadrature", "est_error", "abs_diff"]
    return Outcome([Table("propagator", header, rows)], {"grid": _grid_meta(grid)}, failures)


def cmd_bracket(cfg) -> Outcome:
    from .symplectic import hamiltonian, jacobi_residual, ladder_observable, poisson_bracket, random_observable

    grid: ModeGrid = cfg["grid"]
    gens = []
    for j in range(grid.size):
        label = " ".join(str(int(v)) for v in grid.integer_modes[j])
        gens.append((f"a[{label}]", ladder_observable(grid, j)))
        gens.append((f"a*[{label}]", ladder_observable(grid, j, conjugate=True)))
    basis = []
    for name_f, f in gens:
        for name_g, g in gens:
            c = poisson_bracket(f, g).constant
            basis.append((name_f, name_g, c.real, c.imag))
    rng = np.random.default_rng(cfg["bracket.seed"])
    jac = []
    H = hamiltonian(grid)
    for i in range(cfg["bracket.triples"]):
        f, g, h = (random_observable(grid, rng, 1) for _ in range(3))
        jac.append(("linear", i, jacobi_residual(f, g, h)))
        jac.append(("hamiltonian", i, jacobi_residual(H, f, g)))
        f, g, h = (random_observable(grid, rng, 2) for _ in range(3))
        jac.append(("bilinear", i, jacobi_residual(f, g, h)))
    failures = [f"{kind} triple {i}: Jacobi residual {r:.3g}" for kind, i, r in jac if r > 1e-12 * _scale(grid)]
    return Outcome(
        [
            Table("bracket_basis", ["f", "g", "re", "im"], basis),
            Table("bracket_jacobi", ["kind", "triple", "residual"], jac),
        ],
        {"grid": _grid_meta(grid)},
        failures,
    )


def _scale(grid: ModeGrid) -> float:
    # brackets with H carry factors of eps; compare relative to the largest
    return max(1.0, float(np.max(grid.energies)) ** 2)


def cmd_spectrum(cfg) -> Outcome:
    from .quantize import FockSpace, quantum_commutator_check, spectrum_rows

    grid: ModeGrid = cfg["grid"]
    modes = [grid.mode_index(np.asarray(n) * grid.mode_spacing) for n in cfg["fock.modes"]]
    space = FockSpace(grid, modes, cfg["fock.cutoff"], cfg["fock.hbar"])
    rows = [(" ".join(map(str, n)), e, e0) for n, e, e0 in spectrum_rows(space)]
    x = _points(cfg, "commutator.x", grid)[0]
    y = _points(cfg, "commutator.y", grid)[0]
    report = quantum_commutator_check(space, x, y)
    d = report.as_dict()
    comm = Table("commutator", list(d), [tuple(d.values())])
    failures = []
    if report.residual_norm > 1e-10:
        failures.append(f"commutator is not a multiple of the identity (residual {report.residual_norm:.3g})")
    if abs(report.hbar_delta - space.hbar * report.delta_classical) > 1e-10:
        failures.append("quantum commutator scalar differs from hbar times the classical bracket")
    meta = {"grid": _grid_meta(grid), "dim": space.dim}
    return Outcome([Table("spectrum", ["multi_index", "eigenvalue", "eigenvalue_normal_ordered"], rows), comm], meta, failures)


def cmd_slices(cfg) -> Outcome:
    grid: ModeGrid = cfg["grid"]
    rng = np.random.default_rng(cfg["tangents.seed"])
    if cfg["tangents.kind"] == "localized":
        d1, d2 = (TangentVector.localized(grid, rng, width=cfg["tangents.width"]) for _ in range(2))
    else:
        d1, d2 = (TangentVector.random(grid, rng) for _ in range(2))
    slices = [
        SliceSpec(rapidity=r, offset=o, nodes=cfg["slices.nodes"])
        for r, o in zip(cfg["slices.rapidities"], cfg["slices.offsets"])
    ]
    try:
        report = surface_independence_report(
            d1, d2, slices, cfg["slices.tolerance"], close_seam=cfg["slices.close_seam"]
        )
    except QuadratureError as exc:
        raise NumericalFailure(str(exc)) from None
    header = ["slice", "rapidity", "offset", "omega_re", "omega_im", "seam_abs"]
    summary = Table("slices_summary", ["max_deviation", "tolerance", "passed"], [(report.max_deviation, report.tolerance, report.passed)])
    failures = [] if report.passed else [f"max deviation {report.max_deviation:.3g} exceeds {report.tolerance:g}"]
    return Outcome([Table("slices", header, report.rows()), summary], {"grid": _grid_meta(grid)}, failures)


def cmd_maxwell(cfg) -> Outcome:
    from .maxwell import massless_scalar_factors, rank_rows

    grid: ModeGrid = cfg["grid"]
    rng = np.random.default_rng(cfg["maxwell.seed"])
    ranks = rank_rows(grid, rng=rng)
    failures = [f"mode {k}: ranks {ru}/{rc}, residual {r:.3g}" for k, ru, rc, r in ranks if rc != 2 or ru != 4 or r > 1e-12]
    rows = []
    tol = cfg["quadrature.tolerance"]
    for v in cfg["maxwell.points"]:
        p = SpacetimePoint.of(v)
        try:
            D0, L0 = massless_scalar_factors(p, 0.0, tol)
            D1, L1 = massless_scalar_factors(p, cfg["maxwell.small_mass"], tol)
        except (QuadratureError, ValueError) as exc:
            failures.append(f"point {v}: {exc}")
            rows.append((*v, math.nan, math.nan, math.nan, math.nan, math.nan))
            continue
        diff = max(abs(D0.value - D1.value), abs(L0.value - L1.value))
        rows.append((*v, D0.value.real, D0.value.imag, L0.value, L1.value, diff))
    header = ["t", "x1", "x2", "x3", "d_re", "d_im", "delta_massless", "delta_small_mass", "max_abs_diff"]
    return Outcome(
        [
            Table("maxwell_rank", ["k", "rank_unconstrained", "rank_constrained", "kernel_residual_max"], ranks),
            Table("maxwell_scalar", header, rows),
        ],
        {"grid": _grid_meta(grid)},
        failures,
    )


def cmd_dirac(cfg) -> Outcome:
    from .dirac import anticommutator_rows, dirac_anticommutator, fermionic_operators, mode_sum_anticommutator

    grid: ModeGrid = cfg["grid"]
    origin = SpacetimePoint(0.0, (0.0,) * grid.dimension)
    rows, cross, failures = [], [], []
    for p in _points(cfg, "dirac.points", grid):
        try:
            res = dirac_anticommutator(
                grid.mass, p, origin, cfg["dirac.step"], cfg["dirac.method"], grid, cfg["quadrature.tolerance"]
            )
        except (QuadratureError, ValueError) as exc:
            failures.append(f"point {p}: {exc}")
            continue
        rows.extend(anticommutator_rows(res, p, origin))
        fd = dirac_anticommutator(grid.mass, p, origin, cfg["dirac.step"], "mode_sum", grid)
        assembled = mode_sum_anticommutator(grid, p, origin)
        cross.append((p.t, " ".join(format_float(v) for v in p.x), float(np.max(np.abs(fd.matrix - assembled)))))
    ops = fermionic_operators(cfg["dirac.fermion_modes"])
    algebra = []
    eye = np.eye(ops[0].shape[0])
    for i, bi in enumerate(ops):
        for j, bj in enumerate(ops):
            bd = bj.T.conj()
            anti = (bi @ bd + bd @ bi).toarray() - (i == j) * eye
            same = (bi @ bj + bj @ bi).toarray()
            algebra.append((i, j, float(np.max(np.abs(anti))), float(np.max(np.abs(same)))))
    failures += [f"b_{i}, b_{j}: algebra residual" for i, j, r1, r2 in algebra if r1 or r2]
    return Outcome(
        [
            Table("dirac_anticommutator", ["t", "x", "alpha", "beta", "re", "im", "est_error"], rows),
            Table("dirac_crosscheck", ["t", "x", "max_abs_diff"], cross),
            Table("dirac_algebra", ["i", "j", "anticommutator_residual", "square_residual"], algebra),
        ],
        {"grid": _grid_meta(grid), "method": cfg["dirac.method"]},
        failures,
    )


class NumericalFailure(RuntimeError):
    pass


def _grid_meta(grid: ModeGrid) -> dict:
    return {
        "dimension": grid.dimension,
        "sites_per_axis": grid.sites_per_axis,
        "box_length": grid.box_length,
        "mass": grid.mass,
    }


COMMANDS = {
    "propagator": (cmd_propagator, "sweep Delta over (t, x): lattice mode sum against continuum quadrature"),
    "bracket": (cmd_bracket, "basis Poisson brackets and Jacobi residuals"),
    "spectrum": (cmd_spectrum, "Fock spectrum with and without normal ordering, quantum commutator"),
    "slices": (cmd_slices, "symplectic current on several slices (surface independence)"),
    "maxwell": (cmd_maxwell, "photon symplectic ranks, gauge kernel, massless scalar factor"),
    "dirac": (cmd_dirac, "Dirac anticommutator and fermionic operator algebra"),
}


def _defaults_help(command: str) -> str:
    sector, schema = SCHEMAS[command]
    lines = [f"config keys (sector = {sector}):"]
    for k, key in schema.items():
        lines.append(f"  {k} = {key.default}    {key.help}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covquant",
        description="Verification suites for covariant phase-space quantization of free fields.",
        epilog="exit codes: 0 success, 2 invalid configuration, 3 numerical failure",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(
            name, help=text, description=text, epilog=_defaults_help(name), formatter_class=argparse.RawDescriptionHelpFormatter
        )
        p.add_argument("--config", type=Path, help="key = value config file (dotted sections)")
        p.add_argument("--out", type=Path, default=Path("covquant-reports"), help="output directory (default: %(default)s)")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="report format (default: %(default)s)")
        p.add_argument("--tolerance", type=float, help="override quadrature.tolerance")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config is not None else None
    except OSError as exc:
        print(f"config: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.command, text, args.tolerance)
    except ConfigError as exc:
        print(f"invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    run = COMMANDS[args.command][0]
    try:
        outcome = run(cfg)
    except ConfigError as exc:
        print(f"invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    paths = write_tables(args.out, args.command, outcome.tables, args.format, outcome.meta)
    for p in paths:
        print(p)
    if outcome.failures:
        for f in outcome.failures:
            print(f"numerical failure: {f}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
