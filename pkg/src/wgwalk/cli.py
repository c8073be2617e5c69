"""Command-line surface: layout, propagate, correlations, hom, tomography, fidelity.

Every subcommand reads one JSON run configuration and writes plot-ready
artifacts into the output directory. Exit codes are stable: 0 success, 2
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_run_config
from .coupling import build_coupling_matrix
from .geometry import pairwise_distances
from .polarization import (
    ReconstructionError,
    build_polarized_chip,
    pdl_report,
    poincare_ellipsoid,
    reconstruct_mueller,
    simulate_tomography,
)
from .propagation import evolve_amplitudes, propagate_z_dependent, unitary
from .twophoton import (
    gamma_distinguishable,
    gamma_indistinguishable,
    hom_scan,
    quantum_difference,
    similarity,
    visibility,
)

_NORMALIZATION_GUARD = 1e-9

RECORD_FILENAME = "tomography_record.csv"


def _out_dir(cfg: RunConfig) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir


def _wrote(path: Path) -> None:
    print(f"wrote {path}")


def _chip_propagators(cfg: RunConfig):
    """Coupling matrix at the final cross-section, fan-in matrix, total U."""
    c = build_coupling_matrix(
        cfg.layout, cfg.coupling, neighbor_cutoff=cfg.neighbor_cutoff_um
    )
    n = cfg.layout.n
    if cfg.layout.z_profile is not None:
        z0, z1 = cfg.layout.z_span
        fan = propagate_z_dependent(
            cfg.layout, cfg.coupling, z0, z1, cfg.steps, cfg.neighbor_cutoff_um
        ).matrix
    else:
        fan = np.eye(n, dtype=complex)
    total = unitary(c, cfg.z_mm).matrix @ fan
    return c, fan, total


def _input_pair(cfg: RunConfig) -> tuple:
    if len(cfg.input_ports) < 2:
        raise ConfigError("'input_ports' must list two ports for this command")
    i, j = cfg.input_ports[0], cfg.input_ports[1]
    if i == j:
        raise ConfigError("'input_ports' must list two distinct ports")
    return i, j


def cmd_layout(cfg: RunConfig) -> List[Path]:
    out = _out_dir(cfg)
    layout = cfg.layout
    payload = {
        "count": layout.n,
        "positions_um": layout.positions.tolist(),
        "z_span_mm": list(layout.z_span) if layout.z_span else None,
    }
    if layout.z_profile is not None:
        z0, z1 = layout.z_span
        samples = np.linspace(z0, z1, cfg.steps + 1)
        payload["profile"] = {
            "z_mm": samples.tolist(),
            "positions_um": [layout.positions_at(z).tolist() for z in samples],
        }
    layout_path = out / "layout.json"
    io.write_json(layout_path, payload, cfg.digest)
    distances_path = out / "distances.csv"
    io.write_matrix_csv(distances_path, pairwise_distances(layout), cfg.digest)
    for path in (layout_path, distances_path):
        _wrote(path)
    return [layout_path, distances_path]


def _check_rows_normalized(rows: np.ndarray, what: str) -> None:
    deviation = np.max(np.abs(rows.sum(axis=-1) - 1.0))
    if deviation > _NORMALIZATION_GUARD:
        raise ValueError(f"{what} not normalized (deviation {deviation:.3e})")


def cmd_propagate(cfg: RunConfig) -> List[Path]:
    out = _out_dir(cfg)
    c, fan, total = _chip_propagators(cfg)
    port = cfg.input_ports[0]
    grid = np.linspace(0.0, cfg.z_mm, cfg.trace_points)
    probabilities = np.abs(evolve_amplitudes(c, fan[:, port], grid)) ** 2
    _check_rows_normalized(probabilities, "intensity trace")

    trace_path = out / "trace.csv"
    columns = ["z"] + [f"p_{k + 1}" for k in range(cfg.layout.n)]
    rows = [[z, *row] for z, row in zip(grid, probabilities)]
    io.write_table_csv(trace_path, columns, rows, cfg.digest)

    unitary_path = out / "unitary.json"
    io.write_json(
        unitary_path,
        {
            "n_ports": cfg.layout.n,
            "input_port": port + 1,
            "z_mm": cfg.z_mm,
            "fan_in_span_mm": list(cfg.layout.z_span) if cfg.layout.z_span else None,
            "matrix_re_im": io.complex_matrix_payload(total),
        },
        cfg.digest,
    )
    for path in (trace_path, unitary_path):
        _wrote(path)
    return [trace_path, unitary_path]


def cmd_correlations(cfg: RunConfig) -> List[Path]:
    out = _out_dir(cfg)
    _, _, total = _chip_propagators(cfg)
    i, j = _input_pair(cfg)
    gi = gamma_indistinguishable(total, i, j)
    gd = gamma_distinguishable(total, i, j)
    diff = quantum_difference(total, i, j)
    for matrix in (gi, gd):
        deviation = abs(matrix.upper_triangle_sum() - 1.0)
        if deviation > _NORMALIZATION_GUARD:
            raise ValueError(
                f"{matrix.kind} correlations not normalized (deviation {deviation:.3e})"
            )
    paths = []
    for name, matrix in (
        ("gamma_indistinguishable", gi),
        ("gamma_distinguishable", gd),
        ("gamma_difference", diff),
    ):
        path = out / f"{name}.csv"
        io.write_matrix_csv(path, matrix.values, cfg.digest)
        paths.append(path)
    bundle_path = out / "correlations.json"
    io.write_json(
        bundle_path,
        {
            "input_ports": [i + 1, j + 1],
            "indistinguishable": gi.values.tolist(),
            "distinguishable": gd.values.tolist(),
            "difference": diff.values.tolist(),
        },
        cfg.digest,
    )
    paths.append(bundle_path)
    for path in paths:
        _wrote(path)
    return paths


def cmd_hom(cfg: RunConfig) -> List[Path]:
    if cfg.hom is None:
        raise ConfigError("missing config section 'hom'")
    out = _out_dir(cfg)
    _, _, total = _chip_propagators(cfg)
    i, j = _input_pair(cfg)
    scan = hom_scan(total, i, j, cfg.hom.delays, cfg.hom.coherence_sigma)

    n = cfg.layout.n
    pairs = [(k, l) for k in range(n) for l in range(k, n)]
    scan_path = out / "hom_scan.csv"
    columns = ["delay"] + [f"C_{k + 1}_{l + 1}" for k, l in pairs]
    rows = [
        [delay, *[scan.coincidences[d, k, l] for k, l in pairs]]
        for d, delay in enumerate(scan.delays)
    ]
    io.write_table_csv(scan_path, columns, rows, cfg.digest)

    summary = []
    for k, l in pairs:
        try:
            value = visibility(scan, (k, l), mode=cfg.hom.visibility_mode)
        except ValueError:
            value = None  # no coincidences at this pair
        summary.append({"output_pair": [k + 1, l + 1], "visibility": value})
    visibility_path = out / "visibility.json"
    io.write_json(
        visibility_path,
        {
            "input_ports": [i + 1, j + 1],
            "coherence_sigma": scan.coherence_sigma,
            "mode": cfg.hom.visibility_mode,
            "pairs": summary,
        },
        cfg.digest,
    )
    for path in (scan_path, visibility_path):
        _wrote(path)
    return [scan_path, visibility_path]


def _build_chip(cfg: RunConfig):
    if cfg.polarization is None:
        raise ConfigError("missing config section 'polarization'")
    pol = cfg.polarization
    return build_polarized_chip(
        cfg.layout,
        pol.model_h,
        pol.model_v,
        birefringence=pol.birefringence,
        pol_rotation=pol.pol_rotation,
        loss_h=pol.loss_h,
        loss_v=pol.loss_v,
        z=cfg.z_mm,
        neighbor_cutoff=cfg.neighbor_cutoff_um,
    )


def _load_record(cfg: RunConfig):
    path = cfg.out_dir / RECORD_FILENAME
    if not path.exists():
        raise ConfigError(f"tomography record not found: {path} (run mode 'simulate' first)")
    return io.read_record_csv(path)


def cmd_tomography(cfg: RunConfig, mode: str) -> List[Path]:
    out = _out_dir(cfg)
    if mode == "simulate":
        chip = _build_chip(cfg)
        rng = np.random.default_rng(cfg.seed)
        record = simulate_tomography(chip, cfg.polarization.photometric_noise, rng)
        record_path = out / RECORD_FILENAME
        io.write_record_csv(record_path, record, cfg.digest)
        _wrote(record_path)
        return [record_path]

    if mode == "reconstruct":
        array = reconstruct_mueller(_load_record(cfg))
        mueller_path = out / "mueller.json"
        io.write_json(
            mueller_path,
            {
                "n_ports": array.n_ports,
                "matrices": array.matrices.tolist(),
                "residuals": array.residuals.tolist(),
            },
            cfg.digest,
        )
        _wrote(mueller_path)
        return [mueller_path]

    if mode == "report":
        record = _load_record(cfg)
        array = reconstruct_mueller(record)
        n = array.n_ports
        ellipsoids = []
        for out_port in range(n):
            row = []
            for in_port in range(n):
                e = poincare_ellipsoid(array.matrices[out_port, in_port])
                row.append(
                    {
                        "output_port": out_port + 1,
                        "input_port": in_port + 1,
                        "center": e.center.tolist(),
                        "semi_axes": e.semi_axes.tolist(),
                        "orientation": e.orientation.tolist(),
                        "markers": {s: v.tolist() for s, v in sorted(e.markers.items())},
                        "average_power": e.average_power,
                        "degenerate": e.degenerate,
                    }
                )
            ellipsoids.append(row)
        ellipsoid_path = out / "ellipsoids.json"
        io.write_json(ellipsoid_path, {"ellipsoids": ellipsoids}, cfg.digest)
        pdl_path = out / "pdl.json"
        io.write_json(
            pdl_path,
            {"excess_v_loss_by_input_port": pdl_report(record).tolist()},
            cfg.digest,
        )
        for path in (ellipsoid_path, pdl_path):
            _wrote(path)
        return [ellipsoid_path, pdl_path]

    raise ConfigError(f"unknown tomography mode {mode!r}")


def cmd_fidelity(file_a, file_b, out_dir: str = ".") -> float:
    for path in (file_a, file_b):
        if not Path(path).exists():
            raise ConfigError(f"input file not found: {path}")
    a = io.read_matrix_csv(file_a)
    b = io.read_matrix_csv(file_b)
    value = similarity(a, b)
    print(f"S = {value!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "fidelity.json"
    io.write_json(
        path,
        {"similarity": value, "files": [Path(file_a).name, Path(file_b).name]},
    )
    _wrote(path)
    return value


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--steps", type=int, default=None, help="override z-integration steps")
    parser.add_argument("--noise", type=float, default=None, help="override photometric noise")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgwalk",
        description="Quantum walks of one and two photons in coupled waveguide arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("layout", "materialize the waveguide layout and its distance matrix"),
        ("propagate", "single-photon z-trace and final transfer matrix"),
        ("correlations", "two-photon correlation matrices for one input pair"),
        ("hom", "two-photon coincidences across relative input delays"),
        ("tomography", "simulate, reconstruct, or report six-state tomography"),
    ):
        cmd = sub.add_parser(name, help=text)
        _add_common_options(cmd)
        if name == "tomography":
            cmd.add_argument(
                "--mode",
                choices=("simulate", "reconstruct", "report"),
                default="simulate",
                help="which tomography stage to run",
            )
    fid = sub.add_parser("fidelity", help="overlap fidelity S between two matrix CSVs")
    fid.add_argument("file_a", help="first correlation-matrix CSV")
    fid.add_argument("file_b", help="second correlation-matrix CSV")
    fid.add_argument("--out", default=".", help="directory for fidelity.json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fidelity":
            cmd_fidelity(args.file_a, args.file_b, args.out)
            return 0
        cfg = load_run_config(
            args.config, seed=args.seed, steps=args.steps, noise=args.noise, out=args.out
        )
        if args.command == "layout":
            cmd_layout(cfg)
        elif args.command == "propagate":
            cmd_propagate(cfg)
        elif args.command == "correlations":
            cmd_correlations(cfg)
        elif args.command == "hom":
            cmd_hom(cfg)
        elif args.command == "tomography":
            cmd_tomography(cfg, args.mode)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, ArithmeticError, ReconstructionError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
