"""Command-line entry point: ``rissim <subcommand> [flags]``.

Exit status is 0 on success, 1 for any modelling or I/O error (one line on
stderr) and 2 for invalid flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import analysis, rf_design
from .array_model import LinkGeometry, PhaseSet, SteeringAngles, continuous_optimum, link_cascade, optimal_config
from .board import BoardSpec, load_pattern, named_pattern, virtual_geometry
from .codebook import build_codebook, dumps_codebook, load_codebook
from .control_plane import CELL_LATENCY_S, BoardBusState, bus_line_count, program_board
from .errors import RisError


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _board(args) -> BoardSpec:
    return BoardSpec(args.nx, args.ny, args.frequency_ghz * 1e9)


def _pattern(args, board: BoardSpec):
    if getattr(args, "pattern_file", None):
        return load_pattern(args.pattern_file, board)
    return named_pattern(args.pattern, board)


def cmd_design(args) -> int:
    base = rf_design.PRESETS[args.preset]
    substrate = rf_design.SubstrateSpec(
        args.eps_r if args.eps_r is not None else base.substrate.eps_r,
        args.height_mm * 1e-3 if args.height_mm is not None else base.substrate.height_m,
    )
    freq = args.frequency_ghz * 1e9 if args.frequency_ghz is not None else base.frequency_hz
    preset = rf_design.DesignPreset(base.name, freq, substrate)
    rows = rf_design.design_report(preset, v_f=args.vf)
    if args.format == "json":
        text = analysis.to_json({"preset": preset.name, "quantities": rows})
    else:
        width = max(len(r["quantity"]) for r in rows)
        text = "".join(f"{r['quantity']:<{width}}  {r['value']:>12.4f}  {r['unit']}\n" for r in rows)
    _emit(text, args.output)
    return 0


def cmd_codebook(args) -> int:
    board = _board(args)
    pattern = _pattern(args, board)
    geometry = virtual_geometry(board, pattern) if args.virtual else board.geometry(pattern.mask)
    cb = build_codebook(
        geometry,
        spacing_deg=args.spacing,
        az_range=tuple(args.az_range),
        el_range=tuple(args.el_range),
        phase_set=PhaseSet.default(),
        method=args.method,
    )
    _emit(dumps_codebook(cb), args.output)
    if args.output:
        print(f"wrote {len(cb)} entries for a {geometry.nx}x{geometry.ny} array to {args.output}", file=sys.stderr)
    return 0


def _scenario(args) -> analysis.Scenario:
    board = _board(args)
    link = LinkGeometry(
        d_t=args.d_t,
        d_r=args.d_r,
        beta0=args.beta0,
        tx_angles=SteeringAngles.from_degrees(args.tx_az, args.tx_el),
        rx_angles=SteeringAngles.from_degrees(args.rx_az, args.rx_el),
    )
    return analysis.Scenario(
        link=link,
        board=board,
        pattern=_pattern(args, board),
        tx_power_dbm=args.tx_power_dbm,
        antenna_gain_dbi=args.gain_dbi,
    )


def cmd_pattern(args) -> int:
    scenario = _scenario(args)
    g = scenario.geometry
    if args.codebook:
        cb = load_codebook(args.codebook)
        entry = cb[args.entry] if args.entry is not None else cb.nearest(args.rx_az, args.rx_el)
        config = entry.config
    else:
        hbar = link_cascade(g, scenario.link)
        config = continuous_optimum(hbar, g) if args.continuous else optimal_config(hbar, PhaseSet.default(), g)
    az = analysis.sweep_axis(args.az_range[0], args.az_range[1], args.step)
    el = analysis.sweep_axis(args.el_range[0], args.el_range[1], args.step)
    grid = analysis.beampattern(scenario, config, az, el)
    summary = analysis.peak_and_hpbw(grid)
    report = {"summary": summary.as_dict()}
    if args.verify_grating:
        vg = virtual_geometry(scenario.board, scenario.pattern)
        predicted = analysis.grating_lobes(vg.delta, scenario.link.rx_angles)
        matches = analysis.verify_grating(grid, predicted, within_db=args.lobe_db)
        report["grating"] = {
            "delta": vg.delta,
            "lobes": [
                {"predicted_deg": m.predicted_deg, "simulated_deg": m.simulated_deg, "matched": m.matched}
                for m in matches
            ],
        }
    if args.format == "json":
        report["azimuths_deg"] = grid.azimuths_deg
        report["elevations_deg"] = grid.elevations_deg
        report["power_dbm"] = np.round(grid.power_dbm, 6)
        _emit(analysis.to_json(report), args.output)
        return 0
    if args.output:
        grid.to_csv(args.output)
    sys.stdout.write(analysis.to_json(report))
    return 0


def cmd_scaling(args) -> int:
    scenario = _scenario(args)
    phase_set = None if args.continuous else PhaseSet.default()
    points = analysis.scaling_law(args.n, scenario, phase_set)
    rows = [
        {
            "n": p.n,
            "simulated_dbm": p.simulated_dbm,
            "model_dbm": p.model_dbm,
            "measured_dbm": analysis.MEASURED_PEAK_DBM.get(p.n),
        }
        for p in points
    ]
    text = _rows_to_csv(rows) if args.format == "csv" else analysis.to_json(rows)
    _emit(text, args.output)
    return 0


def cmd_grating(args) -> int:
    board = _board(args)
    pattern = _pattern(args, board)
    vg = virtual_geometry(board, pattern)
    delta = args.delta if args.delta is not None else vg.delta
    target = SteeringAngles.from_degrees(args.target_az, args.target_el)
    lobes = analysis.grating_lobes(delta, target)
    report = {"delta": delta, "target_deg": target.degrees, "lobes_deg": [lobe.degrees for lobe in lobes]}
    if args.verify:
        link = LinkGeometry(1.0, 1.0, 1.0, target, target)
        scenario = analysis.Scenario(link=link, board=board, pattern=pattern)
        g = scenario.geometry
        config = optimal_config(link_cascade(g, link), PhaseSet.default(), g)
        axis = analysis.sweep_axis(-90, 90, args.step)
        grid = analysis.beampattern(scenario, config, axis, axis)
        matches = analysis.verify_grating(grid, lobes, within_db=args.lobe_db)
        report["verification"] = [
            {"predicted_deg": m.predicted_deg, "simulated_deg": m.simulated_deg, "matched": m.matched}
            for m in matches
        ]
    _emit(analysis.to_json(report), args.output)
    return 0


def cmd_program(args) -> int:
    cb = load_codebook(args.codebook)
    entry = cb[args.entry] if args.entry is not None else cb.nearest(args.azimuth, args.elevation)
    g = cb.geometry
    state = BoardBusState(g.nx, g.ny, board_id=args.board_id)
    trace = program_board(state, entry.config, cell_latency_s=args.latency_ms * 1e-3)
    buf = io.StringIO()
    trace.to_csv(buf)
    _emit(buf.getvalue(), args.output)
    sel, phase = bus_line_count(g.nx, g.ny)
    az, el = entry.target.degrees
    print(
        f"programmed {len(trace)} cells for target ({az:g}, {el:g}) deg in {trace.estimated_time_s * 1e3:.2f} ms "
        f"over {sel} selection + {phase} phase lines",
        file=sys.stderr,
    )
    return 0


def cmd_cost(args) -> int:
    rows = analysis.cost_table(args.boards)
    text = _rows_to_csv(rows) if args.format == "csv" else analysis.to_json(rows)
    _emit(text, args.output)
    return 0


def _add_board(p: argparse.ArgumentParser, pattern_default: str = "full") -> None:
    p.add_argument("--nx", type=int, default=10, help="cells along x per board")
    p.add_argument("--ny", type=int, default=10, help="cells along y per board")
    p.add_argument("--frequency-ghz", type=float, default=5.3, help="operating frequency")
    p.add_argument("--pattern", default=pattern_default, help="activation pattern: NxM, offK or full")
    p.add_argument("--pattern-file", help="0/1 text grid, ny rows of nx characters, top row first")


def _add_link(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tx-az", type=float, default=0.0, help="TX azimuth (deg)")
    p.add_argument("--tx-el", type=float, default=33.0, help="TX elevation (deg)")
    p.add_argument("--rx-az", type=float, default=0.0, help="RX azimuth (deg)")
    p.add_argument("--rx-el", type=float, default=-3.0, help="RX elevation (deg)")
    p.add_argument("--d-t", type=float, default=1.1, help="TX-RIS distance (m)")
    p.add_argument("--d-r", type=float, default=6.3, help="RIS-RX distance (m)")
    p.add_argument("--beta0", type=float, default=analysis.PAPER_BETA0, help="reference channel power gain")
    p.add_argument("--tx-power-dbm", type=float, default=analysis.TX_POWER_DBM)
    p.add_argument("--gain-dbi", type=float, default=analysis.HORN_GAIN_DBI, help="TX/RX horn gain")


def _add_output(p: argparse.ArgumentParser, formats: tuple[str, ...], default: str) -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rissim", description="RF-switch RIS design and simulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="patch, notch and delay-line calculator")
    p.add_argument("--preset", choices=sorted(rf_design.PRESETS), default="paper")
    p.add_argument("--frequency-ghz", type=float, help="override the preset frequency")
    p.add_argument("--eps-r", type=float, help="override the substrate permittivity")
    p.add_argument("--height-mm", type=float, help="override the substrate thickness")
    p.add_argument("--vf", type=float, default=rf_design.VELOCITY_FACTOR, help="microstrip velocity factor")
    _add_output(p, ("text", "json"), "text")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("codebook", help="build an angular-grid codebook")
    p.add_argument("--preset", choices=["paper"], help="10x10 board, 3 deg grid over [-90,90]x[-45,45]")
    _add_board(p)
    p.add_argument("--spacing", type=float, default=3.0, help="grid step (deg)")
    p.add_argument("--az-range", type=float, nargs=2, default=[-90.0, 90.0], metavar=("LO", "HI"))
    p.add_argument("--el-range", type=float, nargs=2, default=[-45.0, 45.0], metavar=("LO", "HI"))
    p.add_argument("--method", choices=["search", "projection"], default="search")
    p.add_argument("--virtual", action="store_true", help="build for the compact virtual array of the pattern")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("pattern", help="beampattern sweep with peak/HPBW summary")
    _add_board(p)
    _add_link(p)
    p.add_argument("--codebook", help="use a configuration from this codebook file")
    p.add_argument("--entry", type=int, help="codebook entry index (default: nearest to RX angles)")
    p.add_argument("--continuous", action="store_true", help="unquantized phases")
    p.add_argument("--az-range", type=float, nargs=2, default=[-90.0, 90.0], metavar=("LO", "HI"))
    p.add_argument("--el-range", type=float, nargs=2, default=[-90.0, 90.0], metavar=("LO", "HI"))
    p.add_argument("--step", type=float, default=1.0, help="sweep step (deg)")
    p.add_argument("--verify-grating", action="store_true", help="match predicted grating lobes to the sweep")
    p.add_argument("--lobe-db", type=float, default=1.0, help="lobe maxima within this many dB of the peak")
    _add_output(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("scaling", help="optimal power versus number of active cells")
    _add_board(p)
    _add_link(p)
    p.add_argument("--n", type=int, nargs="+", default=[4, 16, 64, 100], help="active-cell counts")
    p.add_argument("--continuous", action="store_true", help="unquantized phases")
    _add_output(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("grating", help="predict (and optionally verify) grating lobes")
    _add_board(p, pattern_default="off2")
    p.add_argument("--delta", type=float, help="spacing/wavelength (default: from the pattern)")
    p.add_argument("--target-az", type=float, default=90.0, help="main-lobe azimuth (deg)")
    p.add_argument("--target-el", type=float, default=0.0, help="main-lobe elevation (deg)")
    p.add_argument("--verify", action="store_true", help="brute-force beampattern check")
    p.add_argument("--step", type=float, default=1.0, help="verification grid step (deg)")
    p.add_argument("--lobe-db", type=float, default=1.0)
    _add_output(p, ("json",), "json")
    p.set_defaults(func=cmd_grating)

    p = sub.add_parser("program", help="emulate programming one codebook entry")
    p.add_argument("--codebook", required=True)
    p.add_argument("--entry", type=int, help="entry index")
    p.add_argument("--azimuth", type=float, default=0.0, help="target azimuth when --entry is absent")
    p.add_argument("--elevation", type=float, default=0.0, help="target elevation when --entry is absent")
    p.add_argument("--board-id", type=int, default=0)
    p.add_argument("--latency-ms", type=float, default=CELL_LATENCY_S * 1e3, help="per-cell write latency")
    p.add_argument("-o", "--output", help="trace CSV (default: stdout)")
    p.set_defaults(func=cmd_program)

    p = sub.add_parser("cost", help="per-cell cost versus production volume")
    p.add_argument("--boards", type=float, nargs="+", default=[10, 100, 200, 1000])
    _add_output(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RisError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"rissim {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
