"""Emulator of the board's cell-selection configuration protocol.

Each cell ANDs its row and column selection lines; the rising edge at the
gate output clocks the three phase-bus bits into the cell's D flip-flops.
One write therefore needs ``nx + ny`` selection lines and a 3-bit bus
instead of a dedicated connection per cell.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .array_model import ABSORB, RisConfiguration
from .errors import ProtocolError

PHASE_BUS_WIDTH = 3
ABSORBER_CODE = ABSORB  # 0b111, the switch port terminated in 50 ohm
CELL_LATENCY_S = 0.35e-3  # 100 cells in under 35 ms


def bus_line_count(nx: int, ny: int) -> tuple[int, int]:
    """``(selection lines, phase lines)`` wired to one board."""
    if nx < 1 or ny < 1:
        raise ProtocolError(f"board dimensions must be positive, got {nx}x{ny}")
    return nx + ny, PHASE_BUS_WIDTH


def code_bits(code: int) -> tuple[bool, bool, bool]:
    """Phase-bus levels for a 3-bit code, most significant bit first."""
    return tuple(bool(code >> b & 1) for b in reversed(range(PHASE_BUS_WIDTH)))


class BoardBusState:
    """Digital state of one board: selection lines, phase bus and latched codes."""

    def __init__(self, nx: int = 10, ny: int = 10, board_id: int = 0, reset_code: int = ABSORBER_CODE):
        if nx < 1 or ny < 1:
            raise ProtocolError(f"board dimensions must be positive, got {nx}x{ny}")
        self.nx = nx
        self.ny = ny
        self.board_id = board_id
        self.row_lines = np.zeros(nx, dtype=bool)
        self.col_lines = np.zeros(ny, dtype=bool)
        self.phase_bus = np.zeros(PHASE_BUS_WIDTH, dtype=bool)
        self.latched = np.full((nx, ny), reset_code, dtype=np.uint8)
        self._gates = np.zeros((nx, ny), dtype=bool)

    def __repr__(self) -> str:
        return f"BoardBusState(nx={self.nx}, ny={self.ny}, board_id={self.board_id})"

    def _propagate(self) -> None:
        gates = np.logical_and.outer(self.row_lines, self.col_lines)
        if gates.sum() > 1:
            raise ProtocolError("more than one cell selected; a write would latch several cells")
        rising = gates & ~self._gates
        if rising.any():
            code = int(sum(int(b) << (PHASE_BUS_WIDTH - 1 - i) for i, b in enumerate(self.phase_bus)))
            self.latched[rising] = code
        self._gates = gates

    def set_phase_bus(self, code: int) -> None:
        if not 0 <= code <= 2**PHASE_BUS_WIDTH - 1:
            raise ProtocolError(f"code {code} does not fit the {PHASE_BUS_WIDTH}-bit phase bus")
        if self._gates.any():
            raise ProtocolError("phase bus changed while a cell is selected")
        self.phase_bus[:] = code_bits(code)

    def raise_row(self, x: int) -> None:
        if not 0 <= x < self.nx:
            raise ProtocolError(f"row {x} outside 0..{self.nx - 1}")
        if self.row_lines.any() and not self.row_lines[x]:
            raise ProtocolError("simultaneous multi-row selection")
        self.row_lines[x] = True
        self._propagate()

    def raise_col(self, y: int) -> None:
        if not 0 <= y < self.ny:
            raise ProtocolError(f"column {y} outside 0..{self.ny - 1}")
        if self.col_lines.any() and not self.col_lines[y]:
            raise ProtocolError("simultaneous multi-column selection")
        self.col_lines[y] = True
        self._propagate()

    def release(self) -> None:
        self.row_lines[:] = False
        self.col_lines[:] = False
        self._propagate()

    def write_cell(self, x: int, y: int, code: int) -> "BoardBusState":
        """Latch ``code`` into cell ``(x, y)`` and return the bus to idle."""
        if not (0 <= x < self.nx and 0 <= y < self.ny):
            raise ProtocolError(f"cell ({x}, {y}) outside a {self.nx}x{self.ny} board")
        self.set_phase_bus(code)
        self.raise_row(x)
        self.raise_col(y)
        self.release()
        return self

    def latched_config(self, phase_set=None) -> RisConfiguration:
        """Latched codes read back as a configuration (flat index ``x*ny + y``)."""
        if phase_set is None:
            return RisConfiguration(tuple(int(c) for c in self.latched.ravel()))
        return RisConfiguration(tuple(int(c) for c in self.latched.ravel()), phase_set)


def write_cell(state: BoardBusState, x: int, y: int, code: int) -> BoardBusState:
    return state.write_cell(x, y, code)


@dataclass(frozen=True)
class TraceStep:
    board_id: int
    x: int
    y: int
    code: int
    timestamp_s: float


@dataclass
class ProgramTrace:
    steps: list[TraceStep] = field(default_factory=list)
    cell_latency_s: float = CELL_LATENCY_S

    @property
    def estimated_time_s(self) -> float:
        return len(self.steps) * self.cell_latency_s

    def __len__(self) -> int:
        return len(self.steps)

    def extend(self, other: "ProgramTrace") -> None:
        # The shared bus serialises boards: shift the second trace after this one.
        offset = self.estimated_time_s
        self.steps.extend(
            TraceStep(s.board_id, s.x, s.y, s.code, offset + i * self.cell_latency_s)
            for i, s in enumerate(other.steps)
        )

    def to_csv(self, sink: Union[str, Path, IO[str]]) -> None:
        def _write(fh: IO[str]) -> None:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["board_id", "x", "y", "code", "timestamp_s"])
            for s in self.steps:
                w.writerow([s.board_id, s.x, s.y, s.code, f"{s.timestamp_s:.6f}"])

        if isinstance(sink, (str, Path)):
            with open(sink, "w", newline="", encoding="utf-8") as fh:
                _write(fh)
        else:
            _write(sink)

    @classmethod
    def from_csv(cls, source: Union[str, Path, IO[str]], cell_latency_s: float = CELL_LATENCY_S) -> "ProgramTrace":
        def _read(fh: IO[str]) -> list[TraceStep]:
            rows = csv.DictReader(fh)
            try:
                return [
                    TraceStep(int(r["board_id"]), int(r["x"]), int(r["y"]), int(r["code"]), float(r["timestamp_s"]))
                    for r in rows
                ]
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed trace CSV: {exc}") from exc

        if isinstance(source, (str, Path)):
            with open(source, newline="", encoding="utf-8") as fh:
                return cls(_read(fh), cell_latency_s)
        return cls(_read(source), cell_latency_s)


def program_board(
    state: BoardBusState,
    config: RisConfiguration,
    cell_latency_s: float = CELL_LATENCY_S,
) -> ProgramTrace:
    """Write every cell of ``config`` (state k -> code k, ABSORB -> absorber code)."""
    if len(config) == 0:
        return ProgramTrace([], cell_latency_s)
    if len(config) != state.nx * state.ny:
        raise ProtocolError(f"configuration has {len(config)} cells, board has {state.nx * state.ny}")
    steps = []
    for n, code in enumerate(config.states):
        x, y = divmod(n, state.ny)
        state.write_cell(x, y, code)
        steps.append(TraceStep(state.board_id, x, y, code, n * cell_latency_s))
    return ProgramTrace(steps, cell_latency_s)


class SharedBus:
    """Several boards on one common bus, addressed by board id.

    Writes are serialised: only the addressed board sees its selection
    lines toggle.
    """

    def __init__(self, boards: Iterable[BoardBusState]):
        self.boards = {}
        for b in boards:
            if b.board_id in self.boards:
                raise ProtocolError(f"duplicate board id {b.board_id}")
            self.boards[b.board_id] = b

    def board(self, board_id: int) -> BoardBusState:
        try:
            return self.boards[board_id]
        except KeyError:
            raise ProtocolError(f"no board with id {board_id} on the bus") from None

    def write(self, board_id: int, x: int, y: int, code: int) -> None:
        self.board(board_id).write_cell(x, y, code)

    def program(self, configs: dict[int, RisConfiguration], cell_latency_s: float = CELL_LATENCY_S) -> ProgramTrace:
        trace = ProgramTrace([], cell_latency_s)
        for board_id in sorted(configs):
            trace.extend(program_board(self.board(board_id), configs[board_id], cell_latency_s))
        return trace

    def replay(self, trace: ProgramTrace) -> None:
        for s in trace.steps:
            self.write(s.board_id, s.x, s.y, s.code)


def replay(trace: ProgramTrace, boards: Iterable[BoardBusState]) -> None:
    """Re-apply every step of ``trace`` to the given boards."""
    SharedBus(boards).replay(trace)
