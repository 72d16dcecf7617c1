import io

import numpy as np
import pytest

from rissim.array_model import ABSORB, RisConfiguration
from rissim.control_plane import (
    ABSORBER_CODE,
    BoardBusState,
    ProgramTrace,
    SharedBus,
    bus_line_count,
    code_bits,
    program_board,
    replay,
    write_cell,
)
from rissim.errors import ProtocolError


def test_absorber_code_is_binary_seven():
    assert ABSORBER_CODE == 0b111 == ABSORB
    assert code_bits(5) == (True, False, True)


def test_fresh_board_is_absorbing():
    b = BoardBusState()
    assert np.all(b.latched == ABSORBER_CODE)


def test_single_write_is_selective():
    b = write_cell(BoardBusState(), 2, 3, 5)
    expected = np.full((10, 10), ABSORBER_CODE)
    expected[2, 3] = 5
    np.testing.assert_array_equal(b.latched, expected)
    assert not b.row_lines.any() and not b.col_lines.any()


def test_last_write_wins():
    b = BoardBusState()
    b.write_cell(4, 4, 1)
    b.write_cell(4, 4, 6)
    assert b.latched[4, 4] == 6


def test_write_every_cell():
    rng = np.random.default_rng(0)
    target = rng.integers(0, 8, size=(10, 10))
    b = BoardBusState()
    for x in range(10):
        for y in range(10):
            b.write_cell(x, y, int(target[x, y]))
    np.testing.assert_array_equal(b.latched, target)


def test_protocol_errors():
    b = BoardBusState(4, 4)
    with pytest.raises(ProtocolError):
        b.write_cell(4, 0, 1)
    with pytest.raises(ProtocolError):
        b.write_cell(0, 0, 8)
    b.raise_row(1)
    with pytest.raises(ProtocolError):
        b.raise_row(2)
    b.release()
    b.raise_col(0)
    with pytest.raises(ProtocolError):
        b.raise_col(1)


def test_phase_bus_frozen_while_selected():
    b = BoardBusState(3, 3)
    b.set_phase_bus(2)
    b.raise_row(0)
    b.raise_col(0)
    with pytest.raises(ProtocolError):
        b.set_phase_bus(3)


def test_latch_only_on_rising_edge():
    b = BoardBusState(3, 3)
    b.set_phase_bus(4)
    b.raise_col(1)
    b.raise_row(1)  # rising edge at (1, 1)
    assert b.latched[1, 1] == 4
    b.raise_row(1)  # row already high: no new edge
    b.release()
    assert b.latched[1, 1] == 4
    assert (b.latched == ABSORBER_CODE).sum() == 8


def test_bus_line_count():
    assert bus_line_count(10, 10) == (20, 3)
    assert bus_line_count(1, 1) == (2, 3)
    assert bus_line_count(16, 10) == (26, 3)


def test_program_board_100_cells():
    cfg = RisConfiguration(tuple(np.arange(100) % 8))
    b = BoardBusState()
    trace = program_board(b, cfg)
    assert len(trace) == 100
    assert trace.estimated_time_s <= 0.035 + 1e-12
    np.testing.assert_array_equal(b.latched.ravel(), np.arange(100) % 8)


def test_program_board_empty():
    trace = program_board(BoardBusState(), RisConfiguration(()))
    assert len(trace) == 0 and trace.estimated_time_s == 0.0


def test_program_board_mapping():
    b = BoardBusState(2, 2)
    program_board(b, RisConfiguration((0, 3, 6, ABSORB)))
    np.testing.assert_array_equal(b.latched.ravel(), [0, 3, 6, ABSORBER_CODE])
    assert b.latched_config().states == (0, 3, 6, ABSORB)


def test_program_board_length_mismatch():
    with pytest.raises(ProtocolError):
        program_board(BoardBusState(2, 2), RisConfiguration((0, 1, 2)))


def test_trace_replay_is_idempotent():
    rng = np.random.default_rng(2)
    cfg = RisConfiguration(tuple(int(s) for s in rng.integers(0, 8, size=100)))
    b = BoardBusState()
    trace = program_board(b, cfg)
    once = BoardBusState()
    replay(trace, [once])
    twice = BoardBusState()
    replay(trace, [twice])
    replay(trace, [twice])
    np.testing.assert_array_equal(once.latched, b.latched)
    np.testing.assert_array_equal(twice.latched, b.latched)


def test_trace_csv_round_trip():
    b = BoardBusState(2, 2, board_id=3)
    trace = program_board(b, RisConfiguration((1, 2, 3, 4)))
    buf = io.StringIO()
    trace.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "board_id,x,y,code,timestamp_s"
    assert lines[2] == "3,0,1,2,0.000350"
    back = ProgramTrace.from_csv(io.StringIO(buf.getvalue()))
    assert [(s.board_id, s.x, s.y, s.code) for s in back.steps] == [
        (s.board_id, s.x, s.y, s.code) for s in trace.steps
    ]


def test_malformed_trace_csv():
    with pytest.raises(ProtocolError):
        ProgramTrace.from_csv(io.StringIO("board_id,x\n0,1\n"))


def test_shared_bus_addresses_one_board():
    boards = [BoardBusState(3, 3, board_id=i) for i in range(3)]
    bus = SharedBus(boards)
    bus.write(1, 2, 2, 0)
    assert boards[1].latched[2, 2] == 0
    assert np.all(boards[0].latched == ABSORBER_CODE) and np.all(boards[2].latched == ABSORBER_CODE)
    with pytest.raises(ProtocolError):
        bus.write(7, 0, 0, 0)
    with pytest.raises(ProtocolError):
        SharedBus([BoardBusState(board_id=0), BoardBusState(board_id=0)])


def test_shared_bus_program_serialises_boards():
    boards = [BoardBusState(2, 2, board_id=i) for i in range(2)]
    bus = SharedBus(boards)
    trace = bus.program({0: RisConfiguration((0, 1, 2, 3)), 1: RisConfiguration((4, 5, 6, 0))})
    assert len(trace) == 8
    stamps = [s.timestamp_s for s in trace.steps]
    assert stamps == sorted(stamps) and len(set(stamps)) == 8
    assert trace.estimated_time_s == pytest.approx(8 * 0.35e-3)
    np.testing.assert_array_equal(boards[1].latched.ravel(), [4, 5, 6, 0])


def test_random_write_sequences_match_map_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        nx, ny = rng.integers(1, 6, size=2)
        b = BoardBusState(int(nx), int(ny))
        oracle = {}
        for _ in range(rng.integers(0, 40)):
            x, y, c = int(rng.integers(nx)), int(rng.integers(ny)), int(rng.integers(8))
            before = b.latched.copy()
            b.write_cell(x, y, c)
            oracle[(x, y)] = c
            changed = np.argwhere(before != b.latched)
            assert all(tuple(p) == (x, y) for p in changed)
        for x in range(nx):
            for y in range(ny):
                assert b.latched[x, y] == oracle.get((x, y), ABSORBER_CODE)
