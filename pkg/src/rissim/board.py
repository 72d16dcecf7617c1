"""Physical board model: named activation patterns, virtual arrays and tiling."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry
from .errors import DegenerateGeometryError, DomainError, PatternError
from .rf_design import wavelength

DEFAULT_FREQUENCY_HZ = 5.3e9


@dataclass(frozen=True)
class BoardSpec:
    nx: int = 10
    ny: int = 10
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    cell_pitch: float | None = None  # meters; half a wavelength when omitted

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise DomainError(f"board dimensions must be >= 1, got {self.nx}x{self.ny}")
        if self.cell_pitch is None:
            object.__setattr__(self, "cell_pitch", self.wavelength_m / 2)
        elif not self.cell_pitch > 0:
            raise DomainError(f"cell pitch must be positive, got {self.cell_pitch}")

    @property
    def wavelength_m(self) -> float:
        return wavelength(self.frequency_hz)

    @property
    def delta(self) -> float:
        return self.cell_pitch / self.wavelength_m

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def geometry(self, mask=None) -> ArrayGeometry:
        g = ArrayGeometry(self.nx, self.ny, self.delta)
        return g if mask is None else g.with_mask(mask)


@dataclass(frozen=True)
class ActivationPattern:
    """Named boolean mask over a board, flat in x-major order (``n = ix*ny + iy``)."""

    name: str
    mask: tuple[bool, ...]

    @property
    def active_count(self) -> int:
        return sum(self.mask)

    def grid(self, spec: BoardSpec) -> np.ndarray:
        """Mask as an ``(nx, ny)`` array."""
        return np.array(self.mask, dtype=bool).reshape(spec.nx, spec.ny)


NAMED_PATTERNS = ("2x2", "4x4", "8x8", "10x10", "off2", "off3")


def _centered_block(spec: BoardSpec, sx: int, sy: int) -> np.ndarray:
    if sx > spec.nx or sy > spec.ny:
        raise PatternError(f"{sx}x{sy} block does not fit a {spec.nx}x{spec.ny} board")
    m = np.zeros((spec.nx, spec.ny), dtype=bool)
    # Floor division resolves odd leftovers toward the lower-left corner.
    x0 = (spec.nx - sx) // 2
    y0 = (spec.ny - sy) // 2
    m[x0 : x0 + sx, y0 : y0 + sy] = True
    return m


def _strided(spec: BoardSpec, stride: int) -> np.ndarray:
    m = np.zeros((spec.nx, spec.ny), dtype=bool)
    m[::stride, ::stride] = True
    return m


def named_pattern(name: str, spec: BoardSpec | None = None) -> ActivationPattern:
    """Masks for ``NxN`` centered blocks (any N that fits) and ``offK`` strided lattices."""
    spec = spec or BoardSpec()
    key = name.strip().lower()
    if key in ("full", "all"):
        key = f"{spec.nx}x{spec.ny}"
    if key.startswith("off") and key[3:].isdigit() and int(key[3:]) >= 1:
        grid = _strided(spec, int(key[3:]))
    elif "x" in key and all(p.isdigit() for p in key.split("x", 1)):
        sx, sy = (int(p) for p in key.split("x", 1))
        if sx < 1 or sy < 1:
            raise PatternError(f"unknown activation pattern {name!r}")
        grid = _centered_block(spec, sx, sy)
    else:
        raise PatternError(f"unknown activation pattern {name!r}")
    return ActivationPattern(key, tuple(bool(b) for b in grid.ravel()))


def custom_pattern(mask, spec: BoardSpec, name: str = "custom") -> ActivationPattern:
    arr = np.asarray(mask, dtype=bool)
    if arr.size != spec.size:
        raise PatternError(f"mask has {arr.size} cells, board has {spec.size}")
    return ActivationPattern(name, tuple(bool(b) for b in arr.reshape(spec.nx, spec.ny).ravel()))


def _uniform_stride(idx: np.ndarray) -> int | None:
    if idx.size == 1:
        return None
    steps = np.diff(idx)
    return int(steps[0]) if np.all(steps == steps[0]) else None


def virtual_geometry(spec: BoardSpec, pattern: ActivationPattern) -> ArrayGeometry:
    """Compact array seen by the wave when only the active cells reflect.

    If the active cells form a full lattice with the same stride on both
    axes, the result has one element per active cell and spacing
    ``stride * pitch``.  Any other mask keeps the board geometry with the
    mask applied.
    """
    grid = pattern.grid(spec)
    if not grid.any():
        raise DegenerateGeometryError(f"pattern {pattern.name!r} has no active cell")
    xs = np.flatnonzero(grid.any(axis=1))
    ys = np.flatnonzero(grid.any(axis=0))
    full_lattice = grid[np.ix_(xs, ys)].all() and grid.sum() == xs.size * ys.size
    sx, sy = _uniform_stride(xs), _uniform_stride(ys)
    if full_lattice and (xs.size == 1 or sx is not None) and (ys.size == 1 or sy is not None):
        strides = {s for s in (sx, sy) if s is not None}
        if len(strides) <= 1:
            stride = strides.pop() if strides else 1
            return ArrayGeometry(int(xs.size), int(ys.size), stride * spec.delta)
    return spec.geometry(pattern.mask)


def tile_boards(spec: BoardSpec, m_x: int, m_y: int) -> ArrayGeometry:
    """Geometry of ``m_x * m_y`` boards sharing the same pitch across seams."""
    if m_x < 1 or m_y < 1:
        raise DomainError(f"board counts must be >= 1, got {m_x}x{m_y}")
    return ArrayGeometry(m_x * spec.nx, m_y * spec.ny, spec.delta)


def tile_mask(spec: BoardSpec, pattern: ActivationPattern, m_x: int, m_y: int) -> np.ndarray:
    """Flat mask of a tiled array with ``pattern`` repeated on every board."""
    if m_x < 1 or m_y < 1:
        raise DomainError(f"board counts must be >= 1, got {m_x}x{m_y}")
    return np.tile(pattern.grid(spec), (m_x, m_y)).ravel()


def parse_pattern_text(text: str, spec: BoardSpec, name: str = "file") -> ActivationPattern:
    """Pattern from ``ny`` rows of ``nx`` ``0``/``1`` characters; the first row is the top (max y)."""
    rows = [line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if len(rows) != spec.ny:
        raise PatternError(f"pattern has {len(rows)} rows, board has ny={spec.ny}")
    grid = np.zeros((spec.nx, spec.ny), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != spec.nx or set(row) - {"0", "1"}:
            raise PatternError(f"pattern row {r + 1} must be {spec.nx} characters of 0/1")
        grid[:, spec.ny - 1 - r] = [c == "1" for c in row]
    return ActivationPattern(name, tuple(bool(b) for b in grid.ravel()))


def format_pattern_text(pattern: ActivationPattern, spec: BoardSpec) -> str:
    grid = pattern.grid(spec)
    lines = ["".join("1" if grid[ix, iy] else "0" for ix in range(spec.nx)) for iy in reversed(range(spec.ny))]
    return "\n".join(lines) + "\n"


def load_pattern(path: str | Path, spec: BoardSpec) -> ActivationPattern:
    p = Path(path)
    return parse_pattern_text(p.read_text(encoding="utf-8"), spec, name=p.stem)
