"""Angular-grid codebooks of quantized RIS configurations and their file format.

File format (JSON, UTF-8, one entry per line)::

    {
     "format": "rissim-codebook",
     "version": 1,
     "nx": 10, "ny": 10, "delta": 0.5,
     "mask": [1, 1, ...],
     "phases_rad": [0.8975979010256552, ...],
     "spacing_deg": 3.0,
     "azimuth_range_deg": [-90.0, 90.0],
     "elevation_range_deg": [-45.0, 45.0],
     "entries": [
      [s0, s1, ...],
      ...
     ]
    }

``entries[i]`` holds the cell states of the ``i``-th grid point in
row-major order (azimuth outer, elevation inner); state 7 is ABSORB.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

from .array_model import (
    ABSORB,
    ArrayGeometry,
    PhaseSet,
    RisConfiguration,
    SteeringAngles,
    optimal_config,
    upa_response,
)
from .errors import CodebookParseError, CodebookVersionError, GridMismatchError

FORMAT_NAME = "rissim-codebook"
FORMAT_VERSION = 1

DEFAULT_AZIMUTH_RANGE = (-90.0, 90.0)
DEFAULT_ELEVATION_RANGE = (-45.0, 45.0)
DEFAULT_SPACING_DEG = 3.0


@dataclass(frozen=True)
class CodebookEntry:
    target: SteeringAngles
    config: RisConfiguration


@dataclass(frozen=True)
class Codebook:
    geometry: ArrayGeometry
    spacing_deg: float
    azimuth_range: tuple[float, float]
    elevation_range: tuple[float, float]
    entries: tuple[CodebookEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> CodebookEntry:
        return self.entries[i]

    @property
    def phase_set(self) -> PhaseSet:
        return self.entries[0].config.phase_set if self.entries else PhaseSet.default()

    def nearest(self, azimuth_deg: float, elevation_deg: float) -> CodebookEntry:
        """Entry whose target is closest (in degrees) to the requested angles."""
        targets = np.array([e.target.degrees for e in self.entries])
        d = np.hypot(targets[:, 0] - azimuth_deg, targets[:, 1] - elevation_deg)
        return self.entries[int(np.argmin(d))]


def _axis_points(lo: float, hi: float, step: float, name: str) -> np.ndarray:
    if hi < lo:
        raise GridMismatchError(f"{name} range [{lo}, {hi}] is not ordered")
    span = hi - lo
    if span == 0:
        return np.array([float(lo)])
    count = span / step
    if abs(count - round(count)) > 1e-9:
        raise GridMismatchError(f"{name} spacing {step} deg does not divide span {span} deg")
    return lo + step * np.arange(int(round(count)) + 1)


def angular_grid(
    az_range: tuple[float, float] = DEFAULT_AZIMUTH_RANGE,
    el_range: tuple[float, float] = DEFAULT_ELEVATION_RANGE,
    spacing_deg: float = DEFAULT_SPACING_DEG,
) -> list[SteeringAngles]:
    """Inclusive grid of angle couples, azimuth outer and elevation inner (degrees in)."""
    if not spacing_deg > 0:
        raise GridMismatchError(f"grid spacing must be positive, got {spacing_deg}")
    az = _axis_points(*az_range, spacing_deg, "azimuth")
    el = _axis_points(*el_range, spacing_deg, "elevation")
    return [SteeringAngles.from_degrees(a, e) for a in az for e in el]


def build_codebook(
    geometry: ArrayGeometry,
    spacing_deg: float = DEFAULT_SPACING_DEG,
    az_range: tuple[float, float] = DEFAULT_AZIMUTH_RANGE,
    el_range: tuple[float, float] = DEFAULT_ELEVATION_RANGE,
    phase_set: PhaseSet | None = None,
    method: str = "search",
) -> Codebook:
    """One optimal configuration per grid point, using the unit-gain steering vector as channel."""
    phase_set = phase_set or PhaseSet.default()
    grid = angular_grid(az_range, el_range, spacing_deg)
    entries = tuple(
        CodebookEntry(t, optimal_config(upa_response(geometry, t), phase_set, geometry, method))
        for t in grid
    )
    return Codebook(
        geometry=geometry,
        spacing_deg=float(spacing_deg),
        azimuth_range=(float(az_range[0]), float(az_range[1])),
        elevation_range=(float(el_range[0]), float(el_range[1])),
        entries=entries,
    )


def dumps_codebook(cb: Codebook) -> str:
    g = cb.geometry
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "nx": g.nx,
        "ny": g.ny,
        "delta": g.delta,
        "mask": [int(m) for m in g.mask],
        "phases_rad": list(cb.phase_set.phases_rad),
        "spacing_deg": cb.spacing_deg,
        "azimuth_range_deg": list(cb.azimuth_range),
        "elevation_range_deg": list(cb.elevation_range),
    }
    out = io.StringIO()
    out.write("{\n")
    for key, value in header.items():
        out.write(f" {json.dumps(key)}: {json.dumps(value, separators=(', ', ': '))},\n")
    out.write(' "entries": [\n')
    lines = [" " + json.dumps(list(e.config.states), separators=(",", ":")) for e in cb.entries]
    out.write(",\n".join(lines))
    out.write("\n ]\n}\n")
    return out.getvalue()


def save_codebook(cb: Codebook, sink: Union[str, Path, IO[str]]) -> None:
    text = dumps_codebook(cb)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def _require(doc: dict, key: str, kind, ctx: str = ""):
    if key not in doc:
        raise CodebookParseError(f"{ctx}missing field {key!r}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise CodebookParseError(f"{ctx}field {key!r} has wrong type {type(value).__name__}")
    return value


def _pair(doc: dict, key: str) -> tuple[float, float]:
    value = _require(doc, key, list)
    if len(value) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise CodebookParseError(f"field {key!r} must be a [low, high] pair of numbers")
    return float(value[0]), float(value[1])


def _entry_line(text: str, index: int) -> int | None:
    # Best-effort: locate the line of entries[index] in the document.
    lines = text.splitlines()
    for start, line in enumerate(lines):
        if line.strip().startswith('"entries"'):
            target = start + 2 + index
            return target if target <= len(lines) else None
    return None


def loads_codebook(text: str) -> Codebook:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodebookParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CodebookParseError("document root must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise CodebookParseError(f"field 'format' must be {FORMAT_NAME!r}, got {doc.get('format')!r}")
    version = _require(doc, "version", int)
    if version != FORMAT_VERSION:
        raise CodebookVersionError(f"unsupported codebook version {version} (expected {FORMAT_VERSION})")

    nx = _require(doc, "nx", int)
    ny = _require(doc, "ny", int)
    delta = float(_require(doc, "delta", (int, float)))
    mask = _require(doc, "mask", list)
    if any(m not in (0, 1) or isinstance(m, float) for m in mask):
        raise CodebookParseError("field 'mask' must hold only 0/1")
    try:
        geometry = ArrayGeometry(nx, ny, delta, tuple(bool(m) for m in mask))
    except ValueError as exc:
        raise CodebookParseError(f"invalid geometry: {exc}") from exc
    phases = _require(doc, "phases_rad", list)
    try:
        phase_set = PhaseSet(tuple(float(p) for p in phases))
    except (TypeError, ValueError) as exc:
        raise CodebookParseError(f"field 'phases_rad': {exc}") from exc
    spacing = float(_require(doc, "spacing_deg", (int, float)))
    az_range = _pair(doc, "azimuth_range_deg")
    el_range = _pair(doc, "elevation_range_deg")
    try:
        grid = angular_grid(az_range, el_range, spacing)
    except GridMismatchError as exc:
        raise CodebookParseError(f"inconsistent grid: {exc}") from exc

    raw = _require(doc, "entries", list)
    if len(raw) != len(grid):
        raise CodebookParseError(f"field 'entries' has {len(raw)} rows, grid defines {len(grid)}")
    k = len(phase_set)
    entries = []
    for i, (target, states) in enumerate(zip(grid, raw)):
        line = _entry_line(text, i)
        where = f"entries[{i}]" + (f" (line {line})" if line else "")
        if not isinstance(states, list) or len(states) != geometry.size:
            raise CodebookParseError(f"{where}: expected a list of {geometry.size} states")
        for j, s in enumerate(states):
            if not isinstance(s, int) or isinstance(s, bool) or not (0 <= s < k or s == ABSORB):
                raise CodebookParseError(f"{where}[{j}]: state {s!r} out of range 0..{ABSORB}")
        entries.append(CodebookEntry(target, RisConfiguration(tuple(states), phase_set)))
    return Codebook(geometry, spacing, az_range, el_range, tuple(entries))


def load_codebook(source: Union[str, Path, IO[str]]) -> Codebook:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return loads_codebook(text)

