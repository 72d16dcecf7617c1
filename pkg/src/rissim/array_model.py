"""Complex-valued core of the RIS model.

Steering vectors of a uniform planar array, line-of-sight channels, the
cascaded TX-RIS-RX channel, application of a cell configuration and the
synthesis of the best quantized configuration for a given channel.

Conventions
-----------
* Cell ``(ix, iy)`` lives at flat index ``n = ix * ny + iy`` so that the
  steering vector is ``kron(a_x, a_y)``.
* The azimuth drives the x-progression through ``cos(azimuth)`` and the
  elevation drives the y-progression through ``sin(elevation)``.  Broadside
  is therefore ``(azimuth, elevation) = (90 deg, 0 deg)``.
* A configuration state ``k`` multiplies the cell's cascaded channel by
  ``exp(1j * phases[k])``; the state :data:`ABSORB` contributes nothing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError

TWO_PI = 2.0 * pi

ABSORB = 7
"""State value of the absorbing switch port (also its 3-bit code)."""

MAX_PHASES = 7


@dataclass(frozen=True)
class SteeringAngles:
    azimuth_rad: float
    elevation_rad: float

    def __post_init__(self) -> None:
        eps = 1e-12
        if not -pi - eps <= self.azimuth_rad <= pi + eps:
            raise DomainError(f"azimuth {self.azimuth_rad!r} rad outside [-pi, pi]")
        if not -pi / 2 - eps <= self.elevation_rad <= pi / 2 + eps:
            raise DomainError(f"elevation {self.elevation_rad!r} rad outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(cls, azimuth_deg: float, elevation_deg: float) -> "SteeringAngles":
        return cls(float(np.deg2rad(azimuth_deg)), float(np.deg2rad(elevation_deg)))

    @property
    def degrees(self) -> tuple[float, float]:
        return float(np.rad2deg(self.azimuth_rad)), float(np.rad2deg(self.elevation_rad))

    @property
    def direction_cosines(self) -> tuple[float, float]:
        """``(cos(azimuth), sin(elevation))``, the coordinates in which phases are linear."""
        return float(np.cos(self.azimuth_rad)), float(np.sin(self.elevation_rad))


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar grid of ``nx * ny`` cells spaced by ``delta`` wavelengths.

    ``mask`` marks the radiating cells (``True``); masked-off cells absorb.
    When omitted every cell radiates.
    """

    nx: int
    ny: int
    delta: float = 0.5
    mask: tuple[bool, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise DomainError(f"array dimensions must be >= 1, got {self.nx}x{self.ny}")
        if not self.delta > 0:
            raise DomainError(f"spacing ratio must be positive, got {self.delta}")
        if not self.mask:
            object.__setattr__(self, "mask", (True,) * (self.nx * self.ny))
        else:
            object.__setattr__(self, "mask", tuple(bool(m) for m in self.mask))
        if len(self.mask) != self.nx * self.ny:
            raise ShapeError(f"mask has {len(self.mask)} cells, expected {self.nx * self.ny}")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def mask_array(self) -> np.ndarray:
        return np.array(self.mask, dtype=bool)

    @property
    def active_count(self) -> int:
        return sum(self.mask)

    def with_mask(self, mask: Sequence[bool] | np.ndarray) -> "ArrayGeometry":
        return ArrayGeometry(self.nx, self.ny, self.delta, tuple(bool(m) for m in np.ravel(mask)))

    def cell_index(self, ix: int, iy: int) -> int:
        return ix * self.ny + iy


@dataclass(frozen=True)
class PhaseSet:
    """Allowed reflection phases, indexed by switch state.

    The default holds the seven delay-line phases ``k * 360/7`` degrees for
    ``k = 1..7`` in delay-line table order; the last one (360 deg) is stored
    as 0.
    """

    phases_rad: tuple[float, ...]
    has_absorb: bool = True

    def __post_init__(self) -> None:
        phases = tuple(float(p) % TWO_PI for p in self.phases_rad)
        object.__setattr__(self, "phases_rad", phases)
        if len(phases) > MAX_PHASES:
            raise ConfigurationError(
                f"at most {MAX_PHASES} reflective phases fit a 3-bit switch with an absorber port"
            )

    @classmethod
    def default(cls) -> "PhaseSet":
        return cls(tuple(k * TWO_PI / 7 for k in range(1, 8)))

    @classmethod
    def uniform(cls, levels: int) -> "PhaseSet":
        return cls(tuple(k * TWO_PI / levels for k in range(levels)))

    def __len__(self) -> int:
        return len(self.phases_rad)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.phases_rad, dtype=float)


@dataclass(frozen=True)
class RisConfiguration:
    """Per-cell switch states: an index into ``phase_set`` or :data:`ABSORB`."""

    states: tuple[int, ...]
    phase_set: PhaseSet = field(default_factory=PhaseSet.default)

    def __post_init__(self) -> None:
        states = tuple(int(s) for s in self.states)
        object.__setattr__(self, "states", states)
        k = len(self.phase_set)
        for n, s in enumerate(states):
            if s != ABSORB and not 0 <= s < k:
                raise ConfigurationError(f"cell {n}: state {s} is neither a phase index < {k} nor ABSORB")

    def __len__(self) -> int:
        return len(self.states)

    @classmethod
    def all_absorb(cls, n: int, phase_set: PhaseSet | None = None) -> "RisConfiguration":
        return cls((ABSORB,) * n, phase_set or PhaseSet.default())

    def coefficients(self) -> np.ndarray:
        """Complex reflection coefficient per cell (0 for absorbing cells)."""
        states = np.array(self.states, dtype=int)
        coeff = np.zeros(len(states), dtype=complex)
        live = states != ABSORB
        coeff[live] = np.exp(1j * self.phase_set.array[states[live]])
        return coeff


@dataclass(frozen=True)
class LinkGeometry:
    d_t: float
    d_r: float
    beta0: float
    tx_angles: SteeringAngles
    rx_angles: SteeringAngles

    def __post_init__(self) -> None:
        if not (self.d_t > 0 and self.d_r > 0 and self.beta0 > 0):
            raise DomainError("distances and beta0 must be positive")

    @property
    def gamma_t(self) -> float:
        return self.beta0 / self.d_t**2

    @property
    def gamma_r(self) -> float:
        return self.beta0 / self.d_r**2


def _axis_response(count: int, delta: float, direction_cosine: np.ndarray) -> np.ndarray:
    idx = np.arange(count)
    return np.exp(1j * TWO_PI * delta * np.multiply.outer(direction_cosine, idx))


def axis_responses(geometry: ArrayGeometry, azimuths_rad, elevations_rad) -> tuple[np.ndarray, np.ndarray]:
    """1-D responses for many angles at once: shapes ``(n_az, nx)`` and ``(n_el, ny)``."""
    ax = _axis_response(geometry.nx, geometry.delta, np.cos(np.atleast_1d(azimuths_rad)))
    ay = _axis_response(geometry.ny, geometry.delta, np.sin(np.atleast_1d(elevations_rad)))
    return ax, ay


def upa_response(geometry: ArrayGeometry, angles: SteeringAngles) -> np.ndarray:
    """Steering vector ``a_x(azimuth) kron a_y(elevation)``; the mask is not applied."""
    ax, ay = axis_responses(geometry, angles.azimuth_rad, angles.elevation_rad)
    return np.kron(ax[0], ay[0])


def los_channel(geometry: ArrayGeometry, angles: SteeringAngles, gain: float) -> np.ndarray:
    """Line-of-sight channel ``sqrt(gain) * a(angles)``; ``gain`` is ``beta0 / d**2``."""
    if not gain > 0:
        raise DomainError(f"channel power gain must be positive, got {gain}")
    return np.sqrt(gain) * upa_response(geometry, angles)


def cascaded_channel(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Entry-wise ``conj(h) * g``."""
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if h.shape != g.shape:
        raise ShapeError(f"channel lengths differ: {h.shape} vs {g.shape}")
    return np.conj(h) * g


def link_cascade(geometry: ArrayGeometry, link: LinkGeometry) -> np.ndarray:
    g = los_channel(geometry, link.tx_angles, link.gamma_t)
    h = los_channel(geometry, link.rx_angles, link.gamma_r)
    return cascaded_channel(h, g)


def combine(coefficients: np.ndarray, geometry: ArrayGeometry, hbar: np.ndarray) -> complex:
    """Noiseless received amplitude for raw per-cell coefficients; masked cells are forced to 0."""
    coefficients = np.asarray(coefficients, dtype=complex)
    hbar = np.asarray(hbar, dtype=complex)
    if not (len(coefficients) == len(hbar) == geometry.size):
        raise ShapeError(
            f"lengths differ: config {len(coefficients)}, channel {len(hbar)}, geometry {geometry.size}"
        )
    return complex(np.sum(np.where(geometry.mask_array, coefficients, 0.0) * hbar))


def apply_config(config: RisConfiguration, geometry: ArrayGeometry, hbar: np.ndarray) -> complex:
    """Received amplitude ``sum_n coeff(state_n) * hbar_n``; power is ``abs(.)**2``."""
    if len(config) != geometry.size:
        raise ShapeError(f"configuration has {len(config)} cells, geometry {geometry.size}")
    return combine(config.coefficients(), geometry, hbar)


def _circular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs((a - b + pi) % TWO_PI - pi)


def quantize_phase(target_rad: float, phase_set: PhaseSet) -> int:
    """Index of the phase closest to ``target_rad`` on the circle (lowest index on ties)."""
    if len(phase_set) == 0:
        raise ConfigurationError("cannot quantize onto an empty phase set")
    return int(np.argmin(_circular_distance(phase_set.array, float(target_rad) % TWO_PI)))


def quantize_phases(targets_rad: np.ndarray, phase_set: PhaseSet) -> np.ndarray:
    """Vectorised :func:`quantize_phase`."""
    if len(phase_set) == 0:
        raise ConfigurationError("cannot quantize onto an empty phase set")
    t = np.asarray(targets_rad, dtype=float)[..., None] % TWO_PI
    return np.argmin(_circular_distance(phase_set.array, t), axis=-1)


def _rotation_search(hbar: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Exact maximiser of ``|sum_n exp(1j*phases[s_n]) * hbar_n|`` over all state vectors.

    At the optimum every cell is the nearest quantization of a common
    rotation ``theta - angle(hbar_n)``.  The nearest-phase assignment only
    changes at ``N * K`` breakpoints of ``theta``, so walking them once in
    circular order (with a running sum) visits every candidate.
    """
    n = len(hbar)
    k = len(phases)
    order = np.argsort(phases)
    ps = phases[order]
    mids = (ps + np.roll(ps, -1)) / 2.0
    mids[-1] += pi  # wrap-around gap between the largest phase and the first one
    amp = np.abs(hbar)
    alpha = np.angle(hbar)

    brk = (alpha[:, None] + mids[None, :]) % TWO_PI  # crossing state k -> k+1 (sorted order)
    flat = np.sort(brk.ravel())
    gaps = np.diff(np.append(flat, flat[0] + TWO_PI))
    j = int(np.argmax(gaps))
    theta0 = (flat[j] + gaps[j] / 2.0) % TWO_PI

    start = np.argmin(_circular_distance(ps[None, :], (theta0 - alpha)[:, None]), axis=1)
    rot = np.exp(1j * ps)
    s0 = np.sum(amp * np.exp(1j * alpha) * rot[start])

    walk = np.argsort((brk - theta0).ravel() % TWO_PI, kind="stable")
    elem, slot = np.divmod(walk, k)
    delta = amp[elem] * np.exp(1j * alpha[elem]) * (rot[(slot + 1) % k] - rot[slot])
    sums = np.concatenate(([s0], s0 + np.cumsum(delta)))
    best = int(np.argmax(np.abs(sums)))
    counts = np.bincount(elem[:best], minlength=n)
    return order[(start + counts) % k]


def optimal_config(
    hbar: np.ndarray,
    phase_set: PhaseSet,
    geometry: ArrayGeometry,
    method: str = "search",
) -> RisConfiguration:
    """Quantized configuration maximising the received power for ``hbar``.

    ``method="projection"`` quantizes ``-angle(hbar_n)`` cell by cell, which
    aligns every term towards zero phase.  ``method="search"`` (default) also
    optimises the common phase reference, which the projection fixes at 0;
    it returns the projection whenever the projection is already optimal.
    Masked cells are set to ABSORB.
    """
    hbar = np.asarray(hbar, dtype=complex)
    if len(hbar) != geometry.size:
        raise ShapeError(f"channel has {len(hbar)} entries, geometry {geometry.size}")
    if len(phase_set) == 0:
        raise ConfigurationError("cannot quantize onto an empty phase set")
    if method not in ("search", "projection"):
        raise ConfigurationError(f"unknown synthesis method {method!r}")
    mask = geometry.mask_array
    states = np.full(geometry.size, ABSORB, dtype=int)
    live = hbar[mask]
    if live.size == 0:
        return RisConfiguration(tuple(states), phase_set)

    phases = phase_set.array
    proj = quantize_phases(-np.angle(live), phase_set)
    chosen = proj
    if method == "search" and np.any(live != 0):
        cand = _rotation_search(live, phases)
        p_proj = abs(np.sum(np.exp(1j * phases[proj]) * live)) ** 2
        p_cand = abs(np.sum(np.exp(1j * phases[cand]) * live)) ** 2
        if p_cand > p_proj * (1 + 1e-12):
            chosen = cand
    states[mask] = chosen
    return RisConfiguration(tuple(int(s) for s in states), phase_set)


def continuous_optimum(hbar: np.ndarray, geometry: ArrayGeometry) -> np.ndarray:
    """Unquantized optimal coefficients ``exp(-1j*angle(hbar))`` (0 on masked cells)."""
    hbar = np.asarray(hbar, dtype=complex)
    if len(hbar) != geometry.size:
        raise ShapeError(f"channel has {len(hbar)} entries, geometry {geometry.size}")
    return np.where(geometry.mask_array, np.exp(-1j * np.angle(hbar)), 0.0)
