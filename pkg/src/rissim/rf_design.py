"""Closed-form RF design calculators for the unit cell and the board.

Transmission-line patch model, inset-notch depth, delay-line lengths,
microstrip velocity factor, maximum inter-cell spacing and the antenna
field-region thresholds.  Everything is SI (meters, hertz, seconds) and
phases are in degrees.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import acos, pi, sin, sqrt

from scipy.constants import speed_of_light as C0

from .errors import DomainError

# Empirical values measured on the prototype; no formula reproduces them.
FEED_LINE_WIDTH_M = 0.75e-3  # best TDR match to 50 ohm
MODEL_FEED_LINE_WIDTH_M = 0.95e-3  # strip-line model prediction, measured too low-impedance
TDR_LINE_LENGTH_M = 135e-3
TDR_LINE_DELAY_S = 1.51e-9
VELOCITY_FACTOR = 0.3
REFINED_PATCH_WIDTH_M = 15.5e-3  # after full-wave refinement
REFINED_PATCH_LENGTH_M = 12.8e-3
REFINED_NOTCH_DEPTH_M = 3.5e-3
PATCH_ELEMENT_GAIN_DBI = 1.5
EDGE_RESISTANCE_OHM = 341.0
LINE_IMPEDANCE_OHM = 50.0
PUBLISHED_PATCH_WIDTH_M = 16.9e-3
PUBLISHED_PATCH_LENGTH_M = 13.15e-3

# Switch output ports in delay-line order (increasing phase); port 8 is the absorber.
SWITCH_PORTS = (7, 6, 5, 1, 3, 2, 4)
ABSORBER_PORT = 8


@dataclass(frozen=True)
class SubstrateSpec:
    eps_r: float = 4.3
    height_m: float = 0.53e-3

    def __post_init__(self) -> None:
        if not self.eps_r >= 1:
            raise DomainError(f"relative permittivity must be >= 1, got {self.eps_r}")
        if not self.height_m > 0:
            raise DomainError(f"substrate height must be positive, got {self.height_m}")


FR4_NOMINAL = SubstrateSpec(4.3, 0.53e-3)
FR4_CORRECTED = SubstrateSpec(4.66, 0.53e-3)


@dataclass(frozen=True)
class DesignPreset:
    name: str
    frequency_hz: float
    substrate: SubstrateSpec


PRESETS = {
    "paper": DesignPreset("paper", 5.5e9, FR4_NOMINAL),
    "paper-corrected": DesignPreset("paper-corrected", 5.3e9, FR4_CORRECTED),
}


@dataclass(frozen=True)
class PatchDesign:
    width_m: float
    length_m: float
    eps_eff: float
    l_eff_m: float
    delta_l_m: float
    notch_depth_m: float

    def as_dict(self) -> dict:
        return asdict(self)


def wavelength(f_hz: float) -> float:
    if not f_hz > 0:
        raise DomainError(f"frequency must be positive, got {f_hz}")
    return C0 / f_hz


def patch_dimensions(
    f_hz: float,
    substrate: SubstrateSpec,
    r_edge_ohm: float = EDGE_RESISTANCE_OHM,
    r_target_ohm: float = LINE_IMPEDANCE_OHM,
) -> PatchDesign:
    """Rectangular patch by the transmission-line model.

    The ratio ``h/w`` in the effective permittivity and in the fringing
    extension uses the patch width.  The notch depth is evaluated at the
    resulting physical length.
    """
    lam = wavelength(f_hz)
    er, h = substrate.eps_r, substrate.height_m
    width = lam / (2 * sqrt(0.5 * (er + 1)))
    hw = h / width
    eps_eff = (er + 1) / 2 + (er - 1) / 2 / sqrt(1 + 12 * hw)
    l_eff = C0 / (2 * f_hz * sqrt(eps_eff))
    delta_l = 0.412 * h * (eps_eff + 0.3) / (eps_eff - 0.258) * (hw + 0.264) / (hw + 0.8)
    length = l_eff - 2 * delta_l
    return PatchDesign(
        width_m=width,
        length_m=length,
        eps_eff=eps_eff,
        l_eff_m=l_eff,
        delta_l_m=delta_l,
        notch_depth_m=notch_depth(length, r_edge_ohm, r_target_ohm),
    )


def notch_depth(length_m: float, r_edge_ohm: float, r_target_ohm: float) -> float:
    """Inset depth ``(L/pi) * acos(sqrt(R/R_edge))`` that brings the input resistance to ``R``."""
    if not 0 < r_target_ohm <= r_edge_ohm:
        raise DomainError(f"need 0 < R ({r_target_ohm}) <= R_edge ({r_edge_ohm})")
    return length_m / pi * acos(sqrt(r_target_ohm / r_edge_ohm))


def _check_line(f_hz: float, v_f: float) -> None:
    if not f_hz > 0:
        raise DomainError(f"frequency must be positive, got {f_hz}")
    if not 0 < v_f <= 1:
        raise DomainError(f"velocity factor must lie in (0, 1], got {v_f}")


def delay_line_length(phase_deg: float, f_hz: float, v_f: float = VELOCITY_FACTOR) -> float:
    """Open-ended line length whose round trip delays the signal by ``phase_deg``."""
    _check_line(f_hz, v_f)
    return phase_deg * C0 * v_f / (720.0 * f_hz)


def phase_of_length(length_m: float, f_hz: float, v_f: float = VELOCITY_FACTOR) -> float:
    """Round-trip phase of a line, wrapped to ``[0, 360)`` degrees."""
    _check_line(f_hz, v_f)
    return (360.0 * 2 * length_m * f_hz / (C0 * v_f)) % 360.0


@dataclass(frozen=True)
class DelayLine:
    port: int
    phase_deg: float
    length_m: float


def delay_line_table(f_hz: float = 5.3e9, v_f: float = VELOCITY_FACTOR) -> list[DelayLine]:
    """The seven reflective switch ports with phases ``k*360/7`` for ``k = 1..7``."""
    rows = []
    for k, port in enumerate(SWITCH_PORTS, start=1):
        phase = k * 360.0 / 7
        rows.append(DelayLine(port, phase, delay_line_length(phase, f_hz, v_f)))
    return rows


def velocity_factor(length_m: float, delay_s: float) -> float:
    if not (length_m > 0 and delay_s > 0):
        raise DomainError("line length and delay must be positive")
    return length_m / delay_s / C0


def max_spacing(theta_max_rad: float, wavelength_m: float) -> float:
    """Largest grating-lobe-free spacing for a main lobe steered up to ``theta_max``."""
    if not 0 <= theta_max_rad <= pi / 2 + 1e-12:
        raise DomainError(f"maximum steering angle must lie in [0, pi/2], got {theta_max_rad}")
    return wavelength_m / (1 + sin(theta_max_rad))


def field_regions(diagonal_m: float, wavelength_m: float) -> tuple[float, float]:
    """``(far-field distance, reactive near-field distance)`` for an aperture of size ``D``."""
    if not (diagonal_m > 0 and wavelength_m > 0):
        raise DomainError("aperture size and wavelength must be positive")
    return 2 * diagonal_m**2 / wavelength_m, 0.62 * sqrt(diagonal_m**3 / wavelength_m)


def design_report(preset: DesignPreset, v_f: float = VELOCITY_FACTOR, diagonal_m: float = 0.43) -> list[dict]:
    """Every computed quantity of a preset as ``{"quantity", "value", "unit"}`` rows."""
    f = preset.frequency_hz
    lam = wavelength(f)
    patch = patch_dimensions(f, preset.substrate)
    far, near = field_regions(diagonal_m, lam)
    mm = 1e3
    rows = [
        ("frequency", f / 1e9, "GHz"),
        ("wavelength", lam * mm, "mm"),
        ("eps_r", preset.substrate.eps_r, ""),
        ("substrate_height", preset.substrate.height_m * mm, "mm"),
        ("patch_width", patch.width_m * mm, "mm"),
        ("patch_length", patch.length_m * mm, "mm"),
        ("eps_eff", patch.eps_eff, ""),
        ("effective_length", patch.l_eff_m * mm, "mm"),
        ("fringing_extension", patch.delta_l_m * mm, "mm"),
        ("notch_depth", patch.notch_depth_m * mm, "mm"),
        (
            "notch_depth_published_length",
            notch_depth(PUBLISHED_PATCH_LENGTH_M, EDGE_RESISTANCE_OHM, LINE_IMPEDANCE_OHM) * mm,
            "mm",
        ),
        ("velocity_factor", v_f, ""),
        ("velocity_factor_tdr", velocity_factor(TDR_LINE_LENGTH_M, TDR_LINE_DELAY_S), ""),
        ("feed_line_width", FEED_LINE_WIDTH_M * mm, "mm"),
        ("max_spacing_90deg", max_spacing(pi / 2, lam) * mm, "mm"),
        ("far_field_distance", far, "m"),
        ("reactive_near_field_distance", near, "m"),
    ]
    for line in delay_line_table(f, v_f):
        rows.append((f"delay_line_port{line.port}_{line.phase_deg:.2f}deg", line.length_m * mm, "mm"))
    return [{"quantity": q, "value": v, "unit": u} for q, v, u in rows]
