"""THz MIMO channel construction for a RIS-assisted link with a direct path.

Builds the three complex channel matrices (direct, transmitter-to-RIS,
RIS-to-receiver) from array geometry, per-path specifications and a
free-space-plus-absorption link budget.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array at one end of the link."""

    element_count: int
    element_spacing: float  # meters
    gain_per_element_dbi: float

    def __post_init__(self):
        if self.element_count < 1:
            raise ValueError("element_count must be >= 1")
        if not self.element_spacing > 0:
            raise ValueError("element_spacing must be > 0")

    @property
    def gain_linear(self) -> float:
        return 10.0 ** (0.1 * self.gain_per_element_dbi)


@dataclass(frozen=True)
class RisGeometry:
    """Rectangular grid of passive reflecting elements with one shared phase."""

    k_x: int
    k_y: int
    spacing_x: float  # meters
    spacing_y: float  # meters
    common_phase: float  # radians, folded into [0, 2*pi)

    def __post_init__(self):
        if self.k_x < 1 or self.k_y < 1:
            raise ValueError("RIS grid dimensions must be >= 1")
        if not (self.spacing_x > 0 and self.spacing_y > 0):
            raise ValueError("RIS element spacings must be > 0")
        if not math.isfinite(self.common_phase):
            raise ValueError("common_phase must be finite")
        object.__setattr__(self, "common_phase", self.common_phase % (2.0 * math.pi))

    @property
    def element_count(self) -> int:
        return self.k_x * self.k_y


@dataclass(frozen=True)
class PathSpec:
    """One propagation path of a channel.

    ``aod``/``aoa`` are the departure/arrival angles seen by whichever
    arrays terminate the channel (the RIS acts as the arrival side of the
    transmitter-to-RIS hop and as the departure side of the RIS-to-receiver
    hop).  ``elevation`` is the RIS elevation angle used by its response
    vector; it is ignored by channels that do not touch the RIS.
    """

    path_length: float  # meters
    aod: float  # radians
    aoa: float  # radians
    elevation: float = 0.0  # radians
    delay: float | None = None  # seconds; defaults to path_length / c
    fresnel_coeff: float = 0.5  # dimensionless, in [0, 1]
    is_los: bool = False

    def __post_init__(self):
        if not self.path_length > 0:
            raise ValueError("path_length must be > 0")
        if not 0.0 <= self.fresnel_coeff <= 1.0:
            raise ValueError("fresnel_coeff must lie in [0, 1]")
        for name in ("aod", "aoa", "elevation"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.delay is None:
            object.__setattr__(self, "delay", self.path_length / SPEED_OF_LIGHT)


def line_of_sight_path(length: float, aod: float = 0.0, aoa: float = 0.0,
                       elevation: float = 0.0) -> PathSpec:
    """Boresight-by-default LoS path with free-space delay."""
    return PathSpec(path_length=length, aod=aod, aoa=aoa, elevation=elevation,
                    is_los=True)


@dataclass(frozen=True)
class Scenario:
    """Full physical configuration of the link."""

    tx: ArrayGeometry
    rx: ArrayGeometry
    ris: RisGeometry
    carrier_frequency: float  # Hz
    absorption_db_per_km: float
    roughness: float  # Rayleigh roughness factor for non-LoS paths
    temperature: float  # kelvin
    modulation_variance: float  # shot-noise units
    eve_variance: float  # shot-noise units
    d_alice_bob: float  # meters
    d_alice_ris: float
    d_ris_bob: float
    multipaths_d: tuple[PathSpec, ...] = field(default_factory=tuple)
    multipaths_g: tuple[PathSpec, ...] = field(default_factory=tuple)
    multipaths_f: tuple[PathSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be > 0")
        if not self.modulation_variance > 0:
            raise ValueError("modulation_variance must be > 0")
        if self.eve_variance < 1.0:
            raise ValueError("eve_variance must be >= 1 (shot-noise units)")
        for name in ("d_alice_bob", "d_alice_ris", "d_ris_bob"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("multipaths_d", "multipaths_g", "multipaths_f"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency


@dataclass(frozen=True)
class ChannelTriple:
    """The three complex channel matrices of the link."""

    h_d: np.ndarray  # N_RX x N_TX
    h_g: np.ndarray  # K x N_TX
    h_f: np.ndarray  # N_RX x K

    def __post_init__(self):
        for name in ("h_d", "h_g", "h_f"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if not np.all(np.isfinite(m.view(float))):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, m)


def array_response(n: int, theta: float, spacing: float, wavelength: float) -> np.ndarray:
    """Unit-norm ULA response vector.

    Entry p (0-based) is exp(j * 2*pi * spacing * p * sin(theta) / wavelength)
    scaled by 1/sqrt(n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not wavelength > 0:
        raise ValueError("wavelength must be > 0")
    if not (math.isfinite(theta) and math.isfinite(spacing)):
        raise ValueError("theta and spacing must be finite")
    phase_step = 2.0 * math.pi * spacing * math.sin(theta) / wavelength
    phases = phase_step * np.arange(n)
    return np.exp(1j * phases) / math.sqrt(n)


def ris_response(ris: RisGeometry, elevation: float, theta: float,
                 wavelength: float) -> np.ndarray:
    """Unit-norm response vector of the RIS grid, flattened row-major.

    The element at grid index (p, q) carries phase
    (2*pi/wavelength) * (p * v_x + q * v_y) with
    v_x = spacing_x * cos(elevation) * sin(theta) and
    v_y = spacing_y * sin(elevation) * sin(theta); indices start at (0, 0).
    """
    if not wavelength > 0:
        raise ValueError("wavelength must be > 0")
    if not (math.isfinite(theta) and math.isfinite(elevation)):
        raise ValueError("angles must be finite")
    v_x = ris.spacing_x * math.cos(elevation) * math.sin(theta)
    v_y = ris.spacing_y * math.sin(elevation) * math.sin(theta)
    scale = 2.0 * math.pi / wavelength
    p = np.arange(ris.k_x)[:, None]
    q = np.arange(ris.k_y)[None, :]
    phases = scale * (p * v_x + q * v_y)
    k = ris.element_count
    return (np.exp(1j * phases) / math.sqrt(k)).reshape(k)


def path_loss(path: PathSpec, scenario: Scenario,
              endpoint_gains: tuple[float, float]) -> float:
    """Power path loss of one path from a free-space link budget.

    The spreading term uses the path length in meters; the absorption
    exponent uses it in kilometers since the absorption coefficient is
    quoted in dB/km.  Non-LoS paths are additionally attenuated by the
    roughness factor and the path's Fresnel reflection coefficient.
    """
    g_tx, g_rx = endpoint_gains
    if not (g_tx > 0 and g_rx > 0):
        raise ValueError("endpoint gains must be > 0")
    lam = scenario.wavelength
    d = path.path_length
    spreading = (lam / (4.0 * math.pi * d)) ** 2
    absorption = 10.0 ** (-0.1 * scenario.absorption_db_per_km * (d / 1000.0))
    delta = spreading * g_tx * g_rx * absorption
    if not path.is_los:
        delta *= scenario.roughness * path.fresnel_coeff
    return delta


def _channel_gains(scenario: Scenario, channel: str) -> tuple[float, float]:
    """Endpoint gain pair for one channel; the RIS side contributes its
    element count as gain."""
    g_tx_array = scenario.tx.element_count * scenario.tx.gain_linear
    g_rx_array = scenario.rx.element_count * scenario.rx.gain_linear
    k = scenario.ris.element_count
    if channel == "d":
        return g_tx_array, g_rx_array
    if channel == "g":
        return g_tx_array, float(k)
    if channel == "f":
        return float(k), g_rx_array
    raise ValueError(f"unknown channel tag {channel!r}")


def build_channels(scenario: Scenario) -> ChannelTriple:
    """Assemble the three channel matrices as sums over their paths.

    Each path contributes sqrt(path loss) * exp(j*2*pi*f_c*delay) times the
    outer product of the arrival-side and departure-side response vectors.
    """
    for name in ("multipaths_d", "multipaths_g", "multipaths_f"):
        if not getattr(scenario, name):
            raise ValueError(f"{name} must contain at least one path")
    lam = scenario.wavelength
    f_c = scenario.carrier_frequency
    n_tx, n_rx = scenario.tx.element_count, scenario.rx.element_count
    k = scenario.ris.element_count

    def accumulate(paths, channel, out_shape, rx_vec, tx_vec):
        gains = _channel_gains(scenario, channel)
        h = np.zeros(out_shape, dtype=complex)
        for p in paths:
            amp = math.sqrt(path_loss(p, scenario, gains))
            phase = np.exp(1j * 2.0 * math.pi * f_c * p.delay)
            h += amp * phase * np.outer(rx_vec(p), tx_vec(p).conj())
        return h

    h_d = accumulate(
        scenario.multipaths_d, "d", (n_rx, n_tx),
        lambda p: array_response(n_rx, p.aoa, scenario.rx.element_spacing, lam),
        lambda p: array_response(n_tx, p.aod, scenario.tx.element_spacing, lam))
    h_g = accumulate(
        scenario.multipaths_g, "g", (k, n_tx),
        lambda p: ris_response(scenario.ris, p.elevation, p.aoa, lam),
        lambda p: array_response(n_tx, p.aod, scenario.tx.element_spacing, lam))
    h_f = accumulate(
        scenario.multipaths_f, "f", (n_rx, k),
        lambda p: array_response(n_rx, p.aoa, scenario.rx.element_spacing, lam),
        lambda p: ris_response(scenario.ris, p.elevation, p.aod, lam))
    return ChannelTriple(h_d=h_d, h_g=h_g, h_f=h_f)


def composite_channel(t: ChannelTriple, ris: RisGeometry) -> np.ndarray:
    """Effective end-to-end matrix: direct term plus the phase-shifted
    reflected cascade."""
    if t.h_f.shape[1] != ris.element_count or t.h_g.shape[0] != ris.element_count:
        raise ValueError("RIS dimension mismatch between channels and geometry")
    phases = np.full(ris.element_count, ris.common_phase)
    return t.h_d + t.h_f @ np.diag(np.exp(1j * phases)) @ t.h_g
