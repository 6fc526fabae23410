"""Behavioral write dynamics of the GST patch.

A write pulse deposits heat along the patch with an exponentially
decaying profile A = exp(-|alpha_x| * x * ln(10)/10); segments heated to
the melting temperature (877 K) quench amorphous.  Because the already
amorphous front absorbs an order of magnitude less than the crystalline
remainder, amorphization grows as a contiguous front-aligned region and
each additional pulse advances the melt front by a diminishing amount.

The model is 1-D and adiabatic over the 200 ps pulse (no lateral
conduction, full cooling between pulses).  Two constants are fitted to
the device anchors: the deposition decay alpha_x so a 26 mW / 200 ps
pulse melts 57% of a fully crystalline patch, and a heat scale so the
melt onset from the crystalline state sits exactly at 12 mW.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .materials import DEFAULT_TABLE, GstState, MaterialTable

__all__ = [
    "WritePulse",
    "ThermalModel",
    "AmorphizationMap",
    "temperature_profile",
    "apply_write_pulse",
    "melt_update",
    "tabulate_map",
    "reset",
]

MELT_ONSET_W = 12e-3
CALIBRATION_POWER_W = 26e-3
CALIBRATION_MELT_FRACTION = 0.57
WRITE_DURATION_S = 200e-12

# deposition decay fitted to the anchors above, for a 0.3 um patch
DEFAULT_ALPHA_X = (
    math.log(CALIBRATION_POWER_W / MELT_ONSET_W)
    / CALIBRATION_MELT_FRACTION
    * 10.0
    / (math.log(10.0) * 0.3e-6)
)


@dataclass(frozen=True)
class WritePulse:
    """Rectangular optical write pulse."""

    power: float
    duration: float = WRITE_DURATION_S

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("pulse power must be >= 0")
        if not self.duration > 0:
            raise ValueError("pulse duration must be > 0")


@dataclass(frozen=True)
class ThermalModel:
    """Segmented 1-D absorption model of the GST patch.

    alpha_x is the heat-deposition decay in dB per metre; kappa_ratio
    scales it inside the already-amorphous front.  c_t_* are the
    physical absorbed-energy-to-temperature coefficients (K/J) of one
    segment, derived from the specific heats, densities and patch
    volume; heat_scale is the fitted calibration factor on top.
    """

    segments: int = 100
    gst_length: float = 0.3e-6
    gst_width: float = 0.3e-6
    gst_thickness: float = 20e-9
    alpha_x: float = DEFAULT_ALPHA_X  # heat-deposition decay, dB/m
    kappa_ratio: float = 0.26 / 3.71
    ambient: float = 300.0
    melting_temperature: float = 877.0
    melt_onset_w: float = MELT_ONSET_W
    heat_scale: float = 1.0
    pulse_duration: float = WRITE_DURATION_S
    table: MaterialTable = field(default_factory=lambda: DEFAULT_TABLE)

    def __post_init__(self):
        if self.segments < 16:
            raise ValueError("need at least 16 segments")
        if not self.melting_temperature > self.ambient:
            raise ValueError("melting temperature must exceed ambient")
        if not self.alpha_x > 0:
            raise ValueError("alpha_x must be positive")

    @classmethod
    def calibrated(
        cls,
        segments: int = 100,
        gst_length: float = 0.3e-6,
        gst_width: float = 0.3e-6,
        gst_thickness: float = 20e-9,
        melt_onset_w: float = MELT_ONSET_W,
        calibration_power_w: float = CALIBRATION_POWER_W,
        calibration_melt_fraction: float = CALIBRATION_MELT_FRACTION,
        loss_ratio: float = 0.26 / 3.71,
        pulse_duration: float = WRITE_DURATION_S,
        table: MaterialTable = DEFAULT_TABLE,
    ) -> "ThermalModel":
        """Fit alpha_x and the heat scale to the two device anchors."""
        # deposition decay over the whole patch, natural-log units
        g_total = math.log(calibration_power_w / melt_onset_w) / calibration_melt_fraction
        alpha_x = g_total * 10.0 / (math.log(10.0) * gst_length)
        # heat scale: front-edge temperature reaches the melting point at
        # exactly the onset power from the fully crystalline state
        gamma_c = g_total / gst_length
        edge_rise_per_watt = gamma_c * pulse_duration / (
            table.density_crystalline
            * table.specific_heat_crystalline
            * gst_width
            * gst_thickness
        )
        ambient, melting = 300.0, table.melting_temperature
        scale = (melting - ambient) / (edge_rise_per_watt * melt_onset_w)
        return cls(
            segments=segments,
            gst_length=gst_length,
            gst_width=gst_width,
            gst_thickness=gst_thickness,
            alpha_x=alpha_x,
            kappa_ratio=loss_ratio,
            ambient=ambient,
            melting_temperature=melting,
            melt_onset_w=melt_onset_w,
            heat_scale=scale,
            pulse_duration=pulse_duration,
            table=table,
        )

    # -- derived quantities ------------------------------------------------

    @property
    def gamma_c(self) -> float:
        """Deposition decay rate (1/m) in crystalline material."""
        return self.alpha_x * math.log(10.0) / 10.0

    @property
    def gamma_a(self) -> float:
        return self.gamma_c * self.kappa_ratio

    @property
    def g_crystalline(self) -> float:
        """Decay exponent over the full patch length, crystalline."""
        return self.gamma_c * self.gst_length

    @property
    def g_amorphous(self) -> float:
        return self.gamma_a * self.gst_length

    def c_t(self, crystalline: bool) -> float:
        """Temperature rise per joule absorbed in one segment (K/J)."""
        volume = self.gst_length * self.gst_width * self.gst_thickness / self.segments
        if crystalline:
            rho, cp = self.table.density_crystalline, self.table.specific_heat_crystalline
        else:
            rho, cp = self.table.density_amorphous, self.table.specific_heat_amorphous
        return 1.0 / (rho * cp * volume)


DEFAULT_THERMAL = ThermalModel.calibrated()


def temperature_profile(model: ThermalModel, state: GstState, pulse: WritePulse):
    """Per-segment peak temperature (K) at the end of the pulse.

    Segments are sampled at their midpoints; the front `a*L` of the
    patch is amorphous, the remainder crystalline.
    """
    n = model.segments
    x_mid = (np.arange(n) + 0.5) / n  # normalized midpoints
    amorphous = x_mid < state.amorphization
    # per-segment decay exponent and cumulative attenuation to midpoints
    g_seg = np.where(amorphous, model.g_amorphous, model.g_crystalline) / n
    cum = np.concatenate(([0.0], np.cumsum(g_seg)))[:-1] + g_seg / 2.0
    incident = pulse.power * np.exp(-cum)
    gamma = np.where(amorphous, model.gamma_a, model.gamma_c)
    c_t = np.where(amorphous, model.c_t(False), model.c_t(True))
    seg_len = model.gst_length / n
    absorbed = incident * gamma * seg_len * pulse.duration
    rise = model.heat_scale * absorbed * c_t
    return model.ambient + rise


def melt_update(model: ThermalModel, a, power):
    """Front-aligned melt advance; scalar or array amorphization/power.

    Continuum limit of the segment model: the melt front reaches the
    depth where the incident power, attenuated across the amorphous
    front and the crystalline remainder, still heats the material to the
    melting point.  Amorphization never reverts.
    """
    a = np.asarray(a, dtype=np.float64)
    power = np.asarray(power, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(
            power > 0.0, np.log(power / model.melt_onset_w), -np.inf
        )
    increment = (log_ratio - model.g_amorphous * a) / model.g_crystalline
    a_new = np.minimum(1.0, a + np.maximum(0.0, increment))
    if a_new.ndim == 0:
        return float(a_new)
    return a_new


def apply_write_pulse(model: ThermalModel, state: GstState, pulse: WritePulse) -> GstState:
    """New GST state after one write pulse.

    Pulses below the melt onset leave the state exactly unchanged;
    otherwise the amorphous front advances per `melt_update`.
    """
    if pulse.power <= 0.0:
        return state
    a_new = melt_update(model, state.amorphization, pulse.power)
    if a_new == state.amorphization:
        return state
    return GstState(1.0 - a_new)


def reset(state: GstState) -> GstState:
    """RESET primitive: back to fully crystalline, idempotent."""
    return GstState(1.0)


@dataclass(frozen=True)
class AmorphizationMap:
    """Tabulated final amorphization f(a, P) with bilinear interpolation.

    Rows follow the initial-amorphization grid, columns the pulse-power
    grid, at the model's fixed pulse duration.
    """

    a_grid: np.ndarray
    power_grid: np.ndarray
    values: np.ndarray
    pulse_duration: float = WRITE_DURATION_S

    def __post_init__(self):
        if self.values.shape != (self.a_grid.size, self.power_grid.size):
            raise ValueError("table shape does not match its grids")

    def __call__(self, a, power):
        """Interpolated f(a, P); scalar or array inputs, clipped to the grid."""
        a = np.clip(np.asarray(a, dtype=np.float64), self.a_grid[0], self.a_grid[-1])
        power = np.clip(
            np.asarray(power, dtype=np.float64), self.power_grid[0], self.power_grid[-1]
        )
        ia = np.clip(np.searchsorted(self.a_grid, a, side="right") - 1, 0, self.a_grid.size - 2)
        ip = np.clip(
            np.searchsorted(self.power_grid, power, side="right") - 1,
            0,
            self.power_grid.size - 2,
        )
        a0, a1 = self.a_grid[ia], self.a_grid[ia + 1]
        p0, p1 = self.power_grid[ip], self.power_grid[ip + 1]
        wa = np.where(a1 > a0, (a - a0) / (a1 - a0), 0.0)
        wp = np.where(p1 > p0, (power - p0) / (p1 - p0), 0.0)
        v00 = self.values[ia, ip]
        v01 = self.values[ia, ip + 1]
        v10 = self.values[ia + 1, ip]
        v11 = self.values[ia + 1, ip + 1]
        out = (
            v00 * (1 - wa) * (1 - wp)
            + v01 * (1 - wa) * wp
            + v10 * wa * (1 - wp)
            + v11 * wa * wp
        )
        if out.ndim == 0:
            return float(out)
        return out

    def to_csv(self, path_or_buf):
        """Matrix CSV: header row of powers (W), first column the a grid."""
        close = False
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            buf = open(path_or_buf, "w", newline="")
            close = True
        else:
            buf = path_or_buf
        try:
            writer = csv.writer(buf)
            writer.writerow(["a_initial"] + [repr(float(p)) for p in self.power_grid])
            for i, a in enumerate(self.a_grid):
                writer.writerow([repr(float(a))] + [repr(float(v)) for v in self.values[i]])
        finally:
            if close:
                buf.close()

    @classmethod
    def from_csv(cls, path_or_buf, pulse_duration: float = WRITE_DURATION_S):
        close = False
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            buf = open(path_or_buf, "r", newline="")
            close = True
        else:
            buf = path_or_buf
        try:
            rows = list(csv.reader(buf))
        finally:
            if close:
                buf.close()
        power_grid = np.array([float(x) for x in rows[0][1:]])
        a_grid = np.array([float(r[0]) for r in rows[1:]])
        values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        return cls(a_grid=a_grid, power_grid=power_grid, values=values,
                   pulse_duration=pulse_duration)

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def tabulate_map(
    model: ThermalModel,
    a_points: int = 321,
    power_points: int = 641,
    power_max: float = 30e-3,
) -> AmorphizationMap:
    """Dense f(a, P) table over a in [0, 1], P in [0, power_max].

    The default grid keeps bilinear interpolation within 1e-3 of the
    direct update everywhere, including across the onset and saturation
    kinks.
    """
    a_grid = np.linspace(0.0, 1.0, a_points)
    power_grid = np.linspace(0.0, power_max, power_points)
    values = melt_update(model, a_grid[:, None], power_grid[None, :])
    return AmorphizationMap(
        a_grid=a_grid,
        power_grid=power_grid,
        values=values,
        pulse_duration=model.pulse_duration,
    )
