"""Analytical transfer functions of the GST-loaded add-drop ring resonator.

Field picture: light at wavelength lam circulates a ring of radius R
whose circumference includes a GST-loaded section of length L_gst.  The
round trip applies an attenuation factor

    alpha = exp(-(2*pi/lam) * kappa_eff_gst(p) * L_gst)

(the bare-waveguide loss term is negligible and dropped by default) and
a phase factor

    theta = (2*pi/lam) * [n_eff_wg*(2*pi*R - L_gst) + n_eff_gst(p)*L_gst].

Power transmissions of the two bus ports for couplers t1, t2:

    T_t = (t2^2 a^2 - 2 t1 t2 a cos th + t1^2) / (1 - 2 t1 t2 a cos th + (t1 t2 a)^2)
    T_d = ((1 - t1^2)(1 - t2^2) a)             / (1 - 2 t1 t2 a cos th + (t1 t2 a)^2)

Effective indices of the GST section are not mode-solved here; their
endpoints are calibrated against the quoted single-pass insertion losses
(-3.71 dB crystalline, -0.26 dB amorphous over 0.3 um) and the bulk
effective-medium curve sets the shape in between.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .materials import DEFAULT_TABLE, GstState, MaterialTable, bulk_index_curve

__all__ = [
    "RingGeometry",
    "CouplerPair",
    "EffectiveIndices",
    "TransmissionPoint",
    "RingDevice",
    "resonant_wavelengths",
    "attenuation_factor",
    "phase_factor",
    "ring_transmission",
    "transmission_spectrum",
    "resonance_shift",
    "straight_waveguide_transmission",
    "extinction_contrast_db",
]

LAMBDA_READ = 1529.1e-9
RESONANCE_ORDER = 59


@dataclass(frozen=True)
class RingGeometry:
    """Ring and GST patch dimensions (metres)."""

    radius: float = 6e-6
    gst_length: float = 0.3e-6
    gst_width: float = 0.3e-6
    gst_thickness: float = 20e-9
    wg_width: float = 0.4e-6
    wg_height: float = 0.18e-6

    def __post_init__(self):
        for name in ("radius", "gst_length", "gst_width", "gst_thickness", "wg_width", "wg_height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.gst_length < self.circumference:
            raise ValueError("GST patch cannot be longer than the ring circumference")

    @property
    def circumference(self) -> float:
        return 2.0 * math.pi * self.radius


@dataclass(frozen=True)
class CouplerPair:
    """Field transmission coefficients of the two (lossless) couplers."""

    t1: float = 0.95
    t2: float = 0.95

    def __post_init__(self):
        for t in (self.t1, self.t2):
            if not 0.0 < t < 1.0:
                raise ValueError(f"coupler transmission must be in (0, 1), got {t}")

    @property
    def k1(self) -> float:
        return math.sqrt(1.0 - self.t1**2)

    @property
    def k2(self) -> float:
        return math.sqrt(1.0 - self.t2**2)


def _loss_db_to_kappa(loss_db: float, gst_length: float, lam: float) -> float:
    """Effective kappa giving `loss_db` single-pass power loss over the patch."""
    return loss_db * math.log(10.0) / 20.0 * lam / (2.0 * math.pi * gst_length)


@dataclass(frozen=True)
class EffectiveIndices:
    """Effective mode indices of the bare and GST-loaded waveguide sections.

    kappa_eff_gst(p) and n_eff_gst(p) rescale the bulk effective-medium
    curve between calibrated device-level endpoints, preserving the
    mixing rule's shape while matching the quoted insertion losses.
    """

    n_eff_wg: float = RESONANCE_ORDER * LAMBDA_READ / (2.0 * math.pi * 6e-6)
    kappa_eff_wg: float = 0.0
    kappa_c_eff: float = _loss_db_to_kappa(3.71, 0.3e-6, LAMBDA_READ)
    kappa_a_eff: float = _loss_db_to_kappa(0.26, 0.3e-6, LAMBDA_READ)
    dn_crystalline: float = 0.12
    dn_amorphous: float = 0.03
    table: MaterialTable = field(default_factory=lambda: DEFAULT_TABLE)

    def __post_init__(self):
        if not self.n_eff_wg > 1.0:
            raise ValueError("n_eff_wg must exceed 1")
        if not self.kappa_c_eff > self.kappa_a_eff > 0.0:
            raise ValueError("need kappa_eff_gst(1) > kappa_eff_gst(0) > 0")
        if self.kappa_eff_wg < 0.0:
            raise ValueError("kappa_eff_wg must be >= 0")

    @classmethod
    def calibrated(
        cls,
        lambda_read: float = LAMBDA_READ,
        radius: float = 6e-6,
        gst_length: float = 0.3e-6,
        order: int = RESONANCE_ORDER,
        loss_db_crystalline: float = 3.71,
        loss_db_amorphous: float = 0.26,
        dn_crystalline: float = 0.12,
        dn_amorphous: float = 0.03,
        table: MaterialTable = DEFAULT_TABLE,
    ) -> "EffectiveIndices":
        """Pin resonance order `order` of the bare ring to lambda_read and
        calibrate the GST-section kappa endpoints from insertion losses."""
        return cls(
            n_eff_wg=order * lambda_read / (2.0 * math.pi * radius),
            kappa_eff_wg=0.0,
            kappa_c_eff=_loss_db_to_kappa(loss_db_crystalline, gst_length, lambda_read),
            kappa_a_eff=_loss_db_to_kappa(loss_db_amorphous, gst_length, lambda_read),
            dn_crystalline=dn_crystalline,
            dn_amorphous=dn_amorphous,
            table=table,
        )

    def _bulk_weights(self, p):
        bulk = bulk_index_curve(p, self.table)
        b0 = bulk_index_curve(0.0, self.table)
        b1 = bulk_index_curve(1.0, self.table)
        w_kappa = (np.imag(bulk) - b0.imag) / (b1.imag - b0.imag)
        w_n = (np.real(bulk) - b0.real) / (b1.real - b0.real)
        return w_n, w_kappa

    def kappa_eff_gst(self, p):
        """Effective extinction of the GST section; scalar or array p."""
        _, w = self._bulk_weights(p)
        return self.kappa_a_eff + w * (self.kappa_c_eff - self.kappa_a_eff)

    def n_eff_gst(self, p):
        """Effective real index of the GST section; scalar or array p."""
        w, _ = self._bulk_weights(p)
        lo = self.n_eff_wg + self.dn_amorphous
        hi = self.n_eff_wg + self.dn_crystalline
        return lo + w * (hi - lo)


@dataclass(frozen=True)
class TransmissionPoint:
    wavelength: float
    t_through: float
    t_drop: float

    def __post_init__(self):
        for name, t in (("t_through", self.t_through), ("t_drop", self.t_drop)):
            if not -1e-12 <= t <= 1.0 + 1e-12:
                raise ValueError(f"{name} out of [0, 1]: {t}")


def _as_p(state):
    return state.p if isinstance(state, GstState) else state


def resonant_wavelengths(geom: RingGeometry, indices: EffectiveIndices, band):
    """All (order m, lambda_m) with lambda_m = circumference*n_eff_wg/m in `band`.

    Returned ascending in wavelength; empty list if the band contains none.
    """
    lo, hi = band
    if not 0 < lo <= hi:
        raise ValueError(f"bad wavelength band {band}")
    optical_length = geom.circumference * indices.n_eff_wg
    m_max = math.floor(optical_length / lo)
    m_min = math.ceil(optical_length / hi)
    out = []
    for m in range(m_max, m_min - 1, -1):
        lam = optical_length / m
        if lo <= lam <= hi:
            out.append((m, lam))
    return out


def attenuation_factor(geom, indices, state, lam, include_wg_loss: bool = False):
    """Round-trip field attenuation alpha; GST term only unless
    include_wg_loss switches on the exact form with the bare-waveguide term."""
    p = _as_p(state)
    exponent = indices.kappa_eff_gst(p) * geom.gst_length
    if include_wg_loss:
        exponent = exponent + indices.kappa_eff_wg * (geom.circumference - geom.gst_length)
    return np.exp(-(2.0 * np.pi / lam) * exponent)


def phase_factor(geom, indices, state, lam):
    """Round-trip phase theta in radians (not reduced modulo 2*pi)."""
    p = _as_p(state)
    path = indices.n_eff_wg * (geom.circumference - geom.gst_length)
    path = path + indices.n_eff_gst(p) * geom.gst_length
    return (2.0 * np.pi / lam) * path


def _transmissions(geom, indices, couplers, p, lam, include_wg_loss=False):
    a = attenuation_factor(geom, indices, p, lam, include_wg_loss)
    th = phase_factor(geom, indices, p, lam)
    t1, t2 = couplers.t1, couplers.t2
    cos_th = np.cos(th)
    den = 1.0 - 2.0 * t1 * t2 * a * cos_th + (t1 * t2 * a) ** 2
    t_through = (t2**2 * a**2 - 2.0 * t1 * t2 * a * cos_th + t1**2) / den
    t_drop = ((1.0 - t1**2) * (1.0 - t2**2) * a) / den
    return t_through, t_drop


def ring_transmission(geom, indices, couplers, state, lam, include_wg_loss=False):
    """THROUGH/DROP power transmission at one wavelength."""
    tt, td = _transmissions(geom, indices, couplers, _as_p(state), lam, include_wg_loss)
    return TransmissionPoint(lam, float(tt), float(td))


def transmission_spectrum(geom, indices, couplers, state, band, n_points):
    """Uniform-grid spectrum over `band`; n_points >= 2."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    lams = np.linspace(band[0], band[1], n_points)
    tt, td = _transmissions(geom, indices, couplers, _as_p(state), lams)
    return [
        TransmissionPoint(float(l), float(a), float(b)) for l, a, b in zip(lams, tt, td)
    ]


def resonance_shift(indices: EffectiveIndices, geom: RingGeometry, delta_n_eff_gst,
                    lambda_read: float = LAMBDA_READ):
    """Resonance peak displacement for a change in the GST section's real
    effective index; per-unit fractional form scaled by lambda_read so a
    length is returned."""
    fractional = (delta_n_eff_gst / indices.n_eff_wg) * (
        geom.gst_length / geom.circumference
    )
    return fractional * lambda_read


def straight_waveguide_transmission(indices, state, gst_length=0.3e-6, lam=LAMBDA_READ):
    """Single-pass power transmission of the firing-unit rectangular
    waveguide: exp(-(4*pi/lam)*kappa_eff_gst(p)*L)."""
    p = _as_p(state)
    return np.exp(-(4.0 * np.pi / lam) * indices.kappa_eff_gst(p) * gst_length)


@dataclass(frozen=True)
class RingDevice:
    """One GST ring resonator: geometry + couplers + effective indices,
    read at a fixed wavelength."""

    geometry: RingGeometry = field(default_factory=RingGeometry)
    couplers: CouplerPair = field(default_factory=CouplerPair)
    indices: EffectiveIndices = field(default_factory=EffectiveIndices)
    lambda_read: float = LAMBDA_READ

    def transmission(self, state, lam=None) -> TransmissionPoint:
        lam = self.lambda_read if lam is None else lam
        return ring_transmission(self.geometry, self.indices, self.couplers, state, lam)

    def through_drop(self, p, lam=None):
        """Vector-friendly (T_through, T_drop) for scalar or array p."""
        lam = self.lambda_read if lam is None else lam
        return _transmissions(self.geometry, self.indices, self.couplers, p, lam)

    def spectrum(self, state, band, n_points):
        return transmission_spectrum(
            self.geometry, self.indices, self.couplers, state, band, n_points
        )


def extinction_contrast_db(device: RingDevice, lam=None):
    """Port contrast between the fully crystalline and fully amorphous
    states at the read wavelength: (through dB, drop dB), both positive."""
    tt1, td1 = device.through_drop(1.0, lam)
    tt0, td0 = device.through_drop(0.0, lam)
    return (
        10.0 * math.log10(float(tt1) / float(tt0)),
        10.0 * math.log10(float(td0) / float(td1)),
    )
