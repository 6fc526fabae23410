"""Run configuration: compiled-in defaults, INI overrides, flag overrides.

The file format is flat key/value sections (configparser syntax).  Every
run directory receives the fully resolved configuration, and re-running
from that file reproduces the run bitwise.  Unknown sections or keys are
rejected so typos fail loudly, with file/line context where available.
"""

import configparser
import copy
from pathlib import Path

from . import snn_defaults
from .materials import MaterialTable
from .phase_change import ThermalModel
from .photonics import CouplerPair, EffectiveIndices, RingDevice, RingGeometry

__all__ = ["ConfigError", "RunConfig", "DEFAULTS"]


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "materials": {
        "n_si": 3.5,
        "n_sio2": 1.4,
        "gst_crystalline_n": 7.2,
        "gst_crystalline_kappa": 1.9,
        "gst_amorphous_n": 4.6,
        "gst_amorphous_kappa": 0.18,
        "specific_heat_crystalline": 217.0,
        "specific_heat_amorphous": 217.0,
        "thermal_conductivity_crystalline": 0.59,
        "thermal_conductivity_amorphous": 0.19,
        "density_crystalline": 6270.0,
        "density_amorphous": 5870.0,
        "melting_temperature": 877.0,
    },
    "device": {
        "radius_m": 6e-6,
        "gst_length_m": 0.3e-6,
        "gst_width_m": 0.3e-6,
        "gst_thickness_m": 20e-9,
        "wg_width_m": 0.4e-6,
        "wg_height_m": 0.18e-6,
        "coupler_t1": 0.95,
        "coupler_t2": 0.95,
        "lambda_read_m": 1529.1e-9,
        "resonance_order": 59,
        "loss_db_crystalline": 3.71,
        "loss_db_amorphous": 0.26,
        "dn_crystalline": 0.12,
        "dn_amorphous": 0.03,
    },
    "thermal": {
        "segments": 100,
        "pulse_duration_s": 200e-12,
        "melt_onset_w": 12e-3,
        "calibration_power_w": 26e-3,
        "calibration_melt_fraction": 0.57,
    },
    "neuron": {
        "threshold_fraction": snn_defaults.THRESHOLD_FRACTION,
        "routing": snn_defaults.ROUTING,
        "power_min_w": 12e-3,
        "power_max_w": 26e-3,
        "spike_detect_threshold": 0.7,
    },
    "snn": {
        "time_steps": 25,
        "encoder": "bernoulli",
        "chunk": 250,
    },
    "training": {
        "hidden": 128,
        "epochs": 10,
        "batch_size": 64,
        "learning_rate": 0.1,
        "lr_decay": 0.95,
        "bias_mode": "zero",
        "train_subset": 0,  # 0 = full split
    },
    "conversion": {
        "percentile": 99.9,
        "drive_percentile": snn_defaults.DRIVE_PERCENTILE,
        "calibration_size": 10000,
    },
    "spectrum": {
        "band_nm_low": 1520.0,
        "band_nm_high": 1540.0,
        "points": 2001,
        "p_values": "0,0.25,0.5,0.75,1",
    },
    "sweep": {
        "a_points": 21,
        "power_points": 31,
        "power_max_w": 30e-3,
    },
    "data": {
        "dir": "data/mnist",
        "eval_subset": 0,  # 0 = full test split
    },
    "run": {
        "seed": 42,
        "out_dir": ".",
        "jobs": 1,
    },
}

_STRING_KEYS = {
    ("neuron", "routing"),
    ("snn", "encoder"),
    ("training", "bias_mode"),
    ("spectrum", "p_values"),
    ("data", "dir"),
    ("run", "out_dir"),
}
_INT_KEYS = {
    ("thermal", "segments"),
    ("snn", "time_steps"),
    ("snn", "chunk"),
    ("training", "hidden"),
    ("training", "epochs"),
    ("training", "batch_size"),
    ("training", "train_subset"),
    ("conversion", "calibration_size"),
    ("spectrum", "points"),
    ("sweep", "a_points"),
    ("sweep", "power_points"),
    ("device", "resonance_order"),
    ("data", "eval_subset"),
    ("run", "seed"),
    ("run", "jobs"),
}


class RunConfig:
    """Resolved configuration with typed section access."""

    def __init__(self, sections=None):
        self.sections = copy.deepcopy(DEFAULTS)
        if sections:
            for name, values in sections.items():
                self._merge(name, values)

    def _merge(self, section, values):
        if section not in self.sections:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in values.items():
            if key not in self.sections[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            self.sections[section][key] = self._coerce(section, key, value)

    @staticmethod
    def _coerce(section, key, value):
        if isinstance(value, str):
            if (section, key) in _STRING_KEYS:
                return value
            try:
                if (section, key) in _INT_KEYS:
                    return int(value)
                return float(value)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
        return value

    def get(self, section, key):
        return self.sections[section][key]

    def override(self, section, key, value):
        self._merge(section, {key: value})

    # -- loading / saving ----------------------------------------------------

    @classmethod
    def load(cls, path) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            read = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not read:
            raise ConfigError(f"config file not found: {path}")
        sections = {name: dict(parser[name]) for name in parser.sections()}
        return cls(sections)

    def save(self, path):
        lines = ["# resolved ringsnn configuration\n"]
        for name in sorted(self.sections):
            lines.append(f"[{name}]\n")
            for key in sorted(self.sections[name]):
                value = self.sections[name][key]
                rendered = repr(value) if isinstance(value, float) else str(value)
                lines.append(f"{key} = {rendered}\n")
            lines.append("\n")
        Path(path).write_text("".join(lines))

    # -- object builders -----------------------------------------------------

    def material_table(self) -> MaterialTable:
        m = self.sections["materials"]
        from .materials import OpticalConstants

        return MaterialTable(
            n_si=m["n_si"],
            n_sio2=m["n_sio2"],
            gst_crystalline=OpticalConstants(m["gst_crystalline_n"], m["gst_crystalline_kappa"]),
            gst_amorphous=OpticalConstants(m["gst_amorphous_n"], m["gst_amorphous_kappa"]),
            specific_heat_crystalline=m["specific_heat_crystalline"],
            specific_heat_amorphous=m["specific_heat_amorphous"],
            thermal_conductivity_crystalline=m["thermal_conductivity_crystalline"],
            thermal_conductivity_amorphous=m["thermal_conductivity_amorphous"],
            density_crystalline=m["density_crystalline"],
            density_amorphous=m["density_amorphous"],
            melting_temperature=m["melting_temperature"],
        )

    def ring_geometry(self) -> RingGeometry:
        d = self.sections["device"]
        return RingGeometry(
            radius=d["radius_m"],
            gst_length=d["gst_length_m"],
            gst_width=d["gst_width_m"],
            gst_thickness=d["gst_thickness_m"],
            wg_width=d["wg_width_m"],
            wg_height=d["wg_height_m"],
        )

    def effective_indices(self) -> EffectiveIndices:
        d = self.sections["device"]
        return EffectiveIndices.calibrated(
            lambda_read=d["lambda_read_m"],
            radius=d["radius_m"],
            gst_length=d["gst_length_m"],
            order=d["resonance_order"],
            loss_db_crystalline=d["loss_db_crystalline"],
            loss_db_amorphous=d["loss_db_amorphous"],
            dn_crystalline=d["dn_crystalline"],
            dn_amorphous=d["dn_amorphous"],
            table=self.material_table(),
        )

    def ring_device(self) -> RingDevice:
        d = self.sections["device"]
        return RingDevice(
            geometry=self.ring_geometry(),
            couplers=CouplerPair(d["coupler_t1"], d["coupler_t2"]),
            indices=self.effective_indices(),
            lambda_read=d["lambda_read_m"],
        )

    def thermal_model(self) -> ThermalModel:
        t = self.sections["thermal"]
        d = self.sections["device"]
        return ThermalModel.calibrated(
            segments=t["segments"],
            gst_length=d["gst_length_m"],
            gst_width=d["gst_width_m"],
            gst_thickness=d["gst_thickness_m"],
            melt_onset_w=t["melt_onset_w"],
            calibration_power_w=t["calibration_power_w"],
            calibration_melt_fraction=t["calibration_melt_fraction"],
            loss_ratio=d["loss_db_amorphous"] / d["loss_db_crystalline"],
            pulse_duration=t["pulse_duration_s"],
            table=self.material_table(),
        )
