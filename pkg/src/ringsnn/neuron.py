"""Bipolar photonic integrate-and-fire neuron.

Two GST ring resonators integrate in opposite directions: write pulses
proportional to the positive weighted sum amorphize the "positive" ring
(raising its DROP transmission) and pulses proportional to the negative
weighted sum amorphize the "negative" ring (lowering its THROUGH
transmission).  An interferometer tuned by a constant phase offset sums
the two ports into the membrane potential

    V = T_drop(pos) + T_through(neg) + phi,     phi: V(fresh) = 0.

When V crosses the firing threshold the firing-unit GST (a straight
waveguide patch) is amorphized, a spike is emitted, and a RESET pulse
returns all three GST elements to crystalline.  There is no leak and no
refractory period.

Energy/latency bookkeeping uses the per-neuron per-time-step figures:
4 pJ per write, 1 pJ per read, 1.5 ns write cycle, 0.5 ns read cycle.
"""

import math
from dataclasses import dataclass, field, replace

from .materials import GstState
from .phase_change import DEFAULT_THERMAL, ThermalModel, WritePulse, apply_write_pulse
from .photonics import RingDevice, straight_waveguide_transmission

__all__ = [
    "EnergyLedger",
    "PhotonicNeuron",
    "NeuronStepResult",
    "IdealIFNeuron",
    "encode_input",
    "membrane_potential",
    "step",
    "firing_unit_transmission",
    "energy_report",
]

POWER_WINDOW_W = (12e-3, 26e-3)
SPIKE_DETECT_THRESHOLD = 0.7

WRITE_ENERGY_PJ = 4.0
READ_ENERGY_PJ = 1.0
WRITE_CYCLE_NS = 1.5
READ_CYCLE_NS = 0.5


@dataclass
class EnergyLedger:
    """Event counters; totals are exact integer multiples of the
    per-event constants."""

    write_events: int = 0
    read_events: int = 0
    reset_events: int = 0
    write_energy_pj: float = WRITE_ENERGY_PJ
    read_energy_pj: float = READ_ENERGY_PJ
    write_cycle_ns: float = WRITE_CYCLE_NS
    read_cycle_ns: float = READ_CYCLE_NS

    def record_step(self, spiked: bool = False, count: int = 1):
        self.write_events += count
        self.read_events += count
        if spiked:
            self.reset_events += 1

    @property
    def total_energy_pj(self) -> float:
        return (
            self.write_events * self.write_energy_pj
            + self.read_events * self.read_energy_pj
        )

    @property
    def total_time_ns(self) -> float:
        return (
            self.write_events * self.write_cycle_ns
            + self.read_events * self.read_cycle_ns
        )


def energy_report(ledger: EnergyLedger, neuron_count: int, time_steps: int) -> dict:
    """Totals for a population over a run; one write + one read cycle per
    neuron per time-step."""
    events = neuron_count * time_steps
    return {
        "write_pj": ledger.write_energy_pj * events,
        "read_pj": ledger.read_energy_pj * events,
        "total_pj": (ledger.write_energy_pj + ledger.read_energy_pj) * events,
        "step_ns": ledger.write_cycle_ns + ledger.read_cycle_ns,
        "total_ns": (ledger.write_cycle_ns + ledger.read_cycle_ns) * time_steps,
    }


def encode_input(weighted_sum, window=POWER_WINDOW_W):
    """Map a weighted sum to write-pulse routing.

    A scalar drive routes its magnitude to the positive (O > 0) or
    negative (O < 0) ring; a pair (o_plus, o_minus) routes both rails in
    the same write cycle.  Magnitudes clip to [0, 1] and map affinely
    onto the power window; zero drive sends no pulse.

    Returns (pulses, clipped) where pulses is a list of
    ("pos"|"neg", WritePulse).
    """
    p_min, p_max = window
    if isinstance(weighted_sum, tuple):
        o_plus, o_minus = weighted_sum
        if o_plus < 0 or o_minus < 0:
            raise ValueError("rail drives must be non-negative")
        rails = [("pos", o_plus), ("neg", o_minus)]
    else:
        o = float(weighted_sum)
        rails = [("pos", o)] if o >= 0 else [("neg", -o)]
    pulses = []
    clipped = False
    for tag, mag in rails:
        if mag > 1.0:
            mag = 1.0
            clipped = True
        if mag > 0.0:
            pulses.append((tag, WritePulse(p_min + mag * (p_max - p_min))))
    return pulses, clipped


@dataclass(frozen=True)
class PhotonicNeuron:
    """Value-semantic neuron state; step() returns a new neuron."""

    device: RingDevice = field(default_factory=RingDevice)
    thermal: ThermalModel = field(default_factory=lambda: DEFAULT_THERMAL)
    pos_p: float = 1.0  # crystallization degree of the positive ring
    neg_p: float = 1.0
    firing_p: float = 1.0
    phase_offset: float = 0.0
    v_threshold: float = math.inf
    threshold_fraction: float = 1.0
    power_window: tuple = POWER_WINDOW_W
    routing: str = "net"  # "net" routes the sign of O+ - O-; "both" drives both rails
    amp_gain: float = 1.0

    @classmethod
    def fresh(
        cls,
        device: RingDevice = None,
        thermal: ThermalModel = None,
        threshold_fraction: float = None,
        power_window=POWER_WINDOW_W,
        routing: str = "net",
        amp_gain: float = 1.0,
    ) -> "PhotonicNeuron":
        """Fully crystalline neuron with phi tuned so V(fresh) = 0 and the
        threshold set to the V reached at full amorphization of the
        positive ring, scaled by threshold_fraction (package calibration
        default when omitted)."""
        from . import snn_defaults

        device = RingDevice() if device is None else device
        thermal = DEFAULT_THERMAL if thermal is None else thermal
        if threshold_fraction is None:
            threshold_fraction = snn_defaults.THRESHOLD_FRACTION
        if routing not in ("net", "both"):
            raise ValueError("routing must be 'net' or 'both'")
        tt_fresh, td_fresh = device.through_drop(1.0)
        _, td_full = device.through_drop(0.0)
        phi = -(float(td_fresh) + float(tt_fresh))
        # evaluate the full-swing potential through the same float path as
        # membrane_potential so a threshold fraction of exactly 1.0 still
        # fires at full amorphization
        v_full = float(td_full) + float(tt_fresh) + phi
        return cls(
            device=device,
            thermal=thermal,
            phase_offset=phi,
            v_threshold=threshold_fraction * v_full,
            threshold_fraction=threshold_fraction,
            power_window=power_window,
            routing=routing,
            amp_gain=amp_gain,
        )

    @property
    def v_rest(self) -> float:
        return 0.0

    @property
    def pos_state(self) -> GstState:
        return GstState(self.pos_p)

    @property
    def neg_state(self) -> GstState:
        return GstState(self.neg_p)

    @property
    def firing_state(self) -> GstState:
        return GstState(self.firing_p)


def membrane_potential(neuron: PhotonicNeuron) -> float:
    """Interferometric sum of the positive ring's DROP port and the
    negative ring's THROUGH port, offset so a fresh neuron reads 0."""
    _, td_pos = neuron.device.through_drop(neuron.pos_p)
    tt_neg, _ = neuron.device.through_drop(neuron.neg_p)
    return float(td_pos) + float(tt_neg) + neuron.phase_offset


@dataclass(frozen=True)
class NeuronStepResult:
    membrane_potential: float
    spiked: bool
    neuron: PhotonicNeuron


def step(neuron: PhotonicNeuron, weighted_sum, ledger: EnergyLedger = None) -> NeuronStepResult:
    """One write cycle followed by one read cycle.

    `weighted_sum` is a scalar net drive or an (o_plus, o_minus) pair;
    pairs are netted first under "net" routing.  On a spike the firing
    GST amorphizes, the spike is emitted, and all three GST elements
    reset to crystalline.
    """
    drive = weighted_sum
    if neuron.routing == "net" and isinstance(drive, tuple):
        drive = drive[0] - drive[1]
    pulses, _ = encode_input(drive, neuron.power_window)

    pos_p, neg_p = neuron.pos_p, neuron.neg_p
    for tag, pulse in pulses:
        if tag == "pos":
            pos_p = apply_write_pulse(neuron.thermal, GstState(pos_p), pulse).p
        else:
            neg_p = apply_write_pulse(neuron.thermal, GstState(neg_p), pulse).p

    written = replace(neuron, pos_p=pos_p, neg_p=neg_p)
    v = membrane_potential(written)
    spiked = v >= written.v_threshold
    if spiked:
        # firing GST amorphizes to pass the spike, then RESET restores all
        # three elements; the returned neuron is back at its initial state
        out = replace(written, pos_p=1.0, neg_p=1.0, firing_p=1.0)
    else:
        out = written
    if ledger is not None:
        ledger.record_step(spiked=spiked)
    return NeuronStepResult(membrane_potential=v, spiked=spiked, neuron=out)


def firing_unit_transmission(neuron: PhotonicNeuron, lam=None) -> float:
    """Power transmission of the firing-unit straight waveguide; the spike
    pulse passes only when its GST is amorphous."""
    lam = neuron.device.lambda_read if lam is None else lam
    return float(
        straight_waveguide_transmission(
            neuron.device.indices,
            neuron.firing_p,
            neuron.device.geometry.gst_length,
            lam,
        )
    )


@dataclass
class IdealIFNeuron:
    """Pure accumulator with the same threshold/reset contract: V += O,
    spike and reset to 0 at V >= threshold, no leak."""

    threshold: float = 1.0
    v: float = 0.0

    def step(self, weighted_sum) -> bool:
        if isinstance(weighted_sum, tuple):
            weighted_sum = weighted_sum[0] - weighted_sum[1]
        self.v += weighted_sum
        if self.v >= self.threshold:
            self.v = 0.0
            return True
        return False
