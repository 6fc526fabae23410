"""Spiking-network engine: bipolar weights, rate coding, layered inference.

A signed weight matrix W splits into two non-negative dot-product
engines, W = W+ - W-, with disjoint support:

    w-_ij = |w_ij|, w+_ij = 0   when w_ij < 0
    w+_ij =  w_ij,  w-_ij = 0   when w_ij > 0

Each time step the engines return O+_j = sum_i I_i w+_ij and
O-_j = sum_i I_i w-_ij, which drive the positive and negative rings of
each neuron.  Input images are rate coded: pixel i spikes per step with
probability intensity/255.  Layers are swept synchronously and the
predicted class is the output neuron with the highest spike count
(lowest index on ties).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import neuron as neuron_mod
from .neuron import EnergyLedger, energy_report
from .phase_change import DEFAULT_THERMAL, AmorphizationMap, ThermalModel, melt_update
from .photonics import RingDevice

__all__ = [
    "BipolarLayer",
    "SpikeRaster",
    "SnnNetwork",
    "DimensionMismatchError",
    "decompose_weights",
    "dot_product_pair",
    "rate_encode",
    "periodic_encode",
    "infer",
    "evaluate",
    "IdealPopulation",
    "DevicePopulation",
]


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class BipolarLayer:
    """Non-negative weight pair implementing one dot-product-engine pair."""

    w_plus: np.ndarray
    w_minus: np.ndarray

    def __post_init__(self):
        if self.w_plus.shape != self.w_minus.shape:
            raise DimensionMismatchError("W+ and W- shapes differ")
        if np.any(self.w_plus < 0) or np.any(self.w_minus < 0):
            raise ValueError("bipolar components must be non-negative")
        if np.any((self.w_plus != 0) & (self.w_minus != 0)):
            raise ValueError("W+ and W- must have disjoint support")

    @property
    def dense(self) -> np.ndarray:
        return self.w_plus - self.w_minus

    @property
    def shape(self):
        return self.w_plus.shape


def decompose_weights(weights) -> BipolarLayer:
    """Split a signed N x M matrix into the (W+, W-) pair."""
    W = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(W)):
        raise ValueError("weights contain non-finite entries")
    return BipolarLayer(w_plus=np.where(W > 0, W, 0.0), w_minus=np.where(W < 0, -W, 0.0))


def dot_product_pair(layer: BipolarLayer, spikes):
    """(O+, O-) for a binary spike vector (or batch of vectors)."""
    s = np.asarray(spikes, dtype=np.float64)
    if s.shape[-1] != layer.shape[0]:
        raise DimensionMismatchError(
            f"spike vector of length {s.shape[-1]} against {layer.shape[0]} inputs"
        )
    return s @ layer.w_plus, s @ layer.w_minus


@dataclass(frozen=True)
class SpikeRaster:
    """Per-time-step binary spike activity of one layer."""

    spikes: np.ndarray  # T x N, values 0/1
    time_steps: int
    rng_seed: object = None

    def __post_init__(self):
        if self.spikes.shape[0] != self.time_steps:
            raise ValueError("raster row count must equal time_steps")
        if not np.isin(self.spikes, (0, 1)).all():
            raise ValueError("raster entries must be 0 or 1")


def _flatten_intensities(image):
    img = np.asarray(image)
    if img.dtype.kind == "f":
        if img.min() < 0 or img.max() > 1.0:
            raise ValueError("float images must lie in [0, 1]")
        return img.reshape(-1)
    return img.reshape(-1).astype(np.float64) / 255.0


def rate_encode(image, time_steps: int, seed) -> SpikeRaster:
    """Bernoulli rate coding: pixel i spikes at each step with probability
    intensity_i/255, drawn from a seeded generator."""
    if time_steps < 1:
        raise ValueError("time_steps must be >= 1")
    rates = _flatten_intensities(image)
    rng = np.random.default_rng(seed)
    draws = rng.random((time_steps, rates.size))
    return SpikeRaster(
        spikes=(draws < rates).astype(np.float64), time_steps=time_steps, rng_seed=seed
    )


def periodic_encode(image, time_steps: int, seed=None) -> SpikeRaster:
    """Deterministic evenly-spaced encoder with the same expected rate;
    used for reproducibility studies."""
    if time_steps < 1:
        raise ValueError("time_steps must be >= 1")
    rates = _flatten_intensities(image)
    t = np.arange(1, time_steps + 1)[:, None]
    spikes = np.floor(t * rates) - np.floor((t - 1) * rates)
    return SpikeRaster(spikes=(spikes > 0).astype(np.float64),
                       time_steps=time_steps, rng_seed=seed)


# ---------------------------------------------------------------------------
# neuron populations (vectorized over batch x neurons)
# ---------------------------------------------------------------------------


class IdealPopulation:
    """Batch of pure integrate-and-fire accumulators."""

    def __init__(self, batch: int, size: int, threshold: float):
        self.threshold = threshold
        self.v = np.zeros((batch, size))

    def step(self, o_plus, o_minus):
        self.v += o_plus - o_minus
        spiked = self.v >= self.threshold
        self.v[spiked] = 0.0
        return spiked.astype(np.float64)


class DevicePopulation:
    """Batch of photonic neurons with vectorized GST state updates.

    Mirrors neuron.step exactly: write cycle (melt update on the driven
    ring), read cycle (membrane potential from the transmission curves),
    threshold, and reset on spike.
    """

    def __init__(
        self,
        batch: int,
        size: int,
        device: RingDevice,
        thermal: ThermalModel,
        threshold_fraction: float = None,
        power_window=neuron_mod.POWER_WINDOW_W,
        routing: str = "net",
        drive_scale: float = 1.0,
        state_table: AmorphizationMap = None,
    ):
        from . import snn_defaults

        if threshold_fraction is None:
            threshold_fraction = snn_defaults.THRESHOLD_FRACTION
        if routing not in ("net", "both"):
            raise ValueError("routing must be 'net' or 'both'")
        self.device = device
        self.thermal = thermal
        self.power_window = power_window
        self.routing = routing
        self.drive_scale = drive_scale
        self.state_table = state_table
        tt_fresh, td_fresh = device.through_drop(1.0)
        _, td_full = device.through_drop(0.0)
        self.phase_offset = -(float(td_fresh) + float(tt_fresh))
        # same float path as the step() read so fraction 1.0 stays reachable
        v_full = float(td_full) + float(tt_fresh) + self.phase_offset
        self.v_threshold = threshold_fraction * v_full
        self.a_pos = np.zeros((batch, size))  # amorphization degrees
        self.a_neg = np.zeros((batch, size))
        self.clip_events = 0
        self.drive_events = 0

    def _write(self, a, magnitude):
        p_min, p_max = self.power_window
        power = np.where(magnitude > 0.0, p_min + magnitude * (p_max - p_min), 0.0)
        if self.state_table is not None:
            updated = self.state_table(a, power)
            return np.where(magnitude > 0.0, np.maximum(a, updated), a)
        return melt_update(self.thermal, a, power)

    def step(self, o_plus, o_minus):
        o_plus = np.asarray(o_plus, dtype=np.float64) * self.drive_scale
        o_minus = np.asarray(o_minus, dtype=np.float64) * self.drive_scale
        if self.routing == "net":
            net = o_plus - o_minus
            pos_mag = np.maximum(net, 0.0)
            neg_mag = np.maximum(-net, 0.0)
        else:
            pos_mag, neg_mag = o_plus, o_minus
        self.clip_events += int(np.count_nonzero(pos_mag > 1.0))
        self.clip_events += int(np.count_nonzero(neg_mag > 1.0))
        self.drive_events += pos_mag.size + neg_mag.size
        pos_mag = np.minimum(pos_mag, 1.0)
        neg_mag = np.minimum(neg_mag, 1.0)

        self.a_pos = self._write(self.a_pos, pos_mag)
        self.a_neg = self._write(self.a_neg, neg_mag)

        _, td_pos = self.device.through_drop(1.0 - self.a_pos)
        tt_neg, _ = self.device.through_drop(1.0 - self.a_neg)
        v = td_pos + tt_neg + self.phase_offset
        spiked = v >= self.v_threshold
        self.a_pos[spiked] = 0.0
        self.a_neg[spiked] = 0.0
        return spiked.astype(np.float64)


# ---------------------------------------------------------------------------
# network
# ---------------------------------------------------------------------------


@dataclass
class SnnNetwork:
    """Feed-forward spiking network: one BipolarLayer + neuron population
    per layer, plus the conversion metadata needed to reproduce a run."""

    weights: list  # list of N x M arrays, input side first
    thresholds: list  # per-layer ideal thresholds
    neuron_kind: str = "ideal"  # "ideal" or "device"
    time_steps: int = 25
    drive_scales: list = None  # per-layer device drive scaling
    threshold_fraction: float = None  # None = package calibration default
    routing: str = "net"
    power_window: tuple = neuron_mod.POWER_WINDOW_W
    metadata: dict = field(default_factory=dict)
    device: RingDevice = None
    thermal: ThermalModel = None
    state_table: AmorphizationMap = None

    def __post_init__(self):
        from . import snn_defaults

        if self.threshold_fraction is None:
            self.threshold_fraction = snn_defaults.THRESHOLD_FRACTION
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        for a, b in zip(self.weights[:-1], self.weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise DimensionMismatchError(
                    f"layer output {a.shape[1]} feeds layer input {b.shape[0]}"
                )
        if len(self.thresholds) != len(self.weights):
            raise DimensionMismatchError("one threshold per layer required")
        if self.neuron_kind not in ("ideal", "device"):
            raise ValueError("neuron_kind must be 'ideal' or 'device'")
        if self.drive_scales is None:
            self.drive_scales = [1.0] * len(self.weights)
        self.layers = [decompose_weights(w) for w in self.weights]
        if self.neuron_kind == "device":
            if self.device is None:
                self.device = RingDevice()
            if self.thermal is None:
                self.thermal = DEFAULT_THERMAL

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def neuron_count(self) -> int:
        return int(sum(w.shape[1] for w in self.weights))

    def populations(self, batch: int):
        pops = []
        for w, thr, scale in zip(self.weights, self.thresholds, self.drive_scales):
            if self.neuron_kind == "ideal":
                pops.append(IdealPopulation(batch, w.shape[1], thr))
            else:
                pops.append(
                    DevicePopulation(
                        batch,
                        w.shape[1],
                        device=self.device,
                        thermal=self.thermal,
                        threshold_fraction=self.threshold_fraction,
                        power_window=self.power_window,
                        routing=self.routing,
                        drive_scale=scale,
                        state_table=self.state_table,
                    )
                )
        return pops

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "format": "ringsnn-network-1",
            "neuron_kind": self.neuron_kind,
            "time_steps": self.time_steps,
            "topology": [self.input_size] + [w.shape[1] for w in self.weights],
            "thresholds": [float(t) for t in self.thresholds],
            "drive_scales": [float(s) for s in self.drive_scales],
            "threshold_fraction": self.threshold_fraction,
            "routing": self.routing,
            "power_window": list(self.power_window),
            "metadata": self.metadata,
            "weights": [w.tolist() for w in self.weights],
        }
        return json.dumps(doc, sort_keys=True)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "SnnNetwork":
        doc = json.loads(text)
        if doc.get("format") != "ringsnn-network-1":
            raise ValueError("not a ringsnn network file")
        return cls(
            weights=[np.array(w, dtype=np.float64) for w in doc["weights"]],
            thresholds=doc["thresholds"],
            neuron_kind=doc["neuron_kind"],
            time_steps=doc["time_steps"],
            drive_scales=doc.get("drive_scales"),
            threshold_fraction=doc.get("threshold_fraction", 1.0),
            routing=doc.get("routing", "net"),
            power_window=tuple(doc.get("power_window", neuron_mod.POWER_WINDOW_W)),
            metadata=doc.get("metadata", {}),
        )

    @classmethod
    def load(cls, path) -> "SnnNetwork":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class InferenceResult:
    spike_counts: np.ndarray
    predicted: int
    clip_events: int = 0
    drive_events: int = 0


def infer(network: SnnNetwork, raster: SpikeRaster) -> InferenceResult:
    """Run one rate-coded image through the network.

    Spikes propagate through all layers within each time step; output
    spikes accumulate over the raster and the arg-max class (lowest
    index on ties) is returned.
    """
    if raster.spikes.shape[1] != network.input_size:
        raise DimensionMismatchError(
            f"raster width {raster.spikes.shape[1]} != input size {network.input_size}"
        )
    counts, _, clip_events, drive_events = _run_batch(
        network, raster.spikes[None, :, :]
    )
    counts = counts[0]
    return InferenceResult(
        spike_counts=counts,
        predicted=int(np.argmax(counts)),
        clip_events=clip_events,
        drive_events=drive_events,
    )


def _run_batch(network: SnnNetwork, rasters):
    """rasters: B x T x N binary array; returns (counts B x M_out, ledger,
    clip events, drive events)."""
    batch, time_steps, _ = rasters.shape
    pops = network.populations(batch)
    counts = np.zeros((batch, network.output_size))
    ledger = EnergyLedger()
    for t in range(time_steps):
        activity = rasters[:, t, :]
        for layer, pop in zip(network.layers, pops):
            o_plus, o_minus = dot_product_pair(layer, activity)
            activity = pop.step(o_plus, o_minus)
        counts += activity
        ledger.record_step(count=batch * network.neuron_count)
    clip_events = sum(getattr(p, "clip_events", 0) for p in pops)
    drive_events = sum(getattr(p, "drive_events", 0) for p in pops)
    return counts, ledger, clip_events, drive_events


@dataclass
class EvaluationResult:
    accuracy: float
    predictions: np.ndarray
    confusion: np.ndarray
    energy: dict
    clip_rate: float
    spike_counts: np.ndarray


def _encode_batch(images, time_steps, seed, start_index, encoder):
    rasters = []
    for offset, image in enumerate(images):
        if encoder == "bernoulli":
            raster = rate_encode(image, time_steps, seed=[seed, start_index + offset])
        else:
            raster = periodic_encode(image, time_steps)
        rasters.append(raster.spikes)
    return np.stack(rasters)


def evaluate(
    network: SnnNetwork,
    images,
    labels,
    time_steps: int = None,
    seed: int = 42,
    encoder: str = "bernoulli",
    chunk: int = 250,
    jobs: int = 1,
) -> EvaluationResult:
    """Classify a labelled image set; returns accuracy, confusion matrix,
    aggregated energy totals and the rail clip rate.

    Each image draws its raster from a generator seeded by (seed, index),
    so results are independent of chunking and worker count.
    """
    labels = np.asarray(labels)
    n = len(labels)
    time_steps = network.time_steps if time_steps is None else time_steps
    chunks = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    args = [
        (network, images[a:b], time_steps, seed, a, encoder) for a, b in chunks
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_evaluate_chunk, args))
    else:
        parts = [_evaluate_chunk(arg) for arg in args]

    counts = np.concatenate([p[0] for p in parts])
    clip_events = sum(p[1] for p in parts)
    drive_events = sum(p[2] for p in parts)
    predictions = np.argmax(counts, axis=1)
    accuracy = float(np.mean(predictions == labels)) if n else 0.0
    n_classes = network.output_size
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for truth, pred in zip(labels, predictions):
        confusion[truth, pred] += 1
    ledger = EnergyLedger()
    energy = energy_report(ledger, network.neuron_count * n, time_steps)
    clip_rate = clip_events / drive_events if drive_events else 0.0
    return EvaluationResult(
        accuracy=accuracy,
        predictions=predictions,
        confusion=confusion,
        energy=energy,
        clip_rate=clip_rate,
        spike_counts=counts,
    )


def _evaluate_chunk(arg):
    network, images, time_steps, seed, start, encoder = arg
    rasters = _encode_batch(images, time_steps, seed, start, encoder)
    counts, _, clip_events, drive_events = _run_batch(network, rasters)
    return counts, clip_events, drive_events
