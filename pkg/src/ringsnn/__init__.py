"""ringsnn: GST microring photonic spiking neuron, from device physics to
MNIST inference."""

from .ann import ConversionReport, MlpClassifier, convert
from .materials import GstState, MaterialTable, OpticalConstants
from .neuron import EnergyLedger, IdealIFNeuron, PhotonicNeuron
from .phase_change import AmorphizationMap, ThermalModel, WritePulse
from .photonics import CouplerPair, EffectiveIndices, RingDevice, RingGeometry
from .snn import BipolarLayer, SnnNetwork, SpikeRaster, evaluate, infer, rate_encode

__version__ = "0.1.0"

__all__ = [
    "MlpClassifier",
    "ConversionReport",
    "convert",
    "GstState",
    "MaterialTable",
    "OpticalConstants",
    "EnergyLedger",
    "IdealIFNeuron",
    "PhotonicNeuron",
    "AmorphizationMap",
    "ThermalModel",
    "WritePulse",
    "CouplerPair",
    "EffectiveIndices",
    "RingDevice",
    "RingGeometry",
    "BipolarLayer",
    "SnnNetwork",
    "SpikeRaster",
    "evaluate",
    "infer",
    "rate_encode",
    "__version__",
]
