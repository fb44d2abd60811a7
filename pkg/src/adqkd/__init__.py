"""adqkd: secure key rates of QKD protocols over amplitude-damped channels.

Submodules:
    qmat        dense density-matrix core (tensor, channels, partial trace,
                measurement, post-selection) for 1-3 qubit registers
    noise       AD/GAD Kraus channels, imperfect CNOT, readout POVMs,
                delay -> damping-probability mapping
    protocols   BB84 / B92 / BBM92 error rates and secure key fractions,
                closed form and density-matrix oracle
    dualrail    dual-rail encoded BB84 with ancilla-based or optimal
                post-selection, single-fault CNOT analysis
    montecarlo  seeded shot-level simulation against hardware profiles
    sampling    numba/numpy sampling kernels (bit-identical backends)
    cli         the ``adqkd`` command-line experiment runner
"""

from .noise import AdParams, DampingSchedule, GadParams, NoisyCnotParams, ReadoutParams
from .protocols import ErrorRates, KeyRateReport, ProtocolConfig
from .qmat import DensityMatrix, KrausChannel, MeasurementSet, PureState

__version__ = "0.1.0"

__all__ = [
    "AdParams",
    "DampingSchedule",
    "DensityMatrix",
    "ErrorRates",
    "GadParams",
    "KeyRateReport",
    "KrausChannel",
    "MeasurementSet",
    "NoisyCnotParams",
    "ProtocolConfig",
    "PureState",
    "ReadoutParams",
    "__version__",
]
