"""Noise channels and device-noise parameterizations.

Covers single-qubit amplitude damping (AD) and generalized amplitude
damping (GAD), their two-rail tensor-product versions, the depolarizing
imperfect-CNOT model, readout-error POVMs, and the mapping from idle
delay to a damping probability via T1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .qmat import DensityMatrix, KrausChannel, MeasurementSet


def _check_prob(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} = {value!r} outside [0, 1]")
    return value


@dataclass(frozen=True)
class AdParams:
    """Amplitude damping: |1> decays to |0> with probability gamma."""

    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_prob(self.gamma, "gamma"))


@dataclass(frozen=True)
class GadParams:
    """Generalized amplitude damping with damping gamma and thermal mixing p.

    p = 1 reduces to plain amplitude damping; p < 1 also allows the upward
    |0> -> |1> transition. (gamma, p) are treated as opaque knobs, not
    mapped to a bath temperature.
    """

    gamma: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_prob(self.gamma, "gamma"))
        object.__setattr__(self, "p", _check_prob(self.p, "p"))


@dataclass(frozen=True)
class NoisyCnotParams:
    """CNOT that fails with probability beta into a two-qubit depolarizing event."""

    beta: float
    control: int
    target: int

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_prob(self.beta, "beta"))
        if int(self.control) == int(self.target):
            raise ValueError("control and target must differ")
        object.__setattr__(self, "control", int(self.control))
        object.__setattr__(self, "target", int(self.target))


@dataclass(frozen=True)
class ReadoutParams:
    """Classical readout flip probability delta for a measured qubit."""

    delta: float

    def __post_init__(self):
        object.__setattr__(self, "delta", _check_prob(self.delta, "delta"))


@dataclass(frozen=True)
class DampingSchedule:
    """Idle time expressed as a train of identity gates against a T1 clock.

    Units are explicit: T1 in microseconds, gate duration in nanoseconds.
    """

    t1_us: float
    gate_time_ns: float
    n_gates: int

    def __post_init__(self):
        if float(self.t1_us) <= 0.0:
            raise ValueError("t1_us must be positive")
        if float(self.gate_time_ns) < 0.0:
            raise ValueError("gate_time_ns must be nonnegative")
        if int(self.n_gates) < 0:
            raise ValueError("n_gates must be nonnegative")
        object.__setattr__(self, "t1_us", float(self.t1_us))
        object.__setattr__(self, "gate_time_ns", float(self.gate_time_ns))
        object.__setattr__(self, "n_gates", int(self.n_gates))


def _ad_operators(gamma: float):
    a0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    a1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return a0, a1


def ad_channel(params: AdParams) -> KrausChannel:
    """Amplitude-damping channel {A0 = diag(1, sqrt(1-gamma)), A1 = sqrt(gamma)|0><1|}."""
    return KrausChannel(_ad_operators(params.gamma), acts_on=(0,))


def _gad_operators(gamma: float, p: float):
    a0, a1 = _ad_operators(gamma)
    sp = math.sqrt(p)
    sq = math.sqrt(1.0 - p)
    b0 = np.array([[math.sqrt(1.0 - gamma), 0.0], [0.0, 1.0]], dtype=complex)
    b1 = np.array([[0.0, 0.0], [math.sqrt(gamma), 0.0]], dtype=complex)
    return sp * a0, sp * a1, sq * b0, sq * b1


def gad_channel(params: GadParams) -> KrausChannel:
    """Generalized amplitude damping; at p=1 the last two operators vanish
    and the first two equal the plain AD pair."""
    return KrausChannel(_gad_operators(params.gamma, params.p), acts_on=(0,))


def rail_product(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Two independent single-qubit channels as one two-qubit product channel."""
    if first.dim != 2 or second.dim != 2:
        raise ValueError("rail_product expects single-qubit channels")
    ops = [np.kron(a, b) for b in second.operators for a in first.operators]
    return KrausChannel(ops, acts_on=(0, 1))


def dual_rail_ad(params: AdParams) -> KrausChannel:
    """Independent AD on both rails: the four products {A_i (x) A_j}.

    Ordered so operator 1 damps the first rail (q0) and operator 2 the
    second (q1): M1|10> = sqrt(gamma)|00>, M2|01> = sqrt(gamma)|00>.
    """
    ch = ad_channel(params)
    return rail_product(ch, ch)


def dual_rail_gad(params: GadParams) -> KrausChannel:
    """Independent GAD on both rails: all 16 tensor products, AD-compatible order."""
    ch = gad_channel(params)
    return rail_product(ch, ch)


def noisy_cnot(rho: DensityMatrix, params: NoisyCnotParams) -> DensityMatrix:
    """Apply a CNOT that depolarizes the (control, target) pair on failure.

    Output is (1-beta) U rho U^dag + beta * (I/4 on the pair) (x) Tr_pair(rho),
    i.e. the failed branch replaces the pair's marginal with the maximally
    mixed state while keeping the spectator marginal.
    """
    n = rho.n_qubits
    c, t = params.control, params.target
    if c >= n or t >= n:
        raise ValueError(f"control/target ({c}, {t}) outside register of {n} qubits")
    u = qmat.cnot(n, c, t)
    ideal = u @ rho.matrix @ u.conj().T
    if params.beta == 0.0:
        return DensityMatrix(ideal, subnormalized=rho.subnormalized)
    if n == 2:
        depol = np.eye(4, dtype=complex) * (rho.trace() / 4.0)
    else:
        rest = [q for q in range(n) if q not in (c, t)]
        marginal = qmat.partial_trace(rho, rest).matrix
        # I/4 on (c, t) times the spectator marginal, back in register order
        depol = qmat.embed_operator(marginal, rest, n) / 4.0
    out = (1.0 - params.beta) * ideal + params.beta * depol
    return DensityMatrix(out, subnormalized=rho.subnormalized)


def readout_povm(basis: str, params: ReadoutParams) -> MeasurementSet:
    """Two-outcome POVM for a Z or X measurement with readout flip delta.

    Z: {(1-d)|0><0| + d|1><1|, (1-d)|1><1| + d|0><0|}, labels "0"/"1";
    X: the analogous pair on |+>, |->, labels "+"/"-". The effects sum to
    the identity exactly.
    """
    d = params.delta
    if basis == "Z":
        pa, pb, labels = qmat.P0, qmat.P1, ("0", "1")
    elif basis == "X":
        pa, pb, labels = qmat.P_PLUS, qmat.P_MINUS, ("+", "-")
    else:
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    e_first = (1.0 - d) * pa + d * pb
    # complement against I keeps the completeness sum exact
    e_second = np.eye(2, dtype=complex) - e_first
    return MeasurementSet((e_first, e_second), labels)


def gamma_from_delay(schedule: DampingSchedule) -> float:
    """Damping probability 1 - exp(-t/T1) accumulated over the idle gates."""
    t_us = schedule.n_gates * schedule.gate_time_ns * 1e-3
    return -math.expm1(-t_us / schedule.t1_us)


def doubled_delay_gamma(gamma: float) -> float:
    """Damping probability of a channel of twice the length: 2*gamma - gamma^2."""
    gamma = _check_prob(gamma, "gamma")
    return 2.0 * gamma - gamma * gamma
