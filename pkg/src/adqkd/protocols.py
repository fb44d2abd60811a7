"""Secure-key-rate engines for BB84, B92 and BBM92 under damping noise.

Every protocol configuration is available twice: as a closed-form
expression (``bb84_rates_ad`` etc.) and as a first-principles
density-matrix computation (``simulate_protocol``) that builds the input
states, pushes them through the Kraus channels and evaluates the trace
formulas. The two routes cross-check each other in the test suite and in
``adqkd verify``.

Secure key fraction follows the Shor-Preskill asymptotic rate
``sift * (1 - h(e_b) - h(e_p))`` with h the binary entropy; the basis
mismatch factor of random basis choice is deliberately *not* part of
``sift``, which only tracks post-selection/detection survival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import noise, qmat
from .noise import AdParams, GadParams, ReadoutParams
from .qmat import DensityMatrix, MeasurementSet

BB84 = "bb84"
B92 = "b92"
BBM92 = "bbm92"

CORRELATED = "correlated"
ANTI_CORRELATED = "anti-correlated"

CHARLIE_MIDPOINT = "charlie-midpoint"
ALICE_SENDS = "alice-sends"

_PROTOCOLS = (BB84, B92, BBM92)
_PAIRS = (CORRELATED, ANTI_CORRELATED)
_DISTRIBUTIONS = (CHARLIE_MIDPOINT, ALICE_SENDS)


@dataclass(frozen=True)
class ProtocolConfig:
    """One protocol/noise/readout configuration.

    For BBM92, ``noise.gamma`` is the per-arm damping of the
    charlie-midpoint layout, or the half-channel value that gets doubled
    internally for alice-sends. ``gamma_a``/``gamma_b`` (both or neither)
    select the asymmetric correlated/charlie variant instead.
    """

    protocol: str
    noise: AdParams | GadParams
    readout_delta: float = 0.0
    bbm92_pair: str | None = None
    bbm92_distribution: str | None = None
    gamma_a: float | None = None
    gamma_b: float | None = None

    def __post_init__(self):
        if self.protocol not in _PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not isinstance(self.noise, (AdParams, GadParams)):
            raise ValueError("noise must be AdParams or GadParams")
        if isinstance(self.noise, GadParams) and self.protocol != BB84:
            raise ValueError(f"GAD noise rates are only derived for BB84, not {self.protocol}")
        if not 0.0 <= float(self.readout_delta) <= 1.0:
            raise ValueError("readout_delta outside [0, 1]")
        object.__setattr__(self, "readout_delta", float(self.readout_delta))
        if self.protocol == BBM92:
            if self.bbm92_pair not in _PAIRS:
                raise ValueError(f"bbm92_pair must be one of {_PAIRS}")
            if self.bbm92_distribution not in _DISTRIBUTIONS:
                raise ValueError(f"bbm92_distribution must be one of {_DISTRIBUTIONS}")
            if self.bbm92_pair == ANTI_CORRELATED and self.bbm92_distribution == ALICE_SENDS:
                raise ValueError(
                    "anti-correlated pair with alice-sends distribution is not derived; rejected"
                )
            if (self.gamma_a is None) != (self.gamma_b is None):
                raise ValueError("gamma_a and gamma_b must be given together")
            if self.gamma_a is not None:
                if self.bbm92_pair != CORRELATED or self.bbm92_distribution != CHARLIE_MIDPOINT:
                    raise ValueError(
                        "asymmetric damping is only derived for the correlated/charlie layout"
                    )
                ga, gb = float(self.gamma_a), float(self.gamma_b)
                if not (0.0 <= ga <= 1.0 and 0.0 <= gb <= 1.0):
                    raise ValueError("gamma_a/gamma_b outside [0, 1]")
                object.__setattr__(self, "gamma_a", ga)
                object.__setattr__(self, "gamma_b", gb)
        else:
            for name in ("bbm92_pair", "bbm92_distribution", "gamma_a", "gamma_b"):
                if getattr(self, name) is not None:
                    raise ValueError(f"{name} only applies to BBM92")

    @property
    def asymmetric(self) -> bool:
        return self.gamma_a is not None


@dataclass(frozen=True)
class ErrorRates:
    """Bit error rate, phase error rate, and post-selection survival fraction."""

    e_b: float
    e_p: float
    sift: float = 1.0

    def __post_init__(self):
        for name in ("e_b", "e_p", "sift"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v!r} outside [0, 1]")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class KeyRateReport:
    """Secure key fraction and finite key length with parameter provenance."""

    rates: ErrorRates
    secure_fraction: float
    l_sift: int
    l_sec: int
    config: object = None
    starved: bool = False  # post-selection never fired / no sifted bits


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0 by continuity."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def secure_fraction(rates: ErrorRates) -> float:
    """max(0, sift * (1 - h(e_b) - h(e_p)))."""
    return max(0.0, rates.sift * (1.0 - binary_entropy(rates.e_b) - binary_entropy(rates.e_p)))


def secure_length(l_sift: int, e_b: float, e_p: float) -> int:
    """floor(l_sift * (1 - h(e_b) - h(e_p))), clamped at zero."""
    if l_sift < 0:
        raise ValueError("l_sift must be nonnegative")
    raw = l_sift * (1.0 - binary_entropy(e_b) - binary_entropy(e_p))
    return max(0, math.floor(raw))


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def _check01(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} = {value!r} outside [0, 1]")
    return value


def bb84_rates_ad(gamma: float, delta: float = 0.0) -> ErrorRates:
    """Closed-form BB84 rates under amplitude damping with readout error.

    e_b = gamma/2 + delta*(1-gamma),
    e_p = (1 + sqrt(1-gamma)*(2*delta-1)) / 2.
    """
    gamma = _check01(gamma, "gamma")
    delta = _check01(delta, "delta")
    e_b = gamma / 2.0 + delta * (1.0 - gamma)
    e_p = 0.5 * (1.0 + math.sqrt(1.0 - gamma) * (2.0 * delta - 1.0))
    return ErrorRates(_clamp01(e_b), _clamp01(e_p), 1.0)


def bb84_rates_gad(gamma: float, p: float, delta: float = 0.0) -> ErrorRates:
    """Closed-form BB84 rates under generalized amplitude damping.

    The thermal parameter p drops out of both rates (the upward and
    downward error contributions trade off exactly), so the values equal
    the plain-AD expressions for every p. The density-matrix route
    confirms this, readout error included.
    """
    _check01(p, "p")
    return bb84_rates_ad(gamma, delta)


def b92_rates(gamma: float, delta: float = 0.0) -> ErrorRates:
    """Closed-form B92 rates: e_b = delta (the |0> key state never damps),
    e_p as in BB84."""
    gamma = _check01(gamma, "gamma")
    delta = _check01(delta, "delta")
    e_p = 0.5 * (1.0 + math.sqrt(1.0 - gamma) * (2.0 * delta - 1.0))
    return ErrorRates(delta, _clamp01(e_p), 1.0)


def bbm92_rates(cfg: ProtocolConfig) -> ErrorRates:
    """Closed-form BBM92 rates for the four supported configurations.

    correlated/charlie:       e_b = g(1-g),                 e_p = g/2
    anti-correlated/charlie:  e_b = g,                      e_p = g/2
    correlated/alice-sends:   e_b = g - g^2/2 (g doubled),  e_p = g/2
    correlated/charlie, asymmetric (ga, gb):
        e_b = [ga(1-gb) + gb(1-ga)]/2, e_p = [1 - sqrt((1-ga)(1-gb))]/2

    Readout error is not part of these derivations and is rejected.
    """
    if cfg.protocol != BBM92:
        raise ValueError("bbm92_rates needs a BBM92 configuration")
    if cfg.readout_delta != 0.0:
        raise ValueError("BBM92 closed forms are derived for ideal readout only")
    if cfg.asymmetric:
        ga, gb = cfg.gamma_a, cfg.gamma_b
        e_b = 0.5 * (ga * (1.0 - gb) + gb * (1.0 - ga))
        e_p = 0.5 * (1.0 - math.sqrt((1.0 - ga) * (1.0 - gb)))
        return ErrorRates(_clamp01(e_b), _clamp01(e_p), 1.0)
    g = cfg.noise.gamma
    if cfg.bbm92_distribution == ALICE_SENDS:
        gp = noise.doubled_delay_gamma(g)
        return ErrorRates(_clamp01(gp / 2.0), _clamp01(g / 2.0), 1.0)
    if cfg.bbm92_pair == CORRELATED:
        return ErrorRates(_clamp01(g * (1.0 - g)), _clamp01(g / 2.0), 1.0)
    return ErrorRates(_clamp01(g), _clamp01(g / 2.0), 1.0)


def _single_qubit_channel(params) -> qmat.KrausChannel:
    if isinstance(params, GadParams):
        return noise.gad_channel(params)
    return noise.ad_channel(params)


def _pair_povm(basis: str, delta: float) -> MeasurementSet:
    """Product POVM measuring both halves of a pair in one basis."""
    single = noise.readout_povm(basis, ReadoutParams(delta))
    effects, labels = [], []
    for la, ea in zip(single.outcome_labels, single.effects):
        for lb, eb in zip(single.outcome_labels, single.effects):
            effects.append(np.kron(ea, eb))
            labels.append(la + lb)
    return MeasurementSet(tuple(effects), tuple(labels))


def bell_state(pair: str) -> DensityMatrix:
    """The correlated (|00>+|11>)/sqrt2 or anti-correlated (|01>-|10>)/sqrt2 pair."""
    if pair == CORRELATED:
        vec = (qmat.ket("00") + qmat.ket("11")) / math.sqrt(2.0)
    elif pair == ANTI_CORRELATED:
        vec = (qmat.ket("01") - qmat.ket("10")) / math.sqrt(2.0)
    else:
        raise ValueError(f"pair must be one of {_PAIRS}")
    return DensityMatrix(qmat.projector(vec))


def _simulate_prepare_measure(cfg: ProtocolConfig) -> ErrorRates:
    ch = _single_qubit_channel(cfg.noise)
    delta = cfg.readout_delta
    povm_z = noise.readout_povm("Z", ReadoutParams(delta))
    povm_x = noise.readout_povm("X", ReadoutParams(delta))
    out = {
        s: qmat.measure(qmat.apply_channel(qmat.PureState.from_label(s).density(), ch), povm)
        for s, povm in (("0", povm_z), ("1", povm_z), ("+", povm_x), ("-", povm_x))
    }
    if cfg.protocol == BB84:
        e_b = 0.5 * (out["0"]["1"] + out["1"]["0"])
        e_p = 0.5 * (out["+"]["-"] + out["-"]["+"])
    else:  # B92 keys on |0> and |+> only
        e_b = out["0"]["1"]
        e_p = out["+"]["-"]
    return ErrorRates(_clamp01(e_b), _clamp01(e_p), 1.0)


def _simulate_bbm92(cfg: ProtocolConfig) -> ErrorRates:
    if cfg.asymmetric:
        ga, gb = cfg.gamma_a, cfg.gamma_b
    elif cfg.bbm92_distribution == ALICE_SENDS:
        ga, gb = 0.0, noise.doubled_delay_gamma(cfg.noise.gamma)
    else:
        ga = gb = cfg.noise.gamma
    rho = bell_state(cfg.bbm92_pair)
    arm_a = qmat.KrausChannel(noise.ad_channel(AdParams(ga)).operators, acts_on=(0,))
    arm_b = qmat.KrausChannel(noise.ad_channel(AdParams(gb)).operators, acts_on=(1,))
    rho = qmat.apply_channel(qmat.apply_channel(rho, arm_a), arm_b)
    probs_z = qmat.measure(rho, _pair_povm("Z", cfg.readout_delta))
    probs_x = qmat.measure(rho, _pair_povm("X", cfg.readout_delta))
    if cfg.bbm92_pair == CORRELATED:
        e_b = probs_z["01"] + probs_z["10"]
        e_p = probs_x["+-"] + probs_x["-+"]
    else:  # anti-correlated pair errs when the two outcomes agree
        e_b = probs_z["00"] + probs_z["11"]
        e_p = probs_x["++"] + probs_x["--"]
    return ErrorRates(_clamp01(e_b), _clamp01(e_p), 1.0)


def simulate_protocol(cfg: ProtocolConfig) -> ErrorRates:
    """First-principles rates: states -> Kraus channels -> trace formulas.

    This is the in-package oracle the closed-form expressions are tested
    against.
    """
    if cfg.protocol == BBM92:
        return _simulate_bbm92(cfg)
    return _simulate_prepare_measure(cfg)


def analytic_rates(cfg: ProtocolConfig) -> ErrorRates:
    """Dispatch to the closed-form rate expression matching the config."""
    if cfg.protocol == BB84:
        if isinstance(cfg.noise, GadParams):
            return bb84_rates_gad(cfg.noise.gamma, cfg.noise.p, cfg.readout_delta)
        return bb84_rates_ad(cfg.noise.gamma, cfg.readout_delta)
    if cfg.protocol == B92:
        return b92_rates(cfg.noise.gamma, cfg.readout_delta)
    return bbm92_rates(cfg)


def key_report(cfg: ProtocolConfig, l_sift: int, rates: ErrorRates | None = None) -> KeyRateReport:
    """Combine rates with the secure-fraction formula and finite key length."""
    if l_sift < 0:
        raise ValueError("l_sift must be nonnegative")
    if rates is None:
        rates = analytic_rates(cfg)
    return KeyRateReport(
        rates=rates,
        secure_fraction=secure_fraction(rates),
        l_sift=int(l_sift),
        l_sec=secure_length(int(l_sift), rates.e_b, rates.e_p),
        config=replace(cfg),
    )
