"""Dual-rail encoded BB84: encoder, detection circuits, decoder, fault model.

The logical map is |0> -> |01>, |1> -> |10>; damping can only push a rail
toward |0>, so a damping event flips the pair's parity and becomes
detectable. Two detection layouts are implemented:

* ancilla-based: three qubits (q0, q1, ancilla q2); encoder is X(q1) then
  CNOT(q0->q1); detection is CNOT(q0->q2), CNOT(q1->q2), keep ancilla
  outcome |1>; decoder is CNOT(q0->q1) with q1 discarded; decoded qubit q0.
* optimal: two qubits; detection reuses the second rail: CNOT(q0->q1),
  keep q1 outcome |1>; q0 is the decoded qubit directly.

At most one CNOT per run is made noisy (``FaultSite``), using the
depolarizing failure model from :mod:`adqkd.noise`; in the ancilla layout
the designated post-selection gate is the CNOT from q0 onto the ancilla.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .noise import AdParams, GadParams, NoisyCnotParams, dual_rail_ad, dual_rail_gad, noisy_cnot
from .protocols import ErrorRates, KeyRateReport, secure_fraction, secure_length
from .qmat import DensityMatrix, KrausChannel, PureState

ANCILLA = "ancilla"
OPTIMAL = "optimal"
_SCHEMES = (ANCILLA, OPTIMAL)

SITE_NONE = "none"
SITE_ENCODER = "encoder"
SITE_POST_SELECTION = "post-selection"
SITE_DECODER = "decoder"
_SITES = (SITE_NONE, SITE_ENCODER, SITE_POST_SELECTION, SITE_DECODER)

MIN_PASS_PROBABILITY = 1e-14


@dataclass(frozen=True)
class FaultSite:
    """Designates the one noisy CNOT of a run (or none) and its failure rate."""

    site: str = SITE_NONE
    beta: float = 0.0

    def __post_init__(self):
        if self.site not in _SITES:
            raise ValueError(f"fault site must be one of {_SITES}")
        if not 0.0 <= float(self.beta) <= 1.0:
            raise ValueError("beta outside [0, 1]")
        if self.site == SITE_NONE and float(self.beta) != 0.0:
            raise ValueError("beta given without a fault site")
        object.__setattr__(self, "beta", float(self.beta))


NO_FAULT = FaultSite()


@dataclass(frozen=True)
class EncodedConfig:
    """Scheme + rail noise + fault model, for report provenance and the CLI."""

    noise: AdParams | GadParams
    scheme: str = ANCILLA
    fault: FaultSite = NO_FAULT

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")


@dataclass(frozen=True)
class EncodedRunResult:
    """Post-selection survival and joint error probabilities for one input.

    ``joint_error_z``/``joint_error_x`` are the probabilities that the run
    survives post-selection AND the decoded qubit's Z (X) measurement
    disagrees with an ideal measurement of the input state, using ideal
    projectors on the decoded qubit. ``conditional_state`` is the decoded
    state given survival, or None when post-selection never fires.
    """

    pass_probability: float
    conditional_state: DensityMatrix | None
    joint_error_z: float
    joint_error_x: float


def encode(bb84_state: PureState) -> DensityMatrix:
    """Dual-rail encode a single qubit: |0> -> |01>, |1> -> |10>, linearly."""
    if bb84_state.n_qubits != 1:
        raise ValueError("encode expects a single-qubit state")
    a0, a1 = bb84_state.amplitudes
    vec = np.array([0.0, a0, a1, 0.0], dtype=complex)
    return DensityMatrix(qmat.projector(vec))


def _cnot_step(rho: DensityMatrix, control: int, target: int, beta: float | None) -> DensityMatrix:
    if beta is None:
        return qmat.apply_unitary(rho, qmat.cnot(rho.n_qubits, control, target))
    return noisy_cnot(rho, NoisyCnotParams(beta, control, target))


def _rail_channel(noise) -> KrausChannel:
    if isinstance(noise, GadParams):
        return dual_rail_gad(noise)
    return dual_rail_ad(noise)


def encoded_branches(bb84_state: PureState, scheme: str, rail: KrausChannel, fault: FaultSite = NO_FAULT):
    """Decoded single-qubit branch states for both detection outcomes.

    Runs encode -> two-rail channel -> detection with the designated noisy
    CNOT -> projection of the detection qubit -> decode, and returns the
    *unnormalized* decoded states ``(kept, dropped)`` for detection
    outcomes 1 and 0; their traces are the branch probabilities. The
    ``rail`` channel must act on qubits (0, 1); asymmetric rails are
    allowed (used by the shot-level simulator).
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"scheme must be one of {_SCHEMES}")
    if scheme == OPTIMAL and fault.site == SITE_DECODER:
        raise ValueError("the optimal layout has no decoder CNOT to make faulty")
    if bb84_state.n_qubits != 1:
        raise ValueError("expected a single-qubit input state")
    if rail.acts_on != (0, 1):
        raise ValueError("rail channel must act on qubits (0, 1)")

    def beta_at(site):
        return fault.beta if fault.site == site else None

    n = 3 if scheme == ANCILLA else 2
    amps = np.zeros(2**n, dtype=complex)
    amps[:: 2 ** (n - 1)] = bb84_state.amplitudes  # |psi> on q0, |0> elsewhere
    rho = DensityMatrix(qmat.projector(amps))

    # encoder: X(q1), then CNOT(q0->q1)
    rho = qmat.apply_unitary(rho, qmat.x_gate(n, 1))
    rho = _cnot_step(rho, 0, 1, beta_at(SITE_ENCODER))

    # channel acts on both rails, never on the ancilla
    rho = qmat.apply_channel(rho, rail)

    # detection
    if scheme == ANCILLA:
        rho = _cnot_step(rho, 0, 2, beta_at(SITE_POST_SELECTION))
        rho = _cnot_step(rho, 1, 2, None)
        ps_qubit = 2
    else:
        rho = _cnot_step(rho, 0, 1, beta_at(SITE_POST_SELECTION))
        ps_qubit = 1

    branches = []
    for outcome in (qmat.P1, qmat.P0):
        proj = qmat.embed_operator(outcome, (ps_qubit,), n)
        branch = DensityMatrix(proj @ rho.matrix @ proj, subnormalized=True)
        if scheme == ANCILLA:
            branch = _cnot_step(branch, 0, 1, beta_at(SITE_DECODER))
        branches.append(qmat.partial_trace(branch, {0}))
    return branches[0], branches[1]


def run_encoded(bb84_state: PureState, scheme: str, noise, fault: FaultSite = NO_FAULT) -> EncodedRunResult:
    """Push one BB84 state through encode -> rail noise -> detect -> decode.

    GAD rail noise is supported for fault-free runs only; the single-fault
    closed forms are derived for plain damping. The optimal layout has no
    decoder CNOT, so a decoder fault is rejected there.
    """
    if not isinstance(noise, (AdParams, GadParams)):
        raise ValueError("noise must be AdParams or GadParams")
    if isinstance(noise, GadParams) and fault.site != SITE_NONE:
        raise ValueError("fault analysis is only derived for plain amplitude damping")

    decoded, _ = encoded_branches(bb84_state, scheme, _rail_channel(noise), fault)
    pass_probability = decoded.trace()
    if pass_probability < MIN_PASS_PROBABILITY:
        return EncodedRunResult(0.0, None, 0.0, 0.0)

    # joint error = survive AND disagree with an ideal measurement of the input
    a0, a1 = bb84_state.amplitudes
    ideal_z = (abs(a0) ** 2, abs(a1) ** 2)
    ideal_x = (0.5 * abs(a0 + a1) ** 2, 0.5 * abs(a0 - a1) ** 2)
    pr_z0 = float(np.real(np.trace(qmat.P0 @ decoded.matrix)))
    pr_z1 = float(np.real(np.trace(qmat.P1 @ decoded.matrix)))
    pr_xp = float(np.real(np.trace(qmat.P_PLUS @ decoded.matrix)))
    pr_xm = float(np.real(np.trace(qmat.P_MINUS @ decoded.matrix)))
    joint_z = pr_z0 * ideal_z[1] + pr_z1 * ideal_z[0]
    joint_x = pr_xp * ideal_x[1] + pr_xm * ideal_x[0]

    conditional = DensityMatrix(decoded.matrix / pass_probability)
    return EncodedRunResult(pass_probability, conditional, max(0.0, joint_z), max(0.0, joint_x))


def joint_error_rates(scheme: str, noise, fault: FaultSite = NO_FAULT):
    """(e_b_joint, e_p_joint, pass) averaged over the four BB84 inputs.

    Bit errors come from the |0>/|1> runs, phase errors from |+>/|->; the
    survival probability is input-independent and averaged for stability.
    """
    runs = {s: run_encoded(PureState.from_label(s), scheme, noise, fault) for s in "01+-"}
    e_b = 0.5 * (runs["0"].joint_error_z + runs["1"].joint_error_z)
    e_p = 0.5 * (runs["+"].joint_error_x + runs["-"].joint_error_x)
    survival = sum(r.pass_probability for r in runs.values()) / 4.0
    return e_b, e_p, survival


def table1_rates(fault: FaultSite, gamma: float):
    """Closed-form joint error probabilities for one noisy CNOT (ancilla layout).

    Returned per transmitted logical qubit, i.e. joint with surviving
    post-selection, not conditioned on it:

        encoder:        e_b = e_p = (beta/4)(1-gamma)(1+gamma)
        post-selection: e_b = e_p = beta/4
        decoder:        e_b = (beta/2)(1-gamma), e_p = beta(1-gamma)

    The decoder e_p above is the quoted closed form; the density-matrix
    route yields (beta/2)(1-gamma) instead (the failed CNOT leaves the
    decoded qubit maximally mixed, so both bases err equally). ``adqkd
    verify`` reports both values side by side.
    """
    if fault.site == SITE_NONE:
        raise ValueError("table1_rates needs a concrete fault site")
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma outside [0, 1]")
    beta = fault.beta
    if fault.site == SITE_ENCODER:
        e = (beta / 4.0) * (1.0 - gamma) * (1.0 + gamma)
        return e, e
    if fault.site == SITE_POST_SELECTION:
        return beta / 4.0, beta / 4.0
    return (beta / 2.0) * (1.0 - gamma), beta * (1.0 - gamma)


def decoder_phase_joint_oracle(beta: float, gamma: float) -> float:
    """Density-matrix value of the decoder-fault joint phase error: (beta/2)(1-gamma)."""
    return (float(beta) / 2.0) * (1.0 - float(gamma))


def gad_encoded_rates(params: GadParams) -> ErrorRates:
    """Closed-form logical rates of fault-free dual-rail BB84 under GAD.

    sift = 1 - g + 2pg^2 - 2p^2g^2 and e_b = e_p = pg^2(1-p)/sift: the
    parity check catches every single-rail event, so only the undetectable
    two-rail swap |01> <-> |10> survives as a logical error. p in {0, 1}
    kills the numerator (plain damping or pure heating are fully detected).
    """
    g, p = params.gamma, params.p
    sift = 1.0 - g + 2.0 * p * g * g - 2.0 * p * p * g * g
    joint = p * g * g * (1.0 - p)
    if sift <= MIN_PASS_PROBABILITY:
        return ErrorRates(0.0, 0.0, 0.0)
    e = min(1.0, max(0.0, joint / sift))
    return ErrorRates(e, e, min(1.0, max(0.0, sift)))


def encoded_key_rate(
    scheme: str, noise, fault: FaultSite = NO_FAULT, l_sift: int = 32768
) -> KeyRateReport:
    """Secure key report for encoded BB84: conditional rates from joint ones.

    Joint error probabilities are divided by the survival probability and
    the survival itself becomes the sifting factor of the secure fraction;
    the finite key length is computed from ``l_sift`` already-sifted bits.
    """
    cfg = EncodedConfig(noise=noise, scheme=scheme, fault=fault)
    e_b_joint, e_p_joint, survival = joint_error_rates(scheme, noise, fault)
    if survival < MIN_PASS_PROBABILITY:
        rates = ErrorRates(0.0, 0.0, 0.0)
        return KeyRateReport(rates, 0.0, int(l_sift), 0, config=cfg, starved=True)
    e_b = min(1.0, max(0.0, e_b_joint / survival))
    e_p = min(1.0, max(0.0, e_p_joint / survival))
    rates = ErrorRates(e_b, e_p, survival)
    return KeyRateReport(
        rates=rates,
        secure_fraction=secure_fraction(rates),
        l_sift=int(l_sift),
        l_sec=secure_length(int(l_sift), e_b, e_p),
        config=cfg,
    )
