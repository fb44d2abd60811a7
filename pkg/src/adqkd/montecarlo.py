"""Shot-level stochastic simulation of block-wise QKD transmissions.

Sampling is exact-distribution sampling: for each block the exact
post-channel outcome distribution is computed once with the density-matrix
core (with the damping probability derived from the qubit's T1 and the
idle-gate delay), then shots are drawn from it and an independent
classical readout flip is applied per measured bit. That classical flip
reproduces the noisy-readout POVM statistics exactly, because the noisy
effects are classical mixtures of the ideal projectors in the same basis.

Determinism contract: block i of a plan seeds its own counter-based
stream with ``seed XOR i``; results are bit-identical across runs and
across sampling backends.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from . import dualrail, protocols, qmat, sampling
from .dualrail import EncodedConfig
from .noise import AdParams, DampingSchedule, GadParams, ad_channel, gad_channel, gamma_from_delay, rail_product
from .protocols import BBM92, CORRELATED, ALICE_SENDS, ErrorRates, KeyRateReport, ProtocolConfig, secure_length
from .qmat import DensityMatrix, PureState

PROFILE_NAMES = ("yorktown", "bogota")

BLOCK_MODE = "block"
RANDOM_MODE = "random"


@dataclass(frozen=True)
class QubitSpec:
    """Per-qubit relaxation time (microseconds) and readout error fraction."""

    t1_us: float
    readout_error: float

    def __post_init__(self):
        if float(self.t1_us) <= 0.0:
            raise ValueError("t1_us must be positive")
        if not 0.0 <= float(self.readout_error) <= 1.0:
            raise ValueError("readout_error outside [0, 1]")


@dataclass(frozen=True)
class HardwareProfile:
    """Named device description: qubit T1/readout table plus gate timings."""

    name: str
    qubits: tuple
    gate_time_ns: float
    cnot_beta: float = 0.0
    gate_time_assumed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not self.qubits:
            raise ValueError("profile needs at least one qubit")
        if float(self.gate_time_ns) < 0.0:
            raise ValueError("gate_time_ns must be nonnegative")
        if not 0.0 <= float(self.cnot_beta) <= 1.0:
            raise ValueError("cnot_beta outside [0, 1]")

    def with_readout(self, delta: float) -> "HardwareProfile":
        """Copy of the profile with every readout error replaced by ``delta``."""
        qubits = tuple(replace(q, readout_error=float(delta)) for q in self.qubits)
        return replace(self, qubits=qubits)

    def qubit_gamma(self, qubit: int, n_gates: int) -> float:
        sched = DampingSchedule(self.qubits[qubit].t1_us, self.gate_time_ns, n_gates)
        return gamma_from_delay(sched)


def load_profile(name_or_path: str) -> HardwareProfile:
    """Load a bundled preset (``yorktown``/``bogota``) or a profile JSON path."""
    if name_or_path in PROFILE_NAMES:
        text = resources.files("adqkd").joinpath(f"data/{name_or_path}.json").read_text()
    else:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    return HardwareProfile(
        name=raw["name"],
        qubits=tuple(QubitSpec(q["t1_us"], q["readout_error"]) for q in raw["qubits"]),
        gate_time_ns=raw["gate_time_ns"],
        cnot_beta=raw.get("cnot_beta", 0.0),
        gate_time_assumed=raw.get("gate_time_assumed", False),
    )


@dataclass(frozen=True)
class ShotPlan:
    """Transmission plan: shots per block, idle delay, stream seed, mode.

    ``states_sequence`` defaults to the protocol's natural block order
    (BB84: 0, 1, +, -; B92: 0, +; BBM92: Z then X basis settings). In
    ``random`` mode the same total number of shots is drawn with the
    prepared state chosen uniformly per shot instead of block-wise.
    """

    shots_per_block: int = 8192
    n_identity_gates: int = 0
    seed: int = 0
    mode: str = BLOCK_MODE
    states_sequence: tuple | None = None

    def __post_init__(self):
        if int(self.shots_per_block) < 1:
            raise ValueError("shots_per_block must be at least 1")
        if int(self.n_identity_gates) < 0:
            raise ValueError("n_identity_gates must be nonnegative")
        if self.mode not in (BLOCK_MODE, RANDOM_MODE):
            raise ValueError(f"mode must be '{BLOCK_MODE}' or '{RANDOM_MODE}'")
        if self.states_sequence is not None:
            object.__setattr__(self, "states_sequence", tuple(self.states_sequence))


@dataclass(frozen=True)
class QberEstimate:
    """Sifted counts and empirical error rates of one campaign point."""

    sifted_bits: int
    sifted_z: int
    sifted_x: int
    errors_z: int
    errors_x: int
    qber: float
    phase_error: float


@dataclass(frozen=True)
class _BlockSpec:
    """One sampling unit: prepared states, exact distribution, bit roles."""

    basis_per_state: tuple  # "Z" or "X", per prepared state
    cum: np.ndarray  # (S, K) cumulative outcome probabilities
    bits: np.ndarray  # (S, K, M) ideal outcome bits
    flips: np.ndarray  # (M,) readout flip probability per measured bit
    ps_index: int  # post-selection bit, -1 if none
    data_flags: np.ndarray  # (M,) key-material bit mask
    xor_ref: np.ndarray  # (S,) expected XOR of data bits
    shots: int


def _cumulative(rows) -> np.ndarray:
    cum = np.cumsum(np.asarray(rows, dtype=np.float64), axis=1)
    cum[:, -1] = 1.0  # guard the inverse CDF against float shortfall
    return cum


def _single_qubit_rows(cfg, gamma: float, labels):
    """Ideal Z/X outcome distributions of each prepared state after the channel."""
    if isinstance(cfg.noise, GadParams):
        ch = gad_channel(GadParams(gamma, cfg.noise.p))
    else:
        ch = ad_channel(AdParams(gamma))
    rows, bases, refs = [], [], []
    for label in labels:
        rho = qmat.apply_channel(PureState.from_label(label).density(), ch)
        if label in ("0", "1"):
            basis, p_first = "Z", float(np.real(np.trace(qmat.P0 @ rho.matrix)))
        else:
            basis, p_first = "X", float(np.real(np.trace(qmat.P_PLUS @ rho.matrix)))
        rows.append([max(0.0, p_first), max(0.0, 1.0 - p_first)])
        bases.append(basis)
        refs.append(0 if label in ("0", "+") else 1)
    return rows, bases, refs


def _prepare_measure_blocks(cfg: ProtocolConfig, plan: ShotPlan, profile, qubits):
    labels = plan.states_sequence or (("0", "1", "+", "-") if cfg.protocol == protocols.BB84 else ("0", "+"))
    gamma = profile.qubit_gamma(qubits[0], plan.n_identity_gates)
    delta = profile.qubits[qubits[0]].readout_error
    rows, bases, refs = _single_qubit_rows(cfg, gamma, labels)
    bits = np.array([[[0], [1]]] * len(labels), dtype=np.uint8)
    flips = np.array([delta])
    data = np.array([True])
    if plan.mode == RANDOM_MODE:
        return [
            _BlockSpec(tuple(bases), _cumulative(rows), bits, flips, -1, data,
                       np.array(refs, dtype=np.uint8), plan.shots_per_block * len(labels))
        ]
    return [
        _BlockSpec((bases[i],), _cumulative([rows[i]]), bits[i : i + 1], flips, -1, data,
                   np.array([refs[i]], dtype=np.uint8), plan.shots_per_block)
        for i in range(len(labels))
    ]


def _bbm92_blocks(cfg: ProtocolConfig, plan: ShotPlan, profile, qubits):
    qa, qb = qubits
    if cfg.bbm92_distribution == ALICE_SENDS:
        gamma_a = 0.0
        gamma_b = profile.qubit_gamma(qb, 2 * plan.n_identity_gates)
    else:
        gamma_a = profile.qubit_gamma(qa, plan.n_identity_gates)
        gamma_b = profile.qubit_gamma(qb, plan.n_identity_gates)
    rho = protocols.bell_state(cfg.bbm92_pair)
    arm_a = qmat.KrausChannel(ad_channel(AdParams(gamma_a)).operators, acts_on=(0,))
    arm_b = qmat.KrausChannel(ad_channel(AdParams(gamma_b)).operators, acts_on=(1,))
    rho = qmat.apply_channel(qmat.apply_channel(rho, arm_a), arm_b)
    rows = []
    for basis in ("Z", "X"):
        kets = (qmat.KET0, qmat.KET1) if basis == "Z" else (qmat.KET_PLUS, qmat.KET_MINUS)
        row = []
        for a in kets:
            for b in kets:
                v = np.kron(a, b)
                row.append(max(0.0, float(np.real(v.conj() @ rho.matrix @ v))))
        rows.append(row)
    bits = np.array([[[0, 0], [0, 1], [1, 0], [1, 1]]] * 2, dtype=np.uint8)
    flips = np.array([profile.qubits[qa].readout_error, profile.qubits[qb].readout_error])
    data = np.array([True, True])
    # correlated pairs err when the two outcomes differ; anti-correlated when they agree
    ref = 0 if cfg.bbm92_pair == CORRELATED else 1
    refs = np.array([ref, ref], dtype=np.uint8)
    labels = plan.states_sequence or ("Z", "X")
    index = {"Z": 0, "X": 1}
    if plan.mode == RANDOM_MODE:
        order = [index[l] for l in labels]
        return [
            _BlockSpec(tuple(labels), _cumulative([rows[i] for i in order]),
                       bits[order], flips, -1, data, refs[order], plan.shots_per_block * len(labels))
        ]
    return [
        _BlockSpec((l,), _cumulative([rows[index[l]]]), bits[index[l] : index[l] + 1],
                   flips, -1, data, refs[index[l] : index[l] + 1], plan.shots_per_block)
        for l in labels
    ]


def _encoded_blocks(cfg: EncodedConfig, plan: ShotPlan, profile, qubits):
    q0, q1 = qubits[0], qubits[1]
    ps_readout_qubit = qubits[2] if cfg.scheme == dualrail.ANCILLA else q1
    gammas = (profile.qubit_gamma(q0, plan.n_identity_gates), profile.qubit_gamma(q1, plan.n_identity_gates))
    if isinstance(cfg.noise, GadParams):
        rails = [gad_channel(GadParams(g, cfg.noise.p)) for g in gammas]
    else:
        rails = [ad_channel(AdParams(g)) for g in gammas]
    rail = rail_product(rails[0], rails[1])
    labels = plan.states_sequence or ("0", "1", "+", "-")
    flips = np.array([
        profile.qubits[q0].readout_error,
        profile.qubits[ps_readout_qubit].readout_error,
    ])
    data = np.array([True, False])
    rows, bases, refs = [], [], []
    for label in labels:
        kept, dropped = dualrail.encoded_branches(PureState.from_label(label), cfg.scheme, rail, cfg.fault)
        if label in ("0", "1"):
            basis, first = "Z", qmat.P0
        else:
            basis, first = "X", qmat.P_PLUS
        row = []
        for branch in (dropped, kept):  # detection bit 0, then 1
            p_first = float(np.real(np.trace(first @ branch.matrix)))
            p_total = branch.trace()
            row.extend([max(0.0, p_first), max(0.0, p_total - p_first)])
        rows.append(row)
        bases.append(basis)
        refs.append(0 if label in ("0", "+") else 1)
    # outcome order: (data bit, detection bit) = (0,0), (1,0), (0,1), (1,1)
    bits = np.array([[[0, 0], [1, 0], [0, 1], [1, 1]]] * len(labels), dtype=np.uint8)
    if plan.mode == RANDOM_MODE:
        return [
            _BlockSpec(tuple(bases), _cumulative(rows), bits, flips, 1, data,
                       np.array(refs, dtype=np.uint8), plan.shots_per_block * len(labels))
        ]
    return [
        _BlockSpec((bases[i],), _cumulative([rows[i]]), bits[i : i + 1], flips, 1, data,
                   np.array([refs[i]], dtype=np.uint8), plan.shots_per_block)
        for i in range(len(labels))
    ]


def build_blocks(cfg, plan: ShotPlan, profile: HardwareProfile, qubits=None):
    """Translate a config/plan/profile triple into sampling block specs."""
    if isinstance(cfg, EncodedConfig):
        qubits = qubits or ((0, 1, 2) if cfg.scheme == dualrail.ANCILLA else (0, 1))
        needed = 3 if cfg.scheme == dualrail.ANCILLA else 2
    elif isinstance(cfg, ProtocolConfig):
        qubits = qubits or ((0, 1) if cfg.protocol == BBM92 else (0,))
        needed = 2 if cfg.protocol == BBM92 else 1
    else:
        raise ValueError("cfg must be a ProtocolConfig or an EncodedConfig")
    if len(qubits) < needed:
        raise ValueError(f"configuration needs {needed} qubit indices, got {qubits}")
    if max(qubits) >= len(profile.qubits):
        raise ValueError(f"qubit index {max(qubits)} outside profile {profile.name!r}")
    if isinstance(cfg, EncodedConfig):
        return _encoded_blocks(cfg, plan, profile, qubits)
    if cfg.protocol == BBM92:
        return _bbm92_blocks(cfg, plan, profile, qubits)
    return _prepare_measure_blocks(cfg, plan, profile, qubits)


def run_blocks(cfg, plan: ShotPlan, profile: HardwareProfile, qubits=None, backend=None) -> QberEstimate:
    """Sample every block of the plan and accumulate sifted/error counts.

    Deterministic for a fixed (cfg, plan, profile): block i uses stream
    seed ``plan.seed XOR i``. ``qber`` is errors over sifted Z-basis bits,
    ``phase_error`` the X-basis analogue.
    """
    blocks = build_blocks(cfg, plan, profile, qubits)
    if not blocks:
        raise ValueError("plan produced no blocks")
    sifted_z = sifted_x = errors_z = errors_x = 0
    for index, block in enumerate(blocks):
        sifted, errors = sampling.sample_block(
            plan.seed ^ index, block.shots, block.cum, block.bits, block.flips,
            ps_index=block.ps_index, data_flags=block.data_flags,
            xor_ref=block.xor_ref, backend=backend,
        )
        for s, basis in enumerate(block.basis_per_state):
            if basis == "Z":
                sifted_z += int(sifted[s])
                errors_z += int(errors[s])
            else:
                sifted_x += int(sifted[s])
                errors_x += int(errors[s])
    return QberEstimate(
        sifted_bits=sifted_z + sifted_x,
        sifted_z=sifted_z,
        sifted_x=sifted_x,
        errors_z=errors_z,
        errors_x=errors_x,
        qber=errors_z / sifted_z if sifted_z else 0.0,
        phase_error=errors_x / sifted_x if sifted_x else 0.0,
    )


def finite_key(est: QberEstimate, config=None) -> KeyRateReport:
    """Finite key length from empirical counts, clamped at zero."""
    if est.sifted_bits <= 0:
        rates = ErrorRates(0.0, 0.0, 0.0)
        return KeyRateReport(rates, 0.0, 0, 0, config=config, starved=True)
    rates = ErrorRates(min(1.0, est.qber), min(1.0, est.phase_error), 1.0)
    return KeyRateReport(
        rates=rates,
        secure_fraction=protocols.secure_fraction(rates),
        l_sift=est.sifted_bits,
        l_sec=secure_length(est.sifted_bits, rates.e_b, rates.e_p),
        config=config,
    )
