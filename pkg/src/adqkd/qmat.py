"""Dense complex-matrix quantum core for registers of 1 to 3 qubits.

Everything here is a plain ``numpy`` complex array wrapped (where a
contract matters) in a small frozen dataclass: density matrices, Kraus
channels and measurement sets validate themselves on construction.
Qubit ordering convention, used everywhere in this package: qubit 0 is
the most significant bit of a basis label, so ``|q0 q1 q2>`` maps to the
integer index ``q0*4 + q1*2 + q2`` and an operator acting on qubit 0 is
the *left* Kronecker factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Tolerances: algebraic identities are tight, channel/PSD checks allow the
# float error accumulated across a few Kraus compositions.
ATOL_ALG = 1e-12
ATOL_CHANNEL = 1e-10

MAX_DIM = 8  # 3 qubits; registers never get larger in this package

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

_SINGLE_KETS = {"0": KET0, "1": KET1, "+": KET_PLUS, "-": KET_MINUS}

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

P0 = np.outer(KET0, KET0.conj())
P1 = np.outer(KET1, KET1.conj())
# exact 0.5 entries (outer products of the kets would carry a 1-ulp excess)
P_PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
P_MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


def _frozen_complex(a, ndim):
    arr = np.array(a, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _is_pow2_dim(d):
    return d in (1, 2, 4, 8)


def mats_close(a, b, atol: float = ATOL_ALG) -> bool:
    """Entrywise equality of two complex matrices within an absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.max(np.abs(a - b), initial=0.0) <= atol)


def ket(label: str) -> np.ndarray:
    """Build a state vector from a label over {0, 1, +, -}, one char per qubit."""
    if not label or any(c not in _SINGLE_KETS for c in label):
        raise ValueError(f"bad state label {label!r}")
    vec = _SINGLE_KETS[label[0]]
    for c in label[1:]:
        vec = np.kron(vec, _SINGLE_KETS[c])
    return vec


def projector(vec: np.ndarray) -> np.ndarray:
    """Rank-one projector |v><v| for a normalized vector."""
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def identity(n_qubits: int) -> np.ndarray:
    return np.eye(2**n_qubits, dtype=complex)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector of 1-3 qubits (qubit 0 = most significant bit)."""

    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        amps = _frozen_complex(self.amplitudes, 1)
        if not _is_pow2_dim(amps.size) or amps.size < 2:
            raise ValueError(f"state dimension {amps.size} is not a power of two <= {MAX_DIM}")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > ATOL_ALG:
            raise ValueError(f"state vector is not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(projector(self.amplitudes))

    @classmethod
    def from_label(cls, label: str) -> "PureState":
        return cls(ket(label), label=label)


def _min_eigval(hermitian: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian)[0])


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, trace-one matrix on 1-3 qubits.

    ``subnormalized=True`` admits trace < 1 and is meant for intermediate
    states inside post-selection pipelines only.
    """

    matrix: np.ndarray
    subnormalized: bool = False

    def __post_init__(self):
        m = _frozen_complex(self.matrix, 2)
        rows, cols = m.shape
        if rows != cols or not _is_pow2_dim(rows) or rows < 2:
            raise ValueError(f"bad density-matrix shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > ATOL_ALG:
            raise ValueError("density matrix is not Hermitian")
        tr = float(np.real(np.trace(m)))
        if self.subnormalized:
            if tr > 1.0 + ATOL_ALG or tr < -ATOL_ALG:
                raise ValueError(f"subnormalized trace {tr!r} outside [0, 1]")
        elif abs(tr - 1.0) > ATOL_ALG:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        if _min_eigval(m) < -ATOL_CHANNEL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def isclose(self, other: "DensityMatrix", atol: float = ATOL_ALG) -> bool:
        return mats_close(self.matrix, other.matrix, atol)

    def fidelity_to_pure(self, psi: PureState) -> float:
        """<psi| rho |psi> (equals state fidelity for a pure reference)."""
        v = psi.amplitudes
        return float(np.real(v.conj() @ self.matrix @ v))


@dataclass(frozen=True)
class KrausChannel:
    """A list of same-dimension Kraus operators acting on ``acts_on`` qubits.

    Construction enforces the completeness condition sum_i A_i^dag A_i = I.
    """

    operators: tuple = ()
    acts_on: tuple = (0,)

    def __post_init__(self):
        if not self.operators:
            raise ValueError("channel needs at least one Kraus operator")
        ops = tuple(_frozen_complex(op, 2) for op in self.operators)
        d = ops[0].shape[0]
        acts_on = tuple(int(q) for q in self.acts_on)
        if len(set(acts_on)) != len(acts_on):
            raise ValueError(f"duplicate qubit in acts_on {acts_on}")
        if d != 2 ** len(acts_on) or d > MAX_DIM:
            raise ValueError(f"operator dimension {d} does not match acts_on {acts_on}")
        for op in ops:
            if op.shape != (d, d):
                raise ValueError("Kraus operators must all be square and same dimension")
        comp = sum(op.conj().T @ op for op in ops)
        if np.max(np.abs(comp - np.eye(d))) > ATOL_CHANNEL:
            raise ValueError("Kraus operators violate completeness sum A^dag A = I")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "acts_on", acts_on)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class MeasurementSet:
    """POVM: positive effects summing to the identity, with outcome labels."""

    effects: tuple = ()
    outcome_labels: tuple = ()

    def __post_init__(self):
        if not self.effects:
            raise ValueError("measurement needs at least one effect")
        effects = tuple(_frozen_complex(e, 2) for e in self.effects)
        labels = tuple(str(l) for l in self.outcome_labels)
        if len(labels) != len(effects):
            raise ValueError("one label per effect required")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be distinct")
        d = effects[0].shape[0]
        for e in effects:
            if e.shape != (d, d):
                raise ValueError("effects must share one dimension")
            if np.max(np.abs(e - e.conj().T)) > ATOL_ALG or _min_eigval(e) < -ATOL_CHANNEL:
                raise ValueError("effect is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(d))) > ATOL_CHANNEL:
            raise ValueError("effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outcome_labels", labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two operators, left factor on the higher qubits.

    Rejects results larger than the 3-qubit (8x8) registers this package
    works with.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("tensor expects matrices")
    if a.shape[0] * b.shape[0] > MAX_DIM or a.shape[1] * b.shape[1] > MAX_DIM:
        raise ValueError("tensor result exceeds the 8x8 register limit")
    return np.kron(a, b)


def embed_operator(op: np.ndarray, acts_on, n_qubits: int) -> np.ndarray:
    """Lift an operator on the ordered qubits ``acts_on`` to the full register.

    The first listed qubit is the most significant bit of the small
    operator's index; untouched qubits get an implicit identity.
    """
    op = np.asarray(op, dtype=complex)
    acts_on = tuple(int(q) for q in acts_on)
    k = len(acts_on)
    if op.shape != (2**k, 2**k):
        raise ValueError("operator shape does not match acts_on")
    if any(q < 0 or q >= n_qubits for q in acts_on):
        raise ValueError(f"acts_on {acts_on} outside register of {n_qubits} qubits")
    if k == n_qubits and acts_on == tuple(range(n_qubits)):
        return op.copy()
    dim = 2**n_qubits
    rest = [q for q in range(n_qubits) if q not in acts_on]

    def bit(x, q):
        return (x >> (n_qubits - 1 - q)) & 1

    def sub(x):
        s = 0
        for m, q in enumerate(acts_on):
            s |= bit(x, q) << (k - 1 - m)
        return s

    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            if all(bit(i, q) == bit(j, q) for q in rest):
                out[i, j] = op[sub(i), sub(j)]
    return out


def cnot(n_qubits: int, control: int, target: int) -> np.ndarray:
    """Full-register CNOT unitary with the given control and target qubits."""
    if control == target:
        raise ValueError("control and target must differ")
    base = np.zeros((4, 4), dtype=complex)
    for c in (0, 1):
        for t in (0, 1):
            base[(c << 1) | (t ^ c), (c << 1) | t] = 1.0
    return embed_operator(base, (control, target), n_qubits)


def x_gate(n_qubits: int, qubit: int) -> np.ndarray:
    """Full-register Pauli-X on one qubit."""
    return embed_operator(PAULI_X, (qubit,), n_qubits)


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """U rho U^dag."""
    return DensityMatrix(u @ rho.matrix @ u.conj().T, subnormalized=rho.subnormalized)


def apply_channel(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    """Apply sum_i A_i rho A_i^dag, lifting the channel onto the register.

    Trace and Hermiticity are preserved (the channel validated its own
    completeness at construction).
    """
    n = rho.n_qubits
    if max(ch.acts_on) >= n:
        raise ValueError(f"channel acts on qubit {max(ch.acts_on)} of a {n}-qubit state")
    if ch.dim == rho.dim and ch.acts_on == tuple(range(n)):
        ops = ch.operators
    else:
        ops = [embed_operator(op, ch.acts_on, n) for op in ch.operators]
    out = np.zeros_like(rho.matrix)
    for op in ops:
        out = out + op @ rho.matrix @ op.conj().T
    return DensityMatrix(out, subnormalized=rho.subnormalized)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the ``keep`` qubits (kept in ascending register order)."""
    n = rho.n_qubits
    keep = sorted(set(int(q) for q in keep))
    if not keep or len(keep) == n:
        raise ValueError("keep must be a nonempty strict subset of the register")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"keep {keep} outside register of {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = rho.matrix.reshape([2] * (2 * n))
    for q in sorted(traced, reverse=True):
        # row axis q and the matching column axis; later axes shift as we contract
        t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
    d = 2 ** len(keep)
    return DensityMatrix(t.reshape(d, d), subnormalized=rho.subnormalized)


def measure(rho: DensityMatrix, m: MeasurementSet) -> dict:
    """Outcome probabilities {label: Tr(E_i rho)} for a validated POVM."""
    if m.dim != rho.dim:
        raise ValueError("measurement dimension does not match state")
    probs = {}
    for label, effect in zip(m.outcome_labels, m.effects):
        p = float(np.real(np.trace(effect @ rho.matrix)))
        probs[label] = max(0.0, p)
    return probs


def _operator_sqrt(e: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(e)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def conditional_state(rho: DensityMatrix, effect: np.ndarray, min_prob: float = 1e-14):
    """Post-select on an effect: returns (sqrt(E) rho sqrt(E) / p, p), p = Tr(E rho).

    For projectors sqrt(E) = E. If p falls below ``min_prob`` the selection
    never fires and (None, 0.0) is returned instead of a state. Tiny negative
    eigenvalues (above -1e-10) of the renormalized state are clamped to zero.
    """
    e = np.asarray(effect, dtype=complex)
    if e.shape != (rho.dim, rho.dim):
        raise ValueError("effect dimension does not match state")
    if np.max(np.abs(e - e.conj().T)) > ATOL_ALG:
        raise ValueError("effect is not Hermitian")
    evals = np.linalg.eigvalsh(e)
    if evals[0] < -ATOL_CHANNEL or evals[-1] > 1.0 + ATOL_CHANNEL:
        raise ValueError("effect must satisfy 0 <= E <= I")
    p = float(np.real(np.trace(e @ rho.matrix)))
    if p < min_prob:
        return None, 0.0
    if mats_close(e @ e, e, ATOL_CHANNEL):
        root = e
    else:
        root = _operator_sqrt(e)
    post = root @ rho.matrix @ root.conj().T / p
    w, v = np.linalg.eigh((post + post.conj().T) / 2.0)
    if w[0] < -ATOL_CHANNEL:
        raise ValueError("post-selected state strayed from positivity")
    if w[0] < 0.0:
        w = np.clip(w, 0.0, None)
        w = w / np.sum(w)
        post = (v * w) @ v.conj().T
    return DensityMatrix(post), p
