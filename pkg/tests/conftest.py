import numpy as np

from adqkd.qmat import DensityMatrix, PureState


def random_pure_state(rng, n_qubits=1) -> PureState:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return PureState(amps / np.linalg.norm(amps))


def random_density(rng, n_qubits=1, n_terms=4) -> DensityMatrix:
    """Random mixture of random pure states."""
    dim = 2**n_qubits
    weights = rng.uniform(0.05, 1.0, size=n_terms)
    weights /= weights.sum()
    rho = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        rho += w * np.outer(v, v.conj())
    rho = (rho + rho.conj().T) / 2.0
    rho /= np.real(np.trace(rho))
    return DensityMatrix(rho)
