"""Exact dense statevector engine.

States are 2^n complex amplitude vectors in little-endian order (qubit 0 is
the least significant index bit). All operations are pure: they return new
values and never mutate their inputs, so states can be shared freely across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import SINGLE_QUBIT_GATES, GateDescriptor

MAX_QUBITS = 12

_SQ = 1.0 / np.sqrt(2.0)
_H = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _rotation(name: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    if name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "RY":
        return np.array([[c, -s], [s, c]])
    if name == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])
    if name == "PHASE":
        return np.array([[1, 0], [0, np.exp(1j * angle)]])
    raise ValueError(name)


@dataclass(frozen=True)
class StateVector:
    """Pure n-qubit state as a dense complex amplitude vector."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}]")
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude vector length must be 2**n_qubits")
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-14:
            raise ValueError("cannot normalize a (numerically) zero vector")
        return StateVector(self.n_qubits, self.amplitudes / n)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed n-qubit state: Hermitian, trace-one, PSD matrix."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        d = 2 ** self.n_qubits
        if self.matrix.shape != (d, d):
            raise ValueError("matrix must be 2^n x 2^n")
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))


@dataclass(frozen=True)
class MeasurementDistribution:
    """Computational-basis outcome probabilities, optionally with counts."""

    probabilities: np.ndarray
    counts: np.ndarray | None = None


def basis_state(n_qubits: int, index: int = 0) -> StateVector:
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def zero_state(n_qubits: int) -> StateVector:
    return basis_state(n_qubits, 0)


def plus_state(n_qubits: int) -> StateVector:
    d = 2 ** n_qubits
    return StateVector(n_qubits, np.full(d, 1.0 / np.sqrt(d), dtype=complex))


def random_state(n_qubits: int, seed: int = 0) -> StateVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return StateVector(n_qubits, v / np.linalg.norm(v))


def _check_qubits(gate: GateDescriptor, n: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    if len(set(gate.qubits)) != len(gate.qubits):
        raise ValueError("gate target/control qubits must be distinct")


def apply_gate_vec(amps: np.ndarray, gate: GateDescriptor, n: int) -> np.ndarray:
    """Apply a bound gate to a raw amplitude vector (linear, no renorm)."""
    if gate.param_slot is not None:
        raise ValueError("gate has an unbound parameter slot")
    _check_qubits(gate, n)
    name = gate.name
    idx = np.arange(amps.size)

    if name in SINGLE_QUBIT_GATES or name in ("CX", "CY", "CZ", "CRY", "CPHASE"):
        if name == "X" or name == "CX":
            u = _X
        elif name == "H":
            u = _H
        elif name == "CY":
            u = np.array([[0, -1j], [1j, 0]])
        elif name == "CZ":
            u = np.array([[1, 0], [0, -1]], dtype=complex)
        elif name in ("CRY",):
            u = _rotation("RY", gate.angle)
        elif name in ("CPHASE",):
            u = _rotation("PHASE", gate.angle)
        else:
            u = _rotation(name, gate.angle)
        t = gate.targets[0]
        cmask = 0
        for c in gate.controls:
            cmask |= 1 << c
        tbit = 1 << t
        i0 = idx[((idx & cmask) == cmask) & ((idx & tbit) == 0)]
        i1 = i0 | tbit
        out = amps.copy()
        a0, a1 = amps[i0], amps[i1]
        out[i0] = u[0, 0] * a0 + u[0, 1] * a1
        out[i1] = u[1, 0] * a0 + u[1, 1] * a1
        return out

    if name == "UCRY":
        t = gate.targets[0]
        tbit = 1 << t
        out = amps.copy()
        pattern = np.zeros(amps.size, dtype=np.int64)
        for j, c in enumerate(gate.controls):
            pattern |= ((idx >> c) & 1) << j
        for p, ang in enumerate(gate.angles):
            sel = (pattern == p) & ((idx & tbit) == 0)
            i0 = idx[sel]
            i1 = i0 | tbit
            c, s = np.cos(ang / 2.0), np.sin(ang / 2.0)
            a0, a1 = out[i0].copy(), out[i1].copy()
            out[i0] = c * a0 - s * a1
            out[i1] = s * a0 + c * a1
        return out

    if name == "CMPGT":
        t = gate.targets[0]
        tbit = 1 << t
        value = np.zeros(amps.size, dtype=np.int64)
        for j, c in enumerate(gate.controls):
            value |= ((idx >> c) & 1) << j
        flip = value > gate.threshold
        out = amps.copy()
        out[idx[flip] ^ tbit] = amps[idx[flip]]
        return out

    raise ValueError(f"unknown gate name {name!r}")


def apply_gate(state: StateVector, gate: GateDescriptor) -> StateVector:
    """Apply one gate; unitary, so the norm is preserved."""
    if gate.angle is not None and not np.isfinite(gate.angle):
        raise ValueError("rotation angle must be finite")
    return StateVector(state.n_qubits, apply_gate_vec(state.amplitudes, gate, state.n_qubits))


def expectation(state: StateVector, observable) -> float:
    """<psi|O|psi> for a Hermitian PauliSum observable."""
    if observable.n_qubits != state.n_qubits:
        raise ValueError("observable qubit count must match the state")
    hpsi = observable.apply_vec(state.amplitudes)
    return float(np.real(np.vdot(state.amplitudes, hpsi)))


def measure_distribution(state: StateVector, shots: int | None = None,
                         seed: int = 0) -> MeasurementDistribution:
    """Exact Born probabilities, or seeded multinomial counts when sampling."""
    probs = np.abs(state.amplitudes) ** 2
    if shots is None:
        return MeasurementDistribution(probs)
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    return MeasurementDistribution(counts / shots, counts)


def partial_trace(state: StateVector, keep) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (sorted ascending = output order).

    Output qubit j corresponds to kept qubit ``sorted(keep)[j]``.
    """
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= state.n_qubits:
        raise ValueError("keep set contains invalid qubit indices")
    n = state.n_qubits
    rest = [q for q in range(n) if q not in keep]
    # axis for qubit q in the reshaped tensor is n-1-q (C order puts low bits last)
    tensor = state.amplitudes.reshape([2] * n)
    perm = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in rest]
    mat = tensor.transpose(perm).reshape(2 ** len(keep), 2 ** len(rest))
    rho = mat @ mat.conj().T
    return DensityMatrix(len(keep), rho)


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a, b) -> float:
    """|<a|b>|^2 for pure states, Uhlmann fidelity with mixed states."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        if a.dim != b.dim:
            raise ValueError("dimension mismatch")
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, StateVector):
        a, b = b, a
    if isinstance(b, StateVector):
        if a.matrix.shape[0] != b.dim:
            raise ValueError("dimension mismatch")
        val = np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes))
        return float(np.clip(val, 0.0, 1.0))
    if a.matrix.shape != b.matrix.shape:
        raise ValueError("dimension mismatch")
    s = _sqrtm_psd(a.matrix)
    vals = np.linalg.eigvalsh(s @ b.matrix @ s)
    vals = np.clip(vals, 0.0, None)
    return float(min(np.sum(np.sqrt(vals)) ** 2, 1.0))


def bures_distance(a, b) -> float:
    """Global-phase-invariant state distance, in [0, sqrt(2)].

    sqrt(2 - 2|<a|b>|) for normalized pure states; sqrt(2 - 2 sqrt(F)) with
    the Uhlmann fidelity F otherwise.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        if a.dim != b.dim:
            raise ValueError("dimension mismatch")
        overlap = abs(np.vdot(a.amplitudes, b.amplitudes))
        return float(np.sqrt(max(0.0, 2.0 - 2.0 * min(overlap, 1.0))))
    f = fidelity(a, b)
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * np.sqrt(f))))
