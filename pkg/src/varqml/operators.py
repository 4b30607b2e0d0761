"""Pauli-string algebra, parameterized Hamiltonians and exact oracles.

Conventions: hbar = k_B = 1. A Pauli label is read qubit-0-first, i.e.
label[j] acts on qubit j (the j-th least significant index bit).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .sim import MAX_QUBITS, DensityMatrix, StateVector

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. "ZX" = Z on q0, X on q1."""

    label: str

    def __post_init__(self):
        if not self.label or any(c not in "IXYZ" for c in self.label):
            raise ValueError(f"invalid Pauli label {self.label!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    def to_matrix(self) -> np.ndarray:
        mat = np.array([[1.0 + 0j]])
        for c in self.label:  # qubit 0 is the least significant bit
            mat = np.kron(_PAULI_MATS[c], mat)
        return mat

    def apply_vec(self, amps: np.ndarray) -> np.ndarray:
        """P |psi> on a raw amplitude vector via bit arithmetic."""
        n = self.n_qubits
        xmask = zmask = 0
        n_y = 0
        for q, c in enumerate(self.label):
            if c in "XY":
                xmask |= 1 << q
            if c in "ZY":
                zmask |= 1 << q
            if c == "Y":
                n_y += 1
        idx = np.arange(amps.size)
        signs = 1 - 2 * (np.bitwise_count(idx & zmask).astype(np.int64) & 1)
        phase = (1j) ** n_y
        out = np.empty_like(amps)
        out[idx ^ xmask] = phase * signs * amps
        return out

    def is_diagonal(self) -> bool:
        return all(c in "IZ" for c in self.label)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings; Hermitian by construction."""

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        terms = tuple((float(c), s if isinstance(s, PauliString) else PauliString(s))
                      for c, s in self.terms)
        if not terms:
            raise ValueError("PauliSum needs at least one term")
        n = terms[0][1].n_qubits
        if any(s.n_qubits != n for _, s in terms):
            raise ValueError("all Pauli strings must have the same length")
        if any(not np.isfinite(c) for c, _ in terms):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits

    def apply_vec(self, amps: np.ndarray) -> np.ndarray:
        out = np.zeros_like(amps, dtype=complex)
        for coeff, string in self.terms:
            if coeff != 0.0:
                out += coeff * string.apply_vec(amps)
        return out

    def is_diagonal(self) -> bool:
        return all(s.is_diagonal() for _, s in self.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(tuple((factor * c, s) for c, s in self.terms))

    def embed(self, n_total: int, offset: int = 0) -> "PauliSum":
        """Pad with identities to ``n_total`` qubits (H^a tensor I^b style)."""
        if offset + self.n_qubits > n_total:
            raise ValueError("embedding does not fit")
        pre, post = "I" * offset, "I" * (n_total - offset - self.n_qubits)
        return PauliSum(tuple((c, PauliString(pre + s.label + post)) for c, s in self.terms))


def pauli_sum(terms: Sequence[tuple[float, str]]) -> PauliSum:
    return PauliSum(tuple((c, PauliString(lbl)) for c, lbl in terms))


def to_matrix(h: PauliSum) -> np.ndarray:
    """Dense Hermitian matrix of a PauliSum (desk scale only)."""
    if h.n_qubits > MAX_QUBITS:
        raise ValueError("too many qubits for a dense matrix")
    dim = 2 ** h.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for coeff, string in h.terms:
        mat += coeff * string.to_matrix()
    return mat


def spectral_norm(h: PauliSum) -> float:
    """Exact operator norm via dense eigendecomposition."""
    return float(np.max(np.abs(np.linalg.eigvalsh(to_matrix(h)))))


def exact_gibbs(h: PauliSum, kT: float) -> DensityMatrix:
    """exp(-H/kT) / Tr[exp(-H/kT)] via eigendecomposition."""
    if kT <= 0:
        raise ValueError("temperature must be positive")
    vals, vecs = np.linalg.eigh(to_matrix(h))
    w = np.exp(-(vals - vals.min()) / kT)  # shift for numerical stability
    rho = (vecs * w) @ vecs.conj().T
    return DensityMatrix(h.n_qubits, rho / np.trace(rho).real)


def exact_ite(h: PauliSum, psi0: StateVector, t: float) -> StateVector:
    """Normalized imaginary-time evolution exp(-Ht)|psi0> / ||.||."""
    if t < 0:
        raise ValueError("imaginary time must be non-negative")
    if h.n_qubits != psi0.n_qubits:
        raise ValueError("dimension mismatch")
    vals, vecs = np.linalg.eigh(to_matrix(h))
    coeff = vecs.conj().T @ psi0.amplitudes
    evolved = vecs @ (np.exp(-(vals - vals.min()) * t) * coeff)
    norm = np.linalg.norm(evolved)
    if norm < 1e-14:
        raise ValueError("evolved state has (numerically) vanishing norm")
    return StateVector(psi0.n_qubits, evolved / norm)


def exact_rte(h: PauliSum, psi0: StateVector, t: float) -> StateVector:
    """Unitary real-time evolution exp(-iHt)|psi0>."""
    if h.n_qubits != psi0.n_qubits:
        raise ValueError("dimension mismatch")
    vals, vecs = np.linalg.eigh(to_matrix(h))
    coeff = vecs.conj().T @ psi0.amplitudes
    return StateVector(psi0.n_qubits, vecs @ (np.exp(-1j * vals * t) * coeff))


def variance(h: PauliSum, state: StateVector) -> float:
    """<H^2> - <H>^2, clipped at small negative round-off."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("dimension mismatch")
    hpsi = h.apply_vec(state.amplitudes)
    e = np.real(np.vdot(state.amplitudes, hpsi))
    h2 = np.real(np.vdot(hpsi, hpsi))
    return float(max(h2 - e * e, -1e-10))


class LinearWeight:
    """Weight function f(theta) = theta[index]."""

    def __init__(self, index: int):
        self.index = index

    def value(self, theta: np.ndarray, x=None) -> float:
        return float(theta[self.index])

    def grad(self, theta: np.ndarray, x=None) -> np.ndarray:
        g = np.zeros(len(theta))
        g[self.index] = 1.0
        return g


class DotProductWeight:
    """Weight function f(theta, x) = theta[start:stop] . x."""

    def __init__(self, start: int, stop: int):
        self.start, self.stop = start, stop

    def value(self, theta: np.ndarray, x=None) -> float:
        if x is None:
            raise ValueError("DotProductWeight needs a feature vector")
        return float(np.dot(theta[self.start:self.stop], x))

    def grad(self, theta: np.ndarray, x=None) -> np.ndarray:
        g = np.zeros(len(theta))
        g[self.start:self.stop] = x
        return g


class ConstantWeight:
    """Fixed coefficient, independent of theta."""

    def __init__(self, value: float):
        self._value = float(value)

    def value(self, theta: np.ndarray, x=None) -> float:
        return self._value

    def grad(self, theta: np.ndarray, x=None) -> np.ndarray:
        return np.zeros(len(theta))


@dataclass(frozen=True)
class ParamHamiltonian:
    """H(theta, x) = sum_c f_c(theta, x) h_c with differentiable weights."""

    terms: tuple[tuple[object, PauliString], ...]
    n_params: int

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits

    def bind(self, theta: np.ndarray, x=None) -> PauliSum:
        return PauliSum(tuple((w.value(theta, x), s) for w, s in self.terms))

    def grad_bind(self, theta: np.ndarray, x=None) -> list[PauliSum]:
        """d H / d theta_m as one PauliSum per parameter."""
        grads = np.stack([w.grad(theta, x) for w, _ in self.terms])  # (terms, p)
        out = []
        for m in range(self.n_params):
            out.append(PauliSum(tuple((grads[c, m], s) for c, (_, s) in enumerate(self.terms))))
        return out


def linear_param_hamiltonian(labels: Sequence[str]) -> ParamHamiltonian:
    """H(theta) = sum_i theta_i h_i for the given Pauli labels."""
    terms = tuple((LinearWeight(i), PauliString(lbl)) for i, lbl in enumerate(labels))
    return ParamHamiltonian(terms, len(labels))


def format_hamiltonian(h: PauliSum) -> str:
    """Text form: one `coefficient pauli_label` per line; round-trip exact."""
    return "\n".join(f"{c:.17g} {s.label}" for c, s in h.terms) + "\n"


def parse_hamiltonian(text: str) -> PauliSum:
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        coeff, label = line.split()
        terms.append((float(coeff), PauliString(label)))
    return PauliSum(tuple(terms))
