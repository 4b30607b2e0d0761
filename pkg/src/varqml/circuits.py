"""Parameterized circuits: the ansatz library, binding, and data loaders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates as g
from .gates import GateDescriptor
from .sim import StateVector, apply_gate_vec, zero_state


@dataclass(frozen=True)
class ParamCircuit:
    """Ordered gate list with contiguous parameter slots 0..n_params-1."""

    n_qubits: int
    gates: tuple[GateDescriptor, ...]
    n_params: int

    def __post_init__(self):
        slots = sorted(gate.param_slot for gate in self.gates if gate.param_slot is not None)
        if len(set(slots)) != len(slots):
            raise ValueError("parameter slots must be used by at most one gate each")
        if slots and (slots[0] < 0 or slots[-1] >= self.n_params):
            raise ValueError("parameter slots must lie in 0..n_params-1")

    def bind(self, omega) -> "ParamCircuit":
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {omega.shape}")
        return ParamCircuit(self.n_qubits, tuple(gt.bound(omega) for gt in self.gates), 0)

    def appended(self, *extra: GateDescriptor) -> "ParamCircuit":
        return ParamCircuit(self.n_qubits, self.gates + tuple(extra), self.n_params)

    def slot_positions(self) -> list[int]:
        """Gate index carrying each slot, indexed by slot."""
        pos = [-1] * self.n_params
        for i, gate in enumerate(self.gates):
            if gate.param_slot is not None:
                pos[gate.param_slot] = i
        return pos


def simulate(circuit: ParamCircuit, omega=None,
             input_state: StateVector | None = None) -> StateVector:
    """Bind and run the circuit on |0...0> or the given input state."""
    omega = np.zeros(circuit.n_params) if omega is None else np.asarray(omega, dtype=float)
    if omega.shape != (circuit.n_params,):
        raise ValueError("parameter vector length mismatch")
    state = zero_state(circuit.n_qubits) if input_state is None else input_state
    amps = state.amplitudes
    for gate in circuit.gates:
        amps = apply_gate_vec(amps, gate.bound(omega), circuit.n_qubits)
    return StateVector(circuit.n_qubits, amps)


def efficient_su2(n_qubits: int, reps: int) -> ParamCircuit:
    """Alternating RY+RZ rotation layers with CX-chain entanglers.

    Structure: reps x [RY layer, RZ layer, CX chain] + final RY and RZ layer;
    2*n*(reps+1) parameters. With all angles zero the circuit is the identity
    on |0...0>.
    """
    if n_qubits < 1 or reps < 1:
        raise ValueError("need n_qubits >= 1 and reps >= 1")
    gate_list: list[GateDescriptor] = []
    slot = 0
    for r in range(reps + 1):
        for q in range(n_qubits):
            gate_list.append(g.ry(q, slot=slot))
            slot += 1
        for q in range(n_qubits):
            gate_list.append(g.rz(q, slot=slot))
            slot += 1
        if r < reps:
            for q in range(n_qubits - 1):
                gate_list.append(g.cx(q, q + 1))
    return ParamCircuit(n_qubits, tuple(gate_list), slot)


def ry_cz_generator(n_qubits: int, depth: int) -> ParamCircuit:
    """(depth+1) RY layers interleaved with CZ rings; n*(depth+1) parameters."""
    if n_qubits < 1 or depth < 0:
        raise ValueError("need n_qubits >= 1 and depth >= 0")
    gate_list: list[GateDescriptor] = []
    slot = 0
    ring = sorted({tuple(sorted((i, (i + 1) % n_qubits))) for i in range(n_qubits)
                   if i != (i + 1) % n_qubits})
    for d in range(depth + 1):
        for q in range(n_qubits):
            gate_list.append(g.ry(q, slot=slot))
            slot += 1
        if d < depth:
            for a, b in ring:
                gate_list.append(g.cz(a, b))
    return ParamCircuit(n_qubits, tuple(gate_list), slot)


def gibbs_ansatz(n: int) -> tuple[ParamCircuit, np.ndarray]:
    """2n-qubit purification ansatz and initial parameters preparing |phi+>^n.

    Register a holds qubits 0..n-1, register b qubits n..2n-1. Two blocks of
    [RY layer, RZ layer, CX chain] are followed by a final RY layer and the
    Bell-pairing CX(a_i -> b_i). At the initial binding every rotation is zero
    except the final RY on register a (pi/2), so the entanglers before it act
    on |0...0> trivially and the circuit prepares n Bell pairs.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    m = 2 * n
    gate_list: list[GateDescriptor] = []
    slot = 0
    for _ in range(2):
        for q in range(m):
            gate_list.append(g.ry(q, slot=slot))
            slot += 1
        for q in range(m):
            gate_list.append(g.rz(q, slot=slot))
            slot += 1
        for q in range(m - 1):
            gate_list.append(g.cx(q, q + 1))
    final_ry = slot
    for q in range(m):
        gate_list.append(g.ry(q, slot=slot))
        slot += 1
    for q in range(n):
        gate_list.append(g.cx(q, n + q))
    omega0 = np.zeros(slot)
    omega0[final_ry:final_ry + n] = np.pi / 2.0
    return ParamCircuit(m, tuple(gate_list), slot), omega0


def diagonal_gibbs_ansatz(n: int) -> tuple[ParamCircuit, np.ndarray]:
    """n-qubit ansatz and initial parameters preparing |+>^n (diagonal case)."""
    if n < 1:
        raise ValueError("need n >= 1")
    gate_list: list[GateDescriptor] = []
    slot = 0
    for _ in range(2):
        for q in range(n):
            gate_list.append(g.ry(q, slot=slot))
            slot += 1
        for q in range(n):
            gate_list.append(g.rz(q, slot=slot))
            slot += 1
        for q in range(n - 1):
            gate_list.append(g.cx(q, q + 1))
    final_ry = slot
    for q in range(n):
        gate_list.append(g.ry(q, slot=slot))
        slot += 1
    omega0 = np.zeros(slot)
    omega0[final_ry:final_ry + n] = np.pi / 2.0
    return ParamCircuit(n, tuple(gate_list), slot), omega0


def amplitude_encode(probabilities) -> StateVector:
    """State with amplitudes sqrt(p_j); exact distribution loader."""
    p = np.asarray(probabilities, dtype=float)
    n = int(np.log2(len(p)))
    if 2 ** n != len(p):
        raise ValueError("length must be a power of two")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("input must be a probability distribution")
    return StateVector(n, np.sqrt(p).astype(complex))


def distribution_loader(probabilities) -> ParamCircuit:
    """Parameter-free circuit preparing sqrt(p) amplitudes via RY trees.

    Standard top-down construction: qubit n-1 is rotated by the probability
    split of the two index halves, each following qubit by a uniformly
    controlled RY conditioned on all more significant qubits.
    """
    p = np.asarray(probabilities, dtype=float)
    n = int(np.log2(len(p)))
    if 2 ** n != len(p):
        raise ValueError("length must be a power of two")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("input must be a probability distribution")
    amps = np.sqrt(p)
    gate_list: list[GateDescriptor] = []
    for q in range(n - 1, -1, -1):
        controls = tuple(range(q + 1, n))
        angles = []
        block = amps.reshape(2 ** (n - 1 - q), 2, 2 ** q)
        norms = np.sqrt(np.sum(block ** 2, axis=2))  # (patterns, branch)
        for pat in range(2 ** (n - 1 - q)):
            # reshape pattern bits are the high qubits, most significant first
            lo, hi = norms[pat, 0], norms[pat, 1]
            angles.append(2.0 * np.arctan2(hi, lo))
        if controls:
            # pattern index per reshape uses qubit q+1 as its lowest bit,
            # matching UCRY's controls[0] = least significant pattern bit
            gate_list.append(g.ucry(controls, q, angles))
        else:
            gate_list.append(g.ry(q, angle=angles[0]))
    return ParamCircuit(n, tuple(gate_list), 0)


@dataclass(frozen=True)
class FitResult:
    omega: np.ndarray
    residual: float
    converged: bool


def fit_distribution(target, circuit: ParamCircuit, seed: int = 0,
                     iterations: int = 3000, learning_rate: float = 0.25,
                     omega0=None, threshold: float = 1e-4) -> FitResult:
    """Least-squares fit of circuit output probabilities to a target.

    Gradient descent on parameter-shift probability gradients. A residual
    above ``threshold`` flags non-convergence but is not fatal.
    """
    from .gradients import grad_probabilities

    q = np.asarray(target, dtype=float)
    if len(q) != 2 ** circuit.n_qubits:
        raise ValueError("target length must match the circuit register")
    rng = np.random.default_rng(seed)
    omega = (rng.uniform(-0.1, 0.1, circuit.n_params) if omega0 is None
             else np.asarray(omega0, dtype=float).copy())

    def residual(w):
        probs = np.abs(simulate(circuit, w).amplitudes) ** 2
        return float(np.sum((probs - q) ** 2)), probs

    best, best_omega = residual(omega)[0], omega.copy()
    for _ in range(iterations):
        res, probs = residual(omega)
        if res < best:
            best, best_omega = res, omega.copy()
        if res < 1e-10:
            break
        jac = grad_probabilities(circuit, omega, method="paramshift")
        omega = omega - learning_rate * (jac @ (2.0 * (probs - q)))
    res, _ = residual(omega)
    if res < best:
        best, best_omega = res, omega.copy()
    return FitResult(best_omega, best, best < threshold)


_FLOAT = "{:.17g}"


def format_circuit(circuit: ParamCircuit) -> str:
    """Line format `GATE q0[,q1..] [s<slot>|<angle>] [key=value..]`."""
    lines = [f"QUBITS {circuit.n_qubits}"]
    for gate in circuit.gates:
        parts = [gate.name, ",".join(str(q) for q in gate.targets)]
        if gate.controls:
            parts.append("c=" + ",".join(str(q) for q in gate.controls))
        if gate.param_slot is not None:
            parts.append(f"s{gate.param_slot}")
        elif gate.angle is not None:
            parts.append(_FLOAT.format(gate.angle))
        if gate.angles:
            parts.append("a=" + ",".join(_FLOAT.format(a) for a in gate.angles))
        if gate.threshold is not None:
            parts.append(f"k={gate.threshold}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> ParamCircuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("QUBITS"):
        raise ValueError("circuit text must start with a QUBITS line")
    n_qubits = int(lines[0].split()[1])
    gate_list = []
    n_params = 0
    for line in lines[1:]:
        parts = line.split()
        name = parts[0]
        targets = tuple(int(q) for q in parts[1].split(","))
        controls: tuple[int, ...] = ()
        slot = None
        angle = None
        angles: tuple[float, ...] = ()
        threshold = None
        for tok in parts[2:]:
            if tok.startswith("c="):
                controls = tuple(int(q) for q in tok[2:].split(","))
            elif tok.startswith("a="):
                angles = tuple(float(v) for v in tok[2:].split(","))
            elif tok.startswith("k="):
                threshold = int(tok[2:])
            elif tok.startswith("s") and tok[1:].isdigit():
                slot = int(tok[1:])
            else:
                angle = float(tok)
        if name in ("CX", "CY", "CZ", "CRY", "CPHASE") and not controls and len(targets) == 2:
            controls, targets = (targets[0],), (targets[1],)
        gate_list.append(GateDescriptor(name, targets, controls, param_slot=slot,
                                        angle=angle, angles=angles, threshold=threshold))
        if slot is not None:
            n_params = max(n_params, slot + 1)
    return ParamCircuit(n_qubits, tuple(gate_list), n_params)
