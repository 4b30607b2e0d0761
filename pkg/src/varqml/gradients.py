"""Analytic quantum gradients.

Three routes are implemented and cross-validated against each other:

* ``paramshift`` -- shifted-parameter evaluations, exact for Pauli-rotation
  gates R(w) = exp(-i w P / 2) (generator eigenvalues +-1/2).
* ``lincomb`` -- ancilla-augmented circuits with a controlled insertion of
  the gate generator (implicit/explicit first order, explicit second order,
  and a metric mode).
* ``direct`` -- exact per-gate derivative statevectors (the in-repo oracle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates as g
from .circuits import ParamCircuit, simulate
from .gates import GateDescriptor
from .operators import PauliString, PauliSum
from .sim import StateVector, apply_gate_vec, zero_state

METHODS = ("paramshift", "lincomb", "direct")

# generator Pauli (as a single-qubit label) per rotation gate; the generator
# itself is -P/2, i.e. R(w) = exp(-i w P / 2)
_ROTATION_PAULI = {"RX": "X", "RY": "Y", "RZ": "Z"}


@dataclass(frozen=True)
class GradientRequest:
    circuit: ParamCircuit
    observable: PauliSum
    input_state: StateVector | None = None
    method: str = "paramshift"
    shift: float = np.pi / 2.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if abs(np.sin(self.shift)) < 1e-12:
            raise ValueError("shift must not be an integer multiple of pi")


@dataclass(frozen=True)
class MetricResult:
    """Fubini-Study metric; the quantum Fisher information is 4x this."""

    matrix: np.ndarray

    @property
    def qfim(self) -> np.ndarray:
        return 4.0 * self.matrix


def _input_amps(circuit: ParamCircuit, input_state: StateVector | None) -> np.ndarray:
    if input_state is None:
        return zero_state(circuit.n_qubits).amplitudes
    if input_state.n_qubits != circuit.n_qubits:
        raise ValueError("input state size mismatch")
    return input_state.amplitudes


def _expval(circuit: ParamCircuit, observable: PauliSum, omega,
            input_state: StateVector | None) -> float:
    psi = simulate(circuit, omega, input_state)
    return float(np.real(np.vdot(psi.amplitudes, observable.apply_vec(psi.amplitudes))))


def _generator_pauli(gate: GateDescriptor) -> str:
    """Single-qubit Pauli label of the +-1/2-eigenvalue generator."""
    pauli = _ROTATION_PAULI.get(gate.name)
    if pauli is None:
        raise ValueError(f"gate {gate.name} is not supported by shift/LC gradients")
    return pauli


def _apply_generator(gate: GateDescriptor, amps: np.ndarray, n: int) -> np.ndarray:
    """Apply d/dw of the bound gate divided by the gate itself, i.e. the
    generator G with dU/dw = G U. Exact for every parameterized gate."""
    q = gate.targets[0]
    if gate.name in _ROTATION_PAULI:
        lbl = ["I"] * n
        lbl[q] = _ROTATION_PAULI[gate.name]
        return -0.5j * PauliString("".join(lbl)).apply_vec(amps)
    if gate.name == "CRY":
        c = gate.controls[0]
        lbl = ["I"] * n
        lbl[q] = "Y"
        projected = PauliString("".join(lbl)).apply_vec(amps)
        idx = np.arange(amps.size)
        mask = (idx >> c) & 1 == 1
        out = np.zeros_like(amps)
        out[mask] = -0.5j * projected[mask]
        return out
    if gate.name in ("PHASE", "CPHASE"):
        idx = np.arange(amps.size)
        mask = (idx >> q) & 1 == 1
        for c in gate.controls:
            mask &= (idx >> c) & 1 == 1
        out = np.zeros_like(amps)
        out[mask] = 1j * amps[mask]
        return out
    raise ValueError(f"gate {gate.name} has no differentiable parameter")


class _Derivatives:
    """Exact state plus first (and optionally second) derivative vectors."""

    def __init__(self, circuit: ParamCircuit, omega, input_state=None, second: bool = False):
        omega = np.asarray(omega, dtype=float)
        n = circuit.n_qubits
        bound = [gate.bound(omega) for gate in circuit.gates]
        m = len(bound)
        prefix = [_input_amps(circuit, input_state)]
        for gate in bound:
            prefix.append(apply_gate_vec(prefix[-1], gate, n))
        self.psi = prefix[-1]
        k = circuit.n_params
        positions = circuit.slot_positions()
        if -1 in positions:
            raise ValueError("every parameter slot must appear in the circuit")
        order = sorted(range(k), key=lambda i: positions[i])

        d1 = np.zeros((k, self.psi.size), dtype=complex)
        for i in range(k):
            p = positions[i]
            v = _apply_generator(bound[p], prefix[p + 1], n)
            for gi in range(p + 1, m):
                v = apply_gate_vec(v, bound[gi], n)
            d1[i] = v
        self.d1 = d1

        self.d2 = None
        if second:
            d2 = np.zeros((k, k, self.psi.size), dtype=complex)
            for a in range(k):
                i = order[a]
                pi = positions[i]
                base = _apply_generator(bound[pi], prefix[pi + 1], n)
                v = base
                gi = pi + 1
                for b in range(a, k):
                    j = order[b]
                    pj = positions[j]
                    while gi <= pj:
                        v = apply_gate_vec(v, bound[gi], n)
                        gi += 1
                    w = _apply_generator(bound[pj], v, n)
                    for gj in range(gi, m):
                        w = apply_gate_vec(w, bound[gj], n)
                    d2[i, j] = w
                    d2[j, i] = w
            self.d2 = d2


def state_derivatives(circuit: ParamCircuit, omega, input_state=None,
                      second: bool = False) -> _Derivatives:
    """Exact |psi>, |d_i psi> (and |d_i d_j psi>) statevectors."""
    return _Derivatives(circuit, omega, input_state, second)


# ---------------------------------------------------------------------------
# linear-combination circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LCJob:
    """One ancilla-augmented circuit whose observable expectation contributes
    ``coefficient * <observable>`` to the requested derivative quantity."""

    circuit: ParamCircuit
    observable: PauliSum
    coefficient: float


def _controlled_pauli(pauli: str, control: int, target: int) -> GateDescriptor:
    return {"X": g.cx, "Y": g.cy, "Z": g.cz}[pauli](control, target)


def _extend_obs(observable: PauliSum | None, n_total: int,
                ancilla_paulis: dict[int, str]) -> PauliSum:
    """Observable on the system padded with ancilla Paulis."""
    terms = []
    if observable is None:
        base = [(1.0, "I" * (n_total - len(ancilla_paulis)))]
    else:
        base = [(c, s.label) for c, s in observable.terms]
    for coeff, label in base:
        full = list(label) + ["I"] * (n_total - len(label))
        for q, p in ancilla_paulis.items():
            full[q] = p
        terms.append((coeff, PauliString("".join(full))))
    return PauliSum(tuple(terms))


def _lc_first_order_jobs(circuit: ParamCircuit, param_index: int,
                         observable: PauliSum, explicit: bool) -> list[LCJob]:
    """First-order LC circuits; ancilla prepared as (|0>+i|1>)/sqrt(2)."""
    n = circuit.n_qubits
    anc = n
    pos = circuit.slot_positions()[param_index]
    slot_gate = circuit.gates[pos]
    pauli = _generator_pauli(slot_gate)
    target = slot_gate.targets[0]
    prep = (g.h(anc), g.phase(anc, np.pi / 2.0))
    head = circuit.gates[:pos + 1]
    tail = circuit.gates[pos + 1:]
    insertion = (_controlled_pauli(pauli, anc, target),)
    if explicit:
        gate_list = prep + head + insertion + tail
        obs = _extend_obs(observable, n + 1, {anc: "X"})
        # gradient = 2 * Re(i <psi|O W M psi_in>) with generator coeff -1/2
        return [LCJob(ParamCircuit(n + 1, gate_list, circuit.n_params), obs, -1.0)]
    jobs = []
    for coeff, string in observable.terms:
        extra = []
        for q, p in enumerate(string.label):
            if p != "I":
                extra.append(GateDescriptor(
                    {"X": "CX", "Y": "CY", "Z": "CZ"}[p], (q,), (anc,)))
        # observable term applied on the ancilla-0 branch
        anti = (g.x(anc), *extra, g.x(anc))
        gate_list = prep + head + insertion + tail + anti
        obs = _extend_obs(None, n + 1, {anc: "X"})
        jobs.append(LCJob(ParamCircuit(n + 1, gate_list, circuit.n_params), obs, -coeff))
    return jobs


def _lc_second_order_jobs(circuit: ParamCircuit, i: int, j: int,
                          observable: PauliSum) -> list[LCJob]:
    """Second-order explicit LC circuit with two ancillas (alpha = pi/2)."""
    n = circuit.n_qubits
    a1, a2 = n, n + 1
    pos = circuit.slot_positions()
    (pi_, i_), (pj_, j_) = sorted([(pos[i], i), (pos[j], j)])
    gi, gj = circuit.gates[pi_], circuit.gates[pj_]
    prep = (g.h(a1), g.phase(a1, np.pi / 2.0), g.h(a2))
    head = circuit.gates[:pi_ + 1]
    mid = circuit.gates[pi_ + 1:pj_ + 1]
    tail = circuit.gates[pj_ + 1:]
    ins_i = (_controlled_pauli(_generator_pauli(gi), a1, gi.targets[0]),)
    ins_j = (_controlled_pauli(_generator_pauli(gj), a2, gj.targets[0]),)
    gate_list = prep + head + ins_i + mid + ins_j + tail
    obs = _extend_obs(observable, n + 2, {a1: "X", a2: "Y"})
    # measured value = -1/2 Re(T1 - T2); Hessian = 2 * (1/4) * Re(T1 - T2)
    return [LCJob(ParamCircuit(n + 2, gate_list, circuit.n_params), obs, -1.0)]


def _lc_metric_jobs(circuit: ParamCircuit, i: int, j: int) -> list[LCJob]:
    """Implicit-LC circuits for one Fubini-Study metric entry (alpha = 0).

    F_ij = jobs[0].coefficient * <jobs[0]> - 1/4 * <jobs[1]> * <jobs[2]>,
    where jobs[1] and jobs[2] read out the two generator expectations on
    their respective prefix states (values are real, so the Z part of the
    Z - iY readout suffices).
    """
    n = circuit.n_qubits
    anc = n
    pos = circuit.slot_positions()
    (pi_, _), (pj_, _) = sorted([(pos[i], i), (pos[j], j)])
    gi, gj = circuit.gates[pi_], circuit.gates[pj_]
    prep = (g.h(anc),)
    head = circuit.gates[:pi_ + 1]
    mid = circuit.gates[pi_ + 1:pj_ + 1]
    ins_i = (_controlled_pauli(_generator_pauli(gi), anc, gi.targets[0]),)
    # sigma_j applied on the ancilla-0 branch after the mid segment
    anti_j = (g.x(anc), _controlled_pauli(_generator_pauli(gj), anc, gj.targets[0]), g.x(anc))
    first = LCJob(ParamCircuit(n + 1, prep + head + ins_i + mid + anti_j, circuit.n_params),
                  _extend_obs(None, n + 1, {anc: "X"}), 0.25)
    jobs = [first]
    for pos_g, gate in ((pi_, gi), (pj_, gj)):
        head_g = circuit.gates[:pos_g + 1]
        ins = (_controlled_pauli(_generator_pauli(gate), anc, gate.targets[0]),)
        jobs.append(LCJob(ParamCircuit(n + 1, prep + head_g + ins, circuit.n_params),
                          _extend_obs(None, n + 1, {anc: "X"}), 1.0))
    return jobs


def lc_gradient_circuit(circuit: ParamCircuit, param_index, mode: str,
                        observable: PauliSum | None = None) -> list[LCJob]:
    """Build the ancilla-augmented linear-combination circuit(s).

    Modes: ``FirstImplicit``/``FirstExplicit`` (param_index: int),
    ``SecondExplicit`` and ``Metric`` (param_index: (i, j) pair).
    """
    if mode in ("FirstImplicit", "FirstExplicit"):
        if observable is None:
            raise ValueError("first-order modes need an observable")
        return _lc_first_order_jobs(circuit, int(param_index), observable,
                                    explicit=(mode == "FirstExplicit"))
    if mode == "SecondExplicit":
        if observable is None:
            raise ValueError("SecondExplicit needs an observable")
        i, j = param_index
        return _lc_second_order_jobs(circuit, i, j, observable)
    if mode == "Metric":
        i, j = param_index
        return _lc_metric_jobs(circuit, i, j)
    raise ValueError(f"unknown LC mode {mode!r}")


def _run_lc_jobs(jobs: list[LCJob], omega, input_state: StateVector | None,
                 n_system: int) -> float:
    total = 0.0
    for job in jobs:
        extra = job.circuit.n_qubits - n_system
        amps = _input_amps_with_ancillas(input_state, n_system, extra)
        psi = amps
        for gate in job.circuit.gates:
            psi = apply_gate_vec(psi, gate.bound(np.asarray(omega, dtype=float)),
                                 job.circuit.n_qubits)
        val = float(np.real(np.vdot(psi, job.observable.apply_vec(psi))))
        total += job.coefficient * val
    return total


def _input_amps_with_ancillas(input_state: StateVector | None, n_system: int,
                              n_extra: int) -> np.ndarray:
    base = (zero_state(n_system).amplitudes if input_state is None
            else input_state.amplitudes)
    amps = np.zeros(base.size * 2 ** n_extra, dtype=complex)
    amps[:base.size] = base  # ancillas (high qubits) start in |0>
    return amps


def _lc_metric_entry(circuit: ParamCircuit, i: int, j: int, omega,
                     input_state: StateVector | None) -> float:
    # the metric's second term is a product of two readouts, not a sum
    jobs = _lc_metric_jobs(circuit, i, j)
    n = circuit.n_qubits
    first = _run_lc_jobs(jobs[:1], omega, input_state, n)  # includes +1/4
    e_i = _run_lc_jobs(jobs[1:2], omega, input_state, n)
    e_j = _run_lc_jobs(jobs[2:3], omega, input_state, n)
    return first - 0.25 * e_i * e_j


def _lc_gradient(circuit, observable, omega, input_state, explicit: bool) -> np.ndarray:
    out = np.zeros(circuit.n_params)
    mode = "FirstExplicit" if explicit else "FirstImplicit"
    for i in range(circuit.n_params):
        jobs = lc_gradient_circuit(circuit, i, mode, observable)
        out[i] = _run_lc_jobs(jobs, omega, input_state, circuit.n_qubits)
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def grad_expectation(req: GradientRequest, omega, lc_mode: str = "FirstExplicit") -> np.ndarray:
    """d<O>/d w_i for every parameter."""
    circuit, obs, inp = req.circuit, req.observable, req.input_state
    omega = np.asarray(omega, dtype=float)
    if req.method == "direct":
        der = state_derivatives(circuit, omega, inp)
        opsi = obs.apply_vec(der.psi)
        return 2.0 * np.real(der.d1.conj() @ opsi)
    if req.method == "paramshift":
        _require_shiftable(circuit)
        s = req.shift
        out = np.zeros(circuit.n_params)
        for i in range(circuit.n_params):
            e_i = np.zeros_like(omega)
            e_i[i] = s
            plus = _expval(circuit, obs, omega + e_i, inp)
            minus = _expval(circuit, obs, omega - e_i, inp)
            out[i] = (plus - minus) / (2.0 * np.sin(s))
        return out
    _require_shiftable(circuit)
    return _lc_gradient(circuit, obs, omega, inp, explicit=(lc_mode == "FirstExplicit"))


def _require_shiftable(circuit: ParamCircuit) -> None:
    for gate in circuit.gates:
        if gate.param_slot is not None and gate.name not in _ROTATION_PAULI:
            raise ValueError(
                f"parameterized gate {gate.name} has no Pauli +-1/2 generator")


def hessian_expectation(req: GradientRequest, omega) -> np.ndarray:
    """Symmetric Hessian of <O> with respect to the circuit parameters."""
    circuit, obs, inp = req.circuit, req.observable, req.input_state
    omega = np.asarray(omega, dtype=float)
    k = circuit.n_params
    out = np.zeros((k, k))
    if req.method == "direct":
        der = state_derivatives(circuit, omega, inp, second=True)
        opsi = obs.apply_vec(der.psi)
        od1 = np.stack([obs.apply_vec(der.d1[j]) for j in range(k)])
        for i in range(k):
            for j in range(i, k):
                val = 2.0 * np.real(np.vdot(der.d1[i], od1[j])
                                    + np.vdot(der.psi, obs.apply_vec(der.d2[i, j])))
                out[i, j] = out[j, i] = val
        return out
    if req.method == "paramshift":
        _require_shiftable(circuit)
        s = req.shift
        denom = 4.0 * np.sin(s) ** 2
        for i in range(k):
            for j in range(i, k):
                pp = omega.copy(); pp[i] += s; pp[j] += s
                mm = omega.copy(); mm[i] -= s; mm[j] -= s
                pm = omega.copy(); pm[i] += s; pm[j] -= s
                mp = omega.copy(); mp[i] -= s; mp[j] += s
                val = (_expval(circuit, obs, pp, inp) + _expval(circuit, obs, mm, inp)
                       - _expval(circuit, obs, pm, inp) - _expval(circuit, obs, mp, inp)) / denom
                out[i, j] = out[j, i] = val
        return out
    _require_shiftable(circuit)
    for i in range(k):
        for j in range(i, k):
            jobs = lc_gradient_circuit(circuit, (i, j), "SecondExplicit", obs)
            val = _run_lc_jobs(jobs, omega, inp, circuit.n_qubits)
            out[i, j] = out[j, i] = val
    return out


def fubini_study(circuit: ParamCircuit, omega, method: str = "direct",
                 input_state: StateVector | None = None,
                 shift: float = np.pi / 2.0) -> MetricResult:
    """Fubini-Study metric F^Q; the QFIM is 4 F^Q."""
    omega = np.asarray(omega, dtype=float)
    k = circuit.n_params
    if method == "direct":
        der = state_derivatives(circuit, omega, input_state)
        gram = der.d1.conj() @ der.d1.T
        c = der.d1.conj() @ der.psi  # <d_i psi|psi>
        mat = np.real(gram - np.outer(c, c.conj()))
        return MetricResult(0.5 * (mat + mat.T))
    if method == "paramshift":
        _require_shiftable(circuit)
        psi0 = simulate(circuit, omega, input_state).amplitudes

        def overlap_sq(w):
            psi = simulate(circuit, w, input_state).amplitudes
            return abs(np.vdot(psi0, psi)) ** 2

        s = shift
        denom = 4.0 * np.sin(s) ** 2
        mat = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                pp = omega.copy(); pp[i] += s; pp[j] += s
                mm = omega.copy(); mm[i] -= s; mm[j] -= s
                pm = omega.copy(); pm[i] += s; pm[j] -= s
                mp = omega.copy(); mp[i] -= s; mp[j] += s
                d2 = (overlap_sq(pp) + overlap_sq(mm) - overlap_sq(pm) - overlap_sq(mp)) / denom
                mat[i, j] = mat[j, i] = -0.5 * d2
        return MetricResult(mat)
    if method == "lincomb":
        _require_shiftable(circuit)
        mat = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                mat[i, j] = mat[j, i] = _lc_metric_entry(circuit, i, j, omega, input_state)
        return MetricResult(mat)
    raise ValueError(f"method must be one of {METHODS}")


def grad_probabilities(circuit: ParamCircuit, omega,
                       input_state: StateVector | None = None,
                       method: str = "paramshift") -> np.ndarray:
    """Row i = d p_b / d w_i over all basis states b; rows sum to zero."""
    omega = np.asarray(omega, dtype=float)
    if method == "direct":
        der = state_derivatives(circuit, omega, input_state)
        return 2.0 * np.real(der.d1 * der.psi.conj()[None, :])
    if method != "paramshift":
        raise ValueError("grad_probabilities supports 'paramshift' and 'direct'")
    _require_shiftable(circuit)
    k = circuit.n_params
    out = np.zeros((k, 2 ** circuit.n_qubits))
    for i in range(k):
        e_i = np.zeros_like(omega)
        e_i[i] = np.pi / 2.0
        p_plus = np.abs(simulate(circuit, omega + e_i, input_state).amplitudes) ** 2
        p_minus = np.abs(simulate(circuit, omega - e_i, input_state).amplitudes) ** 2
        out[i] = (p_plus - p_minus) / 2.0
    return out


def qng_step(omega, grad, metric: MetricResult, eta: float,
             rcond: float = 1e-8) -> np.ndarray:
    """Quantum-natural-gradient update w - eta pinv(F^Q) grad."""
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    omega = np.asarray(omega, dtype=float)
    grad = np.asarray(grad, dtype=float)
    return omega - eta * (np.linalg.pinv(metric.matrix, rcond=rcond) @ grad)
