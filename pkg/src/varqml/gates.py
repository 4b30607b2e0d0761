"""Gate descriptors shared by the statevector engine and the circuit library.

Qubit ordering is little-endian throughout the package: qubit 0 is the least
significant bit of a basis-state index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Gates with a 2x2 target unitary, possibly controlled.
SINGLE_QUBIT_GATES = {"RX", "RY", "RZ", "X", "H", "PHASE"}
# Gate names accepted by the simulator.
GATE_NAMES = SINGLE_QUBIT_GATES | {"CX", "CY", "CZ", "CRY", "CPHASE", "UCRY", "CMPGT"}
# Gates that consume one rotation angle (fixed or a parameter slot).
PARAMETRIC_GATES = {"RX", "RY", "RZ", "PHASE", "CRY", "CPHASE"}


@dataclass(frozen=True)
class GateDescriptor:
    """One gate of a circuit.

    ``targets`` holds the acted-on qubit(s); ``controls`` the control qubits
    (state |1> activates). Rotation gates carry either a fixed ``angle`` in
    radians or a ``param_slot`` index into the circuit's parameter vector.
    ``UCRY`` is a uniformly-controlled RY: ``angles[p]`` is applied to the
    target when the control qubits spell the bit pattern ``p`` (controls[0]
    is the least significant pattern bit). ``CMPGT`` flips the target iff the
    integer spelled by ``controls`` exceeds ``threshold``.
    """

    name: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    param_slot: int | None = None
    angle: float | None = None
    angles: tuple[float, ...] = field(default=())
    threshold: int | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise ValueError(f"unknown gate name {self.name!r}")
        if self.name in PARAMETRIC_GATES:
            if (self.param_slot is None) == (self.angle is None):
                raise ValueError(f"{self.name} needs exactly one of param_slot/angle")
        if self.name == "UCRY" and not self.angles:
            raise ValueError("UCRY needs a non-empty angle table")
        if self.name == "CMPGT" and self.threshold is None:
            raise ValueError("CMPGT needs a threshold")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def bound(self, omega) -> "GateDescriptor":
        """Resolve the parameter slot against a parameter vector."""
        if self.param_slot is None:
            return self
        return GateDescriptor(
            self.name, self.targets, self.controls,
            param_slot=None, angle=float(omega[self.param_slot]),
            angles=self.angles, threshold=self.threshold,
        )


def rx(q: int, *, slot: int | None = None, angle: float | None = None) -> GateDescriptor:
    return GateDescriptor("RX", (q,), param_slot=slot, angle=angle)


def ry(q: int, *, slot: int | None = None, angle: float | None = None) -> GateDescriptor:
    return GateDescriptor("RY", (q,), param_slot=slot, angle=angle)


def rz(q: int, *, slot: int | None = None, angle: float | None = None) -> GateDescriptor:
    return GateDescriptor("RZ", (q,), param_slot=slot, angle=angle)


def x(q: int) -> GateDescriptor:
    return GateDescriptor("X", (q,))


def h(q: int) -> GateDescriptor:
    return GateDescriptor("H", (q,))


def phase(q: int, angle: float) -> GateDescriptor:
    return GateDescriptor("PHASE", (q,), angle=angle)


def cx(control: int, target: int) -> GateDescriptor:
    return GateDescriptor("CX", (target,), (control,))


def cy(control: int, target: int) -> GateDescriptor:
    return GateDescriptor("CY", (target,), (control,))


def cz(control: int, target: int) -> GateDescriptor:
    return GateDescriptor("CZ", (target,), (control,))


def cry(control: int, target: int, *, slot: int | None = None,
        angle: float | None = None) -> GateDescriptor:
    return GateDescriptor("CRY", (target,), (control,), param_slot=slot, angle=angle)


def ucry(controls: tuple[int, ...], target: int, angles) -> GateDescriptor:
    return GateDescriptor("UCRY", (target,), tuple(controls), angles=tuple(angles))


def cmpgt(state_qubits: tuple[int, ...], target: int, threshold: int) -> GateDescriptor:
    return GateDescriptor("CMPGT", (target,), tuple(state_qubits), threshold=threshold)
