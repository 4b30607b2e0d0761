"""Benchmark Hamiltonians used across the test and experiment suites."""

from __future__ import annotations

from .operators import PauliSum, pauli_sum


def illustrative() -> PauliSum:
    """Two-qubit toy model Z(x)X + X(x)Z + 3 Z(x)Z."""
    return pauli_sum([(1.0, "ZX"), (1.0, "XZ"), (3.0, "ZZ")])


def ising_chain(n: int = 3, j: float = -0.5, g: float = -0.5) -> PauliSum:
    """Transverse-field Ising model -J(sum ZZ + g sum X) on an open chain."""
    terms = []
    for i in range(n - 1):
        lbl = ["I"] * n
        lbl[i] = lbl[i + 1] = "Z"
        terms.append((-j, "".join(lbl)))
    for i in range(n):
        lbl = ["I"] * n
        lbl[i] = "X"
        terms.append((-j * g, "".join(lbl)))
    return pauli_sum(terms)


def hydrogen() -> PauliSum:
    """Two-qubit hydrogen-molecule approximation."""
    return pauli_sum([
        (0.2252, "II"),
        (0.5716, "ZZ"),
        (0.3435, "IZ"),
        (-0.4347, "ZI"),
        (0.0910, "YY"),
        (0.0910, "XX"),
    ])


def gibbs_h1() -> PauliSum:
    return pauli_sum([(1.0, "Z")])


def gibbs_h2() -> PauliSum:
    return pauli_sum([
        (1.0, "ZZ"), (-0.2, "ZI"), (-0.2, "IZ"), (0.3, "XI"), (0.3, "IX"),
    ])


def gibbs_h3() -> PauliSum:
    return pauli_sum([(2.0, "ZZI"), (1.0, "IZZ"), (-0.5, "IZI")])


def gibbs_h4() -> PauliSum:
    return pauli_sum([(2.0, "ZZII"), (1.0, "IZZI"), (-0.5, "IZIZ")])


def gibbs_h5() -> PauliSum:
    return pauli_sum([(2.0, "ZZIII"), (1.0, "IZZII"), (-0.5, "IZIIZ")])


BY_NAME = {
    "h_illustrative": illustrative,
    "h_ising": ising_chain,
    "h_hydrogen": hydrogen,
    "h1": gibbs_h1,
    "h2": gibbs_h2,
    "h3": gibbs_h3,
    "h4": gibbs_h4,
    "h5": gibbs_h5,
}
