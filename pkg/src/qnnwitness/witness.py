"""Network outputs: squared final-time multi-qubit sigma_z correlators.

For every qubit subset S with |S| >= 2, in canonical order (ascending
size, then lexicographic: AB, AC, ..., DE, ABC, ..., ABCDE), the output is

    O_S = ( Tr[ rho(t_final) * prod_{q in S} sigma_z(q) ] )^2

Each correlator operator is diagonal with entries +-1 (the parity of the
selected bits), so every output lies in [0, 1].
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from .dynamics import ANGULAR_MHZ, PAPER_SCHEDULE, QnnParameters, Schedule, UnitConvention, evolve, register
from .linalg import DensityMatrix, subset_label


@lru_cache(maxsize=None)
def canonical_subsets(n: int) -> tuple[tuple[int, ...], ...]:
    """All qubit subsets of size >= 2, ascending size then lexicographic."""
    if n < 2:
        raise ValueError("need at least two qubits for correlator outputs")
    out: list[tuple[int, ...]] = []
    for size in range(2, n + 1):
        out.extend(combinations(range(n), size))
    return tuple(out)


def n_outputs(n: int) -> int:
    return (1 << n) - n - 1


@lru_cache(maxsize=None)
def parity_table(n: int) -> np.ndarray:
    """(n_outputs, dim) matrix of +-1 correlator diagonals, canonical order."""
    reg = register(n)
    rows = []
    for subset in canonical_subsets(n):
        d = np.ones(1 << n)
        for q in subset:
            d = d * reg.z_diag[q]
        rows.append(d)
    table = np.array(rows)
    table.flags.writeable = False
    return table


def correlator_operator(subset: tuple[int, ...], n: int) -> np.ndarray:
    """Dense diagonal operator: sigma_z on the subset, identity elsewhere."""
    qubits = sorted(set(int(q) for q in subset))
    if len(qubits) < 2 or qubits[0] < 0 or qubits[-1] >= n:
        raise ValueError(f"invalid correlator subset {subset} for {n} qubits")
    reg = register(n)
    d = np.ones(1 << n)
    for q in qubits:
        d = d * reg.z_diag[q]
    return np.diag(d).astype(np.complex128)


class WitnessVector:
    """Outputs O_S for every canonical subset of one register."""

    __slots__ = ("n_qubits", "values")

    def __init__(self, n_qubits: int, values):
        vals = np.asarray(values, dtype=np.float64)
        if vals.shape != (n_outputs(n_qubits),):
            raise ValueError(
                f"expected {n_outputs(n_qubits)} outputs for {n_qubits} qubits, "
                f"got shape {vals.shape}"
            )
        if vals.min() < -1e-9 or vals.max() > 1.0 + 1e-9:
            raise ValueError(f"outputs outside [0, 1]: min {vals.min()}, max {vals.max()}")
        self.n_qubits = n_qubits
        self.values = vals
        self.values.flags.writeable = False

    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return canonical_subsets(self.n_qubits)

    def labels(self) -> list[str]:
        return [subset_label(s) for s in self.subsets()]

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, key) -> float:
        if isinstance(key, (int, np.integer)):
            return float(self.values[key])
        if isinstance(key, str):
            subset = tuple(sorted("ABCDE".index(ch) for ch in key.upper()))
        else:
            subset = tuple(sorted(int(q) for q in key))
        return float(self.values[self.subsets().index(subset)])

    def by_size(self, size: int) -> np.ndarray:
        """Outputs of all subsets with exactly `size` qubits."""
        sel = [i for i, s in enumerate(self.subsets()) if len(s) == size]
        return self.values[sel]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels(), self.values.tolist()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{l}={v:.4f}" for l, v in self.as_dict().items())
        return f"WitnessVector({inner})"


def witness_outputs(rho_final: DensityMatrix) -> WitnessVector:
    """Squared sigma_z correlators of a final state, canonical order."""
    n = rho_final.n_qubits
    diag = np.diag(rho_final.matrix).real
    expectations = parity_table(n) @ diag
    return WitnessVector(n, expectations**2)


def evaluate(
    rho0: DensityMatrix,
    params: QnnParameters,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
) -> WitnessVector:
    """Full inference path: evolve the input, then read out the witness."""
    return witness_outputs(evolve(rho0, params, schedule, convention))
