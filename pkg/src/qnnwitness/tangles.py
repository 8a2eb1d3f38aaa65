"""Analytic entanglement measures used to benchmark the trained witness.

Wootters concurrence for two-qubit density matrices, the pairwise tangle
(squared concurrence of a reduced pair), and the residual three-tangle of
pure three-qubit states.  The spin flip conjugates in the fixed
computational basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DensityMatrix, PureState, kron, partial_trace, qubit_pairs, subset_label, SIGMA_Y

_YY = kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho2: DensityMatrix) -> float:
    """max(0, l1 - l2 - l3 - l4) with l_i the descending square roots of
    the eigenvalues of rho * (Y x Y) rho^* (Y x Y)."""
    if rho2.dim != 4:
        raise ValueError(f"concurrence needs a two-qubit state, got dim {rho2.dim}")
    rho = rho2.matrix
    rho_tilde = _YY @ rho.conj() @ _YY
    lams = np.linalg.eigvals(rho @ rho_tilde)
    # the product has real non-negative spectrum up to roundoff
    lams = np.sqrt(np.clip(lams.real, 0.0, None))
    lams[::-1].sort()
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def pairwise_tangle(state: DensityMatrix, pair: tuple[int, int], n: int) -> float:
    """Squared concurrence of the reduced state on `pair`."""
    a, b = pair
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"invalid pair {pair} for {n} qubits")
    if state.n_qubits != n:
        raise ValueError(f"state has {state.n_qubits} qubits, expected {n}")
    return concurrence(partial_trace(state, (min(a, b), max(a, b)))) ** 2


def one_tangle(state: DensityMatrix, qubit: int) -> float:
    """4 det of the single-qubit reduced state: tangle of qubit vs rest
    (for pure states)."""
    red = partial_trace(state, (qubit,))
    return float(4.0 * np.linalg.det(red.matrix).real)


def residual_3tangle(psi: PureState) -> float:
    """Three-way tangle tau_A(BC) - tau_AB - tau_AC of a pure 3-qubit state."""
    if psi.dim != 8:
        raise ValueError(f"residual tangle needs a three-qubit state, got dim {psi.dim}")
    norm = float(np.linalg.norm(psi.vector))
    if abs(norm - 1.0) >= 1e-10:
        raise ValueError(f"state norm is {norm}, expected 1")
    rho = psi.density()
    tau = one_tangle(rho, 0) - pairwise_tangle(rho, (0, 1), 3) - pairwise_tangle(rho, (0, 2), 3)
    if tau < -1e-9 or tau > 1.0 + 1e-9:
        raise ValueError(f"residual tangle {tau} outside [0, 1]")
    return float(min(max(tau, 0.0), 1.0))


@dataclass(frozen=True)
class TangleReport:
    """Pairwise tangles per qubit pair, plus the residual three-tangle
    when defined (pure three-qubit states)."""

    n_qubits: int
    pairwise: dict[tuple[int, int], float]
    residual: float | None

    def lines(self) -> list[str]:
        out = [f"tau_{subset_label(p)} = {v:.6f}" for p, v in self.pairwise.items()]
        if self.residual is not None:
            out.append(f"tau_3 = {self.residual:.6f}")
        return out


def tangle_report(state: PureState | DensityMatrix) -> TangleReport:
    if isinstance(state, PureState):
        rho = state.density()
        pure = True
    else:
        rho = state
        pure = abs(rho.purity() - 1.0) < 1e-9
    n = rho.n_qubits
    pairwise = {p: pairwise_tangle(rho, p, n) for p in qubit_pairs(n)}
    residual = None
    if n == 3 and pure:
        if isinstance(state, PureState):
            psi = state
        else:
            # principal eigenvector of a (numerically) pure density matrix
            w, v = np.linalg.eigh(rho.matrix)
            psi = PureState(v[:, -1])
        residual = residual_3tangle(psi)
    return TangleReport(n_qubits=n, pairwise=pairwise, residual=residual)
