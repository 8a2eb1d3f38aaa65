"""Dense complex linear algebra for small qubit registers (dim <= 32).

Register convention: qubit A (index 0) is the most significant bit of the
basis index, so |101> is basis index 5.  All embeddings, partial traces and
correlators in the package rely on this ordering.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

QUBIT_LETTERS = "ABCDEFGH"

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


def n_qubits_of(dim: int) -> int:
    """Number of qubits for a register dimension; dim must be a power of two."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def qubit_pairs(n: int) -> tuple[tuple[int, int], ...]:
    """Unordered qubit pairs (a, b) with a < b, in lexicographic order."""
    return tuple((a, b) for a in range(n) for b in range(a + 1, n))


def subset_label(subset: Sequence[int]) -> str:
    """Letter label of a qubit subset, e.g. (0, 2) -> 'AC'."""
    return "".join(QUBIT_LETTERS[q] for q in sorted(subset))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with complex dtype."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def kron_all(ops: Iterable[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for op in ops:
        out = kron(out, op)
    return out


def embed_single(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator at `qubit` (identity elsewhere)."""
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n}-qubit register")
    ops = [IDENTITY_2] * n
    ops[qubit] = op
    return kron_all(ops)


def hermiticity_defect(m: np.ndarray) -> float:
    """Max entrywise |M - M^dagger|."""
    return float(np.abs(m - m.conj().T).max())


class PureState:
    """Normalized state vector of a qubit register.

    Amplitudes are normalized on construction; a zero vector is rejected.
    """

    __slots__ = ("vector",)

    def __init__(self, amplitudes):
        v = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm < NORM_TOL:
            raise ValueError("cannot normalize a (near-)zero state vector")
        self.vector = v / norm
        self.vector.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.dim)

    def density(self) -> "DensityMatrix":
        """Projector |psi><psi| as a density matrix."""
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), check=False)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.vector, other.vector))

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite register state.

    Invariants checked on construction (check=True): Hermiticity defect
    < 1e-10, |trace - 1| < 1e-10, eigenvalues >= -1e-10.  Internal code
    that produces states already satisfying the invariants (pure
    projectors, integrator output) may skip the check.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True):
        m = np.ascontiguousarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if check:
            defect = hermiticity_defect(m)
            if defect >= HERM_TOL:
                raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
            tr = np.trace(m)
            if abs(tr - 1.0) >= TRACE_TOL:
                raise ValueError(f"trace is {tr}, expected 1")
            lo = float(np.linalg.eigvalsh(m).min())
            if lo < -PSD_TOL:
                raise ValueError(f"matrix is not PSD (min eigenvalue {lo:.3e})")
        self.matrix = m
        self.matrix.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.dim)

    def purity(self) -> float:
        """Tr(rho^2); 1 for pure states."""
        return float(np.vdot(self.matrix, self.matrix).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


def expectation(rho: DensityMatrix, m: np.ndarray) -> float:
    """Re Tr(rho m) for a Hermitian observable m.

    Raises if dimensions mismatch, m is visibly non-Hermitian, or the
    imaginary part of the trace exceeds 1e-9.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != rho.matrix.shape:
        raise ValueError(f"dimension mismatch: state {rho.matrix.shape}, observable {m.shape}")
    if hermiticity_defect(m) >= 1e-8:
        raise ValueError("observable is not Hermitian")
    tr = complex(np.trace(rho.matrix @ m))
    if abs(tr.imag) >= 1e-9:
        raise ValueError(f"expectation has imaginary part {tr.imag:.3e}")
    return tr.real


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the kept qubits (original order preserved)."""
    n = rho.n_qubits
    requested = [int(q) for q in keep]
    kept = sorted(set(requested))
    if not kept:
        raise ValueError("must keep at least one qubit")
    if len(kept) != len(requested):
        raise ValueError(f"duplicate qubits in keep set {requested}")
    if kept[0] < 0 or kept[-1] >= n:
        raise ValueError(f"keep set {kept} out of range for {n} qubits")

    tensor = rho.matrix.reshape((2,) * (2 * n))
    traced = [q for q in range(n) if q not in kept]
    # contract row/column axes of each traced qubit, highest axis first
    for q in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=q, axis2=q + tensor.ndim // 2)
    d = 2 ** len(kept)
    return DensityMatrix(tensor.reshape(d, d), check=False)


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending."""
    m = np.asarray(m, dtype=np.complex128)
    defect = hermiticity_defect(m)
    if defect >= 1e-8:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh(m)[::-1].copy()
