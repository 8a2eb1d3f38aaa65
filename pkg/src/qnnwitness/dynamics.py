"""Register Hamiltonian and coherent time evolution.

The Hamiltonian of the N-qubit network is

    H = sum_a K_a sigma_x(a) + eps_a sigma_z(a)
        + sum_{a<b} zeta_ab sigma_z(a) sigma_z(b)

with tunneling amplitudes K, biases eps and symmetric pair couplings zeta
held constant within each time chunk.  Tabulated parameter values are
frequencies in MHz; time is in ns; hbar = 1.  A UnitConvention converts a
parameter value f to an angular frequency omega = angular_factor * f in
rad/ns.  The default treats parameter values as linear frequencies
(angular_factor = 2*pi*1e-3); the alternative reads them as angular
frequencies in rad/us (angular_factor = 1e-3).  Each unordered pair (a, b)
contributes exactly one sigma_z sigma_z term with coefficient zeta_ab;
set double_count_pairs to apply 2*zeta_ab instead.

Evolution integrates drho/dt = -i[H, rho] with classic fixed-step RK4.
Gradients of a terminal cost with respect to every chunk parameter come
from an exact reverse-mode sweep of the discrete RK4 map (evolve_adjoint),
so they agree with finite differences of the integrated cost to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .linalg import DensityMatrix, n_qubits_of, qubit_pairs

SCHEDULE_TOL = 1e-9


@dataclass(frozen=True)
class UnitConvention:
    """Conversion from tabulated parameter values to rad/ns."""

    angular_factor: float = 2.0e-3 * math.pi
    double_count_pairs: bool = False

    def __post_init__(self):
        if not (self.angular_factor > 0.0 and math.isfinite(self.angular_factor)):
            raise ValueError(f"angular_factor must be positive, got {self.angular_factor}")


ANGULAR_MHZ = UnitConvention(angular_factor=2.0e-3 * math.pi)
LINEAR_MHZ = UnitConvention(angular_factor=1.0e-3)

CONVENTIONS = {"angular": ANGULAR_MHZ, "linear": LINEAR_MHZ}


def params_per_chunk(n_qubits: int) -> int:
    return 2 * n_qubits + n_qubits * (n_qubits - 1) // 2


@dataclass(frozen=True)
class ChunkParams:
    """Hamiltonian parameters of one time chunk, in MHz.

    zeta is indexed over unordered pairs in lexicographic order,
    (0,1), (0,2), ..., (1,2), ... matching qubit_pairs().
    """

    k: np.ndarray
    eps: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        for name in ("k", "eps", "zeta"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = self.k.shape[0]
        if self.eps.shape[0] != n:
            raise ValueError(f"eps has {self.eps.shape[0]} entries, expected {n}")
        if self.zeta.shape[0] != n * (n - 1) // 2:
            raise ValueError(
                f"zeta has {self.zeta.shape[0]} entries, expected {n * (n - 1) // 2}"
            )

    @property
    def n_qubits(self) -> int:
        return self.k.shape[0]

    def to_vector(self) -> np.ndarray:
        """Flat layout [K..., eps..., zeta...]."""
        return np.concatenate([self.k, self.eps, self.zeta])

    @classmethod
    def from_vector(cls, vec: np.ndarray, n_qubits: int) -> "ChunkParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (params_per_chunk(n_qubits),):
            raise ValueError(
                f"expected {params_per_chunk(n_qubits)} values for {n_qubits} qubits, "
                f"got shape {vec.shape}"
            )
        n = n_qubits
        return cls(k=vec[:n], eps=vec[n : 2 * n], zeta=vec[2 * n :])

    @classmethod
    def zeros(cls, n_qubits: int) -> "ChunkParams":
        return cls.from_vector(np.zeros(params_per_chunk(n_qubits)), n_qubits)


@dataclass(frozen=True)
class QnnParameters:
    """The network weights: one ChunkParams per time chunk."""

    n_qubits: int
    chunks: tuple[ChunkParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "chunks", tuple(self.chunks))
        if not self.chunks:
            raise ValueError("need at least one chunk")
        for c in self.chunks:
            if c.n_qubits != self.n_qubits:
                raise ValueError(
                    f"chunk sized for {c.n_qubits} qubits in a {self.n_qubits}-qubit parameter set"
                )

    @property
    def n_chunks(self) -> int:
        return len(self.chunks)

    def to_array(self) -> np.ndarray:
        """(n_chunks, params_per_chunk) copy in [K, eps, zeta] layout."""
        return np.stack([c.to_vector() for c in self.chunks])

    @classmethod
    def from_array(cls, arr: np.ndarray, n_qubits: int) -> "QnnParameters":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("parameter array must be 2-D (chunks x params)")
        return cls(
            n_qubits=n_qubits,
            chunks=tuple(ChunkParams.from_vector(row, n_qubits) for row in arr),
        )

    @classmethod
    def constant(cls, n_qubits: int, n_chunks: int, k: float = 0.0) -> "QnnParameters":
        """All chunks identical: K = k on every qubit, eps = zeta = 0."""
        vec = np.zeros(params_per_chunk(n_qubits))
        vec[:n_qubits] = k
        return cls.from_array(np.tile(vec, (n_chunks, 1)), n_qubits)


@dataclass(frozen=True)
class Schedule:
    """Total evolution time, chunk count and integrator step, all in ns."""

    t_final: float = 300.0
    n_chunks: int = 4
    dt: float = 0.05

    def __post_init__(self):
        if self.t_final <= 0 or self.dt <= 0 or self.n_chunks < 1:
            raise ValueError(f"invalid schedule {self}")
        chunk = self.t_final / self.n_chunks
        steps = round(chunk / self.dt)
        if steps < 1 or abs(steps * self.dt - chunk) > SCHEDULE_TOL:
            raise ValueError(
                f"chunk duration {chunk} ns is not an integer multiple of dt={self.dt} ns"
            )

    @property
    def steps_per_chunk(self) -> int:
        return round(self.t_final / self.n_chunks / self.dt)

    @property
    def n_steps(self) -> int:
        return self.steps_per_chunk * self.n_chunks


PAPER_SCHEDULE = Schedule(t_final=300.0, n_chunks=4, dt=0.05)
COARSE_SCHEDULE = Schedule(t_final=300.0, n_chunks=4, dt=0.5)


@dataclass(frozen=True)
class _Register:
    """Cached per-register operator pieces (MSB-first qubit ordering)."""

    n: int
    x_ops: np.ndarray  # (n, dim, dim) complex, sigma_x embeddings
    z_diag: np.ndarray  # (n, dim) float, sigma_z diagonals
    zz_diag: np.ndarray  # (n*(n-1)/2, dim) float, pair products
    flip: np.ndarray  # (n, dim) int64, index after flipping one bit
    zsig: np.ndarray  # z_diag stacked over zz_diag, for the adjoint kernel


@lru_cache(maxsize=None)
def register(n: int) -> _Register:
    if n < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << n
    idx = np.arange(dim)
    z_diag = np.empty((n, dim))
    flip = np.empty((n, dim), dtype=np.int64)
    x_ops = np.zeros((n, dim, dim), dtype=np.complex128)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        z_diag[q] = 1.0 - 2.0 * ((idx & bit) > 0)
        flip[q] = idx ^ bit
        x_ops[q][idx, flip[q]] = 1.0
    pairs = qubit_pairs(n)
    zz_diag = np.empty((len(pairs), dim))
    for p, (a, b) in enumerate(pairs):
        zz_diag[p] = z_diag[a] * z_diag[b]
    zsig = np.ascontiguousarray(np.vstack([z_diag, zz_diag]))
    return _Register(n=n, x_ops=x_ops, z_diag=z_diag, zz_diag=zz_diag, flip=flip, zsig=zsig)


def build_hamiltonian(
    params: ChunkParams, n_qubits: int, convention: UnitConvention = ANGULAR_MHZ
) -> np.ndarray:
    """Dense 2^n x 2^n Hamiltonian of one chunk, in rad/ns."""
    if params.n_qubits != n_qubits:
        raise ValueError(
            f"parameters sized for {params.n_qubits} qubits, register has {n_qubits}"
        )
    reg = register(n_qubits)
    h = np.tensordot(params.k.astype(np.complex128), reg.x_ops, axes=1)
    zeta = 2.0 * params.zeta if convention.double_count_pairs else params.zeta
    diag = params.eps @ reg.z_diag + zeta @ reg.zz_diag
    h[np.diag_indices_from(h)] += diag
    return np.ascontiguousarray(convention.angular_factor * h)


@dataclass(frozen=True)
class Trajectory:
    """States at every integrator step of one forward run."""

    states: np.ndarray  # (n_steps + 1, dim, dim) complex
    schedule: Schedule
    n_qubits: int

    def __len__(self) -> int:
        return self.states.shape[0]


def _check_evolve_args(rho0: DensityMatrix, params: QnnParameters, schedule: Schedule):
    if params.n_chunks != schedule.n_chunks:
        raise ValueError(
            f"parameters have {params.n_chunks} chunks, schedule expects {schedule.n_chunks}"
        )
    if rho0.n_qubits != params.n_qubits:
        raise ValueError(
            f"state has {rho0.n_qubits} qubits, parameters have {params.n_qubits}"
        )


def _hamiltonians(params: QnnParameters, convention: UnitConvention) -> np.ndarray:
    return np.stack(
        [build_hamiltonian(c, params.n_qubits, convention) for c in params.chunks]
    )


def evolve(
    rho0: DensityMatrix,
    params: QnnParameters,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
) -> DensityMatrix:
    """rho(t_final) under the chunked Hamiltonian, fixed-step RK4."""
    _check_evolve_args(rho0, params, schedule)
    hams = _hamiltonians(params, convention)
    final = _kernels.rk4_evolve(rho0.matrix, hams, schedule.steps_per_chunk, schedule.dt)
    return DensityMatrix(final, check=False)


def evolve_with_trajectory(
    rho0: DensityMatrix,
    params: QnnParameters,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
) -> tuple[DensityMatrix, Trajectory]:
    """Like evolve, additionally retaining the state at every step."""
    _check_evolve_args(rho0, params, schedule)
    hams = _hamiltonians(params, convention)
    dim = rho0.dim
    states = np.empty((schedule.n_steps + 1, dim, dim), dtype=np.complex128)
    final = _kernels.rk4_evolve_traj(
        rho0.matrix, hams, schedule.steps_per_chunk, schedule.dt, states
    )
    traj = Trajectory(states=states, schedule=schedule, n_qubits=params.n_qubits)
    return DensityMatrix(final, check=False), traj


def evolve_adjoint(
    lambda_f: np.ndarray,
    params: QnnParameters,
    schedule: Schedule,
    convention: UnitConvention,
    trajectory: Trajectory,
) -> np.ndarray:
    """Gradient of a terminal cost with respect to every chunk parameter.

    lambda_f is the Hermitian cost sensitivity dJ/drho(t_final).  Returns
    an (n_chunks, params_per_chunk) array of dJ/dp in the [K, eps, zeta]
    layout of ChunkParams.to_vector(), in cost units per MHz.  The
    trajectory must come from a forward run with the same parameters and
    schedule.
    """
    lam = np.ascontiguousarray(lambda_f, dtype=np.complex128)
    dim = 1 << params.n_qubits
    if lam.shape != (dim, dim):
        raise ValueError(f"lambda_f has shape {lam.shape}, expected {(dim, dim)}")
    if trajectory.n_qubits != params.n_qubits or trajectory.schedule != schedule:
        raise ValueError("trajectory does not match the given parameters/schedule")
    if trajectory.states.shape[0] != schedule.n_steps + 1:
        raise ValueError("trajectory length does not match the schedule")
    hams = _hamiltonians(params, convention)
    reg = register(params.n_qubits)
    grad = np.zeros((params.n_chunks, params_per_chunk(params.n_qubits)))
    _kernels.rk4_adjoint(
        lam,
        hams,
        trajectory.states,
        schedule.steps_per_chunk,
        schedule.dt,
        reg.flip,
        reg.zsig,
        grad,
    )
    grad *= convention.angular_factor
    if convention.double_count_pairs:
        grad[:, 2 * params.n_qubits :] *= 2.0
    return grad
