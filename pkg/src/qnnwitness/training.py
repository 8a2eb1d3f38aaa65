"""Staged training of the witness parameters by gradient descent.

The training ladder grows with the register: stage 1 trains the 2-qubit
pairwise witness; stages 2-3 the 3-qubit system (pairwise, then + GHZ_3);
stages 4-6 the 4-qubit system (pairwise, + the four GHZ_3, + GHZ_4);
stages 7-10 the 5-qubit system (pairwise, + ten GHZ_3, + five GHZ_4,
+ GHZ_5).  Each stage's cost sums squared output errors over the outputs
that stage trains (pairwise stages train only the pairwise outputs, etc.);
untrained outputs are still computed and reported but carry no cost.

Pairwise targets per input column: bell -> 1 on its own pair output,
flat -> 0, corr -> 0, p -> 0.44; every other trained output 0.  Each GHZ
state targets 1 on its own subset output and 0 elsewhere.

Moving to a larger register copies the newest qubit's parameters from the
highest-index existing qubit (bootstrap), so trained structure carries
over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    ANGULAR_MHZ,
    PAPER_SCHEDULE,
    ChunkParams,
    QnnParameters,
    Schedule,
    UnitConvention,
    evolve_adjoint,
    evolve_with_trajectory,
)
from .linalg import DensityMatrix, qubit_pairs, subset_label
from .witness import WitnessVector, canonical_subsets, n_outputs, parity_table

P_TARGET = 0.44

STAGE_QUBITS = {1: 2, 2: 3, 3: 3, 4: 4, 5: 4, 6: 4, 7: 5, 8: 5, 9: 5, 10: 5}

# largest correlator size carrying a target at each stage
_STAGE_MAX_SIZE = {1: 2, 2: 2, 3: 3, 4: 2, 5: 3, 6: 4, 7: 2, 8: 3, 9: 4, 10: 5}

DEFAULT_LEARNING_RATE = 0.005
DEFAULT_INITIAL_K = 2.5


def stage_qubits(stage: int) -> int:
    if stage not in STAGE_QUBITS:
        raise ValueError(f"stage must be 1..10, got {stage}")
    return STAGE_QUBITS[stage]


@dataclass(frozen=True)
class TrainingPair:
    """An input state and a target for every canonical output."""

    label: str
    rho0: DensityMatrix
    targets: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.targets, dtype=np.float64)
        if t.shape != (n_outputs(self.rho0.n_qubits),):
            raise ValueError(
                f"targets shape {t.shape} does not match "
                f"{n_outputs(self.rho0.n_qubits)} outputs"
            )
        if t.min() < 0.0 or t.max() > 1.0:
            raise ValueError("targets must lie in [0, 1]")
        t.flags.writeable = False
        object.__setattr__(self, "targets", t)


@dataclass(frozen=True)
class TrainingSet:
    """Ordered training pairs plus the mask of outputs the stage trains."""

    n_qubits: int
    pairs: tuple[TrainingPair, ...]
    trained_mask: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.trained_mask, dtype=bool)
        if m.shape != (n_outputs(self.n_qubits),):
            raise ValueError("trained_mask does not match the output count")
        m.flags.writeable = False
        object.__setattr__(self, "trained_mask", m)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def n_trained_outputs(self) -> int:
        return int(self.trained_mask.sum())


def _size_mask(n: int, max_size: int) -> np.ndarray:
    return np.array([len(s) <= max_size for s in canonical_subsets(n)])


def _pairwise_pairs(n: int) -> list[TrainingPair]:
    from .states import pair_training_state

    subsets = canonical_subsets(n)
    out = []
    for kind in ("bell", "flat", "corr", "p"):
        own = {"bell": 1.0, "flat": 0.0, "corr": 0.0, "p": P_TARGET}[kind]
        for pair in qubit_pairs(n):
            targets = np.zeros(n_outputs(n))
            targets[subsets.index(pair)] = own
            out.append(
                TrainingPair(
                    label=f"{kind}_{subset_label(pair)}",
                    rho0=pair_training_state(kind, pair, n).density(),
                    targets=targets,
                )
            )
    return out


def _ghz_pairs(n: int, size: int) -> list[TrainingPair]:
    from itertools import combinations

    from .states import ghz

    subsets = canonical_subsets(n)
    out = []
    for subset in combinations(range(n), size):
        targets = np.zeros(n_outputs(n))
        targets[subsets.index(subset)] = 1.0
        out.append(
            TrainingPair(
                label=f"ghz_{subset_label(subset)}",
                rho0=ghz(subset, n).density(),
                targets=targets,
            )
        )
    return out


def build_stage_set(stage: int) -> TrainingSet:
    """Training pairs and trained-output mask for one stage (1..10)."""
    n = stage_qubits(stage)
    pairs = _pairwise_pairs(n)
    max_size = _STAGE_MAX_SIZE[stage]
    for size in range(3, max_size + 1):
        pairs.extend(_ghz_pairs(n, size))
    return TrainingSet(
        n_qubits=n, pairs=tuple(pairs), trained_mask=_size_mask(n, max_size)
    )


def pair_cost(outputs, targets, mask: np.ndarray | None = None) -> float:
    """Sum of squared errors over the trained outputs."""
    vals = outputs.values if isinstance(outputs, WitnessVector) else np.asarray(outputs)
    targets = np.asarray(targets, dtype=np.float64)
    if vals.shape != targets.shape:
        raise ValueError(f"outputs shape {vals.shape} != targets shape {targets.shape}")
    err = targets - vals
    if mask is not None:
        err = err[np.asarray(mask, dtype=bool)]
    return float(np.dot(err, err))


def _cost_and_gradient(
    pair: TrainingPair,
    params: QnnParameters,
    schedule: Schedule,
    convention: UnitConvention,
    mask: np.ndarray | None,
) -> tuple[float, np.ndarray]:
    """Forward run, cost, and exact reverse-mode parameter gradient."""
    n = params.n_qubits
    final, traj = evolve_with_trajectory(pair.rho0, params, schedule, convention)
    table = parity_table(n)
    expectations = table @ np.diag(final.matrix).real
    outs = expectations**2
    err = pair.targets - outs
    active = np.ones(outs.shape[0], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    cost = float(np.dot(err[active], err[active]))
    # dJ/d<M_S> = -2 err_S * 2<M_S>; lambda_f is diagonal like the correlators
    coeff = np.where(active, -4.0 * err * expectations, 0.0)
    lam_diag = coeff @ table
    lam_f = np.diag(lam_diag.astype(np.complex128))
    grad = evolve_adjoint(lam_f, params, schedule, convention, traj)
    return cost, grad


def pair_gradient(
    pair: TrainingPair,
    params: QnnParameters,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """d(pair cost)/d(parameter) as an (n_chunks, params_per_chunk) array."""
    return _cost_and_gradient(pair, params, schedule, convention, mask)[1]


def rms_error(
    tset: TrainingSet,
    params: QnnParameters,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
) -> float:
    """sqrt(mean over pairs of the per-pair cost)."""
    from .witness import evaluate

    if len(tset) == 0:
        raise ValueError("empty training set")
    costs = [
        pair_cost(evaluate(p.rho0, params, schedule, convention), p.targets, tset.trained_mask)
        for p in tset.pairs
    ]
    return float(np.sqrt(np.mean(costs)))


@dataclass(frozen=True)
class StageConfig:
    stage: int
    n_qubits: int
    epochs: int
    learning_rate: float = DEFAULT_LEARNING_RATE
    update_mode: str = "sequential"
    target_rms: float | None = None  # stop early once reached (optional)

    def __post_init__(self):
        if self.n_qubits != stage_qubits(self.stage):
            raise ValueError(
                f"stage {self.stage} is a {stage_qubits(self.stage)}-qubit stage, "
                f"config says {self.n_qubits}"
            )
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.update_mode not in ("sequential", "batch"):
            raise ValueError(f"unknown update mode {self.update_mode!r}")


def default_stage_config(stage: int, **overrides) -> StageConfig:
    """Paper-scale defaults: 5000 epochs through stage 3, 100 afterwards."""
    cfg = dict(
        stage=stage,
        n_qubits=stage_qubits(stage),
        epochs=5000 if stage <= 3 else 100,
        learning_rate=DEFAULT_LEARNING_RATE,
        update_mode="sequential",
    )
    cfg.update(overrides)
    return StageConfig(**cfg)


@dataclass(frozen=True)
class TrainLog:
    """Per-epoch RMS error of one training run."""

    rms_per_epoch: tuple[float, ...]

    @property
    def final_rms(self) -> float:
        if not self.rms_per_epoch:
            raise ValueError("empty training log")
        return self.rms_per_epoch[-1]

    def lines(self) -> list[str]:
        return [f"{i},{r!r}" for i, r in enumerate(self.rms_per_epoch, start=1)]


def write_train_log(log: TrainLog, path) -> None:
    """One `epoch,rms_error` line per epoch, deterministic."""
    with open(path, "w", encoding="utf-8") as f:
        for line in log.lines():
            f.write(line + "\n")


class TrainingDivergedError(RuntimeError):
    """RMS exceeded 10x its initial value; carries the log so far."""

    def __init__(self, message: str, log: TrainLog):
        super().__init__(message)
        self.log = log


def initial_parameters(n_qubits: int = 2, n_chunks: int = 4) -> QnnParameters:
    """Stage-1 starting point: K = 2.5 MHz on every qubit, eps = zeta = 0."""
    return QnnParameters.constant(n_qubits, n_chunks, k=DEFAULT_INITIAL_K)


def train_stage(
    params0: QnnParameters,
    cfg: StageConfig,
    schedule: Schedule = PAPER_SCHEDULE,
    convention: UnitConvention = ANGULAR_MHZ,
) -> tuple[QnnParameters, TrainLog]:
    """Plain gradient descent over the stage's training set.

    Sequential mode updates after every pair, in set order; batch mode
    sums the gradients over the set and updates once per epoch.  The
    logged RMS uses the costs observed during the epoch's pass.  Raises
    TrainingDivergedError if the RMS grows past 10x its initial value.
    """
    if params0.n_qubits != cfg.n_qubits:
        raise ValueError(
            f"parameters sized for {params0.n_qubits} qubits, stage needs {cfg.n_qubits}"
        )
    tset = build_stage_set(cfg.stage)
    arr = params0.to_array()
    rms_log: list[float] = []
    initial_rms = None
    for _ in range(cfg.epochs):
        costs = []
        if cfg.update_mode == "sequential":
            for pair in tset.pairs:
                params = QnnParameters.from_array(arr, cfg.n_qubits)
                cost, grad = _cost_and_gradient(
                    pair, params, schedule, convention, tset.trained_mask
                )
                arr = arr - cfg.learning_rate * grad
                costs.append(cost)
        else:
            params = QnnParameters.from_array(arr, cfg.n_qubits)
            total_grad = np.zeros_like(arr)
            for pair in tset.pairs:
                cost, grad = _cost_and_gradient(
                    pair, params, schedule, convention, tset.trained_mask
                )
                total_grad += grad
                costs.append(cost)
            arr = arr - cfg.learning_rate * total_grad
        rms = float(np.sqrt(np.mean(costs)))
        rms_log.append(rms)
        if initial_rms is None:
            initial_rms = rms
        if rms > 10.0 * initial_rms:
            raise TrainingDivergedError(
                f"RMS {rms:.3e} exceeded 10x initial {initial_rms:.3e} "
                f"at epoch {len(rms_log)}",
                TrainLog(tuple(rms_log)),
            )
        if cfg.target_rms is not None and rms <= cfg.target_rms:
            break
    return QnnParameters.from_array(arr, cfg.n_qubits), TrainLog(tuple(rms_log))


def bootstrap(params: QnnParameters) -> QnnParameters:
    """Extend a trained n-qubit parameter set to n+1 qubits.

    Existing entries are preserved exactly.  The new qubit's K and eps
    copy those of qubit n-1; the new couplings copy zeta_{a, n-1} for
    a < n-1, and the (n-1, n) pair copies zeta_{n-2, n-1}.
    """
    n = params.n_qubits
    if n < 2:
        raise ValueError("bootstrap needs at least a two-qubit parameter set")
    new_chunks = []
    old_pairs = {p: i for i, p in enumerate(qubit_pairs(n))}
    for c in params.chunks:
        k = np.append(c.k, c.k[n - 1])
        eps = np.append(c.eps, c.eps[n - 1])
        zeta = np.empty(len(qubit_pairs(n + 1)))
        for i, (a, b) in enumerate(qubit_pairs(n + 1)):
            if b < n:
                zeta[i] = c.zeta[old_pairs[(a, b)]]
            elif a < n - 1:
                zeta[i] = c.zeta[old_pairs[(a, n - 1)]]
            else:
                zeta[i] = c.zeta[old_pairs[(n - 2, n - 1)]]
        new_chunks.append(ChunkParams_from(k, eps, zeta))
    return QnnParameters(n_qubits=n + 1, chunks=tuple(new_chunks))


def ChunkParams_from(k, eps, zeta):
    from .dynamics import ChunkParams

    return ChunkParams(k=k, eps=eps, zeta=zeta)
