"""Constructors for every input state the witness is trained and tested on.

Bitstrings are MSB-first: qubit A is the leftmost character, so "101" is
basis index 5.  The four two-qubit training columns (relative amplitudes
over |00>, |01>, |10>, |11>) are:

    bell: 1, 0, 0, 1        flat: 1, 1, 1, 1
    corr: 0, 0, 0.5, 1      p:    1, 1, 1, 0

State-spec text files hold one term per line, ``<bitstring> <re> [<im>]``,
with ``#`` comments; amplitudes are normalized on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .linalg import DensityMatrix, PureState

PAIR_KINDS = ("bell", "flat", "corr", "p")

_PAIR_COLUMNS = {
    "bell": (1.0, 0.0, 0.0, 1.0),
    "flat": (1.0, 1.0, 1.0, 1.0),
    "corr": (0.0, 0.0, 0.5, 1.0),
    "p": (1.0, 1.0, 1.0, 0.0),
}


class StateSpecError(ValueError):
    """Malformed state-spec text."""


@dataclass(frozen=True)
class StateSpec:
    """Unnormalized amplitudes keyed by basis bitstring."""

    n_qubits: int
    terms: tuple[tuple[str, complex], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("state spec has no terms")
        for bits, _ in self.terms:
            if len(bits) != self.n_qubits or set(bits) - {"0", "1"}:
                raise ValueError(f"bad bitstring {bits!r} for {self.n_qubits} qubits")


def make_state(spec: StateSpec) -> PureState:
    """Place amplitudes at their basis indices and normalize."""
    v = np.zeros(1 << spec.n_qubits, dtype=np.complex128)
    for bits, amp in spec.terms:
        v[int(bits, 2)] += amp
    if np.linalg.norm(v) < 1e-12:
        raise ValueError("state spec sums to the zero vector")
    return PureState(v)


def basis_state(bits: str) -> PureState:
    return make_state(StateSpec(n_qubits=len(bits), terms=((bits, 1.0),)))


def parse_state_spec(text: str, source: str = "<string>") -> StateSpec:
    """Parse the one-term-per-line text format; errors carry line numbers."""
    terms: list[tuple[str, complex]] = []
    n_qubits = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise StateSpecError(
                f"{source}:{lineno}: expected '<bitstring> <re> [<im>]', got {raw!r}"
            )
        bits = fields[0]
        if set(bits) - {"0", "1"}:
            raise StateSpecError(f"{source}:{lineno}: bad bitstring {bits!r}")
        if n_qubits is None:
            n_qubits = len(bits)
        elif len(bits) != n_qubits:
            raise StateSpecError(
                f"{source}:{lineno}: bitstring length {len(bits)} != {n_qubits}"
            )
        try:
            re = float(fields[1])
            im = float(fields[2]) if len(fields) == 3 else 0.0
        except ValueError as exc:
            raise StateSpecError(f"{source}:{lineno}: bad amplitude: {exc}") from None
        terms.append((bits, complex(re, im)))
    if n_qubits is None:
        raise StateSpecError(f"{source}: no state terms found")
    return StateSpec(n_qubits=n_qubits, terms=tuple(terms))


def load_state_spec(path) -> StateSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_state_spec(f.read(), source=str(path))


def _embed_two_qubit(column: Sequence[float], pair: tuple[int, int], n: int) -> PureState:
    a, b = pair
    v = np.zeros(1 << n, dtype=np.complex128)
    for (bit_a, bit_b), amp in zip(product((0, 1), repeat=2), column):
        idx = bit_a << (n - 1 - a) | bit_b << (n - 1 - b)
        v[idx] = amp
    return PureState(v)


def pair_training_state(kind: str, pair: tuple[int, int], n: int) -> PureState:
    """One of the four training columns on qubits `pair`, |0> elsewhere."""
    key = kind.lower()
    if key not in _PAIR_COLUMNS:
        raise ValueError(f"unknown training state kind {kind!r}; expected one of {PAIR_KINDS}")
    a, b = pair
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"invalid qubit pair {pair} for {n} qubits")
    return _embed_two_qubit(_PAIR_COLUMNS[key], (a, b), n)


def ghz(subset: Iterable[int], n: int) -> PureState:
    """(|0...0> + |1 on subset>)/sqrt(2)."""
    qubits = sorted(set(int(q) for q in subset))
    if len(qubits) < 2:
        raise ValueError(f"GHZ subset must have at least two qubits, got {qubits}")
    if qubits[0] < 0 or qubits[-1] >= n:
        raise ValueError(f"subset {qubits} out of range for {n} qubits")
    v = np.zeros(1 << n, dtype=np.complex128)
    v[0] = 1.0
    mask = 0
    for q in qubits:
        mask |= 1 << (n - 1 - q)
    v[mask] = 1.0
    return PureState(v)


def w_state(
    subset: Iterable[int],
    n: int,
    signs: Sequence[int] | None = None,
    flipped: bool = False,
) -> PureState:
    """Single-excitation (or single-hole, if flipped) state on `subset`.

    One term per subset qubit, in ascending qubit order, weighted by the
    corresponding sign; the first sign must be +1 so sign patterns are
    counted modulo global phase (2^(k-1) patterns for k qubits).
    """
    qubits = sorted(set(int(q) for q in subset))
    if not qubits or qubits[0] < 0 or qubits[-1] >= n:
        raise ValueError(f"subset {qubits} out of range for {n} qubits")
    if signs is None:
        signs = (1,) * len(qubits)
    if len(signs) != len(qubits):
        raise ValueError(f"{len(signs)} signs for {len(qubits)} qubits")
    if any(s not in (-1, 1) for s in signs):
        raise ValueError(f"signs must be +-1, got {tuple(signs)}")
    if signs[0] != 1:
        raise ValueError("first sign must be +1 (global phase is quotiented out)")
    full = 0
    for q in qubits:
        full |= 1 << (n - 1 - q)
    v = np.zeros(1 << n, dtype=np.complex128)
    for q, s in zip(qubits, signs):
        bit = 1 << (n - 1 - q)
        v[full ^ bit if flipped else bit] = s
    return PureState(v)


def w_sign_patterns(k: int) -> tuple[tuple[int, ...], ...]:
    """All 2^(k-1) sign patterns with the first sign fixed to +1."""
    if k < 1:
        raise ValueError("need at least one qubit")
    return tuple((1,) + rest for rest in product((1, -1), repeat=k - 1))


def superpose(terms: Sequence[tuple[complex, PureState]]) -> PureState:
    """Normalized linear combination of pure states."""
    if not terms:
        raise ValueError("no terms to superpose")
    dim = terms[0][1].dim
    v = np.zeros(dim, dtype=np.complex128)
    for coeff, state in terms:
        if state.dim != dim:
            raise ValueError("superposition terms have mismatched dimensions")
        v += complex(coeff) * state.vector
    if np.linalg.norm(v) < 1e-12:
        raise ValueError("superposition is the zero vector")
    return PureState(v)


def mix(terms: Sequence[tuple[float, DensityMatrix]]) -> DensityMatrix:
    """Convex combination of density matrices."""
    if not terms:
        raise ValueError("no terms to mix")
    weights = np.array([w for w, _ in terms], dtype=np.float64)
    if np.any(weights < 0.0):
        raise ValueError(f"negative mixture weight in {weights}")
    if abs(weights.sum() - 1.0) >= 1e-10:
        raise ValueError(f"mixture weights sum to {weights.sum()}, expected 1")
    dim = terms[0][1].dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    for w, rho in terms:
        if rho.dim != dim:
            raise ValueError("mixture terms have mismatched dimensions")
        out += w * rho.matrix
    return DensityMatrix(out, check=False)


def haar_random_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    """Uniform (Haar) random pure state; for tests and diagnostics."""
    dim = 1 << n_qubits
    return PureState(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
