"""Dense statevector simulation.

Qubit 0 is the most significant bit of the basis index. Amplitudes may carry
leading batch dimensions, ``(..., 2**n)``, and every rotation accepts either a
scalar angle or one angle per batch element, so a minibatch of circuits with
different noise runs as a single tensor program.
"""
from dataclasses import dataclass
from math import sqrt
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import torch

from core.components import Simulator
from core.diffmath import COMPLEX, REAL
from core.errors import EntanglerError, QubitIndexError, ShapeError
from core.utils import atomic_write

Axis = Literal["x", "y", "z"]
EntanglerKind = Literal["N2", "N3"]

_HADAMARD: torch.Tensor = torch.tensor([[1, 1], [1, -1]], dtype=COMPLEX) / sqrt(2)
_CNOT: torch.Tensor = torch.tensor([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=COMPLEX)
_PAIR_DISTANCE: dict[str, int] = {"N2": 1, "N3": 2}


@dataclass(frozen=True)
class QuantumState:
    amplitudes: torch.Tensor
    n_qubits: int

    def __post_init__(self) -> None:
        if self.amplitudes.shape[-1] != 2 ** self.n_qubits:
            raise ShapeError(f"QuantumState: {self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes, got {self.amplitudes.shape[-1]}")

    @property
    def batch_shape(self) -> torch.Size:
        return self.amplitudes.shape[:-1]

    def with_amplitudes(self, amplitudes: torch.Tensor) -> "QuantumState":
        return QuantumState(amplitudes, self.n_qubits)


@dataclass(frozen=True)
class ReducedState:
    subsystem: tuple[int, ...]
    matrix: torch.Tensor


def _check_qubit(state: QuantumState, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise QubitIndexError(f"qubit {q} out of range for a {state.n_qubits}-qubit state")

    if len(set(qubits)) != len(qubits):
        raise QubitIndexError(f"gate qubits must be distinct, got {qubits}")


def init_zero(n: int, batch: Sequence[int] = ()) -> QuantumState:
    if not 1 <= n <= Simulator.MAX_QUBITS:
        raise QubitIndexError(f"qubit count must lie in [1, {Simulator.MAX_QUBITS}], got {n}")

    amplitudes: torch.Tensor = torch.zeros(*batch, 2 ** n, dtype=COMPLEX)
    amplitudes[..., 0] = 1
    return QuantumState(amplitudes, n)


def init_plus(n: int, batch: Sequence[int] = ()) -> QuantumState:
    return QuantumState(torch.full((*batch, 2 ** n), 2 ** (-n / 2), dtype=COMPLEX), n)


def apply_gate(state: QuantumState, matrix: torch.Tensor, qubits: Sequence[int]) -> QuantumState:
    """Apply a dense k-qubit matrix, (2^k, 2^k) or batched (..., 2^k, 2^k)."""
    _check_qubit(state, *qubits)
    n, k = state.n_qubits, len(qubits)
    batch: torch.Size = state.batch_shape
    nb: int = len(batch)
    psi: torch.Tensor = state.amplitudes.reshape(*batch, *([2] * n))
    targets: list[int] = [nb + q for q in qubits]
    psi = torch.movedim(psi, targets, list(range(nb + n - k, nb + n)))
    moved_shape: torch.Size = psi.shape
    psi = psi.reshape(*batch, -1, 2 ** k)
    matrix = matrix.to(COMPLEX)

    if matrix.shape[-2:] != (2 ** k, 2 ** k):
        raise ShapeError(f"apply_gate: {k}-qubit gate needs a {2 ** k}x{2 ** k} matrix, got {tuple(matrix.shape)}")

    psi = psi @ matrix.transpose(-1, -2)
    psi = torch.movedim(psi.reshape(moved_shape), list(range(nb + n - k, nb + n)), targets)
    return state.with_amplitudes(psi.reshape(*batch, 2 ** n))


def rotation_matrix(axis: Axis, angle: torch.Tensor | float) -> torch.Tensor:
    theta: torch.Tensor = torch.as_tensor(angle, dtype=REAL)
    c, s = torch.cos(theta / 2).to(COMPLEX), torch.sin(theta / 2).to(COMPLEX)
    zero: torch.Tensor = torch.zeros_like(c)

    match axis:
        case "x":
            rows = [[c, -1j * s], [-1j * s, c]]

        case "y":
            rows = [[c, -s], [s, c]]

        case "z":
            rows = [[c - 1j * s, zero], [zero, c + 1j * s]]

        case _:
            raise ValueError(f"Unknown rotation axis {axis!r}")

    return torch.stack([torch.stack(row, dim=-1) for row in rows], dim=-2)


def apply_hadamard(state: QuantumState, qubit: int) -> QuantumState:
    return apply_gate(state, _HADAMARD, [qubit])


def apply_rotation(state: QuantumState, axis: Axis, qubit: int, angle: torch.Tensor | float) -> QuantumState:
    return apply_gate(state, rotation_matrix(axis, angle), [qubit])


def apply_cnot(state: QuantumState, control: int, target: int) -> QuantumState:
    return apply_gate(state, _CNOT, [control, target])


def controlled_matrix(matrix: torch.Tensor) -> torch.Tensor:
    batch: torch.Size = matrix.shape[:-2]
    eye: torch.Tensor = torch.eye(2, dtype=COMPLEX).expand(*batch, 2, 2)
    zero: torch.Tensor = torch.zeros(*batch, 2, 2, dtype=COMPLEX)
    top: torch.Tensor = torch.cat([eye, zero], dim=-1)
    bottom: torch.Tensor = torch.cat([zero, matrix.to(COMPLEX)], dim=-1)
    return torch.cat([top, bottom], dim=-2)


def apply_controlled_rotation(state: QuantumState, axis: Axis, control: int, target: int, angle: torch.Tensor | float) -> QuantumState:
    return apply_gate(state, controlled_matrix(rotation_matrix(axis, angle)), [control, target])


def apply_cnot_ring(state: QuantumState, qubits: Sequence[int] | None = None) -> QuantumState:
    qubits = list(range(state.n_qubits)) if qubits is None else list(qubits)

    if len(qubits) < 2:
        return state

    if len(qubits) == 2:
        return apply_cnot(apply_cnot(state, qubits[0], qubits[1]), qubits[1], qubits[0])

    for i, q in enumerate(qubits):
        state = apply_cnot(state, q, qubits[(i + 1) % len(qubits)])

    return state


def entangler_matrix(params: torch.Tensor) -> torch.Tensor:
    """Real orthogonal 4x4 matrix of ``CNOT · Ry(θ₂)⊗Ry(θ₃) · CNOT · Ry(θ₀)⊗Ry(θ₁)``."""
    params = torch.as_tensor(params, dtype=REAL)

    if params.shape != (Simulator.ENTANGLER_ANGLES,):
        raise EntanglerError(f"entangler takes {Simulator.ENTANGLER_ANGLES} angles, got shape {tuple(params.shape)}")

    def ry(theta: torch.Tensor) -> torch.Tensor:
        c, s = torch.cos(theta / 2), torch.sin(theta / 2)
        return torch.stack([torch.stack([c, -s]), torch.stack([s, c])])

    cnot: torch.Tensor = _CNOT.real
    first: torch.Tensor = torch.kron(ry(params[0]), ry(params[1]))
    second: torch.Tensor = torch.kron(ry(params[2]), ry(params[3]))
    return cnot @ second @ cnot @ first


def _check_pair(kind: EntanglerKind, pair: tuple[int, int], ladder: Sequence[int]) -> None:
    if kind not in _PAIR_DISTANCE:
        raise EntanglerError(f"Unknown entangler kind {kind!r}")

    ladder = list(ladder)

    if pair[0] not in ladder or pair[1] not in ladder:
        raise EntanglerError(f"{kind} pair {pair} is not on the ladder {ladder}")

    distance: int = abs(ladder.index(pair[0]) - ladder.index(pair[1]))

    if distance != _PAIR_DISTANCE[kind]:
        raise EntanglerError(f"{kind} needs ladder distance {_PAIR_DISTANCE[kind]}, pair {pair} has distance {distance}")


def apply_entangler(state: QuantumState, kind: EntanglerKind, pair: tuple[int, int], params: torch.Tensor,
                    ladder: Sequence[int] | None = None) -> QuantumState:
    _check_pair(kind, pair, range(state.n_qubits) if ladder is None else ladder)
    return apply_gate(state, entangler_matrix(params), list(pair))


def apply_entangler_inverse(state: QuantumState, kind: EntanglerKind, pair: tuple[int, int], params: torch.Tensor,
                            ladder: Sequence[int] | None = None) -> QuantumState:
    """Reversed gate sequence with negated angles."""
    _check_pair(kind, pair, range(state.n_qubits) if ladder is None else ladder)
    return apply_gate(state, entangler_matrix(params).transpose(0, 1), list(pair))


def probabilities(state: QuantumState) -> torch.Tensor:
    amplitudes: torch.Tensor = state.amplitudes
    return amplitudes.real ** 2 + amplitudes.imag ** 2


def norm(state: QuantumState) -> torch.Tensor:
    return probabilities(state).sum(dim=-1).sqrt()


def reduced_density(state: QuantumState, subsystem: Sequence[int]) -> ReducedState:
    subsystem = tuple(subsystem)

    if not subsystem:
        raise QubitIndexError("reduced_density needs a non-empty subsystem")

    _check_qubit(state, *subsystem)

    if state.batch_shape:
        raise ShapeError(f"reduced_density takes a single state, got batch shape {tuple(state.batch_shape)}")

    n, k = state.n_qubits, len(subsystem)
    psi: torch.Tensor = state.amplitudes.reshape([2] * n)
    psi = torch.movedim(psi, list(subsystem), list(range(k))).reshape(2 ** k, 2 ** (n - k))
    return ReducedState(subsystem, psi @ psi.conj().transpose(0, 1))


def entropy(reduced: ReducedState) -> float:
    """Von Neumann entropy in bits."""
    eigenvalues: np.ndarray = np.linalg.eigvalsh(reduced.matrix.detach().numpy())
    eigenvalues = eigenvalues[eigenvalues > Simulator.EIGEN_CUTOFF]
    value: float = float(-np.sum(eigenvalues * np.log2(eigenvalues)))
    return min(max(value, 0.0), float(len(reduced.subsystem)))


def save_state(path: Path, state: QuantumState) -> None:
    if state.batch_shape:
        raise ShapeError("save_state writes a single state")

    amplitudes: np.ndarray = state.amplitudes.detach().numpy().astype(np.complex128)
    interleaved: np.ndarray = np.empty(2 * amplitudes.size, dtype="<f8")
    interleaved[0::2], interleaved[1::2] = amplitudes.real, amplitudes.imag
    atomic_write(path, np.array([state.n_qubits], dtype="<u8").tobytes() + interleaved.tobytes())


def load_state(path: Path) -> QuantumState:
    raw: bytes = Path(path).read_bytes()

    if len(raw) < 8:
        raise ShapeError(f"{path}: missing qubit-count header")

    n: int = int(np.frombuffer(raw[:8], dtype="<u8")[0])
    expected: int = 8 + 16 * 2 ** n

    if len(raw) != expected:
        raise ShapeError(f"{path}: expected {expected} bytes for {n} qubits, got {len(raw)}")

    values: np.ndarray = np.frombuffer(raw[8:], dtype="<f8")
    return QuantumState(torch.from_numpy(values[0::2] + 1j * values[1::2]).to(COMPLEX), n)
