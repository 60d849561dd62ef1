from math import pi, sqrt

import numpy as np
import pytest
import torch

from core.diffmath import COMPLEX
from core.errors import EntanglerError, QubitIndexError, ShapeError
from core.statevector import (
    QuantumState, apply_cnot, apply_controlled_rotation, apply_entangler, apply_entangler_inverse, apply_hadamard, apply_rotation,
    entangler_matrix, entropy, init_zero, load_state, norm, probabilities, reduced_density, save_state,
)


def _random_state(n: int, seed: int) -> QuantumState:
    rng: np.random.Generator = np.random.default_rng(seed)
    amplitudes: np.ndarray = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return QuantumState(torch.from_numpy(amplitudes / np.linalg.norm(amplitudes)).to(COMPLEX), n)


def _basis(n: int, index: int) -> QuantumState:
    amplitudes: torch.Tensor = torch.zeros(2 ** n, dtype=COMPLEX)
    amplitudes[index] = 1
    return QuantumState(amplitudes, n)


def test_hadamard_on_zero():
    state: QuantumState = apply_hadamard(init_zero(1), 0)

    torch.testing.assert_close(state.amplitudes, torch.tensor([1, 1], dtype=COMPLEX) / sqrt(2))


def test_rx_pi_flips_with_phase():
    state: QuantumState = apply_rotation(init_zero(1), "x", 0, pi)

    assert abs(state.amplitudes[0]) < 1e-15
    assert abs(state.amplitudes[1] - (-1j)) < 1e-15


def test_cnot_on_10():
    state: QuantumState = apply_cnot(_basis(2, 0b10), 0, 1)

    torch.testing.assert_close(probabilities(state), torch.tensor([0, 0, 0, 1], dtype=torch.float64))


def test_gate_index_errors():
    with pytest.raises(QubitIndexError, match="out of range"):
        apply_hadamard(init_zero(2), 2)

    with pytest.raises(QubitIndexError, match="distinct"):
        apply_cnot(init_zero(2), 1, 1)


def test_gates_preserve_norm_and_invert():
    state: QuantumState = _random_state(4, 0)
    out: QuantumState = apply_rotation(state, "y", 2, 0.83)
    out = apply_controlled_rotation(out, "x", 0, 3, -1.4)
    out = apply_cnot(out, 3, 1)
    out = apply_hadamard(out, 2)

    assert abs(float(norm(out)) - 1) < 1e-12

    back: QuantumState = apply_hadamard(out, 2)
    back = apply_cnot(back, 3, 1)
    back = apply_controlled_rotation(back, "x", 0, 3, 1.4)
    back = apply_rotation(back, "y", 2, -0.83)

    torch.testing.assert_close(back.amplitudes, state.amplitudes, rtol=0, atol=1e-10)


def test_batched_angles_match_single_runs():
    angles: torch.Tensor = torch.tensor([0.1, -0.7, 2.2], dtype=torch.float64)
    batched: QuantumState = apply_rotation(apply_hadamard(init_zero(2, (3,)), 1), "z", 1, angles)

    for i, angle in enumerate(angles):
        single: QuantumState = apply_rotation(apply_hadamard(init_zero(2), 1), "z", 1, angle)
        torch.testing.assert_close(batched.amplitudes[i], single.amplitudes)


def test_entangler_identity_at_zero():
    state: QuantumState = _random_state(3, 1)

    torch.testing.assert_close(apply_entangler(state, "N2", (0, 1), torch.zeros(4)).amplitudes, state.amplitudes)


def test_entangler_is_real_orthogonal():
    for seed in range(5):
        params: torch.Tensor = torch.from_numpy(np.random.default_rng(seed).uniform(-pi, pi, 4))
        matrix: torch.Tensor = entangler_matrix(params)

        assert matrix.dtype == torch.float64
        torch.testing.assert_close(matrix.T @ matrix, torch.eye(4, dtype=torch.float64), rtol=0, atol=1e-10)


def test_entangler_then_inverse():
    state: QuantumState = _random_state(4, 2)
    params: torch.Tensor = torch.tensor([0.3, -1.2, 2.0, 0.45], dtype=torch.float64)
    out: QuantumState = apply_entangler(state, "N3", (1, 3), params)
    back: QuantumState = apply_entangler_inverse(out, "N3", (1, 3), params)

    torch.testing.assert_close(back.amplitudes, state.amplitudes, rtol=0, atol=1e-10)


def test_entangler_errors():
    with pytest.raises(EntanglerError, match="4 angles"):
        apply_entangler(init_zero(2), "N2", (0, 1), torch.zeros(3))

    with pytest.raises(EntanglerError, match="distance"):
        apply_entangler(init_zero(3), "N2", (0, 2), torch.zeros(4))

    with pytest.raises(EntanglerError, match="distance"):
        apply_entangler(init_zero(4), "N3", (0, 1), torch.zeros(4), ladder=[0, 1, 2, 3])


def test_probabilities():
    torch.testing.assert_close(probabilities(init_zero(1)), torch.tensor([1.0, 0.0], dtype=torch.float64))
    torch.testing.assert_close(probabilities(apply_hadamard(init_zero(1), 0)), torch.tensor([0.5, 0.5], dtype=torch.float64))

    state: QuantumState = _random_state(3, 3)
    expected: np.ndarray = np.abs(state.amplitudes.numpy()) ** 2

    np.testing.assert_allclose(probabilities(state).numpy(), expected, rtol=1e-14)
    assert float(probabilities(state).sum()) == pytest.approx(1, abs=1e-10)


def test_product_and_bell_entropies():
    bell: QuantumState = apply_cnot(apply_hadamard(init_zero(2), 0), 0, 1)

    assert entropy(reduced_density(init_zero(2), [0])) == pytest.approx(0, abs=1e-12)
    assert entropy(reduced_density(bell, [0])) == pytest.approx(1, abs=1e-12)


def test_reduced_density_matches_brute_force():
    state: QuantumState = _random_state(4, 4)
    psi: np.ndarray = state.amplitudes.numpy()
    rho: np.ndarray = np.outer(psi, psi.conj()).reshape([2] * 8)
    expected: np.ndarray = np.einsum("aijbaklb->ijkl", rho).reshape(4, 4)
    reduced = reduced_density(state, [1, 2])
    eigenvalues: np.ndarray = np.linalg.eigvalsh(expected)
    eigenvalues = eigenvalues[eigenvalues > 1e-12]

    np.testing.assert_allclose(reduced.matrix.numpy(), expected, atol=1e-12)
    assert entropy(reduced) == pytest.approx(float(-np.sum(eigenvalues * np.log2(eigenvalues))), abs=1e-10)

    matrix: np.ndarray = reduced.matrix.numpy()

    assert np.trace(matrix).real == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-10)


def test_pure_state_entropy_symmetry_and_bounds():
    for seed in range(5):
        state: QuantumState = _random_state(5, 10 + seed)
        left: float = entropy(reduced_density(state, [0, 3]))
        right: float = entropy(reduced_density(state, [1, 2, 4]))

        assert left == pytest.approx(right, abs=1e-8)
        assert 0 <= left <= 2

    assert entropy(reduced_density(_random_state(3, 0), [0, 1, 2])) == pytest.approx(0, abs=1e-10)


def test_empty_subsystem_is_rejected():
    with pytest.raises(QubitIndexError, match="non-empty"):
        reduced_density(init_zero(2), [])


def test_qsv_roundtrip(tmp_path):
    state: QuantumState = _random_state(3, 5)
    path = tmp_path / "state.qsv"
    save_state(path, state)

    assert path.stat().st_size == 8 + 16 * 8
    assert torch.equal(load_state(path).amplitudes, state.amplitudes)

    path.write_bytes(path.read_bytes()[:-8])

    with pytest.raises(ShapeError, match="expected 136 bytes"):
        load_state(path)
