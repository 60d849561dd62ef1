from math import exp

import numpy as np
import pytest
import torch

from core.analysis import (
    default_subsets, grad_magnitude, grad_magnitude_summary, layerwise_entropy, mmd, mmd_report, mode_pca, moving_average,
    normalize_series, relative_norm, select_checkpoint, trace_entropies,
)
from core.discriminator import critic_init
from core.errors import MetricError, QubitIndexError
from core.generator import forward, init_params, sample_noise
from core.rng import make_rng
from core.statevector import apply_cnot, apply_hadamard, init_zero


def test_mmd_hand_values():
    x: np.ndarray = np.zeros((2, 1))
    y: np.ndarray = np.ones((2, 1))

    assert mmd(x, y, "linear") == pytest.approx(1.0)
    assert mmd(x, y, "poly") == pytest.approx(3.0)
    assert mmd(x, y, "rbf") == pytest.approx(2 - 2 * exp(-0.5))


def _double_loop_mmd(x: np.ndarray, y: np.ndarray, kernel) -> float:
    k: int = len(x)
    total: float = 0.0

    for i in range(k):
        for j in range(k):
            total += kernel(x[i], x[j]) + kernel(y[i], y[j]) - 2 * kernel(x[i], y[j])

    return total / (k * k)


def test_mmd_matches_a_double_loop(rng):
    x: np.ndarray = rng.random((16, 6))
    y: np.ndarray = rng.random((16, 6))
    kernels = {
        "linear": lambda a, b: float(np.dot(a, b)),
        "poly": lambda a, b: float((np.dot(a, b) + 1) ** 2),
        "rbf": lambda a, b: float(np.exp(-np.sum((a - b) ** 2) / 2)),
    }

    for name, kernel in kernels.items():
        assert mmd(x, y, name) == pytest.approx(_double_loop_mmd(x, y, kernel), abs=1e-12)


def test_mmd_of_identical_sets_is_exactly_zero(rng):
    x: np.ndarray = rng.random((16, 1, 4, 4))

    for kernel in ("linear", "poly", "rbf"):
        assert mmd(x, x.copy(), kernel) == 0.0


def test_linear_mmd_is_the_squared_mean_gap(rng):
    x: np.ndarray = rng.random((12, 9))
    y: np.ndarray = rng.random((12, 9))

    assert mmd(x, y, "linear") == pytest.approx(float(np.sum((x.mean(0) - y.mean(0)) ** 2)), rel=1e-10)


def test_mmd_ignores_sample_order(rng):
    x: np.ndarray = rng.random((10, 4))
    y: np.ndarray = rng.random((10, 4))
    order: np.ndarray = rng.permutation(10)

    for kernel in ("linear", "poly", "rbf"):
        assert mmd(x[order], y, kernel) == mmd(x, y, kernel)


def test_mmd_report_and_errors(rng):
    x: torch.Tensor = torch.from_numpy(rng.random((4, 1, 2, 2)))
    report = mmd_report(x, x)

    assert report.as_dict() == {"mmd_linear": 0.0, "mmd_poly": 0.0, "mmd_rbf": 0.0}
    assert report.samples == 4

    with pytest.raises(MetricError, match="equal size"):
        mmd(np.zeros((3, 2)), np.zeros((2, 2)), "linear")

    with pytest.raises(MetricError, match="dimensions differ"):
        mmd(np.zeros((2, 3)), np.zeros((2, 2)), "linear")

    with pytest.raises(MetricError, match="Unknown kernel"):
        mmd(np.zeros((2, 2)), np.zeros((2, 2)), "cosine")


def test_normalize_series():
    np.testing.assert_allclose(normalize_series([1, 2, 3, 4, 5]), [0, 1 / 3, 2 / 3, 1, 4 / 3])
    np.testing.assert_array_equal(normalize_series([2.5, 2.5, 2.5]), [0, 0, 0])

    with pytest.raises(MetricError, match="empty"):
        normalize_series([])


def test_moving_average_shrinks_at_the_ends():
    np.testing.assert_allclose(moving_average([0, 0, 3, 0, 0], 3), [0, 1, 1, 1, 0])
    np.testing.assert_allclose(moving_average([0, 0, 3, 0, 0], 5), [0, 1, 0.6, 1, 0])
    np.testing.assert_array_equal(moving_average([4, 1, 7], 1), [4, 1, 7])

    with pytest.raises(MetricError, match="odd"):
        moving_average([1, 2, 3], 4)


def test_select_checkpoint():
    series: list[float] = [5, 4, 3, 1, 2, 6]

    assert select_checkpoint({"linear": series, "poly": series, "rbf": series}, window=1) == 3
    assert select_checkpoint({"linear": [1, 0, 0, 1]}, window=1) == 1

    with pytest.raises(MetricError, match="equal length"):
        select_checkpoint({"linear": [1, 2], "rbf": [1, 2, 3]})


def test_default_subsets(frqi4):
    assert default_subsets(frqi4) == {"color": [0], "color+rows": [0, 1, 3], "finest": [3, 4]}


def test_trace_entropies_of_known_states():
    product = init_zero(2)
    bell = apply_cnot(apply_hadamard(init_zero(2), 0), 0, 1)
    rows = trace_entropies([product, bell], {"left": [0]}, mode=1)

    assert [(row.layer, row.mode, row.subset) for row in rows] == [(0, 1, "left"), (1, 1, "left")]
    assert rows[0].mean == pytest.approx(0, abs=1e-12)
    assert rows[1].mean == pytest.approx(1, abs=1e-12)
    assert rows[1].std == pytest.approx(0, abs=1e-12)

    with pytest.raises(QubitIndexError, match="out of range"):
        trace_entropies([product], {"far": [0, 5]})


def test_layerwise_entropy(frqi4, tmp_path):
    params: torch.Tensor = init_params(frqi4, make_rng(0), 0.5)
    trace = layerwise_entropy(frqi4, params, make_rng(1), draws=4)
    again = layerwise_entropy(frqi4, params, make_rng(1), draws=4)

    assert len(trace.rows) == (frqi4.layers + 1) * frqi4.modes * 3
    assert trace.get(0, 1, "color+rows").mean == pytest.approx(0, abs=1e-10)
    assert all(0 <= row.mean <= 2 + 1e-9 for row in trace.rows)
    assert trace.to_csv() == again.to_csv()

    trace.to_csv(tmp_path / "entropy.csv")

    assert (tmp_path / "entropy.csv").read_text().splitlines()[0] == "layer,mode,subset,mean,std"


def _eigen_entropy(amplitudes: np.ndarray, n: int, subset: list[int]) -> float:
    rest: list[int] = [q for q in range(n) if q not in subset]
    psi: np.ndarray = np.transpose(amplitudes.reshape([2] * n), subset + rest).reshape(2 ** len(subset), -1)
    eigenvalues: np.ndarray = np.linalg.eigvalsh(psi @ psi.conj().T)
    eigenvalues = eigenvalues[eigenvalues > 1e-12]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


@pytest.mark.parametrize("config_name", ["frqi", "agnostic"])
def test_layerwise_entropy_matches_brute_force(config_name, frqi4):
    config = frqi4 if config_name == "frqi" else frqi4.model_copy(update={"ansatz": "task_agnostic", "layers": 2})
    params: torch.Tensor = init_params(config, make_rng(4), 1.0, noise_init_scale=1.0)
    subsets: dict[str, list[int]] = {"pair": [0, 2], "single": [3], "triple": [1, 2, 4]}
    trace = layerwise_entropy(config, params, make_rng(6), subsets=subsets, draws=1)
    replay = make_rng(6)

    for mode in range(config.modes):
        _, states = forward(config, params, sample_noise(config, params, replay, batch=1, mode=mode), collect_layers=True)

        for layer, state in enumerate(states):
            amplitudes: np.ndarray = state.amplitudes.reshape(-1).numpy()

            for name, subset in subsets.items():
                expected: float = 0.0 if layer == 0 else _eigen_entropy(amplitudes, config.n_qubits, subset)

                assert trace.get(layer, mode, name).mean == pytest.approx(expected, abs=1e-8)


def test_relative_norm_and_summary():
    assert relative_norm(torch.tensor([3.0, 4.0], dtype=torch.float64)) == pytest.approx(2.5)
    assert grad_magnitude_summary([(1, 2.0), (2, 4.0), (3, 6.0)], start=2) == pytest.approx(5.0)
    assert grad_magnitude_summary([(1, 2.0), (2, 4.0), (3, 6.0)], stop=3) == pytest.approx(3.0)

    with pytest.raises(MetricError, match="no gradient magnitudes"):
        grad_magnitude_summary([(1, 2.0)], start=5)


def test_grad_magnitude(frqi4, small_critic):
    params: torch.Tensor = init_params(frqi4, make_rng(0), 0.5)
    network = critic_init(small_critic, make_rng(1))
    first: float = grad_magnitude(frqi4, params, network, make_rng(2), batch=4)

    assert first > 0
    assert grad_magnitude(frqi4, params, network, make_rng(2), batch=4) == first
    assert grad_magnitude(frqi4, params, critic_init(small_critic, make_rng(1), zero=True), make_rng(2), batch=4) == 0.0
    assert grad_magnitude(frqi4, params, network, make_rng(2), batch=4, shots=128) > 0


def test_mode_pca_on_a_line():
    direction: np.ndarray = np.array([0.6, 0.8, 0.0, 0.0]).reshape(1, 2, 2)
    t: np.ndarray = np.array([-0.2, 0.0, 0.2, 0.1, -0.1])
    samples: np.ndarray = 0.5 + t[:, None, None, None] * direction
    pca = mode_pca(samples, spread=3.0)

    assert not pca.zero_variance
    assert pca.components.shape == (1, 4)
    assert pca.sigma == pytest.approx(np.sqrt(0.025))
    np.testing.assert_allclose(pca.axis, direction, atol=1e-12)
    np.testing.assert_allclose(pca.mean, np.full((1, 2, 2), 0.5), atol=1e-12)
    np.testing.assert_allclose(pca.plus, 0.5 + 3 * np.sqrt(0.025) * direction, atol=1e-12)
    np.testing.assert_allclose(pca.reconstruct(), samples, atol=1e-12)


def test_mode_pca_degenerate_cases():
    same: np.ndarray = np.full((4, 1, 2, 2), 0.3)
    pca = mode_pca(same)

    assert pca.zero_variance
    np.testing.assert_array_equal(pca.minus, pca.mean)
    np.testing.assert_array_equal(pca.plus, pca.mean)
    np.testing.assert_allclose(pca.reconstruct(), same)

    with pytest.raises(MetricError, match="at least 2"):
        mode_pca(same[:1])
