import numpy as np
import pytest
import torch

from core.diffmath import (
    REAL, central_difference, conv2d_same, dense, evaluate, gradient, input_gradient_node, leaky_relu, relative_error, tensor,
)
from core.discriminator import reference_conv2d
from core.errors import ShapeError


def test_square_value_and_gradient():
    theta: torch.Tensor = tensor(3.0, requires_grad=True)
    value: torch.Tensor = evaluate(lambda t: t ** 2, theta)

    assert float(value) == 9.0
    assert float(gradient(value, [theta])[0]) == 6.0


def test_identity_and_independent_parameter():
    x: torch.Tensor = tensor(-1.25, requires_grad=True)
    theta: torch.Tensor = tensor(0.7, requires_grad=True)
    value: torch.Tensor = evaluate(lambda v: v, x)

    assert float(value) == -1.25
    assert gradient(value * 2, [theta])[0].item() == 0.0
    assert gradient(tensor(5.0), [theta])[0].item() == 0.0


def test_hand_computed_convolution():
    x: torch.Tensor = torch.arange(16, dtype=REAL).reshape(1, 1, 4, 4)
    kernel: torch.Tensor = torch.ones(1, 1, 3, 3, dtype=REAL)
    out: torch.Tensor = evaluate(lambda a, w: conv2d_same(a, w), x, kernel)

    assert out.shape == (1, 1, 4, 4)
    assert out[0, 0, 0, 0].item() == 0 + 1 + 4 + 5
    assert out[0, 0, 1, 1].item() == 0 + 1 + 2 + 4 + 5 + 6 + 8 + 9 + 10
    np.testing.assert_allclose(out.numpy(), reference_conv2d(x.numpy(), kernel.numpy(), np.zeros(1), 1), atol=1e-12)


def test_random_composite_matches_finite_differences():
    generator: torch.Generator = torch.Generator().manual_seed(7)
    p: torch.Tensor = torch.randn(10, dtype=REAL, generator=generator).requires_grad_(True)

    def fn() -> torch.Tensor:
        return (torch.sin(p) * p.roll(1)).sum() + (p ** 3).mean() + torch.tanh(p[:3] @ p[3:6])

    (analytic,) = gradient(fn(), [p])
    (numeric,) = central_difference(fn, [p])

    assert relative_error(analytic, numeric) < 1e-6


def test_gradient_is_linear():
    generator: torch.Generator = torch.Generator().manual_seed(11)
    p: torch.Tensor = torch.randn(6, dtype=REAL, generator=generator).requires_grad_(True)
    a, b = 0.37, -2.1
    f = lambda: torch.cos(p).prod()
    g = lambda: (p ** 2).sum().sqrt()

    (combined,) = gradient(a * f() + b * g(), [p])
    (gf,) = gradient(f(), [p])
    (gg,) = gradient(g(), [p])

    torch.testing.assert_close(combined, a * gf + b * gg, rtol=1e-12, atol=1e-14)


def test_non_scalar_output_is_rejected():
    p: torch.Tensor = tensor([1.0, 2.0], requires_grad=True)

    with pytest.raises(ShapeError, match="scalar"):
        gradient(p * 2, [p])


def test_shape_mismatch_names_the_primitive():
    with pytest.raises(ShapeError, match="matmul"):
        evaluate(torch.matmul, torch.ones(2, 3, dtype=REAL), torch.ones(2, 3, dtype=REAL))

    with pytest.raises(ShapeError, match="dense"):
        dense(torch.ones(2, 3, dtype=REAL), torch.ones(1, 4, dtype=REAL))


def test_leaky_relu_derivative_at_zero_is_the_slope():
    x: torch.Tensor = tensor(0.0, requires_grad=True)

    assert gradient(leaky_relu(x, 0.2), [x])[0].item() == pytest.approx(0.2)


def test_linear_critic_penalty():
    w: torch.Tensor = tensor(2.0, requires_grad=True)
    x: torch.Tensor = tensor([[0.3]])
    grad: torch.Tensor = input_gradient_node(lambda v: (w * v).sum(dim=-1), x)
    penalty: torch.Tensor = (grad.norm() - 1) ** 2

    assert grad.item() == pytest.approx(2.0)
    assert penalty.item() == pytest.approx(1.0)
    assert gradient(penalty, [w])[0].item() == pytest.approx(2.0)


def test_constant_critic_penalty():
    w: torch.Tensor = tensor(0.5, requires_grad=True)
    x: torch.Tensor = tensor([[0.3], [0.9]])
    grad: torch.Tensor = input_gradient_node(lambda v: w.expand(v.shape[0]), x)
    penalty: torch.Tensor = ((grad.flatten(start_dim=1).norm(dim=-1) - 1) ** 2).mean()

    assert torch.count_nonzero(grad) == 0
    assert penalty.item() == 1.0
    assert gradient(penalty, [w])[0].item() == 0.0


def _two_layer(w1: torch.Tensor, w2: torch.Tensor):
    return lambda v: leaky_relu(v @ w1.T, 0.2) @ w2


def test_penalty_weight_gradient_matches_finite_differences():
    generator: torch.Generator = torch.Generator().manual_seed(3)
    w1: torch.Tensor = torch.randn(3, 4, dtype=REAL, generator=generator).requires_grad_(True)
    w2: torch.Tensor = torch.randn(3, dtype=REAL, generator=generator).requires_grad_(True)
    x: torch.Tensor = torch.randn(5, 4, dtype=REAL, generator=generator)

    def loss() -> torch.Tensor:
        grad: torch.Tensor = input_gradient_node(_two_layer(w1, w2), x)
        return _two_layer(w1, w2)(x).mean() + 10 * ((grad.norm(dim=-1) - 1) ** 2).mean()

    analytic: list[torch.Tensor] = gradient(loss(), [w1, w2])
    numeric: list[torch.Tensor] = central_difference(loss, [w1, w2])

    for a, n in zip(analytic, numeric):
        assert relative_error(a, n) < 1e-5


def test_second_order_directional_derivative():
    generator: torch.Generator = torch.Generator().manual_seed(5)
    w: torch.Tensor = torch.randn(4, 4, dtype=REAL, generator=generator).requires_grad_(True)
    x: torch.Tensor = torch.randn(2, 4, dtype=REAL, generator=generator)
    v: torch.Tensor = torch.randn(2, 4, dtype=REAL, generator=generator)
    network = lambda u: torch.tanh(u @ w).sum(dim=-1)
    directional = lambda: (input_gradient_node(network, x) * v).sum()

    (analytic,) = gradient(directional(), [w])
    (numeric,) = central_difference(directional, [w])

    assert relative_error(analytic, numeric) < 1e-6


def test_repeated_evaluation_is_bit_identical():
    generator: torch.Generator = torch.Generator().manual_seed(9)
    p: torch.Tensor = torch.randn(8, dtype=REAL, generator=generator).requires_grad_(True)
    fn = lambda t: torch.exp(torch.sin(t)).cumsum(0).sum()

    first, second = evaluate(fn, p), evaluate(fn, p)

    assert torch.equal(first, second)
    assert torch.equal(gradient(first, [p])[0], gradient(second, [p])[0])
