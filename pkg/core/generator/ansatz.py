"""Generator circuits: the task-specific ladder ansatz and the hardware-efficient baseline."""
import numpy as np
import torch

from core.errors import ParameterLayoutError
from core.generator.layout import GeneratorParams, ParameterLayout, as_vector, layout_for
from core.generator.noise import NoiseDraw, sample_noise
from core.generator.shots import shot_noise_perturb
from core.image_codec import decode
from core.schema import GeneratorConfig
from core.statevector import (
    QuantumState, apply_cnot_ring, apply_controlled_rotation, apply_entangler, apply_rotation, init_plus, probabilities,
)


def _superposition(config: GeneratorConfig, batch: int) -> QuantumState:
    # H on every qubit of |0…0⟩
    return init_plus(config.n_qubits, (batch,))


def _upload_noise(state: QuantumState, layout: ParameterLayout, noise: NoiseDraw, l: int) -> QuantumState:
    for k, q in enumerate(layout.noise_targets):
        state = apply_rotation(state, "x", q, noise.z[:, l, k])

    return state


def _check_noise(config: GeneratorConfig, noise: NoiseDraw) -> None:
    if tuple(noise.z.shape[1:]) != (config.layers, config.noise_qubits):
        raise ParameterLayoutError(f"noise shaped {tuple(noise.z.shape)} does not fit {config!r}")


def forward(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, noise: NoiseDraw,
            collect_layers: bool = False) -> QuantumState | tuple[QuantumState, list[QuantumState]]:
    """Run the generator circuit on a batch of noise draws.

    With `collect_layers` the states after the initial Hadamards and after
    every layer are returned as well.
    """
    if config.ansatz == "task_agnostic":
        return forward_agnostic(config, params, noise, collect_layers)

    vector: torch.Tensor = as_vector(config, params)
    layout: ParameterLayout = layout_for(config)
    _check_noise(config, noise)
    state: QuantumState = _superposition(config, noise.batch)
    trace: list[QuantumState] = [state]

    for l in range(config.layers):
        state = _upload_noise(state, layout, noise, l)

        for s in range(config.sublayers):
            for kind, a, b in layout.sublayer(s):
                state = apply_entangler(state, kind, (a, b), layout.view(vector, f"layer{l}.sub{s}.{kind}.{a}-{b}"), ladder=layout.ladder)

        if config.encoding == "amplitude":
            if config.amplitude_rotations:
                for q in layout.address:
                    state = apply_rotation(state, "y", q, layout.view(vector, f"layer{l}.rot.{q}"))

        else:
            state = apply_rotation(state, "y", 0, layout.view(vector, f"layer{l}.color"))

            for q in layout.controls:
                state = apply_controlled_rotation(state, "y", q, 0, layout.view(vector, f"layer{l}.control.{q}"))

        trace.append(state)

    return (state, trace) if collect_layers else state


def forward_agnostic(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, noise: NoiseDraw,
                     collect_layers: bool = False) -> QuantumState | tuple[QuantumState, list[QuantumState]]:
    """|+⟩ start, then per layer Rx noise, Rz·Ry·Rz on every qubit and a CNOT ring."""
    vector: torch.Tensor = as_vector(config, params)
    layout: ParameterLayout = layout_for(config)
    _check_noise(config, noise)
    state: QuantumState = _superposition(config, noise.batch)
    trace: list[QuantumState] = [state]

    for l in range(config.layers):
        state = _upload_noise(state, layout, noise, l)

        for q in range(config.n_qubits):
            angles: torch.Tensor = layout.view(vector, f"layer{l}.euler.{q}")
            state = apply_rotation(state, "z", q, angles[0])
            state = apply_rotation(state, "y", q, angles[1])
            state = apply_rotation(state, "z", q, angles[2])

        state = apply_cnot_ring(state)
        trace.append(state)

    return (state, trace) if collect_layers else state


def generate_image(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, rng: np.random.Generator,
                   shots: int | None = None, batch: int = 1, mode: int | None = None) -> torch.Tensor:
    """Noise, circuit, optional finite-shot measurement, decode; ``(B, C, H, W)``."""
    noise: NoiseDraw = sample_noise(config, params, rng, batch, mode)
    p: torch.Tensor = probabilities(forward(config, params, noise))

    if shots is not None:
        p = shot_noise_perturb(p, shots, rng)

    return decode(p, config.encoding)
