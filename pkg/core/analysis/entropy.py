"""Layer-wise subsystem entropies of the generator circuit."""
import csv
from dataclasses import dataclass, field
from io import StringIO
from math import fsum, sqrt
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import torch

from core.components import Analysis
from core.errors import QubitIndexError
from core.generator import GeneratorParams, forward, layout_for, sample_noise
from core.schema import GeneratorConfig
from core.statevector import QuantumState, entropy, reduced_density
from core.utils import atomic_write, write_log


@dataclass(frozen=True)
class EntropyRow:
    layer: int
    mode: int
    subset: str
    mean: float
    std: float


@dataclass
class EntropyTrace:
    rows: list[EntropyRow] = field(default_factory=list)

    def get(self, layer: int, mode: int, subset: str) -> EntropyRow:
        for row in self.rows:
            if (row.layer, row.mode, row.subset) == (layer, mode, subset):
                return row

        raise KeyError((layer, mode, subset))

    def to_csv(self, path: Path | None = None) -> str:
        buffer: StringIO = StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["layer", "mode", "subset", "mean", "std"])

        for row in self.rows:
            writer.writerow([row.layer, row.mode, row.subset, repr(row.mean), repr(row.std)])

        if path is not None:
            atomic_write(path, buffer.getvalue().encode())

        return buffer.getvalue()


def default_subsets(config: GeneratorConfig) -> dict[str, list[int]]:
    """Color qubit, color plus one spatial dimension, and the two finest address qubits."""
    address: list[int] = layout_for(config).address
    subsets: dict[str, list[int]] = {}

    if config.encoding != "amplitude":
        subsets["color"] = [0]
        subsets["color+rows"] = [0, *address[0::2]]

    else:
        subsets["rows"] = list(address[0::2])

    subsets["finest"] = list(address[-2:])
    return subsets


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    ordered: list[float] = sorted(values)
    mean: float = fsum(ordered) / len(ordered)
    return mean, sqrt(fsum(sorted((v - mean) ** 2 for v in ordered)) / len(ordered))


def _singles(state: QuantumState) -> list[QuantumState]:
    if not state.batch_shape:
        return [state]

    flat: torch.Tensor = state.amplitudes.reshape(-1, state.amplitudes.shape[-1])
    return [QuantumState(row, state.n_qubits) for row in flat]


def trace_entropies(states: Sequence[QuantumState], subsets: Mapping[str, Sequence[int]], mode: int = 0) -> list[EntropyRow]:
    """Mean and std of S(ρ_𝒜) per layer, over every draw in each (possibly batched) state."""
    rows: list[EntropyRow] = []

    for layer, state in enumerate(states):
        draws: list[QuantumState] = _singles(state)

        for name, subset in subsets.items():
            if any(not 0 <= q < state.n_qubits for q in subset):
                raise QubitIndexError(f"subset {name!r} = {list(subset)} out of range for {state.n_qubits} qubits")

            values: list[float] = [entropy(reduced_density(single, subset)) for single in draws]
            rows.append(EntropyRow(layer, mode, name, *_mean_std(values)))

    return rows


def layerwise_entropy(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, rng: np.random.Generator,
                      subsets: Mapping[str, Sequence[int]] | None = None, draws: int = 64) -> EntropyTrace:
    subsets = default_subsets(config) if subsets is None else subsets
    trace: EntropyTrace = EntropyTrace()

    with torch.no_grad():
        for mode in range(config.modes):
            noise = sample_noise(config, params, rng, batch=draws, mode=mode)
            _, states = forward(config, params, noise, collect_layers=True)
            trace.rows.extend(trace_entropies(states, subsets, mode))

    write_log("INFO", Analysis, "ENTROPY", "", f"Traced {len(subsets)} subsets over {config.layers} layers, {config.modes} modes, {draws} draws.")
    return trace
