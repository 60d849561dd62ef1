"""Flat parameter layout of the generator circuits.

Qubit numbering: qubit 0 is the color qubit (FRQI, MCRQI), MCRQI channel
selectors are qubits 1 and 2, and the pixel-address qubits follow, coarsest
first. Amplitude encoding has no color qubit, so its address qubits start at 0.

The entangling ladders run over a fixed qubit order:

- FRQI: ``[color, a1 ... aA]``
- amplitude: ``[a1 ... aA]``
- MCRQI, ``channel_layout="address"``: ``[color, a1 ... aA, s1, s2]``
- MCRQI, ``channel_layout="control"``: ``[color, a1 ... aA]``

N2 gates couple consecutive ladder positions, N3 gates couple positions two
apart and never touch the color qubit. A top-down sub-layer applies
``N2(0,1), N2(1,2), N3(1,3), N2(2,3), N3(2,4), ...``; a bottom-up sub-layer
runs the same list backwards with every pair flipped. Sub-layers alternate,
starting top-down.

Vector order: ``noise_mu | noise_sigma | layer 0 | layer 1 | ...`` where each
layer holds its entangler angles sub-layer by sub-layer, then the free color
rotation, then one controlled rotation per control qubit. The two noise blocks
exist only for ``noise_mode="tuned"``; fixed noise carries no parameters.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import prod

import numpy as np
import torch

from core.components import Generator, Simulator
from core.diffmath import REAL
from core.errors import ParameterLayoutError
from core.schema import GeneratorConfig

Pair = tuple[str, int, int]


@dataclass(frozen=True)
class Block:
    name: str
    shape: tuple[int, ...]
    start: int

    @property
    def size(self) -> int:
        return prod(self.shape)

    @property
    def stop(self) -> int:
        return self.start + self.size

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


def _below_double(value) -> bool:
    if isinstance(value, torch.Tensor):
        return value.is_floating_point() and value.dtype != REAL

    if isinstance(value, (np.ndarray, np.generic)):
        return np.issubdtype(value.dtype, np.floating) and value.dtype != np.float64

    return False


class ParameterLayout:
    version: int = Generator.LAYOUT_VERSION

    def __init__(self, config: GeneratorConfig):
        self.config: GeneratorConfig = config
        self.blocks: dict[str, Block] = {}
        self._size: int = 0

        if config.noise_mode == "tuned":
            shape: tuple[int, int, int] = (config.modes, config.layers, config.noise_qubits)
            self._add("noise_mu", shape)
            self._add("noise_sigma", shape)

        for l in range(config.layers):
            if config.ansatz == "task_agnostic":
                for q in range(config.n_qubits):
                    self._add(f"layer{l}.euler.{q}", (3,))

                continue

            for s in range(config.sublayers):
                for kind, a, b in self.sublayer(s):
                    self._add(f"layer{l}.sub{s}.{kind}.{a}-{b}", (Simulator.ENTANGLER_ANGLES,))

            if config.encoding == "amplitude":
                if config.amplitude_rotations:
                    for q in self.address:
                        self._add(f"layer{l}.rot.{q}", ())

                continue

            self._add(f"layer{l}.color", ())

            for q in self.controls:
                self._add(f"layer{l}.control.{q}", ())

    def _add(self, name: str, shape: tuple[int, ...]) -> None:
        self.blocks[name] = Block(name, shape, self._size)
        self._size += prod(shape)

    @property
    def size(self) -> int:
        return self._size

    @property
    def noise_stop(self) -> int:
        """End of the noise-tuning blocks; 0 when the noise is fixed."""
        return self.blocks["noise_sigma"].stop if "noise_sigma" in self.blocks else 0

    def __getitem__(self, name: str) -> Block:
        try:
            return self.blocks[name]

        except KeyError:
            raise ParameterLayoutError(f"{self.config!r} has no parameter block {name!r}") from None

    def __iter__(self):
        return iter(self.blocks.values())

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def address(self) -> list[int]:
        """Pixel-address qubits, coarsest first."""
        match self.config.encoding:
            case "frqi":
                return list(range(1, self.config.address_qubits + 1))

            case "mcrqi":
                return list(range(3, self.config.address_qubits + 3))

        return list(range(self.config.address_qubits))

    @cached_property
    def selectors(self) -> list[int]:
        return [1, 2] if self.config.encoding == "mcrqi" else []

    @cached_property
    def ladder(self) -> list[int]:
        if self.config.encoding == "amplitude":
            return list(self.address)

        if self.config.channel_layout == "address":
            return [0, *self.address, *self.selectors]

        return [0, *self.address]

    @cached_property
    def noise_targets(self) -> list[int]:
        if self.config.ansatz == "task_agnostic":
            return list(range(self.config.n_qubits))

        return [q for q in self.ladder if q != 0 or self.config.encoding == "amplitude"]

    @cached_property
    def controls(self) -> list[int]:
        return [*self.address, *self.selectors]

    @cached_property
    def _top_down(self) -> list[Pair]:
        ladder: list[int] = self.ladder
        has_color: bool = self.config.encoding != "amplitude"
        pairs: list[Pair] = []

        for i in range(len(ladder) - 1):
            pairs.append(("N2", ladder[i], ladder[i + 1]))

            if i + 2 < len(ladder) and not (has_color and i == 0):
                pairs.append(("N3", ladder[i], ladder[i + 2]))

        return pairs

    def sublayer(self, s: int) -> list[Pair]:
        if s % 2 == 0:
            return list(self._top_down)

        return [(kind, b, a) for kind, a, b in reversed(self._top_down)]

    def view(self, vector: torch.Tensor, name: str) -> torch.Tensor:
        block: Block = self[name]
        return vector[block.slice].reshape(block.shape)

    def unpack(self, vector: torch.Tensor) -> dict[str, torch.Tensor]:
        self.check(vector)
        return {block.name: vector[block.slice].reshape(block.shape) for block in self}

    def pack(self, named: dict[str, torch.Tensor]) -> torch.Tensor:
        missing: set[str] = set(self.blocks) - set(named)
        extra: set[str] = set(named) - set(self.blocks)

        if missing or extra:
            raise ParameterLayoutError(f"pack: missing blocks {sorted(missing)}, unknown blocks {sorted(extra)}")

        parts: list[torch.Tensor] = []

        for block in self:
            if _below_double(named[block.name]):
                raise ParameterLayoutError(f"pack: block {block.name!r} is {named[block.name].dtype}, angles must be float64")

            value: torch.Tensor = torch.as_tensor(named[block.name], dtype=REAL)

            if tuple(value.shape) != block.shape:
                raise ParameterLayoutError(f"pack: block {block.name!r} needs shape {block.shape}, got {tuple(value.shape)}")

            parts.append(value.reshape(-1))

        return torch.cat(parts)

    def check(self, vector: torch.Tensor) -> None:
        if vector.dim() != 1 or vector.shape[0] != self.size:
            raise ParameterLayoutError(f"{self.config!r} expects {self.size} parameters, got shape {tuple(vector.shape)}")


@lru_cache(maxsize=64)
def layout_for(config: GeneratorConfig) -> ParameterLayout:
    return ParameterLayout(config)


def count_parameters(config: GeneratorConfig) -> int:
    return layout_for(config).size


@dataclass(frozen=True)
class GeneratorParams:
    config: GeneratorConfig
    vector: torch.Tensor

    def __post_init__(self) -> None:
        self.layout.check(self.vector)

    @property
    def layout(self) -> ParameterLayout:
        return layout_for(self.config)

    @property
    def noise_mu(self) -> torch.Tensor:
        return self.layout.view(self.vector, "noise_mu")

    @property
    def noise_sigma(self) -> torch.Tensor:
        return self.layout.view(self.vector, "noise_sigma")


def as_vector(config: GeneratorConfig, params: "GeneratorParams | torch.Tensor") -> torch.Tensor:
    if isinstance(params, GeneratorParams):
        if params.config != config:
            raise ParameterLayoutError(f"parameters belong to {params.config!r}, not {config!r}")

        return params.vector

    layout_for(config).check(params)
    return params


def init_params(config: GeneratorConfig, rng: np.random.Generator, init_std: float,
                noise_init_scale: float = Generator.NOISE_INIT_SCALE) -> torch.Tensor:
    """General angles ~ N(0, init_std²), noise-tuning block ~ N(0, (noise_init_scale·init_std)²)."""
    layout: ParameterLayout = layout_for(config)
    scale: np.ndarray = np.full(layout.size, init_std)
    scale[:layout.noise_stop] *= noise_init_scale
    draws: np.ndarray = rng.standard_normal(layout.size)
    return torch.from_numpy(draws * scale).to(REAL)
