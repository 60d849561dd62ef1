from math import log2, sqrt
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.components import Analysis, Critic, Trainer

Encoding = Literal["frqi", "mcrqi", "amplitude"]
Ansatz = Literal["task_specific", "task_agnostic"]
NoiseMode = Literal["tuned", "untuned", "unimodal"]


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


class GeneratorConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    encoding: Encoding = "frqi"
    ansatz: Ansatz = "task_specific"
    side: int = 4
    layers: int = Field(default=4, ge=1)
    sublayers: int = Field(default=2, ge=1)
    modes: int = Field(default=2, ge=1)
    channel_layout: Literal["address", "control"] = "address"
    amplitude_rotations: bool = False
    noise_mode: NoiseMode = "tuned"

    @field_validator("side")
    @classmethod
    def _side(cls, side: int) -> int:
        if side < 2 or not _is_power_of_two(side):
            raise ValueError(f"image side must be a power of two >= 2, got {side}")

        return side

    @model_validator(mode="after")
    def _unimodal(self) -> "GeneratorConfig":
        if self.noise_mode == "unimodal" and self.modes != 1:
            raise ValueError(f"unimodal noise has a single mode, got modes={self.modes}")

        return self

    @property
    def address_qubits(self) -> int:
        return 2 * int(log2(self.side))

    @property
    def channels(self) -> int:
        return 3 if self.encoding == "mcrqi" else 1

    @property
    def n_qubits(self) -> int:
        match self.encoding:
            case "frqi":
                return self.address_qubits + 1

            case "mcrqi":
                return self.address_qubits + 3

        return self.address_qubits

    @property
    def noise_qubits(self) -> int:
        if self.ansatz == "task_agnostic":
            return self.n_qubits

        if self.encoding == "mcrqi" and self.channel_layout == "address":
            return self.address_qubits + 2

        return self.address_qubits

    def __repr__(self) -> str:
        return (
            f"GeneratorConfig(encoding={self.encoding!r}, "
            f"ansatz={self.ansatz!r}, "
            f"side={self.side}, "
            f"layers={self.layers}({self.sublayers}), "
            f"modes={self.modes}, "
            f"noise={self.noise_mode!r})"
        )


class CriticConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    side: int = 4
    channels: Literal[1, 3] = 1
    filters: tuple[int, int, int] = Critic.FULL_FILTERS
    kernel_size: int = Field(default=Critic.KERNEL_SIZE, ge=1)
    stride: int = Field(default=Critic.STRIDE, ge=1)
    negative_slope: float = Critic.NEGATIVE_SLOPE

    @field_validator("side")
    @classmethod
    def _side(cls, side: int) -> int:
        if side < 1:
            raise ValueError(f"critic input side must be positive, got {side}")

        return side

    @field_validator("filters")
    @classmethod
    def _filters(cls, filters: tuple[int, int, int]) -> tuple[int, int, int]:
        if any(count < 1 for count in filters):
            raise ValueError(f"filter counts must be positive, got {filters}")

        return filters

    @classmethod
    def preset(cls, name: Literal["full", "desk", "tiny"], side: int, channels: Literal[1, 3] = 1) -> "CriticConfig":
        match name:
            case "full":
                filters = Critic.FULL_FILTERS

            case "desk":
                filters = Critic.DESK_FILTERS

            case "tiny":
                filters = Critic.TINY_FILTERS

            case _:
                raise ValueError(f"Unknown critic preset {name!r}")

        return cls(side=side, channels=channels, filters=filters)

    def layer_sides(self) -> list[int]:
        sides: list[int] = [self.side]

        for _ in self.filters:
            sides.append(-(-sides[-1] // self.stride))

        return sides


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    batch_size: int = Field(default=64, ge=1)
    generator_lr: float = Field(default=0.0025, gt=0)
    critic_lr: float | None = Field(default=None, gt=0)
    critic_lr_factor: float = Field(default=10.0, gt=0)
    beta1: float = Trainer.BETA1
    beta2: float = Trainer.BETA2
    adam_eps: float = Trainer.ADAM_EPS
    penalty: float = Field(default=Trainer.PENALTY, ge=0)
    n_critic: int = Field(default=Trainer.N_CRITIC, ge=1)
    iterations: int = Field(default=1000, ge=0)
    init_std: float = Field(default=sqrt(0.01), ge=0)
    noise_init_scale: float = Field(default=0.1, ge=0)
    shots: int | None = Field(default=None, ge=1)
    checkpoint_interval: int = Field(default=Trainer.CHECKPOINT_INTERVAL, ge=1)
    mmd_samples: int = Field(default=Analysis.MMD_SAMPLES, ge=1)
    track_grad_magnitude: bool = False
    seed: int = Field(default=0, ge=0)

    @property
    def effective_critic_lr(self) -> float:
        if self.critic_lr is not None:
            return self.critic_lr

        return self.generator_lr / self.critic_lr_factor

    @classmethod
    def preset(cls, name: Literal["gray", "color"], **overrides) -> "TrainConfig":
        match name:
            case "gray":
                base: dict = {"batch_size": 64, "n_critic": 10, "critic_lr_factor": 10.0}

            case "color":
                base = {"batch_size": 16, "n_critic": 5, "critic_lr_factor": 4.0}

            case _:
                raise ValueError(f"Unknown training preset {name!r}")

        return cls(**(base | overrides))

    @model_validator(mode="after")
    def _betas(self) -> "TrainConfig":
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError(f"Adam betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")

        return self

    def __repr__(self) -> str:
        return (
            f"TrainConfig(batch_size={self.batch_size}, "
            f"generator_lr={self.generator_lr}, "
            f"critic_lr={self.effective_critic_lr}, "
            f"n_critic={self.n_critic}, "
            f"iterations={self.iterations}, "
            f"shots={self.shots}, "
            f"seed={self.seed})"
        )
