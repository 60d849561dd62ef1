import json
from hashlib import sha256
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.components import Analysis
from core.schema import CriticConfig, GeneratorConfig, TrainConfig

SyntheticKind = Literal["quadrant", "bimodal", "bars", "color_quadrant"]


class DatasetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    source: Literal["synthetic", "idx"] = "synthetic"
    kind: SyntheticKind = "bimodal"
    count: int = Field(default=1024, ge=1)
    images: Path | None = None
    labels: Path | None = None
    classes: tuple[int, ...] | None = None
    resize: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _paths(self) -> "DatasetConfig":
        if self.source == "idx" and self.images is None:
            raise ValueError("an IDX dataset needs an images path")

        if self.classes is not None and self.labels is None:
            raise ValueError("a class filter needs a labels path")

        return self

    def __repr__(self) -> str:
        if self.source == "synthetic":
            return f"DatasetConfig(synthetic={self.kind!r}, count={self.count})"

        return (
            f"DatasetConfig(images={str(self.images)!r}, "
            f"labels={str(self.labels)!r}, "
            f"classes={self.classes}, "
            f"resize={self.resize})"
        )


class AnalysisConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    entropy_draws: int = Field(default=64, ge=1)
    pca_samples: int = Field(default=256, ge=2)
    pca_spread: float = Field(default=Analysis.PCA_SPREAD, gt=0)
    smoothing_window: int = Field(default=Analysis.SMOOTHING_WINDOW, ge=1)
    grad_batch: int = Field(default=64, ge=1)

    def __repr__(self) -> str:
        return (
            f"AnalysisConfig(entropy_draws={self.entropy_draws}, "
            f"pca_samples={self.pca_samples}, "
            f"smoothing_window={self.smoothing_window})"
        )


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    name: str = "run"
    generator: GeneratorConfig = GeneratorConfig()
    critic: CriticConfig = CriticConfig.preset("desk", side=4)
    train: TrainConfig = TrainConfig()
    dataset: DatasetConfig = DatasetConfig()
    analysis: AnalysisConfig = AnalysisConfig()

    @model_validator(mode="after")
    def _shapes(self) -> "RunConfig":
        if self.critic.side != self.generator.side or self.critic.channels != self.generator.channels:
            raise ValueError(
                    f"critic input {self.critic.channels}x{self.critic.side}x{self.critic.side} does not match "
                    f"generator output {self.generator.channels}x{self.generator.side}x{self.generator.side}"
            )

        if self.dataset.source == "synthetic" and (self.dataset.kind == "color_quadrant") != (self.generator.channels == 3):
            raise ValueError(f"synthetic dataset {self.dataset.kind!r} does not match {self.generator.channels}-channel images")

        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def __repr__(self) -> str:
        return (
            f"RunConfig(name={self.name!r}, "
            f"generator={self.generator!r}, "
            f"train={self.train!r}, "
            f"dataset={self.dataset!r})"
        )
