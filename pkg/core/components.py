from math import pi


class ConfigMeta(type):
    def __str__(cls):
        return cls.__name__

    def __repr__(cls):
        return cls.__name__


class Component(metaclass=ConfigMeta):
    NAME: str = "Component"


class Simulator(Component, metaclass=ConfigMeta):
    NAME: str = "Simulator"
    EIGEN_CUTOFF: float = 1e-12
    MAX_QUBITS: int = 24
    ENTANGLER_ANGLES: int = 4


class Codec(Component, metaclass=ConfigMeta):
    NAME: str = "Codec"
    GRAY: float = 0.5
    # floor inside the square roots of the decoder; keeps gradients finite at p = 0
    SQRT_FLOOR: float = 1e-300
    RAW_SUFFIX: str = ".imgf64"


class Generator(Component, metaclass=ConfigMeta):
    NAME: str = "Generator"
    LAYOUT_VERSION: int = 1
    NOISE_INIT_SCALE: float = 0.1
    # untuned mode centres sit evenly in [-UNTUNED_SPREAD, UNTUNED_SPREAD]
    UNTUNED_SPREAD: float = pi / 2


class Critic(Component, metaclass=ConfigMeta):
    NAME: str = "Critic"
    KERNEL_SIZE: int = 5
    STRIDE: int = 2
    NEGATIVE_SLOPE: float = 0.2
    FULL_FILTERS: tuple[int, int, int] = (64, 128, 256)
    DESK_FILTERS: tuple[int, int, int] = (8, 16, 32)
    TINY_FILTERS: tuple[int, int, int] = (4, 8, 16)


class Trainer(Component, metaclass=ConfigMeta):
    NAME: str = "Trainer"
    BETA1: float = 0.5
    BETA2: float = 0.9
    ADAM_EPS: float = 1e-8
    PENALTY: float = 10.0
    N_CRITIC: int = 10
    CHECKPOINT_INTERVAL: int = 500


class Analysis(Component, metaclass=ConfigMeta):
    NAME: str = "Analysis"
    MMD_SAMPLES: int = 512
    SMOOTHING_WINDOW: int = 9
    RBF_BANDWIDTH: float = 1.0
    POLY_DEGREE: int = 2
    PCA_SPREAD: float = 3.0


class Storage(Component, metaclass=ConfigMeta):
    NAME: str = "Storage"
    FORMAT_VERSION: int = 1
    IDX_IMAGES_MAGIC: int = 2051
    IDX_LABELS_MAGIC: int = 2049


class Cli(Component, metaclass=ConfigMeta):
    NAME: str = "Cli"
    PROG: str = "qimagegen"
