"""Seedable random streams.

Every run owns three `numpy.random.Generator` streams over the counter-based
Philox bit generator, all spawned from the run seed: ``train`` feeds the
optimisation loop (dataset indices, noise, interpolation coefficients, shot
sampling), ``eval`` feeds checkpoint-time evaluation and ``data`` builds
synthetic datasets. Draw order inside a stream is fixed by the caller, so a
seed pins every value.
"""
from typing import Any

import numpy as np

STREAMS: tuple[str, ...] = ("train", "eval", "data")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    children: list[np.random.SeedSequence] = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.Philox(child)) for name, child in zip(STREAMS, children)}


def _to_json(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return {"__ndarray__": [int(v) for v in value.ravel()], "dtype": str(value.dtype), "shape": list(value.shape)}

    if isinstance(value, dict):
        return {key: _to_json(item) for key, item in value.items()}

    if isinstance(value, np.integer):
        return int(value)

    return value


def _from_json(value: Any) -> Any:
    if isinstance(value, dict) and "__ndarray__" in value:
        return np.array(value["__ndarray__"], dtype=value["dtype"]).reshape(value["shape"])

    if isinstance(value, dict):
        return {key: _from_json(item) for key, item in value.items()}

    return value


def rng_state(rng: np.random.Generator) -> dict[str, Any]:
    return _to_json(rng.bit_generator.state)


def rng_from_state(state: dict[str, Any]) -> np.random.Generator:
    bit_generator: np.random.Philox = np.random.Philox()
    bit_generator.state = _from_json(state)
    return np.random.Generator(bit_generator)
