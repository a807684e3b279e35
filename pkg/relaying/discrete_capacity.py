"""Finite-alphabet evaluation of the bounds, including the exact MABC region.

Every alphabet carries an explicit silence symbol. Transition tensors are
indexed over the full alphabets; rows for silent inputs describe whatever a
listening node observes when a transmitter stays quiet, and a listening
node never outputs the silence symbol.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from relaying import config
from relaying.channel_model import Link, MIKey, MITable, Protocol
from relaying.errors import InvalidArgumentError, ResourceLimitError
from relaying.protocol_bounds import BoundKind, PhaseSchedule, fixed_delta_region
from relaying.rate_region import RateRegion

logger = logging.getLogger(__name__)

SILENCE = "∅"
STOCHASTIC_TOL = 1e-12
DISTRIBUTION_TOL = 1e-9

ALPHABETS = ("x_a", "x_b", "x_r", "y_a", "y_b", "y_r")

# tensor name -> (conditioning input axes, output axes)
TENSOR_AXES: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "mac": (("x_a", "x_b"), ("y_r",)),
    "broadcast": (("x_r",), ("y_a", "y_b")),
    "solo_a": (("x_a",), ("y_r", "y_b")),
    "solo_b": (("x_b",), ("y_r", "y_a")),
}

Tensor = List


class DiscreteChannel(BaseModel):
    """Half-duplex discrete memoryless channel, one law per phase type.

    mac        W(y_r | x_a, x_b)        both terminals transmit
    broadcast  W(y_a, y_b | x_r)        relay transmits
    solo_a     W(y_r, y_b | x_a)        only A transmits (optional)
    solo_b     W(y_r, y_a | x_b)        only B transmits (optional)
    """

    model_config = ConfigDict(frozen=True)

    silence: str = SILENCE
    alphabets: Dict[str, List[str]]
    mac: Tensor
    broadcast: Tensor
    solo_a: Optional[Tensor] = None
    solo_b: Optional[Tensor] = None

    @model_validator(mode="after")
    def _validate(self) -> "DiscreteChannel":
        for name in ALPHABETS:
            symbols = self.alphabets.get(name)
            if symbols is None:
                raise ValueError(f"alphabet {name} is missing")
            if len(set(symbols)) != len(symbols):
                raise ValueError(f"alphabet {name} repeats a symbol")
            if symbols.count(self.silence) != 1:
                raise ValueError(f"alphabet {name} must contain the silence symbol {self.silence!r} once")
            if len(symbols) < 2:
                raise ValueError(f"alphabet {name} has no non-silent symbol")

        for name, (inputs, outputs) in TENSOR_AXES.items():
            raw = getattr(self, name)
            if raw is None:
                continue
            shape = tuple(len(self.alphabets[axis]) for axis in inputs + outputs)
            tensor = np.asarray(raw, dtype=float)
            if tensor.shape != shape:
                raise ValueError(f"{name} has shape {tensor.shape}, expected {shape} over {inputs + outputs}")
            if not np.all(np.isfinite(tensor)) or np.any(tensor < 0):
                raise ValueError(f"{name} entries must be finite and >= 0")

            rows = tensor.reshape(shape[:len(inputs)] + (-1,))
            for index in np.ndindex(*shape[:len(inputs)]):
                total = rows[index].sum()
                if abs(total - 1.0) > STOCHASTIC_TOL:
                    raise ValueError(f"{name} row {index} sums to {total!r}, not 1")
            for k, axis in enumerate(outputs):
                silent = self.silence_index(axis)
                mass = np.take(tensor, silent, axis=len(inputs) + k)
                if np.any(mass > STOCHASTIC_TOL):
                    row = tuple(int(i) for i in np.argwhere(mass > STOCHASTIC_TOL)[0][:len(inputs)])
                    raise ValueError(f"{name} row {row} gives the listening output {axis} the silence symbol")
        return self

    @classmethod
    def from_arrays(
        cls,
        mac: np.ndarray,
        broadcast: np.ndarray,
        solo_a: Optional[np.ndarray] = None,
        solo_b: Optional[np.ndarray] = None,
    ) -> "DiscreteChannel":
        """Build from laws over non-silent symbols only.

        Symbols are named "0", "1", ...; silence is appended last on every
        axis, and a silent transmitter acts like its first symbol.
        """
        arrays = {"mac": mac, "broadcast": broadcast, "solo_a": solo_a, "solo_b": solo_b}
        sizes: Dict[str, int] = {}
        for name, array in arrays.items():
            if array is None:
                continue
            array = np.asarray(array, dtype=float)
            inputs, outputs = TENSOR_AXES[name]
            for axis, size in zip(inputs + outputs, array.shape):
                if sizes.setdefault(axis, size) != size:
                    raise InvalidArgumentError(f"{name} disagrees on the size of {axis}", parameter=name)
        for axis in ALPHABETS:
            sizes.setdefault(axis, 1)

        padded: Dict[str, Optional[Tensor]] = {}
        for name, array in arrays.items():
            if array is None:
                padded[name] = None
                continue
            array = np.asarray(array, dtype=float)
            inputs, outputs = TENSOR_AXES[name]
            for k in range(len(inputs)):
                first = np.take(array, [0], axis=k)
                array = np.concatenate([array, first], axis=k)
            for k in range(len(outputs)):
                pad = [(0, 0)] * array.ndim
                pad[len(inputs) + k] = (0, 1)
                array = np.pad(array, pad)
            padded[name] = array.tolist()

        alphabets = {axis: [str(i) for i in range(sizes[axis])] + [SILENCE] for axis in ALPHABETS}
        return cls(alphabets=alphabets, **padded)

    def silence_index(self, alphabet: str) -> int:
        return self.alphabets[alphabet].index(self.silence)

    def active(self, alphabet: str) -> List[int]:
        silent = self.silence_index(alphabet)
        return [i for i in range(len(self.alphabets[alphabet])) if i != silent]

    def input_size(self, alphabet: str) -> int:
        return len(self.alphabets[alphabet]) - 1

    def law(self, name: str) -> np.ndarray:
        """Tensor restricted to non-silent inputs, outputs kept whole."""
        raw = getattr(self, name)
        if raw is None:
            raise InvalidArgumentError(f"channel has no {name} law", parameter=name)
        tensor = np.asarray(raw, dtype=float)
        inputs, _ = TENSOR_AXES[name]
        for k, axis in enumerate(inputs):
            tensor = np.take(tensor, self.active(axis), axis=k)
        return tensor


def load_channel(path: str | Path) -> DiscreteChannel:
    with open(path, "r", encoding="utf-8") as f:
        return DiscreteChannel.model_validate(json.load(f))


def _entropy(p: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis, with 0 log 0 = 0."""
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(p * np.log2(safe), axis=-1)


def _distribution(p: Sequence[float], size: int, parameter: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (size,):
        raise InvalidArgumentError(f"{parameter} needs {size} probabilities, got shape {p.shape}",
                                   parameter=parameter)
    if np.any(p < 0) or abs(p.sum() - 1.0) > DISTRIBUTION_TOL:
        raise InvalidArgumentError(f"{parameter} is not a probability vector", parameter=parameter)
    return p


def mutual_information(px: Sequence[float], w: np.ndarray) -> float:
    """I(X;Y) in bits for input px and stochastic matrix w[x, y]."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise InvalidArgumentError(f"channel matrix must be 2-D, got {w.ndim}-D", parameter="w")
    px = _distribution(px, w.shape[0], "px")
    value = _entropy(px @ w) - px @ _entropy(w)
    return max(float(value), 0.0)


def mutual_information_cond(pxa: Sequence[float], pxb: Sequence[float], w: np.ndarray) -> Tuple[float, float, float]:
    """(I(Xa;Y|Xb), I(Xb;Y|Xa), I(Xa,Xb;Y)) for independent inputs and w[x_a, x_b, y]."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 3:
        raise InvalidArgumentError(f"MAC tensor must be 3-D, got {w.ndim}-D", parameter="w")
    pxa = _distribution(pxa, w.shape[0], "pxa")
    pxb = _distribution(pxb, w.shape[1], "pxb")

    given_b = sum(pxb[j] * mutual_information(pxa, w[:, j, :]) for j in range(w.shape[1]) if pxb[j] > 0)
    given_a = sum(pxa[i] * mutual_information(pxb, w[i, :, :]) for i in range(w.shape[0]) if pxa[i] > 0)
    joint = mutual_information(np.outer(pxa, pxb).ravel(), w.reshape(-1, w.shape[2]))
    return float(given_b), float(given_a), joint


def _solo_terms(ch: DiscreteChannel, name: str, px: np.ndarray) -> Tuple[float, float]:
    """(I(X; Y_relay), I(X; Y_other terminal)) of a single-transmitter phase."""
    law = ch.law(name)
    return mutual_information(px, law.sum(axis=2)), mutual_information(px, law.sum(axis=1))


def _downlink_terms(ch: DiscreteChannel, px: np.ndarray) -> Tuple[float, float]:
    """(I(X_r; Y_a), I(X_r; Y_b))."""
    law = ch.law("broadcast")
    return mutual_information(px, law.sum(axis=2)), mutual_information(px, law.sum(axis=1))


_INPUT_KEYS: Dict[Protocol, Tuple[Tuple[int, str], ...]] = {
    Protocol.DT: ((1, "a"), (2, "b")),
    Protocol.MABC: ((1, "a"), (1, "b"), (2, "r")),
    Protocol.TDBC: ((1, "a"), (2, "b"), (3, "r")),
    Protocol.HBC: ((1, "a"), (2, "b"), (3, "a"), (3, "b"), (4, "r")),
}


def discrete_mi_table(
    ch: DiscreteChannel,
    protocol: Protocol,
    inputs: Mapping[Tuple[int, str], Sequence[float]],
) -> MITable:
    """Inner-bound MI table for chosen per-phase input distributions.

    `inputs` maps (phase, node) to a distribution over that node's
    non-silent symbols, e.g. {(1, "a"): [...], (1, "b"): [...], (2, "r"): [...]}.
    """
    protocol = Protocol(protocol)
    dists: Dict[Tuple[int, str], np.ndarray] = {}
    for phase, node in _INPUT_KEYS[protocol]:
        if (phase, node) not in inputs:
            raise InvalidArgumentError(f"no input distribution for node {node} in phase {phase}",
                                       parameter="inputs")
        dists[(phase, node)] = _distribution(inputs[(phase, node)], ch.input_size(f"x_{node}"),
                                             f"inputs[{phase},{node}]")

    entries: Dict[MIKey, float] = {}
    if protocol is Protocol.DT:
        entries[(1, Link.DIRECT)] = _solo_terms(ch, "solo_a", dists[(1, "a")])[1]
        entries[(2, Link.DIRECT)] = _solo_terms(ch, "solo_b", dists[(2, "b")])[1]
    elif protocol is Protocol.MABC:
        a, b, s = mutual_information_cond(dists[(1, "a")], dists[(1, "b")], ch.law("mac"))
        entries.update({(1, Link.UPLINK_A): a, (1, Link.UPLINK_B): b, (1, Link.MAC_SUM): s})
        to_a, to_b = _downlink_terms(ch, dists[(2, "r")])
        entries.update({(2, Link.DOWNLINK_A): to_a, (2, Link.DOWNLINK_B): to_b})
    else:
        up_a, direct_ab = _solo_terms(ch, "solo_a", dists[(1, "a")])
        up_b, direct_ba = _solo_terms(ch, "solo_b", dists[(2, "b")])
        entries.update({
            (1, Link.UPLINK_A): up_a, (1, Link.DIRECT): direct_ab,
            (2, Link.UPLINK_B): up_b, (2, Link.DIRECT): direct_ba,
        })
        relay_phase = protocol.num_phases
        if protocol is Protocol.HBC:
            a, b, s = mutual_information_cond(dists[(3, "a")], dists[(3, "b")], ch.law("mac"))
            entries.update({(3, Link.UPLINK_A): a, (3, Link.UPLINK_B): b, (3, Link.MAC_SUM): s})
        to_a, to_b = _downlink_terms(ch, dists[(relay_phase, "r")])
        entries.update({(relay_phase, Link.DOWNLINK_A): to_a, (relay_phase, Link.DOWNLINK_B): to_b})
    return MITable(protocol=protocol, entries=entries)


def input_grid(size: int, resolution: int) -> np.ndarray:
    """All distributions on `size` symbols with entries in multiples of 1/resolution."""
    if size < 1 or resolution < 1:
        raise InvalidArgumentError("grid needs size >= 1 and resolution >= 1", parameter="grid")
    rows = []
    for bars in combinations(range(resolution + size - 1), size - 1):
        edges = (-1,) + bars + (resolution + size - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(size)])
    return np.array(rows, dtype=float) / resolution


@dataclass(frozen=True)
class InputGrid:
    resolution: int

    def __post_init__(self) -> None:
        if self.resolution < 1:
            raise InvalidArgumentError(f"grid resolution must be >= 1, got {self.resolution}", parameter="grid")

    def count(self, size: int) -> int:
        return comb(self.resolution + size - 1, size - 1)

    def distributions(self, size: int) -> np.ndarray:
        return input_grid(size, self.resolution)


def mabc_fixed_inputs_region(
    ch: DiscreteChannel,
    pxa: Sequence[float],
    pxb: Sequence[float],
    pxr: Sequence[float],
    sched: PhaseSchedule,
) -> RateRegion:
    table = discrete_mi_table(ch, Protocol.MABC, {(1, "a"): pxa, (1, "b"): pxb, (2, "r"): pxr})
    return fixed_delta_region(Protocol.MABC, BoundKind.INNER, table, sched)


def mabc_capacity_region(ch: DiscreteChannel, sched: PhaseSchedule, grid: InputGrid) -> RateRegion:
    """Time-sharing hull of the MABC pentagons over every grid input tuple."""
    if sched.protocol is not Protocol.MABC:
        raise InvalidArgumentError("MABC capacity needs an MABC schedule", parameter="sched")
    sizes = [ch.input_size(axis) for axis in ("x_a", "x_b", "x_r")]
    count = int(np.prod([grid.count(s) for s in sizes], dtype=object))
    if count > config.MAX_GRID_TUPLES:
        raise ResourceLimitError(
            f"grid enumeration needs {count} input tuples, above the limit of {config.MAX_GRID_TUPLES}",
            parameter="grid",
        )
    logger.info("enumerating %d input tuples at resolution %d", count, grid.resolution)

    mac = ch.law("mac")
    grid_a, grid_b, grid_r = (grid.distributions(s) for s in sizes)
    uplink = np.array([mutual_information_cond(pa, pb, mac) for pa in grid_a for pb in grid_b])
    downlink = np.array([_downlink_terms(ch, pr) for pr in grid_r])

    d1, d2 = sched.durations
    sum_bound = d1 * uplink[:, 2:3]
    r_a = np.minimum(np.minimum(d1 * uplink[:, 0:1], d2 * downlink[None, :, 1]), sum_bound)
    r_b = np.minimum(np.minimum(d1 * uplink[:, 1:2], d2 * downlink[None, :, 0]), sum_bound)
    corners = np.concatenate([
        np.stack([r_a, np.minimum(r_b, sum_bound - r_a)], axis=-1).reshape(-1, 2),
        np.stack([np.minimum(r_a, sum_bound - r_b), r_b], axis=-1).reshape(-1, 2),
        [[0.0, 0.0], [r_a.max(), 0.0], [0.0, r_b.max()]],
    ])
    corners = np.unique(np.maximum(corners, 0.0), axis=0)
    return RateRegion.from_points(map(tuple, corners.tolist()))
