"""Quasi-static fading with path loss, deterministic sweeps and Monte Carlo averages.

Every realization is addressed by its index: the generator for sample i is
seeded from (seed, i) alone, so results do not depend on evaluation order
or on how many worker processes share the work.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from functools import partial
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from relaying import config
from relaying.channel_model import ChannelGains, Protocol, db_to_linear, gaussian_mi_table
from relaying.errors import InvalidArgumentError
from relaying.lp_optimizer import optimize_schedule
from relaying.protocol_bounds import BoundKind

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64/SeedSequence(seed, spawn_key=(index,))"
SWEEP_COLUMNS = ["sweep_value", "protocol", "sum_rate", "delta_1", "delta_2", "delta_3", "delta_4"]

# gains each protocol's bounds read
_NEEDED_GAINS: Dict[Protocol, Tuple[str, ...]] = {
    Protocol.DT: ("g_ab_db",),
    Protocol.MABC: ("g_ar_db", "g_br_db"),
    Protocol.TDBC: ("g_ab_db", "g_ar_db", "g_br_db"),
    Protocol.HBC: ("g_ab_db", "g_ar_db", "g_br_db"),
}


class FadingModel(str, Enum):
    NONE = "none"
    RAYLEIGH = "rayleigh"


class SweepParameter(str, Enum):
    P_DB = "p_db"
    G_AB_DB = "g_ab_db"
    G_AR_DB = "g_ar_db"
    G_BR_DB = "g_br_db"


class FadingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=3.0, gt=0, allow_inf_nan=False)
    d_ab: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    d_ar: float = Field(default=0.5, gt=0, allow_inf_nan=False)
    d_br: float = Field(default=0.5, gt=0, allow_inf_nan=False)
    model: FadingModel = FadingModel.RAYLEIGH
    power: float = Field(default=10.0, gt=0, allow_inf_nan=False)
    samples: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


class SweepSpec(BaseModel):
    """Swept dB parameter over an inclusive range; `fixed` holds the others in dB."""

    model_config = ConfigDict(frozen=True)

    parameter: SweepParameter
    start: float = Field(allow_inf_nan=False)
    stop: float = Field(allow_inf_nan=False)
    step: float = Field(gt=0, allow_inf_nan=False)
    fixed: Dict[SweepParameter, float] = Field(default_factory=dict)

    @field_validator("stop")
    @classmethod
    def _check_range(cls, stop: float, info: ValidationInfo) -> float:
        start = info.data.get("start")
        if start is not None and start > stop:
            raise ValueError(f"sweep start {start!r} exceeds stop {stop!r}")
        return stop

    def values(self) -> List[float]:
        count = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        return [self.start + i * self.step for i in range(count)]


class MonteCarloStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: Protocol
    mean: float
    stderr: float
    samples: int


def sample_gains(cfg: FadingConfig, index: int) -> ChannelGains:
    """Realization `index`: G_ij = d_ij^-alpha * F_ij, F_ij ~ Exp(1) under Rayleigh fading."""
    if index < 0:
        raise InvalidArgumentError(f"sample index must be >= 0, got {index}", parameter="index")
    path_loss = np.array([cfg.d_ab, cfg.d_ar, cfg.d_br]) ** (-cfg.alpha)
    if cfg.model is FadingModel.RAYLEIGH:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(index,))))
        fading = rng.exponential(1.0, size=3)
    else:
        fading = np.ones(3)
    g_ab, g_ar, g_br = (float(g) for g in path_loss * fading)
    return ChannelGains(g_ab_pow=g_ab, g_ar_pow=g_ar, g_br_pow=g_br, power=cfg.power)


def sum_rate(gains: ChannelGains, protocol: Protocol, bound: BoundKind = BoundKind.INNER) -> Tuple[float, Tuple[float, ...]]:
    """Optimized mu = 1/2 sum rate and the schedule achieving it."""
    optimum = optimize_schedule(protocol, bound, gaussian_mi_table(gains, protocol), 0.5)
    return optimum.sum_rate, optimum.schedule.durations


def _sweep_gains(spec: SweepSpec, value: float, protocols: Sequence[Protocol]) -> ChannelGains:
    settings = {p.value: v for p, v in spec.fixed.items()}
    settings[spec.parameter.value] = value
    if "p_db" not in settings:
        raise InvalidArgumentError("fixed parameters do not set p_db", parameter="p_db")
    needed = {g for protocol in protocols for g in _NEEDED_GAINS[protocol]}
    for name in sorted(needed):
        if name not in settings:
            raise InvalidArgumentError(f"fixed parameters do not set {name}", parameter=name)

    def gain(name: str) -> float:
        return db_to_linear(settings[name]) if name in settings else 0.0

    return ChannelGains(
        g_ab_pow=gain("g_ab_db"),
        g_ar_pow=gain("g_ar_db"),
        g_br_pow=gain("g_br_db"),
        power=db_to_linear(settings["p_db"]),
    )


def _sorted_protocols(protocols: Iterable[Protocol]) -> List[Protocol]:
    chosen = sorted({Protocol(p) for p in protocols}, key=lambda p: p.value)
    if not chosen:
        raise InvalidArgumentError("at least one protocol is required", parameter="protocols")
    return chosen


def sweep_sum_rate(spec: SweepSpec, protocols: Iterable[Protocol], bound: BoundKind = BoundKind.INNER) -> pd.DataFrame:
    """One row per (sweep value, protocol): optimized sum rate and its schedule."""
    chosen = _sorted_protocols(protocols)
    rows = []
    for value in spec.values():
        gains = _sweep_gains(spec, value, chosen)
        for protocol in chosen:
            rate, durations = sum_rate(gains, protocol, bound)
            deltas = list(durations) + [None] * (4 - len(durations))
            rows.append([value, protocol.value, rate] + deltas)
        logger.info("sweep %s=%g done", spec.parameter.value, value)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _evaluate_sample(index: int, cfg: FadingConfig, protocols: Tuple[Protocol, ...], bound: BoundKind) -> Dict[str, object]:
    gains = sample_gains(cfg, index)
    row: Dict[str, object] = {
        "index": index,
        "g_ab": gains.g_ab_pow,
        "g_ar": gains.g_ar_pow,
        "g_br": gains.g_br_pow,
        "ordered": gains.ordered,
    }
    for protocol in protocols:
        row[protocol.value] = sum_rate(gains, protocol, bound)[0]
    return row


def montecarlo_samples(
    cfg: FadingConfig,
    protocols: Iterable[Protocol],
    bound: BoundKind = BoundKind.INNER,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Per-realization table: index, gains, regime flag and one sum-rate column per protocol."""
    chosen = tuple(_sorted_protocols(protocols))
    bound = BoundKind(bound)
    workers = config.WORKERS if workers is None else workers
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}", parameter="workers")

    task = partial(_evaluate_sample, cfg=cfg, protocols=chosen, bound=bound)
    indices = range(cfg.samples)
    if workers == 1:
        rows = [task(i) for i in indices]
    else:
        with Pool(processes=workers) as pool:
            rows = pool.map(task, indices)
    return pd.DataFrame(rows, columns=["index", "g_ab", "g_ar", "g_br", "ordered"] + [p.value for p in chosen])


def summarize(samples: pd.DataFrame, protocols: Iterable[Protocol]) -> List[MonteCarloStats]:
    stats = []
    for protocol in _sorted_protocols(protocols):
        values = samples[protocol.value].tolist()
        n = len(values)
        mean = math.fsum(values) / n
        if n > 1:
            variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
            stderr = math.sqrt(variance / n)
        else:
            stderr = 0.0
        stats.append(MonteCarloStats(protocol=protocol, mean=mean, stderr=stderr, samples=n))
    return stats


def montecarlo_expected_rates(
    cfg: FadingConfig,
    protocols: Iterable[Protocol],
    bound: BoundKind = BoundKind.INNER,
    workers: Optional[int] = None,
) -> List[MonteCarloStats]:
    """Mean and standard error of the optimized sum rate over realizations 0..N-1."""
    stats = summarize(montecarlo_samples(cfg, protocols, bound, workers), protocols)
    for s in stats:
        logger.info("%s: mean %.6f +/- %.6f over %d samples", s.protocol.value, s.mean, s.stderr, s.samples)
    return stats
