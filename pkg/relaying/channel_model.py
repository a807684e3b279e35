"""Gaussian channel parameterization and per-phase mutual-information tables.

Gains are linear power gains G_ij = |g_ij|^2 (path loss and quasi-static
fading combined), one per node pair since the links are reciprocal. Every
node transmits with the same power P in every phase and the noise has unit
power, so each mutual-information term reduces to C(SNR) = log2(1 + SNR).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from relaying.errors import InvalidArgumentError


class Protocol(str, Enum):
    DT = "dt"
    MABC = "mabc"
    TDBC = "tdbc"
    HBC = "hbc"

    @property
    def num_phases(self) -> int:
        return _NUM_PHASES[self]


class Link(str, Enum):
    """Distinct mutual-information terms appearing in the protocol bounds."""

    UPLINK_A = "uplink_a"      # A -> R (given B's input when both transmit)
    UPLINK_B = "uplink_b"      # B -> R
    MAC_SUM = "mac_sum"        # (A, B) -> R
    DOWNLINK_A = "downlink_a"  # R -> A
    DOWNLINK_B = "downlink_b"  # R -> B
    DIRECT = "direct"          # A -> B or B -> A, depending on the phase
    JOINT_A = "joint_a"        # A -> {R, B}
    JOINT_B = "joint_b"        # B -> {R, A}


MIKey = Tuple[int, Link]

_NUM_PHASES: Dict[Protocol, int] = {
    Protocol.DT: 2,
    Protocol.MABC: 2,
    Protocol.TDBC: 3,
    Protocol.HBC: 4,
}

_SIDE_INFO_PHASES: FrozenSet[MIKey] = frozenset({
    (1, Link.UPLINK_A), (1, Link.DIRECT), (1, Link.JOINT_A),
    (2, Link.UPLINK_B), (2, Link.DIRECT), (2, Link.JOINT_B),
})

TEMPLATE_KEYS: Dict[Protocol, FrozenSet[MIKey]] = {
    Protocol.DT: frozenset({(1, Link.DIRECT), (2, Link.DIRECT)}),
    Protocol.MABC: frozenset({
        (1, Link.UPLINK_A), (1, Link.UPLINK_B), (1, Link.MAC_SUM),
        (2, Link.DOWNLINK_A), (2, Link.DOWNLINK_B),
    }),
    Protocol.TDBC: _SIDE_INFO_PHASES | {(3, Link.DOWNLINK_A), (3, Link.DOWNLINK_B)},
    Protocol.HBC: _SIDE_INFO_PHASES | {
        (3, Link.UPLINK_A), (3, Link.UPLINK_B), (3, Link.MAC_SUM),
        (4, Link.DOWNLINK_A), (4, Link.DOWNLINK_B),
    },
}


def db_to_linear(x_db: float) -> float:
    if not math.isfinite(x_db):
        raise InvalidArgumentError(f"dB value must be finite, got {x_db!r}", parameter="x_db")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if not math.isfinite(x) or x <= 0:
        raise InvalidArgumentError(f"linear value must be finite and > 0, got {x!r}", parameter="x")
    return 10.0 * math.log10(x)


def capacity_c(x: float) -> float:
    """C(x) = log2(1 + x), in bits per channel use."""
    if not math.isfinite(x) or x < 0:
        raise InvalidArgumentError(f"SNR must be finite and >= 0, got {x!r}", parameter="x")
    return math.log2(1.0 + x)


class ChannelGains(BaseModel):
    """Linear power gains of one channel realization and the common power P."""

    model_config = ConfigDict(frozen=True)

    g_ab_pow: float = Field(ge=0, allow_inf_nan=False)
    g_ar_pow: float = Field(ge=0, allow_inf_nan=False)
    g_br_pow: float = Field(ge=0, allow_inf_nan=False)
    power: float = Field(gt=0, allow_inf_nan=False)

    @classmethod
    def from_db(cls, p_db: float, g_ab_db: float, g_ar_db: float, g_br_db: float) -> "ChannelGains":
        return cls(
            g_ab_pow=db_to_linear(g_ab_db),
            g_ar_pow=db_to_linear(g_ar_db),
            g_br_pow=db_to_linear(g_br_db),
            power=db_to_linear(p_db),
        )

    @property
    def ordered(self) -> bool:
        """True when G_ab <= G_ar <= G_br, the regime the bounds were compared in."""
        return self.g_ab_pow <= self.g_ar_pow <= self.g_br_pow

    def link_gains(self, link: Link) -> np.ndarray:
        """Receive-by-transmit amplitude matrix of the link (rows: receivers)."""
        a_r, b_r, a_b = (math.sqrt(g) for g in (self.g_ar_pow, self.g_br_pow, self.g_ab_pow))
        matrices = {
            Link.UPLINK_A: [[a_r]],
            Link.DOWNLINK_A: [[a_r]],
            Link.UPLINK_B: [[b_r]],
            Link.DOWNLINK_B: [[b_r]],
            Link.DIRECT: [[a_b]],
            Link.MAC_SUM: [[a_r, b_r]],
            Link.JOINT_A: [[a_r], [a_b]],
            Link.JOINT_B: [[b_r], [a_b]],
        }
        return np.array(matrices[link], dtype=float)

    def snr(self, link: Link) -> float:
        """Received SNR of the link; joint reception and MAC sums add powers."""
        return self.power * float(np.sum(self.link_gains(link) ** 2))


@dataclass(frozen=True)
class MITable:
    """Per-phase mutual-information constants (bits/channel use) of one protocol."""

    protocol: Protocol
    entries: Mapping[MIKey, float]

    def __post_init__(self) -> None:
        allowed = TEMPLATE_KEYS[self.protocol]
        clean: Dict[MIKey, float] = {}
        for (phase, link), value in self.entries.items():
            key = (int(phase), Link(link))
            if key not in allowed:
                raise InvalidArgumentError(
                    f"entry (phase {key[0]}, {key[1].value}) is not part of the "
                    f"{self.protocol.value.upper()} template",
                    parameter="mi",
                )
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise InvalidArgumentError(
                    f"entry (phase {key[0]}, {key[1].value}) must be finite and >= 0, got {value!r}",
                    parameter="mi",
                )
            clean[key] = value
        object.__setattr__(self, "entries", MappingProxyType(clean))

    def __getitem__(self, key: MIKey) -> float:
        return self.entries[key]

    def missing(self, keys: Iterable[MIKey]) -> List[MIKey]:
        return sorted((k for k in keys if k not in self.entries), key=lambda k: (k[0], k[1].value))


def gaussian_mi_table(gains: ChannelGains, protocol: Protocol) -> MITable:
    """Evaluate every term of the protocol's templates with independent
    unit-variance complex Gaussian inputs and |Q| = 1."""
    protocol = Protocol(protocol)
    entries = {key: capacity_c(gains.snr(key[1])) for key in TEMPLATE_KEYS[protocol]}
    return MITable(protocol=protocol, entries=entries)


def estimate_gaussian_mi(gains: ChannelGains, link: Link, samples: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo estimate of I(X_T; Y) in bits for Y = H X + Z.

    Averages the log-density ratio log p(y|x) - log p(y) over sampled inputs
    X ~ CN(0, P I) and noise Z ~ CN(0, I).
    """
    h = gains.link_gains(Link(link))
    n_rx, n_tx = h.shape
    rng = np.random.default_rng(seed)
    scale = math.sqrt(gains.power / 2.0)
    x = scale * (rng.standard_normal((samples, n_tx)) + 1j * rng.standard_normal((samples, n_tx)))
    z = math.sqrt(0.5) * (rng.standard_normal((samples, n_rx)) + 1j * rng.standard_normal((samples, n_rx)))
    y = x @ h.T + z

    sigma = np.eye(n_rx) + gains.power * (h @ h.T)
    sigma_inv = np.linalg.inv(sigma)
    quad = np.einsum("ni,ij,nj->n", y.conj(), sigma_inv, y).real
    log_ratio = quad - np.sum(np.abs(z) ** 2, axis=1) + math.log(np.linalg.det(sigma))
    return float(np.mean(log_ratio) / math.log(2.0))
