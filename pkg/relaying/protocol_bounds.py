"""Constraint templates of the DT, MABC, TDBC and HBC bounds.

Every bound is a list of linear inequalities over the variable vector
(D1, D2, D3, D4, R_a, R_b): a rate (or the sum rate) on the left, a
Delta-weighted sum of mutual-information constants on the right. With the
schedule fixed they become half-planes in the (R_a, R_b) quadrant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from relaying.channel_model import Link, MIKey, MITable, Protocol
from relaying.errors import InvalidArgumentError, UnsupportedBoundError
from relaying.rate_region import HalfPlane, RateRegion, region_from_halfplanes

logger = logging.getLogger(__name__)

VARIABLES = ("delta_1", "delta_2", "delta_3", "delta_4", "r_a", "r_b")
R_A, R_B = 4, 5
SCHEDULE_SUM_TOL = 1e-12

HBC_OUTER_REASON = (
    "the Gaussian HBC outer bound is not evaluated: jointly Gaussian inputs are not "
    "known to be optimal for the correlated phase-3 inputs and conditional terms"
)


class BoundKind(str, Enum):
    INNER = "inner"
    OUTER = "outer"
    OUTER_RELAY_FREE = "outer_relay_free"

    @classmethod
    def parse(cls, text: str) -> "BoundKind":
        """Accepts the enum values plus `exact` (DT's region is exact)."""
        normalized = (text or "").strip().lower().replace("-", "_")
        if normalized == "exact":
            return cls.INNER
        try:
            return cls(normalized)
        except ValueError:
            raise InvalidArgumentError(f"unknown bound kind {text!r}", parameter="bound") from None


class PhaseSchedule(BaseModel):
    """Relative phase durations; non-negative and summing to one."""

    model_config = ConfigDict(frozen=True)

    protocol: Protocol
    durations: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_durations(self) -> "PhaseSchedule":
        expected = self.protocol.num_phases
        if len(self.durations) != expected:
            raise ValueError(
                f"{self.protocol.value.upper()} needs {expected} phase durations, got {len(self.durations)}"
            )
        if any(not np.isfinite(d) or d < 0 for d in self.durations):
            raise ValueError("phase durations must be finite and >= 0")
        if abs(sum(self.durations) - 1.0) > SCHEDULE_SUM_TOL:
            raise ValueError(f"phase durations must sum to 1, got {sum(self.durations)!r}")
        return self

    @classmethod
    def uniform(cls, protocol: Protocol) -> "PhaseSchedule":
        n = Protocol(protocol).num_phases
        return cls(protocol=protocol, durations=tuple([1.0 / n] * n))

    def padded(self) -> Tuple[float, float, float, float]:
        return tuple(self.durations) + (0.0,) * (4 - len(self.durations))


@dataclass(frozen=True)
class LinearConstraint:
    """coefficients . (D1, D2, D3, D4, R_a, R_b) <= rhs"""

    name: str
    coefficients: Tuple[float, ...]
    rhs: float = 0.0


@dataclass(frozen=True)
class ConstraintSet:
    protocol: Protocol
    bound: BoundKind
    constraints: Tuple[LinearConstraint, ...]

    def matrix(self) -> np.ndarray:
        return np.array([c.coefficients for c in self.constraints], dtype=float)

    def halfplanes_at(self, sched: PhaseSchedule) -> List[HalfPlane]:
        deltas = sched.padded()
        return [
            HalfPlane(
                c.coefficients[R_A],
                c.coefficients[R_B],
                c.rhs - sum(coef * d for coef, d in zip(c.coefficients[:4], deltas)),
            )
            for c in self.constraints
        ]


# (rate coefficients on (R_a, R_b), Delta-weighted MI terms)
Template = List[Tuple[Tuple[int, int], Tuple[MIKey, ...]]]

_A, _B, _SUM = (1, 0), (0, 1), (1, 1)

_TEMPLATES: Dict[Tuple[Protocol, BoundKind], Template] = {
    (Protocol.DT, BoundKind.INNER): [
        (_A, ((1, Link.DIRECT),)),
        (_B, ((2, Link.DIRECT),)),
    ],
    (Protocol.MABC, BoundKind.INNER): [
        (_A, ((1, Link.UPLINK_A),)),
        (_A, ((2, Link.DOWNLINK_B),)),
        (_B, ((1, Link.UPLINK_B),)),
        (_B, ((2, Link.DOWNLINK_A),)),
        (_SUM, ((1, Link.MAC_SUM),)),
    ],
    (Protocol.TDBC, BoundKind.INNER): [
        (_A, ((1, Link.UPLINK_A),)),
        (_A, ((1, Link.DIRECT), (3, Link.DOWNLINK_B))),
        (_B, ((2, Link.UPLINK_B),)),
        (_B, ((2, Link.DIRECT), (3, Link.DOWNLINK_A))),
    ],
    (Protocol.TDBC, BoundKind.OUTER): [
        (_A, ((1, Link.JOINT_A),)),
        (_A, ((1, Link.DIRECT), (3, Link.DOWNLINK_B))),
        (_B, ((2, Link.JOINT_B),)),
        (_B, ((2, Link.DIRECT), (3, Link.DOWNLINK_A))),
        (_SUM, ((1, Link.UPLINK_A), (2, Link.UPLINK_B))),
    ],
    (Protocol.HBC, BoundKind.INNER): [
        (_A, ((1, Link.UPLINK_A), (3, Link.UPLINK_A))),
        (_A, ((1, Link.DIRECT), (4, Link.DOWNLINK_B))),
        (_B, ((2, Link.UPLINK_B), (3, Link.UPLINK_B))),
        (_B, ((2, Link.DIRECT), (4, Link.DOWNLINK_A))),
        (_SUM, ((1, Link.UPLINK_A), (2, Link.UPLINK_B), (3, Link.MAC_SUM))),
    ],
    (Protocol.HBC, BoundKind.OUTER_RELAY_FREE): [
        (_A, ((1, Link.JOINT_A), (3, Link.UPLINK_A))),
        (_A, ((1, Link.DIRECT), (4, Link.DOWNLINK_B))),
        (_B, ((2, Link.JOINT_B), (3, Link.UPLINK_B))),
        (_B, ((2, Link.DIRECT), (4, Link.DOWNLINK_A))),
    ],
}

# MABC's inner region is its capacity region.
_TEMPLATES[(Protocol.MABC, BoundKind.OUTER)] = _TEMPLATES[(Protocol.MABC, BoundKind.INNER)]
_TEMPLATES[(Protocol.MABC, BoundKind.OUTER_RELAY_FREE)] = _TEMPLATES[(Protocol.MABC, BoundKind.INNER)][:-1]
_TEMPLATES[(Protocol.TDBC, BoundKind.OUTER_RELAY_FREE)] = _TEMPLATES[(Protocol.TDBC, BoundKind.OUTER)][:-1]


def _template(protocol: Protocol, bound: BoundKind) -> Template:
    if protocol is Protocol.HBC and bound is BoundKind.OUTER:
        raise UnsupportedBoundError(HBC_OUTER_REASON, parameter="bound")
    if protocol is Protocol.DT and bound is not BoundKind.INNER:
        raise UnsupportedBoundError(
            "DT has an exact region; outer bounds are not defined for it", parameter="bound"
        )
    return _TEMPLATES[(protocol, bound)]


def check_supported(protocol: Protocol, bound: BoundKind) -> None:
    _template(Protocol(protocol), BoundKind(bound))


def _describe(rates: Tuple[int, int], terms: Sequence[MIKey]) -> str:
    lhs = {_A: "R_a", _B: "R_b", _SUM: "R_a + R_b"}[rates]
    return f"{lhs} <= " + " + ".join(f"D{phase}*{link.value}" for phase, link in terms)


def build_constraints(protocol: Protocol, bound: BoundKind, mi: MITable) -> ConstraintSet:
    protocol, bound = Protocol(protocol), BoundKind(bound)
    if mi.protocol is not protocol:
        raise InvalidArgumentError(
            f"MI table was built for {mi.protocol.value.upper()}, not {protocol.value.upper()}",
            parameter="mi",
        )
    template = _template(protocol, bound)

    missing = mi.missing({key for _, terms in template for key in terms})
    if missing:
        listed = ", ".join(f"(phase {p}, {link.value})" for p, link in missing)
        raise InvalidArgumentError(f"MI table is missing {listed}", parameter="mi")

    constraints = []
    for rates, terms in template:
        coefficients = [0.0] * len(VARIABLES)
        for phase, link in terms:
            coefficients[phase - 1] -= mi[(phase, link)]
        coefficients[R_A], coefficients[R_B] = float(rates[0]), float(rates[1])
        constraints.append(LinearConstraint(_describe(rates, terms), tuple(coefficients)))
    return ConstraintSet(protocol=protocol, bound=bound, constraints=tuple(constraints))


def fixed_delta_region(protocol: Protocol, bound: BoundKind, mi: MITable, sched: PhaseSchedule) -> RateRegion:
    protocol = Protocol(protocol)
    if sched.protocol is not protocol:
        raise InvalidArgumentError(
            f"schedule is for {sched.protocol.value.upper()}, not {protocol.value.upper()}",
            parameter="sched",
        )
    constraint_set = build_constraints(protocol, bound, mi)
    region = region_from_halfplanes(constraint_set.halfplanes_at(sched))
    logger.debug("%s/%s at %s -> %d vertices", protocol.value, BoundKind(bound).value,
                 sched.durations, len(region.vertices))
    return region
