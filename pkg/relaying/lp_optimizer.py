"""Linear programming over phase durations.

For a fixed MI table every bound is jointly linear in (Delta, R_a, R_b), so
the best schedule for a weighted rate objective is a small LP. A dense
two-phase simplex with Bland's rule is plenty at this size (at most six
variables and a handful of constraints).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from relaying import config
from relaying.channel_model import MITable, Protocol
from relaying.errors import InvalidArgumentError, SolverError
from relaying.protocol_bounds import (
    R_A,
    R_B,
    BoundKind,
    PhaseSchedule,
    build_constraints,
    check_supported,
)
from relaying.rate_region import RatePair, RateRegion

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
REFINE_TOL = 1e-10
MAX_ITERATIONS = 10_000
MAX_REFINE_DEPTH = 60


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """maximize objective . x  s.t.  a_ub x <= b_ub,  a_eq x = b_eq,  x >= 0"""

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        n = len(np.atleast_1d(self.objective))
        shapes = {
            "objective": np.asarray(self.objective, dtype=float).reshape(n),
            "a_ub": np.asarray(self.a_ub, dtype=float).reshape(-1, n),
            "b_ub": np.asarray(self.b_ub, dtype=float).reshape(-1),
            "a_eq": np.asarray(self.a_eq, dtype=float).reshape(-1, n),
            "b_eq": np.asarray(self.b_eq, dtype=float).reshape(-1),
        }
        if shapes["a_ub"].shape[0] != shapes["b_ub"].shape[0]:
            raise InvalidArgumentError("a_ub and b_ub row counts differ", parameter="lp")
        if shapes["a_eq"].shape[0] != shapes["b_eq"].shape[0]:
            raise InvalidArgumentError("a_eq and b_eq row counts differ", parameter="lp")
        for name, value in shapes.items():
            if not np.all(np.isfinite(value)):
                raise InvalidArgumentError(f"{name} must be finite", parameter="lp")
            object.__setattr__(self, name, value)

    @property
    def num_variables(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    value: float = float("nan")
    point: Tuple[float, ...] = ()


def _pivot(tableau: np.ndarray, basis: List[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i] -= tableau[i, col] * tableau[row]
    basis[row] = col


def _run_bland(tableau: np.ndarray, basis: List[int], cost: np.ndarray, n_cols: int) -> LpStatus:
    """Primal simplex on the first n_cols columns; smallest-index entering and leaving."""
    rows = tableau.shape[0]
    for _ in range(MAX_ITERATIONS):
        reduced = cost[:n_cols] - cost[basis] @ tableau[:, :n_cols]
        basic = set(basis)
        entering = next((j for j in range(n_cols) if j not in basic and reduced[j] > PIVOT_TOL), None)
        if entering is None:
            return LpStatus.OPTIMAL

        column = tableau[:, entering]
        candidates = [i for i in range(rows) if column[i] > PIVOT_TOL]
        if not candidates:
            return LpStatus.UNBOUNDED
        ratios = {i: max(tableau[i, -1], 0.0) / column[i] for i in candidates}
        best = min(ratios.values())
        leaving = min((basis[i], i) for i in candidates if ratios[i] <= best + PIVOT_TOL)[1]
        _pivot(tableau, basis, leaving, entering)
    raise SolverError(f"simplex did not terminate within {MAX_ITERATIONS} pivots", parameter="lp")


def simplex_solve(lp: LinearProgram) -> LpSolution:
    n = lp.num_variables
    m_ub, m_eq = lp.a_ub.shape[0], lp.a_eq.shape[0]
    m = m_ub + m_eq

    a = np.zeros((m, n + m_ub))
    a[:m_ub, :n] = lp.a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    a[m_ub:, :n] = lp.a_eq
    b = np.concatenate([lp.b_ub, lp.b_eq])
    flipped = b < 0
    a[flipped] *= -1.0
    b[flipped] *= -1.0

    basis = [n + i if i < m_ub and not flipped[i] else -1 for i in range(m)]
    needs_artificial = [i for i in range(m) if basis[i] < 0]
    n_real = n + m_ub
    n_total = n_real + len(needs_artificial)

    tableau = np.zeros((m, n_total + 1))
    tableau[:, :n_real] = a
    tableau[:, -1] = b
    for k, i in enumerate(needs_artificial):
        tableau[i, n_real + k] = 1.0
        basis[i] = n_real + k

    if needs_artificial:
        phase_one = np.zeros(n_total)
        phase_one[n_real:] = -1.0
        _run_bland(tableau, basis, phase_one, n_total)
        if -(phase_one[basis] @ tableau[:, -1]) > FEAS_TOL:
            return LpSolution(LpStatus.INFEASIBLE)

        redundant = []
        for i, var in enumerate(basis):
            if var < n_real:
                continue
            pivots = [j for j in range(n_real) if abs(tableau[i, j]) > PIVOT_TOL]
            if pivots:
                _pivot(tableau, basis, i, pivots[0])
            else:
                redundant.append(i)
        keep = [i for i in range(m) if i not in redundant]
        tableau = np.delete(tableau[keep], np.s_[n_real:n_total], axis=1)
        basis = [basis[i] for i in keep]

    cost = np.zeros(n_real)
    cost[:n] = lp.objective
    status = _run_bland(tableau, basis, cost, n_real)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status)

    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tableau[i, -1]
    return LpSolution(LpStatus.OPTIMAL, float(lp.objective @ x), tuple(float(v) for v in x))


@dataclass(frozen=True)
class ScheduleOptimum:
    schedule: PhaseSchedule
    rates: RatePair
    value: float

    @property
    def sum_rate(self) -> float:
        return self.rates.r_a + self.rates.r_b


def schedule_program(protocol: Protocol, bound: BoundKind, mi: MITable, mu: float) -> LinearProgram:
    """LP over (D1..Dk, R_a, R_b) for a k-phase protocol."""
    protocol = Protocol(protocol)
    constraint_set = build_constraints(protocol, bound, mi)
    k = protocol.num_phases
    columns = list(range(k)) + [R_A, R_B]

    objective = np.zeros(k + 2)
    objective[k], objective[k + 1] = mu, 1.0 - mu
    a_eq = np.zeros((1, k + 2))
    a_eq[0, :k] = 1.0
    return LinearProgram(
        objective=objective,
        a_ub=constraint_set.matrix()[:, columns],
        b_ub=np.zeros(len(constraint_set.constraints)),
        a_eq=a_eq,
        b_eq=np.ones(1),
    )


def optimize_schedule(protocol: Protocol, bound: BoundKind, mi: MITable, mu: float) -> ScheduleOptimum:
    """Best schedule and rates for mu*R_a + (1-mu)*R_b (mu = 1/2 is half the sum rate)."""
    if not 0.0 <= mu <= 1.0:
        raise InvalidArgumentError(f"mu must lie in [0, 1], got {mu!r}", parameter="mu")
    protocol = Protocol(protocol)
    solution = simplex_solve(schedule_program(protocol, bound, mi, mu))
    if solution.status is not LpStatus.OPTIMAL:
        raise SolverError(f"schedule LP returned {solution.status.value}", parameter="lp")

    k = protocol.num_phases
    deltas = [max(d, 0.0) for d in solution.point[:k]]
    total = sum(deltas)
    schedule = PhaseSchedule(protocol=protocol, durations=tuple(d / total for d in deltas))
    rates = RatePair(max(solution.point[k], 0.0), max(solution.point[k + 1], 0.0))
    logger.debug("%s/%s mu=%.6f -> %s value=%.12g", protocol.value, BoundKind(bound).value,
                 mu, schedule.durations, solution.value)
    return ScheduleOptimum(schedule=schedule, rates=rates, value=solution.value)


def _refine(solve: Callable[[float], RatePair], p: RatePair, q: RatePair, depth: int) -> List[RatePair]:
    """Support points strictly between p and q along the boundary (p: larger R_a)."""
    n_a, n_b = q.r_b - p.r_b, p.r_a - q.r_a
    if depth >= MAX_REFINE_DEPTH or n_a < 0 or n_b < 0 or n_a + n_b <= 0:
        return []
    mu = n_a / (n_a + n_b)
    r = solve(mu)
    gain = mu * (r.r_a - p.r_a) + (1.0 - mu) * (r.r_b - p.r_b)
    if gain <= REFINE_TOL:
        return []
    return _refine(solve, p, r, depth + 1) + [r] + _refine(solve, r, q, depth + 1)


def optimized_region(
    protocol: Protocol,
    bound: BoundKind,
    mi: MITable,
    mu_grid_size: Optional[int] = None,
    refine: bool = True,
) -> RateRegion:
    """Projection of the (Delta, R) feasible set onto the rate plane.

    Weighted-LP support points on a mu grid, refined between neighbours until
    no support point lies beyond the current boundary, plus the origin and
    the axis feet of every support point.
    """
    n = config.MU_GRID_SIZE if mu_grid_size is None else mu_grid_size
    if n < 2:
        raise InvalidArgumentError(f"mu grid needs at least 2 points, got {n}", parameter="mu_grid_size")
    check_supported(protocol, bound)

    def solve(mu: float) -> RatePair:
        return optimize_schedule(protocol, bound, mi, mu).rates

    support = [solve(mu) for mu in np.linspace(1.0, 0.0, n)]
    if refine:
        refined = [support[0]]
        for p, q in zip(support, support[1:]):
            refined.extend(_refine(solve, p, q, 0))
            refined.append(q)
        logger.debug("refinement added %d support points", len(refined) - len(support))
        support = refined

    points = [(0.0, 0.0)]
    for r in support:
        points.extend([(r.r_a, r.r_b), (r.r_a, 0.0), (0.0, r.r_b)])
    return RateRegion.from_points(points)
