import math
from itertools import combinations, product

import numpy as np
import pytest

from conftest import random_gains, random_table, weak_direct_gains
from relaying.channel_model import ChannelGains, Protocol, gaussian_mi_table
from relaying.errors import InvalidArgumentError, UnsupportedBoundError
from relaying.lp_optimizer import (
    LinearProgram,
    LpStatus,
    optimize_schedule,
    optimized_region,
    schedule_program,
    simplex_solve,
)
from relaying.protocol_bounds import BoundKind, PhaseSchedule, fixed_delta_region
from relaying.rate_region import RatePair, contains, exists_point_outside, max_weighted_rate

SUPPORTED = [
    (Protocol.DT, BoundKind.INNER),
    (Protocol.MABC, BoundKind.INNER),
    (Protocol.MABC, BoundKind.OUTER),
    (Protocol.MABC, BoundKind.OUTER_RELAY_FREE),
    (Protocol.TDBC, BoundKind.INNER),
    (Protocol.TDBC, BoundKind.OUTER),
    (Protocol.TDBC, BoundKind.OUTER_RELAY_FREE),
    (Protocol.HBC, BoundKind.INNER),
    (Protocol.HBC, BoundKind.OUTER_RELAY_FREE),
]


def lp_by_vertex_enumeration(lp):
    """Best objective over all basic feasible solutions."""
    n = lp.num_variables
    ineq_a = np.vstack([lp.a_ub, -np.eye(n)])
    ineq_b = np.concatenate([lp.b_ub, np.zeros(n)])
    best = -math.inf
    for rows in combinations(range(len(ineq_b)), n - lp.a_eq.shape[0]):
        m = np.vstack([lp.a_eq, ineq_a[list(rows)]])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        x = np.linalg.solve(m, np.concatenate([lp.b_eq, ineq_b[list(rows)]]))
        if np.all(ineq_a @ x <= ineq_b + 1e-9):
            best = max(best, float(lp.objective @ x))
    return best


def fixed_sum_rate(protocol, bound, table, durations):
    region = fixed_delta_region(protocol, bound, table, PhaseSchedule(protocol=protocol, durations=durations))
    return 2.0 * max_weighted_rate(region, 0.5)[0]


def simplex_grid(k, step):
    n = round(1.0 / step)
    for head in product(range(n + 1), repeat=k - 1):
        if sum(head) <= n:
            yield tuple(h / n for h in head) + ((n - sum(head)) / n,)


def test_simplex_box():
    solution = simplex_solve(LinearProgram(objective=[1.0, 1.0], a_ub=[[1, 0], [0, 1]], b_ub=[1.0, 2.0]))
    assert solution.status is LpStatus.OPTIMAL
    assert solution.value == pytest.approx(3.0)
    assert solution.point == pytest.approx((1.0, 2.0))


def test_simplex_with_equality():
    lp = LinearProgram(objective=[1.0, 0.0], a_ub=[[1.0, 0.0]], b_ub=[0.3], a_eq=[[1.0, 1.0]], b_eq=[1.0])
    solution = simplex_solve(lp)
    assert solution.value == pytest.approx(0.3)
    assert solution.point == pytest.approx((0.3, 0.7))


def test_simplex_negative_rhs_needs_phase_one():
    lp = LinearProgram(objective=[-1.0, -1.0], a_ub=[[-1.0, -1.0]], b_ub=[-2.0])
    solution = simplex_solve(lp)
    assert solution.status is LpStatus.OPTIMAL
    assert solution.value == pytest.approx(-2.0)


def test_simplex_infeasible():
    assert simplex_solve(LinearProgram(objective=[1.0], a_ub=[[1.0]], b_ub=[-1.0])).status is LpStatus.INFEASIBLE
    lp = LinearProgram(objective=[1.0], a_ub=np.zeros((0, 1)), b_ub=[], a_eq=[[1.0], [1.0]], b_eq=[1.0, 2.0])
    assert simplex_solve(lp).status is LpStatus.INFEASIBLE


def test_simplex_unbounded():
    assert simplex_solve(LinearProgram(objective=[1.0], a_ub=[[-1.0]], b_ub=[0.0])).status is LpStatus.UNBOUNDED


def test_simplex_redundant_equalities():
    lp = LinearProgram(objective=[1.0, 2.0], a_ub=np.zeros((0, 2)), b_ub=[],
                       a_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0])
    assert simplex_solve(lp).value == pytest.approx(2.0)


def test_linear_program_validation():
    with pytest.raises(InvalidArgumentError):
        LinearProgram(objective=[1.0], a_ub=[[1.0]], b_ub=[1.0, 2.0])
    with pytest.raises(InvalidArgumentError):
        LinearProgram(objective=[math.nan], a_ub=[[1.0]], b_ub=[1.0])


def test_schedule_program_shape(weak_direct_high):
    lp = schedule_program(Protocol.HBC, BoundKind.INNER, gaussian_mi_table(weak_direct_high, Protocol.HBC), 0.5)
    assert lp.num_variables == 6
    assert lp.a_ub.shape == (5, 6)
    assert lp.b_eq.tolist() == [1.0]


@pytest.mark.parametrize("protocol, bound", SUPPORTED)
def test_simplex_matches_vertex_enumeration(rng, protocol, bound):
    for _ in range(50):
        table = random_table(rng, protocol)
        mu = float(rng.uniform())
        optimum = optimize_schedule(protocol, bound, table, mu)
        expected = lp_by_vertex_enumeration(schedule_program(protocol, bound, table, mu))
        assert optimum.value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("protocol, bound", [pb for pb in SUPPORTED if pb[0].num_phases == 2])
def test_two_phase_optimum_matches_fine_grid(rng, protocol, bound):
    for _ in range(5):
        snr = rng.uniform(0.1, 1.0, size=3)
        gains = ChannelGains(g_ab_pow=snr[0], g_ar_pow=snr[1], g_br_pow=snr[2], power=1.0)
        table = gaussian_mi_table(gains, protocol)
        grid_best = max(fixed_sum_rate(protocol, bound, table, d) for d in simplex_grid(2, 1e-3))
        lp_best = optimize_schedule(protocol, bound, table, 0.5).sum_rate
        assert lp_best >= grid_best - 1e-9
        assert lp_best - grid_best <= 2e-3


@pytest.mark.parametrize("protocol, bound", [pb for pb in SUPPORTED if pb[0].num_phases > 2])
def test_multi_phase_optimum_beats_coarse_grid(rng, protocol, bound):
    for _ in range(3):
        table = random_table(rng, protocol)
        optimum = optimize_schedule(protocol, bound, table, 0.5)
        grid_best = max(fixed_sum_rate(protocol, bound, table, d) for d in simplex_grid(protocol.num_phases, 0.05))
        assert optimum.sum_rate >= grid_best - 1e-9
        at_optimum = fixed_sum_rate(protocol, bound, table, optimum.schedule.durations)
        assert at_optimum == pytest.approx(optimum.sum_rate, abs=1e-9)


@pytest.mark.parametrize("bound", [BoundKind.INNER, BoundKind.OUTER])
def test_tdbc_optimum_matches_fine_grid(rng, bound):
    step = 0.01
    for _ in range(2):
        snr = rng.uniform(0.1, 1.0, size=3)
        gains = ChannelGains(g_ab_pow=snr[0], g_ar_pow=snr[1], g_br_pow=snr[2], power=1.0)
        table = gaussian_mi_table(gains, Protocol.TDBC)
        grid_best = max(fixed_sum_rate(Protocol.TDBC, bound, table, d) for d in simplex_grid(3, step))
        lp_best = optimize_schedule(Protocol.TDBC, bound, table, 0.5).sum_rate
        # some grid schedule is within 4*step of the optimum in L1; R_a and R_b bounds each move by max MI per unit
        slack = 2.0 * 4.0 * step * max(table.entries.values())
        assert lp_best >= grid_best - 1e-9
        assert lp_best - grid_best <= slack


def test_mabc_symmetric_optimum(symmetric_mabc):
    optimum = optimize_schedule(Protocol.MABC, BoundKind.INNER, symmetric_mabc, 0.5)
    assert optimum.schedule.durations[0] == pytest.approx(2.0 / (2.0 + math.log2(3.0)), abs=1e-9)
    assert optimum.schedule.durations[0] == pytest.approx(0.55789, abs=1e-5)
    assert optimum.sum_rate == pytest.approx(0.88422, abs=1e-5)
    assert optimum.rates.r_a == pytest.approx(optimum.rates.r_b, abs=1e-9)
    assert optimum.value == pytest.approx(0.5 * optimum.sum_rate)


def test_dt_unit_sum_rate():
    table = gaussian_mi_table(ChannelGains.from_db(0.0, 0.0, 0.0, 0.0), Protocol.DT)
    assert optimize_schedule(Protocol.DT, BoundKind.INNER, table, 0.5).sum_rate == pytest.approx(1.0)


def test_optimize_rejects_bad_arguments(symmetric_mabc, weak_direct_high):
    with pytest.raises(InvalidArgumentError):
        optimize_schedule(Protocol.MABC, BoundKind.INNER, symmetric_mabc, 1.5)
    with pytest.raises(UnsupportedBoundError):
        optimize_schedule(Protocol.HBC, BoundKind.OUTER, gaussian_mi_table(weak_direct_high, Protocol.HBC), 0.5)
    with pytest.raises(InvalidArgumentError):
        optimized_region(Protocol.MABC, BoundKind.INNER, symmetric_mabc, mu_grid_size=1)


@pytest.mark.parametrize("protocol", [Protocol.TDBC, Protocol.HBC])
def test_optimized_region_contains_every_schedule(rng, weak_direct_high, protocol):
    table = gaussian_mi_table(weak_direct_high, protocol)
    union = optimized_region(protocol, BoundKind.INNER, table)
    for _ in range(50):
        sched = PhaseSchedule(protocol=protocol, durations=tuple(rng.dirichlet(np.ones(protocol.num_phases))))
        assert exists_point_outside(fixed_delta_region(protocol, BoundKind.INNER, table, sched), union) is None


@pytest.mark.parametrize("protocol", [Protocol.MABC, Protocol.TDBC, Protocol.HBC])
def test_optimized_region_support_matches_lp(weak_direct_high, protocol):
    table = gaussian_mi_table(weak_direct_high, protocol)
    union = optimized_region(protocol, BoundKind.INNER, table, mu_grid_size=11)
    for mu in np.linspace(0.0, 1.0, 37):
        lp_value = optimize_schedule(protocol, BoundKind.INNER, table, float(mu)).value
        assert max_weighted_rate(union, float(mu))[0] == pytest.approx(lp_value, abs=1e-9)


def test_refinement_makes_grid_size_irrelevant(weak_direct_high):
    table = gaussian_mi_table(weak_direct_high, Protocol.HBC)
    coarse = optimized_region(Protocol.HBC, BoundKind.INNER, table, mu_grid_size=2)
    fine = optimized_region(Protocol.HBC, BoundKind.INNER, table, mu_grid_size=201)
    assert exists_point_outside(coarse, fine) is None
    assert exists_point_outside(fine, coarse) is None


def _optimized(gains, protocol, bound=BoundKind.INNER):
    return optimized_region(protocol, bound, gaussian_mi_table(gains, protocol))


def test_mabc_wins_at_low_snr_tdbc_region_escapes_at_high_snr():
    low = weak_direct_gains(0.0)
    mabc = optimize_schedule(Protocol.MABC, BoundKind.INNER, gaussian_mi_table(low, Protocol.MABC), 0.5)
    tdbc = optimize_schedule(Protocol.TDBC, BoundKind.INNER, gaussian_mi_table(low, Protocol.TDBC), 0.5)
    assert mabc.sum_rate == pytest.approx(1.0, abs=1e-9)
    assert mabc.sum_rate >= tdbc.sum_rate

    high = weak_direct_gains(10.0)
    witness = exists_point_outside(_optimized(high, Protocol.TDBC), _optimized(high, Protocol.MABC))
    assert witness is not None
    assert witness.r_a > 2.1


def test_hbc_reaches_outside_other_outer_bounds():
    high = weak_direct_gains(10.0)
    hbc = _optimized(high, Protocol.HBC)
    tdbc_outer = _optimized(high, Protocol.TDBC, BoundKind.OUTER)
    mabc = _optimized(high, Protocol.MABC)

    beyond_tdbc = exists_point_outside(hbc, tdbc_outer)
    beyond_mabc = exists_point_outside(hbc, mabc)
    assert beyond_tdbc is not None and beyond_mabc is not None
    assert not contains(tdbc_outer, beyond_tdbc)
    assert not contains(mabc, beyond_mabc)


# boundary points of the P = 10 dB, G_ab = -7 dB, G_ar = 0 dB, G_br = 5 dB regions
TDBC_MAX_R_A = (2.519112666624, 0.0)      # D1 = 0.728186865453, D3 = 1 - D1
MABC_SUM_CORNER = (1.958039638266, 1.347248080126)  # both broadcast links tight, D2 = 0.389442032289


def test_pinned_points_outside_other_bounds():
    high = weak_direct_gains(10.0)
    hbc = _optimized(high, Protocol.HBC)
    tdbc_outer = _optimized(high, Protocol.TDBC, BoundKind.OUTER)
    mabc = _optimized(high, Protocol.MABC)

    c_ar, c_br, c_ab = (math.log2(1.0 + 10.0 * g) for g in (1.0, 10.0 ** 0.5, 10.0 ** -0.7))
    tdbc_corner = RatePair(c_ar * c_br / (c_ar - c_ab + c_br), 0.0)
    assert tdbc_corner.as_tuple() == pytest.approx(TDBC_MAX_R_A, abs=1e-11)
    assert max_weighted_rate(mabc, 1.0)[0] == pytest.approx(2.049353887552, abs=1e-9)
    assert contains(hbc, tdbc_corner)
    assert not contains(mabc, tdbc_corner)

    mabc_corner = RatePair(*MABC_SUM_CORNER)
    assert mabc_corner.r_a + mabc_corner.r_b == pytest.approx(3.305287718392, abs=1e-11)
    assert contains(hbc, mabc_corner)
    assert contains(mabc, mabc_corner)
    assert not contains(tdbc_outer, mabc_corner)
    assert max_weighted_rate(tdbc_outer, 0.5)[0] < 0.5 * 3.2


def test_hbc_sum_rate_dominates(rng):
    strict = 0.0
    for _ in range(200):
        base = random_gains(rng, ordered=True)
        for p_db in (0.0, 5.0, 10.0, 15.0):
            gains = base.model_copy(update={"power": 10.0 ** (p_db / 10.0)})
            rates = {
                protocol: optimize_schedule(protocol, BoundKind.INNER, gaussian_mi_table(gains, protocol), 0.5).sum_rate
                for protocol in Protocol
            }
            others = max(rates[Protocol.DT], rates[Protocol.MABC], rates[Protocol.TDBC])
            assert rates[Protocol.HBC] >= others - 1e-9
            strict = max(strict, rates[Protocol.HBC] - others)
    assert strict > 0.01
