"""Min-delay LP, closed-form cross-checks and the utility interior-point solver."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iabnet.optimizer import (
    AlphaFairUtility,
    InfeasibleDelay,
    InfeasibleRate,
    LinearUtility,
    LogUtility,
    ProblemInstance,
    SolveStatus,
    closed_form_t_star,
    constraint_report,
    min_feasible_delay,
    solve_min_delay_lp,
    solve_utility_max,
)
from iabnet.topology import DuplexMode, line_network, network_matrices

from conftest import feasible_lambda_upper, random_instance

HD, FD = DuplexMode.HALF_DUPLEX, DuplexMode.FULL_DUPLEX


def _feasible_delta(matrices, eta=0.9, slack=4.0):
    """Delay threshold comfortably inside the delivery-probability region."""
    t0, _ = closed_form_t_star(matrices, 0.0)
    return slack * (-math.log1p(-eta)) / t0


class TestMinFeasibleDelay:
    def test_value(self):
        assert min_feasible_delay(100.0, 0.9) == pytest.approx(-math.log(0.1) / 100.0)

    def test_infeasible_rate(self):
        with pytest.raises(InfeasibleRate):
            min_feasible_delay(0.0, 0.9)
        with pytest.raises(InfeasibleRate):
            min_feasible_delay(-5.0, 0.9)


class TestMinDelayLp:
    @pytest.mark.parametrize("mode", [HD, FD])
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_lp_matches_closed_form(self, mode, seed):
        rng = np.random.default_rng(seed)
        _, m = random_instance(rng, mode)
        lam_min = rng.uniform(0, feasible_lambda_upper(m, 0.9))
        sol = solve_min_delay_lp(ProblemInstance(matrices=m, eta=0.9,
                                                 lambda_min_pps=lam_min))
        t_cf, _ = closed_form_t_star(m, lam_min)
        assert sol.t_star == pytest.approx(t_cf, rel=1e-8)

    @pytest.mark.parametrize("seed", [10, 11, 12])
    def test_pruned_and_unpruned_agree(self, seed):
        rng = np.random.default_rng(seed)
        _, m = random_instance(rng, HD)
        inst = ProblemInstance(matrices=m, eta=0.9, lambda_min_pps=5.0)
        a = solve_min_delay_lp(inst, prune=True)
        b = solve_min_delay_lp(inst, prune=False)
        assert a.t_star == pytest.approx(b.t_star, rel=1e-8)

    def test_infeasible_rate_flagged(self):
        m = network_matrices(line_network(1, 1), HD, 100.0)
        lam_min = 2 * feasible_lambda_upper(m)
        sol = solve_min_delay_lp(ProblemInstance(matrices=m, eta=0.9,
                                                 lambda_min_pps=lam_min))
        assert sol.status is SolveStatus.INFEASIBLE
        assert sol.t_star <= 0

    def test_delta_star_reported(self):
        m = network_matrices(line_network(1, 1), HD, 1000.0)
        sol = solve_min_delay_lp(ProblemInstance(matrices=m, eta=0.9,
                                                 lambda_min_pps=10.0))
        assert sol.delta_star_s == pytest.approx(
            -math.log(0.1) / sol.t_star
        )

    def test_solution_json_round_trip(self):
        m = network_matrices(line_network(1, 1), HD, 1000.0)
        sol = solve_min_delay_lp(ProblemInstance(matrices=m, eta=0.9,
                                                 lambda_min_pps=10.0))
        d = json.loads(sol.to_json())
        assert d["status"] == "optimal"
        assert len(d["mu"]) == m.num_edges


class TestUtilities:
    @pytest.mark.parametrize(
        "utility", [LogUtility(), LinearUtility(), AlphaFairUtility(alpha=2.0)]
    )
    def test_gradients_match_finite_differences(self, utility):
        rng = np.random.default_rng(40)
        lam = rng.uniform(10.0, 500.0, size=4)
        g = utility.grad(lam)
        h = utility.hess_diag(lam)
        eps = 1e-5
        for i in range(4):
            up, dn = lam.copy(), lam.copy()
            up[i] += eps * lam[i]
            dn[i] -= eps * lam[i]
            fd_g = (utility.value(up) - utility.value(dn)) / (2 * eps * lam[i])
            fd_h = (utility.grad(up)[i] - utility.grad(dn)[i]) / (2 * eps * lam[i])
            assert g[i] == pytest.approx(fd_g, rel=1e-5)
            assert h[i] == pytest.approx(fd_h, rel=1e-4, abs=1e-12)

    def test_alpha_one_rejected_and_limit_matches_log(self):
        with pytest.raises(ValueError):
            AlphaFairUtility(alpha=1.0)
        lam = np.array([10.0, 200.0])
        near = AlphaFairUtility(alpha=1.0 + 1e-9)
        assert near.grad(lam) == pytest.approx(LogUtility().grad(lam), rel=1e-6)


class TestUtilityMax:
    def test_single_ue_analytic_optimum(self):
        # donor -> one UE: schedule the whole slot, push lambda until the
        # delivery constraint binds: lambda* = c - zeta
        c = 2000.0
        m = network_matrices(line_network(0, 1), HD, c)
        delta = 0.01
        zeta = -math.log(0.1) / delta
        sol = solve_utility_max(ProblemInstance(matrices=m, eta=0.9, delta_s=delta))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.lam[0] == pytest.approx(c - zeta, rel=1e-4)

    @pytest.mark.parametrize("mode,seed", [(HD, 50), (FD, 51), (HD, 52), (FD, 53)])
    def test_certificate_on_random_instances(self, mode, seed):
        rng = np.random.default_rng(seed)
        _, m = random_instance(rng, mode)
        inst = ProblemInstance(matrices=m, eta=0.9, delta_s=_feasible_delta(m))
        sol = solve_utility_max(inst)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.kkt_residual <= 1e-6 * max(abs(sol.objective), 1e-3)
        rep = constraint_report(inst, sol)
        assert rep["scheduling"] <= 1e-8
        assert rep["mu_upper"] <= 1e-8
        assert rep["mu_lower"] >= -1e-8
        assert rep["stability_gap"] > 0
        assert rep["latency_margin"] >= -1e-8

    def test_tight_delay_is_infeasible(self):
        m = network_matrices(line_network(3, 1), HD, 3000.0)
        t0, _ = closed_form_t_star(m, 0.0)
        delta_star = -math.log(0.1) / t0
        with pytest.raises(InfeasibleDelay):
            solve_utility_max(
                ProblemInstance(matrices=m, eta=0.9, delta_s=0.99 * delta_star)
            )

    def test_more_capacity_more_utility(self):
        m1 = network_matrices(line_network(1, 1), HD, 2000.0)
        m2 = network_matrices(line_network(1, 1), HD, 4000.0)
        delta = _feasible_delta(m1)
        s1 = solve_utility_max(ProblemInstance(matrices=m1, eta=0.9, delta_s=delta))
        s2 = solve_utility_max(ProblemInstance(matrices=m2, eta=0.9, delta_s=delta))
        assert s2.objective > s1.objective

    def test_fd_dominates_hd_objective(self):
        caps = 3000.0
        delta = None
        for mode in (HD, FD):
            m = network_matrices(line_network(2, 1), mode, caps)
            if delta is None:
                delta = _feasible_delta(m)  # HD is tighter; reuse for both
            sol = solve_utility_max(ProblemInstance(matrices=m, eta=0.9, delta_s=delta))
            if mode is HD:
                obj_hd = sol.objective
            else:
                assert sol.objective >= obj_hd - 1e-9
