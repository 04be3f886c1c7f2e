"""Power-split optimum, goodput-optimal training duration, monotonicity."""

import math

import numpy as np
import pytest

from mimopam import (
    ConfigError,
    PowerConvention,
    SystemConfig,
    alpha_star,
    alpha_star_for_config,
    goodput_grid,
    optimize_goodput,
    rho_eff_of_alpha,
    verify_monotone_mse_sep,
)

FIG6 = dict(rho=10**1.5, tau=1000 / 256, tau_d=744 / 256)


class TestAlphaStar:
    def test_reference_annotation(self):
        res = alpha_star(**FIG6)
        assert res.alpha_star == pytest.approx(0.629, abs=1e-3)
        assert res.branch == "tau_d>1"

    def test_matches_dense_grid_argmax(self):
        res = alpha_star(**FIG6)
        grid = np.linspace(1e-4, 1 - 1e-4, 10_001)
        vals = [rho_eff_of_alpha(FIG6["rho"], FIG6["tau"], FIG6["tau_d"], a) for a in grid]
        assert abs(res.alpha_star - grid[int(np.argmax(vals))]) <= (grid[1] - grid[0])

    def test_equal_split_when_one_data_symbol_per_antenna(self):
        res = alpha_star(rho=3.0, tau=2.0, tau_d=1.0)
        assert res.alpha_star == 0.5
        assert res.branch == "tau_d=1"

    def test_low_power_limit_is_equal_split(self):
        res = alpha_star(rho=1e-4, tau=FIG6["tau"], tau_d=FIG6["tau_d"])
        assert res.alpha_star == pytest.approx(0.5, abs=1e-3)

    def test_high_power_limit(self):
        tau_d = FIG6["tau_d"]
        want = math.sqrt(tau_d) / (1 + math.sqrt(tau_d))
        res = alpha_star(rho=1e6, tau=FIG6["tau"], tau_d=tau_d)
        assert res.alpha_star == pytest.approx(want, abs=1e-3)

    def test_branch_lattice_against_grid(self):
        # all three branches, several powers and block shapes
        grid = np.linspace(1e-4, 1 - 1e-4, 10_001)
        step = grid[1] - grid[0]
        for rho in (0.1, 2.0, 50.0):
            for tau in (1.5, 3.0, 8.0):
                for tau_d in (0.5, 1.0, min(tau - 0.25, 2.5)):
                    res = alpha_star(rho, tau, tau_d)
                    vals = [rho_eff_of_alpha(rho, tau, tau_d, a) for a in grid]
                    best = grid[int(np.argmax(vals))]
                    assert abs(res.alpha_star - best) <= step + 1e-12
                    assert 0.0 < res.alpha_star < 1.0

    def test_config_wrapper_requires_energy_conserving(self):
        cfg = SystemConfig(k=256, n=512, t_total=1000, t_pilot=256, rho=10**1.5,
                           alpha=0.5, power_convention=PowerConvention.DIRECT_SPLIT)
        with pytest.raises(ConfigError, match="energy-conserving"):
            alpha_star_for_config(cfg)

    def test_rejects_bad_domains(self):
        with pytest.raises(ConfigError):
            alpha_star(rho=0.0, tau=2.0, tau_d=1.0)
        with pytest.raises(ConfigError):
            alpha_star(rho=1.0, tau=2.0, tau_d=0.0)


class TestOptimizeGoodput:
    def test_training_floor_is_antenna_count(self):
        for rho_db in (0, 10, 20):
            res = optimize_goodput(10 ** (rho_db / 10), k=400, t_total=1000, delta=1.2)
            assert res.tau_p_star == pytest.approx(1.0)

    def test_alpha_matches_power_only_optimum_at_the_floor(self):
        rho = 10.0
        res = optimize_goodput(rho, k=400, t_total=1000, delta=1.2)
        base = alpha_star(rho, 1000 / 400, (1000 - 400) / 400)
        assert res.alpha_star == pytest.approx(base.alpha_star, rel=1e-12)

    def test_alpha_invariant_to_decoder(self):
        got = {dec: optimize_goodput(5.0, k=128, t_total=512, delta=1.5, decoder=dec)
               for dec in ("ls", "rls", "box")}
        assert got["ls"].alpha_star == got["rls"].alpha_star == got["box"].alpha_star
        assert got["box"].conjecture_based and not got["rls"].conjecture_based

    def test_goodput_dominates_grid(self):
        rho = 10.0
        t_pilots, _, goodputs = goodput_grid(rho, k=128, t_total=512, delta=1.5)
        res = optimize_goodput(rho, k=128, t_total=512, delta=1.5)
        assert res.goodput >= goodputs.max() - 1e-15
        assert res.goodput >= goodputs[t_pilots.tolist().index(2 * 128)]

    def test_tiny_block_goodput_vanishes(self):
        # only one data symbol available: goodput factor (1 - tau_p/tau) -> 0
        res = optimize_goodput(10.0, k=128, t_total=130, delta=1.5)
        assert res.goodput <= 2 / 130 + 1e-12

    def test_rejects_block_without_data(self):
        with pytest.raises(ConfigError):
            optimize_goodput(10.0, k=128, t_total=128, delta=1.5)


class TestMonotonicity:
    def test_wide_grid_low_delta(self):
        grid = np.geomspace(0.1, 1000.0, 60)
        report = verify_monotone_mse_sep(grid, delta=1.2, m=2)
        assert report.all_monotone
        assert np.all(report.mse_margins >= 0)
        assert np.all(report.sep_margins >= 0)

    def test_high_order_high_delta(self):
        grid = np.geomspace(0.1, 1000.0, 60)
        assert verify_monotone_mse_sep(grid, delta=4.0, m=8).all_monotone

    def test_single_point_vacuous(self):
        report = verify_monotone_mse_sep(np.array([1.0]), delta=2.0, m=2)
        assert report.all_monotone
        assert report.mse_margins.size == 0

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ConfigError):
            verify_monotone_mse_sep(np.array([1.0, 0.5]), delta=2.0, m=2)
