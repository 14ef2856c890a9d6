import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsbm.homogeneous import fit_homogeneous, homogeneous_loglik, pooled_totals, profile_grid
from expsbm.timeline import PairStats
from expsbm.vem import fit

from oracles import random_network


class TestFitHomogeneous:
    def test_two_pairs(self):
        res = fit_homogeneous([PairStats(2, 2, 4.0, 6.0), PairStats(0, 0, 3.0, 7.0)])
        assert res.mu_hat == pytest.approx(2 / 7, rel=1e-15)
        assert res.nu_hat == pytest.approx(2 / 13, rel=1e-15)
        assert not res.degenerate

    def test_degenerate(self):
        res = fit_homogeneous([PairStats(0, 0, 0.0, 10.0)])
        assert res.mu_hat == 0.0 and res.nu_hat == 0.0
        assert res.mu_degenerate and res.nu_degenerate
        assert res.loglik == 0.0

    def test_count_without_exposure_is_impossible(self):
        with pytest.raises(ValueError):
            fit_homogeneous([PairStats(1, 0, 0.0, 10.0)])

    def test_empty(self):
        with pytest.raises(ValueError):
            fit_homogeneous([])

    def test_doubling_exposure_halves_rate(self):
        base = [PairStats(2, 2, 4.0, 6.0), PairStats(1, 3, 2.5, 7.5)]
        doubled = [PairStats(s.a_plus, s.a_minus, 2 * s.x_plus, s.x_minus) for s in base]
        assert fit_homogeneous(doubled).mu_hat == pytest.approx(fit_homogeneous(base).mu_hat / 2, rel=1e-15)

    def test_loglik_is_closed_form_at_estimate(self):
        stats = [PairStats(2, 2, 4.0, 6.0), PairStats(0, 0, 3.0, 7.0)]
        res = fit_homogeneous(stats)
        expected = 2 * math.log(2 / 7) + 2 * math.log(2 / 13) - 2 - 2
        assert res.loglik == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20), st.floats(0.1, 50), st.floats(0.1, 50)),
                    min_size=1, max_size=10))
    def test_grid_never_beats_estimate(self, rows):
        stats = [PairStats(*r) for r in rows]
        res = fit_homogeneous(stats)
        mu_grid = np.linspace(0.5, 1.5, 41) * max(res.mu_hat, 1e-3)
        nu_grid = np.linspace(0.5, 1.5, 41) * max(res.nu_hat, 1e-3)
        assert profile_grid(stats, mu_grid, nu_grid).max() <= res.loglik + 1e-10

    def test_matrix_and_list_inputs_agree(self):
        net, _ = random_network(10, 2, 5.0, seed=1)
        a = fit_homogeneous(net.stats_matrix())
        b = fit_homogeneous(net.pair_stats().values())
        assert a.mu_hat == pytest.approx(b.mu_hat, rel=1e-13)
        assert a.loglik == pytest.approx(b.loglik, rel=1e-13)

    @pytest.mark.parametrize("directed", [True, False])
    def test_equals_single_group_fit(self, directed):
        net, _ = random_network(15, 2, 10.0, seed=5, directed=directed)
        hom = fit_homogeneous(net.stats_matrix())
        res = fit(net, 1)
        assert res.params.mu[0, 0] == pytest.approx(hom.mu_hat, rel=1e-12)
        assert res.params.nu[0, 0] == pytest.approx(hom.nu_hat, rel=1e-12)
        assert res.elbo == pytest.approx(hom.loglik, rel=1e-12)


def test_loglik_zero_rate_convention():
    assert homogeneous_loglik((0, 3, 2.0, 4.0), 0.0, 0.5) == pytest.approx(3 * math.log(0.5) - 2.0)
    assert pooled_totals([PairStats(1, 2, 3.0, 4.0)] * 2) == (2.0, 4.0, 6.0, 8.0)
