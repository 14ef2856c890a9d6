import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsbm.homogeneous import fit_homogeneous
from expsbm.sampler import GeneratorConfig, make_community_params, sample_network
from expsbm.selection import completed_loglik, icl, select_k
from expsbm.vem import FitOptions, elbo, hard_tau, BlockParams

from oracles import block_pair_table, completed_term, random_network


class TestICL:
    def test_example(self):
        expected = -500.0 - 4 * math.log(1000) - 0.5 * math.log(100)
        assert icl(-500.0, 2, 100, 1000) == pytest.approx(expected, abs=1e-12)
        assert icl(-500.0, 2, 100, 1000) == pytest.approx(-529.933606, abs=1e-6)

    def test_single_group(self):
        assert icl(-12.0, 1, 50, 300) == pytest.approx(-12.0 - math.log(300), rel=1e-15)

    @given(st.floats(-1e6, 0), st.integers(1, 10), st.integers(2, 500), st.integers(1, 10**6))
    def test_doubling_segments(self, value, K, N, total):
        diff = icl(value, K, N, total) - icl(value, K, N, 2 * total)
        assert diff == pytest.approx(K * K * math.log(2), rel=1e-9, abs=1e-9)

    def test_zero_segments(self):
        with pytest.raises(ValueError):
            icl(-1.0, 1, 10, 0)


class TestCompletedLoglik:
    def test_single_group_is_homogeneous(self):
        net, _ = random_network(10, 2, 5.0, seed=1)
        value, lam, mu, nu = completed_loglik(net, np.zeros(10, int))
        hom = fit_homogeneous(net.stats_matrix())
        assert value == pytest.approx(hom.loglik, rel=1e-13)
        assert mu.item() == pytest.approx(hom.mu_hat, rel=1e-13)

    @pytest.mark.parametrize("directed", [True, False])
    def test_matches_enumerator_term(self, directed):
        net, _ = random_network(6, 2, 5.0, seed=2, directed=directed)
        for z in itertools.product(range(2), repeat=6):
            value, lam, mu, nu = completed_loglik(net, z, K=2)
            table = block_pair_table(net, 2, mu, nu)
            assert value == pytest.approx(completed_term(table, z, lam), abs=1e-10)

    def test_is_hard_elbo_at_own_mle(self):
        net, _ = random_network(9, 3, 5.0, seed=3)
        z = np.array([0, 1, 2] * 3)
        value, lam, mu, nu = completed_loglik(net, z)
        assert value == pytest.approx(elbo(net, BlockParams(lam, mu, nu), hard_tau(z, 3)), rel=1e-12)

    def test_maximises_over_parameters(self):
        rng = np.random.default_rng(4)
        net, _ = random_network(9, 2, 5.0, seed=4)
        z = rng.integers(0, 2, 9)
        value, *_ = completed_loglik(net, z, K=2)
        for _ in range(20):
            p = BlockParams(rng.dirichlet([1, 1]), rng.gamma(2, 0.5, (2, 2)), rng.gamma(2, 0.5, (2, 2)))
            assert elbo(net, p, hard_tau(z, 2)) <= value + 1e-9

    def test_wrong_length(self):
        net, _ = random_network(5, 2, 5.0, seed=5)
        with pytest.raises(ValueError):
            completed_loglik(net, [0, 1])


class TestSelectK:
    @pytest.fixture(scope="class")
    @classmethod
    def community(cls):
        mu, nu = make_community_params(2, 0.5, 5.0)
        return sample_network(GeneratorConfig(40, 2, 10.0, [0.5, 0.5], mu, nu, seed=11))

    def test_single_record(self, community):
        net, _ = community
        report = select_k(net, 2, 2)
        assert len(report.records) == 1 and report.best_K == 2

    def test_picks_true_k(self, community):
        net, _ = community
        report = select_k(net, 1, 4)
        assert report.best_K == 2
        assert report.best.icl == max(r.icl for r in report.records)
        assert [r.K for r in report.records] == [1, 2, 3, 4]
        assert "*" in report.table().splitlines()[2]

    def test_homogeneous_data(self):
        mu, nu = make_community_params(1, 0.5, 5.0)
        net, _ = sample_network(GeneratorConfig(30, 1, 10.0, [1.0], mu, nu, seed=12))
        assert select_k(net, 1, 3).best_K == 1

    def test_parallel_matches_serial(self, community):
        net, _ = community
        a = select_k(net, 1, 3).to_dict()
        b = select_k(net, 1, 3, jobs=2).to_dict()
        assert a == b

    def test_icl_attached_to_fit(self, community):
        net, _ = community
        report = select_k(net, 1, 2)
        for r in report.records:
            assert r.fit.icl == r.icl
            assert r.fit.to_dict()["icl"] == r.icl

    @pytest.mark.parametrize("k_min, k_max", [(0, 2), (3, 2), (1, 100)])
    def test_bad_range(self, community, k_min, k_max):
        with pytest.raises(ValueError):
            select_k(community[0], k_min, k_max)

    def test_ties_go_to_smaller_k(self, monkeypatch):
        import expsbm.selection as sel
        net, _ = random_network(6, 2, 5.0, seed=6)
        monkeypatch.setattr(sel, "icl", lambda *a: 0.0)
        assert select_k(net, 1, 3).best_K == 1
