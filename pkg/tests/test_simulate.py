"""Simulator fidelity: spectrum, structure, sampling, nonlinear response."""

import numpy as np
import pytest

from pfsgraph.errors import DegenerateSignalError
from pfsgraph.graphs import TrueGraph
from pfsgraph.simulate import (
    PrecisionSpec,
    apply_nonlinear_response,
    fig1_design,
    generate_instance,
    graph_from_precision,
    linear_design,
    make_precision,
    nonlinear_design,
    sample_gaussian,
)


class TestMakePrecision:
    def test_eigenvalue_extremes_hit_targets(self):
        theta = make_precision(linear_design(seed=0))
        eigs = np.linalg.eigvalsh(theta)
        assert abs(eigs[0] - 0.01) < 1e-8
        assert abs(eigs[-1] - 10.0) < 1e-8

    def test_exactly_symmetric(self):
        theta = make_precision(linear_design(seed=1))
        assert np.max(np.abs(theta - theta.T)) == 0.0

    def test_positive_definite_via_factorization(self):
        theta = make_precision(linear_design(seed=2))
        np.linalg.cholesky(theta)  # raises if not PD

    def test_target_block_structure(self):
        spec = linear_design(seed=3)
        g = graph_from_precision(make_precision(spec))
        assert g.neighbors(1) == {2, 3, 4, 5}
        # neighborhood block internally edgeless
        for a in range(2, 6):
            for b in range(a + 1, 6):
                assert (a, b) not in g.edges

    def test_rescale_preserves_offdiagonal_pattern(self):
        spec = nonlinear_design(seed=4)
        rng_pattern = make_precision(spec)
        g_after = graph_from_precision(rng_pattern)
        # reconstruct the pre-rescale pattern: entries are scaled +-1, so the
        # pattern is exactly the nonzeros of the rescaled matrix
        off = np.abs(np.triu(rng_pattern, k=1))
        vals = off[off > 1e-12]
        assert np.allclose(vals, vals[0])  # one common magnitude: pattern intact
        assert len(g_after.edges) == len(vals)

    def test_average_degrees_near_spec_over_seeds(self):
        deg23, deg33 = [], []
        for seed in range(50):
            spec = linear_design(p=120, seed=seed)
            g = graph_from_precision(make_precision(spec))
            b3 = set(range(6, 121))
            deg23.append(np.mean([len(g.neighbors(j) & b3) for j in range(2, 6)]))
            deg33.append(np.mean([len(g.neighbors(j) & b3) for j in b3]))
        assert abs(np.mean(deg23) - spec.avg_degree_23) / spec.avg_degree_23 < 0.25
        assert abs(np.mean(deg33) - spec.avg_degree_33) / spec.avg_degree_33 < 0.25

    def test_block_sizes_must_sum(self):
        with pytest.raises(ValueError):
            PrecisionSpec(p=10, block_sizes=(1, 4, 6), avg_degree_23=2,
                          avg_degree_33=2, eig_min=0.1, eig_max=1.0, seed=0)


class TestSampleGaussian:
    def test_empirical_covariance_close_to_inverse_precision(self):
        spec = PrecisionSpec(p=10, block_sizes=(1, 4, 5), avg_degree_23=2.0,
                             avg_degree_33=1.0, eig_min=0.5, eig_max=2.0, seed=5)
        theta = make_precision(spec)
        x = sample_gaussian(theta, 50_000, seed=6)
        emp = np.cov(x.values, rowvar=False, bias=True)
        want = np.linalg.inv(theta)
        rel = np.linalg.norm(emp - want) / np.linalg.norm(want)
        assert rel < 0.05

    def test_identity_precision_unit_variances(self):
        x = sample_gaussian(np.eye(10), 50_000, seed=7)
        assert np.allclose(x.values.var(axis=0), 1.0, atol=0.05)

    def test_deterministic(self):
        theta = make_precision(fig1_design(p=20, seed=8))
        a = sample_gaussian(theta, 50, seed=9)
        b = sample_gaussian(theta, 50, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_non_pd_rejected(self):
        bad = np.diag([1.0, -1.0, 2.0])
        with pytest.raises(ValueError):
            sample_gaussian(bad, 20, seed=0)


class TestNonlinearResponse:
    def test_snr_limit_noise_free(self):
        theta = make_precision(linear_design(p=30, seed=10))
        x = sample_gaussian(theta, 200, seed=11)
        out = apply_nonlinear_response(x, 1, {2, 3, 4, 5}, snr=1e12, seed=12)
        signal = np.exp(-x.values[:, 1:5] ** 2 / 2).sum(axis=1)
        assert np.allclose(out.values[:, 0], signal, atol=1e-4)

    def test_snr_four_band(self):
        theta = make_precision(linear_design(p=30, seed=13))
        x = sample_gaussian(theta, 10_000, seed=14)
        out = apply_nonlinear_response(x, 1, {2, 3, 4, 5}, snr=4.0, seed=15)
        signal = np.exp(-x.values[:, 1:5] ** 2 / 2).sum(axis=1)
        noise = out.values[:, 0] - signal
        ratio = signal.var() / noise.var()
        assert 3.2 <= ratio <= 4.8

    def test_constant_signal_rejected(self):
        rng = np.random.default_rng(16)
        vals = rng.standard_normal((50, 4))
        vals[:, 2] = 0.0
        from pfsgraph.data import make_data_matrix

        x = make_data_matrix(vals)
        with pytest.raises(DegenerateSignalError):
            apply_nonlinear_response(x, 1, {3}, snr=4.0, seed=17)

    def test_untouched_columns_identical(self):
        theta = make_precision(linear_design(p=20, seed=18))
        x = sample_gaussian(theta, 100, seed=19)
        out = apply_nonlinear_response(x, 1, {2, 3}, snr=4.0, seed=20)
        assert np.array_equal(out.values[:, 1:], x.values[:, 1:])


class TestGraphFromPrecision:
    def test_diagonal_gives_empty_graph(self):
        g = graph_from_precision(np.diag([1.0, 2.0, 3.0]))
        assert g.edges == frozenset()

    def test_large_tolerance_empties_graph(self):
        theta = make_precision(fig1_design(p=15, seed=21))
        off_max = np.abs(theta - np.diag(np.diag(theta))).max()
        g = graph_from_precision(theta, tol=off_max * 1.01)
        assert g.edges == frozenset()

    def test_asymmetric_rejected(self):
        bad = np.eye(3)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            graph_from_precision(bad)


class TestGenerateInstance:
    def test_design_defaults(self):
        inst = generate_instance("linear", seed=22)
        assert inst.samples.values.shape == (100, 200)
        assert inst.response_kind == "linear"
        assert isinstance(inst.truth, TrueGraph)

    def test_nonlinear_rewrites_target(self):
        non = generate_instance("nonlinear", seed=23)
        assert non.response_kind == "nonlinear"
        assert non.truth.neighbors(1) == {2, 3, 4, 5}

    def test_fig1_two_neighbors_and_spectrum(self):
        inst = generate_instance("fig1", seed=24)
        assert inst.samples.values.shape == (200, 100)
        assert inst.truth.neighbors(1) == {2, 3}
        eigs = np.linalg.eigvalsh(inst.theta)
        assert abs(eigs[0] - 0.1) < 1e-8
        assert abs(eigs[-1] - 100.0) < 1e-8

    def test_deterministic(self):
        a = generate_instance("nonlinear", seed=25)
        b = generate_instance("nonlinear", seed=25)
        assert np.array_equal(a.samples.values, b.samples.values)
        assert a.truth.edges == b.truth.edges

    def test_unknown_design_rejected(self):
        with pytest.raises(ValueError):
            generate_instance("cubic", seed=0)
