"""Tests for moments of weighted sums and the l_q-ball machinery.

Monte Carlo assertions use z-scores against quadrature or closed-form
references; budgets and seeds are fixed so the suite is deterministic.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from gaussmix.majorization import (
    WeightVector,
    diagonal_chain,
    random_majorization_pair,
)
from gaussmix.mixtures import (
    DiscreteScaleMixture,
    ExponentialPower,
    GaussianScale,
    InfiniteMomentError,
    SymmetricStable,
)
from gaussmix.numerics import RandomStream, gamma_p
from gaussmix.weighted_sums import (
    BallUniformSpec,
    MomentSpec,
    ball_khintchine_constants,
    ball_marginal_norm,
    ball_radius_quantile,
    ball_uniform_sample,
    khintchine_constants,
    moment_by_quadrature,
    moment_pair,
    weighted_moment,
)

# frozen quadrature oracles (integrals of the bare densities, computed
# independently of the library formulas)
GAMMA_3 = 1.1685752549624655        # (int |t|^3 phi(t) dt)^(1/3)
LAPLACE_B3 = 1.2848982934253252     # 6^(1/3)/sqrt(2) via int t^3 e^-t dt = 6
BALL23_ABS = 0.375                  # int |x| (3/4)(1-x^2) dx on [-1,1]
BALL23_SQ = 0.2                     # int x^2 (3/4)(1-x^2) dx
BALL23_A1 = 0.8385254915624212      # (3/8)/sqrt(1/5)


def zscore(est, ref):
    return (est.value - ref) / max(est.stderr, 1e-12 * abs(ref) + 1e-300)


def sqrt_weights(vec):
    return WeightVector(tuple(math.sqrt(c) for c in vec.coords))


class TestWeightedMoment:
    def test_gaussian_weights_drop_out(self):
        # constant mixing factor makes the reduced route exact
        spec = MomentSpec(GaussianScale(1.0), WeightVector((0.6, 0.8)), 3.0)
        est = weighted_moment(spec, 100, RandomStream(1))
        assert est.stderr == 0.0
        assert math.isclose(est.value, gamma_p(3.0), rel_tol=1e-12)

    def test_laplace_single_coordinate_variance(self):
        lap = ExponentialPower(1.0)
        w = WeightVector((1.0, 0.0))
        for stream_id, method in ((1, "reduced_mc"), (3, "direct_mc")):
            spec = MomentSpec(lap, w, 2.0, method)
            est = weighted_moment(spec, 200_000, RandomStream(7, stream_id))
            assert abs(zscore(est, math.sqrt(2.0))) < 3.5

    def test_laplace_diagonal_variance(self):
        # unit weight vector keeps the variance at E X^2 = 2
        lap = ExponentialPower(1.0)
        w = WeightVector((2 ** -0.5, 2 ** -0.5))
        est = weighted_moment(MomentSpec(lap, w, 2.0), 200_000,
                              RandomStream(7, 2))
        assert abs(zscore(est, math.sqrt(2.0))) < 3.5

    def test_reduced_matches_direct(self):
        ep = ExponentialPower(1.3)
        w = WeightVector((0.8, 0.6))
        red = weighted_moment(MomentSpec(ep, w, 3.0, "reduced_mc"),
                              400_000, RandomStream(11, 3))
        dire = weighted_moment(MomentSpec(ep, w, 3.0, "direct_mc"),
                               400_000, RandomStream(11, 4))
        z = (red.value - dire.value) / math.hypot(red.stderr, dire.stderr)
        assert abs(z) < 3.5

    def test_stable_routes_match_closed_form(self):
        # sum of stable variables is stable: ||a X1 + b X2||_r equals
        # (|a|^p + |b|^p)^(1/p) ||X||_r; keep r below p/2 so the MC
        # estimator has finite variance
        st_family = SymmetricStable(1.5)
        w = WeightVector((0.6, 0.8))
        closed = ((0.6 ** 1.5 + 0.8 ** 1.5) ** (1 / 1.5)
                  * st_family.abs_moment(0.5) ** 2)
        for stream_id, method in ((5, "reduced_mc"), (6, "direct_mc")):
            est = weighted_moment(MomentSpec(st_family, w, 0.5, method),
                                  400_000, RandomStream(12, stream_id))
            assert abs(zscore(est, closed)) < 3.5

    def test_log_norm_routes_agree(self):
        lap = ExponentialPower(1.0)
        w = WeightVector((1.0, 2.0))
        red = weighted_moment(MomentSpec(lap, w, 0.0, "reduced_mc"),
                              300_000, RandomStream(13, 7))
        dire = weighted_moment(MomentSpec(lap, w, 0.0, "direct_mc"),
                               300_000, RandomStream(13, 8))
        z = (red.value - dire.value) / math.hypot(red.stderr, dire.stderr)
        assert abs(z) < 3.5

    def test_reproducible(self):
        spec = MomentSpec(ExponentialPower(0.8), WeightVector((1.0, 2.0)), 1.5)
        a = weighted_moment(spec, 10_000, RandomStream(5, 9))
        b = weighted_moment(spec, 10_000, RandomStream(5, 9))
        assert a == b

    def test_infinite_moment_rejected(self):
        heavy = SymmetricStable(1.3)
        for method in ("reduced_mc", "direct_mc"):
            spec = MomentSpec(heavy, WeightVector((1.0,)), 1.5, method)
            with pytest.raises(InfiniteMomentError):
                weighted_moment(spec, 100, RandomStream(0))

    def test_spec_validation(self):
        lap = ExponentialPower(1.0)
        with pytest.raises(ValueError):
            MomentSpec(lap, WeightVector((1.0,)), -1.0)
        with pytest.raises(ValueError):
            MomentSpec(lap, WeightVector((1.0,)), 2.0, "bootstrap")
        with pytest.raises(ValueError):
            MomentSpec(lap, WeightVector((0.0, 0.0)), 2.0)


class TestMomentPair:
    @pytest.mark.parametrize("p,sign", [(3.0, -1), (4.0, -1), (1.0, 1),
                                        (0.0, 1), (-0.5, 1)])
    def test_majorization_direction(self, p, sign):
        # squared weights ordered by majorization order the p-norms:
        # increasing for p >= 2, decreasing for -1 < p < 2
        lap = ExponentialPower(1.0)
        rng = RandomStream(41)
        worst = 0.0
        for k in range(30):
            tag = k + 1000 * int(p * 10 + 5)
            lo, hi = random_majorization_pair(4, rng.child(tag))
            pair = moment_pair(lap, sqrt_weights(lo), sqrt_weights(hi), p,
                               40_000, rng.child(tag + 77_000))
            violation = sign * -pair.diff / max(pair.diff_stderr, 1e-300)
            worst = max(worst, violation)
        assert worst < 3.5

    def test_coupling_tightens_stderr(self):
        lap = ExponentialPower(1.0)
        lo, hi = random_majorization_pair(4, RandomStream(42))
        pair = moment_pair(lap, sqrt_weights(lo), sqrt_weights(hi), 3.0,
                           100_000, RandomStream(43))
        assert pair.diff_stderr < 0.5 * max(pair.value_a.stderr,
                                            pair.value_b.stderr)

    def test_strict_order_resolves(self):
        # diagonal vs single coordinate at p=3 separates decisively
        lap = ExponentialPower(1.0)
        diag = WeightVector((8 ** -0.5,) * 8)
        e1 = WeightVector((1.0,) + (0.0,) * 7)
        pair = moment_pair(lap, diag, e1, 3.0, 200_000, RandomStream(44, 99))
        assert pair.diff / pair.diff_stderr < -5.0

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            moment_pair(ExponentialPower(1.0), WeightVector((1.0,)),
                        WeightVector((1.0, 0.0)), 2.0, 100, RandomStream(0))


class TestKhintchineConstants:
    def test_laplace_p3(self):
        a3, b3 = khintchine_constants(ExponentialPower(1.0), 3.0)
        assert math.isclose(a3, GAMMA_3, rel_tol=1e-12)
        assert math.isclose(a3, math.sqrt(2.0) * math.pi ** (-1 / 6),
                            rel_tol=1e-12)
        assert math.isclose(b3, LAPLACE_B3, rel_tol=1e-12)
        assert math.isclose(b3, 6 ** (1 / 3) / math.sqrt(2.0), rel_tol=1e-12)

    def test_laplace_p3_against_density_quadrature(self):
        # independent route: integrate the bare density
        m3 = quad(lambda t: t ** 3 * math.exp(-t), 0, np.inf)[0]
        m2 = quad(lambda t: t * t * math.exp(-t), 0, np.inf)[0]
        _, b3 = khintchine_constants(ExponentialPower(1.0), 3.0)
        assert math.isclose(b3, m3 ** (1 / 3) / math.sqrt(m2), rel_tol=1e-8)

    def test_reference_norm_is_identity(self):
        families = [ExponentialPower(1.0), ExponentialPower(0.7),
                    DiscreteScaleMixture((1.0, 3.0), (0.5, 0.5))]
        for family in families:
            assert khintchine_constants(family, 2.0) == (1.0, 1.0)

    def test_gaussian_collapse(self):
        for p in (0.5, 1.0, 3.0, 4.0):
            a, b = khintchine_constants(GaussianScale(1.0), p)
            assert math.isclose(a, gamma_p(p), rel_tol=1e-12)
            assert math.isclose(a, b, rel_tol=1e-12)

    def test_laplace_low_p(self):
        # E|X|^(1/2) = Gamma(3/2) for the standard two-sided exponential
        a, b = khintchine_constants(ExponentialPower(1.0), 0.5)
        assert math.isclose(a, math.gamma(1.5) ** 2 / math.sqrt(2.0),
                            rel_tol=1e-12)
        assert math.isclose(b, gamma_p(0.5), rel_tol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(q=st.floats(0.4, 2.0), p=st.floats(-0.5, 6.0))
    def test_constants_ordered(self, q, p):
        a, b = khintchine_constants(ExponentialPower(q), p)
        assert a <= b + 1e-12

    def test_stable_rejected(self):
        with pytest.raises(InfiniteMomentError):
            khintchine_constants(SymmetricStable(1.5), 1.0)

    def test_chain_endpoints_attain_constants(self):
        lap = ExponentialPower(1.0)
        a3, b3 = khintchine_constants(lap, 3.0)
        norm2 = math.sqrt(lap.variance())
        chain = diagonal_chain(8)
        e1 = weighted_moment(MomentSpec(lap, sqrt_weights(chain[0]), 3.0),
                             300_000, RandomStream(44, 0))
        diag = weighted_moment(MomentSpec(lap, sqrt_weights(chain[-1]), 3.0),
                               300_000, RandomStream(44, 7))
        assert abs(zscore(e1, b3 * norm2)) < 3.5
        # the diagonal decreases toward the Gaussian limit from above
        assert diag.value > a3 * norm2 - 3.5 * diag.stderr
        assert diag.value < e1.value


class TestQuadratureRoute:
    def test_matches_closed_form(self):
        ep = ExponentialPower(1.3)
        est = moment_by_quadrature(ep, WeightVector((0.0, 2.5)), 1.7)
        closed = 2.5 * ep.abs_moment(1.7) ** (1 / 1.7)
        assert est.stderr == 0.0
        assert math.isclose(est.value, closed, rel_tol=1e-9)

    def test_laplace_third_moment(self):
        est = moment_by_quadrature(ExponentialPower(1.0),
                                   WeightVector((1.0,)), 3.0)
        assert math.isclose(est.value, 6 ** (1 / 3), rel_tol=1e-9)

    def test_log_norm(self):
        ep = ExponentialPower(0.9)
        est = moment_by_quadrature(ep, WeightVector((2.0,)), 0.0)
        assert math.isclose(est.value, 2.0 * math.exp(ep.log_abs_moment()),
                            rel_tol=1e-12)

    def test_requires_single_nonzero_weight(self):
        with pytest.raises(ValueError):
            moment_by_quadrature(ExponentialPower(1.0),
                                 WeightVector((1.0, 1.0)), 2.0)

    def test_heavy_tailed_redirected(self):
        with pytest.raises(ValueError):
            moment_by_quadrature(SymmetricStable(1.5), WeightVector((1.0,)),
                                 0.5)


class TestBallSampler:
    def test_euclidean_radius_squared_uniform(self):
        # area scaling in the plane: P(||X|| <= r) = r^2
        x = ball_uniform_sample(BallUniformSpec(2.0, 2), 100_000,
                                RandomStream(21, 0))
        r2 = (x ** 2).sum(axis=1)
        assert stats.kstest(r2, "uniform").pvalue > 1e-3

    def test_cross_polytope_support(self):
        x = ball_uniform_sample(BallUniformSpec(1.0, 2), 100_000,
                                RandomStream(21, 1))
        assert np.abs(x).sum(axis=1).max() <= 1.0 + 1e-12

    def test_radius_power_uniform(self):
        x = ball_uniform_sample(BallUniformSpec(1.5, 4), 100_000,
                                RandomStream(21, 2))
        r = (np.abs(x) ** 1.5).sum(axis=1) ** (1 / 1.5)
        assert stats.kstest(r ** 4, "uniform").pvalue > 1e-3

    def test_sign_symmetry(self):
        x = ball_uniform_sample(BallUniformSpec(1.0, 3), 100_000,
                                RandomStream(21, 3))
        for i in range(3):
            col = x[:, i]
            assert abs(col.mean()) < 4.0 * col.std() / math.sqrt(len(col))

    def test_radius_quantile(self):
        assert np.allclose(ball_radius_quantile(1.5, 4, [0.0625, 1.0]),
                           [0.5, 1.0])

    def test_reproducible(self):
        spec = BallUniformSpec(0.7, 3)
        a = ball_uniform_sample(spec, 1000, RandomStream(9, 4))
        b = ball_uniform_sample(spec, 1000, RandomStream(9, 4))
        assert np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValueError):
            BallUniformSpec(2.5, 3)
        with pytest.raises(ValueError):
            BallUniformSpec(0.0, 3)
        with pytest.raises(ValueError):
            BallUniformSpec(1.0, 0)
        with pytest.raises(ValueError):
            ball_uniform_sample(BallUniformSpec(1.0, 2), 0, RandomStream(0))


class TestBallMarginals:
    def test_euclidean_three_dim_oracles(self):
        assert math.isclose(ball_marginal_norm(2.0, 3, 2.0) ** 2, BALL23_SQ,
                            rel_tol=1e-13)
        assert math.isclose(ball_marginal_norm(2.0, 3, 1.0), BALL23_ABS,
                            rel_tol=1e-13)

    def test_matches_monte_carlo(self):
        x = ball_uniform_sample(BallUniformSpec(2.0, 3), 400_000,
                                RandomStream(22, 0))
        for r, ref in ((2.0, BALL23_SQ), (1.0, BALL23_ABS)):
            v = np.abs(x[:, 0]) ** r
            z = (v.mean() - ref) / (v.std() / math.sqrt(len(v)))
            assert abs(z) < 3.5

    def test_matches_monte_carlo_fractional(self):
        x = ball_uniform_sample(BallUniformSpec(1.2, 4), 400_000,
                                RandomStream(23, 0))
        ref = ball_marginal_norm(1.2, 4, 1.7) ** 1.7
        v = np.abs(x[:, 0]) ** 1.7
        z = (v.mean() - ref) / (v.std() / math.sqrt(len(v)))
        assert abs(z) < 3.5

    def test_log_norm_limit(self):
        mid = ball_marginal_norm(2.0, 3, 0.0)
        assert abs(ball_marginal_norm(2.0, 3, 1e-9) - mid) < 1e-6
        assert abs(ball_marginal_norm(2.0, 3, -1e-9) - mid) < 1e-6

    @settings(max_examples=60, deadline=None)
    @given(q=st.floats(0.3, 2.0), n=st.integers(2, 8),
           r1=st.floats(-0.9, 6.0), r2=st.floats(-0.9, 6.0))
    def test_monotone_in_r(self, q, n, r1, r2):
        lo, hi = sorted((r1, r2))
        assert (ball_marginal_norm(q, n, lo)
                <= ball_marginal_norm(q, n, hi) + 1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            ball_marginal_norm(2.0, 1, 1.0)
        with pytest.raises(ValueError):
            ball_marginal_norm(2.0, 3, -1.0)
        with pytest.raises(ValueError):
            ball_marginal_norm(3.0, 3, 1.0)


class TestBallConstants:
    def test_low_p_oracle(self):
        a1, b1 = ball_khintchine_constants(2.0, 3, 1.0)
        assert math.isclose(a1, BALL23_A1, rel_tol=1e-12)
        assert math.isclose(b1, gamma_p(1.0), rel_tol=1e-12)

    def test_reference_p2(self):
        assert ball_khintchine_constants(1.3, 5, 2.0) == (1.0, 1.0)

    def test_high_p_structure(self):
        a3, b3 = ball_khintchine_constants(2.0, 3, 3.0)
        assert math.isclose(a3, GAMMA_3, rel_tol=1e-12)
        assert math.isclose(b3, 0.5 / math.sqrt(0.2), rel_tol=1e-12)
        # in low dimension the bounded marginal stays closer to its mean
        # than a Gaussian, so the dimension-free constant exceeds the
        # single-coordinate ratio; the gap closes as n grows
        assert b3 < a3
        a_big, b_big = ball_khintchine_constants(1.0, 400, 3.0)
        assert b_big > a_big

    def test_schur_direction_on_draws(self):
        # diagonal versus single coordinate at p=3 on shared draws
        x = ball_uniform_sample(BallUniformSpec(1.0, 3), 400_000,
                                RandomStream(25, 0))
        diag = np.array([3 ** -0.5] * 3)
        d = np.abs(x @ diag) ** 3 - np.abs(x[:, 0]) ** 3
        z = d.mean() / (d.std() / math.sqrt(len(d)))
        assert z < -5.0


class TestProportionality:
    def test_ratio_constant_over_directions(self):
        # moments of ball functionals are a fixed multiple of the moments
        # of the same functionals of the independent factors
        lap = ExponentialPower(1.0)
        n_draws = 1_000_000
        ratios = []
        for a, sid_ball, sid_fam in ((np.array([1.0, 0.0]), 1, 51),
                                     (np.array([2 ** -0.5, 2 ** -0.5]), 2, 52)):
            x = ball_uniform_sample(BallUniformSpec(1.0, 2), n_draws,
                                    RandomStream(31, sid_ball))
            vb = np.abs(x @ a) ** 3
            cols = np.column_stack([
                lap.sample_direct(n_draws, RandomStream(32, sid_fam).child(i))
                for i in range(2)])
            vf = np.abs(cols @ a) ** 3
            ratio = vb.mean() / vf.mean()
            rse = ratio * math.hypot(
                vb.std() / (vb.mean() * math.sqrt(n_draws)),
                vf.std() / (vf.mean() * math.sqrt(n_draws)))
            ratios.append((ratio, rse))
        (r1, s1), (r2, s2) = ratios
        assert abs(r1 - r2) / math.hypot(s1, s2) < 3.5


class TestNormalizationFactorization:
    def test_radius_independent_of_direction(self):
        # the q-radius of the factor vector is independent of its
        # projection to the sphere
        q, n, n_draws = 1.5, 3, 200_000
        stream = RandomStream(24, 0)
        kinds = [("gamma", 1.0 / q), "uniform"] * n
        blocks = stream.draw(n_draws, tuple(kinds))
        y = np.column_stack([
            np.sign(blocks[2 * i + 1] - 0.5) * blocks[2 * i] ** (1.0 / q)
            for i in range(n)])
        s = (np.abs(y) ** q).sum(axis=1) ** (1.0 / q)
        u = y / s[:, None]
        bound = 4.0 / math.sqrt(n_draws)
        for i in range(n):
            assert abs(np.corrcoef(s, u[:, i])[0, 1]) < bound
            assert abs(np.corrcoef(s, np.abs(u[:, i]))[0, 1]) < bound
