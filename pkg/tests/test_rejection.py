import math

import numpy as np
import pytest

from proxsamp import (
    EnvelopeViolationError,
    Potential,
    ProxObjective,
    RegularizedTarget,
    RejectionLimitError,
    RgoConfig,
    SmoothnessProfile,
    StepSizeWarning,
    lower_envelope,
    make_gaussian,
    make_l1,
    prox_bundle,
    prox_of_target,
    rejection_bound,
    rgo_sample,
    select_params_semismooth,
    step_condition_ok,
    upper_envelope,
)
from proxsamp.metrics import ks_1samp, ks_critical
from proxsamp.quadrature import QuadratureDensity


def make_zero_potential(dim):
    return Potential(
        dim=dim,
        value=lambda x: 0.0,
        subgrad=lambda x: np.zeros(dim),
        profile=SmoothnessProfile(alpha=1.0, l_alpha=0.0, l_one=0.0),
        prox=lambda eta, y: np.asarray(y, dtype=float),
        x_min=np.zeros(dim),
        f_min=0.0,
        name="zero",
    )


def l1_objective(eta, y, mu=0.0, dim=1, scale=1.0):
    pot = make_l1(dim, scale)
    return ProxObjective(RegularizedTarget(pot, mu, np.zeros(dim)), eta, np.atleast_1d(np.asarray(y, dtype=float)))


class TestEnvelopes:
    def test_lower_envelope_at_center(self):
        h1 = lower_envelope(np.zeros(2), 0.0, 1.0)
        assert h1(np.zeros(2)) == 0.0

    def test_exact_mode_center_and_offset(self):
        obj = l1_objective(0.5, 2.0)
        xstar = prox_of_target(obj)
        assert xstar[0] == pytest.approx(1.5)
        assert obj.value(xstar) == pytest.approx(1.75)

    def test_bundle_mode_offset_shifted_by_delta(self):
        obj = l1_objective(0.5, 2.0)
        res = prox_bundle(obj, delta=0.1)
        offset = res.best_value - 0.1
        assert offset == pytest.approx(1.65)

    def test_upper_envelope_value_at_center(self):
        obj = l1_objective(0.5, 2.0)
        h2 = upper_envelope(np.array([1.5]), 1.75, obj.target.base.profile, obj)
        assert h2(np.array([1.5])) == pytest.approx(1.75)

    def test_upper_envelope_smooth_case_is_quadratic(self):
        # alpha=1 with l_alpha=0: pure quadratic of curvature 1/eta_mu_l1
        pot = make_gaussian(1, (2.0,))
        obj = ProxObjective(RegularizedTarget(pot, 0.5, np.zeros(1)), 0.4, np.array([1.0]))
        xstar = prox_of_target(obj)
        v = obj.value(xstar)
        h2 = upper_envelope(xstar, v, pot.profile, obj)
        r = 0.7
        expected = v + r**2 / (2.0 * obj.eta_mu_l1)
        assert h2(xstar + r) == pytest.approx(expected, rel=1e-12)

    def test_prox_shift_identity_with_mu(self):
        # prox of g from prox of f must minimize g_y^eta
        pot = make_l1(2, 1.3)
        obj = ProxObjective(RegularizedTarget(pot, 0.7, np.array([0.4, -0.2])), 0.6, np.array([1.1, -2.0]))
        xstar = prox_of_target(obj)
        res = prox_bundle(obj, delta=1e-9, max_iter=2000)
        assert obj.value(xstar) <= obj.value(res.x_best) + 2e-9
        np.testing.assert_allclose(xstar, res.x_best, atol=1e-3)


class TestRgoSample:
    def test_zero_potential_always_accepts(self):
        pot = make_zero_potential(2)
        obj = ProxObjective(RegularizedTarget(pot, 0.0, np.zeros(2)), 0.7, np.array([1.0, -1.0]))
        cfg = RgoConfig(eta=0.7, mode="exact")
        rng = np.random.default_rng(0)
        draws = np.array([rgo_sample(obj, cfg, rng).rejections for _ in range(500)])
        assert np.all(draws == 0)

    def test_zero_potential_marginal_is_gaussian(self):
        pot = make_zero_potential(1)
        y = np.array([1.0])
        obj = ProxObjective(RegularizedTarget(pot, 0.0, np.zeros(1)), 0.7, y)
        cfg = RgoConfig(eta=0.7, mode="exact")
        rng = np.random.default_rng(1)
        n = 20000
        xs = np.array([rgo_sample(obj, cfg, rng).x[0] for _ in range(n)])
        from scipy.special import ndtr

        z = (xs - 1.0) / math.sqrt(0.7)
        stat = ks_1samp_sorted(z, ndtr)
        assert stat < ks_critical(0.01, n)

    def test_mean_proposals_respects_bundle_bound(self):
        pot = make_l1(1, 1.0)
        eta, delta = select_params_semismooth(pot.profile, 1)
        cfg = RgoConfig(eta=eta, delta=delta, mode="bundle")
        rng = np.random.default_rng(2)
        n = 3000
        counts = np.empty(n)
        for i in range(n):
            y = 2.0 * rng.standard_normal(1)
            obj = ProxObjective(RegularizedTarget(pot, 0.0, np.zeros(1)), eta, y)
            counts[i] = rgo_sample(obj, cfg, rng).rejections + 1
        bound = rejection_bound(cfg, pot.profile, 1)
        assert bound.condition_ok
        assert counts.mean() <= bound.value + 3 * counts.std() / math.sqrt(n)

    def test_gaussian_exact_acceptance_vs_quadrature(self):
        # acceptance probability at eta = 1/d: measured, theoretical, quadrature
        pot = make_gaussian(1, (1.0,))
        eta = 1.0
        cfg = RgoConfig(eta=eta, mode="exact")
        rng = np.random.default_rng(3)
        y = np.array([0.8])
        obj = ProxObjective(RegularizedTarget(pot, 0.0, np.zeros(1)), eta, y)
        n = 4000
        counts = np.array([rgo_sample(obj, cfg, rng).rejections + 1 for i in range(n)])
        from proxsamp.checks import acceptance_probability_oracle

        xstar = prox_of_target(obj)
        ratio = acceptance_probability_oracle(obj, xstar, obj.value(xstar))
        assert ratio >= math.exp(-0.5)
        assert counts.mean() == pytest.approx(1.0 / ratio, rel=0.05)

    def test_unbiased_vs_quadrature_cdf(self):
        obj = l1_objective(1.0 / 16.0, 0.7)
        cfg = RgoConfig(eta=1.0 / 16.0, mode="exact")
        rng = np.random.default_rng(4)
        n = 20000
        xs = np.array([rgo_sample(obj, cfg, rng).x[0] for _ in range(n)])
        truth = QuadratureDensity.build(obj.value, 1, center=np.zeros(1))
        stat = ks_1samp(xs, truth)
        assert stat < ks_critical(0.01, n)

    def test_modes_agree_small(self):
        eta, delta = select_params_semismooth(make_l1(1, 1.0).profile, 1)
        rng = np.random.default_rng(5)
        n = 20000
        a = np.empty(n)
        b = np.empty(n)
        obj = l1_objective(eta, 0.7)
        for i in range(n):
            a[i] = rgo_sample(obj, RgoConfig(eta=eta, mode="exact"), rng).x[0]
            b[i] = rgo_sample(obj, RgoConfig(eta=eta, delta=delta, mode="bundle"), rng).x[0]
        from proxsamp.metrics import ks_2samp, two_sample_n_eff

        assert ks_2samp(a, b) < ks_critical(0.01, two_sample_n_eff(n, n))

    def test_acceptance_log_ratio_in_range(self):
        obj = l1_objective(0.25, 1.2)
        cfg = RgoConfig(eta=0.25, mode="exact")
        rng = np.random.default_rng(6)
        for _ in range(200):
            s = rgo_sample(obj, cfg, rng, warn_on_step=False)
            assert s.log_accept_ratio <= 1e-9

    def test_envelope_violation_detected_with_bogus_prox(self):
        bogus = Potential(
            dim=1,
            value=lambda x: float(np.abs(x).sum()),
            subgrad=lambda x: np.sign(np.asarray(x, dtype=float)),
            profile=SmoothnessProfile(alpha=0.0, l_alpha=2.0),
            prox=lambda eta, y: np.asarray(y, dtype=float),  # wrong on purpose
            name="bogus",
        )
        obj = ProxObjective(RegularizedTarget(bogus, 0.0, np.zeros(1)), 0.5, np.array([2.0]))
        cfg = RgoConfig(eta=0.5, mode="exact")
        rng = np.random.default_rng(7)
        with pytest.raises(EnvelopeViolationError):
            for _ in range(200):
                rgo_sample(obj, cfg, rng, warn_on_step=False)

    def test_rejection_limit(self):
        obj = l1_objective(50.0, 0.3)
        cfg = RgoConfig(eta=50.0, mode="exact", max_rejections=2)
        rng = np.random.default_rng(8)
        with pytest.raises(RejectionLimitError):
            with pytest.warns(StepSizeWarning):
                for _ in range(500):
                    rgo_sample(obj, cfg, rng)

    def test_step_size_warning_only_when_violated(self):
        import warnings

        obj = l1_objective(1.0 / 16.0, 0.5)
        cfg = RgoConfig(eta=1.0 / 16.0, mode="exact")
        rng = np.random.default_rng(9)
        with warnings.catch_warnings():
            warnings.simplefilter("error", StepSizeWarning)
            rgo_sample(obj, cfg, rng)  # compliant: must not warn
        obj_bad = l1_objective(1.0, 0.5)
        with pytest.warns(StepSizeWarning):
            rgo_sample(obj_bad, RgoConfig(eta=1.0, mode="exact"), rng)

    def test_eta_mismatch_rejected(self):
        obj = l1_objective(0.5, 1.0)
        with pytest.raises(ValueError):
            rgo_sample(obj, RgoConfig(eta=0.25, mode="exact"), np.random.default_rng(0))


def ks_1samp_sorted(samples, cdf_fn):
    s = np.sort(samples)
    n = s.size
    c = cdf_fn(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - c), np.max(c - (i - 1) / n)))


class TestRejectionBound:
    def test_exact_semismooth_is_two(self):
        cfg = RgoConfig(eta=1.0 / 16.0, mode="exact")
        b = rejection_bound(cfg, make_l1(1, 1.0).profile, 1)
        assert b.value == 2.0 and b.condition_ok

    def test_bundle_delta_zero_continuity(self):
        cfg = RgoConfig(eta=1.0 / 16.0, delta=1e-12, mode="bundle")
        b = rejection_bound(cfg, make_l1(1, 1.0).profile, 1)
        assert b.value == pytest.approx(2.0, abs=1e-10)

    def test_composite_value(self):
        prof = SmoothnessProfile(alpha=0.0, l_alpha=1.0, l_one=1.0)
        eta = min(select_params_semismooth(prof, 1)[0], 1.0)
        cfg = RgoConfig(eta=min(eta, 1.0), delta=0.1, mode="bundle")
        b = rejection_bound(cfg, prof, 1)
        assert b.value == pytest.approx(2.0 * math.exp(0.6), rel=1e-12)

    def test_smooth_value(self):
        prof = make_gaussian(3, np.ones(3)).profile
        cfg = RgoConfig(eta=1.0 / 3.0, delta=0.2, mode="bundle")
        b = rejection_bound(cfg, prof, 3)
        assert b.value == pytest.approx(math.exp(0.7), rel=1e-12)

    def test_violated_condition_flags_inf(self):
        cfg = RgoConfig(eta=10.0, mode="exact")
        b = rejection_bound(cfg, make_l1(1, 1.0).profile, 1)
        assert math.isinf(b.value) and not b.condition_ok

    def test_step_condition_boundary(self):
        prof = make_l1(4, 1.0).profile
        eta, _ = select_params_semismooth(prof, 4)
        assert step_condition_ok(eta, prof, 4)
        assert not step_condition_ok(eta * 1.01, prof, 4)


class TestRgoConfigValidation:
    def test_bad_mode(self):
        with pytest.raises(ValueError):
            RgoConfig(eta=0.5, mode="other")

    def test_bundle_needs_delta(self):
        with pytest.raises(ValueError):
            RgoConfig(eta=0.5, mode="bundle", delta=0.0)

    def test_bad_eta(self):
        with pytest.raises(ValueError):
            RgoConfig(eta=0.0)
