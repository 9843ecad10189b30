"""Verification suites aggregating the bound checks at desk scale.

Each suite is a plain function returning a CheckReport; the CLI ``verify``
subcommand dispatches on suite name.  Sizes default to something that runs
in seconds to a couple of minutes; the acceptance test suite re-runs the
same checks at their full stated sizes.
"""

from __future__ import annotations

import math

import numpy as np

from .bundle import (
    ProxObjective,
    gap_start_bound,
    iteration_bound_composite,
    iteration_bound_semismooth,
    prox_bundle,
)
from .chain import ChainConfig, gibbs_step, run_chain, select_params_any
from .checks import CheckReport, check_prop_key_bound, default_prop_key_grid, sandwich_suite, wendel_check
from .metrics import ks_1samp, ks_critical, tv_hist, tv_noise_floor
from .potentials import RegularizedTarget, default_zoo, make_gaussian, make_l1
from .quadrature import QuadratureDensity
from .rejection import RgoConfig, rejection_bound, rgo_sample


def suite_prop_key() -> CheckReport:
    """Modified-Gaussian bound on the canonical 50-point grid, plus the
    gamma-ratio inequality it rests on."""
    key = check_prop_key_bound(default_prop_key_grid())
    wendel = wendel_check(
        t_grid=np.linspace(0.1, 50.0, 25), s_grid=np.linspace(0.02, 0.98, 25)
    )
    return CheckReport(
        name="prop-key",
        passed=key.passed and wendel.passed,
        details={
            "worst_ratio": key.details["worst_ratio"],
            "n_points": key.details["n_points"],
            "wendel_worst_log_slack": wendel.details["worst_log_slack"],
        },
    )


def suite_sandwich(probes_per_case: int = 400, n_draws: int = 10, dim: int = 2) -> CheckReport:
    """Envelope sandwich across the zoo, exact and bundle lower forms."""
    rng = np.random.default_rng(42)
    worst_lower = math.inf
    worst_upper = math.inf
    n_total = 0
    for name, pot in default_zoo(dim).items():
        eta, delta = select_params_any(pot.profile, dim)
        for mu in (0.0, 0.1):
            target = RegularizedTarget(pot, mu, np.zeros(dim))
            for _ in range(n_draws):
                y = rng.standard_normal(dim) * 2.0
                obj = ProxObjective(target, eta, y)
                rep = sandwich_suite(obj, probes_per_case, rng)
                worst_lower = min(worst_lower, rep.min_lower_slack)
                worst_upper = min(worst_upper, rep.min_upper_slack)
                n_total += rep.n_probes
                res = prox_bundle(obj, delta)
                rep = sandwich_suite(obj, probes_per_case, rng, bundle_result=res)
                worst_lower = min(worst_lower, rep.min_lower_slack)
                worst_upper = min(worst_upper, rep.min_upper_slack)
                n_total += rep.n_probes
    return CheckReport(
        name="sandwich",
        passed=(worst_lower >= -1e-9 and worst_upper >= -1e-9),
        details={
            "min_lower_slack": worst_lower,
            "min_upper_slack": worst_upper,
            "n_probes": n_total,
        },
    )


def _mean_proposals(pot, eta, delta, mode, n_calls, dim, seed, mu=0.0):
    rng = np.random.default_rng(seed)
    target = RegularizedTarget(pot, mu, np.zeros(dim))
    cfg = RgoConfig(eta=eta, delta=delta if mode == "bundle" else 0.0, mode=mode)
    counts = np.empty(n_calls)
    for i in range(n_calls):
        y = rng.standard_normal(dim) * math.sqrt(max(eta, 1.0))
        obj = ProxObjective(target, eta, y)
        counts[i] = rgo_sample(obj, cfg, rng).rejections + 1
    return counts


def suite_acceptance_bounds(n_calls: int = 2000) -> CheckReport:
    """Empirical proposals-per-sample vs the regime bound, 3 sigma slack."""
    cases = []
    for dim in (1, 5):
        pot = make_l1(dim, 1.0)
        eta, delta = select_params_any(pot.profile, dim)
        for mode in ("exact", "bundle"):
            cases.append(("l1", pot, eta, delta, mode, dim))
    gdim = 5
    gauss = make_gaussian(gdim, np.ones(gdim))
    geta, gdelta = select_params_any(gauss.profile, gdim)
    cases.append(("gaussian", gauss, geta, gdelta, "exact", gdim))
    zoo = default_zoo(gdim)
    qpot = zoo["quad_plus_l1"]
    qeta, qdelta = select_params_any(qpot.profile, gdim)
    cases.append(("quad_plus_l1", qpot, qeta, qdelta, "bundle", gdim))

    entries = []
    ok = True
    for i, (name, pot, eta, delta, mode, dim) in enumerate(cases):
        counts = _mean_proposals(pot, eta, delta, mode, n_calls, dim, seed=100 + i)
        bound = rejection_bound(
            RgoConfig(eta=eta, delta=delta if mode == "bundle" else 0.0, mode=mode),
            pot.profile,
            dim,
        )
        mean = float(counts.mean())
        slack = 3.0 * float(counts.std()) / math.sqrt(n_calls)
        passed = bound.condition_ok and mean <= bound.value + slack
        ok = ok and passed
        entries.append(
            {
                "target": name,
                "mode": mode,
                "dim": dim,
                "mean_proposals": mean,
                "bound": bound.value,
                "slack_3sigma": slack,
                "passed": passed,
            }
        )
    return CheckReport(name="acceptance-bounds", passed=ok, details={"cases": entries})


def suite_bundle_bounds(n_draws: int = 200, dim: int = 5) -> CheckReport:
    """Measured iteration counts vs the worst-case recursion bound, per target."""
    rng = np.random.default_rng(7)
    entries = []
    ok = True
    for name, pot in default_zoo(dim).items():
        eta, delta = select_params_any(pot.profile, dim)
        target = RegularizedTarget(pot, 0.0, np.zeros(dim))
        iters = []
        violations = 0
        for _ in range(n_draws):
            y = rng.standard_normal(dim) * 2.0
            obj = ProxObjective(target, eta, y)
            res = prox_bundle(obj, delta)
            t1 = res.gaps[0]
            prof = pot.profile
            if prof.l_one > 0:
                j0 = iteration_bound_composite(
                    obj.eta_mu, prof.l_alpha, prof.alpha, prof.l_one, delta, t1
                )
            else:
                j0 = iteration_bound_semismooth(
                    obj.eta_mu, prof.l_alpha, prof.alpha, delta, t1
                )
            if res.iterations > max(1, j0):
                violations += 1
            if t1 > gap_start_bound(obj) + 1e-10:
                violations += 1
            iters.append(res.iterations)
        med = float(np.median(iters))
        passed = violations == 0 and med <= 10.0
        ok = ok and passed
        entries.append(
            {
                "target": name,
                "median_iters": med,
                "max_iters": int(np.max(iters)),
                "violations": violations,
                "passed": passed,
            }
        )
    return CheckReport(name="bundle-bounds", passed=ok, details={"cases": entries})


def suite_stationarity(n: int = 20000) -> CheckReport:
    """Stationary-start one-step KS for Gaussian and Laplace-type targets."""
    entries = []
    ok = True

    pot = make_gaussian(1, (1.0,))
    eta, _ = select_params_any(pot.profile, 1)
    target = RegularizedTarget(pot, 0.0, np.zeros(1))
    rng = np.random.default_rng(11)
    cfg = RgoConfig(eta=eta, mode="exact")
    x0 = pot.sample_exact(rng, n)
    out = np.empty(n)
    for i in range(n):
        _, s = gibbs_step(x0[i], target, cfg, rng, warn_on_step=False)
        out[i] = s.x[0]
    from scipy.special import ndtr

    stat = _ks_cdf(out, lambda v: ndtr(v))
    crit = ks_critical(0.01, n)
    entries.append({"target": "gaussian", "ks": stat, "critical_1pct": crit})
    ok = ok and stat < crit

    pot = make_l1(1, 1.0)
    eta, _ = select_params_any(pot.profile, 1)
    target = RegularizedTarget(pot, 0.0, np.zeros(1))
    rng = np.random.default_rng(12)
    cfg = RgoConfig(eta=eta, mode="exact")
    u = rng.random(n)
    x0 = np.where(u < 0.5, np.log(2 * u + 1e-300), -np.log(2 * (1 - u) + 1e-300))
    out = np.empty(n)
    for i in range(n):
        _, s = gibbs_step(np.array([x0[i]]), target, cfg, rng, warn_on_step=False)
        out[i] = s.x[0]
    stat = _ks_cdf(out, _laplace_cdf)
    entries.append({"target": "laplace", "ks": stat, "critical_1pct": crit})
    ok = ok and stat < crit
    return CheckReport(name="stationarity", passed=ok, details={"cases": entries})


def _ks_cdf(samples, cdf_fn):
    s = np.sort(samples)
    n = s.size
    c = cdf_fn(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - c), np.max(c - (i - 1) / n)))


def _laplace_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.5 * np.exp(x), 1.0 - 0.5 * np.exp(-x))


def suite_tv_decay(n_chains: int = 2000, k_max: int = 40, stride: int = 10) -> CheckReport:
    """Histogram TV to the target every `stride` steps is non-increasing up
    to 3 sigma of the estimator on a strongly convex 1D target."""
    pot = make_gaussian(1, (1.0,))
    eta, _ = select_params_any(pot.profile, 1)
    truth = QuadratureDensity.build(pot.value, 1)
    cfg_proto = dict(eta=eta, delta=1.0, mu=0.0, center_x0=(0.0,), regime="composite", rgo_mode="exact")

    checkpoints = list(range(0, k_max + 1, stride))
    snaps = {k: np.empty(n_chains) for k in checkpoints}
    for c in range(n_chains):
        cfg = ChainConfig(n_iters=k_max, seed=5000 + c, **cfg_proto)
        trace = run_chain(pot, cfg, x_init=np.array([3.0]), warn_on_step=False)
        for k in checkpoints:
            snaps[k][c] = trace.iterates[k, 0]
    bins = 20
    tvs = [tv_hist(snaps[k], truth, bins) for k in checkpoints]
    _, noise_sd = tv_noise_floor(truth, n_chains, bins, reps=20, seed=2)
    ok = all(tvs[i + 1] <= tvs[i] + 3.0 * noise_sd for i in range(len(tvs) - 1))
    return CheckReport(
        name="tv-decay",
        passed=ok,
        details={
            "checkpoints": checkpoints,
            "tv": tvs,
            "noise_sd_3x": 3.0 * noise_sd,
        },
    )


SUITES = {
    "prop-key": suite_prop_key,
    "sandwich": suite_sandwich,
    "acceptance-bounds": suite_acceptance_bounds,
    "bundle-bounds": suite_bundle_bounds,
    "stationarity": suite_stationarity,
    "tv-decay": suite_tv_decay,
}


def run_suites(names) -> list:
    reports = []
    for name in names:
        if name not in SUITES:
            raise ValueError(
                f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}, all"
            )
        reports.append(SUITES[name]())
    return reports
