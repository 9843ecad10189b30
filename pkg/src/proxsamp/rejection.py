"""Rejection-sampling oracle for the proximal target exp(-g_y^eta).

This realizes the restricted Gaussian oracle of the outer Gibbs chain: a
Gaussian proposal centered at the (exact or bundle-computed) minimizer of
g_y^eta, accepted against a quadratic lower envelope.  Rejection sampling
is exact, so the returned point follows exp(-g_y^eta) regardless of step
size; the step-size conditions only control the expected proposal count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .bundle import BundleResult, ProxObjective, prox_bundle
from .potentials import Array, SmoothnessProfile


class StepSizeWarning(UserWarning):
    """Step size violates the regime's guard: sampling stays exact but the
    expected-proposal bound no longer applies."""


class EnvelopeViolationError(RuntimeError):
    """The lower envelope exceeded the target potential (broken invariant)."""


class RejectionLimitError(RuntimeError):
    """Proposal cap hit; carries diagnostics for the offending call."""

    def __init__(self, message: str, rejections: int, center: Array):
        super().__init__(message)
        self.rejections = rejections
        self.center = center


@dataclass(frozen=True)
class RgoConfig:
    """How to draw from exp(-g_y^eta): exact prox center or bundle center.

    ``delta`` is the bundle gap tolerance (unused in exact mode);
    ``max_rejections`` is a guard, not a bound.
    """

    eta: float
    delta: float = 0.0
    mode: str = "exact"
    max_rejections: int = 10**6

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.mode not in ("exact", "bundle"):
            raise ValueError(f"mode must be 'exact' or 'bundle', got {self.mode!r}")
        if self.mode == "bundle" and self.delta <= 0:
            raise ValueError("bundle mode needs delta > 0")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")


@dataclass(frozen=True, eq=False)
class RgoSample:
    """Accepted point plus the diagnostics the complexity bounds constrain."""

    x: Array
    rejections: int
    bundle_iters: int
    center: Array
    envelope_offset: float
    log_accept_ratio: float
    subgrad_calls: int


def lower_envelope(center: Array, offset: float, eta_mu: float) -> Callable:
    """Quadratic minorant ||x - center||^2/(2 eta_mu) + offset.

    Exact mode: center is the prox point and offset its objective value.
    Bundle mode: center is the model minimizer and offset is the best
    objective value minus delta.
    """
    if eta_mu <= 0:
        raise ValueError("eta_mu must be > 0")
    center = np.asarray(center, dtype=float)

    def h1(x):
        d = np.asarray(x, dtype=float) - center
        return float(d @ d) / (2.0 * eta_mu) + offset

    return h1


def upper_envelope(
    xstar: Array,
    value_at_xstar: float,
    profile: SmoothnessProfile,
    obj: ProxObjective,
) -> Callable:
    """Quadratic-plus-power majorant of g_y^eta around the true prox point.

    h2(x) = l_alpha/(alpha+1) ||x-x*||^(alpha+1) + ||x-x*||^2/(2 eta_mu_l1)
    + g_y^eta(x*); analysis-side only (needs the exact x*).  With l_one = 0
    the curvature term reduces to 1/(2 eta_mu).
    """
    xstar = np.asarray(xstar, dtype=float)
    coef = profile.l_alpha / (profile.alpha + 1.0)
    curv = 1.0 / (2.0 * obj.eta_mu_l1)

    def h2(x):
        r = float(np.linalg.norm(np.asarray(x, dtype=float) - xstar))
        return coef * r ** (profile.alpha + 1.0) + curv * r * r + value_at_xstar

    return h2


def prox_of_target(obj: ProxObjective) -> Array:
    """Closed-form prox of g at y, reduced to the base potential's prox.

    For mu > 0 the two quadratics merge, shifting the prox center:
    Prox_{eta g}(y) = Prox_{eta_mu f}(eta_mu (mu x0 + y/eta)).
    """
    base = obj.target.base
    if base.prox is None:
        raise ValueError(f"potential {base.name!r} has no closed-form prox")
    mu = obj.target.mu
    if mu == 0.0:
        return np.asarray(base.prox(obj.eta, obj.y), dtype=float)
    v = obj.eta_mu * (mu * obj.target.center + obj.y / obj.eta)
    return np.asarray(base.prox(obj.eta_mu, v), dtype=float)


def step_condition_ok(
    eta_mu: float, profile: SmoothnessProfile, dim: int
) -> bool:
    """Check the step-size guards under which the proposal-count bounds hold."""
    if profile.l_alpha > 0:
        a = profile.alpha
        guard = (a + 1.0) ** (2.0 / (a + 1.0)) / (
            (2.0 * profile.l_alpha) ** (2.0 / (a + 1.0)) * dim
        )
        if eta_mu > guard * (1.0 + 1e-12):
            return False
    if profile.l_one > 0:
        if eta_mu > (1.0 + 1e-12) / (profile.l_one * dim):
            return False
    return True


class RejectionBound(NamedTuple):
    """Theoretical expected proposals per accepted sample, with validity flag."""

    value: float
    condition_ok: bool


def rejection_bound(
    cfg: RgoConfig, profile: SmoothnessProfile, dim: int, mu: float = 0.0
) -> RejectionBound:
    """Expected-proposal bound for the applicable regime.

    Exact semi-smooth: 2.  Bundle semi-smooth: 2 exp(delta).  Smooth:
    exp(1/2 + delta).  Composite: 2 exp(1/2 + delta).  Returns +inf with a
    cleared flag when the step-size condition fails.
    """
    eta_mu = cfg.eta / (1.0 + cfg.eta * mu)
    ok = step_condition_ok(eta_mu, profile, dim)
    delta_eff = cfg.delta if cfg.mode == "bundle" else 0.0
    if profile.l_one > 0 and profile.l_alpha > 0:
        bound = 2.0 * math.exp(0.5 + delta_eff)
    elif profile.l_one > 0:
        bound = math.exp(0.5 + delta_eff)
    else:
        bound = 2.0 * math.exp(delta_eff)
    if not ok:
        return RejectionBound(math.inf, False)
    return RejectionBound(bound, True)


def rgo_sample(
    obj: ProxObjective,
    cfg: RgoConfig,
    rng: np.random.Generator,
    bundle_max_iter: int = 1000,
    warn_on_step: bool = True,
) -> RgoSample:
    """Draw one point distributed exactly as exp(-g_y^eta).

    The proposal is N(center, eta_mu I); acceptance is tested in log space
    (log U <= h1(X) - g_y^eta(X)) to avoid underflow.  In bundle mode the
    cutting-plane run happens once per call and its center is reused across
    all proposals.
    """
    if not math.isclose(cfg.eta, obj.eta, rel_tol=1e-12):
        raise ValueError(f"config eta {cfg.eta} differs from objective eta {obj.eta}")
    profile = obj.target.base.profile
    eta_mu = obj.eta_mu
    dim = obj.dim

    if warn_on_step and not step_condition_ok(eta_mu, profile, dim):
        warnings.warn(
            "step size exceeds the guard for this profile; sampling is still "
            "exact but the expected-proposal bound is void",
            StepSizeWarning,
            stacklevel=2,
        )

    bundle_iters = 0
    subgrad_calls = 0
    if cfg.mode == "exact":
        center = prox_of_target(obj)
        offset = obj.value(center)
    else:
        res: BundleResult = prox_bundle(obj, cfg.delta, max_iter=bundle_max_iter)
        center = res.x_model
        offset = res.best_value - cfg.delta
        bundle_iters = res.iterations
        subgrad_calls = res.oracle_calls

    scale = math.sqrt(eta_mu)
    inv_two_eta_mu = 1.0 / (2.0 * eta_mu)
    for k in range(cfg.max_rejections):
        x = center + scale * rng.standard_normal(dim)
        d = x - center
        h1_x = float(d @ d) * inv_two_eta_mu + offset
        log_ratio = h1_x - obj.value(x)
        if log_ratio > 1e-9:
            raise EnvelopeViolationError(
                f"lower envelope exceeds target by {log_ratio:.3e} at a proposal; "
                "prox/bundle output is inconsistent with the potential"
            )
        if math.log(rng.random() + 5e-324) <= log_ratio:
            return RgoSample(
                x=x,
                rejections=k,
                bundle_iters=bundle_iters,
                center=center,
                envelope_offset=offset,
                log_accept_ratio=log_ratio,
                subgrad_calls=subgrad_calls,
            )
    raise RejectionLimitError(
        f"no acceptance within {cfg.max_rejections} proposals "
        "(step-size condition likely violated or profile wrong)",
        cfg.max_rejections,
        center,
    )
