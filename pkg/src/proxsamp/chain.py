"""Outer Gibbs chain over the augmented density and its parameter rules.

One step draws the auxiliary point y ~ N(x_k, eta I) and then x_{k+1} from
exp(-g - ||.-y||^2/(2 eta)) through the rejection oracle.  Parameter
selection follows the regime rules: the semi-smooth step size
eta = (alpha+1)^(2/(alpha+1)) / ((2 l_alpha)^(2/(alpha+1)) d) with gap
tolerance delta^((1-alpha)/(alpha+1)) = 1/d, the composite rule taking the
minimum with 1/(l_one d), and the regularization weight
mu = eps / (sqrt(2) (sqrt(M4) + ||x0 - x_min||^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bundle import ProxObjective
from .potentials import Array, Potential, RegularizedTarget, SmoothnessProfile
from .quadrature import QuadratureDensity
from .rejection import RgoConfig, rgo_sample

REGIMES = ("semi-smooth", "composite", "strongly-convex")

CSV_COLUMNS_VERSION = "k,x...,rejections,bundle_iters,subgrad_calls;v1"


@dataclass(frozen=True)
class ChainConfig:
    """Everything needed to reproduce a chain bit-for-bit."""

    eta: float
    delta: float
    mu: float
    center_x0: tuple
    n_iters: int
    seed: int
    target_eps: Optional[float] = None
    regime: str = "semi-smooth"
    rgo_mode: str = "bundle"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.n_iters < 0:
            raise ValueError("n_iters must be >= 0")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        object.__setattr__(self, "center_x0", tuple(float(v) for v in self.center_x0))

    def rgo(self) -> RgoConfig:
        return RgoConfig(eta=self.eta, delta=self.delta, mode=self.rgo_mode)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "delta": self.delta,
            "mu": self.mu,
            "center_x0": list(self.center_x0),
            "n_iters": self.n_iters,
            "seed": self.seed,
            "target_eps": self.target_eps,
            "regime": self.regime,
            "rgo_mode": self.rgo_mode,
        }


@dataclass(frozen=True, eq=False)
class ChainTrace:
    """Iterates x_0..x_K, auxiliaries y_0..y_{K-1}, per-step diagnostics."""

    iterates: Array
    aux: Array
    rejections: Array
    bundle_iters: Array
    subgrad_calls: Array
    config: ChainConfig

    def __post_init__(self):
        k = self.config.n_iters
        if self.iterates.shape[0] != k + 1 or self.aux.shape[0] != k:
            raise ValueError("trace length inconsistent with config")

    @property
    def final(self) -> Array:
        return self.iterates[-1]

    def totals(self) -> dict:
        return {
            "rejections": int(self.rejections.sum()),
            "bundle_iters": int(self.bundle_iters.sum()),
            "subgrad_calls": int(self.subgrad_calls.sum()),
            "proposals_per_step": float(np.mean(self.rejections + 1))
            if self.rejections.size
            else 0.0,
        }

    def to_csv(self, path) -> None:
        d = self.iterates.shape[1]
        header = (
            "k," + ",".join(f"x{i}" for i in range(d)) + ",rejections,bundle_iters,subgrad_calls"
        )
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for k in range(self.iterates.shape[0]):
                xs = ",".join(repr(float(v)) for v in self.iterates[k])
                if k == 0:
                    fh.write(f"0,{xs},0,0,0\n")
                else:
                    fh.write(
                        f"{k},{xs},{int(self.rejections[k - 1])},"
                        f"{int(self.bundle_iters[k - 1])},{int(self.subgrad_calls[k - 1])}\n"
                    )


@dataclass(frozen=True)
class MomentEstimate:
    """Inputs of the regularization rule: M4 = E||x - x_min||^4 under the target."""

    m4: float
    x_min: tuple
    dist_sq: float
    source: str = "analytic"

    def __post_init__(self):
        if self.m4 < 0:
            raise ValueError("m4 must be >= 0")


def moment_estimate(
    potential: Potential,
    center_x0: Optional[Array] = None,
    pilot_iters: int = 2000,
    pilot_seed: int = 0,
) -> MomentEstimate:
    """M4 and x_min: analytic metadata, quadrature (d <= 2), or a pilot chain.

    The pilot-chain fallback is a documented heuristic: a moderate run with
    mu = 0 at the regime step size, fourth moments from its second half.
    """
    x_min = potential.x_min
    if center_x0 is None:
        center_x0 = x_min if x_min is not None else np.zeros(potential.dim)
    center_x0 = np.atleast_1d(np.asarray(center_x0, dtype=float))

    if potential.fourth_moment is not None and x_min is not None:
        m4 = potential.fourth_moment
        source = "analytic"
    elif potential.dim <= 2:
        truth = QuadratureDensity.build(
            potential.value,
            potential.dim,
            center=x_min if x_min is not None else None,
        )
        if x_min is None:
            if potential.dim == 1:
                i = int(np.argmin(truth.logpot))
                x_min = np.array([truth.axes[0][i]])
            else:
                i, j = np.unravel_index(np.argmin(truth.logpot), truth.logpot.shape)
                x_min = np.array([truth.axes[0][i], truth.axes[1][j]])
        xm = x_min
        m4 = truth.moment(lambda x: float(np.sum((x - xm) ** 2)) ** 2)
        source = "quadrature"
    else:
        if x_min is None:
            raise ValueError("pilot estimation needs a known minimizer")
        eta, delta = select_params_any(potential.profile, potential.dim)
        cfg = ChainConfig(
            eta=eta,
            delta=delta,
            mu=0.0,
            center_x0=tuple(center_x0),
            n_iters=pilot_iters,
            seed=pilot_seed,
            regime="semi-smooth" if potential.profile.l_one == 0 else "composite",
        )
        trace = run_chain(potential, cfg, x_init=x_min)
        tail = trace.iterates[pilot_iters // 2 :]
        m4 = float(np.mean(np.sum((tail - x_min) ** 2, axis=1) ** 2))
        source = "pilot-chain"
    dist_sq = float(np.sum((center_x0 - x_min) ** 2))
    return MomentEstimate(
        m4=float(m4), x_min=tuple(float(v) for v in x_min), dist_sq=dist_sq, source=source
    )


# ---------------------------------------------------------------------------
# Parameter rules
# ---------------------------------------------------------------------------


def select_params_semismooth(profile: SmoothnessProfile, d: int) -> tuple:
    """(eta, delta) for an alpha-semi-smooth potential in dimension d.

    delta solves delta^((1-alpha)/(alpha+1)) = 1/d; at alpha = 1 the
    exponent vanishes and delta = 1 is used (the bundle cost term it feeds
    is 1 regardless, and the 2 exp(delta) proposal bound stays O(1)).
    """
    if profile.l_alpha <= 0:
        raise ValueError("semi-smooth rule needs l_alpha > 0")
    if d < 1:
        raise ValueError("d must be >= 1")
    a = profile.alpha
    eta = (a + 1.0) ** (2.0 / (a + 1.0)) / (
        (2.0 * profile.l_alpha) ** (2.0 / (a + 1.0)) * d
    )
    if a >= 1.0:
        delta = 1.0
    else:
        delta = float(d) ** (-(a + 1.0) / (1.0 - a))
    return eta, delta


def select_params_composite(profile: SmoothnessProfile, d: int) -> tuple:
    """(eta, delta) with the step size capped by both regime guards."""
    if profile.l_alpha <= 0 and profile.l_one <= 0:
        raise ValueError("composite rule needs l_alpha > 0 or l_one > 0")
    guards = []
    delta = 1.0
    if profile.l_alpha > 0:
        eta_semi, delta = select_params_semismooth(profile, d)
        guards.append(eta_semi)
    elif profile.alpha < 1.0:
        delta = float(d) ** (-(profile.alpha + 1.0) / (1.0 - profile.alpha))
    if profile.l_one > 0:
        guards.append(1.0 / (profile.l_one * d))
    return min(guards), delta


def select_params_any(profile: SmoothnessProfile, d: int) -> tuple:
    """Composite rule when a smooth part is declared, else semi-smooth."""
    if profile.l_one > 0:
        return select_params_composite(profile, d)
    return select_params_semismooth(profile, d)


def select_mu(eps: float, moments: MomentEstimate) -> float:
    """Regularization weight keeping the regularized target within eps/2 TV."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    return eps / (math.sqrt(2.0) * (math.sqrt(moments.m4) + moments.dist_sq))


@dataclass(frozen=True)
class IterationBudget:
    """Theorem-derived iteration count with every constant explicit."""

    n_iters: int
    rate_per_iter: float
    initial_divergence: float
    target: float
    rule: str

    def to_dict(self) -> dict:
        return {
            "n_iters": self.n_iters,
            "rate_per_iter": self.rate_per_iter,
            "initial_divergence": self.initial_divergence,
            "target": self.target,
            "rule": self.rule,
        }


def select_num_iters(
    eps: float,
    eta: float,
    mu: float,
    h0: Optional[float] = None,
    d: int = 1,
    w2sq: Optional[float] = None,
) -> IterationBudget:
    """Iterations to reach eps total variation (mu > 0) or eps KL (mu = 0).

    Strongly convex route: KL contracts by (1 + mu eta)^2 per step and
    Pinsker converts TV <= eps/2 into KL <= eps^2/2, so
    K = ceil(log(2 h0 / eps^2) / (2 log(1 + mu eta))).  Convex route:
    KL after k steps is at most W2^2(rho_0, target)/(k eta).  Unknown
    initial divergences default to d, and the constants are conservative;
    both are echoed so callers can override.
    """
    if eps <= 0 or eta <= 0:
        raise ValueError("need eps > 0 and eta > 0")
    if mu > 0:
        h0 = float(d) if h0 is None else float(h0)
        rate = 2.0 * math.log1p(mu * eta)
        target = eps * eps / 2.0
        k = max(1, math.ceil(math.log(max(h0 / target, 1.0 + 1e-12)) / rate))
        return IterationBudget(
            n_iters=k,
            rate_per_iter=rate,
            initial_divergence=h0,
            target=target,
            rule="kl-contraction",
        )
    w2sq = float(d) if w2sq is None else float(w2sq)
    k = max(1, math.ceil(w2sq / (eps * eta)))
    return IterationBudget(
        n_iters=k,
        rate_per_iter=0.0,
        initial_divergence=w2sq,
        target=eps,
        rule="w2-over-k-eta",
    )


# ---------------------------------------------------------------------------
# Running chains
# ---------------------------------------------------------------------------


def gibbs_step(
    x_k: Array,
    target: RegularizedTarget,
    rgo_cfg: RgoConfig,
    rng: np.random.Generator,
    warn_on_step: bool = True,
):
    """One sweep: y_k = x_k + sqrt(eta) z, then x_{k+1} from the inner oracle."""
    y = x_k + math.sqrt(rgo_cfg.eta) * rng.standard_normal(x_k.shape[0])
    obj = ProxObjective(target=target, eta=rgo_cfg.eta, y=y)
    sample = rgo_sample(obj, rgo_cfg, rng, warn_on_step=warn_on_step)
    return y, sample


def run_chain(
    potential: Potential,
    config: ChainConfig,
    x_init: Optional[Array] = None,
    warn_on_step: bool = True,
) -> ChainTrace:
    """Run K sweeps from x_init (default: the regularization center)."""
    d = potential.dim
    center = np.asarray(config.center_x0, dtype=float)
    if center.shape != (d,):
        raise ValueError(f"center_x0 has length {center.shape[0]}, expected {d}")
    if x_init is None:
        x_init = center
    x = np.atleast_1d(np.asarray(x_init, dtype=float)).copy()
    if x.shape != (d,):
        raise ValueError(f"x_init has shape {x.shape}, expected ({d},)")

    target = RegularizedTarget(potential, config.mu, center)
    rgo_cfg = config.rgo()
    rng = np.random.default_rng(config.seed)

    k = config.n_iters
    iterates = np.empty((k + 1, d))
    aux = np.empty((k, d))
    rejections = np.zeros(k, dtype=np.int64)
    bundle_iters = np.zeros(k, dtype=np.int64)
    subgrad_calls = np.zeros(k, dtype=np.int64)
    iterates[0] = x
    for i in range(k):
        y, sample = gibbs_step(x, target, rgo_cfg, rng, warn_on_step=warn_on_step)
        warn_on_step = False  # one warning per chain is enough
        x = sample.x
        aux[i] = y
        iterates[i + 1] = x
        rejections[i] = sample.rejections
        bundle_iters[i] = sample.bundle_iters
        subgrad_calls[i] = sample.subgrad_calls
    return ChainTrace(
        iterates=iterates,
        aux=aux,
        rejections=rejections,
        bundle_iters=bundle_iters,
        subgrad_calls=subgrad_calls,
        config=config,
    )


def run_chains(
    potential: Potential,
    config: ChainConfig,
    n_chains: int,
    x_init: Optional[Array] = None,
) -> list:
    """Independent chains with per-chain seeds seed + index."""
    out = []
    for i in range(n_chains):
        cfg_i = replace(config, seed=config.seed + i)
        out.append(run_chain(potential, cfg_i, x_init=x_init, warn_on_step=(i == 0)))
    return out
