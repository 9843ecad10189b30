"""Convex potentials: value/subgradient oracles plus smoothness metadata.

A potential is the negative log-density f of a target ``exp(-f)``.  Each
potential declares a smoothness profile (Holder exponent and coefficients
for its subgradient) that downstream step-size rules and complexity bounds
consume.  ``validate_profile`` checks a declared profile empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class SmoothnessProfile:
    """Subgradient regularity: ||f'(u)-f'(v)|| <= l_alpha*||u-v||^alpha + l_one*||u-v||.

    alpha=0 is the Lipschitz-function (bounded subgradient variation) case,
    alpha=1 is gradient-Lipschitz smoothness.  ``lambda_strong`` is the
    strong-convexity modulus (0 when merely convex).
    """

    alpha: float
    l_alpha: float
    l_one: float = 0.0
    lambda_strong: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.l_alpha < 0 or self.l_one < 0 or self.lambda_strong < 0:
            raise ValueError("smoothness coefficients must be >= 0")

    @property
    def usable(self) -> bool:
        """True when at least one coefficient is positive (step-size rules need one)."""
        return self.l_alpha > 0 or self.l_one > 0

    def holder_bound(self, dist: float) -> float:
        """Declared upper bound on ||f'(u)-f'(v)|| at ||u-v|| = dist."""
        return self.l_alpha * dist**self.alpha + self.l_one * dist


@dataclass(frozen=True, eq=False)
class Potential:
    """Convex potential on R^d with oracles and optional closed forms.

    ``value`` and ``subgrad`` accept a shape-(dim,) array; ``subgrad`` may
    return any subdifferential element.  ``prox``, when present, maps
    (eta, y) to argmin f + ||.-y||^2/(2 eta).  ``sample_exact`` draws n iid
    points from exp(-f) (only the Gaussian family provides it).
    ``fourth_moment`` is the analytic value of E||x - x_min||^4 under
    exp(-f) when known.
    """

    dim: int
    value: Callable[[Array], float]
    subgrad: Callable[[Array], Array]
    profile: SmoothnessProfile
    prox: Optional[Callable[[float, Array], Array]] = None
    x_min: Optional[Array] = None
    f_min: Optional[float] = None
    sample_exact: Optional[Callable[[np.random.Generator, int], Array]] = None
    fourth_moment: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")


@dataclass(frozen=True, eq=False)
class RegularizedTarget:
    """g = f + (mu/2) ||. - center||^2; mu > 0 makes g mu-strongly convex."""

    base: Potential
    mu: float
    center: Array

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if center.shape != (self.base.dim,):
            raise ValueError(
                f"center has shape {center.shape}, expected ({self.base.dim},)"
            )
        object.__setattr__(self, "center", center)

    def value(self, x: Array) -> float:
        x = _check_point(x, self.base.dim)
        dx = x - self.center
        return float(self.base.value(x)) + 0.5 * self.mu * float(dx @ dx)

    def subgrad(self, x: Array) -> Array:
        x = _check_point(x, self.base.dim)
        return np.asarray(self.base.subgrad(x), dtype=float) + self.mu * (
            x - self.center
        )


def _check_point(x, dim: int) -> Array:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise ValueError(f"point has shape {x.shape}, expected ({dim},)")
    return x


@dataclass(frozen=True)
class ProfileReport:
    """Empirical check of a declared profile over sampled pairs."""

    max_smoothness_violation: float
    max_convexity_violation: float
    worst_pair_dist: float
    n_pairs: int
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_smoothness_violation": self.max_smoothness_violation,
            "max_convexity_violation": self.max_convexity_violation,
            "worst_pair_dist": self.worst_pair_dist,
            "n_pairs": self.n_pairs,
            "tol": self.tol,
            "passed": self.passed,
        }


def sample_in_ball(rng: np.random.Generator, dim: int, radius: float) -> Array:
    """Uniform draw from the centered Euclidean ball."""
    z = rng.standard_normal(dim)
    z /= np.linalg.norm(z) + 1e-300
    r = radius * rng.random() ** (1.0 / dim)
    return r * z

def validate_profile(
    p: Potential,
    n_pairs: int,
    radius: float,
    rng: np.random.Generator,
    tol: float = 1e-8,
) -> ProfileReport:
    """Sample point pairs in a ball and test the declared subgradient bound.

    Also checks the convexity inequality f(v) >= f(u) + <f'(u), v-u> on the
    same pairs.  Passes iff both max violations are <= tol.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    worst_smooth = 0.0
    worst_convex = 0.0
    worst_dist = 0.0
    for _ in range(n_pairs):
        u = sample_in_ball(rng, p.dim, radius)
        v = sample_in_ball(rng, p.dim, radius)
        gu = np.asarray(p.subgrad(u), dtype=float)
        gv = np.asarray(p.subgrad(v), dtype=float)
        dist = float(np.linalg.norm(u - v))
        viol = float(np.linalg.norm(gu - gv)) - p.profile.holder_bound(dist)
        if viol > worst_smooth:
            worst_smooth = viol
            worst_dist = dist
        fu = float(p.value(u))
        fv = float(p.value(v))
        cviol = fu + float(gu @ (v - u)) - fv
        worst_convex = max(worst_convex, cviol)
    return ProfileReport(
        max_smoothness_violation=worst_smooth,
        max_convexity_violation=worst_convex,
        worst_pair_dist=worst_dist,
        n_pairs=n_pairs,
        tol=tol,
        passed=(worst_smooth <= tol and worst_convex <= tol),
    )


# ---------------------------------------------------------------------------
# Test-potential zoo.  Subgradients at kinks use the zero-including element
# (np.sign convention), which keeps cutting-plane models deterministic.
# ---------------------------------------------------------------------------


def make_l1(dim: int, scale: float = 1.0) -> Potential:
    """f(x) = scale * ||x||_1.

    Declared alpha=0 coefficient is the subgradient-set diameter
    2*scale*sqrt(dim), the tightest constant for which the profile
    inequality holds verbatim.  Prox is the soft-threshold.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    s = float(scale)

    def value(x):
        return s * float(np.sum(np.abs(x)))

    def subgrad(x):
        return s * np.sign(x)

    def prox(eta, y):
        y = np.asarray(y, dtype=float)
        return np.sign(y) * np.maximum(np.abs(y) - eta * s, 0.0)

    def sample(rng, n):
        # coordinates iid Laplace with rate `s`
        return rng.laplace(scale=1.0 / s, size=(n, dim))

    # E||x||^4 for iid Laplace(1/s) coordinates
    m4 = (24.0 * dim + 4.0 * dim * (dim - 1)) / s**4
    return Potential(
        dim=dim,
        value=value,
        subgrad=subgrad,
        profile=SmoothnessProfile(alpha=0.0, l_alpha=2.0 * s * math.sqrt(dim)),
        prox=prox,
        x_min=np.zeros(dim),
        f_min=0.0,
        sample_exact=sample,
        fourth_moment=m4,
        name="l1",
    )


def make_power_norm(dim: int, alpha: float, c: float = 1.0) -> Potential:
    """f(x) = c/(alpha+1) * ||x||^(alpha+1), the canonical alpha-semi-smooth potential.

    The gradient x -> c ||x||^(alpha-1) x is alpha-Holder with constant
    c * 2^(1-alpha), which is what the profile declares.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    if c <= 0:
        raise ValueError("c must be > 0")
    a = float(alpha)
    cc = float(c)

    def value(x):
        return cc / (a + 1.0) * float(np.linalg.norm(x)) ** (a + 1.0)

    def subgrad(x):
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros(dim)
        return cc * r ** (a - 1.0) * np.asarray(x, dtype=float)

    if a == 1.0:

        def prox(eta, y):
            return np.asarray(y, dtype=float) / (1.0 + eta * cc)

    elif a == 0.0:

        def prox(eta, y):
            y = np.asarray(y, dtype=float)
            r = float(np.linalg.norm(y))
            if r == 0.0:
                return np.zeros(dim)
            return y * max(1.0 - eta * cc / r, 0.0)

    else:
        # radial reduction: the prox lies on the ray of y at radius t solving
        # t + eta*c*t^alpha = ||y||, a strictly increasing equation in t
        def prox(eta, y):
            from scipy.optimize import brentq

            y = np.asarray(y, dtype=float)
            r = float(np.linalg.norm(y))
            if r == 0.0:
                return np.zeros(dim)
            t = brentq(
                lambda t: t + eta * cc * t**a - r, 0.0, r, xtol=1e-15, rtol=1e-15
            )
            return (t / r) * y

    return Potential(
        dim=dim,
        value=value,
        subgrad=subgrad,
        profile=SmoothnessProfile(alpha=a, l_alpha=cc * 2.0 ** (1.0 - a)),
        prox=prox,
        x_min=np.zeros(dim),
        f_min=0.0,
        name="power_norm",
    )


def make_quad_plus_l1(
    dim: int, q_diagonal: Sequence[float], scale: float = 1.0
) -> Potential:
    """f(x) = 0.5 x' diag(q) x + scale * ||x||_1 (composite smooth + nonsmooth)."""
    q = np.atleast_1d(np.asarray(q_diagonal, dtype=float))
    if q.shape != (dim,) or np.any(q < 0):
        raise ValueError("q_diagonal must be dim nonnegative entries")
    if scale <= 0:
        raise ValueError("scale must be > 0")
    s = float(scale)

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(q @ (x * x)) + s * float(np.sum(np.abs(x)))

    def subgrad(x):
        x = np.asarray(x, dtype=float)
        return q * x + s * np.sign(x)

    def prox(eta, y):
        # coordinate-wise: soft-threshold then shrink by the quadratic
        y = np.asarray(y, dtype=float)
        return np.sign(y) * np.maximum(np.abs(y) - eta * s, 0.0) / (1.0 + eta * q)

    return Potential(
        dim=dim,
        value=value,
        subgrad=subgrad,
        profile=SmoothnessProfile(
            alpha=0.0,
            l_alpha=2.0 * s * math.sqrt(dim),
            l_one=float(np.max(q)),
            lambda_strong=float(np.min(q)),
        ),
        prox=prox,
        x_min=np.zeros(dim),
        f_min=0.0,
        name="quad_plus_l1",
    )


def make_hinge_sum(dim: int, planes: Sequence[tuple]) -> Potential:
    """f(x) = sum_i max(0, <a_i, x> + b_i) for given (a_i, b_i) pairs."""
    if len(planes) == 0:
        raise ValueError("need at least one plane")
    A = np.stack([np.atleast_1d(np.asarray(a, dtype=float)) for a, _ in planes])
    b = np.asarray([float(bi) for _, bi in planes])
    if A.shape[1] != dim:
        raise ValueError(f"plane normals have dim {A.shape[1]}, expected {dim}")

    def value(x):
        return float(np.sum(np.maximum(A @ np.asarray(x, dtype=float) + b, 0.0)))

    def subgrad(x):
        active = (A @ np.asarray(x, dtype=float) + b) > 0.0
        return A.T @ active.astype(float)

    x_min = None
    f_min = None
    if np.all(b <= 0):
        x_min = np.zeros(dim)
        f_min = 0.0
    return Potential(
        dim=dim,
        value=value,
        subgrad=subgrad,
        profile=SmoothnessProfile(
            alpha=0.0, l_alpha=float(np.sum(np.linalg.norm(A, axis=1)))
        ),
        x_min=x_min,
        f_min=f_min,
        name="hinge_sum",
    )


def make_gaussian(dim: int, diag_precision: Sequence[float]) -> Potential:
    """f(x) = 0.5 x' diag(p) x, with exact sampler and closed-form prox."""
    p = np.atleast_1d(np.asarray(diag_precision, dtype=float))
    if p.shape != (dim,) or np.any(p <= 0):
        raise ValueError("diag_precision must be dim positive entries")

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(p @ (x * x))

    def subgrad(x):
        return p * np.asarray(x, dtype=float)

    def prox(eta, y):
        return np.asarray(y, dtype=float) / (1.0 + eta * p)

    def sample(rng, n):
        return rng.standard_normal((n, dim)) / np.sqrt(p)

    var = 1.0 / p
    m4 = float(2.0 * np.sum(var**2) + np.sum(var) ** 2)
    return Potential(
        dim=dim,
        value=value,
        subgrad=subgrad,
        profile=SmoothnessProfile(
            alpha=1.0,
            l_alpha=0.0,
            l_one=float(np.max(p)),
            lambda_strong=float(np.min(p)),
        ),
        prox=prox,
        x_min=np.zeros(dim),
        f_min=0.0,
        sample_exact=sample,
        fourth_moment=m4,
        name="gaussian",
    )


ZOO_NAMES = ("l1", "power_norm", "quad_plus_l1", "hinge_sum", "gaussian")


def make_by_name(name: str, dim: int, params: dict) -> Potential:
    """Construct a zoo potential from a config-style (name, params) pair."""
    if name == "l1":
        return make_l1(dim, params.get("scale", 1.0))
    if name == "power_norm":
        return make_power_norm(dim, params["alpha"], params.get("c", 1.0))
    if name == "quad_plus_l1":
        return make_quad_plus_l1(
            dim, params.get("q_diagonal", [1.0] * dim), params.get("scale", 1.0)
        )
    if name == "hinge_sum":
        return make_hinge_sum(dim, [tuple(pl) for pl in params["planes"]])
    if name == "gaussian":
        return make_gaussian(dim, params.get("diag_precision", [1.0] * dim))
    raise ValueError(f"unknown potential {name!r}; available: {', '.join(ZOO_NAMES)}")


def default_zoo(dim: int) -> dict:
    """Canonical instances of every zoo family, used by verification suites."""
    rng = np.random.default_rng(1234)
    normals = rng.standard_normal((3, dim))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    planes = [(normals[i], -0.5) for i in range(3)]
    return {
        "l1": make_l1(dim, 1.0),
        "power_norm": make_power_norm(dim, 0.5, 1.0),
        "quad_plus_l1": make_quad_plus_l1(dim, np.ones(dim), 1.0),
        "hinge_sum": make_hinge_sum(dim, planes),
        "gaussian": make_gaussian(dim, np.ones(dim)),
    }
