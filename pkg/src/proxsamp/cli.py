"""Batch front-end: parameter tables, chain runs, verification suites.

Exit codes: 0 success, 1 check failure, 2 usage error.  Configuration is a
single JSON file with flat sections (target, regime, chain, output); every
default is printable via ``proxsamp config --defaults``.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .chain import (
    CSV_COLUMNS_VERSION,
    ChainConfig,
    IterationBudget,
    moment_estimate,
    run_chain,
    select_mu,
    select_num_iters,
    select_params_composite,
    select_params_semismooth,
)
from .potentials import ZOO_NAMES, make_by_name
from .rejection import RgoConfig, rejection_bound
from .verify import SUITES, run_suites

DEFAULT_CONFIG = {
    "target": {"name": "l1", "dim": 1, "params": {"scale": 1.0}},
    "regime": {
        "kind": "semi-smooth",
        "eps": 0.2,
        "eta": None,
        "delta": None,
        "mu": None,
        "rgo_mode": "bundle",
    },
    "chain": {
        "n_iters": 100,
        "n_chains": 4,
        "seed": 0,
        "workers": 1,
        "x_init": None,
    },
    "output": {"dir": None},
}

OUTPUT_DIR_ENV = "PROXSAMP_OUT"


class UsageError(Exception):
    pass


def load_config(path=None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {path}: {e}")
        for section, values in user.items():
            if section not in cfg:
                raise UsageError(f"unknown config section {section!r}")
            if not isinstance(values, dict):
                raise UsageError(f"config section {section!r} must be an object")
            for key, val in values.items():
                if key not in cfg[section]:
                    raise UsageError(f"unknown config key {section}.{key}")
                cfg[section][key] = val
    return cfg


def resolve_parameters(cfg: dict) -> dict:
    """Fill eta/delta/mu from the regime rules where not overridden."""
    tsec = cfg["target"]
    rsec = cfg["regime"]
    pot = make_by_name(tsec["name"], int(tsec["dim"]), tsec.get("params") or {})
    d = pot.dim
    kind = rsec["kind"]
    profile = pot.profile

    if kind == "semi-smooth":
        eta, delta = select_params_semismooth(profile, d)
    elif kind in ("composite", "strongly-convex"):
        eta, delta = select_params_composite(profile, d)
    else:
        raise UsageError(f"unknown regime kind {rsec['kind']!r}")
    if rsec.get("eta") is not None:
        eta = float(rsec["eta"])
    if rsec.get("delta") is not None:
        delta = float(rsec["delta"])

    mu = rsec.get("mu")
    moments = None
    if mu is None:
        if kind == "semi-smooth" and rsec.get("eps"):
            moments = moment_estimate(pot)
            mu = select_mu(float(rsec["eps"]), moments)
        else:
            mu = 0.0  # convex / strongly-convex regimes run unregularized
    mu = float(mu)

    eps = rsec.get("eps")
    budget: IterationBudget = select_num_iters(
        eps=float(eps) if eps else 0.2, eta=eta, mu=mu, d=d
    )
    return {
        "potential": pot,
        "eta": eta,
        "delta": delta,
        "mu": mu,
        "moments": moments,
        "budget": budget,
        "kind": kind,
    }


def cmd_params(args) -> int:
    cfg = load_config(args.config)
    p = resolve_parameters(cfg)
    pot = p["potential"]
    profile = pot.profile
    eta, delta, mu = p["eta"], p["delta"], p["mu"]
    eta_mu = eta / (1.0 + eta * mu)
    eta_mu_l1 = eta / (1.0 + eta * mu + eta * profile.l_one)
    mode = cfg["regime"]["rgo_mode"]
    bound = rejection_bound(
        RgoConfig(eta=eta, delta=delta if mode == "bundle" else 0.0, mode=mode),
        profile,
        pot.dim,
        mu=mu,
    )
    rows = [
        ("target", f"{pot.name} (d={pot.dim})"),
        ("regime", p["kind"]),
        ("alpha / l_alpha / l_one / lambda",
         f"{profile.alpha:g} / {profile.l_alpha:g} / {profile.l_one:g} / {profile.lambda_strong:g}"),
        ("eta", f"{eta:.10g}"),
        ("delta", f"{delta:.10g}"),
        ("mu", f"{mu:.10g}"),
        ("eta_mu", f"{eta_mu:.10g}"),
        ("eta_mu_l1", f"{eta_mu_l1:.10g}"),
        ("rejection_bound", f"{bound.value:.6g} (condition_ok={bound.condition_ok})"),
        ("n_iters (theorem)",
         f"{p['budget'].n_iters} [{p['budget'].rule}: init={p['budget'].initial_divergence:.6g},"
         f" target={p['budget'].target:.6g}, rate={p['budget'].rate_per_iter:.6g}]"),
    ]
    if p["moments"] is not None:
        rows.insert(
            6,
            ("m4 / dist_sq",
             f"{p['moments'].m4:.10g} / {p['moments'].dist_sq:.10g} ({p['moments'].source})"),
        )
    width = max(len(r[0]) for r in rows)
    for key, val in rows:
        print(f"{key:<{width}}  {val}")
    return 0


def _run_one_chain(payload):
    name, dim, params, cfg_dict, x_init = payload
    pot = make_by_name(name, dim, params)
    cfg = ChainConfig(**cfg_dict)
    trace = run_chain(
        pot, cfg, x_init=np.asarray(x_init, dtype=float) if x_init else None
    )
    return trace


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out_dir or cfg["output"]["dir"] or os.environ.get(
        OUTPUT_DIR_ENV, "runs"
    )
    p = resolve_parameters(cfg)
    pot = p["potential"]
    csec = cfg["chain"]
    n_chains = int(csec["n_chains"])
    workers = max(1, int(csec["workers"]))
    center = pot.x_min if pot.x_min is not None else np.zeros(pot.dim)

    base = dict(
        eta=p["eta"],
        delta=p["delta"],
        mu=p["mu"],
        center_x0=tuple(float(v) for v in center),
        n_iters=int(csec["n_iters"]),
        seed=0,
        target_eps=cfg["regime"].get("eps"),
        regime=p["kind"],
        rgo_mode=cfg["regime"]["rgo_mode"],
    )
    payloads = []
    for i in range(n_chains):
        cfg_i = dict(base, seed=int(csec["seed"]) + i)
        payloads.append(
            (
                cfg["target"]["name"],
                pot.dim,
                cfg["target"].get("params") or {},
                cfg_i,
                csec.get("x_init"),
            )
        )

    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one_chain, payloads))
    else:
        traces = [_run_one_chain(pl) for pl in payloads]
    wall = time.perf_counter() - t0

    csv_paths = []
    for i, trace in enumerate(traces):
        path = os.path.join(out_dir, f"chain_{i:03d}.csv")
        trace.to_csv(path)
        csv_paths.append(path)

    totals = {
        "rejections": sum(t.totals()["rejections"] for t in traces),
        "bundle_iters": sum(t.totals()["bundle_iters"] for t in traces),
        "subgrad_calls": sum(t.totals()["subgrad_calls"] for t in traces),
    }
    manifest = {
        "version": __version__,
        "csv_columns": CSV_COLUMNS_VERSION,
        "config": cfg,
        "resolved": {
            "eta": p["eta"],
            "delta": p["delta"],
            "mu": p["mu"],
            "regime": p["kind"],
        },
        "seeds": [int(csec["seed"]) + i for i in range(n_chains)],
        "files": [os.path.basename(q) for q in csv_paths],
        "wall_clock_s": wall,
        "totals": totals,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

    steps = max(1, n_chains * int(csec["n_iters"]))
    summary = {
        "n_chains": n_chains,
        "n_iters": int(csec["n_iters"]),
        "mean_proposals_per_step": (totals["rejections"] + steps) / steps,
        "mean_bundle_iters_per_step": totals["bundle_iters"] / steps,
        "mean_subgrad_calls_per_step": totals["subgrad_calls"] / steps,
        "wall_clock_s": wall,
        "seconds_per_step": wall / steps,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    print(f"wrote {len(csv_paths)} chains + manifest + summary to {out_dir}")
    return 0


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = run_suites(names)
    payload = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_fallback)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if payload["passed"] else 1


def _json_fallback(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def cmd_config(args) -> int:
    if args.defaults:
        print(json.dumps(DEFAULT_CONFIG, indent=2, sort_keys=True))
        return 0
    cfg = load_config(args.config)
    print(json.dumps(cfg, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxsamp",
        description="sampling from log-concave densities with nonsmooth potentials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print the derived parameter table")
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(fn=cmd_params)

    p = sub.add_parser("sample", help="run chains and write trace artifacts")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./runs)")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument(
        "suite",
        choices=sorted(SUITES) + ["all"],
        help="which suite to run",
    )
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("config", help="print configuration")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--defaults", action="store_true", help="print built-in defaults")
    p.set_defaults(fn=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
