"""Named invariant checks on sampled metric and electromagnetic jets.

A scenario is a JSON object::

    {"name": "default", "seed": 42, "n": 4, "points": 100, "kappa": 1.0,
     "checks": {"hilbert_identity": {"tol": 1e-10}, ...}}

Each entry of ``checks`` may override ``points`` and ``tol``.  Checks whose
pass condition is a lower bound (the non-variationality witness) use ``min``
instead of ``tol``.
"""
from __future__ import annotations

import json
import time

import numpy as np

from .errors import DivergentHomotopy, SingularMetric, VarcompError
from .gr import (
    PI, covariant_potential_divergence_demo, einstein_density, einstein_density_fn,
    em_hilbert_tensor_fd, em_symmetrized_tensor, em_source_fn, em_symmetrization_term,
    em_flat_noether, em_vt_closed_form, hilbert_density, hilbert_density_fn,
    ricci_source_fn, sample_em_jet, sample_metric_jet,
)
from .numjet import numeric_euler_lagrange, numeric_helmholtz, numeric_vt_lagrangian

DEFAULT_CHECKS = {
    "hilbert_identity": {"tol": 1e-10},
    "einstein_euler_lagrange": {"tol": 1e-3, "points": 20},
    "alpha_independence": {"tol": 1e-6, "points": 20},
    "einstein_helmholtz": {"tol": 1e-4, "points": 20},
    "ricci_witness": {"min": 1e-2, "points": 20},
    "em_symmetrization": {"tol": 1e-3, "points": 50},
    "em_symmetry": {"tol": 1e-10, "points": 50},
    "em_vt_lagrangian": {"tol": 1e-10, "points": 50},
    "covariant_potential_divergence": {"points": 20},
    "einstein_vanishes": {"tol": 1e-12, "points": 20},
}
LOWER_BOUND = {"ricci_witness"}
METRIC_ONLY = ("einstein_euler_lagrange", "alpha_independence", "einstein_helmholtz",
               "ricci_witness", "einstein_vanishes")
MAX_RESAMPLE = 50


def load_scenario(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        sc = json.load(fh)
    return validate(sc)


def validate(sc: dict) -> dict:
    sc = dict(sc)
    sc.setdefault("name", "scenario")
    sc.setdefault("seed", 42)
    sc.setdefault("n", 4)
    sc.setdefault("kappa", 1.0)
    n = sc["n"]
    if not isinstance(n, int) or n < 2:
        raise VarcompError("scenario n must be an integer >= 2")
    if sc.get("checks") is None:
        if n == 4:
            names = [c for c in DEFAULT_CHECKS if c != "einstein_vanishes"]
        elif n == 2:
            names = [c for c in METRIC_ONLY]
        else:
            names = ["hilbert_identity"] + [c for c in METRIC_ONLY if c != "einstein_vanishes"]
        sc["checks"] = {k: {} for k in names}
    if "points" in sc and (not isinstance(sc["points"], int) or sc["points"] < 1):
        raise VarcompError("scenario points must be a positive integer")
    for name, cfg in sc["checks"].items():
        if name not in CHECKS:
            raise VarcompError(f"unknown check {name!r}")
        if name in ("hilbert_identity",) and n < 3:
            raise VarcompError("hilbert_identity needs n >= 3: for n = 2 the homotopy integral diverges")
        if name.startswith("em_") or name.startswith("covariant"):
            if n != 4:
                raise VarcompError(f"{name} is defined for n = 4 only")
        for key in ("tol", "min"):
            if key in cfg and not cfg[key] > 0:
                raise VarcompError(f"{name}: {key} must be positive")
        if "points" in cfg and (not isinstance(cfg["points"], int) or cfg["points"] < 1):
            raise VarcompError(f"{name}: points must be a positive integer")
    return sc


def _seeds(seed, name, count):
    tag = sum(ord(c) * 31 ** k for k, c in enumerate(name)) % (2 ** 31)
    return [int(s) for s in np.random.SeedSequence([seed, tag]).generate_state(count)]


def _metric_jets(sc, name, count, order=2):
    out = []
    for s in _seeds(sc["seed"], name, count + MAX_RESAMPLE):
        if len(out) == count:
            break
        try:
            out.append(sample_metric_jet(s, sc["n"], order))
        except SingularMetric:
            continue
    if len(out) < count:
        raise SingularMetric("resampling exhausted")
    return out


def _em_jets(sc, name, count, flat):
    seeds = _seeds(sc["seed"], name, count)
    return [sample_em_jet(s, sc["n"], 2, flat=flat, on_shell=flat) for s in seeds]


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = float(np.max(np.abs(b)))
    err = float(np.max(np.abs(a - b)))
    return err / scale if scale > 1e-12 else err


# ------------------------------------------------------------------ checks

def check_hilbert_identity(sc, k):
    """Quadrature VT Lagrangian of ``alpha R^{ij} sqrt|g|`` against the closed
    form ``alpha R sqrt|g| / (n/2 - 1)`` (the Hilbert density when n = 4)."""
    n, kappa = sc["n"], sc["kappa"]
    alpha = -1.0 / (16 * PI * kappa)
    eps = ricci_source_fn(n, alpha)
    worst = 0.0
    for mj in _metric_jets(sc, "hilbert_identity", k):
        vt = numeric_vt_lagrangian(eps, mj.point)
        ref = hilbert_density(mj, kappa) / (n / 2 - 1)
        worst = max(worst, abs(vt - ref) / max(1.0, abs(ref)))
    return worst


def check_einstein_euler_lagrange(sc, k):
    n, kappa = sc["n"], sc["kappa"]
    L = hilbert_density_fn(n, kappa)
    G = einstein_density_fn(n, kappa)
    return max(_rel(numeric_euler_lagrange(L, mj.point), G(mj.point))
               for mj in _metric_jets(sc, "einstein_euler_lagrange", k, order=4))


def check_alpha_independence(sc, k):
    """EL arrays of ``alpha R sqrt|g|`` at alpha and 3 alpha are proportional."""
    n = sc["n"]
    alpha = -1.0 / (16 * PI * sc["kappa"])
    L1 = hilbert_density_fn(n, alpha=alpha)
    L3 = hilbert_density_fn(n, alpha=3 * alpha)
    worst = 0.0
    for mj in _metric_jets(sc, "alpha_independence", k, order=4):
        E1 = numeric_euler_lagrange(L1, mj.point)
        E3 = numeric_euler_lagrange(L3, mj.point)
        worst = max(worst, _rel(E3, 3 * E1))
    return worst


def check_einstein_helmholtz(sc, k):
    eps = einstein_density_fn(sc["n"], sc["kappa"])
    return max(numeric_helmholtz(eps, mj.point).max_abs
               for mj in _metric_jets(sc, "einstein_helmholtz", k, order=4))


def check_ricci_witness(sc, k):
    """Smallest Helmholtz residual of ``R^{ij} sqrt|g|`` over the jets used by
    the Einstein Helmholtz check."""
    eps = ricci_source_fn(sc["n"], 1.0)
    return min(numeric_helmholtz(eps, mj.point).max_abs
               for mj in _metric_jets(sc, "einstein_helmholtz", k, order=4))


def check_einstein_vanishes(sc, k):
    """Largest |G^{ij} sqrt|g||; zero in two dimensions."""
    return max(float(np.max(np.abs(einstein_density(mj, sc["kappa"]))))
               for mj in _metric_jets(sc, "einstein_vanishes", k))


def check_em_symmetrization(sc, k):
    worst = 0.0
    for ej in _em_jets(sc, "em_symmetrization", k, flat=True):
        T = em_hilbert_tensor_fd(ej, -1.0)
        ref = em_flat_noether(ej) + em_symmetrization_term(ej)
        worst = max(worst, _rel(T, ref))
    return worst


def check_em_symmetry(sc, k):
    """Asymmetry of ``T~ + (1/4 pi) A^i_{,l} F^{jl}`` relative to its size."""
    worst = 0.0
    for ej in _em_jets(sc, "em_symmetrization", k, flat=True):
        T, _ = em_symmetrized_tensor(ej, -1.0)
        worst = max(worst, _rel(T, T.T))
    return worst


def check_em_vt_lagrangian(sc, k):
    eps = em_source_fn(sc["n"], -1.0)
    worst = 0.0
    for ej in _em_jets(sc, "em_vt_lagrangian", k, flat=False):
        vt = numeric_vt_lagrangian(eps, ej.point, {"g"})
        ref = em_vt_closed_form(ej, -1.0)
        worst = max(worst, abs(vt - ref) / max(1.0, abs(ref)))
    return worst


def check_covariant_potential_divergence(sc, k):
    """Number of sampled jets on which the covariant-potential homotopy
    integral was NOT reported divergent."""
    missed = 0
    for ej in _em_jets(sc, "covariant_potential_divergence", k, flat=False):
        try:
            covariant_potential_divergence_demo(ej)
            missed += 1
        except DivergentHomotopy:
            pass
    return float(missed)


CHECKS = {
    "hilbert_identity": check_hilbert_identity,
    "einstein_euler_lagrange": check_einstein_euler_lagrange,
    "alpha_independence": check_alpha_independence,
    "einstein_helmholtz": check_einstein_helmholtz,
    "ricci_witness": check_ricci_witness,
    "einstein_vanishes": check_einstein_vanishes,
    "em_symmetrization": check_em_symmetrization,
    "em_symmetry": check_em_symmetry,
    "em_vt_lagrangian": check_em_vt_lagrangian,
    "covariant_potential_divergence": check_covariant_potential_divergence,
}


def run(sc: dict, seed=None, points=None, timings=None) -> dict:
    """Run every check of a scenario.  Returns a deterministic report dict."""
    sc = validate(sc)
    if seed is not None:
        sc["seed"] = seed
    results = []
    for name in sorted(sc["checks"]):
        cfg = dict(DEFAULT_CHECKS.get(name, {}))
        cfg.update(sc["checks"][name] or {})
        # precedence: command line, the check's own entry, scenario-wide, default
        own = sc["checks"][name] or {}
        k = points or own.get("points") or sc.get("points") or cfg.get("points", 100)
        t0 = time.perf_counter()
        value = CHECKS[name](sc, k)
        if timings is not None:
            timings[name] = time.perf_counter() - t0
        entry = {"name": name, "points": k, "residual": float(f"{value:.6e}")}
        if name in LOWER_BOUND:
            entry["min"] = cfg.get("min", 1e-2)
            entry["status"] = "pass" if value > entry["min"] else "fail"
        else:
            entry["tol"] = cfg.get("tol", 0.0)
            entry["status"] = "pass" if value <= entry["tol"] else "fail"
        results.append(entry)
    return {
        "scenario": sc["name"], "seed": sc["seed"], "n": sc["n"], "kappa": sc["kappa"],
        "verdict": "pass" if all(r["status"] == "pass" for r in results) else "fail",
        "checks": results,
    }
