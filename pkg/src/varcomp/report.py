"""Reports for problem files: symbolic results plus numeric oracle checks.

A report is a plain dict with a fixed key order so that its JSON form is
byte-identical across runs with the same input and seed.  Expressions are
stored as plain-format strings; sections that were not computed hold the
string ``"skipped"``.
"""
from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .calculus import (
    SourceForm, canonical_completion, completion_via_helmholtz,
    euler_lagrange, helmholtz, helmholtz_verdict, reduce_order, vt_lagrangian,
)
from .errors import AtomEvalFailure, MissingDerivativeRule
from .expr import JetSpec, has_atoms
from .numjet import (
    DensityFn, JetPoint, numeric_euler_lagrange, numeric_helmholtz,
    numeric_vt_lagrangian, random_points, vt_density,
)
from .render import render

SKIPPED = "skipped"
FD_TOL = 1e-6


def _label(spec: JetSpec, sigma, nu, K, fmt="plain"):
    a, b = spec.fields[sigma], spec.fields[nu]
    ks = "".join(spec.base[i - 1] for i in K) if all(len(b_) == 1 for b_ in spec.base) \
        else ",".join(spec.base[i - 1] for i in K)
    if fmt == "latex":
        return f"H_{{{render(a.var(), 'latex', spec)} {render(b.var(), 'latex', spec)}}}^{{{ks}}}"
    return f"H[{a!r},{b!r}]^({ks})"


def _components(sf: SourceForm, fmt):
    return [render(c, fmt, sf.spec) for c in sf.components]


def _rel(num, ref):
    num, ref = np.asarray(num, float), np.asarray(ref, float)
    return float(np.max(np.abs(num - ref)) / max(1.0, float(np.max(np.abs(ref)))))


class _Sampler:
    """Seeded jet points and parameter values shared by all numeric checks."""

    def __init__(self, spec, order, count, seed, exprs):
        rng = np.random.default_rng(seed)
        exprs = list(exprs)
        atoms = any(has_atoms(e) for e in exprs)
        # atoms are often singular at 0 (inverses, roots): stay away from it
        low, high = (0.25, 1.25) if atoms else (-1.0, 1.0)
        self.X, self.params = random_points(spec, order, count, rng, exprs, low, high)
        self.spec = spec
        self.order = order

    def points(self):
        for row in self.X:
            yield JetPoint(self.spec, self.order, row.copy(), self.params)

    def eval(self, exprs, order):
        fn = DensityFn.from_expr(list(exprs), self.spec, order=order, params=self.params)
        return fn.batch(self.X)


def _check(name, residual, tol, points, note=None):
    out = {"name": name, "residual": float(f"{residual:.6e}"), "tol": tol, "points": points,
           "status": "pass" if residual <= tol else "fail"}
    if note:
        out["note"] = note
    return out


def _skipped(name, reason):
    return {"name": name, "status": SKIPPED, "reason": reason}


def _numeric_helmholtz_max(epsfn, sampler):
    vals = [numeric_helmholtz(epsfn, p) for p in sampler.points()]
    return vals


def analyze(pf, command: str = "check", reduce: bool = False, via_helmholtz: bool = False,
            numeric_only: bool = False, seed: Optional[int] = None,
            points: Optional[int] = None, fmt: str = "plain", fd_tol: float = FD_TOL) -> dict:
    """Run the symbolic pipeline and numeric checks for a parsed problem.

    ``command`` is ``"check"`` (verdict and Helmholtz coefficients) or
    ``"complete"`` (also the Vainberg-Tonti Lagrangian, its Euler-Lagrange
    form and the completion).  Raises DivergentHomotopy for divergent
    homotopy integrals.
    """
    seed = pf.seed if seed is None else seed
    npts = pf.points if points is None else points
    if pf.require_one() == "lagrangian":
        eps = euler_lagrange(pf.lagrangian)
        origin = "euler_lagrange"
    else:
        eps = pf.source
        origin = "source"
    spec = pf.spec
    r = eps.order
    scaled = pf.scaling
    rep = {
        "verdict": None, "verdict_path": None, "seed": seed, "points": npts,
        "source": {"origin": origin, "components": _components(eps, fmt)},
        "helmholtz": SKIPPED, "vt_lagrangian": SKIPPED, "reduced_lagrangian": SKIPPED,
        "euler_lagrange": SKIPPED, "completion": SKIPPED, "completed_system": SKIPPED,
        "numeric_checks": [],
    }

    all_exprs = list(eps.components)

    # symbolic Helmholtz ------------------------------------------------------
    H = None
    if not numeric_only:
        try:
            H = helmholtz(eps)
        except MissingDerivativeRule as exc:
            rep["helmholtz"] = f"unavailable: {exc}"
    if H is not None:
        rep["helmholtz"] = [
            {"sigma": s, "nu": v, "K": list(K), "label": _label(spec, s, v, K, fmt),
             "expr": render(e, fmt, spec)}
            for (s, v, K), e in H.nonzero()
        ]
        variational, path = helmholtz_verdict(H, points=npts, seed=seed)
        rep["verdict"] = "variational" if variational else "non-variational"
        rep["verdict_path"] = path
        all_exprs += list(H.entries.values())

    # symbolic completion -------------------------------------------------------
    lam = tau = E = None
    if command == "complete":
        lam = vt_lagrangian(eps, scaled)
        E = euler_lagrange(lam)
        tau = completion_via_helmholtz(eps, H) if via_helmholtz else canonical_completion(eps, scaled)
        rep["vt_lagrangian"] = render(lam.density, fmt, spec)
        if reduce:
            rep["reduced_lagrangian"] = render(reduce_order(lam).density, fmt, spec)
        rep["euler_lagrange"] = _components(E, fmt)
        rep["completion"] = _components(tau, fmt)
        rep["completed_system"] = _components(eps + tau, fmt)
        rep["completion_method"] = "helmholtz" if via_helmholtz else "vainberg-tonti"
        all_exprs += [lam.density] + list(E.components) + list(tau.components)

    # numeric checks ------------------------------------------------------------
    checks = rep["numeric_checks"]
    order = max(2 * r, 2 * (lam.order if lam is not None else 0), 1)
    sampler = _Sampler(spec, order, npts, seed, all_exprs)
    try:
        epsfn = DensityFn.from_expr(list(eps.components), spec, order=r, params=sampler.params)
    except AtomEvalFailure as exc:
        if rep["verdict"] is None:
            raise
        for name in ("completion", "euler_lagrange", "helmholtz", "vt_lagrangian"):
            checks.append(_skipped(name, str(exc)))
        return rep
    num_H = _numeric_helmholtz_max(epsfn, sampler)
    num_max = max(h.max_abs for h in num_H)
    if H is not None:
        keys = sorted(set(H.entries) | {k for h in num_H for k in h.values})
        sym_vals = sampler.eval([H[k] for k in keys], order) if keys else np.zeros((npts, 0))
        num_vals = np.array([[h[k] for k in keys] for h in num_H]).reshape(npts, len(keys))
        checks.append(_check("helmholtz", _rel(num_vals, sym_vals) if keys else 0.0, fd_tol, npts))
    else:
        checks.append(_check("helmholtz_zero", num_max, fd_tol, npts,
                             note="numeric verdict: largest |H| over all points"))
        rep["verdict"] = "variational" if num_max <= fd_tol else "non-variational"
        rep["verdict_path"] = "numeric"

    if command == "complete":
        ref_L = sampler.eval([lam.density], order)[:, 0]
        num_L = [numeric_vt_lagrangian(epsfn, p, scaled) for p in sampler.points()]
        checks.append(_check("vt_lagrangian", _rel(num_L, ref_L), pf.tol, npts,
                             note="Gauss-Legendre quadrature of the homotopy integral"))
        Lnum = vt_density(epsfn, scaled)
        num_E = np.array([numeric_euler_lagrange(Lnum, p) for p in sampler.points()])
        ref_E = sampler.eval(E.components, order)
        checks.append(_check("euler_lagrange", _rel(num_E, ref_E), fd_tol, npts,
                             note="nested finite differences of the quadrature Lagrangian"))
        mask = np.array([c.name in scaled for c in spec.fields])
        num_tau = np.where(mask, num_E - sampler.eval(eps.components, order), 0.0)
        ref_tau = sampler.eval(tau.components, order)
        checks.append(_check("completion", _rel(num_tau, ref_tau), fd_tol, npts))
    else:
        checks.append(_skipped("vt_lagrangian", "not requested by check"))
        checks.append(_skipped("euler_lagrange", "not requested by check"))
        checks.append(_skipped("completion", "not requested by check"))
    checks.sort(key=lambda c: c["name"])
    return rep


def to_json(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=False) + "\n"


def to_text(rep: dict) -> str:
    lines = [f"verdict: {rep['verdict']} ({rep['verdict_path']} path)", f"seed: {rep['seed']}"]
    src = rep["source"]
    lines.append(f"source ({src['origin']}):")
    lines += [f"  [{k}] {c}" for k, c in enumerate(src["components"])]

    def section(title, body):
        if body == SKIPPED:
            lines.append(f"{title}: skipped")
        elif isinstance(body, str):
            lines.append(f"{title}: {body}")
        else:
            lines.append(f"{title}:")
            lines.extend(f"  [{k}] {c}" for k, c in enumerate(body))

    if isinstance(rep["helmholtz"], list):
        lines.append("helmholtz (nonzero coefficients):" if rep["helmholtz"] else
                     "helmholtz: all coefficients vanish")
        lines += [f"  {h['label']} = {h['expr']}" for h in rep["helmholtz"]]
    else:
        lines.append(f"helmholtz: {rep['helmholtz']}")
    section("vt_lagrangian", rep["vt_lagrangian"])
    section("reduced_lagrangian", rep["reduced_lagrangian"])
    section("euler_lagrange", rep["euler_lagrange"])
    section("completion", rep["completion"])
    section("completed_system", rep["completed_system"])
    lines.append("numeric checks:")
    for c in rep["numeric_checks"]:
        if c["status"] == SKIPPED:
            lines.append(f"  {c['name']}: skipped ({c['reason']})")
        else:
            lines.append(f"  {c['name']}: {c['status']} residual={c['residual']:.3e} "
                         f"tol={c['tol']:.1e} points={c['points']}")
    return "\n".join(lines) + "\n"
