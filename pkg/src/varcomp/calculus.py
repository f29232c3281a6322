"""Euler-Lagrange, Helmholtz and Vainberg-Tonti operators on source forms.

Multi-indices are sorted and each sorted jet coordinate is independent
(see :mod:`varcomp.expr`).  Formulas written with Einstein summation over
ordered index tuples are translated to sums over sorted multi-indices: a
partial derivative in the symmetric convention equals the sorted-coordinate
partial divided by the multiplicity of the multi-index, and a sum over
ordered tuples equals a sum over sorted ones weighted by multiplicity.
Helmholtz coefficients are stored as symmetric-tensor components, one entry
per sorted multi-index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Optional

import numpy as np

from .errors import DivergentHomotopy, VarcompError
from .expr import (
    ZERO, Expr, Field, JetSpec, as_expr, has_atoms, homogeneous_decompose,
    jet_order, jet_vars, multiplicity, multiset_difference,
    partial, sub_multisets, total_derivative, total_derivatives, var,
)

__all__ = [
    "SourceForm", "Lagrangian", "HelmholtzTensor", "euler_lagrange",
    "helmholtz", "vt_lagrangian", "canonical_completion",
    "completion_via_helmholtz", "reduce_order", "is_zero",
]


@dataclass(frozen=True)
class SourceForm:
    """Coefficients ``eps_sigma`` of a source form, one per field component."""

    spec: JetSpec
    components: tuple

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != self.spec.m:
            raise VarcompError(f"expected {self.spec.m} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    @property
    def order(self) -> int:
        return max((jet_order(c) for c in self.components), default=0)

    def __getitem__(self, sigma):
        return self.components[sigma]

    def __add__(self, other: "SourceForm") -> "SourceForm":
        return SourceForm(self.spec, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "SourceForm") -> "SourceForm":
        return SourceForm(self.spec, [a - b for a, b in zip(self.components, other.components)])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


@dataclass(frozen=True)
class Lagrangian:
    spec: JetSpec
    density: Expr

    def __post_init__(self):
        object.__setattr__(self, "density", as_expr(self.density))

    @property
    def order(self) -> int:
        return jet_order(self.density)


@dataclass
class HelmholtzTensor:
    """Nonzero coefficients ``H_{sigma nu}^{K}`` keyed by ``(sigma, nu, K)``."""

    spec: JetSpec
    order: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries.get(key, ZERO)

    def nonzero(self):
        return sorted(self.entries.items(), key=lambda kv: (len(kv[0][2]), kv[0]))

    def is_zero(self) -> bool:
        return not self.entries


# ----------------------------------------------------------------- helpers

def _field_vars(e: Expr):
    return {v for v in jet_vars(e) if isinstance(v, Field)}


def is_zero(e: Expr, spec: Optional[JetSpec] = None, points: int = 20,
            tol: float = 1e-9, seed: int = 0):
    """Zero test: ``(is_zero, path)`` with path ``"symbolic"`` or ``"numeric"``.

    Canonical forms decide polynomial expressions.  Expressions with atoms
    that do not cancel structurally are sampled at random jet points.
    """
    e = as_expr(e)
    if e.is_zero():
        return True, "symbolic"
    if not has_atoms(e) or spec is None:
        return False, "symbolic"
    from .numjet import DensityFn, random_points
    order = jet_order(e)
    rng = np.random.default_rng(seed)
    pts, params = random_points(spec, order, points, rng, exprs=[e])
    vals = DensityFn.from_expr(e, spec, order=order, params=params).batch(pts)
    scale = max(1.0, float(np.max(np.abs(vals))))
    return bool(np.all(np.abs(vals) <= tol * scale)), "numeric"


# ------------------------------------------------------------ Euler-Lagrange

def euler_lagrange(lag: Lagrangian) -> SourceForm:
    """``E_sigma = sum_J (-1)^|J| d_J dL/dy^sigma_J`` over sorted multi-indices."""
    spec = lag.spec
    L = lag.density
    comps = [ZERO] * spec.m
    for v in sorted(_field_vars(L), key=lambda v: v.key):
        dL = partial(L, v)
        if dL.is_zero():
            continue
        term = total_derivatives(dL, v.J, spec)
        if len(v.J) % 2:
            term = -term
        s = spec.sigma(v)
        comps[s] = comps[s] + term
    return SourceForm(spec, comps)


# ---------------------------------------------------------------- Helmholtz

class _PartialTable:
    """Memoized ``d_M dEps_nu/dy^sigma_L`` for one source form."""

    def __init__(self, eps: SourceForm):
        self.spec = eps.spec
        self.eps = eps
        self.first = {}     # (nu, sigma, L) -> Expr, nonzero only
        for nu, c in enumerate(eps.components):
            for v in _field_vars(c):
                d = partial(c, v)
                if not d.is_zero():
                    self.first[(nu, self.spec.sigma(v), v.J)] = d
        self._deriv = {}

    def get(self, nu, sigma, L):
        return self.first.get((nu, sigma, L), ZERO)

    def derived(self, nu, sigma, L, M):
        key = (nu, sigma, L, M)
        if key not in self._deriv:
            if not M:
                out = self.get(nu, sigma, L)
            else:
                out = total_derivative(self.derived(nu, sigma, L, M[:-1]), M[-1], self.spec)
            self._deriv[key] = out
        return self._deriv[key]


def _helmholtz_entry(tab: _PartialTable, sigma, nu, K, r) -> Expr:
    k = len(K)
    nK = multiplicity(K)
    out = tab.get(sigma, nu, K) / nK
    second = tab.get(nu, sigma, K) / nK
    out = out - second if k % 2 == 0 else out + second
    for (nu2, s2, L), _ in list(tab.first.items()):
        if nu2 != nu or s2 != sigma or len(L) <= k or len(L) > r:
            continue
        M = multiset_difference(L, K)
        if M is None:
            continue
        l = len(L)
        coef = Fraction((-1) ** l * comb(l, k) * multiplicity(M), multiplicity(L))
        out = out - coef * tab.derived(nu, sigma, L, M)
    return out


def helmholtz(eps: SourceForm) -> HelmholtzTensor:
    """All Helmholtz coefficients of ``eps``; absent entries are zero."""
    spec = eps.spec
    r = eps.order
    tab = _PartialTable(eps)
    candidates = set()
    for (nu, sigma, L) in tab.first:
        for K in sub_multisets(L):
            candidates.add((sigma, nu, K))
            candidates.add((nu, sigma, K))
    H = HelmholtzTensor(spec, r)
    for sigma, nu, K in sorted(candidates):
        e = _helmholtz_entry(tab, sigma, nu, K, r)
        if not e.is_zero():
            H.entries[(sigma, nu, K)] = e
    return H


def helmholtz_verdict(H: HelmholtzTensor, points=20, seed=0):
    """``(variational, path)`` for a Helmholtz tensor."""
    path = "symbolic"
    for e in H.entries.values():
        zero, p = is_zero(e, H.spec, points=points, seed=seed)
        if p == "numeric":
            path = "numeric"
        if not zero:
            return False, path
    return True, path


# ------------------------------------------------------ Vainberg-Tonti etc.

def _scaled(spec: JetSpec, scaled_fields) -> frozenset:
    if scaled_fields is None:
        return spec.field_names
    scaled = frozenset(scaled_fields)
    unknown = scaled - spec.field_names
    if unknown:
        raise VarcompError(f"unknown fields in scaling set: {sorted(unknown)}")
    return scaled


def vt_lagrangian(eps: SourceForm, scaled_fields: Optional[Iterable[str]] = None) -> Lagrangian:
    """Vainberg-Tonti Lagrangian ``y^sigma int_0^1 eps_sigma(chi_u) du``.

    The homotopy integral is exact: a weight-w component contributes
    ``1/(w+1)``.  Only the scaled fields enter the contraction.
    """
    spec = eps.spec
    scaled = _scaled(spec, scaled_fields)
    L = ZERO
    for sigma, comp in enumerate(eps.components):
        fc = spec.fields[sigma]
        if fc.name not in scaled or comp.is_zero():
            continue
        acc = ZERO
        for w, part in homogeneous_decompose(comp, scaled):
            if w <= -1:
                raise DivergentHomotopy(w)
            acc = acc + part * Fraction(1) / (w + 1)
        L = L + var(fc.var()) * acc
    return Lagrangian(spec, L)


def canonical_completion(eps: SourceForm, scaled_fields: Optional[Iterable[str]] = None) -> SourceForm:
    """``tau = E(lambda_eps) - eps``.

    With a partial scaling set only the scaled components are completed;
    the others are returned as zero.
    """
    spec = eps.spec
    scaled = _scaled(spec, scaled_fields)
    E = euler_lagrange(vt_lagrangian(eps, scaled))
    comps = []
    for sigma, (e, c) in enumerate(zip(E.components, eps.components)):
        comps.append(e - c if spec.fields[sigma].name in scaled else ZERO)
    return SourceForm(spec, comps)


def completion_via_helmholtz(eps: SourceForm, H: Optional[HelmholtzTensor] = None) -> SourceForm:
    """Completion from the Helmholtz coefficients:
    ``tau_nu = -int_0^1 u sum_K y^sigma_K (H_{nu sigma}^K o chi_u) du``.
    """
    spec = eps.spec
    if H is None:
        H = helmholtz(eps)
    everything = spec.field_names
    comps = [ZERO] * spec.m
    for (nu, sigma, K), h in H.nonzero():
        acc = ZERO
        for w, part in homogeneous_decompose(h, everything):
            if w <= -2:
                raise DivergentHomotopy(w + 1)
            acc = acc + part * Fraction(1) / (w + 2)
        y = var(spec.fields[sigma].var(K))
        comps[nu] = comps[nu] - multiplicity(K) * y * acc
    return SourceForm(spec, comps)


# ----------------------------------------------------------- order reduction

def _linear_top_factor(mono, top):
    """The first order-``top`` field factor of ``mono`` that appears linearly,
    with every other factor of order <= top - 2."""
    for pos, (f, k) in enumerate(mono):
        if isinstance(f, Field) and f.order == top and k == 1:
            rest = mono[:pos] + mono[pos + 1:]
            ok = True
            for g, _ in rest:
                o = g.order if isinstance(g, Field) else (g.order if hasattr(g, "args") else 0)
                if o > top - 2:
                    ok = False
                    break
            if ok:
                return f, rest
    return None


def reduce_order(lag: Lagrangian) -> Lagrangian:
    """Lower the order by integrating linear top-order terms by parts.

    A term ``c R y_J`` with ``|J|`` maximal and ``R`` of order at most
    ``|J| - 2`` is replaced by ``-y_{J-i} d_i(c R)``; the two differ by the
    total derivative ``d_i(c R y_{J-i})``.  Passes repeat while the order
    keeps dropping.
    """
    spec = lag.spec
    L = lag.density
    while True:
        top = jet_order(L)
        if top == 0:
            break
        new = ZERO
        changed = False
        for mono, c in L.terms:
            hit = _linear_top_factor(mono, top)
            if hit is None:
                new = new + Expr._raw({mono: c})
                continue
            f, rest = hit
            i = f.J[-1]
            lower = Field(f.name, f.index, f.J[:-1])
            R = Expr._raw({rest: c})
            new = new - var(lower) * total_derivative(R, i, spec)
            changed = True
        if not changed:
            break
        L = new
        if jet_order(L) >= top:
            break
    return Lagrangian(spec, L)
