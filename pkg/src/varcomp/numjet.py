"""Numeric oracle layer: densities evaluated at points of a jet space.

Points of ``J^s Y`` are flat float vectors in a canonical layout (base
coordinates first, then field coordinates order by order), so a layout of
order s is a prefix of every layout of higher order.  Densities are
vectorized callables ``X[B, N] -> out[B]`` (or ``out[B, m]`` for source
forms).

Nested total derivatives are taken along the Taylor section through the
point: the polynomial section whose jet at ``x0`` is the given point.  For
any function f on the jet space, ``d_i f`` at the point equals
``d/dx^i f(j gamma(x))`` at ``x0``, so repeated total derivatives become
finite differences in the base variables only.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import AtomEvalFailure, IncompletePoint, NonFiniteIntegrand, VarcompError
from .expr import (
    AtomDecl, Base, Expr, Field, JetSpec, Param, as_expr, jet_order,
    merge_indices, multi_indices, multiplicity, multiset_difference,
)

log = logging.getLogger(__name__)

__all__ = [
    "JetLayout", "JetPoint", "DensityFn", "eval_expr", "numeric_partial",
    "numeric_gradient", "numeric_total_derivative", "numeric_euler_lagrange",
    "numeric_helmholtz", "numeric_vt_lagrangian", "vt_density", "random_points",
    "prolong", "section_derivative", "NumericHelmholtz",
]


# ------------------------------------------------------------------- layout

class JetLayout:
    """Index map for the coordinates of ``J^order Y``."""

    def __init__(self, spec: JetSpec, order: int):
        self.spec = spec
        self.order = order
        self.coords = spec.coordinates(order)
        self.index = {c: k for k, c in enumerate(self.coords)}
        self.size = len(self.coords)
        self.field_slice = slice(spec.n, self.size)

    def __contains__(self, v):
        return v in self.index

    def field_mask(self, names) -> np.ndarray:
        names = frozenset(names)
        return np.array([isinstance(c, Field) and c.name in names for c in self.coords])

    def columns(self, order: int) -> int:
        """Number of leading columns making up the order-``order`` layout."""
        return layout(self.spec, order).size


@lru_cache(maxsize=None)
def layout(spec: JetSpec, order: int) -> JetLayout:
    return JetLayout(spec, order)


# -------------------------------------------------------------------- point

@dataclass
class JetPoint:
    """Numeric values of all coordinates of ``J^order Y`` (NaN = unknown),
    plus values of the parameters."""

    spec: JetSpec
    order: int
    values: np.ndarray
    params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, spec, mapping: Mapping, order: Optional[int] = None, params=None):
        mapping = dict(mapping)
        params = dict(params or {})
        for k in list(mapping):
            if isinstance(k, Param):
                params[k] = mapping.pop(k)
        if order is None:
            order = max((v.order for v in mapping if isinstance(v, Field)), default=0)
        lay = layout(spec, order)
        vals = np.full(lay.size, np.nan)
        for v, x in mapping.items():
            if v not in lay:
                raise VarcompError(f"{v!r} is not a coordinate of J^{order}")
            vals[lay.index[v]] = float(x)
        return cls(spec, order, vals, params)

    @property
    def layout(self) -> JetLayout:
        return layout(self.spec, self.order)

    def __getitem__(self, v):
        k = self.layout.index.get(v)
        if k is None or np.isnan(self.values[k]):
            raise IncompletePoint(v)
        return float(self.values[k])

    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def truncated(self, order: int) -> np.ndarray:
        if order > self.order:
            raise IncompletePoint(f"coordinates of order {order}")
        return self.values[: layout(self.spec, order).size]


def random_points(spec: JetSpec, order: int, count: int, rng, exprs=(), low=-1.0, high=1.0):
    """Uniform random jet points plus values for every parameter in ``exprs``."""
    lay = layout(spec, order)
    X = rng.uniform(low, high, size=(count, lay.size))
    found = {f for e in exprs for f in as_expr(e).factors() if isinstance(f, Param)}
    # sorted so that the draws do not depend on set iteration order
    ordered = sorted(found, key=lambda f: f.key)
    return X, {f: float(v) for f, v in zip(ordered, rng.uniform(low, high, size=len(ordered)))}


# ------------------------------------------------------------------ density

class DensityFn:
    """Vectorized function on a jet space of a declared order.

    ``fn`` maps an array ``X[B, N]`` in the layout of ``order`` to ``[B]``
    (scalar density) or ``[B, outputs]`` (source-form components).  Inputs
    from higher-order layouts are truncated automatically.
    """

    def __init__(self, fn: Callable, spec: JetSpec, order: int, outputs: Optional[int] = None):
        self.fn = fn
        self.spec = spec
        self.order = order
        self.outputs = outputs
        self.size = layout(spec, order).size

    def batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] < self.size:
            raise IncompletePoint(f"coordinates of order {self.order}")
        return np.asarray(self.fn(X[:, : self.size]), dtype=float)

    def __call__(self, p: JetPoint):
        out = self.batch(p.truncated(self.order))[0]
        if np.any(np.isnan(out)):
            raise IncompletePoint("a coordinate read by the density")
        return out if self.outputs else float(out)

    @classmethod
    def from_expr(cls, e, spec: JetSpec, order: Optional[int] = None, params=None):
        """Compile one Expr (scalar density) or a sequence of them (source form)."""
        if isinstance(e, (list, tuple)):
            exprs = [as_expr(x) for x in e]
            outputs = len(exprs)
        else:
            exprs = [as_expr(e)]
            outputs = None
        if order is None:
            order = max((jet_order(x) for x in exprs), default=0)
        lay = layout(spec, order)
        compiled = [_compile(x, lay, params or {}) for x in exprs]

        def fn(X):
            cols = [c(X) for c in compiled]
            return cols[0] if outputs is None else np.stack(cols, axis=-1)

        return cls(fn, spec, order, outputs)


def _atom_columns(atom: AtomDecl, lay: JetLayout):
    idx = []
    for a in atom.args:
        if a not in lay.index:
            raise IncompletePoint(a)
        idx.append(lay.index[a])
    return idx


def _compile(e: Expr, lay: JetLayout, params: Mapping):
    terms = []
    for mono, c in e.terms:
        coef = float(c)
        cols, atoms = [], []
        for f, k in mono:
            if isinstance(f, Param):
                if f not in params:
                    raise IncompletePoint(f)
                coef *= float(params[f]) ** k
            elif isinstance(f, AtomDecl):
                if f.evaluator is None:
                    raise AtomEvalFailure(f"atom {f.name} has no numeric evaluator")
                atoms.append((f, _atom_columns(f, lay), k))
            else:
                if f not in lay.index:
                    raise IncompletePoint(f)
                cols.append((lay.index[f], k))
        terms.append((coef, cols, atoms))

    def run(X):
        out = np.zeros(X.shape[0])
        for coef, cols, atoms in terms:
            t = np.full(X.shape[0], coef)
            for j, k in cols:
                t = t * X[:, j] ** k
            for atom, idx, k in atoms:
                try:
                    val = np.asarray(atom.evaluator(*(X[:, j] for j in idx)), dtype=float)
                except Exception as exc:  # evaluator is user code
                    raise AtomEvalFailure(f"atom {atom.name}: {exc}") from exc
                t = t * val ** k
            out = out + t
        return out

    return run


def eval_expr(e, p: JetPoint) -> float:
    """Evaluate an expression at a jet point."""
    e = as_expr(e)
    lay = p.layout
    val = _compile(e, lay, p.params)(p.values[None, :])[0]
    if np.isnan(val):
        for v in sorted((f for f in e.factors() if isinstance(f, (Base, Field))), key=lambda f: f.key):
            p[v]  # raises IncompletePoint on the first missing coordinate
        for f in e.factors():
            if isinstance(f, AtomDecl):
                for a in f.args:
                    p[a]
        raise AtomEvalFailure("evaluation produced NaN")
    return float(val)


# ---------------------------------------------------------- differentiation

def _step(x, rel_step):
    # fmax: coordinates left unknown (NaN) still get a finite step
    return rel_step * np.fmax(1.0, np.abs(x))


def numeric_partial(f: DensityFn, p: JetPoint, v, rel_step: float = 1e-6,
                    richardson: bool = False):
    """Central difference ``(f(p + h e_v) - f(p - h e_v)) / 2h``.

    ``h = rel_step * max(1, |p[v]|)``.  With ``richardson`` the estimates at
    h and h/2 are combined to cancel the O(h^2) error term.
    """
    lay = layout(f.spec, f.order)
    if v not in lay.index:
        if not isinstance(v, (Base, Field)):
            raise VarcompError(f"{v!r} is not a jet coordinate")
        return 0.0 if f.outputs is None else np.zeros(f.outputs)
    j = lay.index[v]
    X0 = p.truncated(f.order).copy()
    if np.isnan(X0[j]):
        raise IncompletePoint(v)
    h = float(_step(X0[j], rel_step))

    def central(h):
        X = np.stack([X0, X0])
        X[0, j] += h
        X[1, j] -= h
        y = f.batch(X)
        return (y[0] - y[1]) / (2 * h)

    d = central(h)
    if richardson:
        d = (4 * central(h / 2) - d) / 3
    if np.any(np.isnan(d)):
        raise IncompletePoint("a coordinate read by the density")
    return d if f.outputs else float(d)


def numeric_gradient(f: DensityFn, X: np.ndarray, rel_step: float = 1e-6,
                     columns: Optional[Sequence[int]] = None, wide: bool = False) -> np.ndarray:
    """Central-difference gradient for a batch of points.

    Returns ``G[B, C]`` (scalar f) or ``G[B, outputs, C]`` where C runs
    over ``columns`` (default: all columns of f's layout).  ``wide`` uses
    the five-point stencil, whose O(h^4) truncation error stays negligible
    at the large steps that nested differences need.
    """
    X = np.asarray(X, dtype=float)[:, : f.size]
    B = X.shape[0]
    cols = list(range(f.size)) if columns is None else list(columns)
    C = len(cols)
    h = _step(X[:, cols], rel_step)                  # [B, C]
    offsets, weights = ((2, 1, -1, -2), (-1, 8, -8, 1)) if wide else ((1, -1), (1, -1))
    S = len(offsets)
    P = np.repeat(X[:, None, :], S * C, axis=1)      # [B, S C, N]
    ar = np.arange(C)
    for k, o in enumerate(offsets):
        P[:, S * ar + k, cols] += o * h
    Y = f.batch(P.reshape(B * S * C, -1))
    denom = 12 * h if wide else 2 * h
    w = np.array(weights, dtype=float)
    if f.outputs is None:
        return Y.reshape(B, C, S) @ w / denom
    Y = Y.reshape(B, C, S, f.outputs)
    G = np.einsum("bcso,s->bco", Y, w) / denom[..., None]
    return np.transpose(G, (0, 2, 1))


def numeric_total_derivative(f: DensityFn, p: JetPoint, i: int, rel_step: float = 1e-6):
    """``d_i f = df/dx^i + sum_{sigma, |J| <= s} p[y^sigma_{J+i}] df/dy^sigma_J``,
    each partial by central differences."""
    s = f.order
    if p.order < s + 1:
        raise IncompletePoint(f"coordinates of order {s + 1}")
    lay = layout(f.spec, s)
    big = p.layout
    G = numeric_gradient(f, p.values[None, :], rel_step)[0]
    out = G[..., i - 1]
    for k, c in enumerate(lay.coords):
        if isinstance(c, Field):
            w = p.values[big.index[c.raised(i)]]
            if np.isnan(w):
                raise IncompletePoint(c.raised(i))
            out = out + w * G[..., k]
    if np.any(np.isnan(out)):
        raise IncompletePoint("a coordinate read by the density")
    return out if f.outputs else float(out)


# ---------------------------------------------------------- Taylor section

@lru_cache(maxsize=None)
def _prolongation_plan(spec: JetSpec, src_order: int, dst_order: int):
    """For each destination coordinate, the source coordinates feeding it and
    the exponent vectors of the displacement monomials."""
    src = layout(spec, src_order)
    dst = layout(spec, dst_order)
    rows, cols, expos, coefs = [], [], [], []
    n = spec.n
    for a, c in enumerate(dst.coords):
        if isinstance(c, Base):
            continue
        for k in range(c.order, src_order + 1):
            for Lmi in multi_indices(n, k):
                rest = multiset_difference(Lmi, c.J)
                if rest is None:
                    continue
                beta = [rest.count(i) for i in range(1, n + 1)]
                coef = 1.0
                for b in beta:
                    coef /= factorial(b)
                rows.append(a)
                cols.append(src.index[c.component.var(Lmi)])
                expos.append(beta)
                coefs.append(coef)
    return (np.array(rows, dtype=int), np.array(cols, dtype=int),
            np.array(expos, dtype=float).reshape(-1, n), np.array(coefs))


def prolong(p: JetPoint, deltas: np.ndarray, order: int) -> np.ndarray:
    """Jets of order ``order`` of the Taylor section through ``p`` at the base
    points ``x0 + delta`` (one row per delta)."""
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    spec = p.spec
    if order > p.order:
        raise IncompletePoint(f"coordinates of order {order}")
    rows, cols, expos, coefs = _prolongation_plan(spec, p.order, order)
    dst = layout(spec, order)
    B = deltas.shape[0]
    X = np.zeros((B, dst.size))
    X[:, : spec.n] = p.values[: spec.n] + deltas
    mon = np.prod(deltas[:, None, :] ** expos[None, :, :], axis=2)   # [B, T]
    contrib = mon * (coefs * p.values[cols])[None, :]
    np.add.at(X, (slice(None), rows), contrib)
    return X


@lru_cache(maxsize=None)
def _stencil(M: tuple, n: int):
    """Offsets (in units of h) and weights of the product central difference
    approximating ``d_M``."""
    pts = {(0,) * n: 1.0}
    for i in M:
        nxt = {}
        for off, w in pts.items():
            for s in (1, -1):
                o = list(off)
                o[i - 1] += s
                o = tuple(o)
                nxt[o] = nxt.get(o, 0.0) + s * w / 2.0
        pts = nxt
    return tuple((o, w) for o, w in pts.items() if w != 0.0)


def section_derivative(values_at, p: JetPoint, order: int, Ms: Iterable[tuple], step: float,
                       richardson: bool = False):
    """``d_M g`` at ``p`` for every M in ``Ms``, where ``values_at(X)`` evaluates
    g on a batch of jets of order ``order``.  Returns ``{M: value}``.

    The product stencil has an error expansion in even powers of the step,
    so ``richardson`` combines steps h and h/2 as ``(4 D(h/2) - D(h)) / 3``.
    """
    n = p.spec.n
    Ms = list(Ms)
    steps = [step, step / 2] if richardson else [step]
    offsets = sorted({o for M in Ms for o, _ in _stencil(M, n)})
    pos = {o: k for k, o in enumerate(offsets)}
    deltas = np.concatenate([np.array(offsets, dtype=float) * h for h in steps])
    vals = values_at(prolong(p, deltas, order))
    est = []
    for s_idx, h in enumerate(steps):
        base = s_idx * len(offsets)
        out = {}
        for M in Ms:
            acc = 0.0
            for o, w in _stencil(M, n):
                acc = acc + w * vals[base + pos[o]]
            out[M] = acc / h ** len(M)
        est.append(out)
    if not richardson:
        return est[0]
    return {M: (4 * est[1][M] - est[0][M]) / 3 if M else est[0][M] for M in Ms}


# ------------------------------------------------------------ Euler-Lagrange

def _check_section(p: JetPoint, needed: int):
    if p.order < needed:
        raise IncompletePoint(f"coordinates of order {needed}")


def _check_finite(values):
    # unknown coordinates are NaN and spread to every value that reads them
    if np.any(np.isnan(values)):
        raise IncompletePoint("a coordinate read by the density")


def _outer_default(order: int, richardson: bool) -> float:
    """Outer step: 1e-3 (extrapolated) or 1e-4 for a single total
    derivative, 1e-2 or 1e-3 when total derivatives are nested."""
    if order <= 1:
        return 1e-3 if richardson else 1e-4
    return 1e-2 if richardson else 1e-3


def numeric_euler_lagrange(L: DensityFn, p: JetPoint, rel_step: float = 1e-4,
                           outer_step: Optional[float] = None,
                           richardson: bool = True) -> np.ndarray:
    """``E_sigma(p) = sum_J (-1)^|J| d_J dL/dy^sigma_J`` by finite differences.

    The partials use central differences with relative step ``rel_step``;
    the total derivatives ``d_J`` are central differences of step
    ``outer_step`` along the Taylor section, Richardson-extrapolated by
    default.  Rounding noise of the inner differences is divided by
    ``outer_step**|J|``, so nested total derivatives need a wide step; see
    :func:`_outer_default`.
    """
    spec = L.spec
    s = L.order
    _check_section(p, 2 * s)
    if outer_step is None:
        outer_step = _outer_default(s, richardson)
    lay = layout(spec, s)
    field_cols = list(range(spec.n, lay.size))
    Ms = [()] + [J for k in range(1, s + 1) for J in multi_indices(spec.n, k)]

    def grads(X):
        return numeric_gradient(L, X, rel_step, field_cols)

    D = section_derivative(grads, p, s, Ms, outer_step, richardson)
    E = np.zeros(spec.m)
    for k, c in enumerate(lay.coords[spec.n:]):
        sigma = spec.sigma(c)
        sign = -1.0 if c.order % 2 else 1.0
        E[sigma] += sign * D[c.J][k]
    _check_finite(E)
    err = _fd_error_estimate(D)
    if err > 1e-4:
        log.warning("estimated finite-difference error %.2e exceeds 1e-4", err)
    return E


def _fd_error_estimate(D) -> float:
    vals = np.concatenate([np.ravel(v) for v in D.values()])
    return float(np.finfo(float).eps ** 0.5 * np.max(np.abs(vals), initial=0.0))


# ---------------------------------------------------------------- Helmholtz

@dataclass
class NumericHelmholtz:
    """Values ``H_{sigma nu}^K(p)`` keyed by ``(sigma, nu, K)``."""

    values: dict

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def variational(self, tol: float = 1e-5) -> bool:
        return self.max_abs < tol

    def __getitem__(self, key):
        return self.values.get(key, 0.0)


def numeric_helmholtz(eps: DensityFn, p: JetPoint, rel_step: float = 1e-4,
                      outer_step: Optional[float] = None,
                      richardson: bool = True) -> NumericHelmholtz:
    """All Helmholtz coefficients of a source form at ``p`` by finite
    differences (steps as in :func:`numeric_euler_lagrange`)."""
    spec = eps.spec
    r = eps.order
    _check_section(p, 2 * r)
    if eps.outputs != spec.m:
        raise VarcompError("source form density must have one output per field component")
    if outer_step is None:
        outer_step = _outer_default(r, richardson)
    lay = layout(spec, r)
    coords = lay.coords[spec.n:]
    field_cols = list(range(spec.n, lay.size))
    col_of = {(spec.sigma(c), c.J): k for k, c in enumerate(coords)}
    Ms = [()] + [J for k in range(1, r + 1) for J in multi_indices(spec.n, k)]

    def jac(X):
        return numeric_gradient(eps, X, rel_step, field_cols)      # [B, m, C]

    D = section_derivative(jac, p, r, Ms, outer_step, richardson)
    J0 = D[()]
    values = {}
    for k in range(r + 1):
        for K in multi_indices(spec.n, k):
            nK = multiplicity(K)
            for sigma in range(spec.m):
                for nu in range(spec.m):
                    h = J0[sigma, col_of[(nu, K)]] / nK
                    h -= (-1) ** k * J0[nu, col_of[(sigma, K)]] / nK
                    for l in range(k + 1, r + 1):
                        for M in multi_indices(spec.n, l - k):
                            Lmi = merge_indices(K, M)
                            coef = (-1) ** l * comb(l, k) * multiplicity(M) / multiplicity(Lmi)
                            h -= coef * D[M][nu, col_of[(sigma, Lmi)]]
                    values[(sigma, nu, K)] = float(h)
    _check_finite(list(values.values()))
    return NumericHelmholtz(values)


# ------------------------------------------------------ Vainberg-Tonti

@lru_cache(maxsize=None)
def _gauss_legendre(nodes: int, rule: str = "legendre"):
    """Nodes and weights for ``int_0^1 f(u) du``.

    ``legendre`` is exact for polynomials of degree ``2 nodes - 1``.  ``sqrt``
    substitutes ``u = s^2``: a weight-w integrand ``u^w`` becomes
    ``2 s^(2w+1)``, so half-integer weights (odd dimensional metric densities)
    are integrated exactly too, up to degree ``nodes - 1``.
    """
    if rule not in ("legendre", "sqrt"):
        raise ValueError(f"unknown quadrature rule {rule!r}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = (x + 1) / 2
    if rule == "sqrt":
        return s * s, w * s
    return s, w / 2


def _homotopy_integrand(eps: DensityFn, X: np.ndarray, us: np.ndarray, mask: np.ndarray,
                        contract: np.ndarray) -> np.ndarray:
    """``sum_{sigma scaled} y^sigma eps_sigma(chi_u X)`` for every row of X and
    every u.  Returns ``[B, U]``."""
    B = X.shape[0]
    U = len(us)
    scale = np.where(mask[None, :], us[:, None], 1.0)              # [U, N]
    XU = (X[:, None, :] * scale[None, :, :]).reshape(B * U, -1)
    vals = eps.batch(XU).reshape(B, U, -1)                         # [B, U, m]
    return np.einsum("bum,bm->bu", vals, contract)


def _vt_setup(eps: DensityFn, scaled_fields):
    spec = eps.spec
    names = spec.field_names if scaled_fields is None else frozenset(scaled_fields)
    lay = layout(spec, eps.order)
    mask = lay.field_mask(names)
    y_cols = [lay.index[c.var()] for c in spec.fields]
    scaled_out = np.array([c.name in names for c in spec.fields], dtype=float)
    return mask, np.array(y_cols), scaled_out


def vt_density(eps: DensityFn, scaled_fields=None, nodes: int = 32,
               rule: str = "legendre") -> DensityFn:
    """The Vainberg-Tonti Lagrangian of ``eps`` as a density (quadrature only,
    no divergence check)."""
    mask, y_cols, scaled_out = _vt_setup(eps, scaled_fields)
    us, ws = _gauss_legendre(nodes, rule)

    def fn(X):
        contract = X[:, y_cols] * scaled_out[None, :]
        return _homotopy_integrand(eps, X, us, mask, contract) @ ws

    return DensityFn(fn, eps.spec, eps.order)


def detect_divergence(eps: DensityFn, X: np.ndarray, scaled_fields=None, samples: int = 20):
    """Sample the homotopy integrand at ``u = 2^-k`` and raise
    :class:`NonFiniteIntegrand` when it is non-finite or grows at least like
    ``1/u`` towards 0.  Returns the estimated small-u exponent per row."""
    mask, y_cols, scaled_out = _vt_setup(eps, scaled_fields)
    X = np.atleast_2d(X)
    us = 2.0 ** -np.arange(1, samples + 1)
    vals = _homotopy_integrand(eps, X, us, mask, X[:, y_cols] * scaled_out[None, :])
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrand(None, "homotopy integrand is not finite near u = 0")
    exps = []
    for row in vals:
        a = np.abs(row)
        big = np.max(a, initial=0.0)
        if big == 0.0 or a[-1] <= 1e-300:
            exps.append(np.inf)
            continue
        tail = a[-6:]
        if np.any(tail == 0.0):
            exps.append(np.inf)
            continue
        # |f(2^-k)| ~ 2^(-k w): slope of log2|f| against k is -w
        slope = np.polyfit(np.arange(len(tail)), np.log2(tail), 1)[0]
        w = -slope
        exps.append(w)
        if w <= -1 + 0.05:
            raise NonFiniteIntegrand(round(float(w), 3))
    return np.array(exps)


def numeric_vt_lagrangian(eps: DensityFn, p: JetPoint, scaled_fields=None,
                          nodes: int = 32, check_divergence: bool = True,
                          rule: Optional[str] = None) -> float:
    """``y^sigma int_0^1 eps_sigma(chi_u p) du`` by Gauss-Legendre quadrature.

    With ``rule=None`` the plain rule is used unless the divergence probe
    finds a non-integer small-u exponent, in which case the ``sqrt`` rule is.
    """
    X = p.truncated(eps.order)[None, :]
    # unknown coordinates are NaN: only those the density reads matter
    value = float(vt_density(eps, scaled_fields, nodes, rule or "legendre").batch(X)[0])
    if np.isnan(value):
        raise IncompletePoint("a coordinate read by the density")
    if check_divergence:
        exps = detect_divergence(eps, X, scaled_fields)
        w = exps[np.isfinite(exps)]
        if rule is None and np.any(np.abs(w - np.round(w)) > 0.05):
            value = float(vt_density(eps, scaled_fields, nodes, "sqrt").batch(X)[0])
    return value
