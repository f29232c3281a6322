"""Numeric general-relativity fixtures on the bundle of metrics.

Everything here is pointwise and vectorized: tensors carry an optional
leading batch axis.  Index conventions:

* ``dg[..., j, k, i] = g_{jk,i}`` and ``ddg[..., j, k, i, l] = g_{jk,il}``
* ``gamma[..., i, j, k] = Gamma^i_{jk}``
* ``riemann[..., i, j, k, l] = R_j^i_{kl} = Gamma^i_{jk,l} - Gamma^i_{jl,k} + ...``
  and ``R_{jk} = R_j^i_{ki}``
* ``dA[..., k, l] = A^k_{,l}``

On the jet space the metric components ``g_{jk}`` with ``j <= k`` are
independent coordinates.  A source form written with a symmetric
contravariant density ``T^{jk}`` (contracted over all ordered pairs) has
the coefficient ``c_jk T^{jk}`` along ``g_{jk}``, where ``c_jk = 1`` on the
diagonal and 2 off it; the density adapters below return those
coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import SingularMetric
from .expr import Field, JetSpec
from .numjet import DensityFn, JetPoint, detect_divergence, layout, numeric_euler_lagrange, vt_density

PI = np.pi


def minkowski(n: int) -> np.ndarray:
    return np.diag([1.0] + [-1.0] * (n - 1))


# ------------------------------------------------------------ jet containers

@dataclass
class MetricJet:
    """Metric and its derivatives at one point (or a batch of points).

    ``point`` optionally carries the full flat jet, including orders 3 and
    up, for the nested Euler-Lagrange and Helmholtz checks.
    """

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    point: Optional[JetPoint] = None

    @property
    def n(self) -> int:
        return self.g.shape[-1]

    def scaled(self, u: float) -> "MetricJet":
        pt = None
        if self.point is not None:
            vals = self.point.values.copy()
            vals[self.point.spec.n:] *= u
            pt = replace(self.point, values=vals)
        return MetricJet(u * self.g, u * self.dg, u * self.ddg, pt)


@dataclass
class EMJet:
    """Metric jet plus the contravariant potential ``A^k`` and its derivatives."""

    metric: MetricJet
    A: np.ndarray
    dA: np.ndarray
    ddA: Optional[np.ndarray] = None
    point: Optional[JetPoint] = None

    @property
    def n(self) -> int:
        return self.metric.n


# ------------------------------------------------------------ jet-space specs

@lru_cache(maxsize=None)
def metric_spec(n: int, potential: bool = False) -> JetSpec:
    """Jet chart with fields ``g[j,k]`` (j <= k) and optionally ``A[k]``."""
    fields = []
    if potential:
        fields.append(("A", n))
    fields.append(("g", [(j, k) for j in range(1, n + 1) for k in range(j, n + 1)]))
    return JetSpec.build(tuple(f"x{i}" for i in range(n)), fields, 2)


def pair_weights(n: int) -> np.ndarray:
    """``c_jk`` in the order of the independent metric components."""
    return np.array([1.0 if j == k else 2.0 for j in range(n) for k in range(j, n)])


def _sym_pairs(n):
    return [(j, k) for j in range(n) for k in range(j, n)]


@lru_cache(maxsize=None)
def _gather_plan(n: int, potential: bool, order: int):
    spec = metric_spec(n, potential)
    idx = layout(spec, order).index

    def col(name, index, J):
        return idx[Field(name, index, tuple(sorted(J)))]

    r = range(n)
    g = np.array([[col("g", (min(j, k) + 1, max(j, k) + 1), ()) for k in r] for j in r])
    plan = {"g": g}
    if order >= 1:
        plan["dg"] = np.array([[[col("g", (min(j, k) + 1, max(j, k) + 1), (i + 1,)) for i in r]
                                for k in r] for j in r])
    if order >= 2:
        plan["ddg"] = np.array([[[[col("g", (min(j, k) + 1, max(j, k) + 1), (i + 1, l + 1))
                                   for l in r] for i in r] for k in r] for j in r])
    if potential:
        plan["A"] = np.array([col("A", (k + 1,), ()) for k in r])
    if potential and order >= 1:
        plan["dA"] = np.array([[col("A", (k + 1,), (l + 1,)) for l in r] for k in r])
        if order >= 2:
            plan["ddA"] = np.array([[[col("A", (k + 1,), (l + 1, m + 1)) for m in r]
                                     for l in r] for k in r])
    return plan


def unpack(X: np.ndarray, n: int, potential: bool = False, order: int = 2) -> dict:
    """Tensors ``g, dg, ddg[, A, dA, ddA]`` from flat jet rows ``X[B, N]``."""
    plan = _gather_plan(n, potential, order)
    return {k: X[:, v] for k, v in plan.items()}


# -------------------------------------------------------------- geometry

def _inverse(g):
    det = np.linalg.det(g)
    n = g.shape[-1]
    # relative to the entry scale, so homotopy-scaled metrics stay regular
    scale = np.max(np.abs(g), axis=(-2, -1)) ** n
    if np.any(np.abs(det) <= 1e-9 * scale):
        raise SingularMetric(f"|det g| = {np.min(np.abs(det)):.3e} is numerically zero")
    return np.linalg.inv(g), det


def _christoffel(ginv, dg):
    S = np.einsum("...hjk->...hjk", dg) + np.swapaxes(dg, -1, -2) \
        - np.moveaxis(dg, -1, -3)
    # S[h, j, k] = g_{hj,k} + g_{hk,j} - g_{jk,h}
    return 0.5 * np.einsum("...ih,...hjk->...ijk", ginv, S)


def _christoffel_and_derivative(ginv, dg, ddg):
    S = dg + np.swapaxes(dg, -1, -2) - np.moveaxis(dg, -1, -3)
    gamma = 0.5 * np.einsum("...ih,...hjk->...ijk", ginv, S)
    # d_l S[h, j, k] = g_{hj,kl} + g_{hk,jl} - g_{jk,hl}
    dS = ddg + np.swapaxes(ddg, -2, -3) - np.moveaxis(ddg, -2, -4)
    dginv = -np.einsum("...ia,...abl,...bh->...ihl", ginv, dg, ginv)
    dgamma = 0.5 * (np.einsum("...ihl,...hjk->...ijkl", dginv, S)
                    + np.einsum("...ih,...hjkl->...ijkl", ginv, dS))
    return gamma, dgamma


def christoffel(mj: MetricJet) -> np.ndarray:
    """``Gamma^i_{jk} = 1/2 g^{ih} (g_{hj,k} + g_{hk,j} - g_{jk,h})``."""
    ginv, _ = _inverse(mj.g)
    return _christoffel(ginv, mj.dg)


def _curvature(g, dg, ddg):
    ginv, det = _inverse(g)
    gamma, dgamma = _christoffel_and_derivative(ginv, dg, ddg)
    riemann = (dgamma - np.swapaxes(dgamma, -1, -2)
               + np.einsum("...hjk,...ihl->...ijkl", gamma, gamma)
               - np.einsum("...hjl,...ihk->...ijkl", gamma, gamma))
    ricci = np.einsum("...ijki->...jk", riemann)
    scalar = np.einsum("...jk,...jk->...", ginv, ricci)
    return ginv, det, riemann, ricci, scalar


def curvature(mj: MetricJet):
    """``(R^i_{jkl}, R_{jk}, R)`` at the jet."""
    _, _, riemann, ricci, scalar = _curvature(mj.g, mj.dg, mj.ddg)
    return riemann, ricci, scalar


def _raise2(ginv, T):
    return np.einsum("...ia,...jb,...ab->...ij", ginv, ginv, T)


def _ricci_source(g, dg, ddg, alpha):
    ginv, det, _, ricci, _ = _curvature(g, dg, ddg)
    return alpha * _raise2(ginv, ricci) * np.sqrt(np.abs(det))[..., None, None]


def _einstein(g, dg, ddg, kappa):
    ginv, det, _, ricci, scalar = _curvature(g, dg, ddg)
    G = _raise2(ginv, ricci) - 0.5 * scalar[..., None, None] * ginv
    return G * (np.sqrt(np.abs(det)) / (16 * PI * kappa))[..., None, None]


def _hilbert(g, dg, ddg, kappa):
    _, det, _, _, scalar = _curvature(g, dg, ddg)
    return -scalar * np.sqrt(np.abs(det)) / (16 * PI * kappa)


def ricci_source_density(mj: MetricJet, alpha: float) -> np.ndarray:
    """``alpha R^{ij} sqrt|g|``."""
    return _ricci_source(mj.g, mj.dg, mj.ddg, alpha)


def einstein_density(mj: MetricJet, kappa: float = 1.0) -> np.ndarray:
    """``(R^{ij} - R g^{ij} / 2) sqrt|g| / (16 pi kappa)``."""
    return _einstein(mj.g, mj.dg, mj.ddg, kappa)


def hilbert_density(mj: MetricJet, kappa: float = 1.0):
    """``-R sqrt|g| / (16 pi kappa)``."""
    return _hilbert(mj.g, mj.dg, mj.ddg, kappa)


def completion_density(mj: MetricJet, kappa: float = 1.0) -> np.ndarray:
    """``(2 R^{ij} - R g^{ij} / 2) sqrt|g| / (16 pi kappa)``."""
    ginv, det, _, ricci, scalar = _curvature(mj.g, mj.dg, mj.ddg)
    T = 2 * _raise2(ginv, ricci) - 0.5 * scalar[..., None, None] * ginv
    return T * (np.sqrt(np.abs(det)) / (16 * PI * kappa))[..., None, None]


# ------------------------------------------------------------ electromagnetism

def _faraday(g, ginv, gamma, A, dA):
    cov = dA + np.einsum("...kih,...h->...ki", gamma, A)       # A^k_{;i}
    F = np.einsum("...jk,...ki->...ij", g, cov) - np.einsum("...ik,...kj->...ij", g, cov)
    return cov, F


def _noether(g, dg, A, dA):
    ginv, det = _inverse(g)
    gamma = _christoffel(ginv, dg)
    cov, F = _faraday(g, ginv, gamma, A, dA)
    Fup = _raise2(ginv, F)
    Fmix = np.einsum("...jk,...kl->...jl", ginv, F)             # F^j_l
    FF = np.einsum("...kl,...kl->...", F, Fup)
    T = (-np.einsum("...ih,...lh,...jl->...ij", ginv, cov, Fmix) / (4 * PI)
         + ginv * FF[..., None, None] / (16 * PI))
    return T * np.sqrt(np.abs(det))[..., None, None]


def _covariant_to_contravariant(g, dg, Acov, dAcov):
    ginv, _ = _inverse(g)
    dginv = -np.einsum("...ka,...abi,...bl->...kli", ginv, dg, ginv)
    A = np.einsum("...kl,...l->...k", ginv, Acov)
    dA = np.einsum("...kli,...l->...ki", dginv, Acov) + np.einsum("...kl,...li->...ki", ginv, dAcov)
    return A, dA


def em_noether_density(ej: EMJet) -> np.ndarray:
    """Curved-space Noether current density ``T~^{ij}`` of the Maxwell field."""
    return _noether(ej.metric.g, ej.metric.dg, ej.A, ej.dA)


def faraday(ej: EMJet) -> np.ndarray:
    m = ej.metric
    ginv, _ = _inverse(m.g)
    return _faraday(m.g, ginv, _christoffel(ginv, m.dg), ej.A, ej.dA)[1]


def em_flat_noether(ej: EMJet) -> np.ndarray:
    """Special-relativistic Noether current, evaluated with eta."""
    eta = minkowski(ej.n)
    F = np.einsum("jk,...ki->...ij", eta, ej.dA) - np.einsum("ik,...kj->...ij", eta, ej.dA)
    Fmix = np.einsum("jk,...kl->...jl", eta, F)
    Fup = np.einsum("ia,jb,...ab->...ij", eta, eta, F)
    FF = np.einsum("...kl,...kl->...", F, Fup)
    return (-np.einsum("ih,...lh,...jl->...ij", eta, ej.dA, Fmix) / (4 * PI)
            + eta * FF[..., None, None] / (16 * PI))


def em_symmetrization_term(ej: EMJet) -> np.ndarray:
    """``(1/4 pi) A^i_{,l} F^{jl}`` with indices raised by eta."""
    eta = minkowski(ej.n)
    F = np.einsum("jk,...ki->...ij", eta, ej.dA) - np.einsum("ik,...kj->...ij", eta, ej.dA)
    Fup = np.einsum("ia,jb,...ab->...ij", eta, eta, F)
    return np.einsum("...il,...jl->...ij", ej.dA, Fup) / (4 * PI)


def em_symmetrized_tensor(ej: EMJet, alpha: float = -1.0):
    """``(T, tau)`` with ``T = -alpha (T~ + (1/4 pi) A^i_{,l} F^{jl})`` and
    ``tau = T - T~`` in the flat setting."""
    Tt = em_flat_noether(ej)
    T = -alpha * (Tt + em_symmetrization_term(ej))
    return T, T - Tt


def em_hilbert_closed_form(ej: EMJet, alpha: float = -1.0) -> np.ndarray:
    """``-alpha (-(1/4 pi) F^{il} F^j_l + (1/16 pi) g^{ij} F_{kl} F^{kl})``."""
    m = ej.metric
    ginv, _ = _inverse(m.g)
    F = faraday(ej)
    Fup = _raise2(ginv, F)
    Fmix = np.einsum("...jk,...kl->...jl", ginv, F)
    FF = np.einsum("...kl,...kl->...", F, Fup)
    return -alpha * (-np.einsum("...il,...jl->...ij", Fup, Fmix) / (4 * PI)
                     + ginv * FF[..., None, None] / (16 * PI))


def em_vt_closed_form(ej: EMJet, alpha: float = -1.0):
    """``(alpha / 16 pi) F^{kl} F_{kl} sqrt|g|``."""
    m = ej.metric
    ginv, det = _inverse(m.g)
    F = faraday(ej)
    FF = np.einsum("...kl,...kl->...", F, _raise2(ginv, F))
    return alpha * FF * np.sqrt(np.abs(det)) / (16 * PI)


# ------------------------------------------------------- densities on J^r

def _pack_sym(T, n):
    """Components along the independent ``g_jk``: ``T^jj`` on the diagonal and
    ``T^jk + T^kj`` off it (the contraction with a symmetric metric)."""
    rows, cols = map(list, zip(*_sym_pairs(n)))
    return np.where(np.array(rows) == np.array(cols), 0.5, 1.0) \
        * (T[..., rows, cols] + T[..., cols, rows])


def hilbert_density_fn(n: int = 4, kappa: float = 1.0, alpha: Optional[float] = None) -> DensityFn:
    """Scalar density ``alpha R sqrt|g|`` (default alpha = -1/(16 pi kappa))."""
    spec = metric_spec(n)
    scale = 1.0 if alpha is None else -alpha * 16 * PI * kappa

    def fn(X):
        t = unpack(X, n)
        return scale * _hilbert(t["g"], t["dg"], t["ddg"], kappa)

    return DensityFn(fn, spec, 2)


def ricci_source_fn(n: int = 4, alpha: float = 1.0) -> DensityFn:
    spec = metric_spec(n)

    def fn(X):
        t = unpack(X, n)
        return _pack_sym(_ricci_source(t["g"], t["dg"], t["ddg"], alpha), n)

    return DensityFn(fn, spec, 2, outputs=spec.m)


def einstein_density_fn(n: int = 4, kappa: float = 1.0) -> DensityFn:
    spec = metric_spec(n)

    def fn(X):
        t = unpack(X, n)
        return _pack_sym(_einstein(t["g"], t["dg"], t["ddg"], kappa), n)

    return DensityFn(fn, spec, 2, outputs=spec.m)


def em_source_fn(n: int = 4, alpha: float = -1.0, covariant: bool = False) -> DensityFn:
    """Source form ``alpha T~^{ij}`` along the metric; zero along the potential.

    With ``covariant`` the potential coordinates are read as ``A_i`` and
    raised with the metric before building the current.
    """
    spec = metric_spec(n, potential=True)

    def fn(X):
        t = unpack(X, n, potential=True, order=1)
        A, dA = t["A"], t["dA"]
        if covariant:
            A, dA = _covariant_to_contravariant(t["g"], t["dg"], A, dA)
        T = alpha * _noether(t["g"], t["dg"], A, dA)
        return np.concatenate([np.zeros(T.shape[:-2] + (n,)), _pack_sym(T, n)], axis=-1)

    return DensityFn(fn, spec, 1, outputs=spec.m)


def em_field_lagrangian_fn(n: int = 4) -> DensityFn:
    """``-(1/16 pi) F_{ij} F^{ij} sqrt|g|`` with contravariant potential."""
    spec = metric_spec(n, potential=True)

    def fn(X):
        t = unpack(X, n, potential=True, order=1)
        g = t["g"]
        ginv, det = _inverse(g)
        _, F = _faraday(g, ginv, _christoffel(ginv, t["dg"]), t["A"], t["dA"])
        FF = np.einsum("...kl,...kl->...", F, _raise2(ginv, F))
        return -FF * np.sqrt(np.abs(det)) / (16 * PI)

    return DensityFn(fn, spec, 1)


# ------------------------------------------------------------- pipelines

def em_hilbert_tensor_fd(ej: EMJet, alpha: float = -1.0, nodes: int = 32,
                         **fd) -> np.ndarray:
    """Hilbert tensor ``-2/sqrt|g| dL/dg_{ij}`` of the metric Vainberg-Tonti
    Lagrangian of ``alpha T~``, by quadrature and nested finite differences."""
    n = ej.n
    eps = em_source_fn(n, alpha)
    L = vt_density(eps, {"g"}, nodes)
    E = numeric_euler_lagrange(L, ej.point, **fd)
    Eg = E[n:] / pair_weights(n)
    det = np.linalg.det(ej.metric.g)
    T = np.zeros((n, n))
    for (j, k), v in zip(_sym_pairs(n), Eg):
        T[j, k] = T[k, j] = -2 * v / np.sqrt(abs(det))
    return T


def covariant_potential_divergence_demo(ej: EMJet, nodes: int = 32) -> float:
    """Metric Vainberg-Tonti Lagrangian with the covariant potential ``A_i``
    as field variable.

    The current scales as ``u^-1`` under ``g -> u g``, so for any nonzero
    field this raises :class:`~varcomp.errors.NonFiniteIntegrand`.  A zero
    field gives an identically zero integrand and the value 0.
    """
    n = ej.n
    eps = em_source_fn(n, -1.0, covariant=True)
    X = ej.point.truncated(1)[None, :]
    detect_divergence(eps, X, {"g"})
    return float(vt_density(eps, {"g"}, nodes).batch(X)[0])


# -------------------------------------------------------------- sampling

def _pack_point(spec, order, values_by_var, x0):
    lay = layout(spec, order)
    vals = np.empty(lay.size)
    for k, c in enumerate(lay.coords):
        vals[k] = x0[c.i - 1] if not isinstance(c, Field) else values_by_var[c]
    return JetPoint(spec, order, vals)


def _metric_jet_from_point(pt: JetPoint, n: int, potential: bool) -> dict:
    order = min(pt.order, 2)
    t = unpack(pt.values[None, : layout(pt.spec, order).size], n, potential, order)
    return {k: v[0] for k, v in t.items()}


def sample_metric_jet(seed: int, n: int = 4, order: int = 2, delta_scale: float = 0.2,
                      deriv_scale: float = 0.5, max_tries: int = 100) -> MetricJet:
    """Random metric jet ``g = eta + delta`` with derivatives of every order up
    to ``order``; deterministic per seed, ``|det g| > 1e-6`` guaranteed."""
    if n < 2:
        raise ValueError("metric jets need n >= 2")
    rng = np.random.default_rng(seed)
    spec = metric_spec(n)
    lay = layout(spec, order)
    eta = minkowski(n)
    for _ in range(max_tries):
        vals = np.empty(lay.size)
        vals[:n] = rng.uniform(-1, 1, n)
        for k, c in enumerate(lay.coords[n:], start=n):
            j, l = c.index
            if c.order == 0:
                vals[k] = eta[j - 1, l - 1] + rng.uniform(-delta_scale, delta_scale)
            else:
                vals[k] = rng.uniform(-deriv_scale, deriv_scale)
        pt = JetPoint(spec, order, vals)
        t = _metric_jet_from_point(pt, n, False)
        if abs(np.linalg.det(t["g"])) > 1e-6:
            return MetricJet(t["g"], t["dg"], t.get("ddg", np.zeros((n,) * 4)), pt)
    raise SingularMetric("could not sample a nondegenerate metric")


def _flat_maxwell_residual(n, ddA):
    """``d_i F^{ij}`` with eta: ``box A^j - d^j (d_i A^i)``."""
    eta = minkowski(n)
    box = np.einsum("ia,jai->j", eta, ddA)
    div = np.einsum("jb,iib->j", eta, ddA)
    return box - div


def _impose_flat_maxwell(spec, lay, vals, n):
    """Shift the second derivatives of A by the least-norm correction that
    makes the source-free flat Maxwell equations hold at the point."""
    cols = [k for k, c in enumerate(lay.coords) if isinstance(c, Field)
            and c.name == "A" and c.order == 2]

    def residual(v):
        ddA = np.zeros((n, n, n))
        for k, x in zip(cols, v):
            c = lay.coords[k]
            a, b = c.J[0] - 1, c.J[1] - 1
            ddA[c.index[0] - 1, a, b] = ddA[c.index[0] - 1, b, a] = x
        return _flat_maxwell_residual(n, ddA)

    C = np.stack([residual(e) for e in np.eye(len(cols))], axis=1)
    v = vals[cols]
    vals[cols] = v - np.linalg.lstsq(C, C @ v, rcond=None)[0]


def sample_em_jet(seed: int, n: int = 4, order: int = 2, flat: bool = False,
                  delta_scale: float = 0.2, deriv_scale: float = 0.5,
                  potential_scale: float = 1.0, on_shell: bool = False) -> EMJet:
    """Random EM jet; ``flat`` fixes the metric to eta with zero derivatives.

    ``on_shell`` (flat jets of order >= 2 only) makes the second derivatives
    of the potential satisfy the source-free Maxwell equations at the point.
    Hilbert tensors computed with ``A^k`` held fixed agree with the textbook
    ones (``A_k`` held fixed) only there.
    """
    if on_shell and not (flat and order >= 2):
        raise ValueError("on_shell requires a flat jet of order >= 2")
    rng = np.random.default_rng(seed)
    spec = metric_spec(n, potential=True)
    lay = layout(spec, order)
    eta = minkowski(n)
    for _ in range(100):
        vals = np.empty(lay.size)
        vals[:n] = rng.uniform(-1, 1, n)
        for k, c in enumerate(lay.coords[n:], start=n):
            if c.name == "A":
                vals[k] = rng.uniform(-potential_scale, potential_scale) if c.order == 0 \
                    else rng.uniform(-deriv_scale, deriv_scale)
            else:
                j, l = c.index
                if c.order == 0:
                    vals[k] = eta[j - 1, l - 1] + (0.0 if flat else rng.uniform(-delta_scale, delta_scale))
                else:
                    vals[k] = 0.0 if flat else rng.uniform(-deriv_scale, deriv_scale)
        if on_shell:
            _impose_flat_maxwell(spec, lay, vals, n)
        pt = JetPoint(spec, order, vals)
        t = _metric_jet_from_point(pt, n, True)
        if abs(np.linalg.det(t["g"])) > 1e-6:
            mj = MetricJet(t["g"], t["dg"], t.get("ddg", np.zeros((n,) * 4)))
            return EMJet(mj, t["A"], t["dA"], t.get("ddA"), pt)
    raise SingularMetric("could not sample a nondegenerate metric")


def sphere_metric_jet(theta: float = 0.7, radius: float = 1.0) -> MetricJet:
    """Round 2-sphere ``r^2 (dtheta^2 + sin^2 theta dphi^2)`` at polar angle theta."""
    r2 = radius ** 2
    g = np.diag([r2, r2 * np.sin(theta) ** 2])
    dg = np.zeros((2, 2, 2))
    ddg = np.zeros((2, 2, 2, 2))
    dg[1, 1, 0] = r2 * np.sin(2 * theta)
    ddg[1, 1, 0, 0] = 2 * r2 * np.cos(2 * theta)
    return MetricJet(g, dg, ddg)


def metric_jet_point(mj: MetricJet) -> JetPoint:
    """Order-2 jet point built from the tensors of ``mj``."""
    if mj.point is not None:
        return mj.point
    n = mj.n
    spec = metric_spec(n)
    vals = {}
    for j, k in _sym_pairs(n):
        vals[Field("g", (j + 1, k + 1), ())] = mj.g[j, k]
        for i in range(n):
            vals[Field("g", (j + 1, k + 1), (i + 1,))] = mj.dg[j, k, i]
            for l in range(i, n):
                vals[Field("g", (j + 1, k + 1), (i + 1, l + 1))] = mj.ddg[j, k, i, l]
    return _pack_point(spec, 2, vals, np.zeros(n))
