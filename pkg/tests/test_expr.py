from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polygen import chart, field, random_poly
from varcomp.dsl import parse, parse_expr
from varcomp.errors import MissingDerivativeRule, OrderOverflow, SpecError, UnknownWeight
from varcomp.expr import (
    ZERO, AtomDecl, Base, Field, JetSpec, Param, ParamDecl, const, homogeneous_decompose,
    jet_order, multi_indices, multiplicity, normalize, partial, total_derivative, var,
)
from varcomp.numjet import DensityFn, layout

MECH = parse("""
base t;
field q[2] order 2;
param m sym2, k sym2, a sym2;
source eps[s] = m[s,v]*D2(q[v]) + k[s,v]*q[v] + a[s,v]*D1(q[v]);
""").spec


def P(text, spec=MECH):
    return parse_expr(text, spec)


def q(i, J=()):
    return Field("q", (i,), J)


seeds = st.integers(0, 2 ** 32 - 1)


# ------------------------------------------------------------------ chart

def test_jetspec_rejects_degenerate_charts():
    with pytest.raises(SpecError):
        JetSpec((), (("y",),), 1)
    with pytest.raises(SpecError):
        JetSpec(("t",), (), 1)
    with pytest.raises(SpecError):
        JetSpec(("t",), (("y",), ("y",)), 1)
    with pytest.raises(SpecError):
        JetSpec(("y",), (("y",),), 1)


def test_multi_indices_are_sorted_and_counted():
    assert list(multi_indices(2, 2)) == [(1, 1), (1, 2), (2, 2)]
    assert multiplicity((1, 1, 2)) == 3
    assert multiplicity(()) == 1
    assert Field("y", (), (2, 1)) == Field("y", (), (1, 2))


def test_symmetric_parameters_are_canonical():
    m = ParamDecl("m", 2, sym=True)
    assert m(2, 1) == m(1, 2)
    assert Param("c", (2, 1, 1), sym=True).indices == (1, 1, 2)
    with pytest.raises(SpecError):
        m(1)


def test_order_bound_is_twice_the_declared_order():
    spec = chart(1, 1, 1)
    e = var(Field("y", (), (1, 1)))
    with pytest.raises(OrderOverflow):
        total_derivative(e, 1, spec)


# ---------------------------------------------------------------- partial

def test_partial_power_rule():
    qd = var(Field("y", (), (1,)))
    assert partial(qd ** 2, Field("y", (), (1,))) == 2 * qd


def test_partial_of_mass_term_uses_symmetry():
    e = P("m[s,v]*D2(q[v])*q[s]")
    for mu in (1, 2):
        got = partial(e, q(mu, (1, 1)))
        assert got == P(f"m[{mu},s]*q[s]")


def test_partial_of_quadratic_potential():
    e = P("k[s,v]*q[s]*q[v]")
    for rho in (1, 2):
        assert partial(e, q(rho)) == P(f"2*k[{rho},v]*q[v]")


def test_partial_without_rule_raises():
    g = Field("g")
    f = AtomDecl("f", [g], weight=1)
    with pytest.raises(MissingDerivativeRule):
        partial(var(f), g)
    assert partial(var(f), Field("h")) == ZERO


def test_atom_rule_may_refer_to_itself():
    g = Field("g")
    ginv = AtomDecl("ginv", [g], weight=-1)
    ginv.set_rule(g, -var(ginv) ** 2)
    assert partial(var(ginv) ** 2, g) == -2 * var(ginv) ** 3


# ------------------------------------------------------- total derivative

def test_total_derivative_of_coordinate():
    assert total_derivative(var(q(1)), 1) == var(q(1, (1,)))


def test_total_derivative_differs_by_velocity_term():
    L = P("(1/2)*m[s,v]*D1(q[v])*q[s]")
    assert total_derivative(L, 1, MECH) == \
        P("(1/2)*m[s,v]*D2(q[v])*q[s] + (1/2)*m[s,v]*D1(q[v])*D1(q[s])")


def test_total_derivative_leibniz_two_dimensions():
    y = Field("y")
    e = var(y) * var(Field("y", (), (1,)))
    assert total_derivative(e, 1) == var(Field("y", (), (1,))) ** 2 + var(y) * var(Field("y", (), (1, 1)))


def test_total_derivative_of_base_and_params():
    spec = chart(2, 1, 1)
    e = var(Base(1)) * var(Param("c"))
    assert total_derivative(e, 1, spec) == var(Param("c"))
    assert total_derivative(e, 2, spec) == ZERO


def test_total_derivative_chains_through_atoms():
    g = Field("g")
    ginv = AtomDecl("ginv", [g], weight=-1)
    ginv.set_rule(g, -var(ginv) ** 2)
    assert total_derivative(var(ginv), 1) == -var(ginv) ** 2 * var(Field("g", (), (1,)))


# ------------------------------------------------------------ weights

def test_linear_source_has_single_weight_one():
    e = P("m[1,v]*D2(q[v]) + k[1,v]*q[v] + a[1,v]*D1(q[v])")
    parts = homogeneous_decompose(e, {"q"})
    assert [w for w, _ in parts] == [1]
    assert parts[0][1] == e


def _metric_atoms(n=2):
    gs = {(i, j): Field("g", (i, j)) for i in range(1, n + 1) for j in range(i, n + 1)}
    args = list(gs.values())
    ginv = {ij: AtomDecl(f"ginv{ij[0]}{ij[1]}", args, weight=-1) for ij in gs}
    sqrtg = AtomDecl("sqrtg", args, weight=2)
    ric = {ij: AtomDecl(f"ric{ij[0]}{ij[1]}", args, weight=0) for ij in gs}

    def sym(d, i, j):
        return var(d[(min(i, j), max(i, j))])
    return gs, ginv, sqrtg, ric, sym


def test_ricci_source_density_is_weight_zero():
    n = 2
    _, ginv, sqrtg, ric, sym = _metric_atoms(n)
    i = j = 1
    e = ZERO
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            e = e + sym(ginv, i, a) * sym(ginv, j, b) * sym(ric, a, b) * var(sqrtg)
    e = Fraction(-3, 7) * e
    assert [w for w, _ in homogeneous_decompose(e, {"g"})] == [0]


def test_em_current_density_is_weight_one():
    n = 2
    gs, ginv, sqrtg, _, sym = _metric_atoms(n)
    A = {(a, l): var(Field("A", (a,), (l,))) for a in range(1, n + 1) for l in range(1, n + 1)}

    def g(i, j):
        return var(gs[(min(i, j), max(i, j))])

    def F_low(k, l):
        return sum((g(k, a) * A[(a, l)] - g(l, a) * A[(a, k)] for a in range(1, n + 1)), ZERO)

    def F_up(j, l):
        return sum((sym(ginv, j, a) * sym(ginv, l, b) * F_low(a, b)
                    for a in range(1, n + 1) for b in range(1, n + 1)), ZERO)

    i, j = 1, 2
    FF = sum((F_low(k, l) * F_up(k, l) for k in range(1, n + 1) for l in range(1, n + 1)), ZERO)
    T = sum((A[(i, l)] * F_up(j, l) for l in range(1, n + 1)), ZERO) \
        - Fraction(1, 4) * sym(ginv, i, j) * FF
    T = T * var(sqrtg)
    assert [w for w, _ in homogeneous_decompose(T, {"g"})] == [1]


def test_unknown_weight_raises():
    g = Field("g")
    f = AtomDecl("f", [g])
    with pytest.raises(UnknownWeight):
        homogeneous_decompose(var(f), {"g"})
    assert homogeneous_decompose(var(f), {"h"}) == [(0, var(f))]


# ---------------------------------------------------------- properties

def _rand(seed, n=2, m=2, order=2):
    rng = np.random.default_rng(seed)
    spec = chart(n, m, order + 1)
    return spec, random_poly(rng, spec, order, terms=5), random_poly(rng, spec, order, terms=3), rng


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_normalize_is_idempotent(seed):
    _, e, _, _ = _rand(seed)
    assert normalize(normalize(e)) == normalize(e)
    assert normalize(e) == e


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_total_derivatives_commute(seed):
    spec, e, _, _ = _rand(seed, order=1)
    for i in range(1, spec.n + 1):
        for j in range(1, spec.n + 1):
            a = total_derivative(total_derivative(e, i, spec), j, spec)
            b = total_derivative(total_derivative(e, j, spec), i, spec)
            assert a == b


@settings(max_examples=60, deadline=None)
@given(seeds, st.fractions(min_value=-5, max_value=5, max_denominator=7),
       st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_derivatives_are_linear(seed, a, b):
    spec, e, f, rng = _rand(seed)
    v = spec.coordinates(2)[int(rng.integers(len(spec.coordinates(2))))]
    assert partial(a * e + b * f, v) == a * partial(e, v) + b * partial(f, v)
    assert total_derivative(a * e + b * f, 1, spec) == \
        a * total_derivative(e, 1, spec) + b * total_derivative(f, 1, spec)


@settings(max_examples=40, deadline=None)
@given(seeds, st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=9))
def test_homogeneous_components_scale_and_reconstruct(seed, u0):
    spec, e, _, rng = _rand(seed)
    scaled = {"y"}
    parts = homogeneous_decompose(e, scaled)
    assert sum((c for _, c in parts), ZERO) == e
    lay = layout(spec, 2)
    X = rng.uniform(-1, 1, size=(50, lay.size))
    Xu = X.copy()
    Xu[:, lay.field_mask(scaled)] *= float(u0)
    lhs = DensityFn.from_expr(e, spec, order=2).batch(Xu)
    rhs = sum(float(u0) ** float(w) * DensityFn.from_expr(c, spec, order=2).batch(X)
              for w, c in parts)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_jet_order_and_constants():
    assert jet_order(const(3)) == 0
    assert jet_order(field(J=(1, 1)) * field()) == 2
    assert const(0) == ZERO
    assert (field() - field()).is_zero()
