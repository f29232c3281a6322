import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polygen import chart, random_poly
from varcomp.calculus import canonical_completion
from varcomp.dsl import parse, parse_expr, parse_file, parse_point
from varcomp.errors import DSLSyntaxError, SemanticError
from varcomp.expr import ZERO, Field, Param, const, var
from varcomp.numjet import JetPoint, eval_expr
from varcomp.render import render

DAMPED = """
base t;
field q[2] order 2;
param m sym2, k sym2, a sym2;
source eps[s] = m[s,v]*D2(q[v]) + k[s,v]*q[v] + a[s,v]*D1(q[v]);
"""


def test_damped_source_declares_chart():
    pf = parse(DAMPED)
    assert (pf.spec.n, pf.spec.m, pf.source.order) == (1, 2, 2)
    assert pf.lagrangian is None
    assert pf.require_one() == "source"
    assert render(pf.source[0], "plain", pf.spec) == \
        "a[1,1]*D1(q[1]) + a[1,2]*D1(q[2]) + k[1,1]*q[1] + k[1,2]*q[2] + m[1,1]*D2(q[1]) + m[1,2]*D2(q[2])"


def test_lagrangian_file():
    pf = parse("base t; field q order 1; lagrangian L = (1/2)*D1(q)^2;")
    assert pf.require_one() == "lagrangian"
    assert pf.lagrangian.density == const("1/2") * var(Field("q", (), (1,))) ** 2


def test_missing_order_is_a_syntax_error_at_the_gap():
    with pytest.raises(DSLSyntaxError) as info:
        parse("field q order;")
    assert (info.value.line, info.value.col) == (1, 14)
    assert "integer" in info.value.expected


@pytest.mark.parametrize("text, fragment", [
    ("", "no base"),
    ("base t;", "no fields"),
    ("base t; field q order 1; source e = D1(p);", "p"),
    ("base t; field q[2] order 1; source e[s] = q[v];", "v"),
    ("base t; field q order 1; source e = D2(q);", "order"),
    ("base t; field q order 1; source e = q; source f = q;", "source"),
    ("base t; field q[2] order 1; source e = [q[1]];", "2"),
    ("base t; field q[2,3] sym order 1;", "sym"),
    ("base t; field q order 1; param m sym2; source e = m[1]*q;", "indices"),
    ("base t; field q order 1; source e = q; lagrangian L = q;", None),
])
def test_semantic_errors(text, fragment):
    with pytest.raises(SemanticError) as info:
        pf = parse(text)
        pf.require_one()
    if fragment:
        assert fragment in str(info.value)


def test_error_positions_are_reported():
    with pytest.raises(DSLSyntaxError) as info:
        parse("base t;\nfield q order 1;\nsource e = q +* q;")
    assert info.value.line == 3
    with pytest.raises(SemanticError) as info:
        parse("base t;\nfield q order 1;\nsource e = w;")
    assert info.value.line == 3


def test_summation_and_symmetric_params():
    pf = parse(DAMPED)
    e = parse_expr("m[s,v]*q[s]*q[v]", pf.spec)
    m12 = var(Param("m", (1, 2), True))
    q1, q2 = var(Field("q", (1,))), var(Field("q", (2,)))
    assert e == var(Param("m", (1, 1), True)) * q1 ** 2 + 2 * m12 * q1 * q2 \
        + var(Param("m", (2, 2), True)) * q2 ** 2


def test_let_and_pdiff():
    pf = parse("""
    base t; field q[2] order 2; param c sym3;
    let F = (1/6)*c[a,b,e]*D1(q[a])*D1(q[b])*D1(q[e]);
    source eps[s] = pdiff(F, D1(q[s]));
    """)
    assert pf.source[0] == parse_expr(
        "(1/2)*c[1,1,1]*D1(q[1])^2 + c[1,1,2]*D1(q[1])*D1(q[2]) + (1/2)*c[1,2,2]*D1(q[2])^2", pf.spec)


def test_partial_derivative_operator_with_base_names():
    pf = parse("base x, y; field u order 2; source e = D(u; x, y) - D(u; 2, 1);")
    assert pf.source[0] == ZERO


def test_atoms_scale_and_check_statements():
    pf = parse("""
    base t; field g order 1; field B order 1;
    atom ginv(g) weight -1 over g eval 1/g deriv g = -ginv^2;
    source eps = [ginv*D1(B)^2, 0];
    scale g;
    check points 7, seed 3, tol 1e-8;
    """)
    assert pf.scaling == frozenset({"g"})
    assert (pf.points, pf.seed, pf.tol) == (7, 3, 1e-8)
    ginv = pf.spec.atom("ginv")
    p = JetPoint.from_mapping(pf.spec, {Field("g"): 4.0, Field("B", (), (1,)): 3.0, Field("g", (), (1,)): 1.0,
                                        Field("B"): 0.0})
    assert eval_expr(pf.source[0], p) == pytest.approx(9 / 4)
    assert eval_expr(var(ginv), p) == pytest.approx(0.25)


def test_point_file():
    pf = parse(DAMPED)
    vals = parse_point("q[1] = 1  # position\nD1(q[2]) = -1/2\nm[1,2] = 3\n", pf.spec)
    assert vals == {Field("q", (1,)): 1.0, Field("q", (2,), (1,)): -0.5, Param("m", (1, 2), True): 3.0}
    with pytest.raises(SemanticError):
        parse_point("q[1]*q[2] = 1", pf.spec)
    with pytest.raises(DSLSyntaxError):
        parse_point("q[1] 1", pf.spec)


def test_parse_file(tmp_path):
    path = tmp_path / "p.vc"
    path.write_text(DAMPED)
    assert parse_file(path).spec.m == 2


# ------------------------------------------------------------- rendering

def test_render_latex_dot():
    spec = parse("base t; field q order 1; source e = q;").spec
    assert render(2 * var(Field("q", (), (1,))), "latex", spec) == r"2 \dot{q}"


def test_render_zero():
    assert render(0, "plain") == "0"
    assert render(ZERO, "latex") == "0"


def test_render_damped_completion():
    pf = parse(DAMPED)
    tau = canonical_completion(pf.source)
    assert render(tau[0], "plain", pf.spec) == "-a[1,1]*D1(q[1]) - a[1,2]*D1(q[2])"
    assert render(tau[0], "latex", pf.spec) == r"-a_{11} \dot{q}^{1} - a_{12} \dot{q}^{2}"


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        render(ZERO, "html")


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]))
def test_plain_render_round_trips(seed, nm):
    rng = np.random.default_rng(seed)
    spec = chart(nm[0], nm[1], 2)
    e = random_poly(rng, spec, int(rng.integers(0, 3)), terms=int(rng.integers(1, 6)))
    text = render(e, "plain", spec)
    assert parse_expr(text, spec) == e
    # canonical expressions render identically
    assert render(e + ZERO, "plain", spec) == text
