"""Plain-text and LaTeX rendering of expressions.

The plain format is the DSL's own expression syntax, so for polynomial
expressions ``parse_expr(render(e), spec) == e``.
"""
from __future__ import annotations

from fractions import Fraction

from .expr import AtomDecl, Base, Expr, Param, as_expr


def _base_name(i, spec):
    if spec is not None:
        return spec.base[i - 1]
    return "t" if i == 1 else f"x{i}"


def _n(spec):
    return spec.n if spec is not None else None


# -------------------------------------------------------------------- plain

def _plain_factor(f, spec):
    if isinstance(f, Base):
        return _base_name(f.i, spec)
    if isinstance(f, Param):
        if not f.indices:
            return f.name
        return f"{f.name}[{','.join(map(str, f.indices))}]"
    if isinstance(f, AtomDecl):
        return f.name
    head = f.name
    if f.index:
        head += "[" + ",".join(map(str, f.index)) + "]"
    if not f.J:
        return head
    if _n(spec) == 1 or (spec is None and set(f.J) == {1}):
        return f"D{len(f.J)}({head})"
    return f"D({head}; {', '.join(map(str, f.J))})"


def _plain_coef(c: Fraction):
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _plain_term(mono, c, spec):
    parts = []
    for f, k in mono:
        s = _plain_factor(f, spec)
        if k == 1:
            parts.append(s)
        elif k > 0:
            parts.append(f"{s}^{k}")
        else:
            parts.append(f"{s}^({k})")
    a = abs(c)
    if not parts:
        return _plain_coef(a)
    if a != 1:
        parts.insert(0, _plain_coef(a))
    return "*".join(parts)


def _plain(e: Expr, spec=None) -> str:
    if e.is_zero():
        return "0"
    out = []
    for mono, c in e.terms:
        body = _plain_term(mono, c, spec)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


# -------------------------------------------------------------------- latex

_DOTS = {1: r"\dot", 2: r"\ddot", 3: r"\dddot"}


def _latex_indices(ix):
    if all(0 <= i < 10 for i in ix):
        return "".join(map(str, ix))
    return ",".join(map(str, ix))


def _latex_name(name):
    if len(name) == 1:
        return name
    greek = {"alpha", "beta", "gamma", "delta", "kappa", "lambda", "mu", "nu",
             "rho", "sigma", "tau", "omega", "eta", "theta", "phi", "psi", "chi"}
    if name in greek:
        return "\\" + name
    return r"\mathrm{" + name + "}"


def _latex_factor(f, spec):
    """Return (text, needs_parens_for_power)."""
    if isinstance(f, Base):
        return _latex_name(_base_name(f.i, spec)), False
    if isinstance(f, Param):
        s = _latex_name(f.name)
        if f.indices:
            s += "_{" + _latex_indices(f.indices) + "}"
        return s, bool(f.indices)
    if isinstance(f, AtomDecl):
        return _latex_name(f.name), False
    name = _latex_name(f.name)
    sup = "^{" + _latex_indices(f.index) + "}" if f.index else ""
    k = len(f.J)
    one_dim = _n(spec) == 1 or (spec is None and set(f.J) <= {1})
    if k == 0:
        return name + sup, bool(sup)
    if one_dim:
        if k in _DOTS:
            return f"{_DOTS[k]}{{{name}}}" + sup, bool(sup)
        return f"{name}{sup}^{{({k})}}", True
    return f"{name}{sup}_{{," + _latex_indices(f.J) + "}", True


def _latex_coef(c: Fraction):
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def _latex_term(mono, c, spec):
    parts = []
    for f, k in mono:
        s, wrap = _latex_factor(f, spec)
        if k == 1:
            parts.append(s)
        else:
            if wrap:
                s = r"\left(" + s + r"\right)"
            parts.append(f"{s}^{{{k}}}")
    a = abs(c)
    if not parts:
        return _latex_coef(a)
    if a != 1:
        parts.insert(0, _latex_coef(a))
    return " ".join(parts)


def _latex(e: Expr, spec=None) -> str:
    if e.is_zero():
        return "0"
    out = []
    for mono, c in e.terms:
        body = _latex_term(mono, c, spec)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def render(e, fmt: str = "plain", spec=None) -> str:
    """Render an expression deterministically as ``plain`` or ``latex`` text."""
    e = as_expr(e)
    if fmt == "plain":
        return _plain(e, spec)
    if fmt == "latex":
        return _latex(e, spec)
    raise ValueError(f"unknown format {fmt!r}")
