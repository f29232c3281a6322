"""Problem-definition language.

A problem file is a sequence of ``;``-terminated statements::

    # damped oscillations with two degrees of freedom
    base t;
    field q[2] order 2;
    param m sym2, k sym2, a sym2;
    source eps[s] = m[s,v]*D2(q[v]) + k[s,v]*q[v] + a[s,v]*D1(q[v]);

Statements
    ``base t;`` or ``base x, y;``
        independent variables.
    ``field NAME [ '[' dims ']' ] [sym] order R;``
        a field with components ``NAME[i, ...]``; ``sym`` keeps only sorted
        index tuples.  The largest declared order is the order of the problem.
    ``param NAME [symK | rank K], ...;``
        constants, optionally indexed (``sym2`` = symmetric rank 2).
    ``atom NAME(coord, ...) weight W [over f, ...] [eval EXPR]
    [deriv coord = EXPR, ...];``
        an opaque function of jet coordinates with homothety weight ``W``
        under scaling of the fields listed after ``over``.  ``eval`` gives a
        numeric formula in the arguments (``sqrt``, ``exp``, ``log``, ``sin``,
        ``cos``, ``tan``, ``abs`` allowed); ``deriv`` gives partials, which may
        refer to the atom itself.
    ``let NAME = EXPR;``
        named subexpression.
    ``source NAME[s] = EXPR;`` / ``source NAME = [EXPR, ...];`` /
    ``source NAME = EXPR;``
        a source form: indexed over the components of the single field, an
        explicit list in declaration order, or a single component.
    ``lagrangian NAME = EXPR;``
    ``scale f, ...;``
        fields scaled by the fiber homotopy (default: all).
    ``check points N, seed S, tol X;``
        numeric-check settings.

Expressions use ``+ - * / ^``, rational literals, ``D1(e)``, ``D2(e)``, ...
(total derivatives in the single base variable), ``D(e; i, j, ...)``
(total derivatives by base index or base name) and ``pdiff(e, coord)``.
Indices repeated inside one term are summed over their range.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from typing import Optional

import numpy as np

from .calculus import Lagrangian, SourceForm
from .errors import DSLSyntaxError, OrderOverflow, SemanticError, SpecError, VarcompError
from .expr import (
    AtomDecl, Base, Expr, Field, FieldComponent, JetSpec, ParamDecl,
    as_expr, jet_order, partial, total_derivatives, var,
)

__all__ = ["ProblemFile", "parse", "parse_expr", "parse_point", "parse_file"]

KEYWORDS = {"base", "field", "param", "atom", "let", "source", "lagrangian", "scale", "check"}
NUMERIC_FUNCS = {
    "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin,
    "cos": np.cos, "tan": np.tan, "abs": np.abs,
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?) |
    (?P<ident>[A-Za-z_][A-Za-z_0-9]*) |
    (?P<op>[;,\[\]()=+\-*/^])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int

    def __repr__(self):
        return self.text if self.kind != "eof" else "end of input"


def tokenize(text: str):
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(line, pos - start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# --------------------------------------------------------------------- AST
# Nodes are tuples whose last element is the token they start at.
#   ("num", Fraction, tok)        ("ref", name, [index items] | None, tok)
#   ("neg", a, tok)               ("bin", op, a, b, tok)
#   ("call", name, [args], [index items] | None, tok)
# index item: ("int", k, tok) or ("sym", name, tok)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def next(self) -> Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def fail(self, expected):
        t = self.tok
        raise DSLSyntaxError(t.line, t.col, expected, None if t.kind == "eof" else t.text)

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.k += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.next()

    def ident(self, what="an identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(what)
        return self.next()

    def integer(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail("an integer")
        self.k += 1
        return int(t.text)

    def number(self) -> Fraction:
        """Signed rational literal: ``-1``, ``1/2``, ``0.25``."""
        sign = -1 if self.accept("-") else 1
        t = self.tok
        if t.kind != "num":
            self.fail("a number")
        self.k += 1
        val = Fraction(t.text)
        if self.accept("/"):
            d = self.tok
            if d.kind != "num":
                self.fail("a number")
            self.k += 1
            val /= Fraction(d.text)
        return sign * val

    # expressions ------------------------------------------------------------
    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.next()
            node = ("bin", op.text, node, self.term(), op)
        return node

    def term(self):
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.next()
            node = ("bin", op.text, node, self.unary(), op)
        return node

    def unary(self):
        if self.at("-"):
            t = self.next()
            return ("neg", self.unary(), t)
        if self.at("+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.at("^"):
            op = self.next()
            node = ("bin", "^", node, self.unary(), op)
        return node

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.k += 1
            return ("num", Fraction(t.text), t)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.k += 1
            if self.accept("("):
                args = [self.expr()]
                items = None
                if self.accept(";"):
                    items = self.index_items(")")
                else:
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return ("call", t.text, args, items, t)
            items = None
            if self.accept("["):
                items = self.index_items("]")
                self.expect("]")
            return ("ref", t.text, items, t)
        self.fail("an expression")

    def index_items(self, closer):
        items = []
        while True:
            t = self.tok
            if t.kind == "num" and t.text.isdigit():
                self.k += 1
                items.append(("int", int(t.text), t))
            elif t.kind == "ident":
                self.k += 1
                items.append(("sym", t.text, t))
            else:
                self.fail("an index")
            if not self.accept(","):
                return items


# ------------------------------------------------------------- problem file

@dataclass
class ProblemFile:
    """A parsed problem: chart, at most one source form and one Lagrangian,
    homotopy scaling set and numeric-check settings."""

    spec: JetSpec
    source: Optional[SourceForm] = None
    lagrangian: Optional[Lagrangian] = None
    source_name: Optional[str] = None
    lagrangian_name: Optional[str] = None
    scaled_fields: Optional[frozenset] = None
    points: int = 20
    seed: int = 0
    tol: float = 1e-9
    lets: dict = dc_field(default_factory=dict)

    @property
    def scaling(self) -> frozenset:
        return self.scaled_fields if self.scaled_fields is not None else self.spec.field_names

    def require_source(self) -> SourceForm:
        if self.source is None:
            raise SemanticError("the file defines no source form")
        return self.source

    def require_one(self) -> str:
        """``"source"`` or ``"lagrangian"``; exactly one must be present."""
        if (self.source is None) == (self.lagrangian is None):
            raise SemanticError("exactly one of 'source' or 'lagrangian' must be defined")
        return "source" if self.source is not None else "lagrangian"


class _Context:
    """Names visible while evaluating expressions."""

    def __init__(self):
        self.base: list = []
        self.fields: dict = {}        # name -> list of index tuples
        self.sym_fields: set = set()
        self.orders: dict = {}
        self.params: dict = {}        # name -> ParamDecl
        self.atoms: dict = {}         # name -> AtomDecl
        self.lets: dict = {}
        self._spec = None

    @classmethod
    def from_spec(cls, spec: JetSpec, lets=None):
        ctx = cls()
        ctx.base = list(spec.base)
        for c in spec.fields:
            ctx.fields.setdefault(c.name, []).append(c.index)
            ctx.orders[c.name] = spec.max_order
        for name, ixs in ctx.fields.items():
            if len(ixs[0]) >= 2 and all(list(ix) == sorted(ix) for ix in ixs):
                ctx.sym_fields.add(name)
        ctx.params = {p.name: p for p in spec.params}
        ctx.atoms = {a.name: a for a in spec.atoms}
        ctx.lets = dict(lets or {})
        ctx._spec = spec
        return ctx

    def names(self):
        return set(self.base) | set(self.fields) | set(self.params) | set(self.atoms) | set(self.lets)

    def spec(self) -> JetSpec:
        if self._spec is None:
            if not self.base:
                raise SemanticError("no base variables declared")
            if not self.fields:
                raise SemanticError("no fields declared")
            comps = [FieldComponent(n, ix) for n, ixs in self.fields.items() for ix in ixs]
            self._spec = JetSpec(tuple(self.base), tuple(comps), max(self.orders.values()),
                                 tuple(self.params.values()), tuple(self.atoms.values()))
        return self._spec

    def invalidate(self):
        self._spec = None


# ----------------------------------------------------------------- evaluation

def _line(node):
    return node[-1].line


def _index_uses(node, out):
    """Collect (name, range-or-None, tok) for every symbolic index in ``node``."""
    kind = node[0]
    if kind == "ref":
        _, name, items, _t = node
        for pos, it in enumerate(items or ()):
            if it[0] == "sym":
                out.append((it[1], ("ref", name, pos), it[2]))
    elif kind == "call":
        _, name, args, items, _t = node
        for a in args:
            _index_uses(a, out)
        for it in items or ():
            if it[0] == "sym":
                out.append((it[1], ("deriv", None, None), it[2]))
    elif kind == "neg":
        _index_uses(node[1], out)
    elif kind == "bin":
        _index_uses(node[2], out)
        _index_uses(node[3], out)
    return out


class _Evaluator:
    def __init__(self, ctx: _Context):
        self.ctx = ctx

    # ranges -----------------------------------------------------------------
    def _range(self, name, uses, tok):
        rng = None
        ctx = self.ctx
        for kind, target, pos in uses:
            if kind == "deriv":
                r = set(range(1, len(ctx.base) + 1))
            elif target in ctx.fields:
                r = {ix[pos] for ix in ctx.fields[target] if pos < len(ix)}
            else:
                continue
            rng = r if rng is None else rng & r
        if rng is None:
            raise SemanticError(f"cannot infer the range of index {name!r}", tok.line)
        return sorted(rng)

    # summation --------------------------------------------------------------
    def summands(self, node):
        if node[0] == "bin" and node[1] in "+-":
            left = self.summands(node[2])
            right = self.summands(node[3])
            if node[1] == "-":
                right = [(-s, n) for s, n in right]
            return left + right
        return [(1, node)]

    def sum(self, node, env) -> Expr:
        total = Expr()
        for sign, term in self.summands(node):
            uses = _index_uses(term, [])
            free = {}
            for name, site, tok in uses:
                if name in env or name in self.ctx.base and site[0] == "deriv":
                    continue
                free.setdefault(name, []).append((site, tok))
            dummies = []
            for name, sites in free.items():
                if len(sites) < 2:
                    raise SemanticError(
                        f"index {name!r} appears once; free indices must appear on the left-hand side",
                        sites[0][1].line)
                dummies.append((name, self._range(name, [s for s, _ in sites], sites[0][1])))
            if not dummies:
                total = total + sign * self.value(term, env)
                continue
            names = [d[0] for d in dummies]
            for values in product(*(d[1] for d in dummies)):
                sub = dict(env)
                sub.update(zip(names, values))
                total = total + sign * self.value(term, sub)
        return total

    # values -----------------------------------------------------------------
    def _index(self, item, env):
        if item[0] == "int":
            return item[1]
        name = item[1]
        if name in env:
            return env[name]
        raise SemanticError(f"unbound index {name!r}", item[2].line)

    def _deriv_index(self, item, env):
        if item[0] == "sym" and item[1] in self.ctx.base and item[1] not in env:
            return self.ctx.base.index(item[1]) + 1
        i = self._index(item, env)
        if not 1 <= i <= len(self.ctx.base):
            raise SemanticError(f"derivative index {i} out of range", item[2].line)
        return i

    def _total(self, e, J, tok):
        try:
            return total_derivatives(e, J, self.ctx.spec())
        except OrderOverflow as exc:
            raise SemanticError(f"order overflow: {exc}", tok.line) from None

    def value(self, node, env) -> Expr:
        kind = node[0]
        if kind == "num":
            return as_expr(node[1])
        if kind == "neg":
            return -self.value(node[1], env)
        if kind == "bin":
            op = node[1]
            if op in "+-":
                return self.sum(node, env)
            a = self.value(node[2], env)
            if op == "^":
                b = self.value(node[3], env)
                if not b.is_constant() or b.constant_value().denominator != 1:
                    raise SemanticError("exponents must be integers", _line(node))
                try:
                    return a ** int(b.constant_value())
                except ValueError as exc:
                    raise SemanticError(str(exc), _line(node)) from None
            b = self.value(node[3], env)
            if op == "*":
                return a * b
            if b.is_zero():
                raise SemanticError("division by zero", _line(node))
            try:
                return a / b
            except ValueError as exc:
                raise SemanticError(str(exc), _line(node)) from None
        if kind == "ref":
            return self.ref(node, env)
        if kind == "call":
            return self.call(node, env)
        raise AssertionError(kind)

    def ref(self, node, env) -> Expr:
        _, name, items, tok = node
        ctx = self.ctx
        idx = None if items is None else tuple(self._index(it, env) for it in items)
        if name in ctx.fields:
            comps = ctx.fields[name]
            ix = idx or ()
            if ix not in comps and name in ctx.sym_fields:
                ix = tuple(sorted(ix))
            if ix not in comps:
                if not ix and comps != [()]:
                    raise SemanticError(f"field {name} needs indices", tok.line)
                raise SemanticError(f"{name}{list(ix)} is not a component of field {name}", tok.line)
            return var(Field(name, ix))
        if name in ctx.params:
            p = ctx.params[name]
            if len(idx or ()) != p.rank:
                raise SemanticError(f"parameter {name} takes {p.rank} indices", tok.line)
            return p(*(idx or ()))
        if idx is not None:
            raise SemanticError(f"{name} takes no indices", tok.line)
        if name in ctx.base:
            return var(Base(ctx.base.index(name) + 1))
        if name in ctx.atoms:
            return var(ctx.atoms[name])
        if name in ctx.lets:
            return ctx.lets[name]
        if name in NUMERIC_FUNCS:
            raise SemanticError(f"{name} is a function", tok.line)
        raise SemanticError(f"unknown name {name!r}", tok.line)

    def call(self, node, env) -> Expr:
        _, name, args, items, tok = node
        m = re.fullmatch(r"D(\d+)", name)
        if m and items is None:
            if len(args) != 1:
                raise SemanticError(f"{name} takes one argument", tok.line)
            if len(self.ctx.base) != 1:
                raise SemanticError(f"{name} needs a single base variable; use D(e; i, ...)", tok.line)
            return self._total(self.sum(args[0], env), (1,) * int(m.group(1)), tok)
        if name == "D":
            if items is None or len(args) != 1:
                raise SemanticError("D takes an expression and derivative indices: D(e; i, ...)", tok.line)
            J = tuple(self._deriv_index(it, env) for it in items)
            return self._total(self.sum(args[0], env), J, tok)
        if items is not None:
            raise SemanticError(f"{name} takes no derivative indices", tok.line)
        if name == "pdiff":
            if len(args) != 2:
                raise SemanticError("pdiff takes two arguments", tok.line)
            v = self.coordinate(args[1], env)
            try:
                return partial(self.sum(args[0], env), v)
            except VarcompError as exc:
                raise SemanticError(str(exc), tok.line) from None
        if name in NUMERIC_FUNCS:
            raise SemanticError(f"{name} is only available in atom eval formulas", tok.line)
        raise SemanticError(f"unknown function {name!r}", tok.line)

    def coordinate(self, node, env):
        e = self.sum(node, env)
        terms = list(e.terms)
        if len(terms) == 1:
            mono, c = terms[0]
            if c == 1 and len(mono) == 1 and mono[0][1] == 1 and isinstance(mono[0][0], (Base, Field)):
                return mono[0][0]
        raise SemanticError("expected a jet coordinate", _line(node))

    # numeric formulas ---------------------------------------------------------
    def numeric(self, node, args):
        """Compile an ``eval`` formula into a function of the atom's argument arrays."""
        pos = {a: k for k, a in enumerate(args)}

        def ev(nd, vals):
            kind = nd[0]
            if kind == "num":
                return float(nd[1])
            if kind == "neg":
                return -ev(nd[1], vals)
            if kind == "bin":
                a, b = ev(nd[2], vals), ev(nd[3], vals)
                return {"+": np.add, "-": np.subtract, "*": np.multiply,
                        "/": np.divide, "^": np.power}[nd[1]](a, b)
            if kind == "call" and nd[1] in NUMERIC_FUNCS:
                if len(nd[2]) != 1 or nd[3] is not None:
                    raise SemanticError(f"{nd[1]} takes one argument", _line(nd))
                return NUMERIC_FUNCS[nd[1]](ev(nd[2][0], vals))
            v = self.coordinate(nd, {})
            if v not in pos:
                raise SemanticError(f"{v!r} is not an argument of the atom", _line(nd))
            return vals[pos[v]]

        ev(node, [np.ones(1)] * len(args))     # resolve names now, not at eval time

        def evaluator(*vals):
            return ev(node, vals)

        return evaluator


# -------------------------------------------------------------------- parse

def _check_order(e: Expr, limit, what, line):
    if jet_order(e) > limit:
        raise SemanticError(f"order overflow: {what} has order {jet_order(e)} > {limit}", line)


def parse(text: str) -> ProblemFile:
    """Parse a problem file.  Raises DSLSyntaxError or SemanticError."""
    p = _Parser(text)
    ctx = _Context()
    ev = _Evaluator(ctx)
    source = lag = None
    source_name = lag_name = None
    scaled = None
    settings = {"points": 20, "seed": 0, "tol": 1e-9}

    def declare(tok):
        if tok.text in ctx.names() or tok.text in KEYWORDS:
            raise SemanticError(f"name {tok.text!r} is already in use", tok.line)

    while p.tok.kind != "eof":
        kw = p.tok
        if kw.kind != "ident" or kw.text not in KEYWORDS:
            p.fail("a statement keyword (" + ", ".join(sorted(KEYWORDS)) + ")")
        p.next()
        stmt = kw.text

        if stmt == "base":
            if ctx.base:
                raise SemanticError("base variables are already declared", kw.line)
            while True:
                t = p.ident("a base variable name")
                declare(t)
                ctx.base.append(t.text)
                if not p.accept(","):
                    break

        elif stmt == "field":
            t = p.ident("a field name")
            declare(t)
            dims = []
            if p.accept("["):
                dims.append(p.integer())
                while p.accept(","):
                    dims.append(p.integer())
                p.expect("]")
            sym = p.accept("sym")
            p.expect("order")
            order = p.integer()
            if any(d < 1 for d in dims):
                raise SemanticError("field dimensions must be positive", t.line)
            if sym and (len(dims) < 2 or len(set(dims)) != 1):
                raise SemanticError("a symmetric field needs two or more equal dimensions", t.line)
            ixs = list(product(*(range(1, d + 1) for d in dims)))
            if sym:
                ixs = [ix for ix in ixs if list(ix) == sorted(ix)]
                ctx.sym_fields.add(t.text)
            ctx.fields[t.text] = ixs
            ctx.orders[t.text] = order
            ctx.invalidate()

        elif stmt == "param":
            while True:
                t = p.ident("a parameter name")
                declare(t)
                rank, sym = 0, False
                if p.tok.kind == "ident" and re.fullmatch(r"sym\d+", p.tok.text):
                    rank, sym = int(p.next().text[3:]), True
                elif p.accept("rank"):
                    rank = p.integer()
                ctx.params[t.text] = ParamDecl(t.text, rank, sym)
                if not p.accept(","):
                    break
            ctx.invalidate()

        elif stmt == "atom":
            t = p.ident("an atom name")
            declare(t)
            p.expect("(")
            arg_nodes = [p.expr()]
            while p.accept(","):
                arg_nodes.append(p.expr())
            p.expect(")")
            args = [ev.coordinate(a, {}) for a in arg_nodes]
            p.expect("weight")
            weight = p.number()
            over = None
            if p.accept("over"):
                over = [p.ident("a field name")]
                while p.accept(","):
                    over.append(p.ident("a field name"))
                for f in over:
                    if f.text not in ctx.fields:
                        raise SemanticError(f"unknown field {f.text!r}", f.line)
                over = [f.text for f in over]
            atom = AtomDecl(t.text, args, weight, over)
            ctx.atoms[t.text] = atom
            ctx.invalidate()
            if p.accept("eval"):
                atom.evaluator = ev.numeric(p.expr(), atom.args)
            if p.accept("deriv"):
                while True:
                    v = ev.coordinate(p.expr(), {})
                    p.expect("=")
                    d = ev.sum(p.expr(), {})
                    try:
                        atom.set_rule(v, d)
                    except SpecError as exc:
                        raise SemanticError(str(exc), t.line) from None
                    if not p.accept(","):
                        break

        elif stmt == "let":
            t = p.ident("a name")
            declare(t)
            p.expect("=")
            ctx.lets[t.text] = ev.sum(p.expr(), {})

        elif stmt == "source":
            if source is not None:
                raise SemanticError("a source form is already defined", kw.line)
            t = p.ident("a source name")
            spec = ctx.spec()
            free = None
            if p.accept("["):
                free = p.ident("an index name")
                p.expect("]")
            p.expect("=")
            if free is not None:
                names = sorted(ctx.fields)
                if len(names) != 1 or any(len(ix) != 1 for ix in ctx.fields[names[0]]):
                    raise SemanticError("an indexed source needs a single vector field; "
                                        "use an explicit list", t.line)
                body = p.expr()
                comps = [ev.sum(body, {free.text: ix[0]}) for ix in ctx.fields[names[0]]]
            elif p.accept("["):
                comps = [ev.sum(p.expr(), {})]
                while p.accept(","):
                    comps.append(ev.sum(p.expr(), {}))
                p.expect("]")
            else:
                comps = [ev.sum(p.expr(), {})]
            if len(comps) != spec.m:
                raise SemanticError(f"source has {len(comps)} components, expected {spec.m}", t.line)
            for c in comps:
                _check_order(c, spec.max_order, "the source form", t.line)
            source = SourceForm(spec, comps)
            source_name = t.text

        elif stmt == "lagrangian":
            if lag is not None:
                raise SemanticError("a Lagrangian is already defined", kw.line)
            t = p.ident("a Lagrangian name")
            p.expect("=")
            spec = ctx.spec()
            L = ev.sum(p.expr(), {})
            _check_order(L, spec.max_order, "the Lagrangian", t.line)
            lag = Lagrangian(spec, L)
            lag_name = t.text

        elif stmt == "scale":
            names = [p.ident("a field name")]
            while p.accept(","):
                names.append(p.ident("a field name"))
            for f in names:
                if f.text not in ctx.fields:
                    raise SemanticError(f"unknown field {f.text!r}", f.line)
            scaled = frozenset(f.text for f in names)

        elif stmt == "check":
            while True:
                key = p.ident("points, seed or tol")
                if key.text == "points":
                    settings["points"] = p.integer()
                    if settings["points"] < 1:
                        raise SemanticError("points must be at least 1", key.line)
                elif key.text == "seed":
                    settings["seed"] = p.integer()
                elif key.text == "tol":
                    settings["tol"] = float(p.number())
                    if settings["tol"] <= 0:
                        raise SemanticError("tol must be positive", key.line)
                else:
                    raise DSLSyntaxError(key.line, key.col, "points, seed or tol", key.text)
                if not p.accept(","):
                    break

        p.expect(";")

    spec = ctx.spec()
    # atoms declared after a definition are not in that definition's spec
    if source is not None and source.spec != spec:
        source = SourceForm(spec, source.components)
    if lag is not None and lag.spec != spec:
        lag = Lagrangian(spec, lag.density)
    return ProblemFile(spec, source, lag, source_name, lag_name, scaled,
                       settings["points"], settings["seed"], settings["tol"], dict(ctx.lets))


def parse_file(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_expr(text: str, spec: JetSpec, lets=None) -> Expr:
    """Parse one expression against an existing chart (inverse of plain rendering)."""
    p = _Parser(text)
    node = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of expression")
    return _Evaluator(_Context.from_spec(spec, lets)).sum(node, {})


def parse_point(text: str, spec: JetSpec) -> dict:
    """Point file: lines ``coordinate = value`` (parameters allowed too).

    Returns a mapping from Base/Field/Param to float.
    """
    out = {}
    ev = _Evaluator(_Context.from_spec(spec))
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DSLSyntaxError(lineno, len(raw) + 1, "'='")
        lhs, rhs = line.rsplit("=", 1)
        p = _Parser(lhs)
        node = p.expr()
        if p.tok.kind != "eof":
            t = p.tok
            raise DSLSyntaxError(lineno, t.col, "'='", t.text)
        e = ev.sum(node, {})
        terms = list(e.terms)
        if len(terms) != 1 or terms[0][1] != 1 or len(terms[0][0]) != 1 or terms[0][0][0][1] != 1 \
                or isinstance(terms[0][0][0][0], AtomDecl):
            raise SemanticError(f"{lhs.strip()!r} is not a coordinate or parameter", lineno)
        try:
            value = float(Fraction(rhs.strip()))
        except (ValueError, ZeroDivisionError):
            raise DSLSyntaxError(lineno, raw.index("=") + 2, "a number", rhs.strip()) from None
        out[terms[0][0][0][0]] = value
    return out
