"""Symbolic expressions over jet coordinates.

Expressions are Laurent polynomials with exact rational coefficients in
*factors*: base coordinates ``x^i``, field jet coordinates ``y^sigma_J``,
named constant parameters and opaque atoms.  Every ``Expr`` is kept in
canonical form (merged monomials, sorted factors, no zero coefficients), so
structural equality decides equality on the polynomial fragment.

Jet coordinates use sorted multi-indices, each treated as an independent
coordinate: ``d y_J / d y_K = delta_JK`` with no multiplicity factors.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import MissingDerivativeRule, OrderOverflow, SpecError, UnknownWeight

__all__ = [
    "Base", "Field", "Param", "AtomDecl", "ParamDecl", "FieldComponent",
    "JetSpec", "Expr", "const", "var", "partial", "total_derivative",
    "homogeneous_decompose", "normalize", "jet_order", "multi_indices",
    "multiplicity", "merge_indices", "sub_multisets", "multiset_difference",
]


# --------------------------------------------------------------------------
# multi-indices

def multi_indices(n: int, k: int):
    """Sorted multi-indices of length ``k`` over base indices 1..n."""
    return list(combinations_with_replacement(range(1, n + 1), k))


@lru_cache(maxsize=None)
def multiplicity(J: tuple) -> int:
    """Number of distinct orderings of the multiset ``J``."""
    count = factorial(len(J))
    for i in set(J):
        count //= factorial(J.count(i))
    return count


def merge_indices(J: tuple, K: tuple) -> tuple:
    return tuple(sorted(J + K))


def multiset_difference(L: tuple, K: tuple):
    """``L - K`` as a sorted tuple, or None when K is not contained in L."""
    rest = list(L)
    for i in K:
        try:
            rest.remove(i)
        except ValueError:
            return None
    return tuple(rest)


@lru_cache(maxsize=None)
def sub_multisets(L: tuple) -> tuple:
    """All sorted sub-multisets of ``L`` (including () and L itself)."""
    values = sorted(set(L))
    out = []
    for counts in product(*(range(L.count(v) + 1) for v in values)):
        out.append(tuple(v for v, c in zip(values, counts) for _ in range(c)))
    return tuple(sorted(out, key=lambda s: (len(s), s)))


# --------------------------------------------------------------------------
# factors

@dataclass(frozen=True)
class Base:
    """Independent variable ``x^i`` (1-based)."""

    i: int

    @property
    def key(self):
        return (0, self.i)

    def __repr__(self):
        return f"x{self.i}"


@dataclass(frozen=True)
class Field:
    """Jet coordinate ``y^{name[index]}_J`` with sorted multi-index ``J``."""

    name: str
    index: tuple = ()
    J: tuple = ()

    def __post_init__(self):
        if tuple(sorted(self.J)) != tuple(self.J):
            object.__setattr__(self, "J", tuple(sorted(self.J)))

    @property
    def order(self) -> int:
        return len(self.J)

    @property
    def component(self) -> "FieldComponent":
        return FieldComponent(self.name, self.index)

    def raised(self, i: int) -> "Field":
        return Field(self.name, self.index, merge_indices(self.J, (i,)))

    @property
    def key(self):
        return (2, self.name, self.index, len(self.J), self.J)

    def __repr__(self):
        s = self.name
        if self.index:
            s += "[" + ",".join(map(str, self.index)) + "]"
        if self.J:
            s += "_" + "".join(map(str, self.J))
        return s


@dataclass(frozen=True)
class Param:
    """Named constant with optional indices; ``sym`` means fully symmetric."""

    name: str
    indices: tuple = ()
    sym: bool = False

    def __post_init__(self):
        if self.sym:
            object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def key(self):
        return (1, self.name, self.indices)

    def __repr__(self):
        if not self.indices:
            return self.name
        return f"{self.name}[{','.join(map(str, self.indices))}]"


JetVar = Union[Base, Field]


class AtomDecl:
    """An opaque function of some jet coordinates.

    ``weight`` is the homothety weight picked up when the fields in
    ``weight_fields`` (default: every field among ``args``) are scaled.
    ``rules`` maps an argument to the partial derivative of the atom with
    respect to it; without a rule the atom can only be evaluated
    numerically.  ``evaluator`` takes one array per argument.

    Atoms compare by name, so rules may refer back to the atom itself after
    construction (``sqrtg.set_rule(g, sqrtg * ginv / 2)``).
    """

    def __init__(self, name: str, args: Sequence[JetVar], weight=None,
                 weight_fields: Optional[Iterable[str]] = None,
                 evaluator: Optional[Callable] = None):
        self.name = name
        self.args = tuple(args)
        self.weight = None if weight is None else Fraction(weight)
        if weight_fields is None:
            weight_fields = {a.name for a in self.args if isinstance(a, Field)}
        self.weight_fields = frozenset(weight_fields)
        self.evaluator = evaluator
        self.rules: dict = {}

    def set_rule(self, arg: JetVar, derivative: "Expr"):
        if arg not in self.args:
            raise SpecError(f"{arg!r} is not an argument of atom {self.name}")
        self.rules[arg] = as_expr(derivative)

    @property
    def key(self):
        return (3, self.name)

    @property
    def order(self) -> int:
        return max((a.order for a in self.args if isinstance(a, Field)), default=0)

    def __eq__(self, other):
        return isinstance(other, AtomDecl) and other.name == self.name

    def __hash__(self):
        return hash(("atom", self.name))

    def __repr__(self):
        return self.name


Factor = Union[Base, Field, Param, AtomDecl]


# --------------------------------------------------------------------------
# jet chart

@dataclass(frozen=True)
class FieldComponent:
    name: str
    index: tuple = ()

    def var(self, J=()) -> Field:
        return Field(self.name, self.index, tuple(J))

    def __repr__(self):
        if not self.index:
            return self.name
        return f"{self.name}[{','.join(map(str, self.index))}]"


@dataclass(frozen=True)
class ParamDecl:
    name: str
    rank: int = 0
    sym: bool = False

    def __call__(self, *indices) -> "Expr":
        if len(indices) != self.rank:
            raise SpecError(f"parameter {self.name} takes {self.rank} indices")
        return var(Param(self.name, tuple(indices), self.sym))


@dataclass(frozen=True)
class JetSpec:
    """Coordinate chart: base variables, field components, order bound.

    ``fields`` lists field components in a fixed order; the position of a
    component is its index sigma.  ``max_order`` is the order r of the source
    forms under study; jet coordinates up to order 2r are admitted.
    """

    base: tuple
    fields: tuple
    max_order: int
    params: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "fields", tuple(
            f if isinstance(f, FieldComponent) else FieldComponent(*f)
            for f in self.fields))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(self.base) < 1:
            raise SpecError("at least one base variable is required")
        if len(self.fields) < 1:
            raise SpecError("at least one field component is required")
        if self.max_order < 0:
            raise SpecError("max_order must be non-negative")
        if len(set(self.fields)) != len(self.fields):
            raise SpecError("duplicate field components")
        names = list(self.base) + sorted(self.field_names) \
            + [p.name for p in self.params] + [a.name for a in self.atoms]
        if len(set(names)) != len(names):
            raise SpecError("base, field, parameter and atom names must be distinct")

    @classmethod
    def build(cls, base, fields, max_order, params=(), atoms=()):
        """Convenience constructor.

        ``fields`` entries are a name (scalar field), ``(name, k)`` for a
        k-component vector field, or ``(name, [index tuples])``.
        """
        comps = []
        for f in fields:
            if isinstance(f, str):
                comps.append(FieldComponent(f))
            elif isinstance(f[1], int):
                comps.extend(FieldComponent(f[0], (a,)) for a in range(1, f[1] + 1))
            else:
                comps.extend(FieldComponent(f[0], tuple(ix)) for ix in f[1])
        if isinstance(base, int):
            base = ("t",) if base == 1 else tuple(f"x{i}" for i in range(1, base + 1))
        return cls(tuple(base), tuple(comps), max_order, tuple(params), tuple(atoms))

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fields)

    @property
    def field_names(self) -> frozenset:
        return frozenset(f.name for f in self.fields)

    @property
    def order_limit(self) -> int:
        return 2 * self.max_order

    def sigma(self, v: Field) -> int:
        return self.fields.index(v.component)

    def coordinates(self, order: int) -> list:
        """Canonical coordinate list: base, then fields order by order."""
        coords = [Base(i) for i in range(1, self.n + 1)]
        for k in range(order + 1):
            for comp in self.fields:
                coords.extend(comp.var(J) for J in multi_indices(self.n, k))
        return coords

    def param(self, name) -> ParamDecl:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def atom(self, name) -> AtomDecl:
        for a in self.atoms:
            if a.name == name:
                return a
        raise KeyError(name)


# --------------------------------------------------------------------------
# expressions

def _mono_key(mono):
    return tuple((f.key, e) for f, e in mono)


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for f, e in b:
        d[f] = d.get(f, 0) + e
    return tuple(sorted(((f, e) for f, e in d.items() if e != 0), key=lambda t: t[0].key))


class Expr:
    """Immutable canonical sum of monomials with Fraction coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping = None):
        # terms: {monomial: coefficient}, monomial = sorted tuple of (factor, exp)
        items = [(m, Fraction(c)) for m, c in (terms or {}).items() if c != 0]
        items.sort(key=lambda t: _mono_key(t[0]))
        self._terms = dict(items)
        self._hash = None

    # construction helpers -------------------------------------------------
    @staticmethod
    def _raw(d: dict) -> "Expr":
        e = Expr.__new__(Expr)
        items = [(m, c) for m, c in d.items() if c != 0]
        items.sort(key=lambda t: _mono_key(t[0]))
        e._terms = dict(items)
        e._hash = None
        return e

    @property
    def terms(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def factors(self) -> set:
        return {f for m in self._terms for f, _ in m}

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        d = dict(self._terms)
        for m, c in other._terms.items():
            d[m] = d.get(m, 0) + c
        return Expr._raw(d)

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, other):
        other = as_expr(other)
        if not self._terms or not other._terms:
            return ZERO
        d = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return Expr._raw(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_expr(other)
        if len(other._terms) != 1:
            raise ValueError("division is only defined by a single monomial")
        (m, c), = other._terms.items()
        inv = tuple((f, -e) for f, e in m)
        return self * Expr._raw({inv: 1 / c})

    def __rtruediv__(self, other):
        return as_expr(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            if len(self._terms) != 1:
                raise ValueError("negative powers require a single monomial")
            (m, c), = self._terms.items()
            return Expr._raw({tuple((f, e * k) for f, e in m): c ** k})
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_expr(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        from .render import render
        return f"Expr({render(self)!r})"


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr._raw({(): Fraction(x)})
    if isinstance(x, (Base, Field, Param, AtomDecl)):
        return var(x)
    if isinstance(x, str):
        return Expr._raw({(): Fraction(x)})
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def const(c) -> Expr:
    return as_expr(Fraction(c))


def var(f: Factor) -> Expr:
    return Expr._raw({((f, 1),): Fraction(1)})


ZERO = Expr._raw({})
ONE = Expr._raw({(): Fraction(1)})


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` from its terms.  Expressions are always canonical, so this
    is the identity up to object identity."""
    return Expr(dict(e.terms))


def jet_order(e: Expr) -> int:
    """Highest field-derivative order among the coordinates ``e`` reads."""
    order = 0
    for f in e.factors():
        if isinstance(f, Field):
            order = max(order, f.order)
        elif isinstance(f, AtomDecl):
            order = max(order, f.order)
    return order


def jet_vars(e: Expr) -> set:
    """Jet coordinates ``e`` depends on, including through atom arguments."""
    out = set()
    for f in e.factors():
        if isinstance(f, (Base, Field)):
            out.add(f)
        elif isinstance(f, AtomDecl):
            out.update(f.args)
    return out


def has_atoms(e: Expr) -> bool:
    return any(isinstance(f, AtomDecl) for f in e.factors())


# --------------------------------------------------------------------------
# differentiation

def _factor_partial(f, v) -> Optional[Expr]:
    if isinstance(f, AtomDecl):
        if v not in f.args:
            return None
        if v not in f.rules:
            raise MissingDerivativeRule(f.name, v)
        return f.rules[v]
    return ONE if f == v else None


def _differentiate(e: Expr, dfactor) -> Expr:
    d = {}
    cache = {}
    for mono, c in e.terms:
        for pos, (f, k) in enumerate(mono):
            if f not in cache:
                cache[f] = dfactor(f)
            df = cache[f]
            if df is None:
                continue
            rest = mono[:pos] + ((f, k - 1),) + mono[pos + 1:] if k != 1 \
                else mono[:pos] + mono[pos + 1:]
            rest = tuple(t for t in rest if t[1] != 0)
            coef = c * k
            for m2, c2 in df.terms:
                m = _mono_mul(rest, m2)
                d[m] = d.get(m, 0) + coef * c2
    return Expr._raw(d)


def partial(e: Expr, v: JetVar) -> Expr:
    """Partial derivative with respect to a single jet coordinate."""
    e = as_expr(e)
    return _differentiate(e, lambda f: _factor_partial(f, v))


def total_derivative(e: Expr, i: int, spec: Optional[JetSpec] = None) -> Expr:
    """Formal total derivative ``d_i``.

    With a ``spec`` the result is checked against the 2r order bound.
    """
    e = as_expr(e)
    limit = spec.order_limit if spec is not None else None

    def dfactor(f):
        if isinstance(f, Base):
            return ONE if f.i == i else None
        if isinstance(f, Field):
            g = f.raised(i)
            if limit is not None and g.order > limit:
                raise OrderOverflow(g.order, limit)
            return var(g)
        if isinstance(f, Param):
            return None
        out = ZERO
        for a in f.args:
            da = dfactor(a)
            if da is None:
                continue
            if a not in f.rules:
                raise MissingDerivativeRule(f.name, a)
            out = out + f.rules[a] * da
        return None if out.is_zero() else out

    return _differentiate(e, dfactor)


def total_derivatives(e: Expr, J: Sequence[int], spec: Optional[JetSpec] = None) -> Expr:
    for i in J:
        e = total_derivative(e, i, spec)
    return e


# --------------------------------------------------------------------------
# homothety weights

def _factor_weight(f, exp, scaled: frozenset) -> Fraction:
    if isinstance(f, Field):
        return Fraction(exp) if f.name in scaled else Fraction(0)
    if isinstance(f, AtomDecl):
        touched = {a.name for a in f.args if isinstance(a, Field)} & scaled
        if not touched:
            return Fraction(0)
        if f.weight is None or touched != (f.weight_fields & scaled) \
                or not f.weight_fields <= scaled:
            raise UnknownWeight(f.name)
        return f.weight * exp
    return Fraction(0)


def homogeneous_decompose(e: Expr, scaled_fields: Iterable[str]):
    """Split ``e`` into components homogeneous under the field homothety.

    Returns ``[(weight, component), ...]`` sorted by weight, such that the
    components sum to ``e`` and each picks up ``u**weight`` when every jet
    coordinate of the scaled fields is multiplied by ``u``.
    """
    scaled = frozenset(scaled_fields)
    groups: dict = {}
    for mono, c in as_expr(e).terms:
        w = sum((_factor_weight(f, k, scaled) for f, k in mono), Fraction(0))
        groups.setdefault(w, {})[mono] = c
    return [(w, Expr._raw(groups[w])) for w in sorted(groups)]
