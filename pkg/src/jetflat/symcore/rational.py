"""Canonical rational functions: the scalar type of every formula in the package."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint

from jetflat.errors import DivisionByZeroExpr, SubstitutionSingularity, UniverseMismatch
from jetflat.symcore.poly import Polynomial, integer_normalizer, to_fmpq, to_fraction
from jetflat.symcore.universe import VarUniverse

Number = Union[int, Fraction]


def _canonical(num: flint.fmpq_mpoly, den: flint.fmpq_mpoly, ctx) -> tuple:
    if den.is_zero():
        raise DivisionByZeroExpr("denominator is the zero polynomial")
    if num.is_zero():
        return num, ctx.constant(1)
    if den.is_constant():
        return num / den.leading_coefficient(), ctx.constant(1)
    g = num.gcd(den)
    if not g.is_one():
        num = num / g
        den = den / g
        if den.is_constant():
            return num / den.leading_coefficient(), ctx.constant(1)
    s = integer_normalizer(den)
    if s != 1:
        f = to_fmpq(s)
        num = num * f
        den = den * f
    return num, den


class RationalExpr:
    """Exact rational function ``num/den`` in canonical form.

    Canonical means: gcd(num, den) is a unit, den has integer coefficients with
    content 1 and a positive graded-lex leading coefficient, and zero is 0/1.
    Equality of canonical forms is therefore semantic equality.
    """

    __slots__ = ("universe", "_num", "_den")

    def __init__(self, universe: VarUniverse, num, den=None, *, _trusted: bool = False):
        ctx = universe.ctx
        if isinstance(num, Polynomial):
            num = num.raw
        if isinstance(den, Polynomial):
            den = den.raw
        if den is None:
            den = ctx.constant(1)
            _trusted = True
        if not _trusted:
            num, den = _canonical(num, den, ctx)
        self.universe = universe
        self._num = num
        self._den = den

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, universe: VarUniverse, c: Number) -> "RationalExpr":
        return cls(universe, universe.ctx.constant(to_fmpq(c)))

    @classmethod
    def var(cls, universe: VarUniverse, name: str) -> "RationalExpr":
        return cls(universe, universe.ctx.gen(universe.position(name)))

    @classmethod
    def zero(cls, universe: VarUniverse) -> "RationalExpr":
        return cls(universe, universe.ctx.from_dict({}))

    @classmethod
    def one(cls, universe: VarUniverse) -> "RationalExpr":
        return cls.const(universe, 1)

    # -- accessors ------------------------------------------------------
    @property
    def num(self) -> Polynomial:
        return Polynomial(self.universe, self._num)

    @property
    def den(self) -> Polynomial:
        return Polynomial(self.universe, self._den)

    def is_zero(self) -> bool:
        return self._num.is_zero()

    def is_polynomial(self) -> bool:
        return self._den.is_one()

    def is_constant(self) -> bool:
        return self._num.is_constant() and self._den.is_one()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return Fraction(0) if self.is_zero() else to_fraction(self._num.leading_coefficient())

    def free_names(self) -> set[str]:
        """Variables occurring in the numerator or the denominator."""
        used = [max(a, b) > 0 for a, b in zip(self._num.degrees(), self._den.degrees())]
        return {name for name, d in zip(self.universe.names, used) if d}

    def depends_on(self, names: Iterable[str]) -> bool:
        free = self.free_names()
        return any(v in free for v in names)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "RationalExpr | None":
        if isinstance(other, RationalExpr):
            if other.universe != self.universe:
                raise UniverseMismatch(f"{other.universe} vs {self.universe}")
            return other
        if isinstance(other, (int, Fraction)):
            return RationalExpr.const(self.universe, other)
        return None

    def _make(self, num, den) -> "RationalExpr":
        return RationalExpr(self.universe, num, den)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o._num.is_zero():
            return self
        if self._num.is_zero():
            return o
        if self._den == o._den:
            if self._den.is_one():
                return RationalExpr(self.universe, self._num + o._num)
            return self._make(self._num + o._num, self._den)
        return self._make(self._num * o._den + o._num * self._den, self._den * o._den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(self.universe, -self._num, self._den, _trusted=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._num.is_zero() or o._num.is_zero():
            return RationalExpr.zero(self.universe)
        if self._den.is_one() and o._den.is_one():
            return RationalExpr(self.universe, self._num * o._num)
        if o.is_constant():
            return RationalExpr(self.universe, self._num * o._num, self._den, _trusted=True)
        if self.is_constant():
            return RationalExpr(self.universe, o._num * self._num, o._den, _trusted=True)
        return self._make(self._num * o._num, self._den * o._den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o._num.is_zero():
            raise DivisionByZeroExpr(f"division of {self} by zero")
        return self._make(self._num * o._den, self._den * o._num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return RationalExpr.one(self.universe) / (self ** (-k))
        return RationalExpr(self.universe, self._num**k, self._den**k, _trusted=True)

    def __eq__(self, other) -> bool:
        o = self._coerce(other) if not isinstance(other, RationalExpr) else other
        if o is None:
            return NotImplemented
        return self.universe == o.universe and self._num == o._num and self._den == o._den

    def __hash__(self) -> int:
        return hash((self.universe, tuple(self._num.terms()), tuple(self._den.terms())))

    def __bool__(self) -> bool:
        return not self._num.is_zero()

    # -- calculus -------------------------------------------------------
    def diff(self, name: str) -> "RationalExpr":
        k = self.universe.position(name)
        if self._den.is_one():
            return RationalExpr(self.universe, self._num.derivative(k))
        dn = self._num.derivative(k)
        dd = self._den.derivative(k)
        if dd.is_zero():
            return self._make(dn, self._den)
        return self._make(dn * self._den - self._num * dd, self._den * self._den)

    def subs(self, bindings: Mapping[str, "RationalExpr | Number"]) -> "RationalExpr":
        """Simultaneous substitution followed by canonicalization."""
        if not bindings:
            return self
        u = self.universe
        vals = {}
        for name, val in bindings.items():
            if not isinstance(val, RationalExpr):
                val = RationalExpr.const(u, val)
            elif val.universe != u:
                raise UniverseMismatch(f"binding for {name} lives in {val.universe}")
            vals[u.position(name)] = val
        nn, nd = _eval_poly(self._num, vals, u)
        dn, dd = _eval_poly(self._den, vals, u)
        den = nd * dn
        if den.is_zero():
            raise SubstitutionSingularity(f"denominator of {self} vanishes under substitution")
        return self._make(nn * dd, den)

    def lift(self, universe: VarUniverse) -> "RationalExpr":
        """Re-express in a universe that contains every variable this one uses."""
        if universe == self.universe:
            return self
        used = self.free_names()
        mapping = [
            universe.position(name) if name in used else -1 for name in self.universe.names
        ]
        width = universe.nvars

        def move(raw):
            data = {}
            for mono, c in raw.terms():
                e = [0] * width
                for k, d in enumerate(mono):
                    if d:
                        e[mapping[k]] = d
                data[tuple(e)] = c
            return universe.ctx.from_dict(data)

        return RationalExpr(universe, move(self._num), move(self._den), _trusted=True)

    def coefficients_in(self, names: Iterable[str]) -> dict[tuple[int, ...], "RationalExpr"]:
        """Split a polynomial dependence on ``names`` into its coefficients.

        Raises ``ValueError`` if the denominator mentions any of ``names``.
        """
        u = self.universe
        names = list(names)
        idx = [u.position(v) for v in names]
        if any(self._den.degrees()[k] for k in idx):
            raise ValueError(f"denominator of {self} depends on {names}")
        groups: dict[tuple[int, ...], dict] = {}
        for mono, c in self._num.terms():
            key = tuple(int(mono[k]) for k in idx)
            rest = list(mono)
            for k in idx:
                rest[k] = 0
            groups.setdefault(key, {})[tuple(rest)] = c
        return {key: self._make(u.ctx.from_dict(data), self._den) for key, data in groups.items()}

    def degree_in(self, names: Iterable[str]) -> int:
        """Total degree of the numerator in ``names`` (-1 for zero)."""
        idx = [self.universe.position(v) for v in names]
        if self._num.is_zero():
            return -1
        return max(sum(mono[k] for k in idx) for mono, _ in self._num.terms())

    # -- printing -------------------------------------------------------
    def render(self) -> str:
        """Spell the expression in the CLI input grammar."""
        num = render_poly(self._num, self.universe)
        if self._den.is_one():
            return num
        den = render_poly(self._den, self.universe)
        if len(self._num) > 1:
            num = f"({num})"
        if len(self._den) > 1 or not _is_bare_atom(self._den):
            den = f"({den})"
        return f"{num}/{den}"

    __str__ = render

    def __repr__(self) -> str:
        return f"RationalExpr({self.render()})"


def _is_bare_atom(raw) -> bool:
    (mono, c), = raw.terms()
    return c == 1 and sum(mono) <= 1


def render_poly(raw, universe: VarUniverse) -> str:
    if raw.is_zero():
        return "0"
    names = [universe.display(v) for v in universe.names]
    out = []
    for mono, c in raw.terms():
        c = to_fraction(c)
        factors = []
        for k, d in enumerate(mono):
            if d == 1:
                factors.append(names[k])
            elif d > 1:
                factors.append(f"{names[k]}^{d}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not out:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(out)


def _eval_poly(raw, vals: dict[int, RationalExpr], universe: VarUniverse):
    """Evaluate ``raw`` at rational values for some variables; returns (num, den) unreduced."""
    ctx = universe.ctx
    if raw.is_zero():
        return raw, ctx.constant(1)
    degs = raw.degrees()
    subs = [k for k in vals if degs[k]]
    if not subs:
        return raw, ctx.constant(1)
    if all(vals[k]._den.is_one() for k in subs):
        args = list(ctx.gens())
        for k in subs:
            args[k] = vals[k]._num
        return raw.compose(*args), ctx.constant(1)
    groups: dict[tuple[int, ...], dict] = {}
    for mono, c in raw.terms():
        key = tuple(mono[k] for k in subs)
        rest = list(mono)
        for k in subs:
            rest[k] = 0
        groups.setdefault(key, {})[tuple(rest)] = c
    top = [int(degs[k]) for k in subs]
    num_pows = [[ctx.constant(1)] for _ in subs]
    den_pows = [[ctx.constant(1)] for _ in subs]
    for s, k in enumerate(subs):
        for _ in range(top[s]):
            num_pows[s].append(num_pows[s][-1] * vals[k]._num)
            den_pows[s].append(den_pows[s][-1] * vals[k]._den)
    total = ctx.from_dict({})
    for key, data in groups.items():
        term = ctx.from_dict(data)
        for s, e in enumerate(key):
            term = term * num_pows[s][e] * den_pows[s][top[s] - e]
        total = total + term
    den = ctx.constant(1)
    for s in range(len(subs)):
        den = den * den_pows[s][top[s]]
    return total, den
