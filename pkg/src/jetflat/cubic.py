"""The specific cubic form and its flatness conditions.

A :class:`CubicForm` holds the tables ``G, H, L, M`` of functions of
``(x, y)``.  Besides expansion and extraction this module evaluates the four
first-order families (I')-(IV') exactly as they are displayed, and
independently re-derives them by expanding the integrability residuals of
the expanded system and annihilating their jet coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Iterator, Mapping

from jetflat.errors import DegreeTooHigh, JetVariableNotAllowed, NotSymmetric
from jetflat.jetspace import JetContext, PdeSystem, delta, integrability_residuals
from jetflat.symcore import Inconsistent, RationalExpr, Solution, solve_linear

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)

FAMILIES = ("I'", "II'", "III'", "IV'")


def _sorted(t: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(t))


class CubicForm:
    """Coefficient tables of the cubic right-hand side.

    Missing entries default to zero.  ``G`` and the lower pair of ``H`` are
    symmetric; entries given for both orders must agree.
    """

    def __init__(
        self,
        ctx: JetContext,
        G: Mapping[tuple[int, int], RationalExpr] | None = None,
        H: Mapping[tuple[int, int, int], RationalExpr] | None = None,
        L: Mapping[tuple[int, int], RationalExpr] | None = None,
        M: Mapping[int, RationalExpr] | None = None,
    ):
        self.ctx = ctx
        u = ctx.universe
        jets = ctx.jet1_names + ctx.jet2_names
        zero = ctx.zero()

        def clean(label: str, e) -> RationalExpr:
            if not isinstance(e, RationalExpr):
                e = ctx.const(e)
            e = e.lift(u)
            if e.depends_on(jets):
                raise JetVariableNotAllowed(f"{label} mentions jet variables")
            return e

        def sym_table(raw, arity: int, label: str) -> dict:
            out: dict = {}
            for key, e in (raw or {}).items():
                key = tuple(key) if arity > 1 else (key,)
                for i in key:
                    ctx.check_index(i)
                e = clean(f"{label}{list(key)}", e)
                canon = key if arity < 2 or label in ("L",) else key[:-2] + _sorted(key[-2:])
                if canon in out and out[canon] != e:
                    raise NotSymmetric(f"{label}{list(key)} disagrees with its mirror")
                out[canon] = e
            return out

        g = sym_table(G, 2, "G")
        h = sym_table(H, 3, "H")
        l_ = sym_table(L, 2, "L")
        m = sym_table(M, 1, "M")
        idx = ctx.indices
        self._G = {(a, b): g.get(_sorted((a, b)), zero) for a in idx for b in idx}
        self._H = {
            (k, a, b): h.get((k,) + _sorted((a, b)), zero) for k in idx for a in idx for b in idx
        }
        self._L = {(k, j): l_.get((k, j), zero) for k in idx for j in idx}
        self._M = {k: m.get((k,), zero) for k in idx}

    @property
    def n(self) -> int:
        return self.ctx.n

    def G(self, a: int, b: int) -> RationalExpr:
        return self._G[(a, b)]

    def H(self, k: int, a: int, b: int) -> RationalExpr:
        """``H^k_{a,b}``."""
        return self._H[(k, a, b)]

    def L(self, k: int, j: int) -> RationalExpr:
        """``L^k_j``."""
        return self._L[(k, j)]

    def M(self, k: int) -> RationalExpr:
        return self._M[k]

    def entries(self) -> Iterator[tuple[str, tuple[int, ...], RationalExpr]]:
        """Independent entries in canonical order: G (i<=j), H^k (i<=j), L^k_j, M^k."""
        idx = self.ctx.indices
        for a in idx:
            for b in idx:
                if a <= b:
                    yield "G", (a, b), self._G[(a, b)]
        for k in idx:
            for a in idx:
                for b in idx:
                    if a <= b:
                        yield "H", (k, a, b), self._H[(k, a, b)]
        for k in idx:
            for j in idx:
                yield "L", (k, j), self._L[(k, j)]
        for k in idx:
            yield "M", (k,), self._M[k]

    def is_zero(self) -> bool:
        return all(e.is_zero() for _, _, e in self.entries())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubicForm) or other.ctx != self.ctx:
            return NotImplemented
        return (
            self._G == other._G and self._H == other._H and self._L == other._L and self._M == other._M
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{t}{list(k)}={e}" for t, k, e in self.entries() if not e.is_zero())
        return f"CubicForm(n={self.n}, {body or '0'})"


def expand_cubic(c: CubicForm) -> PdeSystem:
    ctx = c.ctx
    p = {k: ctx.p(k) for k in ctx.indices}
    entries = {}
    for j1 in ctx.indices:
        for j2 in ctx.indices:
            if j1 > j2:
                continue
            f = c.G(j1, j2)
            for k in ctx.indices:
                inner = (
                    c.H(k, j1, j2)
                    + HALF * p[j1] * c.L(k, j2)
                    + HALF * p[j2] * c.L(k, j1)
                    + p[j1] * p[j2] * c.M(k)
                )
                if not inner.is_zero():
                    f = f + p[k] * inner
            entries[(j1, j2)] = f
    return PdeSystem(ctx, entries)


# -- extraction ---------------------------------------------------------

@dataclass(frozen=True)
class NotCubicForm:
    """Witness that a system is not of the cubic shape.

    ``entry`` is the pair ``(j1, j2)`` of the offending right-hand side and
    ``monomial`` the exponent vector in ``(y_{x^1}, ..., y_{x^n})`` of the
    violated coefficient equation (``None`` when a denominator involves jets).
    """

    entry: tuple[int, int]
    monomial: tuple[int, ...] | None
    reason: str
    residual: RationalExpr | None = None


def _monomials(n: int, top: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(top + 1):
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _mono(n: int, *ks: int) -> tuple[int, ...]:
    e = [0] * n
    for k in ks:
        e[k - 1] += 1
    return tuple(e)


def _unknowns(n: int) -> list[tuple[str, tuple[int, ...]]]:
    idx = range(1, n + 1)
    out: list[tuple[str, tuple[int, ...]]] = [("G", (a, b)) for a in idx for b in idx if a <= b]
    out += [("H", (k, a, b)) for k in idx for a in idx for b in idx if a <= b]
    out += [("L", (k, j)) for k in idx for j in idx]
    out += [("M", (k,)) for k in idx]
    return out


def _design(n: int) -> dict[tuple[int, int, tuple[int, ...]], dict[int, Fraction]]:
    """Constant linear map from the unknowns to the jet coefficients of each F^{j1,j2}."""
    rows: dict[tuple[int, int, tuple[int, ...]], dict[int, Fraction]] = {}

    def add(j1, j2, mono, col, coef):
        row = rows.setdefault((j1, j2, mono), {})
        row[col] = row.get(col, 0) + coef

    for col, (kind, key) in enumerate(_unknowns(n)):
        for j1 in range(1, n + 1):
            for j2 in range(j1, n + 1):
                if kind == "G" and key == (j1, j2):
                    add(j1, j2, _mono(n), col, 1)
                elif kind == "H" and key[1:] == (j1, j2):
                    add(j1, j2, _mono(n, key[0]), col, 1)
                elif kind == "L":
                    k, j = key
                    if j == j2:
                        add(j1, j2, _mono(n, k, j1), col, HALF)
                    if j == j1:
                        add(j1, j2, _mono(n, k, j2), col, HALF)
                elif kind == "M":
                    add(j1, j2, _mono(n, key[0], j1, j2), col, 1)
    return rows


def extract_cubic(sys: PdeSystem) -> CubicForm | NotCubicForm:
    """Recover ``(G, H, L, M)`` by one linear solve over the rational-function field."""
    ctx = sys.ctx
    n = ctx.n
    jets = ctx.jet1_names
    coeffs = {}
    for (j1, j2), f in sys.items():
        try:
            cs = f.coefficients_in(jets)
        except ValueError:
            return NotCubicForm((j1, j2), None, "denominator depends on the jet variables")
        high = sorted((m for m in cs if sum(m) > 3), key=lambda m: (sum(m), tuple(-e for e in m)))
        if high:
            return NotCubicForm((j1, j2), high[0], "jet degree exceeds 3", cs[high[0]])
        coeffs[(j1, j2)] = cs
    design = _design(n)
    unknowns = _unknowns(n)
    keys = []
    for j1 in ctx.indices:
        for j2 in range(j1, n + 1):
            for mono in _monomials(n, 3):
                key = (j1, j2, mono)
                if key in design or mono in coeffs[(j1, j2)]:
                    keys.append(key)
    zero = ctx.zero()
    consts: dict[Fraction, RationalExpr] = {}

    def const(v) -> RationalExpr:
        if v not in consts:
            consts[v] = ctx.const(v)
        return consts[v]

    a = []
    b = []
    for key in keys:
        row = design.get(key, {})
        a.append([const(row[c]) if c in row else zero for c in range(len(unknowns))])
        b.append(coeffs[key[:2]].get(key[2], zero))
    result = solve_linear(a, b)
    if isinstance(result, Inconsistent):
        j1, j2, mono = keys[result.row]
        return NotCubicForm((j1, j2), mono, "coefficient equation has no solution", result.residual)
    if not isinstance(result, Solution):  # pragma: no cover - the design map is injective
        raise RuntimeError("cubic design matrix is rank deficient")
    tables: dict[str, dict] = {"G": {}, "H": {}, "L": {}, "M": {}}
    for (kind, key), v in zip(unknowns, result.values):
        tables[kind][key if kind != "M" else key[0]] = v
    return CubicForm(ctx, tables["G"], tables["H"], tables["L"], tables["M"])


# -- coefficient annihilation -------------------------------------------

@dataclass(frozen=True)
class CoefficientTables:
    """Coefficients ``A, B_k, C_{k1,k2}, D_{k1,k2,k3}`` of a cubic in the gradient.

    Tables need not be symmetric; absent entries are zero.
    """

    n: int
    A: RationalExpr
    B: Mapping[tuple[int], RationalExpr]
    C: Mapping[tuple[int, int], RationalExpr]
    D: Mapping[tuple[int, int, int], RationalExpr]


@dataclass(frozen=True)
class Condition:
    kind: str  # "A", "B", "C" or "D"
    index: tuple[int, ...]
    value: RationalExpr


def coefficient_tables(ctx: JetContext, p: RationalExpr) -> CoefficientTables:
    """Read a jet polynomial into tables, each coefficient on its sorted index."""
    if p.degree_in(ctx.jet1_names) > 3:
        raise DegreeTooHigh(f"jet degree of {p} exceeds 3")
    zero = ctx.zero()
    tabs: list[dict] = [{}, {}, {}, {}]
    for mono, coef in p.coefficients_in(ctx.jet1_names).items():
        key = tuple(k + 1 for k, e in enumerate(mono) for _ in range(e))
        tabs[len(key)][key] = coef
    return CoefficientTables(ctx.n, tabs[0].get((), zero), tabs[1], tabs[2], tabs[3])


def coefficient_annihilation(t: CoefficientTables | tuple[JetContext, RationalExpr]) -> list[Condition]:
    """Symmetrized coefficient sums whose vanishing is the vanishing of the cubic."""
    if isinstance(t, tuple):
        t = coefficient_tables(*t)
    for table, d in ((t.B, 1), (t.C, 2), (t.D, 3)):
        if any(len(k) != d for k in table):
            raise DegreeTooHigh("coefficient table has the wrong arity")
    zero = t.A * 0
    idx = range(1, t.n + 1)
    out = [Condition("A", (), t.A)]
    out += [Condition("B", (k,), t.B.get((k,), zero)) for k in idx]
    for k1, k2 in combinations_with_replacement(idx, 2):
        out.append(Condition("C", (k1, k2), t.C.get((k1, k2), zero) + t.C.get((k2, k1), zero)))
    for key in combinations_with_replacement(idx, 3):
        k1, k2, k3 = key
        total = zero
        # the six index rotations and transpositions, in the displayed order
        for perm in ((k1, k2, k3), (k3, k1, k2), (k2, k3, k1), (k2, k1, k3), (k3, k2, k1), (k1, k3, k2)):
            total = total + t.D.get(perm, zero)
        out.append(Condition("D", key, total))
    return out


# -- the four displayed families ----------------------------------------

@dataclass(frozen=True)
class FlatnessResiduals:
    """Residuals of (I')-(IV') keyed by ``(j1, j2, j3, k...)`` over all index values."""

    fam1: dict[tuple[int, ...], RationalExpr]
    fam2: dict[tuple[int, ...], RationalExpr]
    fam3: dict[tuple[int, ...], RationalExpr]
    fam4: dict[tuple[int, ...], RationalExpr]

    def families(self) -> dict[str, dict[tuple[int, ...], RationalExpr]]:
        return dict(zip(FAMILIES, (self.fam1, self.fam2, self.fam3, self.fam4)))

    def all_zero(self) -> bool:
        return self.first_nonzero() is None

    def first_nonzero(self) -> tuple[str, tuple[int, ...], RationalExpr] | None:
        for name, fam in self.families().items():
            for key in sorted(fam):
                if not fam[key].is_zero():
                    return name, key, fam[key]
        return None


class _Partials:
    """Memoized first partials of the cubic tables."""

    def __init__(self, c: CubicForm):
        self.c = c
        self._cache: dict = {}

    def __call__(self, kind: str, key: tuple[int, ...], var: int) -> RationalExpr:
        """Derivative of an entry along x^var (var = n+1 means y)."""
        if kind in ("G", "H"):
            key = key[: len(key) - 2] + _sorted(key[-2:])
        ck = (kind, key, var)
        if ck not in self._cache:
            e = getattr(self.c, kind)(*key)
            self._cache[ck] = self.c.ctx.d(e, var)
        return self._cache[ck]

    def second(self, kind: str, key: tuple[int, ...], v1: int, v2: int) -> RationalExpr:
        return self.c.ctx.d(self(kind, key, v1), v2)


def flatness_residuals(c: CubicForm) -> FlatnessResiduals:
    """Evaluate (I')-(IV') term by term as displayed, every index in 1..n.

    The upper index in the first term of (III') is read as
    ``k_{sigma(2)}``, and a doubled Kronecker symbol means the product of
    the two single ones.
    """
    ctx = c.ctx
    n = ctx.n
    y = n + 1
    idx = ctx.indices
    d = _Partials(c)
    G, H, L, M = c.G, c.H, c.L, c.M
    zero = ctx.zero()

    def total(terms) -> RationalExpr:
        out = zero
        for coef, e in terms:
            if coef and not e.is_zero():
                out = out + e * coef if coef != 1 else out + e
        return out

    # reusable contractions
    GM = {j: total((1, G(k, j) * M(k)) for k in idx) for j in idx}
    HM = {(b, j): total((1, H(b, k, j) * M(k)) for k in idx) for b in idx for j in idx}
    HL = {(b, j, i): total((1, H(b, k, j) * L(k, i)) for k in idx) for b in idx for j in idx for i in idx}
    HL2 = {(a, b, i): total((1, H(k, a, b) * L(i, k)) for k in idx) for a in idx for b in idx for i in idx}
    GL = {(j, i): total((1, G(k, j) * L(k, i)) for k in idx) for j in idx for i in idx}
    LL = {(b, i): total((1, L(b, k) * L(k, i)) for k in idx) for b in idx for i in idx}
    HG = {(a, b, j): total((1, H(k, a, b) * G(k, j)) for k in idx) for a in idx for b in idx for j in idx}
    HH = {
        (k1, j, a, b): total((1, H(k1, k2, j) * H(k2, a, b)) for k2 in idx)
        for k1 in idx for j in idx for a in idx for b in idx
    }

    fam1, fam2, fam3, fam4 = {}, {}, {}, {}
    for j1 in idx:
        for j2 in idx:
            for j3 in idx:
                fam1[(j1, j2, j3)] = total([
                    (1, d("G", (j1, j2), j3)),
                    (-1, d("G", (j1, j3), j2)),
                    (1, HG[(j1, j2, j3)]),
                    (-1, HG[(j1, j3, j2)]),
                ])
                for k1 in idx:
                    fam2[(j1, j2, j3, k1)] = total([
                        (delta(j3, k1), d("G", (j1, j2), y)),
                        (-delta(j2, k1), d("G", (j1, j3), y)),
                        (1, d("H", (k1, j1, j2), j3)),
                        (-1, d("H", (k1, j1, j3), j2)),
                        (HALF, G(j1, j3) * L(k1, j2)),
                        (-HALF, G(j1, j2) * L(k1, j3)),
                        (HALF * delta(j1, k1), GL[(j3, j2)]),
                        (-HALF * delta(j1, k1), GL[(j2, j3)]),
                        (HALF * delta(j2, k1), GL[(j3, j1)]),
                        (-HALF * delta(j3, k1), GL[(j2, j1)]),
                        (1, HH[(k1, j3, j1, j2)]),
                        (-1, HH[(k1, j2, j1, j3)]),
                    ])
                for k1 in idx:
                    for k2 in idx:
                        terms = []
                        for a, b in ((k1, k2), (k2, k1)):
                            terms += [
                                (delta(j3, b), d("H", (a, j1, j2), y)),
                                (-delta(j2, b), d("H", (a, j1, j3), y)),
                                (HALF * delta(j2, b), d("L", (a, j1), j3)),
                                (-HALF * delta(j3, b), d("L", (a, j1), j2)),
                                (HALF * delta(j1, b), d("L", (a, j2), j3)),
                                (-HALF * delta(j1, b), d("L", (a, j3), j2)),
                                (delta(j2, b), G(j1, j3) * M(a)),
                                (-delta(j3, b), G(j1, j2) * M(a)),
                                (delta(a, j1) * delta(b, j2), GM[j3]),
                                (-delta(a, j1) * delta(b, j3), GM[j2]),
                                (HALF * delta(j1, a), HL[(b, j3, j2)]),
                                (-HALF * delta(j1, a), HL[(b, j2, j3)]),
                                (HALF * delta(j2, a), HL[(b, j3, j1)]),
                                (-HALF * delta(j3, a), HL[(b, j2, j1)]),
                                (HALF * delta(j3, a), HL2[(j1, j2, b)]),
                                (-HALF * delta(j2, a), HL2[(j1, j3, b)]),
                            ]
                        fam3[(j1, j2, j3, k1, k2)] = total(terms)
                for k1 in idx:
                    for k2 in idx:
                        for k3 in idx:
                            ks = (k1, k2, k3)
                            terms = []
                            for s in permutations(range(3)):
                                a, b, cc = ks[s[0]], ks[s[1]], ks[s[2]]
                                terms += [
                                    (HALF * delta(cc, j3) * delta(b, j1), d("L", (a, j2), y)),
                                    (-HALF * delta(cc, j2) * delta(b, j1), d("L", (a, j3), y)),
                                    (delta(cc, j2) * delta(b, j1), d("M", (a,), j3)),
                                    (-delta(cc, j3) * delta(b, j1), d("M", (a,), j2)),
                                    (delta(cc, j2) * delta(a, j1), HM[(b, j3)]),
                                    (-delta(cc, j3) * delta(a, j1), HM[(b, j2)]),
                                    (QUARTER * delta(a, j1) * delta(cc, j3), LL[(b, j2)]),
                                    (-QUARTER * delta(a, j1) * delta(cc, j2), LL[(b, j3)]),
                                ]
                            fam4[(j1, j2, j3, k1, k2, k3)] = total(terms)
    return FlatnessResiduals(fam1, fam2, fam3, fam4)


def derived_flatness_residuals(c: CubicForm) -> dict[tuple[int, int, int], list[Condition]]:
    """Annihilation conditions of every integrability residual of ``expand_cubic(c)``.

    Keys are ``(j1, j2, j3)`` with ``j2 < j3``; condition kinds A, B, C, D
    correspond to (I'), (II'), (III'), (IV').
    """
    ctx = c.ctx
    res = integrability_residuals(expand_cubic(c))
    return {
        key: coefficient_annihilation((ctx, r)) for key, r in sorted(res.residuals.items())
    }


def derived_all_zero(conds: dict[tuple[int, int, int], list[Condition]]) -> bool:
    return all(cd.value.is_zero() for cs in conds.values() for cd in cs)


# -- Chern tensor at the identity fibre ---------------------------------

@dataclass(frozen=True)
class ChernTensor:
    """Entries ``S^{alpha sigma}_{beta rho}`` keyed ``(alpha, sigma, beta, rho)``."""

    n: int
    S: dict[tuple[int, int, int, int], RationalExpr]

    def __getitem__(self, key: tuple[int, int, int, int]) -> RationalExpr:
        return self.S[key]

    def nonzero(self) -> list[tuple[int, int, int, int]]:
        return [k for k in sorted(self.S) if not self.S[k].is_zero()]

    def is_zero(self) -> bool:
        return not self.nonzero()


def chern_tensor_identity(sys: PdeSystem) -> ChernTensor:
    ctx = sys.ctx
    n = ctx.n
    idx = ctx.indices
    p = ctx.universe.p
    # T[beta, alpha] = sum_gamma F^{gamma,beta}_{p_gamma p_alpha}
    T = {}
    for beta in idx:
        for alpha in idx:
            acc = ctx.zero()
            for g in idx:
                acc = acc + sys.F(g, beta).diff(p(g)).diff(p(alpha))
            T[(beta, alpha)] = acc
    trace = ctx.zero()
    for g in idx:
        for dd in idx:
            trace = trace + sys.F(g, dd).diff(p(g)).diff(p(dd))
    second = {}
    for b in idx:
        for r in idx:
            for a in idx:
                for s in idx:
                    second[(b, r, a, s)] = sys.F(b, r).diff(p(a)).diff(p(s))
    c1 = Fraction(1, n + 2)
    c2 = Fraction(1, (n + 1) * (n + 2))
    S = {}
    for a in idx:
        for s in idx:
            for b in idx:
                for r in idx:
                    e = (
                        delta(s, r) * T[(b, a)]
                        + delta(a, r) * T[(b, s)]
                        + delta(s, b) * T[(r, a)]
                        + delta(a, b) * T[(r, s)]
                    ) * c1
                    k = delta(s, r) * delta(a, b) + delta(a, r) * delta(s, b)
                    if k:
                        e = e - trace * (c2 * k)
                    S[(a, s, b, r)] = e - second[(b, r, a, s)]
    return ChernTensor(n, S)


# -- verdict ------------------------------------------------------------

@dataclass(frozen=True)
class FlatnessVerdict:
    kind: str  # "flat", "not_cubic" or "cubic_but_not_integrable"
    cubic: CubicForm | None = None
    not_cubic: NotCubicForm | None = None
    witness: tuple[str, tuple[int, ...], RationalExpr] | None = None
    residuals: FlatnessResiduals | None = None

    @property
    def is_flat(self) -> bool:
        return self.kind == "flat"


def is_flat(sys: PdeSystem) -> FlatnessVerdict:
    c = extract_cubic(sys)
    if isinstance(c, NotCubicForm):
        return FlatnessVerdict("not_cubic", not_cubic=c)
    res = flatness_residuals(c)
    bad = res.first_nonzero()
    if bad is not None:
        return FlatnessVerdict("cubic_but_not_integrable", cubic=c, witness=bad, residuals=res)
    return FlatnessVerdict("flat", cubic=c, residuals=res)
