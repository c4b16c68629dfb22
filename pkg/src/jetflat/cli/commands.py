"""Command implementations: each takes a parsed document and returns a Report."""

from __future__ import annotations

import random
import time
from contextlib import contextmanager
from typing import Callable, Iterator

from jetflat.auxiliary import (
    PiTable,
    ThetaFields,
    compat_residuals,
    cross_diff_residuals,
    pi_from_squares,
    quasi_invert,
    six_family_residuals,
    split_families,
    theta_from_squares,
    theta_system_residuals,
)
from jetflat.cli.parser import InputDocument, InputError
from jetflat.cli.report import Report, Witness
from jetflat.corpus import DEFAULT_SEED, random_cubic_form, random_polynomial, transformation_corpus
from jetflat.cubic import (
    CubicForm,
    NotCubicForm,
    chern_tensor_identity,
    derived_flatness_residuals,
    extract_cubic,
    flatness_residuals,
)
from jetflat.errors import DegenerateJacobian
from jetflat.jetspace import JetContext, PdeSystem, integrability_residuals
from jetflat.transform import (
    PointTransformation,
    VectorField,
    counting_excess,
    determinantal_identities_n2,
    ghlm_from_squares,
    jacobian,
    prolong2,
    prolong2_n2_display,
    pullback_residual,
    squares,
    substitute_system,
    synthesize,
    synthesize_n2_display,
)


@contextmanager
def phase(r: Report, name: str) -> Iterator[None]:
    t0 = time.perf_counter()
    yield
    r.timings[name] = r.timings.get(name, 0.0) + (time.perf_counter() - t0) * 1000


def _require(doc: InputDocument, command: str, *blocks: str) -> str:
    for b in blocks:
        if doc.has(b):
            return b
    need = " or ".join(blocks)
    raise InputError("MissingBlock", f"{command} needs a {need} block")


# Document to domain objects.

def system_of(doc: InputDocument) -> PdeSystem:
    return PdeSystem(doc.ctx, doc.table("system", "F"))


def transformation_of(doc: InputDocument) -> PointTransformation:
    ctx = doc.ctx
    xs = doc.table("transform", "X")
    return PointTransformation(ctx, [xs[(i,)] for i in ctx.indices], doc.table("transform", "Y")[()])


def vector_field_of(doc: InputDocument) -> VectorField:
    ctx = doc.ctx
    xi = doc.table("vectorfield", "XI")
    eta = doc.table("vectorfield", "ETA")
    return VectorField(ctx, [xi.get((i,), ctx.zero()) for i in ctx.indices], eta.get((), ctx.zero()))


def cubic_of(doc: InputDocument) -> CubicForm:
    t = lambda name: doc.table("cubic", name)  # noqa: E731
    return CubicForm(doc.ctx, t("G"), t("H"), t("L"), {k[0]: e for k, e in t("M").items()})


def pi_of(doc: InputDocument) -> PiTable:
    return PiTable(doc.ctx, {(i, j, k): e for (k, i, j), e in doc.table("pi", "Pi").items()})


def theta_of(doc: InputDocument) -> ThetaFields:
    ctx = doc.ctx
    th = doc.table("theta", "Theta")
    return ThetaFields(tuple(th.get((a,), ctx.zero()) for a in ctx.all_indices))


def _nondegenerate(t: PointTransformation) -> None:
    if jacobian(t).is_zero():
        raise DegenerateJacobian("the Jacobian determinant of the transformation vanishes identically")


def _system_outputs(sys: PdeSystem) -> dict[str, str]:
    return {f"F[{i}][{j}]": e.render() for (i, j), e in sys.items()}


def _cubic_outputs(c: CubicForm) -> dict[str, str]:
    return {f"{kind}{''.join(f'[{i}]' for i in key)}": e.render() for kind, key, e in c.entries() if not e.is_zero()}


def _flatness_into(r: Report, c: CubicForm) -> bool:
    res = flatness_residuals(c)
    for name, fam in res.families().items():
        r.add_family(name, fam)
    conds = derived_flatness_residuals(c)
    bad = [(key, cond) for key, lst in conds.items() for cond in lst if not cond.value.is_zero()]
    total = sum(len(lst) for lst in conds.values())
    r.add_count("derived", total - len(bad), len(bad))
    if bad:
        key, cond = bad[0]
        r.witnesses.append(Witness(f"derived {cond.kind}", tuple(key) + tuple(cond.index), cond.value.render()))
    return res.all_zero()


# Commands.

def run_check(doc: InputDocument) -> Report:
    _require(doc, "check", "system")
    r = Report("check", doc.n, "")
    sys = system_of(doc)
    with phase(r, "integrability"):
        r.add_family("integrability", integrability_residuals(sys).residuals)
    with phase(r, "extraction"):
        c = extract_cubic(sys)
    if isinstance(c, NotCubicForm):
        r.add_count("cubic_extraction", 0, 1)
        expr = c.residual.render() if c.residual is not None else c.reason
        r.witnesses.append(Witness("cubic_extraction", c.entry + (c.monomial or ()), expr))
        r.outputs["not_cubic"] = c.reason
        verdict = "not_cubic"
    else:
        r.add_count("cubic_extraction", 1, 0)
        r.outputs["cubic"] = _cubic_outputs(c)
        with phase(r, "flatness"):
            flat = _flatness_into(r, c)
        verdict = "flat" if flat else "cubic_but_not_integrable"
    with phase(r, "chern"):
        r.add_family("chern", chern_tensor_identity(sys).S)
    r.verdict = verdict
    return r


def run_synthesize(doc: InputDocument) -> Report:
    _require(doc, "synthesize", "transform")
    r = Report("synthesize", doc.n, "")
    t = transformation_of(doc)
    _nondegenerate(t)
    with phase(r, "squares"):
        sq = squares(t)
    with phase(r, "synthesis"):
        sys = synthesize(t, sq)
        ghlm = ghlm_from_squares(sq, t.ctx)
    r.outputs["jacobian"] = jacobian(t).render()
    r.outputs["system"] = _system_outputs(sys)
    r.outputs["cubic"] = _cubic_outputs(ghlm)
    with phase(r, "round_trip"):
        r.add_family("integrability", integrability_residuals(sys).residuals)
        c = extract_cubic(sys)
        same = isinstance(c, CubicForm) and c == ghlm
        r.add_count("cubic_extraction", int(same), int(not same))
        flat = _flatness_into(r, ghlm)
        r.add_family("pullback", pullback_residual(t, sys))
        r.add_family("chern", chern_tensor_identity(sys).S)
    ok = same and flat and r.nonzero_total() == 0
    r.verdict = "round-trip ok" if ok else "round-trip failed"
    return r


def run_prolong(doc: InputDocument) -> Report:
    _require(doc, "prolong", "vectorfield")
    r = Report("prolong", doc.n, "ok")
    with phase(r, "prolongation"):
        y2 = prolong2(vector_field_of(doc))
    r.outputs["Y2"] = {f"Y2[{i}][{j}]": e.render() for (i, j), e in y2.Y2.items()}
    return r


def run_chern(doc: InputDocument) -> Report:
    _require(doc, "chern", "system")
    r = Report("chern", doc.n, "")
    with phase(r, "chern"):
        s = chern_tensor_identity(system_of(doc))
    bad = r.add_family("chern", s.S)
    r.verdict = "zero" if bad == 0 else "nonzero"
    return r


def run_pi_check(doc: InputDocument) -> Report:
    source = _require(doc, "pi-check", "pi", "transform")
    r = Report("pi-check", doc.n, "")
    ctx = doc.ctx
    cubic = None
    if source == "pi":
        p = pi_of(doc)
        if doc.has("cubic") and doc.has("theta"):
            cubic, th = cubic_of(doc), theta_of(doc)
    else:
        t = transformation_of(doc)
        _nondegenerate(t)
        with phase(r, "squares"):
            sq = squares(t)
        p = pi_from_squares(sq, ctx)
        cubic, th = ghlm_from_squares(sq, ctx), theta_from_squares(sq)
    with phase(r, "cross_diff"):
        r.add_family("cross_diff", cross_diff_residuals(p))
        for name, fam in split_families(p).families().items():
            r.add_family(name, fam, witness=False)
    if cubic is not None:
        with phase(r, "auxiliary"):
            q = quasi_invert(cubic, th)
            r.add_family("quasi_inversion", {k: q.entries[k] - p.entries[k] for k in p.entries})
            for name, fam in six_family_residuals(cubic, th).families().items():
                r.add_family(f"six:{name}", fam)
            for name, fam in theta_system_residuals(cubic, th).families().items():
                r.add_family(f"theta:{name}", fam)
            for name, fam in compat_residuals(cubic).families().items():
                r.add_family(f"compat:{name}", fam)
    r.verdict = "compatible" if r.nonzero_total() == 0 else "incompatible"
    return r


def _anchor(r: Report, name: str, cases: list[Callable[[], bool]]) -> None:
    with phase(r, name):
        passed = sum(1 for case in cases if case())
    r.add_count(name, passed, len(cases) - passed)


def run_selftest(seed: int = DEFAULT_SEED, max_degree: int = 2, count: int = 6) -> Report:
    """Regression anchors on fixed-seed corpora for n = 2 and n = 3."""
    r = Report("selftest", None, "")
    r.outputs["seed"] = seed
    r.outputs["max_degree"] = max_degree
    for n in (2, 3):
        ctx = JetContext(n)
        rng = random.Random(f"{seed}:selftest:{n}")
        corpus = transformation_corpus(n, count=count, seed=seed, max_degree=max_degree)
        if n == 2:
            _anchor(r, "determinant identities n=2", [lambda t=t: _determinants_vanish(t) for t in corpus])
            fields = [
                VectorField(ctx, [random_polynomial(ctx, rng, max_degree=3, terms=3) for _ in ctx.indices],
                            random_polynomial(ctx, rng, max_degree=3, terms=3))
                for _ in range(count)
            ]
            _anchor(r, "prolongation display n=2", [lambda v=v: prolong2(v).Y2 == prolong2_n2_display(v).Y2 for v in fields])
            _anchor(
                r,
                "synthesis display n=2",
                [lambda t=t: synthesize(t) == synthesize_n2_display(squares(t), ctx) for t in corpus],
            )
        forms = [random_cubic_form(ctx, rng) for _ in range(count)] + [ghlm_from_squares(t) for t in corpus]
        _anchor(r, f"first displayed family equals (I') n={n}", [lambda c=c: _first_family_matches(c) for c in forms])
        _anchor(r, f"round trip n={n}", [lambda t=t: _round_trip(t) for t in corpus])
    _anchor(r, "counting excess n=2..6", [lambda n=n: counting_excess(n) == n + 1 for n in range(2, 7)])
    r.verdict = "ok" if r.nonzero_total() == 0 else "FAIL"
    return r


def _determinants_vanish(t: PointTransformation) -> bool:
    sys = synthesize(t)
    return all(substitute_system(sys, e).is_zero() for e in determinantal_identities_n2(t).values())


def _first_family_matches(c: CubicForm) -> bool:
    mine = six_family_residuals(c, ThetaFields.zero(c.ctx)).g_cross
    ref = flatness_residuals(c).fam1
    return all(mine[k] == ref[k] for k in mine)


def _round_trip(t: PointTransformation) -> bool:
    sys = synthesize(t)
    c = extract_cubic(sys)
    return (
        integrability_residuals(sys).all_zero()
        and isinstance(c, CubicForm)
        and c == ghlm_from_squares(t)
        and flatness_residuals(c).all_zero()
        and all(e.is_zero() for e in pullback_residual(t, sys).values())
    )


COMMANDS = {
    "check": run_check,
    "synthesize": run_synthesize,
    "prolong": run_prolong,
    "chern": run_chern,
    "pi-check": run_pi_check,
}
