"""Command results and their JSON and text renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from jetflat.symcore import RationalExpr

# Verdicts that map to exit status 0.
POSITIVE = frozenset({"flat", "round-trip ok", "ok", "zero", "compatible"})


@dataclass(frozen=True)
class Witness:
    family: str
    index: tuple[int, ...]
    expr: str


@dataclass
class Report:
    command: str
    n: int | None
    verdict: str
    residual_summary: dict[str, dict[str, int]] = field(default_factory=dict)
    witnesses: list[Witness] = field(default_factory=list)
    outputs: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.verdict in POSITIVE

    def add_family(self, name: str, residuals: Mapping[tuple[int, ...], RationalExpr], *, witness: bool = True) -> int:
        """Count zero and nonzero entries; record the first nonzero one as a witness."""
        nonzero = [k for k in residuals if not residuals[k].is_zero()]
        self.residual_summary[name] = {"zero": len(residuals) - len(nonzero), "nonzero": len(nonzero)}
        if nonzero and witness:
            key = min(nonzero)
            self.witnesses.append(Witness(name, tuple(key), residuals[key].render()))
        return len(nonzero)

    def add_count(self, name: str, zero: int, nonzero: int) -> None:
        self.residual_summary[name] = {"zero": zero, "nonzero": nonzero}

    def nonzero_total(self) -> int:
        return sum(v["nonzero"] for v in self.residual_summary.values())


def as_dict(r: Report, *, timings: bool = False) -> dict[str, Any]:
    out: dict[str, Any] = {
        "command": r.command,
        "n": r.n,
        "verdict": r.verdict,
        "residual_summary": r.residual_summary,
        "witnesses": [{"family": w.family, "index": list(w.index), "expr": w.expr} for w in r.witnesses],
        "outputs": r.outputs,
    }
    if timings:
        out["timings"] = {k: round(v, 3) for k, v in r.timings.items()}
    return out


def render_report(r: Report, fmt: str = "json", *, timings: bool = False) -> bytes:
    if fmt == "json":
        return (json.dumps(as_dict(r, timings=timings), ensure_ascii=False) + "\n").encode()
    if fmt == "text":
        return render_text(r, timings=timings).encode()
    raise ValueError(f"unknown format {fmt!r}")


def _flatten(prefix: str, value: Any) -> list[tuple[str, str]]:
    if isinstance(value, dict):
        rows = []
        for k, v in value.items():
            rows += _flatten(f"{prefix}{k}" if not prefix else f"{prefix} {k}", v)
        return rows
    return [(prefix, str(value))]


def render_text(r: Report, *, timings: bool = False) -> str:
    lines = [f"command: {r.command}"]
    if r.n is not None:
        lines.append(f"n: {r.n}")
    lines.append(f"verdict: {r.verdict}")
    if r.command == "selftest":
        for name, counts in r.residual_summary.items():
            status = "ok" if counts["nonzero"] == 0 else "FAIL"
            lines.append(f"{status:<5} {name} ({counts['zero']} passed, {counts['nonzero']} failed)")
    elif r.residual_summary:
        width = max(len(k) for k in r.residual_summary)
        lines.append(f"{'family':<{width}}  {'zero':>6}  {'nonzero':>7}")
        for name, counts in r.residual_summary.items():
            lines.append(f"{name:<{width}}  {counts['zero']:>6}  {counts['nonzero']:>7}")
    for w in r.witnesses:
        lines.append(f"witness {w.family} {list(w.index)}: {w.expr}")
    for key, value in _flatten("", r.outputs):
        lines.append(f"{key} = {value}")
    if timings:
        for phase, ms in r.timings.items():
            lines.append(f"time {phase}: {ms:.1f} ms")
    return "\n".join(lines) + "\n"
