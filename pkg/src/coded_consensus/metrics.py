"""Bit-complexity bounds for the coded consensus protocol and measured counts.

All bounds are evaluated exactly with ``Fraction``; ``B`` is the number of bits
needed to broadcast a single bit.  Reports carry the measured ``B`` of the
broadcast primitive in use and, for reference, the bounds evaluated with
``B = n**2``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Iterable

if TYPE_CHECKING:
    from .simnet import RunResult

CATEGORIES = ("step1", "step3", "step5", "step6", "fallback")
RATIO_DIGITS = 6


def _check(n: int, t: int) -> None:
    if t < 0 or n <= 3 * t:
        raise ValueError(f"need n > 3t and t >= 0, got n={n}, t={t}")


def asymptote(n: int, t: int) -> Fraction:
    """Limit of bits sent per agreed bit as L grows: (n(n-1) + t^2) / (n - 2t)."""
    _check(n, t)
    return Fraction(n * (n - 1) + t * t, n - 2 * t)


@dataclass(frozen=True)
class Prediction:
    n: int
    t: int
    D: int
    L: int
    B: int
    step1: Fraction
    step3: Fraction
    step5: Fraction
    step6: Fraction
    fallback_each: Fraction
    max_fallbacks: int
    without_fallback: Fraction
    fallback_total: Fraction
    C_L: Fraction
    asymptote: Fraction

    @property
    def steps56(self) -> Fraction:
        return self.step5 + self.step6

    @property
    def per_generation(self) -> Fraction:
        return self.step1 + self.step3 + self.step5 + self.step6

    @property
    def alpha_bound(self) -> Fraction:
        return self.C_L / self.L

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for k in ("n", "t", "D", "L", "B", "max_fallbacks"):
            out[k] = getattr(self, k)
        for k in ("step1", "step3", "step5", "step6", "fallback_each", "without_fallback",
                  "fallback_total", "C_L", "asymptote", "alpha_bound"):
            out[k] = round(float(getattr(self, k)), RATIO_DIGITS)
        return out


def predict(n: int, t: int, D: int, L: int, B: int) -> Prediction:
    """Evaluate every bound of the complexity analysis at (n, t, D, L, B)."""
    _check(n, t)
    if D <= 0 or L <= 0 or B <= 0:
        raise ValueError("D, L and B must be positive")
    k = n - 2 * t
    nn = n * (n - 1)
    step1 = Fraction(nn * D, k)
    step3 = Fraction(nn * B)
    step5 = Fraction(t * t * D, k)
    step6 = Fraction(t * B)
    fallback_each = Fraction(2 * (nn + t * t) * D * B, k)
    gens = Fraction(L, D)
    without = (step1 + step3 + step5 + step6) * gens
    fb_total = fallback_each * (t + 1) * t
    return Prediction(
        n, t, D, L, B,
        step1=step1,
        step3=step3,
        step5=step5,
        step6=step6,
        fallback_each=fallback_each,
        max_fallbacks=(t + 1) * t,
        without_fallback=without,
        fallback_total=fb_total,
        C_L=without + fb_total,
        asymptote=asymptote(n, t),
    )


def optimal_D_real(n: int, t: int, L: int) -> float:
    if t < 1:
        raise ValueError("t = 0: no fallback cost to balance; use the largest practical D")
    _check(n, t)
    nn = n * (n - 1)
    return math.sqrt((nn + t) * (n - 2 * t) * L / (2 * (nn + t * t) * (t + 1) * t))


def optimal_D(n: int, t: int, L: int, B: int | None = None) -> int:
    """Generation size balancing per-generation broadcast cost against fallbacks.

    ``B`` cancels out of the optimum and is accepted only for symmetry with
    ``predict``.  The result is the multiple of ``n - 2t`` closest to the real
    optimum whose symbol width m satisfies 2^m >= n.
    """
    k = n - 2 * t
    real = optimal_D_real(n, t, L)
    m_min = max(1, math.ceil(math.log2(n)))
    m = max(m_min, round(real / k))
    return m * k


@dataclass
class ComplexityReport:
    n: int
    t: int
    D: int
    L: int
    per_generation: list[dict[str, Any]] = field(default_factory=list)
    measured_B: dict[tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_outcomes(cls, n, t, D, L, outcomes, measured_B) -> "ComplexityReport":
        from .diagnosis import reduced_params

        rows = []
        for o in outcomes:
            nr, tr = reduced_params(o.graph_before)
            rows.append({"generation": o.generation, "n": nr, "t": tr, "path": o.path,
                         "bits": {c: o.bits.get(c, 0) for c in CATEGORIES}})
        return cls(n, t, D, L, rows, dict(measured_B))

    @property
    def totals(self) -> dict[str, int]:
        out = dict.fromkeys(CATEGORIES, 0)
        for r in self.per_generation:
            for c in CATEGORIES:
                out[c] += r["bits"][c]
        return out

    @property
    def total(self) -> int:
        return sum(self.totals.values())

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.total, self.L)

    @property
    def asymptote(self) -> Fraction:
        return asymptote(self.n, self.t)

    @property
    def paths(self) -> Counter:
        return Counter(r["path"] for r in self.per_generation)

    @property
    def B(self) -> int:
        """Measured broadcast cost per bit at the initial (n, t)."""
        from .bitcast import bits_per_bit

        return self.measured_B.get((self.n, self.t)) or bits_per_bit(self.n, self.t)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "t": self.t,
            "D": self.D,
            "L": self.L,
            "measured_B": self.B,
            "totals": self.totals,
            "total": self.total,
            "alpha": round(float(self.alpha), RATIO_DIGITS),
            "asymptote": round(float(self.asymptote), RATIO_DIGITS),
            "paths": dict(sorted(self.paths.items())),
            "per_generation": self.per_generation,
        }


@dataclass(frozen=True)
class Verdict:
    check: str
    measured: Any
    bound: Any
    ok: bool
    detail: str = ""


def compare(report: ComplexityReport, predicted: Prediction | None = None) -> list[Verdict]:
    """Check measured counts against the bounds; empty for an empty report.

    Per-generation bounds use the reduced (n, t) of that generation and the
    measured B there.  The code dimension never shrinks, so symbols keep the
    width D / (n0 - 2t0) of the original network.  The fallback cost is only counted, not bounded: the
    fallback used here is not the one the fallback-cost formula describes.
    """
    if not report.per_generation:
        return []
    from .bitcast import bits_per_bit

    out: list[Verdict] = []
    k = report.n - 2 * report.t
    worst = dict.fromkeys(("step1", "step3", "step5", "step6"), True)
    detail = dict.fromkeys(worst, "")
    for r in report.per_generation:
        n, t = r["n"], r["t"]
        B = report.measured_B.get((n, t)) or bits_per_bit(n, t)
        nn = n * (n - 1)
        bounds = {
            "step1": Fraction(nn * report.D, k),
            "step3": Fraction(nn * B),
            "step5": Fraction(t * t * report.D, k),
            "step6": Fraction(t * B),
        }
        for c, b in bounds.items():
            if r["bits"][c] > b:
                worst[c] = False
                detail[c] = detail[c] or f"generation {r['generation']}: {r['bits'][c]} > {b}"
    totals = report.totals
    for c in worst:
        out.append(Verdict(f"{c} per-generation bound", totals[c], "per generation", worst[c], detail[c]))
    fallbacks = report.paths.get("fallback", 0)
    cap = (report.t + 1) * report.t
    out.append(Verdict("fallback count", fallbacks, cap, fallbacks <= cap))
    pred = predicted or predict(report.n, report.t, report.D, report.L, report.B)
    no_fb = report.total - totals["fallback"]
    out.append(Verdict("bits outside fallback vs C(L) first terms", no_fb,
                       round(float(pred.without_fallback), RATIO_DIGITS),
                       no_fb <= pred.without_fallback))
    if all(r["path"] == "normal" for r in report.per_generation):
        out.append(Verdict("alpha >= asymptote on fast path",
                           round(float(report.alpha), RATIO_DIGITS),
                           round(float(report.asymptote), RATIO_DIGITS),
                           report.alpha >= report.asymptote))
    return out


def summary_row(result: "RunResult") -> dict[str, Any]:
    rep = result.report
    verdicts = compare(rep)
    failed = [v.check for v in verdicts if not v.ok] + list(result.violations)
    paths = rep.paths
    pred_n2 = predict(rep.n, rep.t, rep.D, rep.L, rep.n * rep.n)
    row = {
        "scenario": result.scenario.name,
        "n": rep.n,
        "t": rep.t,
        "D": rep.D,
        "L": rep.L,
        "default": paths.get("default", 0),
        "normal": paths.get("normal", 0),
        "fallback": paths.get("fallback", 0),
    }
    row.update({f"bits_{c}": v for c, v in rep.totals.items()})
    row.update({
        "bits_total": rep.total,
        "measured_B": rep.B,
        "alpha": f"{float(rep.alpha):.{RATIO_DIGITS}f}",
        "asymptote": f"{float(rep.asymptote):.{RATIO_DIGITS}f}",
        "C_L_bound_measured_B": f"{float(predict(rep.n, rep.t, rep.D, rep.L, rep.B).C_L):.{RATIO_DIGITS}f}",
        "C_L_bound_B_n2": f"{float(pred_n2.C_L):.{RATIO_DIGITS}f}",
        "verdict": "pass" if not failed else "fail: " + "; ".join(failed),
    })
    return row
