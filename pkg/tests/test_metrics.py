import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from coded_consensus import metrics
from coded_consensus.bitcast import bits_per_bit
from coded_consensus.library import persistent_adversary
from coded_consensus.metrics import ComplexityReport, asymptote, compare, optimal_D, optimal_D_real, predict
from coded_consensus.simnet import run_scenario, scenario_from_dict


def test_predict_n4_t1_d8():
    p = predict(4, 1, 8, 800, 9)
    assert p.step1 == 48 and p.step5 == 4
    assert p.step3 == 12 * 9 and p.step6 == 9
    assert p.asymptote == Fraction(13, 2)
    assert p.fallback_each == Fraction(2 * 13 * 8 * 9, 2)
    assert p.max_fallbacks == 2
    assert p.C_L == (48 + 108 + 4 + 9) * 100 + 2 * p.fallback_each


def test_asymptote_examples():
    for n in range(1, 9):
        assert asymptote(n, 0) == n - 1
    assert asymptote(7, 2) == Fraction(46, 3)
    with pytest.raises(ValueError):
        asymptote(6, 2)


@given(st.integers(1, 6), st.data())
def test_alpha_bound_tends_to_asymptote(t, data):
    n = data.draw(st.integers(3 * t + 1, 3 * t + 8))
    k = n - 2 * t
    B = bits_per_bit(n, t) if n <= 7 else n * n
    D = k * 2 ** 20
    p = predict(n, t, D, D * 2 ** 40, B)
    assert p.alpha_bound > p.asymptote
    assert p.alpha_bound - p.asymptote < Fraction(1, 1000) * p.asymptote


def test_predict_rejects_bad_params():
    for args in [(3, 1, 8, 8, 9), (4, 1, 0, 8, 9), (4, 1, 8, 8, 0)]:
        with pytest.raises(ValueError):
            predict(*args)


def test_optimal_d():
    assert optimal_D_real(4, 1, 10 ** 6) == pytest.approx(math.sqrt(13 * 2 * 10 ** 6 / (2 * 13 * 2)))
    assert optimal_D(4, 1, 10 ** 6) == 708
    assert optimal_D(4, 1, 10) == 4  # m >= 2 so that 2^m >= n
    assert optimal_D(7, 2, 10 ** 6) % 3 == 0
    with pytest.raises(ValueError):
        optimal_D(4, 0, 100)


def test_optimal_d_grows_as_sqrt_l():
    ratios = [optimal_D_real(7, 2, L * 100) / optimal_D_real(7, 2, L) for L in (10 ** 4, 10 ** 6, 10 ** 8)]
    assert ratios == pytest.approx([10, 10, 10])


def test_optimal_d_minimizes_bound():
    n, t, L = 4, 1, 10 ** 6
    B = bits_per_bit(n, t)

    def c(D):
        # C(L) as a real function of D
        nn = n * (n - 1)
        return (nn + t * t) * L / (n - 2 * t) + (nn + t) * B * L / D \
            + 2 * (nn + t * t) * D * B / (n - 2 * t) * (t + 1) * t

    best = optimal_D_real(n, t, L)
    for factor in (0.5, 0.9, 1.1, 2):
        assert c(best) <= c(best * factor)


def test_compare_fault_free_passes():
    res = run_scenario(scenario_from_dict({"n": 4, "t": 1, "m": 4, "generations": 5}))
    verdicts = compare(res.report)
    assert verdicts and all(v.ok for v in verdicts)
    g0 = res.report.per_generation[0]["bits"]
    assert (g0["step1"], g0["step3"], g0["step5"], g0["step6"]) == (48, 108, 4, 9)


def test_compare_fallback_heavy_run():
    n, t, gens = 7, 2, 8
    sc = scenario_from_dict({"n": n, "t": t, "m": 3, "generations": gens, "faulty": [0, 3]})
    sc.script = persistent_adversary(n, (0, 3), gens)
    res = run_scenario(sc)
    v = {x.check: x for x in compare(res.report)}
    assert v["fallback count"].ok and v["fallback count"].measured == res.fallbacks
    assert all(x.ok for x in v.values())


def test_compare_flags_violation():
    rep = ComplexityReport(4, 1, 8, 8, [{"generation": 0, "n": 4, "t": 1, "path": "normal",
                                          "bits": {"step1": 49, "step3": 108, "step5": 4, "step6": 9, "fallback": 0}}],
                           {(4, 1): 9})
    bad = [v for v in compare(rep) if not v.ok]
    assert [v.check for v in bad] == ["step1 per-generation bound", "bits outside fallback vs C(L) first terms"]
    assert "49 > 48" in bad[0].detail


def test_compare_empty_report():
    assert compare(ComplexityReport(4, 1, 8, 0)) == []


def test_report_totals_and_alpha():
    res = run_scenario(scenario_from_dict({"n": 4, "t": 1, "m": 4, "generations": 3}))
    rep = res.report
    assert rep.total == sum(rep.totals.values()) == 3 * (48 + 108 + 4 + 9)
    assert rep.alpha == Fraction(rep.total, 24)
    assert rep.B == 9
    row = metrics.summary_row(res)
    assert row["verdict"] == "pass" and row["bits_total"] == rep.total
