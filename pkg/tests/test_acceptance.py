"""Acceptance gate: the eight release criteria, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
print.  Every Monte Carlo computation is pinned to ACCEPT_SEED, so reruns
are exact; tolerances are the stated criteria, not post-hoc fits.
Total runtime is around half a minute.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats as st

from qqlineup.experiment import ExperimentConfig, classical_power, generate_study
from qqlineup.geometry import (
    QQDesign,
    ReferenceLine,
    build_panel,
    envelope_half_widths,
    robust_reference_line,
)
from qqlineup.lineup import LineupSpec, assemble_lineup
from qqlineup.normality import (
    ad_test,
    build_null_table,
    cvm_test,
    ks_statistic,
    lilliefors_test,
    sw_test,
)
from qqlineup.numeric import (
    SampleVector,
    normal_quantile,
    plotting_positions,
    sample_normal,
)
from qqlineup.rng import RngStream
from qqlineup.visual import DEFAULT_ALPHAS, binomial_tail, critical_count, visual_p_value

ACCEPT_SEED = 20260817


def report(index, name, ok, detail):
    print(f"ACCEPTANCE [{index}/8] {name}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def calibration_rates():
    """Null rejection rate per (method, n): 10,000 N(0,1) samples per n.

    The Lilliefors table gets 40,000 calibration reps so its own quantile
    noise stays well inside the acceptance tolerance.
    """
    reps = 10_000
    rates = {}
    for n in (20, 30, 50, 75):
        table = build_null_table(
            "lf", n, 40_000, RngStream(ACCEPT_SEED, f"acceptance/calibration/lf-table/n={n}")
        )
        gen = RngStream(ACCEPT_SEED, f"acceptance/calibration/draws/n={n}").generator()
        counts = {"sw": 0, "ad": 0, "lf": 0, "cvm": 0}
        for _ in range(reps):
            x = SampleVector(gen.standard_normal(n))
            if sw_test(x).p_value <= 0.05:
                counts["sw"] += 1
            if ad_test(x).p_value <= 0.05:
                counts["ad"] += 1
            if cvm_test(x).p_value <= 0.05:
                counts["cvm"] += 1
            if lilliefors_test(x, table).p_value <= 0.05:
                counts["lf"] += 1
        for method, c in counts.items():
            rates[(method, n)] = c / reps
    return rates


@pytest.fixture(scope="module")
def power_reports():
    """Two 5,000-rep sweeps: df at n=30, and n at df=5 (holds the t5/n=50 cell)."""
    run_df = classical_power(
        ExperimentConfig(dfs=(2.0, 5.0, 10.0), ns=(30,), mc_reps=5000, seed=ACCEPT_SEED)
    )
    run_n = classical_power(
        ExperimentConfig(dfs=(5.0,), ns=(20, 30, 50, 75), mc_reps=5000, seed=ACCEPT_SEED)
    )
    return run_df, run_n


def test_1_null_calibration(calibration_rates):
    deviations = {key: rate - 0.05 for key, rate in calibration_rates.items()}
    worst_key = max(deviations, key=lambda k: abs(deviations[k]))
    ok = all(abs(d) <= 0.007 for d in deviations.values())
    report(
        1,
        "null calibration (sw/ad/lf/cvm, n=20..75, 10k reps)",
        ok,
        f"{sum(abs(d) <= 0.007 for d in deviations.values())}/16 cells in 0.05±0.007, "
        f"worst dev {deviations[worst_key]:+.4f} at {worst_key}",
    )
    assert ok, f"cells out of tolerance: { {k: v for k, v in calibration_rates.items() if abs(v - 0.05) > 0.007} }"


def test_2_power_ordering(power_reports):
    _, run_n = power_reports
    sw = run_n.cell(5.0, 50, "sw")
    ad = run_n.cell(5.0, 50, "ad")
    cvm = run_n.cell(5.0, 50, "cvm")
    se_comb = math.sqrt(sw.se**2 + cvm.se**2)
    gap_ok = sw.power - cvm.power > 2 * se_comb
    order_ok = sw.power >= ad.power >= cvm.power
    ok = gap_ok and order_ok
    report(
        2,
        "power ordering at (t5, n=50, 5k reps)",
        ok,
        f"sw={sw.power:.4f} ad={ad.power:.4f} cvm={cvm.power:.4f}, "
        f"sw-cvm={sw.power - cvm.power:.4f} > 2SE={2 * se_comb:.4f}",
    )
    assert gap_ok, "SW does not beat CvM by 2 combined SEs"
    assert order_ok, "weak ordering SW >= AD >= CvM violated"


def test_3_power_monotonicity(power_reports):
    run_df, run_n = power_reports
    failures = []
    for method in ("sw", "ad", "lf", "cvm", "ks"):
        df_cells = [run_df.cell(d, 30, method) for d in (2.0, 5.0, 10.0)]
        for a, b in zip(df_cells, df_cells[1:]):
            slack = 2 * math.sqrt(a.se**2 + b.se**2)
            if a.power < b.power - slack:
                failures.append(f"{method}: df {a.df}->{b.df} rises {a.power:.4f}->{b.power:.4f}")
        n_cells = [run_n.cell(5.0, n, method) for n in (20, 30, 50, 75)]
        for a, b in zip(n_cells, n_cells[1:]):
            slack = 2 * math.sqrt(a.se**2 + b.se**2)
            if b.power < a.power - slack:
                failures.append(f"{method}: n {a.n}->{b.n} falls {a.power:.4f}->{b.power:.4f}")
    ok = not failures
    report(
        3,
        "power monotone in df (2,5,10 at n=30) and n (20..75 at df=5)",
        ok,
        "5 methods x 5 adjacent pairs within 2 SE" if ok else "; ".join(failures),
    )
    assert ok, failures


def exact_tail(k, n, m):
    if k <= 0:
        return Fraction(1)
    if k > n:
        return Fraction(0)
    p = Fraction(1, m)
    return sum(
        Fraction(math.comb(n, j)) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1)
    )


def test_4_visual_p_value_oracle():
    worst = 0.0
    for m in (10, 20):
        for n in range(1, 31):
            for k in range(0, n + 2):
                err = abs(binomial_tail(k, n, 1.0 / m) - float(exact_tail(k, n, m)))
                worst = max(worst, err)
                err_p = abs(visual_p_value(float(min(k, n)), n, m) - float(exact_tail(min(k, n), n, m)))
                worst = max(worst, err_p)
            for alpha in DEFAULT_ALPHAS:
                want = next(k for k in range(1, n + 2) if exact_tail(k, n, m) <= alpha)
                assert critical_count(n, m, alpha) == want, (n, m, alpha)
    fixtures_ok = (
        visual_p_value(3, 27, 20) > 0.05
        and visual_p_value(16, 27, 20) <= 0.05
        and visual_p_value(23, 26, 20) <= 0.05
        and critical_count(20, 20, 0.05) == 4
    )
    ok = worst < 1e-12 and fixtures_ok
    report(
        4,
        "visual p-value vs exhaustive enumeration (N<=30, m=10,20)",
        ok,
        f"max |err| {worst:.2e}; fixtures y=3/27 keep, y=16/27 & y=23/26 reject, y_.05(20,20)=4",
    )
    assert worst < 1e-12
    assert fixtures_ok


def test_5_geometry_identities():
    worst_detrend = 0.0
    worst_match = 0.0
    for seed, n, line in ((1, 20, ReferenceLine(2.0, 1.0)), (2, 50, ReferenceLine(0.7, -0.4))):
        exact = SampleVector(
            [line.at(normal_quantile(p)) for p in plotting_positions(n)]
        )
        det = build_panel(exact, QQDesign.DETRENDED, line)
        worst_detrend = max(worst_detrend, float(np.max(np.abs(det.ordinates))))
        x = sample_normal(RngStream(seed, "acceptance/geom"), n)
        std_p = build_panel(x, QQDesign.STANDARD, "robust")
        det_p = build_panel(x, QQDesign.DETRENDED, "robust")
        line_vals = np.array([std_p.line.at(float(t)) for t in std_p.theoretical])
        worst_match = max(
            worst_match, float(np.max(np.abs((std_p.ordinates - line_vals) - det_p.ordinates)))
        )
    ok = worst_detrend <= 1e-12 and worst_match <= 1e-12
    report(
        5,
        "geometry identities (de-trend of exact fit; standard minus line)",
        ok,
        f"max de-trended residual {worst_detrend:.2e}, max mismatch {worst_match:.2e}",
    )
    assert ok


def test_6_envelope_coverage():
    n, reps, level = 50, 10_000, 0.95
    h = envelope_half_widths(n, 1.0, level)
    z = np.array([normal_quantile(p) for p in plotting_positions(n)])
    draws = np.sort(
        RngStream(ACCEPT_SEED, "acceptance/coverage").generator().standard_normal((reps, n)),
        axis=1,
    )
    fractions = {}
    for i_one in (13, 25):
        i = i_one - 1
        fractions[i_one] = float(np.mean(np.abs(draws[:, i] - z[i]) <= h[i]))
    ok = all(abs(f - level) <= 0.015 for f in fractions.values())
    report(
        6,
        "envelope coverage (n=50, order stats 13 and 25, 10k reps)",
        ok,
        f"i=13: {fractions[13]:.4f}, i=25: {fractions[25]:.4f}, band 0.95±0.015",
    )
    assert ok, fractions


def test_7_factorial_reproduction(tmp_path):
    cfg = ExperimentConfig()
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    manifest = generate_study(cfg, a_dir)
    generate_study(cfg, b_dir)
    lineups = len(manifest["lineups"])
    datasets = len({r["dataset_id"] for r in manifest["lineups"]})
    names = sorted(p.name for p in a_dir.iterdir())
    identical = names == sorted(p.name for p in b_dir.iterdir()) and all(
        (a_dir / nm).read_bytes() == (b_dir / nm).read_bytes() for nm in names
    )

    data = sample_normal(RngStream(ACCEPT_SEED, "acceptance/placement-data"), 5)
    counts = np.zeros(20, dtype=int)
    for s in range(2000):
        lu = assemble_lineup(
            LineupSpec(data, design="control", hypothesis="standard_normal", m=20, seed=s)
        )
        counts[lu.data_position - 1] += 1
    chi2 = float(np.sum((counts - 100.0) ** 2 / 100.0))
    crit = float(st.chi2.ppf(0.99, 19))
    uniform_ok = chi2 < crit

    ok = lineups == 144 and datasets == 48 and identical and uniform_ok
    report(
        7,
        "factorial: 144 lineups / 48 datasets, byte-identical, placement uniform",
        ok,
        f"{lineups} lineups, {datasets} datasets, identical={identical}, "
        f"chi2={chi2:.2f} < {crit:.2f} over 2000 generations",
    )
    assert lineups == 144 and datasets == 48
    assert identical
    assert uniform_ok, f"chi2 {chi2:.2f} >= {crit:.2f}"


def test_8_spot_values():
    ks = ks_statistic(SampleVector([-1.0, 0.0, 1.0]), 0.0, 1.0)
    sw = sw_test(SampleVector([1.0, 2.0, 3.0])).statistic
    ks_ok = abs(ks - 0.17466) <= 1e-4
    sw_ok = abs(sw - 1.0) <= 1e-9
    ok = ks_ok and sw_ok
    report(
        8,
        "classical spot values",
        ok,
        f"ks({{-1,0,1}})={ks:.5f} (target 0.17466±1e-4), sw({{1,2,3}})={sw:.12f} (target 1±1e-9)",
    )
    assert ok
