"""Acceptance gate: one recorded check per stated criterion.

Each check is logged through the ``record`` fixture and summarised at the end
of the run.  Checks that cannot be met as stated run unchanged under
``xfail(strict=True)``: they print FAIL, and the suite turns red if they ever
start passing.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from interwoven_pdc import bell, lhv, paradox, reference, reproduce, symbolic
from interwoven_pdc import fock
from interwoven_pdc import network as net

G = 0.1
GF = Fraction(1, 10)
GRID = [k * 0.01 * math.pi for k in range(200)]
known_failure = pytest.mark.xfail(strict=True, reason="unattainable as stated; see ledger")


def cold_caches():
    symbolic._source_cache.clear()
    symbolic._evolved_cache.clear()


def fmt_series(series: dict) -> str:
    return "{" + ", ".join(f"cos^{j}: {a}" for j, a in sorted(series.items())) + "}"


def leading_ch_series(parties: int, terms) -> dict:
    """Exact leading ``|g|^(2N)`` cos-series of a combination of event probabilities."""
    p = parties
    model = bell.SymbolicModel(parties, GF, math.pi, order=max(4, parties))
    total = {}
    for coef, event in terms:
        row = model.polynomial(event).cos_series().get(p, {})
        for j, a in row.items():
            total[j] = total.get(j, 0) + coef * a
    return {j: a for j, a in total.items() if a}


# --- criterion 1 -------------------------------------------------------------

def test_c1_reference_amplitudes(record):
    cold_caches()
    t0 = time.perf_counter()
    rows = reproduce.amplitude_rows(4)
    elapsed = time.perf_counter() - t0
    s = reproduce.summary(rows)["counts"]
    ok = s["fail"] == 0 and s["skipped"] == 0 and elapsed < 5
    assert record(1, "reference amplitudes exact (order 4, all-off)", ok,
                  f"{s['pass']} terms exact incl. completeness, 0 fail, {elapsed:.2f} s (< 5 s)")


# --- criterion 2 -------------------------------------------------------------

def test_c2_probability_table(record):
    cold_caches()
    t0 = time.perf_counter()
    rows = reproduce.probability_rows(4)
    elapsed = time.perf_counter() - t0
    s = reproduce.summary(rows)["counts"]
    classes = len(reference.PROBABILITY_TABLE)
    ok = s["fail"] == 0 and s["skipped"] == 0 and elapsed < 30
    assert record(2, "probability table coefficient-exact", ok,
                  f"{classes} formula classes, {s['pass']} coefficients exact, "
                  f"{elapsed:.2f} s (< 30 s)")


# --- criterion 3 -------------------------------------------------------------

def test_c3_leading_order_formula(record):
    series = leading_ch_series(3, bell.lifted_ch_terms((0, 1), {2: 2}))
    ok = series == {0: -1, 1: -2}
    assert record(3, "CH = -|g|^6 (1 + 2 cos S) at leading order", ok,
                  f"exact |g|^6 coefficients {fmt_series(series)}")


def test_c3_maximum_at_pi(record):
    values = [bell.lifted_ch_value(bell.SymbolicModel(3, G, phi)) for phi in GRID]
    k = int(np.argmax(values))
    exact = bell.lifted_ch_value(bell.SymbolicModel(3, GF, math.pi))
    ok = GRID[k] == pytest.approx(math.pi) and exact == GF ** 6
    assert record(3, "maximum |g|^6 at S = pi", ok,
                  f"argmax {GRID[k] / math.pi:.2f}pi, exact value {exact} = |g|^6")


def _leading_window():
    values = [bell.lifted_ch_value(bell.LeadingOrderModel(3, G, phi)) for phi in GRID]
    inside = [phi for phi, v in zip(GRID, values) if v > 0]
    return min(inside), max(inside)


def test_c3_window_derived(record):
    lo, hi = _leading_window()
    ok = lo > 2 * math.pi / 3 and hi < 4 * math.pi / 3 \
        and lo - 0.01 * math.pi < 2 * math.pi / 3 and hi + 0.01 * math.pi > 4 * math.pi / 3
    assert record(3, "violation window is (2pi/3, 4pi/3) on the 0.01pi grid", ok,
                  f"positive on [{lo / math.pi:.2f}pi, {hi / math.pi:.2f}pi]")


@known_failure
def test_c3_window_as_stated(record):
    lo, hi = _leading_window()
    stated = [phi for phi in GRID if math.pi / 2 < phi < 3 * math.pi / 2]
    ok = (lo, hi) == (min(stated), max(stated))
    assert record(3, "violation window equals (pi/2, 3pi/2) on the 0.01pi grid", ok,
                  f"stated grid run [{min(stated) / math.pi:.2f}pi, {max(stated) / math.pi:.2f}pi]"
                  f" vs computed [{lo / math.pi:.2f}pi, {hi / math.pi:.2f}pi]", known=True)


def test_c3_table_convention_band(record):
    # the order-4 truncated probabilities carry no |g|^8 term in CH
    worst = max(abs(bell.lifted_ch_value(bell.SymbolicModel(3, G, phi))
                    - bell.lifted_ch_value(bell.LeadingOrderModel(3, G, phi))) for phi in GRID)
    ok = worst <= 5 * G ** 8
    assert record(3, "order-4 truncated value within 5|g|^8 of leading order", ok,
                  f"max deviation {worst:.3g} over the grid, bound {5 * G ** 8:.3g}")


@known_failure
def test_c3_full_order_band(record):
    phases = [k * 0.1 * math.pi for k in range(20)]
    devs = [abs(bell.lifted_ch_value(bell.on_off_behavior(G, phi))
                - bell.lifted_ch_value(bell.LeadingOrderModel(3, G, phi))) for phi in phases]
    k = int(np.argmax(devs))
    ok = devs[k] <= 5 * G ** 8
    assert record(3, "full-order numeric value within 5|g|^8 of leading order", ok,
                  f"max deviation {devs[k]:.4g} = {devs[k] / G ** 8:.1f}|g|^8 at "
                  f"{phases[k] / math.pi:.1f}pi", known=True)


# --- criterion 4 -------------------------------------------------------------

def test_c4_numeric_symbolic_cross_validation(record):
    t0 = time.perf_counter()
    rows = []
    for phase_sum in (0.0, math.pi / 3, math.pi, 1.3):
        rows += reproduce.deviation_rows([0.02, 0.05, 0.1], phase_sum)
    elapsed = time.perf_counter() - t0
    fails = [r for r in rows if r.status != "pass"]
    worst = max(float(r.deviation) / (100 * float(r.term[2:]) ** 10) for r in rows)
    ok = not fails and elapsed < 120
    assert record(4, "numeric vs symbolic within 100|g|^10", ok,
                  f"{len(rows)} probabilities at 4 phase sums, worst at {worst:.2g} of the bound, "
                  f"{elapsed:.1f} s (< 120 s)")


# --- criterion 5 -------------------------------------------------------------

@pytest.fixture(scope="module")
def on_off_certificate():
    verdict = lhv.lhv_feasible(bell.on_off_behavior(G, math.pi))
    return verdict, lhv.certificate_to_inequality(verdict.certificate)


def test_c5_on_off_infeasible(record, on_off_certificate):
    verdict, ineq = on_off_certificate
    cert = verdict.certificate
    value = ineq.value(bell.on_off_behavior(G, math.pi))
    ok = not verdict.feasible and cert.local_bound() <= 1e-11 and value > 0
    assert record(5, "on/off at g = 0.1, S = pi is LHV-infeasible", ok,
                  f"Farkas certificate: local max {cert.local_bound():.2g}, "
                  f"violation {value:.6g} at unit max coefficient")


def test_c5_certificate_in_lifted_ch_cone(record, on_off_certificate):
    _, ineq = on_off_certificate
    parts = lhv.decompose_lifted_ch(ineq)
    text = " + ".join(f"{w:.6f}*{lhv.describe_variant(d)}" for w, d in parts or [])
    ok = parts is not None and all(w == pytest.approx(1 / 3, abs=1e-9) for w, _ in parts)
    assert record(5, "certificate is a positive sum of lifted CH inequalities", ok,
                  text or "no decomposition")


@known_failure
def test_c5_certificate_single_lifted_ch(record, on_off_certificate):
    _, ineq = on_off_certificate
    match = lhv.match_lifted_ch(ineq)
    assert record(5, "certificate equals one lifted CH up to scaling", match is not None,
                  "cyclic symmetry of the behavior yields the symmetric sum of the three "
                  "lifted CH variants", known=True)


def test_c5_phases_only_full_grid(record):
    t0 = time.perf_counter()
    report = lhv.phase_sweep_lp(3, [G], 0.1 * math.pi, scenario="phases-only")
    elapsed = time.perf_counter() - t0
    ok = report.all_feasible and len(report.rows) == 5720 and elapsed < 600
    assert record(5, "phases-only, 0.1pi grid, g = 0.1: all feasible", ok,
                  f"{len(report.rows)} symmetry classes, {len(report.infeasible)} infeasible, "
                  f"{elapsed:.0f} s (< 600 s)")


# --- criterion 6 -------------------------------------------------------------

def test_c6_exact_thresholds(record):
    rep = bell.visibility_thresholds()
    ok = rep.exact_ch == Fraction(1, 2) and rep.exact_genuine == Fraction(5, 8)
    assert record(6, "leading-order thresholds exact", ok,
                  f"CH {rep.exact_ch}, genuine {rep.exact_genuine}")


def _full_order_thresholds(g):
    on = bell.on_off_behavior(g, math.pi)
    avg = bell.phase_averaged_behavior(g)
    ch = bell.bisect_root(lambda v: bell.lifted_ch_value(on.mix(avg, v)), tol=1e-7)
    gen = bell.bisect_root(lambda v: bell.genuine_tripartite_value(on.mix(avg, v)), tol=1e-7)
    return ch, gen


def test_c6_full_order_small_g(record):
    ch, gen = _full_order_thresholds(0.05)
    ok = abs(ch - 0.5) < 0.01 and abs(gen - 0.625) < 0.01
    assert record(6, "full-order bisection within 0.01 at g = 0.05", ok,
                  f"CH {ch:.4f}, genuine {gen:.4f}")


@known_failure
def test_c6_full_order_at_g_01(record):
    ch, gen = _full_order_thresholds(G)
    ok = abs(ch - 0.5) < 0.01 and abs(gen - 0.625) < 0.01
    assert record(6, "full-order bisection within 0.01 at g = 0.1", ok,
                  f"CH {ch:.4f}, genuine {gen:.4f}; shift is O(|g|^2)", known=True)


# --- criterion 7 -------------------------------------------------------------

def test_c7_four_and_five_parties(record):
    series = leading_ch_series(4, bell.lifted_ch_terms((0, 1), {2: 2, 3: 2}))
    m4 = bell.SymbolicModel(4, GF, math.pi)
    at_pi = bell.doubly_lifted_ch_value(m4)
    outside = [phi for phi in GRID if not math.pi / 2 < phi < 3 * math.pi / 2]
    lead_ok = all(-(1 + 2 * math.cos(phi)) <= 1e-15 for phi in outside)
    full_ok = all(bell.doubly_lifted_ch_value(bell.SymbolicModel(4, G, phi)) <= 0
                  for phi in outside)
    m5 = bell.n_lifted_ch_value(bell.SymbolicModel(5, GF, math.pi, order=5))
    ok = series == {0: -1, 1: -2} and at_pi == GF ** 8 and lead_ok and full_ok \
        and m5 == GF ** 10
    assert record(7, "N = 4 doubly lifted CH and N = 5 lifted CH", ok,
                  f"N=4 |g|^8 coefficients {fmt_series(series)}, value at pi {at_pi}, "
                  f"<= 0 on {len(outside)} grid points outside (pi/2, 3pi/2); N=5 value {m5}")


# --- criterion 8 -------------------------------------------------------------

def test_c8_paradox(record):
    off = symbolic.series_probability(3, (False,) * 3, (0, 1, 2), 4).cos_series()
    on = symbolic.series_probability(3, (True,) * 3, (0, 1, 2), 3).cos_series()
    on_at_pi = sum(a * symbolic.chebyshev_t(j, Fraction(-1)) for j, a in on[3].items())
    gs = np.linspace(1e-3, G, 100)
    gaps = [paradox.paradox_gap(3, g, math.pi).gap for g in gs]
    numeric_gaps = [paradox.numeric_paradox_gap(g).gap for g in gs[::10]]
    budget = paradox.degradation_budget(G)
    ok = (off[3] == {0: 1} and on_at_pi == 0 and min(gaps) > 0 and min(numeric_gaps) > 0
          and budget.survives)
    assert record(8, "GHZ/Hardy paradox", ok,
                  f"P(+++|off) leading {off[3][0]}|g|^6, P(+++|on, pi) |g|^6 coefficient "
                  f"{on_at_pi}; gap > 0 on {len(gs)} points of [0.001, 0.1] (min {min(gaps):.3g}); budget "
                  f"{budget.budget:.3g} < gap {budget.gap:.3g}")


# --- criterion 9 -------------------------------------------------------------

def test_c9_no_signaling(record):
    worst = max(bell.on_off_behavior(g, phi).signaling_error()
                for g in (0.05, 0.1, 0.2) for phi in (0.0, 1.3, math.pi))
    assert record(9, "no-signaling", worst < 1e-10, f"max marginal mismatch {worst:.2g}")


def test_c9_unitarity(record):
    worst = 0.0
    for g in (0.05, 0.1):
        network = net.build_ring_network(3, g)
        for pumps in ((False,) * 3, (True,) * 3, (True, False, True)):
            report = net.evolve_network(network, [(p, 0.7) for p in pumps])
            worst = max(worst, abs(fock.norm_sq(report.final_state) - 1), report.leaked_weight)
    assert record(9, "unitarity", worst < 1e-10, f"max |norm - 1| or leak {worst:.2g}")


def test_c9_phase_sum_dependence(record):
    rng = np.random.default_rng(0)
    network = net.build_ring_network(3, G)
    worst = 0.0
    for _ in range(10):
        phases = rng.uniform(0, 2 * math.pi, 3)
        a = net.subset_probabilities(net.evolve_network(network, [(True, p) for p in phases]), 3)
        b = net.subset_probabilities(net.evolve_network(
            network, [(True, phases.sum()), (True, 0.0), (True, 0.0)]), 3)
        worst = max(worst, max(abs(a[k] - b[k]) for k in a))
    assert record(9, "probabilities depend on the phase sum only", worst < 1e-12,
                  f"max difference {worst:.2g}")


def test_c9_local_mixtures(record):
    rng = np.random.default_rng(1)
    cols = lhv.strategy_matrix(3)
    functionals = []
    for desc, _ in lhv.lifted_ch_orbit(3):
        base, const = lhv.lifted_ch_functional(3, desc["pair"], desc["lift"])
        functionals.append((lhv._relabel_functional(base, desc["flips"]).ravel() @ cols, const))
    f = np.array([row for row, _ in functionals])
    c = np.array([const for _, const in functionals])
    # dense and sparse mixtures over the 64 deterministic strategies
    w = np.vstack([rng.dirichlet(np.ones(64), 5000), rng.dirichlet(np.full(64, 0.05), 5000)])
    worst = float((w @ f.T + c).max())
    direct = max(bell.lifted_ch_value(bell.Behavior((cols @ wi).reshape((2,) * 6)))
                 for wi in w[:200])
    ok = worst <= 1e-12 and direct <= 1e-12
    assert record(9, "CH <= 0 on 10^4 random local mixtures", ok,
                  f"max over 96 lifted CH variants {worst:.3g}")
