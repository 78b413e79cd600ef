import math
from fractions import Fraction

import numpy as np
import pytest

from interwoven_pdc import network as net
from interwoven_pdc import symbolic
from interwoven_pdc.symbolic import GaussianRational, PolynomialAmplitude, ProbabilityPolynomial


def test_gaussian_rational_arithmetic():
    a = GaussianRational.of(Fraction(1, 2), 1)
    b = GaussianRational.of(3, Fraction(-1, 3))
    assert a * b == GaussianRational.of(Fraction(1, 2) * 3 + Fraction(1, 3),
                                        Fraction(-1, 6) + 3)
    assert a + b - b == a
    assert a.times_i() == GaussianRational.of(-1, Fraction(1, 2))
    assert (a * a.conjugate()).im == 0
    assert str(GaussianRational.of(0, Fraction(-11, 6))) == "-11/6i"
    assert not symbolic.ZERO
    assert complex(symbolic.I) == 1j


def test_polynomial_product_and_conjugate():
    p = symbolic.monomial(symbolic.I, 1, 0, (1, 0))
    q = p * p.conjugate()
    assert q.terms == {(1, 1, (0, 0)): symbolic.ONE}
    assert (p - p).terms == {}
    assert p.truncated(0).terms == {}
    assert p.evaluate(0.5, [0.3, 0.0]) == pytest.approx(0.5j * np.exp(0.3j))


def test_series_order_guard():
    with pytest.raises(ValueError):
        symbolic.evolve_network_symbolic(3, (False,) * 3, symbolic.ORDER_GUARD + 1)
    with pytest.raises(ValueError):
        symbolic.evolve_network_symbolic(3, (False,) * 2, 2)


@pytest.mark.parametrize("pumps", [(False, False, False), (True, False, True), (True, True, True)])
def test_amplitudes_match_numeric_engine(pumps):
    """Symbolic amplitudes against truncated-Fock evolution at small ``g``."""
    g, order = 0.02 + 0.01j, 6
    phases = [0.3, -1.1, 2.0]
    state = symbolic.evolve_network_symbolic(3, pumps, order)
    report = net.evolve_network(net.build_ring_network(3, g), list(zip(pumps, phases)))
    numeric = report.final_state.terms
    worst = 0.0
    for occ in set(numeric) | set(state.terms):
        if sum(occ) > order:
            continue
        sym = state.evaluate(occ, g, phases)
        worst = max(worst, abs(sym - numeric.get(occ, 0)))
    # first neglected order is |g|^7 ~ 1e-12, times combinatorial factors
    assert worst < 1e-9


def test_series_residual_scales_as_next_order():
    """The degree-5 series leaves an ``O(|g|^12)`` residual against numerics."""
    pumps = (True, True, True)
    for subset in [(0,), (1, 2), (0, 1, 2)]:
        ratios = []
        for g in (0.05, 0.025):
            report = net.evolve_network(net.build_ring_network(3, g),
                                        [(True, 1.3), (True, 0), (True, 0)])
            exact = symbolic.series_probability(3, pumps, subset, 5).value(g, 1.3)
            ratios.append(abs(exact - net.coincidence_probability(report, subset)) / g ** 12)
        assert ratios[0] < 1e4
        assert ratios[1] == pytest.approx(ratios[0], rel=0.1)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_norm_is_one_through_truncation_order(order):
    state = symbolic.evolve_network_symbolic(3, (True, False, True), order)
    norm = symbolic.pattern_probability_polynomial(state, {}).truncated_degree(order // 2)
    assert norm.cos_series() == {0: {0: Fraction(1)}}


def test_single_source_vacuum_coefficient():
    # exp(i(g a^dag b^dag + h.c.))|0> has vacuum amplitude 1/cosh|g| = 1 - |g|^2/2 + 5|g|^4/24
    state = symbolic.evolve_network_symbolic(2, (False, True), 4)
    # two sources and one station: vacuum amplitude is the cube of the single value
    vac = state.amplitude((0, 0, 0, 0))
    series = {(m, n): c for (m, n, _), c in vac.terms.items()}
    assert series[(0, 0)] == symbolic.ONE
    assert series[(1, 1)] == GaussianRational.of(Fraction(-3, 2))
    assert series[(2, 2)] == GaussianRational.of(Fraction(5, 8) + Fraction(3, 4))


def test_cos_series_and_exact_value():
    state = symbolic.evolve_network_symbolic(3, (True,) * 3, 4)
    poly = symbolic.probability_polynomial(state, (0, 1, 2))
    assert poly.cos_series() == {3: {0: Fraction(2), 1: Fraction(2)}}
    assert poly.coefficient(3, 1) == 2
    assert poly.exact_value(Fraction(1, 10), Fraction(1, 2)) == Fraction(3, 10 ** 6)
    assert poly.value(0.1, math.pi / 3) == pytest.approx(3e-6)
    assert poly.leading() == (3, {0: Fraction(2), 1: Fraction(2)})
    assert symbolic.format_probability(poly) == "(2 + 2*cos(S))*|g|^6"


def test_series_probability_is_independent_of_extra_order():
    a = symbolic.series_probability(3, (True, False, False), (0,), 4)
    b = symbolic.probability_polynomial(
        symbolic.evolve_network_symbolic(3, (True, False, False), 9), (0,)).truncated_degree(4)
    assert a.cos_series() == b.cos_series()
    with pytest.raises(ValueError):
        symbolic.series_probability(3, (True, False, False), (), 2)


def test_chebyshev_and_exact_cos():
    for j in range(6):
        for x in (Fraction(-1), Fraction(1, 3), Fraction(1, 2)):
            assert float(symbolic.chebyshev_t(j, x)) == pytest.approx(math.cos(j * math.acos(x)))
    assert symbolic.exact_cos(math.pi) == -1
    assert symbolic.exact_cos(2 * math.pi / 3) == Fraction(-1, 2)
    assert symbolic.exact_cos(-math.pi / 2) == 0
    with pytest.raises(ValueError):
        symbolic.exact_cos(0.1)


def test_phase_sum_series_rejects_unequal_multiples():
    poly = ProbabilityPolynomial({(1, 1, (1, 0, 0)): symbolic.ONE})
    with pytest.raises(ValueError):
        poly.phase_sum_series()
    with pytest.raises(ValueError):
        ProbabilityPolynomial({(1, 0, (0,)): symbolic.ONE}).series()


def test_probabilities_depend_on_phase_sum_only():
    for pumps in [(True, True, True), (True, False, True)]:
        state = symbolic.evolve_network_symbolic(3, pumps, 4)
        for poly in symbolic.subset_probability_polynomials(state).values():
            poly.phase_sum_series()


def test_state_json_round_trip():
    state = symbolic.evolve_network_symbolic(3, (False, True, False), 3)
    back = symbolic.loads_symbolic_state(symbolic.dumps_symbolic_state(state))
    assert back.terms == state.terms
    assert back.order_max == 3


def test_amplitude_requires_square_norm():
    state = symbolic.SymbolicState(2, 2, {(2, 0, 0, 0): PolynomialAmplitude.constant(1, 2)})
    with pytest.raises(ValueError):
        state.amplitude((2, 0, 0, 0))
    assert state.evaluate((2, 0, 0, 0), 0.1) == pytest.approx(math.sqrt(2))


def test_evaluate_dispatch():
    poly = symbolic.series_probability(3, (True,) * 3, (0, 1, 2), 3)
    assert symbolic.evaluate(poly, 0.1, [math.pi, 0.0, 0.0]) == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(TypeError):
        symbolic.evaluate(PolynomialAmplitude.constant(1, 3), 0.1, 0.5)
