"""GHZ/Hardy-type paradox for the three-party ring.

With two pumps off, a double click at both of those stations forces a double
click at the third (``P(C | A, B) = 1`` at leading order, pump of ``C`` on or
off).  An LHV model then bounds ``P(+++ | all off)`` by
``P(+++ | all on)``, which destructive interference sends to zero at
``sum(phi) = pi``.  Probabilities come from the exact symbolic series.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

from . import network as net
from . import symbolic

DEFAULT_DEGREE = 4
CONDITIONING_FLOOR = 1e-15
SMALL_G = 0.1
PARTIES = 3


class UndefinedConditionalError(ZeroDivisionError):
    """The conditioning event has (numerically) zero probability."""


@dataclass(frozen=True)
class Implication:
    target: int
    target_pump: bool
    value: float
    deviation: float
    conditioning_probability: float

    def label(self) -> str:
        from .fock import party_letter
        others = [party_letter(x).upper() for x in range(PARTIES) if x != self.target]
        t = party_letter(self.target).upper()
        pump = "on" if self.target_pump else "off"
        return f"P({t}|{','.join(others)}; {t} {pump})"


@dataclass(frozen=True)
class ImplicationReport:
    g: float
    phase_sum: float
    implications: tuple[Implication, ...]

    @property
    def max_deviation(self) -> float:
        return max(i.deviation for i in self.implications)

    def to_dict(self) -> dict:
        return {"g": self.g, "phase_sum": self.phase_sum,
                "max_deviation": self.max_deviation,
                "implications": [dict(asdict(i), label=i.label()) for i in self.implications]}


@dataclass(frozen=True)
class ParadoxGap:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}


@dataclass(frozen=True)
class DegradationBudget:
    g: float
    c: float
    budget: float
    lhs: float
    gap: float
    in_regime: bool

    @property
    def survives(self) -> bool:
        return self.budget < self.gap

    def to_dict(self) -> dict:
        return dict(asdict(self), survives=self.survives)


def _parties(network) -> int:
    if network is None:
        return PARTIES
    return network if isinstance(network, int) else network.parties


def _require_three(network):
    n = _parties(network)
    if n != PARTIES:
        raise ValueError(f"the paradox is stated for 3 parties, got {n}")


def _phase_sum(phases) -> float:
    if phases is None:
        return math.pi
    if isinstance(phases, (int, float, Fraction)):
        return float(phases)
    return float(sum(phases))


def event_probability(pumps: Sequence[bool], subset: Sequence[int], g, phase_sum: float,
                      degree: int | None = DEFAULT_DEGREE):
    """``P(+ on subset)`` from the symbolic series through ``|g|^(2*degree)``;
    ``degree=None`` keeps only the leading power."""
    poly = symbolic.series_probability(PARTIES, tuple(pumps), tuple(subset),
                                       degree if degree is not None else 3)
    if degree is None:
        power, row = poly.leading()
        poly = poly.truncated_degree(power)
    if isinstance(g, Fraction):
        return poly.exact_value(g, symbolic.exact_cos(phase_sum))
    return poly.value(g, phase_sum)


def implication_check(network=None, g=0.1, phases=None,
                      degree: int | None = DEFAULT_DEGREE) -> ImplicationReport:
    """``P(+_X | +_Y, +_Z)`` with ``Y, Z`` off, for every ``X`` and both pumps of ``X``."""
    _require_three(network)
    phase_sum = _phase_sum(phases)
    rows = []
    for target in range(PARTIES):
        others = tuple(x for x in range(PARTIES) if x != target)
        for pump in (False, True):
            pumps = tuple(pump if x == target else False for x in range(PARTIES))
            cond = event_probability(pumps, others, g, phase_sum, degree)
            if cond < CONDITIONING_FLOOR:
                raise UndefinedConditionalError(
                    f"P({others}) = {float(cond):.3g} is below {CONDITIONING_FLOOR:g}")
            joint = event_probability(pumps, range(PARTIES), g, phase_sum, degree)
            value = joint / cond
            rows.append(Implication(target, pump, float(value), float(1 - value), float(cond)))
    return ImplicationReport(float(g), phase_sum, tuple(rows))


def paradox_gap(network=None, g=0.1, phases=None,
                degree: int | None = DEFAULT_DEGREE) -> ParadoxGap:
    """``P(+++ | off,off,off) - P(+++ | on,on,on; phases)``; positive means paradox."""
    _require_three(network)
    phase_sum = _phase_sum(phases)
    lhs = event_probability((False,) * PARTIES, range(PARTIES), g, phase_sum, degree)
    rhs = event_probability((True,) * PARTIES, range(PARTIES), g, phase_sum, degree)
    return ParadoxGap(float(lhs), float(rhs))


def hardy_zero(g=0.1, degree: int | None = DEFAULT_DEGREE) -> float:
    """``P(+, +, - | off, off, on)``: zero at leading order."""
    pumps = (False, False, True)
    return float(event_probability(pumps, (0, 1), g, 0.0, degree)
                 - event_probability(pumps, range(PARTIES), g, 0.0, degree))


def degradation_budget(g=0.1, phases=None) -> DegradationBudget:
    """LHV slack ``3 c |g|^2 * lhs`` from the worst implication deviation.

    Each of the three implications used by the LHV argument fails with
    probability ``c |g|^2``, so the LHV bound ``lhs <= rhs`` weakens by at most
    ``3 c |g|^2`` times the probability scale ``lhs``.  Values of ``|g|``
    above the small-coupling regime are flagged.
    """
    g_abs = abs(complex(g))
    if g_abs > net.G_GUARD:
        raise ValueError(f"|g| = {g_abs:g} exceeds the validity guard {net.G_GUARD}")
    if g_abs == 0:
        raise UndefinedConditionalError("the budget is undefined at g = 0")
    report = implication_check(PARTIES, g, phases)
    c = max(abs(i.deviation) for i in report.implications) / g_abs ** 2
    gap = paradox_gap(PARTIES, g, math.pi)
    budget = 3 * c * g_abs ** 2 * gap.lhs
    return DegradationBudget(float(g_abs), c, budget, gap.lhs, gap.gap, g_abs <= SMALL_G)


def numeric_paradox_gap(g=0.1, phase_sum: float = math.pi,
                        cutoff: int = net.DEFAULT_CUTOFF) -> ParadoxGap:
    """Cross-check of :func:`paradox_gap` by truncated-Fock evolution."""
    network = net.build_ring_network(PARTIES, g)
    off = net.evolve_network(network, [(False, 0.0)] * PARTIES, cutoff=cutoff)
    on = net.evolve_network(network, [(True, phase_sum)] + [(True, 0.0)] * (PARTIES - 1),
                            cutoff=cutoff)
    everyone = range(PARTIES)
    return ParadoxGap(net.coincidence_probability(off, everyone),
                      net.coincidence_probability(on, everyone))


def paradox_report(g=0.1, phases=None) -> dict:
    report = {"implications": implication_check(PARTIES, g, phases).to_dict(),
              "paradox": paradox_gap(PARTIES, g, phases).to_dict(),
              "hardy_zero": hardy_zero(g)}
    report["budget"] = degradation_budget(g, phases).to_dict()
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True)
