"""Reference values, transcribed as data.

``AMPLITUDES`` is the order-4 all-off state of the three-party ring: for each
occupation ``(a1, a2, b1, b2, c1, c2)`` the phase multiples ``(alpha, beta,
gamma)`` and the terms ``(coefficient, power of g, power of conj(g))``.
Coefficients are strings such as ``"-11/6 i"``.

``PROBABILITY_TABLE`` lists the coincidence formulas at the same order as
``{power of |g|^2: {harmonic of cos(sum phi): coefficient}}`` together with
the events (parties outside the event are off) that share each formula.
"""
from __future__ import annotations

from fractions import Fraction

AMPLITUDES = [
    ((0, 0, 0, 0, 0, 0), (0, 0, 0), [("1", 0, 0), ("-3/2", 1, 1), ("11/8", 2, 2)]),
    ((0, 1, 1, 1, 1, 0), (0, 1, 1), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((1, 0, 0, 1, 1, 1), (1, 0, 1), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((1, 1, 1, 0, 0, 1), (1, 1, 0), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((0, 0, 0, 1, 1, 0), (0, 0, 1), [("i", 1, 0), ("-11/6 i", 2, 1)]),
    ((0, 1, 1, 0, 0, 0), (0, 1, 0), [("i", 1, 0), ("-11/6 i", 2, 1)]),
    ((1, 0, 0, 0, 0, 1), (1, 0, 0), [("i", 1, 0), ("-11/6 i", 2, 1)]),
    ((0, 0, 0, 2, 2, 0), (0, 0, 2), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((0, 2, 2, 0, 0, 0), (0, 2, 0), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((2, 0, 0, 0, 0, 2), (2, 0, 0), [("-1", 2, 0), ("13/6", 3, 1)]),
    ((0, 0, 0, 3, 3, 0), (0, 0, 3), [("-i", 3, 0)]),
    ((0, 3, 3, 0, 0, 0), (0, 3, 0), [("-i", 3, 0)]),
    ((3, 0, 0, 0, 0, 3), (3, 0, 0), [("-i", 3, 0)]),
    ((0, 1, 1, 2, 2, 0), (0, 1, 2), [("-i", 3, 0)]),
    ((0, 2, 2, 1, 1, 0), (0, 2, 1), [("-i", 3, 0)]),
    ((1, 0, 0, 2, 2, 1), (1, 0, 2), [("-i", 3, 0)]),
    ((2, 1, 1, 0, 0, 2), (2, 1, 0), [("-i", 3, 0)]),
    ((2, 0, 0, 1, 1, 2), (2, 0, 1), [("-i", 3, 0)]),
    ((1, 2, 2, 0, 0, 1), (1, 2, 0), [("-i", 3, 0)]),
    ((0, 0, 0, 4, 4, 0), (0, 0, 4), [("1", 4, 0)]),
    ((4, 0, 0, 0, 0, 4), (4, 0, 0), [("1", 4, 0)]),
    ((0, 4, 4, 0, 0, 0), (0, 4, 0), [("1", 4, 0)]),
    ((0, 1, 1, 3, 3, 0), (0, 1, 3), [("1", 4, 0)]),
    ((0, 3, 3, 1, 1, 0), (0, 3, 1), [("1", 4, 0)]),
    ((1, 0, 0, 3, 3, 1), (1, 0, 3), [("1", 4, 0)]),
    ((3, 1, 1, 0, 0, 3), (3, 1, 0), [("1", 4, 0)]),
    ((3, 0, 0, 1, 1, 3), (3, 0, 1), [("1", 4, 0)]),
    ((1, 3, 3, 0, 0, 1), (1, 3, 0), [("1", 4, 0)]),
    ((2, 1, 1, 1, 1, 2), (2, 1, 1), [("1", 4, 0)]),
    ((1, 2, 2, 1, 1, 1), (1, 2, 1), [("1", 4, 0)]),
    ((1, 1, 1, 2, 2, 1), (1, 1, 2), [("1", 4, 0)]),
    ((2, 2, 2, 0, 0, 2), (2, 2, 0), [("1", 4, 0)]),
    ((2, 0, 0, 2, 2, 2), (2, 0, 2), [("1", 4, 0)]),
    ((0, 2, 2, 2, 2, 0), (0, 2, 2), [("1", 4, 0)]),
    ((1, 1, 1, 1, 1, 1), (1, 1, 1), [("-i", 3, 0)]),
]

# name -> (formula, events); an event maps party -> setting (2 = pump on)
PROBABILITY_TABLE = {
    "P(off)": ({2: {0: "1"}, 3: {0: "-10/3"}, 4: {0: "205/36"}},
               [{0: 1}, {1: 1}, {2: 1}]),
    "P(on)": ({1: {0: "1"}, 2: {0: "-8/3"}, 3: {0: "-65/9"}, 4: {0: "278/9"}},
              [{0: 2}, {1: 2}, {2: 2}]),
    "P(A,B)": ({3: {0: "1"}},
               [{0: 1, 1: 1}, {1: 1, 2: 1}, {0: 1, 2: 1}]),
    "P(off,off,off)": ({3: {0: "1"}},
                       [{0: 1, 1: 1, 2: 1}]),
    "P(on,off,off)": ({3: {0: "1"}},
                      [{0: 1, 1: 2, 2: 1}, {0: 1, 1: 1, 2: 2}, {0: 2, 1: 1, 2: 1}]),
    "P(on,on,off)": ({3: {0: "1"}},
                     [{0: 2, 1: 2, 2: 1}, {0: 1, 1: 2, 2: 2}, {0: 2, 1: 1, 2: 2}]),
    "P(on,off)": ({3: {0: "1"}},
                  [{0: 1, 1: 2}, {1: 1, 2: 2}, {0: 2, 2: 1},
                   {0: 2, 1: 1}, {1: 2, 2: 1}, {0: 1, 2: 2}]),
    "P(on,on)": ({2: {0: "1"}, 3: {0: "-16/3"}, 4: {0: "361/36"}},
                 [{0: 2, 1: 2}, {1: 2, 2: 2}, {0: 2, 2: 2}]),
    "P(A',B',C')": ({3: {0: "2", 1: "2"}},
                    [{0: 2, 1: 2, 2: 2}]),
}


def parse_coefficient(text: str) -> tuple[Fraction, Fraction]:
    """``"-11/6 i"`` -> ``(0, -11/6)``; ``"i"`` -> ``(0, 1)``."""
    text = text.replace(" ", "")
    if text.endswith("i"):
        body = text[:-1]
        if body in ("", "+"):
            body = "1"
        elif body == "-":
            body = "-1"
        return Fraction(0), Fraction(body)
    return Fraction(text), Fraction(0)


def formula(name: str) -> dict[int, dict[int, Fraction]]:
    series, _ = PROBABILITY_TABLE[name]
    return {p: {j: Fraction(a) for j, a in row.items()} for p, row in series.items()}


def reference_amplitudes() -> dict:
    """``{occupation: PolynomialAmplitude}`` as true Fock amplitudes; compare
    with :meth:`~interwoven_pdc.symbolic.SymbolicState.amplitude`."""
    from .symbolic import GaussianRational, PolynomialAmplitude
    out = {}
    for occ, k, terms in AMPLITUDES:
        poly = {}
        for text, m, n in terms:
            re, im = parse_coefficient(text)
            poly[(m, n, k)] = GaussianRational(re, im)
        out[occ] = PolynomialAmplitude(poly)
    return out
