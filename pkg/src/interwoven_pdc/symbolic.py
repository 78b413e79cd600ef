"""Exact perturbative evolution of the PDC ring.

Amplitudes are polynomials in ``g`` and ``conj(g)`` whose terms also carry a
phase monomial ``exp(i sum_x k_x phi_x)``; coefficients are Gaussian
rationals.  Every operator application drops monomials whose total order in
``g, conj(g)`` exceeds ``order_max``.

Coefficients are stored *reduced*: the amplitude of ``|n>`` is
``sqrt(prod_k n_k!)`` times the stored polynomial.  Pair creation then acts
with factor 1 and pair annihilation with the integer ``n_i n_j``, so no square
roots ever enter.  :meth:`SymbolicState.amplitude` undoes the reduction when
the normalisation is an integer (always the case for the source-only state).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .network import NetworkSpec, build_ring_network

ORDER_GUARD = 10


@dataclass(frozen=True, slots=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, re=0, im=0) -> "GaussianRational":
        return cls(Fraction(re), Fraction(im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re * other.re - self.im * other.im,
                                    self.re * other.im + self.im * other.re)
        return GaussianRational(self.re * other, self.im * other)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def times_i(self):
        return GaussianRational(-self.im, self.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"

    def to_dict(self) -> dict:
        return {"re_num": self.re.numerator, "re_den": self.re.denominator,
                "im_num": self.im.numerator, "im_den": self.im.denominator}

    @classmethod
    def from_dict(cls, d: Mapping) -> "GaussianRational":
        return cls(Fraction(d["re_num"], d["re_den"]), Fraction(d["im_num"], d["im_den"]))


ZERO = GaussianRational()
ONE = GaussianRational(Fraction(1))
I = GaussianRational(Fraction(0), Fraction(1))

# A monomial key is (m, n, k): g**m * conj(g)**n * exp(i sum_x k[x] phi_x).
Key = tuple


class PolynomialAmplitude:
    """Sparse polynomial ``{(m, n, k): GaussianRational}`` with no zero terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, GaussianRational] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def constant(cls, value, parties: int) -> "PolynomialAmplitude":
        c = value if isinstance(value, GaussianRational) else GaussianRational.of(value)
        return cls({(0, 0, (0,) * parties): c})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PolynomialAmplitude):
            return NotImplemented
        return self.terms == other.terms

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, ZERO) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return PolynomialAmplitude(out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, factor) -> "PolynomialAmplitude":
        return PolynomialAmplitude({k: v * factor for k, v in self.terms.items()})

    def __mul__(self, other: "PolynomialAmplitude") -> "PolynomialAmplitude":
        out: dict = {}
        for (m1, n1, k1), c1 in self.terms.items():
            for (m2, n2, k2), c2 in other.terms.items():
                key = (m1 + m2, n1 + n2, tuple(a + b for a, b in zip(k1, k2)))
                out[key] = out.get(key, ZERO) + c1 * c2
        return PolynomialAmplitude(out)

    def conjugate(self) -> "PolynomialAmplitude":
        return PolynomialAmplitude({(n, m, tuple(-x for x in k)): c.conjugate()
                                    for (m, n, k), c in self.terms.items()})

    def truncated(self, max_order: int) -> "PolynomialAmplitude":
        return PolynomialAmplitude({k: v for k, v in self.terms.items() if k[0] + k[1] <= max_order})

    @property
    def orders(self) -> set[int]:
        return {m + n for (m, n, _) in self.terms}

    def evaluate(self, g: complex, phases: Sequence[float] = ()) -> complex:
        g = complex(g)
        total = 0j
        for (m, n, k), c in self.terms.items():
            phase = sum(kx * phases[x] for x, kx in enumerate(k) if kx) if any(k) else 0.0
            total += complex(c) * g ** m * g.conjugate() ** n * cmath.exp(1j * phase)
        return total

    def __repr__(self):
        return f"PolynomialAmplitude({format_polynomial(self)})"

    def to_list(self) -> list[dict]:
        return [{"m": m, "n": n, "k": list(k), "coeff": c.to_dict()}
                for (m, n, k), c in sorted(self.terms.items())]

    @classmethod
    def from_list(cls, items: Iterable[Mapping]) -> "PolynomialAmplitude":
        return cls({(int(t["m"]), int(t["n"]), tuple(t["k"])): GaussianRational.from_dict(t["coeff"])
                    for t in items})


def monomial(coeff, m: int, n: int, k: Sequence[int]) -> PolynomialAmplitude:
    c = coeff if isinstance(coeff, GaussianRational) else GaussianRational.of(coeff)
    return PolynomialAmplitude({(m, n, tuple(k)): c})


def _phase_name(x: int) -> str:
    return ("alpha", "beta", "gamma", "delta", "epsilon")[x] if x < 5 else f"phi{x}"


def format_polynomial(poly: PolynomialAmplitude) -> str:
    if not poly:
        return "0"
    parts = []
    for (m, n, k), c in sorted(poly.terms.items(), key=lambda t: (t[0][0] + t[0][1], t[0])):
        factors = [f"({c})"]
        if m:
            factors.append("g" if m == 1 else f"g^{m}")
        if n:
            factors.append("gb" if n == 1 else f"gb^{n}")
        if any(k):
            arg = "+".join(f"{kx}*{_phase_name(x)}" if kx != 1 else _phase_name(x)
                           for x, kx in enumerate(k) if kx)
            factors.append(f"exp(i({arg}))")
        parts.append("*".join(factors))
    return " + ".join(parts)


def reduced_norm(occupation: Sequence[int]) -> int:
    """``prod_k n_k!``; the squared factor separating stored and true amplitudes."""
    out = 1
    for n in occupation:
        out *= math.factorial(n)
    return out


class SymbolicState:
    """``{occupation: PolynomialAmplitude}`` (reduced coefficients) at fixed ``order_max``."""

    def __init__(self, parties: int, order_max: int,
                 terms: Mapping[tuple, PolynomialAmplitude] | None = None):
        self.parties = parties
        self.order_max = order_max
        self.terms = {occ: p for occ, p in (terms or {}).items() if p}

    @classmethod
    def vacuum(cls, parties: int, order_max: int) -> "SymbolicState":
        occ = (0,) * (2 * parties)
        return cls(parties, order_max, {occ: PolynomialAmplitude.constant(1, parties)})

    @property
    def mode_count(self) -> int:
        return 2 * self.parties

    def __len__(self):
        return len(self.terms)

    def __contains__(self, occupation):
        return tuple(occupation) in self.terms

    def reduced(self, occupation) -> PolynomialAmplitude:
        return self.terms.get(tuple(occupation), PolynomialAmplitude())

    def amplitude(self, occupation) -> PolynomialAmplitude:
        """True amplitude polynomial; requires ``prod n_k!`` to be a perfect square."""
        occupation = tuple(occupation)
        norm = reduced_norm(occupation)
        root = math.isqrt(norm)
        if root * root != norm:
            raise ValueError(f"amplitude of {occupation} carries sqrt({norm}); use reduced()")
        return self.reduced(occupation).scaled(root)

    def evaluate(self, occupation, g: complex, phases: Sequence[float] = ()) -> complex:
        occupation = tuple(occupation)
        return self.reduced(occupation).evaluate(g, phases) * math.sqrt(reduced_norm(occupation))

    def _accumulate(self, other_terms: Mapping):
        out = dict(self.terms)
        for occ, poly in other_terms.items():
            out[occ] = out[occ] + poly if occ in out else poly
        return SymbolicState(self.parties, self.order_max, out)

    def to_dict(self) -> dict:
        return {"parties": self.parties, "order_max": self.order_max,
                "normalization": "reduced: amplitude = sqrt(prod n_k!) * polynomial",
                "terms": [{"occupation": list(occ), "amplitude": poly.to_list()}
                          for occ, poly in sorted(self.terms.items())]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SymbolicState":
        terms = {tuple(t["occupation"]): PolynomialAmplitude.from_list(t["amplitude"])
                 for t in data["terms"]}
        return cls(int(data["parties"]), int(data["order_max"]), terms)


def _raise_lower(terms: Mapping[tuple, dict], i: int, j: int, order_max: int) -> dict:
    """``(g a_i^dag a_j^dag + conj(g) a_i a_j)`` in reduced units, truncated."""
    out: dict = {}
    for occ, poly in terms.items():
        up = list(occ)
        up[i] += 1
        up[j] += 1
        up_t = tuple(up)
        bucket = out.setdefault(up_t, {})
        for (m, n, k), c in poly.items():
            if m + n < order_max:
                key = (m + 1, n, k)
                bucket[key] = bucket[key] + c if key in bucket else c
        if occ[i] and occ[j]:
            down = list(occ)
            down[i] -= 1
            down[j] -= 1
            down_t = tuple(down)
            factor = occ[i] * occ[j]
            bucket = out.setdefault(down_t, {})
            for (m, n, k), c in poly.items():
                if m + n < order_max:
                    key = (m, n + 1, k)
                    val = c * factor
                    bucket[key] = bucket[key] + val if key in bucket else val
    return {occ: {k: v for k, v in b.items() if v} for occ, b in out.items()
            if any(b.values())}


def expand_squeezer(state: SymbolicState, mode_i: int, mode_j: int,
                    order_max: int | None = None) -> SymbolicState:
    """``sum_j i^j/j! (g a^dag b^dag + conj(g) a b)^j`` applied to ``state``,
    dropping every monomial of total order above ``order_max``."""
    order_max = state.order_max if order_max is None else order_max
    if order_max < 0:
        raise ValueError("order_max must be non-negative")
    if mode_i == mode_j:
        raise ValueError("a squeezer needs two distinct modes")
    term = {occ: dict(p.terms) for occ, p in state.terms.items()}
    total = {occ: dict(p) for occ, p in term.items()}
    for j in range(1, order_max + 1):
        term = _raise_lower(term, mode_i, mode_j, order_max)
        if not term:
            break
        scale = Fraction(1, j)
        term = {occ: {k: c.times_i() * scale for k, c in p.items()} for occ, p in term.items()}
        for occ, p in term.items():
            bucket = total.setdefault(occ, {})
            for k, c in p.items():
                bucket[k] = bucket[k] + c if k in bucket else c
    terms = {occ: PolynomialAmplitude(p) for occ, p in total.items()}
    return SymbolicState(state.parties, order_max, terms)


def apply_phases(state: SymbolicState, phase_modes: Sequence[int]) -> SymbolicState:
    """Party ``x`` picks up ``exp(i phi_x n(phase_modes[x]))``."""
    out = {}
    for occ, poly in state.terms.items():
        shift = tuple(occ[m] for m in phase_modes)
        if any(shift):
            poly = PolynomialAmplitude({(m, n, tuple(a + b for a, b in zip(k, shift))): c
                                        for (m, n, k), c in poly.terms.items()})
        out[occ] = poly
    return SymbolicState(state.parties, state.order_max, out)


def _pump_tuple(pump_pattern, parties: int) -> tuple[bool, ...]:
    if isinstance(pump_pattern, str):
        pump_pattern = [pump_pattern] * parties
    pumps = tuple(p == "on" if isinstance(p, str) else bool(p) for p in pump_pattern)
    if len(pumps) != parties:
        raise ValueError(f"expected {parties} pump settings, got {len(pumps)}")
    return pumps


_source_cache: dict = {}


def source_state(parties: int, order_max: int) -> SymbolicState:
    """Source layer and phase shifters applied to the vacuum (cached)."""
    key = (parties, order_max)
    if key not in _source_cache:
        net = build_ring_network(parties, 0.0)
        state = SymbolicState.vacuum(parties, order_max)
        for src in net.sources:
            state = expand_squeezer(state, src.mode_i.index, src.mode_j.index, order_max)
        _source_cache[key] = apply_phases(state, [m.index for m in net.phase_modes])
    return _source_cache[key]


_evolved_cache: dict = {}


def evolve_network_symbolic(network: NetworkSpec | int, pump_pattern,
                            order_max: int = 4) -> SymbolicState:
    """Same layer order as the numeric engine, with ``g`` and the phases symbolic."""
    parties = network if isinstance(network, int) else network.parties
    if not 0 <= order_max <= ORDER_GUARD:
        raise ValueError(f"order_max must lie in [0, {ORDER_GUARD}], got {order_max}")
    pumps = _pump_tuple(pump_pattern, parties)
    key = (parties, pumps, order_max)
    if key in _evolved_cache:
        return _evolved_cache[key]
    state = source_state(parties, order_max)
    for x, on in enumerate(pumps):
        if on:
            state = expand_squeezer(state, 2 * x, 2 * x + 1, order_max)
    _evolved_cache[key] = state
    return state


class ProbabilityPolynomial(PolynomialAmplitude):
    """A probability: real polynomial in ``|g|^2`` with phase monomials."""

    def series(self) -> dict[int, dict[tuple, GaussianRational]]:
        """``{p: {k: coeff}}`` for ``coeff * |g|^(2p) * exp(i k.phi)``."""
        out: dict = {}
        for (m, n, k), c in self.terms.items():
            if m != n:
                raise ValueError("probability polynomial has unpaired g powers")
            out.setdefault(m, {})[k] = c
        return dict(sorted(out.items()))

    def phase_sum_series(self) -> dict[int, dict[int, GaussianRational]]:
        """``{p: {j: c}}`` meaning ``c |g|^(2p) exp(i j sum(phi))``; raises if a
        phase monomial is not a multiple of the all-ones vector."""
        out: dict = {}
        for p, terms in self.series().items():
            for k, c in terms.items():
                if len(set(k)) > 1:
                    raise ValueError(f"phase monomial {k} is not a multiple of sum(phi)")
                out.setdefault(p, {})[k[0] if k else 0] = c
        return out

    def cos_series(self) -> dict[int, dict[int, Fraction]]:
        """``{p: {j: a_j}}`` with ``P = sum_p |g|^(2p) sum_j a_j cos(j sum(phi))``
        (exact; requires no sine terms)."""
        out: dict = {}
        for p, terms in self.phase_sum_series().items():
            row = {}
            for j, c in terms.items():
                if j < 0:
                    continue
                partner = terms.get(-j, ZERO)
                if j == 0:
                    if c.im:
                        raise ValueError("probability has an imaginary constant")
                    row[0] = c.re
                else:
                    if c.re != partner.re or c.im != -partner.im:
                        raise ValueError("phase terms are not Hermitian pairs")
                    if c.im:
                        raise ValueError("probability has a sine term")
                    row[j] = 2 * c.re
            row = {j: a for j, a in row.items() if a}
            if row:
                out[p] = dict(sorted(row.items()))
        return out

    def truncated_degree(self, max_power: int) -> "ProbabilityPolynomial":
        """Keep terms up to ``|g|^(2*max_power)``."""
        return ProbabilityPolynomial({k: v for k, v in self.terms.items() if k[0] <= max_power})

    def coefficient(self, power: int, phase_multiple: int = 0) -> Fraction:
        """Coefficient of ``|g|^(2*power) cos(phase_multiple * sum(phi))``."""
        return self.cos_series().get(power, {}).get(phase_multiple, Fraction(0))

    def exact_value(self, g, cos_sum) -> Fraction:
        """Exact value for rational ``|g|`` (or ``|g|^2`` given as ``g*g``) and a
        rational ``cos(sum(phi))``; higher harmonics via Chebyshev polynomials."""
        g = Fraction(g)
        cos_sum = Fraction(cos_sum)
        g2 = g * g
        total = Fraction(0)
        for p, row in self.cos_series().items():
            total += g2 ** p * sum(a * chebyshev_t(j, cos_sum) for j, a in row.items())
        return total

    def leading(self) -> tuple[int, dict[int, Fraction]]:
        """Lowest ``|g|^2`` power present and its cosine row."""
        series = self.cos_series()
        if not series:
            return (0, {})
        p = min(series)
        return p, series[p]

    def value(self, g: complex, phase_sum: float = 0.0) -> float:
        g2 = abs(complex(g)) ** 2
        total = 0.0
        for p, row in self.cos_series().items():
            total += g2 ** p * sum(float(a) * math.cos(j * phase_sum) for j, a in row.items())
        return total

    def __repr__(self):
        return f"ProbabilityPolynomial({format_probability(self)})"


def chebyshev_t(j: int, x: Fraction) -> Fraction:
    a, b = Fraction(1), x
    if j == 0:
        return a
    for _ in range(j - 1):
        a, b = b, 2 * x * b - a
    return b


_EXACT_COS = {0: Fraction(1), 1: Fraction(1, 2), 2: Fraction(-1, 2), 3: Fraction(-1),
              4: Fraction(-1, 2), 5: Fraction(1, 2)}


def exact_cos(angle: float) -> Fraction:
    """``cos(angle)`` as a rational; only multiples of pi/3 and odd multiples of
    pi/2 qualify."""
    thirds = angle / (math.pi / 3)
    k = round(thirds)
    if abs(thirds - k) < 1e-9:
        return _EXACT_COS[k % 6]
    halves = angle / (math.pi / 2)
    k = round(halves)
    if abs(halves - k) < 1e-9 and k % 2:
        return Fraction(0)
    raise ValueError(f"cos({angle!r}) is not rational")


def format_probability(poly: ProbabilityPolynomial) -> str:
    parts = []
    for p, row in poly.cos_series().items():
        inner = " + ".join(str(a) if j == 0 else f"{a}*cos({j}*S)" if j != 1 else f"{a}*cos(S)"
                           for j, a in row.items())
        parts.append(f"({inner})*|g|^{2 * p}" if p else f"({inner})")
    return " + ".join(parts) if parts else "0"


def _matches(occ: tuple, pattern: Mapping[int, int]) -> bool:
    return all(occ[m] == c for m, c in pattern.items())


def pattern_probability_polynomial(state: SymbolicState, pattern: Mapping[int, int]
                                   ) -> ProbabilityPolynomial:
    out: dict = {}
    for occ, poly in state.terms.items():
        if not _matches(occ, pattern):
            continue
        weight = reduced_norm(occ)
        items = list(poly.terms.items())
        for (m1, n1, k1), c1 in items:
            for (m2, n2, k2), c2 in items:
                key = (m1 + n2, n1 + m2, tuple(a - b for a, b in zip(k1, k2)))
                val = c1 * c2.conjugate() * weight
                out[key] = out[key] + val if key in out else val
    return ProbabilityPolynomial(out)


def probability_polynomial(state: SymbolicState, parties_subset: Iterable[int]
                           ) -> ProbabilityPolynomial:
    """``P(+ on every party of the subset)``: sum of ``|amp|^2`` over occupations
    with exactly one photon in each mode of those parties."""
    pattern = {}
    for x in parties_subset:
        if not 0 <= x < state.parties:
            raise ValueError(f"party {x} out of range")
        pattern[2 * x] = 1
        pattern[2 * x + 1] = 1
    return pattern_probability_polynomial(state, pattern)


def subset_probability_polynomials(state: SymbolicState) -> dict[tuple[int, ...], ProbabilityPolynomial]:
    n = state.parties
    return {s: probability_polynomial(state, s)
            for r in range(1, n + 1) for s in combinations(range(n), r)}


def series_order(degree: int) -> int:
    """Amplitude order that makes a photon-bearing event exact through ``|g|^(2*degree)``."""
    return max(2 * degree - 1, 1)


def series_probability(parties: int, pump_pattern, parties_subset, degree: int
                       ) -> ProbabilityPolynomial:
    """Event probability exact through ``|g|^(2*degree)``.

    Uses amplitudes to order ``2*degree - 1`` and drops the partially summed
    higher powers: an event with at least one photon pairs amplitude orders
    ``i, j >= 1``, so every term with ``i + j <= 2*degree`` is present.
    """
    subset = tuple(parties_subset)
    if not subset:
        raise ValueError("event needs at least one party")
    state = evolve_network_symbolic(parties, pump_pattern, series_order(degree))
    return probability_polynomial(state, subset).truncated_degree(degree)


def evaluate(poly: PolynomialAmplitude, g: complex, phases: Sequence[float] | float = ()) -> complex | float:
    """Substitute numbers into a polynomial.  A :class:`ProbabilityPolynomial`
    accepts either per-party phases or their sum and returns a float."""
    if isinstance(poly, ProbabilityPolynomial):
        total = sum(phases) if isinstance(phases, (list, tuple)) else float(phases or 0.0)
        return poly.value(g, total)
    if not isinstance(phases, (list, tuple)):
        raise TypeError("amplitude polynomials need per-party phases")
    return poly.evaluate(g, phases)


def dumps_symbolic_state(state: SymbolicState) -> str:
    return json.dumps(state.to_dict(), indent=1)


def loads_symbolic_state(text: str) -> SymbolicState:
    return SymbolicState.from_dict(json.loads(text))
