"""Dichotomic behaviors of the PDC ring and the Bell expressions evaluated on them.

Outcome ``+`` at a party is the double click: exactly one photon in each of its
two modes.  Every other local result is ``-``.  Settings are labelled 1 and 2;
in the on/off scenario setting 1 is "pump off" and setting 2 "pump on", both
with the party's fixed phase.

An *event* is a mapping ``{party: setting}`` and stands for "``+`` at each of
those parties under those settings", marginal over everyone else.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import network as net
from .network import NetworkSpec, PartySetting

NS_TOL = 1e-10
NORM_TOL = 1e-10
CLAMP_TOL = 1e-12
NEGATIVE_ABORT = 1e-9
DEFAULT_PHASE = math.pi / 3


class ConsistencyError(ArithmeticError):
    """Inclusion-exclusion produced a clearly negative probability."""


@dataclass(frozen=True)
class SettingsProfile:
    """Two settings per party: ``settings[x] = (setting_1, setting_2)``."""

    settings: tuple[tuple[PartySetting, PartySetting], ...]

    @property
    def parties(self) -> int:
        return len(self.settings)

    @classmethod
    def on_off(cls, phases: Sequence[float]) -> "SettingsProfile":
        return cls(tuple((PartySetting(False, p), PartySetting(True, p)) for p in phases))

    @classmethod
    def phases_only(cls, phase_pairs: Sequence[tuple[float, float]]) -> "SettingsProfile":
        return cls(tuple((PartySetting(True, a), PartySetting(True, b)) for a, b in phase_pairs))

    def choice(self, setting_vector: Sequence[int]) -> list[PartySetting]:
        return [self.settings[x][s - 1] for x, s in enumerate(setting_vector)]

    def labels(self) -> list[list[str]]:
        return [[s.label() for s in pair] for pair in self.settings]


def setting_vectors(parties: int):
    return itertools.product((1, 2), repeat=parties)


def outcome_vectors(parties: int):
    return itertools.product("+-", repeat=parties)


class Behavior:
    """Joint table ``P(o | s)`` stored as an array of shape ``(2,) * 2N``.

    Axes ``0..N-1`` index settings (0 -> setting 1), axes ``N..2N-1`` index
    outcomes (0 -> ``+``).  The dtype is float, or object for exact rationals.
    """

    def __init__(self, table, settings_labels=None):
        table = np.asarray(table)
        if table.ndim % 2 or any(d != 2 for d in table.shape):
            raise ValueError(f"behavior table must have shape (2,)*2N, got {table.shape}")
        self.table = table
        self.parties = table.ndim // 2
        self.settings_labels = settings_labels

    @property
    def exact(self) -> bool:
        return self.table.dtype == object

    def conditional(self, setting_vector: Sequence[int]) -> np.ndarray:
        return self.table[tuple(s - 1 for s in setting_vector)]

    def probability(self, setting_vector: Sequence[int], outcomes: Sequence[str]) -> float:
        idx = tuple(s - 1 for s in setting_vector) + tuple(0 if o == "+" else 1 for o in outcomes)
        return self.table[idx]

    def event_probability(self, event: Mapping[int, int], rest_setting: int = 1):
        """``P(+ on the event's parties)`` with other parties at ``rest_setting``
        and marginalised."""
        svec = [rest_setting] * self.parties
        for x, s in event.items():
            if not 0 <= x < self.parties or s not in (1, 2):
                raise ValueError(f"bad event entry {x}: {s}")
            svec[x] = s
        cond = self.conditional(svec)
        idx = tuple(0 if x in event else slice(None) for x in range(self.parties))
        sub = cond[idx]
        return sub.sum() if isinstance(sub, np.ndarray) else sub

    def __getitem__(self, event):
        return self.event_probability(dict(event))

    def normalization_error(self) -> float:
        sums = self.table.reshape(2 ** self.parties, -1).sum(axis=1)
        return float(max(abs(float(x) - 1) for x in sums))

    def signaling_error(self) -> float:
        """Largest change of any marginal when a dropped party's setting flips."""
        n = self.parties
        worst = 0.0
        for subset_size in range(1, n):
            for subset in itertools.combinations(range(n), subset_size):
                rest = [x for x in range(n) if x not in subset]
                axes = tuple(n + x for x in rest)
                marg = self.table.sum(axis=axes)
                # marg axes: settings of all n parties, then outcomes of subset
                for x in rest:
                    a = np.take(marg, 0, axis=x)
                    b = np.take(marg, 1, axis=x)
                    diff = np.abs((a - b).astype(float))
                    worst = max(worst, float(diff.max()))
        return worst

    def check(self, ns_tol: float = NS_TOL, norm_tol: float = NORM_TOL) -> None:
        if self.normalization_error() > norm_tol:
            raise ValueError(f"behavior not normalised: {self.normalization_error():.3g}")
        lo = float(min(self.table.ravel()))
        if lo < -CLAMP_TOL:
            raise ValueError(f"behavior has negative entry {lo:.3g}")
        if self.signaling_error() > ns_tol:
            raise ValueError(f"behavior is signaling: {self.signaling_error():.3g}")

    def to_float(self) -> "Behavior":
        return Behavior(self.table.astype(float), self.settings_labels)

    def permute_parties(self, perm: Sequence[int]) -> "Behavior":
        """New behavior whose party ``i`` is old party ``perm[i]``."""
        n = self.parties
        axes = list(perm) + [n + p for p in perm]
        return Behavior(np.transpose(self.table, axes), self.settings_labels)

    def relabel_outcomes(self, party: int, setting: int | None = None) -> "Behavior":
        """Swap ``+``/``-`` of ``party`` (for one setting, or for both)."""
        t = self.table.copy()
        n = self.parties
        for s in ((setting,) if setting else (1, 2)):
            idx = [slice(None)] * (2 * n)
            idx[party] = s - 1
            view = t[tuple(idx)]
            t[tuple(idx)] = np.flip(view, axis=n + party - 1)
        return Behavior(t, self.settings_labels)

    def mix(self, other: "Behavior", weight) -> "Behavior":
        """``weight * self + (1 - weight) * other``."""
        return Behavior(weight * self.table + (1 - weight) * other.table, self.settings_labels)

    def cells(self):
        n = self.parties
        for s in setting_vectors(n):
            for o in outcome_vectors(n):
                yield s, o, self.probability(s, o)

    def to_dict(self) -> dict:
        return {"N": self.parties,
                "settings_labels": self.settings_labels,
                "table": [{"s": list(s), "o": list(o), "p": _json_number(p)}
                          for s, o, p in self.cells()]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Behavior":
        n = int(data["N"])
        table = np.zeros((2,) * (2 * n))
        for cell in data["table"]:
            idx = tuple(s - 1 for s in cell["s"]) + tuple(0 if o == "+" else 1 for o in cell["o"])
            table[idx] = float(cell["p"])
        return cls(table, data.get("settings_labels"))


def _json_number(p):
    if isinstance(p, Fraction):
        return float(p)
    return float(p)


def behavior_from_subset_probabilities(parties: int,
                                       plus_probs: Callable[[tuple[int, ...]], Mapping],
                                       exact: bool = False, settings_labels=None) -> Behavior:
    """Full joint from ``P(+ on S | s)`` for every subset ``S`` by inclusion-exclusion.

    ``plus_probs(s)`` returns ``{S: P(+ on S | s)}`` (``S`` a sorted tuple); the
    empty subset defaults to 1.
    """
    n = parties
    table = np.empty((2,) * (2 * n), dtype=object if exact else float)
    subsets = [tuple(x for x in range(n) if m >> x & 1) for m in range(1 << n)]
    for s in setting_vectors(n):
        q = dict(plus_probs(s))
        q.setdefault((), Fraction(1) if exact else 1.0)
        for mask in range(1 << n):
            plus = subsets[mask]
            total = Fraction(0) if exact else 0.0
            for sup in range(1 << n):
                if sup & mask == mask:
                    sign = -1 if bin(sup ^ mask).count("1") % 2 else 1
                    total += sign * q[subsets[sup]]
            if total < 0:
                if total < -NEGATIVE_ABORT:
                    raise ConsistencyError(
                        f"inclusion-exclusion gave {float(total):.3g} at s={s}, plus={plus}")
                if total >= -CLAMP_TOL:
                    total = total * 0
            o = tuple(0 if x in plus else 1 for x in range(n))
            table[tuple(x - 1 for x in s) + o] = total
    return Behavior(table, settings_labels)


def behavior_from_network(network: NetworkSpec, profile: SettingsProfile, g: complex | None = None,
                          cutoff: int = net.DEFAULT_CUTOFF) -> Behavior:
    """Numeric behavior: one evolution per settings vector."""
    if g is not None:
        network = network.with_g(g)
    if profile.parties != network.parties:
        raise ValueError("profile and network disagree on the number of parties")
    cache = {}

    def plus_probs(s):
        settings = tuple(profile.choice(s))
        if settings not in cache:
            report = net.evolve_network(network, settings, cutoff=cutoff)
            cache[settings] = net.subset_probabilities(report, network.parties)
        return cache[settings]

    return behavior_from_subset_probabilities(network.parties, plus_probs,
                                              settings_labels=profile.labels())


def behavior_from_polynomials(parties: int, profile: SettingsProfile,
                              poly_for: Callable, g, exact: bool = True) -> Behavior:
    """Behavior from symbolic probability polynomials.

    ``poly_for(pumps, subset)`` returns a probability polynomial.  ``P(+ on S)``
    for a settings vector uses that vector's settings on ``S`` and setting 1 on
    the parties outside ``S``, so the table is no-signaling by construction.
    Phase dependence enters only through the sum of the phases, so phases must
    make every cosine needed rational when ``exact`` is requested; pass them via
    the profile.
    """
    from .symbolic import exact_cos

    def plus_probs(s):
        out = {}
        for mask in range(1, 1 << parties):
            subset = tuple(x for x in range(parties) if mask >> x & 1)
            chosen = [profile.settings[x][(s[x] if x in subset else 1) - 1]
                      for x in range(parties)]
            pumps = tuple(c.pump for c in chosen)
            phase_sum = sum(c.phase for c in chosen)
            poly = poly_for(pumps, subset)
            if exact:
                out[subset] = poly.exact_value(g, exact_cos(phase_sum))
            else:
                out[subset] = poly.value(g, phase_sum)
        return out

    return behavior_from_subset_probabilities(parties, plus_probs, exact=exact,
                                              settings_labels=profile.labels())


# --- Bell expressions -------------------------------------------------------

def _prob(source, event: Mapping[int, int]):
    if isinstance(source, Behavior):
        return source.event_probability(event)
    key = event_key(event)
    try:
        return source[key]
    except KeyError:
        raise ValueError(f"probability for event {format_event(event)} is missing") from None


def event_key(event: Mapping[int, int]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(event.items()))


def format_event(event: Mapping[int, int]) -> str:
    from .fock import party_letter
    return "P(" + ",".join(party_letter(x).upper() + ("'" if s == 2 else "")
                           for x, s in sorted(event.items())) + ")"


def lifted_ch(source, pair: tuple[int, int] = (0, 1), lift: Mapping[int, int] | None = None):
    """Clauser-Horne combination on ``pair`` conjoined with the ``lift`` event.

    ``P(a1 b1 L) + P(a1 b2 L) + P(a2 b1 L) - P(a2 b2 L) - P(a1 L) - P(b1 L)``;
    local realism requires it to be ``<= 0``.
    """
    lift = dict(lift or {})
    a, b = pair
    if a == b or a in lift or b in lift:
        raise ValueError("pair parties must be distinct and not lifted")

    def p(**ev):
        e = dict(lift)
        e.update({a: ev["a"]} if "a" in ev else {})
        e.update({b: ev["b"]} if "b" in ev else {})
        return _prob(source, e)

    return (p(a=1, b=1) + p(a=1, b=2) + p(a=2, b=1) - p(a=2, b=2) - p(a=1) - p(b=1))


def lifted_ch_terms(pair=(0, 1), lift=None) -> list[tuple[int, dict]]:
    """The six (sign, event) pairs of :func:`lifted_ch`."""
    lift = dict(lift or {})
    a, b = pair
    terms = [(1, {a: 1, b: 1}), (1, {a: 1, b: 2}), (1, {a: 2, b: 1}),
             (-1, {a: 2, b: 2}), (-1, {a: 1}), (-1, {b: 1})]
    return [(sign, {**ev, **lift}) for sign, ev in terms]


def _parties_of(source) -> int | None:
    if isinstance(source, Behavior):
        return source.parties
    return getattr(source, "parties", None)


def _require_parties(source, n: int, name: str):
    k = _parties_of(source)
    if k is not None and k != n:
        raise ValueError(f"{name} needs {n} parties, got {k}")


def two_party_ch_value(source):
    return lifted_ch(source, (0, 1))


def lifted_ch_value(source):
    """``P(A,B,C') + P(A,B',C') + P(A',B,C') - P(A',B',C') - P(A,C') - P(B,C')``."""
    _require_parties(source, 3, "lifted CH")
    return lifted_ch(source, (0, 1), {2: 2})


def symmetrized_ch_value(source):
    _require_parties(source, 3, "symmetrized CH")
    return sum(lifted_ch(source, tuple(y for y in range(3) if y != x), {x: 2}) for x in range(3))


def genuine_tripartite_value(source):
    return symmetrized_ch_value(source) - _prob(source, {0: 2, 1: 2, 2: 2})


def doubly_lifted_ch_value(source):
    _require_parties(source, 4, "doubly lifted CH")
    return lifted_ch(source, (0, 1), {2: 2, 3: 2})


def n_lifted_ch_value(source, parties: int | None = None):
    """CH on parties 0, 1 lifted by the on-setting ``+`` of parties ``2..N-1``."""
    n = parties or _parties_of(source)
    if n is None or n < 2:
        raise ValueError("number of parties is required")
    return lifted_ch(source, (0, 1), {x: 2 for x in range(2, n)})


def correlation_tensor(behavior: Behavior) -> dict[tuple[int, ...], float]:
    n = behavior.parties
    signs = np.array([1.0, -1.0])
    out = {}
    for s in setting_vectors(n):
        cond = behavior.conditional(s).astype(float)
        e = cond
        for _ in range(n):
            e = np.tensordot(e, signs, axes=([0], [0]))
        out[s] = float(e)
    return out


def wwwzb_condition(correlations: Mapping[tuple[int, ...], float]) -> float:
    """``sum_k |xi(k)|`` with ``xi(k) = 2^-N sum_s (-1)^(k.(s-1)) E(s)``.

    Correlations admit a local model iff the value is at most 1.
    """
    keys = list(correlations)
    n = len(keys[0])
    if len(keys) != 2 ** n:
        raise ValueError("need E(s) for all 2^N settings vectors")
    total = 0.0
    for k in itertools.product((0, 1), repeat=n):
        xi = sum((-1) ** sum(kx * (sx - 1) for kx, sx in zip(k, s)) * correlations[s]
                 for s in keys) / 2 ** n
        total += abs(xi)
    return total


# --- leading order ----------------------------------------------------------

@dataclass(frozen=True)
class LeadingTerm:
    """``|g|^(2*power) * (constant + cosine * cos(sum(phi)))``."""

    power: int
    constant: Fraction
    cosine: Fraction = Fraction(0)

    def value(self, g, phase_sum: float = 0.0, visibility: float = 1.0) -> float:
        g2 = abs(complex(g)) ** 2
        return g2 ** self.power * (float(self.constant)
                                   + visibility * float(self.cosine) * math.cos(phase_sum))


def leading_order_probabilities(parties: int, pump_pattern: Sequence[bool]) -> LeadingTerm:
    """Leading term of the full N-fold double-click probability.

    With a pump off somewhere every photon is traced back to the sources, so the
    probability is ``|g|^(2N)`` with no phase dependence; with every pump on the
    source and station emissions interfere to ``2|g|^(2N)(1 + cos sum(phi))``.
    """
    pumps = [p == "on" if isinstance(p, str) else bool(p) for p in pump_pattern]
    if len(pumps) != parties:
        raise ValueError(f"expected {parties} pump settings")
    if all(pumps):
        return LeadingTerm(parties, Fraction(2), Fraction(2))
    return LeadingTerm(parties, Fraction(1))


class LeadingOrderModel(Mapping):
    """Probability set for the lifted CH family at leading order.

    Every event used by a (multiply) lifted CH expression with a pump off
    somewhere equals ``|g|^(2N)``; the all-on event carries the interference
    term with visibility ``V``.
    """

    def __init__(self, parties: int, g: float = 1.0, phase_sum: float = math.pi,
                 visibility: float = 1.0):
        self.parties = parties
        self.g = g
        self.phase_sum = phase_sum
        self.visibility = visibility
        events = set()
        n = parties
        if n == 3:
            for x in range(3):
                others = tuple(y for y in range(3) if y != x)
                events.update(event_key(e) for _, e in lifted_ch_terms(others, {x: 2}))
        else:
            events.update(event_key(e) for _, e in
                          lifted_ch_terms((0, 1), {x: 2 for x in range(2, n)}))
        self._events = sorted(events)

    def __getitem__(self, key):
        event = dict(key)
        if key not in self._events:
            raise KeyError(key)
        if len(event) == self.parties and all(s == 2 for s in event.values()):
            term = leading_order_probabilities(self.parties, [True] * self.parties)
        else:
            term = LeadingTerm(self.parties, Fraction(1))
        return term.value(self.g, self.phase_sum, self.visibility)

    def __iter__(self):
        return iter(self._events)

    def __len__(self):
        return len(self._events)


class SymbolicModel(Mapping):
    """Event probabilities from the symbolic engine at amplitude order ``order``.

    Parties outside an event are off.  ``visibility`` scales every phase
    harmonic.  A rational ``g`` with a phase sum whose cosine is rational gives
    exact :class:`~fractions.Fraction` values.
    """

    def __init__(self, parties: int, g=0.1, phase_sum: float = math.pi,
                 visibility=1, order: int = 4):
        self.parties = parties
        self.g = g
        self.phase_sum = phase_sum
        self.visibility = visibility
        self.order = order
        self._events = sorted(event_key(dict(zip(xs, ss)))
                              for k in range(1, parties + 1)
                              for xs in itertools.combinations(range(parties), k)
                              for ss in itertools.product((1, 2), repeat=k))

    def polynomial(self, event: Mapping[int, int]):
        from . import symbolic
        pumps = tuple(event.get(x) == 2 for x in range(self.parties))
        state = symbolic.evolve_network_symbolic(self.parties, pumps, self.order)
        return symbolic.probability_polynomial(state, tuple(sorted(event)))

    def __getitem__(self, key):
        from .symbolic import chebyshev_t, exact_cos
        if key not in self._events:
            raise KeyError(key)
        series = self.polynomial(dict(key)).cos_series()
        v = self.visibility
        if isinstance(self.g, Fraction):
            cos_s = exact_cos(self.phase_sum)
            g2 = self.g * self.g
            return sum((g2 ** p * sum(a * (1 if j == 0 else v * chebyshev_t(j, cos_s))
                                      for j, a in row.items())
                        for p, row in series.items()), Fraction(0))
        g2 = abs(complex(self.g)) ** 2
        return sum(g2 ** p * sum(float(a) * (1.0 if j == 0 else v * math.cos(j * self.phase_sum))
                                 for j, a in row.items())
                   for p, row in series.items())

    def __iter__(self):
        return iter(self._events)

    def __len__(self):
        return len(self._events)


@dataclass(frozen=True)
class VisibilityReport:
    V_threshold_ch: float
    V_threshold_genuine: float
    exact_ch: Fraction = Fraction(1, 2)
    exact_genuine: Fraction = Fraction(5, 8)
    bisection_ch: float | None = None
    bisection_genuine: float | None = None

    def to_dict(self) -> dict:
        return {"V_threshold_ch": self.V_threshold_ch,
                "V_threshold_genuine": self.V_threshold_genuine,
                "exact_ch": str(self.exact_ch), "exact_genuine": str(self.exact_genuine),
                "bisection_ch": self.bisection_ch, "bisection_genuine": self.bisection_genuine}


def _solve_linear_in_v(fn) -> Fraction:
    """Root of ``fn(V)`` assuming ``fn`` is affine in ``V`` (exact rationals)."""
    f0, f1 = fn(Fraction(0)), fn(Fraction(1))
    if f1 == f0:
        raise ValueError("expression does not depend on the visibility")
    return f0 / (f0 - f1)


def bisect_root(fn, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-10) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if (flo > 0) == (fhi > 0):
        raise ValueError("root is not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def visibility_thresholds(model_factory: Callable | None = None,
                          full_order: Callable | None = None) -> VisibilityReport:
    """Visibility needed to violate the lifted CH and the genuine-tripartite
    inequality at ``sum(phi) = pi``.

    The exact thresholds come from the leading-order expressions
    ``-(1 + 2 V cos)`` and ``-(5 + 8 V cos)``, which are affine in ``V``.
    ``full_order(V)`` may return a full-order behavior with visibility ``V``;
    the thresholds are then also located by bisection on it.
    """
    def lead(v):
        # exact rational evaluation of the leading-order expressions
        cos = Fraction(-1)
        return (-(1 + 2 * v * cos), -(5 + 8 * v * cos))

    v_ch = _solve_linear_in_v(lambda v: lead(v)[0])
    v_gen = _solve_linear_in_v(lambda v: lead(v)[1])
    model_factory = model_factory or (lambda v: LeadingOrderModel(3, 0.1, math.pi, v))
    num_ch = bisect_root(lambda v: lifted_ch_value(model_factory(v)))
    num_gen = bisect_root(lambda v: genuine_tripartite_value(model_factory(v)))
    if abs(num_ch - float(v_ch)) > 1e-6 or abs(num_gen - float(v_gen)) > 1e-6:
        raise ArithmeticError("leading-order bisection disagrees with the exact threshold")
    b_ch = b_gen = None
    if full_order is not None:
        b_ch = bisect_root(lambda v: lifted_ch_value(full_order(v)), tol=1e-6)
        b_gen = bisect_root(lambda v: genuine_tripartite_value(full_order(v)), tol=1e-6)
    return VisibilityReport(float(v_ch), float(v_gen), v_ch, v_gen, b_ch, b_gen)


def on_off_behavior(g: float, phase_sum: float = math.pi, parties: int = 3,
                    cutoff: int = net.DEFAULT_CUTOFF) -> Behavior:
    """Numeric on/off-scenario behavior with equal phases summing to ``phase_sum``."""
    network = net.build_ring_network(parties, g)
    profile = SettingsProfile.on_off([phase_sum / parties] * parties)
    return behavior_from_network(network, profile, cutoff=cutoff)


def phase_averaged_behavior(g: float, parties: int = 3, samples: int = 16,
                            cutoff: int = net.DEFAULT_CUTOFF) -> Behavior:
    """On/off behavior averaged uniformly over ``sum(phi)``; exact for every
    harmonic below ``samples``."""
    tables = [on_off_behavior(g, 2 * math.pi * k / samples, parties, cutoff).table
              for k in range(samples)]
    return Behavior(np.mean(tables, axis=0))


def visibility_behavior(g: float, visibility: float, phase_sum: float = math.pi,
                        parties: int = 3, averaged: Behavior | None = None) -> Behavior:
    """``V * B(sum phi) + (1 - V) * <B>``: interference contrast scaled by ``V``."""
    averaged = averaged or phase_averaged_behavior(g, parties)
    return on_off_behavior(g, phase_sum, parties).mix(averaged, visibility)


def sweep_rows(values: Sequence[tuple[float, Mapping[str, float]]]) -> str:
    """CSV text for an inequality sweep (12 significant digits)."""
    if not values:
        return ""
    columns = list(values[0][1])
    lines = ["phase_sum," + ",".join(columns)]
    for phase, row in values:
        lines.append(",".join([f"{phase:.12g}"] + [f"{row[c]:.12g}" for c in columns]))
    return "\n".join(lines) + "\n"


def dumps_behavior(behavior: Behavior) -> str:
    return json.dumps(behavior.to_dict(), indent=1)


def loads_behavior(text: str) -> Behavior:
    return Behavior.from_dict(json.loads(text))
