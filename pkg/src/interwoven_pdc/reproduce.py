"""Comparison of computed amplitudes and probabilities with the reference values.

Each check is a :class:`Row` with status ``pass``, ``fail`` or ``skipped``.
The reference probability table is a property of the state truncated at
amplitude order 4, so at other orders the coefficients that depend on the
truncation are skipped rather than compared.
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable

from . import network as net
from . import reference, symbolic

TABLE_ORDER = 4
DEVIATION_FACTOR = 100
DEVIATION_DEGREE = 5
PARTIES = 3


@dataclass(frozen=True)
class Row:
    section: str
    item: str
    term: str
    expected: str
    computed: str
    status: str
    deviation: str = ""

    def csv_fields(self) -> list[str]:
        return [self.section, self.item, self.term, self.expected, self.computed,
                self.status, self.deviation]


HEADER = ["section", "item", "term", "expected", "computed", "status", "deviation"]


def _occupation_label(occ) -> str:
    return "|" + ",".join(str(n) for n in occ) + ">"


def _monomial_label(m: int, n: int, k) -> str:
    parts = []
    if m:
        parts.append("g" if m == 1 else f"g^{m}")
    if n:
        parts.append("gb" if n == 1 else f"gb^{n}")
    if any(k):
        parts.append("exp(i(" + "+".join(
            f"{kx}*{symbolic._phase_name(x)}" if kx != 1 else symbolic._phase_name(x)
            for x, kx in enumerate(k) if kx) + "))")
    return "*".join(parts) or "1"


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def amplitude_rows(order: int = TABLE_ORDER) -> list[Row]:
    """One row per reference amplitude term, plus one completeness row."""
    state = symbolic.evolve_network_symbolic(PARTIES, (False,) * PARTIES, order)
    limit = min(order, TABLE_ORDER)
    rows = []
    listed = {}
    for occ, k, terms in reference.AMPLITUDES:
        computed = state.amplitude(occ)
        listed[occ] = set()
        for text, m, n in terms:
            key = (m, n, tuple(k))
            listed[occ].add(key)
            expected = symbolic.GaussianRational(*reference.parse_coefficient(text))
            value = computed.terms.get(key, symbolic.ZERO)
            status = "skipped" if m + n > order else _status(value == expected)
            rows.append(Row("amplitude", _occupation_label(occ), _monomial_label(m, n, k),
                            str(expected), str(value), status))
    # nothing beyond the listed terms up to the compared order
    extra = []
    for occ in state.terms:
        for key in state.reduced(occ).terms:
            if key[0] + key[1] <= limit and key not in listed.get(occ, ()):
                extra.append(f"{_occupation_label(occ)}:{_monomial_label(*key)}")
    rows.append(Row("amplitude", "all occupations", f"order<={limit}", "0 unlisted terms",
                    f"{len(extra)} unlisted terms", _status(not extra)))
    return rows


def _harmonic_label(p: int, j: int) -> str:
    base = f"|g|^{2 * p}"
    if j == 0:
        return base
    return base + (" cos(S)" if j == 1 else f" cos({j}S)")


def _event_label(event) -> str:
    from .fock import party_letter
    return ",".join(party_letter(x).upper() + ("'" if s == 2 else "")
                    for x, s in sorted(event.items()))


def _pumps(event) -> tuple[bool, ...]:
    return tuple(event.get(x) == 2 for x in range(PARTIES))


def probability_rows(order: int = TABLE_ORDER) -> list[Row]:
    """Coefficient-by-coefficient comparison with the reference table.

    Probabilities come from the state truncated at amplitude order ``order``
    and are kept through ``|g|^8``.  A coefficient of ``|g|^(2p)`` is compared
    at ``order == 4`` (the table's own truncation) or when ``2p <= order``,
    where it no longer depends on the truncation.
    """
    rows = []
    for name, (_, events) in reference.PROBABILITY_TABLE.items():
        expected = reference.formula(name)
        for event in events:
            state = symbolic.evolve_network_symbolic(PARTIES, _pumps(event), order)
            series = symbolic.probability_polynomial(state, tuple(sorted(event))).cos_series()
            keys = {(p, j) for p, row in expected.items() for j in row}
            keys |= {(p, j) for p, row in series.items() for j, a in row.items()
                     if a and p <= TABLE_ORDER}
            for p, j in sorted(keys):
                want = expected.get(p, {}).get(j, Fraction(0))
                got = series.get(p, {}).get(j, Fraction(0))
                checked = order == TABLE_ORDER or 2 * p <= min(order, TABLE_ORDER)
                status = _status(want == got) if checked else "skipped"
                rows.append(Row("probability", f"{name} [{_event_label(event)}]",
                                _harmonic_label(p, j), str(want), str(got), status))
    return rows


def deviation_rows(g_values: Iterable[float], phase_sum: float,
                   cutoff: int = net.DEFAULT_CUTOFF) -> list[Row]:
    """Numeric evolution against the exact series through ``|g|^10``.

    Every table event is evaluated at each ``g``; the bound is
    ``100 |g|^10``.
    """
    rows = []
    for g in g_values:
        g = float(g)
        network = net.build_ring_network(PARTIES, g)
        bound = DEVIATION_FACTOR * abs(g) ** 10
        reports = {}
        for name, (_, events) in reference.PROBABILITY_TABLE.items():
            for event in events:
                pumps = _pumps(event)
                if pumps not in reports:
                    settings = [net.PartySetting(p, phase_sum / PARTIES) for p in pumps]
                    reports[pumps] = net.evolve_network(network, settings, cutoff=cutoff)
                numeric = net.coincidence_probability(reports[pumps], sorted(event))
                series = symbolic.series_probability(PARTIES, pumps, tuple(sorted(event)),
                                                     DEVIATION_DEGREE)
                exact = series.value(g, phase_sum)
                dev = abs(numeric - exact)
                rows.append(Row("numeric", f"{name} [{_event_label(event)}]", f"g={g:.12g}",
                                f"{exact:.12g}", f"{numeric:.12g}", _status(dev <= bound),
                                f"{dev:.12g}"))
    return rows


def summary(rows: list[Row]) -> dict:
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    for row in rows:
        counts[row.status] += 1
    sections = {}
    for row in rows:
        c = sections.setdefault(row.section, {"pass": 0, "fail": 0, "skipped": 0})
        c[row.status] += 1
    return {"counts": counts, "sections": sections, "all_pass": counts["fail"] == 0,
            "failures": [asdict(r) for r in rows if r.status == "fail"]}


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()
