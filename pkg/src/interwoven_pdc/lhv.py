"""Local-hidden-variable membership by linear programming.

A behavior is local iff it is a convex mixture of the ``4**N`` deterministic
strategies.  Infeasibility comes with a Farkas vector, i.e. a Bell inequality
``c . p + c0 <= 0`` that every local behavior obeys and ``p`` violates.
Certificates are compared with the lifted CH family in Collins-Gisin
coordinates ``q(U, s_U) = P(+ on U | s_U)``, where no-signaling rewritings
of the same inequality coincide.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import network as net
from .bell import (Behavior, SettingsProfile, behavior_from_subset_probabilities, lifted_ch_terms,
                   n_lifted_ch_value, symmetrized_ch_value)
from .simplex import PrecisionError, phase_one, solve_lp

MAX_PARTIES = 8
MAX_DENSE_PARTIES = 6
DEFAULT_TOL = 1e-11
WORKERS_ENV = "INTERWOVEN_WORKERS"


class ResourceLimitError(MemoryError):
    """The requested strategy table is too large to build."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """``outcomes[x][s]`` is party ``x``'s outcome (0 = ``+``) for setting ``s + 1``."""

    outcomes: tuple[tuple[int, int], ...]

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    def table(self) -> np.ndarray:
        n = self.parties
        t = np.zeros((2,) * (2 * n))
        for s in itertools.product((0, 1), repeat=n):
            o = tuple(self.outcomes[x][s[x]] for x in range(n))
            t[s + o] = 1.0
        return t

    def behavior(self) -> Behavior:
        return Behavior(self.table())

    def label(self) -> str:
        return " ".join("".join("+-"[o] for o in local) for local in self.outcomes)


def enumerate_strategies(parties: int) -> list[DeterministicStrategy]:
    if parties < 1:
        raise ValueError("need at least one party")
    if parties > MAX_PARTIES:
        raise ResourceLimitError(f"4**{parties} strategies exceed the N <= {MAX_PARTIES} guard")
    local = [(a, b) for a in (0, 1) for b in (0, 1)]
    return [DeterministicStrategy(combo) for combo in itertools.product(local, repeat=parties)]


def strategy_matrix(parties: int) -> np.ndarray:
    """Dense ``(cells, strategies)`` 0/1 matrix; rows follow ``Behavior.table.ravel()``."""
    if parties > MAX_DENSE_PARTIES:
        raise ResourceLimitError(f"dense LP for N={parties} needs 16**N entries")
    enumerate_strategies(parties)
    # local[s, o, l] = 1 iff local strategy l answers o to setting s
    local = np.zeros((2, 2, 4))
    for l, (a, b) in enumerate([(a, b) for a in (0, 1) for b in (0, 1)]):
        local[0, a, l] = 1
        local[1, b, l] = 1
    m = np.ones(())
    for _ in range(parties):
        m = np.multiply.outer(m, local)
    # axes are (s0, o0, l0, s1, o1, l1, ...); reorder to (s..., o..., l...)
    order = ([3 * x for x in range(parties)] + [3 * x + 1 for x in range(parties)]
             + [3 * x + 2 for x in range(parties)])
    m = np.transpose(m, order)
    return m.reshape(4 ** parties, 4 ** parties)


@dataclass
class Certificate:
    """Bell functional ``coeffs . p + constant``: ``<= 0`` locally, ``> 0`` on ``p``."""

    coeffs: np.ndarray
    constant: float | Fraction
    violation: float | Fraction

    @property
    def parties(self) -> int:
        return self.coeffs.ndim // 2

    def value(self, behavior) -> float:
        table = behavior.table if isinstance(behavior, Behavior) else np.asarray(behavior)
        return self.coeffs.ravel() @ table.ravel() + self.constant

    def local_bound(self) -> float:
        """Largest value over the deterministic strategies."""
        cols = strategy_matrix(self.parties)
        return float(np.max(self.coeffs.ravel().astype(float) @ cols) + float(self.constant))

    def to_dict(self) -> dict:
        return {"coeffs": [float(c) for c in self.coeffs.ravel()],
                "constant": float(self.constant), "violation": float(self.violation)}


@dataclass
class LhvVerdict:
    feasible: bool
    weights: np.ndarray | None = None
    certificate: Certificate | None = None
    solver_stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"feasible": self.feasible}
        if self.weights is not None:
            out["weights"] = [float(w) for w in self.weights]
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        out["solver_stats"] = self.solver_stats
        return out


def dumps_verdict(verdict: LhvVerdict) -> str:
    return json.dumps(verdict.to_dict(), indent=1, sort_keys=True)


def lhv_feasible(behavior: Behavior, tol: float = DEFAULT_TOL, exact: bool | None = None,
                 check: bool = True) -> LhvVerdict:
    """Solve ``{w >= 0, sum w = 1, M w = p}``.

    Exact (rational) pivoting is used for exact behaviors or on request.
    Float pivoting that loses accuracy raises :class:`PrecisionError`.
    """
    if check:
        behavior.check()
    exact = behavior.exact if exact is None else exact
    n = behavior.parties
    m = strategy_matrix(n)
    A = np.vstack([m, np.ones((1, m.shape[1]))])
    p = behavior.table.ravel()
    if exact:
        A = A.astype(int).astype(object)
        b = np.array([Fraction(v) for v in p] + [Fraction(1)], dtype=object)
    else:
        b = np.concatenate([p.astype(float), [1.0]])
    try:
        res = phase_one(A, b, tol=tol, exact=exact)
    except PrecisionError as exc:
        raise PrecisionError(f"{exc}; retry with exact=True") from None
    stats = {"iterations": res.iterations, "exact": res.exact,
             "infeasibility": float(res.infeasibility), "strategies": int(m.shape[1])}
    if res.feasible:
        w = res.x
        residual = float(np.max(np.abs((m @ w - p).astype(float))))
        if not exact and residual > tol:
            raise PrecisionError(f"reconstruction residual {residual:.3g} > {tol:g}; "
                                 "retry with exact=True")
        stats["residual"] = residual
        return LhvVerdict(True, weights=w, solver_stats=stats)
    y = res.duals
    cert = Certificate(y[:-1].reshape(behavior.table.shape), y[-1], res.infeasibility)
    # Farkas checks: local bound <= tol and strict separation
    local = (y[:-1] @ m + y[-1]).astype(float)
    value = float(cert.value(behavior))
    stats["local_bound"] = float(local.max())
    if local.max() > tol or value < 10 * tol:
        raise PrecisionError(f"certificate fails separation (local {local.max():.3g}, "
                             f"value {value:.3g}); retry with exact=True")
    return LhvVerdict(False, certificate=cert, solver_stats=stats)


def product_of_marginals(behavior: Behavior) -> Behavior:
    """Local behavior with the same single-party marginals and no correlations."""
    n = behavior.parties
    t = behavior.table
    table = None
    for x in range(n):
        # P_x(o_x | s_x), read with every other party at setting 1
        idx = tuple(slice(None) if y == x else 0 for y in range(n))
        cond = t[idx]
        local = cond.sum(axis=tuple(1 + y for y in range(n) if y != x))
        shape = [1] * (2 * n)
        shape[x] = 2
        shape[n + x] = 2
        local = local.reshape(shape)
        table = local if table is None else table * local
    return Behavior(table, behavior.settings_labels)


def lhv_visibility(behavior: Behavior, reference: Behavior, tol: float = DEFAULT_TOL,
                   exact: bool = False):
    """Largest ``v <= 1`` with ``r + v (p - r)`` local, and its dual certificate.

    ``r`` must be local, e.g. the phase-averaged behavior, in which case ``v``
    is the visibility threshold over all Bell inequalities at once.  The
    certificate increases by 1 from ``r`` to ``p``.  Returns
    ``(certificate, v_star)``; ``v_star == 1`` means ``p`` is local.
    """
    m = strategy_matrix(behavior.parties)
    cells, k = m.shape
    p = behavior.table.ravel()
    r = reference.table.ravel()
    # t = v * scale keeps the displacement column O(1)
    scale = max(abs(d) for d in p - r)
    if scale == 0:
        raise ValueError("behavior equals the reference")
    A = np.zeros((cells + 2, k + 2), dtype=object if exact else float)
    A[:cells, :k] = m
    A[:cells, k] = -(p - r) / scale
    A[cells, :k] = 1
    A[cells + 1, k] = 1
    A[cells + 1, k + 1] = 1
    b = np.concatenate([r, [1, scale]])
    c = np.zeros(k + 2)
    c[k] = -1
    res = solve_lp(c, A, b, tol=tol, exact=exact)
    if not res.feasible:
        raise ValueError("reference behavior is not local")
    v_star = res.x[k] / scale
    y = res.duals
    cert = Certificate(y[:cells].reshape(behavior.table.shape), y[cells],
                       y[:cells] @ p + y[cells])
    return cert, v_star


# --- Collins-Gisin coordinates ---------------------------------------------

# per party: rows = (not in U, in U with setting 1, in U with setting 2);
# columns = (s1 +, s1 -, s2 +, s2 -)
_CG_LOCAL = np.array([[0, 1, 0, 1],
                      [1, -1, 0, 0],
                      [0, 0, 1, -1]])


def cg_coordinates(parties: int) -> list[tuple[tuple[int, int], ...]]:
    """Labels of the CG vector: each entry is an event ``((party, setting), ...)``."""
    out = []
    for idx in itertools.product(range(3), repeat=parties):
        out.append(tuple((x, c) for x, c in enumerate(idx) if c))
    return out


def to_collins_gisin(coeffs, constant=0):
    """Coefficient vector on ``(1, q(U, s_U)...)`` of the functional ``coeffs . p + constant``.

    Entry 0 (empty event) holds the constant term.
    """
    coeffs = np.asarray(coeffs)
    n = coeffs.ndim // 2
    # interleave to (s0, o0, s1, o1, ...) then contract each party's 2x2 block
    t = np.transpose(coeffs, [a for x in range(n) for a in (x, n + x)])
    t = t.reshape((4,) * n)
    local = _CG_LOCAL.astype(object) if coeffs.dtype == object else _CG_LOCAL
    for x in range(n):
        t = np.tensordot(local, t, axes=([1], [x]))
        t = np.moveaxis(t, 0, x)
    t = t.ravel().copy()
    t[0] = t[0] + constant
    return t


def behavior_cg(behavior) -> np.ndarray:
    """CG coordinates ``(1, q(U, s_U)...)`` of a behavior, aligned with
    :func:`cg_coordinates`."""
    if not isinstance(behavior, Behavior):
        behavior = Behavior(np.asarray(behavior))
    return np.array([behavior.event_probability(dict(e)) if e else 1
                     for e in cg_coordinates(behavior.parties)])


@dataclass
class BellInequality:
    """``sum coeff * q(event) <= 0`` in CG coordinates, scaled to unit max coefficient."""

    parties: int
    coefficients: dict

    def vector(self) -> np.ndarray:
        labels = cg_coordinates(self.parties)
        return np.array([float(self.coefficients.get(e, 0)) for e in labels])

    def value(self, behavior) -> float:
        return float(self.vector() @ behavior_cg(behavior))

    def format(self) -> str:
        from .bell import format_event
        parts = []
        for event, c in sorted(self.coefficients.items()):
            name = format_event(dict((x, s) for x, s in event)) if event else "1"
            parts.append(f"{float(c):+.6g}*{name}")
        return " ".join(parts) + " <= 0"


def decompose_lifted_ch(inequality: "BellInequality", tol: float = 1e-8):
    """Non-negative combination of lifted CH variants equal to ``inequality``
    (CG vectors, unit max coefficient), or ``None`` if there is none.

    Returns ``[(weight, description), ...]`` sorted by weight.
    """
    from scipy.optimize import nnls
    orbit = lifted_ch_orbit(inequality.parties)
    basis = np.array([vec for _, vec in orbit]).T
    target = _normalize(inequality.vector())
    weights, residual = nnls(basis, target)
    if residual > tol:
        return None
    parts = [(float(w), desc) for w, (desc, _) in zip(weights, orbit) if w > tol]
    return sorted(parts, key=lambda item: (-item[0], describe_variant(item[1])))


def _normalize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    scale = np.max(np.abs(vec[1:])) if vec.size > 1 else 0.0
    if scale == 0:
        return vec
    return vec / scale


def certificate_to_inequality(certificate: Certificate, zero_tol: float = 1e-9) -> BellInequality:
    """Project to CG coordinates, rescale to unit max coefficient, drop zeros."""
    vec = _normalize(to_collins_gisin(certificate.coeffs, certificate.constant))
    labels = cg_coordinates(certificate.coeffs.ndim // 2)
    coeffs = {lab: float(v) for lab, v in zip(labels, vec) if abs(v) > zero_tol}
    return BellInequality(certificate.coeffs.ndim // 2, coeffs)


def lifted_ch_functional(parties: int, pair=(0, 1), lift=None, exact: bool = False):
    """Cell coefficients ``(2,)*2N`` of a lifted CH expression, with its constant."""
    n = parties
    lift = dict(lift) if lift is not None else {x: 2 for x in range(n) if x not in pair}
    coeffs = np.zeros((2,) * (2 * n), dtype=object if exact else float)
    if exact:
        coeffs[...] = Fraction(0)
    for sign, event in lifted_ch_terms(pair, lift):
        # P(+ on event) with the other parties at setting 1 and marginalised
        s = tuple(event.get(x, 1) - 1 for x in range(n))
        for o in itertools.product((0, 1), repeat=n):
            if all(o[x] == 0 for x in event):
                coeffs[s + o] += sign
    return coeffs, 0


def _relabel_functional(coeffs: np.ndarray, flips: Sequence[tuple[int, int]]) -> np.ndarray:
    n = coeffs.ndim // 2
    out = coeffs.copy()
    for party, setting in flips:
        idx = [slice(None)] * (2 * n)
        idx[party] = setting - 1
        out[tuple(idx)] = np.flip(out[tuple(idx)], axis=n + party - 1)
    return out


@lru_cache(maxsize=None)
def lifted_ch_orbit(parties: int) -> tuple:
    """Every lifted CH functional obtained by choosing the pair, the lift
    settings and outcome relabelings: ``((description, normalized CG vector), ...)``."""
    return tuple(_orbit(parties))


def _orbit(parties: int):
    seen = set()
    slots = [(x, s) for x in range(parties) for s in (1, 2)]
    for pair in itertools.permutations(range(parties), 2):
        others = [x for x in range(parties) if x not in pair]
        for lift_settings in itertools.product((1, 2), repeat=len(others)):
            lift = dict(zip(others, lift_settings))
            base, const = lifted_ch_functional(parties, pair, lift)
            for mask in range(1 << len(slots)):
                flips = [slots[i] for i in range(len(slots)) if mask >> i & 1]
                vec = _normalize(to_collins_gisin(_relabel_functional(base, flips), const))
                key = tuple(np.round(vec, 9))
                if key in seen:
                    continue
                seen.add(key)
                yield {"pair": pair, "lift": lift, "flips": flips}, vec


def match_lifted_ch(inequality: BellInequality, tol: float = 1e-6):
    """Description of the lifted CH variant equal to ``inequality`` up to
    positive scaling, or ``None``."""
    vec = _normalize(inequality.vector())
    for desc, cand in lifted_ch_orbit(inequality.parties):
        if np.max(np.abs(vec - cand)) <= tol:
            return desc
    return None


# --- sweeps -----------------------------------------------------------------

@dataclass
class SweepRow:
    g: float
    settings: tuple
    feasible: bool
    violation: float = 0.0
    match: str = ""
    ch: float | None = None

    def csv_fields(self) -> list[str]:
        return ([f"{self.g:.12g}"] + [f"{v:.12g}" for v in self.settings]
                + [str(int(self.feasible)), f"{self.violation:.12g}", self.match,
                   "" if self.ch is None else f"{self.ch:.12g}"])


@dataclass
class SweepReport:
    scenario: str
    parties: int
    grid_step: float
    rows: list[SweepRow]
    settings_header: list[str]

    @property
    def infeasible(self) -> list[SweepRow]:
        return [r for r in self.rows if not r.feasible]

    @property
    def all_feasible(self) -> bool:
        return not self.infeasible

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["g"] + self.settings_header + ["feasible", "violation", "match", "ch"])
        for row in self.rows:
            writer.writerow(row.csv_fields())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "parties": self.parties,
                "grid_step": self.grid_step, "cells": len(self.rows),
                "infeasible_cells": len(self.infeasible),
                "all_feasible": self.all_feasible}


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _grid(step: float) -> list[float]:
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(round(2 * math.pi / step))
    if not math.isclose(count * step, 2 * math.pi, rel_tol=1e-9):
        count = int(math.floor(2 * math.pi / step + 1e-9)) + 1
    return [k * step for k in range(count)]


class _SubsetCache:
    """Subset probabilities of the all-on (or mixed) network keyed by pumps and
    phase sum; the coincidence statistics depend on the phases only via their sum."""

    def __init__(self, network, cutoff=net.DEFAULT_CUTOFF):
        self.network = network
        self.cutoff = cutoff
        self.store = {}

    def __call__(self, pumps, phase_sum):
        key = (tuple(pumps), round(math.fmod(phase_sum, 2 * math.pi) % (2 * math.pi), 10))
        if key not in self.store:
            n = self.network.parties
            settings = [net.PartySetting(p, phase_sum if x == 0 else 0.0)
                        for x, p in enumerate(pumps)]
            report = net.evolve_network(self.network, settings, cutoff=self.cutoff)
            self.store[key] = net.subset_probabilities(report, n)
        return self.store[key]


def _behavior_from_cache(cache, profile: SettingsProfile) -> Behavior:
    n = profile.parties

    def plus_probs(s):
        chosen = profile.choice(s)
        return cache([c.pump for c in chosen], sum(c.phase for c in chosen))

    return behavior_from_subset_probabilities(n, plus_probs, settings_labels=profile.labels())


def phases_only_classes(grid_count: int, parties: int = 3):
    """Representatives ``(S, d)`` of phases-only settings in grid units.

    The behavior depends on the first-setting phase sum ``S`` and the per-party
    offsets ``d_x``; swapping a party's two settings maps ``(S, d_x)`` to
    ``(S + d_x, -d_x)`` and parties can be permuted, neither of which changes
    LHV feasibility.
    """
    half = grid_count // 2
    for d in itertools.combinations_with_replacement(range(half + 1), parties):
        for s in range(grid_count):
            yield s, d


def _solve_class(args):
    g, step, s, d, cutoff, tol = args
    parties = len(d)
    network = net.build_ring_network(parties, g)
    cache = _CACHE.setdefault((parties, g, cutoff), _SubsetCache(network, cutoff))
    phases = [(s * step if x == 0 else 0.0, (s * step if x == 0 else 0.0) + d[x] * step)
              for x in range(parties)]
    behavior = _behavior_from_cache(cache, SettingsProfile.phases_only(phases))
    verdict = lhv_feasible(behavior, tol=tol)
    return verdict.feasible, 0.0 if verdict.feasible else float(verdict.certificate.violation)


_CACHE: dict = {}


def phase_sweep_lp(network, g_list: Iterable[float], phase_grid_step: float,
                   scenario: str = "phases-only", tol: float = DEFAULT_TOL,
                   cutoff: int = net.DEFAULT_CUTOFF, workers: int | None = None) -> SweepReport:
    """LP verdict for every phase setting on the grid.

    ``on-off``: one phase per party (pump off/on); cells are labelled by the
    phase sum.  ``phases-only``: all pumps on, two phases per party; cells are
    the symmetry classes of :func:`phases_only_classes`.
    """
    parties = network if isinstance(network, int) else network.parties
    grid = _grid(phase_grid_step)
    g_list = [float(g) for g in g_list]
    workers = workers or _worker_count()
    rows = []
    if scenario == "on-off":
        for g in g_list:
            cache = _SubsetCache(net.build_ring_network(parties, g), cutoff)
            for phase_sum in grid:
                profile = SettingsProfile.on_off([phase_sum] + [0.0] * (parties - 1))
                behavior = _behavior_from_cache(cache, profile)
                verdict = lhv_feasible(behavior, tol=tol)
                match = ""
                violation = 0.0
                if not verdict.feasible:
                    ineq = certificate_to_inequality(verdict.certificate)
                    violation = ineq.value(behavior)
                    parts = decompose_lifted_ch(ineq)
                    match = (" + ".join(f"{w:.6g}*{describe_variant(d)}" for w, d in parts)
                             if parts else "other")
                rows.append(SweepRow(g, (phase_sum,), verdict.feasible, violation, match,
                                     float(on_off_ch_value(behavior))))
        return SweepReport(scenario, parties, phase_grid_step, rows, ["phase_sum"])
    if scenario != "phases-only":
        raise ValueError(f"unknown scenario {scenario!r}")
    count = len(grid)
    jobs = [(g, phase_grid_step, s, d, cutoff, tol)
            for g in g_list for s, d in phases_only_classes(count, parties)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_class, jobs, chunksize=64))
    else:
        results = [_solve_class(job) for job in jobs]
    for (g, _, s, d, _, _), (feasible, violation) in zip(jobs, results):
        settings = (s * phase_grid_step,) + tuple(x * phase_grid_step for x in d)
        rows.append(SweepRow(g, settings, feasible, violation))
    header = ["phase_sum_first"] + [f"offset_{x}" for x in range(parties)]
    return SweepReport(scenario, parties, phase_grid_step, rows, header)


def on_off_ch_value(behavior: Behavior) -> float:
    """Lifted CH value of an on/off behavior; the three-party value is the
    average over the three cyclic choices of the lifted party."""
    n = behavior.parties
    if n == 3:
        return symmetrized_ch_value(behavior) / 3
    return n_lifted_ch_value(behavior, n)


def describe_variant(desc: dict) -> str:
    from .fock import party_letter
    pair = "".join(party_letter(x).upper() for x in desc["pair"])
    lift = "".join(party_letter(x).upper() + ("'" if s == 2 else "")
                   for x, s in sorted(desc["lift"].items()))
    flips = ";".join(f"{party_letter(x).upper()}{s}" for x, s in desc["flips"])
    return f"CH[{pair}|{lift}]" + (f" flips {flips}" if flips else "")
