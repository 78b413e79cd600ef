"""Interwoven ring of PDC crystals and its numeric (truncated-Fock) evolution.

Party ``x`` owns modes ``x1`` and ``x2``.  Source crystal ``k`` emits into
``(k, slot 1)`` and ``(k-1 mod N, slot 2)``; the station crystal of party ``x``
emits into its own pair ``(x1, x2)``.  A phase shifter ``exp(i phi_x n(x1))``
sits between the source layer and the station layer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import fock
from .fock import DEFAULT_CUTOFF, FockState, ModeId

G_GUARD = 0.5
TAU_TAYLOR = 1e-18
DEFAULT_TAYLOR_TERMS = 40
UNITARITY_EPS = 1e-10


class ConvergenceError(ArithmeticError):
    """The Taylor series of a squeezer did not converge within the term budget."""


@dataclass(frozen=True)
class SqueezerSpec:
    mode_i: ModeId
    mode_j: ModeId
    g: complex

    def __post_init__(self):
        if self.mode_i == self.mode_j:
            raise ValueError("a squeezer needs two distinct modes")
        if abs(self.g) > G_GUARD:
            raise ValueError(f"|g| = {abs(self.g):.3g} exceeds the validity guard {G_GUARD}")

    @property
    def modes(self) -> tuple[ModeId, ModeId]:
        return (self.mode_i, self.mode_j)

    def with_g(self, g: complex) -> "SqueezerSpec":
        return SqueezerSpec(self.mode_i, self.mode_j, complex(g))


@dataclass(frozen=True)
class NetworkSpec:
    parties: int
    sources: tuple[SqueezerSpec, ...]
    stations: tuple[SqueezerSpec, ...]
    phase_modes: tuple[ModeId, ...] = field(default=())

    def __post_init__(self):
        n = self.parties
        if n < 2:
            raise ValueError(f"a ring needs at least 2 parties, got {n}")
        if len(self.sources) != n or len(self.stations) != n:
            raise ValueError("need exactly one source and one station per party")
        if not self.phase_modes:
            object.__setattr__(self, "phase_modes", tuple(ModeId(x, 1) for x in range(n)))
        for k, src in enumerate(self.sources):
            if src.modes != (ModeId(k, 1), ModeId((k - 1) % n, 2)):
                raise ValueError(f"source {k} breaks the ring rule: {src.modes}")
        for x, st in enumerate(self.stations):
            if st.modes != (ModeId(x, 1), ModeId(x, 2)):
                raise ValueError(f"station {x} must couple its own modes: {st.modes}")

    @property
    def mode_count(self) -> int:
        return 2 * self.parties

    @property
    def g(self) -> complex:
        return self.sources[0].g

    def with_g(self, g: complex) -> "NetworkSpec":
        return build_ring_network(self.parties, g)


@dataclass(frozen=True)
class PartySetting:
    pump: bool
    phase: float = 0.0

    @property
    def canonical_phase(self) -> float:
        return math.fmod(self.phase, 2 * math.pi) % (2 * math.pi)

    def __eq__(self, other):
        if not isinstance(other, PartySetting):
            return NotImplemented
        return self.pump == other.pump and math.isclose(
            self.canonical_phase, other.canonical_phase, abs_tol=1e-12)

    def __hash__(self):
        return hash((self.pump, round(self.canonical_phase, 10)))

    def label(self) -> str:
        return f"{'on' if self.pump else 'off'}@{self.phase:.6g}"


@dataclass(frozen=True)
class EvolutionReport:
    final_state: FockState
    leaked_weight: float
    taylor_terms_used: int

    def to_dict(self) -> dict:
        data = fock.state_to_dict(self.final_state)
        data["report"] = {"leaked_weight": self.leaked_weight,
                          "taylor_terms_used": self.taylor_terms_used,
                          "norm_sq": fock.norm_sq(self.final_state)}
        return data


def build_ring_network(parties: int, g: complex = 0.1) -> NetworkSpec:
    if parties < 2:
        raise ValueError(f"a ring needs at least 2 parties, got {parties}")
    g = complex(g)
    sources = tuple(SqueezerSpec(ModeId(k, 1), ModeId((k - 1) % parties, 2), g)
                    for k in range(parties))
    stations = tuple(SqueezerSpec(ModeId(x, 1), ModeId(x, 2), g) for x in range(parties))
    return NetworkSpec(parties, sources, stations)


def _apply_generator(state: FockState, spec: SqueezerSpec):
    """``(g a^dag b^dag + conj(g) a b)`` on ``state``; also returns the overflow."""
    i, j = spec.mode_i.index, spec.mode_j.index
    up, over_occ, over_amps = fock.raise_pair(state, i, j)
    down = fock.lower_pair(state, i, j)
    return up.scaled(spec.g) + down.scaled(spec.g.conjugate()), over_occ, over_amps * spec.g


def apply_squeezer_exact(state: FockState, spec: SqueezerSpec,
                         max_taylor_terms: int = DEFAULT_TAYLOR_TERMS,
                         tau: float = TAU_TAYLOR):
    """``exp(i (g a^dag b^dag + conj(g) a b))`` by its Taylor series.

    Returns ``(new_state, terms_used)``.  ``new_state.leaked_weight`` grows by
    the weight of the components the series pushed past the cutoff.
    """
    if state.cutoff < 4:
        raise ValueError("squeezer evolution needs cutoff >= 4")
    if max_taylor_terms < 8:
        raise ValueError("max_taylor_terms must be >= 8")
    if spec.g == 0:
        return state, 0
    total = state.with_leak(0.0)
    term = total
    overflow_occ, overflow_amps = [], []
    for j in range(1, max_taylor_terms + 1):
        term, o_occ, o_amps = _apply_generator(term, spec)
        factor = 1j / j
        term = term.scaled(factor)
        overflow_occ.append(o_occ)
        overflow_amps.append(o_amps * factor)
        total = total + term
        if math.sqrt(fock.norm_sq(term)) < tau:
            break
    else:
        raise ConvergenceError(
            f"squeezer series still above {tau:g} after {max_taylor_terms} terms")
    leak = _coherent_weight(np.concatenate(overflow_occ), np.concatenate(overflow_amps),
                            state.cutoff)
    return total.with_leak(state.leaked_weight + leak), j


def _coherent_weight(occ, amps, cutoff) -> float:
    if occ.shape[0] == 0:
        return 0.0
    keys = fock._encode(occ, cutoff + 2)
    _, inv = np.unique(keys, return_inverse=True)
    re = np.bincount(inv, weights=amps.real)
    im = np.bincount(inv, weights=amps.imag)
    return float(np.sum(re * re + im * im))


def _normalize_settings(network: NetworkSpec, settings) -> list[PartySetting]:
    settings = [s if isinstance(s, PartySetting) else PartySetting(*s) for s in settings]
    if len(settings) != network.parties:
        raise ValueError(f"expected {network.parties} settings, got {len(settings)}")
    return settings


def evolve_network(network: NetworkSpec, settings: Sequence, cutoff: int = DEFAULT_CUTOFF,
                   max_taylor_terms: int = DEFAULT_TAYLOR_TERMS) -> EvolutionReport:
    """Sources on the vacuum, then per-party phase on slot 1, then the station
    crystals whose pump is on."""
    settings = _normalize_settings(network, settings)
    state = fock.vacuum(network.mode_count, cutoff)
    used = 0
    for src in network.sources:
        state, n = apply_squeezer_exact(state, src, max_taylor_terms)
        used = max(used, n)
    for mode, setting in zip(network.phase_modes, settings):
        if setting.phase:
            state = fock.apply_number_phase(state, mode.index, setting.phase)
    for station, setting in zip(network.stations, settings):
        if setting.pump:
            state, n = apply_squeezer_exact(state, station, max_taylor_terms)
            used = max(used, n)
    return EvolutionReport(state, state.leaked_weight, used)


def double_click_pattern(network_or_parties, parties_subset) -> dict[int, int]:
    n = network_or_parties if isinstance(network_or_parties, int) else network_or_parties.parties
    pattern = {}
    for x in parties_subset:
        if not 0 <= x < n:
            raise ValueError(f"party {x} out of range")
        pattern[2 * x] = 1
        pattern[2 * x + 1] = 1
    return pattern


def coincidence_probability(report, parties_subset) -> float:
    """Probability that every party in ``parties_subset`` sees exactly one
    photon in each of its two modes, marginal over everything else."""
    parties_subset = tuple(parties_subset)
    if not parties_subset:
        raise ValueError("parties_subset must be non-empty")
    state = report.final_state if isinstance(report, EvolutionReport) else report
    pattern = double_click_pattern(state.mode_count // 2, parties_subset)
    return fock.pattern_probability(state, pattern)


def subset_probabilities(report, parties: int) -> dict[tuple[int, ...], float]:
    """``P(+ on S)`` for every subset ``S`` of the parties (empty subset -> norm)."""
    state = report.final_state if isinstance(report, EvolutionReport) else report
    occ = state.occupations
    weights = np.abs(state.amplitudes) ** 2
    hits = np.stack([(occ[:, 2 * x] == 1) & (occ[:, 2 * x + 1] == 1) for x in range(parties)])
    out = {}
    for mask in range(1 << parties):
        subset = tuple(x for x in range(parties) if mask >> x & 1)
        sel = np.ones(len(weights), dtype=bool)
        for x in subset:
            sel &= hits[x]
        out[subset] = float(weights[sel].sum())
    return out


def network_to_dict(network: NetworkSpec, settings: Sequence) -> dict:
    settings = _normalize_settings(network, settings)
    g = network.g
    return {"parties": network.parties, "g": {"re": g.real, "im": g.imag},
            "settings": [{"pump": "on" if s.pump else "off", "phase": s.phase} for s in settings]}


def network_from_dict(data: Mapping) -> tuple[NetworkSpec, list[PartySetting]]:
    g = data.get("g", 0.1)
    if isinstance(g, Mapping):
        g = complex(g.get("re", 0.0), g.get("im", 0.0))
    network = build_ring_network(int(data["parties"]), g)
    settings = []
    for s in data.get("settings", []):
        pump = s.get("pump", "off")
        if isinstance(pump, str):
            if pump not in ("on", "off"):
                raise ValueError(f"pump must be 'on' or 'off', got {pump!r}")
            pump = pump == "on"
        settings.append(PartySetting(bool(pump), float(s.get("phase", 0.0))))
    if not settings:
        settings = [PartySetting(False, 0.0)] * network.parties
    return network, _normalize_settings(network, settings)


def load_network_file(path) -> tuple[NetworkSpec, list[PartySetting]]:
    with open(path) as fh:
        return network_from_dict(json.load(fh))
