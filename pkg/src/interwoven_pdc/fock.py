"""Sparse multimode bosonic states and the few mode operators the PDC network needs.

A :class:`FockState` stores its non-zero terms as two parallel numpy arrays: an
``(K, M)`` integer array of occupation vectors and a length-``K`` complex array
of amplitudes.  Occupations are kept unique and sorted lexicographically, so
two states with the same terms compare equal term by term.

States are immutable: every operation returns a new state.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

TAU_PRUNE = 1e-16
EPS_NORM = 1e-12
DEFAULT_CUTOFF = 6


@dataclass(frozen=True, order=True)
class ModeId:
    """Optical mode ``x_slot`` of party ``x`` (slot 1 or 2)."""

    party: int
    slot: int

    def __post_init__(self):
        if self.party < 0:
            raise ValueError(f"party must be non-negative, got {self.party}")
        if self.slot not in (1, 2):
            raise ValueError(f"slot must be 1 or 2, got {self.slot}")

    @property
    def index(self) -> int:
        return 2 * self.party + self.slot - 1

    @classmethod
    def from_index(cls, index: int) -> "ModeId":
        if index < 0:
            raise ValueError(f"mode index must be non-negative, got {index}")
        return cls(index // 2, index % 2 + 1)

    def label(self) -> str:
        return f"{party_letter(self.party)}{self.slot}"

    def __str__(self):
        return self.label()


def party_letter(party: int) -> str:
    if party < 26:
        return chr(ord("a") + party)
    return f"p{party}"


def _as_index(mode) -> int:
    return mode.index if isinstance(mode, ModeId) else int(mode)


class FockState:
    """Immutable sparse state ``sum_n amp(n) |n>`` on ``mode_count`` modes.

    Every occupation respects ``0 <= n_k <= cutoff``.  ``leaked_weight`` is the
    squared norm that operations dropped because it would have exceeded the
    cutoff; it travels with the state so truncation error stays observable.
    """

    __slots__ = ("mode_count", "cutoff", "leaked_weight", "_occ", "_amps")

    def __init__(self, occupations, amplitudes, mode_count: int, cutoff: int,
                 leaked_weight: float = 0.0, *, _canonical: bool = False):
        _check_dims(mode_count, cutoff)
        occ = np.asarray(occupations, dtype=np.int64).reshape(-1, mode_count)
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if occ.shape[0] != amps.shape[0]:
            raise ValueError("occupations and amplitudes differ in length")
        if not _canonical:
            if occ.size and (occ.min() < 0 or occ.max() > cutoff):
                raise ValueError("occupation outside [0, cutoff]")
            occ, amps = _canonicalize(occ, amps, cutoff)
        occ.setflags(write=False)
        amps.setflags(write=False)
        self.mode_count = mode_count
        self.cutoff = cutoff
        self.leaked_weight = float(leaked_weight)
        self._occ = occ
        self._amps = amps

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, complex], mode_count: int,
                   cutoff: int = DEFAULT_CUTOFF) -> "FockState":
        occ = np.array([tuple(k) for k in terms], dtype=np.int64).reshape(-1, mode_count)
        amps = np.array([complex(v) for v in terms.values()], dtype=np.complex128)
        return cls(occ, amps, mode_count, cutoff)

    @property
    def occupations(self) -> np.ndarray:
        return self._occ

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(x) for x in row): complex(a) for row, a in zip(self._occ, self._amps)}

    def __len__(self):
        return self._amps.shape[0]

    def __getitem__(self, occupation) -> complex:
        occupation = np.asarray(occupation, dtype=np.int64)
        if occupation.shape != (self.mode_count,):
            raise ValueError("occupation has the wrong length")
        hit = np.flatnonzero((self._occ == occupation).all(axis=1))
        return complex(self._amps[hit[0]]) if hit.size else 0j

    def items(self):
        return self.terms.items()

    def with_leak(self, leaked_weight: float) -> "FockState":
        return FockState(self._occ, self._amps, self.mode_count, self.cutoff,
                         leaked_weight, _canonical=True)

    def __add__(self, other: "FockState") -> "FockState":
        _check_compatible(self, other)
        occ = np.concatenate([self._occ, other._occ])
        amps = np.concatenate([self._amps, other._amps])
        occ, amps = _canonicalize(occ, amps, self.cutoff)
        return FockState(occ, amps, self.mode_count, self.cutoff,
                         self.leaked_weight + other.leaked_weight, _canonical=True)

    def scaled(self, factor: complex) -> "FockState":
        occ, amps = _prune(self._occ, self._amps * factor)
        return FockState(occ, amps, self.mode_count, self.cutoff,
                         self.leaked_weight, _canonical=True)

    def __repr__(self):
        return f"FockState(terms={len(self)}, modes={self.mode_count}, cutoff={self.cutoff})"

    def to_json(self) -> str:
        return json.dumps(state_to_dict(self))


def _check_dims(mode_count, cutoff):
    if mode_count < 2 or mode_count % 2:
        raise ValueError(f"mode_count must be even and >= 2, got {mode_count}")
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    if (cutoff + 2) ** mode_count >= 2 ** 62:
        raise ValueError("mode_count and cutoff too large for the occupation encoding")


def _check_compatible(a: FockState, b: FockState):
    if a.mode_count != b.mode_count:
        raise ValueError(f"mode count mismatch: {a.mode_count} vs {b.mode_count}")
    if a.cutoff != b.cutoff:
        raise ValueError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")


def _check_mode(state: FockState, mode) -> int:
    idx = _as_index(mode)
    if not 0 <= idx < state.mode_count:
        raise ValueError(f"mode {mode} out of range for {state.mode_count} modes")
    return idx


def _encode(occ: np.ndarray, base: int) -> np.ndarray:
    # Mode 0 is the most significant digit, so key order is lexicographic order.
    m = occ.shape[1]
    weights = base ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return occ @ weights


def _prune(occ, amps):
    keep = np.abs(amps) >= TAU_PRUNE
    if keep.all():
        return occ, amps
    return occ[keep], amps[keep]


def _canonicalize(occ: np.ndarray, amps: np.ndarray, cutoff: int):
    """Sum duplicate occupations, sort lexicographically, prune tiny amplitudes."""
    if occ.shape[0] == 0:
        return occ, amps
    keys = _encode(occ, cutoff + 1)
    uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    if uniq.shape[0] != keys.shape[0]:
        re = np.bincount(inv, weights=amps.real, minlength=uniq.shape[0])
        im = np.bincount(inv, weights=amps.imag, minlength=uniq.shape[0])
        amps = re + 1j * im
    else:
        amps = amps[first]
    occ = occ[first]
    return _prune(occ, amps)


def vacuum(mode_count: int, cutoff: int = DEFAULT_CUTOFF) -> FockState:
    _check_dims(mode_count, cutoff)
    return FockState(np.zeros((1, mode_count), dtype=np.int64), np.ones(1),
                     mode_count, cutoff, _canonical=True)


def _pair_indices(state, mode_i, mode_j):
    i = _check_mode(state, mode_i)
    j = _check_mode(state, mode_j)
    if i == j:
        raise ValueError("pair operators need two distinct modes")
    return i, j


def raise_pair(state: FockState, mode_i, mode_j):
    """``a_i^dag a_j^dag`` split into the in-cutoff part and the dropped overflow.

    Returns ``(kept_state, overflow_occupations, overflow_amplitudes)``.  The
    overflow arrays are neither summed nor pruned.
    """
    i, j = _pair_indices(state, mode_i, mode_j)
    occ = state.occupations.copy()
    amps = state.amplitudes * np.sqrt((occ[:, i] + 1.0) * (occ[:, j] + 1.0))
    occ[:, i] += 1
    occ[:, j] += 1
    over = (occ[:, i] > state.cutoff) | (occ[:, j] > state.cutoff)
    kept_occ, kept_amps = _prune(occ[~over], amps[~over])
    # Raising a pair keeps occupations distinct and order-preserving.
    kept = FockState(kept_occ, kept_amps, state.mode_count, state.cutoff,
                     state.leaked_weight, _canonical=True)
    return kept, occ[over], amps[over]


def lower_pair(state: FockState, mode_i, mode_j) -> FockState:
    i, j = _pair_indices(state, mode_i, mode_j)
    occ = state.occupations
    alive = (occ[:, i] > 0) & (occ[:, j] > 0)
    occ = occ[alive].copy()
    amps = state.amplitudes[alive] * np.sqrt(occ[:, i] * occ[:, j].astype(float))
    occ[:, i] -= 1
    occ[:, j] -= 1
    occ, amps = _prune(occ, amps)
    return FockState(occ, amps, state.mode_count, state.cutoff,
                     state.leaked_weight, _canonical=True)


def apply_pair_creation(state: FockState, mode_i, mode_j) -> FockState:
    """``a_i^dag a_j^dag``; terms pushed past the cutoff are dropped and their
    weight is added to ``leaked_weight``."""
    kept, _, over_amps = raise_pair(state, mode_i, mode_j)
    dropped = float(np.sum(np.abs(over_amps) ** 2))
    return kept.with_leak(state.leaked_weight + dropped)


def apply_pair_annihilation(state: FockState, mode_i, mode_j) -> FockState:
    return lower_pair(state, mode_i, mode_j)


def apply_number_phase(state: FockState, mode, phi: float) -> FockState:
    """Multiply each term by ``exp(i phi n_mode)``."""
    idx = _check_mode(state, mode)
    phase = np.exp(1j * float(phi) * state.occupations[:, idx])
    return FockState(state.occupations, state.amplitudes * phase, state.mode_count,
                     state.cutoff, state.leaked_weight, _canonical=True)


def _pattern_mask(state: FockState, pattern: Mapping) -> np.ndarray:
    mask = np.ones(len(state), dtype=bool)
    for mode, count in pattern.items():
        idx = _check_mode(state, mode)
        mask &= state.occupations[:, idx] == int(count)
    return mask


def pattern_probability(state: FockState, pattern: Mapping) -> float:
    """Total weight of the terms whose occupations match ``pattern``
    (``{mode: count}``) on the constrained modes."""
    mask = _pattern_mask(state, pattern)
    return float(np.sum(np.abs(state.amplitudes[mask]) ** 2))


def inner_product(state_a: FockState, state_b: FockState) -> complex:
    """``<a|b>``, antilinear in the first argument."""
    if state_a.mode_count != state_b.mode_count:
        raise ValueError(f"mode count mismatch: {state_a.mode_count} vs {state_b.mode_count}")
    if len(state_a) == 0 or len(state_b) == 0:
        return 0j
    base = max(state_a.cutoff, state_b.cutoff) + 1
    ka = _encode(state_a.occupations, base)
    kb = _encode(state_b.occupations, base)
    _, ia, ib = np.intersect1d(ka, kb, assume_unique=True, return_indices=True)
    return complex(np.vdot(state_a.amplitudes[ia], state_b.amplitudes[ib]))


def norm_sq(state: FockState) -> float:
    return float(np.sum(np.abs(state.amplitudes) ** 2))


def total_photons(occupation: Iterable[int]) -> int:
    return int(sum(occupation))


def state_to_dict(state: FockState) -> dict:
    return {
        "mode_count": state.mode_count,
        "cutoff": state.cutoff,
        "leaked_weight": state.leaked_weight,
        "terms": [
            {"occupation": [int(x) for x in row], "re": float(a.real), "im": float(a.imag)}
            for row, a in zip(state.occupations, state.amplitudes)
        ],
    }


def state_from_dict(data: Mapping) -> FockState:
    terms = data["terms"]
    m = int(data["mode_count"])
    occ = np.array([t["occupation"] for t in terms], dtype=np.int64).reshape(-1, m)
    amps = np.array([complex(t["re"], t["im"]) for t in terms])
    return FockState(occ, amps, m, int(data["cutoff"]), data.get("leaked_weight", 0.0))


def dumps_state(state: FockState) -> str:
    return json.dumps(state_to_dict(state), indent=1)


def loads_state(text: str) -> FockState:
    return state_from_dict(json.loads(text))
