"""Exhaustive search over gate-semantics conventions for the outbound unitary.

The outbound attack circuit is described structurally as five stages applied
to the travel photon and the two ancilla modes, rightmost first:

    split     -- Hadamard on the y polarization
    route_txy -- polarizing router over modes (t, x, y)
    cnot_ty   -- polarization-controlled flip over modes (t, y)
    route_ytx -- polarizing router over modes (y, t, x)
    cnot_xy   -- polarization-controlled flip over modes (x, y)

A polarizing router sends every photon through a mode permutation selected
by the photon's polarization ("transmit one polarization, reflect the
other"), but the exact permutation pair, optional polarization flips, and
the CNOT control/activation conventions are underdetermined.  This module
enumerates a finite family of 576 candidate semantics, composes the circuit
for each, and reports which candidates reproduce the pinned truth-table
images.  A candidate whose routing would put two photons into one mode in
any intermediate basis term is reported invalid rather than modeled, since
the state space here is strictly single-occupancy.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Iterable

import numpy as np

from .attacks import F_KETS, forward_images
from .engine import DIM, BasisKet, Occupation

PERMUTATIONS = tuple(itertools.permutations((0, 1, 2)))
CONTROL_POSITIONS = ("first-index", "second-index")
ACTIVATIONS = ("pol1", "pol0")

ROUTE_TXY_MODES = ("t", "x", "y")
ROUTE_YTX_MODES = ("y", "t", "x")
CNOT_TY_MODES = ("t", "y")
CNOT_XY_MODES = ("x", "y")

STATUS_MATCH = "match"
STATUS_MISMATCH = "mismatch"
STATUS_INVALID = "invalid-double-occupancy"

_SLOT_LETTERS = "abc"


def perm_label(perm: tuple[int, int, int]) -> str:
    """Slot letters in routing order: "abc" is identity, "cba" swaps a and c."""
    return "".join(_SLOT_LETTERS[i] for i in perm)


@dataclasses.dataclass(frozen=True)
class Convention:
    """One candidate gate semantics.

    sigma0 / sigma1 route photons of polarization 0 / 1: a photon sitting in
    router slot i moves to slot sigma[i].  flip0 / flip1 flip the routed
    photon's polarization afterwards.  control_position picks which of a
    CNOT's two listed modes carries the control photon and active_on picks
    the control polarization that triggers the target flip.
    """

    sigma0: tuple[int, int, int]
    sigma1: tuple[int, int, int]
    flip0: bool
    flip1: bool
    control_position: str
    active_on: str


def enumerate_conventions() -> tuple[Convention, ...]:
    """All 576 candidates, defaults first, in a fixed documented order."""
    return tuple(
        Convention(sigma0, sigma1, flip0, flip1, control, active)
        for sigma0 in PERMUTATIONS
        for sigma1 in PERMUTATIONS
        for flip0 in (False, True)
        for flip1 in (False, True)
        for control in CONTROL_POSITIONS
        for active in ACTIVATIONS
    )


@dataclasses.dataclass(frozen=True)
class Collision:
    """First double occupancy seen while composing a candidate."""

    stage: str
    input_term: str
    mode: str


class _CollisionFound(Exception):
    def __init__(self, collision: Collision):
        super().__init__(collision)
        self.collision = collision


_Terms = dict[tuple[int, Occupation, Occupation, Occupation], complex]


def _term_label(term) -> str:
    h, t, x, y = term
    return BasisKet(h, t, x, y).label()


def _sorted_terms(terms: _Terms) -> _Terms:
    return dict(
        sorted(terms.items(), key=lambda item: BasisKet(*item[0]).index)
    )


_SQRT_HALF = 1.0 / math.sqrt(2.0)


def _split_y(terms: _Terms) -> _Terms:
    """Hadamard on the y polarization, identity on y vacuum."""
    out: _Terms = {}
    for (h, t, x, y), amp in terms.items():
        if y is Occupation.VAC:
            out[(h, t, x, y)] = out.get((h, t, x, y), 0.0) + amp
            continue
        sign = 1.0 if y is Occupation.POL0 else -1.0
        for new_y, coeff in ((Occupation.POL0, _SQRT_HALF), (Occupation.POL1, sign * _SQRT_HALF)):
            key = (h, t, x, new_y)
            out[key] = out.get(key, 0.0) + amp * coeff
    return _sorted_terms(out)


def _route(terms: _Terms, modes: tuple[str, str, str], conv: Convention, stage: str) -> _Terms:
    """Polarizing router: move each photon to its polarization's slot image,
    then apply the optional flips; two photons in one slot is a collision."""
    slots = {mode: i for i, mode in enumerate(modes)}
    out: _Terms = {}
    for term, amp in terms.items():
        occupations = dict(zip(("h", "t", "x", "y"), term))
        landed: dict[int, Occupation] = {}
        for mode in modes:
            occ = occupations[mode]
            if occ is Occupation.VAC:
                continue
            if occ is Occupation.POL0:
                target = conv.sigma0[slots[mode]]
                flipped = Occupation.POL1 if conv.flip0 else Occupation.POL0
            else:
                target = conv.sigma1[slots[mode]]
                flipped = Occupation.POL0 if conv.flip1 else Occupation.POL1
            if target in landed:
                raise _CollisionFound(
                    Collision(stage=stage, input_term=_term_label(term), mode=modes[target])
                )
            landed[target] = flipped
        new_occ = dict(occupations)
        for i, mode in enumerate(modes):
            new_occ[mode] = landed.get(i, Occupation.VAC)
        key = (new_occ["h"], new_occ["t"], new_occ["x"], new_occ["y"])
        out[key] = out.get(key, 0.0) + amp
    return _sorted_terms(out)


def _cnot(terms: _Terms, modes: tuple[str, str], conv: Convention) -> _Terms:
    """Polarization-controlled flip under the candidate's convention; a
    vacuum control never fires and a vacuum target is left unchanged."""
    control, target = (
        modes if conv.control_position == "first-index" else (modes[1], modes[0])
    )
    active = Occupation.POL1 if conv.active_on == "pol1" else Occupation.POL0
    out: _Terms = {}
    for term, amp in terms.items():
        occupations = dict(zip(("h", "t", "x", "y"), term))
        if occupations[control] is active and occupations[target] is not Occupation.VAC:
            occupations[target] = (
                Occupation.POL1
                if occupations[target] is Occupation.POL0
                else Occupation.POL0
            )
        key = (occupations["h"], occupations["t"], occupations["x"], occupations["y"])
        out[key] = out.get(key, 0.0) + amp
    return _sorted_terms(out)


@dataclasses.dataclass(frozen=True)
class CompositionResult:
    """Images of the four reference inputs, or the collision that stopped
    composition."""

    images: np.ndarray | None
    collision: Collision | None


def compose_candidate(conv: Convention) -> CompositionResult:
    """Apply the five stages to each reference input under one candidate."""
    images = np.zeros((len(F_KETS), DIM), dtype=complex)
    try:
        for row, ket in enumerate(F_KETS):
            terms: _Terms = {(ket.h, ket.t, ket.x, ket.y): 1.0}
            terms = _split_y(terms)
            terms = _route(terms, ROUTE_TXY_MODES, conv, "route_txy")
            terms = _cnot(terms, CNOT_TY_MODES, conv)
            terms = _route(terms, ROUTE_YTX_MODES, conv, "route_ytx")
            terms = _cnot(terms, CNOT_XY_MODES, conv)
            for (h, t, x, y), amp in terms.items():
                images[row, BasisKet(h, t, x, y).index] = amp
    except _CollisionFound as found:
        return CompositionResult(images=None, collision=found.collision)
    images.setflags(write=False)
    return CompositionResult(images=images, collision=None)


def deviation_from_reference(images: np.ndarray, references: np.ndarray) -> float:
    """Largest amplitude difference after removing the best common phase.

    The phase is fit once across all four image vectors (stacked overlap),
    so four individually-phased lookalikes do not pass as a match.
    """
    overlap = complex(np.vdot(references, images))
    phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
    return float(np.max(np.abs(images - phase * references)))


MATCH_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class CandidateReport:
    candidate_id: int
    convention: Convention
    status: str
    deviation: float | None
    collision: Collision | None


def solve() -> list[CandidateReport]:
    """Classify every candidate against the truth-table images."""
    references = forward_images()
    reports = []
    for candidate_id, conv in enumerate(enumerate_conventions()):
        result = compose_candidate(conv)
        if result.images is None:
            reports.append(
                CandidateReport(candidate_id, conv, STATUS_INVALID, None, result.collision)
            )
            continue
        dev = deviation_from_reference(result.images, references)
        status = STATUS_MATCH if dev <= MATCH_TOL else STATUS_MISMATCH
        reports.append(CandidateReport(candidate_id, conv, status, dev, None))
    return reports


def summarize(reports: Iterable[CandidateReport]) -> dict[str, int]:
    counts = {STATUS_MATCH: 0, STATUS_MISMATCH: 0, STATUS_INVALID: 0}
    for report in reports:
        counts[report.status] += 1
    return counts


CSV_HEADER = (
    "candidate_id,sigma0,sigma1,flip0,flip1,control_position,active_on,status,deviation"
)


def report_rows(reports: Iterable[CandidateReport]) -> list[str]:
    """CSV rows (without header) in enumeration order, deterministic."""
    rows = []
    for report in reports:
        conv = report.convention
        deviation = "" if report.deviation is None else f"{report.deviation:.12e}"
        rows.append(
            ",".join(
                (
                    str(report.candidate_id),
                    perm_label(conv.sigma0),
                    perm_label(conv.sigma1),
                    "true" if conv.flip0 else "false",
                    "true" if conv.flip1 else "false",
                    conv.control_position,
                    conv.active_on,
                    report.status,
                    deviation,
                )
            )
        )
    return rows
