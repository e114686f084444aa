"""Outcome distributions, mutual information, and transmission-security bounds.

Message-mode outcomes are described by a joint distribution p(j, k, m) over
the sender's bit j, the eavesdropper's register bit k, and the receiver's
decoded bit m (psi_plus -> 0, psi_minus -> 1).  Three variants are exposed:

* ``plain``        -- attack without symmetrization,
* ``symmetrized``  -- attack with the symmetrization step always applied,
* ``fair-mixture`` -- fair coin over the two, which is what the receiver
                      sees when the eavesdropper hides the bias (she keeps
                      her coin record, so her own information is computed
                      on the plain/symmetrized branches, not the mixture).

Closed-form expressions for the information gains are evaluated verbatim as
printed in the source material of this model and audited against the
brute-force values from the joint distributions; one pair of printed
formulas is known to disagree with brute force, and ``closed_form`` reports
that through its discrepancy flag instead of silently correcting it.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Sequence

import numpy as np

from .attacks import AttackProfile
from .protocol import max_attack_fraction

VARIANTS = ("plain", "symmetrized", "fair-mixture")
PAIRS = ("AE", "AB", "BE")
FORMULAS = ("plain_ae_ab", "plain_be", "sym_ae_ab", "sym_be")

# Conditional tables P(k, m | j), indexed [j, k, m].
_PLAIN_COND = np.array(
    [
        [[1.0, 0.0], [0.0, 0.0]],
        [[0.25, 0.25], [0.25, 0.25]],
    ]
)
# The symmetrized attack mirrors the plain one under (j, k, m) -> (1-j, 1-k, 1-m).
_SYM_COND = _PLAIN_COND[::-1, ::-1, ::-1].copy()
_MIX_COND = 0.5 * (_PLAIN_COND + _SYM_COND)
_CONDITIONALS = {
    "plain": _PLAIN_COND,
    "symmetrized": _SYM_COND,
    "fair-mixture": _MIX_COND,
}
for _table in _CONDITIONALS.values():
    _table.setflags(write=False)


@dataclasses.dataclass(frozen=True)
class JointDistribution:
    """Joint probabilities p(j, k, m) with prior P(j=0) = c0."""

    probs: np.ndarray
    c0: float
    variant: str

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2, 2, 2):
            raise ValueError(f"joint table must have shape (2,2,2), got {probs.shape}")
        if np.any(probs < 0.0):
            raise ValueError("joint table has negative entries")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError("joint table does not sum to 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def conditional(self) -> np.ndarray:
        """P(k, m | j) rows, defined only when both priors are nonzero."""
        prior = self.probs.sum(axis=(1, 2))
        return self.probs / prior[:, None, None]


def exact_joint(variant: str, c0: float) -> JointDistribution:
    """Joint distribution of one attacked message round.

    c0 is the prior probability of message bit 0 and must lie strictly
    between 0 and 1 (a deterministic message carries no information and the
    information measures below degenerate).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    if not 0.0 < c0 < 1.0:
        raise ValueError(f"prior c0 must lie strictly between 0 and 1, got {c0!r}")
    prior = np.array([c0, 1.0 - c0])
    probs = prior[:, None, None] * _CONDITIONALS[variant]
    return JointDistribution(probs, c0, variant)


def mutual_information(dist: JointDistribution, pair: str) -> float:
    """Mutual information in bits between two of the three round variables.

    pair is "AE" (sender bit; eavesdropper bit), "AB" (sender bit; receiver
    bit) or "BE" (receiver bit; eavesdropper bit).
    """
    if pair == "AE":
        joint = dist.probs.sum(axis=2)
    elif pair == "AB":
        joint = dist.probs.sum(axis=1)
    elif pair == "BE":
        joint = dist.probs.sum(axis=0)
    else:
        raise ValueError(f"unknown pair {pair!r}, expected one of {PAIRS}")
    left = joint.sum(axis=1)
    right = joint.sum(axis=0)
    terms = []
    for a in (0, 1):
        for b in (0, 1):
            p = joint[a, b]
            if p > 0.0:
                terms.append(p * math.log2(p / (left[a] * right[b])))
    return math.fsum(terms)


def qber(dist: JointDistribution) -> float:
    """Probability that the receiver decodes the wrong bit, p(m != j)."""
    return float(dist.probs[0, :, 1].sum() + dist.probs[1, :, 0].sum())


def mixture_ae_conditioned(c0: float) -> float:
    """Sender-eavesdropper information under the fair mixture when the
    eavesdropper conditions on her own symmetrization coin.

    She keeps a record of the coin, so her gain is the average of the two
    per-branch gains rather than the gain of the blended distribution; the
    receiver, who never learns the coin, is stuck with the mixture.
    """
    return 0.5 * (
        mutual_information(exact_joint("plain", c0), "AE")
        + mutual_information(exact_joint("symmetrized", c0), "AE")
    )


def closed_form(formula: str, c0: float) -> tuple[float, bool]:
    """Evaluate one printed closed-form information expression verbatim.

    Returns (value in bits, discrepancy flag).  The flag is set when the
    printed expression differs from the brute-force mutual information of
    the corresponding distribution by more than 1e-9; the printed value is
    returned either way, never corrected.
    """
    if not 0.0 < c0 < 1.0:
        raise ValueError(f"prior c0 must lie strictly between 0 and 1, got {c0!r}")
    lg = math.log2
    if formula == "plain_ae_ab":
        value = c0 - 0.5 * ((1 - c0) * lg(1 - c0) + (1 + c0) * lg(1 + c0))
        reference = mutual_information(exact_joint("plain", c0), "AE")
    elif formula == "plain_be":
        value = (
            -(1 + c0) * lg(1 + c0)
            + 0.25 * (1 - c0) * lg(1 - c0)
            + 0.25 * (1 + 3 * c0) * lg(1 + 3 * c0)
        )
        reference = mutual_information(exact_joint("plain", c0), "BE")
    elif formula == "sym_ae_ab":
        value = 1 - c0 - 0.5 * (c0 * lg(c0) + (2 - c0) * lg(2 - c0))
        reference = mutual_information(exact_joint("symmetrized", c0), "AE")
    elif formula == "sym_be":
        value = (
            -(2 - c0) * lg(2 - c0)
            + 0.25 * c0 * lg(c0)
            + 0.25 * (4 - 3 * c0) * lg(4 - 3 * c0)
        )
        reference = mutual_information(exact_joint("symmetrized", c0), "BE")
    else:
        raise ValueError(f"unknown formula {formula!r}, expected one of {FORMULAS}")
    return value, abs(value - reference) > 1e-9


# --- security curves over the transmission efficiency -------------------------


@dataclasses.dataclass(frozen=True)
class CurvePoint:
    """Information gains at one transmission efficiency under the linear
    partial-attack model: the eavesdropper attacks a fraction mu of rounds,
    unattacked rounds carry one full bit to the receiver."""

    eta: float
    mu: float
    i_ae: float
    i_ab: float
    i_be: float


def info_vs_eta(profile: AttackProfile, etas: Iterable[float]) -> list[CurvePoint]:
    """Evaluate the information curves on a grid of transmission efficiencies."""
    points = []
    for eta in etas:
        mu = max_attack_fraction(eta, profile.loss)
        points.append(
            CurvePoint(
                eta=float(eta),
                mu=mu,
                i_ae=mu * profile.i_ae,
                i_ab=(1.0 - mu) + mu * profile.i_ab,
                i_be=mu * profile.i_be,
            )
        )
    return points


def _info_gap(profile: AttackProfile, eta: float) -> float:
    mu = max_attack_fraction(eta, profile.loss)
    return mu * profile.i_ae - ((1.0 - mu) + mu * profile.i_ab)


def insecurity_bound(profile: AttackProfile, tol: float = 1e-9) -> float:
    """Largest transmission efficiency at which the eavesdropper still
    matches the receiver's information, found by bisection.

    Below the returned eta_star the protocol conveys no secrecy advantage
    (I_AE >= I_AB under the linear model); requires i_ae > i_ab.
    """
    if profile.i_ae <= profile.i_ab:
        raise ValueError(
            "no crossing: the eavesdropper never catches up when i_ae <= i_ab"
        )
    lo = 1.0 - profile.loss
    hi = 1.0
    if _info_gap(profile, lo) <= 0.0:
        raise ValueError("no crossing inside the partial-attack domain")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _info_gap(profile, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossing_closed_form(profile: AttackProfile) -> tuple[float, float]:
    """(mu_star, eta_star) where the information curves cross, in closed form:
    mu_star = 1 / (1 + i_ae - i_ab), eta_star = 1 - mu_star * loss."""
    if profile.i_ae <= profile.i_ab:
        raise ValueError(
            "no crossing: the eavesdropper never catches up when i_ae <= i_ab"
        )
    mu_star = 1.0 / (1.0 + profile.i_ae - profile.i_ab)
    return mu_star, 1.0 - mu_star * profile.loss


@dataclasses.dataclass(frozen=True)
class SecurityReport:
    """Security summary of one attack scheme over a transmission-efficiency
    grid.  full_attack_edge is the largest eta at which every round can be
    attacked without raising the loss rate; eta_star is the insecurity
    bound."""

    scheme: str
    full_attack_edge: float
    eta_star: float
    mu_star: float
    curve: tuple[CurvePoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "full_attack_edge": self.full_attack_edge,
            "eta_star": self.eta_star,
            "mu_star": self.mu_star,
        }


def default_eta_grid() -> list[float]:
    """Transmission efficiencies 0.00, 0.01, ..., 1.00."""
    return [i / 100 for i in range(101)]


def security_report(
    profile: AttackProfile, etas: Sequence[float] | None = None
) -> SecurityReport:
    if etas is None:
        etas = default_eta_grid()
    eta_star = insecurity_bound(profile)
    mu_star, eta_star_closed = crossing_closed_form(profile)
    if abs(eta_star - eta_star_closed) > 1e-8:
        raise RuntimeError(
            f"bisection ({eta_star!r}) and closed form ({eta_star_closed!r}) disagree"
        )
    return SecurityReport(
        scheme=profile.name,
        full_attack_edge=1.0 - profile.loss,
        eta_star=eta_star,
        mu_star=mu_star,
        curve=tuple(info_vs_eta(profile, etas)),
    )
