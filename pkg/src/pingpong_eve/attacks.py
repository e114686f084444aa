"""Travel-photon attack: exact unitary action, symmetrization, and profiles.

The eavesdropper intercepts the travel photon on its way to the sender
(outbound leg), entangles it with her ancilla modes x and y, and undoes the
operation on the way back (inbound leg), optionally followed by a
symmetrization step.  Both legs are defined exactly on a four-dimensional
subspace:

domain kets (h, t, x, y):

    f1 = |0, 1, vac, 0>      f2 = |1, 0, vac, 0>
    f3 = |0, 1, vac, 1>      f4 = |1, 0, vac, 1>

image kets:

    B1 = |0, vac, 1, 0>      B2 = |0, 1, 1, vac>
    B3 = |1, 0, vac, 1>      B4 = |1, 0, 0, vac>

outbound action (inbound is the adjoint on the image span):

    f1 -> (B1 + B2)/sqrt(2)      f2 -> (B3 + B4)/sqrt(2)
    f3 -> (B1 - B2)/sqrt(2)      f4 -> (B3 - B4)/sqrt(2)

The table is the unique unitary completion (up to the free phase on f4,
fixed to +1 here) of two physical constraints: the prepared pair state maps
to the four-component attack state, and the phase-encoded pair state maps to
its travel-phase-flipped counterpart.  Each image ket keeps two travel
photons, so photon number is conserved.

The symmetrization S = X_t Z_t N_ty X_t (rightmost first) is built from the
state-engine gates and makes the attack's outcome statistics symmetric
under swapping the message-bit value.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .engine import (
    DIM,
    BasisKet,
    BellOutcome,
    Occupation,
    PAULI_X,
    PAULI_Z,
    PureState,
    apply_cnot,
    apply_polarization_gate,
    bell_probabilities,
    ket,
    make_initial,
    project_mode,
)

F_KETS: tuple[BasisKet, ...] = (
    ket(0, "1", "vac", "0"),
    ket(1, "0", "vac", "0"),
    ket(0, "1", "vac", "1"),
    ket(1, "0", "vac", "1"),
)

B_KETS: tuple[BasisKet, ...] = (
    ket(0, "vac", "1", "0"),
    ket(0, "1", "1", "vac"),
    ket(1, "0", "vac", "1"),
    ket(1, "0", "0", "vac"),
)

_F_INDICES = np.array([k.index for k in F_KETS])

# Outbound images in the B-ket basis, one row per domain ket.
_IMAGE_COEFFS = np.array(
    [
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
    ]
) / math.sqrt(2.0)


def forward_images() -> np.ndarray:
    """(4, 54) array whose rows are the outbound images of f1..f4."""
    images = np.zeros((4, DIM), dtype=complex)
    for row, coeffs in enumerate(_IMAGE_COEFFS):
        for b_ket, coeff in zip(B_KETS, coeffs):
            images[row, b_ket.index] = coeff
    images.setflags(write=False)
    return images


_IMAGES = forward_images()


class SubspaceLeakageError(ValueError):
    """State has support outside the attack's domain or image span."""

    def __init__(self, direction: str, offending: list[BasisKet]):
        self.offending = offending
        labels = ", ".join(k.label() for k in offending)
        super().__init__(
            f"{direction} attack undefined: support outside its subspace on [{labels}]"
        )


def _leakage_kets(residual: np.ndarray, tol: float = 1e-12) -> list[BasisKet]:
    return [BasisKet.from_index(int(i)) for i in np.nonzero(np.abs(residual) > tol)[0]]


def attack_ba(state: PureState, images: np.ndarray | None = None) -> PureState:
    """Outbound leg: apply the attack unitary on the receiver->sender trip.

    Defined only for states supported on span{f1..f4}; anything else raises
    SubspaceLeakageError naming the offending kets.
    """
    if images is None:
        images = _IMAGES
    coeffs = state.amps[_F_INDICES]
    residual = state.amps.copy()
    residual[_F_INDICES] = 0.0
    leaked = _leakage_kets(residual)
    if leaked:
        raise SubspaceLeakageError("outbound", leaked)
    return PureState(coeffs @ images)


def attack_ab(
    state: PureState, apply_s: bool = False, images: np.ndarray | None = None
) -> PureState:
    """Inbound leg: undo the outbound unitary (adjoint on the image span),
    then optionally apply the symmetrization S.

    Defined only for states supported on span of the outbound images.
    """
    if images is None:
        images = _IMAGES
    coeffs = images.conj() @ state.amps
    residual = state.amps - coeffs @ images
    leaked = _leakage_kets(residual)
    if leaked:
        raise SubspaceLeakageError("inbound", leaked)
    amps = np.zeros(DIM, dtype=complex)
    amps[_F_INDICES] = coeffs
    restored = PureState(amps)
    if apply_s:
        restored = apply_symmetrization(restored)
    return restored


def apply_symmetrization(state: PureState) -> PureState:
    """S = X_t Z_t N_ty X_t, applied rightmost first."""
    state = apply_polarization_gate(state, "t", PAULI_X)
    state = apply_cnot(state, "t", "y")
    state = apply_polarization_gate(state, "t", PAULI_Z)
    state = apply_polarization_gate(state, "t", PAULI_X)
    return state


def message_state(
    j: int, apply_s: bool = False, images: np.ndarray | None = None
) -> PureState:
    """State reaching Eve's register and the receiver for message bit j.

    Runs the full message-mode round on the attacked channel: outbound
    attack on the prepared pair, the sender's phase encoding Z_t^j, then the
    inbound attack (with optional symmetrization).
    """
    if j not in (0, 1):
        raise ValueError(f"message bit must be 0 or 1, got {j!r}")
    state = attack_ba(make_initial(), images=images)
    if j == 1:
        state = apply_polarization_gate(state, "t", PAULI_Z)
    return attack_ab(state, apply_s=apply_s, images=images)


def exact_outcome_table(
    apply_s: bool, images: np.ndarray | None = None
) -> np.ndarray:
    """Exact conditional table P(k, m | j) from the attack states.

    Returned array has shape (2, 2, 2) indexed by (j, k, m) where k is
    Eve's register bit (y polarization) and m the receiver's two-particle
    outcome mapped psi_plus -> 0, psi_minus -> 1.  All other outcomes (empty
    register, phi-type or no-photon results) carry zero probability for
    these states; this is verified, not assumed.
    """
    table = np.zeros((2, 2, 2))
    for j in (0, 1):
        state = message_state(j, apply_s=apply_s, images=images)
        p_vac, _ = project_mode(state, "y", Occupation.VAC)
        if p_vac > 1e-12:
            raise ValueError(f"unexpected empty register probability {p_vac!r}")
        for k_bit, occ in ((0, Occupation.POL0), (1, Occupation.POL1)):
            p_k, collapsed = project_mode(state, "y", occ)
            if collapsed is None:
                continue
            bell = bell_probabilities(collapsed)
            stray = (
                bell[BellOutcome.PHI_PLUS]
                + bell[BellOutcome.PHI_MINUS]
                + bell[BellOutcome.NO_PHOTON]
            )
            if stray > 1e-12:
                raise ValueError(f"unexpected two-particle outcome mass {stray!r}")
            table[j, k_bit, 0] = p_k * bell[BellOutcome.PSI_PLUS]
            table[j, k_bit, 1] = p_k * bell[BellOutcome.PSI_MINUS]
    return table


# --- accounting-level profiles ---------------------------------------------

_A_BITS = 0.75 * math.log2(4.0 / 3.0)
_B_BITS = 0.75 * math.log2(3.0) - 1.0
_E_BITS = 1.0 - 1.5 * math.log2(3.0) + 0.625 * math.log2(5.0)


@dataclasses.dataclass(frozen=True)
class AttackProfile:
    """Summary statistics of one attack scheme on a fully attacked channel.

    loss is the control-mode no-photon probability induced per attacked
    round.  The information values are per attacked message bit at balanced
    prior: i_ae for the eavesdropper (who keeps her symmetrization record),
    i_ab for the receiver under the symmetrization mixture, i_be between
    receiver and eavesdropper.
    """

    name: str
    loss: float
    i_ae: float
    i_ab: float
    i_be: float

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "loss": self.loss,
            "i_ae": self.i_ae,
            "i_ab": self.i_ab,
            "i_be": self.i_be,
        }


def improved_profile() -> AttackProfile:
    """Attack implemented here: quarter loss, same information values as the
    half-loss reference scheme."""
    return AttackProfile("improved", 0.25, _A_BITS, _B_BITS, _E_BITS)


def wojcik_profile() -> AttackProfile:
    """Reference scheme modeled by its published summary statistics only."""
    return AttackProfile("wojcik", 0.5, _A_BITS, _B_BITS, _E_BITS)
