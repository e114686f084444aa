"""State-engine unit and property tests.

Expected amplitudes and probabilities are frozen from hand expansions of
the pinned protocol states; the engine must reproduce them exactly.
"""

import numpy as np
import pytest

from pingpong_eve.engine import (
    DIM,
    BasisKet,
    BellOutcome,
    HADAMARD,
    Occupation,
    PAULI_X,
    PAULI_Z,
    PureState,
    apply_cnot,
    apply_polarization_gate,
    bell_measure,
    bell_probabilities,
    ket,
    make_initial,
    measure_mode_polarization,
    mode_marginal,
    project_bell,
    project_mode,
    sample_from,
    state_csv_rows,
    write_state_csv,
)

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def post_attack_state() -> PureState:
    """Four-component state after the outbound attack, amplitudes 1/2."""
    return PureState.from_terms(
        {
            ket(0, "vac", "1", "0"): 0.5,
            ket(0, "1", "1", "vac"): 0.5,
            ket(1, "0", "vac", "1"): 0.5,
            ket(1, "0", "0", "vac"): 0.5,
        }
    )


def returned_state(j: int) -> PureState:
    """Two-component state after the inbound attack for message bit j."""
    return PureState.from_terms(
        {
            ket(0, "1", "vac", str(j)): INV_SQRT2,
            ket(1, "0", "vac", "0"): INV_SQRT2,
        }
    )


def symmetrized_state(j: int) -> PureState:
    """Returned state after the symmetrization step."""
    return PureState.from_terms(
        {
            ket(0, "1", "vac", str(j)): INV_SQRT2,
            ket(1, "0", "vac", "1"): -INV_SQRT2,
        }
    )


def random_state(rng: np.random.Generator) -> PureState:
    amps = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
    return PureState(amps / np.linalg.norm(amps))


# --- basis indexing --------------------------------------------------------


def test_basis_index_is_a_bijection():
    seen = set()
    for index in range(DIM):
        basis_ket = BasisKet.from_index(index)
        assert basis_ket.index == index
        seen.add((basis_ket.h, basis_ket.t, basis_ket.x, basis_ket.y))
    assert len(seen) == DIM


def test_basis_index_formula():
    k = ket(1, "0", "vac", "1")
    assert k.index == ((1 * 3 + 1) * 3 + 0) * 3 + 2


def test_ket_labels():
    assert ket(0, "1", "vac", "0").label() == "h=0 t=1 x=vac y=0"
    assert ket(1, "vac", "0", "1").label() == "h=1 t=vac x=0 y=1"


def test_photon_number():
    assert ket(0, "1", "vac", "0").photon_number == 2
    assert ket(1, "vac", "vac", "vac").photon_number == 0
    assert ket(0, "0", "1", "1").photon_number == 3


def test_invalid_kets_rejected():
    with pytest.raises(ValueError):
        ket(2, "0", "vac", "0")
    with pytest.raises(ValueError):
        ket(0, "polarized", "vac", "0")


# --- state construction ----------------------------------------------------


def test_make_initial_amplitudes():
    state = make_initial()
    terms = dict(state.nonzero_terms())
    assert set(terms) == {ket(0, "1", "vac", "0"), ket(1, "0", "vac", "0")}
    for amp in terms.values():
        assert abs(amp - INV_SQRT2) < 1e-15
    assert abs(state.norm_sq - 1.0) < 1e-12


def test_make_initial_photon_sector():
    assert make_initial().photon_sectors() == {2}


def test_unnormalized_state_rejected():
    amps = np.zeros(DIM)
    amps[0] = 0.5
    with pytest.raises(ValueError):
        PureState(amps)


def test_states_are_immutable():
    state = make_initial()
    with pytest.raises(ValueError):
        state.amps[0] = 1.0


# --- polarization gates ----------------------------------------------------


def test_hadamard_on_register_photon():
    state = PureState.from_terms({ket(0, "1", "vac", "0"): 1.0})
    out = apply_polarization_gate(state, "y", HADAMARD)
    expected = PureState.from_terms(
        {
            ket(0, "1", "vac", "0"): INV_SQRT2,
            ket(0, "1", "vac", "1"): INV_SQRT2,
        }
    )
    assert out.allclose(expected, atol=1e-15)


def test_pauli_x_flips_polarization():
    state = PureState.from_terms({ket(0, "1", "vac", "0"): 1.0})
    out = apply_polarization_gate(state, "t", PAULI_X)
    assert out.allclose(PureState.from_terms({ket(0, "0", "vac", "0"): 1.0}))


def test_pauli_z_phases():
    plus = PureState.from_terms({ket(0, "0", "vac", "0"): 1.0})
    minus = PureState.from_terms({ket(0, "1", "vac", "0"): 1.0})
    assert apply_polarization_gate(plus, "t", PAULI_Z).allclose(plus)
    out = apply_polarization_gate(minus, "t", PAULI_Z)
    assert abs(out.amplitude(ket(0, "1", "vac", "0")) + 1.0) < 1e-15


def test_gates_leave_vacuum_untouched():
    state = PureState.from_terms({ket(0, "1", "vac", "vac"): 1.0})
    for gate in (HADAMARD, PAULI_X, PAULI_Z):
        for mode in ("x", "y"):
            out = apply_polarization_gate(state, mode, gate)
            assert out.allclose(state, atol=1e-15)


def test_gate_on_home_qubit():
    state = make_initial()
    out = apply_polarization_gate(state, "h", PAULI_X)
    expected = PureState.from_terms(
        {
            ket(1, "1", "vac", "0"): INV_SQRT2,
            ket(0, "0", "vac", "0"): INV_SQRT2,
        }
    )
    assert out.allclose(expected, atol=1e-15)


def test_non_unitary_gate_rejected():
    with pytest.raises(ValueError):
        apply_polarization_gate(make_initial(), "t", np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        apply_polarization_gate(make_initial(), "z", PAULI_X)


# --- photonic CNOT ----------------------------------------------------------


def test_cnot_active_control_flips_target():
    state = PureState.from_terms({ket(0, "1", "vac", "0"): 1.0})
    out = apply_cnot(state, "t", "y")
    assert out.allclose(PureState.from_terms({ket(0, "1", "vac", "1"): 1.0}))


def test_cnot_pol0_control_is_identity():
    state = PureState.from_terms({ket(0, "0", "vac", "0"): 1.0})
    assert apply_cnot(state, "t", "y").allclose(state)


def test_cnot_vacuum_control_is_identity():
    state = PureState.from_terms({ket(0, "vac", "1", "0"): 1.0})
    assert apply_cnot(state, "t", "y").allclose(state)


def test_cnot_vacuum_target_unchanged():
    state = PureState.from_terms({ket(0, "1", "vac", "vac"): 1.0})
    assert apply_cnot(state, "t", "y").allclose(state)


def test_cnot_rejects_bad_modes():
    state = make_initial()
    with pytest.raises(ValueError):
        apply_cnot(state, "t", "t")
    with pytest.raises(ValueError):
        apply_cnot(state, "h", "y")
    with pytest.raises(ValueError):
        apply_cnot(state, "t", "h")


# --- measurements -----------------------------------------------------------


def test_travel_marginal_on_post_attack_state():
    probs = mode_marginal(post_attack_state(), "t")
    assert abs(probs[Occupation.VAC] - 0.25) < 1e-12
    assert abs(probs[Occupation.POL0] - 0.5) < 1e-12
    assert abs(probs[Occupation.POL1] - 0.25) < 1e-12


def test_home_marginal_on_initial_state():
    probs = mode_marginal(make_initial(), "h")
    assert probs[Occupation.VAC] == 0.0
    assert abs(probs[Occupation.POL0] - 0.5) < 1e-12
    assert abs(probs[Occupation.POL1] - 0.5) < 1e-12


def test_register_marginal_on_returned_state():
    # Hand expansion: the two components carry y=1 and y=0 with weight 1/2.
    probs = mode_marginal(returned_state(1), "y")
    assert probs[Occupation.VAC] == 0.0
    assert abs(probs[Occupation.POL0] - 0.5) < 1e-12
    assert abs(probs[Occupation.POL1] - 0.5) < 1e-12


def test_anticorrelation_is_exact_on_post_attack_state():
    state = post_attack_state()
    p_equal = 0.0
    for t_occ, h_occ in (
        (Occupation.POL0, Occupation.POL0),
        (Occupation.POL1, Occupation.POL1),
    ):
        p_t, collapsed = project_mode(state, "t", t_occ)
        if collapsed is None:
            continue
        p_h, _ = project_mode(collapsed, "h", h_occ)
        p_equal += p_t * p_h
    assert p_equal == 0.0


def test_project_mode_collapse():
    prob, collapsed = project_mode(post_attack_state(), "t", Occupation.VAC)
    assert abs(prob - 0.25) < 1e-12
    assert collapsed is not None
    assert collapsed.allclose(PureState.from_terms({ket(0, "vac", "1", "0"): 1.0}))


def test_project_mode_zero_probability():
    prob, collapsed = project_mode(make_initial(), "x", Occupation.POL1)
    assert prob == 0.0
    assert collapsed is None


def test_measurement_collapse_is_normalized():
    rng = np.random.default_rng(11)
    outcome, collapsed = measure_mode_polarization(post_attack_state(), "t", rng)
    assert abs(collapsed.norm_sq - 1.0) < 1e-12
    assert outcome in (Occupation.VAC, Occupation.POL0, Occupation.POL1)


def test_measurement_is_seed_deterministic():
    outcomes_a = [
        measure_mode_polarization(
            post_attack_state(), "t", np.random.default_rng((5, i))
        )[0]
        for i in range(50)
    ]
    outcomes_b = [
        measure_mode_polarization(
            post_attack_state(), "t", np.random.default_rng((5, i))
        )[0]
        for i in range(50)
    ]
    assert outcomes_a == outcomes_b


# --- two-particle measurement ------------------------------------------------


def test_bell_on_returned_state_bit0():
    probs = bell_probabilities(returned_state(0))
    assert abs(probs[BellOutcome.PSI_PLUS] - 1.0) < 1e-12
    for outcome in (
        BellOutcome.PSI_MINUS,
        BellOutcome.PHI_PLUS,
        BellOutcome.PHI_MINUS,
        BellOutcome.NO_PHOTON,
    ):
        assert probs[outcome] < 1e-15


def test_bell_on_returned_state_bit1():
    # Hand expansion in the two-particle basis gives amplitude +-1/2 on the
    # four (register bit, psi outcome) combinations: both psi outcomes at 1/2.
    probs = bell_probabilities(returned_state(1))
    assert abs(probs[BellOutcome.PSI_PLUS] - 0.5) < 1e-12
    assert abs(probs[BellOutcome.PSI_MINUS] - 0.5) < 1e-12
    assert probs[BellOutcome.PHI_PLUS] < 1e-15
    assert probs[BellOutcome.PHI_MINUS] < 1e-15
    assert probs[BellOutcome.NO_PHOTON] == 0.0


def test_bell_eigenstate_projection():
    phi_plus = PureState.from_terms(
        {
            ket(0, "0", "vac", "vac"): INV_SQRT2,
            ket(1, "1", "vac", "vac"): INV_SQRT2,
        }
    )
    prob, collapsed = project_bell(phi_plus, BellOutcome.PHI_PLUS)
    assert abs(prob - 1.0) < 1e-12
    assert collapsed is not None
    assert collapsed.allclose(phi_plus, atol=1e-12)


def test_bell_no_photon_branch():
    state = PureState.from_terms(
        {
            ket(0, "vac", "1", "0"): INV_SQRT2,
            ket(1, "0", "vac", "1"): INV_SQRT2,
        }
    )
    probs = bell_probabilities(state)
    assert abs(probs[BellOutcome.NO_PHOTON] - 0.5) < 1e-12
    prob, collapsed = project_bell(state, BellOutcome.NO_PHOTON)
    assert abs(prob - 0.5) < 1e-12
    assert collapsed is not None
    assert collapsed.allclose(PureState.from_terms({ket(0, "vac", "1", "0"): 1.0}))


def test_bell_measure_collapses_and_normalizes():
    rng = np.random.default_rng(3)
    outcome, collapsed = bell_measure(returned_state(1), rng)
    assert outcome in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS)
    assert abs(collapsed.norm_sq - 1.0) < 1e-12
    # Measuring again must reproduce the same outcome with certainty.
    probs = bell_probabilities(collapsed)
    assert abs(probs[outcome] - 1.0) < 1e-12


# --- sampling ----------------------------------------------------------------


def test_sample_never_draws_zero_probability():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        assert sample_from(rng, ("a", "b", "c"), (0.0, 1.0, 0.0)) == "b"


def test_sample_rejects_bad_distributions():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_from(rng, ("a", "b"), (-0.1, 1.1))
    with pytest.raises(ValueError):
        for _ in range(100):
            sample_from(rng, ("a", "b"), (0.2, 0.3))


# --- invariants over random states -------------------------------------------


def _gate_pool():
    rng = np.random.default_rng(2024)
    pool = []
    for mode in ("h", "t", "x", "y"):
        for gate in (HADAMARD, PAULI_X, PAULI_Z):
            pool.append(("pol", mode, gate))
    for _ in range(5):
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, _ = np.linalg.qr(raw)
        pool.append(("pol", "t", q))
    for control in ("t", "x", "y"):
        for target in ("t", "x", "y"):
            if control != target:
                pool.append(("cnot", control, target))
    return pool


def test_every_gate_preserves_norm_on_random_states():
    rng = np.random.default_rng(99)
    pool = _gate_pool()
    for i in range(1000):
        state = random_state(rng)
        kind, a, b = pool[i % len(pool)]
        if kind == "pol":
            out = apply_polarization_gate(state, a, b)
        else:
            out = apply_cnot(state, a, b)
        assert abs(out.norm_sq - 1.0) < 1e-12


def test_every_gate_is_block_diagonal_over_photon_number():
    pool = _gate_pool()
    for index in range(DIM):
        basis_ket = BasisKet.from_index(index)
        state = PureState.from_terms({basis_ket: 1.0})
        sector = {basis_ket.photon_number}
        for kind, a, b in pool:
            if kind == "pol":
                out = apply_polarization_gate(state, a, b)
            else:
                out = apply_cnot(state, a, b)
            assert out.photon_sectors(tol=0.0) == sector


def test_measurement_completeness_on_random_states():
    rng = np.random.default_rng(123)
    for _ in range(100):
        state = random_state(rng)
        for mode in ("h", "t", "x", "y"):
            assert abs(mode_marginal(state, mode).sum() - 1.0) < 1e-12
        assert abs(sum(bell_probabilities(state).values()) - 1.0) < 1e-12


def test_projection_branches_resolve_the_state():
    # Summing outcome probability times collapsed state reassembles the
    # projector decomposition: probabilities sum to 1 per mode.
    rng = np.random.default_rng(7)
    state = random_state(rng)
    for mode in ("t", "x", "y"):
        total = sum(
            project_mode(state, mode, occ)[0]
            for occ in (Occupation.VAC, Occupation.POL0, Occupation.POL1)
        )
        assert abs(total - 1.0) < 1e-12


# --- state dump ---------------------------------------------------------------


def test_state_csv_rows_for_initial_state():
    rows = state_csv_rows(make_initial())
    assert rows == [
        ("h=0 t=1 x=vac y=0", pytest.approx(INV_SQRT2), 0.0),
        ("h=1 t=0 x=vac y=0", pytest.approx(INV_SQRT2), 0.0),
    ]


def test_state_csv_omits_tiny_amplitudes(tmp_path):
    state = make_initial()
    path = tmp_path / "state.csv"
    write_state_csv(state, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "ket,real,imag"
    assert len(lines) == 3
