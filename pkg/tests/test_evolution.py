# coding: utf-8
"""Quantum evolution, invariant operators, stability and superstability."""

import math

import numpy as np
import pytest

import gcsdyn as g


@pytest.fixture(scope="module")
def osc40():
    rep = g.build_oscillator_algebra(40)
    chart = g.make_plane_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    return rep, chart, fid


def diagonal_oracle(psi0, omega_integral, n):
    """Exact evolution under a time-dependent multiple of the number
    operator: each amplitude acquires the phase -k * integral(omega)."""
    ks = np.arange(n)
    return psi0 * np.exp(-1j * ks * omega_integral)


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def test_hamiltonian_rejects_missing_conjugate_partner(osc40):
    rep, _, _ = osc40
    ham = g.HamiltonianSpec([(lambda t: np.exp(1j * t), "adag")])
    with pytest.raises(ValueError, match="Hermitian"):
        ham.matrix(0.3, rep)


def test_hamiltonian_complex_pair_is_hermitian(osc40):
    rep, _, _ = osc40
    ham = g.HamiltonianSpec([
        (lambda t: np.exp(1j * t), "adag"),
        (lambda t: np.exp(-1j * t), "a"),
        (1.0, "N"),
    ])
    h = ham.matrix(0.7, rep)
    assert np.max(np.abs(h - h.conj().T)) < 1e-14


def test_hamiltonian_term_by_index_and_matrix(osc40):
    rep, _, _ = osc40
    by_name = g.HamiltonianSpec([(2.0, "N")]).matrix(0.0, rep)
    by_index = g.HamiltonianSpec([(2.0, 0)]).matrix(0.0, rep)
    by_matrix = g.HamiltonianSpec([(2.0, rep.generator("N"))]).matrix(0.0, rep)
    assert np.array_equal(by_name, by_index)
    assert np.array_equal(by_name, by_matrix)


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def test_evolve_zero_hamiltonian_is_constant(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(0.0, "N")])
    psi0 = g.gcs_state(rep, chart, fid, 0.7 + 0.2j)
    traj = g.evolve(rep, ham, psi0, np.linspace(0, 2, 5), 1e-2)
    assert np.max(np.abs(traj.states - psi0[None, :])) < 1e-13


def test_evolve_rotates_coherent_label(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    alpha = 1.0 + 0.5j
    psi0 = g.gcs_state(rep, chart, fid, alpha)
    t_grid = np.linspace(0, 2 * math.pi, 21)
    traj = g.evolve(rep, ham, psi0, t_grid, 1e-3)
    a_mean = traj.expectation(rep.aux["a"])
    assert np.max(np.abs(a_mean - alpha * np.exp(-1j * t_grid))) < 1e-6


def test_evolve_constant_force_momentum_drift(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "Q")])
    t_grid = np.linspace(0, 2, 9)
    traj = g.evolve(rep, ham, fid.state.copy(), t_grid, 1e-3)
    p_mean = traj.expectation(rep.generator("P")).real
    assert np.max(np.abs(p_mean - (p_mean[0] - t_grid))) < 1e-6


def test_evolve_preserves_norm(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N"), (0.4, "Q")])
    psi0 = g.gcs_state(rep, chart, fid, 0.5)
    traj = g.evolve(rep, ham, psi0, np.linspace(0, 3, 7), 1e-3)
    norms = np.linalg.norm(traj.states, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-10


def test_evolve_second_order_convergence(osc40):
    """Halving dt reduces the deviation from the exact diagonal oracle by
    about four (midpoint stepping is second order)."""
    rep, chart, fid = osc40
    omega = lambda t: 1.0 + 0.3 * math.cos(t)
    ham = g.HamiltonianSpec([(omega, "N")])
    psi0 = g.gcs_state(rep, chart, fid, 0.8)
    t_end = 1.0
    exact = diagonal_oracle(psi0, t_end + 0.3 * math.sin(t_end), 40)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        traj = g.evolve(rep, ham, psi0, np.array([0.0, t_end]), dt)
        errs.append(np.linalg.norm(traj.states[-1] - exact))
    assert 3.2 < errs[0] / errs[1] < 4.8
    assert 3.2 < errs[1] / errs[2] < 4.8


def test_evolve_truncation_overflow(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(4.0, "Q")])     # strong drive leaves the space
    with pytest.raises(g.TruncationOverflow):
        g.evolve(rep, ham, fid.state.copy(), np.linspace(0, 4, 9), 1e-2)


# ---------------------------------------------------------------------------
# Invariant operators
# ---------------------------------------------------------------------------

def test_invariant_operator_commuting_hamiltonian(osc40):
    rep, _, _ = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    h0 = ham.matrix(0.0, rep)
    _, ops = g.invariant_operator(rep, ham, h0, np.linspace(0, 1, 5), 1e-2)
    assert np.max(np.abs(ops - h0[None])) < 1e-10


def test_invariant_operator_rotating_ladder(osc40):
    rep, _, _ = osc40
    omega = 1.0
    ham = g.HamiltonianSpec([(omega, "N")])
    a = rep.aux["a"]
    times, ops = g.invariant_operator(rep, ham, a, np.linspace(0, 1, 6), 1e-3)
    for t, op in zip(times, ops):
        assert np.max(np.abs(rep.compress(op - a * np.exp(1j * omega * t)))) < 1e-8


def test_invariant_operator_matrix_elements_constant(osc40):
    rep, chart, fid = osc40
    rng = np.random.default_rng(21)
    a, adag = rep.aux["a"], rep.aux["adag"]
    c = rng.normal(size=4)
    quad = adag @ adag + a @ a
    ham = g.HamiltonianSpec([(c[0], "N"), (c[1], "Q"), (c[2], "P"),
                             (0.1 * c[3], quad)])
    psi0 = g.gcs_state(rep, chart, fid, 0.3)
    t_grid = np.linspace(0, 1, 11)
    traj = g.evolve(rep, ham, psi0, t_grid, 1e-2)
    a0 = rep.generator("Q")
    _, ops = g.invariant_operator(rep, ham, a0, t_grid, 1e-2)
    vals = np.array([np.vdot(traj.states[i], ops[i] @ traj.states[i]).real
                     for i in range(len(t_grid))])
    assert np.max(np.abs(vals - vals[0])) < 1e-8


# ---------------------------------------------------------------------------
# Linearity classification
# ---------------------------------------------------------------------------

def test_linearity_driven_oscillator_is_linear(osc40):
    rep, _, _ = osc40
    ham = g.HamiltonianSpec([
        (1.0, "N"),
        (lambda t: np.exp(1j * t), "adag"),
        (lambda t: np.exp(-1j * t), "a"),
    ])
    report = g.linearity_classify(rep, ham, np.linspace(0, 5, 9))
    assert report.classification == "LinearInGenerators"
    assert report.residuals.max() < 1e-12


def test_linearity_squeeze_is_outside(osc40):
    rep, _, _ = osc40
    a, adag = rep.aux["a"], rep.aux["adag"]
    ham = g.HamiltonianSpec([(1.0, adag @ adag + a @ a)])
    report = g.linearity_classify(rep, ham, [0.0])
    assert report.classification == "Outside"
    assert report.residuals.max() > 0.9      # nothing of it projects onto the span


def test_linearity_central_term_is_linear(osc40):
    rep, _, _ = osc40
    report = g.linearity_classify(rep, g.HamiltonianSpec([(5.0, "I")]), [0.0])
    assert report.classification == "LinearInGenerators"


# ---------------------------------------------------------------------------
# Nearest manifold point
# ---------------------------------------------------------------------------

def test_nearest_gcs_recovers_member(osc40):
    rep, chart, fid = osc40
    w = 0.9 - 0.6j
    res = g.nearest_gcs(rep, chart, fid, g.gcs_state(rep, chart, fid, w))
    assert abs(res.z - w) < 1e-5
    assert res.fidelity >= 1.0 - 1e-10


def test_nearest_gcs_fock_one(osc40):
    rep, chart, fid = osc40
    psi = np.zeros(40, complex)
    psi[1] = 1.0
    res = g.nearest_gcs(rep, chart, fid, psi)
    assert abs(res.fidelity - math.exp(-1)) < 1e-9
    assert abs(abs(res.z) - 1.0) < 1e-4


def test_nearest_gcs_cat_state():
    rep = g.build_oscillator_algebra(60)
    chart = g.make_plane_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    plus = g.gcs_state(rep, chart, fid, 3.0)
    minus = g.gcs_state(rep, chart, fid, -3.0)
    cat = plus + minus
    cat /= np.linalg.norm(cat)
    res = g.nearest_gcs(rep, chart, fid, cat)
    # two symmetric peaks, each carrying half the state
    norm2 = 2.0 * (1.0 + math.exp(-2 * 9.0))
    expected = abs(1.0 + math.exp(-18.0)) ** 2 / norm2
    assert abs(res.fidelity - expected) < 1e-6
    assert abs(abs(res.z) - 3.0) < 1e-3


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------

def test_stability_linear_hamiltonian_stays_on_manifold(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([
        (1.0, "N"),
        (lambda t: math.cos(t), "adag"),
        (lambda t: math.cos(t), "a"),
    ])
    report = g.stability_test(rep, chart, fid, ham, 0.5, np.linspace(0, 5, 11), 1e-3)
    assert report.stable
    assert report.min_fidelity >= 1.0 - 1e-8


def test_stability_squeeze_leaves_plane_manifold(osc40):
    rep, chart, fid = osc40
    a, adag = rep.aux["a"], rep.aux["adag"]
    ham = g.HamiltonianSpec([(0.5, adag @ adag + a @ a)])
    report = g.stability_test(rep, chart, fid, ham, 0.0, np.linspace(0, 0.5, 6), 1e-3)
    assert report.fidelities[-1] < 0.99
    # squeezed vacuum against the best coherent state: 1/cosh(t)
    assert abs(report.fidelities[-1] - 1.0 / math.cosh(0.5)) < 1e-4


def test_stability_squeeze_stays_on_disk_manifold():
    rep = g.build_su11_squeeze(40)
    chart = g.make_disk_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    ham = g.HamiltonianSpec([(2.0, "K1")])    # (a†a† + aa)/2
    report = g.stability_test(rep, chart, fid, ham, 0.0, np.linspace(0, 0.5, 6), 1e-3)
    assert report.stable
    assert report.min_fidelity >= 1.0 - 1e-7
    # squeeze coordinate grows as tanh(t)
    assert abs(abs(report.z_path[-1]) - math.tanh(0.5)) < 1e-4


# ---------------------------------------------------------------------------
# Superstability
# ---------------------------------------------------------------------------

def test_superstability_number_drive(osc40):
    rep, _, fid = osc40
    omega = lambda t: 1.0 + 0.3 * math.cos(t)
    ham = g.HamiltonianSpec([(omega, "N")])
    t_grid = np.linspace(0, 5, 11)
    report = g.superstability_check(rep, ham, fid, ["Q", "P", "I"], t_grid, 1e-3)
    assert report.fiducial_stable
    assert report.automorphism_holds
    # induced map on (Q, P) is rotation by the accumulated phase
    iq, ip = rep.generator_names.index("Q"), rep.generator_names.index("P")
    for i, t in enumerate(t_grid):
        theta = t + 0.3 * math.sin(t)
        c = report.coefficient_matrices[i]
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        block = np.array([[c[0][iq], c[0][ip]], [c[1][iq], c[1][ip]]])
        assert np.max(np.abs(block - rot)) < 1e-6


def test_superstability_constant_force_distinguishes_checks():
    # roomier truncation: conjugation by a displacement spreads interior
    # states toward the boundary, so the automorphism check needs margin
    rep = g.build_oscillator_algebra(60)
    fid = g.fiducial_lowest_weight(rep)
    ham = g.HamiltonianSpec([(1.0, "Q")])
    report = g.superstability_check(rep, ham, fid, ["Q", "P", "I"],
                                    np.linspace(0, 0.5, 5), 1e-3, tol=1e-8)
    assert not report.fiducial_stable          # the vacuum is displaced
    assert report.automorphism_holds           # conjugation stays in the span
    # displacement oracle: |<0|S_t|0>| = exp(-t^2/4), worst at t = 0.5
    assert abs(report.fiducial_deviation - (1.0 - math.exp(-0.5 ** 2 / 4))) < 1e-6


def test_superstability_time_zero_trivial(osc40):
    rep, _, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    report = g.superstability_check(rep, ham, fid, ["Q", "P"], np.array([0.0]), 1e-3)
    assert report.fiducial_deviation == 0.0
    iq, ip = rep.generator_names.index("Q"), rep.generator_names.index("P")
    c = report.coefficient_matrices[0]
    assert abs(c[0][iq] - 1.0) < 1e-12 and abs(c[0][ip]) < 1e-12
    assert abs(c[1][ip] - 1.0) < 1e-12 and abs(c[1][iq]) < 1e-12


# ---------------------------------------------------------------------------
# Ladder conjugation identity
# ---------------------------------------------------------------------------

def test_conjugation_identity_lowering(osc40):
    rep, _, _ = osc40
    assert g.conjugation_identity_check(rep, 0.3, [(1.0, 1, 0)]) < 1e-10
    # left side literally equals a e^{-s}
    a = rep.aux["a"]
    ks = np.arange(40)
    lhs = (np.exp(0.3 * ks)[:, None] * a) * np.exp(-0.3 * ks)[None, :]
    assert np.max(np.abs(lhs - a * math.exp(-0.3))) < 1e-12


def test_conjugation_identity_number_invariant(osc40):
    rep, _, _ = osc40
    for s in (0.4, 1j * 0.8, 0.3 - 0.2j):
        assert g.conjugation_identity_check(rep, s, [(1.0, 1, 1)]) < 1e-12


def test_conjugation_identity_squared_lowering_sign_flip(osc40):
    rep, _, _ = osc40
    s = 1j * math.pi / 2
    assert g.conjugation_identity_check(rep, s, [(1.0, 2, 0)]) < 1e-10
    a = rep.aux["a"]
    a2 = a @ a
    ks = np.arange(40)
    lhs = (np.exp(s * ks)[:, None] * a2) * np.exp(-s * ks)[None, :]
    assert np.max(np.abs(lhs + a2)) < 1e-12     # a^2 maps to -a^2


def test_conjugation_identity_all_low_degree_monomials(osc40):
    rep, _, _ = osc40
    terms = [(1.0, p, q) for p in range(5) for q in range(5) if 0 < p + q <= 4]
    for s in (0.3, 0.7j, 0.2 + 0.5j):
        assert g.conjugation_identity_check(rep, s, terms) < 1e-10


def test_conjugation_identity_rejects_bad_degrees(osc40):
    rep, _, _ = osc40
    with pytest.raises(ValueError):
        g.conjugation_identity_check(rep, 0.1, [(1.0, -1, 0)])


def test_bilinear_generators_are_grade_zero_or_two():
    """Conjugation by the total-number phase fixes degree-0 bilinears and
    rephases degree +/-2 ones, matching the ladder scaling identity."""
    k0 = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
    k1 = np.array([[0, 0.5], [-0.5, 0]], dtype=complex)
    k2 = np.array([[0, -0.5j], [-0.5j, 0]], dtype=complex)
    rep = g.build_bilinear_upq(1, 1, [k1, k2, k0], n_trunc_per_mode=10)
    a1, a2 = rep.aux["a_modes"]
    n_tot = a1.conj().T @ a1 + a2.conj().T @ a2
    s = 0.37
    u = np.diag(np.exp(1j * s * np.diag(n_tot).real))
    # K0-type term is degree zero: invariant
    conj0 = u @ rep.generators[2] @ u.conj().T
    assert np.max(np.abs(conj0 - rep.generators[2])) < 1e-12
    # K1-type term splits into e^{2is} and e^{-2is} parts
    kp = a1.conj().T @ a2.conj().T
    expected = 0.5 * (np.exp(2j * s) * kp + np.exp(-2j * s) * kp.conj().T)
    conj1 = u @ rep.generators[0] @ u.conj().T
    assert np.max(np.abs(conj1 - expected)) < 1e-12
