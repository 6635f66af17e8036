# coding: utf-8
"""Reduced classical dynamics: parameter-space route, chart route, action."""

import math

import numpy as np
import pytest

import gcsdyn as g


@pytest.fixture(scope="module")
def hw40():
    rep = g.build_heisenberg_weyl(40)
    fid = g.fiducial_lowest_weight(rep)
    return rep, fid, g.birkhoff_data(rep, fid)


@pytest.fixture(scope="module")
def osc40():
    rep = g.build_oscillator_algebra(40)
    chart = g.make_plane_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    return rep, chart, fid


def number_hamiltonian(rep):
    name = "N" if "N" in rep.generator_names else "n"
    return g.HamiltonianSpec([(1.0, name)])


# ---------------------------------------------------------------------------
# Classical Hamiltonian
# ---------------------------------------------------------------------------

def test_classical_hamiltonian_coherent_energy():
    rep = g.build_oscillator_algebra(60)
    chart = g.make_plane_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    ham = g.HamiltonianSpec([(1.0, "N")])
    for z in (0.5, 1.5j, 1.2 - 0.9j):
        e = g.classical_hamiltonian(rep, fid, ham, 0.0, chart=chart, z=z)
        assert abs(e - abs(z) ** 2) < 1e-9


def test_classical_hamiltonian_at_chart_center(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N"), (0.7, "Q")])
    e = g.classical_hamiltonian(rep, fid, ham, 0.0, chart=chart, z=0.0)
    direct = float(np.vdot(fid.state, ham.matrix(0.0, rep) @ fid.state).real)
    assert abs(e - direct) < 1e-14


def test_classical_hamiltonian_identity_everywhere(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "I")])
    for z in (0.0, 0.9, 1.1j):
        assert abs(g.classical_hamiltonian(rep, fid, ham, 0.0, chart=chart, z=z)
                   - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# One-form R
# ---------------------------------------------------------------------------

def test_r_vector_at_origin_is_fiducial_expectations(hw40):
    _, _, data = hw40
    assert np.allclose(g.r_vector(data, np.zeros(3)), data.v, atol=1e-15)
    assert np.allclose(data.v, [0.0, 0.0, -1.0], atol=1e-14)


def test_r_vector_abelian_algebra_is_constant():
    data = g.BirkhoffData(dim=2, v=np.array([0.3, -0.7]),
                          constants=np.zeros((2, 2, 2)),
                          active=np.arange(2))
    rng = np.random.default_rng(2)
    for _ in range(4):
        ell = rng.normal(size=2)
        assert np.allclose(g.r_vector(data, ell), data.v, atol=1e-16)


def test_r_vector_heisenberg_nilpotent_oracle(hw40):
    """The displacement algebra is two-step nilpotent, so the series is the
    exact three-term polynomial; its value is known in closed form."""
    _, _, data = hw40
    rng = np.random.default_rng(8)
    for _ in range(6):
        lq, lp, ls = rng.normal(size=3)
        r = g.r_vector(data, np.array([lq, lp, ls]))
        assert np.allclose(r, [lp / 2.0, -lq / 2.0, -1.0], atol=1e-14)
    # direct truncated-series cross-check: phi(M) = 1 - M/2 + M^2/6
    ell = np.array([0.4, -1.1, 0.3])
    m = -np.einsum("a,abd->bd", ell, data.constants)
    phi = np.eye(3) - m / 2.0 + m @ m / 6.0
    assert np.allclose(g.r_vector(data, ell), phi @ data.v, atol=1e-15)


# ---------------------------------------------------------------------------
# Form matrix
# ---------------------------------------------------------------------------

def test_omega_heisenberg_canonical_block(hw40):
    _, _, data = hw40
    report = g.omega_matrix(data, np.array([0.0, 0.0, 0.0]))
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 0] = -1.0, 1.0
    assert np.allclose(report.matrix, expected, atol=1e-9)
    assert report.rank == 2
    null = report.null_directions[0]
    assert abs(abs(null[2]) - 1.0) < 1e-9            # central axis
    # antisymmetric real matrices have even rank
    assert report.rank % 2 == 0


def test_omega_refinement_is_second_order():
    rep = g.build_su2(4)
    fid = g.fiducial_lowest_weight(rep)
    data = g.birkhoff_data(rep, fid)
    ell = np.array([0.3, -0.2, 0.5])
    oms = [g.omega_matrix(data, ell, h=h).matrix for h in (2e-3, 1e-3, 5e-4)]
    e1 = np.max(np.abs(oms[0] - oms[2]))
    e2 = np.max(np.abs(oms[1] - oms[2]))
    assert 3.0 < e1 / e2 < 5.5


def test_omega_abelian_is_zero():
    data = g.BirkhoffData(dim=2, v=np.array([1.0, 2.0]),
                          constants=np.zeros((2, 2, 2)),
                          active=np.arange(2))
    report = g.omega_matrix(data, np.array([0.4, -0.6]))
    assert np.max(np.abs(report.matrix)) < 1e-12
    assert report.rank == 0


# ---------------------------------------------------------------------------
# Equations of motion on the parameter space
# ---------------------------------------------------------------------------

def test_birkhoff_full_heisenberg_is_degenerate(hw40):
    rep, fid, data = hw40
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, data)
    with pytest.raises(g.DegenerateForm) as err:
        g.birkhoff_rhs(data, grad, np.array([0.2, 0.1, 0.0]), 0.0)
    assert err.value.rank == 2
    assert abs(abs(err.value.null_directions[0][2]) - 1.0) < 1e-9


def test_birkhoff_restricted_block_gives_hamilton_equations(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, sub)
    rng = np.random.default_rng(4)
    for _ in range(4):
        u, v = rng.normal(scale=0.7, size=2)
        vel = g.birkhoff_rhs(sub, grad, np.array([u, v]), 0.0)
        # classical energy (u^2 + v^2)/2: canonical flow rotates the pair
        assert np.allclose(vel, [v, -u], atol=1e-6)


def test_birkhoff_critical_point_is_equilibrium(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, sub)
    vel = g.birkhoff_rhs(sub, grad, np.zeros(2), 0.0)
    assert np.max(np.abs(vel)) < 1e-9


# ---------------------------------------------------------------------------
# Chart metric and bracket
# ---------------------------------------------------------------------------

def test_kahler_plane_flat_metric():
    rep = g.build_heisenberg_weyl(60)
    chart = g.make_plane_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    for z in (0.3, 0.8 - 0.5j, 1.4j):
        kp = g.kahler_metric(rep, chart, fid, z)
        assert abs(kp.potential - abs(z) ** 2) < 1e-9
        assert abs(kp.metric - 1.0) < 1e-7
        assert abs(kp.inverse_metric - 1.0) < 1e-7


def test_kahler_sphere_fubini_study():
    rep = g.build_su2(8)
    chart = g.make_sphere_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    two_j = 8.0
    # wider stencil: the overlap noise floor is amplified by 1/h^2
    for z in (0.2, 0.6 + 0.3j, 1.0j):
        kp = g.kahler_metric(rep, chart, fid, z, h=4e-4)
        r2 = abs(z) ** 2
        assert abs(kp.potential - two_j * math.log(1 + r2)) < 1e-10
        assert abs(kp.metric - two_j / (1 + r2) ** 2) < 1e-6


def test_kahler_disk_hyperbolic():
    rep = g.build_su11(1.0, 40)
    chart = g.make_disk_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    for z in (0.2, 0.45 + 0.2j, 0.6j):
        kp = g.kahler_metric(rep, chart, fid, z)
        r2 = abs(z) ** 2
        assert abs(kp.potential + 2.0 * math.log(1 - r2)) < 1e-8
        assert abs(kp.metric - 2.0 / (1 - r2) ** 2) < 1e-5


def test_kahler_potential_normalized_at_center(osc40):
    rep, chart, fid = osc40
    assert abs(g.kahler_metric(rep, chart, fid, 1e-12).potential) < 1e-12


def test_mixed_partial_consistency_small(osc40):
    rep, chart, fid = osc40
    for z in (0.4, 0.9j, 0.7 - 0.5j):
        assert g.mixed_partial_consistency(rep, chart, fid, z) < 1e-4


def test_kahler_bracket_antisymmetric(osc40):
    rep, chart, fid = osc40
    rng = np.random.default_rng(9)
    ca, cb = rng.normal(size=3), rng.normal(size=3)
    fa = lambda z: ca[0] * z.real ** 2 + ca[1] * z.imag + ca[2] * z.real * z.imag
    fb = lambda z: cb[0] * z.imag ** 2 + cb[1] * z.real + cb[2] * z.real * z.imag
    for z in (0.4 + 0.1j, -0.6 + 0.8j):
        ab = g.kahler_bracket(rep, chart, fid, fa, fb, z)
        ba = g.kahler_bracket(rep, chart, fid, fb, fa, z)
        assert abs(ab + ba) < 1e-6 * max(1.0, abs(ab))


# ---------------------------------------------------------------------------
# Chart velocity field
# ---------------------------------------------------------------------------

def test_coset_rhs_plane_rotation(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    for z in (0.8 + 0.2j, -0.5 + 1.0j):
        zdot = g.coset_rhs(rep, chart, fid, ham, z, 0.0)
        assert abs(zdot - (-1j * z)) < 1e-6


def test_coset_rhs_critical_point(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    assert abs(g.coset_rhs(rep, chart, fid, ham, 0.0, 0.0)) < 1e-9


def test_coset_rhs_disk_squeeze_rotation():
    rep = g.build_su11_squeeze(40)
    chart = g.make_disk_chart(rep)
    fid = g.fiducial_lowest_weight(rep)
    ham = g.HamiltonianSpec([(2.0, "K0")])     # number drive: N + 1/2
    for z in (0.3, 0.2 - 0.4j):
        zdot = g.coset_rhs(rep, chart, fid, ham, z, 0.0)
        assert abs(zdot - (-2j * z)) < 1e-5


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def test_integrate_linear_field_circle():
    field = lambda t, z: -1j * z
    t_grid = np.linspace(0, 2 * math.pi, 21)
    traj = g.integrate_classical(field, 1.0 + 0j, t_grid, 1e-3)
    assert np.max(np.abs(np.abs(traj.points) - 1.0)) < 1e-8
    expected = np.exp(-1j * t_grid)
    assert np.max(np.abs(traj.points - expected)) < 1e-8


def test_integrate_zero_field_constant():
    traj = g.integrate_classical(lambda t, z: 0.0 * z, 0.3 + 0.4j,
                                 np.linspace(0, 5, 6), 1e-2)
    assert np.max(np.abs(traj.points - (0.3 + 0.4j))) == 0.0


def test_integrate_fourth_order_convergence():
    field = lambda t, z: -1j * z
    exact = np.exp(-1j * 1.0)
    errs = []
    for dt in (0.1, 0.05):
        traj = g.integrate_classical(field, 1.0 + 0j, np.array([0.0, 1.0]), dt)
        errs.append(abs(traj.points[-1] - exact))
    assert 12.0 < errs[0] / errs[1] < 20.0


def test_integrate_domain_exit():
    field = lambda t, z: 1.0 + 0j            # constant outward drift
    with pytest.raises(g.DomainExit):
        g.integrate_classical(field, 0.5 + 0j, np.linspace(0, 2, 5), 1e-2,
                              domain=lambda z: abs(z) < 1.0)


# ---------------------------------------------------------------------------
# Action
# ---------------------------------------------------------------------------

def test_action_constant_trajectory_at_critical_point(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = g.HamiltonianSpec([(1.0, "n"), (2.0, "I")])
    times = np.linspace(0.0, 3.0, 61)
    ells = np.zeros((61, 2))
    val = g.action_value(sub, rep, fid, ham, times, ells)
    assert abs(val - (-2.0 * 3.0)) < 1e-12


def test_action_stationary_under_endpoint_fixed_perturbations(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, sub)
    t_grid = np.linspace(0.0, 2.0, 81)
    field = lambda t, ell: g.birkhoff_rhs(sub, grad, ell, t)
    traj = g.integrate_classical(field, np.array([0.6, 0.0]), t_grid, 1e-2)
    base = g.action_value(sub, rep, fid, ham, t_grid, traj.points)
    bump = np.sin(math.pi * t_grid / 2.0)[:, None] * np.array([0.7, 0.4])
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        val = g.action_value(sub, rep, fid, ham, t_grid, traj.points + eps * bump)
        ratios.append(abs(val - base) / eps)
    # first-order change vanishes linearly in the perturbation size
    assert ratios[1] < 0.2 * ratios[0]
    assert ratios[2] < 0.2 * ratios[1]
    assert abs(ratios[0]) / 1e-2 < 10.0        # bounded second difference


def test_action_matches_direct_quantum_quadrature(hw40):
    """The reduced action equals the state-path quadrature of the geometric
    phase minus the energy, computed independently."""
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    t_grid = np.linspace(0.0, 2.0, 101)
    # circular orbit of the displacement pair
    u0, v0 = 0.8, 0.0
    ells = np.stack([u0 * np.cos(t_grid) + v0 * np.sin(t_grid),
                     v0 * np.cos(t_grid) - u0 * np.sin(t_grid)], axis=1)
    a1 = g.action_value(sub, rep, fid, ham, t_grid, ells)
    a2 = g.action_from_quantum_path(rep, fid, ham, sub, t_grid, ells)
    assert abs(a1 - a2) < 1e-4


# ---------------------------------------------------------------------------
# Route agreement and energy conservation
# ---------------------------------------------------------------------------

def test_routes_agree_after_coordinate_identification(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, sub)
    t_grid = np.linspace(0.0, 3.0, 31)
    u0, v0 = 0.9, -0.3
    bfield = lambda t, ell: g.birkhoff_rhs(sub, grad, ell, t)
    btraj = g.integrate_classical(bfield, np.array([u0, v0]), t_grid, 1e-2)
    chart = g.make_plane_chart(rep)
    z0 = complex(-v0, u0) / math.sqrt(2.0)
    cfield = g.coset_rhs_field(rep, chart, fid, ham)
    ctraj = g.integrate_classical(cfield, z0, t_grid, 1e-2)
    z_from_b = (-btraj.points[:, 1] + 1j * btraj.points[:, 0]) / math.sqrt(2.0)
    assert np.max(np.abs(z_from_b - ctraj.points)) < 1e-5


def test_energy_conserved_along_both_routes(hw40):
    rep, fid, data = hw40
    sub = data.restrict([0, 1])
    ham = number_hamiltonian(rep)
    grad = g.birkhoff_grad_h(rep, fid, ham, sub)
    t_grid = np.linspace(0.0, 4.0, 9)
    bfield = lambda t, ell: g.birkhoff_rhs(sub, grad, ell, t)
    btraj = g.integrate_classical(bfield, np.array([0.7, 0.1]), t_grid, 1e-2)
    energies = [g.classical_hamiltonian(rep, fid, ham, t, ell=sub.embed(e))
                for t, e in zip(t_grid, btraj.points)]
    assert np.max(np.abs(np.array(energies) - energies[0])) < 1e-8
    chart = g.make_plane_chart(rep)
    cfield = g.coset_rhs_field(rep, chart, fid, ham)
    ctraj = g.integrate_classical(cfield, 0.5 + 0.35j, t_grid, 1e-2)
    c_energies = [g.classical_hamiltonian(rep, fid, ham, t, chart=chart, z=z)
                  for t, z in zip(t_grid, ctraj.points)]
    assert np.max(np.abs(np.array(c_energies) - c_energies[0])) < 1e-8


# ---------------------------------------------------------------------------
# Quantum vs classical
# ---------------------------------------------------------------------------

def test_compare_harmonic_oscillator(osc40):
    rep, chart, fid = osc40
    ham = g.HamiltonianSpec([(1.0, "N")])
    t_grid = np.linspace(0.0, 2 * math.pi, 13)
    report = g.compare_quantum_classical(rep, chart, fid, ham, 0.9 + 0.3j,
                                         t_grid, 1e-3)
    assert report.linearity_class == "LinearInGenerators"
    assert report.min_fidelity >= 1.0 - 1e-6
    assert report.max_discrepancy < 1e-5


def test_compare_squeeze_is_approximate_regime(osc40):
    rep, chart, fid = osc40
    a, adag = rep.aux["a"], rep.aux["adag"]
    ham = g.HamiltonianSpec([(0.5, adag @ adag + a @ a)])
    t_grid = np.linspace(0.0, 0.5, 6)
    report = g.compare_quantum_classical(rep, chart, fid, ham, 0.0, t_grid, 1e-3)
    assert report.linearity_class == "Outside"
    assert report.min_fidelity < 0.99          # visibly leaves the manifold
