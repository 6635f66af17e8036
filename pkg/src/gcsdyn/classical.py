# coding: utf-8
"""Reduced classical dynamics of stable coherent-state families.

Two routes are implemented.  The first works on the full group-parameter
space: a first-order variational system whose antisymmetric form matrix is
the curl of the one-form R(l), itself built from the structure constants and
the fiducial expectations.  The second works on the coset chart: the
potential f(z) = -2 ln |<f|z>| supplies a metric whose inverse drives
Hamiltonian motion of the chart coordinate.  Both are validated against exact
quantum evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import CosetChart
from .gcs_family import FiducialSpec, gcs_state, overlap
from .lie_core import GroupPoint, Representation, group_exp_apply

__all__ = [
    "BirkhoffData",
    "OmegaReport",
    "KahlerPoint",
    "ClassicalTrajectory",
    "ComparisonReport",
    "DegenerateForm",
    "DomainExit",
    "birkhoff_data",
    "r_vector",
    "omega_matrix",
    "birkhoff_rhs",
    "birkhoff_grad_h",
    "classical_hamiltonian",
    "kahler_metric",
    "kahler_bracket",
    "mixed_partial_consistency",
    "coset_rhs",
    "coset_rhs_field",
    "integrate_classical",
    "action_value",
    "action_from_quantum_path",
    "compare_quantum_classical",
]

RANK_RTOL = 1e-10
COND_CAP = 1e10


class DegenerateForm(Exception):
    """The form matrix is singular; the dynamics is not determined on the
    full parameter space and should move to the coset chart."""

    def __init__(self, message, rank=None, null_directions=None):
        super().__init__(message)
        self.rank = rank
        self.null_directions = null_directions


class DomainExit(Exception):
    """A classical trajectory left the chart domain."""


# ---------------------------------------------------------------------------
# Group-parameter route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BirkhoffData:
    """Ingredients of the parameter-space equations of motion.

    ``v`` holds the fiducial expectations -<f|T_a|f> (real under the
    Hermitian-generator convention).  ``constants`` are the structure
    constants with the central charges folded onto the identity generator's
    slot, so projective central terms enter the form matrix; the algebra must
    then carry the identity as an explicit generator.  ``active`` lists the
    free parameter indices (the rest are frozen at zero), which implements
    block restrictions such as the displacement pair of the full
    three-parameter group.
    """

    dim: int
    v: np.ndarray                 # (dim,)
    constants: np.ndarray         # (dim, dim, dim) effective constants
    active: np.ndarray            # indices of free parameters

    def __post_init__(self):
        for name in ("v", "constants", "active"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_active(self) -> int:
        return len(self.active)

    def embed(self, ell_active: np.ndarray) -> np.ndarray:
        full = np.zeros(self.dim)
        full[self.active] = ell_active
        return full

    def restrict(self, indices) -> "BirkhoffData":
        return BirkhoffData(dim=self.dim, v=self.v, constants=self.constants,
                            active=np.asarray(indices, dtype=int))


def birkhoff_data(rep: Representation, fid: FiducialSpec) -> BirkhoffData:
    """Assemble the parameter-space data for a representation and fiducial."""
    r = rep.algebra.dim
    v = np.array([-float(np.vdot(fid.state, rep.generators[a] @ fid.state).real)
                  for a in range(r)])
    c = rep.algebra.structure_constants.copy()
    z = rep.algebra.central_charges
    if np.any(z != 0.0):
        if rep.algebra.identity_index is None:
            raise ValueError(
                "projective central charges require the identity operator as "
                "an explicit generator; carry the central direction as a parameter")
        c[:, :, rep.algebra.identity_index] += np.real(z)
    return BirkhoffData(dim=r, v=v, constants=c, active=np.arange(r))


def _phi_entire(m: np.ndarray, n_terms: int = 18) -> np.ndarray:
    """The entire function (1 - exp(-M)) M^{-1} as a power series with
    argument halving; well-defined for singular and nilpotent M.

    The argument is halved until its norm is at most 1/2, where 18 terms of
    both series reach full double precision (0.5^18/19! ~ 1e-22); the
    doubling step uses phi(2A) = phi(A)(1 + e^{-A})/2.
    """
    m = np.asarray(m, dtype=float)
    dim = m.shape[0]
    eye = np.eye(dim)
    norm = float(np.abs(m).sum(axis=0).max(initial=0.0))
    n_half = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    a = m / (2.0 ** n_half)
    acc = eye.copy()
    e_acc = eye.copy()
    e_term = eye.copy()
    for k in range(1, n_terms):
        e_term = e_term @ (-a) / k
        e_acc = e_acc + e_term
        acc = acc + e_term / (k + 1)
    for _ in range(n_half):
        acc = acc @ (eye + e_acc) / 2.0
        e_acc = e_acc @ e_acc
    return acc


def r_vector(data: BirkhoffData, ell_active: np.ndarray) -> np.ndarray:
    """One-form coefficients R at a parameter point (active components).

    R = phi(M) v with M_bd = -l_a C_ab^d in the Hermitian-generator
    convention; the sign relative to the anti-Hermitian-basis constants makes
    the displacement pair come out canonical, which is pinned by the exact
    nilpotent oracle in the tests.
    """
    ell = data.embed(np.asarray(ell_active, dtype=float))
    m = -np.einsum("a,abd->bd", ell, data.constants)
    r_full = _phi_entire(m) @ data.v
    return r_full[data.active]


@dataclass(frozen=True)
class OmegaReport:
    matrix: np.ndarray
    rank: int
    cond: float
    singular_values: np.ndarray
    null_directions: np.ndarray   # rows span the numerical null space


def omega_matrix(data: BirkhoffData, ell_active: np.ndarray,
                 h: float = 1e-5) -> OmegaReport:
    """Antisymmetric form matrix Omega_ab = d_a R_b - d_b R_a by central
    differences of the one-form, antisymmetrized by construction."""
    ell = np.asarray(ell_active, dtype=float)
    k = data.n_active
    jac = np.zeros((k, k))
    for a in range(k):
        step = np.zeros(k)
        step[a] = h
        jac[a] = (r_vector(data, ell + step) - r_vector(data, ell - step)) / (2 * h)
    omega = jac - jac.T
    svals = np.linalg.svd(omega, compute_uv=False)
    smax = float(svals.max(initial=0.0))
    thresh = max(smax * RANK_RTOL, 1e-12)
    rank = int(np.sum(svals > thresh))
    if rank < k:
        _, _, vt = np.linalg.svd(omega)
        null = vt[rank:]
    else:
        null = np.zeros((0, k))
    return OmegaReport(matrix=omega, rank=rank,
                       cond=float(smax / svals.min()) if svals.min() > 0 else math.inf,
                       singular_values=svals, null_directions=null)


def classical_hamiltonian(rep: Representation, fid: FiducialSpec, hamiltonian,
                          t: float, chart: CosetChart | None = None,
                          z: complex | None = None,
                          ell: np.ndarray | None = None) -> float:
    """Expectation of H(t) in the coherent state at a chart point or at raw
    group parameters; real for Hermitian H."""
    if (z is None) == (ell is None):
        raise ValueError("give exactly one of z (with chart) or ell")
    if z is not None:
        psi = gcs_state(rep, chart, fid, z)
    else:
        psi = group_exp_apply(rep, GroupPoint(np.asarray(ell, float)), fid.state)
    val = complex(np.vdot(psi, hamiltonian.matrix(t, rep) @ psi))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValueError(f"expectation has imaginary part {val.imag:.2e}")
    return float(val.real)


def birkhoff_grad_h(rep: Representation, fid: FiducialSpec, hamiltonian,
                    data: BirkhoffData, h: float = 1e-5):
    """Central-difference gradient of the classical Hamiltonian over the
    active parameters."""
    def grad(ell_active: np.ndarray, t: float) -> np.ndarray:
        ell_active = np.asarray(ell_active, dtype=float)
        out = np.zeros(data.n_active)
        for a in range(data.n_active):
            step = np.zeros(data.n_active)
            step[a] = h
            ep = classical_hamiltonian(rep, fid, hamiltonian, t,
                                       ell=data.embed(ell_active + step))
            em = classical_hamiltonian(rep, fid, hamiltonian, t,
                                       ell=data.embed(ell_active - step))
            out[a] = (ep - em) / (2 * h)
        return out
    return grad


def birkhoff_rhs(data: BirkhoffData, grad_h, ell_active: np.ndarray, t: float,
                 h: float = 1e-5, cond_cap: float = COND_CAP) -> np.ndarray:
    """Parameter velocity solving Omega l_dot = grad H.

    Raises DegenerateForm with the rank and null directions when the form is
    singular (expected for odd-dimensional groups and central directions);
    the remedy is to restrict the parameters or move to the coset chart.
    """
    rep_om = omega_matrix(data, ell_active, h=h)
    k = data.n_active
    if rep_om.rank < k or rep_om.cond > cond_cap:
        raise DegenerateForm(
            f"form matrix is degenerate (rank {rep_om.rank} of {k})",
            rank=rep_om.rank, null_directions=rep_om.null_directions)
    rhs = grad_h(np.asarray(ell_active, dtype=float), t)
    return np.linalg.solve(rep_om.matrix, rhs)


# ---------------------------------------------------------------------------
# Coset-chart route
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KahlerPoint:
    potential: float
    metric: float
    inverse_metric: float


def _potential_fn(rep, chart, fid):
    def f(z: complex) -> float:
        ov = overlap(fid.state, gcs_state(rep, chart, fid, z))
        mag = abs(ov)
        if mag <= 0.0:
            raise ValueError("vanishing overlap; potential undefined here")
        return -2.0 * math.log(mag)
    return f


def kahler_metric(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                  z: complex, h: float = 1e-4) -> KahlerPoint:
    """Potential f = -2 ln |<f|z>| and its mixed Hessian d2f/dz dz* by the
    five-point Laplacian stencil (the mixed Hessian is a quarter of the
    Laplacian for a real potential on one complex coordinate)."""
    f = _potential_fn(rep, chart, fid)
    z = complex(z)
    f0 = f(z)
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f0) / h ** 2
    g = lap / 4.0
    if g <= 0.0:
        raise ValueError(f"metric {g:.3e} not positive at z = {z}; "
                         "chart-domain violation")
    return KahlerPoint(potential=f0, metric=float(g), inverse_metric=float(1.0 / g))


def mixed_partial_consistency(rep: Representation, chart: CosetChart,
                              fid: FiducialSpec, z: complex,
                              h: float = 1e-3) -> float:
    """Two independent stencils for the mixed partial d2f/dx dy; their
    disagreement bounds the finite-difference inconsistency of the potential
    (the closedness proxy for a potential-derived form)."""
    f = _potential_fn(rep, chart, fid)
    z = complex(z)
    cross = (f(z + h + 1j * h) - f(z + h - 1j * h)
             - f(z - h + 1j * h) + f(z - h - 1j * h)) / (4 * h ** 2)
    seven = (f(z + h + 1j * h) - f(z + h) - f(z + 1j * h) + 2 * f(z)
             - f(z - h) - f(z - 1j * h) + f(z - h - 1j * h)) / (2 * h ** 2)
    return abs(cross - seven)


def kahler_bracket(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                   fa, fb, z: complex, h: float = 1e-4) -> float:
    """Poisson bracket (A, B) = g^{-1} (dA dB* - dA* dB) of two real
    observables on the chart, with complex central differences."""
    def wirtinger(fn, z0):
        dx = (fn(z0 + h) - fn(z0 - h)) / (2 * h)
        dy = (fn(z0 + 1j * h) - fn(z0 - 1j * h)) / (2 * h)
        return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)   # d/dz, d/dz*
    da, das = wirtinger(fa, complex(z))
    db, dbs = wirtinger(fb, complex(z))
    g = kahler_metric(rep, chart, fid, z, h=h).metric
    val = (da * dbs - das * db) / g
    return float((val / 1j).real) if abs(val.real) < abs(val.imag) else float(val.real)


def coset_rhs(rep: Representation, chart: CosetChart, fid: FiducialSpec,
              hamiltonian, z: complex, t: float, h: float = 1e-4) -> complex:
    """Chart velocity z_dot = -i g^{-1} dH/dz*.

    The -i factor is the convention that makes the harmonic oscillator
    reproduce the unitary quantum evolution; it is validated against that
    oracle in the tests.  The five displaced states of the stencil are
    computed once and serve both the energy gradient and the metric.
    """
    z = complex(z)
    center = gcs_state(rep, chart, fid, z)
    displaced = [gcs_state(rep, chart, fid, z + d)
                 for d in (h, -h, 1j * h, -1j * h)]
    hmat = hamiltonian.matrix(t, rep)
    e = [float(np.vdot(s, hmat @ s).real) for s in displaced]
    dx = (e[0] - e[1]) / (2 * h)
    dy = (e[2] - e[3]) / (2 * h)
    dzbar = 0.5 * (dx + 1j * dy)
    f0 = fid.state
    fvals = [-2.0 * math.log(abs(np.vdot(f0, s))) for s in displaced]
    f_center = -2.0 * math.log(abs(np.vdot(f0, center)))
    g = (sum(fvals) - 4.0 * f_center) / (4.0 * h ** 2)
    if g <= 0.0:
        raise ValueError(f"metric {g:.3e} not positive at z = {z}")
    return -1j * dzbar / g


def coset_rhs_field(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                    hamiltonian, h: float = 1e-4):
    """The chart velocity as a callable (t, z) -> z_dot."""
    def field(t: float, z: complex) -> complex:
        return coset_rhs(rep, chart, fid, hamiltonian, z, t, h=h)
    return field


# ---------------------------------------------------------------------------
# Integration and the action
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    points: np.ndarray           # (T,) complex chart coords or (T, r) params
    integrator_meta: dict


def integrate_classical(rhs, x0, t_grid, dt: float,
                        domain=None) -> ClassicalTrajectory:
    """Fixed-step fourth-order Runge-Kutta over t_grid with substeps of size
    at most dt; checks chart-domain membership after every substep."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    x = np.asarray(x0, dtype=complex) if np.iscomplexobj(np.asarray(x0)) \
        else np.asarray(x0, dtype=float)
    scalar = x.ndim == 0
    points = [complex(x) if scalar else x.copy()]
    for k in range(len(t_grid) - 1):
        t0, t1 = t_grid[k], t_grid[k + 1]
        n_sub = max(1, int(math.ceil((t1 - t0) / dt - 1e-12)))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = np.asarray(rhs(t, x))
            k2 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k1))
            k3 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k2))
            k4 = np.asarray(rhs(t + h, x + h * k3))
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            if domain is not None and not domain(complex(x) if scalar else x):
                raise DomainExit(f"trajectory left the domain at t = {t}")
        points.append(complex(x) if scalar else x.copy())
    pts = np.array(points)
    return ClassicalTrajectory(times=t_grid.copy(), points=pts,
                               integrator_meta={"method": "rk4", "dt": dt, "order": 4})


def _grid_derivative(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Second-order derivative on a uniform grid (central interior,
    one-sided at the ends)."""
    dt = times[1] - times[0]
    if np.max(np.abs(np.diff(times) - dt)) > 1e-12 * max(dt, 1.0):
        raise ValueError("action quadrature needs a uniform time grid")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2 * dt)
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * dt)
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * dt)
    return out


def action_value(data: BirkhoffData, rep: Representation, fid: FiducialSpec,
                 hamiltonian, times: np.ndarray, ells: np.ndarray) -> float:
    """Trapezoidal value of the reduced action integral R_a l_dot_a - H along
    a stored parameter trajectory (active coordinates)."""
    times = np.asarray(times, dtype=float)
    ells = np.asarray(ells, dtype=float)
    vel = _grid_derivative(ells, times)
    integrand = np.empty(len(times))
    for i, t in enumerate(times):
        rr = r_vector(data, ells[i])
        hh = classical_hamiltonian(rep, fid, hamiltonian, t, ell=data.embed(ells[i]))
        integrand[i] = float(rr @ vel[i]) - hh
    return float(np.trapezoid(integrand, times))


def action_from_quantum_path(rep: Representation, fid: FiducialSpec,
                             hamiltonian, data: BirkhoffData,
                             times: np.ndarray, ells: np.ndarray) -> float:
    """The same action computed directly from the state path: quadrature of
    i <psi | d/dt psi> - <psi|H|psi> with central-difference time derivative.
    Independent of the one-form construction; used as its oracle."""
    times = np.asarray(times, dtype=float)
    states = np.stack([group_exp_apply(rep, GroupPoint(data.embed(e)), fid.state)
                       for e in np.asarray(ells, dtype=float)])
    dstates = _grid_derivative(states, times)
    integrand = np.empty(len(times))
    for i, t in enumerate(times):
        kin = 1j * np.vdot(states[i], dstates[i])
        pot = np.vdot(states[i], hamiltonian.matrix(t, rep) @ states[i])
        integrand[i] = float(kin.real - pot.real)
    return float(np.trapezoid(integrand, times))


# ---------------------------------------------------------------------------
# Quantum vs classical comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    times: np.ndarray
    fidelity: np.ndarray              # |<z_cl(t)|psi(t)>|^2
    z_classical: np.ndarray
    z_quantum: np.ndarray             # nearest-manifold coordinates
    coordinate_discrepancy: np.ndarray
    min_fidelity: float
    max_discrepancy: float
    linearity_class: str
    tolerance_budget: dict

    def to_jsonable(self) -> dict:
        return {"min_fidelity": self.min_fidelity,
                "max_discrepancy": self.max_discrepancy,
                "linearity_class": self.linearity_class,
                "tolerance_budget": self.tolerance_budget}


def compare_quantum_classical(rep: Representation, chart: CosetChart,
                              fid: FiducialSpec, hamiltonian, z0: complex,
                              t_grid, dt: float, fd_step: float = 1e-4,
                              classical_dt: float | None = None) -> ComparisonReport:
    """Run the exact evolution and the chart dynamics side by side.

    For Hamiltonians linear in the generators the fidelity must stay within
    the combined stepping, optimizer, and finite-difference budget of 1;
    anything else is reported as the approximate regime, with the series
    returned rather than judged.  ``classical_dt`` defaults to 10 dt: the
    fourth-order integrator holds more accuracy per step than the
    second-order quantum stepper.
    """
    from .evolution import evolve, linearity_classify, nearest_gcs

    t_grid = np.asarray(t_grid, dtype=float)
    psi0 = gcs_state(rep, chart, fid, z0)
    qtraj = evolve(rep, hamiltonian, psi0, t_grid, dt)
    field = coset_rhs_field(rep, chart, fid, hamiltonian, h=fd_step)
    ctraj = integrate_classical(field, complex(z0), t_grid,
                                classical_dt if classical_dt else 10 * dt,
                                domain=chart.domain_contains)
    fid_series = np.empty(len(t_grid))
    z_qm = np.empty(len(t_grid), dtype=complex)
    for i in range(len(t_grid)):
        phi = gcs_state(rep, chart, fid, ctraj.points[i])
        fid_series[i] = abs(np.vdot(phi, qtraj.states[i])) ** 2
        z_qm[i] = nearest_gcs(rep, chart, fid, qtraj.states[i]).z
    disc = np.abs(ctraj.points - z_qm)
    mk = linearity_classify(rep, hamiltonian, t_grid[:: max(1, len(t_grid) // 5)])
    h_scale = float(np.linalg.norm(
        rep.compress(hamiltonian.matrix(float(t_grid[-1]) / 2.0, rep)), ord=2))
    budget = {
        "stepper": 10.0 * dt ** 2 * float(t_grid[-1] - t_grid[0]) * max(1.0, h_scale),
        "finite_difference": 10.0 * fd_step ** 2 * float(t_grid[-1] - t_grid[0]),
        "optimizer": 1e-9,
    }
    return ComparisonReport(
        times=t_grid.copy(), fidelity=fid_series,
        z_classical=np.asarray(ctraj.points), z_quantum=z_qm,
        coordinate_discrepancy=disc,
        min_fidelity=float(fid_series.min()),
        max_discrepancy=float(disc.max()),
        linearity_class=mk.classification,
        tolerance_budget=budget)
