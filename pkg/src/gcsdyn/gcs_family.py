# coding: utf-8
"""Coherent-state families over coset charts: state generation, overlaps,
resolution of identity, covariant POVMs, and measurement distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import CosetChart, Quadrature
from .lie_core import (
    GroupPoint,
    Representation,
    TruncationOverflow,
    group_exp,
    group_exp_apply,
    tail_mass,
)

__all__ = [
    "FiducialSpec",
    "StationarySubgroup",
    "FamilyStates",
    "IdentityReport",
    "Povm",
    "CovarianceReport",
    "TranslationReport",
    "fiducial_basis_state",
    "fiducial_lowest_weight",
    "find_stationary_subgroup",
    "gcs_state",
    "overlap",
    "group_action",
    "family_states",
    "resolution_of_identity",
    "build_povm",
    "measurement_distribution",
    "covariance_check",
    "translated_distribution_check",
]

NORM_TOL = 1e-13
TAIL_TOL = 1e-10
MAX_NORM_CORRECTION = 1e-8
SVD_THRESHOLD = 1e-8


# ---------------------------------------------------------------------------
# Fiducials and the stationary subgroup
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiducialSpec:
    """Normalized reference vector from which the family is generated."""

    state: np.ndarray
    description: str = ""

    def __post_init__(self):
        v = np.asarray(self.state, dtype=complex)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"fiducial must be normalized, |norm - 1| = {abs(norm-1):.2e}")
        v.setflags(write=False)
        object.__setattr__(self, "state", v)


def fiducial_basis_state(rep: Representation, index: int = 0) -> FiducialSpec:
    v = np.zeros(rep.hilbert_dim, dtype=complex)
    v[index] = 1.0
    return FiducialSpec(v, description=f"basis[{index}]")


def fiducial_lowest_weight(rep: Representation) -> FiducialSpec:
    """Canonical fiducial of the chart constructions: the Fock vacuum for
    bosonic representations, |j, -j> for su2, |k, 0> for su11."""
    index = rep.hilbert_dim - 1 if rep.algebra.name == "su2" else 0
    v = np.zeros(rep.hilbert_dim, dtype=complex)
    v[index] = 1.0
    return FiducialSpec(v, description="lowest_weight")


@dataclass(frozen=True)
class StationarySubgroup:
    """Real span of parameter directions whose generators fix the fiducial
    up to a phase, with the infinitesimal phase per basis vector."""

    subalgebra_basis: np.ndarray    # (n_basis, r)
    phase_gradients: np.ndarray     # (n_basis,)
    residuals: np.ndarray           # (n_basis,)
    singular_values: np.ndarray     # full SVD spectrum, for diagnostics

    @property
    def dim(self) -> int:
        return self.subalgebra_basis.shape[0]


def find_stationary_subgroup(rep: Representation, fid: FiducialSpec,
                             tol: float = SVD_THRESHOLD) -> StationarySubgroup:
    """Stabilizer directions of the fiducial.

    Assembles the matrix of vectors (1 - |f><f|) T_a |f| and extracts its
    real null space by singular value decomposition: a real combination
    c_a T_a fixes |f> up to phase exactly when it lies in that null space.
    """
    f = fid.state
    r = rep.algebra.dim
    proj = np.eye(rep.hilbert_dim, dtype=complex) - np.outer(f, f.conj())
    cols = np.stack([proj @ (rep.generators[a] @ f) for a in range(r)], axis=1)
    stacked = np.vstack([cols.real, cols.imag])            # (2n, r) real
    _, s, vt = np.linalg.svd(stacked, full_matrices=True)
    s_full = np.zeros(r)
    s_full[: len(s)] = s
    keep = s_full < tol * max(1.0, s_full[0] if len(s_full) else 1.0)
    basis = vt[keep]
    grads, resids = [], []
    for c in basis:
        op_f = np.einsum("a,aij,j->i", c, rep.generators, f)
        lam = float(np.vdot(f, op_f).real)
        grads.append(lam)
        resids.append(float(np.linalg.norm(op_f - lam * f)))
    return StationarySubgroup(
        subalgebra_basis=basis.copy(),
        phase_gradients=np.array(grads),
        residuals=np.array(resids),
        singular_values=s_full,
    )


# ---------------------------------------------------------------------------
# States and overlaps
# ---------------------------------------------------------------------------

def gcs_state(rep: Representation, chart: CosetChart, fid: FiducialSpec,
              z: complex, tail_tol: float = TAIL_TOL,
              return_correction: bool = False):
    """Coherent state V_{s(z)} |fiducial>, renormalized.

    Raises TruncationOverflow when the tail-mass rule flags the point as
    unrepresentable at this truncation, or when the renormalization
    correction exceeds MAX_NORM_CORRECTION.
    """
    if not chart.domain_contains(z):
        raise ValueError(f"coordinate {z} outside the {chart.kind} chart domain")
    point = chart.cross_section(z)
    psi = group_exp_apply(rep, point, fid.state)
    if rep.truncated:
        m = tail_mass(psi, rep.reliable_mask)
        if m > tail_tol:
            raise TruncationOverflow(
                f"gcs_state at z = {z}: tail mass {m:.3e} exceeds {tail_tol:.1e}")
    norm = float(np.linalg.norm(psi))
    correction = abs(1.0 - norm)
    if correction > MAX_NORM_CORRECTION:
        raise TruncationOverflow(
            f"gcs_state at z = {z}: norm correction {correction:.3e} too large")
    psi = psi / norm
    if return_correction:
        return psi, correction
    return psi


def overlap(psi: np.ndarray, phi: np.ndarray) -> complex:
    """Inner product <psi|phi> (conjugation on the first argument)."""
    psi = np.asarray(psi)
    phi = np.asarray(phi)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    return complex(np.vdot(psi, phi))


def group_action(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                 g: GroupPoint, z: complex) -> tuple[complex, float]:
    """Action of a group element on a family state: V_g |z> = e^{i phase} |z'>.

    The coordinate part is the chart's closed-form action; the cocycle phase
    is extracted numerically as arg <z'| V_g |z> (no closed form attempted).
    """
    z_new = chart.coordinate_action(g, z)
    psi = gcs_state(rep, chart, fid, z)
    moved = group_exp(rep, g) @ psi
    target = gcs_state(rep, chart, fid, z_new)
    ov = complex(np.vdot(target, moved))
    if abs(ov) < 1.0 - 1e-6:
        raise ValueError(
            f"group action mismatch: |<z'|V|z>| = {abs(ov):.6f}; coordinate "
            "action and state action disagree (likely truncation)")
    return complex(z_new), float(np.angle(ov))


# ---------------------------------------------------------------------------
# Quadrature assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyStates:
    """States of the family at accepted quadrature nodes.

    ``weights`` are the full measure weights w_i * mu(z_i); summing
    ``weights[i] |states[i]><states[i]|`` approximates the invariant-measure
    integral over the chart.
    """

    nodes: np.ndarray            # (N,) complex accepted node coordinates
    weights: np.ndarray          # (N,) measure weights
    states: np.ndarray           # (N, n) complex
    coverage_loss: float         # measure weight of rejected nodes
    n_rejected: int
    quad_spec: dict


def family_states(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                  quad: Quadrature, tail_tol: float = TAIL_TOL) -> FamilyStates:
    """Evaluate the family on a polar quadrature grid.

    One matrix exponential is computed per radius; the angular sweep applies
    the diagonal rotation generator, which reproduces gcs_state exactly in
    the truncated representation (the rotation generator is exactly diagonal,
    so its conjugation action on the cross-section is exact matrix algebra).
    Radii whose states violate the tail-mass rule are rejected and accounted
    as coverage loss.
    """
    rot = chart.rotation_generator()
    if np.max(np.abs(rot - np.diag(np.diag(rot)))) > 1e-14:
        raise ValueError("rotation generator is not diagonal in this basis")
    dvals = np.diag(rot).real
    f = fid.state
    rot_f = rot @ f
    lam0 = float(np.vdot(f, rot_f).real)
    fast = bool(np.linalg.norm(rot_f - lam0 * f) < 1e-12)

    angles = quad.angles
    phase_grid = np.exp(1j * np.outer(angles, dvals - lam0)) if fast else None

    nodes_out, weights_out, states_out = [], [], []
    coverage_loss = 0.0
    n_rejected = 0
    for r, w_r in zip(quad.radii, quad.radial_weights):
        w_nodes = w_r * (2.0 * math.pi / quad.n_angles)
        try:
            psi_r = gcs_state(rep, chart, fid, complex(r), tail_tol=tail_tol)
        except TruncationOverflow:
            mu = chart.measure_density(complex(r))
            coverage_loss += w_nodes * mu * quad.n_angles
            n_rejected += quad.n_angles
            continue
        zs = r * np.exp(1j * angles)
        mus = np.array([chart.measure_density(z) for z in zs])
        if fast:
            block = phase_grid * psi_r[None, :]
        else:
            block = np.stack([gcs_state(rep, chart, fid, z, tail_tol=tail_tol)
                              for z in zs])
        nodes_out.append(zs)
        weights_out.append(w_nodes * mus)
        states_out.append(block)

    if nodes_out:
        nodes = np.concatenate(nodes_out)
        weights = np.concatenate(weights_out)
        states = np.concatenate(states_out, axis=0)
    else:
        nodes = np.zeros(0, complex)
        weights = np.zeros(0)
        states = np.zeros((0, rep.hilbert_dim), complex)
    return FamilyStates(nodes=nodes, weights=weights, states=states,
                        coverage_loss=float(coverage_loss),
                        n_rejected=n_rejected, quad_spec=dict(quad.spec))


def _accumulate(fam: FamilyStates, select: np.ndarray | None = None) -> np.ndarray:
    """Sum of w_i |psi_i><psi_i| over (selected) nodes, deterministic order."""
    s = fam.states if select is None else fam.states[select]
    w = fam.weights if select is None else fam.weights[select]
    return (s * w[:, None]).T @ s.conj()


def _compress_indices(rep: Representation, compress_dim: int | None) -> np.ndarray:
    if compress_dim is None:
        return np.flatnonzero(rep.reliable_mask)
    return np.arange(compress_dim)


# ---------------------------------------------------------------------------
# Resolution of identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    """Deviation of the quadrature-assembled identity from 1.

    ``deviation`` is the spectral norm of the compressed ``M_tot - 1``;
    ``diag_deficit[k]`` is ``1 - Re M_tot[k, k]`` per compressed basis state.
    ``quad_error_bound`` (deviation + coverage loss) is the bound quoted to
    downstream covariance and translation checks.
    """

    deviation: float
    per_element_max: float
    diag_deficit: np.ndarray
    compress_dim: int
    coverage_loss: float
    n_nodes: int
    n_rejected: int
    quad_spec: dict
    m_total: np.ndarray = field(repr=False, default=None)

    @property
    def quad_error_bound(self) -> float:
        return self.deviation + self.coverage_loss

    def to_jsonable(self) -> dict:
        return {
            "deviation": self.deviation,
            "per_element_max": self.per_element_max,
            "quad_error_bound": self.quad_error_bound,
            "coverage_loss": self.coverage_loss,
            "compress_dim": self.compress_dim,
            "n_nodes": self.n_nodes,
            "n_rejected": self.n_rejected,
            "quad_spec": self.quad_spec,
        }


def resolution_of_identity(rep: Representation, chart: CosetChart,
                           fid: FiducialSpec, quad: Quadrature,
                           compress_dim: int | None = None,
                           tail_tol: float = TAIL_TOL) -> IdentityReport:
    """Assemble sum_i w_i mu(z_i) |z_i><z_i| and compare with the identity on
    the requested block (reliable subspace by default)."""
    fam = family_states(rep, chart, fid, quad, tail_tol=tail_tol)
    m_tot = _accumulate(fam)
    idx = _compress_indices(rep, compress_dim)
    block = m_tot[np.ix_(idx, idx)]
    diff = block - np.eye(len(idx))
    return IdentityReport(
        deviation=float(np.linalg.norm(diff, ord=2)),
        per_element_max=float(np.max(np.abs(diff))),
        diag_deficit=1.0 - np.diag(block).real,
        compress_dim=len(idx),
        coverage_loss=fam.coverage_loss,
        n_nodes=len(fam.nodes),
        n_rejected=fam.n_rejected,
        quad_spec=fam.quad_spec,
        m_total=m_tot,
    )


# ---------------------------------------------------------------------------
# POVM construction and measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Povm:
    """Positive operator per chart region, assembled on a shared quadrature."""

    regions: tuple
    matrices: tuple              # Hermitian PSD cell operators
    m_total: np.ndarray
    coverage_loss: float
    quad_spec: dict
    identity_deviation: float    # on the reliable subspace, for error bounds

    @property
    def n_cells(self) -> int:
        return len(self.regions)

    @property
    def quad_error_bound(self) -> float:
        return self.identity_deviation + self.coverage_loss


def _assign_regions(nodes: np.ndarray, partition) -> np.ndarray:
    """Index of the containing region per node; -1 when uncovered."""
    out = np.full(len(nodes), -1, dtype=int)
    for i, z in enumerate(nodes):
        for k, region in enumerate(partition):
            if region.contains(z):
                out[i] = k
                break
    return out


def build_povm(rep: Representation, chart: CosetChart, fid: FiducialSpec,
               partition, quad: Quadrature, tail_tol: float = TAIL_TOL,
               require_cover: bool = True) -> Povm:
    """Integrate the family projector over each region of a partition.

    The partition must be pairwise disjoint; with ``require_cover`` it must
    also cover every accepted quadrature node.
    """
    partition = list(partition)
    for i in range(len(partition)):
        for j in range(i + 1, len(partition)):
            if partition[i].overlaps(partition[j]):
                raise ValueError(f"regions {i} and {j} overlap")
    fam = family_states(rep, chart, fid, quad, tail_tol=tail_tol)
    assign = _assign_regions(fam.nodes, partition)
    if require_cover and np.any(assign < 0):
        bad = fam.nodes[assign < 0][:3]
        raise ValueError(f"partition does not cover quadrature nodes near {bad}")
    mats = []
    for k in range(len(partition)):
        sel = assign == k
        if np.any(sel):
            mats.append(_accumulate(fam, sel))
        else:
            mats.append(np.zeros((rep.hilbert_dim, rep.hilbert_dim), complex))
    m_total = _accumulate(fam)
    idx = np.flatnonzero(rep.reliable_mask)
    dev = float(np.linalg.norm(m_total[np.ix_(idx, idx)] - np.eye(len(idx)), ord=2))
    return Povm(regions=tuple(partition), matrices=tuple(mats), m_total=m_total,
                coverage_loss=fam.coverage_loss, quad_spec=fam.quad_spec,
                identity_deviation=dev)


def _as_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return np.outer(rho, rho.conj())
    return rho


def measurement_distribution(rho: np.ndarray, povm: Povm,
                             validate: bool = True) -> np.ndarray:
    """Outcome probabilities p_cell = tr(rho M(cell))."""
    rho = _as_density(rho)
    if validate:
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        evals = np.linalg.eigvalsh(rho)
        if evals.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.2e}")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
    return np.array([float(np.trace(rho @ m).real) for m in povm.matrices])


# ---------------------------------------------------------------------------
# Covariance of the measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    """Per-cell deviation of V_g† M(cell) V_g from M(g^{-1} cell)."""

    per_cell: np.ndarray
    deviation: float
    quad_error_bound: float
    coverage_loss: float
    rotation_angle: float

    def to_jsonable(self) -> dict:
        return {
            "deviation": self.deviation,
            "per_cell": self.per_cell.tolist(),
            "quad_error_bound": self.quad_error_bound,
            "coverage_loss": self.coverage_loss,
            "rotation_angle": self.rotation_angle,
        }


def covariance_check(rep: Representation, chart: CosetChart, fid: FiducialSpec,
                     g: GroupPoint, partition, quad: Quadrature,
                     compress_dim: int | None = None,
                     tail_tol: float = TAIL_TOL) -> CovarianceReport:
    """Check measurement covariance for a rotation-compatible group element.

    The transformed regions g^{-1} cell are computed in closed form (the
    supported partition transforms are rotations of polar rectangles); the
    two sides are assembled from the same quadrature nodes.  Deviations and
    the error bound are measured on the compressed block, so the bound is
    meaningful on the part of the space the quadrature actually resolves.
    """
    theta = chart.rotation_angle(g)
    if theta is None:
        raise ValueError("group element does not act as a rotation on this "
                         "partition; only rotation-compatible checks are supported")
    partition = list(partition)
    fam = family_states(rep, chart, fid, quad, tail_tol=tail_tol)
    assign = _assign_regions(fam.nodes, partition)
    if np.any(assign < 0):
        raise ValueError("partition does not cover the quadrature nodes")
    v = group_exp(rep, g)
    idx = _compress_indices(rep, compress_dim)
    m_total = _accumulate(fam)
    base_dev = float(np.linalg.norm(m_total[np.ix_(idx, idx)] - np.eye(len(idx)), ord=2))

    per_cell = []
    for k, region in enumerate(partition):
        m_cell = _accumulate(fam, assign == k)
        lhs = v.conj().T @ m_cell @ v
        pulled = region.rotated(-theta)
        sel = np.array([pulled.contains(z) for z in fam.nodes])
        rhs = _accumulate(fam, sel)
        per_cell.append(float(np.linalg.norm((lhs - rhs)[np.ix_(idx, idx)], ord=2)))
    per_cell = np.array(per_cell)
    return CovarianceReport(per_cell=per_cell,
                            deviation=float(per_cell.max(initial=0.0)),
                            quad_error_bound=base_dev + fam.coverage_loss,
                            coverage_loss=fam.coverage_loss,
                            rotation_angle=float(theta))


# ---------------------------------------------------------------------------
# Translated probability distributions along stable evolutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranslationReport:
    """Evolved-state measurement vs group-translated-cell measurement."""

    p_evolved: np.ndarray
    p_translated: np.ndarray
    max_difference: float
    error_budget: float
    budget_parts: dict
    linearity_class: str
    affine_scale: float          # |A| of the recovered map; 1 for rotations

    def to_jsonable(self) -> dict:
        return {
            "p_evolved": self.p_evolved.tolist(),
            "p_translated": self.p_translated.tolist(),
            "max_difference": self.max_difference,
            "error_budget": self.error_budget,
            "budget_parts": self.budget_parts,
            "linearity_class": self.linearity_class,
            "affine_scale": self.affine_scale,
        }


def translated_distribution_check(rep: Representation, chart: CosetChart,
                                  fid: FiducialSpec, psi0: np.ndarray,
                                  hamiltonian, partition, quad: Quadrature,
                                  t_final: float, dt: float = 1e-3,
                                  tail_tol: float = TAIL_TOL) -> TranslationReport:
    """Compare the measurement distribution of the evolved state against the
    distribution of the initial state over group-translated cells.

    The group motion g(t) is recovered from classical coset trajectories (an
    affine map on the plane chart: offset from the trajectory launched at 0,
    rotation factor from the trajectory launched at 1).  For Hamiltonians
    outside the linear-in-generators class the relation fails and the report
    carries the violation.
    """
    from . import classical, evolution   # deferred: avoids an import cycle

    if chart.kind != "plane":
        raise ValueError("translated-distribution check is implemented on the plane chart")
    partition = list(partition)

    ham = hamiltonian
    mk = evolution.linearity_classify(rep, ham, np.linspace(0.0, t_final, 7))
    t_grid = np.array([0.0, t_final])
    traj = evolution.evolve(rep, ham, np.asarray(psi0, complex), t_grid, dt)
    psi_t = traj.states[-1]

    rhs = classical.coset_rhs_field(rep, chart, fid, ham)
    cdt = 10 * dt     # fourth-order steps hold more accuracy than the quantum ones
    z0_traj = classical.integrate_classical(rhs, 0.0 + 0.0j, t_grid, cdt,
                                            domain=chart.domain_contains)
    z1_traj = classical.integrate_classical(rhs, 1.0 + 0.0j, t_grid, cdt,
                                            domain=chart.domain_contains)
    b = complex(z0_traj.points[-1])
    a = complex(z1_traj.points[-1]) - b

    fam = family_states(rep, chart, fid, quad, tail_tol=tail_tol)
    assign = _assign_regions(fam.nodes, partition)
    if np.any(assign < 0):
        raise ValueError("partition does not cover the quadrature nodes")

    # evolved-state probabilities per cell
    amps = fam.states.conj() @ psi_t
    dens = fam.weights * np.abs(amps) ** 2
    p_evolved = np.array([float(dens[assign == k].sum()) for k in range(len(partition))])

    # translated cells: node contributes to the cell containing g(t) z
    moved = a * fam.nodes + b
    amps0 = fam.states.conj() @ np.asarray(psi0, complex)
    dens0 = fam.weights * np.abs(amps0) ** 2
    assign_moved = _assign_regions(moved, partition)
    p_translated = np.array([float(dens0[assign_moved == k].sum())
                             for k in range(len(partition))])

    # assignment-ambiguity bound: initial-state mass on nodes whose image
    # lands within half an angular spacing of a sector boundary
    n_ang = quad.n_angles
    half_spacing = math.pi / n_ang
    boundaries = sorted({reg.theta_lo for reg in partition})
    shell = 0.0
    if boundaries:
        angs = np.angle(moved) % (2.0 * math.pi)
        dist = np.min(np.abs(((angs[:, None] - np.array(boundaries)[None, :])
                              + math.pi) % (2.0 * math.pi) - math.pi), axis=1)
        shell = float(dens0[dist < half_spacing * 0.999].sum())

    # probability deficit of the frames actually measured: how much of each
    # state's unit probability the assembled family resolves
    deficit = max(abs(float(dens.sum()) - 1.0), abs(float(dens0.sum()) - 1.0))
    h_scale = float(np.linalg.norm(rep.compress(ham.matrix(t_final / 2.0, rep)), ord=2))
    stepper = 10.0 * dt ** 2 * t_final * max(1.0, h_scale)
    budget_parts = {
        "state_coverage_deficit": deficit,
        "boundary_shell": shell,
        "stepper": stepper,
    }
    return TranslationReport(
        p_evolved=p_evolved,
        p_translated=p_translated,
        max_difference=float(np.max(np.abs(p_evolved - p_translated))),
        error_budget=float(sum(budget_parts.values())),
        budget_parts=budget_parts,
        linearity_class=mk.classification,
        affine_scale=float(abs(a)),
    )
