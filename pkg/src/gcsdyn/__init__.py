# coding: utf-8
"""gcsdyn: coherent-state families from matrix Lie group representations,
their measurement theory, exact and stable quantum evolution, and the
reduced classical dynamics on coset charts."""

from .lie_core import (
    AlgebraSpec,
    GroupPoint,
    Representation,
    TruncationOverflow,
    ValidationReport,
    build_bilinear_upq,
    build_heisenberg_weyl,
    build_oscillator_algebra,
    build_su2,
    build_su11,
    build_su11_squeeze,
    check_structure,
    group_exp,
    rep_from_spec,
    rep_to_spec,
)
from .charts import (
    CosetChart,
    PolarRegion,
    Quadrature,
    angular_sectors,
    make_chart,
    make_disk_chart,
    make_plane_chart,
    make_sphere_chart,
)
from .gcs_family import (
    FiducialSpec,
    IdentityReport,
    Povm,
    StationarySubgroup,
    build_povm,
    covariance_check,
    fiducial_basis_state,
    fiducial_lowest_weight,
    find_stationary_subgroup,
    gcs_state,
    group_action,
    measurement_distribution,
    overlap,
    resolution_of_identity,
    translated_distribution_check,
)
from .evolution import (
    HamiltonianSpec,
    QuantumTrajectory,
    conjugation_identity_check,
    evolve,
    invariant_operator,
    linearity_classify,
    nearest_gcs,
    stability_test,
    superstability_check,
)
from .classical import (
    BirkhoffData,
    ClassicalTrajectory,
    DegenerateForm,
    DomainExit,
    action_from_quantum_path,
    action_value,
    birkhoff_data,
    birkhoff_grad_h,
    birkhoff_rhs,
    classical_hamiltonian,
    compare_quantum_classical,
    coset_rhs,
    coset_rhs_field,
    integrate_classical,
    kahler_bracket,
    kahler_metric,
    mixed_partial_consistency,
    omega_matrix,
    r_vector,
)

__version__ = "0.1.0"
