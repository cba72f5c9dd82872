"""hesskit: analytic Hessians of multi-agent coordination potentials.

Edge-tension distance potentials and signed-area triangle terms on an
undirected interaction graph, with a finite-difference oracle, RK4
gradient-flow integration and inertia-based equilibrium classification.
"""

from hesskit.dynamics import (
    EquilibriumReport,
    Trajectory,
    classify,
    classify_at,
    find_and_classify,
    integrate,
)
from hesskit.fd import FDParams, fd_gradient, fd_hessian, verify
from hesskit.graph import Graph, GraphError, build_graph, incidence_matrix, laplacian, neighbors
from hesskit.hessian import (
    assemble_weight_matrices,
    gradient,
    hessian_area,
    hessian_block,
    hessian_edge_general,
    hessian_total,
    hessian_z4_direct,
)
from hesskit.kinematics import (
    J,
    Configuration,
    edge_block_matrix,
    relative_positions,
    rigidity_matrix,
    signed_area,
)
from hesskit.potentials import (
    AreaTerm,
    CollisionZ4,
    ConnectednessPreserving,
    DomainError,
    Manipulability,
    PotentialSpec,
    QuadraticDistanceError,
    QuarticDistanceSquared,
    edge_family_eval,
    total_potential,
    uniform_spec,
)

__version__ = "0.1.0"
