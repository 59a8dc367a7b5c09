"""Numerical toolkit for maximal monotone boundary conditions of 1D
port-Hamiltonian systems.

The package is organised around five layers:

* :mod:`monoport.spaces` — finite-dimensional complex inner-product spaces
  with Hermitian positive-definite weights, projections and adjoints.
* :mod:`monoport.relations` — a calculus of (possibly multivalued, possibly
  nonlinear) monotone relations: algebra, resolvents, Yosida regularisation,
  and monotonicity/maximality certificates.
* :mod:`monoport.phs` — the port-Hamiltonian structure on a symmetric
  interval: eigen-data of the principal matrix, even/odd splitting, the
  finite-dimensional boundary-data spaces with their cosh/sinh bases, and
  boundary flow/effort.
* :mod:`monoport.boundary` — certified boundary-condition constructors
  (contraction-matrix, Dirichlet/Neumann/Robin, multiport friction),
  skew-selfadjointness tests, constraint extraction and membership tests.
* :mod:`monoport.solver` — summation-by-parts discretisation, the
  constructive resolvent of the implicitly stepped system, and θ-scheme
  time integration with exact discrete energy bookkeeping.

:mod:`monoport.cli` exposes the ``monoport`` command with the
``check-bc``, ``simulate``, ``verify`` and ``convergence`` subcommands.
"""

from monoport.spaces import InnerProductSpace, LinearMap, adjoint, inner, project
from monoport.relations import (
    Certificate,
    LinearGraph,
    MonotoneMap,
    NonconvergenceError,
    Relation,
    SeparableProx,
    adjoint_relation,
    check_maximal,
    check_monotone,
    direct_sum,
    graph_residual,
    inverse,
    post_set,
    principal_section,
    resolvent,
    resolvent_value,
    sample_graph_points,
    scale_add,
    solve_inclusion,
    transform,
    yosida,
)
from monoport.phs import (
    BoundaryDataBasis,
    PortHamiltonian,
    bd_basis,
    ddot_matrix,
    eigendecompose,
    even_odd_split,
    flow_effort,
    flow_effort_via_bd,
    gdot_matrix,
    project_bd,
)
from monoport.boundary import (
    BoundaryCondition,
    check_skew_selfadjoint,
    dirichlet,
    extract_h,
    from_V,
    membership,
    multiport,
    neumann,
    robin,
    robin_bad,
)
from monoport.config import Config, ConfigError, emit_config, load_config, parse_config
from monoport.solver import (
    DiscreteOperators,
    Grid,
    Scenario,
    Trajectory,
    discretize,
    oracle_transport,
    resolve_A,
    simulate,
    step,
)

__all__ = [
    "InnerProductSpace",
    "LinearMap",
    "inner",
    "adjoint",
    "project",
    "Relation",
    "LinearGraph",
    "MonotoneMap",
    "SeparableProx",
    "Certificate",
    "resolvent",
    "resolvent_value",
    "yosida",
    "post_set",
    "inverse",
    "adjoint_relation",
    "scale_add",
    "graph_residual",
    "solve_inclusion",
    "sample_graph_points",
    "NonconvergenceError",
    "principal_section",
    "direct_sum",
    "transform",
    "check_monotone",
    "check_maximal",
    "PortHamiltonian",
    "BoundaryDataBasis",
    "eigendecompose",
    "even_odd_split",
    "bd_basis",
    "ddot_matrix",
    "gdot_matrix",
    "flow_effort",
    "flow_effort_via_bd",
    "project_bd",
    "BoundaryCondition",
    "from_V",
    "dirichlet",
    "neumann",
    "robin",
    "robin_bad",
    "multiport",
    "check_skew_selfadjoint",
    "extract_h",
    "membership",
    "Grid",
    "DiscreteOperators",
    "Scenario",
    "Trajectory",
    "discretize",
    "resolve_A",
    "step",
    "simulate",
    "oracle_transport",
    "Config",
    "ConfigError",
    "parse_config",
    "load_config",
    "emit_config",
]

__version__ = "0.1.0"
