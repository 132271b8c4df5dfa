"""Energy-safe persistent surveillance planning for UAV teams recharged by
mobile ground stations.

The planner covers a gridded survey area with equal rectangular blocks,
routes one patrol lap per UAV inside each block, and threads the blocks
onto a cyclic team route whose timing guarantees every battery is full at
each release. The simulator independently verifies energy safety and the
steady-state revisit-age bound of the resulting trajectories.
"""

from .geometry import FleetParams, GridSpec, Node, build_grid, enumerate_nodes
from .partitioning import PartitionRect, PartitionSet, partition, unique_coverage_witness
from .schedule import (
    SupercyclePlan,
    SweepResult,
    SweepRow,
    build_plan,
    check_feasible,
    cover_energy,
    leg_time,
    optimize_partition_size,
    supercycle_period,
)
from .simulator import (
    AgeReport,
    SimConfig,
    SimResult,
    max_age,
    monitor_constraints,
    run_simulation,
    step,
    track_age,
)
from .subpartition import SubpartitionAssignment, allocate, quadrant_sort, slice_sizes
from .tour import EXACT_LIMIT_DEFAULT, Tour, solve, solve_exact, solve_heuristic, tour_length
from .trajectory import (
    Deployment,
    Segment,
    VelocityProfile,
    deploy,
    export_profiles_csv,
    import_profiles_csv,
    uav_profile,
    ugv_profile,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "AgeReport",
    "Deployment",
    "EXACT_LIMIT_DEFAULT",
    "FleetParams",
    "GridSpec",
    "Node",
    "PartitionRect",
    "PartitionSet",
    "Segment",
    "SimConfig",
    "SimResult",
    "SubpartitionAssignment",
    "SupercyclePlan",
    "SweepResult",
    "SweepRow",
    "Tour",
    "VelocityProfile",
    "allocate",
    "build_grid",
    "build_plan",
    "check_feasible",
    "cover_energy",
    "deploy",
    "enumerate_nodes",
    "export_profiles_csv",
    "import_profiles_csv",
    "leg_time",
    "max_age",
    "monitor_constraints",
    "optimize_partition_size",
    "partition",
    "quadrant_sort",
    "run_simulation",
    "slice_sizes",
    "solve",
    "solve_exact",
    "solve_heuristic",
    "step",
    "supercycle_period",
    "tour_length",
    "track_age",
    "uav_profile",
    "ugv_profile",
    "unique_coverage_witness",
    "validate_profile",
    "__version__",
]
