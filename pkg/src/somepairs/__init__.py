"""Mapping schemas for some-pairs MapReduce problems."""

from .bounds import (
    BoundsReport,
    ExpansionResult,
    bounds_report,
    brute_force_expansion,
    expansion_experiment,
    hd1_phi_bound,
    reducer_lower_bound,
)
from .execsim import ExecutionTrace, PresenceSet, load_profile, run
from .graph import (
    ConnectionGraph,
    InputId,
    Side,
    gen_hd1,
    gen_hd1_up,
    gen_random,
    induced_edge_count,
    load_edge_list,
    save_edge_list,
)
from .planners import (
    PartitionStrategy,
    plan_a,
    plan_b,
    plan_c,
    plan_prefix,
    strategy_halve,
    strategy_weight_bit,
)
from .schema import (
    MappingSchema,
    Reducer,
    ReplicationReport,
    ValidationReport,
    is_complete,
    make_complete,
    replication_report,
    rp_identity_check,
    validate,
)

__version__ = "0.1.0"
