"""Worker recruitment for spatial crowdsourcing over social IoT networks.

Pipeline: radius filter -> SFOR/SOR relation graphs -> Louvain communities
-> exact efficiency-maximizing assignment, plus an optimal-stopping
baseline and a Monte Carlo experiment harness.
"""

from .baseline import StopRule, select_stop_index, stochastic_select
from .community import (
    CommunityPartition,
    EmptyGraphError,
    TrustedSet,
    louvain,
    modularity,
    trusted_workers,
)
from .dataset import (
    ScenarioConfig,
    generate_scenario,
    load_scenario,
    save_scenario,
    watts_strogatz,
)
from .domain import (
    ConfigError,
    ContactEvent,
    Device,
    Location,
    ParseError,
    Scenario,
    Task,
    ValidationError,
    euclidean_distance,
)
from .harness import (
    ExperimentConfig,
    MetricsRow,
    run_comparison,
    run_radius_sweep,
    write_metrics_csv,
)
from .optimizer import (
    EfficiencyMatrix,
    InfeasibleTask,
    OwnerDistances,
    PlanViolation,
    RecruitmentPlan,
    build_efficiency,
    efficiency,
    ownership_trust,
    solve,
    travel_cost,
    validate_plan,
)
from .relations import RelationGraph, build_sfor, build_sor
from .spatial import CandidatePool, filter_by_radius

__version__ = "0.1.0"
