"""Resource-aware adaptive query routing.

Scores query complexity, tracks system load, selects among symbolic, neural
and hybrid execution paths, adapts its thresholds online, fuses multi-path
answers, and ships calibrated synthetic executors plus a statistics pipeline
so routing behavior is reproducible at desk scale.
"""

from .complexity import (
    ComplexityBreakdown,
    ComplexityWeights,
    FixedSalience,
    LexicalSalience,
    Query,
    build_query,
    compute_kappa,
    effective_complexity,
    structural_heuristic,
)
from .executors import (
    ControlConfig,
    ControlManager,
    ExecutionRecord,
    SyntheticExecutor,
    SyntheticModel,
    WorkloadReport,
    compare_reports,
    run_workload,
    synthetic_execute,
)
from .fusion import Answer, FusionCase, FusionOutcome, FusionPolicy, fallback, fuse
from .resources import (
    ResourceMonitor,
    ResourceState,
    SmoothedState,
    SyntheticLoadSource,
    TraceReplaySource,
    pressure,
    sampler_loop,
)
from .router import (
    PathDecision,
    PathStats,
    Router,
    RouterConfig,
    ThresholdSet,
    UtilityWeights,
    argmax_path,
    optimize_thresholds,
    path_utility,
    select_path,
)
from .rules import (
    ChunkScore,
    Rule,
    RuleRegistry,
    exemplar_registry,
    load_rules,
    match_rules,
    score_chunk,
    suggest_path,
)
from .types import (
    AnswerType,
    Dataset,
    PathHint,
    RoutePath,
    RouteReason,
    RoutingMode,
)
from .workload import WorkloadItem, generate_mixed_workload, load_workload_jsonl

__version__ = "0.1.0"
