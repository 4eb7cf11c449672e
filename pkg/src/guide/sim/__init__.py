from .harness import energy_closure_gap, run_simulation
from .policies import Policy, PolicyKind, baseline_choose, load_name_only_distribution, most_liked
from .report import (
    ComparisonRow,
    SimulationReport,
    TaskStats,
    compare_policies,
    format_comparison,
    format_report,
    violation_rate,
)
from .workload import (
    WorkloadRequest,
    format_workload,
    generate_workload,
    load_workload,
    parse_task_mix,
    parse_workload,
    workload_fingerprint,
)

__all__ = [
    "ComparisonRow",
    "Policy",
    "PolicyKind",
    "SimulationReport",
    "TaskStats",
    "WorkloadRequest",
    "baseline_choose",
    "compare_policies",
    "energy_closure_gap",
    "format_comparison",
    "format_report",
    "format_workload",
    "generate_workload",
    "load_name_only_distribution",
    "load_workload",
    "most_liked",
    "parse_task_mix",
    "parse_workload",
    "run_simulation",
    "violation_rate",
    "workload_fingerprint",
]
