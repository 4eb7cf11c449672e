"""Energy-aware model selection for multi-model AI serving.

A per-slot energy budget tracker feeds a selector that filters a task's
candidate models by budget, keeps the accuracy/energy Pareto frontier and
picks the most accurate survivor. A deterministic simulator replays request
traces against a simulated GPU meter to compare this policy with
popularity- and name-driven baselines.
"""

from .errors import (
    BudgetStarvation,
    ConfigError,
    GuideError,
    MonotonicityError,
    PreconditionError,
    RegistryParseError,
    RegistryValidationError,
    SchedulingError,
    UnknownTask,
    WorkloadMismatch,
)
from .meter import PowerTrace, RealMeter, ScheduledExecution, SimMeter, SimMeterConfig
from .registry import (
    ModelProfile,
    ModelRegistry,
    default_registry,
    filter_by_task,
    load_registry,
    load_registry_path,
    pareto_frontier,
)
from .selector import FixedBudget, ModelSelector, SelectionDecision, SelectorConfig, select
from .tracker import (
    BudgetEstimate,
    EnergyBudgetTracker,
    EnergySample,
    TrackerConfig,
    TrackerState,
    ingest_sample,
    initial_state,
    slot_energy_log,
    usable_budget,
)

__version__ = "0.1.0"
