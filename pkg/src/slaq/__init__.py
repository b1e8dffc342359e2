"""slaq: QoS-differentiated SLA pricing for a cloud service.

Builds revenue-optimal menus of (delay, price) SLAs over a finite
market of delay-cost types, provisions them on split-module,
priority-shared or hybrid server architectures, bounds the achievable
revenue gain over pure on-demand pricing, and validates the queueing
formulas by discrete-event simulation.
"""

from .errors import (
    InstabilityError,
    InvalidParameterError,
    NoFeasibleCandidateError,
    ScenarioError,
    SegmentationError,
    SlaqError,
)
from .model import (
    CustomerType,
    TypePopulation,
    WtpModel,
    grid_population,
    wtp,
    zero_value_delay,
)
from .queueing import (
    ServiceDist,
    fcfs_delay,
    hybrid_delays,
    od_max_load,
    priority_delays,
    required_servers_fractional,
    residual_term,
    second_moment,
    sweep_branch_means,
)
from .mechanism import (
    DsicReport,
    Segmentation,
    SlaMenu,
    arrival_rates,
    assign_sla,
    optimal_prices,
    revenue,
    segment,
    surplus,
    verify_dsic,
)
from .optimizer import (
    ArchitectureConfig,
    Infeasible,
    OptResult,
    SweepRow,
    cut_phi0,
    evaluate_hybrid,
    evaluate_pbs,
    evaluate_sms,
    od_revenue,
    optimize_hybrid,
    optimize_pbs,
    optimize_sms,
    pbs_upper_bound,
    sms_lower_bound,
    sms_lower_bound_beta3,
    sweep_load,
)
from .simulator import (
    SimConfig,
    SimReport,
    predicted_delays,
    simulate,
    validate_formulas,
)
from .scenario import Scenario, load as load_scenario, preset

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
