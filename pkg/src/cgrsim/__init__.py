"""cgrsim: contact graph routing and traffic-flow optimization for
scheduled delay-tolerant satellite networks.

The library covers contact-plan handling, contact-graph route search,
policy-driven forwarding, a deterministic store-carry-forward simulator,
and an integer-programming traffic-flow oracle that upper-bounds what any
distributed policy can achieve.
"""

from .contact_plan import (
    UNLIMITED,
    Contact,
    ContactPlan,
    DuplicateId,
    InvalidInterval,
    MalformedLine,
    NodeSpec,
    PlanError,
    StateArc,
    StateTimeline,
    discretize,
    generate_random_network,
    parse_contact_plan,
    serialize_contact_plan,
)
from .forwarding import (
    INFINITE_TTL,
    DegenerateScenario,
    Packet,
    Policy,
    PolicyKind,
    VolumeLedger,
    filter_routes,
    mo_metric,
    select_route,
)
from .routing import (
    ContactGraph,
    Route,
    RouteCache,
    UnknownNode,
    build_contact_graph,
    earliest_route,
    k_best_routes,
)
from .simengine import (
    ConfigError,
    Demand,
    EventLog,
    EventRecord,
    MetricsReport,
    NodeState,
    TrafficModel,
    compute_metrics,
    run_simulation,
)

__version__ = "0.1.0"
