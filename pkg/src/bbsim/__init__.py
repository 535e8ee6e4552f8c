"""Deterministic simulator for bandwidth-broker managed DiffServ domains.

The library models per-domain brokers that propagate availability
information between neighbors, admit periodic aggregated bandwidth
demands against per-link reservation ledgers, and converge to a constant
state that a centralized route oracle can verify exactly.
"""

from .admission import AggregateKey, FilterEntry, ReservationLedger, build_filter_table
from .demand import (
    DemandArchive,
    DemandSpec,
    TermClock,
    end_of_cycle,
    handle_rejection,
    mid_cycle,
    submit_ds,
)
from .engine import (
    BlackoutAction,
    DemandRule,
    FaultAction,
    JoinAction,
    RunResult,
    Scenario,
    assert_invariants,
    check_quiescence,
    oracle_best_routes,
    run,
)
from .messages import AggregatedDs, Ai, AiDatabaseTransfer, NewAi, RejectionNotice
from .propagation import (
    BrokerConfig,
    BrokerState,
    StoredAi,
    bootstrap,
    emit_refresh,
    expire_stale,
    handle_ai,
    handle_db_transfer,
    handle_new_ai,
    install_local_ais,
    route_next_hop,
)
from .qos import (
    AvailabilityInfo,
    IDENTITY_COST,
    TransitCost,
    compare_ai,
    compose,
    merge_costs,
)
from .topology import (
    Domain,
    Link,
    NetworkTopology,
    domain_transit_cost,
    intra_path,
    validate,
)
from .wire import (
    decode_message,
    encode_message,
    format_loss,
    parse_scenario,
    parse_topology,
)

__version__ = "0.1.0"
