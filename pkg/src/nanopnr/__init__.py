"""nanopnr: placement and routing for printed nanomodular electronics.

Pipeline: partition a transistor-level netlist, floorplan the blocks onto
the imaged substrate, assign logical components to deposited ones with
simulated annealing, then print-plan Manhattan wires with BFS/weighted-A*
maze routing and per-crossing insulation points.
"""

from .model import (
    CompPin,
    Insulator,
    IoPin,
    Kind,
    LogicalCircuit,
    LogicalComponent,
    Net,
    PhysicalComponent,
    PhysicalLayout,
    Placement,
    RoutingSolution,
    Wire,
    pin_positions,
)
from .deposition import generate_layout
from .gates import expand_gates, full_adder, parse_gate_netlist
from .partition import PartitionResult, cut_cost, fm_partition, semantic_prepartition
from .floorplan import Floorplan, check_feasible, estimate_interblock_wl, floorplan_sa
from .place import (
    SASchedule,
    VirtualPin,
    compute_virtual_pins,
    place_sa,
    placement_cost,
    propose_move,
)
from .route import build_grid, direct_connect, order_nets, route_circuit
from .metrics import MetricsReport, drc_check, measure, mst_lower_bound

__version__ = "0.1.0"
