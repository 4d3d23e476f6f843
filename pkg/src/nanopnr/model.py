"""Core domain types: logical circuits, deposited layouts, placements and
routing solutions for printed nanomodular circuit assembly.

All geometry is in micrometres.  Transistor modules have three pins
(gate, source, drain); the gate sits at the component centre and
source/drain sit at +/- half the channel length along the component axis.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union

# Technology constants (micrometres).
PMOS_LENGTH = 0.150
NMOS_LENGTH = 0.130
WIRE_WIDTH = 0.100
MIN_SEPARATION = 2 * WIRE_WIDTH  # minimum spacing between uninsulated wires
FOOTPRINT_PAD = 0.050            # half wire width of clearance around a component body

# Nets at or above this pin count are "large" (power rails, clocks).
LARGE_NET_PINS = 32

GATE, SOURCE, DRAIN = 0, 1, 2


class Kind(Enum):
    """Transistor module type."""

    PMOS = "pmos"
    NMOS = "nmos"

    @property
    def length(self) -> float:
        return PMOS_LENGTH if self is Kind.PMOS else NMOS_LENGTH


class ModelError(ValueError):
    """A domain object violates one of its structural invariants."""


@dataclass(frozen=True)
class CompPin:
    """Reference to pin ``pin`` (0=gate, 1=source, 2=drain) of component ``comp``."""

    comp: int
    pin: int

    def __str__(self) -> str:
        return f"c{self.comp}.{self.pin}"


@dataclass(frozen=True)
class IoPin:
    """Reference to a named circuit-level I/O pin."""

    name: str

    def __str__(self) -> str:
        return f"io.{self.name}"


PinRef = Union[CompPin, IoPin]


@dataclass
class LogicalComponent:
    id: int
    kind: Kind
    module_tag: Optional[str] = None


@dataclass
class Net:
    id: int
    members: tuple[PinRef, ...]

    @property
    def is_large(self) -> bool:
        return len(self.members) >= LARGE_NET_PINS


@dataclass
class LogicalCircuit:
    """Transistor-level netlist: components, named I/O pins and nets.

    Every component pin and every I/O pin belongs to exactly one net.
    """

    name: str
    components: list[LogicalComponent]
    io_pins: list[str]
    nets: list[Net]

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def n_io(self) -> int:
        return len(self.io_pins)

    @property
    def n_nets(self) -> int:
        return len(self.nets)

    def count_kind(self, kind: Kind) -> int:
        return sum(1 for c in self.components if c.kind is kind)

    def validate(self) -> None:
        if not self.components:
            raise ModelError("circuit has no components")
        for i, comp in enumerate(self.components):
            if comp.id != i:
                raise ModelError(f"component ids must be dense, got {comp.id} at {i}")
            if not isinstance(comp.kind, Kind):
                raise ModelError(f"component {i} has unknown kind {comp.kind!r}")
        io_set = set(self.io_pins)
        if len(io_set) != len(self.io_pins):
            raise ModelError("duplicate I/O pin names")
        seen: dict[PinRef, int] = {}
        for j, net in enumerate(self.nets):
            if net.id != j:
                raise ModelError(f"net ids must be dense, got {net.id} at {j}")
            if len(net.members) < 2:
                raise ModelError(f"net {net.id} has fewer than 2 members")
            if len(set(net.members)) != len(net.members):
                raise ModelError(f"net {net.id} lists a member twice")
            for ref in net.members:
                if isinstance(ref, CompPin):
                    if not (0 <= ref.comp < len(self.components)):
                        raise ModelError(f"net {net.id} references unknown component {ref.comp}")
                    if ref.pin not in (0, 1, 2):
                        raise ModelError(f"net {net.id} references bad pin index {ref.pin}")
                elif isinstance(ref, IoPin):
                    if ref.name not in io_set:
                        raise ModelError(f"net {net.id} references unknown io pin {ref.name!r}")
                if ref in seen:
                    raise ModelError(f"pin {ref} appears in nets {seen[ref]} and {net.id}")
                seen[ref] = net.id
        for comp in self.components:
            for k in (0, 1, 2):
                if CompPin(comp.id, k) not in seen:
                    raise ModelError(f"pin c{comp.id}.{k} is not in any net")
        for name in self.io_pins:
            if IoPin(name) not in seen:
                raise ModelError(f"io pin {name!r} is not in any net")

    def net_of_pin(self) -> dict[PinRef, int]:
        return {ref: net.id for net in self.nets for ref in net.members}


@dataclass
class PhysicalComponent:
    """A deposited transistor module at ``center`` with orientation ``theta``."""

    id: int
    kind: Kind
    center: tuple[float, float]
    theta: float

    @property
    def length(self) -> float:
        return self.kind.length


def pin_positions(comp: PhysicalComponent) -> tuple[tuple[float, float], ...]:
    """Gate/source/drain positions of a deposited component, in µm.

    Local offsets are (0,0), (+L/2,0), (-L/2,0), rotated by the component's
    orientation and translated to its centre.
    """
    cx, cy = comp.center
    half = comp.length / 2.0
    ct, st = math.cos(comp.theta), math.sin(comp.theta)
    return (
        (cx, cy),
        (cx + half * ct, cy + half * st),
        (cx - half * ct, cy - half * st),
    )


def component_bbox(comp: PhysicalComponent, pad: float = FOOTPRINT_PAD) -> tuple[float, float, float, float]:
    """Axis-aligned footprint (x0, y0, x1, y1) of a component inflated by ``pad``."""
    pts = pin_positions(comp)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)


@dataclass
class PhysicalLayout:
    """Observed component layout on a W x H substrate.

    ``io_slots`` are wire attachment points on the substrate boundary;
    ``mean_pitch`` is the average inter-component distance of the deposition
    mesh (rho).
    """

    width: float
    height: float
    components: list[PhysicalComponent]
    io_slots: list[tuple[float, float]]
    mean_pitch: float

    @property
    def n_components(self) -> int:
        return len(self.components)

    def count_kind(self, kind: Kind) -> int:
        return sum(1 for c in self.components if c.kind is kind)

    def validate(self) -> None:
        eps = 1e-6
        for comp in self.components:
            for (px, py) in pin_positions(comp):
                if not (eps < px < self.width - eps and eps < py < self.height - eps):
                    raise ModelError(f"component {comp.id} pin ({px:.3f},{py:.3f}) outside substrate")
        for k, (sx, sy) in enumerate(self.io_slots):
            on_x = abs(sx) < eps or abs(sx - self.width) < eps
            on_y = abs(sy) < eps or abs(sy - self.height) < eps
            if not (on_x or on_y):
                raise ModelError(f"io slot {k} at ({sx:.3f},{sy:.3f}) not on boundary")
        boxes = sorted((component_bbox(c), c.id) for c in self.components)
        for i in range(len(boxes)):
            (ax0, ay0, ax1, ay1), aid = boxes[i]
            for j in range(i + 1, len(boxes)):
                (bx0, by0, bx1, by1), bid = boxes[j]
                if bx0 >= ax1:
                    break
                if ax0 < bx1 and ay0 < by1 and by0 < ay1:
                    raise ModelError(f"components {aid} and {bid} overlap")


@dataclass
class Placement:
    """Injective, type-matched assignment of logical entities to deposited ones.

    ``comp_map`` sends logical component ids to physical component ids and
    ``io_map`` sends I/O pin names to boundary slot indices.
    """

    comp_map: dict[int, int] = field(default_factory=dict)
    io_map: dict[str, int] = field(default_factory=dict)

    def validate(self, circuit: LogicalCircuit, layout: PhysicalLayout, total: bool = True) -> None:
        used = set()
        for lid, pid in self.comp_map.items():
            if pid in used:
                raise ModelError(f"physical component {pid} mapped twice")
            used.add(pid)
            if circuit.components[lid].kind is not layout.components[pid].kind:
                raise ModelError(f"type mismatch mapping c{lid} -> p{pid}")
        used_slots = set(self.io_map.values())
        if len(used_slots) != len(self.io_map):
            raise ModelError("io slot mapped twice")
        for name, k in self.io_map.items():
            if not (0 <= k < len(layout.io_slots)):
                raise ModelError(f"io pin {name!r} mapped to unknown slot {k}")
        if total:
            missing = [c.id for c in circuit.components if c.id not in self.comp_map]
            if missing:
                raise ModelError(f"placement not total: components {missing[:5]} unmapped")
            missing_io = [n for n in circuit.io_pins if n not in self.io_map]
            if missing_io:
                raise ModelError(f"placement not total: io pins {missing_io[:5]} unmapped")

    def pin_point(self, ref: PinRef, circuit: LogicalCircuit, layout: PhysicalLayout) -> tuple[float, float]:
        """Physical position of a mapped logical pin."""
        if isinstance(ref, CompPin):
            phys = layout.components[self.comp_map[ref.comp]]
            return pin_positions(phys)[ref.pin]
        return layout.io_slots[self.io_map[ref.name]]


@dataclass(frozen=True)
class Wire:
    """Straight printed wire segment between two points (µm)."""

    a: tuple[float, float]
    b: tuple[float, float]
    net: int

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])


@dataclass(frozen=True)
class Insulator:
    """Printed insulation point allowing two perpendicular wires to cross."""

    p: tuple[float, float]


RoutePrimitive = Union[Wire, Insulator]


@dataclass
class RoutingSolution:
    """Print-ordered sequence of wires and insulation points.

    ``per_net_trees`` maps each net to the set of its segments (canonical
    endpoint order); for grid-routed solutions these are unit grid edges.
    ``grid_g`` is the routing grid spacing (None for direct-connect output).
    """

    sequence: list[RoutePrimitive] = field(default_factory=list)
    per_net_trees: dict[int, set] = field(default_factory=dict)
    grid_g: Optional[float] = None
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def total_wire_length(self) -> float:
        return sum(p.length for p in self.sequence if isinstance(p, Wire))

    @property
    def insulator_count(self) -> int:
        return sum(1 for p in self.sequence if isinstance(p, Insulator))


def canonical_segment(a: tuple[float, float], b: tuple[float, float]) -> tuple:
    return (a, b) if a <= b else (b, a)


def artifact_hash(text: str) -> str:
    """Short content hash used to chain pipeline artifacts together."""
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def manhattan(a: tuple[float, float], b: tuple[float, float]) -> float:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def euclidean(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def mst_length(points: list[tuple[float, float]], metric=manhattan) -> float:
    """Minimum spanning tree length of a point set under ``metric`` (Prim)."""
    n = len(points)
    if n < 2:
        return 0.0
    in_tree = [False] * n
    dist = [math.inf] * n
    in_tree[0] = True
    for j in range(1, n):
        dist[j] = metric(points[0], points[j])
    total = 0.0
    for _ in range(n - 1):
        best, best_d = -1, math.inf
        for j in range(n):
            if not in_tree[j] and dist[j] < best_d:
                best, best_d = j, dist[j]
        total += best_d
        in_tree[best] = True
        for j in range(n):
            if not in_tree[j]:
                d = metric(points[best], points[j])
                if d < dist[j]:
                    dist[j] = d
    return total
