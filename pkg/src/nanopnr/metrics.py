"""Solution validation (design-rule checking) and manufacturing metrics.

Print time is total wire length over nozzle speed; insulators ride a trailing
nozzle and cost no extra time, but their count is always reported.  The
runtime ledger splits into a partition+floorplan part (amortizable across
instances of one circuit) and a per-instance place+route part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    CompPin,
    Insulator,
    IoPin,
    LogicalCircuit,
    PhysicalLayout,
    Placement,
    RoutingSolution,
    Wire,
    component_bbox,
)
from .route import mst_lower_bound  # re-exported reporting baseline

__all__ = ["MetricsReport", "measure", "drc_check", "DrcReport", "mst_lower_bound"]


@dataclass
class MetricsReport:
    psi: float                    # total wire length, µm
    psi_r: float                  # psi / rho
    omega: int                    # insulation point count
    rt_partition_s: float         # partitioning + floorplanning wall time
    rt_per_instance_s: float      # placement + routing wall time
    pt_s: float                   # print time psi / alpha
    et_s: float                   # end-to-end time rt_total + pt
    failed_nets: int
    extras: dict = field(default_factory=dict)

    @property
    def rt_total_s(self) -> float:
        return self.rt_partition_s + self.rt_per_instance_s

    def as_dict(self) -> dict:
        out = {
            "psi": self.psi,
            "psi_r": self.psi_r,
            "omega": self.omega,
            "rt_partition_s": self.rt_partition_s,
            "rt_per_instance_s": self.rt_per_instance_s,
            "pt_s": self.pt_s,
            "et_s": self.et_s,
            "failed_nets": self.failed_nets,
        }
        out.update(self.extras)
        return out

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())


def measure(
    solution: RoutingSolution,
    layout: PhysicalLayout,
    alpha: float = 10000.0,
    rt_ledger: Optional[dict] = None,
) -> MetricsReport:
    """Wire-length/insulator accounting plus the time model.

    ``alpha`` is the wire printing speed in µm/s (10000 = 1 cm/s).  The
    ledger may carry ``partition_s``/``floorplan_s``/``place_s``/``route_s``
    entries; anything else lands in the extras.
    """
    rt_ledger = dict(rt_ledger or {})
    psi = solution.total_wire_length
    omega = solution.insulator_count
    rt_partition = rt_ledger.pop("partition_s", 0.0) + rt_ledger.pop("floorplan_s", 0.0)
    rt_instance = rt_ledger.pop("place_s", 0.0) + rt_ledger.pop("route_s", 0.0)
    pt = psi / alpha
    return MetricsReport(
        psi=psi,
        psi_r=psi / layout.mean_pitch,
        omega=omega,
        rt_partition_s=rt_partition,
        rt_per_instance_s=rt_instance,
        pt_s=pt,
        et_s=rt_partition + rt_instance + pt,
        failed_nets=len(solution.failures),
        extras=rt_ledger,
    )


@dataclass
class DrcReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for k, _ in self.violations if k == kind)

    def add(self, kind: str, detail: str) -> None:
        self.violations.append((kind, detail))


def drc_check(
    solution: RoutingSolution,
    circuit: LogicalCircuit,
    placement: Placement,
    layout: PhysicalLayout,
    g: float,
    route_over_unused: bool = False,
) -> DrcReport:
    """Independent re-check of a grid-routed solution.

    Verifies grid alignment, per-net connectivity (pins plus wires form one
    tree), edge exclusivity, crossing insulation and its print order, and
    that no wire enters a component bounding box.  Violations are returned as
    data, never raised.
    """
    report = DrcReport()
    failed = {net for net, _ in solution.failures}

    def vtx(p):
        ix, iy = p[0] / g, p[1] / g
        return (int(round(ix)), int(round(iy)))

    # pass 1: alignment, unit-edge expansion, sequence indexing
    edge_owner: dict[tuple, int] = {}
    vertex_nets: dict[tuple[int, int], dict[int, int]] = {}
    insulators: dict[tuple[int, int], list[int]] = {}
    net_edges: dict[int, list[tuple]] = {}
    for idx, prim in enumerate(solution.sequence):
        if isinstance(prim, Insulator):
            v = vtx(prim.p)
            if abs(prim.p[0] - v[0] * g) > 1e-6 or abs(prim.p[1] - v[1] * g) > 1e-6:
                report.add("off-grid", f"insulator at {prim.p}")
            insulators.setdefault(v, []).append(idx)
            continue
        a, b = vtx(prim.a), vtx(prim.b)
        if abs(prim.a[0] - a[0] * g) > 1e-6 or abs(prim.a[1] - a[1] * g) > 1e-6 or \
           abs(prim.b[0] - b[0] * g) > 1e-6 or abs(prim.b[1] - b[1] * g) > 1e-6:
            report.add("off-grid", f"wire endpoint {prim.a}-{prim.b}")
            continue
        if a[0] != b[0] and a[1] != b[1]:
            report.add("not-axis-aligned", f"wire {prim.a}-{prim.b}")
            continue
        steps = _unit_steps(a, b)
        for e in steps:
            if e in edge_owner and edge_owner[e] != prim.net:
                report.add("edge-conflict", f"edge {e} used by nets {edge_owner[e]} and {prim.net}")
            edge_owner[e] = prim.net
            net_edges.setdefault(prim.net, []).append(e)
        for v in _unit_vertices(a, b):
            slots = vertex_nets.setdefault(v, {})
            if prim.net not in slots:
                slots[prim.net] = idx

    # pass 2: crossings must be insulated, straight, perpendicular, in order
    for v, nets in vertex_nets.items():
        if len(nets) == 1:
            continue
        if len(nets) > 2:
            report.add("vertex-conflict", f"{len(nets)} nets at {v}")
            continue
        (net_a, idx_a), (net_b, idx_b) = sorted(nets.items(), key=lambda kv: kv[1])
        ins = insulators.get(v, [])
        if not ins:
            report.add("missing-insulator", f"nets {net_a},{net_b} cross at {v}")
            continue
        if len(ins) > 1:
            report.add("stray-insulator", f"{len(ins)} insulators at {v}")
        if not (idx_a < ins[0] < idx_b):
            report.add(
                "insulator-order",
                f"insulator at {v} printed at {ins[0]}, nets wired at {idx_a} and {idx_b}",
            )
        axes = []
        for net in (net_a, net_b):
            dirs, n_inc = _incident_axes_at(v, net, edge_owner)
            if len(dirs) != 1 or n_inc != 2:
                report.add("crossing-bend", f"net {net} does not run straight through {v}")
            axes.append(dirs)
        if axes[0] == axes[1]:
            report.add("crossing-parallel", f"nets {net_a},{net_b} share axis at {v}")
    for v, ins in insulators.items():
        if len(vertex_nets.get(v, {})) < 2:
            report.add("stray-insulator", f"insulator at {v} without a crossing")

    # pass 3: connectivity per net over unit edges + pin vertices
    pin_vertex_of: dict[int, list] = {}
    net_of = circuit.net_of_pin()
    for comp in circuit.components:
        if comp.id in placement.comp_map:
            for k in (0, 1, 2):
                ref = CompPin(comp.id, k)
                p = placement.pin_point(ref, circuit, layout)
                pin_vertex_of.setdefault(net_of[ref], []).append(p)
    for name in circuit.io_pins:
        if name in placement.io_map:
            ref = IoPin(name)
            p = placement.pin_point(ref, circuit, layout)
            pin_vertex_of.setdefault(net_of[ref], []).append(p)

    for net in circuit.nets:
        if net.id in failed:
            continue
        pins = pin_vertex_of.get(net.id, [])
        if len(pins) < 2:
            continue
        edges = net_edges.get(net.id, [])
        parent: dict = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for (a, b) in edges:
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            union(a, b)
        wired = set(parent)
        wire_roots = {find(v) for v in wired}
        if len(wire_roots) > 1:
            report.add("disconnected-net", f"net {net.id} wires form {len(wire_roots)} pieces")
            continue
        for p in pins:
            nearest = _nearest_vertex_in(wired, p, g)
            if nearest is None:
                report.add("disconnected-net", f"net {net.id} pin near {p} not on any wire")
                break

    # pass 4: wires must avoid component boxes (check every unit edge a box
    # removes against the used-edge map; boxes are tiny so this stays linear)
    mapped = set(placement.comp_map.values())
    for pc in layout.components:
        if route_over_unused and pc.id not in mapped:
            continue
        x0, y0, x1, y1 = component_bbox(pc)
        bx0, by0, bx1, by1 = x0 - g / 2, y0 - g / 2, x1 + g / 2, y1 + g / 2
        iy_lo = math.floor(by0 / g + 1e-9) + 1
        iy_hi = math.ceil(by1 / g - 1e-9) - 1
        ex_lo = math.floor(bx0 / g + 1e-9)
        ex_hi = math.ceil(bx1 / g - 1e-9) - 1
        for iy in range(iy_lo, iy_hi + 1):
            for ix in range(ex_lo, ex_hi + 1):
                e = ((ix, iy), (ix + 1, iy))
                if e in edge_owner:
                    report.add(
                        "wire-in-component",
                        f"net {edge_owner[e]} wire edge {e} inside component {pc.id} box",
                    )
        ix_lo = math.floor(bx0 / g + 1e-9) + 1
        ix_hi = math.ceil(bx1 / g - 1e-9) - 1
        ey_lo = math.floor(by0 / g + 1e-9)
        ey_hi = math.ceil(by1 / g - 1e-9) - 1
        for ix in range(ix_lo, ix_hi + 1):
            for iy in range(ey_lo, ey_hi + 1):
                e = ((ix, iy), (ix, iy + 1))
                if e in edge_owner:
                    report.add(
                        "wire-in-component",
                        f"net {edge_owner[e]} wire edge {e} inside component {pc.id} box",
                    )
    return report


def _unit_steps(a, b):
    out = []
    if a[0] == b[0]:
        lo, hi = sorted((a[1], b[1]))
        for y in range(lo, hi):
            out.append(((a[0], y), (a[0], y + 1)))
    else:
        lo, hi = sorted((a[0], b[0]))
        for x in range(lo, hi):
            out.append(((x, a[1]), (x + 1, a[1])))
    return out


def _unit_vertices(a, b):
    if a[0] == b[0]:
        lo, hi = sorted((a[1], b[1]))
        return [(a[0], y) for y in range(lo, hi + 1)]
    lo, hi = sorted((a[0], b[0]))
    return [(x, a[1]) for x in range(lo, hi + 1)]


def _incident_axes_at(v, net, edge_owner):
    """Axes and count of this net's unit edges incident to vertex v."""
    x, y = v
    axes = set()
    count = 0
    for e, axis in (
        (((x, y), (x + 1, y)), "h"),
        (((x - 1, y), (x, y)), "h"),
        (((x, y), (x, y + 1)), "v"),
        (((x, y - 1), (x, y)), "v"),
    ):
        if edge_owner.get(e) == net:
            axes.add(axis)
            count += 1
    return axes, count


def _nearest_vertex_in(wired: set, p: tuple[float, float], g: float):
    """Pin positions are off-grid; find the wire vertex its stub attaches to
    (within the 2g snapping radius)."""
    base = (int(round(p[0] / g)), int(round(p[1] / g)))
    best = None
    best_d = math.inf
    for dx in range(-3, 4):
        for dy in range(-3, 4):
            v = (base[0] + dx, base[1] + dy)
            if v in wired:
                d = math.hypot(v[0] * g - p[0], v[1] * g - p[1])
                if d <= 2 * g + 1e-9 and d < best_d:
                    best, best_d = v, d
    return best
