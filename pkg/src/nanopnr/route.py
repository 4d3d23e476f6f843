"""Grid discretization and wire routing.

The substrate becomes a unit-weight grid graph (spacing ``g``); deposited
components are encased in bounding boxes whose interior edges are removed,
and every mapped pin snaps to a free vertex just outside its box, with its
incident edges held back until the pin's net routes.  Intra-block nets are
routed pin-by-pin in Prim order with BFS to the partial tree (a Steiner
topology); inter-block nets connect their per-block subtrees with weighted A*.
Crossing a perpendicular foreign wire is allowed straight-through only and
costs an insulation point at the shared vertex.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from ._kernels import FREE, REMOVED, TEMP, CROSSED
from .model import (
    CompPin,
    Insulator,
    IoPin,
    Kind,
    LogicalCircuit,
    MIN_SEPARATION,
    PhysicalLayout,
    Placement,
    RoutingSolution,
    Wire,
    WIRE_WIDTH,
    canonical_segment,
    component_bbox,
    euclidean,
    manhattan,
    mst_length,
    pin_positions,
)

FAIL_FRONTIER = "frontier-exhausted"
FAIL_PIN = "pin-unsnappable"


class GridError(RuntimeError):
    pass


def default_grid_spacing(rho: float) -> float:
    return max(MIN_SEPARATION, rho / 10.0)


@dataclass
class GridGraph:
    """Routing grid state.  Edge/vertex entries >= 0 name the owning net."""

    g: float
    nx: int
    ny: int
    eh: np.ndarray            # int32[ny, nx-1], edge (ix,iy)-(ix+1,iy)
    ev: np.ndarray            # int32[ny-1, nx], edge (ix,iy)-(ix,iy+1)
    occ: np.ndarray           # int32[ny, nx]
    pin: np.ndarray           # int32[ny, nx]
    pin_vertex: dict = field(default_factory=dict)   # PinRef -> (ix, iy)
    boxes: list = field(default_factory=list)        # inflated component boxes

    @property
    def n_vertices(self) -> int:
        return self.nx * self.ny

    @property
    def n_edges_present(self) -> int:
        return int((self.eh != REMOVED).sum() + (self.ev != REMOVED).sum())

    def vertex_point(self, ix: int, iy: int) -> tuple[float, float]:
        return (round(ix * self.g, 3), round(iy * self.g, 3))

    def window(self, rect=None, width=None, height=None) -> tuple[int, int, int, int]:
        """(x0, y0, w, h) vertex window for a µm rectangle (whole grid if None)."""
        if rect is None:
            return (0, 0, self.nx, self.ny)
        x, y, rw, rh = rect
        vx0 = max(math.ceil(x / self.g - 1e-9), 0)
        vy0 = max(math.ceil(y / self.g - 1e-9), 0)
        vx1 = math.ceil((x + rw) / self.g - 1e-9) - 1
        vy1 = math.ceil((y + rh) / self.g - 1e-9) - 1
        if width is not None and abs((x + rw) - width) < 1e-9:
            vx1 = self.nx - 1
        if height is not None and abs((y + rh) - height) < 1e-9:
            vy1 = self.ny - 1
        return (vx0, vy0, vx1 - vx0 + 1, vy1 - vy0 + 1)


def build_grid(
    layout: PhysicalLayout,
    placement: Placement,
    circuit: LogicalCircuit,
    g: Optional[float] = None,
    route_over_unused: bool = False,
    pin_windows: Optional[dict] = None,
) -> GridGraph:
    """Discretize the substrate and reserve component boxes and pin vertices.

    Components (all of them unless ``route_over_unused``, then only mapped
    ones) contribute a bounding box inflated by g/2 whose interior edges are
    removed permanently.  Each mapped pin takes the nearest free vertex
    outside the boxes (within 2g) and its incident edges are temporarily
    removed until the net routes.  ``pin_windows`` optionally restricts a
    pin's vertex to its block's window (PinRef -> (x0, y0, w, h)).
    """
    if g is None:
        g = default_grid_spacing(layout.mean_pitch)
    if g < MIN_SEPARATION - 1e-12:
        raise GridError(f"grid spacing {g} below minimum wire separation {MIN_SEPARATION}")
    nx = int(layout.width / g + 1e-9) + 1
    ny = int(layout.height / g + 1e-9) + 1
    eh = np.full((ny, nx - 1), FREE, dtype=np.int32)
    ev = np.full((ny - 1, nx), FREE, dtype=np.int32)
    occ = np.full((ny, nx), FREE, dtype=np.int32)
    pin = np.full((ny, nx), FREE, dtype=np.int32)
    grid = GridGraph(g, nx, ny, eh, ev, occ, pin)

    mapped = set(placement.comp_map.values())
    for pc in layout.components:
        if route_over_unused and pc.id not in mapped:
            continue
        bx0, by0, bx1, by1 = component_bbox(pc)
        bx0, by0, bx1, by1 = bx0 - g / 2, by0 - g / 2, bx1 + g / 2, by1 + g / 2
        grid.boxes.append((bx0, by0, bx1, by1))
        # vertices strictly inside are blocked
        ix_lo = max(math.floor(bx0 / g + 1e-9) + 1, 0)
        ix_hi = min(math.ceil(bx1 / g - 1e-9) - 1, nx - 1)
        iy_lo = max(math.floor(by0 / g + 1e-9) + 1, 0)
        iy_hi = min(math.ceil(by1 / g - 1e-9) - 1, ny - 1)
        if ix_lo <= ix_hi and iy_lo <= iy_hi:
            occ[iy_lo : iy_hi + 1, ix_lo : ix_hi + 1] = REMOVED
        # edges whose span intersects the open box are removed
        ex_lo = max(math.floor(bx0 / g + 1e-9), 0)
        ex_hi = min(math.ceil(bx1 / g - 1e-9) - 1, nx - 2)
        if iy_lo <= iy_hi and ex_lo <= ex_hi:
            eh[iy_lo : iy_hi + 1, ex_lo : ex_hi + 1] = REMOVED
        ey_lo = max(math.floor(by0 / g + 1e-9), 0)
        ey_hi = min(math.ceil(by1 / g - 1e-9) - 1, ny - 2)
        if ix_lo <= ix_hi and ey_lo <= ey_hi:
            ev[ey_lo : ey_hi + 1, ix_lo : ix_hi + 1] = REMOVED

    net_of = circuit.net_of_pin()
    refs: list = []
    for comp in circuit.components:
        if comp.id in placement.comp_map:
            for k in (0, 1, 2):
                refs.append(CompPin(comp.id, k))
    for name in circuit.io_pins:
        if name in placement.io_map:
            refs.append(IoPin(name))

    for ref in refs:
        px, py = placement.pin_point(ref, circuit, layout)
        base_x, base_y = int(round(px / g)), int(round(py / g))
        window = pin_windows.get(ref) if pin_windows else None
        best = None
        span = 3  # covers the 2g search radius around the rounded base vertex
        cands = []
        for dy in range(-span, span + 1):
            for dx in range(-span, span + 1):
                ix, iy = base_x + dx, base_y + dy
                if not (0 <= ix < nx and 0 <= iy < ny):
                    continue
                d = euclidean((ix * g, iy * g), (px, py))
                if d > 2 * g + 1e-9:
                    continue
                cands.append((d, ix, iy))
        cands.sort()
        for d, ix, iy in cands:
            if occ[iy, ix] == REMOVED or pin[iy, ix] != FREE:
                continue
            if window is not None:
                wx0, wy0, ww, wh = window
                if not (wx0 <= ix < wx0 + ww and wy0 <= iy < wy0 + wh):
                    continue
            best = (ix, iy)
            break
        if best is None:
            raise GridError(f"no free grid vertex within 2g of pin {ref}")
        ix, iy = best
        pin[iy, ix] = net_of[ref]
        grid.pin_vertex[ref] = (ix, iy)
        if ix < nx - 1 and eh[iy, ix] == FREE:
            eh[iy, ix] = TEMP
        if ix > 0 and eh[iy, ix - 1] == FREE:
            eh[iy, ix - 1] = TEMP
        if iy < ny - 1 and ev[iy, ix] == FREE:
            ev[iy, ix] = TEMP
        if iy > 0 and ev[iy - 1, ix] == FREE:
            ev[iy - 1, ix] = TEMP
    return grid


class RouteScratch:
    """Reusable per-window search buffers."""

    def __init__(self, w: int, h: int):
        states = w * h * 3
        self.w, self.h = w, h
        self.visited = np.full(states, -1, dtype=np.int64)
        self.parent = np.empty(states, dtype=np.int64)
        self.target = np.full(w * h, -1, dtype=np.int64)
        self.queue = np.empty(states + 4, dtype=np.int64)
        self.path = np.empty(w * h + 4, dtype=np.int64)
        self.stamp = np.zeros(2, dtype=np.int64)
        self.heap_f = np.empty(states + 4, dtype=np.float64)
        self.heap_c = np.empty(states + 4, dtype=np.int64)
        self.heap_s = np.empty(states + 4, dtype=np.int64)
        cap = 2 * w * h + 16
        self.wires = np.empty(cap * 4, dtype=np.int32)
        self.insu = np.empty(cap * 2, dtype=np.int32)


def order_nets(
    circuit: LogicalCircuit,
    pins_by_net: dict[int, list[tuple[int, int]]],
) -> list[int]:
    """Route order: ascending count of foreign pins inside each net's pin
    bounding box, ties by net id; large nets go last (power/clock rails span
    everything and would blockade early routing)."""
    ids = [n for n in pins_by_net if pins_by_net[n]]
    all_pins = []
    for n in ids:
        for (ix, iy) in pins_by_net[n]:
            all_pins.append((ix, iy, n))
    if not all_pins:
        return []
    arr = np.array(all_pins, dtype=np.int64)
    keys = {}
    for n in ids:
        pts = np.array(pins_by_net[n], dtype=np.int64)
        x0, y0 = pts[:, 0].min(), pts[:, 1].min()
        x1, y1 = pts[:, 0].max(), pts[:, 1].max()
        inside = (
            (arr[:, 0] >= x0)
            & (arr[:, 0] <= x1)
            & (arr[:, 1] >= y0)
            & (arr[:, 1] <= y1)
            & (arr[:, 2] != n)
        )
        keys[n] = int(inside.sum())
    return sorted(ids, key=lambda n: (circuit.nets[n].is_large, keys[n], n))


@dataclass
class NetRoute:
    net: int
    wires: np.ndarray            # (k, 4) int32 grid segments
    insulators: np.ndarray       # (m, 2) int32 grid points
    failed: bool = False


def route_net_bfs(
    grid: GridGraph,
    net_id: int,
    pins: Sequence[tuple[int, int]],
    scratch: Optional[RouteScratch] = None,
    window: Optional[tuple[int, int, int, int]] = None,
    mode: int = 0,
    astar_weight: float = 1.5,
) -> NetRoute:
    """Route one net's pins inside a window (whole grid by default)."""
    if window is None:
        window = (0, 0, grid.nx, grid.ny)
    x0, y0, w, h = window
    if scratch is None:
        scratch = RouteScratch(w, h)
    pins_ix = np.array([p[0] for p in pins], dtype=np.int64)
    pins_iy = np.array([p[1] for p in pins], dtype=np.int64)
    nw, ni, nfail = _kernels.route_net_kernel(
        grid.eh, grid.ev, grid.occ, grid.pin, grid.nx, grid.ny, net_id,
        pins_ix, pins_iy,
        x0, y0, w, h,
        scratch.visited, scratch.parent, scratch.target, scratch.queue, scratch.path,
        scratch.stamp,
        mode, astar_weight,
        scratch.heap_f, scratch.heap_c, scratch.heap_s,
        scratch.wires, scratch.insu,
    )
    if nw < 0:
        raise GridError(f"net {net_id}: routing buffer overflow")
    return NetRoute(
        net_id,
        scratch.wires[: 4 * nw].reshape(-1, 4).copy(),
        scratch.insu[: 2 * ni].reshape(-1, 2).copy(),
        failed=nfail > 0,
    )


def segment_vertices(wires: np.ndarray) -> set[tuple[int, int]]:
    out: set[tuple[int, int]] = set()
    for x1, y1, x2, y2 in wires:
        if x1 == x2:
            lo, hi = sorted((y1, y2))
            for y in range(lo, hi + 1):
                out.add((int(x1), int(y)))
        else:
            lo, hi = sorted((x1, x2))
            for x in range(lo, hi + 1):
                out.add((int(x), int(y1)))
    return out


def route_interblock(
    grid: GridGraph,
    net_id: int,
    subtrees: list[dict],
    scratch: RouteScratch,
    mode: int = 1,
    astar_weight: float = 1.5,
) -> NetRoute:
    """Connect a net's per-block subtrees on the stitched grid.

    Each subtree dict carries ``pins`` (list of (ix, iy)) and ``vertices``
    (set of (ix, iy) on its routed wires).  Subtrees merge in Prim order by
    closest pin pairs; each connection runs a search from the chosen source
    pin until it reaches any vertex of the already-connected region.
    """
    for st in subtrees:
        if len(st["pins"]) == 1:
            ix, iy = st["pins"][0]
            _kernels._reconnect_pin(grid.eh, grid.ev, ix, iy, grid.nx, grid.ny)

    scratch.stamp[0] += 1
    tstamp = int(scratch.stamp[0])

    def stamp(vertices: Iterable[tuple[int, int]]):
        codes = np.array([(iy * grid.nx + ix) * 2 for ix, iy in vertices], dtype=np.int64)
        if len(codes):
            _kernels._stamp_codes(
                scratch.target, tstamp, codes, len(codes), grid.nx, 0, 0, scratch.w
            )

    order = sorted(range(len(subtrees)), key=lambda i: subtrees[i]["block"])
    region = subtrees[order[0]]
    region_pins = list(region["pins"])
    stamp(region["vertices"] | set(region["pins"]))
    remaining = [subtrees[i] for i in order[1:]]

    wires_acc: list[np.ndarray] = []
    insu_acc: list[np.ndarray] = []
    failed = False
    while remaining:
        best = None
        for si, st in enumerate(remaining):
            for sp in st["pins"]:
                for rp in region_pins:
                    d = abs(sp[0] - rp[0]) + abs(sp[1] - rp[1])
                    key = (d, st["block"], sp, rp)
                    if best is None or key < best[0]:
                        best = (key, si, sp, rp)
        _, si, sp, rp = best
        st = remaining.pop(si)
        nw, ni, ok = _kernels.connect_trees_kernel(
            grid.eh, grid.ev, grid.occ, grid.pin, grid.nx, grid.ny, net_id,
            sp[0], sp[1], rp[0], rp[1],
            0, 0, scratch.w, scratch.h,
            scratch.visited, scratch.parent, scratch.target, scratch.queue, scratch.path,
            scratch.stamp, tstamp,
            mode, astar_weight,
            scratch.heap_f, scratch.heap_c, scratch.heap_s,
            scratch.wires, scratch.insu,
        )
        if nw < 0:
            raise GridError(f"net {net_id}: routing buffer overflow")
        if not ok:
            failed = True
        else:
            wires_acc.append(scratch.wires[: 4 * nw].reshape(-1, 4).copy())
            insu_acc.append(scratch.insu[: 2 * ni].reshape(-1, 2).copy())
        # the new subtree joins the region either way; its pins become sources
        stamp(st["vertices"] | set(st["pins"]))
        region_pins.extend(st["pins"])

    wires = (
        np.concatenate(wires_acc) if wires_acc else np.zeros((0, 4), dtype=np.int32)
    )
    insu = np.concatenate(insu_acc) if insu_acc else np.zeros((0, 2), dtype=np.int32)
    return NetRoute(net_id, wires, insu, failed)


def pins_in_scope(
    circuit: LogicalCircuit,
    placement: Placement,
    grid: GridGraph,
    comp_block: Optional[Sequence[int]] = None,
    io_block: Optional[dict] = None,
    block: Optional[int] = None,
) -> dict[int, list[tuple[int, int]]]:
    """Net -> pin vertices, restricted to one block when given."""
    out: dict[int, list[tuple[int, int]]] = {net.id: [] for net in circuit.nets}
    for net in circuit.nets:
        for ref in net.members:
            if isinstance(ref, CompPin):
                if ref.comp not in placement.comp_map:
                    continue
                if block is not None and comp_block[ref.comp] != block:
                    continue
            else:
                if ref.name not in placement.io_map:
                    continue
                if block is not None and io_block.get(ref.name) != block:
                    continue
            out[net.id].append(grid.pin_vertex[ref])
    return out


def _wires_to_primitives(grid: GridGraph, routes: list[NetRoute]):
    """Per-net print group: insulators first, then wires (µm coordinates)."""
    sequence = []
    for r in routes:
        for (ix, iy) in r.insulators:
            sequence.append(Insulator(grid.vertex_point(int(ix), int(iy))))
        for (x1, y1, x2, y2) in r.wires:
            sequence.append(
                Wire(grid.vertex_point(int(x1), int(y1)), grid.vertex_point(int(x2), int(y2)), r.net)
            )
    return sequence


def build_solution(grid: GridGraph, routes: list[NetRoute]) -> RoutingSolution:
    sol = RoutingSolution(grid_g=grid.g)
    sol.sequence = _wires_to_primitives(grid, routes)
    for r in routes:
        tree = sol.per_net_trees.setdefault(r.net, set())
        for (x1, y1, x2, y2) in r.wires:
            if x1 == x2:
                lo, hi = sorted((int(y1), int(y2)))
                for y in range(lo, hi):
                    tree.add(
                        canonical_segment(grid.vertex_point(int(x1), y), grid.vertex_point(int(x1), y + 1))
                    )
            else:
                lo, hi = sorted((int(x1), int(x2)))
                for x in range(lo, hi):
                    tree.add(
                        canonical_segment(grid.vertex_point(x, int(y1)), grid.vertex_point(x + 1, int(y1)))
                    )
        if r.failed:
            sol.failures.append((r.net, FAIL_FRONTIER))
    return sol


def route_circuit(
    circuit: LogicalCircuit,
    placement: Placement,
    layout: PhysicalLayout,
    g: Optional[float] = None,
    route_over_unused: bool = False,
) -> tuple[RoutingSolution, GridGraph]:
    """Single-window routing of the whole circuit (small-circuit bypass)."""
    grid = build_grid(layout, placement, circuit, g, route_over_unused)
    pins_by_net = pins_in_scope(circuit, placement, grid)
    order = order_nets(circuit, pins_by_net)
    scratch = RouteScratch(grid.nx, grid.ny)
    routes = []
    for n in order:
        if len(pins_by_net[n]) < 2:
            continue
        routes.append(route_net_bfs(grid, n, pins_by_net[n], scratch))
    return build_solution(grid, routes), grid


def route_partitioned(
    circuit: LogicalCircuit,
    placement: Placement,
    layout: PhysicalLayout,
    partition,
    floorplan,
    io_block: dict,
    g: Optional[float] = None,
    inter_mode: str = "astar",
    astar_weight: float = 1.5,
    jobs: int = 0,
    route_over_unused: bool = False,
) -> tuple[RoutingSolution, GridGraph, int]:
    """Intra-block routing per block (parallelizable; blocks own disjoint
    windows), then inter-block stitching over the full grid.

    Returns (solution, grid, index of the first inter-block primitive).
    """
    g_val = g or default_grid_spacing(layout.mean_pitch)
    windows = {b: _window_clipped(layout, floorplan.rects[b], g_val) for b in floorplan.rects}
    pin_windows = {}
    for comp in circuit.components:
        b = partition.block_of[comp.id]
        for k in (0, 1, 2):
            pin_windows[CompPin(comp.id, k)] = windows[b]
    for name, b in io_block.items():
        pin_windows[IoPin(name)] = windows[b]

    grid = build_grid(layout, placement, circuit, g_val, route_over_unused, pin_windows)

    per_block_pins = {
        b: pins_in_scope(circuit, placement, grid, partition.block_of, io_block, b)
        for b in sorted(floorplan.rects)
    }

    def route_block(b: int) -> list[NetRoute]:
        window = windows[b]
        scratch = RouteScratch(window[2], window[3])
        pins_by_net = per_block_pins[b]
        routes = []
        for n in order_nets(circuit, pins_by_net):
            if len(pins_by_net[n]) < 2:
                continue
            routes.append(route_net_bfs(grid, n, pins_by_net[n], scratch, window))
        return routes

    blocks = sorted(floorplan.rects)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            block_routes = dict(zip(blocks, pool.map(route_block, blocks)))
    else:
        block_routes = {b: route_block(b) for b in blocks}

    routes: list[NetRoute] = []
    for b in blocks:
        routes.extend(block_routes[b])
    inter_start_route = len(routes)

    # assemble per-net subtrees for nets spanning several blocks
    net_block_pins: dict[int, dict[int, list]] = {}
    for b in blocks:
        for n, pins in per_block_pins[b].items():
            if pins:
                net_block_pins.setdefault(n, {})[b] = pins
    intra_by_net_block: dict[tuple[int, int], NetRoute] = {}
    for b in blocks:
        for r in block_routes[b]:
            intra_by_net_block[(r.net, b)] = r

    inter_nets = [n for n, bp in net_block_pins.items() if len(bp) > 1]
    all_pins = {n: [p for pins in net_block_pins[n].values() for p in pins] for n in inter_nets}
    inter_order = order_nets(circuit, all_pins)

    scratch = RouteScratch(grid.nx, grid.ny)
    mode = 1 if inter_mode == "astar" else 0
    for n in inter_order:
        subtrees = []
        for b, pins in sorted(net_block_pins[n].items()):
            r = intra_by_net_block.get((n, b))
            vertices = segment_vertices(r.wires) if r is not None else set()
            subtrees.append({"block": b, "pins": pins, "vertices": vertices})
        routes.append(route_interblock(grid, n, subtrees, scratch, mode, astar_weight))

    sol = build_solution(grid, routes)
    inter_start = sum(
        len(r.wires) + len(r.insulators) for r in routes[:inter_start_route]
    )
    # merge duplicate failure records (a net can fail in both stages)
    seen = set()
    sol.failures = [f for f in sol.failures if not (f[0] in seen or seen.add(f[0]))]
    return sol, grid, inter_start


def _window_clipped(layout, rect, g):
    nx = int(layout.width / g + 1e-9) + 1
    ny = int(layout.height / g + 1e-9) + 1
    x, y, rw, rh = rect
    vx0 = max(math.ceil(x / g - 1e-9), 0)
    vy0 = max(math.ceil(y / g - 1e-9), 0)
    vx1 = math.ceil((x + rw) / g - 1e-9) - 1
    vy1 = math.ceil((y + rh) / g - 1e-9) - 1
    if abs((x + rw) - layout.width) < 1e-9:
        vx1 = nx - 1
    if abs((y + rh) - layout.height) < 1e-9:
        vy1 = ny - 1
    return (vx0, vy0, vx1 - vx0 + 1, vy1 - vy0 + 1)


# -- direct-connect baselines ------------------------------------------------


def _lower_l(a: tuple[float, float], b: tuple[float, float]):
    """Two axis-aligned legs through the corner at the lower of the two y's."""
    corner = (b[0], a[1]) if a[1] <= b[1] else (a[0], b[1])
    legs = []
    if corner != a:
        legs.append((a, corner))
    if corner != b:
        legs.append((corner, b))
    return legs


def _mst_edges(points: list[tuple[float, float]], metric) -> list[tuple[int, int]]:
    n = len(points)
    if n < 2:
        return []
    in_tree = [False] * n
    dist = [math.inf] * n
    near = [0] * n
    in_tree[0] = True
    for j in range(1, n):
        dist[j] = metric(points[0], points[j])
    edges = []
    for _ in range(n - 1):
        best = min((j for j in range(n) if not in_tree[j]), key=lambda j: (dist[j], j))
        edges.append((near[best], best))
        in_tree[best] = True
        for j in range(n):
            if not in_tree[j]:
                d = metric(points[best], points[j])
                if d < dist[j]:
                    dist[j] = d
                    near[j] = best
    return edges


def _seg_interactions(a, b):
    """Classify how two segments interact: ('cross', point), ('overlap', p, q)
    with p-q the shared collinear piece, or None."""
    (ax1, ay1), (ax2, ay2) = a
    (bx1, by1), (bx2, by2) = b
    rx, ry = ax2 - ax1, ay2 - ay1
    sx, sy = bx2 - bx1, by2 - by1
    denom = rx * sy - ry * sx
    qpx, qpy = bx1 - ax1, by1 - ay1
    eps = 1e-9
    if abs(denom) > eps:
        t = (qpx * sy - qpy * sx) / denom
        u = (qpx * ry - qpy * rx) / denom
        if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
            return ("cross", (ax1 + t * rx, ay1 + t * ry))
        return None
    # parallel: collinear?
    if abs(qpx * ry - qpy * rx) > eps:
        return None
    rlen2 = rx * rx + ry * ry
    if rlen2 < eps:
        return None
    t0 = (qpx * rx + qpy * ry) / rlen2
    t1 = ((bx2 - ax1) * rx + (by2 - ay1) * ry) / rlen2
    lo, hi = max(min(t0, t1), 0.0), min(max(t0, t1), 1.0)
    if hi < lo - eps:
        return None
    p = (ax1 + lo * rx, ay1 + lo * ry)
    q = (ax1 + hi * rx, ay1 + hi * ry)
    if hi - lo <= eps:
        return ("cross", p)
    return ("overlap", p, q)


def direct_connect(
    circuit: LogicalCircuit,
    placement: Placement,
    layout: PhysicalLayout,
    metric: str = "euclidean",
) -> RoutingSolution:
    """Baseline: realize each net as its MST with straight wires (euclidean)
    or lower-L two-leg paths (manhattan), then insulate overlaps between
    different nets: a point crossing takes 1 insulator, a collinear overlap of
    length l takes ceil(l / wire width) insulators."""
    fn = euclidean if metric == "euclidean" else manhattan
    net_segments: dict[int, list] = {}
    for net in circuit.nets:
        pts = [
            placement.pin_point(ref, circuit, layout)
            for ref in net.members
            if (isinstance(ref, CompPin) and ref.comp in placement.comp_map)
            or (isinstance(ref, IoPin) and ref.name in placement.io_map)
        ]
        segs = []
        for (i, j) in _mst_edges(pts, fn):
            if metric == "euclidean":
                if pts[i] != pts[j]:
                    segs.append((pts[i], pts[j]))
            else:
                segs.extend(_lower_l(pts[i], pts[j]))
        net_segments[net.id] = segs

    insu_by_net: dict[int, list] = {net.id: [] for net in circuit.nets}
    ids = sorted(net_segments)
    for i, na in enumerate(ids):
        for nb in ids[i + 1 :]:
            later = max(na, nb)
            for sa in net_segments[na]:
                for sb in net_segments[nb]:
                    hit = _seg_interactions(sa, sb)
                    if hit is None:
                        continue
                    if hit[0] == "cross":
                        insu_by_net[later].append(hit[1])
                    else:
                        _, p, q = hit
                        length = euclidean(p, q)
                        count = max(int(math.ceil(length / WIRE_WIDTH - 1e-9)), 1)
                        for k in range(count):
                            t = (k + 0.5) / count
                            insu_by_net[later].append(
                                (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
                            )

    sol = RoutingSolution(grid_g=None)
    for net in circuit.nets:
        for p in insu_by_net[net.id]:
            sol.sequence.append(Insulator((round(p[0], 3), round(p[1], 3))))
        tree = sol.per_net_trees.setdefault(net.id, set())
        for (a, b) in net_segments[net.id]:
            a = (round(a[0], 3), round(a[1], 3))
            b = (round(b[0], 3), round(b[1], 3))
            sol.sequence.append(Wire(a, b, net.id))
            tree.add(canonical_segment(a, b))
    return sol


def mst_lower_bound(
    circuit: LogicalCircuit, placement: Placement, layout: PhysicalLayout
) -> float:
    """Summed Manhattan MST length over every net's mapped pin positions
    (large nets included); a reporting baseline for routed wire length."""
    total = 0.0
    for net in circuit.nets:
        pts = [
            placement.pin_point(ref, circuit, layout)
            for ref in net.members
            if (isinstance(ref, CompPin) and ref.comp in placement.comp_map)
            or (isinstance(ref, IoPin) and ref.name in placement.io_map)
        ]
        total += mst_length(pts, manhattan)
    return total
