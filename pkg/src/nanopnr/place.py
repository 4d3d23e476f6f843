"""Simulated-annealing assignment of logical components to deposited ones.

Cost is the summed Manhattan MST length over each non-large net's mapped pin
positions (plus any virtual pins).  Moves relocate a mapping to a free
same-type component within the current neighbor distance, or swap two
mappings; I/O pins move between boundary slots by the same rule.  The
neighbor distance shrinks linearly in log-temperature while the temperature
decays exponentially.

Blocks are annealed independently (optionally in parallel); inter-block nets
receive one virtual pin per (net, block) at a neighboring block's centre to
pull their members toward the shared boundary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .floorplan import Floorplan
from .model import (
    CompPin,
    IoPin,
    Kind,
    LogicalCircuit,
    PhysicalLayout,
    Placement,
    euclidean,
    manhattan,
    mst_length,
    pin_positions,
)
from .partition import PartitionResult


class PlacementError(RuntimeError):
    pass


@dataclass
class SASchedule:
    """Exponential cooling schedule running exactly ``t_n`` iterations."""

    t0: float
    eps: float
    t_n: int
    d_max: float
    d_min: float

    @property
    def k_t(self) -> float:
        return (self.eps / self.t0) ** (1.0 / self.t_n)

    def neighbor_distance(self, temp: float) -> float:
        frac = (math.log(temp) - math.log(self.eps)) / (math.log(self.t0) - math.log(self.eps))
        return self.d_min + (self.d_max - self.d_min) * min(max(frac, 0.0), 1.0)

    def temperatures(self) -> list[float]:
        out = []
        t = self.t0
        for _ in range(self.t_n):
            out.append(t)
            t *= self.k_t
        return out


@dataclass(frozen=True)
class VirtualPin:
    """Phantom net member at a neighboring block's centre; never routed."""

    net: int
    block: int
    position: tuple[float, float]


@dataclass
class PlaceStats:
    cost: float
    schedule: SASchedule
    accepted: int
    max_incremental_error: float


def placement_cost(
    circuit: LogicalCircuit,
    layout: PhysicalLayout,
    placement: Placement,
    vpins: Iterable[VirtualPin] = (),
    metric: str = "manhattan",
) -> float:
    """Summed MST length over non-large nets of the mapped member positions
    plus any virtual pins (reference implementation of the SA objective)."""
    fn = manhattan if metric == "manhattan" else euclidean
    extra: dict[int, list[tuple[float, float]]] = {}
    for vp in vpins:
        extra.setdefault(vp.net, []).append(vp.position)
    total = 0.0
    for net in circuit.nets:
        if net.is_large:
            continue
        pts = list(extra.get(net.id, []))
        for ref in net.members:
            if isinstance(ref, CompPin) and ref.comp in placement.comp_map:
                pts.append(placement.pin_point(ref, circuit, layout))
            elif isinstance(ref, IoPin) and ref.name in placement.io_map:
                pts.append(placement.pin_point(ref, circuit, layout))
        total += mst_length(pts, fn)
    return total


def propose_move(
    placement: Placement,
    layout: PhysicalLayout,
    d_n: float,
    rng: np.random.Generator,
    circuit: LogicalCircuit,
) -> Placement:
    """One SA move (reference implementation): relocate or swap a uniformly
    chosen mapping to a same-type target within Euclidean distance ``d_n``,
    falling back to the nearest same-type target when none is in range."""
    entries = [("c", lid) for lid in sorted(placement.comp_map)] + [
        ("io", name) for name in sorted(placement.io_map)
    ]
    tag, key = entries[int(rng.integers(len(entries)))]
    cand = Placement(dict(placement.comp_map), dict(placement.io_map))
    if tag == "c":
        j = placement.comp_map[key]
        kind = layout.components[j].kind
        cx, cy = layout.components[j].center
        in_range = [
            p.id
            for p in layout.components
            if p.id != j and p.kind is kind and euclidean(p.center, (cx, cy)) <= d_n
        ]
        if in_range:
            y = in_range[int(rng.integers(len(in_range)))]
        else:
            others = [p for p in layout.components if p.id != j and p.kind is kind]
            if not others:
                return cand
            y = min(others, key=lambda p: (euclidean(p.center, (cx, cy)), p.id)).id
        owner = {p: l for l, p in placement.comp_map.items()}
        if y in owner:
            cand.comp_map[key], cand.comp_map[owner[y]] = y, j
        else:
            cand.comp_map[key] = y
    else:
        k = placement.io_map[key]
        kx, ky = layout.io_slots[k]
        in_range = [
            s
            for s, pos in enumerate(layout.io_slots)
            if s != k and euclidean(pos, (kx, ky)) <= d_n
        ]
        if in_range:
            y = in_range[int(rng.integers(len(in_range)))]
        else:
            others = [s for s in range(len(layout.io_slots)) if s != k]
            if not others:
                return cand
            y = min(others, key=lambda s: (euclidean(layout.io_slots[s], (kx, ky)), s))
        owner = {s: n for n, s in placement.io_map.items()}
        if y in owner:
            cand.io_map[key], cand.io_map[owner[y]] = y, k
        else:
            cand.io_map[key] = y
    return cand


def compute_virtual_pins(
    circuit: LogicalCircuit, partition: PartitionResult, floorplan: Floorplan
) -> set[VirtualPin]:
    """One virtual pin per (inter-block net, block).

    Two-block nets point each block at the other's rectangle centre.  Wider
    nets build a Euclidean MST over the touched blocks' centres (rooted at the
    lowest block id); each block points at its MST parent and the root points
    at its nearest child.
    """
    centers = {b: floorplan.center(b) for b in floorplan.rects}
    out: set[VirtualPin] = set()
    for net in circuit.nets:
        if net.is_large:
            continue
        blocks = sorted(
            {partition.block_of[ref.comp] for ref in net.members if isinstance(ref, CompPin)}
        )
        if len(blocks) < 2:
            continue
        if len(blocks) == 2:
            a, b = blocks
            out.add(VirtualPin(net.id, a, centers[b]))
            out.add(VirtualPin(net.id, b, centers[a]))
            continue
        parent = _euclid_mst_parents(blocks, centers)
        root = blocks[0]
        children = [b for b in blocks if b != root and parent[b] == root]
        nearest_child = min(children, key=lambda b: (euclidean(centers[b], centers[root]), b))
        for b in blocks:
            j = nearest_child if b == root else parent[b]
            out.add(VirtualPin(net.id, b, centers[j]))
    return out


def _euclid_mst_parents(blocks: list[int], centers: dict) -> dict[int, int]:
    root = blocks[0]
    in_tree = {root}
    parent = {root: root}
    dist = {b: euclidean(centers[b], centers[root]) for b in blocks}
    near = {b: root for b in blocks}
    while len(in_tree) < len(blocks):
        best = min((b for b in blocks if b not in in_tree), key=lambda b: (dist[b], b))
        in_tree.add(best)
        parent[best] = near[best]
        for b in blocks:
            if b not in in_tree:
                d = euclidean(centers[b], centers[best])
                if d < dist[b]:
                    dist[b] = d
                    near[b] = best
    return parent


def default_iterations(n_components: int, scale: float = 1.0) -> int:
    return max(int(round(scale * n_components * n_components)), 32)


def place_sa(
    circuit: LogicalCircuit,
    layout: PhysicalLayout,
    comp_ids: Optional[Sequence[int]] = None,
    io_names: Optional[Sequence[str]] = None,
    phys_ids: Optional[Sequence[int]] = None,
    slot_ids: Optional[Sequence[int]] = None,
    vpins: Iterable[VirtualPin] = (),
    schedule: Optional[SASchedule] = None,
    seed: int = 0,
    metric: str = "manhattan",
    iters_scale: float = 1.0,
    check_every: int = 0,
    region_diag: Optional[float] = None,
    t0_factor: float = 2.0,
) -> tuple[Placement, PlaceStats]:
    """Anneal one block (by default the whole circuit over the whole layout).

    Deterministic for a fixed seed.  ``check_every`` > 0 enables periodic
    verification of the incrementally maintained cost against a full
    recomputation; the largest relative error is reported in the stats.
    """
    comp_ids = list(comp_ids) if comp_ids is not None else [c.id for c in circuit.components]
    io_names = list(io_names) if io_names is not None else list(circuit.io_pins)
    phys_ids = list(phys_ids) if phys_ids is not None else [p.id for p in layout.components]
    slot_ids = list(slot_ids) if slot_ids is not None else list(range(len(layout.io_slots)))

    n_comp = len(comp_ids)
    arrays = _build_arrays(circuit, layout, comp_ids, io_names, phys_ids, slot_ids, vpins)

    rng = np.random.default_rng(np.random.SeedSequence([seed & ((1 << 63) - 1), 0x51A]))
    assign_comp, owner = _initial_comp_assignment(circuit, layout, comp_ids, phys_ids, rng)
    assign_io, slot_owner = _initial_io_assignment(io_names, slot_ids, rng)

    if schedule is None:
        if region_diag is None:
            region_diag = math.hypot(layout.width, layout.height)
        t_n = default_iterations(n_comp, iters_scale)
        d_max = max(region_diag, layout.mean_pitch)
        d_min = min(layout.mean_pitch, d_max)
        t0_arg = -1.0
        eps_arg = 0.0
    else:
        t_n = schedule.t_n
        d_max = schedule.d_max
        d_min = schedule.d_min
        t0_arg = schedule.t0
        eps_arg = schedule.eps

    kern_seed = _kernels.derive_stream(seed, 0x5EED, len(comp_ids), len(phys_ids)) & ((1 << 63) - 1)
    cost, t0, accepted, max_err = _kernels.place_sa_kernel(
        arrays["net_ptr"], arrays["mem_kind"], arrays["mem_a"], arrays["mem_b"],
        arrays["fixed_x"], arrays["fixed_y"],
        arrays["comp_nets_ptr"], arrays["comp_nets"], arrays["io_nets_ptr"], arrays["io_nets"],
        arrays["cand_pin_x"], arrays["cand_pin_y"], arrays["cand_cx"], arrays["cand_cy"],
        arrays["comp_kind"],
        arrays["slot_x"], arrays["slot_y"],
        arrays["bstart"], arrays["bitems"], arrays["type_off"],
        arrays["grid_x0"], arrays["grid_y0"], arrays["cell"], arrays["ncx"], arrays["ncy"],
        assign_comp, owner, assign_io, slot_owner,
        t0_arg, eps_arg, t_n, d_max, d_min, t0_factor,
        0 if metric == "manhattan" else 1,
        kern_seed, check_every,
    )

    placement = Placement(
        comp_map={comp_ids[i]: phys_ids[assign_comp[i]] for i in range(n_comp)},
        io_map={io_names[i]: slot_ids[assign_io[i]] for i in range(len(io_names))},
    )
    final_schedule = SASchedule(t0, eps_arg if schedule is not None else 1e-3 * t0, t_n, d_max, d_min)
    return placement, PlaceStats(float(cost), final_schedule, int(accepted), float(max_err))


def _initial_comp_assignment(circuit, layout, comp_ids, phys_ids, rng):
    by_kind: dict[Kind, list[int]] = {Kind.PMOS: [], Kind.NMOS: []}
    for local, pid in enumerate(phys_ids):
        by_kind[layout.components[pid].kind].append(local)
    for kind in by_kind:
        by_kind[kind] = list(rng.permutation(by_kind[kind])) if by_kind[kind] else []
    assign = np.full(len(comp_ids), -1, dtype=np.int64)
    owner = np.full(len(phys_ids), -1, dtype=np.int64)
    cursor = {Kind.PMOS: 0, Kind.NMOS: 0}
    for i, cid in enumerate(comp_ids):
        kind = circuit.components[cid].kind
        pool = by_kind[kind]
        if cursor[kind] >= len(pool):
            raise PlacementError(
                f"not enough {kind.value} components in region "
                f"({len(pool)} available, more needed)"
            )
        local = int(pool[cursor[kind]])
        cursor[kind] += 1
        assign[i] = local
        owner[local] = i
    return assign, owner


def _initial_io_assignment(io_names, slot_ids, rng):
    if len(slot_ids) < len(io_names):
        raise PlacementError(f"{len(io_names)} io pins but only {len(slot_ids)} slots in region")
    perm = list(rng.permutation(len(slot_ids)))
    assign = np.array([int(perm[i]) for i in range(len(io_names))], dtype=np.int64)
    slot_owner = np.full(len(slot_ids), -1, dtype=np.int64)
    for i, s in enumerate(assign):
        slot_owner[s] = i
    return assign, slot_owner


def _build_arrays(circuit, layout, comp_ids, io_names, phys_ids, slot_ids, vpins):
    comp_local = {cid: i for i, cid in enumerate(comp_ids)}
    io_local = {name: i for i, name in enumerate(io_names)}
    vpin_of_net: dict[int, list[tuple[float, float]]] = {}
    for vp in vpins:
        vpin_of_net.setdefault(vp.net, []).append(vp.position)

    net_ptr = [0]
    mem_kind: list[int] = []
    mem_a: list[int] = []
    mem_b: list[int] = []
    fixed_x: list[float] = []
    fixed_y: list[float] = []
    comp_nets: dict[int, list[int]] = {i: [] for i in range(len(comp_ids))}
    io_nets: dict[int, list[int]] = {i: [] for i in range(len(io_names))}

    local_net = 0
    for net in circuit.nets:
        if net.is_large:
            continue
        entries = []
        for ref in net.members:
            if isinstance(ref, CompPin) and ref.comp in comp_local:
                entries.append((0, comp_local[ref.comp], ref.pin))
            elif isinstance(ref, IoPin) and ref.name in io_local:
                entries.append((1, io_local[ref.name], 0))
        pins_here = len(entries)
        for pos in vpin_of_net.get(net.id, []):
            entries.append((2, len(fixed_x), 0))
            fixed_x.append(pos[0])
            fixed_y.append(pos[1])
        if pins_here == 0 or len(entries) < 2:
            # nothing movable or nothing to pull toward; drop the trailing
            # fixed points we just appended
            while entries and entries[-1][0] == 2:
                entries.pop()
                fixed_x.pop()
                fixed_y.pop()
            continue
        for mk, a, b in entries:
            mem_kind.append(mk)
            mem_a.append(a)
            mem_b.append(b)
            if mk == 0 and local_net not in comp_nets[a][-1:]:
                comp_nets[a].append(local_net)
            elif mk == 1 and local_net not in io_nets[a][-1:]:
                io_nets[a].append(local_net)
        net_ptr.append(len(mem_kind))
        local_net += 1

    for d in (comp_nets, io_nets):
        for k in d:
            d[k] = sorted(set(d[k]))

    n_cand = len(phys_ids)
    cand_pin_x = np.empty((n_cand, 3), dtype=np.float64)
    cand_pin_y = np.empty((n_cand, 3), dtype=np.float64)
    cand_cx = np.empty(n_cand, dtype=np.float64)
    cand_cy = np.empty(n_cand, dtype=np.float64)
    cand_kind = np.empty(n_cand, dtype=np.int64)
    for local, pid in enumerate(phys_ids):
        pc = layout.components[pid]
        pts = pin_positions(pc)
        for k in range(3):
            cand_pin_x[local, k] = pts[k][0]
            cand_pin_y[local, k] = pts[k][1]
        cand_cx[local] = pc.center[0]
        cand_cy[local] = pc.center[1]
        cand_kind[local] = 0 if pc.kind is Kind.PMOS else 1

    comp_kind = np.array(
        [0 if circuit.components[cid].kind is Kind.PMOS else 1 for cid in comp_ids],
        dtype=np.int64,
    )

    # per-type spatial buckets over the candidate region (cell = mean pitch)
    cell = layout.mean_pitch
    gx0 = float(cand_cx.min()) - 1e-9 if n_cand else 0.0
    gy0 = float(cand_cy.min()) - 1e-9 if n_cand else 0.0
    ncx = max(int((cand_cx.max() - gx0) / cell) + 1, 1) if n_cand else 1
    ncy = max(int((cand_cy.max() - gy0) / cell) + 1, 1) if n_cand else 1
    n_cells = ncx * ncy
    bstart = np.zeros((2, n_cells + 1), dtype=np.int64)
    order: list[list[int]] = [[], []]
    cells_of = [[] for _ in range(2)]
    for t in (0, 1):
        items = [i for i in range(n_cand) if cand_kind[i] == t]
        keyed = sorted(
            items,
            key=lambda i: (
                int((cand_cy[i] - gy0) / cell) * ncx + int((cand_cx[i] - gx0) / cell),
                i,
            ),
        )
        order[t] = keyed
        cells_of[t] = [
            int((cand_cy[i] - gy0) / cell) * ncx + int((cand_cx[i] - gx0) / cell) for i in keyed
        ]
    bitems = np.array(order[0] + order[1], dtype=np.int64)
    type_off = np.array([0, len(order[0]), len(order[0]) + len(order[1])], dtype=np.int64)
    for t in (0, 1):
        base = type_off[t]
        counts = np.zeros(n_cells, dtype=np.int64)
        for c in cells_of[t]:
            counts[c] += 1
        bstart[t, 0] = base
        np.cumsum(counts, out=counts)
        bstart[t, 1:] = base + counts

    slot_x = np.array([layout.io_slots[s][0] for s in slot_ids], dtype=np.float64)
    slot_y = np.array([layout.io_slots[s][1] for s in slot_ids], dtype=np.float64)

    def csr(d, n):
        ptr = [0]
        flat: list[int] = []
        for i in range(n):
            flat.extend(d[i])
            ptr.append(len(flat))
        return (
            np.array(ptr, dtype=np.int64),
            np.array(flat, dtype=np.int64) if flat else np.zeros(0, dtype=np.int64),
        )

    comp_nets_ptr, comp_nets_flat = csr(comp_nets, len(comp_ids))
    io_nets_ptr, io_nets_flat = csr(io_nets, len(io_names))

    return {
        "net_ptr": np.array(net_ptr, dtype=np.int64),
        "mem_kind": np.array(mem_kind, dtype=np.int64) if mem_kind else np.zeros(0, dtype=np.int64),
        "mem_a": np.array(mem_a, dtype=np.int64) if mem_a else np.zeros(0, dtype=np.int64),
        "mem_b": np.array(mem_b, dtype=np.int64) if mem_b else np.zeros(0, dtype=np.int64),
        "fixed_x": np.array(fixed_x, dtype=np.float64) if fixed_x else np.zeros(0),
        "fixed_y": np.array(fixed_y, dtype=np.float64) if fixed_y else np.zeros(0),
        "comp_nets_ptr": comp_nets_ptr,
        "comp_nets": comp_nets_flat,
        "io_nets_ptr": io_nets_ptr,
        "io_nets": io_nets_flat,
        "cand_pin_x": cand_pin_x,
        "cand_pin_y": cand_pin_y,
        "cand_cx": cand_cx,
        "cand_cy": cand_cy,
        "comp_kind": comp_kind,
        "slot_x": slot_x,
        "slot_y": slot_y,
        "bstart": bstart,
        "bitems": bitems,
        "type_off": type_off,
        "grid_x0": gx0,
        "grid_y0": gy0,
        "cell": cell,
        "ncx": ncx,
        "ncy": ncy,
    }


def slots_in_rect(layout: PhysicalLayout, rect, is_edge_block: dict | None = None) -> list[int]:
    x, y, w, h = rect
    eps = 1e-9
    out = []
    for s, (sx, sy) in enumerate(layout.io_slots):
        if x - eps <= sx <= x + w + eps and y - eps <= sy <= y + h + eps:
            out.append(s)
    return out


def assign_slots_to_blocks(layout: PhysicalLayout, floorplan: Floorplan) -> dict[int, int]:
    """Slot index -> owning block (ties to the lowest block id)."""
    owner: dict[int, int] = {}
    eps = 1e-9
    for s, (sx, sy) in enumerate(layout.io_slots):
        for b in sorted(floorplan.rects):
            x, y, w, h = floorplan.rects[b]
            if x - eps <= sx <= x + w + eps and y - eps <= sy <= y + h + eps:
                owner[s] = b
                break
    return owner


def assign_io_to_blocks(
    circuit: LogicalCircuit,
    partition: PartitionResult,
    layout: PhysicalLayout,
    floorplan: Floorplan,
) -> dict[str, int]:
    """I/O pin name -> block that will place it.

    Preference order: the boundary-touching block holding the most of the
    pin's net, then any block with free slot capacity.  Capacity-checked so
    every pin lands in a block that still has a slot for it.
    """
    slot_owner = assign_slots_to_blocks(layout, floorplan)
    capacity: dict[int, int] = {b: 0 for b in floorplan.rects}
    for s, b in slot_owner.items():
        capacity[b] += 1
    net_of = circuit.net_of_pin()
    out: dict[str, int] = {}
    for name in circuit.io_pins:
        net = circuit.nets[net_of[IoPin(name)]]
        counts: dict[int, int] = {}
        for ref in net.members:
            if isinstance(ref, CompPin):
                b = partition.block_of[ref.comp]
                counts[b] = counts.get(b, 0) + 1
        ranked = sorted(
            (b for b in capacity if capacity[b] > 0),
            key=lambda b: (-counts.get(b, 0), b),
        )
        if not ranked:
            raise PlacementError("no block has free io slot capacity")
        out[name] = ranked[0]
        capacity[ranked[0]] -= 1
    return out


def place_blocks(
    circuit: LogicalCircuit,
    layout: PhysicalLayout,
    partition: PartitionResult,
    floorplan: Floorplan,
    vpins: Iterable[VirtualPin] = (),
    seed: int = 0,
    jobs: int = 0,
    iters_scale: float = 1.0,
    metric: str = "manhattan",
    check_every: int = 0,
) -> tuple[Placement, dict[int, PlaceStats]]:
    """Place every block, concurrently when ``jobs`` > 1, and merge."""
    vpins = set(vpins)
    slot_owner = assign_slots_to_blocks(layout, floorplan)
    io_block = assign_io_to_blocks(circuit, partition, layout, floorplan)

    block_args = []
    for b in range(partition.n_blocks):
        rect = floorplan.rects[b]
        comp_ids = [c.id for c in circuit.components if partition.block_of[c.id] == b]
        io_names = [n for n in circuit.io_pins if io_block[n] == b]
        phys_ids = [
            p.id
            for p in layout.components
            if rect[0] <= p.center[0] < rect[0] + rect[2]
            and rect[1] <= p.center[1] < rect[1] + rect[3]
        ]
        slot_ids = [s for s, ob in slot_owner.items() if ob == b]
        bv = [vp for vp in vpins if vp.block == b]
        block_args.append((b, comp_ids, io_names, phys_ids, slot_ids, bv, rect))

    def run(args):
        b, comp_ids, io_names, phys_ids, slot_ids, bv, rect = args
        return b, place_sa(
            circuit,
            layout,
            comp_ids=comp_ids,
            io_names=io_names,
            phys_ids=phys_ids,
            slot_ids=slot_ids,
            vpins=bv,
            seed=_kernels.derive_stream(seed, b),
            metric=metric,
            iters_scale=iters_scale,
            check_every=check_every,
            region_diag=math.hypot(rect[2], rect[3]),
        )

    results: dict[int, tuple[Placement, PlaceStats]] = {}
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for b, res in pool.map(run, block_args):
                results[b] = res
    else:
        for args in block_args:
            b, res = run(args)
            results[b] = res

    merged = Placement()
    stats: dict[int, PlaceStats] = {}
    for b in sorted(results):
        frag, st = results[b]
        merged.comp_map.update(frag.comp_map)
        merged.io_map.update(frag.io_map)
        stats[b] = st
    merged.validate(circuit, layout)
    return merged, stats
