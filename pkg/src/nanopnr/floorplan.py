"""Slicing-tree floorplanning: assigns partition blocks to rectangular
substrate regions with area proportional to block size.

A slicing tree tiles the substrate exactly by construction.  Simulated
annealing explores leaf swaps, cut toggles and small re-splits of a cut's
area ratio, minimizing the half-perimeter wirelength between the rectangle
centres touched by each inter-block net, while rejecting candidates that
leave any block without enough deposited components of each type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Kind, LogicalCircuit, PhysicalLayout
from .partition import PartitionResult, comp_nets

Rect = tuple[float, float, float, float]  # x, y, w, h

AREA_TOLERANCE = 0.01   # max relative deviation of a block's area share
RATIO_STEP = 0.05       # re-split move nudges a cut ratio by +/-5%


class FloorplanError(RuntimeError):
    pass


@dataclass
class SliceNode:
    """Slicing-tree node: a leaf holds a block id, an inner node a cut."""

    block: Optional[int] = None
    cut: str = "V"              # 'V' splits width, 'H' splits height
    ratio_bias: float = 1.0     # multiplier on the size-proportional split
    left: Optional["SliceNode"] = None
    right: Optional["SliceNode"] = None
    weight: float = 0.0         # subtree share of total component count

    @property
    def is_leaf(self) -> bool:
        return self.block is not None

    def clone(self) -> "SliceNode":
        if self.is_leaf:
            return SliceNode(block=self.block, weight=self.weight)
        return SliceNode(
            cut=self.cut,
            ratio_bias=self.ratio_bias,
            left=self.left.clone(),
            right=self.right.clone(),
            weight=self.weight,
        )

    def leaves(self) -> list["SliceNode"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()

    def inner_nodes(self) -> list["SliceNode"]:
        if self.is_leaf:
            return []
        return [self] + self.left.inner_nodes() + self.right.inner_nodes()


@dataclass
class Floorplan:
    rects: dict[int, Rect]
    tree: Optional[SliceNode]

    def center(self, block: int) -> tuple[float, float]:
        x, y, w, h = self.rects[block]
        return (x + w / 2.0, y + h / 2.0)


def refresh_weights(node: SliceNode, share_of: dict[int, float]) -> float:
    if node.is_leaf:
        node.weight = share_of[node.block]
    else:
        node.weight = refresh_weights(node.left, share_of) + refresh_weights(node.right, share_of)
    return node.weight


def evaluate_tree(node: SliceNode, rect: Rect, out: dict[int, Rect]) -> None:
    if node.is_leaf:
        out[node.block] = rect
        return
    x, y, w, h = rect
    frac = node.left.weight / node.weight * node.ratio_bias
    frac = min(max(frac, 0.01), 0.99)
    if node.cut == "V":
        lw = w * frac
        evaluate_tree(node.left, (x, y, lw, h), out)
        evaluate_tree(node.right, (x + lw, y, w - lw, h), out)
    else:
        lh = h * frac
        evaluate_tree(node.left, (x, y, w, lh), out)
        evaluate_tree(node.right, (x, y + lh, w, h - lh), out)


def build_tree(blocks: list[int], share_of: dict[int, float], depth: int = 0) -> SliceNode:
    """Balanced initial tree: split the block list at the most even cumulative
    share, alternating cut directions by depth."""
    if len(blocks) == 1:
        return SliceNode(block=blocks[0], weight=share_of[blocks[0]])
    total = sum(share_of[b] for b in blocks)
    best_i, best_dev = 1, math.inf
    acc = 0.0
    for i in range(1, len(blocks)):
        acc += share_of[blocks[i - 1]]
        dev = abs(acc - total / 2)
        if dev < best_dev:
            best_i, best_dev = i, dev
    node = SliceNode(cut="V" if depth % 2 == 0 else "H")
    node.left = build_tree(blocks[:best_i], share_of, depth + 1)
    node.right = build_tree(blocks[best_i:], share_of, depth + 1)
    node.weight = node.left.weight + node.right.weight
    return node


def areas_proportional(fp: Floorplan, share_of: dict[int, float], substrate_area: float) -> bool:
    for b, (_, _, w, h) in fp.rects.items():
        share = (w * h) / substrate_area
        if abs(share - share_of[b]) > AREA_TOLERANCE * share_of[b] + 1e-12:
            return False
    return True


def check_feasible(
    fp: Floorplan,
    partition: PartitionResult,
    layout: PhysicalLayout,
    circuit: LogicalCircuit,
    margin: float = 0.1,
) -> bool:
    """True iff every block's rectangle holds at least (1+margin) times the
    deposited components it needs of each transistor type."""
    need = {(b, k): 0 for b in range(partition.n_blocks) for k in Kind}
    for comp in circuit.components:
        need[(partition.block_of[comp.id], comp.kind)] += 1
    have = {(b, k): 0 for b in range(partition.n_blocks) for k in Kind}
    rects = [(b, fp.rects[b]) for b in sorted(fp.rects)]
    for pc in layout.components:
        cx, cy = pc.center
        for b, (x, y, w, h) in rects:
            if x <= cx < x + w and y <= cy < y + h:
                have[(b, pc.kind)] += 1
                break
    for key, needed in need.items():
        threshold = math.ceil((1 + margin) * needed - 1e-9)
        if have[key] < threshold:
            return False
    return True


def _net_block_sets(circuit: LogicalCircuit, block_of: list[int]) -> list[tuple[int, ...]]:
    sets = []
    for members in comp_nets(circuit):
        blocks = {block_of[c] for c in members}
        if len(blocks) > 1:
            sets.append(tuple(sorted(blocks)))
    return sets


def _hpwl(points: list[tuple[float, float]]) -> float:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def estimate_interblock_wl(
    circuit: LogicalCircuit, partition: PartitionResult, fp: Floorplan
) -> float:
    """Half-perimeter wirelength over the rect centres of each inter-block net."""
    return _estimate_from_sets(_net_block_sets(circuit, partition.block_of), fp)


def _estimate_from_sets(net_blocks: list[tuple[int, ...]], fp: Floorplan) -> float:
    centers = {b: fp.center(b) for b in fp.rects}
    return sum(_hpwl([centers[b] for b in blocks]) for blocks in net_blocks)


def _anneal(
    tree: SliceNode,
    substrate: Rect,
    share_of: dict[int, float],
    net_blocks: list[tuple[int, ...]],
    is_valid,
    rng: np.random.Generator,
    iterations: int,
) -> tuple[SliceNode, Floorplan, float]:
    def realize(t: SliceNode) -> Floorplan:
        rects: dict[int, Rect] = {}
        evaluate_tree(t, substrate, rects)
        return Floorplan(rects, t)

    def propose(t: SliceNode) -> SliceNode:
        cand = t.clone()
        leaves = cand.leaves()
        inner = cand.inner_nodes()
        kind = rng.integers(3)
        if kind == 0 and len(leaves) >= 2:
            i, j = rng.choice(len(leaves), size=2, replace=False)
            leaves[i].block, leaves[j].block = leaves[j].block, leaves[i].block
            refresh_weights(cand, share_of)
        elif kind == 1 and inner:
            node = inner[rng.integers(len(inner))]
            node.cut = "H" if node.cut == "V" else "V"
        elif inner:
            node = inner[rng.integers(len(inner))]
            direction = 1 + RATIO_STEP if rng.random() < 0.5 else 1 - RATIO_STEP
            node.ratio_bias = min(max(node.ratio_bias * direction, 0.8), 1.25)
        return cand

    current = tree
    current_fp = realize(current)
    current_cost = _estimate_from_sets(net_blocks, current_fp)
    best, best_fp, best_cost = current, current_fp, current_cost

    # temperature from the spread of sampled move costs
    deltas = []
    for _ in range(100):
        cand = propose(current)
        fp = realize(cand)
        if is_valid(fp):
            deltas.append(abs(_estimate_from_sets(net_blocks, fp) - current_cost))
    t0 = 20.0 * (sum(deltas) / len(deltas)) if deltas and sum(deltas) > 0 else 1.0
    eps = 1e-3 * t0
    k_t = (eps / t0) ** (1.0 / max(iterations, 1))

    temp = t0
    for _ in range(iterations):
        cand = propose(current)
        fp = realize(cand)
        if is_valid(fp):
            cost = _estimate_from_sets(net_blocks, fp)
            if cost < current_cost or rng.random() < math.exp((current_cost - cost) / max(temp, 1e-300)):
                current, current_fp, current_cost = cand, fp, cost
                if cost < best_cost:
                    best, best_fp, best_cost = cand, fp, cost
        temp *= k_t
    return best, best_fp, best_cost


def _single_level(
    circuit_shares: dict[int, float],
    net_blocks: list[tuple[int, ...]],
    substrate: Rect,
    validity,
    rng: np.random.Generator,
    restarts: int = 8,
) -> tuple[SliceNode, Floorplan]:
    blocks = sorted(circuit_shares)
    iterations = len(blocks) ** 2
    order = list(blocks)
    for attempt in range(restarts):
        tree = build_tree(order, circuit_shares)
        fp0 = Floorplan({}, tree)
        evaluate_tree(tree, substrate, fp0.rects)
        fp0.tree = tree
        if validity(fp0):
            best_tree, best_fp, _ = _anneal(
                tree, substrate, circuit_shares, net_blocks, validity, rng, iterations
            )
            return best_tree, best_fp
        order = [blocks[i] for i in rng.permutation(len(blocks))]
    raise FloorplanError(f"no feasible floorplan found within {restarts} restarts")


def floorplan_sa(
    circuit: LogicalCircuit,
    partition: PartitionResult,
    layout: PhysicalLayout,
    seed: int = 0,
    margin: float = 0.1,
) -> Floorplan:
    """SA floorplan of partition blocks; block rectangles tile the substrate.

    For semantic partitions the search runs twice: once over modules, then
    once per module over its blocks inside the module's rectangle.
    """
    if partition.n_blocks > 256:
        raise FloorplanError("block count above supported limit (256)")
    n = circuit.n_components
    sizes = partition.block_sizes()
    share_of = {b: sizes[b] / n for b in range(partition.n_blocks)}
    substrate: Rect = (0.0, 0.0, layout.width, layout.height)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF1]))
    area = layout.width * layout.height

    if not partition.block_module:
        net_blocks = _net_block_sets(circuit, partition.block_of)

        def valid_full(fp: Floorplan) -> bool:
            return areas_proportional(fp, share_of, area) and check_feasible(
                fp, partition, layout, circuit, margin
            )

        tree, fp = _single_level(share_of, net_blocks, substrate, valid_full, rng)
        return fp

    # two-level: modules first, then blocks within each module rectangle
    modules = sorted({m for m in partition.block_module.values()})
    mod_index = {m: i for i, m in enumerate(modules)}
    mod_of_block = {b: mod_index[partition.block_module[b]] for b in range(partition.n_blocks)}
    mod_sizes = [0] * len(modules)
    for b, s in enumerate(sizes):
        mod_sizes[mod_of_block[b]] += s
    mod_shares = {i: mod_sizes[i] / n for i in range(len(modules))}
    mod_block_of = [mod_of_block[partition.block_of[c]] for c in range(n)]
    mod_nets = _net_block_sets(circuit, mod_block_of)
    mod_partition = PartitionResult(mod_block_of, len(modules), 1.0)

    def mod_valid(fp: Floorplan) -> bool:
        return areas_proportional(fp, mod_shares, area) and check_feasible(
            fp, mod_partition, layout, circuit, margin
        )

    mod_tree, mod_fp = _single_level(mod_shares, mod_nets, substrate, mod_valid, rng)

    final_rects: dict[int, Rect] = {}
    sub_trees: dict[int, SliceNode] = {}
    for mi, module in enumerate(modules):
        blocks = [b for b in range(partition.n_blocks) if mod_of_block[b] == mi]
        mrect = mod_fp.rects[mi]
        if len(blocks) == 1:
            final_rects[blocks[0]] = mrect
            sub_trees[mi] = SliceNode(block=blocks[0], weight=share_of[blocks[0]])
            continue
        local_share = {b: share_of[b] / mod_shares[mi] for b in blocks}
        blockset = set(blocks)
        local_nets = []
        for blocks_of_net in _net_block_sets(circuit, partition.block_of):
            inside = tuple(b for b in blocks_of_net if b in blockset)
            if len(inside) > 1:
                local_nets.append(inside)

        def local_valid(fp: Floorplan, _blocks=tuple(blocks), _share=local_share, _mrect=mrect):
            marea = _mrect[2] * _mrect[3]
            if not areas_proportional(fp, _share, marea):
                return False
            return _feasible_subset(fp, partition, layout, circuit, _blocks, margin)

        sub_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF1, mi + 1]))
        sub_tree, sub_fp = _single_level(local_share, local_nets, mrect, local_valid, sub_rng)
        final_rects.update(sub_fp.rects)
        for leaf in sub_tree.leaves():
            leaf.weight = share_of[leaf.block]
        sub_trees[mi] = sub_tree

    # stitch module subtrees into one tree over real block ids
    for leaf in mod_tree.leaves():
        sub = sub_trees[leaf.block]
        leaf.block, leaf.cut = sub.block, sub.cut
        leaf.ratio_bias, leaf.left, leaf.right = sub.ratio_bias, sub.left, sub.right
        leaf.weight = sub.weight if sub.is_leaf else sub.left.weight + sub.right.weight
    refresh_weights(mod_tree, share_of)
    return Floorplan(final_rects, mod_tree)


def _feasible_subset(fp, partition, layout, circuit, blocks, margin: float = 0.1) -> bool:
    """Feasibility check restricted to the given block ids."""
    blockset = set(blocks)
    need = {(b, k): 0 for b in blocks for k in Kind}
    for comp in circuit.components:
        b = partition.block_of[comp.id]
        if b in blockset:
            need[(b, comp.kind)] += 1
    have = {(b, k): 0 for b in blocks for k in Kind}
    rect_items = [(b, fp.rects[b]) for b in sorted(fp.rects) if b in blockset]
    for pc in layout.components:
        cx, cy = pc.center
        for b, (x, y, w, h) in rect_items:
            if x <= cx < x + w and y <= cy < y + h:
                have[(b, pc.kind)] += 1
                break
    for key, needed in need.items():
        if have[key] < math.ceil((1 + margin) * needed - 1e-9):
            return False
    return True
