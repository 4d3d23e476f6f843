"""Multi-way Fiduccia-Mattheyses circuit partitioning.

A net spanning k blocks costs k-1, so the objective rewards both fewer cut
nets and cut nets touching fewer blocks.  ``semantic_prepartition`` first
groups components by their module tags and then partitions each group,
recording the parent module of every block for two-level floorplanning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import CompPin, LogicalCircuit


class PartitionError(RuntimeError):
    pass


@dataclass
class PartitionResult:
    block_of: list[int]
    n_blocks: int
    balance_tolerance: float = 0.02
    block_module: Optional[dict[int, str]] = None

    def block_sizes(self) -> list[int]:
        sizes = [0] * self.n_blocks
        for b in self.block_of:
            sizes[b] += 1
        return sizes

    def validate(self) -> None:
        n = len(self.block_of)
        lo, hi = balance_bounds(n, self.n_blocks, self.balance_tolerance)
        for b, size in enumerate(self.block_sizes()):
            if not (lo <= size <= hi):
                raise PartitionError(f"block {b} size {size} outside [{lo}, {hi}]")


def balance_bounds(n: int, n_blocks: int, tolerance: float) -> tuple[int, int]:
    target = n / n_blocks
    return math.floor((1 - tolerance) * target), math.ceil((1 + tolerance) * target)


def comp_nets(circuit: LogicalCircuit) -> list[list[int]]:
    """Nets as lists of distinct component ids (I/O pins span no block)."""
    out = []
    for net in circuit.nets:
        seen: dict[int, None] = {}
        for ref in net.members:
            if isinstance(ref, CompPin):
                seen.setdefault(ref.comp, None)
        out.append(list(seen))
    return out


def cut_cost(circuit: LogicalCircuit, part: PartitionResult) -> int:
    """Sum over nets of (distinct blocks spanned - 1)."""
    total = 0
    for members in comp_nets(circuit):
        blocks = {part.block_of[c] for c in members}
        if len(blocks) > 1:
            total += len(blocks) - 1
    return total


def _cut_cost_vertices(nets: Sequence[Sequence[int]], block_of: Sequence[int]) -> int:
    total = 0
    for members in nets:
        blocks = {block_of[v] for v in members}
        if len(blocks) > 1:
            total += len(blocks) - 1
    return total


class _GainBuckets:
    """Gain-indexed buckets of candidate (vertex, target) moves.

    Selection scans from the highest gain downward; within a bucket the most
    recently inserted feasible move wins (classic LIFO tie-break).
    """

    def __init__(self):
        self.buckets: dict[int, dict[tuple[int, int], None]] = {}
        self.max_gain: int | None = None

    def insert(self, gain: int, move: tuple[int, int]) -> None:
        self.buckets.setdefault(gain, {})[move] = None
        if self.max_gain is None or gain > self.max_gain:
            self.max_gain = gain

    def remove(self, gain: int, move: tuple[int, int]) -> None:
        bucket = self.buckets.get(gain)
        if bucket is not None:
            bucket.pop(move, None)
            if not bucket:
                del self.buckets[gain]

    def best_feasible(self, feasible) -> tuple[int, tuple[int, int]] | None:
        gains = sorted(self.buckets, reverse=True)
        for g in gains:
            for move in reversed(self.buckets[g]):
                if feasible(move):
                    return g, move
        return None


def _fm_core(
    n: int,
    nets: list[list[int]],
    n_blocks: int,
    rng: np.random.Generator,
    tolerance: float,
    max_passes: int = 24,
    check: bool = False,
) -> list[int]:
    lo, hi = balance_bounds(n, n_blocks, tolerance)
    if n_blocks * lo > n or n_blocks * hi < n:
        raise PartitionError(f"balance infeasible: n={n}, B={n_blocks}, tol={tolerance}")

    # random balanced start: shuffle then deal round-robin
    order = list(rng.permutation(n))
    block_of = [0] * n
    for i, v in enumerate(order):
        block_of[v] = i % n_blocks
    sizes = [0] * n_blocks
    for b in block_of:
        sizes[b] += 1

    vert_nets: list[list[int]] = [[] for _ in range(n)]
    for ni, members in enumerate(nets):
        if len(members) < 2:
            continue
        for v in members:
            vert_nets[v].append(ni)
    occ = np.zeros((len(nets), n_blocks), dtype=np.int64)
    for ni, members in enumerate(nets):
        for v in members:
            occ[ni, block_of[v]] += 1

    cost = _cut_cost_vertices(nets, block_of)

    def gains_of(v: int) -> list[int]:
        src = block_of[v]
        leave = sum(1 for ni in vert_nets[v] if occ[ni, src] == 1)
        out = []
        for t in range(n_blocks):
            if t == src:
                out.append(-(10**9))
                continue
            enter = sum(1 for ni in vert_nets[v] if occ[ni, t] == 0)
            out.append(leave - enter)
        return out

    for _ in range(max_passes):
        pass_start_cost = cost
        locked = [False] * n
        buckets = _GainBuckets()
        entry_gains: list[list[int] | None] = [None] * n
        for v in range(n):
            g = gains_of(v)
            entry_gains[v] = g
            for t in range(n_blocks):
                if t != block_of[v]:
                    buckets.insert(g[t], (v, t))

        trail: list[tuple[int, int, int]] = []  # (vertex, from, to)
        best_cost, best_len = cost, 0

        def feasible(move: tuple[int, int]) -> bool:
            v, t = move
            return sizes[block_of[v]] - 1 >= lo and sizes[t] + 1 <= hi

        while True:
            picked = buckets.best_feasible(feasible)
            if picked is None:
                break
            gain, (v, t) = picked
            s = block_of[v]
            # retire all of v's candidate moves
            for tt in range(n_blocks):
                if tt != s:
                    buckets.remove(entry_gains[v][tt], (v, tt))
            locked[v] = True

            changed: set[int] = set()
            for ni in vert_nets[v]:
                before_s, before_t = occ[ni, s], occ[ni, t]
                occ[ni, s] -= 1
                occ[ni, t] += 1
                # gains of a net's vertices change only when occupancy crosses 0/1/2
                if before_s <= 2 or before_t <= 1:
                    for u in nets[ni]:
                        if not locked[u]:
                            changed.add(u)
            block_of[v] = t
            sizes[s] -= 1
            sizes[t] += 1
            cost -= gain
            trail.append((v, s, t))
            if cost < best_cost:
                best_cost, best_len = cost, len(trail)

            for u in changed:
                old = entry_gains[u]
                new = gains_of(u)
                su = block_of[u]
                for tt in range(n_blocks):
                    if tt == su:
                        continue
                    if old[tt] != new[tt]:
                        buckets.remove(old[tt], (u, tt))
                        buckets.insert(new[tt], (u, tt))
                entry_gains[u] = new

        # roll back past the best prefix
        for v, s, t in reversed(trail[best_len:]):
            block_of[v] = s
            sizes[t] -= 1
            sizes[s] += 1
            for ni in vert_nets[v]:
                occ[ni, t] -= 1
                occ[ni, s] += 1
        cost = best_cost

        if check:
            actual = _cut_cost_vertices(nets, block_of)
            if actual != cost:
                raise AssertionError(f"incremental cost {cost} != recomputed {actual}")
            if cost > pass_start_cost:
                raise AssertionError("FM pass ended worse than it started")
        if best_cost >= pass_start_cost:
            break
    return block_of


def fm_partition(
    circuit: LogicalCircuit,
    n_blocks: int,
    seed: int = 0,
    tolerance: float = 0.02,
    check: bool = False,
) -> PartitionResult:
    """Balanced multi-way FM partition, deterministic for a fixed seed.

    With ``check`` the incrementally tracked cut cost is verified against a
    full recomputation after every pass.
    """
    if n_blocks < 2:
        return PartitionResult([0] * circuit.n_components, max(n_blocks, 1), tolerance)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xFA]))
    nets = comp_nets(circuit)
    block_of = _fm_core(circuit.n_components, nets, n_blocks, rng, tolerance, check=check)
    result = PartitionResult(block_of, n_blocks, tolerance)
    result.validate()
    return result


def apportion(sizes: list[int], total: int) -> list[int]:
    """Largest-remainder apportionment of ``total`` seats, at least 1 each."""
    n = sum(sizes)
    quotas = [total * s / n for s in sizes]
    seats = [math.floor(q) for q in quotas]
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - seats[i]), i))
    k = 0
    while sum(seats) < total:
        seats[order[k % len(order)]] += 1
        k += 1
    for i in range(len(seats)):
        while seats[i] == 0:
            donor = max(range(len(seats)), key=lambda j: seats[j])
            seats[donor] -= 1
            seats[i] += 1
    return seats


def semantic_prepartition(
    circuit: LogicalCircuit,
    total_blocks: int,
    seed: int = 0,
    tolerance: float = 0.02,
    min_coverage: float = 0.9,
    check: bool = False,
) -> PartitionResult:
    """Two-level partition: group components by module tag, then FM each group
    into a proportional share of ``total_blocks``.

    Components without a tag join the tagged group they share the most net
    memberships with.  Falls back to plain FM (with a warning) when fewer than
    ``min_coverage`` of components carry tags.
    """
    n = circuit.n_components
    tags: list[str] = []
    group_of: list[Optional[str]] = [None] * n
    for comp in circuit.components:
        if comp.module_tag:
            if comp.module_tag not in tags:
                tags.append(comp.module_tag)
            group_of[comp.id] = comp.module_tag
    coverage = sum(1 for g in group_of if g is not None) / n
    if not tags or coverage < min_coverage:
        warnings.warn(
            f"module tags cover {coverage:.0%} of components (< {min_coverage:.0%}); "
            "falling back to tag-blind partitioning"
        )
        return fm_partition(circuit, total_blocks, seed, tolerance, check=check)

    nets = comp_nets(circuit)
    untagged = [v for v in range(n) if group_of[v] is None]
    if untagged:
        vert_nets: list[list[int]] = [[] for _ in range(n)]
        for ni, members in enumerate(nets):
            for v in members:
                vert_nets[v].append(ni)
        sizes0 = {t: sum(1 for g in group_of if g == t) for t in tags}
        for v in untagged:
            score = {t: 0 for t in tags}
            for ni in vert_nets[v]:
                for u in nets[ni]:
                    if group_of[u] is not None:
                        score[group_of[u]] += 1
            group_of[v] = max(tags, key=lambda t: (score[t], sizes0[t], -tags.index(t)))

    group_members = {t: [v for v in range(n) if group_of[v] == t] for t in tags}
    group_sizes = [len(group_members[t]) for t in tags]
    shares = apportion(group_sizes, total_blocks)
    shares = [min(s, gs) for s, gs in zip(shares, group_sizes)]
    while sum(shares) < total_blocks:  # reclaim seats clamped away by tiny groups
        grow = max(
            range(len(tags)),
            key=lambda i: (group_sizes[i] / max(shares[i], 1), -i),
        )
        if shares[grow] >= group_sizes[grow]:
            break
        shares[grow] += 1

    block_of = [-1] * n
    block_module: dict[int, str] = {}
    next_block = 0
    for gi, tag in enumerate(tags):
        members = group_members[tag]
        b_g = shares[gi]
        local_index = {v: i for i, v in enumerate(members)}
        if b_g <= 1:
            local = [0] * len(members)
        else:
            local_nets = []
            for net in nets:
                inside = [local_index[v] for v in net if v in local_index]
                if len(inside) >= 2:
                    local_nets.append(inside)
            rng = np.random.default_rng(np.random.SeedSequence([seed, 0xFA, gi]))
            local = _fm_core(len(members), local_nets, b_g, rng, tolerance, check=check)
        for v, b in zip(members, local):
            block_of[v] = next_block + b
        for b in range(b_g):
            block_module[next_block + b] = tag
        next_block += b_g

    result = PartitionResult(block_of, next_block, tolerance, block_module)
    for b, size in enumerate(result.block_sizes()):
        if size == 0:
            raise PartitionError(f"semantic partition produced empty block {b}")
    return result
