"""Stochastic layout generation: simulates imprecise deposition of component
modules onto an approximate mesh.

For a circuit with N logical components the layout holds 2N physical
components (2x redundancy per transistor type) on a ceil(sqrt(2N))-square
mesh of pitch rho inside a substrate of side sqrt(2N) * rho.  Positions are
jittered per axis and orientations are uniform.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    Kind,
    LogicalCircuit,
    PhysicalComponent,
    PhysicalLayout,
    component_bbox,
)


class DepositionError(RuntimeError):
    pass


def _quant(x: float, decimals: int) -> float:
    return float(round(x, decimals))


def io_slot_count(circuit: LogicalCircuit) -> int:
    return max(2 * circuit.n_io, 4 * math.ceil(math.sqrt(circuit.n_components)))


def boundary_slots(width: float, height: float, count: int) -> list[tuple[float, float]]:
    """``count`` points evenly spaced along the substrate boundary, starting on
    the bottom edge and walking counter-clockwise."""
    perimeter = 2 * (width + height)
    slots = []
    for k in range(count):
        t = (k + 0.5) * perimeter / count
        if t < width:
            x, y = t, 0.0
        elif t < width + height:
            x, y = width, t - width
        elif t < 2 * width + height:
            x, y = width - (t - width - height), height
        else:
            x, y = 0.0, height - (t - 2 * width - height)
        # keep the on-edge coordinate exact so slots stay on the boundary
        if y in (0.0, height):
            slots.append((_quant(x, 3), y))
        else:
            slots.append((x, _quant(y, 3)))
    return slots


def generate_layout(
    circuit: LogicalCircuit,
    rho: float = 10.0,
    jitter: float = 0.3,
    seed: int = 0,
    iid_types: bool = False,
    max_retries: int = 64,
) -> PhysicalLayout:
    """Deposit 2x redundant components for ``circuit`` onto a jittered mesh.

    Deterministic for a fixed seed.  With ``iid_types`` each component's type
    is drawn independently instead of shuffling fixed per-type counts (fixed
    counts guarantee a type-matched total placement exists).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not (0 <= jitter < 1):
        raise ValueError("jitter must be in [0, 1)")
    if circuit.n_components == 0:
        raise ValueError("circuit is empty")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_phys = 2 * circuit.n_components
    side = _quant(math.sqrt(n_phys) * rho, 3)
    mesh = math.ceil(math.sqrt(n_phys))
    margin = (side - (mesh - 1) * rho) / 2.0

    if iid_types:
        p_frac = circuit.count_kind(Kind.PMOS) / circuit.n_components
        kinds = [Kind.PMOS if rng.random() < p_frac else Kind.NMOS for _ in range(n_phys)]
    else:
        kinds = [Kind.PMOS] * (2 * circuit.count_kind(Kind.PMOS)) + [
            Kind.NMOS
        ] * (2 * circuit.count_kind(Kind.NMOS))
        rng.shuffle(kinds)  # type: ignore[arg-type]

    cells = [(i, j) for j in range(mesh) for i in range(mesh)]
    order = rng.permutation(len(cells))[:n_phys]

    comps: list[PhysicalComponent] = []
    occupied: dict[tuple[int, int], list[int]] = {}
    half_span = jitter * rho / 2.0
    for cid in range(n_phys):
        ci, cj = cells[order[cid]]
        cx = margin + ci * rho
        cy = margin + cj * rho
        placed = None
        for _ in range(max_retries):
            theta = _quant(rng.random() * 2 * math.pi, 6) % (2 * math.pi)
            dx = rng.uniform(-half_span, half_span) if jitter > 0 else 0.0
            dy = rng.uniform(-half_span, half_span) if jitter > 0 else 0.0
            # clamp so the padded footprint stays strictly inside the substrate
            # and leaves a boundary channel clear for I/O wiring (but never
            # tighter than the mesh margin, so jitter=0 stays on cell centres)
            probe = PhysicalComponent(cid, kinds[cid], (0.0, 0.0), theta)
            ext = max(abs(v) for v in component_bbox(probe))
            lo = max(ext + 2e-3, min(rho / 8.0, margin))
            hi = side - lo
            x = _quant(min(max(cx + dx, lo), hi), 3)
            y = _quant(min(max(cy + dy, lo), hi), 3)
            cand = PhysicalComponent(cid, kinds[cid], (x, y), theta)
            box = component_bbox(cand)
            clash = False
            for ni in range(ci - 1, ci + 2):
                for nj in range(cj - 1, cj + 2):
                    for other_id in occupied.get((ni, nj), ()):
                        ob = component_bbox(comps[other_id])
                        if box[0] < ob[2] and ob[0] < box[2] and box[1] < ob[3] and ob[1] < box[3]:
                            clash = True
            if not clash:
                placed = cand
                break
        if placed is None:
            raise DepositionError(
                f"cell ({ci},{cj}): cannot satisfy non-overlap after {max_retries} retries "
                f"(jitter={jitter})"
            )
        comps.append(placed)
        occupied.setdefault((ci, cj), []).append(cid)

    slots = boundary_slots(side, side, io_slot_count(circuit))
    layout = PhysicalLayout(side, side, comps, slots, rho)
    layout.validate()
    return layout
