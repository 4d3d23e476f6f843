"""Numba-compiled hot loops: SA placement inner loop and grid path search.

All randomness comes from an explicit splitmix64 stream so results are
bit-reproducible across platforms and thread schedules.  Kernels release the
GIL; callers may run one kernel per circuit block concurrently as long as the
blocks own disjoint grid regions.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U64 = np.uint64
MASK64 = (1 << 64) - 1

# grid cell states (edge arrays eh/ev and vertex array occ share the scheme:
# >= 0 means "owned by that net")
FREE = -1
REMOVED = -2      # inside a component bounding box (edges) / blocked (vertices)
TEMP = -3         # pin stub edge, reconnected when its net routes
CROSSED = -3      # vertex hosting two insulated perpendicular wires


def derive_stream(seed: int, *keys: int) -> int:
    """Deterministic 64-bit stream id for (seed, keys...)."""
    x = seed & MASK64
    for k in keys:
        x = (x ^ (k & MASK64)) & MASK64
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        x = (z ^ (z >> 31)) & MASK64
    return x


@njit(cache=True, nogil=True, inline="always")
def _mix64(state):
    state[0] = state[0] + U64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def _rand01(state):
    return float(_mix64(state) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True, inline="always")
def _randbelow(state, n):
    # keep the result signed: uint64 leaking into arithmetic promotes to float64
    return np.int64(_mix64(state) % U64(n))


# ---------------------------------------------------------------------------
# placement
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _net_cost(
    net, net_ptr, mem_kind, mem_a, mem_b,
    assign_comp, assign_io,
    cand_pin_x, cand_pin_y, slot_x, slot_y, fixed_x, fixed_y,
    buf_x, buf_y, metric,
):
    k = 0
    for m in range(net_ptr[net], net_ptr[net + 1]):
        mk = mem_kind[m]
        if mk == 0:
            j = assign_comp[mem_a[m]]
            buf_x[k] = cand_pin_x[j, mem_b[m]]
            buf_y[k] = cand_pin_y[j, mem_b[m]]
        elif mk == 1:
            s = assign_io[mem_a[m]]
            buf_x[k] = slot_x[s]
            buf_y[k] = slot_y[s]
        else:
            buf_x[k] = fixed_x[mem_a[m]]
            buf_y[k] = fixed_y[mem_a[m]]
        k += 1
    if k < 2:
        return 0.0
    # Prim MST over the k gathered points
    in_tree = np.zeros(k, dtype=np.uint8)
    dist = np.empty(k, dtype=np.float64)
    in_tree[0] = 1
    for j in range(1, k):
        dx = abs(buf_x[0] - buf_x[j])
        dy = abs(buf_y[0] - buf_y[j])
        dist[j] = math.hypot(dx, dy) if metric == 1 else dx + dy
    total = 0.0
    for _ in range(k - 1):
        best = -1
        best_d = 1e300
        for j in range(k):
            if in_tree[j] == 0 and dist[j] < best_d:
                best = j
                best_d = dist[j]
        total += best_d
        in_tree[best] = 1
        for j in range(k):
            if in_tree[j] == 0:
                dx = abs(buf_x[best] - buf_x[j])
                dy = abs(buf_y[best] - buf_y[j])
                d = math.hypot(dx, dy) if metric == 1 else dx + dy
                if d < dist[j]:
                    dist[j] = d
    return total


@njit(cache=True, nogil=True)
def _pick_neighbor(
    state, x, y, d_n, exclude,
    cand_cx, cand_cy,
    bstart, bitems, type_lo, type_hi,
    grid_x0, grid_y0, cell, ncx, ncy, t,
):
    """Random candidate of type ``t`` within Euclidean ``d_n`` of (x, y);
    falls back to the nearest other candidate when sampling fails."""
    rc = int(d_n / cell) + 1
    jcx = int((x - grid_x0) / cell)
    jcy = int((y - grid_y0) / cell)
    d2 = d_n * d_n
    for _ in range(16):
        ccx = jcx + _randbelow(state, 2 * rc + 1) - rc
        ccy = jcy + _randbelow(state, 2 * rc + 1) - rc
        if ccx < 0 or ccx >= ncx or ccy < 0 or ccy >= ncy:
            continue
        c = ccy * ncx + ccx
        lo = bstart[t, c]
        hi = bstart[t, c + 1]
        if hi <= lo:
            continue
        pick = bitems[lo + _randbelow(state, hi - lo)]
        if pick == exclude:
            continue
        dx = cand_cx[pick] - x
        dy = cand_cy[pick] - y
        if dx * dx + dy * dy <= d2:
            return pick
    # fallback: nearest same-type candidate
    best = -1
    best_d = 1e300
    for idx in range(type_lo, type_hi):
        pick = bitems[idx]
        if pick == exclude:
            continue
        dx = cand_cx[pick] - x
        dy = cand_cy[pick] - y
        d = dx * dx + dy * dy
        if d < best_d:
            best = pick
            best_d = d
    return best


@njit(cache=True, nogil=True)
def place_sa_kernel(
    # net structure
    net_ptr, mem_kind, mem_a, mem_b, fixed_x, fixed_y,
    comp_nets_ptr, comp_nets, io_nets_ptr, io_nets,
    # candidates and slots
    cand_pin_x, cand_pin_y, cand_cx, cand_cy, comp_kind,
    slot_x, slot_y,
    bstart, bitems, type_off,
    grid_x0, grid_y0, cell, ncx, ncy,
    # state (mutated in place)
    assign_comp, owner, assign_io, slot_owner,
    # schedule
    t0, eps_in, t_n, d_max, d_min, t0_factor, metric, seed, check_every,
):
    """Anneal one block's assignment in place.

    Returns (final_cost, calibrated_t0, accepted_moves, max_incremental_error).
    The incremental error is the largest relative disagreement between the
    running cost and a from-scratch recomputation at ``check_every`` intervals.
    """
    n_comp = assign_comp.shape[0]
    n_io = assign_io.shape[0]
    n_nets = net_ptr.shape[0] - 1
    n_slots = slot_x.shape[0]

    state = np.empty(1, dtype=np.uint64)
    state[0] = U64(seed)

    buf_x = np.empty(64, dtype=np.float64)
    buf_y = np.empty(64, dtype=np.float64)
    net_cost = np.empty(n_nets, dtype=np.float64)
    total = 0.0
    for n in range(n_nets):
        net_cost[n] = _net_cost(
            n, net_ptr, mem_kind, mem_a, mem_b, assign_comp, assign_io,
            cand_pin_x, cand_pin_y, slot_x, slot_y, fixed_x, fixed_y,
            buf_x, buf_y, metric,
        )
        total += net_cost[n]

    aff = np.empty(8, dtype=np.int64)
    new_costs = np.empty(8, dtype=np.float64)
    slot_cand = np.empty(max(n_slots, 1), dtype=np.int64)

    # phase 0 samples |delta| for calibration without committing moves;
    # phase 1 is the annealing loop proper
    max_err = 0.0
    accepted = 0

    calibrating = t0 <= 0.0
    cal_sum = 0.0
    cal_cnt = 0
    n_entries = n_comp + n_io
    if calibrating:
        rounds = 100
    else:
        rounds = 0

    phase = 0
    it = 0
    temp = t0
    eps = 1e-3 * (t0 if t0 > 0 else 1.0)
    k_t = 1.0
    ln_t0 = 0.0
    ln_eps = 0.0

    while True:
        if phase == 0 and it >= rounds:
            # finish calibration, set up the schedule
            if calibrating:
                t0 = t0_factor * (cal_sum / cal_cnt) if cal_cnt > 0 and cal_sum > 0 else 1.0
            eps = eps_in if (not calibrating and eps_in > 0) else 1e-3 * t0
            k_t = (eps / t0) ** (1.0 / t_n)
            temp = t0
            ln_t0 = math.log(t0)
            ln_eps = math.log(eps)
            phase = 1
            it = 0
        if phase == 1 and it >= t_n:
            break

        if phase == 0:
            d_n = d_max
        else:
            lt = math.log(temp) if temp > 0 else ln_eps
            frac = (lt - ln_eps) / (ln_t0 - ln_eps)
            if frac < 0.0:
                frac = 0.0
            elif frac > 1.0:
                frac = 1.0
            d_n = d_min + (d_max - d_min) * frac

        # --- propose ---
        r = _randbelow(state, n_entries)
        kind = 0  # 0 none, 1 comp, 2 io
        mi = -1
        mj = -1
        mx = -1
        my = -1
        if r < n_comp:
            i = r
            j = assign_comp[i]
            t = comp_kind[i]
            y = _pick_neighbor(
                state, cand_cx[j], cand_cy[j], d_n, j,
                cand_cx, cand_cy, bstart, bitems, type_off[t], type_off[t + 1],
                grid_x0, grid_y0, cell, ncx, ncy, t,
            )
            if y >= 0:
                kind = 1
                mi = i
                mj = j
                my = y
                mx = owner[y]
        else:
            i = r - n_comp
            k = assign_io[i]
            # candidate slots within d_n (scan; slot counts are small)
            cnt = 0
            for s in range(n_slots):
                if s == k:
                    continue
                dx = slot_x[s] - slot_x[k]
                dy = slot_y[s] - slot_y[k]
                if dx * dx + dy * dy <= d_n * d_n:
                    slot_cand[cnt] = s
                    cnt += 1
            y = -1
            if cnt > 0:
                y = slot_cand[_randbelow(state, cnt)]
            else:
                best_d = 1e300
                for s in range(n_slots):
                    if s == k:
                        continue
                    dx = slot_x[s] - slot_x[k]
                    dy = slot_y[s] - slot_y[k]
                    d = dx * dx + dy * dy
                    if d < best_d:
                        y = s
                        best_d = d
            if y >= 0:
                kind = 2
                mi = i
                mj = k
                my = y
                mx = slot_owner[y]

        if kind == 0:
            if phase == 1:
                temp *= k_t
            it += 1
            continue

        # --- affected nets ---
        na = 0
        if kind == 1:
            for p in range(comp_nets_ptr[mi], comp_nets_ptr[mi + 1]):
                aff[na] = comp_nets[p]
                na += 1
            if mx >= 0:
                for p in range(comp_nets_ptr[mx], comp_nets_ptr[mx + 1]):
                    dup = False
                    for q in range(na):
                        if aff[q] == comp_nets[p]:
                            dup = True
                            break
                    if not dup:
                        aff[na] = comp_nets[p]
                        na += 1
        else:
            for p in range(io_nets_ptr[mi], io_nets_ptr[mi + 1]):
                aff[na] = io_nets[p]
                na += 1
            if mx >= 0:
                for p in range(io_nets_ptr[mx], io_nets_ptr[mx + 1]):
                    dup = False
                    for q in range(na):
                        if aff[q] == io_nets[p]:
                            dup = True
                            break
                    if not dup:
                        aff[na] = io_nets[p]
                        na += 1

        old_sum = 0.0
        for q in range(na):
            old_sum += net_cost[aff[q]]

        # --- apply ---
        if kind == 1:
            assign_comp[mi] = my
            owner[my] = mi
            if mx >= 0:
                assign_comp[mx] = mj
                owner[mj] = mx
            else:
                owner[mj] = -1
        else:
            assign_io[mi] = my
            slot_owner[my] = mi
            if mx >= 0:
                assign_io[mx] = mj
                slot_owner[mj] = mx
            else:
                slot_owner[mj] = -1

        new_sum = 0.0
        for q in range(na):
            c = _net_cost(
                aff[q], net_ptr, mem_kind, mem_a, mem_b, assign_comp, assign_io,
                cand_pin_x, cand_pin_y, slot_x, slot_y, fixed_x, fixed_y,
                buf_x, buf_y, metric,
            )
            new_costs[q] = c
            new_sum += c
        delta = new_sum - old_sum

        if phase == 0:
            # sample |delta| for the initial temperature, never commit
            cal_sum += abs(delta)
            cal_cnt += 1
            accept = False
        else:
            accept = delta < 0.0 or _rand01(state) < math.exp(-delta / temp)

        if accept:
            for q in range(na):
                net_cost[aff[q]] = new_costs[q]
            total += delta
            accepted += 1
        else:
            # revert
            if kind == 1:
                assign_comp[mi] = mj
                owner[mj] = mi
                if mx >= 0:
                    assign_comp[mx] = my
                    owner[my] = mx
                else:
                    owner[my] = -1
            else:
                assign_io[mi] = mj
                slot_owner[mj] = mi
                if mx >= 0:
                    assign_io[mx] = my
                    slot_owner[my] = mx
                else:
                    slot_owner[my] = -1

        if phase == 1:
            if check_every > 0 and (it + 1) % check_every == 0:
                full = 0.0
                for n in range(n_nets):
                    full += _net_cost(
                        n, net_ptr, mem_kind, mem_a, mem_b, assign_comp, assign_io,
                        cand_pin_x, cand_pin_y, slot_x, slot_y, fixed_x, fixed_y,
                        buf_x, buf_y, metric,
                    )
                denom = full if full > 1.0 else 1.0
                err = abs(total - full) / denom
                if err > max_err:
                    max_err = err
            temp *= k_t
        it += 1

    return total, t0, accepted, max_err


# ---------------------------------------------------------------------------
# routing
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _crossable(eh, ev, occ, ix, iy, nx, ny, axis, foreign):
    """True when the foreign wire at (ix,iy) runs straight and perpendicular
    to a crossing attempt along ``axis`` (0 = x, 1 = y)."""
    if axis == 0:
        # need a straight vertical foreign wire
        if iy == 0 or iy == ny - 1:
            return False
        if ev[iy - 1, ix] != foreign or ev[iy, ix] != foreign:
            return False
        if ix > 0 and eh[iy, ix - 1] == foreign:
            return False
        if ix < nx - 1 and eh[iy, ix] == foreign:
            return False
    else:
        if ix == 0 or ix == nx - 1:
            return False
        if eh[iy, ix - 1] != foreign or eh[iy, ix] != foreign:
            return False
        if iy > 0 and ev[iy - 1, ix] == foreign:
            return False
        if iy < ny - 1 and ev[iy, ix] == foreign:
            return False
    return True


@njit(cache=True, nogil=True, inline="always")
def _edge_get(eh, ev, ix, iy, d):
    # d: 0=+x 1=+y 2=-x 3=-y; returns edge state toward neighbor
    if d == 0:
        return eh[iy, ix]
    if d == 1:
        return ev[iy, ix]
    if d == 2:
        return eh[iy, ix - 1]
    return ev[iy - 1, ix]


@njit(cache=True, nogil=True)
def _heap_push(heap_f, heap_c, heap_s, size, f, c, s):
    i = size
    heap_f[i] = f
    heap_c[i] = c
    heap_s[i] = s
    while i > 0:
        p = (i - 1) >> 1
        if heap_f[p] > heap_f[i] or (heap_f[p] == heap_f[i] and heap_c[p] > heap_c[i]):
            heap_f[p], heap_f[i] = heap_f[i], heap_f[p]
            heap_c[p], heap_c[i] = heap_c[i], heap_c[p]
            heap_s[p], heap_s[i] = heap_s[i], heap_s[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(heap_f, heap_c, heap_s, size):
    top = heap_s[0]
    size -= 1
    if size > 0:
        heap_f[0] = heap_f[size]
        heap_c[0] = heap_c[size]
        heap_s[0] = heap_s[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            sm = i
            if l < size and (
                heap_f[l] < heap_f[sm] or (heap_f[l] == heap_f[sm] and heap_c[l] < heap_c[sm])
            ):
                sm = l
            if r < size and (
                heap_f[r] < heap_f[sm] or (heap_f[r] == heap_f[sm] and heap_c[r] < heap_c[sm])
            ):
                sm = r
            if sm == i:
                break
            heap_f[sm], heap_f[i] = heap_f[i], heap_f[sm]
            heap_c[sm], heap_c[i] = heap_c[i], heap_c[sm]
            heap_s[sm], heap_s[i] = heap_s[i], heap_s[sm]
            i = sm
    return top, size


@njit(cache=True, nogil=True)
def _connect(
    eh, ev, occ, pin_arr, nx, ny, net,
    sx, sy,
    x0, y0, w, h,
    visited, parent, vstamp,
    target, tstamp,
    queue,
    mode, weight, tx, ty,
    heap_f, heap_c, heap_s,
    path_buf,
):
    """Search from pin (sx, sy) to any target-stamped vertex.

    mode 0 = BFS (FIFO over unit steps), mode 1 = weighted A* toward (tx, ty).
    States are (vertex, plane): plane 0 is normal occupancy of a vertex;
    planes 1/2 are 'in flight' across a perpendicular foreign wire, moving in
    the positive/negative direction.  Writes the found path into ``path_buf``
    as packed codes ((iy * nx + ix) * 2 + crossed) and returns its length,
    or -1 when the frontier is exhausted.
    """
    sl = (sy - y0) * w + (sx - x0)
    s0 = sl * 3
    visited[s0] = vstamp
    parent[s0] = -1
    if target[sl] == tstamp:
        path_buf[0] = (sy * nx + sx) * 2
        return 1

    qh = 0
    qt = 0
    hsize = 0
    counter = 0
    if mode == 0:
        queue[qt] = s0
        qt += 1
    else:
        f0 = weight * (abs(sx - tx) + abs(sy - ty))
        hsize = _heap_push(heap_f, heap_c, heap_s, hsize, f0, counter, s0)
        counter += 1
    gdist = queue  # A* reuses the BFS queue buffer to store g-costs per state

    if mode == 1:
        gdist[s0] = 0

    goal_state = -1
    while True:
        if mode == 0:
            if qh >= qt:
                break
            sid = queue[qh]
            qh += 1
        else:
            if hsize == 0:
                break
            sid, hsize = _heap_pop(heap_f, heap_c, heap_s, hsize)

        lv = sid // 3
        plane = sid % 3
        ix = x0 + lv % w
        iy = y0 + lv // w

        if plane == 0 and target[lv] == tstamp:
            goal_state = sid
            break

        if plane == 0:
            for d in range(4):
                if d == 0:
                    jx = ix + 1
                    jy = iy
                elif d == 1:
                    jx = ix
                    jy = iy + 1
                elif d == 2:
                    jx = ix - 1
                    jy = iy
                else:
                    jx = ix
                    jy = iy - 1
                if jx < x0 or jx >= x0 + w or jy < y0 or jy >= y0 + h:
                    continue
                if _edge_get(eh, ev, ix, iy, d) != FREE:
                    continue
                nl = (jy - y0) * w + (jx - x0)
                o = occ[jy, jx]
                pn = pin_arr[jy, jx]
                if target[nl] == tstamp:
                    nsid = nl * 3
                    if visited[nsid] != vstamp:
                        visited[nsid] = vstamp
                        parent[nsid] = sid
                        if mode == 0:
                            queue[qt] = nsid
                            qt += 1
                        else:
                            g = gdist[sid] + 1
                            gdist[nsid] = g
                            f = g + weight * (abs(jx - tx) + abs(jy - ty))
                            hsize = _heap_push(heap_f, heap_c, heap_s, hsize, f, counter, nsid)
                            counter += 1
                    continue
                if o == FREE and pn < 0:
                    nsid = nl * 3
                    if visited[nsid] != vstamp:
                        visited[nsid] = vstamp
                        parent[nsid] = sid
                        if mode == 0:
                            queue[qt] = nsid
                            qt += 1
                        else:
                            g = gdist[sid] + 1
                            gdist[nsid] = g
                            f = g + weight * (abs(jx - tx) + abs(jy - ty))
                            hsize = _heap_push(heap_f, heap_c, heap_s, hsize, f, counter, nsid)
                            counter += 1
                elif o >= 0 and o != net and pn < 0:
                    axis = 0 if (d == 0 or d == 2) else 1
                    if _crossable(eh, ev, occ, jx, jy, nx, ny, axis, o):
                        positive = d == 0 or d == 1
                        nsid = nl * 3 + (1 if positive else 2)
                        if visited[nsid] != vstamp:
                            visited[nsid] = vstamp
                            parent[nsid] = sid
                            if mode == 0:
                                queue[qt] = nsid
                                qt += 1
                            else:
                                g = gdist[sid] + 1
                                gdist[nsid] = g
                                f = g + weight * (abs(jx - tx) + abs(jy - ty))
                                hsize = _heap_push(heap_f, heap_c, heap_s, hsize, f, counter, nsid)
                                counter += 1
        else:
            # continue straight through the crossed vertex
            foreign = occ[iy, ix]
            vert_wire = iy > 0 and iy < ny - 1 and ev[iy - 1, ix] == foreign and ev[iy, ix] == foreign
            axis = 0 if vert_wire else 1
            positive = plane == 1
            if axis == 0:
                jx = ix + 1 if positive else ix - 1
                jy = iy
                d = 0 if positive else 2
            else:
                jx = ix
                jy = iy + 1 if positive else iy - 1
                d = 1 if positive else 3
            if x0 <= jx < x0 + w and y0 <= jy < y0 + h and _edge_get(eh, ev, ix, iy, d) == FREE:
                nl = (jy - y0) * w + (jx - x0)
                o = occ[jy, jx]
                pn = pin_arr[jy, jx]
                enterable = False
                nsid = -1
                if target[nl] == tstamp:
                    enterable = True
                    nsid = nl * 3
                elif o == FREE and pn < 0:
                    enterable = True
                    nsid = nl * 3
                elif o >= 0 and o != net and pn < 0 and _crossable(eh, ev, occ, jx, jy, nx, ny, axis, o):
                    enterable = True
                    nsid = nl * 3 + (1 if positive else 2)
                if enterable and visited[nsid] != vstamp:
                    visited[nsid] = vstamp
                    parent[nsid] = sid
                    if mode == 0:
                        queue[qt] = nsid
                        qt += 1
                    else:
                        g = gdist[sid] + 1
                        gdist[nsid] = g
                        f = g + weight * (abs(jx - tx) + abs(jy - ty))
                        hsize = _heap_push(heap_f, heap_c, heap_s, hsize, f, counter, nsid)
                        counter += 1

    if goal_state < 0:
        return -1
    # reconstruct (reversed, then flip)
    plen = 0
    sid = goal_state
    while sid >= 0:
        lv = sid // 3
        plane = sid % 3
        ix = x0 + lv % w
        iy = y0 + lv // w
        path_buf[plen] = (iy * nx + ix) * 2 + (1 if plane > 0 else 0)
        plen += 1
        sid = parent[sid]
    for i in range(plen // 2):
        tmp = path_buf[i]
        path_buf[i] = path_buf[plen - 1 - i]
        path_buf[plen - 1 - i] = tmp
    return plen


@njit(cache=True, nogil=True)
def _reconnect_pin(eh, ev, ix, iy, nx, ny):
    """Restore this pin's temporarily removed stub edges."""
    if ix < nx - 1 and eh[iy, ix] == TEMP:
        eh[iy, ix] = FREE
    if ix > 0 and eh[iy, ix - 1] == TEMP:
        eh[iy, ix - 1] = FREE
    if iy < ny - 1 and ev[iy, ix] == TEMP:
        ev[iy, ix] = FREE
    if iy > 0 and ev[iy - 1, ix] == TEMP:
        ev[iy - 1, ix] = FREE


@njit(cache=True, nogil=True)
def _stamp_codes(target, tstamp, codes, n, nx, x0, y0, w):
    for i in range(n):
        v = codes[i] // 2
        ix = v % nx
        iy = v // nx
        target[(iy - y0) * w + (ix - x0)] = tstamp


@njit(cache=True, nogil=True)
def _apply_path(
    eh, ev, occ, nx, net,
    path_buf, plen,
    target, tstamp, x0, y0, w,
    wires, nw, insu, ni,
):
    """Commit a found path: claim edges, occupy/cross vertices, stamp the new
    tree vertices as future targets, and emit merged straight segments plus
    insulator points.  Returns updated (nw, ni) or (-1, -1) on overflow."""
    if nw + plen > wires.shape[0] // 4 or ni + plen > insu.shape[0] // 2:
        return -1, -1
    px = np.empty(plen, dtype=np.int64)
    py = np.empty(plen, dtype=np.int64)
    crossed = np.empty(plen, dtype=np.int64)
    for i in range(plen):
        code = path_buf[i]
        crossed[i] = code & 1
        v = code // 2
        px[i] = v % nx
        py[i] = v // nx
    for i in range(plen):
        if crossed[i] == 1:
            occ[py[i], px[i]] = CROSSED
            insu[2 * ni] = px[i]
            insu[2 * ni + 1] = py[i]
            ni += 1
        else:
            if occ[py[i], px[i]] == FREE:
                occ[py[i], px[i]] = net
            target[(py[i] - y0) * w + (px[i] - x0)] = tstamp
    for i in range(1, plen):
        if px[i] > px[i - 1]:
            eh[py[i], px[i - 1]] = net
        elif px[i] < px[i - 1]:
            eh[py[i], px[i]] = net
        elif py[i] > py[i - 1]:
            ev[py[i - 1], px[i]] = net
        else:
            ev[py[i], px[i]] = net
    if plen >= 2:
        seg_start = 0
        for i in range(2, plen):
            turn = (px[i] - px[i - 1] != px[i - 1] - px[i - 2]) or (
                py[i] - py[i - 1] != py[i - 1] - py[i - 2]
            )
            if turn:
                wires[4 * nw] = px[seg_start]
                wires[4 * nw + 1] = py[seg_start]
                wires[4 * nw + 2] = px[i - 1]
                wires[4 * nw + 3] = py[i - 1]
                nw += 1
                seg_start = i - 1
        wires[4 * nw] = px[seg_start]
        wires[4 * nw + 1] = py[seg_start]
        wires[4 * nw + 2] = px[plen - 1]
        wires[4 * nw + 3] = py[plen - 1]
        nw += 1
    return nw, ni


@njit(cache=True, nogil=True)
def route_net_kernel(
    eh, ev, occ, pin_arr, nx, ny, net,
    pins_ix, pins_iy,
    x0, y0, w, h,
    visited, parent, target, queue, path_buf,
    stamp_holder,
    mode, weight,
    heap_f, heap_c, heap_s,
    wires, insu,
):
    """Route one net inside a window: connect pins in Prim order, each via a
    search to the already-routed tree.  Returns (n_wires, n_insu, n_failed)."""
    k = pins_ix.shape[0]
    # Prim order over Manhattan pin distances, seeded at the first pin
    order = np.empty(k, dtype=np.int64)
    in_tree = np.zeros(k, dtype=np.uint8)
    dist = np.empty(k, dtype=np.int64)
    near = np.zeros(k, dtype=np.int64)
    order[0] = 0
    in_tree[0] = 1
    for j in range(k):
        dist[j] = abs(pins_ix[0] - pins_ix[j]) + abs(pins_iy[0] - pins_iy[j])
    for step in range(1, k):
        best = -1
        best_d = np.int64(1) << 60
        for j in range(k):
            if in_tree[j] == 0 and dist[j] < best_d:
                best = j
                best_d = dist[j]
        order[step] = best
        in_tree[best] = 1
        for j in range(k):
            if in_tree[j] == 0:
                d = abs(pins_ix[best] - pins_ix[j]) + abs(pins_iy[best] - pins_iy[j])
                if d < dist[j]:
                    dist[j] = d
                    near[j] = best

    stamp_holder[0] += 1
    tstamp = stamp_holder[0]
    p0 = order[0]
    _reconnect_pin(eh, ev, pins_ix[p0], pins_iy[p0], nx, ny)
    target[(pins_iy[p0] - y0) * w + (pins_ix[p0] - x0)] = tstamp

    nw = 0
    ni = 0
    nfail = 0
    for step in range(1, k):
        p = order[step]
        _reconnect_pin(eh, ev, pins_ix[p], pins_iy[p], nx, ny)
        stamp_holder[1] += 1
        vstamp = stamp_holder[1]
        plen = _connect(
            eh, ev, occ, pin_arr, nx, ny, net,
            pins_ix[p], pins_iy[p], x0, y0, w, h,
            visited, parent, vstamp,
            target, tstamp,
            queue,
            mode, weight, pins_ix[near[p]], pins_iy[near[p]],
            heap_f, heap_c, heap_s,
            path_buf,
        )
        if plen < 0:
            nfail += 1
            continue
        nw, ni = _apply_path(
            eh, ev, occ, nx, net, path_buf, plen,
            target, tstamp, x0, y0, w,
            wires, nw, insu, ni,
        )
        if nw < 0:
            return -1, -1, -1
    return nw, ni, nfail


@njit(cache=True, nogil=True)
def connect_trees_kernel(
    eh, ev, occ, pin_arr, nx, ny, net,
    src_ix, src_iy, tgt_ix, tgt_iy,
    x0, y0, w, h,
    visited, parent, target, queue, path_buf,
    stamp_holder, tstamp,
    mode, weight,
    heap_f, heap_c, heap_s,
    wires, insu,
):
    """One inter-tree connection from a source pin to the target-stamped
    region.  Returns (n_wires, n_insu, ok)."""
    _reconnect_pin(eh, ev, src_ix, src_iy, nx, ny)
    stamp_holder[1] += 1
    vstamp = stamp_holder[1]
    plen = _connect(
        eh, ev, occ, pin_arr, nx, ny, net,
        src_ix, src_iy, x0, y0, w, h,
        visited, parent, vstamp,
        target, tstamp,
        queue,
        mode, weight, tgt_ix, tgt_iy,
        heap_f, heap_c, heap_s,
        path_buf,
    )
    if plen < 0:
        return 0, 0, 0
    nw, ni = _apply_path(
        eh, ev, occ, nx, net, path_buf, plen,
        target, tstamp, x0, y0, w,
        wires, 0, insu, 0,
    )
    if nw < 0:
        return -1, -1, -1
    return nw, ni, 1
