"""Compiled inner loops for the annealing solvers.

Every kernel is single-threaded and seeds numba's Mersenne Twister stream
explicitly, so trajectories are a pure function of the passed arrays and
seeds.  QUBOs arrive as a linear vector plus a symmetric CSR of pair
weights; energies are maintained incrementally through the local-field
array dE, where dE[i] is the energy change from flipping bit i.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# Metropolis tests with beta*delta above this bound cannot pass at double
# precision, so the uniform draw is skipped for them.
_EXP_CUTOFF = 50.0


@njit(cache=True, nogil=True)
def _init_fields(lin, indptr, indices, data, x, dE):
    n = lin.shape[0]
    e = 0.0
    for i in range(n):
        fld = lin[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if x[j] == 1:
                fld += data[p]
        dE[i] = (1.0 - 2.0 * x[i]) * fld
        if x[i] == 1:
            e += lin[i]
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if x[j] == 1 and j > i:
                    e += data[p]
    return e


@njit(cache=True, nogil=True)
def _apply_flip(indptr, indices, data, x, dE, k):
    s = 1.0 - 2.0 * x[k]
    x[k] = 1 - x[k]
    dE[k] = -dE[k]
    for p in range(indptr[k], indptr[k + 1]):
        j = indices[p]
        dE[j] += data[p] * s * (1.0 - 2.0 * x[j])


@njit(cache=True, nogil=True)
def sa_kernel(
    lin,
    indptr,
    indices,
    data,
    betas,
    seeds,
    x0,
    use_x0,
    trace_it,
    trace_e,
):
    """Sweep-based annealing; returns the final configuration per read."""
    n = lin.shape[0]
    reads = seeds.shape[0]
    sweeps = betas.shape[0]
    out = np.empty((reads, n), dtype=np.uint8)
    x = np.empty(n, dtype=np.uint8)
    dE = np.empty(n, dtype=np.float64)
    best = np.inf
    ntrace = 0
    cap = trace_it.shape[0]
    attempt = 0
    for r in range(reads):
        np.random.seed(seeds[r])
        if use_x0:
            for i in range(n):
                x[i] = x0[i]
        else:
            for i in range(n):
                x[i] = 1 if np.random.random() < 0.5 else 0
        e = _init_fields(lin, indptr, indices, data, x, dE)
        for s in range(sweeps):
            beta = betas[s]
            for k in range(n):
                d = dE[k]
                acc = False
                if d <= 0.0:
                    acc = True
                else:
                    bd = beta * d
                    if bd < _EXP_CUTOFF and np.random.random() < np.exp(-bd):
                        acc = True
                if acc:
                    _apply_flip(indptr, indices, data, x, dE, k)
                    e += d
                    if e < best:
                        best = e
                        if ntrace < cap:
                            trace_it[ntrace] = attempt
                            trace_e[ntrace] = e
                            ntrace += 1
                attempt += 1
        for i in range(n):
            out[r, i] = x[i]
    return out, ntrace


@njit(cache=True, nogil=True)
def pt_kernel(
    lin,
    indptr,
    indices,
    data,
    betas,
    iterations,
    swap_interval,
    offset_step,
    seed,
    x0,
    use_x0,
    trace_it,
    trace_e,
):
    """Parallel-trial tempering; returns each replica's best-seen bits."""
    n = lin.shape[0]
    reps = betas.shape[0]
    np.random.seed(seed)
    x = np.empty((reps, n), dtype=np.uint8)
    dE = np.empty((reps, n), dtype=np.float64)
    e = np.empty(reps, dtype=np.float64)
    offs = np.zeros(reps, dtype=np.float64)
    best_e = np.empty(reps, dtype=np.float64)
    best_x = np.empty((reps, n), dtype=np.uint8)
    accepted = np.empty(n, dtype=np.int64)
    for r in range(reps):
        if use_x0:
            for i in range(n):
                x[r, i] = x0[i]
        else:
            for i in range(n):
                x[r, i] = 1 if np.random.random() < 0.5 else 0
        e[r] = _init_fields(lin, indptr, indices, data, x[r], dE[r])
        best_e[r] = e[r]
        for i in range(n):
            best_x[r, i] = x[r, i]
    gbest = np.inf
    ntrace = 0
    cap = trace_it.shape[0]
    swap_round = 0
    for it in range(iterations):
        for r in range(reps):
            beta = betas[r]
            count = 0
            for i in range(n):
                d = dE[r, i] - offs[r]
                if d <= 0.0:
                    accepted[count] = i
                    count += 1
                else:
                    bd = beta * d
                    if bd < _EXP_CUTOFF and np.random.random() < np.exp(-bd):
                        accepted[count] = i
                        count += 1
            if count == 0:
                offs[r] += offset_step
                continue
            offs[r] = 0.0
            k = accepted[int(np.random.random() * count)]
            d0 = dE[r, k]
            s = 1.0 - 2.0 * x[r, k]
            x[r, k] = 1 - x[r, k]
            dE[r, k] = -dE[r, k]
            for p in range(indptr[k], indptr[k + 1]):
                j = indices[p]
                dE[r, j] += data[p] * s * (1.0 - 2.0 * x[r, j])
            e[r] += d0
            if e[r] < best_e[r]:
                best_e[r] = e[r]
                for i in range(n):
                    best_x[r, i] = x[r, i]
                if e[r] < gbest:
                    gbest = e[r]
                    if ntrace < cap:
                        trace_it[ntrace] = it
                        trace_e[ntrace] = e[r]
                        ntrace += 1
        if swap_interval > 0 and (it + 1) % swap_interval == 0:
            start = swap_round % 2
            swap_round += 1
            for a in range(start, reps - 1, 2):
                w = (betas[a] - betas[a + 1]) * (e[a] - e[a + 1])
                do_swap = False
                if w >= 0.0:
                    do_swap = True
                elif w > -_EXP_CUTOFF and np.random.random() < np.exp(w):
                    do_swap = True
                if do_swap:
                    for i in range(n):
                        tmpb = x[a, i]
                        x[a, i] = x[a + 1, i]
                        x[a + 1, i] = tmpb
                        tmpf = dE[a, i]
                        dE[a, i] = dE[a + 1, i]
                        dE[a + 1, i] = tmpf
                    tmpe = e[a]
                    e[a] = e[a + 1]
                    e[a + 1] = tmpe
                    tmpo = offs[a]
                    offs[a] = offs[a + 1]
                    offs[a + 1] = tmpo
    return best_x, ntrace


@njit(cache=True, nogil=True)
def tabu_kernel(lin, indptr, indices, data, iterations, tenure, seeds):
    """Best-admissible flip search with recency tabu; one result per restart."""
    n = lin.shape[0]
    restarts = seeds.shape[0]
    out = np.empty((restarts, n), dtype=np.uint8)
    x = np.empty(n, dtype=np.uint8)
    dE = np.empty(n, dtype=np.float64)
    tabu_until = np.empty(n, dtype=np.int64)
    for r in range(restarts):
        np.random.seed(seeds[r])
        for i in range(n):
            x[i] = 1 if np.random.random() < 0.5 else 0
            tabu_until[i] = -1
        e = _init_fields(lin, indptr, indices, data, x, dE)
        best_e = e
        for i in range(n):
            out[r, i] = x[i]
        for it in range(iterations):
            chosen = -1
            chosen_d = np.inf
            for k in range(n):
                d = dE[k]
                admissible = tabu_until[k] < it or e + d < best_e
                if admissible and d < chosen_d:
                    chosen_d = d
                    chosen = k
            if chosen < 0:
                continue
            _apply_flip(indptr, indices, data, x, dE, chosen)
            e += chosen_d
            tabu_until[chosen] = it + tenure
            if e < best_e:
                best_e = e
                for i in range(n):
                    out[r, i] = x[i]
    return out


@njit(cache=True, nogil=True)
def brute_gray_kernel(lin, indptr, indices, data, offset, n):
    """Exact minimum over all 2^n configurations via Gray-code flips.

    Candidate energies are re-evaluated from scratch before accepting, so
    incremental drift cannot corrupt the result; exact ties resolve to the
    lexicographically smallest bit vector.
    """
    x = np.zeros(n, dtype=np.uint8)
    dE = np.empty(n, dtype=np.float64)
    e = _init_fields(lin, indptr, indices, data, x, dE)
    best = np.empty(n, dtype=np.uint8)
    for i in range(n):
        best[i] = 0
    best_e = e
    total = np.int64(1) << n
    for step in range(1, total):
        k = 0
        while (step >> k) & 1 == 0:
            k += 1
        d = dE[k]
        _apply_flip(indptr, indices, data, x, dE, k)
        e += d
        if e <= best_e + 1e-9 * (1.0 + abs(best_e)):
            exact = 0.0
            for i in range(n):
                if x[i] == 1:
                    exact += lin[i]
                    for p in range(indptr[i], indptr[i + 1]):
                        j = indices[p]
                        if x[j] == 1 and j > i:
                            exact += data[p]
            e = exact
            if exact < best_e:
                best_e = exact
                for i in range(n):
                    best[i] = x[i]
            elif exact == best_e:
                for i in range(n):
                    if x[i] != best[i]:
                        if x[i] < best[i]:
                            for m in range(n):
                                best[m] = x[m]
                        break
    return best, best_e + offset


@njit(cache=True, nogil=True)
def qap_eval(flow, dist, perm):
    n = perm.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += flow[i, j] * dist[perm[i], perm[j]]
    return total


@njit(cache=True, nogil=True)
def qap_brute_kernel(flow, dist):
    """Exact assignment optimum by lexicographic permutation enumeration."""
    n = flow.shape[0]
    perm = np.arange(n, dtype=np.int64)
    best = perm.copy()
    best_e = qap_eval(flow, dist, perm)
    while True:
        # next lexicographic permutation
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
        lo = i + 1
        hi = n - 1
        while lo < hi:
            tmp = perm[lo]
            perm[lo] = perm[hi]
            perm[hi] = tmp
            lo += 1
            hi -= 1
        e = qap_eval(flow, dist, perm)
        if e < best_e:
            best_e = e
            best = perm.copy()
    return best, best_e


@njit(cache=True, nogil=True)
def qap_swap_delta(flow, dist, perm, a, b):
    """Cost change from swapping the locations of facilities a and b."""
    n = perm.shape[0]
    pa = perm[a]
    pb = perm[b]
    delta = 0.0
    for k in range(n):
        if k == a or k == b:
            continue
        pk = perm[k]
        df = flow[a, k] - flow[b, k]
        delta += df * (dist[pb, pk] - dist[pa, pk])
        delta += df * (dist[pk, pb] - dist[pk, pa])
    delta += flow[a, b] * (dist[pb, pa] - dist[pa, pb])
    delta += flow[b, a] * (dist[pa, pb] - dist[pb, pa])
    delta += (flow[a, a] - flow[b, b]) * (dist[pb, pb] - dist[pa, pa])
    return delta


@njit(cache=True, nogil=True)
def perm_anneal_kernel(flow, dist, iterations, t0, t1, seed, p0):
    """Pairwise-swap annealing over permutations; returns the best seen."""
    n = flow.shape[0]
    np.random.seed(seed)
    perm = p0.copy()
    e = qap_eval(flow, dist, perm)
    best = perm.copy()
    best_e = e
    if iterations > 1:
        ratio = (t1 / t0) ** (1.0 / (iterations - 1))
    else:
        ratio = 1.0
    t = t0
    for _ in range(iterations):
        a = int(np.random.random() * n)
        b = int(np.random.random() * (n - 1))
        if b >= a:
            b += 1
        d = qap_swap_delta(flow, dist, perm, a, b)
        acc = False
        if d <= 0.0:
            acc = True
        elif d / t < _EXP_CUTOFF and np.random.random() < np.exp(-d / t):
            acc = True
        if acc:
            tmp = perm[a]
            perm[a] = perm[b]
            perm[b] = tmp
            e += d
            if e < best_e:
                best_e = e
                for i in range(n):
                    best[i] = perm[i]
        t *= ratio
    return best, best_e


@njit(cache=True, nogil=True)
def order_route(
    start,
    end,
    order_sku,
    sku_item_ptr,
    sku_item_idx,
    perm,
    loc_io,
    loc_aisle,
    loc_row,
    rows,
    row_spacing,
    column_spacing,
):
    """Length of one pick route under the modified serpentine rule.

    Every aisle before the last required one is traversed end to end; the
    last one is entered, walked to the farthest required row, and walked
    back out the same end before the straight return to the depot.
    """
    m = end - start
    if m == 0:
        return 0.0
    a_last = 0
    locs = np.empty(m, dtype=np.int64)
    for t in range(m):
        s = order_sku[start + t]
        best = -1
        best_io = 1e300
        for p in range(sku_item_ptr[s], sku_item_ptr[s + 1]):
            loc = perm[sku_item_idx[p]]
            io = loc_io[loc]
            if io < best_io or (io == best_io and loc < best):
                best_io = io
                best = loc
        locs[t] = best
        if loc_aisle[best] > a_last:
            a_last = loc_aisle[best]
    enter_bottom = (a_last - 1) % 2 == 0
    far = 0.0
    for t in range(m):
        loc = locs[t]
        if loc_aisle[loc] == a_last:
            if enter_bottom:
                d = loc_row[loc] * row_spacing
            else:
                d = (rows - loc_row[loc]) * row_spacing
            if d > far:
                far = d
    total = (a_last - 1) * rows * row_spacing
    total += (a_last - 1) * 2.0 * column_spacing
    total += 2.0 * far
    total += (a_last - 1) * 2.0 * column_spacing
    if not enter_bottom:
        total += rows * row_spacing
    return total


@njit(cache=True, nogil=True)
def total_route(
    order_ptr,
    order_sku,
    sku_item_ptr,
    sku_item_idx,
    perm,
    loc_io,
    loc_aisle,
    loc_row,
    rows,
    row_spacing,
    column_spacing,
    out_lens,
):
    total = 0.0
    for o in range(order_ptr.shape[0] - 1):
        v = order_route(
            order_ptr[o],
            order_ptr[o + 1],
            order_sku,
            sku_item_ptr,
            sku_item_idx,
            perm,
            loc_io,
            loc_aisle,
            loc_row,
            rows,
            row_spacing,
            column_spacing,
        )
        out_lens[o] = v
        total += v
    return total


@njit(cache=True, nogil=True)
def oos_kernel(
    order_ptr,
    order_sku,
    sku_order_ptr,
    sku_order_idx,
    sku_item_ptr,
    sku_item_idx,
    item_sku,
    loc_io,
    loc_aisle,
    loc_row,
    rows,
    row_spacing,
    column_spacing,
    perm0,
    iterations,
    t0,
    t1,
    seed,
):
    """Swap-two-items annealing on total pick distance.

    Only routes of orders touching either swapped item are re-simulated per
    move. Returns the best assignment seen and its total distance.
    """
    np.random.seed(seed)
    n = perm0.shape[0]
    n_orders = order_ptr.shape[0] - 1
    perm = perm0.copy()
    lens = np.empty(n_orders, dtype=np.float64)
    total = total_route(
        order_ptr, order_sku, sku_item_ptr, sku_item_idx, perm,
        loc_io, loc_aisle, loc_row, rows, row_spacing, column_spacing, lens,
    )
    best_total = total
    best_perm = perm.copy()
    if iterations > 1:
        ratio = (t1 / t0) ** (1.0 / (iterations - 1))
    else:
        ratio = 1.0
    t = t0
    stamp = np.full(n_orders, -1, dtype=np.int64)
    affected = np.empty(n_orders, dtype=np.int64)
    new_lens = np.empty(n_orders, dtype=np.float64)
    for it in range(iterations):
        a = int(np.random.random() * n)
        b = int(np.random.random() * (n - 1))
        if b >= a:
            b += 1
        sa = item_sku[a]
        sb = item_sku[b]
        if sa == sb:
            t *= ratio
            continue
        tmp = perm[a]
        perm[a] = perm[b]
        perm[b] = tmp
        count = 0
        for p in range(sku_order_ptr[sa], sku_order_ptr[sa + 1]):
            o = sku_order_idx[p]
            if stamp[o] != it:
                stamp[o] = it
                affected[count] = o
                count += 1
        for p in range(sku_order_ptr[sb], sku_order_ptr[sb + 1]):
            o = sku_order_idx[p]
            if stamp[o] != it:
                stamp[o] = it
                affected[count] = o
                count += 1
        delta = 0.0
        for q in range(count):
            o = affected[q]
            v = order_route(
                order_ptr[o], order_ptr[o + 1], order_sku,
                sku_item_ptr, sku_item_idx, perm,
                loc_io, loc_aisle, loc_row, rows, row_spacing, column_spacing,
            )
            new_lens[o] = v
            delta += v - lens[o]
        acc = False
        if delta <= 0.0:
            acc = True
        elif delta / t < _EXP_CUTOFF and np.random.random() < np.exp(-delta / t):
            acc = True
        if acc:
            for q in range(count):
                o = affected[q]
                lens[o] = new_lens[o]
            total += delta
            if total < best_total:
                best_total = total
                for i in range(n):
                    best_perm[i] = perm[i]
        else:
            tmp = perm[a]
            perm[a] = perm[b]
            perm[b] = tmp
        t *= ratio
    return best_perm, best_total
