"""Hot loops. Each numba kernel has a fallback with identical results.

Kernels work on the raw ``int8`` comparison matrix ``Q`` (``Q[i, j] = q(a_i, a_j)``)
and return plain arrays; the public wrappers live in ``exact`` and ``window_dp``.
"""

import itertools
from math import comb

import numpy as np

from ._accel import njit

NEG = -(1 << 60)


# --------------------------------------------------------------------------
# exhaustive enumeration, rank_of vectors in lexicographic order


@njit
def exhaustive_kernel(Q):
    n = Q.shape[0]
    r = np.arange(n)
    best_r = r.copy()
    best = NEG
    while True:
        s = 0
        for i in range(n):
            for j in range(i + 1, n):
                if r[i] > r[j]:
                    s += Q[i, j]
                else:
                    s -= Q[i, j]
        if s > best:
            best = s
            best_r[:] = r
        # next permutation
        i = n - 2
        while i >= 0 and r[i] >= r[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while r[j] <= r[i]:
            j -= 1
        t = r[i]
        r[i] = r[j]
        r[j] = t
        a, b = i + 1, n - 1
        while a < b:
            t = r[a]
            r[a] = r[b]
            r[b] = t
            a += 1
            b -= 1
    return best_r, best


def exhaustive_numpy(Q, chunk=200_000):
    n = Q.shape[0]
    iu, ju = np.triu_indices(n, 1)
    w = Q[iu, ju].astype(np.int64)
    perms = itertools.permutations(range(n))
    best, best_r = NEG, np.arange(n)
    while True:
        block = np.array(list(itertools.islice(perms, chunk)), dtype=np.int64).reshape(-1, n)
        if block.shape[0] == 0:
            break
        signs = np.sign(block[:, iu] - block[:, ju])
        scores = signs @ w
        a = int(np.argmax(scores))
        if scores[a] > best:
            best, best_r = int(scores[a]), block[a].copy()
    return best_r, best


# --------------------------------------------------------------------------
# subset DP: best[T] = max_x best[T - x] + sum_{y in T - x} q(x, y), x on top


@njit
def subset_dp_kernel(Q):
    n = Q.shape[0]
    full = (1 << n) - 1
    best = np.full(1 << n, NEG, dtype=np.int64)
    choice = np.zeros(1 << n, dtype=np.int8)
    best[0] = 0
    bits = np.empty(n, dtype=np.int64)
    for T in range(1, full + 1):
        cnt = 0
        for b in range(n):
            if (T >> b) & 1:
                bits[cnt] = b
                cnt += 1
        bv = NEG
        bx = -1
        for a in range(cnt):
            x = bits[a]
            g = 0
            for c in range(cnt):
                g += Q[x, bits[c]]
            v = best[T ^ (1 << x)] + g
            if v > bv:
                bv = v
                bx = x
        best[T] = bv
        choice[T] = bx
    rank_of = np.empty(n, dtype=np.int64)
    T = full
    for r in range(n - 1, -1, -1):
        x = choice[T]
        rank_of[x] = r
        T ^= 1 << x
    return rank_of, best[full]


def subset_dp_numpy(Q):
    n = Q.shape[0]
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    # W[x, S] = sum_{y in S} Q[x, y]
    W = np.zeros((n, size), dtype=np.int16)
    for b in range(n):
        W[:, 1 << b : 1 << (b + 1)] = W[:, : 1 << b] + Q[:, b : b + 1].astype(np.int16)
    pop = np.zeros(size, dtype=np.int64)
    for b in range(n):
        pop += (masks >> b) & 1
    best = np.full(size, NEG, dtype=np.int64)
    choice = np.zeros(size, dtype=np.int8)
    best[0] = 0
    for c in range(1, n + 1):
        layer = masks[pop == c]
        lbest = np.full(layer.size, NEG, dtype=np.int64)
        lchoice = np.zeros(layer.size, dtype=np.int8)
        for x in range(n):
            has = ((layer >> x) & 1).astype(bool)
            prev = layer[has] ^ (1 << x)
            v = best[prev] + W[x, prev]
            better = v > lbest[has]
            idx = np.flatnonzero(has)[better]
            lbest[idx] = v[better]
            lchoice[idx] = x
        best[layer] = lbest
        choice[layer] = lchoice
    rank_of = np.empty(n, dtype=np.int64)
    T = size - 1
    for r in range(n - 1, -1, -1):
        x = int(choice[T])
        rank_of[x] = r
        T ^= 1 << x
    return rank_of, int(best[size - 1])


# --------------------------------------------------------------------------
# windowed interval DP
#
# Positions 0..m-1 index the initial order. gains[a, d] is the score change when
# the pair (a, a + d) ends up inverted. A node [lo, hi] stores candidate sets as
# bitmasks over its boundary zone I+ \ I-; the core I- is implicit.


def _binom_table(limit=64):
    t = np.zeros((limit + 1, limit + 1), dtype=np.int64)
    for a in range(limit + 1):
        for b in range(a + 1):
            t[a, b] = comb(a, b)
    return t


BINOM = _binom_table()


@njit
def _grow(arr, need):
    if need <= arr.shape[0]:
        return arr
    cap = arr.shape[0] * 2
    while cap < need:
        cap *= 2
    out = np.empty(cap, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit
def window_dp_kernel(lo_a, hi_a, left_a, right_a, gains, k, binom):
    nn = lo_a.shape[0]
    m = hi_a[0] + 1
    # zone layout per node: range A = [za0, za1] then range B = [zb0, zb1]
    za0 = np.empty(nn, np.int64)
    za1 = np.empty(nn, np.int64)
    zb0 = np.empty(nn, np.int64)
    zb1 = np.empty(nn, np.int64)
    clo = np.empty(nn, np.int64)
    chi = np.empty(nn, np.int64)
    nbits = np.empty(nn, np.int64)
    for v in range(nn):
        lo = lo_a[v]
        hi = hi_a[v]
        za0[v] = max(0, lo - k)
        if lo + k <= hi - k:
            clo[v] = lo + k
            chi[v] = hi - k
            za1[v] = lo + k - 1
            zb0[v] = hi - k + 1
            zb1[v] = min(m - 1, hi + k)
        else:
            clo[v] = 1
            chi[v] = 0
            za1[v] = min(m - 1, hi + k)
            zb0[v] = 1
            zb1[v] = 0
        nb = za1[v] - za0[v] + 1
        if zb1[v] >= zb0[v]:
            nb += zb1[v] - zb0[v] + 1
        nbits[v] = nb

    cap = 1024
    masks = np.empty(cap, np.int64)
    start = np.zeros(nn, np.int64)
    count = np.zeros(nn, np.int64)
    masks[0] = (np.int64(1) << nbits[0]) - 1
    start[0] = 0
    count[0] = 1
    used = 1
    splits_seen = 0

    fpos = np.empty(2 * k + 2, np.int64)
    fidx = np.empty(2 * k + 2, np.int64)

    # ---- top-down: generate reachable candidate sets
    for v in range(nn):
        L = left_a[v]
        if L < 0:
            continue
        R = right_a[v]
        lo = lo_a[v]
        mid = hi_a[L]
        llen = mid - lo + 1
        fr0 = mid + 1 - k
        fr1 = mid + k
        total = 0
        for ci in range(start[v], start[v] + count[v]):
            mask = masks[ci]
            F = 0
            for p in range(fr0, fr1 + 1):
                inS = clo[v] <= p <= chi[v]
                if not inS:
                    b = -1
                    if za0[v] <= p <= za1[v]:
                        b = p - za0[v]
                    elif zb0[v] <= p <= zb1[v]:
                        b = za1[v] - za0[v] + 1 + p - zb0[v]
                    inS = b >= 0 and ((mask >> b) & 1) == 1
                if inS:
                    F += 1
            forced = 0
            if chi[v] >= clo[v] and mid - k >= clo[v]:
                forced += min(chi[v], mid - k) - clo[v] + 1
            for b in range(nbits[v]):
                if (mask >> b) & 1:
                    if b <= za1[v] - za0[v]:
                        p = za0[v] + b
                    else:
                        p = zb0[v] + b - (za1[v] - za0[v] + 1)
                    if p <= mid - k:
                        forced += 1
            c = llen - forced
            if 0 <= c <= F:
                total += binom[F, c]
        lbuf = np.empty(max(total, 1), np.int64)
        rbuf = np.empty(max(total, 1), np.int64)
        nb_ = 0
        for ci in range(start[v], start[v] + count[v]):
            mask = masks[ci]
            F = 0
            for p in range(fr0, fr1 + 1):
                fidx[p - fr0] = -1
                inS = clo[v] <= p <= chi[v]
                if not inS:
                    b = -1
                    if za0[v] <= p <= za1[v]:
                        b = p - za0[v]
                    elif zb0[v] <= p <= zb1[v]:
                        b = za1[v] - za0[v] + 1 + p - zb0[v]
                    inS = b >= 0 and ((mask >> b) & 1) == 1
                if inS:
                    fpos[F] = p
                    fidx[p - fr0] = F
                    F += 1
            forced = 0
            if chi[v] >= clo[v] and mid - k >= clo[v]:
                forced += min(chi[v], mid - k) - clo[v] + 1
            for b in range(nbits[v]):
                if (mask >> b) & 1:
                    if b <= za1[v] - za0[v]:
                        p = za0[v] + b
                    else:
                        p = zb0[v] + b - (za1[v] - za0[v] + 1)
                    if p <= mid - k:
                        forced += 1
            c = llen - forced
            if c < 0 or c > F:
                continue
            sub = (np.int64(1) << c) - 1
            limit = np.int64(1) << F
            while sub < limit:
                for side in range(2):
                    ch = L if side == 0 else R
                    cm = np.int64(0)
                    for b in range(nbits[ch]):
                        if b <= za1[ch] - za0[ch]:
                            z = za0[ch] + b
                        else:
                            z = zb0[ch] + b - (za1[ch] - za0[ch] + 1)
                        inS = clo[v] <= z <= chi[v]
                        if not inS:
                            bb = -1
                            if za0[v] <= z <= za1[v]:
                                bb = z - za0[v]
                            elif zb0[v] <= z <= zb1[v]:
                                bb = za1[v] - za0[v] + 1 + z - zb0[v]
                            inS = bb >= 0 and ((mask >> bb) & 1) == 1
                        if not inS:
                            continue
                        if fr0 <= z <= fr1:
                            chosen = ((sub >> fidx[z - fr0]) & 1) == 1
                            if chosen == (side == 0):
                                cm |= np.int64(1) << b
                        elif (z < fr0) == (side == 0):
                            cm |= np.int64(1) << b
                    if side == 0:
                        lbuf[nb_] = cm
                    else:
                        rbuf[nb_] = cm
                nb_ += 1
                if c == 0:
                    break
                u = sub & -sub
                w = sub + u
                sub = w + (((w ^ sub) // u) >> 2)
        splits_seen += nb_
        for side in range(2):
            ch = L if side == 0 else R
            buf = lbuf[:nb_] if side == 0 else rbuf[:nb_]
            uniq = np.unique(buf)
            masks = _grow(masks, used + uniq.shape[0])
            masks[used : used + uniq.shape[0]] = uniq
            start[ch] = used
            count[ch] = uniq.shape[0]
            used += uniq.shape[0]

    # ---- bottom-up: best arrangement value per candidate
    vals = np.zeros(used, np.int64)
    bl = np.full(used, -1, np.int64)
    br = np.full(used, -1, np.int64)
    for v in range(nn - 1, -1, -1):
        L = left_a[v]
        if L < 0:
            continue
        R = right_a[v]
        lo = lo_a[v]
        mid = hi_a[L]
        llen = mid - lo + 1
        fr0 = mid + 1 - k
        fr1 = mid + k
        lmasks = masks[start[L] : start[L] + count[L]]
        rmasks = masks[start[R] : start[R] + count[R]]
        for ci in range(start[v], start[v] + count[v]):
            mask = masks[ci]
            F = 0
            for p in range(fr0, fr1 + 1):
                fidx[p - fr0] = -1
                inS = clo[v] <= p <= chi[v]
                if not inS:
                    b = -1
                    if za0[v] <= p <= za1[v]:
                        b = p - za0[v]
                    elif zb0[v] <= p <= zb1[v]:
                        b = za1[v] - za0[v] + 1 + p - zb0[v]
                    inS = b >= 0 and ((mask >> b) & 1) == 1
                if inS:
                    fpos[F] = p
                    fidx[p - fr0] = F
                    F += 1
            forced = 0
            if chi[v] >= clo[v] and mid - k >= clo[v]:
                forced += min(chi[v], mid - k) - clo[v] + 1
            for b in range(nbits[v]):
                if (mask >> b) & 1:
                    if b <= za1[v] - za0[v]:
                        p = za0[v] + b
                    else:
                        p = zb0[v] + b - (za1[v] - za0[v] + 1)
                    if p <= mid - k:
                        forced += 1
            c = llen - forced
            best = NEG
            if 0 <= c <= F:
                sub = (np.int64(1) << c) - 1
                limit = np.int64(1) << F
                while sub < limit:
                    lm = np.int64(0)
                    rm = np.int64(0)
                    for side in range(2):
                        ch = L if side == 0 else R
                        cm = np.int64(0)
                        for b in range(nbits[ch]):
                            if b <= za1[ch] - za0[ch]:
                                z = za0[ch] + b
                            else:
                                z = zb0[ch] + b - (za1[ch] - za0[ch] + 1)
                            inS = clo[v] <= z <= chi[v]
                            if not inS:
                                bb = -1
                                if za0[v] <= z <= za1[v]:
                                    bb = z - za0[v]
                                elif zb0[v] <= z <= zb1[v]:
                                    bb = za1[v] - za0[v] + 1 + z - zb0[v]
                                inS = bb >= 0 and ((mask >> bb) & 1) == 1
                            if not inS:
                                continue
                            if fr0 <= z <= fr1:
                                chosen = ((sub >> fidx[z - fr0]) & 1) == 1
                                if chosen == (side == 0):
                                    cm |= np.int64(1) << b
                            elif (z < fr0) == (side == 0):
                                cm |= np.int64(1) << b
                        if side == 0:
                            lm = cm
                        else:
                            rm = cm
                    li = start[L] + np.searchsorted(lmasks, lm)
                    ri = start[R] + np.searchsorted(rmasks, rm)
                    if vals[li] > NEG and vals[ri] > NEG:
                        cross = 0
                        for a in range(F):
                            if (sub >> a) & 1:
                                continue
                            pa = fpos[a]
                            for bq in range(a + 1, F):
                                if (sub >> bq) & 1:
                                    cross += gains[pa, fpos[bq] - pa]
                        tot = vals[li] + vals[ri] + cross
                        if tot > best:
                            best = tot
                            bl[ci] = li
                            br[ci] = ri
                    if c == 0:
                        break
                    u = sub & -sub
                    w = sub + u
                    sub = w + (((w ^ sub) // u) >> 2)
            vals[ci] = best

    # ---- reconstruct
    chosen_c = np.full(nn, -1, np.int64)
    chosen_c[0] = start[0]
    out = np.empty(m, np.int64)
    for v in range(nn):
        ci = chosen_c[v]
        L = left_a[v]
        if L < 0:
            mask = masks[ci]
            b = 0
            while ((mask >> b) & 1) == 0:
                b += 1
            out[lo_a[v]] = za0[v] + b
        else:
            chosen_c[L] = bl[ci]
            chosen_c[right_a[v]] = br[ci]
    stats = np.zeros(4, np.int64)
    stats[0] = used
    stats[1] = count.max()
    stats[2] = splits_seen
    stats[3] = nbits.max()
    return out, vals[start[0]], stats, count
