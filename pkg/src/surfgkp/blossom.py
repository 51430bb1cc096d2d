"""Exact minimum-weight perfect matching on small dense graphs.

The decoder needs thousands to millions of exact matchings per campaign on
complete graphs of up to ~100 detection events, which rules out both greedy
approximations (they would invalidate the failure-rate claims) and generic
pure-Python matchers (too slow at high physical error rates).  This module
implements the classic O(n^3) primal-dual blossom algorithm for maximum
weight matching (Galil's formulation with per-blossom best-edge lists),
written against flat integer arrays so that numba can compile it.  Without
numba the same code runs as plain Python.

Weights are scaled to integers internally, which keeps every dual update
exact; the scale preserves ~2^-32 relative precision of the input floats.

``min_weight_perfect_matching`` solves the decoder's problem: minimum
weight perfect matching on a complete graph with an even vertex count,
via the standard transform w -> (w_max + 1) - w plus a maximum-cardinality
maximum-weight matching.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly by the test suite
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _max_weight_matching_core(nvertex, eu, ev, ew):  # noqa: C901
    """Maximum-weight maximum-cardinality matching, integer weights.

    Returns ``mate_vertex`` with mate_vertex[v] = matched partner or -1.
    """
    nedge = eu.shape[0]
    n2 = 2 * nvertex

    maxweight = 0
    for k in range(nedge):
        if ew[k] > maxweight:
            maxweight = ew[k]

    # endpoint p (p = 2k or 2k+1) -> vertex
    ends = np.empty(2 * nedge, dtype=np.int64)
    for k in range(nedge):
        ends[2 * k] = eu[k]
        ends[2 * k + 1] = ev[k]

    # adjacency: remote endpoints per vertex (CSR)
    deg = np.zeros(nvertex + 1, dtype=np.int64)
    for k in range(nedge):
        deg[eu[k] + 1] += 1
        deg[ev[k] + 1] += 1
    nb_ptr = np.cumsum(deg)
    fill = nb_ptr[:-1].copy()
    nb_p = np.empty(2 * nedge, dtype=np.int64)
    for k in range(nedge):
        nb_p[fill[eu[k]]] = 2 * k + 1  # remote endpoint as seen from u
        fill[eu[k]] += 1
        nb_p[fill[ev[k]]] = 2 * k  # remote endpoint as seen from v
        fill[ev[k]] += 1

    mate = np.full(nvertex, -1, dtype=np.int64)  # endpoint index or -1
    label = np.zeros(n2, dtype=np.int64)
    labelend = np.full(n2, -1, dtype=np.int64)
    inblossom = np.arange(nvertex, dtype=np.int64)
    blossomparent = np.full(n2, -1, dtype=np.int64)
    blossombase = np.concatenate(
        (np.arange(nvertex, dtype=np.int64), np.full(nvertex, -1, dtype=np.int64))
    )
    childs = np.full((n2, nvertex + 2), -1, dtype=np.int64)
    childs_len = np.zeros(n2, dtype=np.int64)
    endps = np.full((n2, nvertex + 2), -1, dtype=np.int64)
    endps_len = np.zeros(n2, dtype=np.int64)
    bestedge = np.full(n2, -1, dtype=np.int64)
    # blossombestedges: len -1 encodes "absent" (rebuild from leaves)
    bbe = np.full((n2, n2), -1, dtype=np.int64)
    bbe_len = np.full(n2, -1, dtype=np.int64)
    unused = np.arange(nvertex, n2, dtype=np.int64)
    unused_top = np.array([nvertex], dtype=np.int64)
    dualvar = np.concatenate(
        (
            np.full(nvertex, maxweight, dtype=np.int64),
            np.zeros(nvertex, dtype=np.int64),
        )
    )
    allowedge = np.zeros(nedge, dtype=np.bool_)
    queue = np.empty(4 * nvertex * nvertex + 16, dtype=np.int64)
    qhead = np.zeros(1, dtype=np.int64)

    leafstack = np.empty(n2 + 2, dtype=np.int64)
    leafbuf = np.empty(nvertex + 2, dtype=np.int64)
    scanpath = np.empty(n2 + 2, dtype=np.int64)
    expstack = np.empty(nvertex + 2, dtype=np.int64)
    augstack_b = np.empty(4 * nvertex + 8, dtype=np.int64)
    augstack_v = np.empty(4 * nvertex + 8, dtype=np.int64)
    rotbuf = np.empty(nvertex + 2, dtype=np.int64)

    def slack(k):
        return dualvar[eu[k]] + dualvar[ev[k]] - 2 * ew[k]

    def blossom_leaves(b):
        # fills leafbuf, returns count
        cnt = 0
        sp = 0
        leafstack[sp] = b
        sp += 1
        while sp > 0:
            sp -= 1
            t = leafstack[sp]
            if t < nvertex:
                leafbuf[cnt] = t
                cnt += 1
            else:
                for i in range(childs_len[t]):
                    leafstack[sp] = childs[t, i]
                    sp += 1
        return cnt

    def assign_label(w0, t0, p0):
        w, t, p = w0, t0, p0
        while True:
            b = inblossom[w]
            label[w] = t
            label[b] = t
            labelend[w] = p
            labelend[b] = p
            bestedge[w] = -1
            bestedge[b] = -1
            if t == 1:
                cnt = blossom_leaves(b)
                for i in range(cnt):
                    queue[qhead[0]] = leafbuf[i]
                    qhead[0] += 1
                return
            # t == 2: continue by S-labeling the mate of the base
            base = blossombase[b]
            w = ends[mate[base]]
            t = 1
            p = mate[base] ^ 1
            # loop continues once more with t == 1, then returns

    def scan_blossom(v0, w0):
        v, w = v0, w0
        pathlen = 0
        base = np.int64(-1)
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            scanpath[pathlen] = b
            pathlen += 1
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = ends[labelend[b]]
                b = inblossom[v]
                v = ends[labelend[b]]
            if w != -1:
                v, w = w, v
        for i in range(pathlen):
            label[scanpath[i]] = 1
        return base

    def add_blossom(base, k):
        v = eu[k]
        w = ev[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        unused_top[0] -= 1
        b = unused[unused_top[0]]
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        nch = 0
        nep = 0
        # trace back from v to the common base
        while bv != bb:
            blossomparent[bv] = b
            childs[b, nch] = bv
            nch += 1
            endps[b, nep] = labelend[bv]
            nep += 1
            v = ends[labelend[bv]]
            bv = inblossom[v]
        childs[b, nch] = bb
        nch += 1
        # reverse collected part
        for i in range(nch // 2):
            tmp = childs[b, i]
            childs[b, i] = childs[b, nch - 1 - i]
            childs[b, nch - 1 - i] = tmp
        for i in range(nep // 2):
            tmp = endps[b, i]
            endps[b, i] = endps[b, nep - 1 - i]
            endps[b, nep - 1 - i] = tmp
        endps[b, nep] = 2 * k
        nep += 1
        # trace forward from w
        while bw != bb:
            blossomparent[bw] = b
            childs[b, nch] = bw
            nch += 1
            endps[b, nep] = labelend[bw] ^ 1
            nep += 1
            w = ends[labelend[bw]]
            bw = inblossom[w]
        childs_len[b] = nch
        endps_len[b] = nep
        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0
        cnt = blossom_leaves(b)
        for i in range(cnt):
            lv = leafbuf[i]
            if label[inblossom[lv]] == 2:
                queue[qhead[0]] = lv
                qhead[0] += 1
            inblossom[lv] = b
        # merge best-edge candidate lists of the children
        for i in range(n2):
            bbe[b, i] = -1  # bestedgeto scratch, indexed by blossom id
        for ci in range(nch):
            cbv = childs[b, ci]
            if bbe_len[cbv] == -1:
                # scan all edges of all leaves
                lcnt = blossom_leaves(cbv)
                for li in range(lcnt):
                    lv = leafbuf[li]
                    for pi in range(nb_ptr[lv], nb_ptr[lv + 1]):
                        kk = nb_p[pi] // 2
                        jj = ev[kk] if inblossom[ev[kk]] != b else eu[kk]
                        bj = inblossom[jj]
                        if bj != b and label[bj] == 1:
                            if bbe[b, bj] == -1 or slack(kk) < slack(bbe[b, bj]):
                                bbe[b, bj] = kk
            else:
                for li in range(bbe_len[cbv]):
                    kk = bbe[cbv, li]
                    jj = ev[kk] if inblossom[ev[kk]] != b else eu[kk]
                    bj = inblossom[jj]
                    if bj != b and label[bj] == 1:
                        if bbe[b, bj] == -1 or slack(kk) < slack(bbe[b, bj]):
                            bbe[b, bj] = kk
            bbe_len[cbv] = -1
            bestedge[cbv] = -1
        # compact scratch row into the blossom's candidate list
        m = 0
        for i in range(n2):
            if bbe[b, i] != -1:
                bbe[b, m] = bbe[b, i]
                if m != i:
                    bbe[b, i] = -1
                m += 1
        bbe_len[b] = m
        bestedge[b] = -1
        for i in range(m):
            kk = bbe[b, i]
            if bestedge[b] == -1 or slack(kk) < slack(bestedge[b]):
                bestedge[b] = kk

    def expand_blossom(b0, endstage):
        sp = 0
        expstack[sp] = b0
        sp += 1
        while sp > 0:
            sp -= 1
            b = expstack[sp]
            for ci in range(childs_len[b]):
                s = childs[b, ci]
                blossomparent[s] = -1
                if s < nvertex:
                    inblossom[s] = s
                elif endstage and dualvar[s] == 0:
                    expstack[sp] = s
                    sp += 1
                else:
                    cnt = blossom_leaves(s)
                    for li in range(cnt):
                        inblossom[leafbuf[li]] = s
            if (not endstage) and label[b] == 2:
                # relabel the path through the expanded T-blossom
                entrychild = inblossom[ends[labelend[b] ^ 1]]
                nch = childs_len[b]
                j = 0
                for ci in range(nch):
                    if childs[b, ci] == entrychild:
                        j = ci
                        break
                if j & 1:
                    j -= nch
                    jstep = 1
                    endptrick = 0
                else:
                    jstep = -1
                    endptrick = 1
                p = labelend[b]
                while j != 0:
                    label[ends[p ^ 1]] = 0
                    q = endps[b, (j - endptrick) % nch] ^ endptrick
                    label[ends[q ^ 1]] = 0
                    assign_label(ends[p ^ 1], 2, p)
                    allowedge[q // 2] = True
                    j += jstep
                    p = endps[b, (j - endptrick) % nch] ^ endptrick
                    allowedge[p // 2] = True
                    j += jstep
                bv = childs[b, j % nch]
                label[ends[p ^ 1]] = 2
                label[bv] = 2
                labelend[ends[p ^ 1]] = p
                labelend[bv] = p
                bestedge[bv] = -1
                j += jstep
                while childs[b, j % nch] != entrychild:
                    bv = childs[b, j % nch]
                    if label[bv] == 1:
                        j += jstep
                        continue
                    cnt = blossom_leaves(bv)
                    lv = np.int64(-1)
                    for li in range(cnt):
                        if label[leafbuf[li]] != 0:
                            lv = leafbuf[li]
                            break
                    if lv >= 0:
                        label[lv] = 0
                        label[ends[mate[blossombase[bv]]]] = 0
                        assign_label(lv, 2, labelend[lv])
                    j += jstep
            label[b] = -1
            labelend[b] = -1
            childs_len[b] = 0
            endps_len[b] = 0
            blossombase[b] = -1
            bbe_len[b] = -1
            unused[unused_top[0]] = b
            unused_top[0] += 1

    def augment_blossom(b0, v0):
        sp = 0
        augstack_b[sp] = b0
        augstack_v[sp] = v0
        sp += 1
        while sp > 0:
            sp -= 1
            b = augstack_b[sp]
            v = augstack_v[sp]
            # immediate child containing v
            t = v
            while blossomparent[t] != b:
                t = blossomparent[t]
            if t >= nvertex:
                augstack_b[sp] = t
                augstack_v[sp] = v
                sp += 1
            nch = childs_len[b]
            i = 0
            for ci in range(nch):
                if childs[b, ci] == t:
                    i = ci
                    break
            j = i
            if i & 1:
                j -= nch
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            while j != 0:
                j += jstep
                tt = childs[b, j % nch]
                p = endps[b, (j - endptrick) % nch] ^ endptrick
                if tt >= nvertex:
                    augstack_b[sp] = tt
                    augstack_v[sp] = ends[p]
                    sp += 1
                j += jstep
                tt = childs[b, j % nch]
                if tt >= nvertex:
                    augstack_b[sp] = tt
                    augstack_v[sp] = ends[p ^ 1]
                    sp += 1
                mate[ends[p]] = p ^ 1
                mate[ends[p ^ 1]] = p
            # rotate child/endpoint lists so the new base is first
            for ci in range(nch):
                rotbuf[ci] = childs[b, (i + ci) % nch]
            for ci in range(nch):
                childs[b, ci] = rotbuf[ci]
            for ci in range(nch):
                rotbuf[ci] = endps[b, (i + ci) % nch]
            for ci in range(nch):
                endps[b, ci] = rotbuf[ci]
            # the subtask for the child containing v may still be pending,
            # but the rotated blossom's base is v by construction
            blossombase[b] = v

    def augment_matching(k):
        for side in range(2):
            if side == 0:
                s = eu[k]
                p = 2 * k + 1
            else:
                s = ev[k]
                p = 2 * k
            while True:
                bs = inblossom[s]
                if bs >= nvertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = ends[labelend[bs]]
                bt = inblossom[t]
                s = ends[labelend[bt]]
                j = ends[labelend[bt] ^ 1]
                if bt >= nvertex:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    # main loop: one stage per augmentation
    for _stage in range(nvertex):
        for i in range(n2):
            label[i] = 0
            bestedge[i] = -1
        for b in range(nvertex, n2):
            bbe_len[b] = -1
        for k in range(nedge):
            allowedge[k] = False
        qhead[0] = 0
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)
        augmented = False
        while True:
            while qhead[0] > 0 and not augmented:
                qhead[0] -= 1
                v = queue[qhead[0]]
                for pi in range(nb_ptr[v], nb_ptr[v + 1]):
                    p = nb_p[pi]
                    k = p // 2
                    w = ends[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = np.int64(0)
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        lw = label[inblossom[w]]
                        if lw == 0:
                            assign_label(w, 2, p ^ 1)
                        elif lw == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break

            # dual adjustment
            deltatype = -1
            delta = np.int64(0)
            deltaedge = np.int64(-1)
            deltablossom = np.int64(-1)
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v])
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(n2):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    d = slack(bestedge[b]) // 2
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(nvertex, n2):
                if (
                    blossombase[b] >= 0
                    and blossomparent[b] == -1
                    and label[b] == 2
                    and (deltatype == -1 or dualvar[b] < delta)
                ):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                # no tight structure remains: maximum cardinality reached
                deltatype = 1
                dmin = dualvar[0]
                for v in range(1, nvertex):
                    if dualvar[v] < dmin:
                        dmin = dualvar[v]
                delta = max(np.int64(0), dmin)

            for v in range(nvertex):
                lab = label[inblossom[v]]
                if lab == 1:
                    dualvar[v] -= delta
                elif lab == 2:
                    dualvar[v] += delta
            for b in range(nvertex, n2):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i = eu[deltaedge]
                if label[inblossom[i]] == 0:
                    i = ev[deltaedge]
                queue[qhead[0]] = i
                qhead[0] += 1
            elif deltatype == 3:
                allowedge[deltaedge] = True
                queue[qhead[0]] = eu[deltaedge]
                qhead[0] += 1
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break
        for b in range(nvertex, n2):
            if (
                blossomparent[b] == -1
                and blossombase[b] >= 0
                and label[b] == 1
                and dualvar[b] == 0
            ):
                expand_blossom(b, True)

    out = np.full(nvertex, -1, dtype=np.int64)
    for v in range(nvertex):
        if mate[v] >= 0:
            out[v] = ends[mate[v]]
    return out


def max_weight_matching(n: int, eu, ev, weights) -> np.ndarray:
    """Maximum-weight maximum-cardinality matching of an integer-weight graph."""
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    w = np.ascontiguousarray(weights, dtype=np.int64)
    return _max_weight_matching_core(n, eu, ev, w)


def min_weight_perfect_matching(dist: np.ndarray) -> np.ndarray:
    """Exact minimum-weight perfect matching on a complete graph.

    Parameters
    ----------
    dist : (k, k) float array
        Symmetric pairwise costs; k must be even.

    Returns
    -------
    mate : (k,) int array with mate[i] = matched partner of i.
    """
    k = dist.shape[0]
    if k % 2:
        raise ValueError("perfect matching needs an even vertex count")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    iu, iv = np.triu_indices(k, 1)
    w = dist[iu, iv].astype(float)
    wmax = float(w.max(initial=0.0))
    # min -> max transform, then scale to integers (exact dual arithmetic)
    shifted = (wmax + 1.0) - w
    scale = (2.0**32) / (wmax + 2.0)
    iw = np.round(shifted * scale).astype(np.int64)
    mate = max_weight_matching(k, iu, iv, iw)
    if np.any(mate < 0):  # pragma: no cover - complete graphs always match
        raise RuntimeError("matching left vertices unmatched on a complete graph")
    return mate


def matching_total_weight(dist: np.ndarray, mate: np.ndarray) -> float:
    """Total weight of a matching given as a mate array."""
    k = dist.shape[0]
    return sum(float(dist[i, mate[i]]) for i in range(k) if mate[i] > i)


def brute_force_min_perfect(dist: np.ndarray) -> float:
    """Reference optimum by exhaustive enumeration (k <= 12)."""
    k = dist.shape[0]
    if k == 0:
        return 0.0
    if k > 12:
        raise ValueError("enumeration oracle limited to 12 vertices")

    verts = list(range(k))

    def rec(free):
        if not free:
            return 0.0
        i = free[0]
        best = np.inf
        for j in free[1:]:
            rest = [x for x in free if x != i and x != j]
            best = min(best, dist[i, j] + rec(rest))
        return best

    return rec(verts)
