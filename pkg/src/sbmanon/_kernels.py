"""Inner loops for percolation matching and Louvain local moving.

Each kernel exists twice: a numba-compiled loop (``*_jit``) and a numpy
version (``*_numpy``).  The public names at the bottom pick one according to
:data:`sbmanon._accel.USE_JIT`.  Both variants visit pairs in the same order
and return identical arrays.
"""
import numpy as np

from ._accel import USE_JIT, njit

# ---------------------------------------------------------------------------
# percolation graph matching
#
# marks[u * n2 + v] counts matched neighbor pairs of (u, v), saturating at
# r + 1.  A pair enters the FIFO queue the moment its count reaches r (both
# endpoints free and, if constrained, labels equal); it is matched when popped
# if both endpoints are still free, otherwise dropped.


def _pgm_py(indptr1, indices1, indptr2, indices2, lab1, lab2, constrained,
            seeds1, r, map12, map21):
    n2 = len(indptr2) - 1
    marks = np.zeros((len(indptr1) - 1) * n2, dtype=np.uint16)
    queue = np.empty(16, dtype=np.int64)
    head = 0
    tail = 0
    order = np.empty(len(indptr1) - 1, dtype=np.int64)
    n_matched = 0
    for s in range(len(seeds1)):
        order[n_matched] = seeds1[s]
        n_matched += 1
    pos = 0
    while True:
        if pos < n_matched:
            u = order[pos]
            pos += 1
            v = map12[u]
            for a in range(indptr1[u], indptr1[u + 1]):
                uu = indices1[a]
                if map12[uu] >= 0:
                    continue
                base = uu * n2
                for b in range(indptr2[v], indptr2[v + 1]):
                    vv = indices2[b]
                    if map21[vv] >= 0:
                        continue
                    k = base + vv
                    if marks[k] > r:
                        continue
                    marks[k] += 1
                    if marks[k] == r:
                        if constrained and lab1[uu] != lab2[vv]:
                            continue
                        if tail == len(queue):
                            grown = np.empty(2 * len(queue), dtype=np.int64)
                            grown[:tail] = queue[:tail]
                            queue = grown
                        queue[tail] = k
                        tail += 1
            continue
        if head == tail:
            break
        k = queue[head]
        head += 1
        uu = k // n2
        vv = k - uu * n2
        if map12[uu] >= 0 or map21[vv] >= 0:
            continue
        map12[uu] = vv
        map21[vv] = uu
        order[n_matched] = uu
        n_matched += 1
    return order[:n_matched]


_pgm_jit = njit(_pgm_py)


def _pgm_numpy(indptr1, indices1, indptr2, indices2, lab1, lab2, constrained,
               seeds1, r, map12, map21):
    n2 = len(indptr2) - 1
    marks = np.zeros((len(indptr1) - 1) * n2, dtype=np.uint16)
    queue = []
    head = 0
    order = [int(s) for s in seeds1]
    pos = 0
    while True:
        if pos < len(order):
            u = order[pos]
            pos += 1
            v = map12[u]
            nu = indices1[indptr1[u]:indptr1[u + 1]]
            nv = indices2[indptr2[v]:indptr2[v + 1]]
            nu = nu[map12[nu] < 0]
            nv = nv[map21[nv] < 0]
            if len(nu) == 0 or len(nv) == 0:
                continue
            # row-major flattening matches the nested loop order of _pgm_py
            k = (nu[:, None] * n2 + nv[None, :]).ravel()
            # pairs within one spread are distinct; counts saturate at r + 1
            mk = np.minimum(marks[k] + 1, r + 1).astype(np.uint16)
            marks[k] = mk
            hit = k[mk == r]
            if constrained and len(hit):
                hu = hit // n2
                hit = hit[lab1[hu] == lab2[hit - hu * n2]]
            queue.extend(hit.tolist())
            continue
        if head == len(queue):
            break
        k = queue[head]
        head += 1
        uu, vv = divmod(k, n2)
        if map12[uu] >= 0 or map21[vv] >= 0:
            continue
        map12[uu] = vv
        map21[vv] = uu
        order.append(uu)
    return np.asarray(order, dtype=np.int64)


# ---------------------------------------------------------------------------
# Louvain local moving on a weighted CSR graph.  Self-loop entries carry the
# internal weight of an aggregated node; they count toward its degree but not
# toward its link weight to any community.


def _louvain_move_py(indptr, indices, weights, degrees, order, comm, m2, max_sweeps):
    n = len(degrees)
    tot = np.zeros(n, dtype=np.float64)
    for i in range(n):
        tot[comm[i]] += degrees[i]
    link = np.zeros(n, dtype=np.float64)
    seen = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    moved_any = False
    for _ in range(max_sweeps):
        moves = 0
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            ki = degrees[i]
            nt = 0
            seen[ci] = True
            touched[nt] = ci
            nt += 1
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                if j == i:
                    continue
                c = comm[j]
                if not seen[c]:
                    seen[c] = True
                    touched[nt] = c
                    nt += 1
                link[c] += weights[e]
            tot[ci] -= ki
            best = ci
            best_gain = link[ci] - tot[ci] * ki / m2
            for t in range(1, nt):
                c = touched[t]
                gain = link[c] - tot[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best = c
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moves += 1
            for t in range(nt):
                c = touched[t]
                link[c] = 0.0
                seen[c] = False
        if moves == 0:
            break
        moved_any = True
    return moved_any


_louvain_move_jit = njit(_louvain_move_py)


if USE_JIT:
    pgm_percolate = _pgm_jit
    louvain_move = _louvain_move_jit
else:
    pgm_percolate = _pgm_numpy
    louvain_move = _louvain_move_py
