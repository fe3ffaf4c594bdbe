# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled hot loops. Must stay draw-for-draw identical to ``_fallback.py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t
from libc.string cimport memset
from libcpp.vector cimport vector
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "compiled"


cdef inline bitgen_t* _bitgen(object rng) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")


def sample_batch(const int64_t[::1] in_ptr, const int32_t[::1] in_src, const int32_t[::1] in_eid,
                 const double[:, ::1] probs, const uint8_t[:, ::1] rumor,
                 Py_ssize_t count, int layer, object rng):
    """Generate ``count`` reverse samples; ``layer < 0`` draws the layer uniformly."""
    cdef Py_ssize_t n = rumor.shape[1], r = rumor.shape[0]
    cdef bitgen_t* bg = _bitgen(rng)
    cdef cnp.ndarray[int32_t, ndim=1] layers_arr = np.empty(count, dtype=np.int32)
    cdef cnp.ndarray[uint8_t, ndim=1] full_arr = np.zeros(count, dtype=np.uint8)
    cdef cnp.ndarray[int64_t, ndim=1] offsets_arr = np.zeros(count + 1, dtype=np.int64)
    cdef int32_t[::1] layers = layers_arr
    cdef uint8_t[::1] full = full_arr
    cdef int64_t[::1] offsets = offsets_arr
    cdef int64_t[::1] stamp = np.full(max(n, 1), -1, dtype=np.int64)
    cdef vector[int32_t] users, cur, nxt
    cdef Py_ssize_t s, idx, a, j
    cdef int32_t root, u, t, lay
    cdef bint hit
    cdef int64_t start

    with rng.bit_generator.lock, nogil:
        for s in range(count):
            start = users.size()
            if layer < 0:
                idx = <Py_ssize_t>(bg.next_double(bg.state) * n * r)
                if idx >= n * r:
                    idx = n * r - 1
                lay = <int32_t>(idx // n)
                root = <int32_t>(idx % n)
            else:
                lay = layer
                idx = <Py_ssize_t>(bg.next_double(bg.state) * n)
                if idx >= n:
                    idx = n - 1
                root = <int32_t>idx
            layers[s] = lay
            cur.clear()
            cur.push_back(root)
            stamp[root] = s
            while True:
                if cur.size() == 0:
                    full[s] = 1
                    users.resize(start)
                    break
                hit = False
                for a in range(<Py_ssize_t>cur.size()):
                    if rumor[lay, cur[a]]:
                        hit = True
                        break
                if hit:
                    break
                nxt.clear()
                for a in range(<Py_ssize_t>cur.size()):
                    u = cur[a]
                    users.push_back(u)
                    for j in range(in_ptr[u], in_ptr[u + 1]):
                        t = in_src[j]
                        if stamp[t] == s:
                            continue
                        if bg.next_double(bg.state) < probs[lay, in_eid[j]]:
                            stamp[t] = s
                            nxt.push_back(t)
                cur.swap(nxt)
            offsets[s + 1] = users.size()

    users_arr = np.empty(users.size(), dtype=np.int32)
    cdef int32_t[::1] uv = users_arr
    for j in range(<Py_ssize_t>users.size()):
        uv[j] = users[j]
    return layers_arr, full_arr.view(np.bool_), offsets_arr, users_arr


cdef Py_ssize_t _spread(Py_ssize_t n, const int64_t[::1] out_ptr, const int32_t[::1] dst,
                        const uint8_t[::1] live, const uint8_t[::1] rumor_row,
                        const uint8_t[::1] positive, int32_t extra,
                        uint8_t[::1] status, uint8_t[::1] offer,
                        vector[int32_t]& touched, vector[int32_t]& cur, vector[int32_t]& nxt) noexcept nogil:
    """Competitive cascade on one realization; returns the rumor-active node count."""
    cdef Py_ssize_t v, a, e, n_rumor = 0
    cdef int32_t u, w
    cdef uint8_t s
    touched.clear()
    cur.clear()
    for v in range(n):
        if positive[v] or v == extra:
            status[v] = 2
            touched.push_back(<int32_t>v)
            cur.push_back(<int32_t>v)
    for v in range(n):
        if rumor_row[v]:
            if status[v] == 0:
                touched.push_back(<int32_t>v)
                cur.push_back(<int32_t>v)
            status[v] = 1
            n_rumor += 1
    while cur.size():
        nxt.clear()
        for a in range(<Py_ssize_t>cur.size()):
            u = cur[a]
            s = status[u]
            for e in range(out_ptr[u], out_ptr[u + 1]):
                if not live[e]:
                    continue
                w = dst[e]
                if status[w] != 0:
                    continue
                if offer[w] == 0:
                    nxt.push_back(w)
                offer[w] |= s
        for a in range(<Py_ssize_t>nxt.size()):
            w = nxt[a]
            if offer[w] & 1:
                status[w] = 1
                n_rumor += 1
            else:
                status[w] = 2
            offer[w] = 0
            touched.push_back(w)
        cur.swap(nxt)
    for a in range(<Py_ssize_t>touched.size()):
        status[touched[a]] = 0
    return n_rumor


def simulate_batch(const int64_t[::1] out_ptr, const int32_t[::1] dst,
                   const double[:, ::1] probs, const uint8_t[:, ::1] rumor,
                   const uint8_t[::1] positive, const int32_t[::1] candidates,
                   const double[::1] weights, Py_ssize_t num, object rng):
    """Per-run objective values, shape ``(len(candidates), num)``.

    Run ``j`` draws one live-edge realization per layer (``m`` uniforms in
    edge-id order) and evaluates every candidate on it; candidate ``-1``
    means the positive set alone.
    """
    cdef Py_ssize_t n = rumor.shape[1], r = rumor.shape[0], m = dst.shape[0]
    cdef Py_ssize_t c = candidates.shape[0]
    cdef bitgen_t* bg = _bitgen(rng)
    cdef cnp.ndarray[double, ndim=2] out_arr = np.zeros((c, num), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef uint8_t[::1] live = np.zeros(max(m, 1), dtype=np.uint8)
    cdef uint8_t[::1] status = np.zeros(max(n, 1), dtype=np.uint8)
    cdef uint8_t[::1] offer = np.zeros(max(n, 1), dtype=np.uint8)
    cdef vector[int32_t] touched, cur, nxt
    cdef Py_ssize_t j, i, e, ci, n_rumor

    with rng.bit_generator.lock, nogil:
        for j in range(num):
            for i in range(r):
                for e in range(m):
                    live[e] = bg.next_double(bg.state) < probs[i, e]
                for ci in range(c):
                    n_rumor = _spread(n, out_ptr, dst, live, rumor[i], positive, candidates[ci],
                                      status, offer, touched, cur, nxt)
                    out[ci, j] += weights[i] * (n - n_rumor)
    return out_arr


def greedy_cover(const int64_t[::1] offsets, const int32_t[::1] users, const int32_t[::1] layers,
                 const uint8_t[::1] full, const double[::1] weights, Py_ssize_t n, Py_ssize_t k,
                 const uint8_t[::1] forbidden):
    """Greedy weighted max-coverage; returns (picks in order, covered weight sum)."""
    cdef Py_ssize_t theta = layers.shape[0], r = weights.shape[0]
    cdef cnp.ndarray[int64_t, ndim=2] cnt_arr = np.zeros((max(n, 1), r), dtype=np.int64)
    cdef int64_t[:, ::1] cnt = cnt_arr
    cdef int64_t[::1] uptr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] fill = np.zeros(n + 1, dtype=np.int64)
    cdef int32_t[::1] usamp = np.empty(users.shape[0], dtype=np.int32)
    cdef uint8_t[::1] covered = np.zeros(max(theta, 1), dtype=np.uint8)
    cdef uint8_t[::1] blocked = np.array(forbidden, dtype=np.uint8, copy=True)
    cdef cnp.ndarray[int32_t, ndim=1] seeds_arr = np.empty(k, dtype=np.int32)
    cdef int32_t[::1] seeds = seeds_arr
    cdef Py_ssize_t s, a, b, u, i, it, best
    cdef double g, bestg, total = 0.0

    with nogil:
        for s in range(theta):
            if full[s]:
                continue
            for a in range(offsets[s], offsets[s + 1]):
                cnt[users[a], layers[s]] += 1
                uptr[users[a] + 1] += 1
        for u in range(n):
            uptr[u + 1] += uptr[u]
            fill[u] = uptr[u]
        for s in range(theta):
            if full[s]:
                continue
            for a in range(offsets[s], offsets[s + 1]):
                usamp[fill[users[a]]] = <int32_t>s
                fill[users[a]] += 1

        for it in range(k):
            best = -1
            bestg = -1.0
            for u in range(n):
                if blocked[u]:
                    continue
                g = 0.0
                for i in range(r):
                    g += weights[i] * cnt[u, i]
                if g > bestg:
                    bestg = g
                    best = u
            seeds[it] = <int32_t>best
            blocked[best] = 1
            for a in range(uptr[best], uptr[best + 1]):
                s = usamp[a]
                if covered[s]:
                    continue
                covered[s] = 1
                for b in range(offsets[s], offsets[s + 1]):
                    cnt[users[b], layers[s]] -= 1

        if k > 0:
            for s in range(theta):
                if covered[s] or full[s]:
                    total += weights[layers[s]]
    return seeds_arr, total
