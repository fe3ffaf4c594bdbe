"""Pure-Python versions of the kernels in ``_kernels.pyx``.

Same signatures, same random-draw order, same floating-point summation
order: given equal generator states both backends return identical arrays.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_BUF = 4096


class _Uniforms:
    """Sequential doubles from ``rng``, fetched in blocks.

    Block fetches leave the generator further advanced than the compiled
    kernel would, so every kernel call must own a fresh generator.
    """

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.buf = rng.random(_BUF).tolist()
        self.pos = 0

    def next(self) -> float:
        if self.pos == len(self.buf):
            self.buf = self.rng.random(_BUF).tolist()
            self.pos = 0
        x = self.buf[self.pos]
        self.pos += 1
        return x

    def block(self, size: int) -> list[float]:
        return [self.next() for _ in range(size)]


def reverse_sample(in_ptr, in_src, in_eid, rumor_row, root, draw):
    """Level-synchronous reverse search from ``root`` (one sample).

    ``draw(e)`` decides liveness of edge ``e`` on first examination.
    Returns ``(users, is_full)``; users are in discovery order.
    """
    visited = {root}
    cur = [root]
    acc: list[int] = []
    while True:
        if not cur:
            return [], True
        if any(rumor_row[x] for x in cur):
            return acc, False
        nxt = []
        for u in cur:
            acc.append(u)
            for j in range(in_ptr[u], in_ptr[u + 1]):
                t = in_src[j]
                if t in visited:
                    continue
                if draw(in_eid[j]):
                    visited.add(t)
                    nxt.append(t)
        cur = nxt


def sample_batch(in_ptr, in_src, in_eid, probs, rumor, count, layer, rng):
    r, n = rumor.shape
    uni = _Uniforms(rng)
    in_ptr_l, in_src_l, in_eid_l = in_ptr.tolist(), in_src.tolist(), in_eid.tolist()
    probs_l = probs.tolist()
    rumor_l = rumor.astype(bool).tolist()
    layers = np.empty(count, dtype=np.int32)
    full = np.zeros(count, dtype=bool)
    offsets = np.zeros(count + 1, dtype=np.int64)
    users: list[int] = []
    for s in range(count):
        if layer < 0:
            idx = min(int(uni.next() * n * r), n * r - 1)
            lay, root = divmod(idx, n)
        else:
            lay, root = layer, min(int(uni.next() * n), n - 1)
        row = probs_l[lay]
        acc, is_full = reverse_sample(
            in_ptr_l, in_src_l, in_eid_l, rumor_l[lay], root, lambda e: uni.next() < row[e]
        )
        layers[s] = lay
        full[s] = is_full
        users.extend(acc)
        offsets[s + 1] = len(users)
    return layers, full, offsets, np.asarray(users, dtype=np.int32)


def spread(n, out_ptr, dst, live, rumor_row, positive):
    """Synchronous competitive cascade on one realization.

    Returns per-node status: 0 untouched, 1 rumor, 2 positive. Rumor wins ties.
    """
    status = [0] * n
    cur = []
    for v in sorted(positive):
        status[v] = 2
        cur.append(v)
    for v in range(n):
        if rumor_row[v]:
            if status[v] == 0:
                cur.append(v)
            status[v] = 1
    offer = [0] * n
    while cur:
        nxt = []
        for u in cur:
            s = status[u]
            for e in range(out_ptr[u], out_ptr[u + 1]):
                if not live[e]:
                    continue
                w = dst[e]
                if status[w]:
                    continue
                if not offer[w]:
                    nxt.append(w)
                offer[w] |= s
        for w in nxt:
            status[w] = 1 if offer[w] & 1 else 2
            offer[w] = 0
        cur = nxt
    return status


def simulate_batch(out_ptr, dst, probs, rumor, positive, candidates, weights, num, rng):
    r, n = rumor.shape
    m = len(dst)
    uni = _Uniforms(rng)
    out_ptr_l, dst_l = out_ptr.tolist(), dst.tolist()
    probs_l = probs.tolist()
    rumor_l = rumor.astype(bool).tolist()
    base = set(np.flatnonzero(positive).tolist())
    cands = [int(c) for c in candidates]
    w = [float(x) for x in weights]
    out = np.zeros((len(cands), num), dtype=np.float64)
    for j in range(num):
        for i in range(r):
            row = probs_l[i]
            live = [x < p for x, p in zip(uni.block(m), row)]
            for ci, c in enumerate(cands):
                pos = base | {c} if c >= 0 else base
                status = spread(n, out_ptr_l, dst_l, live, rumor_l[i], pos)
                out[ci, j] += w[i] * (n - status.count(1))
    return out


def greedy_cover(offsets, users, layers, full, weights, n, k, forbidden):
    theta = len(layers)
    r = len(weights)
    full = np.asarray(full, dtype=bool)
    sizes = np.diff(offsets)
    sample_of = np.repeat(np.arange(theta), sizes)
    keep = ~full[sample_of]
    cnt = np.zeros((max(n, 1), r), dtype=np.int64)
    np.add.at(cnt, (users[keep], layers[sample_of[keep]]), 1)
    # user -> sample ids, ascending sample order within each user
    order = np.argsort(users[keep], kind="stable")
    by_user = sample_of[keep][order]
    uptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(users[keep], minlength=n), out=uptr[1:])
    covered = np.zeros(theta, dtype=bool)
    blocked = np.array(forbidden, dtype=bool)
    seeds = np.empty(k, dtype=np.int32)
    for it in range(k):
        g = np.zeros(n, dtype=np.float64)
        for i in range(r):
            g = g + weights[i] * cnt[:n, i]
        g[blocked[:n]] = -1.0
        best = int(np.argmax(g))
        seeds[it] = best
        blocked[best] = True
        hit = by_user[uptr[best] : uptr[best + 1]]
        hit = hit[~covered[hit]]
        covered[hit] = True
        if hit.size:
            idx = np.concatenate([np.arange(offsets[s], offsets[s + 1]) for s in hit])
            np.subtract.at(cnt, (users[idx], layers[sample_of[idx]]), 1)
    total = 0.0
    if k > 0:
        w = np.asarray(weights, dtype=np.float64)
        for s in np.flatnonzero(covered | full).tolist():
            total += w[layers[s]]
    return seeds, total
