"""Pure-Python occupation-basis kernels; the fallback for ``_kernels``.

Ranking here goes through a dictionary lookup rather than the
combinatorial number system, so the two backends check each other.
"""
import numpy as np


def composition_table(M, N):
    t = np.zeros((M + 1, N + 1), dtype=np.int64)
    t[1, :] = 1
    for m in range(2, M + 1):
        t[m, 0] = 1
        for r in range(1, N + 1):
            t[m, r] = t[m, r - 1] + t[m - 1, r]
    return t


def _compositions(M, N):
    if M == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(M - 1, N - first):
            yield (first,) + rest


_index_cache = {}


def _index(M, N):
    key = (M, N)
    if key not in _index_cache:
        if len(_index_cache) > 64:
            _index_cache.clear()
        _index_cache[key] = {occ: k for k, occ in enumerate(_compositions(M, N))}
    return _index_cache[key]


def enumerate_sector(M, N):
    return np.array(list(_compositions(M, N)), dtype=np.int64).reshape(-1, M)


def rank_states(occ, N):
    occ = np.asarray(occ)
    idx = _index(occ.shape[1], N)
    return np.array([idx[tuple(int(x) for x in row)] for row in occ], dtype=np.int64)


def hop_structure(occ, N):
    occ = np.asarray(occ)
    M = occ.shape[1]
    idx = _index(M, N)
    rows, cols, pair, amp = [], [], [], []
    for s, row in enumerate(occ.tolist()):
        for j in range(M):
            if row[j] == 0:
                continue
            for i in range(M):
                work = list(row)
                a = np.sqrt(work[j])
                work[j] -= 1
                a *= np.sqrt(work[i] + 1)
                work[i] += 1
                rows.append(idx[tuple(work)])
                cols.append(s)
                pair.append(i * M + j)
                amp.append(a)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(pair, dtype=np.int64), np.array(amp, dtype=float))


def raise_structure(occ, N):
    occ = np.asarray(occ)
    M = occ.shape[1]
    idx = _index(M, N + 1)
    rows, cols, mode, amp = [], [], [], []
    for s, row in enumerate(occ.tolist()):
        for i in range(M):
            work = list(row)
            amp.append(np.sqrt(work[i] + 1))
            work[i] += 1
            rows.append(idx[tuple(work)])
            cols.append(s)
            mode.append(i)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(mode, dtype=np.int64), np.array(amp, dtype=float))
