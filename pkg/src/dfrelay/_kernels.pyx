# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch relay selection.

Each row of ``snr`` is one flat trellis (first hop, middle hops row-major,
last hop).  Paths are written 0-based.  Tie rule: smallest index wins at
every maximization, identical to :mod:`dfrelay.strategies`.
"""

from libc.stdlib cimport malloc, free


cdef enum:
    OPTIMAL = 0
    HOP = 1
    ADHOC = 2
    BLOCK = 3
    SLIDING = 4
    BRUTE = 5


cdef inline double _link(const double* row, int L, int M, int hop, int i, int j) noexcept nogil:
    if hop == 0:
        return row[j]
    if hop == L - 1:
        return row[M + (L - 2) * M * M + i]
    return row[M + (hop - 1) * M * M + i * M + j]


cdef inline int _size(int L, int M, int layer) noexcept nogil:
    if layer == 0 or layer == L:
        return 1
    return M


cdef inline int _node(const int* path, int layer) noexcept nogil:
    if layer == 0:
        return 0
    return path[layer - 1]


cdef double _window(const double* row, int L, int M, int start, int entry, int n,
                    int* out, double* val, double* nval, int* back) noexcept nogil:
    # out[k - start - 1] receives the relay chosen at layer k, start < k <= min(end, L-1)
    cdef int end = start + n
    cdef int hop, i, j, arg, ex, cur, sz
    cdef double best, cand

    sz = _size(L, M, start + 1)
    for j in range(sz):
        val[j] = _link(row, L, M, start, entry, j)
    for hop in range(start + 1, end):
        sz = _size(L, M, hop + 1)
        for j in range(sz):
            best = -1.0
            arg = 0
            for i in range(M):
                cand = val[i]
                if _link(row, L, M, hop, i, j) < cand:
                    cand = _link(row, L, M, hop, i, j)
                if cand > best:
                    best = cand
                    arg = i
            nval[j] = best
            back[(hop - start - 1) * M + j] = arg
        for j in range(sz):
            val[j] = nval[j]

    sz = _size(L, M, end)
    ex = 0
    for j in range(1, sz):
        if val[j] > val[ex]:
            ex = j
    cur = ex
    if end < L:
        out[end - start - 1] = cur
    for hop in range(end - 1, start, -1):
        cur = back[(hop - start - 1) * M + cur]
        out[hop - start - 1] = cur
    return val[ex]


cdef double _bottleneck(const double* row, int L, int M, const int* path) noexcept nogil:
    cdef int h
    cdef double b = _link(row, L, M, 0, 0, path[0])
    cdef double v
    for h in range(1, L):
        v = _link(row, L, M, h, path[h - 1], _node(path, h + 1) if h + 1 < L else 0)
        if v < b:
            b = v
    return b


cdef void _brute(const double* row, int L, int M, int* path, int* trial) noexcept nogil:
    cdef int k, n = L - 1
    cdef double best = -1.0, v
    for k in range(n):
        trial[k] = 0
    while True:
        v = _bottleneck(row, L, M, trial)
        if v > best:
            best = v
            for k in range(n):
                path[k] = trial[k]
        k = n - 1
        while k >= 0 and trial[k] == M - 1:
            trial[k] = 0
            k -= 1
        if k < 0:
            break
        trial[k] += 1


cdef void _select(const double* row, int L, int M, int strategy, int w,
                  int* path, double* val, double* nval, int* back, int* tmp) noexcept nogil:
    cdef int t, start, size
    if strategy == OPTIMAL:
        _window(row, L, M, 0, 0, L, path, val, nval, back)
    elif strategy == BRUTE:
        _brute(row, L, M, path, tmp)
    elif strategy == HOP:
        for t in range(L - 1):
            _window(row, L, M, t, _node(path, t), 1, path + t, val, nval, back)
    elif strategy == ADHOC:
        for t in range(L - 2):
            _window(row, L, M, t, _node(path, t), 1, path + t, val, nval, back)
        _window(row, L, M, L - 2, _node(path, L - 2), 2, path + L - 2, val, nval, back)
    elif strategy == BLOCK:
        start = 0
        while start < L:
            size = w if w < L - start else L - start
            _window(row, L, M, start, _node(path, start), size, path + start, val, nval, back)
            start += size
    elif strategy == SLIDING:
        for t in range(L - w):
            _window(row, L, M, t, _node(path, t), w, tmp, val, nval, back)
            path[t] = tmp[0]
        _window(row, L, M, L - w, _node(path, L - w), w, path + L - w, val, nval, back)


def select_batch(const double[:, ::1] snr, int hops, int relays, int strategy, int w,
                 int[:, ::1] paths, double[::1] bottleneck):
    """Run one strategy over every row of ``snr``, filling ``paths`` and ``bottleneck``."""
    cdef Py_ssize_t n = snr.shape[0], r
    cdef int L = hops, M = relays
    cdef int nl = 2 * M + (L - 2) * M * M
    if snr.shape[1] != nl:
        raise ValueError(f"rows must have {nl} links, got {snr.shape[1]}")
    if paths.shape[0] != n or paths.shape[1] != L - 1 or bottleneck.shape[0] != n:
        raise ValueError("output buffers do not match the batch size")
    if n == 0:
        return
    cdef double* val = <double*> malloc(M * sizeof(double))
    cdef double* nval = <double*> malloc(M * sizeof(double))
    cdef int* back = <int*> malloc((L + 1) * M * sizeof(int))
    cdef int* tmp = <int*> malloc((L + 1) * sizeof(int))
    if val == NULL or nval == NULL or back == NULL or tmp == NULL:
        free(val); free(nval); free(back); free(tmp)
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                _select(&snr[r, 0], L, M, strategy, w, &paths[r, 0], val, nval, back, tmp)
                bottleneck[r] = _bottleneck(&snr[r, 0], L, M, &paths[r, 0])
    finally:
        free(val); free(nval); free(back); free(tmp)
