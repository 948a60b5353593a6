# cython: language_level=3
"""Compiled SGNS kernels; see ``_pykernels`` for the reference semantics.

``train_sets`` releases the GIL and runs one OpenMP thread per chunk of sets.
Threads write to the shared U/V rows without locks (Hogwild); with a single
chunk the run is bit-reproducible.
"""
from cython.parallel cimport parallel, prange
from libc.math cimport exp
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memset

import numpy as np

BACKEND = "cython"

DEF TABLE_SIZE = 1000
DEF MAX_EXP = 6.0
DEF MAX_NEGATIVE_REDRAWS = 8

cdef double SIGMOID_TABLE[TABLE_SIZE]
cdef int _i
for _i in range(TABLE_SIZE):
    SIGMOID_TABLE[_i] = 1.0 / (1.0 + exp(-((<double>_i / TABLE_SIZE) * 2.0 - 1.0) * MAX_EXP))


cdef inline uint64_t sm_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t sm_bounded(uint64_t* state, uint64_t n) noexcept nogil:
    return ((sm_next(state) >> 32) * n) >> 32


cdef inline double sm_uniform(uint64_t* state) noexcept nogil:
    return <double>(sm_next(state) >> 11) * (1.0 / 9007199254740992.0)


cdef inline double c_sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double table_sigmoid(double x) noexcept nogil:
    if x >= MAX_EXP:
        return 1.0
    if x <= -MAX_EXP:
        return 0.0
    return SIGMOID_TABLE[<int>((x + MAX_EXP) * (TABLE_SIZE / MAX_EXP / 2.0))]


cdef inline int draw_alias(const double* prob, const int* alias, Py_ssize_t n,
                           uint64_t* state) noexcept nogil:
    cdef Py_ssize_t i = <Py_ssize_t>sm_bounded(state, <uint64_t>n)
    if sm_uniform(state) < prob[i]:
        return <int>i
    return alias[i]


cdef inline void update_one(double* u, double* v, double* neu1e, Py_ssize_t m,
                            double label, double lr, bint use_table) noexcept nogil:
    cdef Py_ssize_t d
    cdef double f, g
    cdef double f0 = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0
    # four independent accumulators; fixed order keeps runs reproducible
    d = 0
    while d + 4 <= m:
        f0 += u[d] * v[d]
        f1 += u[d + 1] * v[d + 1]
        f2 += u[d + 2] * v[d + 2]
        f3 += u[d + 3] * v[d + 3]
        d += 4
    while d < m:
        f0 += u[d] * v[d]
        d += 1
    f = (f0 + f1) + (f2 + f3)
    if use_table:
        g = (label - table_sigmoid(f)) * lr
    else:
        g = (label - c_sigmoid(f)) * lr
    for d in range(m):
        neu1e[d] += g * v[d]
    for d in range(m):
        v[d] += g * u[d]


cdef void step(double* U, double* V, Py_ssize_t m, int target, int context,
               const int* negs, Py_ssize_t n_neg, double lr, bint use_table,
               double* neu1e) noexcept nogil:
    cdef Py_ssize_t d, k
    cdef double* u = U + <Py_ssize_t>target * m
    memset(neu1e, 0, m * sizeof(double))
    update_one(u, V + <Py_ssize_t>context * m, neu1e, m, 1.0, lr, use_table)
    for k in range(n_neg):
        update_one(u, V + <Py_ssize_t>negs[k] * m, neu1e, m, 0.0, lr, use_table)
    for d in range(m):
        u[d] += neu1e[d]


def sigmoid(double x):
    return c_sigmoid(x)


def sgns_update(double[:, ::1] U, double[:, ::1] V, int target, int context,
                negatives, double lr, bint use_table=False):
    cdef int[::1] negs = np.ascontiguousarray(negatives, dtype=np.intc)
    cdef Py_ssize_t m = U.shape[1]
    cdef double* neu1e = <double*>malloc(m * sizeof(double))
    if neu1e == NULL:
        raise MemoryError()
    try:
        step(&U[0, 0], &V[0, 0], m, target, context,
             &negs[0] if negs.shape[0] else NULL, negs.shape[0], lr, use_table, neu1e)
    finally:
        free(neu1e)


def alias_sample(const double[::1] prob, const int[::1] alias, Py_ssize_t size, uint64_t seed):
    cdef uint64_t state = seed
    cdef Py_ssize_t k, n = prob.shape[0]
    out = np.empty(size, dtype=np.int32)
    cdef int[::1] o = out
    with nogil:
        for k in range(size):
            o[k] = draw_alias(&prob[0], &alias[0], n, &state)
    return out


def splitmix_stream(uint64_t seed, Py_ssize_t size):
    cdef uint64_t state = seed
    cdef Py_ssize_t k
    out = np.empty(size, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for k in range(size):
        o[k] = sm_next(&state)
    return out


cdef long long run_chunk(double* U, double* V, Py_ssize_t m,
                         const int* ids, const long long* offsets, Py_ssize_t lo, Py_ssize_t hi,
                         const double* prob, const int* alias, Py_ssize_t n_items,
                         int n_neg, int window, double lr_start, double lr_end,
                         long long epoch_pairs, Py_ssize_t nchunks, uint64_t seed,
                         bint use_table, int* items, int* negs, double* neu1e) noexcept nogil:
    cdef uint64_t state = seed
    cdef long long done = 0
    cdef Py_ssize_t s, i, j, j_lo, j_hi, k, a, n_drawn
    cdef int tmp, ctx, cand, attempt
    cdef double progress, lr
    for s in range(lo, hi):
        k = offsets[s + 1] - offsets[s]
        if k < 2:
            continue
        for i in range(k):
            items[i] = ids[offsets[s] + i]
        if window > 0:
            i = k - 1
            while i > 0:
                a = <Py_ssize_t>sm_bounded(&state, <uint64_t>(i + 1))
                tmp = items[i]
                items[i] = items[a]
                items[a] = tmp
                i -= 1
        for i in range(k):
            if window > 0:
                j_lo = i - window if i > window else 0
                j_hi = i + window if i + window < k - 1 else k - 1
            else:
                j_lo = 0
                j_hi = k - 1
            for j in range(j_lo, j_hi + 1):
                if j == i:
                    continue
                if epoch_pairs > 0:
                    progress = <double>done * nchunks / epoch_pairs
                    if progress > 1.0:
                        progress = 1.0
                else:
                    progress = 1.0
                lr = lr_start + (lr_end - lr_start) * progress
                ctx = items[j]
                n_drawn = 0
                for a in range(n_neg):
                    for attempt in range(MAX_NEGATIVE_REDRAWS + 1):
                        cand = draw_alias(prob, alias, n_items, &state)
                        if cand != ctx:
                            negs[n_drawn] = cand
                            n_drawn += 1
                            break
                step(U, V, m, items[i], ctx, negs, n_drawn, lr, use_table, neu1e)
                done += 1
    return done


def train_sets(double[:, ::1] U, double[:, ::1] V, const int[::1] ids,
               const long long[::1] offsets, const double[::1] prob, const int[::1] alias,
               int n_neg, int window, double lr_start, double lr_end,
               long long epoch_pairs, const uint64_t[::1] seeds, bint use_table=False):
    """Run one pass of SGNS over the flattened sets; returns the number of pairs."""
    cdef Py_ssize_t nchunks = seeds.shape[0]
    cdef Py_ssize_t nsets = offsets.shape[0] - 1
    cdef Py_ssize_t m = U.shape[1]
    cdef Py_ssize_t n_items = prob.shape[0]
    cdef Py_ssize_t max_len = 0, s, c
    cdef long long total = 0
    cdef int* items
    cdef int* negs
    cdef double* neu1e
    for s in range(nsets):
        if offsets[s + 1] - offsets[s] > max_len:
            max_len = offsets[s + 1] - offsets[s]
    if nsets == 0 or max_len < 2:
        return 0
    cdef double* Up = &U[0, 0]
    cdef double* Vp = &V[0, 0]
    cdef const int* idp = &ids[0]
    cdef const long long* offp = &offsets[0]
    cdef const double* probp = &prob[0]
    cdef const int* aliasp = &alias[0]
    with nogil, parallel(num_threads=nchunks):
        items = <int*>malloc(max_len * sizeof(int))
        negs = <int*>malloc((n_neg + 1) * sizeof(int))
        neu1e = <double*>malloc(m * sizeof(double))
        for c in prange(nchunks, schedule="static", chunksize=1):
            total += run_chunk(Up, Vp, m, idp, offp,
                               c * nsets // nchunks, (c + 1) * nsets // nchunks,
                               probp, aliasp, n_items, n_neg, window, lr_start, lr_end,
                               epoch_pairs, nchunks, seeds[c], use_table, items, negs, neu1e)
        free(items)
        free(negs)
        free(neu1e)
    return total
