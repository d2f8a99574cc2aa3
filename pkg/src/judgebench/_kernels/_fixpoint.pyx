# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixpoint kernels over CSR transition arrays and uint8 masks."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def ex_image(const idx_t[::1] indptr, const idx_t[::1] indices, const cnp.uint8_t[::1] target):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = out
    cdef Py_ssize_t s
    cdef idx_t k
    with nogil:
        for s in range(n):
            for k in range(indptr[s], indptr[s + 1]):
                if target[indices[k]]:
                    res[s] = 1
                    break
    return out


def eu_fixpoint(const idx_t[::1] pred_indptr, const idx_t[::1] pred_indices,
                const cnp.uint8_t[::1] phi, const cnp.uint8_t[::1] psi):
    cdef Py_ssize_t n = phi.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.array(psi, dtype=np.uint8, copy=True)
    cdef cnp.uint8_t[::1] res = out
    cdef cnp.ndarray[idx_t, ndim=1] qarr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] queue = qarr
    cdef Py_ssize_t head = 0, tail = 0, s, t
    cdef idx_t k
    with nogil:
        for s in range(n):
            if res[s]:
                queue[tail] = s
                tail += 1
        while head < tail:
            t = queue[head]
            head += 1
            for k in range(pred_indptr[t], pred_indptr[t + 1]):
                s = pred_indices[k]
                if not res[s] and phi[s]:
                    res[s] = 1
                    queue[tail] = s
                    tail += 1
    return out


def eg_fixpoint(const idx_t[::1] succ_indptr, const idx_t[::1] succ_indices,
                const idx_t[::1] pred_indptr, const idx_t[::1] pred_indices,
                const cnp.uint8_t[::1] phi):
    cdef Py_ssize_t n = phi.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.array(phi, dtype=np.uint8, copy=True)
    cdef cnp.uint8_t[::1] res = out
    cdef cnp.ndarray[idx_t, ndim=1] carr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] count = carr
    cdef cnp.ndarray[idx_t, ndim=1] qarr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] queue = qarr
    cdef Py_ssize_t head = 0, tail = 0, s, t
    cdef idx_t k, c
    with nogil:
        for s in range(n):
            if not res[s]:
                continue
            c = 0
            for k in range(succ_indptr[s], succ_indptr[s + 1]):
                c += res[succ_indices[k]]
            count[s] = c
            if c == 0:
                queue[tail] = s
                tail += 1
        while head < tail:
            t = queue[head]
            head += 1
            if not res[t]:
                continue
            res[t] = 0
            for k in range(pred_indptr[t], pred_indptr[t + 1]):
                s = pred_indices[k]
                if res[s]:
                    count[s] -= 1
                    if count[s] == 0:
                        queue[tail] = s
                        tail += 1
    return out


def class_forall(const idx_t[::1] obs, Py_ssize_t n_classes, const cnp.uint8_t[::1] phi):
    cdef Py_ssize_t n = obs.shape[0], s
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] barr = np.zeros(n_classes, dtype=np.uint8)
    cdef cnp.uint8_t[::1] bad = barr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.empty(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = out
    with nogil:
        for s in range(n):
            if not phi[s]:
                bad[obs[s]] = 1
        for s in range(n):
            res[s] = 1 - bad[obs[s]]
    return out


def reachable(const idx_t[::1] succ_indptr, const idx_t[::1] succ_indices, const idx_t[::1] init):
    cdef Py_ssize_t n = succ_indptr.shape[0] - 1
    cdef cnp.ndarray[idx_t, ndim=1] parr = np.full(n, -2, dtype=np.int64)
    cdef idx_t[::1] parent = parr
    cdef cnp.ndarray[idx_t, ndim=1] qarr = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] queue = qarr
    cdef Py_ssize_t head = 0, tail = 0, i, s, t
    cdef idx_t k
    with nogil:
        for i in range(init.shape[0]):
            s = init[i]
            if parent[s] == -2:
                parent[s] = -1
                queue[tail] = s
                tail += 1
        while head < tail:
            s = queue[head]
            head += 1
            for k in range(succ_indptr[s], succ_indptr[s + 1]):
                t = succ_indices[k]
                if parent[t] == -2:
                    parent[t] = s
                    queue[tail] = t
                    tail += 1
    return parr
