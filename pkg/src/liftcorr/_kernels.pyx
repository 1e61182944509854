# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled enumeration kernels; same contract as ``_kernels_py``."""

from libc.stdlib cimport malloc, free


cdef int* _to_c(object seq, Py_ssize_t size) except NULL:
    cdef int* buf = <int*> malloc(max(size, 1) * sizeof(int))
    cdef Py_ssize_t i
    if buf == NULL:
        raise MemoryError()
    for i in range(size):
        buf[i] = seq[i]
    return buf


cdef bint _column_ok(int* d, int n, int j, int k, int* leq, int* tensor):
    cdef int x, y, z, dxy
    for x in range(j + 1):
        for y in range(j + 1):
            if x == y:
                continue
            dxy = d[x * n + y]
            for z in range(j + 1):
                if z == x or z == y:
                    continue
                if j != x and j != y and j != z:
                    continue
                if not leq[tensor[d[x * n + z] * k + d[z * n + y]] * k + dxy]:
                    return False
    return True


def enumerate_pseudometric_tables(int n, int k, int top, leq, tensor):
    if n == 0:
        return [()]
    cdef int m = n * (n - 1) // 2
    cdef int* cleq = _to_c(leq, k * k)
    cdef int* cten = _to_c(tensor, k * k)
    cdef int* d = <int*> malloc(n * n * sizeof(int))
    cdef int* ei = <int*> malloc(max(m, 1) * sizeof(int))
    cdef int* ej = <int*> malloc(max(m, 1) * sizeof(int))
    cdef int* val = <int*> malloc(max(m, 1) * sizeof(int))
    cdef int a, b, pos, i, j, v, t
    out = []
    try:
        t = 0
        for b in range(1, n):
            for a in range(b):
                ei[t] = a
                ej[t] = b
                t += 1
        for a in range(n * n):
            d[a] = top
        for a in range(m):
            val[a] = -1
        pos = 0
        while pos >= 0:
            if pos == m:
                out.append(tuple([d[a] for a in range(n * n)]))
                pos -= 1
                continue
            i = ei[pos]
            j = ej[pos]
            v = val[pos] + 1
            while v < k:
                d[i * n + j] = v
                d[j * n + i] = v
                if i != j - 1 or _column_ok(d, n, j, k, cleq, cten):
                    break
                v += 1
            if v < k:
                val[pos] = v
                pos += 1
            else:
                val[pos] = -1
                d[i * n + j] = top
                d[j * n + i] = top
                pos -= 1
    finally:
        free(cleq)
        free(cten)
        free(d)
        free(ei)
        free(ej)
        free(val)
    return out


def enumerate_morphism_tables(int n, dmat, int k, leq, euclid):
    if n == 0:
        return [()]
    cdef int* cd = _to_c(dmat, n * n)
    cdef int* cleq = _to_c(leq, k * k)
    cdef int* ceuc = _to_c(euclid, k * k)
    cdef int* f = <int*> malloc(n * sizeof(int))
    cdef int i, p, v
    cdef bint ok
    out = []
    try:
        for i in range(n):
            f[i] = -1
        i = 0
        while i >= 0:
            if i == n:
                out.append(tuple([f[p] for p in range(n)]))
                i -= 1
                continue
            v = f[i] + 1
            while v < k:
                ok = True
                for p in range(i):
                    if not cleq[cd[p * n + i] * k + ceuc[f[p] * k + v]]:
                        ok = False
                        break
                if ok:
                    break
                v += 1
            if v < k:
                f[i] = v
                i += 1
            else:
                f[i] = -1
                i -= 1
    finally:
        free(cd)
        free(cleq)
        free(ceuc)
        free(f)
    return out


def is_pseudometric_table(int n, dmat, int k, int top, leq, tensor):
    cdef int* cd = _to_c(dmat, max(n * n, 1))
    cdef int* cleq = _to_c(leq, k * k)
    cdef int* cten = _to_c(tensor, k * k)
    cdef int x, y, z
    try:
        for x in range(n):
            if cd[x * n + x] != top:
                return False
            for y in range(n):
                if cd[x * n + y] != cd[y * n + x]:
                    return False
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    if not cleq[cten[cd[x * n + z] * k + cd[z * n + y]] * k + cd[x * n + y]]:
                        return False
        return True
    finally:
        free(cd)
        free(cleq)
        free(cten)
