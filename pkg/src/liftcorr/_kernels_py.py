"""Pure-Python enumeration kernels over index-encoded finite quantales.

All tables are flat row-major lists: ``leq[a*k + b]`` is 1 when ``a <= b``,
``tensor[a*k + b]`` and ``euclid[a*k + b]`` hold value indices.  Matrices
are returned as flat ``n*n`` tuples of value indices.
"""


def _column_ok(d, n, j, k, leq, tensor):
    # every transitivity triple inside {0..j} that mentions j
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


def enumerate_pseudometric_tables(n, k, top, leq, tensor):
    if n == 0:
        return [()]
    d = [top] * (n * n)
    entries = [(i, j) for j in range(1, n) for i in range(j)]
    out = []
    m = len(entries)

    def rec(pos):
        if pos == m:
            out.append(tuple(d))
            return
        i, j = entries[pos]
        for v in range(k):
            d[i * n + j] = v
            d[j * n + i] = v
            if i == j - 1 and not _column_ok(d, n, j, k, leq, tensor):
                continue
            rec(pos + 1)
        d[i * n + j] = top
        d[j * n + i] = top

    rec(0)
    return out


def enumerate_morphism_tables(n, d, k, leq, euclid):
    f = [0] * n
    out = []

    def rec(i):
        if i == n:
            out.append(tuple(f))
            return
        for v in range(k):
            f[i] = v
            ok = True
            for p in range(i):
                if not leq[d[p * n + i] * k + euclid[f[p] * k + v]]:
                    ok = False
                    break
            if ok:
                rec(i + 1)

    rec(0)
    return out


def is_pseudometric_table(n, d, k, top, leq, tensor):
    for x in range(n):
        if d[x * n + x] != top:
            return False
        for y in range(n):
            if d[x * n + y] != d[y * n + x]:
                return False
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if not leq[tensor[d[x * n + z] * k + d[z * n + y]] * k + d[x * n + y]]:
                    return False
    return True
