# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bounded-variable primal simplex kernel.

Operation-for-operation translation of gridbid._kernel_py -- same pivot rule,
same arithmetic order -- so the two kernels return value-identical solutions.
Keep the two files in sync; tests/test_kernel_parity.py enforces it.
"""

from libc.stdlib cimport free, malloc

KERNEL_NAME = "compiled"

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITER_LIMIT = 3
PHASE1_UNBOUNDED = 4

cdef int C_OPTIMAL = 0
cdef int C_INFEASIBLE = 1
cdef int C_UNBOUNDED = 2
cdef int C_ITER_LIMIT = 3

cdef int _BASIC = 0
cdef int _AT_LO = 1
cdef int _AT_UP = 2
cdef int _FREE = 3
cdef int _FIXED = 4

cdef double _DTOL = 1e-9
cdef double _PTOL = 1e-10
cdef double _DRIVE_TOL = 1e-8
cdef double _P1_TOL = 1e-7

cdef double _INF = float("inf")


cdef double _fabs(double v) noexcept nogil:
    return -v if v < 0.0 else v


def solve(A, b, c, lo, up, max_iter=0):
    """Same contract as gridbid._kernel_py.solve()."""
    cdef double[:, ::1] A_mv = A
    cdef double[::1] b_mv = b
    cdef double[::1] c_mv = c
    cdef double[::1] lo_mv = lo
    cdef double[::1] up_mv = up

    cdef int m = A_mv.shape[0]
    cdef int n = A_mv.shape[1]
    cdef int nt = n + m
    cdef int cap = max_iter
    if cap <= 0:
        cap = 2000 + 50 * nt

    cdef double *buf = <double *> malloc(
        (<size_t> (4 * nt + m * m + 5 * m + n)) * sizeof(double))
    cdef int *ibuf = <int *> malloc((<size_t> (nt + m)) * sizeof(int))
    if buf == NULL or ibuf == NULL:
        if buf != NULL:
            free(buf)
        if ibuf != NULL:
            free(ibuf)
        raise MemoryError()

    cdef double *xl = buf
    cdef double *xu = xl + nt
    cdef double *x = xu + nt
    cdef double *cost = x + nt
    cdef double *asign = cost + nt
    cdef double *binv = asign + m
    cdef double *w = binv + m * m
    cdef double *y = w + m
    cdef double *tmp = y + m
    cdef double *cc = tmp + m
    cdef int *st = ibuf
    cdef int *basis = st + nt

    cdef double *a = <double *> malloc((<size_t> (m * n + 1)) * sizeof(double))
    cdef double *bb = <double *> malloc((<size_t> (m + 1)) * sizeof(double))
    if a == NULL or bb == NULL:
        free(buf)
        free(ibuf)
        if a != NULL:
            free(a)
        if bb != NULL:
            free(bb)
        raise MemoryError()
    cdef int i, j, k
    for i in range(m):
        for j in range(n):
            a[i * n + j] = A_mv[i, j]
    for i in range(m):
        bb[i] = b_mv[i]

    cdef double l, u, s, sg
    cdef int jart, status, it1 = 0, it2 = 0, iters
    cdef double p1, obj, piv, akj
    cdef int base, base2, i2, unique

    try:
        for j in range(n):
            xl[j] = lo_mv[j]
            xu[j] = up_mv[j]
            cc[j] = c_mv[j]
            cost[j] = 0.0
            x[j] = 0.0
            st[j] = 0
        for j in range(n, nt):
            xl[j] = 0.0
            xu[j] = _INF
            cost[j] = 0.0
            x[j] = 0.0
            st[j] = 0

        for j in range(n):
            l = xl[j]
            u = xu[j]
            if l == u:
                st[j] = _FIXED
                x[j] = l
            elif l > -_INF and u < _INF:
                if _fabs(l) <= _fabs(u):
                    st[j] = _AT_LO
                    x[j] = l
                else:
                    st[j] = _AT_UP
                    x[j] = u
            elif l > -_INF:
                st[j] = _AT_LO
                x[j] = l
            elif u < _INF:
                st[j] = _AT_UP
                x[j] = u
            else:
                st[j] = _FREE
                x[j] = 0.0

        for i in range(m * m):
            binv[i] = 0.0
        for i in range(m):
            s = bb[i]
            base = i * n
            for j in range(n):
                if a[base + j] != 0.0:
                    s -= a[base + j] * x[j]
            sg = 1.0 if s >= 0.0 else -1.0
            asign[i] = sg
            jart = n + i
            x[jart] = s * sg
            st[jart] = _BASIC
            cost[jart] = 1.0
            basis[i] = jart
            binv[i * m + i] = sg

        status = _iterate(m, n, nt, a, asign, cost, xl, xu, x, st, basis,
                          binv, w, y, cap, &it1)
        if status == ITER_LIMIT:
            return ITER_LIMIT, [x[j] for j in range(n)], 0.0, it1, 0
        if status == UNBOUNDED:
            return PHASE1_UNBOUNDED, [x[j] for j in range(n)], 0.0, it1, 0

        _refresh_basics(m, n, a, bb, x, st, basis, binv, tmp)
        p1 = 0.0
        for i in range(m):
            p1 += x[n + i]
        if p1 > _P1_TOL:
            return INFEASIBLE, [x[j] for j in range(n)], p1, it1, 0

        for i in range(m):
            if basis[i] >= n:
                for j in range(n):
                    if st[j] == _BASIC:
                        continue
                    piv = 0.0
                    base = i * m
                    for k in range(m):
                        akj = a[k * n + j]
                        if akj != 0.0:
                            piv += binv[base + k] * akj
                    if piv > _DRIVE_TOL or piv < -_DRIVE_TOL:
                        for i2 in range(m):
                            s = 0.0
                            base2 = i2 * m
                            for k in range(m):
                                akj = a[k * n + j]
                                if akj != 0.0:
                                    s += binv[base2 + k] * akj
                            w[i2] = s
                        jart = basis[i]
                        _pivot_update(m, binv, w, i)
                        basis[i] = j
                        st[j] = _BASIC
                        x[jart] = 0.0
                        st[jart] = _AT_LO
                        break

        for i in range(m):
            jart = n + i
            xl[jart] = 0.0
            xu[jart] = 0.0
            if st[jart] != _BASIC:
                st[jart] = _FIXED
                x[jart] = 0.0
        for j in range(n):
            cost[j] = cc[j]
        for j in range(n, nt):
            cost[j] = 0.0

        status = _iterate(m, n, nt, a, asign, cost, xl, xu, x, st, basis,
                          binv, w, y, cap, &it2)
        iters = it1 + it2
        if status == ITER_LIMIT:
            return ITER_LIMIT, [x[j] for j in range(n)], 0.0, iters, 0
        if status == UNBOUNDED:
            return UNBOUNDED, [x[j] for j in range(n)], 0.0, iters, 0

        _refresh_basics(m, n, a, bb, x, st, basis, binv, tmp)
        obj = 0.0
        for j in range(n):
            if cc[j] != 0.0:
                obj += cc[j] * x[j]

        unique = _uniqueness_flag(m, n, nt, a, asign, cost, st, basis, binv, y)
        return OPTIMAL, [x[j] for j in range(n)], obj, iters, unique
    finally:
        free(buf)
        free(ibuf)
        free(a)
        free(bb)


cdef int _iterate(int m, int n, int nt, double *a, double *asign, double *cost,
                  double *xl, double *xu, double *x, int *st, int *basis,
                  double *binv, double *w, double *y, int max_iter,
                  int *it_out) noexcept nogil:
    cdef int it = 0
    cdef int i, j, k, sj, enter, lv_var, lv_row, bi, r0
    cdef bint lv_to_up
    cdef double cb, d, yi, aij, sigma, s, ak, sg
    cdef double t_best, aw, lb, ub, ratio, t, wi

    while it < max_iter:
        it += 1

        for i in range(m):
            y[i] = 0.0
        for k in range(m):
            cb = cost[basis[k]]
            if cb != 0.0:
                for i in range(m):
                    y[i] += cb * binv[k * m + i]

        enter = -1
        sigma = 0.0
        for j in range(nt):
            sj = st[j]
            if sj == _BASIC or sj == _FIXED:
                continue
            if j < n:
                d = cost[j]
                for i in range(m):
                    yi = y[i]
                    if yi != 0.0:
                        aij = a[i * n + j]
                        if aij != 0.0:
                            d -= yi * aij
            else:
                d = cost[j] - y[j - n] * asign[j - n]
            if sj == _AT_LO:
                if d < -_DTOL:
                    enter = j
                    sigma = 1.0
                    break
            elif sj == _AT_UP:
                if d > _DTOL:
                    enter = j
                    sigma = -1.0
                    break
            else:
                if d < -_DTOL:
                    enter = j
                    sigma = 1.0
                    break
                if d > _DTOL:
                    enter = j
                    sigma = -1.0
                    break
        if enter < 0:
            it_out[0] = it - 1
            return C_OPTIMAL

        if enter < n:
            for i in range(m):
                s = 0.0
                for k in range(m):
                    ak = a[k * n + enter]
                    if ak != 0.0:
                        s += binv[i * m + k] * ak
                w[i] = s
        else:
            r0 = enter - n
            sg = asign[r0]
            for i in range(m):
                w[i] = binv[i * m + r0] * sg

        t_best = _INF
        lv_var = -1
        lv_row = -1
        lv_to_up = False
        if xl[enter] > -_INF and xu[enter] < _INF:
            t_best = xu[enter] - xl[enter]
            lv_var = enter
        for i in range(m):
            aw = sigma * w[i]
            if aw > _PTOL:
                bi = basis[i]
                lb = xl[bi]
                if lb > -_INF:
                    ratio = (x[bi] - lb) / aw
                    if ratio < 0.0:
                        ratio = 0.0
                    if ratio < t_best or (ratio == t_best and bi < lv_var):
                        t_best = ratio
                        lv_var = bi
                        lv_row = i
                        lv_to_up = False
            elif aw < -_PTOL:
                bi = basis[i]
                ub = xu[bi]
                if ub < _INF:
                    ratio = (ub - x[bi]) / (-aw)
                    if ratio < 0.0:
                        ratio = 0.0
                    if ratio < t_best or (ratio == t_best and bi < lv_var):
                        t_best = ratio
                        lv_var = bi
                        lv_row = i
                        lv_to_up = True
        if t_best == _INF:
            it_out[0] = it
            return C_UNBOUNDED

        t = t_best
        if t != 0.0:
            for i in range(m):
                wi = w[i]
                if wi != 0.0:
                    bi = basis[i]
                    x[bi] = x[bi] - sigma * t * wi

        if lv_row < 0:
            if sigma > 0.0:
                x[enter] = xu[enter]
                st[enter] = _AT_UP
            else:
                x[enter] = xl[enter]
                st[enter] = _AT_LO
            continue

        x[enter] = x[enter] + sigma * t
        bi = basis[lv_row]
        if lv_to_up:
            x[bi] = xu[bi]
            st[bi] = _FIXED if xl[bi] == xu[bi] else _AT_UP
        else:
            x[bi] = xl[bi]
            st[bi] = _FIXED if xl[bi] == xu[bi] else _AT_LO
        st[enter] = _BASIC
        basis[lv_row] = enter
        _pivot_update(m, binv, w, lv_row)

    it_out[0] = it
    return C_ITER_LIMIT


cdef void _pivot_update(int m, double *binv, double *w, int r) noexcept nogil:
    cdef double piv = w[r]
    cdef double ipiv = 1.0 / piv
    cdef int base_r = r * m
    cdef int i, k, base_i
    cdef double f
    for k in range(m):
        binv[base_r + k] *= ipiv
    for i in range(m):
        if i != r:
            f = w[i]
            if f != 0.0:
                base_i = i * m
                for k in range(m):
                    binv[base_i + k] -= f * binv[base_r + k]


cdef void _refresh_basics(int m, int n, double *a, double *bb, double *x,
                          int *st, int *basis, double *binv,
                          double *tmp) noexcept nogil:
    cdef int i, j, k, base
    cdef double s, xj, aij, tk
    for i in range(m):
        s = bb[i]
        base = i * n
        for j in range(n):
            if st[j] != _BASIC:
                xj = x[j]
                if xj != 0.0:
                    aij = a[base + j]
                    if aij != 0.0:
                        s -= aij * xj
        tmp[i] = s
    for i in range(m):
        s = 0.0
        base = i * m
        for k in range(m):
            tk = tmp[k]
            if tk != 0.0:
                s += binv[base + k] * tk
        x[basis[i]] = s


cdef int _uniqueness_flag(int m, int n, int nt, double *a, double *asign,
                          double *cost, int *st, int *basis, double *binv,
                          double *y) noexcept nogil:
    cdef int i, j, k, sj
    cdef double cb, d, yi, aij
    for i in range(m):
        y[i] = 0.0
    for k in range(m):
        cb = cost[basis[k]]
        if cb != 0.0:
            for i in range(m):
                y[i] += cb * binv[k * m + i]
    for j in range(nt):
        sj = st[j]
        if sj == _BASIC or sj == _FIXED:
            continue
        if j < n:
            d = cost[j]
            for i in range(m):
                yi = y[i]
                if yi != 0.0:
                    aij = a[i * n + j]
                    if aij != 0.0:
                        d -= yi * aij
        else:
            d = cost[j] - y[j - n] * asign[j - n]
        if -_DTOL <= d <= _DTOL:
            return 0
    return 1
