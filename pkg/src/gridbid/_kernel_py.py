"""Pure-Python bounded-variable primal simplex kernel.

Two-phase method with Bland's anti-cycling rule throughout: the entering
variable is the lowest-index column with a favorable reduced cost, the leaving
variable is the lowest-index blocker among the minimum-ratio candidates.  The
pivot path is therefore a pure function of the input data, which is what makes
game trajectories reproducible.

``gridbid._kernel_cy`` is a compiled translation of this file.  The two must
perform the *same floating-point operations in the same order* so that either
kernel returns value-identical solutions; any change here has to be mirrored
there (see tests/test_kernel_parity.py).

Variables may have any mix of finite/infinite bounds; fixed variables
(lower == upper) never enter the basis.  Free variables enter with either sign
and never leave.  Phase 1 minimizes the sum of one artificial per row.
"""

from __future__ import annotations

KERNEL_NAME = "python"

# status codes returned by solve()
OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITER_LIMIT = 3
PHASE1_UNBOUNDED = 4  # numerically impossible; reported rather than asserted

# variable states
_BASIC = 0
_AT_LO = 1
_AT_UP = 2
_FREE = 3
_FIXED = 4

_DTOL = 1e-9        # reduced-cost threshold (optimality)
_PTOL = 1e-10       # minimum |pivot| for a ratio-test block
_DRIVE_TOL = 1e-8   # minimum |pivot| when forcing artificials out of the basis
_P1_TOL = 1e-7      # phase-1 optimum above this declares infeasibility

_INF = float("inf")


def solve(A, b, c, lo, up, max_iter=0):
    """Minimize c.x subject to A x = b and lo <= x <= up.

    A, b, c, lo, up are numpy float64 arrays (A is m-by-n, C-contiguous).
    Returns (status, x, objective, iterations, unique) where x is a list of n
    floats (valid only when status == OPTIMAL) and unique is 1 when every
    nonbasic reduced cost is bounded away from zero, i.e. the minimizer is
    provably the only one.
    """
    m, n = A.shape
    a = A.ravel().tolist()
    bb = b.tolist()
    cc = c.tolist()
    nt = n + m
    if max_iter <= 0:
        max_iter = 2000 + 50 * nt

    xl = lo.tolist() + [0.0] * m
    xu = up.tolist() + [_INF] * m
    x = [0.0] * nt
    st = [0] * nt
    cost = [0.0] * nt

    for j in range(n):
        l = xl[j]
        u = xu[j]
        if l == u:
            st[j] = _FIXED
            x[j] = l
        elif l > -_INF and u < _INF:
            if abs(l) <= abs(u):
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

    # residuals at the initial nonbasic point; artificials absorb them
    asign = [0.0] * m
    basis = [0] * m
    binv = [0.0] * (m * m)
    for i in range(m):
        s = bb[i]
        base = i * n
        for j in range(n):
            aij = a[base + j]
            if aij != 0.0:
                s -= aij * x[j]
        sg = 1.0 if s >= 0.0 else -1.0
        asign[i] = sg
        jart = n + i
        x[jart] = s * sg
        st[jart] = _BASIC
        cost[jart] = 1.0
        basis[i] = jart
        binv[i * m + i] = sg

    w = [0.0] * m
    y = [0.0] * m

    status, it1 = _iterate(m, n, nt, a, asign, cost, xl, xu, x, st, basis,
                           binv, w, y, max_iter)
    if status == ITER_LIMIT:
        return ITER_LIMIT, x[:n], 0.0, it1, 0
    if status == UNBOUNDED:
        return PHASE1_UNBOUNDED, x[:n], 0.0, it1, 0

    _refresh_basics(m, n, a, bb, x, st, basis, binv)
    p1 = 0.0
    for i in range(m):
        p1 += x[n + i]
    if p1 > _P1_TOL:
        return INFEASIBLE, x[:n], p1, it1, 0

    # force remaining artificials out of the basis where a structural column
    # can take their place; rows with no eligible pivot are redundant and the
    # zero-valued artificial simply stays basic
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

    status, it2 = _iterate(m, n, nt, a, asign, cost, xl, xu, x, st, basis,
                           binv, w, y, max_iter)
    iters = it1 + it2
    if status == ITER_LIMIT:
        return ITER_LIMIT, x[:n], 0.0, iters, 0
    if status == UNBOUNDED:
        return UNBOUNDED, x[:n], 0.0, iters, 0

    _refresh_basics(m, n, a, bb, x, st, basis, binv)
    obj = 0.0
    for j in range(n):
        cj = cc[j]
        if cj != 0.0:
            obj += cj * x[j]

    unique = _uniqueness_flag(m, n, nt, a, asign, cost, st, basis, binv, y)
    return OPTIMAL, x[:n], obj, iters, unique


def _iterate(m, n, nt, a, asign, cost, xl, xu, x, st, basis, binv, w, y,
             max_iter):
    """Run simplex pivots until optimal/unbounded or the iteration cap."""
    it = 0
    while it < max_iter:
        it += 1

        for i in range(m):
            y[i] = 0.0
        for k in range(m):
            cb = cost[basis[k]]
            if cb != 0.0:
                base = k * m
                for i in range(m):
                    y[i] += cb * binv[base + i]

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
            else:  # _FREE
                if d < -_DTOL:
                    enter = j
                    sigma = 1.0
                    break
                if d > _DTOL:
                    enter = j
                    sigma = -1.0
                    break
        if enter < 0:
            return OPTIMAL, it - 1

        if enter < n:
            for i in range(m):
                s = 0.0
                base = i * m
                for k in range(m):
                    ak = a[k * n + enter]
                    if ak != 0.0:
                        s += binv[base + k] * ak
                w[i] = s
        else:
            r0 = enter - n
            sg = asign[r0]
            for i in range(m):
                w[i] = binv[i * m + r0] * sg

        # ratio test; lv_row == -1 means the entering variable hits its own
        # opposite bound first (a bound flip, no basis change)
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
            return UNBOUNDED, it

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
        lv = basis[lv_row]
        if lv_to_up:
            x[lv] = xu[lv]
            st[lv] = _FIXED if xl[lv] == xu[lv] else _AT_UP
        else:
            x[lv] = xl[lv]
            st[lv] = _FIXED if xl[lv] == xu[lv] else _AT_LO
        st[enter] = _BASIC
        basis[lv_row] = enter
        _pivot_update(m, binv, w, lv_row)

    return ITER_LIMIT, it


def _pivot_update(m, binv, w, r):
    """Row-reduce binv so it becomes the inverse of the post-pivot basis."""
    piv = w[r]
    ipiv = 1.0 / piv
    base_r = r * m
    for k in range(m):
        binv[base_r + k] *= ipiv
    for i in range(m):
        if i != r:
            f = w[i]
            if f != 0.0:
                base_i = i * m
                for k in range(m):
                    binv[base_i + k] -= f * binv[base_r + k]


def _refresh_basics(m, n, a, bb, x, st, basis, binv):
    """Recompute basic values from binv to shed accumulated pivot noise."""
    tmp = [0.0] * m
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


def _uniqueness_flag(m, n, nt, a, asign, cost, st, basis, binv, y):
    """1 when all nonbasic, non-fixed reduced costs are > _DTOL in magnitude."""
    for i in range(m):
        y[i] = 0.0
    for k in range(m):
        cb = cost[basis[k]]
        if cb != 0.0:
            base = k * m
            for i in range(m):
                y[i] += cb * binv[base + i]
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
