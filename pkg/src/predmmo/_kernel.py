"""Compiled Dormand-Prince 5(4) driver and the vector fields it runs.

This module is loaded twice.  The normal import compiles everything with
numba (``nogil``, on-disk cache) and selects vector fields by an integer
kind.  :mod:`predmmo.integrator` also executes this file a second time with
``NOJIT = True`` injected, giving a plain-Python driver that accepts any
callable ``rhs(t, y, p)``.  Both builds run the same arithmetic in the same
order.

The model and normal-form fields live here rather than in their own modules
so that numba's cache, which is keyed on this file, invalidates with them.
"""

from __future__ import annotations

import numpy as np

NOJIT = globals().get("NOJIT", False)

if NOJIT:
    def jit(f):
        return f
else:
    import numba

    jit = numba.njit(nogil=True, cache=True)

# Butcher tableau (Dormand & Prince 1980)
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# b5 - b4, embedded error weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# 4th-order continuous extension: y(t + th*h) = y + h * sum_i K_i * sum_j P[i, j] th^(j+1)
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# status codes returned by the driver
OK = 0
TERMINATED = 1
STEP_UNDERFLOW = -1
MAX_STEPS = -2
DIVERGED = -3

EVENT_TTOL = 1e-12
EXTREMUM_TTOL = 1e-10
MAX_BISECT = 64

# event directions
RISING = 1
FALLING = -1
ANY = 0

# store modes
STORE_NONE = 0
STORE_NODES = 1
STORE_DENSE = 2


# ---------------------------------------------------------------------------
# vector fields, rhs(t, y, p)

# model parameter layout: zeta, beta1, beta2, c, d, a12, a21, h
MODEL_SLOW = 0
MODEL_FAST = 1
# planar flow on {x = 0} augmented with the running integral of u
PLANE_DELAY = 2
# normal-form layout: delta, alpha, f_uw, f_uuu, h_w, h_uu
NORMAL_FORM = 3
# desingularized reduced flow in the (x, y) chart, model parameter layout
DESING = 4


@jit
def model_uvw(x, y, z, p):
    b1x = p[1] + x
    b2x = p[2] + x
    u = 1.0 - x - y / b1x - z / b2x
    v = x / b1x - p[3] - p[5] * z
    w = x / b2x - p[4] - p[6] * y - p[7] * z
    return u, v, w


@jit
def model_slow(t, s, p):
    u, v, w = model_uvw(s[0], s[1], s[2], p)
    out = np.empty(3)
    out[0] = s[0] * u / p[0]
    out[1] = s[1] * v
    out[2] = s[2] * w
    return out


@jit
def model_fast(t, s, p):
    u, v, w = model_uvw(s[0], s[1], s[2], p)
    out = np.empty(3)
    out[0] = s[0] * u
    out[1] = p[0] * s[1] * v
    out[2] = p[0] * s[2] * w
    return out


@jit
def plane_delay(t, s, p):
    u, v, w = model_uvw(0.0, s[0], s[1], p)
    out = np.empty(3)
    out[0] = s[0] * v
    out[1] = s[1] * w
    out[2] = u
    return out


@jit
def normal_form(t, s, p):
    u = s[0]
    w = s[2]
    d = p[0]
    out = np.empty(3)
    out[0] = s[1] + 0.5 * u * u + d * (p[1] * u + p[2] * u * w + p[3] * u * u * u / 6.0)
    out[1] = -u
    out[2] = d * (p[4] * w + 0.5 * p[5] * u * u)
    return out


@jit
def desing(t, r, p):
    x = r[0]
    y = r[1]
    b1x = p[1] + x
    b2x = p[2] + x
    z = b2x * (1.0 - x - y / b1x)
    u, v, w = model_uvw(x, y, z, p)
    u_x = -1.0 + y / (b1x * b1x) + z / (b2x * b2x)
    out = np.empty(2)
    out[0] = -y * v / b1x - z * w / b2x
    out[1] = -u_x * y * v
    return out


if NOJIT:
    def call_rhs(rhs, t, y, p):
        return rhs(t, y, p)
else:
    @jit
    def call_rhs(rhs, t, y, p):
        if rhs == MODEL_SLOW:
            return model_slow(t, y, p)
        if rhs == MODEL_FAST:
            return model_fast(t, y, p)
        if rhs == PLANE_DELAY:
            return plane_delay(t, y, p)
        if rhs == NORMAL_FORM:
            return normal_form(t, y, p)
        return desing(t, y, p)



@jit
def dense_eval(y0, K, h, theta):
    n = y0.shape[0]
    out = y0.copy()
    for i in range(7):
        q = theta * (P[i, 0] + theta * (P[i, 1] + theta * (P[i, 2] + theta * P[i, 3])))
        if q != 0.0:
            for j in range(n):
                out[j] += h * q * K[i, j]
    return out

@jit
def dense_deriv(K, theta, comp):
    s = 0.0
    for i in range(7):
        q = P[i, 0] + theta * (2.0 * P[i, 1] + theta * (3.0 * P[i, 2] + theta * 4.0 * P[i, 3]))
        s += q * K[i, comp]
    return s

@jit
def step(rhs, t, y, h, k1, p, K, rtol, atol):
    n = y.shape[0]
    for j in range(n):
        K[0, j] = k1[j]
    ys = np.empty(n)
    for s in range(1, 7):
        for j in range(n):
            acc = 0.0
            for r in range(s):
                acc += A[s, r] * K[r, j]
            ys[j] = y[j] + h * acc
        ks = call_rhs(rhs, t + C[s] * h, ys, p)
        for j in range(n):
            K[s, j] = ks[j]
    # stage 7 is evaluated at y_new (FSAL), so ys holds y_new here
    errn = 0.0
    for j in range(n):
        e = 0.0
        for s in range(7):
            e += E[s] * K[s, j]
        sc = atol + rtol * max(abs(y[j]), abs(ys[j]))
        r = abs(h * e) / sc
        if r > errn:
            errn = r
        if not np.isfinite(ys[j]):
            errn = np.inf
    return ys, errn

@jit
def initial_step(rhs, t, y, f0, p, direction, rtol, atol, max_step):
    n = y.shape[0]
    d0 = 0.0
    d1 = 0.0
    for j in range(n):
        sc = atol + rtol * abs(y[j])
        d0 = max(d0, abs(y[j]) / sc)
        d1 = max(d1, abs(f0[j]) / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y + direction * h0 * f0
    f1 = call_rhs(rhs, t + direction * h0, y1, p)
    d2 = 0.0
    for j in range(n):
        sc = atol + rtol * abs(y[j])
        d2 = max(d2, abs(f1[j] - f0[j]) / sc / h0)
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)

@jit
def refine_extremum(K, h, comp, d0):
    # bisection on the derivative of the continuous extension
    lo = 0.0
    hi = 1.0
    for _ in range(MAX_BISECT):
        if (hi - lo) * abs(h) <= EXTREMUM_TTOL:
            break
        mid = 0.5 * (lo + hi)
        dm = dense_deriv(K, mid, comp)
        if (dm > 0.0) == (d0 > 0.0) and dm != 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

@jit
def g_after(g, g0, direction):
    if direction == RISING:
        return g >= 0.0
    if direction == FALLING:
        return g <= 0.0
    if g0 < 0.0:
        return g >= 0.0
    return g <= 0.0

@jit
def crossed(g0, g1, direction):
    if direction == RISING:
        return g0 < 0.0 and g1 >= 0.0
    if direction == FALLING:
        return g0 > 0.0 and g1 <= 0.0
    return (g0 < 0.0 and g1 >= 0.0) or (g0 > 0.0 and g1 <= 0.0)

@jit
def grow1(a):
    b = np.empty(2 * a.shape[0], a.dtype)
    b[: a.shape[0]] = a
    return b

@jit
def grow2(a):
    b = np.empty((2 * a.shape[0], a.shape[1]), a.dtype)
    b[: a.shape[0]] = a
    return b

@jit
def grow3(a):
    b = np.empty((2 * a.shape[0], a.shape[1], a.shape[2]), a.dtype)
    b[: a.shape[0]] = a
    return b

@jit
def drive(rhs, p, t0, y0, t1, rtol, atol, h0, max_step, min_step, max_steps, store,
          ev_n, ev_b, ev_dir, ev_fcomp, ev_fsign, ev_term,
          ext_comp, ext_after, lower, upper):
    n = y0.shape[0]
    m = ev_b.shape[0]
    direction = 1.0 if t1 >= t0 else -1.0
    y = y0.copy()
    t = t0
    k1 = call_rhs(rhs, t, y, p)
    K = np.empty((7, n))

    cap = 1024 if store > 0 else 1
    times = np.empty(cap)
    states = np.empty((cap, n))
    scap = 1024 if store > 1 else 1
    seg_h = np.empty(scap)
    seg_K = np.empty((scap, 7, n))
    nn = 0
    ns = 0
    if store > 0:
        times[0] = t
        states[0] = y
        nn = 1

    ecap = 16
    ev_t = np.empty(ecap)
    ev_y = np.empty((ecap, n))
    ev_id = np.empty(ecap, np.int64)
    ne = 0
    ev_count = np.zeros(max(m, 1), np.int64)

    xcap = 16
    ex_t = np.empty(xcap)
    ex_v = np.empty(xcap)
    ex_kind = np.empty(xcap, np.int64)
    nx = 0

    cand_th = np.empty(max(m, 1))
    cand_id = np.empty(max(m, 1), np.int64)

    status = OK
    nsteps = 0
    nrej = 0
    if t1 == t0:
        return (status, t, y, nsteps, nrej, times[:nn], states[:nn], seg_h[:ns], seg_K[:ns],
                ev_t[:ne], ev_y[:ne], ev_id[:ne], ex_t[:nx], ex_v[:nx], ex_kind[:nx])

    if h0 > 0.0:
        habs = min(h0, max_step)
    else:
        habs = initial_step(rhs, t, y, k1, p, direction, rtol, atol, max_step)
    eps = 2.220446049250313e-16

    while direction * (t1 - t) > 0.0:
        if nsteps >= max_steps:
            status = MAX_STEPS
            break
        hmin = max(min_step, 16.0 * eps * abs(t))
        if habs > max_step:
            habs = max_step
        last = False
        if habs >= abs(t1 - t):
            habs = abs(t1 - t)
            last = True
        h = direction * habs
        ynew, errn = step(rhs, t, y, h, k1, p, K, rtol, atol)
        if errn > 1.0:
            nrej += 1
            if np.isfinite(errn):
                habs *= max(0.2, 0.9 * errn ** -0.2)
            else:
                habs *= 0.2
            if habs < hmin:
                status = STEP_UNDERFLOW
                break
            continue

        tnew = t1 if last else t + h
        nsteps += 1
        bad = False
        for j in range(n):
            v = ynew[j]
            if not np.isfinite(v) or abs(v) > upper or v < lower:
                bad = True
        if bad:
            status = DIVERGED
            break

        # events located in this step, ordered by time
        nc = 0
        for e in range(m):
            g0 = -ev_b[e]
            g1 = -ev_b[e]
            for j in range(n):
                g0 += ev_n[e, j] * y[j]
                g1 += ev_n[e, j] * ynew[j]
            if not crossed(g0, g1, ev_dir[e]):
                continue
            lo = 0.0
            hi = 1.0
            for _ in range(MAX_BISECT):
                if (hi - lo) * habs <= EVENT_TTOL:
                    break
                mid = 0.5 * (lo + hi)
                ym = dense_eval(y, K, h, mid)
                gm = -ev_b[e]
                for j in range(n):
                    gm += ev_n[e, j] * ym[j]
                if g_after(gm, g0, ev_dir[e]):
                    hi = mid
                else:
                    lo = mid
            pos = nc
            while pos > 0 and cand_th[pos - 1] > hi:
                cand_th[pos] = cand_th[pos - 1]
                cand_id[pos] = cand_id[pos - 1]
                pos -= 1
            cand_th[pos] = hi
            cand_id[pos] = e
            nc += 1

        th_end = 1.0
        terminated = False
        for c in range(nc):
            e = cand_id[c]
            th = cand_th[c]
            ye = dense_eval(y, K, h, th)
            te = t + th * h
            if ev_fcomp[e] >= 0:
                fe = call_rhs(rhs, te, ye, p)
                if fe[ev_fcomp[e]] * ev_fsign[e] <= 0.0:
                    continue
            if ne == ev_t.shape[0]:
                ev_t = grow1(ev_t)
                ev_y = grow2(ev_y)
                ev_id = grow1(ev_id)
            ev_t[ne] = te
            ev_y[ne] = ye
            ev_id[ne] = e
            ne += 1
            ev_count[e] += 1
            if ev_term[e] > 0 and ev_count[e] >= ev_term[e]:
                th_end = th
                terminated = True
                break

        if ext_comp >= 0:
            d0 = k1[ext_comp]
            d1 = K[6, ext_comp]
            kind = 0
            if d0 > 0.0 and d1 <= 0.0:
                kind = 1
            elif d0 < 0.0 and d1 >= 0.0:
                kind = -1
            if kind != 0:
                th = refine_extremum(K, h, ext_comp, d0)
                tx = t + th * h
                if th <= th_end and direction * (tx - ext_after) > 0.0:
                    yx = dense_eval(y, K, h, th)
                    if nx == ex_t.shape[0]:
                        ex_t = grow1(ex_t)
                        ex_v = grow1(ex_v)
                        ex_kind = grow1(ex_kind)
                    ex_t[nx] = tx
                    ex_v[nx] = yx[ext_comp]
                    ex_kind[nx] = kind
                    nx += 1

        if terminated:
            tnew = t + th_end * h
            ynew = dense_eval(y, K, h, th_end)

        if store > 1:
            if ns == seg_h.shape[0]:
                seg_h = grow1(seg_h)
                seg_K = grow3(seg_K)
            seg_h[ns] = h
            seg_K[ns] = K
            ns += 1
        if store > 0:
            if nn == times.shape[0]:
                times = grow1(times)
                states = grow2(states)
            times[nn] = tnew
            states[nn] = ynew
            nn += 1

        t = tnew
        y = ynew
        if terminated:
            status = TERMINATED
            break
        for j in range(n):
            k1[j] = K[6, j]
        if errn == 0.0:
            fac = 10.0
        else:
            fac = min(10.0, max(0.2, 0.9 * errn ** -0.2))
        habs *= fac

    return (status, t, y, nsteps, nrej, times[:nn], states[:nn], seg_h[:ns], seg_K[:ns],
            ev_t[:ne], ev_y[:ne], ev_id[:ne], ex_t[:nx], ex_v[:nx], ex_kind[:nx])



