"""Numba kernels for long float-mode induction and billiard runs."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def induct_float(lam, top, bot, Q, blocks, n_grouped, ortho_every, S_out, dither_seed):
    """Rauzy-Veech induction on float lengths, tracking row-vector growth.

    lam: (m,) lengths; top/bot: (m,) label orders; Q: (r, m) tracked row
    profiles, updated by column additions Q[:, loser] += Q[:, winner];
    blocks: (nb+1,) row boundaries of independently orthonormalized blocks;
    S_out: (cap, k, k) storage for the accumulated R-factors of the LAST
    block (cap 0 disables recording).

    Returns (logacc, time_T, raw_steps, grouped_done, n_records, status).
    status: 0 ok, 1 tie encountered (aborted), 2 length underflow,
    3 raw-step budget exhausted.

    Lengths are renormalized to sum 1 at every orthonormalization, with a
    ~1e-14 multiplicative dither: double-precision lengths are secretly
    dyadic rationals, and without the dither the induction tracks the
    continued fraction of a rational, which produces a spurious giant
    partial quotient at the precision horizon (every ~37 time units)."""
    np.random.seed(dither_seed)
    m = lam.shape[0]
    r = Q.shape[0]
    nb = blocks.shape[0] - 1
    logacc = np.zeros(r)
    total0 = 0.0
    for i in range(m):
        total0 += lam[i]
    time_off = 0.0  # accumulated -log of applied rescalings
    raw = 0
    grouped = 0
    n_rec = 0
    cap = S_out.shape[0]
    last_winner = -1
    runs_since_ortho = 0
    max_raw = 1000000000000
    while grouped < n_grouped:
        if raw > max_raw:
            return logacc, 0.0, raw, grouped, n_rec, 3
        alpha = top[m - 1]
        beta = bot[m - 1]
        if alpha == beta or lam[alpha] == lam[beta]:
            return logacc, 0.0, raw, grouped, n_rec, 1
        if lam[alpha] > lam[beta]:
            winner = alpha
            loser = beta
        else:
            winner = beta
            loser = alpha
        # batched subtraction: when the loser re-insertion is a no-op the
        # same (winner, loser) pair repeats floor(lam_w/lam_l) times; doing
        # the run in one update avoids quotient-length stalls
        if (winner == alpha and bot[m - 2] == alpha) or (
            winner == beta and top[m - 2] == beta
        ):
            k = int(lam[winner] / lam[loser]) - 1
            if k >= 1:
                lam[winner] -= k * lam[loser]
                for i in range(r):
                    Q[i, loser] += k * Q[i, winner]
                raw += k
                if winner != last_winner:
                    grouped += 1
                    runs_since_ortho += 1
                    last_winner = winner
                if lam[winner] <= lam[loser]:
                    # float quotient overshot by one; undo a single step
                    lam[winner] += lam[loser]
                    for i in range(r):
                        Q[i, loser] -= Q[i, winner]
                    raw -= 1
        lam[winner] -= lam[loser]
        if lam[winner] < 1e-250:
            # rescale promptly: a single long run can underflow doubles
            tot = 0.0
            for i in range(m):
                tot += lam[i]
            if tot <= 0.0 or tot != tot:
                return logacc, 0.0, raw, grouped, n_rec, 2
            sc = 1.0 / tot
            for i in range(m):
                lam[i] *= sc
            time_off += -np.log(tot / total0)
            total0 = 1.0
        for i in range(r):
            Q[i, loser] += Q[i, winner]
        if winner == alpha:
            # move beta right after alpha in bot
            pos = 0
            for i in range(m):
                if bot[i] == alpha:
                    pos = i
                    break
            for i in range(m - 1, pos + 1, -1):
                bot[i] = bot[i - 1]
            bot[pos + 1] = beta
        else:
            pos = 0
            for i in range(m):
                if top[i] == beta:
                    pos = i
                    break
            for i in range(m - 1, pos + 1, -1):
                top[i] = top[i - 1]
            top[pos + 1] = alpha
        raw += 1
        if winner != last_winner:
            grouped += 1
            runs_since_ortho += 1
            last_winner = winner
        do_ortho = runs_since_ortho >= ortho_every
        if not do_ortho and runs_since_ortho > 0:
            # renormalize early once the section has shrunk by e^-8: the
            # dither must refresh the lengths well before the precision
            # horizon (~e^-16 of the last renormalization scale)
            tot = 0.0
            for i in range(m):
                tot += lam[i]
            if tot < 3.35e-4 * total0:
                do_ortho = True
        if do_ortho:
            runs_since_ortho = 0
            # rescale lengths to avoid underflow
            tot = 0.0
            for i in range(m):
                tot += lam[i]
            if tot <= 0.0 or tot != tot:
                return logacc, 0.0, raw, grouped, n_rec, 2
            # renormalize to sum 1 with a tiny dither (see docstring)
            sc = 1.0 / tot
            for i in range(m):
                lam[i] *= sc * (1.0 + 1e-14 * (np.random.random() - 0.5))
            time_off += -np.log(tot / total0)
            total0 = 1.0
            # per-block orthonormalization
            for b in range(nb):
                lo = blocks[b]
                hi = blocks[b + 1]
                k = hi - lo
                A = np.empty((m, k))
                for i in range(m):
                    for j in range(k):
                        A[i, j] = Q[lo + j, i]
                Uq, R = np.linalg.qr(A)
                for j in range(k):
                    d = abs(R[j, j])
                    if d > 0.0:
                        logacc[lo + j] += np.log(d)
                for i in range(m):
                    for j in range(k):
                        Q[lo + j, i] = Uq[i, j]
                if b == nb - 1 and n_rec < cap:
                    for a in range(k):
                        for c in range(k):
                            S_out[n_rec, a, c] = R[a, c]
                    n_rec += 1
    tot = 0.0
    for i in range(m):
        tot += lam[i]
    time_t = time_off - np.log(tot / total0)
    return logacc, time_t, raw, grouped, n_rec, 0


# ---------------------------------------------------------------------------
# exact window induction
# ---------------------------------------------------------------------------

WIN_OK = 0
WIN_NEED_DIGITS = 1
WIN_NEED_EXACT_CMP = 2
WIN_BIG_DIGIT = 3
WIN_TIE = 4
WIN_OVERFLOW = 5
WIN_CK_FULL = 6

_XMAX = 1 << 21
_DIGMAX = 1 << 16


@njit(cache=True)
def window_induct(x, y, lamf, top, bot, Q, Cc, accF, accD,
                  digits, fstate, counters, ck_t, ck_F, ck_D,
                  n_grouped, ortho_every, ck_every):
    """Rauzy-Veech induction with exact integer lengths in a sliding
    continued-fraction window.

    Lengths are lam_alpha = x[alpha]*f + y[alpha]*g where (f, g) is the
    current pair of convergent remainders of the direction parameter; the
    ratio rho = g/f = [0; digits[di], digits[di+1], ...] is carried as a
    float for comparisons, with exact escapes when floats cannot certify a
    sign.  When coordinates outgrow _XMAX the window advances by consuming
    one digit: (x, y) <- (a*x + y, x), which contracts them again.  All
    integer arithmetic stays within int64 by construction (coordinates
    bounded by 2*_XMAX, consumed digits bounded by _DIGMAX; anything larger
    escapes to the exact Python path).

    Q: (r, m) forward profile rows, updated Q[:, loser] += Q[:, winner];
    Cc: (m, rc) dual columns, updated Cc[winner] -= Cc[loser]; both blocks
    are QR-orthonormalized every ortho_every grouped steps with log |R_ii|
    accumulated into accF / accD.  Checkpoints (time, accumulators) are
    written every ck_every grouped steps.

    fstate: [rho, logF] (logF = log of the window unit f);
    counters: [di, grouped, raw, prev_winner, since_ortho, since_ck, n_ck].
    Returns a WIN_* status code."""
    m = x.shape[0]
    r = Q.shape[0]
    rc = Cc.shape[1]
    rho = fstate[0]
    logF = fstate[1]
    di = counters[0]
    grouped = counters[1]
    raw = counters[2]
    prevw = counters[3]
    since_ortho = counters[4]
    since_ck = counters[5]
    nck = counters[6]
    nd = digits.shape[0]
    status = WIN_OK
    while grouped < n_grouped:
        alpha = top[m - 1]
        beta = bot[m - 1]
        if alpha == beta:
            status = WIN_TIE
            break
        dl = lamf[alpha] - lamf[beta]
        tol = 1e-13 * (abs(x[alpha]) + abs(x[beta])
                       + (abs(y[alpha]) + abs(y[beta])) * rho + 1.0)
        if abs(dl) <= tol:
            status = WIN_NEED_EXACT_CMP
            break
        if dl > 0:
            w = alpha
            l = beta
            topwin = True
        else:
            w = beta
            l = alpha
            topwin = False
        if w != prevw:
            prevw = w
            grouped += 1
            since_ortho += 1
            since_ck += 1
            if since_ortho >= ortho_every:
                since_ortho = 0
                qf, rf = np.linalg.qr(Q.T)
                for i in range(r):
                    accF[i] += np.log(abs(rf[i, i]))
                Q[:, :] = qf.T
                qd, rd = np.linalg.qr(Cc)
                for i in range(rc):
                    accD[i] += np.log(abs(rd[i, i]))
                Cc[:, :] = qd
            if since_ck >= ck_every:
                since_ck = 0
                if nck >= ck_t.shape[0]:
                    status = WIN_CK_FULL
                    break
                tot = 0.0
                for i in range(m):
                    tot += lamf[i]
                ck_t[nck] = -(logF + np.log(tot))
                for i in range(r):
                    ck_F[nck, i] = accF[i]
                for i in range(rc):
                    ck_D[nck, i] = accD[i]
                nck += 1
        # batched subtraction when the same (winner, loser) pair repeats:
        # that happens exactly when the winner directly precedes the loser
        # in the opposite row, so the reinsertion is a no-op.
        same_next = (bot[m - 2] == alpha) if topwin else (top[m - 2] == beta)
        batched = False
        if same_next and lamf[l] > 0.0 and lamf[w] > 4.0 * lamf[l]:
            kq = np.int64(lamf[w] / lamf[l]) - 2
            mx = abs(x[l])
            if abs(y[l]) > mx:
                mx = abs(y[l])
            if mx > 0:
                kcap = (np.int64(1) << 61) // mx
                if kq > kcap:
                    kq = kcap
            if kq > 1:
                nx = x[w] - kq * x[l]
                ny = y[w] - kq * y[l]
                nlam = nx + ny * rho
                vtol = 1e-12 * (abs(nx) + abs(ny) * rho + 1.0)
                # the remaining length must certifiably stay in (lam_l, 3*lam_l);
                # if floats cannot certify that, fall back to single steps
                if nlam - vtol > lamf[l] and nlam + vtol < 3.5 * lamf[l]:
                    x[w] = nx
                    y[w] = ny
                    lamf[w] = nlam
                    fk = float(kq)
                    for i in range(r):
                        Q[i, l] += fk * Q[i, w]
                    for j in range(rc):
                        Cc[w, j] -= fk * Cc[l, j]
                    raw += kq
                    batched = True
        if not batched:
            x[w] -= x[l]
            y[w] -= y[l]
            lamf[w] = x[w] + y[w] * rho
            for i in range(r):
                Q[i, l] += Q[i, w]
            for j in range(rc):
                Cc[w, j] -= Cc[l, j]
            raw += 1
            if topwin:
                pos = 0
                for i in range(m):
                    if bot[i] == alpha:
                        pos = i
                        break
                for i in range(m - 1, pos + 1, -1):
                    bot[i] = bot[i - 1]
                bot[pos + 1] = beta
            else:
                pos = 0
                for i in range(m):
                    if top[i] == beta:
                        pos = i
                        break
                for i in range(m - 1, pos + 1, -1):
                    top[i] = top[i - 1]
                top[pos + 1] = alpha
        # advance the window while any coordinate is large
        if abs(x[w]) > _XMAX or abs(y[w]) > _XMAX:
            guard = 0
            while True:
                mx = np.int64(0)
                for i in range(m):
                    ax = abs(x[i])
                    ay = abs(y[i])
                    if ax > mx:
                        mx = ax
                    if ay > mx:
                        mx = ay
                if mx <= _XMAX:
                    break
                guard += 1
                if guard > 64 or mx > (np.int64(1) << 45):
                    status = WIN_OVERFLOW
                    break
                if di + 40 > nd:
                    status = WIN_NEED_DIGITS
                    break
                a = digits[di]
                if a > _DIGMAX:
                    status = WIN_BIG_DIGIT
                    break
                for i in range(m):
                    nx = a * x[i] + y[i]
                    y[i] = x[i]
                    x[i] = nx
                di += 1
                logF += np.log(rho)
                rho = 0.0
                for j in range(24, -1, -1):
                    rho = 1.0 / (digits[di + j] + rho)
                for i in range(m):
                    lamf[i] = x[i] + y[i] * rho
            if status != WIN_OK:
                break
    fstate[0] = rho
    fstate[1] = logF
    counters[0] = di
    counters[1] = grouped
    counters[2] = raw
    counters[3] = prevw
    counters[4] = since_ortho
    counters[5] = since_ck
    counters[6] = nck
    return status


# ---------------------------------------------------------------------------
# event-driven billiard tracer (rectangle obstacle, sheared row lattice)
# ---------------------------------------------------------------------------

BIL_OK = 0
BIL_CORNER = 1
BIL_MAXEVENTS = 2
BIL_PENETRATION = 3

_BIL_CTOL = 1e-11


@njit(cache=True)
def rect_flow(x, y, vx, vy, a, b, shear, T, ts, xs, ys,
              do_rec, tmin_rec, radius, wx, wy, max_events):
    """Unit cells index rows by n; the row-n obstacle with column index m
    occupies [m + shear*n, m + shear*n + a] x [n, n + b].

    Trajectory starts at (x, y) with velocity (vx, vy); positions are sampled
    at the (ascending) times in ts into xs/ys.  If do_rec, reports whether the
    path after tmin_rec comes within `radius` of the start in the metric
    diag(wx, wy).  Returns (status, recurred, n_events)."""
    t = 0.0
    si = 0
    ns = ts.shape[0]
    nev = 0
    rec = 0
    x0r, y0r = x, y
    n = int(np.floor(y))
    in_obst = (y - n) < b
    while t < T:
        # choose the segment length dt and the post-segment update
        if in_obst:
            xr = x - shear * n
            g = xr - np.floor(xr)
            if g <= _BIL_CTOL:
                g += 1.0
            if g < a - _BIL_CTOL:
                return BIL_PENETRATION, rec, nev
            if vx > 0.0:
                tx = (1.0 - g) / vx
            elif vx < 0.0:
                tx = (g - a) / (-vx)
            else:
                tx = np.inf
            if vy > 0.0:
                ty = (n + b - y) / vy
            elif vy < 0.0:
                ty = (y - n) / (-vy)
            else:
                ty = np.inf
            dt = tx if tx < ty else ty
        else:
            if vy > 0.0:
                ty = (n + 1.0 - y) / vy
            elif vy < 0.0:
                ty = (y - (n + b)) / (-vy)
            else:
                ty = np.inf
            tx = np.inf
            dt = ty
        if not (dt < T - t):
            dt = T - t
            terminal = True
        else:
            terminal = False
        # emit samples on the segment
        while si < ns and ts[si] <= t + dt:
            tau = ts[si] - t
            xs[si] = x + vx * tau
            ys[si] = y + vy * tau
            si += 1
        if do_rec and rec == 0 and t + dt >= tmin_rec and dt > 0.0:
            lo = 0.0
            if t < tmin_rec:
                lo = (tmin_rec - t) / dt
            dxs = wx * (x - x0r)
            dys = wy * (y - y0r)
            ex = wx * vx * dt
            ey = wy * vy * dt
            den = ex * ex + ey * ey
            s = lo
            if den > 0.0:
                s = -(dxs * ex + dys * ey) / den
                if s < lo:
                    s = lo
                elif s > 1.0:
                    s = 1.0
            ddx = dxs + s * ex
            ddy = dys + s * ey
            if ddx * ddx + ddy * ddy <= radius * radius:
                rec = 1
        x += vx * dt
        y += vy * dt
        t += dt
        if terminal:
            break
        nev += 1
        if nev > max_events:
            return BIL_MAXEVENTS, rec, nev
        if in_obst:
            if tx < ty:
                # vertical wall: snap x onto the wall line, check corners
                xr = x - shear * n
                if vx > 0.0:
                    # left edge of column k, k = nearest integer
                    x = np.floor(xr + 0.5) + shear * n
                else:
                    # right edge of column k at xr = k + a
                    x = np.floor(xr - a + 0.5) + a + shear * n
                fy = y - n
                if fy < _BIL_CTOL or fy > b - _BIL_CTOL:
                    return BIL_CORNER, rec, nev
                vx = -vx
            else:
                # leave the obstacle band through a gap between obstacles
                if vy > 0.0:
                    y = n + b
                else:
                    y = float(n)
                    n -= 1
                in_obst = False
        else:
            # crossing a horizontal obstacle-edge line
            if vy > 0.0:
                nt = n + 1
                y = float(nt)
            else:
                nt = n
                y = n + b
            xr = x - shear * nt
            g = xr - np.floor(xr)
            if g < _BIL_CTOL or (g > a - _BIL_CTOL and g < a + _BIL_CTOL) or g > 1.0 - _BIL_CTOL:
                return BIL_CORNER, rec, nev
            if g < a:
                vy = -vy
            else:
                n = nt
                in_obst = True
    # pad trailing samples (t reached T between sample grid points)
    while si < ns:
        xs[si] = x
        ys[si] = y
        si += 1
    return BIL_OK, rec, nev
