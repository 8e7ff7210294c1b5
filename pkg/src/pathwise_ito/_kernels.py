"""Sequential scan kernels (numba-compiled).

These loops are irreducibly sequential (each stopping time depends on the
previous anchor), so they are compiled rather than vectorized. All kernels
operate on plain float64 arrays; wrappers in :mod:`partition` and
:mod:`dimension` own validation and object construction.

Trigger codes shared with :mod:`partition`:
0 = omega-move, 1 = phi-move, 2 = both, 3 = exception-entered, 4 = horizon.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TRIG_OMEGA = 0
TRIG_PHI = 1
TRIG_BOTH = 2
TRIG_EXCEPTION = 3
TRIG_HORIZON = 4

_INF = np.inf


@njit(cache=True, inline="always")
def _linear_candidate(t0, t1, y0, y1, lo, ref, h):
    """First s in (lo, t1] where the linear segment hits ref +- h.

    The running value at lo lies strictly inside (ref-h, ref+h), so a
    monotone segment can only exit through the boundary on its own side.
    Returns (s, target) with s = inf if there is no hit.
    """
    if y1 == y0:
        return _INF, 0.0
    slope = (y1 - y0) / (t1 - t0)
    if slope > 0.0:
        target = ref + h
        if y1 < target:
            return _INF, 0.0
    else:
        target = ref - h
        if y1 > target:
            return _INF, 0.0
    s = t0 + (target - y0) / slope
    if s > t1:
        s = t1
    if s <= lo:
        s = np.nextafter(lo, _INF)
        if s > t1:
            return _INF, 0.0
    return s, target


@njit(cache=True, inline="always")
def _value_at(t0, t1, y0, y1, is_step, s):
    """Coordinate value at time s inside segment [t0, t1]."""
    if is_step:
        return y1 if s >= t1 else y0
    if t1 == t0:
        return y1
    return y0 + (y1 - y0) * (s - t0) / (t1 - t0)


@njit(cache=True)
def _grow(T, WV, PV, TR, m):
    cap = 2 * len(T)
    T2 = np.empty(cap)
    W2 = np.empty(cap)
    P2 = np.empty(cap)
    R2 = np.empty(cap, np.int8)
    T2[:m] = T[:m]
    W2[:m] = WV[:m]
    P2[:m] = PV[:m]
    R2[:m] = TR[:m]
    return T2, W2, P2, R2


@njit(cache=True)
def scan_pair(times, w, p, w_step, p_step, h):
    """Stopping times where max(|w - w_ref|, |p - p_ref|) reaches h.

    Linear coordinates trigger at the exact first touch (equality form);
    step coordinates trigger at grid points where the stored value clears
    the threshold, keeping the overshoot (inequality form).

    Returns (count, T, WV, PV, TRIG) with the horizon appended as a
    closing entry when no stopping time lands on it.
    """
    nseg = len(times) - 1
    cap = nseg + 64
    T = np.empty(cap)
    WV = np.empty(cap)
    PV = np.empty(cap)
    TR = np.empty(cap, np.int8)
    T[0] = times[0]
    WV[0] = w[0]
    PV[0] = p[0]
    TR[0] = TRIG_OMEGA
    m = 1
    wref = w[0]
    pref = p[0]
    tcur = times[0]
    i = 0
    while i < nseg:
        t0 = times[i]
        t1 = times[i + 1]
        if t1 <= tcur:
            i += 1
            continue
        lo = tcur if tcur > t0 else t0

        if w_step:
            tgt_w = w[i + 1]
            s_w = t1 if abs(tgt_w - wref) >= h else _INF
        else:
            s_w, tgt_w = _linear_candidate(t0, t1, w[i], w[i + 1], lo, wref, h)
        if p_step:
            tgt_p = p[i + 1]
            s_p = t1 if abs(tgt_p - pref) >= h else _INF
        else:
            s_p, tgt_p = _linear_candidate(t0, t1, p[i], p[i + 1], lo, pref, h)

        s = s_w if s_w < s_p else s_p
        if s == _INF:
            i += 1
            continue
        if s_w == s_p:
            trig = TRIG_BOTH
            wv = tgt_w
            pv = tgt_p
        elif s_w < s_p:
            trig = TRIG_OMEGA
            wv = tgt_w
            pv = _value_at(t0, t1, p[i], p[i + 1], p_step, s)
        else:
            trig = TRIG_PHI
            pv = tgt_p
            wv = _value_at(t0, t1, w[i], w[i + 1], w_step, s)
        if m + 1 >= len(T):
            T, WV, PV, TR = _grow(T, WV, PV, TR, m)
        T[m] = s
        WV[m] = wv
        PV[m] = pv
        TR[m] = trig
        m += 1
        wref = wv
        pref = pv
        tcur = s
        if s >= t1:
            i += 1
    if T[m - 1] < times[-1]:
        T[m] = times[-1]
        WV[m] = w[nseg]
        PV[m] = p[nseg]
        TR[m] = TRIG_HORIZON
        m += 1
    return m, T[:m].copy(), WV[:m].copy(), PV[:m].copy(), TR[:m].copy()


@njit(cache=True)
def _in_union(starts, ends, t):
    """Membership of t in a sorted union of disjoint closed intervals."""
    lo = 0
    hi = len(starts)
    while lo < hi:
        mid = (lo + hi) // 2
        if starts[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    j = lo - 1
    return j >= 0 and t <= ends[j]


@njit(cache=True)
def scan_predictable(times, w, p, p_step, exc_starts, exc_ends, h):
    """Two-branch stopping times for a predictably non-cadlag integrand.

    From an anchor outside the exception set, the next time is the first
    threshold move of (w, p) or the first entry into the set; from an
    anchor inside the set, only |w - w_ref| >= h is watched. w must be
    piecewise linear.
    """
    nseg = len(times) - 1
    cap = nseg + 64
    T = np.empty(cap)
    WV = np.empty(cap)
    PV = np.empty(cap)
    TR = np.empty(cap, np.int8)
    T[0] = times[0]
    WV[0] = w[0]
    PV[0] = p[0]
    TR[0] = TRIG_OMEGA
    m = 1
    wref = w[0]
    pref = p[0]
    tcur = times[0]
    in_exc = _in_union(exc_starts, exc_ends, times[0])
    nj = len(exc_starts)
    ej = 0  # first exception interval not wholly before tcur (anchors move right)
    i = 0
    while i < nseg:
        t0 = times[i]
        t1 = times[i + 1]
        if t1 <= tcur:
            i += 1
            continue
        lo = tcur if tcur > t0 else t0

        s_w, tgt_w = _linear_candidate(t0, t1, w[i], w[i + 1], lo, wref, h)
        s_p = _INF
        tgt_p = 0.0
        s_e = _INF
        if not in_exc:
            if p_step:
                tgt_p = p[i + 1]
                if abs(tgt_p - pref) >= h:
                    s_p = t1
            else:
                s_p, tgt_p = _linear_candidate(t0, t1, p[i], p[i + 1], lo, pref, h)
            while ej < nj and exc_ends[ej] <= tcur:
                ej += 1
            if ej < nj and tcur < exc_starts[ej] <= t1:
                s_e = exc_starts[ej]

        s = s_w
        if s_p < s:
            s = s_p
        if s_e < s:
            s = s_e
        if s == _INF:
            i += 1
            continue
        # precedence at exact ties: exception entry, then both, then moves
        if s == s_e:
            trig = TRIG_EXCEPTION
            wv = _value_at(t0, t1, w[i], w[i + 1], False, s)
            pv = _value_at(t0, t1, p[i], p[i + 1], p_step, s)
        elif s == s_w and s == s_p:
            trig = TRIG_BOTH
            wv = tgt_w
            pv = tgt_p
        elif s == s_w:
            trig = TRIG_OMEGA
            wv = tgt_w
            pv = _value_at(t0, t1, p[i], p[i + 1], p_step, s)
        else:
            trig = TRIG_PHI
            pv = tgt_p
            wv = _value_at(t0, t1, w[i], w[i + 1], False, s)
        if m + 1 >= len(T):
            T, WV, PV, TR = _grow(T, WV, PV, TR, m)
        T[m] = s
        WV[m] = wv
        PV[m] = pv
        TR[m] = trig
        m += 1
        wref = wv
        pref = pv
        tcur = s
        in_exc = trig == TRIG_EXCEPTION or _in_union(exc_starts, exc_ends, s)
        if s >= t1:
            i += 1
    if T[m - 1] < times[-1]:
        T[m] = times[-1]
        WV[m] = w[nseg]
        PV[m] = p[nseg]
        TR[m] = TRIG_HORIZON
        m += 1
    return m, T[:m].copy(), WV[:m].copy(), PV[:m].copy(), TR[:m].copy()


@njit(cache=True)
def greedy_cover(times, vals, is_step, e_starts, e_ends, eps):
    """Greedy left-to-right cover of E by intervals with path-oscillation <= eps.

    Each interval starts at the leftmost uncovered point of E and extends
    right as far as the oscillation constraint permits: exactly mid-segment
    for linear paths, and up to the next unaffordable jump point for step
    paths (the interval being read as closed-open there, so the jump point
    starts the next interval). Returns (count, starts, ends, max_osc).
    """
    npts = len(times)
    cap = 64
    cs = np.empty(cap)
    ce = np.empty(cap)
    count = 0
    max_osc = 0.0
    m = len(e_starts)
    j = 0
    pos = times[0] - 1.0
    exclusive = False  # whether pos itself is still uncovered
    while j < m:
        if e_ends[j] < pos or (e_ends[j] == pos and not exclusive):
            j += 1
            continue
        x = e_starts[j] if e_starts[j] > pos else pos
        i = np.searchsorted(times, x, side="right") - 1
        if i < 0:
            i = 0
        if i >= npts - 1:
            i = npts - 2
        if is_step:
            vx = vals[i + 1] if x >= times[i + 1] else vals[i]
        else:
            vx = _value_at(times[i], times[i + 1], vals[i], vals[i + 1], False, x)
        lo = vx
        hi = vx
        r = x
        exclusive = False
        i2 = i
        while i2 < npts - 1:
            v2 = vals[i2 + 1]
            nlo = lo if lo < v2 else v2
            nhi = hi if hi > v2 else v2
            if nhi - nlo <= eps:
                lo = nlo
                hi = nhi
                r = times[i2 + 1]
                i2 += 1
                continue
            if is_step:
                # flat up to the jump; cover [x, times[i2+1]) and restart there
                r = times[i2 + 1]
                exclusive = True
            else:
                dt = times[i2 + 1] - times[i2]
                sl = (vals[i2 + 1] - vals[i2]) / dt
                if sl > 0.0:
                    s = times[i2] + ((lo + eps) - vals[i2]) / sl
                    if s > r:
                        r = s
                        hi = lo + eps
                else:
                    s = times[i2] + ((hi - eps) - vals[i2]) / sl
                    if s > r:
                        r = s
                        lo = hi - eps
            break
        if count == cap:
            cap *= 2
            ncs = np.empty(cap)
            nce = np.empty(cap)
            ncs[:count] = cs[:count]
            nce[:count] = ce[:count]
            cs = ncs
            ce = nce
        cs[count] = x
        ce[count] = r
        count += 1
        if hi - lo > max_osc:
            max_osc = hi - lo
        if r > x:
            pos = r
        else:
            # degenerate cover interval: step past the covered point
            pos = np.nextafter(x, _INF)
            exclusive = False
        if e_ends[j] < pos or (e_ends[j] == pos and not exclusive):
            j += 1
    return count, cs[:count].copy(), ce[:count].copy(), max_osc
