"""Numeric inner loops: unit-disk neighbour search and the car-following step.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorised numpy version.  Both perform the same floating-point operations in
the same order, so results agree bit for bit.  Set ``ODAMC_DISABLE_NUMBA=1``
(or uninstall numba) to use the numpy path.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_DISABLED = os.environ.get("ODAMC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
NUMBA_ENABLED = numba is not None and not _DISABLED

INF = math.inf


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------- neighbours

def _neighbors_loop(xs, ys, x0, y0, radius, ring_length, exclude):
    n = xs.shape[0]
    idx = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)
    half = 0.5 * ring_length
    k = 0
    for i in range(n):
        if i == exclude:
            continue
        dx = xs[i] - x0
        if ring_length > 0.0:
            dx = dx % ring_length
            if dx > half:
                dx = dx - ring_length
        dy = ys[i] - y0
        d = math.sqrt(dx * dx + dy * dy)
        if d <= radius:
            idx[k] = i
            dist[k] = d
            k += 1
    return idx[:k], dist[:k]


def neighbors_numpy(xs, ys, x0, y0, radius, ring_length, exclude):
    dx = xs - x0
    if ring_length > 0.0:
        dx = np.mod(dx, ring_length)
        dx = np.where(dx > 0.5 * ring_length, dx - ring_length, dx)
    dy = ys - y0
    d = np.sqrt(dx * dx + dy * dy)
    mask = d <= radius
    if 0 <= exclude < xs.shape[0]:
        mask[exclude] = False
    idx = np.flatnonzero(mask).astype(np.int64)
    return idx, d[idx]


neighbors_numba = _njit(_neighbors_loop)


# ------------------------------------------------------------------ mobility

def _advance_scalar(v0, goal, rate, dt):
    """Constant-rate approach of ``goal`` from ``v0``; returns (v1, distance)."""
    if rate <= 0.0 or v0 == goal:
        return v0, v0 * dt
    t_s = abs(goal - v0) / rate
    if t_s >= dt:
        if goal > v0:
            v1 = v0 + rate * dt
        else:
            v1 = v0 - rate * dt
        return v1, 0.5 * (v0 + v1) * dt
    return goal, 0.5 * (v0 + goal) * t_s + goal * (dt - t_s)


def _scan_lane_loop(x, lane, i, xi, target_lane, L):
    ahead = INF
    ai = -1
    behind = INF
    bi = -1
    for j in range(x.shape[0]):
        if j == i or lane[j] != target_lane:
            continue
        d = (x[j] - xi) % L
        if d < ahead:
            ahead = d
            ai = j
        b = (xi - x[j]) % L
        if b < behind:
            behind = b
            bi = j
    return ahead, ai, behind, bi


def _mobility_loop(x, y, lane, speed, target, accel, decel,
                   lane_count, L, lane_width, min_gap, headway, dt):
    n = x.shape[0]
    _scan = _scan_lane_loop
    _adv = _advance_scalar
    # lane changes, sequential in id order
    for i in range(n):
        ahead, ai, _b, _bi = _scan(x, lane, i, x[i], lane[i], L)
        need = min_gap + speed[i] * headway
        if ai >= 0 and ahead < need:
            for k in range(2):
                cand = lane[i] + 1 if k == 0 else lane[i] - 1
                if cand < 0 or cand >= lane_count:
                    continue
                fa, fai, fb, fbi = _scan(x, lane, i, x[i], cand, L)
                back_need = min_gap
                if fbi >= 0:
                    back_need = min_gap + speed[fbi] * headway
                if (fai < 0 or fa >= need) and (fbi < 0 or fb >= back_need):
                    lane[i] = cand
                    y[i] = (cand + 0.5) * lane_width
                    break

    # per-lane chains sorted by x (stable: ties keep id order)
    leader = np.full(n, -1, np.int64)
    gap = np.full(n, INF)
    for ln in range(lane_count):
        members = np.flatnonzero(lane == ln)
        k = members.shape[0]
        if k < 2:
            continue
        order = members[np.argsort(x[members], kind="mergesort")]
        for j in range(k):
            i = order[j]
            ld = order[(j + 1) % k]
            leader[i] = ld
            gap[i] = (x[ld] - x[i]) % L

    # speeds from the pre-step state (Jacobi)
    v1 = np.empty(n)
    dx = np.empty(n)
    for i in range(n):
        ld = leader[i]
        need = min_gap + speed[i] * headway
        if ld >= 0 and gap[i] < need:
            if speed[i] > speed[ld]:
                v1[i], dx[i] = _adv(speed[i], speed[ld], decel[i], dt)
            else:
                v1[i], dx[i] = _adv(speed[i], speed[i], 0.0, dt)
        elif speed[i] < target[i]:
            v1[i], dx[i] = _adv(speed[i], target[i], accel[i], dt)
        else:
            v1[i], dx[i] = _adv(speed[i], target[i], decel[i], dt)

    # no vehicle may close within min_gap of its leader's new position;
    # walk each chain backwards from the vehicle with the largest gap
    for ln in range(lane_count):
        members = np.flatnonzero(lane == ln)
        k = members.shape[0]
        if k < 2:
            continue
        order = members[np.argsort(x[members], kind="mergesort")]
        s = 0
        for j in range(1, k):
            if gap[order[j]] > gap[order[s]]:
                s = j
        for step in range(k):
            i = order[(s - step) % k]
            if step == 0:
                allowed = gap[i] - min_gap
            else:
                allowed = gap[i] + dx[leader[i]] - min_gap
            if dx[i] > allowed:
                if allowed < 0.0:
                    allowed = 0.0
                dx[i] = allowed
                cap = allowed / dt
                if v1[i] > cap:
                    v1[i] = cap

    for i in range(n):
        speed[i] = v1[i]
        x[i] = (x[i] + dx[i]) % L


_mobility_jit = None
if numba is not None:
    _advance_scalar = numba.njit(cache=True)(_advance_scalar)
    _scan_lane_loop = numba.njit(cache=True)(_scan_lane_loop)
    _mobility_jit = numba.njit(cache=True)(_mobility_loop)


def _advance_vec(v0, goal, rate, dt):
    moving = (rate > 0.0) & (v0 != goal)
    safe_rate = np.where(moving, rate, 1.0)
    t_s = np.abs(goal - v0) / safe_rate
    partial = moving & (t_s >= dt)
    v_part = np.where(goal > v0, v0 + rate * dt, v0 - rate * dt)
    d_part = 0.5 * (v0 + v_part) * dt
    d_reach = 0.5 * (v0 + goal) * t_s + goal * (dt - t_s)
    v1 = np.where(moving, np.where(partial, v_part, goal), v0)
    d = np.where(moving, np.where(partial, d_part, d_reach), v0 * dt)
    return v1, d


def _scan_lane_numpy(x, lane, i, xi, target_lane, L):
    m = lane == target_lane
    m[i] = False
    cand = np.flatnonzero(m)
    if cand.shape[0] == 0:
        return INF, -1, INF, -1
    d = np.mod(x[cand] - xi, L)
    b = np.mod(xi - x[cand], L)
    a_pos = int(np.argmin(d))
    b_pos = int(np.argmin(b))
    return float(d[a_pos]), int(cand[a_pos]), float(b[b_pos]), int(cand[b_pos])


def mobility_numpy(x, y, lane, speed, target, accel, decel,
                   lane_count, L, lane_width, min_gap, headway, dt):
    n = x.shape[0]
    for i in range(n):
        ahead, ai, _b, _bi = _scan_lane_numpy(x, lane, i, x[i], lane[i], L)
        need = min_gap + speed[i] * headway
        if ai >= 0 and ahead < need:
            for cand in (lane[i] + 1, lane[i] - 1):
                if cand < 0 or cand >= lane_count:
                    continue
                fa, fai, fb, fbi = _scan_lane_numpy(x, lane, i, x[i], cand, L)
                back_need = min_gap + speed[fbi] * headway if fbi >= 0 else min_gap
                if (fai < 0 or fa >= need) and (fbi < 0 or fb >= back_need):
                    lane[i] = cand
                    y[i] = (cand + 0.5) * lane_width
                    break

    leader = np.full(n, -1, np.int64)
    gap = np.full(n, INF)
    chains = []
    for ln in range(lane_count):
        members = np.flatnonzero(lane == ln)
        if members.shape[0] < 2:
            continue
        order = members[np.argsort(x[members], kind="mergesort")]
        lead = np.roll(order, -1)
        leader[order] = lead
        gap[order] = np.mod(x[lead] - x[order], L)
        chains.append(order)

    has_lead = leader >= 0
    ld = np.where(has_lead, leader, 0)
    close = has_lead & (gap < min_gap + speed * headway)
    braking = close & (speed > speed[ld])
    goal = np.where(close, np.where(braking, speed[ld], speed), target)
    rate = np.where(close, np.where(braking, decel, 0.0),
                    np.where(speed < target, accel, decel))
    v1, dx = _advance_vec(speed, goal, rate, dt)

    for order in chains:
        k = order.shape[0]
        s = int(np.argmax(gap[order]))
        for step in range(k):
            i = order[(s - step) % k]
            if step == 0:
                allowed = gap[i] - min_gap
            else:
                allowed = gap[i] + dx[leader[i]] - min_gap
            if dx[i] > allowed:
                if allowed < 0.0:
                    allowed = 0.0
                dx[i] = allowed
                cap = allowed / dt
                if v1[i] > cap:
                    v1[i] = cap

    speed[:] = v1
    x[:] = np.mod(x + dx, L)


if NUMBA_ENABLED:
    neighbors = neighbors_numba
    mobility_kernel = _mobility_jit
else:
    neighbors = neighbors_numpy
    mobility_kernel = mobility_numpy

mobility_numba = _mobility_jit
