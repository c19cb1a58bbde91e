"""Lean embedded Dormand-Prince 4(5) stepper for the 2-state radial system.

The generic solve_ivp machinery spends two orders of magnitude more time in
per-step bookkeeping than in the right-hand side for a system this small;
shooting scans make tens of thousands of steps, so the stepper here works in
plain Python floats with the same tableau, the same quartic dense output,
and the same event semantics (directional sign changes, terminal stop) as
scipy's RK45.  The tableau and interpolant coefficients are taken from
scipy at import time, which keeps the two integrators bit-compatible in
their coefficients.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate._ivp.rk import RK45 as _RK45

from .errors import NonConvergence

_C = [float(c) for c in _RK45.C]
_A = [[float(a) for a in row] for row in _RK45.A]
_B = [float(b) for b in _RK45.B]
_E = [float(e) for e in _RK45.E]
_P = [[float(p) for p in row] for row in _RK45.P]
_STAGES = len(_B)  # 6 fresh stages; the FSAL derivative is stage 7

MAX_STEPS = 2_000_000


class DenseSolution:
    """Piecewise quartic interpolant collected along the accepted steps."""

    def __init__(self, starts, hs, y0s, coeffs):
        self.starts = np.asarray(starts)
        self.hs = np.asarray(hs)
        self.y0s = np.asarray(y0s)  # (n, 2)
        self.coeffs = np.asarray(coeffs)  # (n, 2, 4)
        self.t_min = float(self.starts[0])
        self.t_max = float(self.starts[-1] + self.hs[-1])

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.starts, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.starts) - 1)
        h = self.hs[idx]
        x = (t_arr - self.starts[idx]) / h
        powers = np.stack([x, x ** 2, x ** 3, x ** 4], axis=-1)  # (m, 4)
        q = self.coeffs[idx]  # (m, 2, 4)
        vals = self.y0s[idx] + h[:, None] * np.einsum("mcj,mj->mc", q, powers)
        out = vals.T  # (2, m)
        if np.isscalar(t) or np.ndim(t) == 0:
            return out[:, 0]
        return out


class IntegrationResult:
    def __init__(self, t, y, t_events, sol):
        self.t = t
        self.y = y
        self.t_events = t_events
        self.sol = sol


def _event_fired(g0, g1, direction):
    up = g0 < 0.0 <= g1
    down = g0 > 0.0 >= g1
    if direction > 0:
        return up
    if direction < 0:
        return down
    return up or down


def integrate_radial(rhs, t0, t_end, y0, events=(), rtol=1e-10, atol=1e-12):
    """Adaptive DOPRI 4(5) integration with terminal directional events.

    rhs(t, (u, v)) returns a pair; events are callables with `terminal` and
    `direction` attributes, located inside a step by bisection on the dense
    interpolant.  Returns arrays of accepted nodes, the fired event times,
    and the dense solution.
    """
    u, v = float(y0[0]), float(y0[1])
    t = float(t0)
    fu, fv = rhs(t, (u, v))

    # initial step from the local derivative scale
    scale_u = atol + rtol * abs(u)
    scale_v = atol + rtol * abs(v)
    d0 = math.sqrt((u / scale_u) ** 2 + (v / scale_v) ** 2)
    d1 = math.sqrt((fu / scale_u) ** 2 + (fv / scale_v) ** 2)
    h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
    h = min(h, (t_end - t0))

    g_prev = [ev(t, (u, v)) for ev in events]
    t_events = [[] for _ in events]

    ts = [t]
    ys = [(u, v)]
    starts, hs, y0s, coeffs = [], [], [], []
    ks = [(0.0, 0.0)] * (_STAGES + 1)
    ks[0] = (fu, fv)

    finished = False
    for _ in range(MAX_STEPS):
        if finished:
            break
        if t + h >= t_end:
            h = t_end - t
            finished = True
        # stages
        for s in range(1, _STAGES):
            a_row = _A[s]
            du = 0.0
            dv = 0.0
            for j in range(s):
                aj = a_row[j]
                if aj != 0.0:
                    du += aj * ks[j][0]
                    dv += aj * ks[j][1]
            ks[s] = rhs(t + _C[s] * h, (u + h * du, v + h * dv))
        du = 0.0
        dv = 0.0
        for s in range(_STAGES):
            bs = _B[s]
            if bs != 0.0:
                du += bs * ks[s][0]
                dv += bs * ks[s][1]
        u_new = u + h * du
        v_new = v + h * dv
        ks[_STAGES] = rhs(t + h, (u_new, v_new))

        err_u = 0.0
        err_v = 0.0
        for s in range(_STAGES + 1):
            es = _E[s]
            if es != 0.0:
                err_u += es * ks[s][0]
                err_v += es * ks[s][1]
        scale_u = atol + rtol * max(abs(u), abs(u_new))
        scale_v = atol + rtol * max(abs(v), abs(v_new))
        err = math.sqrt(0.5 * ((h * err_u / scale_u) ** 2 + (h * err_v / scale_v) ** 2))

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            finished = False
            continue

        # dense coefficients for this accepted step
        q = [[0.0] * 4, [0.0] * 4]
        for j in range(4):
            cu = 0.0
            cv = 0.0
            for s in range(_STAGES + 1):
                ps = _P[s][j]
                if ps != 0.0:
                    cu += ps * ks[s][0]
                    cv += ps * ks[s][1]
            q[0][j] = cu
            q[1][j] = cv
        starts.append(t)
        hs.append(h)
        y0s.append((u, v))
        coeffs.append(q)

        def dense_eval(theta):
            x1 = theta
            uu = u + h * (
                q[0][0] * x1 + q[0][1] * x1 ** 2 + q[0][2] * x1 ** 3 + q[0][3] * x1 ** 4
            )
            vv = v + h * (
                q[1][0] * x1 + q[1][1] * x1 ** 2 + q[1][2] * x1 ** 3 + q[1][3] * x1 ** 4
            )
            return uu, vv

        # events on [t, t+h]
        t_new = t + h
        best = None
        g_new = [ev(t_new, (u_new, v_new)) for ev in events]
        for i, ev in enumerate(events):
            if _event_fired(g_prev[i], g_new[i], ev.direction):
                lo, hi = 0.0, 1.0
                g_lo = g_prev[i]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    g_mid = ev(t + mid * h, dense_eval(mid))
                    if _event_fired(g_lo, g_mid, ev.direction):
                        hi = mid
                    else:
                        lo, g_lo = mid, g_mid
                    if hi - lo < 1e-14:
                        break
                theta = hi
                if best is None or theta < best[0]:
                    best = (theta, i)
        if best is not None:
            theta, i = best
            t_ev = t + theta * h
            y_ev = dense_eval(theta)
            t_events[i].append(t_ev)
            ts.append(t_ev)
            ys.append(y_ev)
            break

        t, u, v = t_new, u_new, v_new
        ks[0] = ks[_STAGES]
        ts.append(t)
        ys.append((u, v))
        g_prev = g_new
        if err > 0:
            h *= min(10.0, 0.9 * err ** -0.2)
        else:
            h *= 10.0
    else:
        raise NonConvergence(f"step budget {MAX_STEPS} exhausted at r={t:.3g}")

    sol = DenseSolution(starts, hs, y0s, coeffs)
    return IntegrationResult(
        t=np.asarray(ts),
        y=np.asarray(ys).T,
        t_events=[np.asarray(te) for te in t_events],
        sol=sol,
    )
