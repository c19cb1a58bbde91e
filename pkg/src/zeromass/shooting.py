"""Radial shooting for -u'' - (N-1)/r u' = lam*|u|^{p-2}u - |u|^{q-2}u.

Three boundary-value flavours share one machinery: Dirichlet balls (shoot on
the center value), all of space (shoot on the center value, demand decay or
finite extinction), and exteriors of balls (shoot on the inner slope,
exploratory since existence there is an open problem).  Trajectories are
classified by terminal events; a sign change of the classification over a
geometric parameter scan brackets the ground-state candidate, which plain
bisection then pins to machine precision.

The mechanical picture drives the event design: r is time, u a particle in
the potential F(u) = lam*u^p/p - u^q/q with friction (N-1)/r.  Crossing zero
means too much energy, turning back up means too little, and for q < 2 the
sublinear absorption lets trajectories reach (u, u') = (0, 0) at finite
radius, which is a genuine compactly supported state, not an artifact.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import NoSolutionBracket, TailNotResolved
from .exponents import DomainKind, ExponentConfig, classify_region
from .fibering import FiberDiagnostics, Functionals
from .fibering import diagnostics as fiber_diagnostics
from .mesh import sphere_area
from .rk45 import integrate_radial

RTOL = 1e-10
ATOL_FACTOR = 1e-12
TAIL_REL = 1e-8
NEHARI_REL = 1e-6
POHOZAEV_REL = 1e-6
EXTINCTION_REL = 1e-9
BISECT_RTOL = 1e-12
R_CAP = 1.0e6
MIN_NODES = 4097

_OVERRIDABLE = ("RTOL", "TAIL_REL", "NEHARI_REL", "POHOZAEV_REL", "EXTINCTION_REL")


class tolerance_overrides:
    """Temporarily override module tolerances (lower-case keys).

    with tolerance_overrides(pohozaev_rel=1e-9): shoot_ball(...)
    """

    def __init__(self, **kwargs):
        self.values = {}
        for key, val in kwargs.items():
            name = key.upper()
            if name not in _OVERRIDABLE:
                raise ValueError(
                    f"unknown tolerance {key!r}; overridable: "
                    + ", ".join(n.lower() for n in _OVERRIDABLE)
                )
            self.values[name] = float(val)
        self.saved = {}

    def __enter__(self):
        g = globals()
        for name, val in self.values.items():
            self.saved[name] = g[name]
            g[name] = val
        return self

    def __exit__(self, *exc):
        globals().update(self.saved)
        return False


@dataclass
class RadialProfile:
    """Radial grid function with derivative data on a uniform grid."""

    dim: int
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    domain: str = "entire"
    support_radius: float | None = None

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.du = np.asarray(self.du, dtype=float)
        if not (len(self.r) == len(self.u) == len(self.du)):
            raise ValueError("node arrays must share a length")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("nodes must be strictly increasing in r")

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def sup(self) -> float:
        return float(np.max(np.abs(self.u)))


@dataclass
class SolveReport:
    profile: RadialProfile
    functionals: Functionals
    diagnostics: FiberDiagnostics
    pohozaev_residual: float
    shooting_parameter: float
    converged: bool
    p: float
    q: float
    lam: float
    failure: str | None = None

    def as_dict(self) -> dict:
        f, d = self.functionals, self.diagnostics
        return {
            "p": self.p,
            "q": self.q,
            "lambda": self.lam,
            "dim": self.profile.dim,
            "domain": self.profile.domain,
            "shooting_parameter": self.shooting_parameter,
            "converged": self.converged,
            "failure": self.failure,
            "support_radius": self.profile.support_radius,
            "functionals": {"T": f.dirichlet, "A": f.power_p, "B": f.power_q},
            "diagnostics": {
                "E": d.energy,
                "d1": d.slope,
                "d2": d.curvature,
                "P": d.pohozaev,
            },
            "pohozaev_residual": self.pohozaev_residual,
        }


# ---------------------------------------------------------------------------
# right-hand side and events


def _nonlinearity(lam, p, q):
    def f(u):
        au = abs(u)
        if au == 0.0:
            return 0.0
        s = 1.0 if u > 0 else -1.0
        return s * (lam * au ** (p - 1.0) - au ** (q - 1.0))

    return f


def _potential(lam, p, q):
    def F(u):
        au = abs(u)
        return lam * au ** p / p - au ** q / q

    return F


def _make_rhs(dim, f):
    n1 = dim - 1.0

    def rhs(r, y):
        u, v = y
        return (v, -n1 / r * v - f(u))

    return rhs


def _series_start(alpha, f, dim, r0):
    # u(r) = alpha - f(alpha) r^2 / (2N) + O(r^4) from radial regularity
    c = f(alpha) / (2.0 * dim)
    return np.array([alpha - c * r0 * r0, -2.0 * c * r0])


def _integrate(dim, lam, p, q, y0, r0, r_end, events, rtol=RTOL, atol=None):
    f = _nonlinearity(lam, p, q)
    rhs = _make_rhs(dim, f)
    scale = max(abs(y0[0]), 1e-6)
    if atol is None:
        atol = ATOL_FACTOR * scale
    return integrate_radial(rhs, r0, r_end, y0, events=events, rtol=rtol, atol=atol)


def _events(alpha_scale, u_cap, extinction):
    def cross(r, y):
        return y[0]

    cross.terminal = True
    cross.direction = -1.0

    def turnaround(r, y):
        return y[1]

    turnaround.terminal = True
    turnaround.direction = 1.0

    def escape(r, y):
        return y[0] - u_cap

    escape.terminal = True
    escape.direction = 1.0

    evs = [cross, turnaround, escape]
    if extinction:
        tol = EXTINCTION_REL * alpha_scale

        def extinct(r, y):
            return abs(y[0]) + abs(y[1]) - tol

        extinct.terminal = True
        extinct.direction = -1.0
        evs.append(extinct)
    return evs


CROSS, TURN, ESCAPE, EXTINCT = 0, 1, 2, 3


def _closest_approach(sol, alpha):
    """Support radius from the closest approach to (u, u') = (0, 0).

    Without friction the energy offset of a finite-precision shot only
    shrinks like the square root of the center-value error, so the
    extinction event can stay out of reach; the trajectory still grazes the
    origin of the phase plane and the graze point is the support boundary.
    """
    r_dense = np.linspace(sol.t[0], sol.t[-1], 20001)
    uu, vv = sol.sol(r_dense)
    miss = np.abs(uu) + np.abs(vv)
    i = int(np.argmin(miss))
    lo = r_dense[max(i - 1, 0)]
    hi = r_dense[min(i + 1, len(r_dense) - 1)]
    r_fine = np.linspace(lo, hi, 2001)
    uu, vv = sol.sol(r_fine)
    miss_fine = np.abs(uu) + np.abs(vv)
    j = int(np.argmin(miss_fine))
    if miss_fine[j] <= 1e-6 * alpha:
        return float(r_fine[j])
    return None


def _first_event(sol):
    """(event_index, radius) of the earliest fired event, or (None, t_end)."""
    best_idx, best_t = None, math.inf
    for idx, times in enumerate(sol.t_events):
        if len(times) and times[0] < best_t:
            best_idx, best_t = idx, float(times[0])
    if best_idx is None:
        return None, float(sol.t[-1])
    return best_idx, best_t


# ---------------------------------------------------------------------------
# quadrature and tails


def functionals(profile: RadialProfile, p: float, q: float) -> Functionals:
    """Composite Simpson of the three radial integrands on the node grid."""
    omega = sphere_area(profile.dim)
    w = profile.r ** (profile.dim - 1)
    t = omega * simpson(profile.du ** 2 * w, x=profile.r)
    a = omega * simpson(np.abs(profile.u) ** p * w, x=profile.r)
    b = omega * simpson(np.abs(profile.u) ** q * w, x=profile.r)
    return Functionals(dirichlet=t, power_p=a, power_q=b)


def _tail_estimates(sol, r_use, dim, p, q):
    """Power-law tail estimates (value, slope) of the integrands beyond r_use.

    Each integrand is modelled as g(r) = g(r_use) (r/r_use)^{-slope} with the
    slope read off a dyadic pair, giving the tail g(r_use) * r_use/(slope-1).
    """
    omega = sphere_area(dim)
    r_half = 0.5 * r_use
    out = []
    for kind in ("t", "a", "b"):
        vals = []
        for rr in (r_half, r_use):
            u, du = sol.sol(rr)
            w = omega * rr ** (dim - 1)
            if kind == "t":
                vals.append(du * du * w)
            elif kind == "a":
                vals.append(abs(u) ** p * w)
            else:
                vals.append(abs(u) ** q * w)
        g_half, g_end = vals
        if g_end <= 0.0:
            out.append((0.0, math.inf))
            continue
        if not g_half > g_end:
            out.append((math.inf, 0.0))
            continue
        slope = math.log(g_half / g_end) / math.log(2.0)
        if slope <= 1.05:
            out.append((math.inf, slope))
        else:
            out.append((g_end * r_use / (slope - 1.0), slope))
    return out


def _resample(sol, r_lo, r_hi, dim, pad_to=None):
    """Uniform resample of the dense solution, optionally padded with zeros."""
    r_end = pad_to if pad_to is not None else r_hi
    n = max(MIN_NODES, int(64 * (r_end - r_lo)) + 1)
    if n % 2 == 0:
        n += 1
    r = np.linspace(r_lo, r_end, n)
    u = np.zeros(n)
    du = np.zeros(n)
    inside = r <= r_hi
    vals = sol.sol(r[inside])
    u[inside] = vals[0]
    du[inside] = vals[1]
    return r, u, du


# ---------------------------------------------------------------------------
# report assembly and validation


def _finish_report(profile, p, q, lam, shooting_parameter, bc_residual):
    funcs = functionals(profile, p, q)
    diag = fiber_diagnostics(funcs, lam, p, q, profile.dim)
    report = SolveReport(
        profile=profile,
        functionals=funcs,
        diagnostics=diag,
        pohozaev_residual=0.0,
        shooting_parameter=shooting_parameter,
        converged=False,
        p=p,
        q=q,
        lam=lam,
    )
    report.pohozaev_residual = pohozaev_identity_residual(report)
    scale = funcs.dirichlet + lam * funcs.power_p + funcs.power_q
    problems = []
    if abs(diag.slope) > NEHARI_REL * scale:
        problems.append(f"constraint residual {diag.slope:.3e} exceeds tolerance")
    if abs(report.pohozaev_residual) > POHOZAEV_REL * funcs.dirichlet:
        problems.append(
            f"pohozaev residual {report.pohozaev_residual:.3e} exceeds tolerance"
        )
    if bc_residual is not None and abs(bc_residual) > 1e-7 * max(abs(shooting_parameter), 1.0):
        problems.append(f"boundary residual {bc_residual:.3e}")
    if np.min(profile.u) < -1e-8 * profile.sup():
        problems.append("profile dips negative")
    report.converged = not problems
    report.failure = None if not problems else "; ".join(problems)
    return report


def pohozaev_identity_residual(report: SolveReport) -> float:
    """P plus the star-shaped boundary term; zero for every true solution.

    The boundary term is (1/2N) * |u'(R)|^2 * (x.nu) integrated over the
    sphere of radius R, with x.nu = +R on a ball boundary and -R on an
    exterior inner boundary; absent on all of space.
    """
    prof = report.profile
    P = report.diagnostics.pohozaev
    if prof.domain == "entire":
        return P
    omega = sphere_area(prof.dim)
    n = prof.dim
    if prof.domain == "ball":
        R = prof.r_max
        slope = prof.du[-1]
        return P + omega * R ** n * slope * slope / (2.0 * n)
    R = float(prof.r[0])
    slope = prof.du[0]
    return P - omega * R ** n * slope * slope / (2.0 * n)


# ---------------------------------------------------------------------------
# ball solves


def _ball_shot(p, q, lam, dim, radius, alpha, extinction):
    f = _nonlinearity(lam, p, q)
    r0 = 1e-8 * min(1.0, radius)
    y0 = _series_start(alpha, f, dim, r0)
    evs = _events(alpha, 10.0 * alpha, extinction)
    sol = _integrate(dim, lam, p, q, y0, r0, radius, evs)
    idx, r_ev = _first_event(sol)
    if idx == CROSS:
        return "over", -(radius - r_ev), sol, r_ev
    if idx == EXTINCT:
        return "hit", 0.0, sol, r_ev
    # turnaround / escape / reached the boundary with u > 0
    value = float(sol.y[0][-1]) if idx is None else max(float(sol.y[0][-1]), 1e-30)
    return "under", value, sol, r_ev


def _build_ball_report(sol, p, q, lam, dim, radius, alpha, r_stop, support):
    r, u, du = _resample(sol, 0.0, r_stop, dim, pad_to=radius)
    if support is not None:
        bc_residual = 0.0
    else:
        # mismatch is the leftover boundary value plus any early-crossing gap
        bc_residual = abs(u[-1]) + (radius - r_stop)
        u[-1] = 0.0
        # nodes zeroed past an early crossing still carry the boundary slope
        outside = r > r_stop
        if np.any(outside):
            du[outside] = sol.sol(r_stop)[1]
    profile = RadialProfile(
        dim=dim, r=r, u=u, du=du, domain="ball", support_radius=support
    )
    # the series start omits [0, r0); node 0 is the center value
    profile.u[0] = alpha
    profile.du[0] = 0.0
    return _finish_report(profile, p, q, lam, alpha, bc_residual)


def _ball_candidates(p, q, lam, dim, radius, max_candidates=2):
    """All bracketed first-crossing solutions, in increasing center value."""
    extinction = q < 2.0
    seed = (lam * q / p) ** (1.0 / (q - p))
    alphas = seed * np.geomspace(1e-3, 1e3, 97)
    results = []
    codes = []
    for alpha in alphas:
        code, value, sol, r_ev = _ball_shot(p, q, lam, dim, radius, alpha, extinction)
        if code == "hit":
            results.append(
                _build_ball_report(sol, p, q, lam, dim, radius, alpha, r_ev, r_ev)
            )
            if len(results) >= max_candidates:
                return results
            codes.append(("hit", alpha))
            continue
        codes.append((code, alpha, value))

    reports = list(results)
    for (prev, cur) in zip(codes, codes[1:]):
        if len(reports) >= max_candidates:
            break
        if prev[0] == "hit" or cur[0] == "hit":
            continue
        if prev[0] == cur[0]:
            continue
        lo, hi = prev[1], cur[1]
        lo_is_under = prev[0] == "under"
        hit = None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            code, value, sol, r_ev = _ball_shot(p, q, lam, dim, radius, mid, extinction)
            if code == "hit":
                hit = (sol, mid, r_ev)
                break
            if (code == "under") == lo_is_under:
                lo = mid
            else:
                hi = mid
            if hi - lo <= BISECT_RTOL * hi:
                break
        if hit is not None:
            sol, alpha, r_ev = hit
            reports.append(
                _build_ball_report(sol, p, q, lam, dim, radius, alpha, r_ev, r_ev)
            )
            continue
        alpha = 0.5 * (lo + hi)
        code, value, sol, r_ev = _ball_shot(p, q, lam, dim, radius, alpha, extinction)
        stop = r_ev if code == "over" else radius
        reports.append(
            _build_ball_report(sol, p, q, lam, dim, radius, alpha, stop, None)
        )
    return reports


def shoot_ball(
    p: float,
    q: float,
    lam: float,
    dim: int,
    radius: float,
    allow_inadmissible: bool = False,
) -> SolveReport:
    """Ground-state candidate on the ball: positive, decreasing, u(R) = 0.

    Bisects the center value on the first sign change of the shooting map.
    Raises NoSolutionBracket when the scan sees no sign change, which is the
    expected outcome in the nonexistence regions.
    """
    if lam <= 0:
        raise ValueError("ball solves need lambda > 0")
    _admissibility_gate(p, q, dim, DomainKind.BALL, radius, allow_inadmissible)
    candidates = _ball_candidates(p, q, lam, dim, radius, max_candidates=1)
    if not candidates:
        raise NoSolutionBracket(
            f"no shooting bracket on the ball for p={p}, q={q}, lambda={lam}, dim={dim}"
        )
    return candidates[0]


def _admissibility_gate(p, q, dim, domain, radius, allow):
    cfg = ExponentConfig(p=p, q=q, dim=dim, domain=domain, radius=radius)
    report = classify_region(cfg)
    if not report.existence_possible and not allow:
        raise ValueError(
            f"classifier rules out {domain.value} solutions at p={p}, q={q}, "
            f"dim={dim}; pass allow_inadmissible=True for falsification runs"
        )


# ---------------------------------------------------------------------------
# entire-space solves


def _entire_classify(p, q, lam, dim, alpha, r_cap, extinction):
    F = _potential(lam, p, q)
    if F(alpha) <= 0.0:
        # Energy argument: friction only dissipates, so the trajectory can
        # never reach u = 0; no integration needed.
        return "under", None, None
    f = _nonlinearity(lam, p, q)
    r0 = 1e-8
    y0 = _series_start(alpha, f, dim, r0)
    evs = _events(alpha, 10.0 * alpha, extinction)
    sol = _integrate(dim, lam, p, q, y0, r0, r_cap, evs)
    idx, r_ev = _first_event(sol)
    if idx == CROSS:
        return "over", r_ev, sol
    if idx == EXTINCT:
        return "hit", r_ev, sol
    if idx in (TURN, ESCAPE):
        return "under", r_ev, sol
    return "ran_out", r_ev, sol


def _build_entire_report(sol, p, q, lam, dim, alpha, r_hi, support):
    pad = None if support is None else min(1.25 * support, r_hi + 1.0)
    r, u, du = _resample(sol, 0.0, r_hi, dim, pad_to=pad)
    profile = RadialProfile(
        dim=dim, r=r, u=u, du=du, domain="entire", support_radius=support
    )
    profile.u[0] = alpha
    profile.du[0] = 0.0
    return _finish_report(profile, p, q, lam, alpha, None)


def shoot_entire(
    p: float,
    q: float,
    dim: int,
    lam: float = 1.0,
    allow_inadmissible: bool = False,
) -> SolveReport:
    """Decaying (or compactly supported, for q < 2) state on all of space.

    The center value is bisected between trajectories that cross zero and
    trajectories that turn back up; the zero-energy amplitude (lam*q/p)^{1/(q-p)}
    is an exact lower barrier and seeds the scan.  The truncation radius is
    grown until the estimated power-law tails of all three functionals drop
    below 1e-8 relative.
    """
    _admissibility_gate(p, q, dim, DomainKind.ENTIRE, None, allow_inadmissible)
    extinction = q < 2.0
    u_barrier = (lam * q / p) ** (1.0 / (q - p))
    r_cap_scan = 1e3

    # Candidates sit above the zero-energy amplitude when q < p and below it
    # when p < q; the energy shortcut makes the wrong side free to scan.
    hit = None
    bracket = None
    prev = None
    for factor in np.geomspace(1e-3, 1e3, 121):
        alpha = u_barrier * factor
        code, r_ev, sol = _entire_classify(p, q, lam, dim, alpha, r_cap_scan, extinction)
        if code == "hit":
            hit = (sol, alpha, r_ev)
            break
        label = "under" if code in ("under", "ran_out") else "over"
        if prev is not None and prev[0] != label:
            bracket = (prev[1], alpha, prev[0])
            break
        prev = (label, alpha)
    if hit is None and bracket is None:
        raise NoSolutionBracket(
            f"no decaying bracket on R^N for p={p}, q={q}, dim={dim}, lambda={lam}"
        )

    if hit is None:
        lo, hi, lo_label = bracket
        # extinction windows are tiny; chase them to machine precision
        alpha_tol = 4e-16 if extinction else BISECT_RTOL
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            code, r_ev, sol = _entire_classify(p, q, lam, dim, mid, r_cap_scan, extinction)
            if code == "hit":
                hit = (sol, mid, r_ev)
                break
            label = "under" if code in ("under", "ran_out") else "over"
            if label == lo_label:
                lo = mid
            else:
                hi = mid
            if hi - lo <= alpha_tol * hi:
                break
        alpha = 0.5 * (lo + hi) if hit is None else hit[1]
    else:
        alpha = hit[1]

    if hit is None and extinction:
        code, r_ev, sol = _entire_classify(p, q, lam, dim, alpha, r_cap_scan, extinction)
        if sol is not None:
            r_s = _closest_approach(sol, alpha)
            if r_s is not None:
                hit = (sol, alpha, r_s)

    if hit is not None:
        sol, alpha, r_support = hit
        return _build_entire_report(sol, p, q, lam, dim, alpha, r_support, r_support)

    # decay case: extend until the tails resolve
    r_end = 64.0
    while True:
        code, r_ev, sol = _entire_classify(p, q, lam, dim, alpha, r_end, extinction)
        if code == "hit":
            return _build_entire_report(sol, p, q, lam, dim, alpha, r_ev, r_ev)
        r_use = sol.t[-1] if code == "ran_out" else 0.95 * r_ev
        tails = _tail_estimates(sol, r_use, dim, p, q)
        r_grid = np.linspace(1e-8, r_use, 4097)
        omega = sphere_area(dim)
        vals = sol.sol(r_grid)
        w = omega * r_grid ** (dim - 1)
        totals = (
            simpson(vals[1] ** 2 * w, x=r_grid),
            simpson(np.abs(vals[0]) ** p * w, x=r_grid),
            simpson(np.abs(vals[0]) ** q * w, x=r_grid),
        )
        resolved = all(
            est <= TAIL_REL * (tot + est) for (est, _), tot in zip(tails, totals)
        )
        if resolved:
            return _build_entire_report(sol, p, q, lam, dim, alpha, r_use, None)
        if code != "ran_out":
            raise TailNotResolved(
                f"trajectory left the decaying branch at r={r_ev:.3g} before the "
                f"tails resolved (estimates {tails}, totals {totals})"
            )
        # jump straight to the radius the power laws ask for: the tail scales
        # like R^{1-slope}
        r_need = 2.0 * r_end
        for (est, slope), tot in zip(tails, totals):
            if math.isfinite(est) and est > TAIL_REL * (tot + est) and slope > 1.05:
                shrink = est / (TAIL_REL * max(tot, 1e-300))
                r_need = max(r_need, r_use * shrink ** (1.0 / (slope - 1.0)))
        r_end = max(2.0 * r_end, 1.25 * r_need)
        if r_end > R_CAP:
            raise TailNotResolved(f"truncation cap {R_CAP:g} hit for p={p}, q={q}, dim={dim}")


# ---------------------------------------------------------------------------
# exterior solves


def _exterior_shot(p, q, lam, dim, radius, slope, r_cap, extinction):
    # start a hair outside the boundary with the first-order Taylor values so
    # the crossing event does not see the boundary zero itself
    eps = 1e-9 * radius
    r0 = radius + eps
    y0 = np.array([slope * eps, slope])
    u_scale = max((lam * q / p) ** (1.0 / (q - p)), 1.0)
    evs = _events(u_scale, 50.0 * u_scale, extinction)
    sol = _integrate(dim, lam, p, q, y0, r0, r_cap, evs)
    idx, r_ev = _first_event(sol)
    if idx == CROSS:
        return "over", r_ev, sol
    if idx == EXTINCT:
        return "hit", r_ev, sol
    if idx == TURN:
        # apex crossings have direction -1, so a fired event is a genuine
        # second turn upward: an undershoot
        return "under", r_ev, sol
    if idx == ESCAPE:
        return "blow", r_ev, sol
    return "ran_out", r_ev, sol


def _build_exterior_report(sol, p, q, lam, dim, radius, slope, r_hi, support):
    pad = None if support is None else min(1.25 * support, r_hi + 1.0)
    n = max(MIN_NODES, int(64 * ((pad or r_hi) - radius)) + 1)
    if n % 2 == 0:
        n += 1
    r = np.linspace(radius, pad or r_hi, n)
    u = np.zeros(n)
    du = np.zeros(n)
    inside = r <= r_hi
    vals = sol.sol(r[inside])
    u[inside] = vals[0]
    du[inside] = vals[1]
    u[0] = 0.0
    du[0] = slope
    profile = RadialProfile(
        dim=dim, r=r, u=u, du=du, domain="exterior", support_radius=support
    )
    return _finish_report(profile, p, q, lam, slope, None)


def shoot_exterior(
    p: float,
    q: float,
    lam: float,
    dim: int,
    radius: float,
    allow_inadmissible: bool = False,
) -> SolveReport:
    """Exploratory decaying state outside the ball, shooting on u'(R) > 0.

    Existence with two competing powers is open, so an empty scan is a
    legitimate result and surfaces as NoSolutionBracket.
    """
    if lam <= 0:
        raise ValueError("exterior solves need lambda > 0")
    _admissibility_gate(p, q, dim, DomainKind.EXTERIOR, radius, allow_inadmissible)
    extinction = q < 2.0
    u_scale = (lam * q / p) ** (1.0 / (q - p))
    slopes = (u_scale / radius) * np.geomspace(1e-3, 1e3, 85)
    r_cap_scan = 1e4

    bracket = None
    hit = None
    prev = None
    for s in slopes:
        code, r_ev, sol = _exterior_shot(p, q, lam, dim, radius, s, r_cap_scan, extinction)
        if code == "hit":
            hit = (sol, s, r_ev)
            break
        if code in ("blow", "ran_out"):
            prev = None  # breaks under/over adjacency
            continue
        if prev is not None and prev[0] != code:
            bracket = (prev[1], s)
            break
        prev = (code, s)
    if hit is None and bracket is None:
        raise NoSolutionBracket(
            f"no exterior bracket for p={p}, q={q}, lambda={lam}, dim={dim}"
        )

    if hit is None:
        lo, hi = bracket
        lo_code, _, _ = _exterior_shot(p, q, lam, dim, radius, lo, r_cap_scan, extinction)
        for _ in range(240):
            mid = 0.5 * (lo + hi)
            code, r_ev, sol = _exterior_shot(p, q, lam, dim, radius, mid, r_cap_scan, extinction)
            if code == "hit":
                hit = (sol, mid, r_ev)
                break
            if code == lo_code or code in ("blow", "ran_out"):
                lo = mid
            else:
                hi = mid
            if hi - lo <= BISECT_RTOL * max(hi, 1e-300):
                break
        slope = 0.5 * (lo + hi) if hit is None else hit[1]
    else:
        slope = hit[1]

    if hit is None and extinction:
        code, r_ev, sol = _exterior_shot(p, q, lam, dim, radius, slope, r_cap_scan, extinction)
        if sol is not None:
            scale = max((lam * q / p) ** (1.0 / (q - p)), 1.0)
            r_s = _closest_approach(sol, scale)
            if r_s is not None:
                hit = (sol, slope, r_s)

    if hit is not None:
        sol, slope, r_support = hit
        return _build_exterior_report(sol, p, q, lam, dim, radius, slope, r_support, r_support)

    r_end = max(64.0, 8.0 * radius)
    while True:
        code, r_ev, sol = _exterior_shot(p, q, lam, dim, radius, slope, r_end, extinction)
        if code == "hit":
            return _build_exterior_report(sol, p, q, lam, dim, radius, slope, r_ev, r_ev)
        r_use = sol.t[-1] if code == "ran_out" else 0.95 * r_ev
        tails = _tail_estimates(sol, r_use, dim, p, q)
        r_grid = np.linspace(radius * (1 + 1e-9), r_use, 4097)
        omega = sphere_area(dim)
        vals = sol.sol(r_grid)
        w = omega * r_grid ** (dim - 1)
        totals = (
            simpson(vals[1] ** 2 * w, x=r_grid),
            simpson(np.abs(vals[0]) ** p * w, x=r_grid),
            simpson(np.abs(vals[0]) ** q * w, x=r_grid),
        )
        if all(est <= TAIL_REL * (tot + est) for (est, _), tot in zip(tails, totals)):
            return _build_exterior_report(sol, p, q, lam, dim, radius, slope, r_use, None)
        if code != "ran_out":
            raise TailNotResolved(
                f"exterior trajectory deviated at r={r_ev:.3g} before tails resolved"
            )
        r_end *= 2.0
        if r_end > R_CAP:
            raise TailNotResolved(f"truncation cap {R_CAP:g} hit on the exterior solve")


# ---------------------------------------------------------------------------
# lambda rescaling (entire domain)


def rescale_lambda(report: SolveReport, new_lam: float) -> SolveReport:
    """Map an entire-space solution between lambda values.

    v(x) = tau * u(sigma x) with tau = (lam0/lam1)^{1/(p-q)} and
    sigma^2 = tau^{q-2} turns a lam0-solution into a lam1-solution.
    """
    if report.profile.domain != "entire":
        raise ValueError("lambda rescaling applies to entire-space solutions only")
    if new_lam <= 0:
        raise ValueError("target lambda must be positive")
    p, q, lam0 = report.p, report.q, report.lam
    if p == q:
        raise ValueError("rescaling requires p != q")
    tau = (lam0 / new_lam) ** (1.0 / (p - q))
    sigma = tau ** ((q - 2.0) / 2.0)
    prof = report.profile
    new_profile = RadialProfile(
        dim=prof.dim,
        r=prof.r / sigma,
        u=tau * prof.u,
        du=tau * sigma * prof.du,
        domain="entire",
        support_radius=None if prof.support_radius is None else prof.support_radius / sigma,
    )
    return _finish_report(
        new_profile, p, q, new_lam, tau * report.shooting_parameter, None
    )


def scale_to_unit_lambda(report: SolveReport) -> SolveReport:
    """Normalize an entire-space solution to the lambda = 1 equation."""
    return rescale_lambda(report, 1.0)


# ---------------------------------------------------------------------------
# profile CSV I/O


def write_profile(path, profile: RadialProfile, params: dict | None = None) -> None:
    header = {
        "dim": profile.dim,
        "domain": profile.domain,
        "support_radius": profile.support_radius,
    }
    if params:
        header.update(params)
    buf = io.StringIO()
    buf.write("# " + json.dumps(header) + "\n")
    buf.write("r,u,du\n")
    for r, u, du in zip(profile.r, profile.u, profile.du):
        buf.write(f"{float(r)!r},{float(u)!r},{float(du)!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_profile(path) -> tuple[RadialProfile, dict]:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("profile file must start with a JSON header line")
        meta = json.loads(first[1:].strip())
        header = fh.readline().strip()
        if header != "r,u,du":
            raise ValueError(f"unexpected column header {header!r}")
        data = np.loadtxt(fh, delimiter=",").reshape(-1, 3)
    profile = RadialProfile(
        dim=int(meta["dim"]),
        r=data[:, 0],
        u=data[:, 1],
        du=data[:, 2],
        domain=meta.get("domain", "entire"),
        support_radius=meta.get("support_radius"),
    )
    return profile, meta
