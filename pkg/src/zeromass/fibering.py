"""Scalar analysis along rays r -> E(ru).

Given the three integral functionals of a fixed shape u (Dirichlet energy
and the two power masses), everything about the ray through u is elementary
one-variable calculus: the fiber energy and its derivatives, the stationary
points with their min/max/fold structure, the closed-form location of the
Rayleigh-quotient minimizer, the nonlinear generalized Rayleigh quotients
whose infima are the solvability thresholds, and the inversion of the 3x3
linear system linking (T, lambda*A, B) to (E', E'', P).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import BranchAbsent, SingularSystem
from .exponents import sobolev_reciprocal


@dataclass(frozen=True)
class Functionals:
    """The scalar triple of a nonzero shape.

    dirichlet = integral of |grad u|^2, power_p = integral of |u|^p,
    power_q = integral of |u|^q.  All three are strictly positive for any
    nonzero admissible function.
    """

    dirichlet: float
    power_p: float
    power_q: float

    def require_positive(self):
        if not (self.dirichlet > 0 and self.power_p > 0 and self.power_q > 0):
            raise ValueError(f"functionals must be strictly positive, got {self}")

    def scaled(self, r: float, p: float, q: float) -> "Functionals":
        """Functionals of the rescaled shape r*u."""
        return Functionals(
            dirichlet=r ** 2 * self.dirichlet,
            power_p=r ** p * self.power_p,
            power_q=r ** q * self.power_q,
        )


@dataclass(frozen=True)
class FiberDiagnostics:
    """Energy, ray derivatives at r=1, and the Pohozaev value of a shape."""

    energy: float
    slope: float       # d/dr E(ru) at r=1:  T - lambda*A + B
    curvature: float   # d^2/dr^2 E(ru) at r=1:  T - (p-1)*lambda*A + (q-1)*B
    pohozaev: float    # (1/2*) T - lambda*A/p + B/q


class PointKind(str, Enum):
    MIN = "Min"
    MAX = "Max"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class StationaryPoint:
    r: float
    kind: PointKind


# Relative tolerance of scalar root polishing, and the detection band for
# the fold threshold.
ROOT_RTOL = 1e-12
FOLD_RTOL = 1e-9


def fiber_energy(r: float, f: Functionals, lam: float, p: float, q: float) -> float:
    """E(ru) = r^2 T/2 - lambda r^p A/p + r^q B/q."""
    return (
        0.5 * r ** 2 * f.dirichlet
        - lam * r ** p / p * f.power_p
        + r ** q / q * f.power_q
    )


def fiber_derivatives(
    r: float, f: Functionals, lam: float, p: float, q: float
) -> tuple[float, float]:
    """First and second r-derivatives of the fiber energy at radius r."""
    t, a, b = f.dirichlet, f.power_p, f.power_q
    d1 = r * t - lam * r ** (p - 1) * a + r ** (q - 1) * b
    d2 = t - lam * (p - 1) * r ** (p - 2) * a + (q - 1) * r ** (q - 2) * b
    return d1, d2


def diagnostics(f: Functionals, lam: float, p: float, q: float, dim: int) -> FiberDiagnostics:
    """All four linear forms of (T, lambda*A, B) at r=1."""
    t, a, b = f.dirichlet, f.power_p, f.power_q
    s = sobolev_reciprocal(dim)
    return FiberDiagnostics(
        energy=0.5 * t - lam * a / p + b / q,
        slope=t - lam * a + b,
        curvature=t - lam * (p - 1) * a + (q - 1) * b,
        pohozaev=s * t - lam * a / p + b / q,
    )


def _rayleigh_along_ray(r: float, f: Functionals, p: float, q: float) -> float:
    # R(ru) = (r^{2-p} T + r^{q-p} B) / A; stationary radii of the fiber
    # energy at multiplier lam solve R(ru) = lam.
    return (r ** (2.0 - p) * f.dirichlet + r ** (q - p) * f.power_q) / f.power_p


def r_min_formula(f: Functionals, p: float, q: float) -> float:
    """Unique critical radius of r -> R(ru), in closed form.

    Exists only on the two fold strips 1<q<p<2 and 2<p<q, where the ray
    Rayleigh quotient is U-shaped.
    """
    if not ((1.0 < q < p < 2.0) or (2.0 < p < q)):
        raise ValueError(f"r_min defined only for 1<q<p<2 or 2<p<q, got p={p}, q={q}")
    f.require_positive()
    return ((p - 2.0) * f.dirichlet / ((q - p) * f.power_q)) ** (1.0 / (q - 2.0))


def rayleigh_constant(p: float, q: float) -> float:
    """Constant in the closed form lam(u) = C(p,q) T^{(q-p)/(q-2)} B^{(p-2)/(q-2)} / A.

    Obtained by substituting the critical radius into R(ru); pinned against
    the direct evaluation by a property test.
    """
    e = (p - 2.0) / (q - 2.0)
    return (q - 2.0) / (q - p) * ((q - p) / (p - 2.0)) ** e


def energy_rayleigh_ratio(p: float, q: float) -> float:
    """c'(p,q) = (p/2) (2/q)^{(p-2)/(q-2)}, the ratio lam_E(u)/lam(u)."""
    return 0.5 * p * (2.0 / q) ** ((p - 2.0) / (q - 2.0))


def rayleigh_lambda(f: Functionals, p: float, q: float) -> float:
    """Fold threshold lam(u): the minimum over r of R(ru).

    At lam = rayleigh_lambda(f) the fiber energy has exactly one (degenerate)
    stationary point; below, none; above, a max/min pair.
    """
    r = r_min_formula(f, p, q)
    return _rayleigh_along_ray(r, f, p, q)


def rayleigh_lambda_E(f: Functionals, p: float, q: float) -> float:
    """Zero-energy threshold lam_E(u) = c'(p,q) * lam(u).

    Equivalently the unique lambda at which the minimum over r of the fiber
    energy equals zero.
    """
    return energy_rayleigh_ratio(p, q) * rayleigh_lambda(f, p, q)


def _bisect_log(fun, t_lo, t_hi, rtol=ROOT_RTOL, max_iter=200):
    """Bisection for a sign change of fun on [t_lo, t_hi] in log-radius."""
    f_lo, f_hi = fun(t_lo), fun(t_hi)
    if f_lo == 0.0:
        return t_lo
    if f_hi == 0.0:
        return t_hi
    if f_lo * f_hi > 0:
        raise ValueError("no sign change in bracket")
    for _ in range(max_iter):
        mid = 0.5 * (t_lo + t_hi)
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            t_hi = mid
        else:
            t_lo, f_lo = mid, f_mid
        if abs(t_hi - t_lo) <= rtol:
            break
    return 0.5 * (t_lo + t_hi)


def _newton_polish(f: Functionals, lam, p, q, r, iters=4):
    for _ in range(iters):
        d1, d2 = fiber_derivatives(r, f, lam, p, q)
        if d2 == 0.0:
            break
        step = d1 / d2
        r_new = r - step
        if not (r_new > 0 and math.isfinite(r_new)):
            break
        r = r_new
        if abs(step) <= ROOT_RTOL * r:
            break
    return r


def _classify(f: Functionals, lam, p, q, r) -> StationaryPoint:
    _, d2 = fiber_derivatives(r, f, lam, p, q)
    t, a, b = f.dirichlet, f.power_p, f.power_q
    scale = t + lam * r ** (p - 2) * a + r ** (q - 2) * b
    if d2 > 1e-9 * scale:
        kind = PointKind.MIN
    elif d2 < -1e-9 * scale:
        kind = PointKind.MAX
    else:
        kind = PointKind.DEGENERATE
    return StationaryPoint(r=r, kind=kind)


def stationary_points(
    f: Functionals, lam: float, p: float, q: float
) -> list[StationaryPoint]:
    """All radii r>0 with dE(ru)/dr = 0, classified by curvature.

    The structure follows the sign pattern of the exponents (2-p, q-p) of
    the ray Rayleigh quotient: same signs give a monotone quotient and at
    most one stationary point; opposite signs give the U-shaped fold with
    0, 1 (degenerate) or 2 points as lambda crosses the fold threshold.
    Roots are bracketed in log-radius, bisected, then Newton-polished.
    """
    if p == q:
        raise ValueError("stationary points require p != q")
    if p <= 0 or q <= 0:
        raise ValueError("exponents must be positive")
    f.require_positive()
    if lam < 0:
        raise ValueError("lambda must be >= 0")

    t, a, b = f.dirichlet, f.power_p, f.power_q
    e1, e2 = 2.0 - p, q - p

    def ray_quot(tt):
        # Saturate instead of raising when a power overflows far from the root.
        try:
            return _rayleigh_along_ray(math.exp(tt), f, p, q)
        except OverflowError:
            return math.inf

    if e1 * e2 > 0 or e1 == 0.0 or e2 == 0.0:
        # Monotone quotient.  Limits at 0+ and +inf decide solvability.
        if lam == 0.0:
            return []
        lim0 = (0.0 if e1 > 0 else math.inf if e1 < 0 else t / a) + (
            0.0 if e2 > 0 else math.inf if e2 < 0 else b / a
        )
        lim_inf = (math.inf if e1 > 0 else 0.0 if e1 < 0 else t / a) + (
            math.inf if e2 > 0 else 0.0 if e2 < 0 else b / a
        )
        lo, hi = (lim0, lim_inf) if lim0 < lim_inf else (lim_inf, lim0)
        if not (lo < lam < hi):
            return []
        t_lo, t_hi = -1.0, 1.0
        for _ in range(200):
            if (ray_quot(t_lo) - lam) * (ray_quot(t_hi) - lam) <= 0:
                break
            t_lo -= 1.0
            t_hi += 1.0
        t_root = _bisect_log(lambda tt: ray_quot(tt) - lam, t_lo, t_hi)
        r = _newton_polish(f, lam, p, q, math.exp(t_root))
        return [_classify(f, lam, p, q, r)]

    # Fold regime: U-shaped quotient with closed-form minimizer.
    r_c = ((p - 2.0) * t / ((q - p) * b)) ** (1.0 / (q - 2.0))
    lam_fold = _rayleigh_along_ray(r_c, f, p, q)
    if lam < lam_fold * (1.0 - FOLD_RTOL):
        return []
    if abs(lam - lam_fold) <= FOLD_RTOL * lam_fold:
        return [StationaryPoint(r=r_c, kind=PointKind.DEGENERATE)]

    t_c = math.log(r_c)
    span = 1.0
    t_left = t_c - span
    while ray_quot(t_left) < lam:
        span *= 2.0
        t_left = t_c - span
    span = 1.0
    t_right = t_c + span
    while ray_quot(t_right) < lam:
        span *= 2.0
        t_right = t_c + span

    t_lo = _bisect_log(lambda tt: ray_quot(tt) - lam, t_left, t_c)
    t_hi = _bisect_log(lambda tt: ray_quot(tt) - lam, t_c, t_right)
    r_lo = _newton_polish(f, lam, p, q, math.exp(t_lo))
    r_hi = _newton_polish(f, lam, p, q, math.exp(t_hi))
    return [_classify(f, lam, p, q, r_lo), _classify(f, lam, p, q, r_hi)]


def project_to_branch(
    f: Functionals, lam: float, p: float, q: float, kind: PointKind
) -> float:
    """Scaling r with r*u on the requested stationary branch.

    Raises BranchAbsent when no stationary point of the requested kind
    exists at this lambda (in particular below the fold threshold).
    """
    points = stationary_points(f, lam, p, q)
    for pt in points:
        if pt.kind is kind:
            return pt.r
    raise BranchAbsent(
        f"no {kind.value} stationary point at lambda={lam} "
        f"(found {[pt.kind.value for pt in points]})"
    )


def system_determinant(p: float, q: float, dim: int) -> float:
    """Determinant (q-p) d*(p,q) / (2 N p q) of the 3x3 functional system."""
    from .exponents import d_star

    return (q - p) * d_star(p, q, dim) / (2.0 * dim * p * q)


def resolve_functionals(
    d1: float,
    d2: float,
    pohozaev: float,
    lam: float,
    p: float,
    q: float,
    dim: int,
) -> tuple[float, float, float]:
    """Invert the 3x3 system: (E'', P) with E'=0 back to (T, lambda*A, B).

    The closed-form inverse uses the reciprocal Sobolev conventions, so it
    is valid in every dimension.  Rejects d1 != 0 (the formulas assume the
    shape sits on the constraint set) and a singular system.
    """
    if d1 != 0.0:
        raise ValueError("resolve_functionals requires E' = 0 (d1 == 0)")
    det = system_determinant(p, q, dim)
    if det == 0.0 or not math.isfinite(det):
        raise SingularSystem(f"singular functional system at p={p}, q={q}, dim={dim}")
    s = sobolev_reciprocal(dim)
    t = ((q - p) / (p * q) * d2 + (q - p) * pohozaev) / det
    lam_a = ((s - 1.0 / q) * d2 + (q - 2.0) * pohozaev) / det
    b = ((s - 1.0 / p) * d2 + (p - 2.0) * pohozaev) / det
    return t, lam_a, b
