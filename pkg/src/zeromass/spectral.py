"""Linearized spectral analysis around a stationary state.

The linearization of the reaction term at a state u is the multiplier
W(r) = lam (p-1)|u|^{p-2} - (q-1)|u|^{q-2}, so perturbations see the
operator -Laplace - W.  Its minimal eigenvalue decides linear stability;
plugging the state itself into the Rayleigh quotient reproduces the second
fiber derivative divided by the squared L2 norm, which gives a sharp upper
bound on the eigenvalue for free.

Requires p, q >= 2: below 2 the multiplier blows up where the state
vanishes (compact-support states), and this module refuses rather than
regularizes; stability there is assessed dynamically by the parabolic flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularPotential
from .mesh import RadialMesh
from .shooting import RadialProfile, SolveReport

EIGEN_ZERO_REL = 1e-8
TRUNCATION_ABS = 1e-6


@dataclass
class SpectralReport:
    mu1: float
    eigenfunction: RadialProfile
    derrick_quotient: float
    linearly_unstable: bool
    truncation_shift: float | None = None

    def as_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "derrick_quotient": self.derrick_quotient,
            "linearly_unstable": self.linearly_unstable,
            "truncation_shift": self.truncation_shift,
        }


def linearized_potential(
    profile: RadialProfile, lam: float, p: float, q: float
) -> np.ndarray:
    """Multiplier W(r) on the profile nodes; -Laplace - W is the linearization.

    For p < 2 or q < 2 the corresponding term is singular wherever the state
    vanishes away from the outer boundary, and the potential is refused.
    """
    u = np.abs(profile.u)
    if p < 2.0 or q < 2.0:
        interior_zero = np.any(u[:-1] <= 1e-14 * max(profile.sup(), 1.0))
        if interior_zero:
            raise SingularPotential(
                f"state vanishes inside the domain and p={p}, q={q} has a "
                f"sublinear term: the linearized multiplier is unbounded"
            )
    with np.errstate(divide="ignore"):
        term_p = u ** (p - 2.0) if p != 2.0 else np.ones_like(u)
        term_q = u ** (q - 2.0) if q != 2.0 else np.ones_like(u)
    return lam * (p - 1.0) * term_p - (q - 1.0) * term_q


def _mesh_from_profile(profile: RadialProfile) -> RadialMesh:
    h = profile.r[1] - profile.r[0]
    if not np.allclose(np.diff(profile.r), h, rtol=1e-8, atol=1e-12):
        raise ValueError("spectral analysis expects a uniform radial grid")
    if profile.r[0] != 0.0:
        raise ValueError("grid must start at the center")
    return RadialMesh(dim=profile.dim, r_max=profile.r_max, n=len(profile.r) - 1)


def min_eigenvalue(
    profile: RadialProfile, lam: float, p: float, q: float
) -> SpectralReport:
    """Minimal eigenvalue and ground eigenfunction of -Laplace - W.

    Symmetric tridiagonal discretization on the profile grid, minimal
    eigenvalue by Sturm-sequence bisection, eigenvector by inverse
    iteration.  For entire-space profiles the eigenvalue is cross-checked
    against a doubled truncation radius with a power-law extension of the
    state.
    """
    if p < 2.0 or q < 2.0:
        raise SingularPotential(
            f"spectral analysis needs p, q >= 2 (got p={p}, q={q}); use the "
            f"parabolic experiments for sublinear exponents"
        )
    mesh = _mesh_from_profile(profile)
    u = profile.u[:-1]
    w = _potential_values(u, lam, p, q)
    mu1, psi = mesh.min_eigenpair(w)

    l2 = mesh.l2_sq(u)
    quad = float(u @ mesh.apply_stiffness(u)) - float(np.sum(mesh.mass * w * u * u))
    derrick = quad / l2 if l2 > 0 else math.inf

    shift = None
    if profile.domain == "entire":
        shift = _doubled_radius_shift(profile, mesh, u, lam, p, q, mu1)

    r_full, psi_full = mesh.with_boundary(psi)
    eigen_profile = RadialProfile(
        dim=profile.dim,
        r=r_full,
        u=psi_full,
        du=mesh.gradient_nodes(psi),
        domain=profile.domain,
        support_radius=None,
    )
    w_scale = max(1.0, float(np.max(np.abs(w))))
    return SpectralReport(
        mu1=mu1,
        eigenfunction=eigen_profile,
        derrick_quotient=derrick,
        linearly_unstable=mu1 < -EIGEN_ZERO_REL * w_scale,
        truncation_shift=shift,
    )


def _potential_values(u, lam, p, q):
    au = np.abs(u)
    term_p = au ** (p - 2.0) if p != 2.0 else np.ones_like(au)
    term_q = au ** (q - 2.0) if q != 2.0 else np.ones_like(au)
    return lam * (p - 1.0) * term_p - (q - 1.0) * term_q


def _doubled_radius_shift(profile, mesh, u, lam, p, q, mu1):
    """Recompute the eigenvalue on twice the radius, extending the state by
    its fitted far-field power law, and report the change."""
    r = profile.r
    n = len(r) - 1
    k = max(4, n // 8)
    u_a, u_b = abs(profile.u[n - k]), abs(profile.u[n - 1])
    if u_a <= 0 or u_b <= 0 or u_b >= u_a:
        gamma = profile.dim  # fallback decay guess
    else:
        gamma = math.log(u_a / u_b) / math.log(r[n - 1] / r[n - k])
    mesh2 = RadialMesh(dim=profile.dim, r_max=2.0 * profile.r_max, n=2 * n)
    u2 = np.interp(mesh2.r, r, profile.u, right=0.0)
    outside = mesh2.r > r[-2]
    u2[outside] = abs(profile.u[n - 1]) * (mesh2.r[outside] / r[n - 1]) ** (-gamma)
    w2 = _potential_values(u2, lam, p, q)
    mu1_ext, _ = mesh2.min_eigenpair(w2)
    return float(mu1_ext - mu1)


def instability_verdict(report: SolveReport) -> bool:
    """Numerical linear-instability verdict, cross-checked with the
    structural sufficient conditions for instability.

    Sufficient conditions (nonnegative bounded states, p,q >= 2): entire
    space with d* < 0; balls with max{2,q} < p < 2*; exteriors with
    2 < p < q or with d* < 0 and q < p.  Whenever one of them holds on a
    validated solve, a nonnegative eigenvalue would contradict the theory
    and raises instead of returning.
    """
    spectral = min_eigenvalue(report.profile, report.lam, report.p, report.q)
    verdict = spectral.linearly_unstable
    if report.converged and _sufficient_condition(report):
        if not verdict:
            raise RuntimeError(
                f"the sufficient instability conditions demand mu1 < 0 but the eigensolver "
                f"returned {spectral.mu1:.6e}"
            )
    return verdict


def _sufficient_condition(report: SolveReport) -> bool:
    from .exponents import d_star, sobolev_critical

    p, q, dim = report.p, report.q, report.profile.dim
    ds = d_star(p, q, dim)
    domain = report.profile.domain
    if domain == "entire":
        return ds < 0.0
    if domain == "ball":
        return max(2.0, q) < p < sobolev_critical(dim)
    return (2.0 < p < q) or (ds < 0.0 and q < p)
