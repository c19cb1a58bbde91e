"""Uniform radial grids and the finite-volume operators built on them.

A single assembly serves three consumers: the discrete Dirichlet energy and
power masses for the constrained minimization, the symmetric tridiagonal
eigenproblem of the linearized operator, and the implicit diffusion step of
the parabolic flow.  Using one discretization everywhere makes the discrete
Courant-Fischer bound and the observed parabolic growth rates agree exactly,
not just up to truncation error.

Unknowns live on nodes r_i = i*h, i = 0..n-1; the node at r_max carries a
homogeneous Dirichlet value.  Fluxes use face areas omega * r^{N-1} at the
midpoints, cell masses are exact integrals of omega * r^{N-1} over the cell,
so the quadratic forms converge at second order and the zero-radius cell is
regular in every dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solveh_banded


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N=1)."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


@dataclass
class RadialMesh:
    dim: int
    r_max: float
    n: int  # number of unknown nodes; grid spacing h = r_max / n

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("mesh too coarse")
        self.h = self.r_max / self.n
        self.r = self.h * np.arange(self.n)          # unknown nodes, r_0 = 0
        self.r_full = self.h * np.arange(self.n + 1)  # including boundary node
        omega = sphere_area(self.dim)
        faces = self.h * (np.arange(self.n) + 0.5)    # face between i and i+1
        self.face_area = omega * faces ** (self.dim - 1)
        lo = np.maximum(self.r - 0.5 * self.h, 0.0)
        hi = np.minimum(self.r + 0.5 * self.h, self.r_max)
        self.mass = omega * (hi ** self.dim - lo ** self.dim) / self.dim
        # stiffness tridiagonal: K_ii = (a_{i-1/2} + a_{i+1/2})/h, natural
        # (zero-flux) closure at the origin, Dirichlet closure at r_max
        a = self.face_area
        self.k_diag = np.empty(self.n)
        self.k_diag[0] = a[0] / self.h
        self.k_diag[1:] = (a[:-1] + a[1:]) / self.h
        self.k_off = -a[:-1] / self.h  # length n-1

    # -- quadratic forms -------------------------------------------------

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        out = self.k_diag * u
        out[:-1] += self.k_off * u[1:]
        out[1:] += self.k_off * u[:-1]
        return out

    def dirichlet_energy(self, u: np.ndarray) -> float:
        """Integral of |grad u|^2 with u = 0 at r_max."""
        du = np.diff(u, append=0.0) / self.h
        return float(np.sum(self.face_area * du * du) * self.h)

    def power_mass(self, u: np.ndarray, power: float) -> float:
        return float(np.sum(self.mass * np.abs(u) ** power))

    def l2_sq(self, u: np.ndarray) -> float:
        return float(np.sum(self.mass * u * u))

    def functionals(self, u: np.ndarray, p: float, q: float):
        from .fibering import Functionals

        return Functionals(
            dirichlet=self.dirichlet_energy(u),
            power_p=self.power_mass(u, p),
            power_q=self.power_mass(u, q),
        )

    # -- linear algebra --------------------------------------------------

    def solve_shifted(self, diag_shift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (diag(mass * diag_shift) + K) u = rhs, SPD banded."""
        ab = np.zeros((2, self.n))
        ab[0, 1:] = self.k_off
        ab[1] = self.k_diag + self.mass * diag_shift
        return solveh_banded(ab, rhs, lower=False)

    def min_eigenpair(self, potential: np.ndarray) -> tuple[float, np.ndarray]:
        """Smallest eigenpair of  -Laplace_r - potential  w.r.t. the mass measure.

        The generalized problem (K - diag(mass*W)) psi = mu * diag(mass) psi is
        symmetrized by the diagonal similarity D^{-1/2} (.) D^{-1/2}, giving a
        symmetric tridiagonal matrix handled by Sturm-sequence bisection plus
        inverse iteration (LAPACK stebz/stein).
        """
        sqrt_m = np.sqrt(self.mass)
        d = (self.k_diag - self.mass * potential) / self.mass
        e = self.k_off / (sqrt_m[:-1] * sqrt_m[1:])
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
        phi = vecs[:, 0]
        psi = phi / sqrt_m
        norm = math.sqrt(self.l2_sq(psi))
        psi = psi / norm
        if psi[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        return float(vals[0]), psi

    def eigenvalues(self, potential: np.ndarray, count: int) -> np.ndarray:
        sqrt_m = np.sqrt(self.mass)
        d = (self.k_diag - self.mass * potential) / self.mass
        e = self.k_off / (sqrt_m[:-1] * sqrt_m[1:])
        vals = eigh_tridiagonal(
            d, e, select="i", select_range=(0, count - 1), eigvals_only=True
        )
        return vals

    # -- interpolation helpers -------------------------------------------

    def sample(self, r_nodes: np.ndarray, u_nodes: np.ndarray) -> np.ndarray:
        """Resample a profile onto the unknown nodes (linear, zero beyond)."""
        return np.interp(self.r, r_nodes, u_nodes, left=u_nodes[0], right=0.0)

    def with_boundary(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Node vector extended by the Dirichlet boundary value."""
        return self.r_full, np.append(u, 0.0)

    def gradient_nodes(self, u: np.ndarray) -> np.ndarray:
        """Second-order derivative values at the full node set.

        Radial regularity pins u'(0) = 0 in every dimension.
        """
        _, uu = self.with_boundary(u)
        du = np.gradient(uu, self.h, edge_order=2)
        du[0] = 0.0
        return du
