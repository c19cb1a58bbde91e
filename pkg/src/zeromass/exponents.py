"""Arithmetic of the critical-exponent curve and the (p,q)-plane taxonomy.

Everything here is exact scalar logic: the discriminant d*(p,q) whose zero
set is the critical curve, the Sobolev limit exponent with its reciprocal
conventions for low dimensions, the fibering-map case of a point (p,q), and
the per-domain classifier that encodes the necessary existence conditions
together with the predicted sign of the second fiber derivative at a
solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class DomainKind(str, Enum):
    ENTIRE = "entire"
    BALL = "ball"
    EXTERIOR = "exterior"


class SignPrediction(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    ZERO = "Zero"
    INDETERMINATE = "Indeterminate"


class FiberingCase(str, Enum):
    F1_UNIQUE_MIN = "F1_unique_min"
    F1_UNIQUE_MAX = "F1_unique_max"
    F2_FOLD = "F2_fold"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ExponentConfig:
    """Problem parameters: exponents, dimension, lambda, and the domain.

    The absorption coefficient is normalized to one, so ``lam`` is the only
    free multiplier. ``radius`` is required for ball and exterior domains.
    """

    p: float
    q: float
    dim: int
    lam: float = 1.0
    domain: DomainKind = DomainKind.ENTIRE
    radius: float | None = None

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("exponents must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.domain in (DomainKind.BALL, DomainKind.EXTERIOR):
            if self.radius is None or self.radius <= 0:
                raise ValueError(f"{self.domain.value} domain needs radius > 0")


@dataclass
class RegionReport:
    """Classifier verdict for one (p, q, dim, domain) configuration."""

    d_star: float
    sobolev_2star: float
    existence_possible: bool
    curvature_sign: SignPrediction
    fibering_case: FiberingCase
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "d_star": self.d_star,
            "sobolev_2star": self.sobolev_2star,
            "existence_possible": self.existence_possible,
            "predicted_second_derivative_sign": self.curvature_sign.value,
            "fibering_case": self.fibering_case.value,
            "notes": list(self.notes),
        }


def d_star(p: float, q: float, dim: float) -> float:
    """Discriminant N(p-2)(q-2) - 2pq separating the qualitative regimes."""
    return dim * (p - 2.0) * (q - 2.0) - 2.0 * p * q


def sobolev_critical(dim: int) -> float:
    """Limit exponent 2N/(N-2); +inf in dimensions 1 and 2."""
    if dim >= 3:
        return 2.0 * dim / (dim - 2.0)
    return math.inf


def sobolev_reciprocal(dim: int) -> float:
    """Reciprocal of the limit exponent with the low-dimension conventions.

    (N-2)/(2N) for N >= 3, by convention 0 for N = 2 and -1/2 for N = 1.
    These values make the 3x3 functional system and the Pohozaev function
    dimension-uniform.
    """
    if dim >= 3:
        return (dim - 2.0) / (2.0 * dim)
    if dim == 2:
        return 0.0
    return -0.5


def fibering_case(p: float, q: float) -> FiberingCase:
    """Stationary-point structure of r -> E(ru) as a function of (p,q) only."""
    if p == q:
        raise ValueError("fibering case undefined for p == q")
    if p == 2.0 or q == 2.0:
        return FiberingCase.BOUNDARY
    if 0.0 < p < min(2.0, q):
        return FiberingCase.F1_UNIQUE_MIN
    if p > max(2.0, q):
        return FiberingCase.F1_UNIQUE_MAX
    if (1.0 < q < p < 2.0) or (2.0 < p < q):
        return FiberingCase.F2_FOLD
    return FiberingCase.BOUNDARY


def _on_boundary_lines(p: float, q: float, two_star: float) -> list[str]:
    notes = []
    if p == 2.0 or q == 2.0:
        notes.append("boundary:exponent-two")
    if math.isfinite(two_star) and (p == two_star or q == two_star):
        notes.append("boundary:sobolev-critical")
    return notes


def classify_region(cfg: ExponentConfig) -> RegionReport:
    """Necessary existence conditions and predicted curvature sign.

    Encodes the per-domain necessary conditions with strict inequalities;
    configurations sitting exactly on a dividing line fall into the
    Indeterminate bucket with a note.  Requires p != q.
    """
    p, q, dim = cfg.p, cfg.q, cfg.dim
    if p == q:
        raise ValueError("classification requires p != q")

    ds = d_star(p, q, dim)
    two_star = sobolev_critical(dim)
    notes = _on_boundary_lines(p, q, two_star)
    if ds == 0.0:
        notes.append("boundary:critical-curve")
    case = fibering_case(p, q)

    exists: bool
    sign = SignPrediction.INDETERMINATE

    if cfg.domain is DomainKind.ENTIRE:
        if dim >= 3:
            exists = (two_star < p < q) or (0.0 < q < p < two_star)
        else:
            exists = q < p
        if exists:
            notes.append("entire:energy-positive")
            if ds > 0.0:
                sign = SignPrediction.POSITIVE
            elif ds < 0.0:
                sign = SignPrediction.NEGATIVE
            else:
                sign = SignPrediction.ZERO
    elif cfg.domain is DomainKind.BALL:
        if dim >= 3:
            exists = (0.0 < p < q) or (0.0 < q < p < two_star)
        else:
            # The low-dimension inequalities are mutually consistent for all
            # p,q; no sharper necessary condition is claimed.
            exists = True
            notes.append("ball:low-dim-unrestricted")
        if exists:
            if ds > 0.0 or 0.0 < p < min(2.0, q):
                sign = SignPrediction.POSITIVE
            elif max(2.0, q) < p < two_star:
                sign = SignPrediction.NEGATIVE
    else:  # exterior
        if dim >= 3:
            exists = (0.0 < q < p) or (two_star < p < q)
            if exists and ((ds < 0.0 and two_star < p < q) or (ds < 0.0 and q < p)):
                sign = SignPrediction.NEGATIVE
        else:
            exists = (0.0 < q < p) or (2.0 < p < q)
            if exists and ((2.0 < p < q) or (ds < 0.0 and q < p)):
                sign = SignPrediction.NEGATIVE

    if not exists:
        sign = SignPrediction.INDETERMINATE

    return RegionReport(
        d_star=ds,
        sobolev_2star=two_star,
        existence_possible=exists,
        curvature_sign=sign,
        fibering_case=case,
        notes=notes,
    )


@dataclass
class AtlasCell:
    """One grid point of the atlas plus its classifier verdict."""

    p: float
    q: float
    report: RegionReport


@dataclass
class Atlas:
    """Dense classifier sweep over a (p,q) window for one domain."""

    dim: int
    domain: DomainKind
    p_values: list[float]
    q_values: list[float]
    cells: list[AtlasCell]
    curve_cells: list[tuple[int, int]]

    def csv_rows(self):
        """Rows `p,q,dim,domain,d_star,existence,sign,fibering_case`."""
        for cell in self.cells:
            r = cell.report
            yield (
                cell.p,
                cell.q,
                self.dim,
                self.domain.value,
                r.d_star,
                r.existence_possible,
                r.curvature_sign.value,
                r.fibering_case.value,
            )


def atlas(
    p_range: tuple[float, float],
    q_range: tuple[float, float],
    steps: int,
    dim: int,
    domain: DomainKind = DomainKind.ENTIRE,
    radius: float = 1.0,
    workers: int = 1,
) -> Atlas:
    """Classify a steps x steps grid and trace the d*=0 set by sign changes.

    Grid points landing exactly on p=q are nudged off the diagonal by half
    a grid step so every cell carries a verdict.  Rows are independent and
    can fan out over worker threads; the cell order is preserved.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if p_range[0] <= 0 or q_range[0] <= 0:
        raise ValueError("ranges must be positive")

    def linspace(lo, hi, n):
        if n == 1:
            return [lo]
        h = (hi - lo) / (n - 1)
        return [lo + i * h for i in range(n)]

    p_values = linspace(p_range[0], p_range[1], steps)
    q_values = linspace(q_range[0], q_range[1], steps)
    eps_p = 0.5 * (p_range[1] - p_range[0]) / max(steps - 1, 1)
    needs_radius = domain in (DomainKind.BALL, DomainKind.EXTERIOR)

    def classify_row(q):
        row = []
        for p in p_values:
            p_eff = p if p != q else p + max(eps_p, 1e-9)
            cfg = ExponentConfig(
                p=p_eff, q=q, dim=dim, domain=domain,
                radius=radius if needs_radius else None,
            )
            report = classify_region(cfg)
            if p_eff != p:
                report.notes.append("diagonal:nudged")
            row.append(AtlasCell(p=p_eff, q=q, report=report))
        return row

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(classify_row, q_values))
    else:
        rows = [classify_row(q) for q in q_values]

    cells = [cell for row in rows for cell in row]
    sign_grid = {}
    for j, q in enumerate(q_values):
        for i, p in enumerate(p_values):
            # Trace the curve from the true grid point; d* is defined on p=q
            # even though the classifier is not.
            ds_true = d_star(p, q, dim)
            sign_grid[(i, j)] = math.copysign(1.0, ds_true) if ds_true != 0 else 0.0

    curve_cells = []
    for j in range(len(q_values) - 1):
        for i in range(len(p_values) - 1):
            corners = [sign_grid[(i, j)], sign_grid[(i + 1, j)],
                       sign_grid[(i, j + 1)], sign_grid[(i + 1, j + 1)]]
            if min(corners) <= 0.0 <= max(corners) and any(c != 0 for c in corners):
                curve_cells.append((i, j))

    return Atlas(
        dim=dim,
        domain=domain,
        p_values=p_values,
        q_values=q_values,
        cells=cells,
        curve_cells=curve_cells,
    )
