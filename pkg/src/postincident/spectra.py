"""Explicit Laplacian eigensystems for intervals, rectangles and the unit disk.

Eigenvalues are grouped into distinct values lambda_j with multiplicity d_j;
``Spectrum.sigma`` is the repeated listing sigma_1 <= sigma_2 <= ... and
``Spectrum.counting`` holds m_k = d_1 + ... + d_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import (
    InsufficientModes,
    InvalidDomain,
    NotOnBoundary,
    PointOutsideDomain,
    QuadratureFailure,
    UnsupportedCount,
    UnsupportedDomain,
)
from .sources import ModeCombination, SpatialProfile, as_points

_BOUNDARY_TOL = 1e-10
_INSIDE_TOL = 1e-12

# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


def _check_bc(bc):
    if bc not in ("dirichlet", "neumann"):
        raise InvalidDomain(f"unknown boundary condition {bc!r}")


@dataclass(frozen=True)
class Interval:
    length: float = 1.0
    bc: str = "dirichlet"

    dim = 1

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidDomain("interval length must be positive")
        _check_bc(self.bc)

    @property
    def volume(self):
        return self.length

    def contains(self, pts, tol=_INSIDE_TOL):
        x = as_points(pts, 1)[:, 0]
        return (x >= -tol) & (x <= self.length + tol)

    def to_dict(self):
        return {"bc": self.bc, "length": self.length, "shape": "interval"}


@dataclass(frozen=True)
class Rectangle:
    """(0, l1) x (0, l2).

    ``aspect`` is the exact fraction p/q = l1^2 / l2^2 when the caller declares
    the ratio rational, or None when it is declared irrational.
    """

    l1: float
    l2: float
    aspect: Fraction | None = None
    bc: str = "dirichlet"

    dim = 2

    def __post_init__(self):
        if not (self.l1 > 0 and self.l2 > 0):
            raise InvalidDomain("rectangle side lengths must be positive")
        _check_bc(self.bc)
        if self.bc != "dirichlet":
            raise InvalidDomain("Neumann spectra are only implemented for intervals")
        if self.aspect is not None:
            aspect = Fraction(self.aspect)
            object.__setattr__(self, "aspect", aspect)
            ratio = self.l1**2 / self.l2**2
            if abs(float(aspect) - ratio) > 1e-12 * ratio:
                raise InvalidDomain(
                    f"declared aspect {aspect} does not match l1^2/l2^2 = {ratio!r}"
                )

    @property
    def volume(self):
        return self.l1 * self.l2

    def contains(self, pts, tol=_INSIDE_TOL):
        p = as_points(pts, 2)
        return (
            (p[:, 0] >= -tol)
            & (p[:, 0] <= self.l1 + tol)
            & (p[:, 1] >= -tol)
            & (p[:, 1] <= self.l2 + tol)
        )

    def to_dict(self):
        d = {"bc": self.bc, "lengths": [self.l1, self.l2], "shape": "rectangle"}
        d["aspect"] = "irrational" if self.aspect is None else f"{self.aspect.numerator}/{self.aspect.denominator}"
        return d


@dataclass(frozen=True)
class Disk:
    """Unit disk (radius fixed to 1)."""

    bc: str = "dirichlet"
    radius: float = field(default=1.0, init=False)

    dim = 2

    def __post_init__(self):
        _check_bc(self.bc)
        if self.bc != "dirichlet":
            raise InvalidDomain("Neumann spectra are only implemented for intervals")

    @property
    def volume(self):
        return math.pi

    def contains(self, pts, tol=_INSIDE_TOL):
        p = as_points(pts, 2)
        return np.hypot(p[:, 0], p[:, 1]) <= 1.0 + tol

    def to_dict(self):
        return {"bc": self.bc, "shape": "disk"}


# ---------------------------------------------------------------------------
# spectrum types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenMode:
    index: int
    eigenvalue: float
    multiplicity: int
    descriptors: tuple


@dataclass(frozen=True)
class Spectrum:
    domain: object
    modes: tuple

    @property
    def bc(self):
        return self.domain.bc

    @property
    def dim(self):
        return self.domain.dim

    def __len__(self):
        return len(self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m.multiplicity for m in self.modes], dtype=int)

    @property
    def sigma(self) -> np.ndarray:
        return np.repeat(self.eigenvalues, self.multiplicities)

    @property
    def counting(self) -> np.ndarray:
        return np.cumsum(self.multiplicities)

    def repeated(self, n_distinct: int | None = None):
        """Flattened (distinct index, descriptor, eigenvalue) triples for the first modes."""
        modes = self.modes if n_distinct is None else self.modes[:n_distinct]
        return [(m.index, d, m.eigenvalue) for m in modes for d in m.descriptors]

    def truncated(self, n_distinct: int) -> "Spectrum":
        return Spectrum(self.domain, self.modes[:n_distinct])


# ---------------------------------------------------------------------------
# Bessel zeros
# ---------------------------------------------------------------------------

BESSEL_MAX_ORDER = 40
BESSEL_MAX_ZERO = 40


@lru_cache(maxsize=1)
def bessel_zero_table(max_order: int = BESSEL_MAX_ORDER, max_zero: int = BESSEL_MAX_ZERO) -> np.ndarray:
    """Positive zeros j_{m,k}, shape (max_order + 2, max_zero + 1), rows m, columns k - 1.

    One extra order and zero are kept to certify completeness of the table.
    """
    return np.array([special.jn_zeros(m, max_zero + 1) for m in range(max_order + 2)])


def _disk_modes():
    table = bessel_zero_table()
    max_order, max_zero = table.shape[0] - 2, table.shape[1] - 1
    cutoff = min(table[max_order + 1, 0], table[0, max_zero])
    entries = []
    for m in range(max_order + 1):
        for k in range(max_zero):
            j = table[m, k]
            if j < cutoff:
                entries.append((j, m, k + 1))
    entries.sort()
    return entries


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def enumerate_spectrum(domain, count: int, bc: str | None = None) -> Spectrum:
    """First ``count`` distinct eigenvalues of -Laplacian on ``domain`` with multiplicities."""
    if count < 1:
        raise UnsupportedCount("count must be at least 1")
    if bc is not None and bc != domain.bc:
        domain = replace(domain, bc=bc)
    if isinstance(domain, Interval):
        return _interval_spectrum(domain, count)
    if isinstance(domain, Rectangle):
        return _rectangle_spectrum(domain, count)
    if isinstance(domain, Disk):
        return _disk_spectrum(domain, count)
    raise InvalidDomain(f"unsupported domain {domain!r}")


def _interval_spectrum(domain: Interval, count: int) -> Spectrum:
    start = 0 if domain.bc == "neumann" else 1
    scale = (math.pi / domain.length) ** 2
    modes = tuple(
        EigenMode(j + 1, scale * n * n, 1, (n,)) for j, n in enumerate(range(start, start + count))
    )
    return Spectrum(domain, modes)


def _rectangle_spectrum(domain: Rectangle, count: int) -> Spectrum:
    if domain.aspect is not None:
        p, q = domain.aspect.numerator, domain.aspect.denominator
        # lambda = pi^2 / (q l1^2) * (q m1^2 + p m2^2), grouped on the exact integer key
        unit = math.pi**2 / (q * domain.l1**2)
        bound = q + p
        while True:
            groups: dict[int, list] = {}
            m1_max = math.isqrt(bound // q) + 1
            m2_max = math.isqrt(bound // p) + 1
            for m1 in range(1, m1_max + 1):
                for m2 in range(1, m2_max + 1):
                    key = q * m1 * m1 + p * m2 * m2
                    if key <= bound:
                        groups.setdefault(key, []).append((m1, m2))
            if len(groups) >= count:
                keys = sorted(groups)[:count]
                modes = tuple(
                    EigenMode(j + 1, unit * key, len(groups[key]), tuple(sorted(groups[key])))
                    for j, key in enumerate(keys)
                )
                return Spectrum(domain, modes)
            bound *= 2

    a1, a2 = 1.0 / domain.l1**2, 1.0 / domain.l2**2
    bound = a1 + a2
    while True:
        pairs = []
        m1_max = int(math.sqrt(bound / a1)) + 1
        m2_max = int(math.sqrt(bound / a2)) + 1
        for m1 in range(1, m1_max + 1):
            for m2 in range(1, m2_max + 1):
                v = m1 * m1 * a1 + m2 * m2 * a2
                if v <= bound:
                    pairs.append((v, m1, m2))
        if len(pairs) >= count:
            pairs.sort()
            pairs = pairs[:count]
            vals = np.array([p[0] for p in pairs])
            if np.any(np.diff(vals) <= 1e-12 * vals[1:]):
                i = int(np.argmax(np.diff(vals) <= 1e-12 * vals[1:]))
                raise InvalidDomain(
                    f"aspect declared irrational but modes {pairs[i][1:]} and {pairs[i + 1][1:]} "
                    "share an eigenvalue; declare the rational aspect instead"
                )
            modes = tuple(
                EigenMode(j + 1, math.pi**2 * v, 1, ((m1, m2),)) for j, (v, m1, m2) in enumerate(pairs)
            )
            return Spectrum(domain, modes)
        bound *= 2


def _disk_spectrum(domain: Disk, count: int) -> Spectrum:
    entries = _disk_modes()
    if count > len(entries):
        raise UnsupportedCount(
            f"disk spectrum limited to {len(entries)} certified distinct eigenvalues"
        )
    modes = []
    for j, (zero, m, k) in enumerate(entries[:count]):
        descs = ((0, k, "cos"),) if m == 0 else ((m, k, "cos"), (m, k, "sin"))
        modes.append(EigenMode(j + 1, zero * zero, len(descs), descs))
    return Spectrum(domain, tuple(modes))


def disk_table_capacity() -> int:
    return len(_disk_modes())


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------


def _check_inside(domain, pts):
    if not np.all(domain.contains(pts)):
        raise PointOutsideDomain(f"point(s) outside {domain!r}")


def _interval_factor(n, length, bc, x, deriv=0):
    """Derivative ``deriv`` (0, 1, 2) of the normalised 1-D eigenfunction."""
    k = n * math.pi / length
    if bc == "neumann":
        if n == 0:
            return np.full_like(x, 1.0 / math.sqrt(length)) if deriv == 0 else np.zeros_like(x)
        c = math.sqrt(2.0 / length)
        return [c * np.cos(k * x), -c * k * np.sin(k * x), -c * k * k * np.cos(k * x)][deriv]
    c = math.sqrt(2.0 / length)
    return [c * np.sin(k * x), c * k * np.cos(k * x), -c * k * k * np.sin(k * x)][deriv]


def _disk_norm(m, zero):
    # int_0^1 J_m(j r)^2 r dr = J_{m+1}(j)^2 / 2
    radial = abs(special.jv(m + 1, zero)) / math.sqrt(2.0)
    angular = math.sqrt(2.0 * math.pi) if m == 0 else math.sqrt(math.pi)
    return 1.0 / (radial * angular)


def eigenfunction_value_on(domain, desc, pts) -> np.ndarray:
    """Normalised eigenfunction ``desc`` of ``domain`` at points (no containment check)."""
    p = as_points(pts, domain.dim)
    if isinstance(domain, Interval):
        return _interval_factor(int(desc), domain.length, domain.bc, p[:, 0])
    if isinstance(domain, Rectangle):
        m1, m2 = desc
        return _interval_factor(m1, domain.l1, "dirichlet", p[:, 0]) * _interval_factor(
            m2, domain.l2, "dirichlet", p[:, 1]
        )
    if isinstance(domain, Disk):
        m, k, branch = desc
        zero = bessel_zero_table()[m, k - 1]
        r = np.hypot(p[:, 0], p[:, 1])
        th = np.arctan2(p[:, 1], p[:, 0])
        ang = np.cos(m * th) if branch == "cos" else np.sin(m * th)
        return _disk_norm(m, zero) * special.jv(m, zero * r) * ang
    raise InvalidDomain(f"unsupported domain {domain!r}")


def eigenfunction_value(spectrum: Spectrum, desc, point):
    """L2-normalised eigenfunction value; scalar for a single point."""
    domain = spectrum.domain
    _check_inside(domain, point)
    vals = eigenfunction_value_on(domain, desc, point)
    return float(vals[0]) if vals.size == 1 else vals


def eigenfunction_laplacian(spectrum: Spectrum, desc, point):
    """Laplacian of the eigenfunction from analytic second derivatives (interval, rectangle)."""
    domain = spectrum.domain
    _check_inside(domain, point)
    p = as_points(point, domain.dim)
    if isinstance(domain, Interval):
        out = _interval_factor(int(desc), domain.length, domain.bc, p[:, 0], deriv=2)
    elif isinstance(domain, Rectangle):
        m1, m2 = desc
        f1 = lambda d: _interval_factor(m1, domain.l1, "dirichlet", p[:, 0], d)  # noqa: E731
        f2 = lambda d: _interval_factor(m2, domain.l2, "dirichlet", p[:, 1], d)  # noqa: E731
        out = f1(2) * f2(0) + f1(0) * f2(2)
    else:
        raise UnsupportedDomain("analytic Laplacian only for interval and rectangle")
    return float(out[0]) if out.size == 1 else out


def _outward_normal(domain, point):
    if isinstance(domain, Interval):
        x = float(as_points(point, 1)[0, 0])
        if abs(x) <= _BOUNDARY_TOL:
            return np.array([-1.0])
        if abs(x - domain.length) <= _BOUNDARY_TOL:
            return np.array([1.0])
    elif isinstance(domain, Rectangle):
        x, y = as_points(point, 2)[0]
        inside = -_BOUNDARY_TOL <= x <= domain.l1 + _BOUNDARY_TOL and -_BOUNDARY_TOL <= y <= domain.l2 + _BOUNDARY_TOL
        if inside:
            if abs(x) <= _BOUNDARY_TOL:
                return np.array([-1.0, 0.0])
            if abs(x - domain.l1) <= _BOUNDARY_TOL:
                return np.array([1.0, 0.0])
            if abs(y) <= _BOUNDARY_TOL:
                return np.array([0.0, -1.0])
            if abs(y - domain.l2) <= _BOUNDARY_TOL:
                return np.array([0.0, 1.0])
    else:
        raise UnsupportedDomain("normal derivatives are not implemented for the disk")
    raise NotOnBoundary(f"{point!r} is not on the boundary of {domain!r}")


def eigenfunction_normal_derivative(spectrum: Spectrum, desc, boundary_point) -> float:
    """grad(phi) . nu at a boundary point, Dirichlet interval or rectangle."""
    domain = spectrum.domain
    if isinstance(domain, Disk):
        raise UnsupportedDomain("normal derivatives are not implemented for the disk")
    if domain.bc != "dirichlet":
        raise UnsupportedDomain("normal derivatives are only provided for Dirichlet spectra")
    nu = _outward_normal(domain, boundary_point)
    if isinstance(domain, Interval):
        x = as_points(boundary_point, 1)[:, 0]
        grad = [_interval_factor(int(desc), domain.length, "dirichlet", x, 1)[0]]
    else:
        m1, m2 = desc
        x, y = as_points(boundary_point, 2)[0]
        x, y = np.array([x]), np.array([y])
        grad = [
            (_interval_factor(m1, domain.l1, "dirichlet", x, 1) * _interval_factor(m2, domain.l2, "dirichlet", y))[0],
            (_interval_factor(m1, domain.l1, "dirichlet", x) * _interval_factor(m2, domain.l2, "dirichlet", y, 1))[0],
        ]
    return float(np.dot(grad, nu))


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionCoefficients:
    """Inner products (f, phi_jk) for distinct modes j = 1..j_max.

    ``coefficients[j-1]`` is an array of length d_j in descriptor order.
    ``point_values[j-1]`` is (P_j f)(x0) when a point was supplied.
    """

    spectrum: Spectrum
    coefficients: tuple
    point: tuple | None = None
    point_values: np.ndarray | None = None

    @property
    def j_max(self):
        return len(self.coefficients)

    def flat(self) -> np.ndarray:
        """Coefficients over the repeated listing sigma_1, sigma_2, ..."""
        return np.concatenate(self.coefficients) if self.coefficients else np.zeros(0)

    def norms(self) -> np.ndarray:
        """||P_j f||_{L2} per distinct mode."""
        return np.array([np.linalg.norm(c) for c in self.coefficients])


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _composite_gl(a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _support_interval(f, lo, hi, axis=0):
    box = f.support_box()
    if box is None:
        return lo, hi
    a, b = box[axis]
    return max(lo, a), min(hi, b)


def _quad_coefficients(spectrum: Spectrum, f: SpatialProfile, j_max: int, panels_scale: int):
    """Flattened coefficients by tensor Gauss-Legendre with ``panels_scale`` x the base panel count."""
    domain = spectrum.domain
    rep = spectrum.repeated(j_max)
    if isinstance(domain, Interval):
        a, b = _support_interval(f, 0.0, domain.length)
        if b <= a:
            return np.zeros(len(rep)), 0.0
        n_max = max(int(d) for _, d, _ in rep)
        panels = panels_scale * max(4, math.ceil(n_max * (b - a) / domain.length))
        x, w = _composite_gl(a, b, panels)
        fx = f(x)
        cols = np.array([_interval_factor(int(d), domain.length, domain.bc, x) for _, d, _ in rep])
        return cols @ (w * fx), float(np.sum(w * fx * fx))
    if isinstance(domain, Rectangle):
        ax, bx = _support_interval(f, 0.0, domain.l1, 0)
        ay, by = _support_interval(f, 0.0, domain.l2, 1)
        if bx <= ax or by <= ay:
            return np.zeros(len(rep)), 0.0
        m1_max = max(d[0] for _, d, _ in rep)
        m2_max = max(d[1] for _, d, _ in rep)
        px = panels_scale * max(4, math.ceil(m1_max * (bx - ax) / domain.l1))
        py = panels_scale * max(4, math.ceil(m2_max * (by - ay) / domain.l2))
        x, wx = _composite_gl(ax, bx, px)
        y, wy = _composite_gl(ay, by, py)
        X, Y = np.meshgrid(x, y, indexing="ij")
        F = f(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
        G = (wx[:, None] * F) * wy[None, :]
        Sx = np.array([_interval_factor(m, domain.l1, "dirichlet", x) for m in range(1, m1_max + 1)])
        Sy = np.array([_interval_factor(m, domain.l2, "dirichlet", y) for m in range(1, m2_max + 1)])
        C = Sx @ G @ Sy.T
        coef = np.array([C[d[0] - 1, d[1] - 1] for _, d, _ in rep])
        return coef, float(np.sum(G * F))
    if isinstance(domain, Disk):
        m_max = max(d[0] for _, d, _ in rep)
        k_max = max(d[1] for _, d, _ in rep)
        r, wr = _composite_gl(0.0, 1.0, panels_scale * max(4, k_max + m_max // 2))
        n_th = panels_scale * max(64, 4 * m_max + 8)
        th = 2 * math.pi * np.arange(n_th) / n_th
        R, TH = np.meshgrid(r, th, indexing="ij")
        F = f(np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])).reshape(R.shape)
        dth = 2 * math.pi / n_th
        coef = []
        table = bessel_zero_table()
        for _, (m, k, branch), _ in rep:
            zero = table[m, k - 1]
            ang = np.cos(m * th) if branch == "cos" else np.sin(m * th)
            radial = (F @ ang) * dth
            coef.append(_disk_norm(m, zero) * np.sum(wr * r * special.jv(m, zero * r) * radial))
        norm2 = float(np.sum((wr * r)[:, None] * F * F) * dth)
        return np.array(coef), norm2
    raise InvalidDomain(f"unsupported domain {domain!r}")


def project(spectrum: Spectrum, f: SpatialProfile, j_max: int, point=None, tol: float = 1e-11) -> ProjectionCoefficients:
    """Projection coefficients (f, phi_jk) for the first ``j_max`` distinct modes.

    Mode combinations on the same domain are projected in closed form.  Other
    profiles use composite Gauss-Legendre quadrature with at least 8 nodes per
    half-wavelength of the highest mode; the panel count is doubled until two
    successive results agree to ``tol`` relative to ||f||.
    """
    if j_max > len(spectrum):
        raise UnsupportedCount(f"j_max={j_max} exceeds spectrum size {len(spectrum)}")
    rep = spectrum.repeated(j_max)
    if isinstance(f, ModeCombination) and f.domain == spectrum.domain:
        flat = np.array([f.coefficient(d) for _, d, _ in rep])
    else:
        prev, _ = _quad_coefficients(spectrum, f, j_max, 1)
        for level in range(1, 7):
            flat, norm2 = _quad_coefficients(spectrum, f, j_max, 2**level)
            scale = max(math.sqrt(max(norm2, 0.0)), np.max(np.abs(flat), initial=0.0), 1e-300)
            if np.max(np.abs(flat - prev), initial=0.0) <= tol * scale:
                break
            prev = flat
        else:
            raise QuadratureFailure("projection quadrature did not converge under refinement")

    coeffs, pos = [], 0
    for mode in spectrum.modes[:j_max]:
        coeffs.append(flat[pos : pos + mode.multiplicity])
        pos += mode.multiplicity

    point_values = None
    if point is not None:
        _check_inside(spectrum.domain, point)
        pt = as_points(point, spectrum.dim)[:1]
        point_values = np.array(
            [
                sum(c * eigenfunction_value_on(spectrum.domain, d, pt)[0] for c, d in zip(cs, mode.descriptors))
                for cs, mode in zip(coeffs, spectrum.modes[:j_max])
            ]
        )
        point = tuple(float(v) for v in pt[0])
    return ProjectionCoefficients(spectrum, tuple(coeffs), point, point_values)


# ---------------------------------------------------------------------------
# Weyl statistics
# ---------------------------------------------------------------------------


@dataclass
class WeylReport:
    rho0: float
    expected_exponent: float
    fitted_exponent: float
    density_sequence: np.ndarray  # k / sqrt(lambda_k)
    density_tail: float
    density_trend: str  # "flat" | "diverging" | "oscillating"
    multiplicity_sequence: np.ndarray  # k / m_k^(1/d)
    multiplicity_tail: float
    limit_positive: bool
    multiplicity_unbounded: bool
    counting: np.ndarray

    def to_dict(self):
        return {
            "counting": self.counting.tolist(),
            "density_tail": self.density_tail,
            "density_trend": self.density_trend,
            "expected_exponent": self.expected_exponent,
            "fitted_exponent": self.fitted_exponent,
            "limit_positive": self.limit_positive,
            "multiplicity_tail": self.multiplicity_tail,
            "multiplicity_unbounded": self.multiplicity_unbounded,
            "rho0": self.rho0,
        }


def classify_tail(k: np.ndarray, seq: np.ndarray, flat_tol: float = 0.05):
    """Classify the last third of a positive sequence as flat, diverging or oscillating.

    Returns (trend, tail mean, relative oscillation, log-log slope).
    """
    n = len(seq)
    tail = slice(n - max(n // 3, 3), n)
    kt, st = k[tail].astype(float), seq[tail]
    mean = float(np.mean(st))
    osc = float((st.max() - st.min()) / mean) if mean > 0 else math.inf
    slope = float(np.polyfit(np.log(kt), np.log(st), 1)[0]) if np.all(st > 0) else 0.0
    if osc < flat_tol:
        return "flat", mean, osc, slope
    if slope > 0.1 and st[-1] > st[0]:
        return "diverging", mean, osc, slope
    return "oscillating", mean, osc, slope


def weyl_stats(spectrum: Spectrum) -> WeylReport:
    """Weyl-law fit sigma_j ~ rho0 j^(2/d) and the density / multiplicity sequences."""
    if len(spectrum) < 20:
        raise InsufficientModes("weyl_stats needs at least 20 distinct modes")
    d = spectrum.dim
    p = 2.0 / d
    sigma = spectrum.sigma
    j = np.arange(1, len(sigma) + 1, dtype=float)
    pos = sigma > 0
    rho0 = float(np.sum(sigma[pos] * j[pos] ** p) / np.sum(j[pos] ** (2 * p)))
    half = pos & (j > len(sigma) / 2)
    fitted = float(np.polyfit(np.log(j[half]), np.log(sigma[half]), 1)[0])

    lam = spectrum.eigenvalues
    k = np.arange(1, len(lam) + 1)
    keep = lam > 0
    dens = k[keep] / np.sqrt(lam[keep])
    trend, tail, _, _ = classify_tail(k[keep], dens)
    counting = spectrum.counting
    mult_seq = k / counting ** (1.0 / d)
    _, mult_tail, _, _ = classify_tail(k, mult_seq)

    mults = spectrum.multiplicities
    third = max(len(mults) // 3, 1)
    unbounded = bool(mults[-third:].max() > mults[:third].max())
    if trend == "diverging":
        tail = math.inf
    return WeylReport(
        rho0=rho0,
        expected_exponent=p,
        fitted_exponent=fitted,
        density_sequence=dens,
        density_tail=tail,
        density_trend=trend,
        multiplicity_sequence=mult_seq,
        multiplicity_tail=float(mult_tail),
        limit_positive=trend in ("flat", "diverging") and tail > 0,
        multiplicity_unbounded=unbounded,
        counting=counting,
    )
