"""Spectral forward solvers for heat and wave problems with separable sources.

For a source mu(t) f(x) and zero initial data the solution is

    u(x, t) = sum_n c_n(t) phi_n(x),

with the repeated-mode coefficients

    heat:  c_n(t) = (f, phi_n) int_0^t exp(-sigma_n (t - s)) mu(s) ds
    wave:  c_n(t) = (f, phi_n) int_0^t sin(w_n (t - s)) / w_n mu(s) ds,   w_n = sqrt(sigma_n).

Once the source has switched off (t >= T) the heat coefficients reduce to
``gamma_n exp(-sigma_n t)`` and the wave coefficients to
``a_n sin(w_n t) + b_n cos(w_n t)``; :func:`posterior_coefficients` returns
those parameters.  Both reductions are evaluated directly from the time
profile's exact kernel integrals, so piecewise-linear sources carry no
quadrature error.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import LogScaled
from .errors import (
    ConfigError,
    GridTooCoarse,
    PointOutsideDomain,
    TruncationWarning,
    UnsupportedCount,
    UnsupportedDomain,
)
from .sources import SpatialProfile, TimeProfile, as_points
from .spectra import (
    Disk,
    Spectrum,
    eigenfunction_normal_derivative,
    eigenfunction_value_on,
    project,
)

DEFAULT_N_MAX = 64
TRUNCATION_RTOL = 1e-8

# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeatPosterior:
    """Post-source heat parameters: c_n(t) = gamma_n exp(-sigma_n t) for t >= T.

    ``gamma`` holds log-scaled values since exp(sigma_n T) overflows quickly.
    """

    sigma: np.ndarray
    gamma: tuple  # LogScaled per repeated mode
    support_end: float

    def gamma_values(self) -> np.ndarray:
        return np.array([g.value() for g in self.gamma])


@dataclass(frozen=True)
class WavePosterior:
    """Post-source wave parameters: c_n(t) = a_n sin(w_n t) + b_n cos(w_n t) for t >= T."""

    omega: np.ndarray
    a: np.ndarray
    b: np.ndarray
    support_end: float

    def modal_energy(self) -> np.ndarray:
        return self.omega**2 * (self.a**2 + self.b**2)


@dataclass(frozen=True)
class SpectralSolution:
    """Truncated modal solution over the first ``n_max`` distinct modes.

    ``projections`` are the inner products (f, phi_n) over the repeated
    listing; ``descriptors`` and ``sigma`` follow the same order.
    """

    equation: str  # "heat" | "wave"
    spectrum: Spectrum
    f: SpatialProfile
    mu: TimeProfile
    n_max: int
    projections: np.ndarray
    descriptors: tuple
    sigma: np.ndarray
    # kernel integrals at t = T: heat int exp(-sigma(T-s)) mu, wave (S, C)
    _at_end: np.ndarray = field(repr=False, compare=False)

    @property
    def support_end(self) -> float:
        return float(self.mu.support_end)

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.sigma)

    # -- modal coefficients ------------------------------------------------
    def _kernel(self, t: float) -> np.ndarray:
        """Per-mode kernel integral at time t (before multiplying by the projections)."""
        T = self.support_end
        if self.equation == "heat":
            if t >= T:
                return np.exp(-self.sigma * (t - T)) * self._at_end.real
            return self.mu.duhamel(-self.sigma, t).real
        w = self.omega
        if t >= T:
            S, C = self._at_end.imag, self._at_end.real
            tau = t - T
            return (C * np.sin(w * tau) + S * np.cos(w * tau)) / w
        return self.mu.duhamel(1j * w, t).imag / w

    def _kernel_rate(self, t: float) -> np.ndarray:
        T = self.support_end
        if self.equation == "heat":
            return -self.sigma * self._kernel(t) + float(self.mu(t))
        w = self.omega
        if t >= T:
            S, C = self._at_end.imag, self._at_end.real
            tau = t - T
            return C * np.cos(w * tau) - S * np.sin(w * tau)
        return self.mu.duhamel(1j * w, t).real

    def coefficients(self, times) -> np.ndarray:
        """c_n(t) for each time; shape (len(times), number of repeated modes)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise ValueError("times must be nonnegative")
        return np.array([self._kernel(t) * self.projections for t in times])

    def velocity(self, times) -> np.ndarray:
        """Time derivatives c_n'(t)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.array([self._kernel_rate(t) * self.projections for t in times])

    # -- field evaluation --------------------------------------------------
    def mode_values(self, points) -> np.ndarray:
        """Matrix of phi_n(x_k), shape (n_points, n_modes)."""
        pts = as_points(points, self.spectrum.dim)
        if not np.all(self.spectrum.domain.contains(pts)):
            raise PointOutsideDomain(f"observation point outside {self.spectrum.domain!r}")
        return np.column_stack([eigenfunction_value_on(self.spectrum.domain, d, pts) for d in self.descriptors])

    def mode_fluxes(self, boundary_points) -> np.ndarray:
        """Matrix of normal derivatives of phi_n at boundary points."""
        pts = as_points(boundary_points, self.spectrum.dim)
        return np.array(
            [[eigenfunction_normal_derivative(self.spectrum, d, p) for d in self.descriptors] for p in pts]
        )

    def evaluate(self, points, times) -> np.ndarray:
        """u(x_k, t_i), shape (len(times), n_points)."""
        coef = self.coefficients(times)
        basis = self.mode_values(points)
        self._check_truncation(coef[:1], basis)
        return _ordered_sum(coef, basis)

    def flux(self, boundary_points, times) -> np.ndarray:
        """Normal derivative of u at boundary points, shape (len(times), n_points)."""
        coef = self.coefficients(times)
        basis = self.mode_fluxes(boundary_points)
        self._check_truncation(coef[:1], basis)
        return _ordered_sum(coef, basis)

    def energy(self, times) -> np.ndarray:
        """Truncated energy sum_n (c_n'^2 + sigma_n c_n^2) (wave) or sum c_n^2 (heat)."""
        c = self.coefficients(times)
        if self.equation == "heat":
            return np.sum(c * c, axis=1)
        v = self.velocity(times)
        return np.sum(v * v + self.sigma * c * c, axis=1)

    def _check_truncation(self, coef_row: np.ndarray, basis: np.ndarray) -> None:
        if coef_row.size == 0:
            return
        last = self.spectrum.modes[self.n_max - 1].multiplicity
        contrib = coef_row[0][None, :] * basis
        total = np.abs(contrib.sum(axis=1))
        tail = np.abs(contrib[:, -last:].sum(axis=1))
        scale = np.max(np.abs(contrib), axis=1)
        bad = (tail > TRUNCATION_RTOL * np.maximum(total, 1e-300)) & (scale > 0)
        if np.any(bad):
            warnings.warn(
                f"mode {self.n_max} still contributes {float(np.max(tail / np.maximum(total, 1e-300))):.2e} "
                "of the partial sum; increase n_max",
                TruncationWarning,
                stacklevel=3,
            )


def _ordered_sum(coef: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """sum_n coef[i, n] basis[k, n], accumulated lowest mode first for reproducibility."""
    out = np.zeros((coef.shape[0], basis.shape[0]))
    for n in range(coef.shape[1]):
        out += np.outer(coef[:, n], basis[:, n])
    return out


def _modal_setup(spectrum: Spectrum, f: SpatialProfile, n_max: int | None):
    if isinstance(spectrum.domain, Disk):
        raise UnsupportedDomain("forward solving on the disk is not supported")
    n_max = min(DEFAULT_N_MAX, len(spectrum)) if n_max is None else int(n_max)
    if not 1 <= n_max <= len(spectrum):
        raise UnsupportedCount(f"n_max={n_max} outside 1..{len(spectrum)}")
    proj = project(spectrum, f, n_max).flat()
    rep = spectrum.repeated(n_max)
    descs = tuple(d for _, d, _ in rep)
    sigma = np.array([lam for _, _, lam in rep], dtype=float)
    return n_max, proj, descs, sigma


def solve_heat(spectrum: Spectrum, f: SpatialProfile, mu: TimeProfile, n_max: int | None = None) -> SpectralSolution:
    """Modal solution of u_t = Laplacian u + mu(t) f(x), zero initial value."""
    n_max, proj, descs, sigma = _modal_setup(spectrum, f, n_max)
    T = float(mu.support_end)
    at_end = mu.duhamel(-sigma, T).real.astype(complex)
    return SpectralSolution("heat", spectrum, f, mu, n_max, proj, descs, sigma, at_end)


def solve_wave(spectrum: Spectrum, f: SpatialProfile, mu: TimeProfile, n_max: int | None = None) -> SpectralSolution:
    """Modal solution of u_tt = Laplacian u + mu(t) f(x), zero initial data (Dirichlet only)."""
    if spectrum.bc != "dirichlet":
        raise UnsupportedDomain("the wave solver needs a Dirichlet spectrum")
    n_max, proj, descs, sigma = _modal_setup(spectrum, f, n_max)
    T = float(mu.support_end)
    # C + iS with S = int mu sin w(T-s), C = int mu cos w(T-s)
    at_end = mu.duhamel(1j * np.sqrt(sigma), T)
    return SpectralSolution("wave", spectrum, f, mu, n_max, proj, descs, sigma, at_end)


def posterior_coefficients(solution: SpectralSolution):
    """Exact post-source parametrization of the modal coefficients."""
    T = solution.support_end
    if solution.equation == "heat":
        gamma = tuple(
            LogScaled(float(m * p), float(s * T))
            for m, p, s in zip(solution._at_end.real, solution.projections, solution.sigma)
        )
        return HeatPosterior(solution.sigma.copy(), gamma, T)
    w = solution.omega
    S, C = solution._at_end.imag, solution._at_end.real
    # int mu cos(ws) = C cos(wT) + S sin(wT); int mu sin(ws) = C sin(wT) - S cos(wT)
    cos_m = C * np.cos(w * T) + S * np.sin(w * T)
    sin_m = C * np.sin(w * T) - S * np.cos(w * T)
    p = solution.projections
    return WavePosterior(w.copy(), cos_m / w * p, -sin_m / w * p, T)


# ---------------------------------------------------------------------------
# homogeneous solutions and Duhamel convolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomogeneousSolution:
    """Source-free solution with data f: heat initial value f, wave initial velocity f."""

    equation: str
    spectrum: Spectrum
    n_max: int
    projections: np.ndarray
    descriptors: tuple
    sigma: np.ndarray

    def coefficients(self, times) -> np.ndarray:
        s = np.atleast_1d(np.asarray(times, dtype=float))[:, None]
        if self.equation == "heat":
            return np.exp(-self.sigma * s) * self.projections
        w = np.sqrt(self.sigma)
        return np.sin(w * s) / w * self.projections


def homogeneous_solution(spectrum: Spectrum, f: SpatialProfile, equation: str, n_max: int | None = None):
    if equation not in ("heat", "wave"):
        raise ConfigError(f"unknown equation {equation!r}")
    n_max, proj, descs, sigma = _modal_setup(spectrum, f, n_max)
    return HomogeneousSolution(equation, spectrum, n_max, proj, descs, sigma)


_GL8 = np.polynomial.legendre.leggauss(8)


def _convolution_nodes(t, breaks, sigma_max, omega_max, scale):
    """Gauss-Legendre nodes on [0, t] refined near s = 0 and at the kinks of mu(t - s)."""
    pts = {0.0, t}
    pts.update(t - b for b in breaks if 0.0 < b < t)
    # geometric grading towards s = 0 resolves the heat boundary layer exp(-sigma s)
    if sigma_max > 0:
        h = t / 2.0
        while h > 0.05 / sigma_max:
            pts.add(h)
            h /= 2.0
        pts.add(min(h, t))
    edges = np.array(sorted(pts))
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        panels = scale * max(1, math.ceil(omega_max * (b - a) / math.pi), math.ceil(4 * (b - a) / t))
        e = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(e)
        mid = 0.5 * (e[:-1] + e[1:])
        xs.append((mid[:, None] + half[:, None] * _GL8[0]).ravel())
        ws.append((half[:, None] * _GL8[1]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def duhamel_convolve(v: HomogeneousSolution, mu: TimeProfile, times, points=None, refine: int = 4, rtol: float = 1e-6):
    """u(t) = int_0^t mu(t - s) v(s) ds by composite Gauss-Legendre quadrature.

    Returns modal coefficients (len(times), n_modes), or field values at
    ``points`` when given.  The panel count is doubled until two successive
    results agree to ``rtol`` in the modal (L2) norm; ``GridTooCoarse`` is
    raised when ``refine`` doublings do not reach that.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    breaks = mu.breakpoints()
    sigma_max = float(np.max(v.sigma)) if v.equation == "heat" else 0.0
    omega_max = float(np.sqrt(np.max(v.sigma))) if v.equation == "wave" else 0.0
    out = np.zeros((len(times), len(v.projections)))
    for i, t in enumerate(times):
        if t <= 0:
            continue
        prev = None
        for level in range(refine + 1):
            s, w = _convolution_nodes(t, breaks, sigma_max, omega_max, 2**level)
            val = (w * mu(t - s)) @ v.coefficients(s)
            if prev is not None:
                scale = max(np.linalg.norm(val), 1e-300)
                if np.linalg.norm(val - prev) <= rtol * scale or not np.any(val):
                    break
            prev = val
        else:
            raise GridTooCoarse(f"Duhamel quadrature at t={t:g} not converged after {refine} refinements")
        out[i] = val
    if points is None:
        return out
    pts = as_points(points, v.spectrum.dim)
    basis = np.column_stack([eigenfunction_value_on(v.spectrum.domain, d, pts) for d in v.descriptors])
    return _ordered_sum(out, basis)


# ---------------------------------------------------------------------------
# observations
# ---------------------------------------------------------------------------

OBS_KINDS = ("point", "flux", "state")
NOISE_MODELS = ("gaussian", "uniform")


def time_grid(T1: float, T2: float, dt: float) -> np.ndarray:
    """Uniform grid T1, T1 + dt, ... up to T2 (inclusive when T2 - T1 is a multiple of dt)."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if not T2 > T1:
        raise ConfigError("need T1 < T2")
    n = int(math.floor((T2 - T1) / dt + 1e-9)) + 1
    return T1 + dt * np.arange(n)


@dataclass(frozen=True)
class ObservationRecord:
    """Sampled observation: point traces, boundary fluxes or modal states.

    ``values`` has one row per time.  Columns are the observation points
    (kinds ``point`` and ``flux``) or modal coefficients (kind ``state``; for
    the wave equation the first half are u, the second half u_t).
    """

    kind: str
    times: np.ndarray
    values: np.ndarray
    points: tuple = ()
    source_end: float | None = None
    post_incident: bool = True
    noise: dict | None = None

    def __post_init__(self):
        if self.kind not in OBS_KINDS:
            raise ConfigError(f"unknown observation kind {self.kind!r}")
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != t.size:
            raise ConfigError("values need one row per time sample")
        if t.size > 1:
            d = np.diff(t)
            if np.any(d <= 0):
                raise ConfigError("time grid must be strictly increasing")
            if np.max(np.abs(d - d[0])) > 1e-12 * max(1.0, abs(t[-1])):
                raise ConfigError("time grid must be uniform")
        if self.post_incident and self.source_end is not None and not t[0] > self.source_end:
            raise ConfigError(
                f"post-incident record starts at {t[0]:g}, not after the source end {self.source_end:g}"
            )
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def to_csv(self) -> str:
        return write_csv(self.times, self.values, first="t")

    @classmethod
    def from_csv(cls, text: str, kind: str = "point", **meta) -> "ObservationRecord":
        header, data = read_csv(text)
        if header[0] != "t":
            raise ConfigError("observation CSV must start with a 't' column")
        return cls(kind, data[:, 0], data[:, 1:], **meta)


def value_header(n: int, first: str = "t") -> list[str]:
    return [first] + ["value" if i == 0 else f"value{i + 1}" for i in range(n)]


def write_csv(first_col, values, first: str = "t", header: list[str] | None = None) -> str:
    """CSV text with a header row, 17 significant digits and ``\\n`` line endings."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    buf = io.StringIO()
    header = header or value_header(values.shape[1], first)
    buf.write(",".join(header) + "\n")
    for x, row in zip(np.asarray(first_col, dtype=float), values):
        buf.write(",".join("%.17g" % v for v in (x, *row)) + "\n")
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise ConfigError("CSV needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"malformed CSV value: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header) or len(header) < 2:
        raise ConfigError("CSV rows must match the header width (at least two columns)")
    if not np.all(np.isfinite(data)):
        raise ConfigError("CSV contains non-finite values")
    return header, data


def add_noise(values: np.ndarray, model: str, delta: float, seed: int) -> np.ndarray:
    """Additive noise of amplitude ``delta * max|values|`` from a seeded generator."""
    if model not in NOISE_MODELS:
        raise ConfigError(f"unknown noise model {model!r}")
    if delta < 0:
        raise ConfigError("noise amplitude must be nonnegative")
    if delta == 0:
        return values
    rng = np.random.default_rng(seed)
    amp = delta * float(np.max(np.abs(values), initial=0.0))
    if model == "gaussian":
        xi = rng.standard_normal(values.shape)
    else:
        xi = rng.uniform(-1.0, 1.0, values.shape)
    return values + amp * xi


def observe(
    solution: SpectralSolution,
    kind: str,
    times,
    points=None,
    noise: dict | None = None,
    post_incident: bool = True,
) -> ObservationRecord:
    """Sample a solution.

    kind ``point``: u(x0, t) at interior points; ``flux``: normal derivative at
    boundary points; ``state``: modal coefficients (wave: u then u_t).
    ``noise`` is ``{"model": "gaussian"|"uniform", "delta": float, "seed": int}``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if kind == "point":
        if points is None:
            raise ConfigError("point observation needs points")
        values = solution.evaluate(points, times)
        pts = tuple(tuple(float(c) for c in p) for p in as_points(points, solution.spectrum.dim))
    elif kind == "flux":
        if points is None:
            raise ConfigError("flux observation needs boundary points")
        values = solution.flux(points, times)
        pts = tuple(tuple(float(c) for c in p) for p in as_points(points, solution.spectrum.dim))
    elif kind == "state":
        values = solution.coefficients(times)
        if solution.equation == "wave":
            values = np.hstack([values, solution.velocity(times)])
        pts = ()
    else:
        raise ConfigError(f"unknown observation kind {kind!r}")
    meta = None
    if noise is not None and noise.get("delta", 0.0) > 0:
        meta = {"delta": float(noise["delta"]), "model": noise.get("model", "gaussian"), "seed": int(noise.get("seed", 0))}
        values = add_noise(values, meta["model"], meta["delta"], meta["seed"])
    return ObservationRecord(kind, times, values, pts, solution.support_end, post_incident, meta)


__all__ = [
    "DEFAULT_N_MAX",
    "SpectralSolution",
    "HeatPosterior",
    "WavePosterior",
    "HomogeneousSolution",
    "ObservationRecord",
    "solve_heat",
    "solve_wave",
    "posterior_coefficients",
    "homogeneous_solution",
    "duhamel_convolve",
    "observe",
    "time_grid",
    "add_noise",
    "write_csv",
    "read_csv",
]
