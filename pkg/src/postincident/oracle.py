"""Finite-difference reference solvers on an interval.

Crank-Nicolson for the heat equation and leapfrog for the wave equation,
both with the separable source mu(t) f(x), zero initial data and a uniform
grid.  They share no code with the spectral solver and serve to validate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import CFLViolation, ConfigError, InvalidGrid
from .sources import SpatialProfile, TimeProfile
from .spectra import Interval

SCHEMES = ("crank_nicolson", "leapfrog")
_GRID_TOL = 1e-9


@dataclass(frozen=True)
class FDGrid:
    """Uniform space-time grid.  ``h`` must divide the interval length."""

    h: float
    dt: float
    scheme: str = "crank_nicolson"

    def __post_init__(self):
        if not (self.h > 0 and self.dt > 0 and math.isfinite(self.h) and math.isfinite(self.dt)):
            raise InvalidGrid("grid steps must be positive and finite")
        if self.scheme not in SCHEMES:
            raise InvalidGrid(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "leapfrog" and self.dt > self.h * (1 + _GRID_TOL):
            raise CFLViolation(f"leapfrog needs dt <= h (dt={self.dt:g}, h={self.h:g})")

    @property
    def cfl(self) -> float:
        return self.dt / self.h

    def nodes(self, domain: Interval) -> np.ndarray:
        n = round(domain.length / self.h)
        if n < 2 or abs(n * self.h - domain.length) > _GRID_TOL * domain.length:
            raise InvalidGrid(f"h={self.h:g} does not divide the interval length {domain.length:g}")
        return np.linspace(0.0, domain.length, n + 1)

    def steps(self, t: float) -> int:
        k = round(t / self.dt)
        if k < 0 or abs(k * self.dt - t) > _GRID_TOL * max(1.0, t):
            raise InvalidGrid(f"time {t:g} is not a multiple of dt={self.dt:g}")
        return k


@dataclass
class FDField:
    """Snapshots ``values[k]`` of u at ``times[k]`` on the nodes ``x``.

    ``energy`` (wave only) is the discrete energy int u_t^2 + u_x^2 at each
    snapshot, conserved exactly by leapfrog once the source is off.
    """

    x: np.ndarray
    times: np.ndarray
    values: np.ndarray
    energy: np.ndarray | None = None


def _sample_f(f, x: np.ndarray) -> np.ndarray:
    if isinstance(f, SpatialProfile) or callable(f):
        return np.asarray(f(x[:, None]), dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape != x.shape:
        raise ConfigError(f"sampled f has shape {f.shape}, grid has {x.shape}")
    return f


def _snapshot_steps(grid: FDGrid, times, t_end: float | None):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise InvalidGrid("snapshot times must be nonnegative and nondecreasing")
    if t_end is not None and not t_end > 0:
        raise InvalidGrid("t_end must be positive")
    if t_end is not None and times[-1] > t_end * (1 + _GRID_TOL):
        raise InvalidGrid("snapshot time beyond t_end")
    return times, [grid.steps(t) for t in times]


def _step_means(mu: TimeProfile, dt: float, n_steps: int) -> np.ndarray:
    """(1/dt) int_{t_k}^{t_k+dt} mu for k < n_steps: 3-point Gauss on smooth
    steps, exact integration on steps containing a breakpoint of mu."""
    t0 = np.arange(n_steps) * dt
    g = np.sqrt(0.6)
    nodes, weights = np.array([-g, 0.0, g]), np.array([5.0, 8.0, 5.0]) / 18.0
    vals = mu(t0[:, None] + 0.5 * dt * (1.0 + nodes[None, :]))
    means = vals @ weights
    for b in mu.breakpoints():
        k = int(math.floor(b / dt))
        for kk in (k - 1, k):
            if 0 <= kk < n_steps:
                lo, hi = kk * dt, (kk + 1) * dt
                means[kk] = float(mu.duhamel(0.0, hi, lo, hi)[0].real) / dt
    return means


def _heat_operator(n_nodes: int, h: float, bc: str):
    """Symmetrised second difference W A on the unknowns as (diag, off) / h^2.

    Dirichlet unknowns are the interior nodes and W = I.  Neumann unknowns are
    all nodes; the ghost reflection u_{-1} = u_1 doubles the end coupling, and
    the weights W (1/2 at the ends) restore symmetry.  Returns (diag, off, w).
    """
    m = n_nodes - 2 if bc == "dirichlet" else n_nodes
    w = np.ones(m)
    diag = np.full(m, -2.0)
    off = np.ones(m - 1)
    if bc == "neumann":
        w[[0, -1]] = 0.5
        diag[[0, -1]] = -1.0
    return diag / h**2, off / h**2, w


def _tri_matvec(diag, off, v):
    out = diag * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def fd_heat(domain: Interval, f, mu: TimeProfile, grid: FDGrid, t_end: float, times=None, initial=None) -> FDField:
    """Crank-Nicolson solution of u_t = u_xx + mu(t) f(x) with zero initial value.

    Neumann ends use ghost nodes (u_{-1} = u_1).  The source enters through its
    mean over each step, which keeps second order when mu has kinks.  With
    ``initial`` given (and mu switched off by the caller) the run is the
    homogeneous problem started from that profile.
    """
    if not isinstance(domain, Interval):
        raise InvalidGrid("the finite-difference oracle works on an Interval")
    if grid.scheme != "crank_nicolson":
        raise InvalidGrid("fd_heat uses the crank_nicolson scheme")
    x = grid.nodes(domain)
    times, snap = _snapshot_steps(grid, [t_end] if times is None else times, t_end)
    n_steps = snap[-1]
    fx = _sample_f(f, x)
    diag, off, w = _heat_operator(x.size, grid.h, domain.bc)
    inner = slice(1, -1) if domain.bc == "dirichlet" else slice(None)

    # with W A symmetric, (W - dt/2 W A) u+ = (W + dt/2 W A) u + dt mu_k W f
    # has an SPD matrix on the left, factored once in banded form
    half = 0.5 * grid.dt
    band = np.zeros((2, diag.size))
    band[0, 1:] = -half * off
    band[1] = w - half * diag
    chol = cholesky_banded(band)
    rhs_diag, rhs_off = w + half * diag, half * off
    wf = w * fx[inner]

    u = np.zeros(x.size)
    if initial is not None:
        u = _sample_f(initial, x).copy()
        if domain.bc == "dirichlet":
            u[[0, -1]] = 0.0
    means = _step_means(mu, grid.dt, n_steps) if n_steps else np.zeros(0)
    out = np.empty((len(times), x.size))
    k_out = 0
    while k_out < len(snap) and snap[k_out] == 0:
        out[k_out] = u
        k_out += 1
    v = u[inner].copy()
    for k in range(n_steps):
        v = cho_solve_banded((chol, False), _tri_matvec(rhs_diag, rhs_off, v) + grid.dt * means[k] * wf)
        while k_out < len(snap) and snap[k_out] == k + 1:
            out[k_out, inner] = v
            k_out += 1
    if domain.bc == "dirichlet":
        out[:, [0, -1]] = 0.0
    return FDField(x, times, out)


def fd_wave(domain: Interval, f, mu: TimeProfile, grid: FDGrid, t_end: float, times=None) -> FDField:
    """Leapfrog solution of u_tt = u_xx + mu(t) f(x), u = u_t = 0 at t = 0, Dirichlet ends.

    The first step uses u(dt) = f int_0^dt (dt - s) mu(s) ds, evaluated by the
    one-point rule dt^2/2 mu(dt/3) that is exact for linear mu.
    """
    if not isinstance(domain, Interval):
        raise InvalidGrid("the finite-difference oracle works on an Interval")
    if domain.bc != "dirichlet":
        raise InvalidGrid("fd_wave supports Dirichlet ends")
    if grid.scheme != "leapfrog":
        raise InvalidGrid("fd_wave uses the leapfrog scheme")
    x = grid.nodes(domain)
    times, snap = _snapshot_steps(grid, [t_end] if times is None else times, t_end)
    n_steps = snap[-1]
    fx = _sample_f(f, x)[1:-1]
    h, dt = grid.h, grid.dt
    r2 = (dt / h) ** 2

    ones = np.ones(x.size - 3)

    def lap(v):
        return _tri_matvec(-2.0, ones, v)

    def energy(prev, cur):
        # staggered discrete energy at t_{k+1/2}: |D_t u|^2 + <u^{k+1}, -D_xx u^k>
        vel = (cur - prev) / dt
        return float(h * (vel @ vel - cur @ lap(prev) / h**2))

    src = dt**2 * np.asarray(mu(np.arange(n_steps + 1) * dt), dtype=float)
    prev = np.zeros(x.size - 2)
    cur = 0.5 * dt**2 * float(mu(dt / 3.0)) * fx if n_steps else prev.copy()
    out = np.zeros((len(times), x.size))
    en = np.zeros(len(times))
    k_out = 0
    while k_out < len(snap) and snap[k_out] == 0:
        k_out += 1
    while k_out < len(snap) and snap[k_out] == 1:
        out[k_out, 1:-1] = cur
        en[k_out] = energy(prev, cur)
        k_out += 1
    for k in range(1, n_steps):
        nxt = 2.0 * cur - prev + r2 * lap(cur) + src[k] * fx
        prev, cur = cur, nxt
        while k_out < len(snap) and snap[k_out] == k + 1:
            out[k_out, 1:-1] = cur
            en[k_out] = energy(prev, cur)
            k_out += 1
    return FDField(x, times, out, en)


@dataclass(frozen=True)
class ComparisonReport:
    times: np.ndarray
    errors: np.ndarray  # relative error per time
    norm: str

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.errors.size else 0.0

    def to_dict(self):
        return {"errors": self.errors, "max_error": self.max_error, "norm": self.norm, "times": self.times}


def _norm(v: np.ndarray, h: float, kind: str) -> float:
    if kind == "max":
        return float(np.max(np.abs(v), initial=0.0))
    w = np.full(v.shape[-1], h)
    w[[0, -1]] *= 0.5
    return float(math.sqrt(np.sum(w * v * v)))


def compare(spectral, fd_field: FDField, times=None, norm: str = "l2") -> ComparisonReport:
    """Relative L2 (trapezoid) or max-norm error of ``fd_field`` against a
    spectral solution evaluated on the same nodes.

    ``spectral`` may also be another FDField on the same grid.  A time at
    which the reference vanishes reports the absolute error.
    """
    if norm not in ("l2", "max"):
        raise ConfigError("norm must be 'l2' or 'max'")
    times = fd_field.times if times is None else np.atleast_1d(np.asarray(times, dtype=float))
    idx = [int(np.argmin(np.abs(fd_field.times - t))) for t in times]
    if any(abs(fd_field.times[i] - t) > _GRID_TOL * max(1.0, t) for i, t in zip(idx, times)):
        raise InvalidGrid("requested time not among the field snapshots")
    fd = fd_field.values[idx]
    if isinstance(spectral, FDField):
        if spectral.x.shape != fd_field.x.shape or not np.allclose(spectral.x, fd_field.x):
            raise InvalidGrid("fields live on different grids")
        ref = spectral.values[[int(np.argmin(np.abs(spectral.times - t))) for t in times]]
    else:
        ref = spectral.evaluate(fd_field.x[:, None], times)
    h = float(fd_field.x[1] - fd_field.x[0])
    errs = []
    for r, v in zip(ref, fd):
        scale = _norm(r, h, norm)
        diff = _norm(v - r, h, norm)
        errs.append(diff / scale if scale > 0 else diff)
    return ComparisonReport(np.asarray(times), np.asarray(errs), norm)


__all__ = ["FDGrid", "FDField", "ComparisonReport", "fd_heat", "fd_wave", "compare", "SCHEMES"]
