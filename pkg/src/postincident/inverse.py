"""Reconstruction algorithms for the time factor mu and the space factor f.

All routines return a :class:`ReconstructionReport`.  Residual and condition
number are always filled; error fields only when a ground truth is supplied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from ._kernels import LogScaled
from .conditions import check_theorem3_conditions
from .errors import (
    ConditionViolated,
    ConfigError,
    ConstantUnpinnable,
    DiscrepancyUnattainable,
    EtaOutOfRange,
    IllConditionedWarning,
    InsufficientModes,
    ModeDivideByZeroWarning,
    MomentZero,
    NonMonotone,
    ValueOutOfRange,
)
from .forward import ObservationRecord, solve_heat
from .sources import ExpLinear, SpatialProfile, StepDecay, TimeProfile, exponential_moment_scaled, trig_moments
from .spectra import Interval, Spectrum, enumerate_spectrum, project

ILL_CONDITIONED = 1e14
MOMENT_ZERO_TOL = 1e-10


@dataclass
class ReconstructionReport:
    """Outcome of a reconstruction.

    ``recovered`` holds the estimate: ``{"t0": ...}``, ``{"grid": s, "mu": values}``
    or ``{"coefficients": ...}``.
    """

    method: str
    recovered: dict
    residual_norm: float
    condition_number: float
    regularization: dict = field(default_factory=dict)
    cutoff: int | None = None
    error: dict | None = None
    flags: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_number": self.condition_number,
            "cutoff": self.cutoff,
            "diagnostics": self.diagnostics,
            "error": self.error,
            "flags": self.flags,
            "method": self.method,
            "recovered": self.recovered,
            "regularization": self.regularization,
            "residual_norm": self.residual_norm,
        }


def _relative_error(estimate, truth) -> dict:
    estimate, truth = np.asarray(estimate, dtype=float), np.asarray(truth, dtype=float)
    diff = float(np.linalg.norm(estimate - truth))
    ref = float(np.linalg.norm(truth))
    return {"absolute": diff, "relative": diff / ref if ref > 0 else (0.0 if diff == 0 else math.inf)}


# ---------------------------------------------------------------------------
# moment sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSet:
    """Exponential moments m_n = int_0^T exp(lambda_n s) mu(s) ds (log-scaled), or
    trigonometric moments (S_n, C_n) at frequencies omega_n."""

    kind: str  # "exponential" | "trigonometric"
    nodes: np.ndarray  # lambda_n or omega_n
    T: float
    moments: tuple = ()  # LogScaled per node (exponential)
    S: np.ndarray | None = None
    C: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if self.kind not in ("exponential", "trigonometric"):
            raise ConfigError(f"unknown moment kind {self.kind!r}")
        if nodes.size == 0 or np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise ConfigError("moment nodes must be positive and strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        if self.kind == "exponential" and len(self.moments) != nodes.size:
            raise ConfigError("one moment per node is required")

    @classmethod
    def exponential(cls, lambdas, moments, T: float) -> "MomentSet":
        moments = tuple(m if isinstance(m, LogScaled) else LogScaled(float(m), 0.0) for m in moments)
        return cls("exponential", np.asarray(lambdas, dtype=float), float(T), moments)

    @classmethod
    def of_profile(cls, mu: TimeProfile, lambdas) -> "MomentSet":
        lambdas = np.asarray(lambdas, dtype=float)
        return cls.exponential(lambdas, [exponential_moment_scaled(mu, lam) for lam in lambdas], mu.support_end)

    @classmethod
    def trigonometric(cls, omegas, S, C, T: float) -> "MomentSet":
        return cls("trigonometric", np.asarray(omegas, dtype=float), float(T), (), np.asarray(S, float), np.asarray(C, float))

    def scaled(self) -> np.ndarray:
        """Moments relative to exp(lambda_n T)."""
        return np.array([m.rescaled(lam * self.T) for m, lam in zip(self.moments, self.nodes)])


# ---------------------------------------------------------------------------
# onset time (Neumann heat, one sample)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OnsetScenario:
    """Neumann heat problem with source theta(t - t0) f(x) observed once at (x0, T_star)."""

    spectrum: Spectrum
    f: SpatialProfile
    a: float
    x0: float | tuple
    T_star: float
    shape: str = "linear"
    n_max: int | None = None

    def __post_init__(self):
        if self.spectrum.bc != "neumann":
            raise ConfigError("onset-time recovery uses a Neumann spectrum")

    def forward(self, t0: float) -> float:
        sol = solve_heat(self.spectrum, self.f, StepDecay(t0, self.a, self.shape), self.n_max)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return float(sol.evaluate([self.x0], [self.T_star])[0, 0])


def recover_t0(scenario: OnsetScenario, y: float, bracket: tuple, xtol: float = 1e-9, truth: float | None = None) -> ReconstructionReport:
    """Onset time t0 from a single value y = u_{t0}(x0, T_star) by bisection.

    tau -> u_tau(x0, T_star) is increasing (a later onset means the source acts
    longer); three probes confirm this before bisecting.
    """
    lo, hi = map(float, bracket)
    if not (0 <= lo < hi < scenario.T_star - scenario.a):
        raise ConfigError("bracket must satisfy 0 <= t_lo < t_hi < T_star - a")
    evals: list[tuple[float, float]] = []

    def g(tau):
        v = scenario.forward(tau)
        evals.append((tau, v))
        return v

    u_lo, u_mid, u_hi = g(lo), g(0.5 * (lo + hi)), g(hi)
    slack = 1e-12 * max(abs(u_lo), abs(u_hi), 1e-300)
    if not (u_lo - slack <= u_mid <= u_hi + slack) or not u_hi > u_lo:
        raise NonMonotone(f"forward map not increasing on the bracket: {u_lo:.6g}, {u_mid:.6g}, {u_hi:.6g}")
    if not (u_lo - slack <= y <= u_hi + slack):
        raise ValueOutOfRange(f"observed value {y:.6g} outside [{u_lo:.6g}, {u_hi:.6g}] for the bracket")

    if abs(y - u_lo) <= slack:
        t_hat = lo
    elif abs(y - u_hi) <= slack:
        t_hat = hi
    else:
        t_hat = optimize.bisect(lambda tau: g(tau) - y, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)

    pts = sorted(evals)
    vals = np.array([v for _, v in pts])
    if np.any(np.diff(vals) < -1e-12 * np.max(np.abs(vals))):
        raise NonMonotone("forward evaluations violate monotonicity; increase n_max")

    # local sensitivity du/dtau by a central difference
    h = min(1e-4, 0.5 * (hi - lo))
    a_, b_ = max(lo, t_hat - h), min(hi, t_hat + h)
    slope = (scenario.forward(b_) - scenario.forward(a_)) / (b_ - a_)
    u_hat = scenario.forward(t_hat)
    lipschitz = 1.0 / abs(slope) if slope != 0 else math.inf
    report = ReconstructionReport(
        method="recover_t0",
        recovered={"t0": t_hat},
        residual_norm=abs(u_hat - y),
        condition_number=lipschitz * abs(y) / max(abs(t_hat), 1e-300),
        diagnostics={
            "bracket": [lo, hi],
            "bracket_lipschitz_ratio": (hi - lo) / (u_hi - u_lo),
            "evaluations": len(evals),
            "local_lipschitz_ratio": lipschitz,
            "slope": slope,
        },
    )
    if truth is not None:
        report.error = {"absolute": abs(t_hat - truth)}
    return report


# ---------------------------------------------------------------------------
# Dirichlet series fit of a heat point trace
# ---------------------------------------------------------------------------

MAX_DIRICHLET_TERMS = 12


@dataclass
class DirichletFit:
    """y(t) ~ sum_n gamma_n exp(-lambda_n t); gamma_n = m(lambda_n) (P_n f)(x0)."""

    lambdas: np.ndarray
    gamma: tuple  # LogScaled
    t_ref: float
    condition_number: float
    residual_norm: float
    unidentifiable: tuple
    ill_conditioned: bool

    def gamma_values(self) -> np.ndarray:
        return np.array([g.value() for g in self.gamma])

    def moments(self, point_projections, T: float) -> MomentSet:
        """Exponential moments m_n = gamma_n / (P_n f)(x0)."""
        point_projections = np.asarray(point_projections, dtype=float)[: len(self.lambdas)]
        return MomentSet.exponential(self.lambdas, [g / p for g, p in zip(self.gamma, point_projections)], T)

    def to_dict(self):
        return {
            "condition_number": self.condition_number,
            "gamma": list(self.gamma),
            "ill_conditioned": self.ill_conditioned,
            "lambdas": self.lambdas,
            "residual_norm": self.residual_norm,
            "t_ref": self.t_ref,
            "unidentifiable": list(self.unidentifiable),
        }


def fit_dirichlet_series(record: ObservationRecord, spectrum: Spectrum, N: int, column: int = 0) -> DirichletFit:
    """Least-squares fit of a post-source heat trace by N decaying exponentials.

    The design uses exp(-lambda_n (t - t_ref)) with t_ref the first sample,
    equilibrated columns and an SVD-based solve, so no normal equations are
    formed.  gamma_n is returned log-scaled: beta_n * exp(lambda_n t_ref).
    """
    if not 1 <= N <= MAX_DIRICHLET_TERMS:
        raise ConfigError(f"N must lie in 1..{MAX_DIRICHLET_TERMS}")
    if N > len(spectrum):
        raise InsufficientModes(f"spectrum has only {len(spectrum)} modes")
    t = record.times
    if record.source_end is not None and not t[0] > record.source_end:
        raise ConfigError("the trace must start after the source has switched off")
    y = record.values[:, column]
    lam = spectrum.eigenvalues[:N]
    t_ref = float(t[0])
    A = np.exp(-np.outer(t - t_ref, lam))
    norms = np.linalg.norm(A, axis=0)
    unident = tuple(int(j) + 1 for j in np.flatnonzero(norms < 1e-14 * norms.max()))
    scale = np.where(norms > 0, norms, 1.0)
    As = A / scale
    coef, _, rank, sv = np.linalg.lstsq(As, y, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    beta = coef / scale
    resid = float(np.linalg.norm(As @ coef - y))
    ill = cond > ILL_CONDITIONED or rank < N
    if ill:
        warnings.warn(f"Dirichlet design condition number {cond:.3g}", IllConditionedWarning, stacklevel=2)
    gamma = tuple(LogScaled(float(b), float(lj * t_ref)) for b, lj in zip(beta, lam))
    return DirichletFit(lam, gamma, t_ref, cond, resid, unident, ill)


# ---------------------------------------------------------------------------
# heat mu from exponential moments
# ---------------------------------------------------------------------------

MAX_GRID = 256
ALPHA_RANGE = (1e-14, 1e2)


def _moment_system(moments: MomentSet, M: int):
    T = moments.T
    s = np.linspace(0.0, T, M)
    h = s[1] - s[0]
    w = np.full(M, h)
    w[[0, -1]] = 0.5 * h
    lam = moments.nodes
    # row n scaled by exp(-lambda_n T): entries w_i exp(lambda_n (s_i - T)),
    # then normalised to unit length so every moment equation weighs the same
    K = w[None, :] * np.exp(np.outer(lam, s - T))
    row = np.linalg.norm(K, axis=1)
    return s, h, K / row[:, None], moments.scaled() / row


def _penalty(M: int, h: float, kind: str) -> np.ndarray:
    """Penalty on the free unknowns mu_0..mu_{M-2} (mu_{M-1} = mu(T) = 0 eliminated)."""
    if kind == "identity":
        return math.sqrt(h) * np.eye(M - 1)
    # first differences over the full vector including the pinned zero at s = T
    D = np.zeros((M - 1, M - 1))
    idx = np.arange(M - 1)
    D[idx, idx] = -1.0
    D[idx[:-1], idx[:-1] + 1] = 1.0
    return D / math.sqrt(h)


def _tikhonov(K, m, L, alpha):
    A = np.vstack([K, math.sqrt(alpha) * L])
    b = np.concatenate([m, np.zeros(L.shape[0])])
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x, float(np.linalg.norm(K @ x - m))


def recover_mu_heat(
    moments: MomentSet,
    M: int = 101,
    alpha: float | None = None,
    delta_target: float | None = None,
    penalty: str = "difference",
    truth: TimeProfile | None = None,
) -> ReconstructionReport:
    """Tikhonov-regularized inversion of exponential moments for mu on a uniform grid.

    Solves min ||K mu - m||^2 + alpha ||L mu||^2 for the scaled moments
    m_n exp(-lambda_n T), each equation divided by the norm of its row of
    trapezoid weights times kernel values (the residual and ``delta_target``
    are measured in these units), mu(T) = 0 imposed by
    elimination and L the first-difference (default) or identity penalty.
    With ``delta_target`` the parameter follows the discrepancy principle
    ||K mu - m|| = delta_target by bisection on log alpha.
    """
    if moments.kind != "exponential":
        raise ConfigError("recover_mu_heat needs exponential moments")
    if not 3 <= M <= MAX_GRID:
        raise ConfigError(f"grid size must lie in 3..{MAX_GRID}")
    if (alpha is None) == (delta_target is None):
        raise ConfigError("give exactly one of alpha or delta_target")
    s, h, K_full, m = _moment_system(moments, M)
    K = K_full[:, :-1]
    L = _penalty(M, h, penalty)
    flags = {}
    if delta_target is not None:
        lo, hi = map(math.log10, ALPHA_RANGE)
        r_lo = _tikhonov(K, m, L, 10**lo)[1]
        r_hi = _tikhonov(K, m, L, 10**hi)[1]
        if r_lo > delta_target:
            raise DiscrepancyUnattainable(
                f"residual {r_lo:.3g} at alpha={ALPHA_RANGE[0]:g} already exceeds the target {delta_target:.3g}"
            )
        if r_hi <= delta_target:
            log_alpha = hi
            flags["alpha_at_upper_bound"] = True
        else:
            log_alpha = optimize.bisect(
                lambda la: _tikhonov(K, m, L, 10**la)[1] - delta_target, lo, hi, xtol=1e-4, maxiter=200
            )
        alpha = 10**log_alpha
        method = "discrepancy"
    else:
        if not alpha > 0:
            raise ConfigError("alpha must be positive")
        method = "fixed"
    x, resid = _tikhonov(K, m, L, alpha)
    mu_hat = np.append(x, 0.0)
    sv = np.linalg.svd(K, compute_uv=False)
    rank = int(np.sum(sv > sv[0] * 1e-15)) if sv.size and sv[0] > 0 else 0
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
    flags["rank_deficient"] = bool(len(m) < 2 or rank < min(len(m), M - 1))
    if cond > ILL_CONDITIONED:
        flags["ill_conditioned"] = True
    report = ReconstructionReport(
        method="recover_mu_heat",
        recovered={"grid": s, "mu": mu_hat},
        residual_norm=resid,
        condition_number=cond,
        regularization={"alpha": alpha, "method": method, "penalty": penalty, "target": delta_target},
        flags=flags,
        diagnostics={"moments_used": len(m), "rank": rank},
    )
    if truth is not None:
        report.error = _relative_error(mu_hat, truth(s))
    return report


# ---------------------------------------------------------------------------
# 1-D wave mu from a point trace
# ---------------------------------------------------------------------------


def _window_samples(record: ObservationRecord, T1: float, period: float, column: int):
    t = record.times
    dt = record.dt
    if dt <= 0:
        raise ConfigError("the record needs at least two samples")
    P = period / dt
    if abs(P - round(P)) > 1e-6:
        raise ConfigError(f"window length {period:g} is not a multiple of the sample step {dt:g}")
    P = int(round(P))
    k0 = (T1 - t[0]) / dt
    if abs(k0 - round(k0)) > 1e-6 or round(k0) < 0:
        raise ConfigError("window start must be a sample time of the record")
    k0 = int(round(k0))
    if k0 + P > len(t):
        raise ConfigError(f"record ends at {t[-1]:g}; the window needs samples up to {T1 + period - dt:g}")
    return t[k0 : k0 + P], record.values[k0 : k0 + P, column], dt


def recover_mu_wave_1d(
    record: ObservationRecord,
    domain: Interval,
    f: SpatialProfile,
    x0: float,
    T: float,
    n_modes: int = 64,
    T1: float | None = None,
    override: bool = False,
    n_grid: int = 1001,
    truth: TimeProfile | None = None,
    column: int = 0,
) -> ReconstructionReport:
    """Constructive recovery of mu from u(x0, t) on the window [T1, T1 + 2l].

    Windowed Fourier coefficients of the trace against sin/cos(m pi t / l)
    (periodic trapezoid rule) are divided by (f, phi_m) phi_m(x0), giving the
    trig moments A_m = int mu cos(m pi s / l), B_m = int mu sin(m pi s / l).
    mu is then synthesized on [0, 2l] as a Fourier series whose constant is
    fixed by requiring zero mean on [T, 2l].
    """
    ell = domain.length
    period = 2 * ell
    if T1 is None:
        T1 = float(record.times[0])
    if abs(T - period) <= 1e-12 * period:
        raise ConstantUnpinnable("T = 2l leaves the constant term undetermined")
    if not override:
        report15 = check_theorem3_conditions(domain, x0, f, T, T1, float(record.times[-1]), n_modes)
        if not report15.holds:
            raise ConditionViolated(
                f"point-trace requirements fail: {report15.evidence.get('certificate')}", "1.15", report15.indices
            )
    if T > period:
        raise ConditionViolated(f"T = {T:g} exceeds 2l = {period:g}", "1.15")
    times, y, dt = _window_samples(record, T1, period, column)

    spectrum = enumerate_spectrum(domain, n_modes)
    pc = project(spectrum, f, n_modes, point=[x0])
    d = pc.point_values
    m = np.arange(1, n_modes + 1)
    w = m * math.pi / ell
    phase = np.outer(times, w)
    s_hat = (dt / ell) * (y @ np.sin(phase))
    c_hat = (dt / ell) * (y @ np.cos(phase))

    skipped = [int(k) for k in m[np.abs(d) < 1e-12]]
    if skipped:
        warnings.warn(f"modes {skipped} vanish at x0 and are skipped", ModeDivideByZeroWarning, stacklevel=2)
    use = np.abs(d) >= 1e-12
    a = np.where(use, s_hat / np.where(use, d, 1.0), 0.0)
    b = np.where(use, c_hat / np.where(use, d, 1.0), 0.0)
    A = w * a  # int mu cos(w s)
    B = -w * b  # int mu sin(w s)

    # zero mean of the series on [T, 2l] fixes the constant term
    span = period - T
    cos_mean = -np.sin(w * T) / (w * span)
    sin_mean = (np.cos(w * T) - 1.0) / (w * span)
    c0 = -float(np.sum(A * cos_mean + B * sin_mean)) / ell

    s = np.linspace(0.0, period, n_grid)
    arg = np.outer(s, w)
    mu_hat = c0 + (np.cos(arg) @ A + np.sin(arg) @ B) / ell

    fitted = np.sin(phase) @ (a * d) + np.cos(phase) @ (b * d)
    resid = float(np.linalg.norm(fitted - y) * math.sqrt(dt))
    dm = np.abs(d[use])
    cond = float(dm.max() / dm.min()) if dm.size else math.inf
    report = ReconstructionReport(
        method="recover_mu_wave_1d",
        recovered={"A": A, "B": B, "constant": c0, "grid": s, "mu": mu_hat},
        residual_norm=resid,
        condition_number=cond,
        cutoff=n_modes,
        flags={"overridden": bool(override), "skipped_modes": skipped},
        diagnostics={"T1": T1, "samples_per_window": len(times), "window": [T1, T1 + period]},
    )
    if truth is not None:
        ref = truth(s)
        diff = mu_hat - ref
        # trapezoid L2 norms on [0, 2l]
        l2 = lambda v: math.sqrt(integrate.trapezoid(v * v, s))  # noqa: E731
        report.error = {
            "absolute": l2(diff),
            "max": float(np.max(np.abs(diff))),
            "relative": l2(diff) / l2(ref) if l2(ref) > 0 else (0.0 if l2(diff) == 0 else math.inf),
        }
    return report


# ---------------------------------------------------------------------------
# heat f from a post-source state
# ---------------------------------------------------------------------------


def heat_cutoff(eta: float, smoothness: float, theta: float, dim: int) -> int:
    """N(eta) = ceil(log(1/eta)^(theta/theta0)) with theta0 = 2 * smoothness / dim."""
    theta0 = 2.0 * smoothness / dim
    return max(1, math.ceil(math.log(1.0 / eta) ** (theta / theta0)))


def recover_f_heat(
    state,
    mu: TimeProfile,
    spectrum: Spectrum,
    t_tilde: float,
    eta: float,
    smoothness: float,
    theta: float | None = None,
    M: float | None = None,
    cutoff: int | None = None,
    truth=None,
) -> ReconstructionReport:
    """Spectral-cutoff recovery of (f, phi_j) from the coefficients of u(., t_tilde).

    (u(t_tilde), phi_j) = p_j (f, phi_j) with p_j = exp(-sigma_j t_tilde) m(sigma_j);
    division is carried out in log-scaled arithmetic up to the cutoff
    N(eta) = ceil(log(1/eta)^(theta/theta0)), theta0 = 2 * smoothness / d.
    ``eta`` is the size of the data error.  ``M`` bounds ||A^smoothness f||;
    when omitted it is taken from ``truth`` if given, else from the estimate.
    """
    if not 0 < eta < 1:
        raise EtaOutOfRange(f"eta = {eta:g} must lie in (0, 1)")
    if not smoothness > 0:
        raise ConfigError("smoothness must be positive")
    if theta is None:
        theta = 0.5 * smoothness
    if not 0 < theta < smoothness:
        raise ConfigError("theta must lie in (0, smoothness)")
    state = np.asarray(state, dtype=float)
    K = state.size
    T = mu.support_end
    if not t_tilde > T:
        raise ConfigError("t_tilde must exceed the source end T")
    sigma = spectrum.sigma[:K]
    if sigma.size < K:
        raise InsufficientModes("state has more coefficients than the spectrum")
    d = spectrum.dim
    N_rule = heat_cutoff(eta, smoothness, theta, d)
    N = N_rule if cutoff is None else int(cutoff)
    flags = {}
    if N > K:
        flags["cutoff_clipped"] = N
        N = K

    # log|p_j| = log|m(sigma_j)| - sigma_j t_tilde, with m kept log-scaled
    log_m = np.empty(N)
    sign = np.empty(N)
    zero = []
    for j in range(N):
        m = exponential_moment_scaled(mu, sigma[j])
        if abs(m.mantissa) <= MOMENT_ZERO_TOL * mu.abs_weighted(sigma[j]):
            zero.append(j + 1)
            continue
        log_m[j], sign[j] = m.log_abs(), m.sign()
    if zero:
        raise MomentZero(f"p_j vanishes for j = {zero}: f is not determined by the state", zero)
    log_inv_p = sigma[:N] * t_tilde - log_m
    coef = np.zeros(K)
    with np.errstate(over="ignore"):
        coef[:N] = sign * state[:N] * np.exp(log_inv_p)
    if not np.all(np.isfinite(coef)):
        flags["overflow"] = True
        coef[~np.isfinite(coef)] = 0.0

    truth_coef = None
    if truth is not None:
        truth_coef = np.zeros(K)
        tc = np.asarray(truth, dtype=float)[:K]
        truth_coef[: tc.size] = tc
    if M is None:
        ref = truth_coef if truth_coef is not None else coef
        M = float(np.sqrt(np.sum(sigma ** (2 * smoothness) * ref**2)))
        flags["M_source"] = "truth" if truth_coef is not None else "estimate"

    def bound(n: int) -> dict:
        n = int(min(max(n, 1), K))
        lip = np.array([sigma[j] * t_tilde - _log_moment(mu, sigma[j]) for j in range(n)])
        log_amp = float(np.max(lip))
        noise = math.exp(min(log_amp + math.log(eta), 700.0))
        tail = M / sigma[n - 1] ** smoothness
        return {"N": n, "log_amplification": log_amp, "noise_term": noise, "tail_term": tail, "total": noise + tail}

    at_N = bound(N)
    resid = float(np.linalg.norm(state[N:]))
    report = ReconstructionReport(
        method="recover_f_heat",
        recovered={"coefficients": coef},
        residual_norm=resid,
        condition_number=float(math.exp(min(np.max(log_inv_p) - np.min(log_inv_p), 700.0))),
        regularization={"cutoff_rule": N_rule, "eta": eta, "method": "spectral_cutoff", "smoothness": smoothness, "theta": theta},
        cutoff=N,
        flags=flags,
        diagnostics={
            "M": M,
            "bound": at_N,
            "bound_double": bound(2 * N),
            "bound_half": bound(max(N // 2, 1)),
            "log10_condition_number": float((np.max(log_inv_p) - np.min(log_inv_p)) / math.log(10)),
            "theta0": 2.0 * smoothness / d,
        },
    )
    if truth_coef is not None:
        report.error = _relative_error(coef, truth_coef)
    return report


def _log_moment(mu, lam):
    return exponential_moment_scaled(mu, lam).log_abs()


# ---------------------------------------------------------------------------
# wave f from (u(T), u_t(T))
# ---------------------------------------------------------------------------

GAIN_FLOOR = 1e-24


def recover_f_wave(
    u_state,
    v_state,
    mu: TimeProfile,
    spectrum: Spectrum,
    t_state: float | None = None,
    truth=None,
) -> ReconstructionReport:
    """Modal recovery of (f, phi_n) from the coefficients of u and u_t at one time.

    With S~ = int mu sin(w(T-s))/w and C = int mu cos(w(T-s)), the state at T
    is alpha = S~ P f, beta = C P f and P f = (S~ alpha + C beta)/(S~^2 + C^2).
    States at t > T are first rotated back to T by the free evolution.
    Reports the modal gains J_n = lambda_n (S^2 + C^2) and their floor mu_0.
    """
    u_state = np.asarray(u_state, dtype=float)
    v_state = np.asarray(v_state, dtype=float)
    if u_state.shape != v_state.shape:
        raise ConfigError("u and u_t coefficient vectors must have equal length")
    K = u_state.size
    sigma = spectrum.sigma[:K]
    if sigma.size < K:
        raise InsufficientModes("state has more coefficients than the spectrum")
    T = float(mu.support_end)
    t_state = T if t_state is None else float(t_state)
    if t_state < T:
        raise ConfigError("the state must be taken at or after the source end")
    w = np.sqrt(sigma)
    tau = t_state - T
    alpha = u_state * np.cos(w * tau) - v_state / w * np.sin(w * tau)
    beta = u_state * w * np.sin(w * tau) + v_state * np.cos(w * tau)

    SC = np.array([trig_moments(mu, wn, T) for wn in w])
    S, C = SC[:, 0], SC[:, 1]
    St = S / w
    denom = St**2 + C**2
    bad = [int(j) + 1 for j in np.flatnonzero(denom < GAIN_FLOOR)]
    if bad:
        raise ConditionViolated(f"trigonometric moments vanish for modes {bad}", "1.31", bad)
    coef = (St * alpha + C * beta) / denom
    J = sigma * (S**2 + C**2)
    mu0_sq = float(mu(0.0)) ** 2
    # first index after which every computed gain stays above mu(0)^2 / 2
    above = J >= 0.5 * mu0_sq
    tail_start = K
    while tail_start > 0 and above[tail_start - 1]:
        tail_start -= 1
    mu0 = float(min(np.min(J[: tail_start + 1]) if tail_start < K else np.min(J), 0.5 * mu0_sq)) if mu0_sq > 0 else float(np.min(J))
    resid = float(np.linalg.norm(np.concatenate([St * coef - alpha, C * coef - beta])))
    cond = float(np.sqrt(np.max(denom) / np.min(denom)))
    report = ReconstructionReport(
        method="recover_f_wave",
        recovered={"coefficients": coef},
        residual_norm=resid,
        condition_number=cond,
        cutoff=K,
        diagnostics={
            "gain_deviation_last": float(abs(J[-1] - mu0_sq) / mu0_sq) if mu0_sq > 0 else None,
            "gains": J,
            "mu0": mu0,
            "mu_at_zero_squared": mu0_sq,
            "mu_at_T": float(mu(T - 1e-12 * max(T, 1.0))),
        },
    )
    if truth is not None:
        report.error = _relative_error(coef, np.asarray(truth, dtype=float)[:K])
    return report


# ---------------------------------------------------------------------------
# non-uniqueness and zero-interval structure
# ---------------------------------------------------------------------------


def build_nonuniqueness_example(spectrum: Spectrum, T: float, tol: float = 1e-12) -> ExpLinear:
    """mu*(s) = exp(-lambda_1 s)(s - T/2) on [0, T]: its lambda_1-moment vanishes.

    exp(lambda_1 s) mu*(s) = s - T/2 has zero mean on [0, T].  The moment is
    checked by quadrature relative to int |mu*| exp(lambda_1 s).
    """
    if not T > 0:
        raise ConfigError("T must be positive")
    lam1 = float(spectrum.eigenvalues[0])
    mu = ExpLinear(lam1, 0.5 * T, float(T))
    scale = mu.abs_weighted(lam1)
    # the exact value is zero, which defeats adaptive error control; a fixed
    # Gauss rule on each half integrates the smooth integrand to roundoff
    check = sum(
        integrate.fixed_quad(lambda s: np.exp(lam1 * (s - T)) * mu(s), a, b, n=40)[0]
        for a, b in ((0.0, 0.5 * T), (0.5 * T, T))
    )
    if abs(check) > tol * max(scale, 1e-300) and abs(check) > 1e-15:
        raise ArithmeticError(f"constructed moment {check:.3e} is not zero")
    return mu


def leading_zero_time(record: ObservationRecord, rtol: float = 1e-8, column: int = 0) -> float:
    """First sample time at which |record| exceeds ``rtol`` times its maximum."""
    v = np.abs(record.values[:, column])
    peak = float(np.max(v, initial=0.0))
    if peak == 0:
        return float(record.times[-1])
    return float(record.times[int(np.argmax(v > rtol * peak))])


def mu_zero_interval(record: ObservationRecord, equation: str, domain: Interval, rtol: float = 1e-8) -> float:
    """Length of the initial interval on which mu must vanish given a leading zero trace.

    A trace vanishing on (0, L) forces mu = 0 on (0, L - lag) with lag = 0 for
    the heat equation and lag = l (one crossing of the interval) for the wave
    equation.
    """
    L = leading_zero_time(record, rtol)
    lag = 0.0 if equation == "heat" else domain.length
    return max(0.0, L - lag)


__all__ = [
    "ReconstructionReport",
    "MomentSet",
    "OnsetScenario",
    "DirichletFit",
    "recover_t0",
    "fit_dirichlet_series",
    "recover_mu_heat",
    "recover_mu_wave_1d",
    "recover_f_heat",
    "heat_cutoff",
    "recover_f_wave",
    "build_nonuniqueness_example",
    "leading_zero_time",
    "mu_zero_interval",
]
