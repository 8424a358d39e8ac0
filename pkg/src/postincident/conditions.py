"""Checks of the conditions the uniqueness and stability results rely on.

Every check returns a :class:`ConditionReport` whose verdict is one of
``Holds``, ``Fails`` or ``Undecidable``.  Statements about infinite sums and
limits cannot be decided from finitely many modes; the verdicts below are
rule-based (Weyl exponent, density of the excluded index set, flatness of a
tail) and the numeric payload is attached as evidence only.

Condition ids
-------------
``"1.12"``       divergence of sum 1/lambda_j over modes visible at x0
``"1.22"``       the same sum over modes with nonzero projection
``"1.16/1.17"``  positive density limit lim k/sqrt(lambda_k) (visible at x0)
``"1.23/1.25"``  the same limit over modes with nonzero projection
``"1.15"``       1-D wave point-trace requirements
``"1.29"``       nonvanishing exponential moments
``"1.31"``       nonvanishing trigonometric moments
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InsufficientModes
from .sources import TimeProfile, exponential_moment_scaled, trig_moments
from .spectra import Interval, Spectrum, classify_tail, enumerate_spectrum, project

HOLDS, FAILS, UNDECIDABLE = "Holds", "Fails", "Undecidable"
CONDITION_IDS = ("1.12", "1.15", "1.16/1.17", "1.22", "1.23/1.25", "1.29", "1.31")
MOMENT_TOL = 1e-10


@dataclass
class ConditionReport:
    condition: str
    verdict: str
    evidence: dict = field(default_factory=dict)
    tolerance: float | None = None
    indices: tuple = ()

    def __post_init__(self):
        if self.condition not in CONDITION_IDS:
            raise ValueError(f"unknown condition id {self.condition!r}")
        if self.verdict not in (HOLDS, FAILS, UNDECIDABLE):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        self.indices = tuple(int(i) for i in self.indices)
        if self.verdict == FAILS and not self.indices and "certificate" not in self.evidence:
            raise ValueError("a failing report needs offending indices or a certificate")

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "evidence": self.evidence,
            "indices": list(self.indices),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


# ---------------------------------------------------------------------------
# exceptional sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExceptionalSet:
    """Lambda(x0) (invisible at the point) and the projection variant Lambda-tilde."""

    point: frozenset
    projection: frozenset
    point_values: np.ndarray
    norms: np.ndarray
    j_max: int
    tol: float

    def to_dict(self):
        return {
            "j_max": self.j_max,
            "point": sorted(self.point),
            "projection": sorted(self.projection),
            "tol": self.tol,
        }


def _relative_zeros(values: np.ndarray, tol: float) -> frozenset:
    mags = np.abs(values)
    scale = float(np.max(mags, initial=0.0))
    return frozenset(int(j) + 1 for j in np.flatnonzero(mags <= tol * scale))


def exceptional_set(spectrum: Spectrum, f, x0, j_max: int, tol: float = 1e-10) -> ExceptionalSet:
    """Indices j <= j_max with (P_j f)(x0) ~ 0 and with P_j f ~ 0, relative to the largest.

    With ``x0=None`` only the projection set is computed and the point set is empty.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    pc = project(spectrum, f, j_max, point=x0)
    if x0 is None:
        return ExceptionalSet(frozenset(), _relative_zeros(pc.norms(), tol), np.zeros(0), pc.norms(), j_max, tol)
    return ExceptionalSet(
        _relative_zeros(pc.point_values, tol),
        _relative_zeros(pc.norms(), tol),
        pc.point_values,
        pc.norms(),
        j_max,
        tol,
    )


# ---------------------------------------------------------------------------
# Muntz divergence
# ---------------------------------------------------------------------------


def _interval_reciprocal_sum(domain: Interval) -> float:
    # sum_{n>=1} l^2 / (n pi)^2 = l^2 / 6 for both boundary conditions (lambda = 0 omitted)
    return domain.length**2 / 6.0


def muntz_classify(spectrum: Spectrum, excluded=(), condition: str = "1.12") -> ConditionReport:
    """Classify divergence of sum 1/lambda_j over the non-excluded distinct modes.

    d = 1: Fails, with the convergent majorant sum_j 1/lambda_j < inf as certificate.
    d >= 2: Holds when no excluded index lies in the upper half of the enumerated
    range (finite excluded set), otherwise Undecidable (positive density).
    """
    if condition not in ("1.12", "1.22"):
        raise ValueError("muntz_classify reports condition '1.12' or '1.22'")
    excluded = frozenset(int(j) for j in excluded)
    lam = spectrum.eigenvalues
    J = len(lam)
    idx = np.arange(1, J + 1)
    keep = np.array([j not in excluded for j in idx]) & (lam > 0)
    partial = np.cumsum(np.where(keep, 1.0 / np.where(lam > 0, lam, 1.0), 0.0))
    in_range = sorted(j for j in excluded if j <= J)
    upper = [j for j in in_range if j > J // 2]
    evidence = {
        "dimension": spectrum.dim,
        "enumerated": J,
        "excluded_count": len(in_range),
        "excluded_density": len(in_range) / J,
        "excluded_upper_half_density": len(upper) / max(J - J // 2, 1),
        "partial_sum": float(partial[-1]),
        "partial_sums_at": {str(n): float(partial[n - 1]) for n in (10, 20, 40, 80, 160) if n <= J},
        "weyl_exponent": 2.0 / spectrum.dim,
    }
    if spectrum.dim == 1:
        total = _interval_reciprocal_sum(spectrum.domain)
        evidence["analytic_sum_all_modes"] = total
        evidence["certificate"] = "convergent majorant: lambda_j ~ j^2, sum over all modes is finite"
        return ConditionReport(condition, FAILS, evidence)
    if not upper:
        evidence["rule"] = "d >= 2, weyl exponent 2/d <= 1 and excluded set finite"
        return ConditionReport(condition, HOLDS, evidence)
    evidence["rule"] = "excluded set has positive density among enumerated modes"
    return ConditionReport(condition, UNDECIDABLE, evidence, indices=())


# ---------------------------------------------------------------------------
# density limit
# ---------------------------------------------------------------------------

MIN_DENSITY_MODES = 30


def density_limit(spectrum: Spectrum, excluded=(), T: float | None = None, condition: str = "1.16/1.17", flat_tol: float = 0.05) -> ConditionReport:
    """Estimate D = lim k / sqrt(lambda_k) over non-excluded modes and T_max = pi D.

    Tail averaging over the last third of the sequence; a flat tail (relative
    oscillation below ``flat_tol``) yields D, a steadily growing tail yields
    D = inf, anything else is Undecidable.  When ``T`` is given the verdict
    also requires T < T_max.
    """
    if condition not in ("1.16/1.17", "1.23/1.25"):
        raise ValueError("density_limit reports condition '1.16/1.17' or '1.23/1.25'")
    excluded = frozenset(int(j) for j in excluded)
    lam = spectrum.eigenvalues
    keep = [i for i in range(len(lam)) if (i + 1) not in excluded and lam[i] > 0]
    if len(keep) < MIN_DENSITY_MODES:
        raise InsufficientModes(f"density_limit needs {MIN_DENSITY_MODES} non-excluded modes, got {len(keep)}")
    k = np.arange(1, len(keep) + 1)
    seq = k / np.sqrt(lam[keep])
    trend, tail, osc, slope = classify_tail(k, seq, flat_tol)
    evidence = {
        "modes_used": len(keep),
        "tail_oscillation": osc,
        "tail_slope": slope,
        "tail_values": seq[-5:],
        "trend": trend,
    }
    if trend == "flat":
        D = tail
    elif trend == "diverging":
        D = math.inf
    else:
        evidence.update(D=None, T_max=None)
        return ConditionReport(condition, UNDECIDABLE, evidence, flat_tol)
    T_max = math.pi * D
    evidence.update(D=D, T_max=T_max, T_max_infinite=math.isinf(T_max))
    if T is not None:
        evidence["T"] = T
        if not T < T_max:
            evidence["certificate"] = f"T = {T:g} is not below pi * D = {T_max:g}"
            return ConditionReport(condition, FAILS, evidence, flat_tol)
    verdict = HOLDS if D > 0 else FAILS
    if verdict == FAILS:
        evidence["certificate"] = "density limit is zero"
    return ConditionReport(condition, verdict, evidence, flat_tol)


# ---------------------------------------------------------------------------
# moment conditions
# ---------------------------------------------------------------------------


def check_moment_conditions(spectrum: Spectrum, mu: TimeProfile, n_max: int, tol: float = MOMENT_TOL, which=("1.29", "1.31")) -> list[ConditionReport]:
    """Nonvanishing of exponential moments (``"1.29"``) and trig moment pairs (``"1.31"``).

    A moment counts as zero when it is below ``tol`` times the scale
    int |mu(s)| exp(lambda s) ds (both kept relative to exp(lambda T)), resp.
    when sqrt(S^2 + C^2) is below ``tol`` times int |mu|.
    """
    if n_max > len(spectrum):
        raise ValueError(f"n_max={n_max} exceeds spectrum size {len(spectrum)}")
    lam = spectrum.eigenvalues[:n_max]
    reports = []
    if "1.29" in which:
        bad, ratios = [], []
        for j, lj in enumerate(lam, start=1):
            m = exponential_moment_scaled(mu, lj)
            scale = mu.abs_weighted(lj)
            ratio = abs(m.mantissa) / scale if scale > 0 else 0.0
            ratios.append(ratio)
            if ratio <= tol:
                bad.append(j)
        evidence = {"min_relative_moment": float(min(ratios)), "n_max": n_max, "relative_moments": ratios[:10]}
        verdict = FAILS if bad else HOLDS
        if bad and mu.abs_weighted(0.0) == 0.0:
            evidence["certificate"] = "mu vanishes identically"
        reports.append(ConditionReport("1.29", verdict, evidence, tol, bad))
    if "1.31" in which:
        scale = mu.abs_weighted(0.0)
        bad, ratios = [], []
        for j, lj in enumerate(lam, start=1):
            if lj <= 0:
                continue
            S, C = trig_moments(mu, math.sqrt(lj))
            ratio = math.hypot(S, C) / scale if scale > 0 else 0.0
            ratios.append(ratio)
            if ratio <= tol:
                bad.append(j)
        evidence = {"min_relative_moment": float(min(ratios)) if ratios else 0.0, "n_max": n_max}
        reports.append(ConditionReport("1.31", FAILS if bad else HOLDS, evidence, tol, bad))
    return reports


# ---------------------------------------------------------------------------
# 1-D wave point-trace requirements
# ---------------------------------------------------------------------------

RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_TOL = 1e-9
# sampled windows end at T1 + k dt, which may fall short of T1 + 2l by rounding
WINDOW_SLACK = 1e-9


def rational_approximation(r: float, max_den: int = RATIONAL_MAX_DENOMINATOR, tol: float = RATIONAL_TOL):
    """Best p/q with q <= max_den if |r - p/q| <= tol, else None."""
    frac = Fraction(r).limit_denominator(max_den)
    return frac if abs(r - float(frac)) <= tol else None


def check_theorem3_conditions(domain: Interval, x0: float, f, T: float, T1: float, T2: float, n_max: int = 64, tol: float = 1e-10) -> ConditionReport:
    """Requirements for 1-D wave mu-recovery from u(x0, t) on (T1, T2).

    x0 / l irrational (heuristic: no p/q with q <= 64 within 1e-9), T <= 2l,
    T2 - T1 >= 2l and (f, phi_n) != 0 for n <= n_max.
    """
    if not isinstance(domain, Interval):
        raise ValueError("the point-trace wave conditions are one-dimensional")
    ell = domain.length
    r = float(x0) / ell
    frac = rational_approximation(r)
    bad: set[int] = set()
    failures = []
    evidence = {
        "T": T,
        "T_le_2l": T <= 2 * ell,
        "heuristic_irrational": frac is None,
        "irrationality_test": f"no p/q with q <= {RATIONAL_MAX_DENOMINATOR} within {RATIONAL_TOL:g}",
        "window": T2 - T1,
        "window_ge_2l": T2 - T1 >= 2 * ell - WINDOW_SLACK * ell,
    }
    if frac is not None:
        evidence["rational_approximation"] = [frac.numerator, frac.denominator]
        # phi_n(x0) = 0 exactly when q divides n
        bad.update(n for n in range(1, n_max + 1) if n % frac.denominator == 0)
        failures.append(f"x0/l = {frac.numerator}/{frac.denominator}")
    if not T <= 2 * ell:
        failures.append(f"T = {T:g} > 2l = {2 * ell:g}")
    if not T2 - T1 >= 2 * ell - WINDOW_SLACK * ell:
        failures.append(f"window length {T2 - T1:g} < 2l = {2 * ell:g}")
    spectrum = enumerate_spectrum(domain, n_max)
    coef = project(spectrum, f, n_max).flat()
    zero_proj = sorted(int(j) + 1 for j in np.flatnonzero(np.abs(coef) <= tol * np.max(np.abs(coef), initial=0.0)))
    evidence["zero_projection_indices"] = zero_proj
    if zero_proj:
        bad.update(zero_proj)
        failures.append("vanishing projections")
    if failures:
        evidence["certificate"] = "; ".join(failures)
        return ConditionReport("1.15", FAILS, evidence, tol, sorted(bad))
    return ConditionReport("1.15", HOLDS, evidence, tol)


__all__ = [
    "ConditionReport",
    "ExceptionalSet",
    "HOLDS",
    "FAILS",
    "UNDECIDABLE",
    "exceptional_set",
    "muntz_classify",
    "density_limit",
    "check_moment_conditions",
    "check_theorem3_conditions",
    "rational_approximation",
]
