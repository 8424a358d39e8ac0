"""Source factors: time profiles mu(t) with compact support and spatial profiles f(x).

Time profiles know how to integrate themselves against exponential kernels,

    int_lo^hi exp(z (anchor - s)) mu(s) ds,

exactly on linear pieces and by adaptive quadrature on smooth pieces.  All
moments and Duhamel coefficients used elsewhere are built on that one
primitive (:meth:`TimeProfile.duhamel`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._kernels import LogScaled, kernel_integral
from .errors import ConfigError, OverflowRisk

OVERFLOW_GUARD = 700.0

# ---------------------------------------------------------------------------
# time profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Linear:
    a: float
    b: float
    va: float
    vb: float


@dataclass(frozen=True)
class _Smooth:
    a: float
    b: float


def _bump_shape(x):
    """exp(1 - 1/(1 - x^2)) on |x| < 1, zero outside; peak value 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out


# integral of the bump shape over (-1, 1)
_BUMP_MASS = integrate.quad(lambda x: float(_bump_shape(x)), -1.0, 1.0, epsabs=0, epsrel=1e-13)[0]


class TimeProfile:
    """Base class.  Subclasses define ``support_end`` and ``_segments``."""

    support_end: float

    def _segments(self) -> list:
        raise NotImplementedError

    def __call__(self, t):
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        pts = {0.0, float(self.support_end)}
        for seg in self._segments():
            pts.update((seg.a, seg.b))
        return sorted(pts)

    @property
    def active_end(self) -> float:
        """Right end of the set where mu can be nonzero (at most ``support_end``).

        Exponential moments are scaled relative to exp(lam * active_end); a
        profile that switches off before T would otherwise underflow.
        """
        ends = [seg.b for seg in self._segments() if not (isinstance(seg, _Linear) and seg.va == 0 and seg.vb == 0)]
        return min(max(ends), float(self.support_end)) if ends else float(self.support_end)

    @property
    def is_piecewise_linear(self) -> bool:
        return all(isinstance(s, _Linear) for s in self._segments())

    def duhamel(self, z, anchor: float, lo: float = 0.0, hi: float | None = None):
        """Return ``int_lo^hi exp(z (anchor - s)) mu(s) ds`` for each z (complex array).

        Requires ``anchor >= hi`` so the kernel never grows when Re z <= 0.
        The upper limit defaults to ``min(anchor, support_end)``.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if hi is None:
            hi = min(anchor, self.support_end)
        hi = min(hi, self.support_end)
        out = np.zeros(z.shape, dtype=complex)
        if hi <= lo:
            return out
        for seg in self._segments():
            a, b = max(seg.a, lo), min(seg.b, hi)
            if b <= a:
                continue
            if isinstance(seg, _Linear):
                out += _linear_piece(z, anchor, seg, a, b)
            else:
                out += self._smooth_piece(z, anchor, a, b)
        return out

    def _smooth_piece(self, z, anchor, a, b):
        out = np.empty(z.shape, dtype=complex)
        for i, zi in enumerate(z):
            out[i] = _quad_kernel(self, complex(zi), anchor, a, b)
        return out

    def integral(self) -> float:
        return float(self.duhamel(0.0, self.support_end)[0].real)

    def abs_weighted(self, lam: float) -> float:
        """``int_0^A |mu(s)| exp(lam (s - A)) ds``, A = ``active_end``, by quadrature.

        The scale for zero tests of the moment mantissas, which share the anchor A.
        """
        T = self.active_end
        pts = [p for p in self.breakpoints() if p <= T]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(
                lambda s: abs(float(self(s))) * math.exp(lam * (s - T)),
                a,
                b,
                limit=200,
                epsabs=0.0,
                epsrel=1e-10,
            )
            total += val
        return total

    def to_dict(self) -> dict:
        raise NotImplementedError


def _linear_piece(z, anchor, seg: _Linear, a: float, b: float):
    # value and slope of the (possibly clipped) linear piece
    slope = (seg.vb - seg.va) / (seg.b - seg.a)
    vb = seg.va + slope * (b - seg.a)
    h = b - a
    # s = b - r  =>  exp(z(anchor - b)) * int_0^h exp(z r) (vb - slope r) dr
    pref = np.exp(z * (anchor - b))
    return pref * (vb * kernel_integral(0, z, h) - slope * kernel_integral(1, z, h))


def _quad_kernel(profile, z: complex, anchor: float, a: float, b: float) -> complex:
    """Adaptive quadrature of exp(z(anchor - s)) mu(s) over [a, b]."""
    opts = dict(limit=500, epsabs=0.0, epsrel=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if z.imag == 0.0:
            x = z.real
            val, err = integrate.quad(lambda s: math.exp(x * (anchor - s)) * float(profile(s)), a, b, **opts)
            return complex(val, 0.0)
        if z.real == 0.0:
            w = z.imag
            # exp(i w (A - s)) = cos(w(A-s)) + i sin(w(A-s)), expand in cos(ws), sin(ws)
            f = lambda s: float(profile(s))  # noqa: E731
            ic, _ = integrate.quad(f, a, b, weight="cos", wvar=w, **opts)
            is_, _ = integrate.quad(f, a, b, weight="sin", wvar=w, **opts)
            ca, sa = math.cos(w * anchor), math.sin(w * anchor)
            return complex(ca * ic + sa * is_, sa * ic - ca * is_)
        re, _ = integrate.quad(
            lambda s: (np.exp(z * (anchor - s)) * float(profile(s))).real, a, b, **opts
        )
        im, _ = integrate.quad(
            lambda s: (np.exp(z * (anchor - s)) * float(profile(s))).imag, a, b, **opts
        )
        return complex(re, im)


@dataclass(frozen=True)
class Ramp(TimeProfile):
    """mu(s) = T - s on [0, T]."""

    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("Ramp needs T > 0")

    @property
    def support_end(self):
        return self.T

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t < self.T), self.T - t, 0.0)

    def _segments(self):
        return [_Linear(0.0, self.T, self.T, 0.0)]

    def to_dict(self):
        return {"T": self.T, "kind": "ramp"}


@dataclass(frozen=True)
class StepDecay(TimeProfile):
    """mu(t) = theta(t - t0): equal to 1 until t0, then decays to 0 over [t0, t0 + a].

    ``shape`` is ``"linear"`` or ``"cosine"`` (smooth, half cosine).
    """

    t0: float
    a: float
    shape: str = "linear"

    def __post_init__(self):
        if not (self.a > 0 and self.t0 >= 0):
            raise ConfigError("StepDecay needs a > 0 and t0 >= 0")
        if self.shape not in ("linear", "cosine"):
            raise ConfigError(f"unknown StepDecay shape {self.shape!r}")

    @property
    def support_end(self):
        return self.t0 + self.a

    def theta(self, s):
        s = np.asarray(s, dtype=float)
        r = np.clip(s / self.a, 0.0, 1.0)
        if self.shape == "linear":
            return 1.0 - r
        return 0.5 * (1.0 + np.cos(np.pi * r))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.theta(t - self.t0), 0.0)

    def _segments(self):
        segs = []
        if self.t0 > 0:
            segs.append(_Linear(0.0, self.t0, 1.0, 1.0))
        if self.shape == "linear":
            segs.append(_Linear(self.t0, self.t0 + self.a, 1.0, 0.0))
        else:
            segs.append(_Smooth(self.t0, self.t0 + self.a))
        return segs

    def to_dict(self):
        return {"a": self.a, "kind": "step_decay", "shape": self.shape, "t0": self.t0}


@dataclass(frozen=True)
class Bump(TimeProfile):
    """Smooth bump ``amplitude * exp(1 - 1/(1 - ((s-center)/width)^2))``.

    Supported in [center - width, center + width], which must lie in [0, T].
    """

    T: float
    center: float
    width: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError("Bump width must be positive")
        if self.center - self.width < -1e-15 or self.center + self.width > self.T + 1e-15:
            raise ConfigError("Bump support must lie inside [0, T]")

    @classmethod
    def unit_mass(cls, T: float, center: float, width: float) -> "Bump":
        return cls(T, center, width, 1.0 / (width * _BUMP_MASS))

    @property
    def support_end(self):
        return self.T

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * _bump_shape((t - self.center) / self.width)

    def _segments(self):
        return [_Smooth(max(0.0, self.center - self.width), min(self.T, self.center + self.width))]

    def integral(self):
        return self.amplitude * self.width * _BUMP_MASS

    def to_dict(self):
        return {
            "T": self.T,
            "amplitude": self.amplitude,
            "center": self.center,
            "kind": "bump",
            "width": self.width,
        }


@dataclass(frozen=True)
class Table(TimeProfile):
    """Piecewise-linear interpolant of (knots, values); zero from the last knot on."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise ConfigError("Table needs matching 1-D knots/values with at least two entries")
        if abs(k[0]) > 0 or np.any(np.diff(k) <= 0):
            raise ConfigError("Table knots must start at 0 and increase strictly")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def constant(cls, T: float, value: float = 1.0) -> "Table":
        return cls((0.0, T), (value, value))

    @classmethod
    def zero(cls, T: float) -> "Table":
        return cls.constant(T, 0.0)

    @property
    def support_end(self):
        return self.knots[-1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = np.interp(t, self.knots, self.values)
        return np.where((t >= 0) & (t < self.support_end), val, 0.0)

    def _segments(self):
        k, v = self.knots, self.values
        return [_Linear(k[i], k[i + 1], v[i], v[i + 1]) for i in range(len(k) - 1)]

    def to_dict(self):
        return {"kind": "table", "knots": list(self.knots), "values": list(self.values)}


@dataclass(frozen=True)
class ExpLinear(TimeProfile):
    """mu(s) = exp(-rate s) (s - offset) on [0, T).

    With ``rate = lambda_1`` and ``offset = T/2`` the lambda_1-moment vanishes.
    """

    rate: float
    offset: float
    T: float

    @property
    def support_end(self):
        return self.T

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t < self.T), np.exp(-self.rate * t) * (t - self.offset), 0.0)

    def _segments(self):
        pts = [0.0, self.T]
        if 0.0 < self.offset < self.T:
            pts.insert(1, self.offset)
        return [_Smooth(a, b) for a, b in zip(pts[:-1], pts[1:])]

    def duhamel(self, z, anchor, lo=0.0, hi=None):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if hi is None:
            hi = min(anchor, self.T)
        hi = min(hi, self.T)
        if hi <= lo:
            return np.zeros(z.shape, dtype=complex)
        # s = hi - r: exp(z(A - hi) - rate*hi) * int_0^h exp((z + rate) r) ((hi - c) - r) dr
        h = hi - lo
        w = z + self.rate
        pref = np.exp(z * (anchor - hi) - self.rate * hi)
        return pref * ((hi - self.offset) * kernel_integral(0, w, h) - kernel_integral(1, w, h))

    def to_dict(self):
        return {"T": self.T, "kind": "exp_linear", "offset": self.offset, "rate": self.rate}


_TIME_KINDS = {
    "ramp": lambda d: Ramp(float(d["T"])),
    "step_decay": lambda d: StepDecay(float(d["t0"]), float(d["a"]), d.get("shape", "linear")),
    "bump": lambda d: Bump(float(d["T"]), float(d["center"]), float(d["width"]), float(d.get("amplitude", 1.0))),
    "table": lambda d: Table(tuple(d["knots"]), tuple(d["values"])),
    "exp_linear": lambda d: ExpLinear(float(d["rate"]), float(d["offset"]), float(d["T"])),
}


def time_profile_from_dict(d: dict) -> TimeProfile:
    try:
        return _TIME_KINDS[d["kind"]](d)
    except KeyError as exc:
        raise ConfigError(f"bad time profile spec {d!r}: missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad time profile spec {d!r}: {exc}") from None


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def evaluate_mu(profile: TimeProfile, t):
    return profile(t)


def exponential_moment_scaled(profile: TimeProfile, lam: float) -> LogScaled:
    """m(lam) = int_0^T exp(lam s) mu(s) ds as ``mantissa * exp(lam A)``, A = ``active_end``."""
    A = profile.active_end
    mant = profile.duhamel(-float(lam), A, 0.0, A)[0].real
    return LogScaled(float(mant), float(lam) * A)


def exponential_moment(profile: TimeProfile, lam: float) -> float:
    """m(lam) = int_0^T exp(lam s) mu(s) ds; raises OverflowRisk when lam*T > 700."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam * profile.support_end > OVERFLOW_GUARD:
        raise OverflowRisk(
            f"lam*T = {lam * profile.support_end:.4g} exceeds {OVERFLOW_GUARD}; "
            "use exponential_moment_scaled"
        )
    return exponential_moment_scaled(profile, lam).value()


def trig_moments(profile: TimeProfile, omega: float, T: float | None = None) -> tuple[float, float]:
    """Return (S, C) with S = int mu(s) sin w(T-s) ds, C = int mu(s) cos w(T-s) ds."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if T is None:
        T = profile.support_end
    if isinstance(profile, Ramp) and T == profile.T:
        return ramp_trig_moments(profile.T, omega)
    val = profile.duhamel(1j * omega, T, 0.0, T)[0]
    return float(val.imag), float(val.real)


def ramp_trig_moments(T: float, omega: float) -> tuple[float, float]:
    """Closed forms for mu(s) = T - s."""
    xi = T * omega
    lam = omega * omega
    S = (-xi * math.cos(xi) + math.sin(xi)) / lam
    C = (xi * math.sin(xi) + math.cos(xi) - 1.0) / lam
    return S, C


# ---------------------------------------------------------------------------
# spatial profiles
# ---------------------------------------------------------------------------


def as_points(x, dim: int) -> np.ndarray:
    """Coerce coordinates to an array of shape (n, dim)."""
    arr = np.asarray(x, dtype=float)
    if dim == 1:
        if arr.ndim >= 1 and arr.shape[-1] == 1 and arr.ndim > 1:
            arr = arr[..., 0]
        return arr.reshape(-1, 1)
    return arr.reshape(-1, dim)


class SpatialProfile:
    dim: int
    nonnegative: bool = False

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def support_box(self):
        """Bounding box [(lo, hi), ...] of the support, or None for unknown/whole domain."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


def _descriptor_key(desc):
    if isinstance(desc, (list, tuple)):
        return tuple(desc)
    return int(desc)


@dataclass(frozen=True)
class ModeCombination(SpatialProfile):
    """f = sum_k c_k phi_k over eigenfunction descriptors of ``domain``."""

    domain: object
    terms: tuple  # ((descriptor, coefficient), ...)
    nonnegative: bool = False

    def __post_init__(self):
        terms = tuple((_descriptor_key(d), float(c)) for d, c in self.terms)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, domain, mapping: dict) -> "ModeCombination":
        return cls(domain, tuple(mapping.items()))

    @property
    def dim(self):
        return self.domain.dim

    def coefficient(self, desc) -> float:
        key = _descriptor_key(desc)
        return sum(c for d, c in self.terms if d == key)

    def __call__(self, x):
        from .spectra import eigenfunction_value_on

        pts = as_points(x, self.dim)
        out = np.zeros(len(pts))
        for d, c in self.terms:
            out += c * eigenfunction_value_on(self.domain, d, pts)
        return out

    def to_dict(self):
        return {
            "kind": "modes",
            "nonnegative": self.nonnegative,
            "terms": [[list(d) if isinstance(d, tuple) else d, c] for d, c in self.terms],
        }


@dataclass(frozen=True)
class SmoothBump(SpatialProfile):
    """amplitude * exp(1 - 1/(1 - |x - center|^2 / radius^2)) inside the ball."""

    center: tuple
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        c = self.center
        c = (float(c),) if np.isscalar(c) else tuple(float(v) for v in c)
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ConfigError("SmoothBump radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    @property
    def nonnegative(self):
        return self.amplitude >= 0

    def __call__(self, x):
        pts = as_points(x, self.dim)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=1) / self.radius
        return self.amplitude * _bump_shape(r)

    def support_box(self):
        return [(c - self.radius, c + self.radius) for c in self.center]

    def to_dict(self):
        return {
            "amplitude": self.amplitude,
            "center": list(self.center),
            "kind": "bump",
            "radius": self.radius,
        }


@dataclass(frozen=True)
class Polynomial(SpatialProfile):
    """1-D polynomial sum_k coefficients[k] x^k."""

    coefficients: tuple
    nonnegative: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    dim = 1

    def __call__(self, x):
        pts = as_points(x, 1)[:, 0]
        return np.polynomial.polynomial.polyval(pts, self.coefficients)

    def to_dict(self):
        return {"coefficients": list(self.coefficients), "kind": "polynomial", "nonnegative": self.nonnegative}


@dataclass(frozen=True)
class Product1D(SpatialProfile):
    """f(x) = prod_i factors[i](x_i) with 1-D factors."""

    factors: tuple = field(default=())

    def __post_init__(self):
        if any(f.dim != 1 for f in self.factors):
            raise ConfigError("Product1D factors must be one-dimensional")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self):
        return len(self.factors)

    @property
    def nonnegative(self):
        return all(f.nonnegative for f in self.factors)

    def __call__(self, x):
        pts = as_points(x, self.dim)
        out = np.ones(len(pts))
        for i, fac in enumerate(self.factors):
            out *= fac(pts[:, i])
        return out

    def support_box(self):
        boxes = [f.support_box() for f in self.factors]
        if any(b is None for b in boxes):
            return None
        return [b[0] for b in boxes]

    def to_dict(self):
        return {"factors": [f.to_dict() for f in self.factors], "kind": "product"}


def spatial_profile_from_dict(d: dict, domain=None) -> SpatialProfile:
    try:
        kind = d["kind"]
        if kind == "bump":
            return SmoothBump(tuple(np.atleast_1d(d["center"]).tolist()), float(d["radius"]), float(d.get("amplitude", 1.0)))
        if kind == "polynomial":
            return Polynomial(tuple(d["coefficients"]), bool(d.get("nonnegative", False)))
        if kind == "product":
            return Product1D(tuple(spatial_profile_from_dict(f, None) for f in d["factors"]))
        if kind == "modes":
            if domain is None:
                raise ConfigError("mode combination needs a domain")
            terms = tuple((_descriptor_key(t[0]), float(t[1])) for t in d["terms"])
            return ModeCombination(domain, terms, bool(d.get("nonnegative", False)))
    except KeyError as exc:
        raise ConfigError(f"bad spatial profile spec {d!r}: missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad spatial profile spec {d!r}: {exc}") from None
    raise ConfigError(f"unknown spatial profile kind {d.get('kind')!r}")


__all__ = [
    "TimeProfile",
    "Ramp",
    "StepDecay",
    "Bump",
    "Table",
    "ExpLinear",
    "time_profile_from_dict",
    "evaluate_mu",
    "exponential_moment",
    "exponential_moment_scaled",
    "trig_moments",
    "ramp_trig_moments",
    "SpatialProfile",
    "ModeCombination",
    "SmoothBump",
    "Polynomial",
    "Product1D",
    "spatial_profile_from_dict",
    "as_points",
]
