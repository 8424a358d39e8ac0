"""Exact integrals of r^k e^{z r} and a log-scaled scalar type.

Every Duhamel kernel and moment used by the package reduces, on a linear
piece of the source, to

    I_k(z, h) = int_0^h r^k exp(z r) dr,   k in {0, 1},

with complex z.  The closed forms cancel catastrophically when |z h| is
small, so a Taylor series takes over there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import OverflowRisk

_SERIES_RADIUS = 0.5
_SERIES_TERMS = 24

# 1 / (n! (n + k + 1)) for k = 0, 1
_SERIES_COEF = np.array(
    [[1.0 / (factorial(n) * (n + k + 1)) for n in range(_SERIES_TERMS)] for k in (0, 1)]
)


def kernel_integral(k, z, h):
    """Return ``int_0^h r**k * exp(z*r) dr`` for k = 0 or 1, broadcasting z, h."""
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    z = np.asarray(z, dtype=complex)
    h = np.asarray(h, dtype=float)
    z, h = np.broadcast_arrays(z, h)
    zh = z * h
    small = np.abs(zh) < _SERIES_RADIUS
    out = np.empty(zh.shape, dtype=complex)

    if np.any(small):
        x = zh[small]
        # Horner on the series coefficients
        acc = np.zeros_like(x)
        for c in _SERIES_COEF[k][::-1]:
            acc = acc * x + c
        out[small] = acc * h[small] ** (k + 1)

    big = ~small
    if np.any(big):
        zb = z[big]
        ezh = np.exp(zh[big])
        if k == 0:
            out[big] = (ezh - 1.0) / zb
        else:
            out[big] = (ezh * (zh[big] - 1.0) + 1.0) / zb**2
    return out


@dataclass(frozen=True)
class LogScaled:
    """A real number stored as ``mantissa * exp(log_scale)``.

    Used wherever a factor ``exp(lambda * T)`` would overflow a double.
    """

    mantissa: float
    log_scale: float

    def value(self) -> float:
        if self.mantissa == 0.0:
            return 0.0
        if math.log(abs(self.mantissa)) + self.log_scale > 709.0:
            raise OverflowRisk(
                f"value exp({self.log_scale:.6g}) * {self.mantissa:.6g} overflows a double"
            )
        return self.mantissa * math.exp(self.log_scale)

    def log_abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    def sign(self) -> float:
        return float(np.sign(self.mantissa))

    def rescaled(self, log_scale: float) -> float:
        """Mantissa with respect to a different scale, i.e. value * exp(-log_scale)."""
        if self.mantissa == 0.0:
            return 0.0
        return self.mantissa * math.exp(self.log_scale - log_scale)

    def __mul__(self, other: float) -> "LogScaled":
        return LogScaled(self.mantissa * float(other), self.log_scale)

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "LogScaled":
        return LogScaled(self.mantissa / float(other), self.log_scale)

    def to_dict(self) -> dict:
        return {"log_scale": self.log_scale, "mantissa": self.mantissa}
