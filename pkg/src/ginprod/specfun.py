"""Log-gamma, log-factorial and sign/log-magnitude arithmetic.

Everything downstream works with magnitudes such as ``Gamma(2j + 3/2)**m``
or ``4**(-m j)`` that leave double range long before the parameters get
interesting, so values travel as ``LogScaled`` pairs and are only turned
into floats once they are of moderate size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .errors import DomainError

__all__ = [
    "LogScaled",
    "log_gamma_complex",
    "log_factorial",
    "signed_logsumexp",
]

_LOG_FACTORIAL = np.array([math.log(math.factorial(n)) for n in range(171)])


def _is_pole(z):
    return (z.imag == 0) & (z.real <= 0) & (np.floor(z.real) == z.real)


def log_gamma_complex(z):
    """Principal branch of ``log Gamma(z)``.

    Accepts a scalar or an array. Lanczos approximation (g = 7, 9 terms) on
    ``Re z >= 1/2`` and the upward recurrence ``log G(z) = log G(z+1) - log z``
    to the left of that line, which preserves the principal branch. On the
    negative real axis the value is the limit from the upper half plane.

    Raises
    ------
    DomainError
        If any argument is a non-positive integer.
    """
    arr = np.asarray(z, dtype=np.complex128)
    # on the cut take the limit from above, whatever the sign of a zero imaginary part
    arr = np.where(arr.imag == 0, arr.real + 0j, arr)
    if np.any(_is_pole(arr)):
        raise DomainError("log_gamma_complex: pole at a non-positive integer")
    out = _kernels.loggamma(arr.ravel()).reshape(arr.shape)
    if np.ndim(z) == 0:
        return complex(out)
    return out


def log_factorial(n):
    """``log(n!)``; tabulated up to 170, Lanczos log-gamma beyond."""
    if isinstance(n, (int, np.integer)):
        if n < 0:
            raise DomainError("log_factorial: n must be non-negative")
        if n <= 170:
            return float(_LOG_FACTORIAL[n])
        return log_gamma_complex(n + 1.0).real
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 0):
        raise DomainError("log_factorial: n must be non-negative")
    out = np.empty(n.shape)
    small = n <= 170
    out[small] = _LOG_FACTORIAL[n[small]]
    if np.any(~small):
        out[~small] = log_gamma_complex(n[~small] + 1.0).real
    return out


def signed_logsumexp(logs, signs):
    """Sum ``signs * exp(logs)``; returns ``(sign, log|sum|)``."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return 0, -math.inf
    lm, s = logsumexp(logs, b=np.asarray(signs, dtype=float), return_sign=True)
    s = int(s)
    return s, (float(lm) if s != 0 else -math.inf)


@total_ordering
@dataclass(frozen=True)
class LogScaled:
    """A real number stored as ``sign * exp(log_mag)``.

    ``sign`` is -1, 0 or +1. When ``sign`` is 0 the ``log_mag`` field carries
    no information and is normalised to ``-inf``.
    """

    sign: int
    log_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"LogScaled sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)
        elif math.isnan(self.log_mag):
            raise DomainError("LogScaled log-magnitude is NaN")

    @classmethod
    def from_real(cls, x: float) -> LogScaled:
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> LogScaled:
        return cls(sign, log_mag)

    @classmethod
    def zero(cls) -> LogScaled:
        return cls(0, -math.inf)

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_mag)

    __float__ = to_real

    def __neg__(self):
        return LogScaled(-self.sign, self.log_mag)

    def __abs__(self):
        return LogScaled(abs(self.sign), self.log_mag)

    def __mul__(self, other):
        other = _coerce(other)
        s = self.sign * other.sign
        return LogScaled(s, self.log_mag + other.log_mag if s else -math.inf)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogScaled division by zero")
        s = self.sign * other.sign
        return LogScaled(s, self.log_mag - other.log_mag if s else -math.inf)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, p):
        if self.sign < 0 and p != int(p):
            raise DomainError("non-integer power of a negative LogScaled")
        if self.sign == 0:
            return LogScaled.zero() if p > 0 else LogScaled(1, 0.0) if p == 0 else 1 / self
        s = self.sign ** int(p) if self.sign < 0 else 1
        return LogScaled(s, self.log_mag * p)

    def __add__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        hi, lo = (self, other) if self.log_mag >= other.log_mag else (other, self)
        d = lo.log_mag - hi.log_mag
        if hi.sign == lo.sign:
            return LogScaled(hi.sign, hi.log_mag + math.log1p(math.exp(d)))
        if d == 0:
            return LogScaled.zero()
        return LogScaled(hi.sign, hi.log_mag + math.log1p(-math.exp(d)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def _key(self):
        return self.sign, self.log_mag

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.sign == other.sign and (self.sign == 0 or self.log_mag == other.log_mag)

    def __hash__(self):
        return hash((self.sign, self.log_mag if self.sign else None))

    def __lt__(self, other):
        other = _coerce(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return self.log_mag < other.log_mag
        return self.log_mag > other.log_mag

    def __repr__(self):
        return f"LogScaled(sign={self.sign}, log_mag={self.log_mag!r})"


def _coerce(x):
    if isinstance(x, LogScaled):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return LogScaled.from_real(float(x))
    raise TypeError(f"cannot combine LogScaled with {type(x).__name__}")
