"""Working-precision configuration and the arithmetic backend.

Two backends share one code path.  At 53 bits values live in ordinary
float64/complex128 numpy arrays; above that they are numpy object arrays of
mpmath numbers bound to a private :class:`mpmath.MPContext`, so that
elementwise numpy operations (``+``, ``*``, ``@``, ``np.abs``) still work and no
global mpmath state is touched.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
import math

import mpmath
import numpy as np

DOUBLE_BITS = 53
EXTENDED_MIN_BITS = 113
# |n| above which the default ladder leaves float64
LADDER_SWITCH_DEGREE = 12


class Arith:
    """Elementwise math at a fixed binary precision."""

    def __init__(self, bits: int):
        if bits != DOUBLE_BITS and bits < EXTENDED_MIN_BITS:
            raise ValueError(f"mantissa_bits must be 53 or >= {EXTENDED_MIN_BITS}, got {bits}")
        self.bits = bits
        self.is_mp = bits > DOUBLE_BITS
        if self.is_mp:
            ctx = mpmath.MPContext()
            ctx.prec = bits
            # mpf (op) ndarray tries ctx.convert first, whose failure path reprs
            # the whole array; fail fast so numpy's reflected op takes over
            convert = ctx.convert

            def fast_convert(x, strings=True):
                if isinstance(x, np.ndarray) and x.ndim:
                    raise TypeError("array operand")
                return convert(x, strings)

            ctx.convert = fast_convert
            self.ctx = ctx
            self._log = np.frompyfunc(ctx.log, 1, 1)
            self._exp = np.frompyfunc(ctx.exp, 1, 1)
            self._sqrt = np.frompyfunc(ctx.sqrt, 1, 1)
            self._cos = np.frompyfunc(ctx.cos, 1, 1)
            self._sin = np.frompyfunc(ctx.sin, 1, 1)
            self._real = np.frompyfunc(lambda v: ctx.mpf(v.real) if hasattr(v, "real") else ctx.mpf(v), 1, 1)
            self._imag = np.frompyfunc(lambda v: ctx.mpf(v.imag) if hasattr(v, "imag") else ctx.mpf(0), 1, 1)
            self._conj = np.frompyfunc(ctx.conj, 1, 1)
            self._to_float = np.frompyfunc(float, 1, 1)
            self._to_complex = np.frompyfunc(complex, 1, 1)
            self._mpf = np.frompyfunc(ctx.mpf, 1, 1)
            self._mpc = np.frompyfunc(ctx.mpc, 1, 1)
            self.eps = float(ctx.eps)
            self.pi = ctx.pi
        else:
            self.ctx = None
            self.eps = float(np.finfo(float).eps)
            self.pi = math.pi

    def __repr__(self):
        return f"Arith(bits={self.bits})"

    # conversions -------------------------------------------------------
    def real(self, x):
        """Convert to a real array (or scalar) of this precision."""
        if not self.is_mp:
            return np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        if np.ndim(x):
            return self._mpf(np.asarray(x, dtype=object)).astype(object)
        return self.ctx.mpf(x)

    def complex(self, x):
        if not self.is_mp:
            return np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
        if np.ndim(x):
            return self._mpc(np.asarray(x, dtype=object)).astype(object)
        return self.ctx.mpc(x)

    def zeros(self, shape):
        if not self.is_mp:
            return np.zeros(shape)
        out = np.empty(shape, dtype=object)
        out.fill(self.ctx.mpf(0))
        return out

    def ones(self, shape):
        if not self.is_mp:
            return np.ones(shape)
        out = np.empty(shape, dtype=object)
        out.fill(self.ctx.mpf(1))
        return out

    def to_float(self, x):
        if not self.is_mp:
            return np.asarray(x, dtype=float) if np.ndim(x) else float(np.real(x))
        if np.ndim(x):
            return self._to_float(np.asarray(x, dtype=object)).astype(float)
        return float(x)

    def to_complex(self, x):
        if not self.is_mp:
            return np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
        if np.ndim(x):
            return self._to_complex(np.asarray(x, dtype=object)).astype(complex)
        return complex(x)

    # elementwise functions ---------------------------------------------
    def log(self, x):
        return self._log(x) if self.is_mp else np.log(x)

    def exp(self, x):
        return self._exp(x) if self.is_mp else np.exp(x)

    def sqrt(self, x):
        """Square root; for mp backend negative reals give complex results."""
        return self._sqrt(x) if self.is_mp else np.sqrt(x)

    def cos(self, x):
        return self._cos(x) if self.is_mp else np.cos(x)

    def sin(self, x):
        return self._sin(x) if self.is_mp else np.sin(x)

    def re(self, x):
        return self._real(x) if self.is_mp else np.real(x)

    def im(self, x):
        return self._imag(x) if self.is_mp else np.imag(x)

    def conj(self, x):
        return self._conj(x) if self.is_mp else np.conj(x)

    def gammaln(self, x):
        if self.is_mp:
            return self.ctx.loggamma(x)
        return math.lgamma(x)


@lru_cache(maxsize=None)
def arith_for_bits(bits: int) -> Arith:
    return Arith(bits)


def extended_bits_for_degree(degree: int) -> int:
    """Mantissa bits used by the precision ladder above the float64 range.

    The functions of the second kind lose roughly ``log2(3.7)`` bits per
    degree to cancellation on the opposite interval (default geometry), and
    the two-block Gram system loses about as much again.  Rounded up to a
    multiple of 64 so that quadrature rules are shared between degrees.
    """
    need = max(EXTENDED_MIN_BITS, 64 + 5 * degree)
    return 64 * -(-need // 64)


@dataclass(frozen=True)
class PrecisionConfig:
    mantissa_bits: int = DOUBLE_BITS
    quad_order: int = 64
    residual_tol: float = 1e-10
    root_tol: float = 1e-13

    def __post_init__(self):
        if self.mantissa_bits != DOUBLE_BITS and self.mantissa_bits < EXTENDED_MIN_BITS:
            raise ValueError("mantissa_bits must be 53 or an extended precision >= 113")
        if self.quad_order < 1:
            raise ValueError("quad_order must be positive")
        if not (self.residual_tol > 0 and self.root_tol > 0):
            raise ValueError("tolerances must be positive")

    @property
    def arith(self) -> Arith:
        return arith_for_bits(self.mantissa_bits)

    @property
    def extended(self) -> bool:
        return self.mantissa_bits > DOUBLE_BITS

    def check_degree(self, degree: int) -> None:
        need = min_quad_order(degree)
        if self.quad_order < need:
            raise ValueError(
                f"quad_order {self.quad_order} too small for degree {degree} (need >= {need})"
            )

    def with_bits(self, bits: int) -> "PrecisionConfig":
        """Same quadrature order, tolerances rescaled to the new precision."""
        res, root = default_tolerances(bits)
        return replace(self, mantissa_bits=bits, residual_tol=res, root_tol=root)

    @classmethod
    def for_degree(cls, degree: int, mantissa_bits: int | None = None) -> "PrecisionConfig":
        """Ladder: float64 up to degree 12, extended precision above.

        The quadrature order is the minimum 4*degree + 16 rounded up to a
        multiple of 32 (again so rules are reused).
        """
        if mantissa_bits is None:
            mantissa_bits = (
                DOUBLE_BITS if degree <= LADDER_SWITCH_DEGREE else extended_bits_for_degree(degree)
            )
        res, root = default_tolerances(mantissa_bits)
        order = 32 * -(-min_quad_order(degree) // 32)
        return cls(mantissa_bits, order, res, root)

    def as_dict(self):
        return {
            "mantissa_bits": self.mantissa_bits,
            "quad_order": self.quad_order,
            "residual_tol": self.residual_tol,
            "root_tol": self.root_tol,
        }


def min_quad_order(degree: int) -> int:
    return 4 * max(degree, 0) + 16


def default_tolerances(bits: int) -> tuple[float, float]:
    if bits <= DOUBLE_BITS:
        return 1e-10, 1e-13
    return 1e-20, 1e-25
