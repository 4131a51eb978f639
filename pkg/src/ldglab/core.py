"""Material parameters, tensor basis algebra and bulk potentials.

Everything here is pure algebra on the five-component representation of a
symmetric traceless 3x3 tensor

    Q = q1 (ex@ex - ey@ey) + q2 (ex@ey + ey@ex)
      + q3 (2 ez@ez - ex@ex - ey@ey)
      + q4 (ex@ez + ez@ex) + q5 (ey@ez + ez@ey).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MaterialParams",
    "QTensor",
    "WellSet",
    "s_plus",
    "bulk_potential",
    "reduced_potential",
    "reduced_potential_grad",
    "biaxiality",
]


class ParameterError(ValueError):
    """Raised for non-physical material parameters."""


def s_plus(A: float, B: float, C: float) -> float:
    """Positive uniaxial order parameter minimizing the bulk potential.

    s_plus = (B + sqrt(B^2 + 24|A|C)) / (4C); requires B, C > 0.
    """
    if B <= 0 or C <= 0:
        raise ParameterError(f"B and C must be positive, got B={B}, C={C}")
    return (B + math.sqrt(B * B + 24.0 * abs(A) * C)) / (4.0 * C)


@dataclass(frozen=True)
class MaterialParams:
    """Bulk coefficients A, B, C plus the dimensionless domain coupling.

    ``lambda_bar_sq`` is the only place the domain size enters; the physical
    length and elastic constant never appear separately.  ``s_plus`` and the
    reduced temperature ``t_reduced = 27AC/B^2`` are derived on construction.
    """

    A: float
    B: float
    C: float
    lambda_bar_sq: float = 200.0
    s_plus: float = field(init=False)
    t_reduced: float = field(init=False)
    f_min: float = field(init=False)

    def __post_init__(self):
        if self.B <= 0 or self.C <= 0:
            raise ParameterError(f"B and C must be positive, got B={self.B}, C={self.C}")
        if self.lambda_bar_sq <= 0:
            raise ParameterError(f"lambda_bar_sq must be positive, got {self.lambda_bar_sq}")
        if self.A >= 0:
            warnings.warn("A >= 0 is outside the deep-nematic regime the analysis assumes",
                          stacklevel=2)
        sp = s_plus(self.A, self.B, self.C)
        object.__setattr__(self, "s_plus", sp)
        object.__setattr__(self, "t_reduced", 27.0 * self.A * self.C / self.B**2)
        # Bulk potential value of the uniaxial minimizer; subtracting it makes
        # the wells exact zeros of the shifted potential.
        fmin = self.A * sp**2 / 3.0 - 2.0 * self.B * sp**3 / 27.0 + self.C * sp**4 / 9.0
        object.__setattr__(self, "f_min", fmin)

    @classmethod
    def default(cls, lambda_bar_sq: float = 200.0) -> "MaterialParams":
        """Working parameter set: B=0.64e4, C=0.35e4, A=-B^2/(3C)."""
        B, C = 0.64e4, 0.35e4
        return cls(A=-B * B / (3.0 * C), B=B, C=C, lambda_bar_sq=lambda_bar_sq)

    @classmethod
    def from_reduced_temperature(cls, t: float, B: float = 0.64e4, C: float = 0.35e4,
                                 lambda_bar_sq: float = 200.0) -> "MaterialParams":
        """Build from the reduced temperature t = 27AC/B^2."""
        return cls(A=t * B * B / (27.0 * C), B=B, C=C, lambda_bar_sq=lambda_bar_sq)


# Fixed component basis as 3x3 matrices, in component order q1..q5.
BASIS = np.array([
    [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
    [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
    [[-1, 0, 0], [0, -1, 0], [0, 0, 2]],
    [[0, 0, 1], [0, 0, 0], [1, 0, 0]],
    [[0, 0, 0], [0, 0, 1], [0, 1, 0]],
], dtype=float)

# <E_i, E_i> for the (orthogonal, not orthonormal) basis above.
BASIS_NORMS_SQ = np.array([2.0, 2.0, 6.0, 2.0, 2.0])


@dataclass(frozen=True)
class QTensor:
    """A single tensor given by its five basis coefficients."""

    q1: float
    q2: float = 0.0
    q3: float = 0.0
    q4: float = 0.0
    q5: float = 0.0

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3, self.q4, self.q5])

    def matrix(self) -> np.ndarray:
        return np.tensordot(self.coeffs, BASIS, axes=1)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "QTensor":
        m = np.asarray(m, dtype=float)
        return cls(q1=0.5 * (m[0, 0] - m[1, 1]), q2=m[0, 1],
                   q3=0.5 * m[2, 2], q4=m[0, 2], q5=m[1, 2])

    @classmethod
    def uniaxial(cls, s: float, n: np.ndarray) -> "QTensor":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        return cls.from_matrix(s * (np.outer(n, n) - np.eye(3) / 3.0))

    def tr2(self) -> float:
        c = self.coeffs
        return float(np.dot(BASIS_NORMS_SQ * c, c))

    def tr3(self) -> float:
        m = self.matrix()
        return float(np.trace(m @ m @ m))


def bulk_potential(Q: QTensor, params: MaterialParams, shifted: bool = False) -> float:
    """Thermotropic potential (A/2)trQ^2 - (B/3)trQ^3 + (C/4)(trQ^2)^2.

    With ``shifted`` the minimum value over all tensors is subtracted, so
    the uniaxial minimizers evaluate to zero.
    """
    t2 = Q.tr2()
    t3 = Q.tr3()
    v = params.A / 2.0 * t2 - params.B / 3.0 * t3 + params.C / 4.0 * t2 * t2
    return v - params.f_min if shifted else v


def reduced_potential(q1, q3, params: MaterialParams):
    """Shifted potential of the two-field (q1, q3) restriction; zero at the wells.

    The cubic term is 2*B*q3*(q1^2 - q3^2), which is what -(B/3) tr Q^3 gives
    for tensors with q2 = q4 = q5 = 0 and is the unique choice under which
    the three wells are exact zeros.
    """
    q1 = np.asarray(q1, dtype=float)
    q3 = np.asarray(q3, dtype=float)
    r2 = q1 * q1 + 3.0 * q3 * q3
    v = (params.A * r2 + 2.0 * params.B * q3 * (q1 * q1 - q3 * q3)
         + params.C * r2 * r2 - params.f_min)
    if v.ndim == 0:
        return float(v)
    return v


def reduced_potential_grad(q1, q3, params: MaterialParams):
    """Analytic gradient (dF/dq1, dF/dq3) of :func:`reduced_potential`."""
    q1 = np.asarray(q1, dtype=float)
    q3 = np.asarray(q3, dtype=float)
    r2 = q1 * q1 + 3.0 * q3 * q3
    g1 = 2.0 * params.A * q1 + 4.0 * params.B * q1 * q3 + 4.0 * params.C * r2 * q1
    g3 = (6.0 * params.A * q3 + 2.0 * params.B * (q1 * q1 - 3.0 * q3 * q3)
          + 12.0 * params.C * r2 * q3)
    if g1.ndim == 0:
        return float(g1), float(g3)
    return g1, g3


@dataclass(frozen=True)
class WellSet:
    """The four critical points of the reduced potential."""

    origin: tuple
    p1: tuple
    p2: tuple
    p3: tuple

    @classmethod
    def of(cls, params: MaterialParams) -> "WellSet":
        sp = params.s_plus
        return cls(origin=(0.0, 0.0), p1=(-sp / 2.0, -sp / 6.0),
                   p2=(sp / 2.0, -sp / 6.0), p3=(0.0, sp / 3.0))

    @property
    def wells(self):
        return (self.p1, self.p2, self.p3)


def biaxiality(Q: QTensor) -> float:
    """Biaxiality parameter beta^2 = 1 - 6 (trQ^3)^2 / (trQ^2)^3 in [0, 1].

    Defined as 0 for the isotropic tensor; clamped against rounding.
    """
    t2 = Q.tr2()
    if t2 <= 0.0:
        return 0.0
    b2 = 1.0 - 6.0 * Q.tr3() ** 2 / t2**3
    return float(min(1.0, max(0.0, b2)))


def biaxiality_field(q1, q2, q3, q4, q5):
    """Vectorized beta^2 for component arrays; 0 where trQ^2 vanishes."""
    t2 = 2 * q1**2 + 2 * q2**2 + 6 * q3**2 + 2 * q4**2 + 2 * q5**2
    # For traceless Q, tr Q^3 = 3 det Q (Cayley-Hamilton).
    xx, yy, zz = q1 - q3, -q1 - q3, 2 * q3
    det = (xx * (yy * zz - q5 * q5) - q2 * (q2 * zz - q5 * q4)
           + q4 * (q2 * q5 - yy * q4))
    t3 = 3.0 * det
    out = np.zeros_like(np.asarray(t2, dtype=float))
    nz = t2 > 0
    out[nz] = 1.0 - 6.0 * t3[nz] ** 2 / t2[nz] ** 3
    return np.clip(out, 0.0, 1.0)
