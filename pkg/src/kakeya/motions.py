"""Planar affine maps and rigid motions in complex arithmetic.

Points of the plane are Python ``complex`` numbers. A rigid motion is the
map ``x -> u*x + c`` with ``|u| == 1``; the linear space of all maps
``x -> u*x + v`` carries the norm ``|u| + |v|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np

EXACT_TOL = 1e-12
CHAIN_TOL = 1e-9
UNIT_TOL = 1e-12

PointLike = Union[complex, float, Sequence[float]]


def as_point(p: PointLike) -> complex:
    """Coerce ``p`` (complex, real, or an ``(x, y)`` pair) to a complex point."""
    if isinstance(p, complex):
        z = p
    elif isinstance(p, (int, float, np.floating, np.integer)):
        z = complex(float(p), 0.0)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite point {p!r}")
    return z


def point_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def wrap_angle(phi: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class AffineMap:
    """Element ``x -> u*x + v`` of the normed space of complex affine maps."""

    u: complex
    v: complex

    def __post_init__(self) -> None:
        for z in (self.u, self.v):
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError("affine coefficients must be finite")

    def __call__(self, x):
        return self.u * x + self.v

    def __add__(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(self.u - other.u, self.v - other.v)

    def __mul__(self, k: complex) -> "AffineMap":
        return AffineMap(k * self.u, k * self.v)

    __rmul__ = __mul__

    def norm(self) -> float:
        return abs(self.u) + abs(self.v)


@dataclass(frozen=True)
class RigidMotion:
    """Orientation-preserving isometry ``x -> u*x + c``.

    ``u`` is renormalised to unit modulus on construction so long
    composition chains keep the invariant.
    """

    u: complex
    c: complex

    def __post_init__(self) -> None:
        u = complex(self.u)
        c = complex(self.c)
        m = abs(u)
        if not math.isfinite(m) or m == 0.0:
            raise ValueError(f"rotation part must be a finite nonzero complex, got {u!r}")
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("translation part must be finite")
        object.__setattr__(self, "u", u / m)
        object.__setattr__(self, "c", c)

    def __call__(self, x):
        return self.u * x + self.c

    def as_affine(self) -> AffineMap:
        return AffineMap(self.u, self.c)

    def __sub__(self, other: "RigidMotion") -> AffineMap:
        return self.as_affine() - other.as_affine()

    @property
    def angle(self) -> float:
        """Rotation angle in (-pi, pi]."""
        return wrap_angle(cmath.phase(self.u))

    def is_translation(self, tol: float = CHAIN_TOL) -> bool:
        return abs(self.u - 1.0) <= tol

    def is_identity(self, tol: float = CHAIN_TOL) -> bool:
        return abs(self.u - 1.0) + abs(self.c) <= tol

    def fixed_point(self) -> complex:
        """Centre of rotation; raises for (near-)translations."""
        if self.is_translation():
            raise ValueError("translations have no fixed point")
        return self.c / (1.0 - self.u)

    def close_to(self, other: "RigidMotion", tol: float = CHAIN_TOL) -> bool:
        return op_norm(self - other) <= tol

    def to_json(self) -> dict[str, list[float]]:
        return {"u": point_pair(self.u), "c": point_pair(self.c)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RigidMotion":
        return cls(as_point(data["u"]), as_point(data["c"]))


IDENTITY = RigidMotion(1.0 + 0j, 0j)


def apply(f: RigidMotion | AffineMap, x: PointLike) -> complex:
    return f.u * as_point(x) + (f.c if isinstance(f, RigidMotion) else f.v)


def translation(c: PointLike) -> RigidMotion:
    return RigidMotion(1.0 + 0j, as_point(c))


def rotation(center: PointLike, phi: float) -> RigidMotion:
    """Rotation about ``center`` by ``phi`` radians."""
    if not math.isfinite(phi):
        raise ValueError("rotation angle must be finite")
    a = as_point(center)
    u = cmath.exp(1j * phi)
    return RigidMotion(u, a * (1.0 - u))


def compose(f: RigidMotion, g: RigidMotion) -> RigidMotion:
    """``f o g``: apply ``g`` first."""
    return RigidMotion(f.u * g.u, f.u * g.c + f.c)


def inverse(f: RigidMotion) -> RigidMotion:
    return RigidMotion(f.u.conjugate(), -f.c / f.u)


def op_norm(f: AffineMap | RigidMotion) -> float:
    if isinstance(f, RigidMotion):
        f = f.as_affine()
    return f.norm()


def geometric_sum(u: complex, n: int) -> complex:
    """``1 + u + ... + u**(n-1)``, switching to the limit ``n`` near ``u == 1``."""
    if abs(u - 1.0) <= CHAIN_TOL:
        return complex(n, 0.0)
    return (1.0 - u**n) / (1.0 - u)


def iterate(alpha: RigidMotion, n: int) -> RigidMotion:
    """n-fold composition of ``alpha`` via the closed form."""
    if n < 1:
        raise ValueError("iterate needs n >= 1")
    if n == 1:
        return alpha
    un = cmath.exp(1j * n * cmath.phase(alpha.u))
    return RigidMotion(un, geometric_sum(alpha.u, n) * alpha.c)


def iterate_int(alpha: RigidMotion, n: int) -> RigidMotion:
    """``alpha**n`` for any integer ``n``; ``n == 0`` is the identity."""
    if n == 0:
        return IDENTITY
    if n < 0:
        return iterate(inverse(alpha), -n)
    return iterate(alpha, n)


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of a single numeric identity/inequality check."""

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    details: dict[str, Any] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out


def check_iterate_norm_identity(alpha: RigidMotion, n: int) -> InequalityReport:
    """Check ``||alpha^n - j|| = |1 + u + ... + u^(n-1)| * ||alpha - j||``.

    When ``|u - 1| <= 1/n`` the lower bound ``||alpha^n - j|| >= (n/2)||alpha - j||``
    is checked as well and folded into the verdict.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lhs = op_norm(iterate(alpha, n) - IDENTITY)
    rhs = abs(geometric_sum(alpha.u, n)) * op_norm(alpha - IDENTITY)
    passed = abs(lhs - rhs) < CHAIN_TOL
    details: dict[str, Any] = {"identity_error": abs(lhs - rhs)}
    if abs(alpha.u - 1.0) <= 1.0 / n:
        lower = 0.5 * n * op_norm(alpha - IDENTITY)
        ok = lhs >= lower - EXACT_TOL
        details["lower_bound"] = lower
        details["lower_bound_pass"] = ok
        passed = passed and ok
    return InequalityReport("iterate_norm_identity", lhs, rhs, CHAIN_TOL, passed, details)


def check_inverse_lipschitz(f1: RigidMotion, f2: RigidMotion) -> InequalityReport:
    """Check ``||f1^-1 - f2^-1|| <= (1 + |c2|) ||f1 - f2||``."""
    lhs = op_norm(inverse(f1) - inverse(f2))
    rhs = (1.0 + abs(f2.c)) * op_norm(f1 - f2)
    return InequalityReport("inverse_lipschitz", lhs, rhs, EXACT_TOL, lhs <= rhs + EXACT_TOL)
