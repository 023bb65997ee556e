"""Continuous movements ``t -> M_t`` on [0, 1] with ``M_0`` the identity."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    BetaTooFarError,
    HalfTurnError,
    InvalidInputError,
    SegmentTooFarError,
    SpliceMismatchError,
    TimeOutOfRangeError,
)
from .motions import (
    CHAIN_TOL,
    EXACT_TOL,
    IDENTITY,
    RigidMotion,
    compose,
    inverse,
    iterate_int,
    op_norm,
    translation,
)

_T_SLACK = 1e-12


def _check_time(t: float) -> float:
    t = float(t)
    if not (-_T_SLACK <= t <= 1.0 + _T_SLACK):
        raise TimeOutOfRangeError(f"time {t} outside [0, 1]")
    return min(max(t, 0.0), 1.0)


class Movement:
    """Base class. Subclasses implement :meth:`_at`."""

    kind = "abstract"

    def evaluate(self, t: float) -> RigidMotion:
        t = _check_time(t)
        if t == 0.0:
            return IDENTITY
        return self._at(t)

    def _at(self, t: float) -> RigidMotion:  # pragma: no cover - abstract
        raise NotImplementedError

    def evaluate_many(self, ts: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Rotation parts and offsets at each time, as complex arrays."""
        ms = [self.evaluate(t) for t in ts]
        return (np.array([m.u for m in ms], dtype=complex),
                np.array([m.c for m in ms], dtype=complex))

    def end(self) -> RigidMotion:
        return self.evaluate(1.0)

    def to_json(self) -> dict[str, Any]:  # pragma: no cover - abstract
        raise NotImplementedError


def evaluate(M: Movement, t: float) -> RigidMotion:
    return M.evaluate(t)


class ConstantMovement(Movement):
    """The movement that never moves."""

    kind = "constant"

    def _at(self, t: float) -> RigidMotion:
        return IDENTITY

    def evaluate_many(self, ts):
        n = len(ts)
        return np.ones(n, dtype=complex), np.zeros(n, dtype=complex)

    def to_json(self):
        return {"kind": "constant"}


class ElementaryMovement(Movement):
    """Straight-line translation or constant-speed rotation with |angle| < pi."""

    def __init__(self, alpha: RigidMotion):
        if alpha.is_translation(CHAIN_TOL):
            self.kind = "elementary-translation"
            self.phi = 0.0
            self.center = None
        else:
            phi = cmath.phase(alpha.u)
            if abs(alpha.u + 1.0) <= EXACT_TOL or abs(phi) >= math.pi:
                raise HalfTurnError("alpha is a half turn; alpha^2 == identity")
            self.kind = "elementary-rotation"
            self.phi = phi
            self.center = alpha.fixed_point()
        self.alpha = alpha

    def _coeffs(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        c = self.alpha.c
        if self.center is None:
            return np.ones_like(t, dtype=complex), t * c
        phi = self.phi
        u = np.exp(1j * t * phi)
        # offset a*(1 - e^{i t phi}) with a = c / (1 - e^{i phi}), written without the far centre
        ratio = np.exp(0.5j * (t - 1.0) * phi) * np.sin(0.5 * t * phi) / math.sin(0.5 * phi)
        return u, c * ratio

    def _at(self, t):
        u, c = self._coeffs(np.array([t]))
        return RigidMotion(complex(u[0]), complex(c[0]))

    def evaluate_many(self, ts):
        ts = np.clip(np.asarray(ts, dtype=float), 0.0, 1.0)
        u, c = self._coeffs(ts)
        u = u / np.abs(u)
        return u.astype(complex), c.astype(complex)

    def end(self) -> RigidMotion:
        return self.alpha

    def to_json(self):
        return {"kind": "elementary", "alpha": self.alpha.to_json()}


def elementary_movement(alpha: RigidMotion) -> Movement:
    """Canonical path from the identity to ``alpha``; the identity maps to a constant movement."""
    if alpha.is_identity(EXACT_TOL):
        return ConstantMovement()
    return ElementaryMovement(alpha)


class InverseMovement(Movement):
    kind = "inverse"

    def __init__(self, base: Movement):
        self.base = base

    def _at(self, t):
        return inverse(self.base.evaluate(t))

    def evaluate_many(self, ts):
        u, c = self.base.evaluate_many(ts)
        return np.conj(u), -c / u

    def to_json(self):
        return {"kind": "inverse", "of": self.base.to_json()}


def inverse_movement(M: Movement) -> Movement:
    if isinstance(M, ElementaryMovement):
        return ElementaryMovement(inverse(M.alpha))
    if isinstance(M, ConstantMovement):
        return M
    if isinstance(M, InverseMovement):
        return M.base
    return InverseMovement(M)


class ReparameterizedMovement(Movement):
    """``t -> base(psi(t))`` for a nondecreasing piecewise-linear ``psi`` with ``psi(0) = 0``."""

    kind = "reparameterized"

    def __init__(self, base: Movement, knots: Sequence[tuple[float, float]]):
        k = np.asarray(knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or len(k) < 2:
            raise InvalidInputError("knots must be a list of (t, s) pairs")
        if k[0, 0] != 0.0 or k[-1, 0] != 1.0 or k[0, 1] != 0.0:
            raise InvalidInputError("time map must start at (0, 0) and cover [0, 1]")
        if np.any(np.diff(k[:, 0]) <= 0) or np.any(np.diff(k[:, 1]) < 0):
            raise InvalidInputError("time map must be increasing in t and nondecreasing in s")
        if k[:, 1].min() < 0 or k[:, 1].max() > 1:
            raise InvalidInputError("time map values must lie in [0, 1]")
        self.base = base
        self.knots = k

    def psi(self, t):
        return np.interp(t, self.knots[:, 0], self.knots[:, 1])

    def _at(self, t):
        return self.base.evaluate(float(self.psi(t)))

    def evaluate_many(self, ts):
        return self.base.evaluate_many(self.psi(np.asarray(ts, dtype=float)))

    def to_json(self):
        return {"kind": "reparameterized", "base": self.base.to_json(),
                "knots": self.knots.tolist()}


class SplicedMovement(Movement):
    """``F_t = beta^(i-1) o M_{n(t - (i-1)/n)}`` on ``[(i-1)/n, i/n]``."""

    kind = "spliced"

    def __init__(self, segment: Movement, beta: RigidMotion, n: int):
        self.segment = segment
        self.beta = beta
        self.n = n
        self.powers = [iterate_int(beta, i) for i in range(n + 1)]

    def _piece(self, t: float) -> tuple[int, float]:
        i = min(int(math.floor(t * self.n)), self.n - 1)
        return i, self.n * t - i

    def _at(self, t):
        i, s = self._piece(t)
        return compose(self.powers[i], self.segment.evaluate(s))

    def evaluate_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        idx = np.minimum(np.floor(ts * self.n).astype(int), self.n - 1)
        local = np.clip(self.n * ts - idx, 0.0, 1.0)
        su, sc = self.segment.evaluate_many(local)
        pu = np.array([p.u for p in self.powers])[idx]
        pc = np.array([p.c for p in self.powers])[idx]
        return pu * su, pu * sc + pc

    def to_json(self):
        return {"kind": "spliced", "beta": self.beta.to_json(), "n": self.n,
                "segment": self.segment.to_json()}


def splice(M: Movement, beta: RigidMotion, n: int) -> Movement:
    """Chain ``n`` copies of ``M`` (run at speed ``n``), each premultiplied by a power of ``beta``.

    ``M`` must end at ``beta``; the copy on ``[(i-1)/n, i/n]`` then starts
    where the previous one stopped.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if op_norm(M.evaluate(1.0) - beta) > CHAIN_TOL:
        raise SpliceMismatchError("segment movement does not end at beta")
    if n == 1:
        return M
    return SplicedMovement(M, beta, n)


class SequenceMovement(Movement):
    """Stages run one after another; each stage acts on the pose left by the previous ones."""

    kind = "sequence"

    def __init__(self, stages: Sequence[Movement], breakpoints: Sequence[float] | None = None):
        if not stages:
            raise InvalidInputError("a sequence needs at least one stage")
        self.stages = list(stages)
        m = len(self.stages)
        if breakpoints is None:
            bp = np.linspace(0.0, 1.0, m + 1)
        else:
            bp = np.asarray(breakpoints, dtype=float)
            if len(bp) != m + 1 or bp[0] != 0.0 or bp[-1] != 1.0 or np.any(np.diff(bp) <= 0):
                raise InvalidInputError("breakpoints must increase from 0 to 1, one more than stages")
        self.breakpoints = bp
        prefix = [IDENTITY]
        for s in self.stages:
            prefix.append(compose(s.evaluate(1.0), prefix[-1]))
        self.prefix = prefix

    def _locate(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        idx = np.clip(idx, 0, len(self.stages) - 1)
        lo = self.breakpoints[idx]
        hi = self.breakpoints[idx + 1]
        return idx, np.clip((ts - lo) / (hi - lo), 0.0, 1.0)

    def _at(self, t):
        idx, tau = self._locate(np.array([t]))
        k = int(idx[0])
        return compose(self.stages[k].evaluate(float(tau[0])), self.prefix[k])

    def evaluate_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        idx, tau = self._locate(ts)
        u = np.empty(len(ts), dtype=complex)
        c = np.empty(len(ts), dtype=complex)
        for k in np.unique(idx):
            sel = idx == k
            su, sc = self.stages[k].evaluate_many(tau[sel])
            p = self.prefix[k]
            u[sel] = su * p.u
            c[sel] = su * p.c + sc
        return u, c

    def end(self):
        return self.prefix[-1]

    def to_json(self):
        return {"kind": "sequence", "stages": [s.to_json() for s in self.stages],
                "breakpoints": self.breakpoints.tolist()}


class SampledMovement(Movement):
    """Table of poses, interpolated by shortest-arc angle and linear offset."""

    kind = "sampled"

    def __init__(self, samples: Sequence[tuple[float, RigidMotion]]):
        if len(samples) < 2:
            raise InvalidInputError("need at least two samples")
        ts = np.array([float(t) for t, _ in samples])
        if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise InvalidInputError("sample times must increase from 0 to 1")
        motions = [m for _, m in samples]
        if not motions[0].is_identity(CHAIN_TOL):
            raise InvalidInputError("first sample must be the identity")
        self.times = ts
        self.motions = motions
        angles = [0.0]
        for a, b in zip(motions, motions[1:]):
            angles.append(angles[-1] + cmath.phase(b.u / a.u))
        self.angles = np.array(angles)
        self.offsets = np.array([m.c for m in motions])
        self.modulus = max(op_norm(b - a) / (t1 - t0)
                           for (t0, a), (t1, b) in zip(zip(ts, motions), zip(ts[1:], motions[1:])))

    def evaluate_many(self, ts):
        ts = np.clip(np.asarray(ts, dtype=float), 0.0, 1.0)
        ang = np.interp(ts, self.times, self.angles)
        c = (np.interp(ts, self.times, self.offsets.real)
             + 1j * np.interp(ts, self.times, self.offsets.imag))
        return np.exp(1j * ang), c

    def _at(self, t):
        u, c = self.evaluate_many(np.array([t]))
        return RigidMotion(complex(u[0]), complex(c[0]))

    def to_json(self):
        return {"kind": "sampled",
                "samples": [[float(t), m.to_json()] for t, m in zip(self.times, self.motions)]}


def perturbed_elementary(beta: RigidMotion, amplitude: float, knots: int = 65) -> Movement:
    """Elementary path to ``beta`` pushed sideways by ``amplitude * sin(pi s)``.

    The bump vanishes at both ends, so the result still runs from the identity to ``beta``.
    """
    if knots < 2:
        raise InvalidInputError("need at least two knots")
    E = elementary_movement(beta)
    samples = [(0.0, IDENTITY)]
    for s in np.linspace(0.0, 1.0, knots)[1:-1]:
        bump = translation(1j * amplitude * math.sin(math.pi * s))
        samples.append((float(s), compose(bump, E.evaluate(float(s)))))
    samples.append((1.0, beta))
    return SampledMovement(samples)


def movement_from_json(data: dict[str, Any]) -> Movement:
    try:
        kind = data["kind"]
        if kind == "constant":
            return ConstantMovement()
        if kind == "elementary":
            return elementary_movement(RigidMotion.from_json(data["alpha"]))
        if kind == "spliced":
            return splice(movement_from_json(data["segment"]),
                          RigidMotion.from_json(data["beta"]), int(data["n"]))
        if kind == "sampled":
            return SampledMovement([(float(t), RigidMotion.from_json(m))
                                    for t, m in data["samples"]])
        if kind == "sequence":
            return SequenceMovement([movement_from_json(s) for s in data["stages"]],
                                    data.get("breakpoints"))
        if kind == "inverse":
            return inverse_movement(movement_from_json(data["of"]))
        if kind == "reparameterized":
            return ReparameterizedMovement(movement_from_json(data["base"]), data["knots"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad movement document: {exc}") from exc
    raise InvalidInputError(f"unknown movement kind {data.get('kind')!r}")


# ---------------------------------------------------------------------------
# quantitative checks


@dataclass
class BoundReport:
    name: str
    max_violation: float
    samples_checked: int
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "max_violation": self.max_violation,
                "samples_checked": self.samples_checked, "pass": self.passed,
                "details": self.details}


def dyadic_times(samples: int) -> np.ndarray:
    """Uniform grid with a power-of-two number of intervals, at least ``samples`` points.

    Grids for increasing ``samples`` are nested, so maxima over them never decrease.
    """
    if samples < 2:
        raise InvalidInputError("need at least two samples")
    m = 1 << max(0, math.ceil(math.log2(samples - 1)))
    return np.linspace(0.0, 1.0, m + 1)


def unit_disc_points(count: int = 256) -> np.ndarray:
    """Deterministic sunflower pattern on the closed unit disc, boundary ring included."""
    ring = max(8, count // 8)
    inner = count - ring
    k = np.arange(inner)
    r = np.sqrt((k + 0.5) / inner)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    pts = r * np.exp(1j * golden * k)
    edge = np.exp(2j * math.pi * np.arange(ring) / ring)
    return np.concatenate([pts, edge])


def sup_distance(M1: Movement, M2: Movement, samples: int = 1024) -> float:
    """Max over sampled times of ``||M1_t - M2_t||``, the sup of ``|M1_t(x) - M2_t(x)|`` on ``|x| <= 1``."""
    ts = dyadic_times(samples)
    u1, c1 = M1.evaluate_many(ts)
    u2, c2 = M2.evaluate_many(ts)
    return float(np.max(np.abs(u1 - u2) + np.abs(c1 - c2)))


def check_elementary_increment_bound(alpha: RigidMotion, grid: int = 64,
                                     points: int = 256) -> BoundReport:
    """Grid check of ``|E_t1(x) - E_t2(x)| <= 2|t1 - t2| (||alpha|| + 1)`` for ``|x| <= 1``."""
    M = ElementaryMovement(alpha)
    ts = np.linspace(0.0, 1.0, grid)
    xs = unit_disc_points(points)
    u, c = M.evaluate_many(ts)
    pos = u[:, None] * xs[None, :] + c[:, None]
    lhs = np.abs(pos[:, None, :] - pos[None, :, :])
    rhs = 2.0 * np.abs(ts[:, None] - ts[None, :]) * (op_norm(alpha) + 1.0)
    excess = lhs - rhs[:, :, None]
    worst = float(excess.max())
    return BoundReport("elementary_increment", worst, int(lhs.size), worst <= EXACT_TOL,
                       {"norm_alpha": op_norm(alpha)})


def max_norm_from_identity(M: Movement, samples: int = 1024) -> float:
    ts = dyadic_times(samples)
    u, c = M.evaluate_many(ts)
    return float(np.max(np.abs(u - 1.0) + np.abs(c)))


def check_splice_distance(beta: RigidMotion, n: int, M_small: Movement,
                          samples: int = 1024, points: int = 64) -> BoundReport:
    """Check ``|F_t(x) - E^{beta^n}_t(x)| <= 8/n`` for the splice of ``M_small``.

    ``M_small`` is given on [0, 1] and is run on [0, 1/n] inside the splice.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if op_norm(beta - IDENTITY) > 1.0 / n + EXACT_TOL:
        raise BetaTooFarError(f"||beta - j|| = {op_norm(beta - IDENTITY):.3g} exceeds 1/n")
    if op_norm(M_small.evaluate(1.0) - beta) > CHAIN_TOL:
        raise SpliceMismatchError("segment movement does not end at beta")
    drift = max_norm_from_identity(M_small, samples)
    if drift > 1.0 / n + EXACT_TOL:
        raise SegmentTooFarError(f"segment leaves the 1/n ball around the identity ({drift:.3g})")
    F = splice(M_small, beta, n)
    E = elementary_movement(iterate_int(beta, n))
    ts = np.linspace(0.0, 1.0, samples)
    xs = unit_disc_points(points)
    fu, fc = F.evaluate_many(ts)
    eu, ec = E.evaluate_many(ts)
    dist = np.abs((fu - eu)[:, None] * xs[None, :] + (fc - ec)[:, None])
    bound = 8.0 / n
    worst = float(dist.max())
    return BoundReport("splice_distance", worst - bound, int(dist.size), worst <= bound,
                       {"max_distance": worst, "bound": bound})
