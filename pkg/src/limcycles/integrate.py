"""Adaptive Dormand-Prince 5(4) integration of planar fields.

The stepper works on Python floats (the state is two numbers, so numpy
overhead would dominate).  Accepted steps keep their quartic dense-output
polynomial, which is what section crossings and path integrals use.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .roots import RootError, bisect_secant

__all__ = [
    "Section",
    "Crossing",
    "Trajectory",
    "integrate",
    "next_crossing",
    "path_integral",
    "BLOWUP_NORM",
    "MIN_STEP",
]

BLOWUP_NORM = 1e8
MIN_STEP = 1e-14
T_MIN_GUARD = 1e-6

# Dormand & Prince (1980) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension (Hairer, Norsett & Wanner, DOPRI5 dense output)
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True)
class Section:
    """Ray ``anchor + s * direction, s > 0`` used as a Poincaré section.

    ``orientation`` filters crossings by the sign change of the normal
    coordinate ``n(p) = d_y (x - a_x) - d_x (y - a_y)``; for the default
    positive y-axis ``n = x`` so "increasing_x" means left-to-right.
    """

    anchor: tuple[float, float] = (0.0, 0.0)
    direction: tuple[float, float] = (0.0, 1.0)
    orientation: str = "any"

    def __post_init__(self):
        dx, dy = self.direction
        nrm = math.hypot(dx, dy)
        if nrm == 0:
            raise ValueError("section direction must be nonzero")
        object.__setattr__(self, "direction", (dx / nrm, dy / nrm))
        if self.orientation not in ("any", "increasing_x", "decreasing_x"):
            raise ValueError(f"unknown orientation {self.orientation!r}")

    def normal(self, x: float, y: float) -> float:
        dx, dy = self.direction
        return dy * (x - self.anchor[0]) - dx * (y - self.anchor[1])

    def coordinate(self, x: float, y: float) -> float:
        dx, dy = self.direction
        return dx * (x - self.anchor[0]) + dy * (y - self.anchor[1])

    def point(self, s: float) -> tuple[float, float]:
        return self.anchor[0] + s * self.direction[0], self.anchor[1] + s * self.direction[1]

    def with_orientation(self, orientation: str) -> "Section":
        return Section(self.anchor, self.direction, orientation)


POSITIVE_Y_AXIS = Section()


@dataclass(frozen=True)
class Crossing:
    t: float
    x: float
    y: float
    orientation: str  # increasing_x | decreasing_x


@dataclass
class Trajectory:
    """Accepted steps of an integration plus per-step dense polynomials.

    ``coef[i]`` holds power-basis coefficients (in the step fraction
    ``theta`` of step ``i``) for x and y, shape ``(5, 2)``.
    """

    t: np.ndarray
    xy: np.ndarray
    coef: np.ndarray
    reason: str
    events: list[Crossing] = field(default_factory=list)
    n_rejected: int = 0

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.t, self.xy])

    @property
    def end(self) -> tuple[float, float]:
        return float(self.xy[-1, 0]), float(self.xy[-1, 1])

    def __len__(self) -> int:
        return len(self.t)

    def interpolate(self, t) -> np.ndarray:
        """Dense-output state at time(s) ``t`` (shape ``(..., 2)``)."""
        t = np.asarray(t, dtype=float)
        if len(self.t) < 2:
            return np.broadcast_to(self.xy[0], t.shape + (2,)).copy()
        i = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[i + 1] - self.t[i]
        theta = (t - self.t[i]) / h
        c = self.coef[i]
        th = theta[..., None]
        return c[..., 0, :] + th * (c[..., 1, :] + th * (c[..., 2, :] + th * (c[..., 3, :] + th * c[..., 4, :])))

    def refined(self, per_step: int = 4) -> np.ndarray:
        """Samples (t, x, y) with ``per_step - 1`` dense points inserted per step."""
        if len(self.t) < 2:
            return self.samples
        fr = np.arange(per_step) / per_step
        ts = (self.t[:-1, None] + fr[None, :] * np.diff(self.t)[:, None]).ravel()
        ts = np.append(ts, self.t[-1])
        pts = self.interpolate(ts)
        pts[-1] = self.xy[-1]
        return np.column_stack([ts, pts])

    def time_reversed(self) -> "Trajectory":
        """Same curve traversed backwards, times mapped ``t -> t0 + t1 - t``.

        A trajectory of the reversed field becomes a trajectory of the
        original field.
        """
        t0, t1 = self.t[0], self.t[-1]
        t = (t0 + t1 - self.t)[::-1].copy()
        xy = self.xy[::-1].copy()
        # p(theta) -> p(1 - theta), per segment, in power basis
        c = self.coef[::-1]
        out = np.zeros_like(c)
        for k in range(5):
            for j in range(k + 1):
                out[:, j, :] += c[:, k, :] * math.comb(k, j) * (-1.0) ** j
        events = [Crossing(t0 + t1 - e.t, e.x, e.y, _flip(e.orientation)) for e in self.events]
        return Trajectory(t, xy, out, self.reason, events, self.n_rejected)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for tv, (xv, yv) in zip(self.t, self.xy):
                w.writerow([repr(float(tv)), repr(float(xv)), repr(float(yv))])


def _flip(orientation: str) -> str:
    return {"increasing_x": "decreasing_x", "decreasing_x": "increasing_x"}.get(orientation, orientation)


def _power_basis(x0, y0, x1, y1, k1x, k1y, k7x, k7y, dx, dy, h):
    # Hairer's rcont1..5 -> coefficients of 1, th, th^2, th^3, th^4
    r2x, r2y = x1 - x0, y1 - y0
    r3x, r3y = h * k1x - r2x, h * k1y - r2y
    r4x, r4y = r2x - h * k7x - r3x, r2y - h * k7y - r3y
    r5x, r5y = dx, dy
    return (
        (x0, y0),
        (r2x + r3x, r2y + r3y),
        (-r3x + r4x + r5x, -r3y + r4y + r5y),
        (-r4x - 2 * r5x, -r4y - 2 * r5y),
        (r5x, r5y),
    )


def _step(fn, x, y, k1x, k1y, h):
    """One DP5 step; returns new state, k7, error vector and dense correction."""
    k2x, k2y = fn(x + h * A21 * k1x, y + h * A21 * k1y)
    k3x, k3y = fn(x + h * (A31 * k1x + A32 * k2x), y + h * (A31 * k1y + A32 * k2y))
    k4x, k4y = fn(
        x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
        y + h * (A41 * k1y + A42 * k2y + A43 * k3y),
    )
    k5x, k5y = fn(
        x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
        y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
    )
    k6x, k6y = fn(
        x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
        y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
    )
    x1 = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    y1 = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    k7x, k7y = fn(x1, y1)
    ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    dx = h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x)
    dy = h * (D1 * k1y + D3 * k3y + D4 * k4y + D5 * k5y + D6 * k6y + D7 * k7y)
    return x1, y1, k7x, k7y, ex, ey, dx, dy


def _finite(*vals) -> bool:
    return all(math.isfinite(v) for v in vals)


def _initial_step(fn, x, y, fx, fy, rtol, atol):
    sx, sy = atol + rtol * abs(x), atol + rtol * abs(y)
    d0 = math.sqrt(((x / sx) ** 2 + (y / sy) ** 2) / 2)
    d1 = math.sqrt(((fx / sx) ** 2 + (fy / sy) ** 2) / 2)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1x, f1y = fn(x + h0 * fx, y + h0 * fy)
    if not _finite(f1x, f1y):
        return h0
    d2 = math.sqrt((((f1x - fx) / sx) ** 2 + ((f1y - fy) / sy) ** 2) / 2) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _dense_eval(c, theta):
    return tuple(c[0][k] + theta * (c[1][k] + theta * (c[2][k] + theta * (c[3][k] + theta * c[4][k]))) for k in (0, 1))


def integrate(
    field,
    p0: Sequence[float],
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    *,
    t0: float = 0.0,
    section: Section | None = None,
    stop_at_event: bool = False,
    t_min_guard: float = T_MIN_GUARD,
    first_step: float | None = None,
    max_step: float = math.inf,
    fixed_step: float | None = None,
) -> Trajectory:
    """Integrate ``field`` from ``p0`` over ``[t0, t_end]``.

    ``field`` is a :class:`~limcycles.field.PlanarField` or any callable
    ``(x, y) -> (P, Q)``.  With ``section`` given, crossings later than
    ``t0 + t_min_guard`` are recorded in ``events``; ``stop_at_event``
    ends the run at the first one.  ``fixed_step`` disables error control
    (used for convergence-order checks).

    Termination reasons: ``t_end``, ``event``, ``blowup`` (state norm above
    1e8) and ``step_underflow`` (step below 1e-14).
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    fn: Callable = field.rhs if hasattr(field, "rhs") else field
    x, y = float(p0[0]), float(p0[1])
    if not _finite(x, y):
        raise ValueError("initial point must be finite")
    t = float(t0)
    ts, xs, ys, coefs = [t], [x], [y], []
    events: list[Crossing] = []
    k1x, k1y = fn(x, y)
    reason = "t_end"
    n_rej = 0
    if not _finite(k1x, k1y):
        return _pack(ts, xs, ys, coefs, "blowup", events, 0)
    if fixed_step is not None:
        h = float(fixed_step)
    elif first_step is not None:
        h = float(first_step)
    else:
        h = _initial_step(fn, x, y, k1x, k1y, rtol, atol)
    h = min(h, max_step)

    while t < t_end:
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < MIN_STEP or t + h == t:
            reason = "step_underflow"
            break
        x1, y1, k7x, k7y, ex_, ey_, dx, dy = _step(fn, x, y, k1x, k1y, h)
        if fixed_step is not None:
            err = 0.0 if _finite(x1, y1, k7x, k7y) else math.inf
        elif _finite(x1, y1, k7x, k7y, ex_, ey_):
            sx = atol + rtol * max(abs(x), abs(x1))
            sy = atol + rtol * max(abs(y), abs(y1))
            err = max(abs(ex_) / sx, abs(ey_) / sy)
        else:
            err = math.inf
        if err > 1.0:
            n_rej += 1
            if fixed_step is not None:
                reason = "blowup"
                break
            fac = 0.25 if not math.isfinite(err) else max(0.2, 0.9 * err**-0.2)
            h *= fac
            continue

        c = _power_basis(x, y, x1, y1, k1x, k1y, k7x, k7y, dx, dy, h)
        t1 = t_end if last else t + h
        hit = None
        if section is not None:
            hit = _find_crossing(section, c, t, h, t0 + t_min_guard)
            if hit is not None:
                events.append(hit[0])
        if hit is not None and stop_at_event:
            ev, tau = hit
            pol = _polish(fn, section, x, y, k1x, k1y, tau, h)
            if pol is not None:
                tau, x1, y1, k7x, k7y, dx, dy = pol
                c = _power_basis(x, y, x1, y1, k1x, k1y, k7x, k7y, dx, dy, tau)
                events[-1] = Crossing(t + tau, x1, y1, ev.orientation)
            else:
                x1, y1 = ev.x, ev.y
                c = _truncate(c, tau / h)
            ts.append(t + tau)
            xs.append(x1)
            ys.append(y1)
            coefs.append(c)
            reason = "event"
            break

        t = t1
        x, y, k1x, k1y = x1, y1, k7x, k7y
        ts.append(t)
        xs.append(x)
        ys.append(y)
        coefs.append(c)
        if max(abs(x), abs(y)) > BLOWUP_NORM:
            reason = "blowup"
            break
        if last:
            reason = "t_end"
            break
        if fixed_step is None:
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            h = min(h * fac, max_step)
    return _pack(ts, xs, ys, coefs, reason, events, n_rej)


def _pack(ts, xs, ys, coefs, reason, events, n_rej) -> Trajectory:
    coef = np.array(coefs, dtype=float).reshape(-1, 5, 2)
    return Trajectory(np.array(ts), np.column_stack([xs, ys]), coef, reason, events, n_rej)


def _truncate(c, s):
    # restrict p(theta) on [0, s] and rescale to theta' in [0, 1]
    return tuple(tuple(c[k][j] * s**k for j in (0, 1)) for k in range(5))


_PROBE = (0.0, 0.25, 0.5, 0.75, 1.0)


def _find_crossing(section: Section, c, t, h, t_guard):
    """First admissible crossing of ``section`` inside one dense step."""
    vals = [section.normal(*_dense_eval(c, th)) for th in _PROBE]
    for i in range(len(_PROBE) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0 or not (a < 0 < b or b < 0 < a or b == 0.0):
            continue
        orient = "increasing_x" if a < 0 else "decreasing_x"
        if section.orientation != "any" and orient != section.orientation:
            continue
        if b == 0.0:
            th = _PROBE[i + 1]
        else:
            g = lambda s: section.normal(*_dense_eval(c, s))
            try:
                th = bisect_secant(g, _PROBE[i], _PROBE[i + 1], a, b, ftol=1e-15, xtol=1e-16)
            except RootError:
                continue
        if t + th * h <= t_guard:
            continue
        px, py = _dense_eval(c, th)
        if section.coordinate(px, py) <= 0:
            continue
        return Crossing(t + th * h, px, py, orient), th * h
    return None


def _polish(fn, section, x, y, k1x, k1y, tau, h):
    """Newton on the partial step length so the crossing lies on the RK solution."""
    best = None
    for _ in range(4):
        if not 0.0 < tau <= h * (1 + 1e-12):
            break
        x1, y1, k7x, k7y, _, _, dx, dy = _step(fn, x, y, k1x, k1y, tau)
        r = section.normal(x1, y1)
        if best is None or abs(r) < abs(best[0]):
            best = (r, tau, x1, y1, k7x, k7y, dx, dy)
        scale = 1e-15 * (1.0 + abs(section.coordinate(x1, y1)))
        if abs(r) <= scale:
            break
        ddx, ddy = section.direction
        rate = ddy * k7x - ddx * k7y
        if rate == 0 or not math.isfinite(rate):
            break
        tau -= r / rate
    if best is None or abs(best[0]) > 1e-11 * (1.0 + abs(best[2]) + abs(best[3])):
        return None
    return best[1:]


def next_crossing(
    field,
    p0: Sequence[float],
    section: Section = POSITIVE_Y_AXIS,
    t_max: float = 1e4,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    t_min_guard: float = T_MIN_GUARD,
):
    """First crossing of ``section`` after ``t_min_guard``: ``((x, y), t)`` or None."""
    traj = integrate(field, p0, t_max, rtol, atol, section=section, stop_at_event=True, t_min_guard=t_min_guard)
    if traj.reason != "event":
        return None
    ev = traj.events[-1]
    return (ev.x, ev.y), ev.t


def path_integral(traj: Trajectory, func: Callable) -> float:
    """``∫ func(x(t), y(t)) dt`` over the trajectory.

    Six-point Gauss-Legendre on every dense step; ``func`` must accept numpy
    arrays.
    """
    if len(traj.t) < 2:
        return 0.0
    h = np.diff(traj.t)
    th = _GL_NODES[None, :, None]
    c = traj.coef[:, None, :, :]
    pts = c[..., 0, :] + th * (c[..., 1, :] + th * (c[..., 2, :] + th * (c[..., 3, :] + th * c[..., 4, :])))
    vals = np.asarray(func(pts[..., 0], pts[..., 1]), dtype=float)
    return float(np.sum(h * (vals @ _GL_WEIGHTS)))
