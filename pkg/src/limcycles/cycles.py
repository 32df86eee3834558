"""Return maps, limit-cycle detection, refinement and stability classification."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .field import PlanarField
from .integrate import POSITIVE_Y_AXIS, Section, Trajectory, _flip, integrate
from .operators import divergence_integral
from .roots import RootError, bisect_secant

__all__ = [
    "Cycle",
    "CycleScan",
    "StarShape",
    "InconsistentStabilityError",
    "return_map",
    "find_cycles",
    "scan_cycles",
    "build_cycle",
    "classify",
    "is_star_shaped",
    "circle_cycle",
]

log = logging.getLogger(__name__)

T_MAX = 1e4
RTOL = 1e-12
ATOL = 1e-14
DEDUP_TOL = 1e-6
RESIDUAL_TOL = 1e-10
ACCEPT_TOL = 1e-8
CENTER_TOL = 1e-9
CENTER_RUN = 5
CONCLUSIVE = 1e-4


class InconsistentStabilityError(RuntimeError):
    """Multiplier and divergence integral conclusively disagree."""


@dataclass
class Cycle:
    y_star: float
    period: float
    samples: np.ndarray
    orientation: str
    multiplier: float = math.nan
    div_integral: float = math.nan
    stability: str = "undetermined"
    star_shaped: bool | None = None
    residual: float = math.nan
    crossing: str = "any"
    refined_in: str = "forward"
    trajectory: Trajectory | None = field(default=None, repr=False)
    field: PlanarField | None = field(default=None, repr=False)

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.samples[:, 1], self.samples[:, 2])

    @property
    def amplitude(self) -> float:
        """max |x| along the cycle (dense output)."""
        if self.trajectory is None:
            return float(np.max(np.abs(self.samples[:, 1])))
        pts = self.trajectory.refined(16)
        k = int(np.argmax(np.abs(pts[:, 1])))
        lo, hi = pts[max(k - 1, 0), 0], pts[min(k + 1, len(pts) - 1), 0]
        res = minimize_scalar(lambda t: -abs(self.trajectory.interpolate(t)[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        return float(max(abs(pts[k, 1]), -res.fun))

    def to_json(self, with_samples: bool = True) -> dict:
        out = {
            "y_star": self.y_star,
            "period": self.period,
            "orientation": self.orientation,
            "multiplier": _jsonable(self.multiplier),
            "div_integral": _jsonable(self.div_integral),
            "stability": self.stability,
            "star_shaped": self.star_shaped,
        }
        if with_samples:
            out["samples"] = self.samples.tolist()
        return out


def _jsonable(v: float):
    if v is None or math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


class StarShape(NamedTuple):
    star_shaped: bool
    witness: tuple[float, float, float] | None  # (x, y, x*y' - y*x')


@dataclass
class CycleScan:
    """Outcome of a seed sweep."""

    cycles: list[Cycle]
    seeds: np.ndarray
    forward: list[float | None]
    backward: list[float | None]
    skipped: list[float]
    center_regions: list[tuple[float, float]]

    @property
    def continuum(self) -> bool:
        """True when a band of periodic orbits (a center region) was found."""
        return bool(self.center_regions)


# ---------------------------------------------------------------------------
# return map


def _return(field, s0, orientation="any", section=POSITIVE_Y_AXIS, t_max=T_MAX, rtol=RTOL, atol=ATOL):
    sec = section.with_orientation(orientation)
    traj = integrate(
        field, section.point(s0), t_max, rtol, atol, section=sec, stop_at_event=True
    )
    if traj.reason != "event":
        return None
    ev = traj.events[-1]
    return section.coordinate(ev.x, ev.y), ev.t, ev.orientation, traj


def return_map(
    field,
    y0: float,
    orientation: str = "any",
    *,
    section: Section = POSITIVE_Y_AXIS,
    t_max: float = T_MAX,
    rtol: float = RTOL,
    atol: float = ATOL,
):
    """Next crossing of the section starting from coordinate ``y0`` on it.

    Returns ``(y1, t_return)`` or None when the orbit escapes, blows up or
    does not return within ``t_max``.
    """
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    r = _return(field, y0, orientation, section, t_max, rtol, atol)
    return None if r is None else (r[0], r[1])


# ---------------------------------------------------------------------------
# detection


@dataclass
class _Candidate:
    y: float
    direction: str  # forward | backward: the field the fixed point was refined in
    orientation: str
    stable: bool  # fixed point is attracting in the refinement direction


def scan_cycles(
    field: PlanarField,
    y_min: float,
    y_max: float,
    n_seeds: int = 20,
    *,
    section: Section = POSITIVE_Y_AXIS,
    rtol: float = RTOL,
    atol: float = ATOL,
    t_max: float = T_MAX,
    dedup_tol: float = DEDUP_TOL,
    residual_tol: float = RESIDUAL_TOL,
    classify_cycles: bool = True,
) -> CycleScan:
    """Sweep geometric seeds on the section, bracket and refine fixed points.

    The displacement ``D(y) = R(y) - y`` is tabulated for the field and for
    its time reversal.  A fixed point is refined in the direction where it
    attracts (``D`` goes from + to -), since a repelling cycle's forward map
    amplifies errors by its multiplier.
    """
    if not 0 < y_min < y_max:
        raise ValueError("need 0 < y_min < y_max")
    if n_seeds < 2:
        raise ValueError("need at least 2 seeds")
    seeds = np.geomspace(y_min, y_max, n_seeds)
    rev = field.reversed()
    opts = dict(section=section, t_max=t_max, rtol=rtol, atol=atol)

    def table(f):
        rows = []
        for s in seeds:
            r = _return(f, float(s), **opts)
            rows.append(None if r is None else (r[0] - s, r[2]))
        return rows

    fwd = table(field)
    bwd = table(rev)
    skipped = [float(s) for s, a, b in zip(seeds, fwd, bwd) if a is None and b is None]

    centers, in_center = _center_regions(seeds, fwd)
    cands: list[_Candidate] = []
    for direction, rows, f in (("forward", fwd, field), ("backward", bwd, rev)):
        for i in range(n_seeds):
            if in_center[i] or rows[i] is None:
                continue
            if abs(rows[i][0]) <= residual_tol:
                cands.append(_Candidate(float(seeds[i]), direction, rows[i][1], True))
        for i in range(n_seeds - 1):
            a, b = rows[i], rows[i + 1]
            if a is None or b is None or in_center[i] or in_center[i + 1]:
                continue
            if not ((a[0] > 0 > b[0]) or (a[0] < 0 < b[0])):
                continue
            stable = a[0] > 0
            orient = a[1] if a[1] == b[1] else "any"
            y = _refine(f, float(seeds[i]), float(seeds[i + 1]), a[0], b[0], orient, residual_tol, opts)
            if y is not None:
                cands.append(_Candidate(y, direction, orient, stable))

    cycles = []
    for c in _dedup(cands, dedup_tol):
        orient = c.orientation if c.direction == "forward" else _flip(c.orientation)
        cyc = build_cycle(field, c.y, direction=c.direction, orientation=orient, **opts)
        if cyc is None:
            log.warning("fixed point %.12g did not close up; dropped", c.y)
            continue
        if classify_cycles:
            cyc = classify(field, cyc, **opts)
            cyc.star_shaped = is_star_shaped(cyc).star_shaped
        cycles.append(cyc)
    return CycleScan(cycles, seeds, _col(fwd), _col(bwd), skipped, centers)


def find_cycles(field: PlanarField, y_min: float, y_max: float, n_seeds: int = 20, **kw) -> list[Cycle]:
    """Limit cycles crossing the section between ``y_min`` and ``y_max``."""
    return scan_cycles(field, y_min, y_max, n_seeds, **kw).cycles


def _col(rows):
    return [None if r is None else r[0] for r in rows]


def _center_regions(seeds, rows):
    flags = [r is not None and abs(r[0]) < CENTER_TOL for r in rows]
    in_center = [False] * len(rows)
    regions = []
    i = 0
    while i < len(rows):
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(rows) and flags[j + 1]:
            j += 1
        if j - i + 1 >= CENTER_RUN:
            regions.append((float(seeds[i]), float(seeds[j])))
            for k in range(i, j + 1):
                in_center[k] = True
        i = j + 1
    return regions, in_center


def _refine(f, a, b, da, db, orient, residual_tol, opts):
    def D(s):
        r = _return(f, s, orient, **opts)
        if r is None:
            return math.nan
        return r[0] - s

    try:
        y = bisect_secant(D, a, b, da, db, ftol=residual_tol, xtol=1e-15, n_bisect=3)
    except RootError as err:
        log.info("bracket [%g, %g] not refined: %s", a, b, err)
        return None
    # a bracket around a jump of the map collapses without a small residual
    if not abs(D(y)) < ACCEPT_TOL:
        log.info("bracket [%g, %g] holds a discontinuity of D, not a fixed point", a, b)
        return None
    return y


def _dedup(cands, tol):
    # prefer candidates refined in their attracting direction
    cands = sorted(cands, key=lambda c: (not c.stable, c.y))
    kept: list[_Candidate] = []
    for c in cands:
        if all(abs(c.y - k.y) > tol for k in kept):
            kept.append(c)
    return sorted(kept, key=lambda c: c.y)


# ---------------------------------------------------------------------------
# cycle construction and classification


def build_cycle(
    field: PlanarField,
    y_star: float,
    *,
    direction: str = "forward",
    orientation: str = "any",
    section: Section = POSITIVE_Y_AXIS,
    t_max: float = T_MAX,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Cycle | None:
    """Integrate one period from the fixed point and package it as a Cycle.

    With ``direction="backward"`` the orbit is traced with the reversed
    field and then re-timed, which keeps a repelling cycle closed.
    ``orientation`` always refers to crossings of ``field`` itself.
    """
    f = field if direction == "forward" else field.reversed()
    if direction == "backward":
        orientation = _flip(orientation)
    r = _return(f, y_star, orientation, section, t_max, rtol, atol)
    if r is None:
        return None
    y1, period, crossing, traj = r
    if direction == "backward":
        traj = traj.time_reversed()
        crossing = _flip(crossing)
    traj.t = traj.t - traj.t[0]
    samples = traj.samples
    # the departure point is exact; keep the closing sample on the dense curve
    w = _angular_momentum(field, samples[:, 1], samples[:, 2])
    orient = "counterclockwise" if np.mean(w) > 0 else "clockwise"
    return Cycle(
        y_star=float(y_star),
        period=float(period),
        samples=samples,
        orientation=orient,
        residual=abs(y1 - y_star),
        crossing=crossing,
        refined_in=direction,
        trajectory=traj,
        field=field,
    )


def _angular_momentum(field, x, y):
    P, Q = field.rhs_array(x, y)
    return x * Q - y * P


def classify(
    field: PlanarField,
    cycle: Cycle,
    *,
    section: Section = POSITIVE_Y_AXIS,
    t_max: float = T_MAX,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Cycle:
    """Fill multiplier, divergence integral and stability.

    The multiplier is a central difference of the return map with step
    ``1e-6 * y_star``.  When the divergence integral says the cycle repels,
    the difference is taken on the reversed field's map and inverted.
    """
    div = divergence_integral(field, cycle)
    opts = dict(section=section, t_max=t_max, rtol=rtol, atol=atol)
    h = 1e-6 * cycle.y_star
    m = math.nan
    order = ("backward", "forward") if div > 0 else ("forward", "backward")
    for direction in order:
        f = field if direction == "forward" else field.reversed()
        orient = cycle.crossing
        if direction == "backward":
            orient = _flip(orient)
        lo = _return(f, cycle.y_star - h, orient, **opts)
        hi = _return(f, cycle.y_star + h, orient, **opts)
        if lo is None or hi is None:
            continue
        d = abs(hi[0] - lo[0]) / (2 * h)
        if direction == "forward":
            m = d
        else:
            m = math.inf if d == 0 else 1.0 / d
        break

    if math.isnan(m):
        log_m, m_ok = math.nan, False
    else:
        log_m = math.log(m) if m > 0 else -math.inf
        m_ok = abs(log_m) > CONCLUSIVE
    d_ok = abs(div) > CONCLUSIVE
    if m_ok and d_ok and (log_m < 0) != (div < 0):
        raise InconsistentStabilityError(
            f"cycle at y*={cycle.y_star:.10g}: multiplier {m:.4g} vs divergence integral {div:.4g}"
        )
    if m_ok:
        stability = "attracting" if log_m < 0 else "repelling"
    elif d_ok:
        stability = "attracting" if div < 0 else "repelling"
    else:
        stability = "undetermined"
    return replace(cycle, multiplier=m, div_integral=div, stability=stability)


def is_star_shaped(cycle: Cycle, tol: float = 1e-10) -> StarShape:
    """Is ``x y' - y x'`` of one sign along the cycle?

    Uses the field's velocity on dense-refined samples when the cycle
    carries its field, otherwise chord cross products of the samples.
    """
    if cycle.field is not None and cycle.trajectory is not None:
        pts = cycle.trajectory.refined(4)
        x, y = pts[:, 1], pts[:, 2]
        w = _angular_momentum(cycle.field, x, y)
    else:
        s = cycle.samples
        x, y = s[:-1, 1], s[:-1, 2]
        w = s[:-1, 1] * s[1:, 2] - s[:-1, 2] * s[1:, 1]
    ref = 1.0 if np.sum(w) >= 0 else -1.0
    bad = np.flatnonzero(ref * w <= tol)
    if bad.size:
        k = bad[0]
        return StarShape(False, (float(x[k]), float(y[k]), float(w[k])))
    return StarShape(True, None)


def circle_cycle(center=(0.0, 0.0), radius: float = 1.0, n: int = 400, clockwise: bool = False) -> Cycle:
    """Synthetic circular sample set (unit angular speed), for tests and demos."""
    t = np.linspace(0.0, 2 * math.pi, n + 1)
    sgn = -1.0 if clockwise else 1.0
    x = center[0] + radius * np.cos(sgn * t)
    y = center[1] + radius * np.sin(sgn * t)
    x[-1], y[-1] = x[0], y[0]
    return Cycle(
        y_star=float(y[0]),
        period=2 * math.pi,
        samples=np.column_stack([t, x, y]),
        orientation="clockwise" if clockwise else "counterclockwise",
    )
