"""Stability operators with ``W = (x, y)`` and grid sign scans.

``alpha = P (x Q_x + y Q_y) - Q (x P_x + y P_y)`` is the numerator of
``nu = alpha / (y P - x Q)``.  For ``x' = y, y' = -x - y f(x)`` the latter
reduces to ``-x f'(x) y^2 / (x^2 + x y f(x) + y^2)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .expr import Expr, differentiate
from .field import PlanarField
from .integrate import path_integral

__all__ = [
    "SingularityError",
    "GridSignReport",
    "alpha",
    "alpha_array",
    "nu",
    "nu_array",
    "nu_lienard",
    "alpha_lienard",
    "divergence_integral",
    "nu_integral",
    "dlnr_dtheta",
    "angular_speed",
    "angular_speed_array",
    "ray_independence_array",
    "sign_scan",
    "evaluate_operator",
    "OPERATORS",
    "RAY_TAUS",
]

SINGULAR = 1e-12
RAY_TAUS = (1.1, 1.5, 2.0, 5.0, 10.0)
RAY_THRESHOLD = 1e-10
OPERATORS = ("alpha", "nu", "angular_speed", "ray_independence")


class SingularityError(ArithmeticError):
    def __init__(self, message: str, point=None):
        self.point = point
        super().__init__(message)


def alpha(field: PlanarField, x: float, y: float) -> float:
    P, Q = field.rhs(x, y)
    return P * (x * field.Q_x.eval(x, y) + y * field.Q_y.eval(x, y)) - Q * (
        x * field.P_x.eval(x, y) + y * field.P_y.eval(x, y)
    )


def alpha_array(field: PlanarField, x, y) -> np.ndarray:
    P, Q = field.rhs_array(x, y)
    Qr = x * field.Q_x.eval_array(x, y) + y * field.Q_y.eval_array(x, y)
    Pr = x * field.P_x.eval_array(x, y) + y * field.P_y.eval_array(x, y)
    return P * Qr - Q * Pr


def _wedge(field, x, y):
    P, Q = field.rhs(x, y)
    return y * P - x * Q


def nu(field: PlanarField, x: float, y: float) -> float:
    den = _wedge(field, x, y)
    if not abs(den) > SINGULAR:
        raise SingularityError(f"y*P - x*Q = {den:.3g} at ({x}, {y})", (x, y))
    return alpha(field, x, y) / den


def nu_array(field: PlanarField, x, y) -> np.ndarray:
    """Vectorised nu; singular points come back as NaN."""
    P, Q = field.rhs_array(x, y)
    den = y * P - x * Q
    with np.errstate(all="ignore"):
        out = alpha_array(field, x, y) / den
    return np.where(np.abs(den) > SINGULAR, out, np.nan)


def alpha_lienard(f: Expr, x: float, y: float) -> float:
    return -x * differentiate(f, "x").eval(x) * y * y


def nu_lienard(f: Expr, x: float, y: float) -> float:
    """Closed form of nu for ``x' = y, y' = -x - y f(x)``."""
    fx = f.eval(x)
    den = x * x + x * y * fx + y * y
    if not abs(den) > SINGULAR:
        raise SingularityError(f"x^2 + x*y*f(x) + y^2 = {den:.3g} at ({x}, {y})", (x, y))
    return -x * differentiate(f, "x").eval(x) * y * y / den


def _trapezoid(values, t) -> float:
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(t)))


def divergence_integral(field: PlanarField, cycle) -> float:
    """``∮ div`` over one period of the cycle."""
    if cycle.trajectory is not None:
        return path_integral(cycle.trajectory, field.divergence_array)
    s = cycle.samples
    return _trapezoid(field.divergence_array(s[:, 1], s[:, 2]), s[:, 0])


def nu_integral(field: PlanarField, cycle) -> float:
    """``∮ nu`` over one period; raises SingularityError if ``y P - x Q`` vanishes."""
    worst = [math.inf, None]

    def fn(x, y):
        P, Q = field.rhs_array(x, y)
        den = y * P - x * Q
        k = np.unravel_index(np.argmin(np.abs(den)), den.shape) if den.size else None
        if k is not None and abs(den[k]) < worst[0]:
            worst[0] = float(abs(den[k]))
            worst[1] = (float(x[k]), float(y[k]))
        with np.errstate(all="ignore"):
            return alpha_array(field, x, y) / den

    if cycle.trajectory is not None:
        val = path_integral(cycle.trajectory, fn)
    else:
        s = cycle.samples
        val = _trapezoid(fn(s[:, 1], s[:, 2]), s[:, 0])
    if not worst[0] > SINGULAR:
        raise SingularityError("y*P - x*Q vanishes on the cycle", worst[1])
    return val


def dlnr_dtheta(f: Expr, r: float, theta: float) -> float:
    """``d ln r / d theta`` for ``x' = y, y' = -x - f(x) y`` in polar form."""
    s, c = math.sin(theta), math.cos(theta)
    fv = f.eval(r * c)
    den = 1.0 + fv * s * c
    if not abs(den) > SINGULAR:
        raise SingularityError(f"1 + f sin cos vanishes at r={r}, theta={theta}", (r, theta))
    return fv * s * s / den


def angular_speed(field: PlanarField, x: float, y: float) -> float:
    """``theta' = (x Q - y P) / (x^2 + y^2)``; negative means clockwise."""
    P, Q = field.rhs(x, y)
    return (x * Q - y * P) / (x * x + y * y)


def angular_speed_array(field: PlanarField, x, y) -> np.ndarray:
    P, Q = field.rhs_array(x, y)
    r2 = x * x + y * y
    with np.errstate(all="ignore"):
        out = (x * Q - y * P) / r2
    return np.where(r2 > SINGULAR, out, np.nan)


def ray_independence_array(field: PlanarField, x, y, taus=RAY_TAUS) -> np.ndarray:
    """Signed margin of linear independence of ``V(p)`` and ``V(tau p)``.

    Per point: ``min_tau sign(c_1) c_tau`` with ``c_tau`` the normalised
    cross product ``V(p) ^ V(tau p)``.  A value at or below zero means
    some ``V(tau p)`` is parallel to ``V(p)``, or the cross product changes
    sign between two sampled tau (so a parallel position lies between).
    NaN marks excluded points (vanishing field).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    P0, Q0 = field.rhs_array(x, y)
    n0 = np.hypot(P0, Q0)
    ok = (n0 > SINGULAR) & (np.hypot(x, y) > 0)
    cs = []
    for tau in taus:
        P1, Q1 = field.rhs_array(tau * x, tau * y)
        n1 = np.hypot(P1, Q1)
        ok &= n1 > SINGULAR
        with np.errstate(all="ignore"):
            cs.append((P0 * Q1 - Q0 * P1) / (n0 * n1))
    cs = np.array(cs)
    ref = np.sign(cs[0])
    margin = np.min(ref[None] * cs, axis=0)
    return np.where(ok & np.all(np.isfinite(cs), axis=0), margin, np.nan)


def _array_fn(name):
    if name == "alpha":
        return alpha_array
    if name == "nu":
        return nu_array
    if name == "angular_speed":
        return angular_speed_array
    if name == "ray_independence":
        return ray_independence_array
    raise ValueError(f"unknown operator {name!r}; choose from {OPERATORS}")


def evaluate_operator(field: PlanarField, name: str, x: float, y: float) -> float:
    """Scalar value of a scan operator (NaN where excluded)."""
    return float(_array_fn(name)(field, np.array([float(x)]), np.array([float(y)]))[0])


@dataclass
class GridSignReport:
    operator: str
    region: tuple[float, float, float, float]
    resolution: int
    verdict: str  # nonnegative | nonpositive | mixed
    witnesses: list[tuple[float, float, float]] = dc_field(default_factory=list)
    excluded: list[tuple[float, float]] = dc_field(default_factory=list)
    vanishing: bool = False
    min_value: float = math.nan
    max_value: float = math.nan
    values: np.ndarray | None = dc_field(default=None, repr=False)

    @property
    def constant_sign(self) -> bool:
        return self.verdict != "mixed"

    def to_json(self) -> dict:
        return {
            "operator": self.operator,
            "region": list(self.region),
            "resolution": self.resolution,
            "verdict": self.verdict,
            "identically_zero": self.vanishing,
            "min": None if math.isnan(self.min_value) else self.min_value,
            "max": None if math.isnan(self.max_value) else self.max_value,
            "witnesses": [{"x": a, "y": b, "value": v} for a, b, v in self.witnesses],
            "excluded": {"count": len(self.excluded), "points": [list(p) for p in self.excluded[:50]]},
        }

    def grid(self):
        xmin, xmax, ymin, ymax = self.region
        xs = np.linspace(xmin, xmax, self.resolution)
        ys = np.linspace(ymin, ymax, self.resolution)
        return np.meshgrid(xs, ys, indexing="xy")

    def to_csv(self, path) -> None:
        X, Y = self.grid()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "value"])
            for a, b, v in zip(X.ravel(), Y.ravel(), self.values.ravel()):
                w.writerow([repr(float(a)), repr(float(b)), repr(float(v))])


def sign_scan(
    field: PlanarField,
    operator: str,
    region: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0),
    resolution: int = 101,
    max_witnesses: int = 8,
) -> GridSignReport:
    """Sign of an operator on a ``resolution x resolution`` grid over ``region``."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    xmin, xmax, ymin, ymax = map(float, region)
    if not (xmin < xmax and ymin < ymax):
        raise ValueError("region must be a nonempty rectangle")
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    V = _array_fn(operator)(field, X, Y)
    bad = ~np.isfinite(V)
    excluded = [(float(a), float(b)) for a, b in zip(X[bad], Y[bad])]
    vals = V[~bad]
    rep = GridSignReport(operator, (xmin, xmax, ymin, ymax), resolution, "nonnegative", excluded=excluded, values=V)
    if vals.size == 0:
        rep.vanishing = True
        return rep
    rep.min_value, rep.max_value = float(vals.min()), float(vals.max())
    if operator == "ray_independence":
        neg_mask = np.isfinite(V) & (V <= RAY_THRESHOLD)
        pos_mask = np.isfinite(V) & (V > RAY_THRESHOLD)
    else:
        tol = 1e-10 * max(1.0, float(np.max(np.abs(vals))))
        neg_mask = np.isfinite(V) & (V < -tol)
        pos_mask = np.isfinite(V) & (V > tol)
    has_neg, has_pos = bool(neg_mask.any()), bool(pos_mask.any())
    if has_neg and has_pos:
        rep.verdict = "mixed"
    elif has_neg:
        rep.verdict = "mixed" if operator == "ray_independence" else "nonpositive"
    else:
        rep.verdict = "nonnegative"
        rep.vanishing = not has_pos
    if rep.verdict == "mixed":
        # minority sign first, extreme values first
        minority = neg_mask if neg_mask.sum() <= pos_mask.sum() or operator == "ray_independence" else pos_mask
        idx = np.flatnonzero(minority.ravel())
        order = np.argsort(np.abs(V.ravel()[idx]))[::-1]
        for k in idx[order[:max_witnesses]]:
            rep.witnesses.append((float(X.ravel()[k]), float(Y.ravel()[k]), float(V.ravel()[k])))
    return rep
