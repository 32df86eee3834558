"""Planar vector fields, Liénard forms, antiderivatives and the Conti-Filippov map."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate

from . import expr as ex
from .expr import Expr, differentiate, parse
from .roots import bisect_secant

__all__ = [
    "PlanarField",
    "LienardSpec",
    "TransformedSpec",
    "FieldError",
    "TransformError",
    "planar_field",
    "phase_plane",
    "lienard_plane",
    "big_F",
    "big_G",
    "antiderivative",
    "energy",
    "divergence",
    "conti_filippov",
    "field_from_json",
    "CF_NORMALIZATION",
]

CF_NORMALIZATION = "u = sign(x)*sqrt(2*G(x))"


class FieldError(ValueError):
    pass


class TransformError(ValueError):
    def __init__(self, message: str, witness: float | None = None):
        self.witness = witness
        super().__init__(message if witness is None else f"{message} (witness x = {witness:.12g})")


def _as_expr(e) -> Expr:
    if isinstance(e, Expr):
        return e
    return parse(str(e))


@dataclass(frozen=True)
class PlanarField:
    """``x' = P(x, y), y' = Q(x, y)`` with exact first partials."""

    P: Expr
    Q: Expr
    P_x: Expr
    P_y: Expr
    Q_x: Expr
    Q_y: Expr
    label: str = ""
    _rhs: Callable | None = field(default=None, init=False, repr=False, compare=False)

    def rhs(self, x: float, y: float) -> tuple[float, float]:
        fn = self._rhs
        if fn is None:
            src = f"lambda x, y: ({self.P._py()}, {self.Q._py()})"
            fn = ex._compile(src, ex._SCALAR_NS)
            object.__setattr__(self, "_rhs", fn)
        try:
            return fn(x, y)
        except (ZeroDivisionError, OverflowError, ValueError):
            return self.P.eval(x, y), self.Q.eval(x, y)

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self.rhs(x, y)

    def rhs_array(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        return self.P.eval_array(x, y), self.Q.eval_array(x, y)

    def jacobian(self, x: float, y: float) -> np.ndarray:
        return np.array(
            [[self.P_x.eval(x, y), self.P_y.eval(x, y)], [self.Q_x.eval(x, y), self.Q_y.eval(x, y)]]
        )

    def divergence(self, x, y):
        return self.P_x.eval(x, y) + self.Q_y.eval(x, y)

    def divergence_array(self, x, y):
        return self.P_x.eval_array(x, y) + self.Q_y.eval_array(x, y)

    def reversed(self) -> "PlanarField":
        """The time-reversed field ``(-P, -Q)``."""
        n = ex.neg
        label = self.label[:-9] if self.label.endswith(" reversed") else f"{self.label} reversed"
        return PlanarField(n(self.P), n(self.Q), n(self.P_x), n(self.P_y), n(self.Q_x), n(self.Q_y), label)

    def to_json(self) -> dict:
        return {"kind": "general", "P": str(self.P), "Q": str(self.Q), "label": self.label}


def planar_field(P, Q, label: str = "") -> PlanarField:
    P, Q = _as_expr(P), _as_expr(Q)
    return PlanarField(
        P, Q, differentiate(P, "x"), differentiate(P, "y"), differentiate(Q, "x"), differentiate(Q, "y"), label
    )


@dataclass(frozen=True)
class LienardSpec:
    """``x'' + f(x) x' + g(x) = 0`` with the plane in which it is written."""

    f: Expr
    g: Expr
    form: str = "phase_plane"
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "f", _as_expr(self.f))
        object.__setattr__(self, "g", _as_expr(self.g))
        for name in ("f", "g"):
            if getattr(self, name).depends_on("y"):
                raise FieldError(f"{name}(x) must not reference y: {getattr(self, name)}")
        if self.form not in ("phase_plane", "lienard_plane"):
            raise FieldError(f"unknown form {self.form!r}")

    @property
    def F(self) -> Callable[[float], float]:
        return lambda x: big_F(self, x)

    @property
    def G(self) -> Callable[[float], float]:
        return lambda x: big_G(self, x)

    def field(self) -> PlanarField:
        return phase_plane(self) if self.form == "phase_plane" else lienard_plane(self)

    def to_json(self) -> dict:
        kind = "lienard_phase" if self.form == "phase_plane" else "lienard_plane"
        return {"kind": kind, "f": str(self.f), "g": str(self.g), "label": self.label}


def phase_plane(spec: LienardSpec) -> PlanarField:
    """``x' = y, y' = -g(x) - f(x) y``."""
    y = ex.Var("y")
    Q = ex.sub(ex.neg(spec.g), ex.mul(spec.f, y))
    return planar_field(y, Q, spec.label or "phase plane")


def lienard_plane(spec: LienardSpec) -> PlanarField:
    """``x' = y - F(x), y' = -g(x)``; needs F in closed form."""
    F = antiderivative(spec.f)
    if F is None:
        raise FieldError(f"F(x) has no closed form for f = {spec.f}; only polynomial f is supported")
    P = ex.sub(ex.Var("y"), F)
    return planar_field(P, ex.neg(spec.g), spec.label or "Lienard plane")


# ---------------------------------------------------------------------------
# antiderivatives and energy


def antiderivative(e: Expr) -> Expr | None:
    """Exact ``∫_0^x e`` for polynomial ``e`` in x, otherwise None."""
    c = ex.poly_coeffs(e, "x")
    if c is None:
        return None
    return ex.from_coeffs(np.polynomial.polynomial.polyint(c), "x")


def _primitive(e: Expr, x: float) -> float:
    c = ex.poly_coeffs(e, "x")
    if c is not None:
        return float(np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyint(c)))
    val, _ = _sp_integrate.quad(lambda s: e.eval(s, 0.0), 0.0, x, epsabs=1e-10, epsrel=1e-12, limit=200)
    return float(val)


def big_F(spec: LienardSpec, x: float) -> float:
    """``F(x) = ∫_0^x f(s) ds``."""
    return _primitive(spec.f, x)


def big_G(spec: LienardSpec, x: float) -> float:
    """``G(x) = ∫_0^x g(s) ds``."""
    return _primitive(spec.g, x)


def energy(spec: LienardSpec, x: float, y: float) -> float:
    return big_G(spec, x) + 0.5 * y * y


def divergence(field: PlanarField, x: float, y: float) -> float:
    return field.divergence(x, y)


# ---------------------------------------------------------------------------
# Conti-Filippov transformation


@dataclass(frozen=True)
class TransformedSpec:
    """Tabulated change of variable ``u = sign(x) sqrt(2 G(x))``.

    After the time rescaling by ``phi(u) = g(x(u))/u`` the Liénard plane in
    ``u`` has ``g_hat(u) = u`` and ``F_hat(u) = F(x(u))``.
    """

    spec: LienardSpec
    u_grid: np.ndarray
    x_of_u: np.ndarray
    F_hat: np.ndarray
    phi: np.ndarray
    x_max: float
    normalization: str = CF_NORMALIZATION

    def u(self, x: float) -> float:
        G = big_G(self.spec, x)
        return math.copysign(math.sqrt(max(2.0 * G, 0.0)), x) if x != 0 else 0.0

    def x_of(self, u: float) -> float:
        """Invert ``u`` by root finding ``G(x) = u^2/2`` on the branch of sign(u)."""
        if u == 0.0:
            return 0.0
        target = 0.5 * u * u
        if not self.u_grid[0] <= u <= self.u_grid[-1]:
            raise TransformError(f"u = {u} outside the tabulated range")
        i = int(np.searchsorted(self.u_grid, u))
        n = len(self.u_grid)
        lo, hi = float(self.x_of_u[max(i - 1, 0)]), float(self.x_of_u[min(i + 1, n - 1)])
        if u > 0:
            lo = max(lo, 0.0)
        else:
            hi = min(hi, 0.0)
        return _solve_G(self.spec, target, lo, hi)

    def energy_residual(self) -> float:
        """max |G(x(u)) - u^2/2| over the grid."""
        G = np.array([big_G(self.spec, xv) for xv in self.x_of_u])
        return float(np.max(np.abs(G - 0.5 * self.u_grid**2)))

    def rows(self):
        for u, xv, Fh, ph in zip(self.u_grid, self.x_of_u, self.F_hat, self.phi):
            yield float(u), float(xv), float(Fh), float(ph)


def _solve_G(spec: LienardSpec, target: float, lo: float, hi: float) -> float:
    def h(s):
        return big_G(spec, s) - target

    hlo, hhi = h(lo), h(hi)
    eps = 1e-14 * (1.0 + abs(target))
    if abs(hlo) <= eps:
        return lo
    if abs(hhi) <= eps:
        return hi
    return bisect_secant(h, lo, hi, hlo, hhi, ftol=1e-15, xtol=1e-15)


def conti_filippov(spec: LienardSpec, x_max: float = 3.0, n: int = 201) -> TransformedSpec:
    """Tabulate the Conti-Filippov transform on ``|x| <= x_max`` with ``n`` u-points.

    Requires ``x g(x) > 0`` for ``0 < |x| <= x_max`` (checked on a sample
    grid); raises :class:`TransformError` with a witness otherwise.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    xs = np.linspace(-x_max, x_max, 4 * n + 1)
    xs = xs[xs != 0.0]
    gx = np.asarray(spec.g.eval_array(xs), dtype=float)
    bad = ~(xs * gx > 0)
    if bad.any():
        raise TransformError("sign condition x*g(x) > 0 fails", float(xs[np.argmax(bad)]))
    Gs = np.array([big_G(spec, v) for v in xs])
    neg, pos = xs < 0, xs > 0
    if np.any(np.diff(Gs[pos]) <= 0) or np.any(np.diff(Gs[neg]) >= 0):
        k = int(np.argmax(np.diff(Gs[pos]) <= 0)) if np.any(np.diff(Gs[pos]) <= 0) else 0
        raise TransformError("G is not monotone on a branch", float(xs[pos][k]))

    u_lo = -math.sqrt(2.0 * big_G(spec, -x_max))
    u_hi = math.sqrt(2.0 * big_G(spec, x_max))
    u_grid = np.linspace(u_lo, u_hi, n)
    # keep u = 0 on the grid so x_of_u(0) = 0 is tabulated
    k0 = int(np.argmin(np.abs(u_grid)))
    u_grid[k0] = 0.0
    x_tab = np.empty(n)
    for i, u in enumerate(u_grid):
        if u == 0.0:
            x_tab[i] = 0.0
        elif u > 0:
            x_tab[i] = _solve_G(spec, 0.5 * u * u, 0.0, x_max)
        else:
            x_tab[i] = _solve_G(spec, 0.5 * u * u, -x_max, 0.0)
    if np.any(np.diff(x_tab) <= 0):
        raise TransformError("tabulated x(u) is not strictly increasing")
    F_hat = np.array([big_F(spec, v) for v in x_tab])
    g_tab = np.asarray(spec.g.eval_array(x_tab), dtype=float)
    with np.errstate(all="ignore"):
        phi = np.where(u_grid != 0.0, g_tab / np.where(u_grid == 0.0, 1.0, u_grid), 0.0)
    g1 = differentiate(spec.g, "x").eval(0.0)
    phi[u_grid == 0.0] = math.sqrt(g1) if g1 > 0 else 0.0
    return TransformedSpec(spec, u_grid, x_tab, F_hat, phi, float(x_max))


# ---------------------------------------------------------------------------
# JSON system spec


def field_from_json(obj) -> tuple[PlanarField, LienardSpec | None]:
    """Build a field from ``{"kind", "f", "g", "P", "Q", "label"}``."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    kind = obj.get("kind")
    label = obj.get("label", "")
    if kind in ("lienard_phase", "lienard_plane"):
        try:
            f, g = obj["f"], obj["g"]
        except KeyError as err:
            raise FieldError(f"{kind} spec requires 'f' and 'g'") from err
        spec = LienardSpec(f, g, "phase_plane" if kind == "lienard_phase" else "lienard_plane", label)
        return spec.field(), spec
    if kind == "general":
        try:
            return planar_field(obj["P"], obj["Q"], label), None
        except KeyError as err:
            raise FieldError("general spec requires 'P' and 'Q'") from err
    raise FieldError(f"unknown system kind {kind!r}")
