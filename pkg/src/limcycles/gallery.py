"""Named example systems with their known cycle structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .criteria import HomogeneousFamilySpec
from .expr import parse
from .field import LienardSpec, PlanarField, planar_field

__all__ = ["GallerySystem", "gallery", "get_system", "vdp", "system8", "system11", "cubic", "harmonic", "NAMES"]


@dataclass
class GallerySystem:
    name: str
    field: PlanarField
    spec: LienardSpec | None = None
    family: HomogeneousFamilySpec | None = None
    region: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)
    seed_range: tuple[float, float] = (0.1, 3.0)
    n_seeds: int = 20
    expected_cycles: int | None = None
    expected_radii: list[float] | None = None
    expected_stability: list[str] | None = None
    expected_center: bool = False
    expected_checks: dict[str, str] = dc_field(default_factory=dict)
    description: str = ""


def _fmt(v: float) -> str:
    return repr(float(v))


def vdp(eps: float = 1.0) -> GallerySystem:
    """Van der Pol ``x'' + eps (x^2 - 1) x' + x = 0`` in the phase plane."""
    e = _fmt(eps)
    spec = LienardSpec(parse(f"{e}*(x^2 - 1)"), parse("x"), label=f"vdp(eps={eps:g})")
    checks = {}
    if eps > 0:
        checks = {t: "Satisfied" for t in ("thm1", "thm2", "thm3", "thm4", "thm6")}
    return GallerySystem(
        name="vdp",
        field=spec.field(),
        spec=spec,
        region=(-3.0, 3.0, -4.0, 4.0),
        seed_range=(0.1, 8.0),
        n_seeds=20,
        expected_cycles=1 if eps > 0 else None,
        expected_stability=["attracting"] if eps > 0 else None,
        expected_checks=checks,
        description="x'' + eps*(x^2 - 1)*x' + x = 0",
    )


def system8() -> GallerySystem:
    """Two circular cycles, ``r^2 = (3 -+ sqrt 5)/2``, of opposite stability."""
    r2 = "(x^2 + y^2)"
    P = f"y*({r2} - {r2}^2) + x*(1 - 3*{r2} + {r2}^2)"
    Q = f"-x*({r2} - {r2}^2) + y*(1 - 3*{r2} + {r2}^2)"
    return GallerySystem(
        name="system8",
        field=planar_field(P, Q, "system8"),
        region=(-2.0, 2.0, -2.0, 2.0),
        seed_range=(0.1, 3.0),
        n_seeds=40,
        expected_cycles=2,
        expected_radii=[math.sqrt((3 - math.sqrt(5)) / 2), math.sqrt((3 + math.sqrt(5)) / 2)],
        expected_stability=["attracting", "repelling"],
        expected_checks={"thm6": "Violated"},
        description="polynomial system with two concentric circular limit cycles",
    )


def system11() -> GallerySystem:
    """``x' = y^3, y' = (5x^2 - 1) y^3 - x^3 - x y^2`` with one cycle."""
    family = HomogeneousFamilySpec(
        k="y^3", l="y^3", f="1 - 5*x^2", terms=(("x^3", "1", 3), ("x", "y^2", 1)), d=3, label="system11"
    )
    return GallerySystem(
        name="system11",
        field=planar_field("y^3", "(5*x^2 - 1)*y^3 - x^3 - x*y^2", "system11"),
        family=family,
        region=(-2.0, 2.0, -2.0, 2.0),
        seed_range=(0.5, 3.0),
        n_seeds=20,
        expected_cycles=1,
        expected_stability=["repelling"],
        expected_checks={"thm6": "Satisfied", "cor1": "Satisfied"},
        description="homogeneous-family system with a unique limit cycle",
    )


def cubic(a: float = 1.0, b: float = 0.0, c: float = -1.0, d: float = 0.0) -> GallerySystem:
    """``x'' + (a x^3 + b x^2 + c x + d) x' + x = 0``.

    The default coefficients give an odd damping, for which the system is
    reversible under ``(x, t) -> (-x, -t)`` and the origin is a center.
    """
    f = parse(f"{_fmt(a)}*x^3 + {_fmt(b)}*x^2 + {_fmt(c)}*x + {_fmt(d)}")
    spec = LienardSpec(f, parse("x"), label=f"cubic({a:g},{b:g},{c:g},{d:g})")
    odd = b == 0 and d == 0
    checks = {t: "not_applicable" for t in ("thm1", "thm2", "thm3", "thm4", "thm5", "thm6")}
    return GallerySystem(
        name="cubic",
        field=spec.field(),
        spec=spec,
        region=(-2.0, 2.0, -2.0, 2.0),
        seed_range=(0.1, 3.0),
        n_seeds=20,
        expected_cycles=0 if odd else None,
        expected_center=odd,
        expected_checks=checks if (a, b, c, d) == (1.0, 0.0, -1.0, 0.0) else {},
        description="x'' + (a*x^3 + b*x^2 + c*x + d)*x' + x = 0",
    )


def harmonic() -> GallerySystem:
    spec = LienardSpec(parse("0"), parse("x"), label="harmonic")
    return GallerySystem(
        name="harmonic",
        field=spec.field(),
        spec=spec,
        region=(-2.0, 2.0, -2.0, 2.0),
        seed_range=(0.1, 3.0),
        n_seeds=20,
        expected_cycles=0,
        expected_center=True,
        description="x'' + x = 0",
    )


NAMES = ("vdp", "system8", "system11", "cubic", "harmonic")


def get_system(name: str, eps: float = 1.0, coef: tuple[float, float, float, float] | None = None) -> GallerySystem:
    if name == "vdp":
        return vdp(eps)
    if name == "system8":
        return system8()
    if name == "system11":
        return system11()
    if name == "cubic":
        return cubic(*(coef or (1.0, 0.0, -1.0, 0.0)))
    if name == "harmonic":
        return harmonic()
    raise KeyError(f"unknown system {name!r}; choose from {', '.join(NAMES)}")


def gallery() -> list[GallerySystem]:
    """Every entry at its default parameters."""
    return [get_system(n) for n in NAMES]
