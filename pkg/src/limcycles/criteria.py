"""Hypothesis checkers for classical limit-cycle uniqueness theorems.

Each checker returns a :class:`CriterionReport`.  Sign conditions on
intervals are decided exactly (via real roots) when the function is a
polynomial, and otherwise sampled on ``|x| <= X`` (default 10, 4001
points).  Limits at infinity are exact for polynomials and Undetermined
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from . import expr as ex
from .expr import Expr, differentiate
from .field import LienardSpec, PlanarField, big_F, planar_field
from .integrate import POSITIVE_Y_AXIS, Section
from .operators import alpha_array, angular_speed_array, sign_scan
from .roots import bisect_secant

__all__ = [
    "Hypothesis",
    "CriterionReport",
    "HomogeneousFamilySpec",
    "FamilyError",
    "FamilyMismatchError",
    "check_thm1",
    "check_thm2",
    "check_thm3",
    "check_thm4",
    "check_thm5",
    "check_thm6",
    "check_cor1",
    "check_all",
    "not_applicable_report",
    "SATISFIED",
    "VIOLATED",
    "UNDETERMINED",
    "NOT_APPLICABLE",
]

SATISFIED, VIOLATED, UNDETERMINED = "Satisfied", "Violated", "Undetermined"
NOT_APPLICABLE = "not_applicable"
STRICT_TOL = 1e-12
X_DEFAULT = 10.0
N_DEFAULT = 4001
GROWTH_THRESHOLD = 1e3


@dataclass
class Hypothesis:
    statement: str
    status: str
    method: str = "sampled"
    witness: dict | None = None
    domain: tuple[float, float] | None = None
    resolution: int | None = None
    detail: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == SATISFIED

    def to_json(self) -> dict:
        out = {"statement": self.statement, "status": self.status}
        out["method"] = (
            {"kind": "sampled", "domain": list(self.domain) if self.domain else None, "resolution": self.resolution}
            if self.method == "sampled"
            else {"kind": self.method}
        )
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class CriterionReport:
    theorem: str
    hypotheses: list[Hypothesis]
    conclusion_if_satisfied: str
    witnesses: dict[str, float] = dc_field(default_factory=dict)
    notes: list[str] = dc_field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return bool(self.hypotheses) and all(h.ok for h in self.hypotheses)

    @property
    def conclusion(self) -> str:
        return self.conclusion_if_satisfied if self.satisfied else NOT_APPLICABLE

    @property
    def status(self) -> str:
        if self.satisfied:
            return SATISFIED
        if any(h.status == VIOLATED for h in self.hypotheses):
            return VIOLATED
        return UNDETERMINED

    def hypothesis(self, prefix: str) -> Hypothesis:
        for h in self.hypotheses:
            if h.statement.startswith(prefix):
                return h
        raise KeyError(prefix)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "conclusion": self.conclusion,
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "witnesses": self.witnesses,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# one-variable helpers


class _Fn:
    """A function of x: expression plus cached polynomial view."""

    def __init__(self, e: Expr, name: str):
        self.e = e
        self.name = name
        self.coeffs = ex.poly_coeffs(e, "x")

    @property
    def poly(self) -> bool:
        return self.coeffs is not None

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return self.e.eval_array(x)
        return self.e.eval(x)

    def real_roots(self) -> np.ndarray:
        c = self.coeffs
        if c is None:
            raise TypeError("not a polynomial")
        c = np.trim_zeros(c, "b")
        if c.size <= 1:
            return np.array([])
        r = np.roots(c[::-1])
        real = r[np.abs(r.imag) <= 1e-7 * (1 + np.abs(r))].real
        out = []
        for v in np.sort(real):
            out.append(_polish_root(self, float(v)))
        return np.unique(np.round(np.array(out), 14))


def _polish_root(fn: _Fn, r: float) -> float:
    d = np.polynomial.polynomial.polyder(fn.coeffs)
    for _ in range(3):
        fd = np.polynomial.polynomial.polyval(r, d)
        fv = np.polynomial.polynomial.polyval(r, fn.coeffs)
        if fd == 0 or not math.isfinite(fv / fd):
            break
        step = fv / fd
        if abs(step) > 1e-6 * (1 + abs(r)):
            break
        r -= step
    return r


def _wrap_primitive(f: Expr, name: str) -> _Fn:
    c = ex.poly_coeffs(f, "x")
    if c is not None:
        return _Fn(ex.from_coeffs(np.polynomial.polynomial.polyint(c), "x"), name)
    return _QuadFn(f, name)


class _QuadFn(_Fn):
    """Antiderivative of a non-polynomial integrand, by quadrature."""

    def __init__(self, integrand: Expr, name: str):
        self.e = None
        self.name = name
        self.coeffs = None
        self.integrand = integrand

    _nodes, _weights = np.polynomial.legendre.leggauss(20)

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.array([self._panels(float(v)) for v in x])
        return big_F(LienardSpec(self.integrand, ex.Var("x")), float(x))

    def _panels(self, x: float) -> float:
        # composite Gauss-Legendre on unit-length panels from 0 to x
        m = max(1, math.ceil(abs(x)))
        edges = np.linspace(0.0, x, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        pts = (mid[:, None] + half[:, None] * self._nodes[None, :]).ravel()
        vals = self.integrand.eval_array(pts).reshape(m, -1)
        return float(np.sum(half * (vals @ self._weights)))


def _grid(X: float, n: int) -> np.ndarray:
    xs = np.linspace(-X, X, n)
    xs[n // 2] = 0.0 if n % 2 else xs[n // 2]
    return xs


def _probe_order(xs: np.ndarray) -> np.ndarray:
    """Integer points first (1, -1, 2, -2, ...), then the rest by |x|."""
    is_int = np.isclose(xs, np.round(xs), atol=1e-12, rtol=0) & (np.round(xs) != 0)
    key = np.where(is_int, 0, 1)
    return np.lexsort((xs < 0, np.abs(xs), key))


def _cmp(v, rel: str):
    if rel == ">0":
        return v > STRICT_TOL
    if rel == "<0":
        return v < -STRICT_TOL
    if rel == ">=0":
        return v >= -STRICT_TOL
    if rel == "<=0":
        return v <= STRICT_TOL
    raise ValueError(rel)


def _interval_text(a, b, closed):
    lo = "-inf" if a == -math.inf else f"{a:.12g}"
    hi = "+inf" if b == math.inf else f"{b:.12g}"
    lb = "[" if closed and a != -math.inf else "("
    rb = "]" if closed and b != math.inf else ")"
    return f"{lb}{lo}, {hi}{rb}"


def _sign_on(fn: _Fn, a: float, b: float, rel: str, closed: bool, X: float, n: int):
    """Check ``fn rel 0`` on the interval; -> (status, witness, method)."""
    if fn.poly:
        roots = fn.real_roots()
        inside = roots[(roots > a) & (roots < b)]
        strict = rel in (">0", "<0")
        if strict and inside.size:
            w = float(inside[0])
            return VIOLATED, {"x": w, "value": float(fn(w))}, "exact"
        cuts = np.concatenate([[a], inside, [b]])
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if lo == -math.inf and hi == math.inf:
                p = 0.0
            elif lo == -math.inf:
                p = hi - 1.0
            elif hi == math.inf:
                p = lo + 1.0
            else:
                p = 0.5 * (lo + hi)
            p = float(p)
            v = float(fn(p))
            if not _cmp(v, rel):
                return VIOLATED, {"x": p, "value": v}, "exact"
        if closed:
            for p in (a, b):
                if math.isfinite(p) and not _cmp(float(fn(p)), rel):
                    return VIOLATED, {"x": float(p), "value": float(fn(p))}, "exact"
        return SATISFIED, None, "exact"

    xs = _grid(X, n)
    hstep = xs[1] - xs[0]
    lo = max(a, -X)
    hi = min(b, X)
    pts = xs[(xs >= lo + (0 if closed and math.isfinite(a) else 0.5 * hstep)) & (xs <= hi - (0 if closed and math.isfinite(b) else 0.5 * hstep))]
    if closed:
        pts = np.concatenate([[p for p in (a, b) if math.isfinite(p) and abs(p) <= X], pts])
    if pts.size == 0:
        return UNDETERMINED, None, "sampled"
    vals = np.asarray(fn(pts), dtype=float)
    bad = ~_cmp(vals, rel) | ~np.isfinite(vals)
    if bad.any():
        order = _probe_order(pts)
        k = order[np.flatnonzero(bad[order])[0]]
        return VIOLATED, {"x": float(pts[k]), "value": float(vals[k])}, "sampled"
    return SATISFIED, None, "sampled"


def _sign_hyp(statement, fn, a, b, rel, closed, X, n) -> Hypothesis:
    status, w, method = _sign_on(fn, a, b, rel, closed, X, n)
    return Hypothesis(statement, status, method, w, (-X, X) if method == "sampled" else None, n if method == "sampled" else None)


def _first_zero(fn: _Fn, side: int, X: float, n: int, start: float = 0.0):
    """First zero of fn strictly beyond ``start`` on the given side, or None."""
    if fn.poly:
        r = fn.real_roots()
        tol = 1e-12 * (1 + abs(start))
        r = r[r > start + tol] if side > 0 else r[r < start - tol]
        if r.size == 0:
            return None
        return float(r.min() if side > 0 else r.max())
    xs = _grid(X, n)
    xs = xs[xs > start] if side > 0 else xs[xs < start][::-1]
    vals = np.asarray(fn(xs), dtype=float)
    ref = float(fn(xs[0])) if xs.size else 0.0
    if ref == 0.0:
        return float(xs[0])
    for i in range(1, xs.size):
        if vals[i] == 0.0:
            return float(xs[i])
        if (vals[i] > 0) != (ref > 0):
            return bisect_secant(lambda s: float(fn(s)), float(xs[i - 1]), float(xs[i]), float(vals[i - 1]), float(vals[i]), ftol=0.0, xtol=1e-14)
    return None


def _negative_interval(fn: _Fn, X, n):
    """(delta-, delta+) bounding the interval around 0 where fn < 0."""
    f0 = float(fn(0.0))
    if not f0 < -STRICT_TOL:
        return None
    return _first_zero(fn, -1, X, n), _first_zero(fn, +1, X, n)


def _limit(fn: _Fn, side: int, X: float) -> float | None:
    """lim_{x -> side*inf}: +-inf or a finite value for polynomials, None (unknown) otherwise."""
    if not fn.poly:
        return None
    c = np.trim_zeros(fn.coeffs, "b")
    deg = c.size - 1
    if deg <= 0:
        return float(c[0]) if c.size else 0.0
    lead = c[-1] * (1 if side > 0 else (-1) ** deg)
    return math.inf if lead > 0 else -math.inf


def _growth_evidence(fn: _Fn, side: int, X: float, n: int, target: float) -> dict:
    xs = np.linspace(0, side * X, n // 2 + 1)
    vals = np.asarray(fn(xs), dtype=float)
    tail = vals[-max(10, n // 20):]
    mono = bool(np.all(np.diff(tail) * np.sign(target) > 0))
    return {"value_at_edge": float(vals[-1]), "monotone_tail": mono, "exceeds_threshold": bool(np.sign(target) * vals[-1] > GROWTH_THRESHOLD)}


def _limits_hyp(statement: str, reqs: Sequence[tuple[_Fn, int, float]], any_of: bool, X, n) -> Hypothesis:
    """Asymptotic requirements ``lim fn(side*inf) == target``; all (or any) must hold."""
    results = []
    evidence = {}
    for fn, side, target in reqs:
        lim = _limit(fn, side, X)
        key = f"{fn.name}({'+' if side > 0 else '-'}inf)"
        if lim is None:
            results.append(None)
            evidence[key] = _growth_evidence(fn, side, X, n, target)
        else:
            results.append(lim == target)
            evidence[key] = lim if math.isfinite(lim) else ("+inf" if lim > 0 else "-inf")
    known = [r for r in results if r is not None]
    if any_of:
        if any(known):
            status = SATISFIED
        elif len(known) == len(results):
            status = VIOLATED
        else:
            status = UNDETERMINED
    else:
        if known and not all(known):
            status = VIOLATED
        elif len(known) == len(results):
            status = SATISFIED
        else:
            status = UNDETERMINED
    method = "exact" if len(known) == len(results) else "sampled"
    h = Hypothesis(statement, status, method, None, (-X, X) if method == "sampled" else None, n if method == "sampled" else None)
    h.detail["limits"] = evidence
    if status == VIOLATED:
        h.witness = {"limits": evidence}
    return h


def _is_identity(g: Expr, X, n) -> Hypothesis:
    fn = _Fn(g, "g")
    stmt = "g(x) = x"
    if fn.poly:
        c = np.trim_zeros(fn.coeffs, "b")
        ok = c.size == 2 and abs(c[0]) <= 1e-14 and abs(c[1] - 1) <= 1e-14
        if ok:
            return Hypothesis(stmt, SATISFIED, "exact")
        p = 2.0
        return Hypothesis(stmt, VIOLATED, "exact", {"x": p, "value": float(fn(p))})
    xs = _grid(X, n)
    d = np.abs(np.asarray(fn(xs)) - xs)
    if np.all(d <= 1e-12 * (1 + np.abs(xs))):
        return Hypothesis(stmt, SATISFIED, "sampled", None, (-X, X), n)
    k = int(np.argmax(d))
    return Hypothesis(stmt, VIOLATED, "sampled", {"x": float(xs[k]), "value": float(fn(xs[k]))}, (-X, X), n)


def _symmetry_hyp(fn: _Fn, parity: str, X, n) -> Hypothesis:
    stmt = f"{fn.name}(x) {parity}"
    sgn = 1.0 if parity == "even" else -1.0
    if fn.poly:
        c = fn.coeffs
        bad_idx = [k for k in range(c.size) if ((k % 2 == 1) if parity == "even" else (k % 2 == 0)) and abs(c[k]) > 1e-14 * max(1.0, np.max(np.abs(c)))]
        if not bad_idx:
            return Hypothesis(stmt, SATISFIED, "exact")
    xs = _grid(X, n)
    xs = xs[xs > 0]
    xs = xs[_probe_order(xs)]
    a = np.asarray(fn(xs), dtype=float)
    b = np.asarray(fn(-xs), dtype=float)
    bad = np.abs(a - sgn * b) > 1e-10 * (1 + np.abs(a))
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        return Hypothesis(
            stmt, VIOLATED, "exact" if fn.poly else "sampled",
            {"x": float(xs[k]), "value": float(a[k]), "value_at_minus_x": float(b[k])},
            None if fn.poly else (-X, X), None if fn.poly else n,
        )
    return Hypothesis(stmt, SATISFIED, "sampled", None, (-X, X), n)


def _xg_hyp(g: _Fn, X, n) -> Hypothesis:
    h1 = _sign_on(g, -math.inf, 0.0, "<0", False, X, n)
    h2 = _sign_on(g, 0.0, math.inf, ">0", False, X, n)
    method = "exact" if g.poly else "sampled"
    stmt = "x*g(x) > 0 for x != 0"
    for st, w, _ in (h1, h2):
        if st != SATISFIED:
            return Hypothesis(stmt, st, method, w, None if g.poly else (-X, X), None if g.poly else n)
    return Hypothesis(stmt, SATISFIED, method, None, None if g.poly else (-X, X), None if g.poly else n)


def _delta_hyp(f: _Fn, X, n, statement: str):
    """Locate delta-/delta+ and check f < 0 between them."""
    iv = _negative_interval(f, X, n)
    if iv is None:
        w = {"x": 0.0, "value": float(f(0.0)), "reason": "f(0) >= 0: no interval around 0 with f < 0"}
        return None, Hypothesis(statement, VIOLATED, "exact", w)
    dm, dp = iv
    if dm is None or dp is None:
        side = "negative" if dm is None else "positive"
        w = {"reason": f"f < 0 on the whole sampled {side} half-line", "x": float(-X if dm is None else X)}
        w["value"] = float(f(w["x"]))
        return None, Hypothesis(statement, VIOLATED, "exact" if f.poly else "sampled", w)
    h = _sign_hyp(statement, f, dm, dp, "<0", False, X, n)
    return (dm, dp), h


def _branches_hyp(f: _Fn, dm, dp, X, n) -> Hypothesis:
    stmt = "f(x) > 0 in (delta+, +inf) or f(x) > 0 in (-inf, delta-)"
    right = _sign_on(f, dp, math.inf, ">0", False, X, n)
    left = _sign_on(f, -math.inf, dm, ">0", False, X, n)
    held = [name for name, r in (("right", right), ("left", left)) if r[0] == SATISFIED]
    method = "exact" if f.poly else "sampled"
    h = Hypothesis(stmt, SATISFIED if held else VIOLATED, method, None, None if f.poly else (-X, X), None if f.poly else n)
    h.detail["branches_holding"] = held
    if not held:
        h.witness = {"right": right[1], "left": left[1]}
    return h


def _gate(theorem: str, spec: LienardSpec, X, n, conclusion: str):
    h = _is_identity(spec.g, X, n)
    if h.ok:
        return None
    rep = CriterionReport(theorem, [h], conclusion)
    rep.notes.append("requires g(x) = x; apply conti_filippov to normalise g first")
    return rep


# ---------------------------------------------------------------------------
# Theorems 1-5 (Liénard equation)


def check_thm1(spec: LienardSpec, X: float = X_DEFAULT, n: int = N_DEFAULT) -> CriterionReport:
    """Levinson-Smith: phase-plane system has exactly one limit cycle."""
    f, g = _Fn(spec.f, "f"), _Fn(spec.g, "g")
    F, G = _wrap_primitive(spec.f, "F"), _wrap_primitive(spec.g, "G")
    hyps = [_xg_hyp(g, X, n)]
    wit = {}
    d, h_neg = _delta_hyp(f, X, n, "f(x) < 0 in (delta-, delta+)")
    stmt = "exists delta- < 0 < delta+ with G(delta-) = G(delta+)"
    if d is None:
        hyps.append(Hypothesis(stmt, VIOLATED, h_neg.method, h_neg.witness))
        hyps.append(h_neg)
    else:
        dm, dp = d
        wit.update(delta_minus=dm, delta_plus=dp)
        Gm, Gp = float(G(dm)), float(G(dp))
        ok = abs(Gm - Gp) <= 1e-9 * (1 + abs(Gp))
        hyps.append(
            Hypothesis(
                stmt, SATISFIED if ok else VIOLATED, "exact" if (f.poly and g.poly) else "sampled",
                None if ok else {"delta_minus": dm, "delta_plus": dp, "G_minus": Gm, "G_plus": Gp},
                detail={"G_delta_minus": Gm, "G_delta_plus": Gp},
            )
        )
        hyps.append(h_neg)
        outer_l = _sign_on(f, -math.inf, dm, ">=0", True, X, n)
        outer_r = _sign_on(f, dp, math.inf, ">=0", True, X, n)
        bad = outer_l if outer_l[0] != SATISFIED else outer_r
        hyps.append(
            Hypothesis(
                "f(x) >= 0 in (-inf, delta-] U [delta+, +inf)", bad[0], bad[2], bad[1],
                None if bad[2] == "exact" else (-X, X), None if bad[2] == "exact" else n,
            )
        )
    hyps.append(_limits_hyp("G(+-inf) = F(+inf) = +inf", [(G, 1, math.inf), (G, -1, math.inf), (F, 1, math.inf)], False, X, n))
    return CriterionReport("thm1", hyps, "exactly_one_cycle", wit)


def check_thm2(spec: LienardSpec, X: float = X_DEFAULT, n: int = N_DEFAULT) -> CriterionReport:
    """Levinson-Smith symmetric case: the Liénard-plane system has exactly one cycle."""
    f, g = _Fn(spec.f, "f"), _Fn(spec.g, "g")
    F, G = _wrap_primitive(spec.f, "F"), _wrap_primitive(spec.g, "G")
    hyps = [_symmetry_hyp(f, "even", X, n), _symmetry_hyp(g, "odd", X, n), _xg_hyp(g, X, n)]
    wit = {}
    x0 = _first_zero(F, +1, X, n)
    stmt = "exists x0 > 0 with F(x) < 0 in (0, x0)"
    if x0 is None:
        hyps.append(Hypothesis(stmt, VIOLATED, "exact" if F.poly else "sampled", {"reason": "F has no positive zero", "x": X, "value": float(F(X))}))
        hyps.append(Hypothesis("F(x) > 0 and increasing in (x0, +inf)", VIOLATED, "exact" if F.poly else "sampled", {"reason": "x0 undefined"}))
    else:
        wit["x0"] = x0
        hyps.append(_sign_hyp(stmt, F, 0.0, x0, "<0", False, X, n))
        pos = _sign_on(F, x0, math.inf, ">0", False, X, n)
        inc = _sign_on(f, x0, math.inf, ">=0", False, X, n)
        bad = pos if pos[0] != SATISFIED else inc
        h = Hypothesis("F(x) > 0 and increasing in (x0, +inf)", bad[0], bad[2], bad[1], None if bad[2] == "exact" else (-X, X), None if bad[2] == "exact" else n)
        hyps.append(h)
    hyps.append(_limits_hyp("G(+inf) = F(+inf) = +inf", [(G, 1, math.inf), (F, 1, math.inf)], False, X, n))
    return CriterionReport("thm2", hyps, "exactly_one_cycle", wit)


def _delta_big(F: _Fn, dp: float, X, n):
    """Smallest Delta > 0 with F(Delta) = F(-Delta) = 0, or None."""
    if F.poly:
        r = F.real_roots()
        cands = r[r > 1e-12]
    else:
        cands = []
        start = 0.0
        while True:
            z = _first_zero(F, +1, X, n, start)
            if z is None:
                break
            cands.append(z)
            start = z + 1e-9
        cands = np.array(cands)
    for r in cands:
        scale = 1.0 + max(abs(float(F(0.5 * r))), abs(float(F(-0.5 * r))))
        if abs(float(F(-r))) <= 1e-9 * scale:
            return float(r)
    return None


def check_thm3(spec: LienardSpec, X: float = X_DEFAULT, n: int = N_DEFAULT) -> CriterionReport:
    """Sansone: g = x, one stable cycle of the Liénard-plane system."""
    gate = _gate("thm3", spec, X, n, "exactly_one_stable_cycle")
    if gate is not None:
        return gate
    f = _Fn(spec.f, "f")
    F = _wrap_primitive(spec.f, "F")
    hyps = [Hypothesis("g(x) = x", SATISFIED, "exact" if f.poly else "sampled")]
    wit = {}
    d, h = _delta_hyp(f, X, n, "exists delta- < 0 < delta+ with f(x) < 0 in (delta-, delta+)")
    hyps.append(h)
    if d is None:
        hyps.append(Hypothesis("f(x) > 0 in (delta+, +inf) or f(x) > 0 in (-inf, delta-)", VIOLATED, h.method, {"reason": "delta+- undefined"}))
    else:
        wit.update(delta_minus=d[0], delta_plus=d[1])
        hyps.append(_branches_hyp(f, d[0], d[1], X, n))
    stmt = "exists Delta > 0 with F(Delta) = F(-Delta) = 0"
    D = _delta_big(F, d[1] if d else 0.0, X, n)
    if D is None:
        hyps.append(Hypothesis(stmt, VIOLATED, "exact" if F.poly else "sampled", {"reason": "no common zero of F(x) and F(-x) for x > 0"}))
    else:
        wit["Delta"] = D
        hyps.append(Hypothesis(stmt, SATISFIED, "exact" if F.poly else "sampled", detail={"F(Delta)": float(F(D)), "F(-Delta)": float(F(-D))}))
    hyps.append(_limits_hyp("F(+inf) = +inf or F(-inf) = -inf", [(F, 1, math.inf), (F, -1, -math.inf)], True, X, n))
    rep = CriterionReport("thm3", hyps, "exactly_one_stable_cycle", wit)
    if d is not None:
        rep.notes.append(f"sign branch(es) holding: {', '.join(hyps[2].detail.get('branches_holding', [])) or 'none'}")
    return rep


def check_thm4(spec: LienardSpec, X: float = X_DEFAULT, n: int = N_DEFAULT) -> CriterionReport:
    """Sansone's divergence theorem: g = x, one stable cycle in the phase plane."""
    gate = _gate("thm4", spec, X, n, "exactly_one_stable_cycle")
    if gate is not None:
        return gate
    f = _Fn(spec.f, "f")
    F = _wrap_primitive(spec.f, "F")
    hyps = [Hypothesis("g(x) = x", SATISFIED, "exact" if f.poly else "sampled")]
    wit = {}
    stmt_in = "exists delta > 0 with f(x) < 0 for x in (-delta, delta)"
    stmt_out = "f(x) > 0 in (-inf, -delta) U (delta, +inf)"
    d, h = _delta_hyp(f, X, n, stmt_in)
    if d is None:
        hyps += [h, Hypothesis(stmt_out, VIOLATED, h.method, {"reason": "delta undefined"})]
    else:
        dm, dp = d
        if abs(dm + dp) > 1e-9 * (1 + dp):
            hyps.append(Hypothesis(stmt_in, VIOLATED, h.method, {"reason": "sign-change points are not symmetric", "delta_minus": dm, "delta_plus": dp}))
        else:
            wit["delta"] = dp
            hyps.append(h)
        right = _sign_on(f, dp, math.inf, ">0", False, X, n)
        left = _sign_on(f, -math.inf, dm, ">0", False, X, n)
        bad = right if right[0] != SATISFIED else left
        hyps.append(Hypothesis(stmt_out, bad[0], bad[2], bad[1], None if bad[2] == "exact" else (-X, X), None if bad[2] == "exact" else n))
    hyps.append(_limits_hyp("F(+inf) = +inf or F(-inf) = -inf", [(F, 1, math.inf), (F, -1, -math.inf)], True, X, n))
    return CriterionReport("thm4", hyps, "exactly_one_stable_cycle", wit)


def check_thm5(spec: LienardSpec, X: float = X_DEFAULT, n: int = N_DEFAULT) -> CriterionReport:
    """Sansone's polar-coordinate theorem: g = x, bounded f."""
    gate = _gate("thm5", spec, X, n, "exactly_one_cycle")
    if gate is not None:
        return gate
    f = _Fn(spec.f, "f")
    fp = _Fn(differentiate(spec.f, "x"), "f'")
    hyps = [Hypothesis("g(x) = x", SATISFIED, "exact" if f.poly else "sampled")]
    wit = {}
    d, h = _delta_hyp(f, X, n, "exists delta- < 0 < delta+ with f(x) < 0 in (delta-, delta+)")
    hyps.append(h)
    if d is not None:
        dm, dp = d
        wit.update(delta_minus=dm, delta_plus=dp)
        hyps.append(_branches_hyp(f, dm, dp, X, n))
        fm, fpv = float(f(dm)), float(f(dp))
        ok = abs(fm) <= 1e-10 and abs(fpv) <= 1e-10
        hyps.append(Hypothesis("f(delta-) = f(delta+) = 0", SATISFIED if ok else VIOLATED, "exact" if f.poly else "sampled", None if ok else {"f(delta-)": fm, "f(delta+)": fpv}))
    else:
        hyps.append(Hypothesis("f(x) > 0 in (delta+, +inf) or f(x) > 0 in (-inf, delta-)", VIOLATED, h.method, {"reason": "delta+- undefined"}))
        hyps.append(Hypothesis("f(delta-) = f(delta+) = 0", VIOLATED, h.method, {"reason": "delta+- undefined"}))
    hyps.append(_bound_hyp(f, 2.0, X, n))
    if d is not None:
        left = _sign_on(fp, -math.inf, d[0], "<=0", False, X, n)
        right = _sign_on(fp, d[1], math.inf, ">=0", False, X, n)
        bad = left if left[0] != SATISFIED else right
        hyps.append(Hypothesis("f non-increasing in (-inf, delta-) and non-decreasing in (delta+, +inf)", bad[0], bad[2], bad[1], None if bad[2] == "exact" else (-X, X), None if bad[2] == "exact" else n))
    else:
        hyps.append(Hypothesis("f non-increasing in (-inf, delta-) and non-decreasing in (delta+, +inf)", VIOLATED, h.method, {"reason": "delta+- undefined"}))
    return CriterionReport("thm5", hyps, "exactly_one_cycle", wit)


def _bound_hyp(f: _Fn, bound: float, X, n) -> Hypothesis:
    stmt = f"|f(x)| < {bound:g}"
    if f.poly:
        c = np.trim_zeros(f.coeffs, "b")
        if c.size <= 1:
            v = float(c[0]) if c.size else 0.0
            ok = abs(v) < bound
            return Hypothesis(stmt, SATISFIED if ok else VIOLATED, "exact", None if ok else {"x": 0.0, "value": v})
        # nonconstant polynomial: unbounded, find a witness
        xs = _grid(X, n)
        for k in _probe_order(xs):
            if abs(float(f(xs[k]))) >= bound:
                return Hypothesis(stmt, VIOLATED, "exact", {"x": float(xs[k]), "value": float(f(xs[k]))})
        p = X
        while abs(float(f(p))) < bound and abs(float(f(-p))) < bound:
            p *= 2
        p = p if abs(float(f(p))) >= bound else -p
        return Hypothesis(stmt, VIOLATED, "exact", {"x": p, "value": float(f(p))})
    xs = _grid(X, n)
    vals = np.abs(np.asarray(f(xs), dtype=float))
    bad = ~(vals < bound)
    if bad.any():
        order = _probe_order(xs)
        k = order[np.flatnonzero(bad[order])[0]]
        return Hypothesis(stmt, VIOLATED, "sampled", {"x": float(xs[k]), "value": float(f(xs[k]))}, (-X, X), n)
    h = Hypothesis(stmt, SATISFIED, "sampled", None, (-X, X), n)
    h.detail["sup_sampled"] = float(vals.max())
    return h


# ---------------------------------------------------------------------------
# planar systems with radial angular monotonicity


def _equilibria(field: PlanarField, region, resolution: int, ball: float = 1e-4):
    """Equilibria found by Newton from grid cells where both P and Q change sign."""
    xmin, xmax, ymin, ymax = region
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    P, Q = field.rhs_array(X, Y)

    def changes(A):
        s = np.sign(A)
        c = np.stack([s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]])
        return (c.max(axis=0) >= 0) & (c.min(axis=0) <= 0)

    cells = np.argwhere(changes(P) & changes(Q))
    found = []
    for i, j in cells:
        p = np.array([0.5 * (xs[j] + xs[j + 1]), 0.5 * (ys[i] + ys[i + 1])])
        for _ in range(200):
            v = np.array(field.rhs(*p))
            J = field.jacobian(*p)
            try:
                step = np.linalg.solve(J, v)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(step)):
                break
            p = p - step
            if np.linalg.norm(step) < 1e-14 * (1 + np.linalg.norm(p)):
                break
        v = np.array(field.rhs(*p))
        if np.linalg.norm(v) < 1e-8 and xmin <= p[0] <= xmax and ymin <= p[1] <= ymax:
            found.append((float(p[0]), float(p[1]), float(np.linalg.norm(v))))
    # any grid point with a tiny field off the ball counts too
    small = (np.hypot(P, Q) < 1e-8) & (np.hypot(X, Y) > ball)
    for a, b in zip(X[small], Y[small]):
        found.append((float(a), float(b), float(np.hypot(*field.rhs(a, b)))))
    others = [p for p in found if math.hypot(p[0], p[1]) > ball]
    return others


def _eta_points(eta, region, samples: int):
    if eta is None:
        eta = POSITIVE_Y_AXIS
    if isinstance(eta, Section):
        xmin, xmax, ymin, ymax = region
        # distance along the ray to the region boundary
        dx, dy = eta.direction
        ax, ay = eta.anchor
        ts = []
        for lim, a, d in ((xmax, ax, dx), (xmin, ax, dx), (ymax, ay, dy), (ymin, ay, dy)):
            if d != 0:
                t = (lim - a) / d
                if t > 0:
                    ts.append(t)
        s_max = min(ts)
        s = np.linspace(1e-3, s_max, samples)
        return np.column_stack([ax + s * dx, ay + s * dy])
    pts = np.asarray(eta, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("eta must be a Section or an (N, 2) array of curve points")
    return pts


def check_thm6(
    field: PlanarField,
    region: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0),
    eta=None,
    resolution: int = 101,
    eta_samples: int = 200,
    ray_resolution: int = 41,
) -> CriterionReport:
    """RAM uniqueness: at most one limit cycle in the region.

    The region plays the role of Omega.  Constant sign of alpha is
    accepted (the sign found is recorded); condition (1) is scanned on a
    grid with a fixed tau sample set, condition (2) on ``eta`` (default:
    positive y-axis up to the region edge).
    """
    region = tuple(map(float, region))
    hyps = []
    eq = _equilibria(field, region, resolution)
    v0 = math.hypot(*field.rhs(0.0, 0.0))
    stmt = "unique equilibrium point at the origin"
    if v0 >= 1e-8:
        hyps.append(Hypothesis(stmt, VIOLATED, "sampled", {"x": 0.0, "y": 0.0, "|V|": v0, "reason": "origin is not an equilibrium"}, region[:2], resolution))
    elif eq:
        p = eq[0]
        hyps.append(Hypothesis(stmt, VIOLATED, "sampled", {"x": p[0], "y": p[1], "|V|": p[2]}, region[:2], resolution))
    else:
        hyps.append(Hypothesis(stmt, SATISFIED, "sampled", None, region[:2], resolution, {"region": list(region)}))

    a = sign_scan(field, "alpha", region, resolution)
    stmt = "alpha(x, y) has constant sign in Omega (literal: alpha >= 0)"
    if a.vanishing:
        h = Hypothesis(stmt, UNDETERMINED, "sampled", None, region[:2], resolution, {"reason": "alpha vanishes identically; RAM degenerate"})
    elif a.constant_sign:
        h = Hypothesis(stmt, SATISFIED, "sampled", None, region[:2], resolution)
    else:
        w = a.witnesses[0]
        h = Hypothesis(stmt, VIOLATED, "sampled", {"x": w[0], "y": w[1], "value": w[2], "witnesses": [list(v) for v in a.witnesses]}, region[:2], resolution)
    h.detail.update(sign="zero" if a.vanishing else a.verdict, literal_condition_holds=a.verdict == "nonnegative" and not a.vanishing, min=a.min_value, max=a.max_value, region=list(region))
    hyps.append(h)

    ray = sign_scan(field, "ray_independence", region, ray_resolution)
    c1 = SATISFIED if ray.constant_sign and not ray.vanishing else VIOLATED
    pts = _eta_points(eta, region, eta_samples)
    om = angular_speed_array(field, pts[:, 0], pts[:, 1])
    pos = np.all(om > STRICT_TOL)
    negv = np.all(om < -STRICT_TOL)
    c2 = SATISFIED if (pos or negv) else VIOLATED
    h = Hypothesis("condition (1) or condition (2) holds", SATISFIED if SATISFIED in (c1, c2) else VIOLATED, "sampled", None, region[:2], resolution)
    h.detail["condition_1"] = {"statement": "V(tau x, tau y) and V(x, y) linearly independent", "status": c1, "taus": list((1.1, 1.5, 2.0, 5.0, 10.0)), "resolution": ray_resolution}
    if c1 != SATISFIED and ray.witnesses:
        h.detail["condition_1"]["witness"] = {"x": ray.witnesses[0][0], "y": ray.witnesses[0][1], "margin": ray.witnesses[0][2]}
    h.detail["condition_2"] = {"statement": "angular speed of constant sign along eta", "status": c2, "samples": len(pts)}
    if c2 == SATISFIED:
        h.detail["condition_2"]["sign"] = "positive" if pos else "negative"
    else:
        good = np.isfinite(om)
        ref = np.sign(om[good][0]) if good.any() else 0.0
        k = int(np.flatnonzero(~(ref * om > STRICT_TOL))[0])
        h.detail["condition_2"]["witness"] = {"x": float(pts[k, 0]), "y": float(pts[k, 1]), "angular_speed": float(om[k])}
    if h.status == VIOLATED:
        h.witness = {"condition_1": h.detail["condition_1"].get("witness"), "condition_2": h.detail["condition_2"].get("witness")}
    hyps.append(h)
    rep = CriterionReport("thm6", hyps, "at_most_one_cycle")
    rep.notes.append("Omega is taken to be the scanned region")
    rep.notes.append("alpha is accepted with either constant sign; the sign found is recorded in the alpha entry")
    return rep


# ---------------------------------------------------------------------------
# homogeneous family with a radially monotone rotation


class FamilyError(ValueError):
    """Family decomposition fails its homogeneity requirements."""


class FamilyMismatchError(RuntimeError):
    """alpha of the assembled field does not equal -x f'(x) l(y) k(y)."""


@dataclass(frozen=True)
class HomogeneousFamilySpec:
    """``x' = k(y), y' = -f(x) l(y) - sum_j h_j(x) m_j(y)``.

    ``k, l`` are d-homogeneous, ``h_j`` j-homogeneous and ``m_j``
    (d-j)-homogeneous; checked numerically on construction.
    """

    k: Expr
    l: Expr
    f: Expr
    terms: tuple = ()
    d: int = 1
    label: str = ""

    def __post_init__(self):
        conv = lambda e: e if isinstance(e, Expr) else ex.parse(str(e))
        object.__setattr__(self, "k", conv(self.k))
        object.__setattr__(self, "l", conv(self.l))
        object.__setattr__(self, "f", conv(self.f))
        object.__setattr__(self, "terms", tuple((conv(h), conv(m), int(j)) for h, m, j in self.terms))
        for name, e, var in (("k", self.k, "x"), ("l", self.l, "x"), ("f", self.f, "y")):
            if e.depends_on(var):
                raise FamilyError(f"{name} must not depend on {var}")
        rng = np.random.default_rng(0)
        args = rng.uniform(-3, 3, 20)
        self._homog("k", self.k, "y", self.d, args)
        self._homog("l", self.l, "y", self.d, args)
        for h, m, j in self.terms:
            if h.depends_on("y") or m.depends_on("x"):
                raise FamilyError("h_j must depend on x only and m_j on y only")
            self._homog(f"h_{j}", h, "x", j, args)
            self._homog(f"m_{j}", m, "y", self.d - j, args)

    @staticmethod
    def _homog(name, e, var, deg, args):
        for t in (2.0, 3.0, 0.5):
            for a in args:
                lhs = e.eval(t * a, 0.0) if var == "x" else e.eval(0.0, t * a)
                base = e.eval(a, 0.0) if var == "x" else e.eval(0.0, a)
                rhs = t**deg * base
                if not abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs)):
                    raise FamilyError(f"{name} is not {deg}-homogeneous: {name}({t}*{a:.4g}) = {lhs:.6g} != {rhs:.6g}")

    def field(self) -> PlanarField:
        x, y = ex.Var("x"), ex.Var("y")
        Q = ex.neg(ex.mul(self.f, self.l))
        for h, m, _ in self.terms:
            Q = ex.sub(Q, ex.mul(h, m))
        return planar_field(self.k, Q, self.label or "homogeneous family")


def check_cor1(
    family: HomogeneousFamilySpec,
    X: float = X_DEFAULT,
    n: int = N_DEFAULT,
    gate_region: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0),
    gate_resolution: int = 41,
) -> CriterionReport:
    """At most one limit cycle for the homogeneous family.

    Before any verdict, alpha of the assembled field is compared with the
    closed form ``-x f'(x) l(y) k(y)``; a mismatch raises
    :class:`FamilyMismatchError`.
    """
    fld = family.field()
    fprime = differentiate(family.f, "x")
    xs = np.linspace(gate_region[0], gate_region[1], gate_resolution)
    ys = np.linspace(gate_region[2], gate_region[3], gate_resolution)
    Xg, Yg = np.meshgrid(xs, ys)
    a_generic = alpha_array(fld, Xg, Yg)
    a_closed = -Xg * fprime.eval_array(Xg) * family.l.eval_array(0.0 * Yg, Yg) * family.k.eval_array(0.0 * Yg, Yg)
    err = np.abs(a_generic - a_closed)
    bad = err > 1e-10 * (1 + np.abs(a_closed))
    if bad.any():
        k = np.unravel_index(np.argmax(err), err.shape)
        raise FamilyMismatchError(
            f"alpha mismatch at ({Xg[k]:.6g}, {Yg[k]:.6g}): generic {a_generic[k]:.10g} vs closed form {a_closed[k]:.10g}"
        )

    hyps = []
    for name, e in (("k", family.k), ("l", family.l)):
        vp, vm = e.eval(0.0, 1.0), e.eval(0.0, -1.0)
        ok = vp > 0 and vm < 0
        w = None if ok else ({"y": 1.0, "value": vp} if not vp > 0 else {"y": -1.0, "value": vm})
        hyps.append(Hypothesis(f"y*{name}(y) > 0 for y != 0", SATISFIED if ok else VIOLATED, "exact", w, detail={"method_note": "homogeneity fixes the sign on each half-line"}))

    xfp = _Fn(ex.mul(ex.Var("x"), fprime), "x*f'")
    stmt = "x*f'(x) has constant sign for x != 0 (literal: x*f'(x) >= 0)"
    nonneg = _sign_on(xfp, -math.inf, math.inf, ">=0", False, X, n)
    nonpos = _sign_on(xfp, -math.inf, math.inf, "<=0", False, X, n)
    method = nonneg[2]
    vanishing = nonneg[0] == SATISFIED and nonpos[0] == SATISFIED
    if vanishing:
        h = Hypothesis(stmt, UNDETERMINED, method, None, None if method == "exact" else (-X, X), None if method == "exact" else n)
        h.detail["reason"] = "alpha vanishes identically; RAM degenerate"
        sign = "zero"
    elif nonneg[0] == SATISFIED or nonpos[0] == SATISFIED:
        h = Hypothesis(stmt, SATISFIED, method, None, None if method == "exact" else (-X, X), None if method == "exact" else n)
        sign = "nonnegative" if nonneg[0] == SATISFIED else "nonpositive"
    else:
        h = Hypothesis(stmt, VIOLATED, method, {"positive_at": nonpos[1], "negative_at": nonneg[1]}, None if method == "exact" else (-X, X), None if method == "exact" else n)
        sign = "mixed"
    alpha_sign = {"nonnegative": "nonpositive", "nonpositive": "nonnegative"}.get(sign, sign)
    h.detail.update(sign=sign, literal_condition_holds=sign == "nonnegative", alpha_sign=alpha_sign)
    hyps.append(h)
    rep = CriterionReport("cor1", hyps, "at_most_one_cycle")
    rep.notes.append("alpha = -x f'(x) l(y) k(y) verified against the generic alpha on the gate grid")
    rep.notes.append("x*f'(x) is accepted with either constant sign; literal x*f'(x) >= 0 and alpha >= 0 cannot both hold unless alpha vanishes")
    return rep


def not_applicable_report(theorem: str, statement: str, reason: str, conclusion: str) -> CriterionReport:
    """Report for a checker whose system class does not match the input."""
    h = Hypothesis(statement, VIOLATED, "exact", {"reason": reason})
    return CriterionReport(theorem, [h], conclusion)


_CONCLUSIONS = {
    "thm1": "exactly_one_cycle",
    "thm2": "exactly_one_cycle",
    "thm3": "exactly_one_stable_cycle",
    "thm4": "exactly_one_stable_cycle",
    "thm5": "exactly_one_cycle",
    "thm6": "at_most_one_cycle",
    "cor1": "at_most_one_cycle",
}


def check_all(spec: LienardSpec | None, field: PlanarField, region=(-2.0, 2.0, -2.0, 2.0), family: HomogeneousFamilySpec | None = None) -> dict[str, CriterionReport]:
    """Every applicable checker, keyed by theorem id."""
    out = {}
    for name in ("thm1", "thm2", "thm3", "thm4", "thm5"):
        if spec is not None:
            out[name] = globals()[f"check_{name}"](spec)
        else:
            out[name] = not_applicable_report(name, "system is a Lienard equation", "no Lienard form supplied", _CONCLUSIONS[name])
    out["thm6"] = check_thm6(field, region)
    if family is not None:
        out["cor1"] = check_cor1(family)
    else:
        out["cor1"] = not_applicable_report("cor1", "system belongs to the homogeneous family", "no family decomposition supplied", _CONCLUSIONS["cor1"])
    return out
