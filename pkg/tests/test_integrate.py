import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from limcycles.field import LienardSpec, energy, planar_field
from limcycles.integrate import POSITIVE_Y_AXIS, Section, integrate, next_crossing, path_integral

HARMONIC = LienardSpec("0", "x")
VDP = LienardSpec("x^2 - 1", "x").field()


def _harmonic_error(traj):
    t = traj.t[-1]
    exact = np.array([math.cos(t), -math.sin(t)])
    return float(np.max(np.abs(traj.xy[-1] - exact)))


class TestBasics:
    def test_harmonic_period(self):
        traj = integrate(HARMONIC.field(), (1.0, 0.0), 2 * math.pi)
        assert traj.reason == "t_end"
        assert traj.t[-1] == pytest.approx(2 * math.pi, abs=1e-15)
        np.testing.assert_allclose(traj.end, (1.0, 0.0), atol=1e-7)

    def test_van_der_pol_bounded(self):
        traj = integrate(VDP, (0.1, 0.0), 100.0)
        r = np.hypot(traj.xy[:, 0], traj.xy[:, 1])
        assert r.max() < 3.0
        assert r[-1] > r[0]

    def test_against_scipy(self):
        traj = integrate(VDP, (0.5, 0.5), 20.0, rtol=1e-11, atol=1e-13)
        ref = solve_ivp(lambda t, u: VDP.rhs(*u), (0, 20), [0.5, 0.5], method="DOP853", rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(traj.end, ref.y[:, -1], atol=1e-8)

    def test_plain_callable(self):
        traj = integrate(lambda x, y: (y, -x), (1.0, 0.0), math.pi)
        np.testing.assert_allclose(traj.end, (-1.0, 0.0), atol=1e-7)

    def test_backward_time(self):
        traj = integrate(HARMONIC.field().reversed(), (1.0, 0.0), 1.0)
        np.testing.assert_allclose(traj.end, (math.cos(1.0), math.sin(1.0)), atol=1e-8)

    def test_blowup(self):
        traj = integrate(planar_field("x^2", "0"), (1.0, 0.0), 10.0)
        assert traj.reason in ("blowup", "step_underflow")
        assert traj.t[-1] < 1.0 + 1e-6

    def test_invalid_tolerance(self):
        with pytest.raises(ValueError):
            integrate(VDP, (0, 1), 1.0, rtol=0.0)

    def test_system8_spirals_to_inner_circle(self):
        r2 = "(x^2 + y^2)"
        fld = planar_field(f"y*({r2} - {r2}^2) + x*(1 - 3*{r2} + {r2}^2)", f"-x*({r2} - {r2}^2) + y*(1 - 3*{r2} + {r2}^2)")
        traj = integrate(fld, (0.0, 0.2), 60.0)
        r = math.hypot(*traj.end)
        assert r == pytest.approx(math.sqrt((3 - math.sqrt(5)) / 2), abs=1e-4)


class TestDenseOutput:
    def test_interpolation_accuracy(self):
        traj = integrate(HARMONIC.field(), (1.0, 0.0), 10.0, rtol=1e-10, atol=1e-12)
        ts = np.linspace(0, 10, 1001)
        pts = traj.interpolate(ts)
        np.testing.assert_allclose(pts[:, 0], np.cos(ts), atol=1e-8)
        np.testing.assert_allclose(pts[:, 1], -np.sin(ts), atol=1e-8)

    def test_interpolation_hits_nodes(self):
        traj = integrate(VDP, (0.3, 0.1), 5.0)
        np.testing.assert_allclose(traj.interpolate(traj.t), traj.xy, atol=1e-14)

    def test_time_reversed_is_same_curve(self):
        traj = integrate(VDP, (0.3, 0.1), 5.0)
        rev = traj.time_reversed()
        assert rev.t[0] == traj.t[0] and rev.t[-1] == traj.t[-1]
        ts = np.linspace(0, 5, 77)
        np.testing.assert_allclose(rev.interpolate(ts), traj.interpolate(5.0 - ts), atol=1e-13)

    def test_refined(self):
        traj = integrate(VDP, (0.3, 0.1), 2.0)
        ref = traj.refined(4)
        assert len(ref) == 4 * (len(traj) - 1) + 1
        np.testing.assert_allclose(ref[::4, 1:], traj.xy, atol=1e-14)

    def test_csv(self, tmp_path):
        traj = integrate(VDP, (0.0, 0.5), 1.0)
        p = tmp_path / "t.csv"
        traj.to_csv(p)
        lines = p.read_text().splitlines()
        assert lines[0] == "t,x,y"
        assert len(lines) == len(traj) + 1
        np.testing.assert_allclose(np.loadtxt(p, delimiter=",", skiprows=1), traj.samples)


class TestCrossings:
    def test_harmonic_return(self):
        (x, y), t = next_crossing(HARMONIC.field(), (0.0, 1.0), POSITIVE_Y_AXIS)
        assert t == pytest.approx(2 * math.pi, abs=1e-8)
        assert x == pytest.approx(0.0, abs=1e-10)
        assert y == pytest.approx(1.0, abs=1e-8)

    def test_van_der_pol_return(self):
        (x, y), t = next_crossing(VDP, (0.0, 2.0), POSITIVE_Y_AXIS)
        ref = solve_ivp(
            lambda t, u: VDP.rhs(*u), (0, 20), [0.0, 2.0], method="DOP853", rtol=1e-12, atol=1e-14,
            events=lambda t, u: u[0] if t > 1e-3 else 1.0,
        )
        crossings = [(tt, yy) for tt, (xx, yy) in zip(ref.t_events[0], ref.y_events[0]) if yy > 0]
        assert y == pytest.approx(crossings[0][1], abs=1e-7)
        assert t == pytest.approx(crossings[0][0], abs=1e-7)
        # one loop lands almost on the cycle (y* = 2.17271...), oracle value frozen
        assert y == pytest.approx(2.17253495, abs=1e-7)

    def test_radial_flow_never_returns(self):
        assert next_crossing(planar_field("x", "y"), (1.0, 1.0), POSITIVE_Y_AXIS, t_max=50.0) is None

    def test_orientation_filter(self):
        # counterclockwise rotation crosses the positive y-axis right-to-left
        rot = planar_field("-y", "x")
        sec = Section(orientation="decreasing_x")
        (x, y), t = next_crossing(rot, (1.0, 0.0), sec)
        assert t == pytest.approx(math.pi / 2, abs=1e-8)
        assert next_crossing(rot, (1.0, 0.0), Section(orientation="increasing_x"), t_max=20.0) is None
        (x2, y2), t2 = next_crossing(rot.reversed(), (1.0, 0.0), Section(orientation="increasing_x"))
        assert y2 == pytest.approx(1.0, abs=1e-8)
        assert t2 == pytest.approx(3 * math.pi / 2, abs=1e-8)

    def test_general_ray(self):
        sec = Section(anchor=(0.0, 0.0), direction=(1.0, 1.0))
        (x, y), t = next_crossing(planar_field("-y", "x"), (1.0, 0.0), sec)
        assert x == pytest.approx(y, abs=1e-10)
        assert t == pytest.approx(math.pi / 4, abs=1e-8)

    def test_crossing_lies_on_section(self):
        (x, y), _ = next_crossing(VDP, (0.0, 0.7), POSITIVE_Y_AXIS)
        assert abs(x) <= 1e-11


class TestPathIntegral:
    def test_constant(self):
        traj = integrate(VDP, (0.3, 0.1), 3.0)
        assert path_integral(traj, lambda x, y: np.ones_like(x)) == pytest.approx(3.0, abs=1e-12)

    def test_harmonic_quadratic(self):
        traj = integrate(HARMONIC.field(), (1.0, 0.0), 2 * math.pi, rtol=1e-11, atol=1e-13)
        assert path_integral(traj, lambda x, y: x * x) == pytest.approx(math.pi, abs=1e-8)


class TestProperties:
    def test_energy_conservation_harmonic(self):
        traj = integrate(HARMONIC.field(), (1.0, 0.0), 100.0)
        E = np.array([energy(HARMONIC, x, y) for x, y in traj.xy])
        assert np.max(np.abs(E - 0.5)) < 1e-8

    def test_fixed_step_fifth_order(self):
        errs = []
        for h in (0.1, 0.05, 0.025):
            traj = integrate(HARMONIC.field(), (1.0, 0.0), 5.0, fixed_step=h)
            errs.append(_harmonic_error(traj))
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        # fifth-order method: halving the step divides the error by about 32
        assert all(r >= 8 for r in ratios)
        assert all(24 < r < 40 for r in ratios)

    def test_tolerance_proportionality(self):
        errs = [_harmonic_error(integrate(HARMONIC.field(), (1.0, 0.0), 10.0, rtol=tol, atol=tol * 1e-3)) for tol in (1e-6, 1e-8, 1e-10)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-8
