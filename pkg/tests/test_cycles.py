import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from limcycles.cycles import (
    InconsistentStabilityError,
    build_cycle,
    circle_cycle,
    classify,
    find_cycles,
    is_star_shaped,
    return_map,
    scan_cycles,
)
from limcycles.field import LienardSpec, planar_field
from limcycles.gallery import gallery, harmonic, system8, system11, vdp

R_INNER = math.sqrt((3 - math.sqrt(5)) / 2)
R_OUTER = math.sqrt((3 + math.sqrt(5)) / 2)


class TestReturnMap:
    def test_center(self):
        fld = harmonic().field
        for y0 in (0.3, 1.0, 2.5):
            y1, t = return_map(fld, y0)
            assert y1 == pytest.approx(y0, abs=1e-9)
            assert t == pytest.approx(2 * math.pi, abs=1e-8)

    def test_van_der_pol_attracts_from_both_sides(self):
        fld = vdp(1.0).field
        assert return_map(fld, 0.5)[0] > 0.5
        assert return_map(fld, 4.0)[0] < 4.0

    def test_system8_defined_on_annuli(self):
        fld = system8().field
        for y0 in np.linspace(0.2, 1.6, 12):
            assert return_map(fld, float(y0)) is not None
        # outside the repelling circle forward orbits escape to infinity;
        # the reversed map carries them back toward the circle
        for y0 in np.linspace(1.65, 2.5, 8):
            y1, _ = return_map(fld.reversed(), float(y0))
            assert R_OUTER < y1 < y0

    def test_no_return(self):
        assert return_map(planar_field("x", "y"), 1.0, t_max=50.0) is None


class TestSystem8:
    def test_two_circles(self, system8_scan):
        cyc = system8_scan.cycles
        assert len(cyc) == 2
        inner, outer = sorted(cyc, key=lambda c: c.y_star)
        assert np.mean(inner.radii) == pytest.approx(R_INNER, abs=1e-6)
        assert np.mean(outer.radii) == pytest.approx(R_OUTER, abs=1e-6)
        assert np.std(inner.radii) < 1e-6 and np.std(outer.radii) < 1e-6

    def test_stability_and_orientation(self, system8_scan):
        inner, outer = sorted(system8_scan.cycles, key=lambda c: c.y_star)
        assert inner.stability == "attracting" and outer.stability == "repelling"
        assert inner.orientation == "clockwise" and outer.orientation == "counterclockwise"
        assert inner.div_integral < 0 < outer.div_integral
        assert inner.multiplier < 1 < outer.multiplier

    def test_star_shaped(self, system8_scan):
        assert all(c.star_shaped for c in system8_scan.cycles)

    def test_closure(self, system8_scan):
        for c in system8_scan.cycles:
            assert c.residual < 1e-9
            np.testing.assert_allclose(c.samples[-1, 1:], c.samples[0, 1:], atol=1e-8)


class TestVanDerPol:
    def test_single_attracting_cycle(self, vdp_scan):
        assert len(vdp_scan.cycles) == 1
        c = vdp_scan.cycles[0]
        assert c.stability == "attracting"
        assert c.div_integral < 0
        assert c.multiplier < 1
        assert c.star_shaped
        assert c.orientation == "clockwise"

    def test_multiplier_matches_divergence_integral(self, vdp_scan):
        c = vdp_scan.cycles[0]
        # the Poincare multiplier of a planar cycle is exp of the divergence integral
        assert math.log(c.multiplier) == pytest.approx(c.div_integral, rel=1e-4)

    def test_amplitude_against_oracle(self, vdp_scan):
        fld = vdp(1.0).field
        sol = solve_ivp(lambda t, u: fld.rhs(*u), (0, 300), [0.0, 2.0], method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
        ts = np.linspace(280, 300, 200001)
        oracle = np.max(np.abs(sol.sol(ts)[0]))
        assert vdp_scan.cycles[0].amplitude == pytest.approx(oracle, abs=1e-4)
        # frozen oracle value
        assert vdp_scan.cycles[0].amplitude == pytest.approx(2.00861986, abs=1e-7)

    def test_period(self, vdp_scan):
        assert vdp_scan.cycles[0].period == pytest.approx(6.6632868593, abs=1e-8)


class TestSystem11:
    def test_single_repelling_cycle(self, system11_scan):
        assert len(system11_scan.cycles) == 1
        c = system11_scan.cycles[0]
        assert c.stability == "repelling"
        assert c.div_integral > 0 and c.multiplier > 1
        assert c.star_shaped


class TestCenters:
    def test_harmonic_continuum(self, harmonic_scan):
        assert harmonic_scan.cycles == []
        assert harmonic_scan.continuum

    def test_reversible_cubic_is_center(self, cubic_scan):
        assert cubic_scan.cycles == []
        assert cubic_scan.continuum


class TestTimeReversal:
    @pytest.mark.parametrize("sysm", gallery(), ids=lambda s: s.name)
    def test_stability_swap(self, sysm):
        a, b = sysm.seed_range
        fwd = find_cycles(sysm.field, a, b, sysm.n_seeds)
        bwd = find_cycles(sysm.field.reversed(), a, b, sysm.n_seeds)
        assert len(fwd) == len(bwd)
        swap = {"attracting": "repelling", "repelling": "attracting"}
        for c, d in zip(sorted(fwd, key=lambda c: c.y_star), sorted(bwd, key=lambda c: c.y_star)):
            assert d.y_star == pytest.approx(c.y_star, abs=1e-6)
            assert d.stability == swap[c.stability]
            assert d.orientation != c.orientation


class TestClassify:
    def test_inconsistent_evidence_raises(self):
        # a large circle (div = 1 - x^2 integrates negative) tagged with a
        # section point near the unstable focus, where the map expands
        fld = vdp(1.0).field
        t = np.linspace(0, 2 * np.pi, 401)
        fake = circle_cycle((0.0, 0.0), 3.0)
        fake.samples = np.column_stack([t, 3.0 * np.sin(t), 3.0 * np.cos(t)])
        fake.y_star = 0.1
        with pytest.raises(InconsistentStabilityError):
            classify(fld, fake)

    def test_build_cycle_backward_is_closed(self, system11_scan):
        c = system11_scan.cycles[0]
        again = build_cycle(system11().field, c.y_star, direction="backward", orientation=c.crossing)
        assert again.residual < 1e-9
        assert again.period == pytest.approx(c.period, rel=1e-9)


class TestStarShape:
    def test_offset_circle(self):
        res = is_star_shaped(circle_cycle((5.0, 0.0), 1.0))
        assert not res.star_shaped
        assert res.witness is not None

    def test_centered_circle(self):
        assert is_star_shaped(circle_cycle((0.0, 0.0), 1.0)).star_shaped
        assert is_star_shaped(circle_cycle((0.2, -0.1), 1.0, clockwise=True)).star_shaped


class TestScan:
    def test_input_validation(self):
        with pytest.raises(ValueError):
            scan_cycles(vdp().field, 0.0, 1.0)
        with pytest.raises(ValueError):
            scan_cycles(vdp().field, 1.0, 2.0, n_seeds=1)

    def test_json(self, system8_scan):
        out = [c.to_json(with_samples=False) for c in system8_scan.cycles]
        text = json.dumps(out, allow_nan=False)
        back = json.loads(text)
        assert {d["stability"] for d in back} == {"attracting", "repelling"}

    def test_deterministic(self, vdp_scan):
        again = find_cycles(vdp(1.0).field, 0.1, 8.0, 20)
        assert again[0].y_star == vdp_scan.cycles[0].y_star
