"""Tests for the blow-up diagnostics.

Closed-form critical times and singular loci are checked against frozen
exact fractions and surds, and every formula is cross-checked by a numeric
search for denominator zeros of the matching catalog family.
"""

import numpy as np
import pytest

from nlds.catalog import catalog_denominator
from nlds.dt_ds1 import DegenerateParameterError
from nlds.singularity import (
    SingularityReport,
    WrongBranchError,
    ds1_critical_time,
    ds1_two_rogue_interval,
    ds2_critical_time,
    ds2_two_rational_interval,
    locate_blowup,
    ridge_lines,
    two_rational_interval_quadratic,
)

PI = np.pi


def conic_value(locus, x, y):
    c = locus["coefficients"]
    return (c["xx"] * x * x + c["xy"] * x * y + c["yy"] * y * y
            + c["x"] * x + c["y"] * y + c["const"])


class TestDs1CriticalTime:
    def test_reference_parameters(self):
        rep = ds1_critical_time(r1=2.0, phi1=2 * PI, e1=0.0, f1=1.0, eps=1)
        assert rep.kind == "point-time"
        assert abs(rep.t_c) < 1e-15, f"t_c {rep.t_c}"
        assert rep.locus["label"] == "hyperbola"
        assert rep.interval is None

    def test_affine_zero_sits_on_conic(self):
        rep = ds1_critical_time(r1=2.0, phi1=2 * PI, e1=0.0, f1=1.0, eps=1)
        y0 = rep.extras["affine_zero_y"]
        assert abs(y0 + 1.04) < 1e-12, f"affine zero y {y0}"
        for x in (8.0 / 15.0, -8.0 / 15.0):
            val = conic_value(rep.locus, x, y0)
            assert abs(val) < 1e-12, f"conic at ({x}, {y0}) = {val}"

    def test_time_shift_moves_critical_time(self):
        rep = ds1_critical_time(r1=2.0, phi1=2 * PI, e1=1.0, f1=0.0, eps=1)
        assert abs(rep.t_c + 8.0 / 17.0) < 1e-15, f"t_c {rep.t_c} vs -8/17"

    def test_minus_eps_interval(self):
        rep = ds1_critical_time(r1=2.0, phi1=2 * PI, e1=0.0, f1=0.0, eps=-1)
        assert rep.kind == "interval"
        lo, hi = rep.interval
        assert abs(lo + 16.0 / 45.0) < 1e-12, f"lower {lo} vs -16/45"
        assert abs(hi - 16.0 / 45.0) < 1e-12, f"upper {hi} vs 16/45"
        qlo, qhi = rep.extras["interval_from_y_quadratic"]
        assert abs(qlo + 16.0 / 51.0) < 1e-12, f"quad lower {qlo} vs -16/51"
        assert abs(qhi - 16.0 / 51.0) < 1e-12, f"quad upper {qhi} vs 16/51"

    def test_off_branch_angle_rejected(self):
        with pytest.raises(WrongBranchError):
            ds1_critical_time(r1=2.0, phi1=PI / 3.0)

    def test_unit_radius_rejected(self):
        with pytest.raises(DegenerateParameterError):
            ds1_critical_time(r1=1.0, phi1=2 * PI)


class TestDs1TwoRogueInterval:
    def test_reference_endpoint(self):
        lo, hi = ds1_two_rogue_interval(2.0)
        assert abs(hi - 0.2852872498953095) < 1e-14, f"t_+ {hi}"
        assert abs(lo + hi) < 1e-16, f"asymmetric {lo} {hi}"

    def test_pinned_value(self):
        _lo, hi = ds1_two_rogue_interval(2.0)
        assert abs(hi - 0.285287) < 1e-5, f"pinned endpoint off: {hi}"

    def test_radius_inversion_invariance(self):
        _lo, hi = ds1_two_rogue_interval(2.0)
        _lo2, hi2 = ds1_two_rogue_interval(0.5)
        assert abs(hi2 - hi) < 1e-14, f"r -> 1/r broke: {hi2} vs {hi}"

    def test_unit_radius_rejected(self):
        with pytest.raises(DegenerateParameterError):
            ds1_two_rogue_interval(1.0)


class TestDs2CriticalTime:
    def test_reference_parameters(self):
        rep = ds2_critical_time(phi1=-PI / 6.0, e1=0.0)
        assert rep.kind == "point-time"
        assert abs(rep.t_c - np.sqrt(3.0) / 3.0) < 1e-12, f"t_c {rep.t_c}"
        assert rep.locus["label"] == "hyperbola"

    def test_conic_coefficients(self):
        rep = ds2_critical_time(phi1=-PI / 6.0, e1=0.0)
        c = rep.locus["coefficients"]
        assert abs(c["yy"] - 9.0 / 4.0) < 1e-12, f"yy {c['yy']}"
        assert abs(c["xx"] + 3.0 / 4.0) < 1e-12, f"xx {c['xx']}"
        assert abs(c["y"]) < 1e-12 and abs(c["const"] - 1.0) < 1e-12, f"{c}"
        assert abs(rep.extras["min_abs_x"] - 2.0 / np.sqrt(3.0)) < 1e-12

    def test_offset_shifts_linear_coefficients(self):
        rep = ds2_critical_time(phi1=-PI / 6.0, f1=0.5)
        c = rep.locus["coefficients"]
        cphi = np.cos(-PI / 6.0)
        assert abs(c["y"] - 4.0 * cphi ** 3) < 1e-12, f"y {c['y']}"
        assert abs(c["const"] - (cphi ** 2 + 1.0)) < 1e-12, \
            f"const {c['const']}"

    @pytest.mark.parametrize("phi", [PI / 2.0, PI], ids=["half-pi", "pi"])
    def test_never_singular_angles(self, phi):
        rep = ds2_critical_time(phi1=phi)
        assert rep.kind == "none" and rep.locus is None, rep.as_dict()

    def test_degenerate_double_angle_rejected(self):
        with pytest.raises(DegenerateParameterError):
            ds2_critical_time(phi1=PI / 4.0)

    @pytest.mark.parametrize("bad", [{"eps": -1}, {"r1": 2.0}],
                             ids=["eps", "radius"])
    def test_off_branch_parameters_rejected(self, bad):
        with pytest.raises(WrongBranchError):
            ds2_critical_time(phi1=-PI / 6.0, **bad)


class TestDs2TwoRationalInterval:
    def test_pinned_published_bracket(self):
        assert ds2_two_rational_interval() == [0.326232, 0.628852]

    def test_exact_roots_satisfy_quadratic(self):
        lo, hi = ds2_two_rational_interval(exact=True)
        a, b, c = two_rational_interval_quadratic()
        for root in (lo, hi):
            res = a * root * root + b * root + c
            assert abs(res) < 1e-9, f"root residual {res}"

    def test_exact_endpoints(self):
        lo, hi = ds2_two_rational_interval(exact=True)
        assert abs(lo - 0.326232) < 1e-5, f"exact lower {lo}"
        assert abs(hi - 0.6289522751263353) < 1e-12, f"exact upper {hi}"

    def test_published_upper_differs_from_root(self):
        # the two endpoints disagree past the shared leading digits, so the
        # pinned value and the quadratic root are genuinely distinct numbers
        _lo, hi = ds2_two_rational_interval(exact=True)
        pinned = ds2_two_rational_interval()
        assert abs(hi - pinned[1]) > 9e-5


class TestRidgeLines:
    def test_ds2_travelling_lines(self):
        out = ridge_lines("ds2_travelling", {"phi1": PI / 6.0, "e1": 1.0})
        l1, l2 = out["lines"]
        got = (l1["x"], l1["y"], l1["t"], l1["const"])
        want = (1.5, -np.sqrt(3.0) / 2.0, np.sqrt(3.0) / 2.0, 1.5)
        assert np.allclose(got, want, atol=1e-12), f"l1 {got} vs {want}"
        assert abs(l2["x"] + l1["x"]) < 1e-15, "l2 must flip the x part"
        assert abs(out["angle"] - PI / 3.0) < 1e-15, f"angle {out['angle']}"

    def test_ds1_travelling_lines(self):
        out = ridge_lines("ds1_travelling", {"r1": 2.0, "k": 1.0, "e1": 0.0})
        m1, m2 = out["lines"]
        s1 = -m1["x"] / m1["y"]
        s2 = -m2["x"] / m2["y"]
        assert s1 * s2 < 0, f"slopes {s1} {s2} must have opposite signs"
        assert "angle" not in out

    def test_non_travelling_family_rejected(self):
        with pytest.raises(WrongBranchError):
            ridge_lines("ds1_fundamental")

    def test_zero_offset_rejected(self):
        with pytest.raises(WrongBranchError):
            ridge_lines("ds2_travelling", {"f1": 0.0})


class TestLocateBlowup:
    def test_ds1_zeros_on_hyperbola(self):
        params = {"r1": 2.0, "phi1": 2 * PI, "e1": 0.0, "f1": 1.0, "eps": 1}
        den = catalog_denominator("ds1_fundamental", params)
        rep = ds1_critical_time(**params)
        zeros = locate_blowup(den, rep.t_c)
        assert len(zeros) >= 10, f"zeros found: {len(zeros)}"
        worst = max(abs(conic_value(rep.locus, x, y)) for x, y in zeros)
        assert worst < 1e-4, f"zeros off the hyperbola by {worst}"
        assert any(x > 0 for x, _ in zeros), "missing right branch"
        assert any(x < 0 for x, _ in zeros), "missing left branch"
        near = min((x - 8.0 / 15.0) ** 2 + (y + 1.04) ** 2 for x, y in zeros)
        assert near < 1e-2, f"no zero near the reference point: {near}"

    def test_ds1_regular_time_finds_nothing(self):
        params = {"r1": 2.0, "phi1": 2 * PI, "e1": 0.0, "f1": 1.0, "eps": 1}
        den = catalog_denominator("ds1_fundamental", params)
        rep = ds1_critical_time(**params)
        assert locate_blowup(den, rep.t_c - 10.0) == []

    def test_ds2_zeros_on_conic(self):
        den = catalog_denominator("ds2_fundamental", None)
        rep = ds2_critical_time(phi1=-PI / 6.0)
        zeros = locate_blowup(den, rep.t_c)
        assert len(zeros) >= 10, f"zeros found: {len(zeros)}"
        worst = max(abs(conic_value(rep.locus, x, y)) for x, y in zeros)
        assert worst < 1e-4, f"zeros off the conic by {worst}"
        min_x = min(abs(x) for x, _ in zeros)
        assert min_x > rep.extras["min_abs_x"] - 1e-6, \
            f"zero inside the forbidden strip: |x| = {min_x}"

    def test_two_rational_window(self):
        den = catalog_denominator("ds2_two_rational", None)
        inside = locate_blowup(den, 0.4)
        assert len(inside) >= 2, f"t=0.4 zeros: {len(inside)}"
        assert locate_blowup(den, 0.7) == []


class TestFormulaVsSearch:
    def test_ds2_search_matches_formula(self):
        den = catalog_denominator("ds2_fundamental", None)
        t_c = ds2_critical_time(phi1=-PI / 6.0).t_c

        def local_min(t):
            cx, cy, half = 1.1547, 0.0, 0.15
            best = None
            for _ in range(4):
                xs = np.linspace(cx - half, cx + half, 41)
                ys = np.linspace(cy - half, cy + half, 41)
                xg, yg = np.meshgrid(xs, ys)
                vals = np.abs(den(xg, yg, np.full_like(xg, t)))
                j, i = np.unravel_index(np.argmin(vals), vals.shape)
                cx, cy, best = xg[j, i], yg[j, i], vals[j, i]
                half *= 0.12
            return best

        ts = t_c + np.linspace(-2e-4, 2e-4, 21)
        gs = [local_min(t) for t in ts]
        t_star = ts[int(np.argmin(gs))]
        assert abs(t_star - t_c) < 1e-4, f"search {t_star} vs formula {t_c}"


class TestReportShape:
    def test_as_dict_for_quiet_report(self):
        rep = SingularityReport("none", notes=["quiet"])
        d = rep.as_dict()
        assert d["kind"] == "none" and d["locus"] is None, d

    def test_as_text_fields(self):
        txt = ds2_critical_time(phi1=-PI / 6.0).as_text()
        assert "t_c:" in txt and "locus:" in txt, txt

    def test_kind_none_with_locus_rejected(self):
        with pytest.raises(ValueError):
            SingularityReport("none", locus={"label": "x"})
