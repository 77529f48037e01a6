"""Tests for the closed-form solution family catalog.

The transformation engines serve as the independent oracle for every family
that has an engine construction; agreement is required at 50 random
nonsingular points to 1e-8 relative.  Degenerate reductions, transcript
variants, ridge metadata and far-field behavior are checked against frozen
values.
"""

import json

import numpy as np
import pytest

from nlds.catalog import (
    ClosedFormDS1Fundamental,
    ClosedFormDS2Fundamental,
    FLAG_NEAR_SINGULAR,
    FLAG_REGULAR,
    FLAG_SINGULAR,
    catalog_asymptotics,
    catalog_denominator,
    catalog_eval,
    catalog_ridge_lines,
    catalog_sample,
    catalog_variant,
    family,
    family_ids,
    family_listing,
    local_map_transform,
)
from nlds.dt_ds1 import DegenerateParameterError, ds1_highorder, ds1_solution
from nlds.dt_ds2 import ds2_highorder, ds2_solution
from nlds.spectra import GlobalParams, SpectralParams, make_eigen_matrix

GP1 = GlobalParams(epsilon=1, alpha_sq=1, rho=1.0)
GP2 = GlobalParams(epsilon=1, alpha_sq=-1, rho=1.0)

ALL_IDS = (
    "ds1_fundamental", "ds1_peregrine", "ds1_travelling", "ds1_two_rogue",
    "ds1_hybrid", "ds1_second_order", "ds2_fundamental", "ds2_line",
    "ds2_travelling", "ds2_two_rational", "ds2_second_order",
    "ds2_local_ds1_map",
)

FUND1_PARAMS = {"r1": 2.0, "phi1": 2 * np.pi, "e1": 0.0, "f1": 1.0,
                "eps": 1.0}
FUND2_PARAMS = {"r1": 1.0, "phi1": -np.pi / 6, "e1": 0.0, "f1": 0.0,
                "eps": 1.0}


def rand_pts(rng, n, box=2.5, tbox=1.0):
    return (rng.uniform(-box, box, n), rng.uniform(-box, box, n),
            rng.uniform(-tbox, tbox, n))


def rel_err(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-12)))


class TestRegistry:
    def test_twelve_families(self):
        assert family_ids() == ALL_IDS

    def test_unknown_family_lists_known_ids(self):
        with pytest.raises(KeyError, match="ds1_fundamental"):
            family("no_such_family")

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ValueError, match="zz"):
            catalog_eval("ds1_peregrine", {"zz": 1.0})

    def test_bind_applies_defaults_and_floats(self):
        bound = family("ds1_fundamental").bind({"r1": 3})
        assert bound["r1"] == 3.0 and isinstance(bound["r1"], float)
        assert bound["phi1"] == pytest.approx(2 * np.pi)
        assert bound["eps"] == 1.0

    def test_listing_is_json_serializable(self):
        listing = family_listing()
        assert len(listing) == 12
        text = json.dumps(listing)
        assert "ds2_two_rational" in text
        for entry in listing:
            assert set(entry) >= {"id", "description", "alpha_sq",
                                  "parameters", "has_w", "engine_backed"}

    def test_exactly_one_evaluation_route(self):
        for fid in ALL_IDS:
            fam = family(fid)
            if fam.engine_backed:
                with pytest.raises(ValueError):
                    fam.fields(fam.bind(None))
            else:
                with pytest.raises(ValueError):
                    fam.handle(fam.bind(None))


class TestEngineAgreement:
    """Each closed form against its transformation-engine construction."""

    def test_ds1_fundamental(self):
        rng = np.random.default_rng(11)
        x, y, t = rand_pts(rng, 50)
        handle = ds1_solution([make_eigen_matrix(
            SpectralParams(r=2.0, phi=2 * np.pi, e=0.0, f=1.0), GP1)], GP1)
        ok = np.abs(handle.denominator(x, y, t)) > 1e-6
        assert np.count_nonzero(ok) >= 45
        u_cat, w_cat = catalog_eval("ds1_fundamental", FUND1_PARAMS,
                                    (x, y, t))
        eu = rel_err(u_cat[ok], handle.u(x, y, t)[ok])
        ew = rel_err(w_cat[ok], handle.w(x, y, t)[ok])
        assert eu <= 1e-8, f"u disagreement {eu:.3e}"
        assert ew <= 1e-8, f"w disagreement {ew:.3e}"

    def test_ds1_hybrid(self):
        rng = np.random.default_rng(12)
        x, y, t = rand_pts(rng, 50)
        handle = ds1_solution([
            make_eigen_matrix(SpectralParams(r=1.0, phi=np.pi), GP1),
            make_eigen_matrix(SpectralParams(r=1.0, phi=np.pi / 2,
                                             e=0.7, f=1.3), GP1)], GP1)
        ok = np.abs(handle.denominator(x, y, t)) > 1e-6
        u_cat, w_cat = catalog_eval("ds1_hybrid", {"e2": 0.7, "f2": 1.3},
                                    (x, y, t))
        assert w_cat is None
        eu = rel_err(u_cat[ok], handle.u(x, y, t)[ok])
        assert eu <= 1e-8, f"u disagreement {eu:.3e}"

    def test_ds1_second_order(self):
        rng = np.random.default_rng(13)
        x, y, t = rand_pts(rng, 50)
        handle = ds1_highorder(
            [SpectralParams(r=1.0, phi=np.pi / 4, e=0.4, f=0.0)], [1], GP1)
        ok = np.abs(handle.denominator(x, y, t)) > 1e-6
        u_cat, w_cat = catalog_eval("ds1_second_order", {"e1": 0.4},
                                    (x, y, t))
        assert w_cat is None
        eu = rel_err(u_cat[ok], handle.u(x, y, t)[ok])
        assert eu <= 1e-8, f"u disagreement {eu:.3e}"

    def test_ds2_fundamental(self):
        rng = np.random.default_rng(14)
        x, y, t = rand_pts(rng, 50)
        handle = ds2_solution([SpectralParams(r=1.0, phi=-np.pi / 6)],
                              gp=GP2)
        ok = np.abs(handle.denominator(x, y, t)) > 1e-6
        u_cat, w_cat = catalog_eval("ds2_fundamental", FUND2_PARAMS,
                                    (x, y, t))
        eu = rel_err(u_cat[ok], handle.u(x, y, t)[ok])
        ew = rel_err(w_cat[ok], handle.w(x, y, t)[ok])
        assert eu <= 1e-8, f"u disagreement {eu:.3e}"
        assert ew <= 1e-8, f"w disagreement {ew:.3e}"

    def test_ds2_second_order(self):
        rng = np.random.default_rng(15)
        x, y, t = rand_pts(rng, 50)
        handle = ds2_highorder([SpectralParams(r=1.0, phi=2 * np.pi)], [2],
                               None, GP2)
        ok = np.abs(handle.denominator(x, y, t)) > 1e-4
        assert np.count_nonzero(ok) >= 40
        u_cat, w_cat = catalog_eval("ds2_second_order", {}, (x, y, t))
        eu = rel_err(u_cat[ok], handle.u(x, y, t)[ok])
        ew = rel_err(w_cat[ok], handle.w(x, y, t)[ok])
        assert eu <= 1e-8, f"u disagreement {eu:.3e}"
        assert ew <= 1e-8, f"w disagreement {ew:.3e}"

    def test_engine_backed_families_sample(self):
        u, w = catalog_eval("ds1_two_rogue", {"r1": 2.0}, (0.3, -0.4, 0.9))
        assert w is None and np.isfinite(u.real)
        u2, w2 = catalog_eval("ds2_two_rational", {}, (0.3, -0.4, 0.9))
        assert w2 is None and np.isfinite(u2.real)


class TestDegenerateReductions:
    def test_trivial_background(self):
        # r1^2 = 1 with the minus nonlocality sign collapses exactly
        xs = np.linspace(-3, 3, 7)
        u, w = catalog_eval(
            "ds1_fundamental",
            {"r1": 1.0, "eps": -1.0, "phi1": 0.7, "e1": 0.3, "f1": -0.2},
            (xs, xs * 0.5, xs * 0.1))
        assert np.all(u == 1.0), f"u deviates from 1: {u}"
        assert np.all(w == -1.0), f"w deviates from eps: {w}"

    @pytest.mark.parametrize("fid", ["ds1_peregrine", "ds2_line"])
    def test_line_wave_peak(self, fid):
        for xv in (0.0, 55.5, -123.456):
            u, w = catalog_eval(fid, {}, (xv, 0.0, 0.0))
            assert w is None
            assert abs(u - (-3.0)) < 1e-13, f"{fid} peak {u} at x={xv}"

    def test_line_wave_shifted_center(self):
        u, _ = catalog_eval("ds1_peregrine", {"e1": 0.2, "f1": -0.3},
                            (1.0, 0.3, -0.2))
        assert abs(u - (-3.0)) < 1e-13, f"shifted peak {u}"

    def test_peregrine_x_independent(self):
        params = {"e1": 0.2, "f1": -0.3}
        for xv in (-2.0, 0.0, 1.5):
            up = catalog_eval("ds1_peregrine", params,
                              (xv + 1e-4, 0.7, 0.4))[0]
            um = catalog_eval("ds1_peregrine", params,
                              (xv - 1e-4, 0.7, 0.4))[0]
            du = abs(up - um) / 2e-4
            assert du < 1e-10, f"x-derivative {du:.3e} at x={xv}"


class TestSingularTagging:
    # blow-up point of the default rogue family at t = 0: the affine
    # zero of the second quadratic piece and the matching x offset
    Y_SING = -(0.75 / (2 * 1.25) + 1.0) / 1.25
    X_SING = (2.0 / 5.0) / 0.75

    def test_singular_flag_and_nan(self):
        u, w, fl = catalog_sample("ds1_fundamental", FUND1_PARAMS,
                                  (self.X_SING, self.Y_SING, 0.0))
        assert fl == FLAG_SINGULAR, f"flag {fl}"
        assert np.isnan(u.real) and np.isnan(u.imag)
        assert np.isnan(w.real)

    def test_near_singular_band(self):
        u, _w, fl = catalog_sample("ds1_fundamental", FUND1_PARAMS,
                                   (self.X_SING + 2e-9, self.Y_SING, 0.0))
        assert fl == FLAG_NEAR_SINGULAR, f"flag {fl}"
        assert np.isfinite(u.real), f"near-singular u must stay finite: {u}"

    def test_regular_flag(self):
        u, w, fl = catalog_sample("ds1_fundamental", FUND1_PARAMS,
                                  (1.7, 2.2, 0.8))
        assert fl == FLAG_REGULAR
        assert np.isfinite(u.real) and np.isfinite(w.real)

    def test_scalar_in_scalar_out(self):
        u, w, fl = catalog_sample("ds2_fundamental", None, (0.1, 0.2, 0.3))
        assert isinstance(u, complex) and isinstance(w, complex)
        assert isinstance(fl, int)

    def test_vector_in_vector_out(self):
        x = np.array([0.1, self.X_SING])
        y = np.array([0.2, self.Y_SING])
        t = np.array([0.3, 0.0])
        u, _w, fl = catalog_sample("ds1_fundamental", FUND1_PARAMS,
                                   (x, y, t))
        assert fl.shape == (2,)
        assert fl[0] == FLAG_REGULAR and fl[1] == FLAG_SINGULAR
        assert np.isfinite(u[0]) and np.isnan(u[1].real)


class TestLocalMapIdentity:
    def test_substitution_matches_stored_family(self):
        f_src = family("ds2_second_order").fields({})
        f_img = family("ds2_local_ds1_map").fields({})
        dnum = local_map_transform(f_src["num"]) - f_img["num"]
        dden = local_map_transform(f_src["den"]) - f_img["den"]
        assert dnum.is_zero(), f"num residual {dnum.max_abs_coeff():.3e}"
        assert dden.is_zero(), f"den residual {dden.max_abs_coeff():.3e}"

    def test_substitution_rejects_exponential_pieces(self):
        fields = family("ds1_fundamental").fields(
            family("ds1_fundamental").bind(FUND1_PARAMS))
        # the fundamental family's pieces are polynomial; force a phase
        from nlds.exppoly import ExpPoly
        carrier = ExpPoly.exponential((1.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            local_map_transform(fields["den"] * carrier)

    def test_companion_mean_field_is_exact_negative(self):
        # transcript w numerator equals -2 (den_xx den - den_x^2)
        den = family("ds2_second_order").fields({})["den"]
        w_num = catalog_variant("ds2_second_order")["pieces"]["w_num"]
        ident = (den.derivative("x", 2) * den
                 - den.derivative("x") * den.derivative("x")) * 2.0 + w_num
        assert ident.is_zero(tol=1e-10), \
            f"companion identity residual {ident.max_abs_coeff():.3e}"


class TestClosedFormTypes:
    def test_identity_residuals_vanish(self):
        cf1 = ClosedFormDS1Fundamental(2.0, 2 * np.pi, 0.0, 1.0, 1)
        cf2 = ClosedFormDS2Fundamental(1.0, -np.pi / 6, 0.0, 0.0, 1)
        assert cf1.identity_residual() == 0.0
        assert cf2.identity_residual() == 0.0

    def test_derived_constants(self):
        cf1 = ClosedFormDS1Fundamental(2.0, 2 * np.pi, 0.0, 1.0, 1)
        assert cf1.p1 == pytest.approx(0.75)
        assert cf1.q1 == pytest.approx(1.25)
        cf2 = ClosedFormDS2Fundamental(1.0, -np.pi / 6, 0.0, 0.0, 1)
        assert cf2.p1 == pytest.approx(1.0)
        assert cf2.q1 == pytest.approx(0.0)
        assert cf2.background == pytest.approx(1.0 / 3.0)

    def test_cos_phi_zero_rejected(self):
        with pytest.raises(DegenerateParameterError):
            ClosedFormDS2Fundamental(1.0, np.pi / 2, 0.0, 0.0, 1)

    def test_trivial_branch_rejected(self):
        with pytest.raises(DegenerateParameterError):
            ClosedFormDS1Fundamental(1.0, 0.0, 0.0, 0.0, -1)

    def test_bad_eps_and_zero_radius_rejected(self):
        with pytest.raises(ValueError):
            ClosedFormDS1Fundamental(2.0, 0.0, 0.0, 0.0, 2)
        with pytest.raises(ValueError):
            ClosedFormDS2Fundamental(0.0, 0.3, 0.0, 0.0, 1)


class TestVariants:
    def test_ds1_transcript_reparametrization(self):
        # the transcript form at f1 -> -f1 - p1/q1 evaluates to the same u
        rng = np.random.default_rng(16)
        e1, f1 = 0.37, -0.82
        pars = {"r1": 2.0, "phi1": 0.9, "e1": e1, "f1": f1, "eps": 1.0}
        cf = ClosedFormDS1Fundamental(2.0, 0.9, e1, f1, 1)
        var = catalog_variant("ds1_fundamental",
                              dict(pars, f1=-f1 - cf.p1 / cf.q1))
        x, y, t = rand_pts(rng, 20)
        u_eval = catalog_eval("ds1_fundamental", pars, (x, y, t))[0]
        fv = var["pieces"]["F"].eval(x, y, t)
        f1v = var["pieces"]["F1"].eval(x, y, t)
        u_var = 1.0 - (2j * f1v + 1.0) / fv
        assert rel_err(u_var, u_eval) <= 1e-10

    def test_hybrid_variant_differs_from_validated(self):
        var = catalog_variant("ds1_hybrid", {"e2": 0.7, "f2": 1.3})
        diff = var["pieces"]["G"] - var["pieces"]["G_validated"]
        assert not diff.is_zero(), "transcript and validated forms coincide"

    def test_every_family_carries_notes(self):
        for fid in ALL_IDS:
            var = catalog_variant(fid)
            assert len(var["notes"]) >= 1, f"{fid} has no transcription notes"


class TestRidgeLines:
    def test_ds2_travelling_coefficients(self):
        out = catalog_ridge_lines("ds2_travelling",
                                  {"phi1": np.pi / 6, "e1": 1.0})
        l1, l2 = out["lines"]
        got = (l1["x"], l1["y"], l1["t"], l1["const"])
        want = (1.5, -np.sqrt(3) / 2, np.sqrt(3) / 2, 1.5)
        assert np.allclose(got, want, atol=1e-12), f"l1 {got}"
        assert l2["x"] == -l1["x"], "second line must flip the x coefficient"
        assert out["angle"] == pytest.approx(np.pi / 3)

    def test_ds1_travelling_opposite_slopes(self):
        out = catalog_ridge_lines("ds1_travelling", {"r1": 2.0, "e1": 0.0})
        m1, m2 = out["lines"]
        s1 = -m1["x"] / m1["y"]
        s2 = -m2["x"] / m2["y"]
        assert s1 * s2 < 0, f"slopes {s1} {s2} must have opposite signs"
        assert "angle" not in out

    def test_no_ridge_metadata_rejected(self):
        with pytest.raises(ValueError):
            catalog_ridge_lines("ds1_fundamental", FUND1_PARAMS)


class TestAsymptotics:
    def test_fundamental_families_settle(self):
        rep = catalog_asymptotics("ds1_fundamental",
                                  {"r1": 2.0, "phi1": 2 * np.pi}, 1e3)
        assert rep["u_limit"] == 1.0 and rep["w_limit"] == 1.0
        assert rep["u_deviation"] <= 1e-2, rep
        assert rep["w_deviation"] <= 1e-2, rep
        rep2 = catalog_asymptotics("ds2_fundamental", FUND2_PARAMS, 1e3)
        assert rep2["u_deviation"] <= 1e-2, rep2

    def test_trivial_deviation_exactly_zero(self):
        rep = catalog_asymptotics("ds1_fundamental",
                                  {"r1": 1.0, "eps": -1.0}, 1e3)
        assert rep["u_deviation"] == 0.0
        assert rep["w_deviation"] == 0.0

    @pytest.mark.parametrize(
        "fid", ["ds1_travelling", "ds2_travelling", "ds1_hybrid"])
    def test_travelling_families_rejected(self, fid):
        with pytest.raises(ValueError, match="travelling"):
            catalog_asymptotics(fid)

    @pytest.mark.parametrize(
        "fid", ["ds1_peregrine", "ds1_second_order", "ds2_line",
                "ds2_second_order", "ds2_local_ds1_map"])
    def test_closed_form_rogue_families_settle(self, fid):
        rep = catalog_asymptotics(fid, None, 1e3)
        assert rep["u_deviation"] <= 1e-1, f"{fid}: {rep}"

    def test_engine_family_reports_masking(self):
        # the integral-form pair overflows float64 at |t| = 1e3; every
        # sample is tagged and the deviation degenerates to nan
        rep = catalog_asymptotics("ds2_two_rational", None, 1e3)
        assert 0.0 <= rep["masked_fraction"] <= 1.0
        if rep["masked_fraction"] == 1.0:
            assert np.isnan(rep["u_deviation"])
        else:
            assert rep["u_deviation"] <= 1e-1


class TestValidators:
    @pytest.mark.parametrize("fid, params", [
        ("ds1_two_rogue", {"r1": 1.0}),
        ("ds2_fundamental", {"phi1": np.pi / 2}),
        ("ds2_travelling", {"phi1": 3 * np.pi / 2}),
        ("ds1_fundamental", {"eps": 0.0}),
        ("ds1_fundamental", {"r1": 0.0}),
        ("ds1_travelling", {"r1": 0.0}),
        ("ds1_travelling", {"k": 1.5}),
    ])
    def test_degenerate_parameters_rejected(self, fid, params):
        with pytest.raises((DegenerateParameterError, ValueError)):
            catalog_eval(fid, params, (0.1, 0.2, 0.3))

    def test_trivial_reduction_not_rejected(self):
        # r1 = 1 with eps = -1 must EVALUATE (to the background), while
        # phi1 = 0 there stays legal; only the hyperbola branch rejects it
        u, w = catalog_eval("ds1_fundamental",
                            {"r1": 1.0, "eps": -1.0}, (0.5, 0.5, 0.5))
        assert u == 1.0 and w == -1.0


class TestDenominatorCallable:
    def test_closed_form_denominator(self):
        den = catalog_denominator("ds1_fundamental", FUND1_PARAMS)
        fields = family("ds1_fundamental").fields(
            family("ds1_fundamental").bind(FUND1_PARAMS))
        x = np.linspace(-2, 2, 9)
        assert np.allclose(den(x, x / 2, x / 3),
                           fields["den"].eval(x, x / 2, x / 3))

    def test_engine_denominator_finite(self):
        den = catalog_denominator("ds2_two_rational")
        val = den(0.5, 0.5, 0.4)
        assert np.isfinite(abs(val))
