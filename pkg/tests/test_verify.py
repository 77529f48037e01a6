"""Tests for the finite-difference verifier.

The verifier is trusted because it reports a rounding-level residual on the
constant background, a second-order convergence ratio on engine-built
solutions, and a collapsed order on a deliberately corrupted field.  Guard
rails (grid symmetry, spacing, total masking) are exercised directly.
"""

import numpy as np
import pytest

from nlds.dt_ds1 import ds1_highorder, ds1_solution
from nlds.dt_ds2 import ds2_highorder, ds2_solution
from nlds.spectra import GlobalParams, SpectralParams, make_eigen_matrix
from nlds.verify import (
    AllMaskedError,
    ConstantBackgroundSolution,
    GridNotSymmetricError,
    LinearlyCorruptedSolution,
    ResidualReport,
    convergence_order,
    pde_residual,
    residual_with_order,
)

GP1 = GlobalParams(epsilon=1, alpha_sq=1, rho=1.0)
GP1M = GlobalParams(epsilon=-1, alpha_sq=1, rho=1.0)
GP2 = GlobalParams(epsilon=1, alpha_sq=-1, rho=1.0)


def fundamental_ds1(gp, f=1.0):
    sp = SpectralParams(r=2.0, phi=2 * np.pi, e=0.0, f=f)
    return ds1_solution([make_eigen_matrix(sp, gp)], gp)


def fundamental_ds2(gp):
    return ds2_solution([SpectralParams(r=1.0, phi=-np.pi / 6)], gp=gp)


class TestConstantBackground:
    @pytest.mark.parametrize("gp", [GP1, GP1M, GP2],
                             ids=["ds1", "ds1-minus", "ds2"])
    def test_residual_at_rounding_floor(self, gp):
        rep = pde_residual(ConstantBackgroundSolution(gp), gp,
                           t=0.3, h=0.05)
        assert rep.max_eq1 <= 1e-12, f"eq1 floor {rep.max_eq1:.3e}"
        assert rep.max_eq2 <= 1e-12, f"eq2 floor {rep.max_eq2:.3e}"
        assert rep.masked_count == 0

    def test_order_reports_floor(self):
        out = convergence_order(ConstantBackgroundSolution(GP1), GP1,
                                t=0.3, h=0.05)
        assert out == "floor"


class TestEngineConvergence:
    def test_ds1_engine_second_order(self):
        sol = fundamental_ds1(GP1)
        coarse = pde_residual(sol, GP1, (-2, 2, -2, 2), t=-0.5, h=0.04)
        fine = pde_residual(sol, GP1, (-2, 2, -2, 2), t=-0.5, h=0.02)
        r1 = coarse.max_eq1 / fine.max_eq1
        r2 = coarse.max_eq2 / fine.max_eq2
        assert 3.5 <= r1 <= 4.5, f"eq1 halving ratio {r1:.3f}"
        assert 3.5 <= r2 <= 4.5, f"eq2 halving ratio {r2:.3f}"
        assert coarse.masked_count == 0

    def test_ds2_engine_second_order(self):
        sol = fundamental_ds2(GP2)
        coarse = pde_residual(sol, GP2, (-2, 2, -2, 2), t=0.0, h=0.04)
        fine = pde_residual(sol, GP2, (-2, 2, -2, 2), t=0.0, h=0.02)
        r1 = coarse.max_eq1 / fine.max_eq1
        r2 = coarse.max_eq2 / fine.max_eq2
        assert 3.5 <= r1 <= 4.5, f"eq1 halving ratio {r1:.3f}"
        assert 3.5 <= r2 <= 4.5, f"eq2 halving ratio {r2:.3f}"
        assert coarse.masked_count == 0

    def test_corrupted_field_breaks_convergence(self):
        bad = LinearlyCorruptedSolution(fundamental_ds1(GP1))
        order = convergence_order(bad, GP1, (-2, 2, -2, 2), t=-0.5, h=0.04)
        assert order != "floor"
        assert abs(order) < 0.3, f"corrupted order {order:.4f}"

    def test_corruption_amplitude_scales_residual(self):
        sol = fundamental_ds1(GP1)
        small = pde_residual(LinearlyCorruptedSolution(sol, amplitude=0.001),
                             GP1, (-1, 1, -1, 1), t=-0.5, h=0.05)
        large = pde_residual(LinearlyCorruptedSolution(sol, amplitude=0.1),
                             GP1, (-1, 1, -1, 1), t=-0.5, h=0.05)
        assert large.max_eq1 > 10 * small.max_eq1

    @pytest.mark.parametrize("maker,gp,t", [
        (fundamental_ds1, GP1, -0.5),
        (fundamental_ds2, GP2, 0.0),
    ], ids=["ds1", "ds2"])
    def test_convergence_order_in_band(self, maker, gp, t):
        order = convergence_order(maker(gp), gp, (-2, 2, -2, 2), t=t, h=0.04)
        assert order != "floor"
        assert 1.7 <= order <= 2.3, f"order {order:.3f}"


class TestHighOrderEngines:
    def test_ds1_jet_engine_second_order(self):
        sol = ds1_highorder(
            [SpectralParams(r=1.0, phi=np.pi / 4, e=0.4, f=0.0)], [1], GP1)
        order = convergence_order(sol, GP1, (-2, 2, -2, 2), t=2.0, h=0.02)
        assert order == "floor" or 1.7 <= order <= 2.3, f"order {order}"

    def test_ds2_jet_engine_second_order(self):
        sol = ds2_highorder([SpectralParams(r=1.0, phi=2 * np.pi)], [2],
                            None, GP2)
        order = convergence_order(sol, GP2, (-2, 2, -2, 2), t=0.3, h=0.02)
        assert order == "floor" or 1.7 <= order <= 2.3, f"order {order}"


class TestGuards:
    def test_asymmetric_box_rejected(self):
        sol = fundamental_ds1(GP1)
        with pytest.raises(GridNotSymmetricError):
            pde_residual(sol, GP1, (-2, 3, -3, 3), t=-0.5, h=0.02)

    def test_nonpositive_spacing_rejected(self):
        sol = fundamental_ds1(GP1)
        with pytest.raises(ValueError, match="spacing"):
            pde_residual(sol, GP1, (-2, 2, -2, 2), t=-0.5, h=-0.1)
        with pytest.raises(ValueError, match="spacing"):
            pde_residual(sol, GP1, (-2, 2, -2, 2), t=-0.5, h=0.0)

    def test_all_masked_raises(self):
        class AlwaysSingular:
            gp = GP1

            def sample(self, x, y, t, need_w=True):
                shape = np.broadcast(np.asarray(x), np.asarray(y),
                                     np.asarray(t)).shape
                u = np.full(shape, complex(np.nan, np.nan))
                w = u.copy() if need_w else None
                return u, w, np.full(shape, 2, dtype=np.int64)

        with pytest.raises(AllMaskedError):
            pde_residual(AlwaysSingular(), GP1, (-1, 1, -1, 1), t=0.0, h=0.5)

    def test_partial_masking_near_blowup_curve(self):
        # stencils touching the blow-up curve are dropped, not fatal
        sol = fundamental_ds1(GP1M, f=0.0)
        rep = pde_residual(sol, GP1M, (-1, 1, -1, 1), t=0.0, h=0.02)
        assert rep.masked_count > 0
        assert rep.masked_fraction < 0.2, \
            f"masked fraction {rep.masked_fraction:.3f}"


class TestReportShape:
    def test_residual_with_order_fills_order(self):
        rep = residual_with_order(fundamental_ds2(GP2), GP2,
                                  (-1, 1, -1, 1), t=0.0, h=0.05)
        assert isinstance(rep, ResidualReport)
        assert rep.order is not None

    def test_as_dict_keys(self):
        rep = pde_residual(ConstantBackgroundSolution(GP1), GP1,
                           t=0.0, h=0.1)
        d = rep.as_dict()
        want = {"max_residual_eq1", "mean_residual_eq1", "max_residual_eq2",
                "mean_residual_eq2", "masked_count", "total_count",
                "masked_fraction", "h", "order"}
        assert set(d) == want, f"keys {sorted(d)}"

    def test_as_text_mentions_both_equations(self):
        rep = pde_residual(ConstantBackgroundSolution(GP1), GP1,
                           t=0.0, h=0.1)
        text = rep.as_text()
        assert "eq1" in text and "eq2" in text

    def test_masked_fraction_consistent(self):
        rep = pde_residual(ConstantBackgroundSolution(GP1), GP1,
                           t=0.0, h=0.1)
        assert rep.masked_fraction == rep.masked_count / rep.total_count
