"""Finite-difference verification of sampled solutions of the coupled system.

The verifier consumes only point samples of u and w taken from a solution
handle.  The partner field v is rebuilt from the samples by the nonlocal
reflect-conjugation v(x, y, t) = eps * conj(u(-x, y, t)), which is why the
x-axis of the grid must be symmetric about zero.  No symbolic derivative of
the solution is ever used, so a passing report is independent evidence that
the construction satisfies the equations.
"""

import numpy as np

from .dt_ds1 import FLAG_REGULAR

BLOWUP_ABS_U = 1e6
FLOOR_RESIDUAL = 1e-11


class GridNotSymmetricError(ValueError):
    """x-range not symmetric about zero, so u(-x) is off-grid."""


class AllMaskedError(RuntimeError):
    """No stencil survived the singular-sample mask."""


class ResidualReport:
    """Finite-difference residual norms for the two coupled equations.

    max_eq1 / mean_eq1 cover the evolution equation for u, max_eq2 /
    mean_eq2 the auxiliary equation for the mean field w.  Norms exclude
    masked stencils; masked_count says how many interior points were
    dropped out of total_count.  order is filled only by the h vs h/2
    driver and is None otherwise.
    """

    def __init__(self, max_eq1, mean_eq1, max_eq2, mean_eq2,
                 masked_count, total_count, h, order=None):
        self.max_eq1 = float(max_eq1)
        self.mean_eq1 = float(mean_eq1)
        self.max_eq2 = float(max_eq2)
        self.mean_eq2 = float(mean_eq2)
        self.masked_count = int(masked_count)
        self.total_count = int(total_count)
        self.h = float(h)
        self.order = order

    @property
    def masked_fraction(self):
        if self.total_count == 0:
            return 1.0
        return self.masked_count / self.total_count

    def as_dict(self):
        return {
            "max_residual_eq1": self.max_eq1,
            "mean_residual_eq1": self.mean_eq1,
            "max_residual_eq2": self.max_eq2,
            "mean_residual_eq2": self.mean_eq2,
            "masked_count": self.masked_count,
            "total_count": self.total_count,
            "masked_fraction": self.masked_fraction,
            "h": self.h,
            "order": self.order,
        }

    def as_text(self):
        lines = [f"{key}: {value}" for key, value in self.as_dict().items()]
        return "\n".join(lines)

    def __repr__(self):
        return (f"ResidualReport(max_eq1={self.max_eq1:.3e}, "
                f"max_eq2={self.max_eq2:.3e}, "
                f"masked={self.masked_count}/{self.total_count}, "
                f"h={self.h}, order={self.order})")


class ConstantBackgroundSolution:
    """u = rho, w = background constant: the seed the dressing acts on."""

    has_w = True

    def __init__(self, gp):
        self.gp = gp

    def sample(self, x, y, t, need_w=True):
        shape = np.broadcast(np.asarray(x), np.asarray(y),
                             np.asarray(t)).shape
        u = np.full(shape, complex(self.gp.rho), dtype=complex)
        w = (np.full(shape, complex(self.gp.background_w()), dtype=complex)
             if need_w else None)
        flags = np.zeros(shape, dtype=np.int64)
        return u, w, flags


class LinearlyCorruptedSolution:
    """Wraps a solution and adds amplitude * x to u (negative control).

    The corrupted field no longer satisfies the system, so the residual
    stops converging under grid refinement.
    """

    has_w = True

    def __init__(self, sol, amplitude=0.01):
        self._sol = sol
        self.gp = sol.gp
        self.amplitude = float(amplitude)

    def sample(self, x, y, t, need_w=True):
        u, w, flags = self._sol.sample(x, y, t, need_w=need_w)
        return u + self.amplitude * np.asarray(x, dtype=float), w, flags


def _axes(grid, h):
    """Snap the requested box onto an h-lattice with x symmetric about 0."""
    xmin, xmax, ymin, ymax = (float(v) for v in grid)
    if h <= 0:
        raise ValueError(f"grid spacing must be positive, got h={h}")
    if abs(xmin + xmax) > 1e-9 * max(abs(xmin), abs(xmax), 1.0):
        raise GridNotSymmetricError(
            f"x-range [{xmin}, {xmax}] is not symmetric about 0; "
            "the reflected samples u(-x) would fall off-grid")
    if xmax <= 0 or ymax <= ymin:
        raise ValueError(f"empty grid box {grid}")
    mx = int(np.floor(xmax / h + 1e-9))
    xs = h * np.arange(-mx, mx + 1)
    ny = int(np.floor((ymax - ymin) / h + 1e-9))
    ys = ymin + h * np.arange(ny + 1)
    if len(xs) < 3 or len(ys) < 3:
        raise AllMaskedError(
            f"grid {grid} at h={h} has no interior point for a 3-point "
            "stencil")
    return xs, ys


def _sample_u(sol, x, y, t):
    """u-and-flags sample; skips the handle's w work when it can."""
    try:
        return sol.sample(x, y, t, need_w=False)
    except TypeError:
        return sol.sample(x, y, t)


def _bad(u, w, flags):
    bad = np.asarray(flags) != FLAG_REGULAR
    bad |= ~np.isfinite(u.real) | ~np.isfinite(u.imag)
    bad |= np.abs(u) > BLOWUP_ABS_U
    if w is not None:
        bad |= ~np.isfinite(w.real) | ~np.isfinite(w.imag)
    return bad


def pde_residual(sol, gp, grid=(-3.0, 3.0, -3.0, 3.0), t=0.0, h=0.02):
    """Central-difference residuals of both equations at one time slice.

    Samples u and w on the (y outer, x inner) grid at t - h, t, t + h,
    rebuilds v by reflect-conjugation of the sampled u, and forms
    i u_t + (alpha^2/2) u_xx + (1/2) u_yy + (u v - w) u and
    w_xx - alpha^2 w_yy - 2 (u v)_xx with second-order stencils.  Any
    stencil touching a flagged or blown-up sample is masked out of the
    norms.
    """
    xs, ys = _axes(grid, h)
    X, Y = np.meshgrid(xs, ys)
    t = float(t)
    h = float(h)
    alpha2 = complex(gp.alpha) ** 2
    eps = gp.epsilon

    u_m, _w_m, fl_m = _sample_u(sol, X, Y, np.full_like(X, t - h))
    u_0, w_0, fl_0 = sol.sample(X, Y, np.full_like(X, t))
    u_p, _w_p, fl_p = _sample_u(sol, X, Y, np.full_like(X, t + h))
    u_m = np.asarray(u_m, dtype=complex)
    u_0 = np.asarray(u_0, dtype=complex)
    u_p = np.asarray(u_p, dtype=complex)
    w_0 = np.asarray(w_0, dtype=complex)

    # v and the product (u v) come from the samples alone
    v_0 = eps * np.conj(u_0[:, ::-1])
    p_0 = u_0 * v_0

    bad_0 = _bad(u_0, w_0, fl_0)
    bad_0 = bad_0 | bad_0[:, ::-1]
    bad_m = _bad(u_m, None, fl_m)
    bad_p = _bad(u_p, None, fl_p)

    # stencil is masked if any consumed sample is bad: 5-point cross at
    # the middle time plus the center point at t -/+ h
    cross = bad_0[1:-1, 1:-1] | bad_0[1:-1, :-2] | bad_0[1:-1, 2:] \
        | bad_0[:-2, 1:-1] | bad_0[2:, 1:-1]
    mask = cross | bad_m[1:-1, 1:-1] | bad_p[1:-1, 1:-1]
    total = mask.size
    masked = int(np.count_nonzero(mask))
    if masked == total:
        raise AllMaskedError(
            f"all {total} interior stencils masked at t={t} on {grid}")

    h2 = h * h
    with np.errstate(all="ignore"):
        u_t = (u_p[1:-1, 1:-1] - u_m[1:-1, 1:-1]) / (2.0 * h)
        u_xx = (u_0[1:-1, 2:] - 2.0 * u_0[1:-1, 1:-1] + u_0[1:-1, :-2]) / h2
        u_yy = (u_0[2:, 1:-1] - 2.0 * u_0[1:-1, 1:-1] + u_0[:-2, 1:-1]) / h2
        res1 = (1j * u_t + 0.5 * alpha2 * u_xx + 0.5 * u_yy
                + (p_0[1:-1, 1:-1] - w_0[1:-1, 1:-1]) * u_0[1:-1, 1:-1])

        w_xx = (w_0[1:-1, 2:] - 2.0 * w_0[1:-1, 1:-1] + w_0[1:-1, :-2]) / h2
        w_yy = (w_0[2:, 1:-1] - 2.0 * w_0[1:-1, 1:-1] + w_0[:-2, 1:-1]) / h2
        p_xx = (p_0[1:-1, 2:] - 2.0 * p_0[1:-1, 1:-1] + p_0[1:-1, :-2]) / h2
        res2 = w_xx - alpha2 * w_yy - 2.0 * p_xx

    live = ~mask
    a1 = np.abs(res1[live])
    a2 = np.abs(res2[live])
    return ResidualReport(np.max(a1), np.mean(a1), np.max(a2), np.mean(a2),
                          masked, total, h)


def convergence_order(sol, gp, grid=(-3.0, 3.0, -3.0, 3.0), t=0.0, h=0.02):
    """log2 of the residual drop from h to h/2; ~2 for a real solution.

    Returns the string "floor" when both residuals sit at the rounding
    floor (a constant field differences to machine noise, so the ratio
    carries no information).
    """
    coarse = pde_residual(sol, gp, grid, t, h)
    fine = pde_residual(sol, gp, grid, t, h / 2.0)
    r_c = max(coarse.max_eq1, coarse.max_eq2)
    r_f = max(fine.max_eq1, fine.max_eq2)
    if r_c <= FLOOR_RESIDUAL and r_f <= FLOOR_RESIDUAL:
        return "floor"
    if r_f == 0.0:
        return "floor"
    return float(np.log2(r_c / r_f))


def residual_with_order(sol, gp, grid=(-3.0, 3.0, -3.0, 3.0), t=0.0,
                        h=0.02):
    """ResidualReport at h with the order field filled from an h/2 rerun."""
    report = pde_residual(sol, gp, grid, t, h)
    report.order = convergence_order(sol, gp, grid, t, h)
    return report
