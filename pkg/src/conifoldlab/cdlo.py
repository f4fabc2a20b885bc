"""Asymptotically conical Ricci-flat metric on the resolved conifold chart.

The metric is i ddbar F(r^3) + 4 pi^* omega_FS for a radial potential F.
Writing t = r^3 and P(t) = t F'(t), the constant-volume condition

    det(metric) / det(cone) = 1   pointwise

reduces on the chart to the first-order equation P' P (P + 4) = (2/3) t,
which this module integrates numerically; no series solution is assumed.
The admissible branch is singled out by inner regularity (P -> 0 with t),
found by shooting, and the potential is normalized so that

    F(y) = (3/2) y^(2/3) - 2 log y + tail(y),     tail -> 0 at infinity,

i.e. the additive constant of the tail is gauged to zero.  The asymptotic
tail is exposed both as grid data and as a fitted truncated series in powers
of y^(-2/3).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .conifold import fs_pullback, radial_hessian, radius_cubed
from .forms import positivity_check

# 6th-order central first-derivative stencil on a uniform grid
_D6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


class ShootingError(RuntimeError):
    """The radial volume solve failed to meet its boundary matching."""


class ProfileRangeError(ValueError):
    """Requested radius lies outside the solved profile range."""


@dataclass(frozen=True)
class SeriesCoefficients:
    """Tail coefficients c_0..c_N for sum_n c_n y^(-2n/3)."""

    c: tuple
    y_min: float = 1.0

    @property
    def order(self):
        return len(self.c) - 1

    def _check(self, y):
        if np.any(np.asarray(y) < self.y_min):
            raise ProfileRangeError(
                f"series tail not valid below y_min = {self.y_min} "
                "(diverges near the exceptional curve)"
            )

    def tail(self, y):
        self._check(y)
        return sum(cn * y ** (-2.0 * n / 3.0) for n, cn in enumerate(self.c))

    def tail_d1(self, y):
        self._check(y)
        return sum(
            cn * (-2.0 * n / 3.0) * y ** (-2.0 * n / 3.0 - 1.0)
            for n, cn in enumerate(self.c)
        )

    def tail_d2(self, y):
        self._check(y)
        return sum(
            cn * (-2.0 * n / 3.0) * (-2.0 * n / 3.0 - 1.0) * y ** (-2.0 * n / 3.0 - 2.0)
            for n, cn in enumerate(self.c)
        )


def _lead(y):
    return 1.5 * y ** (2.0 / 3.0) - 2.0 * np.log(y)


def _lead_d1(y):
    return y ** (-1.0 / 3.0) - 2.0 / y


def _lead_d2(y):
    return -(1.0 / 3.0) * y ** (-4.0 / 3.0) + 2.0 / y**2


def f1_series(y, coeffs):
    """Leading terms plus truncated tail."""
    return _lead(y) + coeffs.tail(y)


def f1_series_d1(y, coeffs):
    return _lead_d1(y) + coeffs.tail_d1(y)


def f1_series_d2(y, coeffs):
    return _lead_d2(y) + coeffs.tail_d2(y)


def tail_potential(y, coeffs):
    """The tail t(y) = f1(y) - (3/2) y^(2/3) + 2 log y, truncated."""
    return coeffs.tail(y)


@dataclass
class RadialProfile:
    """Grid potential for the asymptotically conical metric.

    Stores (y, F, F1, F2) with F1 = F', F2 = F''; F2 comes from independent
    high-order differentiation of F1 on the log grid, never from the volume
    equation itself, so the constant-volume check downstream stays a real
    test.
    """

    y: np.ndarray
    F: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    meta: dict = field(default_factory=dict)
    _splines: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if np.any(np.diff(self.y) <= 0):
            raise ValueError("y grid must be strictly increasing")

    @property
    def y_range(self):
        return float(self.y[0]), float(self.y[-1])

    def _build_splines(self):
        if self._splines is None:
            x = np.log(self.y)
            tau = self.F - _lead(self.y)
            tau1 = self.F1 - _lead_d1(self.y)
            tau2 = self.F2 - _lead_d2(self.y)
            self._splines = (
                CubicSpline(x, tau),
                CubicSpline(x, tau1),
                CubicSpline(x, tau2),
            )
        return self._splines

    def _check_range(self, y):
        lo, hi = self.y_range
        if np.any(np.asarray(y) < lo) or np.any(np.asarray(y) > hi):
            raise ProfileRangeError(
                f"y = {y} outside the solved profile range [{lo:g}, {hi:g}]"
            )

    def value(self, y):
        self._check_range(y)
        s0, _, _ = self._build_splines()
        return _lead(y) + s0(np.log(y))

    def d1(self, y):
        self._check_range(y)
        _, s1, _ = self._build_splines()
        return _lead_d1(y) + s1(np.log(y))

    def d2(self, y):
        self._check_range(y)
        _, _, s2 = self._build_splines()
        return _lead_d2(y) + s2(np.log(y))

    def tail(self, y):
        self._check_range(y)
        s0, _, _ = self._build_splines()
        return s0(np.log(y))

    def export_table(self, path):
        """Plain-text table (y, F, F', F'') for reproducibility."""
        data = np.column_stack([self.y, self.F, self.F1, self.F2])
        np.savetxt(
            path,
            data,
            header="radial volume profile: columns y F F' F''",
            fmt="%.17e",
        )

    @classmethod
    def import_table(cls, path):
        data = np.loadtxt(path)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def _volume_rhs(x, state):
    t = np.exp(x)
    P = state[0]
    dP = (2.0 / 3.0) * t * t / (P * (P + 4.0))
    dtau = P - (t ** (2.0 / 3.0) - 2.0)
    return [dP, dtau]


def _integrate(x0, x1, P0, tau0, x_eval=None, rtol=1e-12, atol=1e-15):
    stop = lambda x, s: s[0] - 1e-11  # noqa: E731  (terminate before P hits 0)
    stop.terminal = True
    stop.direction = -1
    sol = solve_ivp(
        _volume_rhs,
        (x0, x1),
        [P0, tau0],
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=x_eval is None,
        t_eval=x_eval,
        events=stop,
        max_step=abs(x1 - x0) / 50.0,
    )
    return sol


def solve_radial_cy(
    y_range=(1.0, 1.0e8),
    n_grid=6000,
    t_tiny=1.0e-8,
    t_anchor=10.0,
    inner_tol=5.0e-5,
):
    """Solve the constant-volume condition by shooting on a log grid.

    The shooting parameter is P at the anchor radius; integrating inward,
    only one value continues regularly to the cone tip (P -> 0 with t), and
    bisection pins it down.  The outward continuation to y_range[1] is then a
    plain initial value problem.  Raises ShootingError with a diagnostic if
    the inner boundary matching tolerance is not met.
    """
    y_min, y_max = map(float, y_range)
    if y_min <= 0 or y_max <= y_min:
        raise ValueError("invalid y range")
    if y_min < t_tiny * 10:
        raise ValueError("y_min too close to the exceptional curve")

    x_tiny, x_anchor = np.log(t_tiny), np.log(t_anchor)
    target = t_tiny / np.sqrt(6.0)  # regular branch behaves like t/sqrt(6)

    def inner_mismatch(p):
        sol = _integrate(x_anchor, x_tiny, p, 0.0)
        if sol.t_events[0].size or sol.t[-1] > x_tiny:
            # ran out of positivity before reaching the tip: undershoot
            return -1.0 - (sol.t[-1] - x_tiny)
        return sol.y[0, -1] - target

    p_asym = t_anchor ** (2.0 / 3.0) - 2.0 + 4.0 * t_anchor ** (-2.0 / 3.0)
    lo, hi = p_asym - 1.5, p_asym + 1.5
    f_lo, f_hi = inner_mismatch(lo), inner_mismatch(hi)
    if not (f_lo < 0 < f_hi):
        raise ShootingError(
            f"no sign change in shooting bracket [{lo:.6f}, {hi:.6f}]: "
            f"mismatches ({f_lo:.3e}, {f_hi:.3e})"
        )
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = inner_mismatch(mid)
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    p_star = hi
    mismatch = inner_mismatch(p_star)
    if not (0 <= mismatch <= inner_tol):
        raise ShootingError(
            f"inner regularity mismatch {mismatch:.3e} exceeds tolerance "
            f"{inner_tol:.1e} at P(anchor) = {p_star:.12f}"
        )

    # final sweep on the reporting grid, extended 3 nodes each side so the
    # high-order derivative stencils below stay centred
    x_lo, x_hi = np.log(y_min), np.log(y_max)
    h = (x_hi - x_lo) / (n_grid - 1)
    x_grid = x_lo + h * np.arange(-3, n_grid + 3)
    x_dn = x_grid[x_grid <= x_anchor]
    x_up = x_grid[x_grid > x_anchor]

    sol_dn = _integrate(x_anchor, x_dn[0] - 1e-9, p_star, 0.0, x_eval=x_dn[::-1])
    sol_up = _integrate(x_anchor, x_up[-1] + 1e-9, p_star, 0.0, x_eval=x_up)
    if not (sol_dn.success and sol_up.success):
        raise ShootingError("final profile integration failed")

    P = np.concatenate([sol_dn.y[0][::-1], sol_up.y[0]])
    tau_raw = np.concatenate([sol_dn.y[1][::-1], sol_up.y[1]])

    # gauge: tail -> 0 at infinity.  Beyond the grid the deviation
    # w = P - (t^(2/3) - 2) behaves like a2 t^(-2/3), whose remaining
    # contribution to the tail is (3/2) a2 t^(-2/3); shift accordingly.
    t_grid = np.exp(x_grid)
    w_end = P[-1] - (t_grid[-1] ** (2.0 / 3.0) - 2.0)
    tail_beyond = 1.5 * w_end
    tau = tau_raw - (tau_raw[-1] + tail_beyond)

    F = _lead(t_grid) + tau
    F1 = P / t_grid
    tau1 = (P - (t_grid ** (2.0 / 3.0) - 2.0)) / t_grid

    # independent derivative: 6th-order stencil for d(tau1)/dx, then chain rule
    tau2 = np.zeros_like(tau1)
    n = len(tau1)
    for off, cfac in enumerate(_D6):
        if cfac != 0.0:
            tau2[3 : n - 3] += cfac * tau1[off : off + n - 6]
    tau2 = tau2 / (h * t_grid)
    F2 = _lead_d2(t_grid) + tau2

    keep = slice(3, -3)
    profile = RadialProfile(
        t_grid[keep],
        F[keep],
        F1[keep],
        F2[keep],
        meta={
            "p_anchor": p_star,
            "t_anchor": t_anchor,
            "inner_mismatch": mismatch,
            "n_grid": n_grid,
            "gauge_shift": float(tau_raw[-1] + tail_beyond),
        },
    )
    return profile


def volume_ratio_on_grid(profile):
    """det(metric)/det(cone) on the profile grid, the solve's own residual.

    Computed from the stored (F1, F2); on the chart section used for the
    radial reduction this is (3/2) (F2 t + F1) F1 (F1 t + 4) t / 2 ... i.e.
    det diag(F2 t + F1, F1, F1 t + 4) against det(cone) = 2/3.
    """
    t = profile.y
    d0 = profile.F2 * t + profile.F1
    d1 = profile.F1
    d2 = profile.F1 * t + 4.0
    return (d0 * d1 * d2) / (2.0 / 3.0)


def cdlo_metric(pt, profile):
    """The asymptotically conical metric at a chart point."""
    t = radius_cubed(pt)
    lo, hi = profile.y_range
    if not (lo <= t <= hi):
        raise ProfileRangeError(
            f"r^3 = {t:g} outside profile range [{lo:g}, {hi:g}]"
        )
    H = radial_hessian(pt, float(profile.d1(t)), float(profile.d2(t)))
    return H + fs_pullback(pt)


def cdlo_metric_series(pt, coeffs):
    """Series route to the same metric, for cross-checks at large radius."""
    t = radius_cubed(pt)
    H = radial_hessian(pt, f1_series_d1(t, coeffs), f1_series_d2(t, coeffs))
    return H + fs_pullback(pt)


def cdlo_positive(pt, profile):
    ok, smallest = positivity_check(cdlo_metric(pt, profile))
    return ok, smallest


def fit_series_coefficients(profile, order=4, fit_range=(1.0e3, 1.0e6)):
    """Least-squares tail coefficients against the basis y^(-2n/3)."""
    lo, hi = fit_range
    mask = (profile.y >= lo) & (profile.y <= hi)
    y = profile.y[mask]
    tau = profile.F[mask] - _lead(y)
    basis = np.column_stack([y ** (-2.0 * n / 3.0) for n in range(order + 1)])
    c, *_ = np.linalg.lstsq(basis, tau, rcond=None)
    return SeriesCoefficients(tuple(float(v) for v in c))
