"""Exact pointwise geometry of the resolved conifold chart.

Chart coordinates are (z, u, v) with z an affine coordinate on the base
projective line and (u, v) fibre coordinates; the conical radius is

    r^3 = (1 + |z|^2) (|u|^2 + |v|^2).

Everything radial is driven by one primitive: for a potential g(t) of
t = r^3 the complex Hessian is

    (i ddbar g)[j,k] = g''(t) a_j conj(a_k) + g'(t) T[j,k],

where a = (h ubar, h vbar, zbar S) is the gradient of t and T its Hessian,
with h = 1 + |z|^2 and S = |u|^2 + |v|^2.  Closed-form derivative rules are
hand-derived for the potential family {r^2, log r, log h, F(r^3)}; the
finite-difference oracle below is a separate, deliberately dumb
implementation used only for cross-validation.
"""

from dataclasses import dataclass

import numpy as np

from .forms import ADAPTED_COFRAME, CHART_COFRAME, HermitianMatrixForm


class ZeroFibreError(ValueError):
    """Cone-region formulas need (u, v) != (0, 0)."""


@dataclass(frozen=True)
class ChartPoint:
    """A point of the resolved conifold in bundle coordinates."""

    z: complex
    u: complex
    v: complex

    def fibre_norm_sq(self):
        return abs(self.u) ** 2 + abs(self.v) ** 2

    def base_factor(self):
        return 1.0 + abs(self.z) ** 2

    def shifted(self, dz=0.0, du=0.0, dv=0.0):
        return ChartPoint(self.z + dz, self.u + du, self.v + dv)

    def as_array(self):
        return np.array([self.u, self.v, self.z], dtype=complex)


def radius_cubed(pt):
    t = pt.base_factor() * pt.fibre_norm_sq()
    if t <= 0.0:
        raise ZeroFibreError("point lies on the exceptional curve (u = v = 0)")
    return t


def radius(pt):
    """Conical distance r = [(1+|z|^2)(|u|^2+|v|^2)]^(1/3)."""
    return radius_cubed(pt) ** (1.0 / 3.0)


def _t_gradient(pt):
    """Holomorphic gradient of t = r^3 in coordinate order (u, v, z)."""
    h = pt.base_factor()
    S = pt.fibre_norm_sq()
    return np.array(
        [h * np.conj(pt.u), h * np.conj(pt.v), np.conj(pt.z) * S], dtype=complex
    )


def _t_hessian(pt):
    """Complex Hessian T[j,k] = d^2 t / dw^j dwbar^k, order (u, v, z)."""
    h = pt.base_factor()
    S = pt.fibre_norm_sq()
    z, u, v = pt.z, pt.u, pt.v
    return np.array(
        [
            [h, 0.0, z * np.conj(u)],
            [0.0, h, z * np.conj(v)],
            [np.conj(z) * u, np.conj(z) * v, S],
        ],
        dtype=complex,
    )


def radial_hessian(pt, g1, g2):
    """i ddbar of a radial potential with derivatives g1 = g'(t), g2 = g''(t)."""
    a = _t_gradient(pt)
    H = g2 * np.outer(a, a.conj()) + g1 * _t_hessian(pt)
    return HermitianMatrixForm(H)


def cone_metric(pt):
    """Standard cone metric (3/2) i ddbar r^2 in the chart coframe."""
    t = radius_cubed(pt)
    # g(t) = (3/2) t^(2/3)
    g1 = t ** (-1.0 / 3.0)
    g2 = -(1.0 / 3.0) * t ** (-4.0 / 3.0)
    return radial_hessian(pt, g1, g2)


def log_term(pt):
    """The slow logarithmic piece 6 i ddbar log r = 2 i ddbar log t."""
    t = radius_cubed(pt)
    return radial_hessian(pt, 2.0 / t, -2.0 / t**2)


def fs_pullback(pt):
    """Pullback 4 pi^* omega_FS = 4 i ddbar log(1 + |z|^2)."""
    h = pt.base_factor()
    H = np.zeros((3, 3), dtype=complex)
    H[2, 2] = 4.0 / h**2
    return HermitianMatrixForm(H)


def slow_term(pt):
    """4 pi^* omega_FS - 6 i ddbar log r, the primitive slow-decay piece."""
    return fs_pullback(pt) - log_term(pt)


def dr_wedge(pt):
    """6 i dr wedge dbar r as a Hermitian coefficient matrix."""
    t = radius_cubed(pt)
    a = _t_gradient(pt)
    return HermitianMatrixForm((2.0 / 3.0) * t ** (-4.0 / 3.0) * np.outer(a, a.conj()))


def dr_wedge_identity_residual(pt, coefficient=6.0):
    """Max-norm residual of coefficient * i dr^dbar r = cone - 3 r^2 i ddbar log r.

    The true identity has coefficient 6; other values are negative controls.
    """
    t = radius_cubed(pt)
    lhs = (coefficient / 6.0) * dr_wedge(pt).H
    rhs = cone_metric(pt).H - (t ** (2.0 / 3.0) / 2.0) * log_term(pt).H
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class AdaptedFrame:
    """Linear coframe change diagonalizing the cone geometry at a point.

    At a base point with z = 0 the fibre coordinates rotate so that the cone
    metric becomes the identity; J maps new differentials to chart ones,
    (du, dv, dz) = J (dx, dy, dz').
    """

    base_point: ChartPoint
    J: np.ndarray
    r_o: float

    def to_adapted(self, omega):
        return omega.transform(self.J, ADAPTED_COFRAME)

    def from_adapted(self, omega):
        return omega.transform(np.linalg.inv(self.J), CHART_COFRAME)


def adapted_frame(pt, tol=1e-12):
    """Adapted frame at a point with z = 0 (rotate the chart there first)."""
    if abs(pt.z) > tol:
        raise ValueError(
            "adapted frames require z = 0 at the base point; "
            "use rotate_to_zero_z first"
        )
    S = pt.fibre_norm_sq()
    if S == 0.0:
        raise ZeroFibreError("adapted frame undefined on the exceptional curve")
    r_o = S ** (1.0 / 3.0)  # r^3 = hS with h = 1
    c = np.sqrt(1.5) / r_o
    J = np.array(
        [
            [c * pt.u, -np.conj(pt.v) / r_o, 0.0],
            [c * pt.v, np.conj(pt.u) / r_o, 0.0],
            [0.0, 0.0, 1.0 / r_o],
        ],
        dtype=complex,
    )
    return AdaptedFrame(pt, J, r_o)


def rotate_to_zero_z(pt):
    """Chart rotation moving the base coordinate of pt to the origin.

    Returns (rotated point, mapping) where mapping sends any chart point to
    the rotated chart.  The rotation is the unitary bundle automorphism
    induced by an SU(2) action on the base; it preserves r, the cone metric,
    the log term and the Fubini-Study pullback.
    """
    z0 = pt.z
    h0 = 1.0 + abs(z0) ** 2
    s = 1.0 / np.sqrt(h0)

    def mapping(q):
        w = 1.0 + np.conj(z0) * q.z
        z_new = (q.z - z0) / w
        scale = w * s
        return ChartPoint(z_new, q.u * scale, q.v * scale)

    return mapping(pt), mapping


def basis_decomposition(pt):
    """Adapted-frame unit (1,1)-blocks via the geometric forms.

    Returns (X, Y, Z) in the chart coframe, where at the point

        Z = r^2 pi^* omega_FS
        Y = 3 r^2 i ddbar log r - r^2 pi^* omega_FS
        X = cone - 3 r^2 i ddbar log r

    so that X + Y + Z is the cone metric and, in the adapted frame, the three
    blocks are i dx^dxbar, i dy^dybar, i dz^dzbar.
    """
    t = radius_cubed(pt)
    r2 = t ** (2.0 / 3.0)
    Z = (r2 / 4.0) * fs_pullback(pt)
    three_log = 0.5 * log_term(pt)  # 3 i ddbar log r
    Y = r2 * three_log - Z
    X = cone_metric(pt) - r2 * three_log
    return X, Y, Z


# ---------------------------------------------------------------------------
# finite-difference oracle


def fd_i_del_delbar(potential, pt, h=1e-4):
    """Finite-difference i ddbar of a scalar potential at a point.

    Central second differences in the real and imaginary part of every
    coordinate pair; step scaled per coordinate as h * max(1, |coordinate|).
    Second-order accurate; used only to cross-validate closed forms.
    """
    coords = [pt.u, pt.v, pt.z]
    steps = [h * max(1.0, abs(c)) for c in coords]

    def at(shift):
        du, dv, dz = shift
        return potential(ChartPoint(pt.z + dz, pt.u + du, pt.v + dv))

    def unit(j, real):
        step = steps[j]
        out = [0.0, 0.0, 0.0]
        out[j] = step if real else 1j * step
        return tuple(out), step

    H = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        ej_re, hj = unit(j, True)
        ej_im, _ = unit(j, False)
        for k in range(3):
            ek_re, hk = unit(k, True)
            ek_im, _ = unit(k, False)
            if j == k:
                f0 = at((0.0, 0.0, 0.0))
                dxx = (at(ej_re) - 2 * f0 + at(tuple(-c for c in ej_re))) / hj**2
                dyy = (at(ej_im) - 2 * f0 + at(tuple(-c for c in ej_im))) / hj**2
                H[j, k] = 0.25 * (dxx + dyy)
            else:

                def mixed(ea, eb):
                    pp = at(tuple(x + y for x, y in zip(ea, eb)))
                    pm = at(tuple(x - y for x, y in zip(ea, eb)))
                    mp = at(tuple(-x + y for x, y in zip(ea, eb)))
                    mm = at(tuple(-x - y for x, y in zip(ea, eb)))
                    return (pp - pm - mp + mm) / (4.0 * hj * hk)

                dxx = mixed(ej_re, ek_re)
                dxy = mixed(ej_re, ek_im)
                dyx = mixed(ej_im, ek_re)
                dyy = mixed(ej_im, ek_im)
                # d/dw^j = (d_x - i d_y)/2, d/dwbar^k = (d_x + i d_y)/2
                H[j, k] = 0.25 * (dxx + 1j * dxy - 1j * dyx + dyy)
    return HermitianMatrixForm(0.5 * (H + H.conj().T))


# ---------------------------------------------------------------------------
# radial potentials with analytic derivatives


@dataclass(frozen=True)
class RadialPotential:
    """Scalar potential of t = r^3 with analytic first and second derivative."""

    value: callable
    d1: callable
    d2: callable

    def __call__(self, t):
        return self.value(t)

    def hessian(self, pt):
        t = radius_cubed(pt)
        return radial_hessian(pt, self.d1(t), self.d2(t))

    def __add__(self, other):
        return RadialPotential(
            lambda t: self.value(t) + other.value(t),
            lambda t: self.d1(t) + other.d1(t),
            lambda t: self.d2(t) + other.d2(t),
        )

    def __mul__(self, other):
        if isinstance(other, RadialPotential):
            return RadialPotential(
                lambda t: self.value(t) * other.value(t),
                lambda t: self.d1(t) * other.value(t) + self.value(t) * other.d1(t),
                lambda t: self.d2(t) * other.value(t)
                + 2.0 * self.d1(t) * other.d1(t)
                + self.value(t) * other.d2(t),
            )
        return RadialPotential(
            lambda t: other * self.value(t),
            lambda t: other * self.d1(t),
            lambda t: other * self.d2(t),
        )

    __rmul__ = __mul__


def power_potential(exponent, prefactor=1.0):
    """prefactor * t^exponent as a RadialPotential."""
    a = float(exponent)
    return RadialPotential(
        lambda t: prefactor * t**a,
        lambda t: prefactor * a * t ** (a - 1.0),
        lambda t: prefactor * a * (a - 1.0) * t ** (a - 2.0),
    )


def log_radius_potential(anchor=1.0):
    """log(r / anchor) = (1/3) log t - log(anchor) as a RadialPotential."""
    c = float(np.log(anchor))
    return RadialPotential(
        lambda t: np.log(t) / 3.0 - c,
        lambda t: 1.0 / (3.0 * t),
        lambda t: -1.0 / (3.0 * t**2),
    )
